//! tetradlab: a frame-field differential-geometry engine.
//!
//! The crate computes connections, curvature and torsion over user-declared
//! charts, carries a full Clifford-bundle operator calculus (Dirac operator,
//! Hodge Laplacian, covariant D'Alembertian, Ricci and Einstein operators),
//! and verifies geometric identities and field equations at numerically
//! sampled points.
//!
//! Layout:
//! - [`symexpr`]: scalar expression engine (parse, exact differentiation,
//!   evaluation) so every geometric derivative is symbolic, not
//!   finite-differenced;
//! - [`geometry`]: charts, metrics, frames and coframes;
//! - [`connection`]: the covariant-derivative component families, torsion,
//!   curvature, teleparallel connection;
//! - [`clifford`]: multivector fields, Clifford/exterior products, Hodge
//!   star, exterior derivative and codifferential, Dirac operator;
//! - [`operators`]: the square of the Dirac operator and its decomposition;
//! - [`fieldeq`]: tetrad field equations, Maxwell and Lagrangian identity
//!   suites, plus the deliberately-wrong diagnostic equations;
//! - [`manifold`], [`manifest`], [`suite`]: built-in catalog, manifest
//!   loading, suite runner and report emission.

// Tensor formulas read index-for-index against their derivations; iterator
// rewrites of those loops obscure the index bookkeeping the crate exists to
// keep straight.
#![allow(clippy::needless_range_loop)]
#![allow(clippy::manual_is_multiple_of)]

pub mod clifford;
pub mod connection;
pub mod fieldeq;
pub mod geometry;
pub mod manifest;
pub mod manifold;
pub mod operators;
pub mod suite;
pub mod symexpr;
