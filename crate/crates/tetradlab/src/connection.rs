//! Covariant-derivative component families, torsion, curvature and the
//! teleparallel (Columbus) connection.
//!
//! Three distinct operators act on the tetrad functions q^a_nu and must not
//! share a symbol: the vector-side derivative (written `nabla_plus_q`), the
//! covector-side derivative (`nabla_minus_q`) and the full tensor derivative
//! (`nabla_q`, identically zero through the compatibility identity linking
//! Gamma and omega). Index layout is fixed everywhere as
//! `[upper orthonormal a][lower coordinate mu][lower coordinate nu]`.

use thiserror::Error;

use crate::geometry::{Chart, Coframe, Mat, MetricField};
use crate::symexpr::ScalarField;

#[derive(Debug, Error)]
pub enum ConnectionError {
    #[error("operation requires the Levi-Civita connection, got {0:?}")]
    FlavorMismatch(ConnectionFlavor),
    #[error("connection has no spin coefficients attached")]
    MissingSpinCoefficients,
}

pub type Tensor3 = Vec<Vec<Vec<ScalarField>>>;
pub type Tensor4 = Vec<Vec<Vec<Vec<ScalarField>>>>;

pub fn t3(dim: usize, mut f: impl FnMut(usize, usize, usize) -> ScalarField) -> Tensor3 {
    (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| (0..dim).map(|k| f(i, j, k)).collect())
                .collect()
        })
        .collect()
}

pub fn t4(dim: usize, mut f: impl FnMut(usize, usize, usize, usize) -> ScalarField) -> Tensor4 {
    (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| {
                    (0..dim)
                        .map(|k| (0..dim).map(|l| f(i, j, k, l)).collect())
                        .collect()
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConnectionFlavor {
    LeviCivita,
    Teleparallel,
    Custom,
}

/// Coordinate coefficients Gamma^rho_{mu nu} plus the mixed orthonormal
/// coefficients omega^a_{mu b} of the same connection.
#[derive(Clone)]
pub struct Connection {
    /// gamma[rho][mu][nu] = Gamma^rho_{mu nu} (derivative direction mu)
    pub gamma: Tensor3,
    /// omega[a][mu][b] = omega^a_{mu b} (derivative direction mu)
    pub omega: Option<Tensor3>,
    pub flavor: ConnectionFlavor,
}

impl Connection {
    pub fn omega(&self) -> Result<&Tensor3, ConnectionError> {
        self.omega
            .as_ref()
            .ok_or(ConnectionError::MissingSpinCoefficients)
    }

    pub fn require_levi_civita(&self) -> Result<(), ConnectionError> {
        if self.flavor == ConnectionFlavor::LeviCivita {
            Ok(())
        } else {
            Err(ConnectionError::FlavorMismatch(self.flavor))
        }
    }
}

/// Levi-Civita connection of a metric:
/// Gamma^rho_{mu nu} = 1/2 g^{rho sigma} (d_mu g_{sigma nu} + d_nu g_{sigma mu} - d_sigma g_{mu nu}).
pub fn christoffel(chart: &Chart, m: &MetricField) -> Connection {
    let dim = chart.dim;
    let gamma = t3(dim, |rho, mu, nu| {
        let mut acc = chart.zero();
        for sigma in 0..dim {
            let term = m.g[sigma][nu]
                .diff(mu)
                .add(&m.g[sigma][mu].diff(nu))
                .sub(&m.g[mu][nu].diff(sigma));
            acc = acc.add(&m.ginv[rho][sigma].mul(&term));
        }
        acc.scale(0.5)
    });
    Connection {
        gamma,
        omega: None,
        flavor: ConnectionFlavor::LeviCivita,
    }
}

/// Mixed spin-connection coefficients solved from the compatibility identity:
/// omega^a_{mu b} = (Gamma^beta_{mu nu} q^a_beta - d_mu q^a_nu) q_b^nu.
pub fn spin_connection(cf: &Coframe, conn: &Connection) -> Tensor3 {
    let chart = &cf.chart;
    let dim = chart.dim;
    t3(dim, |a, mu, b| {
        let mut acc = chart.zero();
        for nu in 0..dim {
            let mut inner = cf.q[a][nu].diff(mu).neg();
            for beta in 0..dim {
                inner = inner.add(&conn.gamma[beta][mu][nu].mul(&cf.q[a][beta]));
            }
            acc = acc.add(&inner.mul(&cf.qinv[b][nu]));
        }
        acc
    })
}

/// Covector-side components: nabla-minus_mu q^a_nu = d_mu q^a_nu - Gamma^beta_{mu nu} q^a_beta.
pub fn nabla_minus_q(cf: &Coframe, conn: &Connection) -> Tensor3 {
    let chart = &cf.chart;
    let dim = chart.dim;
    t3(dim, |a, mu, nu| {
        let mut acc = cf.q[a][nu].diff(mu);
        for beta in 0..dim {
            acc = acc.sub(&conn.gamma[beta][mu][nu].mul(&cf.q[a][beta]));
        }
        acc
    })
}

/// Vector-side components: nabla-plus_mu q^a_nu = d_mu q^a_nu + q^b_nu omega^a_{mu b}.
pub fn nabla_plus_q(cf: &Coframe, conn: &Connection) -> Result<Tensor3, ConnectionError> {
    let chart = &cf.chart;
    let dim = chart.dim;
    let omega = conn.omega()?;
    Ok(t3(dim, |a, mu, nu| {
        let mut acc = cf.q[a][nu].diff(mu);
        for b in 0..dim {
            acc = acc.add(&cf.q[b][nu].mul(&omega[a][mu][b]));
        }
        acc
    }))
}

/// Full tensor components:
/// nabla_mu q^a_nu = d_mu q^a_nu - Gamma^beta_{mu nu} q^a_beta + omega^a_{mu b} q^b_nu.
/// For matched (Gamma, omega) this vanishes identically; it is the
/// compatibility identity restated.
pub fn nabla_q(cf: &Coframe, gamma: &Tensor3, omega: &Tensor3) -> Tensor3 {
    let chart = &cf.chart;
    let dim = chart.dim;
    t3(dim, |a, mu, nu| {
        let mut acc = cf.q[a][nu].diff(mu);
        for beta in 0..dim {
            acc = acc.sub(&gamma[beta][mu][nu].mul(&cf.q[a][beta]));
        }
        for b in 0..dim {
            acc = acc.add(&omega[a][mu][b].mul(&cf.q[b][nu]));
        }
        acc
    })
}

/// Antisymmetric torsion components T^a_{mu nu}.
#[derive(Clone)]
pub struct TorsionTensor {
    /// t[a][mu][nu], antisymmetric in (mu, nu) by construction
    pub t: Tensor3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TorsionFrame {
    Coordinate,
    Orthonormal,
}

/// Structure coefficients of the orthonormal frame:
/// c^d_{ab} from [e_a, e_b] = c^d_{ab} e_d.
pub fn structure_coefficients(cf: &Coframe) -> Tensor3 {
    let chart = &cf.chart;
    let dim = chart.dim;
    t3(dim, |d, a, b| {
        let mut acc = chart.zero();
        for sigma in 0..dim {
            let mut comm = chart.zero();
            for rho in 0..dim {
                comm = comm.add(&cf.qinv[a][rho].mul(&cf.qinv[b][sigma].diff(rho)));
                comm = comm.sub(&cf.qinv[b][rho].mul(&cf.qinv[a][sigma].diff(rho)));
            }
            acc = acc.add(&cf.q[d][sigma].mul(&comm));
        }
        acc
    })
}

/// Torsion from the commutator definition tau(X,Y) = D_X Y - D_Y X - [X,Y].
///
/// Coordinate frame: T^rho_{mu nu} = Gamma^rho_{mu nu} - Gamma^rho_{nu mu}
/// (the coordinate basis commutes). Orthonormal frame:
/// T^d_{ab} = omega^d_{ab} - omega^d_{ba} - c^d_{ab} with frame-index
/// coefficients omega^d_{ab} = q_a^mu omega^d_{mu b}.
pub fn torsion_from_commutator(
    cf: &Coframe,
    conn: &Connection,
    frame: TorsionFrame,
) -> Result<TorsionTensor, ConnectionError> {
    let chart = &cf.chart;
    let dim = chart.dim;
    match frame {
        TorsionFrame::Coordinate => Ok(TorsionTensor {
            t: t3(dim, |rho, mu, nu| {
                conn.gamma[rho][mu][nu].sub(&conn.gamma[rho][nu][mu])
            }),
        }),
        TorsionFrame::Orthonormal => {
            let omega = conn.omega()?;
            let omega_frame = t3(dim, |d, a, b| {
                let mut acc = chart.zero();
                for mu in 0..dim {
                    acc = acc.add(&cf.qinv[a][mu].mul(&omega[d][mu][b]));
                }
                acc
            });
            let c = structure_coefficients(cf);
            Ok(TorsionTensor {
                t: t3(dim, |d, a, b| {
                    omega_frame[d][a][b]
                        .sub(&omega_frame[d][b][a])
                        .sub(&c[d][a][b])
                }),
            })
        }
    }
}

/// Torsion from tetrad components: T^a_{mu nu} = nabla-plus_mu q^a_nu - nabla-plus_nu q^a_mu.
/// This MUST use the vector-side derivative.
pub fn torsion_from_tetrad_components(
    cf: &Coframe,
    conn: &Connection,
) -> Result<TorsionTensor, ConnectionError> {
    let np = nabla_plus_q(cf, conn)?;
    let dim = cf.chart.dim;
    Ok(TorsionTensor {
        t: t3(dim, |a, mu, nu| np[a][mu][nu].sub(&np[a][nu][mu])),
    })
}

/// The wrong formula, kept as a first-class diagnostic: antisymmetrizing the
/// covector-side derivative instead of the vector-side one. On the round
/// sphere this produces a spurious nonzero "torsion" for the Levi-Civita
/// connection.
pub fn torsion_wrong_minus(cf: &Coframe, conn: &Connection) -> TorsionTensor {
    let nm = nabla_minus_q(cf, conn);
    let dim = cf.chart.dim;
    TorsionTensor {
        t: t3(dim, |a, mu, nu| nm[a][mu][nu].sub(&nm[a][nu][mu])),
    }
}

/// Teleparallel (navigator/Columbus) connection of a coframe: all frame
/// spin coefficients vanish, so Gamma^beta_{mu nu} = q_a^beta d_mu q^a_nu.
/// Its curvature is zero and its covector-side derivative of the coframe
/// vanishes identically.
pub fn columbus_connection(cf: &Coframe) -> Connection {
    let chart = &cf.chart;
    let dim = chart.dim;
    let gamma = t3(dim, |beta, mu, nu| {
        let mut acc = chart.zero();
        for a in 0..dim {
            acc = acc.add(&cf.qinv[a][beta].mul(&cf.q[a][nu].diff(mu)));
        }
        acc
    });
    let omega = t3(dim, |_, _, _| chart.zero());
    Connection {
        gamma,
        omega: Some(omega),
        flavor: ConnectionFlavor::Teleparallel,
    }
}

/// Riemann, Ricci and scalar curvature of a connection.
#[derive(Clone)]
pub struct CurvatureTensor {
    /// riemann[rho][sigma][mu][nu] = R^rho_{sigma mu nu}
    ///   = d_mu Gamma^rho_{nu sigma} - d_nu Gamma^rho_{mu sigma}
    ///   + Gamma^rho_{mu lam} Gamma^lam_{nu sigma} - Gamma^rho_{nu lam} Gamma^lam_{mu sigma}
    pub riemann: Tensor4,
    /// ricci[mu][nu] = R_{mu nu} = R^rho_{mu rho nu}
    pub ricci: Mat,
    /// ricci_mixed[mu][nu] = R^mu_nu = g^{mu sigma} R_{sigma nu}
    pub ricci_mixed: Mat,
    pub scalar: ScalarField,
}

pub fn curvature(chart: &Chart, conn: &Connection, metric: &MetricField) -> CurvatureTensor {
    let dim = chart.dim;
    let riemann = t4(dim, |rho, sigma, mu, nu| {
        let mut acc = conn.gamma[rho][nu][sigma]
            .diff(mu)
            .sub(&conn.gamma[rho][mu][sigma].diff(nu));
        for lam in 0..dim {
            acc = acc.add(&conn.gamma[rho][mu][lam].mul(&conn.gamma[lam][nu][sigma]));
            acc = acc.sub(&conn.gamma[rho][nu][lam].mul(&conn.gamma[lam][mu][sigma]));
        }
        acc
    });
    let ricci = crate::geometry::mat(dim, |mu, nu| {
        let mut acc = chart.zero();
        for rho in 0..dim {
            acc = acc.add(&riemann[rho][mu][rho][nu]);
        }
        acc
    });
    let ricci_mixed = crate::geometry::mat(dim, |mu, nu| {
        let mut acc = chart.zero();
        for sigma in 0..dim {
            acc = acc.add(&metric.ginv[mu][sigma].mul(&ricci[sigma][nu]));
        }
        acc
    });
    let mut scalar = chart.zero();
    for mu in 0..dim {
        scalar = scalar.add(&ricci_mixed[mu][mu]);
    }
    CurvatureTensor {
        riemann,
        ricci,
        ricci_mixed,
        scalar,
    }
}

/// Frame-index Riemann components R^a_{b c d} built from the mixed spin
/// coefficients (independent of the Gamma route, useful as a cross-check):
/// `R^a_{b mu nu} = d_mu omega^a_{nu b} - d_nu omega^a_{mu b} +
/// omega^a_{mu c} omega^c_{nu b} - omega^a_{nu c} omega^c_{mu b}`,
/// then coordinate slots converted with q_c^mu q_d^nu.
pub fn frame_curvature_from_omega(cf: &Coframe, omega: &Tensor3) -> Tensor4 {
    let chart = &cf.chart;
    let dim = chart.dim;
    let mixed = t4(dim, |a, b, mu, nu| {
        let mut acc = omega[a][nu][b].diff(mu).sub(&omega[a][mu][b].diff(nu));
        for c in 0..dim {
            acc = acc.add(&omega[a][mu][c].mul(&omega[c][nu][b]));
            acc = acc.sub(&omega[a][nu][c].mul(&omega[c][mu][b]));
        }
        acc
    });
    t4(dim, |a, b, c, d| {
        let mut acc = chart.zero();
        for mu in 0..dim {
            for nu in 0..dim {
                acc = acc.add(
                    &mixed[a][b][mu][nu]
                        .mul(&cf.qinv[c][mu])
                        .mul(&cf.qinv[d][nu]),
                );
            }
        }
        acc
    })
}

/// Left side of the wave equation satisfied by the tetrad functions on any
/// manifold with its Levi-Civita connection, re-derived so that it vanishes
/// identically:
///
///   g^{ab} nabla-minus_a nabla-minus_b q^b_mu
///   + g^{ab} (d_a omega^b_{b c} - Gamma^rho_{ab} omega^b_{rho c}
///   - omega^b_{a d} omega^d_{b c}) q^c_mu  = 0,
///
/// where the first term is the tensor Hessian trace of the covector-side
/// components (the covariant D'Alembertian of each coframe leg in
/// components). The curvature contribution is contained in the Hessian; no
/// standalone Ricci term appears.
/// Tensor-Hessian trace of the covector-side components,
/// g^{alpha beta} nabla_alpha nabla_beta q^b_mu: the components of the
/// covariant D'Alembertian of each coframe leg.
pub fn nabla_minus_hessian_trace(cf: &Coframe, conn: &Connection, metric: &MetricField) -> Mat {
    let chart = &cf.chart;
    let dim = chart.dim;
    let nm = nabla_minus_q(cf, conn);
    crate::geometry::mat(dim, |b, mu| {
        let mut acc = chart.zero();
        for alpha in 0..dim {
            for beta in 0..dim {
                let mut term = nm[b][beta][mu].diff(alpha);
                for rho in 0..dim {
                    term = term.sub(&conn.gamma[rho][alpha][beta].mul(&nm[b][rho][mu]));
                    term = term.sub(&conn.gamma[rho][alpha][mu].mul(&nm[b][beta][rho]));
                }
                acc = acc.add(&metric.ginv[alpha][beta].mul(&term));
            }
        }
        acc
    })
}

pub fn wave_equation_q(
    cf: &Coframe,
    conn: &Connection,
    metric: &MetricField,
) -> Result<Mat, ConnectionError> {
    conn.require_levi_civita()?;
    let chart = &cf.chart;
    let dim = chart.dim;
    let omega = conn.omega()?;
    let hess = nabla_minus_hessian_trace(cf, conn, metric);
    Ok(crate::geometry::mat(dim, |b, mu| {
        let mut acc = hess[b][mu].clone();
        for alpha in 0..dim {
            for beta in 0..dim {
                for c in 0..dim {
                    let mut term = omega[b][beta][c].diff(alpha);
                    for rho in 0..dim {
                        term = term.sub(&conn.gamma[rho][alpha][beta].mul(&omega[b][rho][c]));
                    }
                    for d in 0..dim {
                        term = term.sub(&omega[b][alpha][d].mul(&omega[d][beta][c]));
                    }
                    acc = acc.add(&metric.ginv[alpha][beta].mul(&term).mul(&cf.q[c][mu]));
                }
            }
        }
        acc
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{mat, metric_from_coframe, sample_points, Coframe, Signature};
    use std::sync::Arc;

    fn minkowski_chart() -> Arc<Chart> {
        Arc::new(
            Chart::new(
                vec!["x0".into(), "x1".into(), "x2".into(), "x3".into()],
                vec![(-1.0, 1.0); 4],
                Signature::new(1, 3),
            )
            .unwrap(),
        )
    }

    #[test]
    fn spin_connection_vanishes_for_constant_frames_with_zero_gamma() {
        let chart = minkowski_chart();
        let pts = sample_points(&chart, 4, 0);
        // a constant non-trivial coframe
        let vals = [
            [1.2, 0.1, 0.0, 0.0],
            [0.0, 0.9, 0.2, 0.0],
            [0.0, 0.0, 1.1, 0.0],
            [0.3, 0.0, 0.0, 0.8],
        ];
        let q = mat(4, |a, mu| chart.constant(vals[a][mu]));
        let cf = Coframe::new(chart.clone(), q, &pts).unwrap();
        let conn = Connection {
            gamma: t3(4, |_, _, _| chart.zero()),
            omega: None,
            flavor: ConnectionFlavor::Custom,
        };
        let omega = spin_connection(&cf, &conn);
        for p in &pts {
            for f in omega.iter().flatten().flatten() {
                assert!(f.eval(p).unwrap().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn columbus_of_constant_coframe_has_zero_gamma() {
        let chart = minkowski_chart();
        let pts = sample_points(&chart, 4, 0);
        let q = mat(4, |a, mu| chart.constant(if a == mu { 1.0 } else { 0.0 }));
        let cf = Coframe::new(chart.clone(), q, &pts).unwrap();
        let col = columbus_connection(&cf);
        for p in &pts {
            for f in col.gamma.iter().flatten().flatten() {
                assert!(f.eval(p).unwrap().abs() < 1e-15);
            }
        }
    }

    #[test]
    fn torsion_routes_agree_for_a_seeded_custom_connection() {
        use rand::Rng;
        use rand::SeedableRng;
        let chart = minkowski_chart();
        let pts = sample_points(&chart, 8, 0);
        // an s-shaped coframe plus random constant Gamma, deliberately
        // asymmetric and not metric compatible
        let q = mat(4, |a, mu| match (a, mu) {
            (0, 0) | (1, 1) | (2, 2) | (3, 3) => chart.one(),
            (0, 1) => chart.var(0).sin().scale(0.2),
            _ => chart.zero(),
        });
        let cf = Coframe::new(chart.clone(), q, &pts).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let gamma = t3(4, |_, _, _| chart.constant(rng.gen_range(-0.5..0.5)));
        let mut conn = Connection {
            gamma,
            omega: None,
            flavor: ConnectionFlavor::Custom,
        };
        conn.omega = Some(spin_connection(&cf, &conn));
        // coordinate-frame commutator route converted with q^a_rho
        let t_coord = torsion_from_commutator(&cf, &conn, TorsionFrame::Coordinate).unwrap();
        let t_tetrad = torsion_from_tetrad_components(&cf, &conn).unwrap();
        let t_frame = torsion_from_commutator(&cf, &conn, TorsionFrame::Orthonormal).unwrap();
        for p in &pts {
            for a in 0..4 {
                for mu in 0..4 {
                    for nu in 0..4 {
                        let mut want = 0.0;
                        for rho in 0..4 {
                            want += cf.q[a][rho].eval(p).unwrap()
                                * t_coord.t[rho][mu][nu].eval(p).unwrap();
                        }
                        let got = t_tetrad.t[a][mu][nu].eval(p).unwrap();
                        assert!(
                            (got - want).abs() < 1e-9,
                            "coordinate route: {} vs {}",
                            got,
                            want
                        );
                    }
                }
            }
            // orthonormal commutator route against the tetrad route
            for d in 0..4 {
                for a in 0..4 {
                    for b in 0..4 {
                        let mut want = 0.0;
                        for mu in 0..4 {
                            for nu in 0..4 {
                                want += cf.qinv[a][mu].eval(p).unwrap()
                                    * cf.qinv[b][nu].eval(p).unwrap()
                                    * t_tetrad.t[d][mu][nu].eval(p).unwrap();
                            }
                        }
                        let got = t_frame.t[d][a][b].eval(p).unwrap();
                        assert!(
                            (got - want).abs() < 1e-9,
                            "frame route: {} vs {}",
                            got,
                            want
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn custom_gamma_with_single_entry_gives_unit_torsion() {
        // coordinate frame, Gamma^1_{12} = 1, Gamma^1_{21} = 0 -> T^1_{12} = 1
        let chart = minkowski_chart();
        let pts = sample_points(&chart, 2, 0);
        let q = mat(4, |a, mu| chart.constant(if a == mu { 1.0 } else { 0.0 }));
        let cf = Coframe::new(chart.clone(), q, &pts).unwrap();
        let gamma = t3(4, |r, mu, nu| {
            chart.constant(if (r, mu, nu) == (0, 0, 1) { 1.0 } else { 0.0 })
        });
        let conn = Connection {
            gamma,
            omega: None,
            flavor: ConnectionFlavor::Custom,
        };
        let t = torsion_from_commutator(&cf, &conn, TorsionFrame::Coordinate).unwrap();
        assert!((t.t[0][0][1].eval(&pts[0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((t.t[0][1][0].eval(&pts[0]).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn metric_compatibility_residual_vanishes_for_levi_civita() {
        let chart = minkowski_chart();
        let pts = sample_points(&chart, 4, 0);
        let q = mat(4, |a, mu| match (a, mu) {
            (0, 0) | (2, 2) | (3, 3) => chart.one(),
            (1, 1) => chart.one().add(&chart.var(2).sin().scale(0.3)),
            _ => chart.zero(),
        });
        let cf = Coframe::new(chart.clone(), q, &pts).unwrap();
        let metric = metric_from_coframe(&cf);
        let conn = christoffel(&chart, &metric);
        for p in &pts {
            for rho in 0..4 {
                for mu in 0..4 {
                    for nu in 0..4 {
                        let mut v = metric.g[mu][nu].diff(rho).eval(p).unwrap();
                        for s in 0..4 {
                            v -= conn.gamma[s][rho][mu].eval(p).unwrap()
                                * metric.g[s][nu].eval(p).unwrap();
                            v -= conn.gamma[s][rho][nu].eval(p).unwrap()
                                * metric.g[mu][s].eval(p).unwrap();
                        }
                        assert!(v.abs() < 1e-9, "nabla g residual {}", v);
                    }
                }
            }
        }
    }
}
