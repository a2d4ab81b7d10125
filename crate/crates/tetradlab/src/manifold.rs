//! Assembled manifolds: chart + coframe + metric + connection, with the
//! built-in catalog used by the verification suites.

use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

use crate::clifford::Multivector;
use crate::connection::{
    christoffel, columbus_connection, curvature, spin_connection, t3, Connection, ConnectionError,
    ConnectionFlavor, CurvatureTensor, Tensor3,
};
use crate::geometry::{
    coframe_from_metric, invert_symbolic, mat, metric_from_coframe, sample_points, Chart, Coframe,
    GeometryError, Mat, MetricField,
};
use crate::symexpr::ScalarField;

#[derive(Debug, Error)]
pub enum ManifoldError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Connection(#[from] ConnectionError),
    #[error(transparent)]
    Eval(#[from] crate::symexpr::EvalError),
    #[error("unknown builtin manifold `{0}`")]
    UnknownBuiltin(String),
    #[error("connection is not metric compatible; the Clifford covariant derivative requires antisymmetric frame coefficients")]
    NotMetricCompatible,
}

/// A chart with a fixed orthonormal coframe, its metric, and a connection
/// carrying both coordinate and mixed spin coefficients.
pub struct Manifold {
    pub name: String,
    pub chart: Arc<Chart>,
    pub coframe: Coframe,
    pub metric: MetricField,
    pub conn: Connection,
    /// omega^c_{ab} = q_a^mu omega^c_{mu b}
    pub omega_frame: Tensor3,
    pub curv: CurvatureTensor,
    pub metric_compatible: bool,
}

impl Manifold {
    pub fn from_coframe(
        name: &str,
        chart: Arc<Chart>,
        q: Mat,
        flavor: ConnectionFlavor,
        custom_gamma: Option<Tensor3>,
        points: &[Vec<f64>],
    ) -> Result<Self, ManifoldError> {
        let coframe = Coframe::new(chart.clone(), q, points)?;
        let metric = metric_from_coframe(&coframe);
        Self::assemble(name, chart, coframe, metric, flavor, custom_gamma, points)
    }

    pub fn from_metric(
        name: &str,
        chart: Arc<Chart>,
        g: Mat,
        flavor: ConnectionFlavor,
        custom_gamma: Option<Tensor3>,
        points: &[Vec<f64>],
    ) -> Result<Self, ManifoldError> {
        let ginv = invert_symbolic(&chart, &g);
        let metric = MetricField { g, ginv };
        let coframe = coframe_from_metric(chart.clone(), &metric, points)?;
        Self::assemble(name, chart, coframe, metric, flavor, custom_gamma, points)
    }

    fn assemble(
        name: &str,
        chart: Arc<Chart>,
        coframe: Coframe,
        metric: MetricField,
        flavor: ConnectionFlavor,
        custom_gamma: Option<Tensor3>,
        points: &[Vec<f64>],
    ) -> Result<Self, ManifoldError> {
        let mut conn = match flavor {
            ConnectionFlavor::LeviCivita => christoffel(&chart, &metric),
            ConnectionFlavor::Teleparallel => columbus_connection(&coframe),
            ConnectionFlavor::Custom => Connection {
                gamma: custom_gamma.expect("custom connection requires gamma"),
                omega: None,
                flavor: ConnectionFlavor::Custom,
            },
        };
        if conn.omega.is_none() {
            conn.omega = Some(spin_connection(&coframe, &conn));
        }
        let omega = conn.omega.as_ref().unwrap();
        let dim = chart.dim;
        let omega_frame = t3(dim, |c, a, b| {
            let mut acc = chart.zero();
            for mu in 0..dim {
                acc = acc.add(&coframe.qinv[a][mu].mul(&omega[c][mu][b]));
            }
            acc
        });
        // omega_{abc} = eta_{ad} omega^d_{bc} must satisfy omega_{abc} = -omega_{cba}
        // for a metric-compatible connection; probe numerically.
        let mut metric_compatible = true;
        'probe: for p in points.iter().take(4) {
            for a in 0..dim {
                for b in 0..dim {
                    for c in 0..dim {
                        let lhs = omega_frame[a][b][c].eval(p)? * chart.signature.eta(a);
                        let rhs = omega_frame[c][b][a].eval(p)? * chart.signature.eta(c);
                        if (lhs + rhs).abs() > 1e-8 {
                            metric_compatible = false;
                            break 'probe;
                        }
                    }
                }
            }
        }
        let curv = curvature(&chart, &conn, &metric);
        Ok(Manifold {
            name: name.to_string(),
            chart,
            coframe,
            metric,
            conn,
            omega_frame,
            curv,
            metric_compatible,
        })
    }

    /// Rebuild the same geometry with a different connection.
    pub fn with_connection(
        &self,
        flavor: ConnectionFlavor,
        custom_gamma: Option<Tensor3>,
        points: &[Vec<f64>],
    ) -> Result<Self, ManifoldError> {
        Self::assemble(
            &self.name,
            self.chart.clone(),
            self.coframe.clone(),
            self.metric.clone(),
            flavor,
            custom_gamma,
            points,
        )
    }

    pub fn dim(&self) -> usize {
        self.chart.dim
    }

    pub fn frame_id(&self) -> u64 {
        self.coframe.frame_id
    }

    pub fn mv_zero(&self) -> Multivector {
        Multivector::zero(&self.chart, self.frame_id())
    }

    pub fn mv_scalar(&self, f: ScalarField) -> Multivector {
        Multivector::scalar(&self.chart, self.frame_id(), f)
    }

    /// theta^a
    pub fn theta(&self, a: usize) -> Multivector {
        Multivector::basis_form(&self.chart, self.frame_id(), a)
    }

    /// theta_a = eta_{aa} theta^a
    pub fn theta_lower(&self, a: usize) -> Multivector {
        self.theta(a).scale(self.chart.signature.eta(a))
    }

    /// dx^mu expressed in the orthonormal coframe.
    pub fn coordinate_form(&self, mu: usize) -> Multivector {
        let mut mv = self.mv_zero();
        for a in 0..self.dim() {
            mv.comps[1 << a] = self.coframe.qinv[a][mu].clone();
        }
        mv
    }

    /// Reciprocal coordinate 1-form theta_mu = g_{mu nu} dx^nu.
    pub fn coordinate_form_lower(&self, mu: usize) -> Multivector {
        let mut mv = self.mv_zero();
        for a in 0..self.dim() {
            let mut acc = self.chart.zero();
            for nu in 0..self.dim() {
                acc = acc.add(&self.metric.g[mu][nu].mul(&self.coframe.qinv[a][nu]));
            }
            mv.comps[1 << a] = acc;
        }
        mv
    }

    /// Frame-index mixed Ricci R^a_b = q^a_mu R^mu_nu q_b^nu.
    pub fn frame_ricci_mixed(&self) -> Mat {
        let dim = self.dim();
        mat(dim, |a, b| {
            let mut acc = self.chart.zero();
            for mu in 0..dim {
                for nu in 0..dim {
                    acc = acc.add(
                        &self.coframe.q[a][mu]
                            .mul(&self.curv.ricci_mixed[mu][nu])
                            .mul(&self.coframe.qinv[b][nu]),
                    );
                }
            }
            acc
        })
    }

    /// Operator-layer mixed Ricci in frame indices: the opposite-slot
    /// contraction of the Riemann tensor (= minus the standard one), which is
    /// the convention the squared Dirac operator decomposes into. Pinned by
    /// the identity dirac^2 = box + ricci-operator.
    pub fn frame_ricci_op(&self) -> Mat {
        let std = self.frame_ricci_mixed();
        mat(self.dim(), |a, b| std[a][b].neg())
    }

    /// Operator-layer mixed Ricci with coordinate indices.
    pub fn ricci_op_coordinate(&self) -> Mat {
        mat(self.dim(), |mu, nu| self.curv.ricci_mixed[mu][nu].neg())
    }

    /// Operator-layer scalar curvature (= minus the standard trace).
    pub fn scalar_op(&self) -> ScalarField {
        self.curv.scalar.neg()
    }

    /// Frame-index Riemann R^a_{bcd}.
    pub fn frame_riemann(&self) -> crate::connection::Tensor4 {
        let dim = self.dim();
        crate::connection::t4(dim, |a, b, c, d| {
            let mut acc = self.chart.zero();
            for rho in 0..dim {
                for sigma in 0..dim {
                    for mu in 0..dim {
                        for nu in 0..dim {
                            let r = &self.curv.riemann[rho][sigma][mu][nu];
                            if r.is_zero() {
                                continue;
                            }
                            acc = acc.add(
                                &self.coframe.q[a][rho]
                                    .mul(&self.coframe.qinv[b][sigma])
                                    .mul(&self.coframe.qinv[c][mu])
                                    .mul(&self.coframe.qinv[d][nu])
                                    .mul(r),
                            );
                        }
                    }
                }
            }
            acc
        })
    }

    /// The literal coordinate D'Alembertian g^{mu nu} d_mu d_nu acting on a
    /// scalar function (NOT the covariant operator) -- used only by the
    /// failure-demonstration diagnostics.
    pub fn box_literal(&self, f: &ScalarField) -> ScalarField {
        let dim = self.dim();
        let mut acc = self.chart.zero();
        for mu in 0..dim {
            for nu in 0..dim {
                acc = acc.add(&self.metric.ginv[mu][nu].mul(&f.diff(mu).diff(nu)));
            }
        }
        acc
    }

    /// Covariant derivative along e_a on Clifford sections, guarded by the
    /// metric-compatibility probe (the commutator form needs antisymmetric
    /// frame coefficients).
    pub fn clifford_derivative(
        &self,
        a: usize,
        mv: &Multivector,
    ) -> Result<Multivector, ManifoldError> {
        if !self.metric_compatible {
            return Err(ManifoldError::NotMetricCompatible);
        }
        Ok(crate::clifford::clifford_cov_derivative(
            &self.coframe,
            &self.omega_frame,
            a,
            mv,
        ))
    }

    /// Smooth bounded random scalar field for identity testing.
    pub fn random_scalar(&self, rng: &mut impl Rng) -> ScalarField {
        let chart = &self.chart;
        let mut acc = chart.constant(rng.gen_range(-1.0..1.0));
        for mu in 0..self.dim() {
            let (lo, hi) = chart.domain[mu];
            // keep the phase of order one across the domain
            let scale = 2.0 / (hi - lo);
            let freq = rng.gen_range(0.5..1.5) * scale;
            let c = chart.constant(rng.gen_range(-1.0..1.0));
            let arg = chart.var(mu).scale(freq);
            let wave = if rng.gen_bool(0.5) {
                arg.sin()
            } else {
                arg.cos()
            };
            acc = acc.add(&c.mul(&wave));
        }
        acc
    }

    /// Random homogeneous field of the given grade.
    pub fn random_form(&self, grade: usize, rng: &mut impl Rng) -> Multivector {
        let mut mv = self.mv_zero();
        let n = 1usize << self.dim();
        for mask in 0..n {
            if mask.count_ones() as usize == grade {
                mv.comps[mask] = self.random_scalar(rng);
            }
        }
        mv
    }

    /// Random nonhomogeneous multivector field.
    pub fn random_multivector(&self, rng: &mut impl Rng) -> Multivector {
        let mut mv = self.mv_zero();
        let n = 1usize << self.dim();
        for mask in 0..n {
            mv.comps[mask] = self.random_scalar(rng);
        }
        mv
    }
}

// ---------------------------------------------------------------------------
// built-in catalog
// ---------------------------------------------------------------------------

pub const BUILTIN_NAMES: [&str; 4] = ["minkowski", "s2", "schwarzschild", "flrw-dust"];

/// Default sampling used when validating built-ins at construction.
pub fn builtin(name: &str, param: Option<f64>) -> Result<Manifold, ManifoldError> {
    let points_for = |chart: &Arc<Chart>| sample_points(chart, 8, 0);
    match name {
        "minkowski" => {
            let chart = Arc::new(Chart::new(
                vec!["x0".into(), "x1".into(), "x2".into(), "x3".into()],
                vec![(-1.0, 1.0); 4],
                crate::geometry::Signature::new(1, 3),
            )?);
            let q = mat(4, |a, mu| chart.constant(if a == mu { 1.0 } else { 0.0 }));
            let pts = points_for(&chart);
            Manifold::from_coframe(
                "minkowski",
                chart,
                q,
                ConnectionFlavor::LeviCivita,
                None,
                &pts,
            )
        }
        "s2" => {
            let radius = param.unwrap_or(1.0);
            let chart = Arc::new(Chart::new(
                vec!["x1".into(), "x2".into()],
                vec![
                    (0.1, std::f64::consts::PI - 0.1),
                    (0.1, 2.0 * std::f64::consts::PI - 0.1),
                ],
                crate::geometry::Signature::new(2, 0),
            )?);
            let q = mat(2, |a, mu| match (a, mu) {
                (0, 0) => chart.constant(radius),
                (1, 1) => chart.var(0).sin().scale(radius),
                _ => chart.zero(),
            });
            let pts = points_for(&chart);
            Manifold::from_coframe("s2", chart, q, ConnectionFlavor::LeviCivita, None, &pts)
        }
        "schwarzschild" => {
            let mass = param.unwrap_or(1.0);
            let chart = Arc::new(Chart::new(
                vec!["t".into(), "r".into(), "th".into(), "ph".into()],
                vec![
                    (0.0, 10.0),
                    (3.0, 20.0),
                    (0.1, std::f64::consts::PI - 0.1),
                    (0.1, 2.0 * std::f64::consts::PI - 0.1),
                ],
                crate::geometry::Signature::new(1, 3),
            )?);
            let r = chart.var(1);
            let th = chart.var(2);
            // s^2 = 1 - 2M/r
            let s2 = chart.one().sub(&chart.constant(2.0 * mass).div(&r));
            let s = s2.sqrt();
            let q = mat(4, |a, mu| match (a, mu) {
                (0, 0) => s.clone(),
                (1, 1) => chart.one().div(&s),
                (2, 2) => r.clone(),
                (3, 3) => r.mul(&th.sin()),
                _ => chart.zero(),
            });
            let pts = points_for(&chart);
            Manifold::from_coframe(
                "schwarzschild",
                chart,
                q,
                ConnectionFlavor::LeviCivita,
                None,
                &pts,
            )
        }
        "flrw-dust" => {
            let chart = Arc::new(Chart::new(
                vec!["t".into(), "x".into(), "y".into(), "z".into()],
                vec![(1.0, 10.0), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)],
                crate::geometry::Signature::new(1, 3),
            )?);
            let a_of_t = chart.var(0).powf(2.0 / 3.0);
            let q = mat(4, |a, mu| match (a, mu) {
                (0, 0) => chart.one(),
                (i, j) if i == j => a_of_t.clone(),
                _ => chart.zero(),
            });
            let pts = points_for(&chart);
            Manifold::from_coframe(
                "flrw-dust",
                chart,
                q,
                ConnectionFlavor::LeviCivita,
                None,
                &pts,
            )
        }
        other => Err(ManifoldError::UnknownBuiltin(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s2_christoffels_match_closed_forms() {
        let m = builtin("s2", None).unwrap();
        let pts = sample_points(&m.chart, 16, 0);
        let g = &m.conn.gamma;
        for p in &pts {
            let th = p[0];
            // Gamma^1(0-based 0)_{22} = -cos sin ; Gamma^2_{12} = Gamma^2_{21} = cot
            assert!((g[0][1][1].eval(p).unwrap() + th.cos() * th.sin()).abs() < 1e-9);
            assert!((g[1][0][1].eval(p).unwrap() - th.cos() / th.sin()).abs() < 1e-9);
            assert!((g[1][1][0].eval(p).unwrap() - th.cos() / th.sin()).abs() < 1e-9);
            for rho in 0..2 {
                for mu in 0..2 {
                    for nu in 0..2 {
                        if (rho, mu, nu) == (0, 1, 1)
                            || (rho, mu, nu) == (1, 0, 1)
                            || (rho, mu, nu) == (1, 1, 0)
                        {
                            continue;
                        }
                        assert!(
                            g[rho][mu][nu].eval(p).unwrap().abs() < 1e-12,
                            "Gamma^{}_{}{} should vanish",
                            rho,
                            mu,
                            nu
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn minkowski_is_flat_with_zero_christoffels() {
        let m = builtin("minkowski", None).unwrap();
        let pts = sample_points(&m.chart, 4, 0);
        for p in &pts {
            for rho in 0..4 {
                for mu in 0..4 {
                    for nu in 0..4 {
                        assert!(m.conn.gamma[rho][mu][nu].eval(p).unwrap().abs() < 1e-15);
                        for sp in 0..4 {
                            assert!(m.curv.riemann[rho][mu][nu][sp].eval(p).unwrap().abs() < 1e-15);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn schwarzschild_gamma_t_tr_value_and_fd_oracle() {
        let m = builtin("schwarzschild", None).unwrap();
        // independent finite-difference-of-metric oracle at r = 10
        let p = vec![1.0, 10.0, 1.2, 2.3];
        let got = m.conn.gamma[0][0][1].eval(&p).unwrap();
        assert!((got - 0.0125).abs() < 1e-12, "Gamma^t_tt r = {}", got);
        // oracle: Gamma^t_{tr} = 1/2 g^{tt} d_r g_{tt} with centered difference
        let h = 1e-6 * 10.0;
        let g_tt = |r: f64| 1.0 - 2.0 / r;
        let dg = (g_tt(10.0 + h) - g_tt(10.0 - h)) / (2.0 * h);
        let oracle = 0.5 * (1.0 / g_tt(10.0)) * dg;
        assert!((got - oracle).abs() < 1e-8, "{} vs fd {}", got, oracle);
    }

    #[test]
    fn schwarzschild_is_ricci_flat() {
        let m = builtin("schwarzschild", None).unwrap();
        let pts = sample_points(&m.chart, 8, 1);
        for p in &pts {
            for mu in 0..4 {
                for nu in 0..4 {
                    let v = m.curv.ricci[mu][nu].eval(p).unwrap();
                    assert!(v.abs() < 1e-8, "Ricci[{}][{}] = {}", mu, nu, v);
                }
            }
        }
    }

    #[test]
    fn s2_scalar_curvature_is_two() {
        // brute-force from the closed-form Christoffels is the oracle; the
        // standard unit-sphere value 2 is the cross-check
        let m = builtin("s2", None).unwrap();
        let pts = sample_points(&m.chart, 16, 2);
        for p in &pts {
            let r = m.curv.scalar.eval(p).unwrap();
            assert!((r - 2.0).abs() < 1e-9, "R = {}", r);
        }
    }

    #[test]
    fn flrw_curvature_nonzero_and_trace_identity() {
        let m = builtin("flrw-dust", None).unwrap();
        let pts = sample_points(&m.chart, 8, 3);
        let mut max_scalar: f64 = 0.0;
        for p in &pts {
            max_scalar = max_scalar.max(m.curv.scalar.eval(p).unwrap().abs());
        }
        assert!(max_scalar > 1e-3, "FLRW scalar curvature should not vanish");
    }
}

#[cfg(test)]
mod guard_tests {
    use super::*;
    use crate::connection::t3 as t3_new;

    #[test]
    fn non_metric_compatible_connection_is_detected_and_guarded() {
        use rand::Rng;
        use rand::SeedableRng;
        let base = builtin("minkowski", None).unwrap();
        let pts = sample_points(&base.chart, 4, 0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let chart = base.chart.clone();
        let gamma = t3_new(4, |_, _, _| chart.constant(rng.gen_range(-0.5..0.5)));
        let m = base
            .with_connection(
                crate::connection::ConnectionFlavor::Custom,
                Some(gamma),
                &pts,
            )
            .unwrap();
        assert!(!m.metric_compatible);
        let err = m.clifford_derivative(0, &m.theta(0));
        assert!(matches!(err, Err(ManifoldError::NotMetricCompatible)));
        // the Levi-Civita builtins are compatible and the guard passes
        assert!(base.metric_compatible);
        assert!(base.clifford_derivative(0, &base.theta(0)).is_ok());
    }
}
