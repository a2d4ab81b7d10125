//! Charts, metrics, frames and coframes.
//!
//! A chart fixes the coordinate names, a sampling domain and the metric
//! signature; a coframe carries the tetrad data q^a_mu together with its
//! inverse q_a^mu. Everything is immutable and shareable.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::symexpr::ScalarField;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("singular coframe: |det q| = {det:.3e} at point {point:?}")]
    SingularCoframe { det: f64, point: Vec<f64> },
    #[error("singular metric: |det g| = {det:.3e} at point {point:?}")]
    SingularMetric { det: f64, point: Vec<f64> },
    #[error("metric incompatible with signature during orthonormalization: norm {norm:.3e} of frame leg {leg} has the wrong sign at {point:?}")]
    SignatureMismatch {
        leg: usize,
        norm: f64,
        point: Vec<f64>,
    },
    #[error(transparent)]
    Eval(#[from] crate::symexpr::EvalError),
}

/// Metric signature (p,q): eta = diag(+1 x p, -1 x q).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Signature {
    pub p: usize,
    pub q: usize,
}

impl Signature {
    pub fn new(p: usize, q: usize) -> Self {
        Signature { p, q }
    }

    pub fn dim(&self) -> usize {
        self.p + self.q
    }

    /// eta_aa for the orthonormal label `a`.
    pub fn eta(&self, a: usize) -> f64 {
        if a < self.p {
            1.0
        } else {
            -1.0
        }
    }

    pub fn det_sign(&self) -> f64 {
        if self.q % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// A single coordinate chart: dimension, coordinate names, open sampling
/// intervals and the target orthonormal signature.
#[derive(Debug, Clone)]
pub struct Chart {
    pub dim: usize,
    pub coord_names: Vec<String>,
    names_arc: Arc<Vec<String>>,
    pub domain: Vec<(f64, f64)>,
    pub signature: Signature,
}

impl Chart {
    pub fn new(
        coord_names: Vec<String>,
        domain: Vec<(f64, f64)>,
        signature: Signature,
    ) -> Result<Self, GeometryError> {
        let dim = coord_names.len();
        if !(2..=4).contains(&dim) {
            return Err(GeometryError::InvalidChart(format!(
                "dimension must be 2, 3 or 4, got {}",
                dim
            )));
        }
        if domain.len() != dim {
            return Err(GeometryError::InvalidChart(
                "domain must give one interval per coordinate".into(),
            ));
        }
        for (i, (lo, hi)) in domain.iter().enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(GeometryError::InvalidChart(format!(
                    "interval for {} must be finite and ordered",
                    coord_names[i]
                )));
            }
        }
        if signature.dim() != dim {
            return Err(GeometryError::InvalidChart(format!(
                "signature ({},{}) does not match dimension {}",
                signature.p, signature.q, dim
            )));
        }
        let names_arc = Arc::new(coord_names.clone());
        Ok(Chart {
            dim,
            coord_names,
            names_arc,
            domain,
            signature,
        })
    }

    pub fn coord_index(&self, name: &str) -> Option<usize> {
        self.coord_names.iter().position(|n| n == name)
    }

    pub fn coord_names_arc(&self) -> Arc<Vec<String>> {
        self.names_arc.clone()
    }

    pub fn zero(&self) -> ScalarField {
        ScalarField::constant_for(self, 0.0)
    }

    pub fn one(&self) -> ScalarField {
        ScalarField::constant_for(self, 1.0)
    }

    pub fn constant(&self, v: f64) -> ScalarField {
        ScalarField::constant_for(self, v)
    }

    pub fn var(&self, i: usize) -> ScalarField {
        ScalarField::var_for(self, i)
    }
}

/// Deterministic sample points, strictly inside the domain with a 1% margin
/// from each boundary to dodge coordinate singularities.
pub fn sample_points(chart: &Chart, count: usize, seed: u64) -> Vec<Vec<f64>> {
    assert!(count >= 1, "need at least one sample point");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            chart
                .domain
                .iter()
                .map(|&(lo, hi)| {
                    let margin = 0.01 * (hi - lo);
                    rng.gen_range(lo + margin..hi - margin)
                })
                .collect()
        })
        .collect()
}

pub type Mat = Vec<Vec<ScalarField>>;

pub fn mat(dim: usize, mut f: impl FnMut(usize, usize) -> ScalarField) -> Mat {
    (0..dim)
        .map(|i| (0..dim).map(|j| f(i, j)).collect())
        .collect()
}

/// Laplace-expansion determinant of a matrix of fields (dim <= 4).
pub fn det_symbolic(chart: &Chart, m: &Mat) -> ScalarField {
    fn det_rec(chart: &Chart, m: &Mat, rows: &[usize], cols: &[usize]) -> ScalarField {
        if rows.len() == 1 {
            return m[rows[0]][cols[0]].clone();
        }
        let mut acc = chart.zero();
        for (k, &c) in cols.iter().enumerate() {
            let sub_cols: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
            let minor = det_rec(chart, m, &rows[1..], &sub_cols);
            let term = m[rows[0]][c].mul(&minor);
            acc = if k % 2 == 0 {
                acc.add(&term)
            } else {
                acc.sub(&term)
            };
        }
        acc
    }
    let idx: Vec<usize> = (0..chart.dim).collect();
    det_rec(chart, m, &idx, &idx)
}

/// Symbolic inverse by cofactor expansion (dim <= 4), keeping everything
/// exactly differentiable.
pub fn invert_symbolic(chart: &Chart, m: &Mat) -> Mat {
    let dim = chart.dim;
    let det = det_symbolic(chart, m);
    mat(dim, |i, j| {
        // cofactor C_ji / det
        let rows: Vec<usize> = (0..dim).filter(|&r| r != j).collect();
        let cols: Vec<usize> = (0..dim).filter(|&c| c != i).collect();
        let minor = minor_det(chart, m, &rows, &cols);
        let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
        minor.scale(sign).div(&det)
    })
}

fn minor_det(chart: &Chart, m: &Mat, rows: &[usize], cols: &[usize]) -> ScalarField {
    if rows.is_empty() {
        return chart.one();
    }
    if rows.len() == 1 {
        return m[rows[0]][cols[0]].clone();
    }
    let mut acc = chart.zero();
    for (k, &c) in cols.iter().enumerate() {
        let sub_cols: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
        let minor = minor_det(chart, m, &rows[1..], &sub_cols);
        let term = m[rows[0]][c].mul(&minor);
        acc = if k % 2 == 0 {
            acc.add(&term)
        } else {
            acc.sub(&term)
        };
    }
    acc
}

/// Covariant metric g_{mu nu} plus its symbolic inverse g^{mu nu}.
#[derive(Clone)]
pub struct MetricField {
    pub g: Mat,
    pub ginv: Mat,
}

static NEXT_FRAME_ID: AtomicU64 = AtomicU64::new(1);

/// Orthonormal coframe: q^a_mu (row = orthonormal label, column = coordinate
/// index) with inverse q_a^mu satisfying both duality relations.
#[derive(Clone)]
pub struct Coframe {
    pub chart: Arc<Chart>,
    /// q[a][mu] = q^a_mu
    pub q: Mat,
    /// qinv[a][mu] = q_a^mu
    pub qinv: Mat,
    pub frame_id: u64,
}

impl Coframe {
    /// Invert a coframe matrix symbolically, verifying |det q| at the given
    /// sample points.
    pub fn new(chart: Arc<Chart>, q: Mat, points: &[Vec<f64>]) -> Result<Self, GeometryError> {
        let det = det_symbolic(&chart, &q);
        for p in points {
            let d = det.eval(p)?;
            if d.abs() < 1e-12 {
                return Err(GeometryError::SingularCoframe {
                    det: d.abs(),
                    point: p.clone(),
                });
            }
        }
        let qinv_t = invert_symbolic(&chart, &q);
        // invert_symbolic returns M^{-1} with [row][col]; q_a^mu = (q^{-1})^mu_a,
        // stored as qinv[a][mu].
        let dim = chart.dim;
        let qinv = mat(dim, |a, mu| qinv_t[mu][a].clone());
        Ok(Coframe {
            chart,
            q,
            qinv,
            frame_id: NEXT_FRAME_ID.fetch_add(1, Ordering::Relaxed),
        })
    }
}

/// g_{mu nu} = q^a_mu q^b_nu eta_ab and g^{mu nu} = q_a^mu q_b^nu eta^ab.
pub fn metric_from_coframe(cf: &Coframe) -> MetricField {
    let chart = &cf.chart;
    let dim = chart.dim;
    let sig = chart.signature;
    let g = mat(dim, |mu, nu| {
        let mut acc = chart.zero();
        for a in 0..dim {
            let term = cf.q[a][mu].mul(&cf.q[a][nu]).scale(sig.eta(a));
            acc = acc.add(&term);
        }
        acc
    });
    let ginv = mat(dim, |mu, nu| {
        let mut acc = chart.zero();
        for a in 0..dim {
            let term = cf.qinv[a][mu].mul(&cf.qinv[a][nu]).scale(sig.eta(a));
            acc = acc.add(&term);
        }
        acc
    });
    MetricField { g, ginv }
}

/// Build an orthonormal coframe from a metric by Gram-Schmidt in coordinate
/// order. A metric alone does not single out a coframe, so all
/// orthonormal-frame outputs of a metric-only declaration are
/// frame-dependent up to local eta-rotations.
pub fn coframe_from_metric(
    chart: Arc<Chart>,
    metric: &MetricField,
    points: &[Vec<f64>],
) -> Result<Coframe, GeometryError> {
    let dim = chart.dim;
    let sig = chart.signature;
    let gdet = det_symbolic(&chart, &metric.g);
    for p in points {
        let d = gdet.eval(p)?;
        if d.abs() < 1e-12 {
            return Err(GeometryError::SingularMetric {
                det: d.abs(),
                point: p.clone(),
            });
        }
    }
    // frame vectors v_a = h[a][mu] d_mu, orthonormalized against g
    let mut h: Vec<Vec<ScalarField>> = Vec::with_capacity(dim);
    let g_of = |u: &[ScalarField], w: &[ScalarField]| -> ScalarField {
        let mut acc = chart.zero();
        for m in 0..dim {
            for n in 0..dim {
                acc = acc.add(&u[m].mul(&w[n]).mul(&metric.g[m][n]));
            }
        }
        acc
    };
    for a in 0..dim {
        // start from the coordinate vector d_a
        let mut u: Vec<ScalarField> = (0..dim)
            .map(|m| chart.constant(if m == a { 1.0 } else { 0.0 }))
            .collect();
        for (b, vb) in h.iter().enumerate() {
            // subtract eta_bb * g(u, v_b) * v_b
            let coeff = g_of(&u, vb).scale(sig.eta(b));
            for m in 0..dim {
                u[m] = u[m].sub(&coeff.mul(&vb[m]));
            }
        }
        let norm2 = g_of(&u, &u);
        for p in points {
            let n = norm2.eval(p)?;
            if n * sig.eta(a) <= 1e-12 {
                return Err(GeometryError::SignatureMismatch {
                    leg: a,
                    norm: n,
                    point: p.clone(),
                });
            }
        }
        let scale = norm2.scale(sig.eta(a)).sqrt();
        let v: Vec<ScalarField> = u.iter().map(|c| c.div(&scale)).collect();
        h.push(v);
    }
    // h[a][mu] = q_a^mu; q = h^{-1} transposed into q^a_mu layout
    let h_mat = mat(dim, |a, mu| h[a][mu].clone());
    let hinv = invert_symbolic(&chart, &h_mat); // (h^{-1})[mu][a]
    let q = mat(dim, |a, mu| hinv[mu][a].clone());
    Ok(Coframe {
        chart,
        q,
        qinv: h_mat,
        frame_id: NEXT_FRAME_ID.fetch_add(1, Ordering::Relaxed),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn s2_chart() -> Arc<Chart> {
        Arc::new(
            Chart::new(
                vec!["x1".into(), "x2".into()],
                vec![
                    (0.1, std::f64::consts::PI - 0.1),
                    (0.1, 2.0 * std::f64::consts::PI - 0.1),
                ],
                Signature::new(2, 0),
            )
            .unwrap(),
        )
    }

    fn s2_coframe(chart: &Arc<Chart>, pts: &[Vec<f64>]) -> Coframe {
        let q = mat(2, |a, mu| match (a, mu) {
            (0, 0) => chart.one(),
            (1, 1) => chart.var(0).sin(),
            _ => chart.zero(),
        });
        Coframe::new(chart.clone(), q, pts).unwrap()
    }

    #[test]
    fn sample_points_contained_and_deterministic() {
        let chart = s2_chart();
        let a = sample_points(&chart, 1, 0);
        assert_eq!(a.len(), 1);
        assert!(a[0][0] > 0.1 && a[0][0] < std::f64::consts::PI - 0.1);
        assert!(a[0][1] > 0.1 && a[0][1] < 2.0 * std::f64::consts::PI - 0.1);
        let b = sample_points(&chart, 8, 7);
        let c = sample_points(&chart, 8, 7);
        assert_eq!(b, c);
        let d = sample_points(&chart, 8, 8);
        assert_ne!(b, d);
    }

    #[test]
    fn s2_coframe_inverse_closed_form() {
        let chart = s2_chart();
        let pts = sample_points(&chart, 16, 0);
        let cf = s2_coframe(&chart, &pts);
        for p in &pts {
            assert!((cf.qinv[0][0].eval(p).unwrap() - 1.0).abs() < 1e-12);
            let expected = 1.0 / p[0].sin();
            assert!((cf.qinv[1][1].eval(p).unwrap() - expected).abs() < 1e-9 * expected.abs());
            assert!(cf.qinv[0][1].eval(p).unwrap().abs() < 1e-12);
            assert!(cf.qinv[1][0].eval(p).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn identity_coframe_inverts_to_identity() {
        let chart = Arc::new(
            Chart::new(
                vec!["x0".into(), "x1".into(), "x2".into(), "x3".into()],
                vec![(-1.0, 1.0); 4],
                Signature::new(1, 3),
            )
            .unwrap(),
        );
        let pts = sample_points(&chart, 4, 0);
        let q = mat(4, |a, mu| chart.constant(if a == mu { 1.0 } else { 0.0 }));
        let cf = Coframe::new(chart.clone(), q, &pts).unwrap();
        for p in &pts {
            for a in 0..4 {
                for mu in 0..4 {
                    let want = if a == mu { 1.0 } else { 0.0 };
                    assert!((cf.qinv[a][mu].eval(p).unwrap() - want).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn constant_2x2_inverse_matches_closed_form_oracle() {
        // [[2,0],[1,3]]^{-1} = [[0.5,0],[-1/6,1/3]]
        let chart = s2_chart();
        let pts = sample_points(&chart, 2, 0);
        let q = vec![
            vec![chart.constant(2.0), chart.constant(0.0)],
            vec![chart.constant(1.0), chart.constant(3.0)],
        ];
        // closed-form 2x2 inverse oracle: [[d,-b],[-c,a]]/(ad - bc)
        let (a, b, c, d) = (2.0, 0.0, 1.0, 3.0);
        let det = a * d - b * c;
        let oracle = [[d / det, -b / det], [-c / det, a / det]];
        let cf = Coframe::new(chart.clone(), q, &pts).unwrap();
        // qinv[a][mu] = (q^{-1})^mu_a -> matrix element (mu, a)
        for mu in 0..2 {
            for a_i in 0..2 {
                let got = cf.qinv[a_i][mu].eval(&pts[0]).unwrap();
                assert!(
                    (got - oracle[mu][a_i]).abs() < 1e-12,
                    "entry ({},{}) = {} vs {}",
                    mu,
                    a_i,
                    got,
                    oracle[mu][a_i]
                );
            }
        }
    }

    #[test]
    fn s2_metric_from_coframe_matches_paper_form() {
        let chart = s2_chart();
        let pts = sample_points(&chart, 16, 3);
        let cf = s2_coframe(&chart, &pts);
        let m = metric_from_coframe(&cf);
        for p in &pts {
            let s2 = p[0].sin() * p[0].sin();
            assert!((m.g[0][0].eval(p).unwrap() - 1.0).abs() < 1e-12);
            assert!((m.g[1][1].eval(p).unwrap() - s2).abs() < 1e-12);
            assert!(m.g[0][1].eval(p).unwrap().abs() < 1e-15);
            assert!((m.ginv[1][1].eval(p).unwrap() - 1.0 / s2).abs() < 1e-9 / s2);
        }
    }

    #[test]
    fn minkowski_identity_coframe_gives_eta() {
        let chart = Arc::new(
            Chart::new(
                vec!["x0".into(), "x1".into(), "x2".into(), "x3".into()],
                vec![(-1.0, 1.0); 4],
                Signature::new(1, 3),
            )
            .unwrap(),
        );
        let pts = sample_points(&chart, 4, 0);
        let q = mat(4, |a, mu| chart.constant(if a == mu { 1.0 } else { 0.0 }));
        let cf = Coframe::new(chart.clone(), q, &pts).unwrap();
        let m = metric_from_coframe(&cf);
        for p in &pts {
            for mu in 0..4 {
                for nu in 0..4 {
                    let want = if mu == nu {
                        chart.signature.eta(mu)
                    } else {
                        0.0
                    };
                    assert!((m.g[mu][nu].eval(p).unwrap() - want).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn random_constant_coframe_metric_matches_matrix_product_oracle() {
        use rand::Rng;
        use rand::SeedableRng;
        let chart = Arc::new(
            Chart::new(
                vec!["x0".into(), "x1".into(), "x2".into(), "x3".into()],
                vec![(-1.0, 1.0); 4],
                Signature::new(1, 3),
            )
            .unwrap(),
        );
        let pts = sample_points(&chart, 16, 11);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        // diagonally dominant to stay invertible
        let mut qv = [[0.0f64; 4]; 4];
        for (a, row) in qv.iter_mut().enumerate() {
            for (mu, item) in row.iter_mut().enumerate() {
                *item = rng.gen_range(-0.3..0.3) + if a == mu { 1.5 } else { 0.0 };
            }
        }
        let q = mat(4, |a, mu| chart.constant(qv[a][mu]));
        let cf = Coframe::new(chart.clone(), q, &pts).unwrap();
        let m = metric_from_coframe(&cf);
        // dense matrix-product oracle: g = q^T eta q
        let eta = [1.0, -1.0, -1.0, -1.0];
        for p in &pts {
            for mu in 0..4 {
                for nu in 0..4 {
                    let mut want = 0.0;
                    for a in 0..4 {
                        want += qv[a][mu] * eta[a] * qv[a][nu];
                    }
                    let got = m.g[mu][nu].eval(p).unwrap();
                    assert!(
                        (got - want).abs() < 1e-12,
                        "g[{}][{}] {} vs {}",
                        mu,
                        nu,
                        got,
                        want
                    );
                }
            }
        }
    }

    #[test]
    fn gram_schmidt_coframe_orthonormal_for_offdiagonal_metric() {
        // 2-d Riemannian metric with an off-diagonal term
        let chart = Arc::new(
            Chart::new(
                vec!["x1".into(), "x2".into()],
                vec![(0.2, 1.5), (0.2, 1.5)],
                Signature::new(2, 0),
            )
            .unwrap(),
        );
        let pts = sample_points(&chart, 16, 5);
        let g = vec![
            vec![chart.constant(2.0), chart.var(0).scale(0.3)],
            vec![chart.var(0).scale(0.3), chart.constant(1.0)],
        ];
        let ginv = invert_symbolic(&chart, &g);
        let metric = MetricField { g, ginv };
        let cf = coframe_from_metric(chart.clone(), &metric, &pts).unwrap();
        let rebuilt = metric_from_coframe(&cf);
        for p in &pts {
            for mu in 0..2 {
                for nu in 0..2 {
                    let want = metric.g[mu][nu].eval(p).unwrap();
                    let got = rebuilt.g[mu][nu].eval(p).unwrap();
                    assert!(
                        (got - want).abs() < 1e-9,
                        "g[{}][{}] {} vs {}",
                        mu,
                        nu,
                        got,
                        want
                    );
                }
            }
        }
    }
}

#[cfg(test)]
mod singularity_tests {
    use super::*;

    #[test]
    fn singular_coframe_reports_the_offending_point() {
        let chart = Arc::new(
            Chart::new(
                vec!["x1".into(), "x2".into()],
                vec![(-1.0, 1.0), (-1.0, 1.0)],
                Signature::new(2, 0),
            )
            .unwrap(),
        );
        let pts = sample_points(&chart, 8, 0);
        // rank-deficient everywhere
        let q = vec![
            vec![chart.one(), chart.one()],
            vec![chart.one(), chart.one()],
        ];
        match Coframe::new(chart, q, &pts) {
            Err(GeometryError::SingularCoframe { det, point }) => {
                assert!(det < 1e-12);
                assert_eq!(point.len(), 2);
            }
            other => panic!(
                "expected singular-coframe error, got {:?}",
                other.map(|_| ())
            ),
        }
    }
}
