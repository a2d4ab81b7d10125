//! Clifford bundle of differential forms over a chart.
//!
//! Multivector fields are stored densely as 2^dim blade components in the
//! orthonormal coframe, each component a scalar field. The fundamental
//! product is generated by theta^a theta^b + theta^b theta^a = 2 eta^{ab};
//! wedge, contractions and the scalar product are grade projections of it.
//! The Hodge star is Clifford multiplication by the volume element,
//! star A = rev(A) tau, generalized to any diagonal signature; its inverse
//! carries the sign (-1)^{p(n-p)} sgn(det eta).
//!
//! The exterior derivative is computed in coordinate-coframe components
//! (where d needs no connection) and converted back; the codifferential is
//! delta = (-1)^p star^{-1} d star per grade.

use std::sync::Arc;

use thiserror::Error;

use crate::connection::Tensor3;
use crate::geometry::{Chart, Coframe};
use crate::symexpr::{EvalError, ScalarField};

#[derive(Debug, Error)]
pub enum CliffordError {
    #[error("frame mismatch: operands live in different coframes ({0} vs {1})")]
    FrameMismatch(u64, u64),
    #[error("input must be homogeneous, found grades {0:?}")]
    NotHomogeneous(Vec<usize>),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Nonhomogeneous multivector field in a fixed orthonormal coframe.
#[derive(Clone)]
pub struct Multivector {
    pub chart: Arc<Chart>,
    pub frame_id: u64,
    /// comps[mask] multiplies the blade theta^{i1} ^ ... ^ theta^{ik} with
    /// ascending indices read off the set bits of `mask`.
    pub comps: Vec<ScalarField>,
}

/// Permutation sign for joining two ascending index sets (Dorst's bit trick).
fn reorder_sign(a: usize, b: usize) -> f64 {
    let mut a = a >> 1;
    let mut swaps = 0u32;
    while a != 0 {
        swaps += (a & b).count_ones();
        a >>= 1;
    }
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Product of two basis blades: resulting mask and sign including metric
/// contractions over the common indices.
fn blade_mul(a: usize, b: usize, chart: &Chart) -> (usize, f64) {
    let mut sign = reorder_sign(a, b);
    let mut common = a & b;
    while common != 0 {
        let i = common.trailing_zeros() as usize;
        sign *= chart.signature.eta(i);
        common &= common - 1;
    }
    (a ^ b, sign)
}

fn rev_sign(grade: u32) -> f64 {
    if (grade * grade.saturating_sub(1) / 2) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl Multivector {
    pub fn zero(chart: &Arc<Chart>, frame_id: u64) -> Self {
        let n = 1usize << chart.dim;
        Multivector {
            chart: chart.clone(),
            frame_id,
            comps: (0..n).map(|_| chart.zero()).collect(),
        }
    }

    pub fn scalar(chart: &Arc<Chart>, frame_id: u64, f: ScalarField) -> Self {
        let mut mv = Self::zero(chart, frame_id);
        mv.comps[0] = f;
        mv
    }

    /// theta^a as a multivector.
    pub fn basis_form(chart: &Arc<Chart>, frame_id: u64, a: usize) -> Self {
        let mut mv = Self::zero(chart, frame_id);
        mv.comps[1 << a] = chart.one();
        mv
    }

    /// Blade theta^{i1} ^ ... ^ theta^{ik} from the given mask.
    pub fn basis_blade(chart: &Arc<Chart>, frame_id: u64, mask: usize) -> Self {
        let mut mv = Self::zero(chart, frame_id);
        mv.comps[mask] = chart.one();
        mv
    }

    pub fn dim(&self) -> usize {
        self.chart.dim
    }

    fn same_frame(&self, rhs: &Self) -> Result<(), CliffordError> {
        if self.frame_id == rhs.frame_id {
            Ok(())
        } else {
            Err(CliffordError::FrameMismatch(self.frame_id, rhs.frame_id))
        }
    }

    pub fn grades(&self) -> Vec<usize> {
        let mut gs: Vec<usize> = (0..self.comps.len())
            .filter(|&m| !self.comps[m].is_zero())
            .map(|m| m.count_ones() as usize)
            .collect();
        gs.sort_unstable();
        gs.dedup();
        gs
    }

    pub fn add(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.frame_id, rhs.frame_id);
        Multivector {
            chart: self.chart.clone(),
            frame_id: self.frame_id,
            comps: self
                .comps
                .iter()
                .zip(&rhs.comps)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.frame_id, rhs.frame_id);
        Multivector {
            chart: self.chart.clone(),
            frame_id: self.frame_id,
            comps: self
                .comps
                .iter()
                .zip(&rhs.comps)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.map(|f| f.neg())
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|f| f.scale(c))
    }

    pub fn scale_field(&self, f: &ScalarField) -> Self {
        self.map(|g| g.mul(f))
    }

    fn map(&self, mut f: impl FnMut(&ScalarField) -> ScalarField) -> Self {
        Multivector {
            chart: self.chart.clone(),
            frame_id: self.frame_id,
            comps: self.comps.iter().map(&mut f).collect(),
        }
    }

    /// Fundamental Clifford product.
    pub fn mul(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.frame_id, rhs.frame_id);
        let mut out = Self::zero(&self.chart, self.frame_id);
        for (ma, fa) in self.comps.iter().enumerate() {
            if fa.is_zero() {
                continue;
            }
            for (mb, fb) in rhs.comps.iter().enumerate() {
                if fb.is_zero() {
                    continue;
                }
                let (mask, sign) = blade_mul(ma, mb, &self.chart);
                let term = fa.mul(fb).scale(sign);
                out.comps[mask] = out.comps[mask].add(&term);
            }
        }
        out
    }

    /// Exterior product: the grade-(r+s) part of the Clifford product.
    pub fn wedge(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.frame_id, rhs.frame_id);
        let mut out = Self::zero(&self.chart, self.frame_id);
        for (ma, fa) in self.comps.iter().enumerate() {
            if fa.is_zero() {
                continue;
            }
            for (mb, fb) in rhs.comps.iter().enumerate() {
                if fb.is_zero() {
                    continue;
                }
                if ma & mb != 0 {
                    continue;
                }
                let sign = reorder_sign(ma, mb);
                let term = fa.mul(fb).scale(sign);
                out.comps[ma | mb] = out.comps[ma | mb].add(&term);
            }
        }
        out
    }

    /// Left contraction: grade-(s-r) projection per homogeneous pair.
    pub fn lcontract(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.frame_id, rhs.frame_id);
        let mut out = Self::zero(&self.chart, self.frame_id);
        for (ma, fa) in self.comps.iter().enumerate() {
            if fa.is_zero() {
                continue;
            }
            for (mb, fb) in rhs.comps.iter().enumerate() {
                if fb.is_zero() {
                    continue;
                }
                // <A_r B_s>_{s-r} is nonzero only when the blade of A lies
                // inside the blade of B
                if ma & !mb != 0 {
                    continue;
                }
                let (mask, sign) = blade_mul(ma, mb, &self.chart);
                let term = fa.mul(fb).scale(sign);
                out.comps[mask] = out.comps[mask].add(&term);
            }
        }
        out
    }

    /// Right contraction: grade-(r-s) projection per homogeneous pair.
    pub fn rcontract(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.frame_id, rhs.frame_id);
        let mut out = Self::zero(&self.chart, self.frame_id);
        for (ma, fa) in self.comps.iter().enumerate() {
            if fa.is_zero() {
                continue;
            }
            for (mb, fb) in rhs.comps.iter().enumerate() {
                if fb.is_zero() {
                    continue;
                }
                if mb & !ma != 0 {
                    continue;
                }
                let (mask, sign) = blade_mul(ma, mb, &self.chart);
                let term = fa.mul(fb).scale(sign);
                out.comps[mask] = out.comps[mask].add(&term);
            }
        }
        out
    }

    /// Scalar product of equal-grade parts, <rev(A) B>_0 (Gram determinant
    /// on simple blades); grades r != s contribute nothing.
    pub fn scalar_product(&self, rhs: &Self) -> ScalarField {
        debug_assert_eq!(self.frame_id, rhs.frame_id);
        let mut acc = self.chart.zero();
        for (ma, fa) in self.comps.iter().enumerate() {
            if fa.is_zero() {
                continue;
            }
            let fb = &rhs.comps[ma];
            if fb.is_zero() {
                continue;
            }
            let (_, sign) = blade_mul(ma, ma, &self.chart);
            let r = rev_sign(ma.count_ones());
            acc = acc.add(&fa.mul(fb).scale(sign * r));
        }
        acc
    }

    /// Reversion: grade-k part picks up (-1)^{k(k-1)/2}.
    pub fn reversion(&self) -> Self {
        let mut out = self.clone();
        for (mask, f) in out.comps.iter_mut().enumerate() {
            let s = rev_sign(mask.count_ones());
            if s < 0.0 {
                *f = f.neg();
            }
        }
        out
    }

    pub fn grade_project(&self, k: usize) -> Self {
        let mut out = Self::zero(&self.chart, self.frame_id);
        for (mask, f) in self.comps.iter().enumerate() {
            if mask.count_ones() as usize == k {
                out.comps[mask] = f.clone();
            }
        }
        out
    }

    /// star A = rev(A) tau with tau the orthonormal volume blade in
    /// coordinate order.
    pub fn hodge(&self) -> Self {
        let n = self.dim();
        let full = (1usize << n) - 1;
        let mut out = Self::zero(&self.chart, self.frame_id);
        for (mask, f) in self.comps.iter().enumerate() {
            if f.is_zero() {
                continue;
            }
            let (m2, sign) = blade_mul(mask, full, &self.chart);
            let s = sign * rev_sign(mask.count_ones());
            out.comps[m2] = out.comps[m2].add(&f.scale(s));
        }
        out
    }

    /// Operator inverse of the Hodge star:
    /// star^{-1} = (-1)^{p(n-p)} sgn(det eta) star on grade p.
    pub fn hodge_inv(&self) -> Self {
        let n = self.dim();
        let det_sign = self.chart.signature.det_sign();
        let full = (1usize << n) - 1;
        let mut out = Self::zero(&self.chart, self.frame_id);
        for (mask, f) in self.comps.iter().enumerate() {
            if f.is_zero() {
                continue;
            }
            let p = mask.count_ones() as usize;
            let par = if (p * (n - p)) % 2 == 0 { 1.0 } else { -1.0 };
            let (m2, sign) = blade_mul(mask, full, &self.chart);
            let s = par * det_sign * sign * rev_sign(mask.count_ones());
            out.comps[m2] = out.comps[m2].add(&f.scale(s));
        }
        out
    }

    pub fn eval(&self, point: &[f64]) -> Result<Vec<f64>, EvalError> {
        self.comps.iter().map(|f| f.eval(point)).collect()
    }

    pub fn max_abs(&self, points: &[Vec<f64>]) -> Result<(f64, Vec<f64>), EvalError> {
        let mut worst = (0.0f64, points[0].clone());
        for p in points {
            for v in self.eval(p)? {
                if v.abs() > worst.0 {
                    worst = (v.abs(), p.clone());
                }
            }
        }
        Ok(worst)
    }

    // spec-surface variants with the frame-mismatch error contract
    pub fn checked_mul(&self, rhs: &Self) -> Result<Self, CliffordError> {
        self.same_frame(rhs)?;
        Ok(self.mul(rhs))
    }

    pub fn checked_wedge(&self, rhs: &Self) -> Result<Self, CliffordError> {
        self.same_frame(rhs)?;
        Ok(self.wedge(rhs))
    }

    pub fn checked_lcontract(&self, rhs: &Self) -> Result<Self, CliffordError> {
        self.same_frame(rhs)?;
        Ok(self.lcontract(rhs))
    }

    pub fn checked_rcontract(&self, rhs: &Self) -> Result<Self, CliffordError> {
        self.same_frame(rhs)?;
        Ok(self.rcontract(rhs))
    }
}

// ---------------------------------------------------------------------------
// basis changes between the orthonormal and the coordinate coframe
// ---------------------------------------------------------------------------

/// Determinant of the k x k minor rows x cols of a field matrix.
fn minor_det(
    chart: &Chart,
    entry: &dyn Fn(usize, usize) -> ScalarField,
    rows: &[usize],
    cols: &[usize],
) -> ScalarField {
    if rows.is_empty() {
        return chart.one();
    }
    if rows.len() == 1 {
        return entry(rows[0], cols[0]);
    }
    let mut acc = chart.zero();
    for (k, &c) in cols.iter().enumerate() {
        let sub: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
        let m = minor_det(chart, entry, &rows[1..], &sub);
        let term = entry(rows[0], c).mul(&m);
        acc = if k % 2 == 0 {
            acc.add(&term)
        } else {
            acc.sub(&term)
        };
    }
    acc
}

fn bits_of(mask: usize, dim: usize) -> Vec<usize> {
    (0..dim).filter(|i| mask & (1 << i) != 0).collect()
}

/// Rewrite blade components under a 1-form substitution
/// source^i = sum_j m[i][j] target^j; blades pick up minor determinants.
fn change_basis(
    chart: &Chart,
    comps: &[ScalarField],
    entry: &dyn Fn(usize, usize) -> ScalarField,
) -> Vec<ScalarField> {
    let dim = chart.dim;
    let n = comps.len();
    let mut out: Vec<ScalarField> = (0..n).map(|_| chart.zero()).collect();
    for (src, f) in comps.iter().enumerate() {
        if f.is_zero() {
            continue;
        }
        let rows = bits_of(src, dim);
        if rows.is_empty() {
            out[0] = out[0].add(f);
            continue;
        }
        for tgt in 0..n {
            if tgt.count_ones() != src.count_ones() {
                continue;
            }
            let cols = bits_of(tgt, dim);
            let det = minor_det(chart, entry, &rows, &cols);
            if det.is_zero() {
                continue;
            }
            out[tgt] = out[tgt].add(&f.mul(&det));
        }
    }
    out
}

/// Components of the same multivector over coordinate blades dx^T.
pub fn to_coordinate_components(cf: &Coframe, a: &Multivector) -> Vec<ScalarField> {
    let q = &cf.q;
    change_basis(&a.chart, &a.comps, &|i, j| q[i][j].clone())
}

/// Reassemble a multivector from coordinate-blade components.
pub fn from_coordinate_components(
    cf: &Coframe,
    frame_id: u64,
    chart: &Arc<Chart>,
    coord_comps: &[ScalarField],
) -> Multivector {
    let qinv = &cf.qinv;
    let comps = change_basis(chart, coord_comps, &|mu, a| qinv[a][mu].clone());
    Multivector {
        chart: chart.clone(),
        frame_id,
        comps,
    }
}

/// Exterior derivative: d(f dx^T) = sum_mu (d_mu f) dx^mu ^ dx^T, computed in
/// the coordinate coframe where no connection enters, then converted back.
pub fn exterior_derivative(cf: &Coframe, a: &Multivector) -> Multivector {
    let chart = &a.chart;
    let dim = chart.dim;
    let coord = to_coordinate_components(cf, a);
    let mut dcoord: Vec<ScalarField> = (0..coord.len()).map(|_| chart.zero()).collect();
    for (mask, f) in coord.iter().enumerate() {
        if f.is_zero() {
            continue;
        }
        for mu in 0..dim {
            let bit = 1usize << mu;
            if mask & bit != 0 {
                continue;
            }
            let df = f.diff(mu);
            if df.is_zero() {
                continue;
            }
            let sign = reorder_sign(bit, mask);
            dcoord[mask | bit] = dcoord[mask | bit].add(&df.scale(sign));
        }
    }
    from_coordinate_components(cf, a.frame_id, chart, &dcoord)
}

/// Hodge codifferential, delta = (-1)^p star^{-1} d star per grade part.
pub fn codifferential(cf: &Coframe, a: &Multivector) -> Multivector {
    let mut out = Multivector::zero(&a.chart, a.frame_id);
    for p in 0..=a.dim() {
        let part = a.grade_project(p);
        if part.comps.iter().all(|f| f.is_zero()) {
            continue;
        }
        let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
        let piece = exterior_derivative(cf, &part.hodge())
            .hodge_inv()
            .scale(sign);
        out = out.add(&piece);
    }
    out
}

/// Covariant derivative along the coordinate vector field d_rho, acting on
/// multivector sections through nabla theta^a = -omega^a_{rho b} theta^b.
pub fn nabla_coord(cf: &Coframe, omega: &Tensor3, rho: usize, a: &Multivector) -> Multivector {
    debug_assert_eq!(cf.frame_id, a.frame_id, "derivative in a foreign coframe");
    let chart = &a.chart;
    let dim = chart.dim;
    let mut out = Multivector::zero(chart, a.frame_id);
    for (mask, f) in a.comps.iter().enumerate() {
        if f.is_zero() {
            continue;
        }
        out.comps[mask] = out.comps[mask].add(&f.diff(rho));
        // rotate each leg of the blade
        for i in bits_of(mask, dim) {
            let without = mask & !(1 << i);
            let pos_i = (mask & ((1 << i) - 1)).count_ones();
            for b in 0..dim {
                let w = &omega[i][rho][b];
                if w.is_zero() {
                    continue;
                }
                if without & (1 << b) != 0 {
                    continue;
                }
                let newmask = without | (1 << b);
                let pos_b = (without & ((1 << b) - 1)).count_ones();
                let sign = if (pos_i + pos_b) % 2 == 0 { -1.0 } else { 1.0 };
                // -omega^i_{rho b} with the permutation sign folded in
                out.comps[newmask] = out.comps[newmask].add(&f.mul(w).scale(sign));
            }
        }
    }
    out
}

/// Covariant derivative along the orthonormal frame vector e_a via the
/// Clifford commutator route,
/// nabla_{e_a} A = e_a(A) + 1/2 [omega_{e_a}, A],
/// with the connection 2-form omega_{e_a} = 1/2 omega_{bac} theta^b theta^c.
pub fn clifford_cov_derivative(
    cf: &Coframe,
    omega_frame: &Tensor3,
    a: usize,
    mv: &Multivector,
) -> Multivector {
    let chart = &mv.chart;
    let dim = chart.dim;
    // e_a(A): derivative of the frame components along e_a
    let mut ea = Multivector::zero(chart, mv.frame_id);
    for (mask, f) in mv.comps.iter().enumerate() {
        if f.is_zero() {
            continue;
        }
        let mut acc = chart.zero();
        for mu in 0..dim {
            acc = acc.add(&cf.qinv[a][mu].mul(&f.diff(mu)));
        }
        ea.comps[mask] = acc;
    }
    // omega_{e_a} = 1/2 sum_{b,c} eta_{bd} omega^d_{ac}|_{d=b} theta^b theta^c
    let mut w = Multivector::zero(chart, mv.frame_id);
    for b in 0..dim {
        for c in 0..dim {
            if b == c {
                continue;
            }
            let coeff = omega_frame[b][a][c].scale(0.5 * chart.signature.eta(b));
            if coeff.is_zero() {
                continue;
            }
            let sign = if b < c { 1.0 } else { -1.0 };
            let mask = (1 << b) | (1 << c);
            w.comps[mask] = w.comps[mask].add(&coeff.scale(sign));
        }
    }
    let comm = w.mul(mv).sub(&mv.mul(&w)).scale(0.5);
    ea.add(&comm)
}

/// Dirac operator: dA = theta^a nabla_{e_a} A = dx^mu nabla_{d_mu} A.
pub fn dirac(cf: &Coframe, omega: &Tensor3, a: &Multivector) -> Multivector {
    let chart = &a.chart;
    let dim = chart.dim;
    let mut out = Multivector::zero(chart, a.frame_id);
    for mu in 0..dim {
        let der = nabla_coord(cf, omega, mu, a);
        // dx^mu as a 1-form in frame components
        let mut dx = Multivector::zero(chart, a.frame_id);
        for b in 0..dim {
            dx.comps[1 << b] = cf.qinv[b][mu].clone();
        }
        out = out.add(&dx.mul(&der));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_points, Chart, Signature};

    fn lorentz_chart() -> Arc<Chart> {
        Arc::new(
            Chart::new(
                vec!["x0".into(), "x1".into(), "x2".into(), "x3".into()],
                vec![(-1.0, 1.0); 4],
                Signature::new(1, 3),
            )
            .unwrap(),
        )
    }

    /// Naive sign oracle: multiply index lists, bubble-sorting into ascending
    /// order with explicit transposition counting and eta contractions.
    fn naive_blade_mul(a: &[usize], b: &[usize], sig: Signature) -> (Vec<usize>, f64) {
        let mut seq: Vec<usize> = a.iter().chain(b.iter()).copied().collect();
        let mut sign = 1.0;
        // bubble sort counting swaps
        loop {
            let mut swapped = false;
            for i in 0..seq.len().saturating_sub(1) {
                if seq[i] > seq[i + 1] {
                    seq.swap(i, i + 1);
                    sign = -sign;
                    swapped = true;
                }
            }
            if !swapped {
                break;
            }
        }
        // contract equal neighbours
        let mut result: Vec<usize> = Vec::new();
        let mut i = 0;
        while i < seq.len() {
            if i + 1 < seq.len() && seq[i] == seq[i + 1] {
                sign *= sig.eta(seq[i]);
                i += 2;
            } else {
                result.push(seq[i]);
                i += 1;
            }
        }
        (result, sign)
    }

    #[test]
    fn blade_product_matches_naive_oracle_exhaustively() {
        for (p, q) in [(1usize, 3usize), (2, 0)] {
            let sig = Signature::new(p, q);
            let dim = sig.dim();
            let chart = Arc::new(
                Chart::new(
                    (0..dim).map(|i| format!("x{}", i)).collect(),
                    vec![(-1.0, 1.0); dim],
                    sig,
                )
                .unwrap(),
            );
            for a in 0..(1usize << dim) {
                for b in 0..(1usize << dim) {
                    let (mask, sign) = blade_mul(a, b, &chart);
                    let av = bits_of(a, dim);
                    let bv = bits_of(b, dim);
                    let (res, nsign) = naive_blade_mul(&av, &bv, sig);
                    let nmask = res.iter().fold(0usize, |m, &i| m | (1 << i));
                    assert_eq!(mask, nmask, "mask mismatch {:b} x {:b}", a, b);
                    assert_eq!(sign, nsign, "sign mismatch {:b} x {:b}", a, b);
                }
            }
        }
    }

    #[test]
    fn generator_relation() {
        let chart = lorentz_chart();
        let t0 = Multivector::basis_form(&chart, 0, 0);
        let t1 = Multivector::basis_form(&chart, 0, 1);
        let pts = sample_points(&chart, 4, 0);
        // theta^0 theta^0 = 1, theta^1 theta^1 = -1
        let p00 = t0.mul(&t0);
        let p11 = t1.mul(&t1);
        for p in &pts {
            assert!((p00.comps[0].eval(p).unwrap() - 1.0).abs() < 1e-15);
            assert!((p11.comps[0].eval(p).unwrap() + 1.0).abs() < 1e-15);
        }
        // anticommutation for eta^{01} = 0
        let anti = t0.mul(&t1).add(&t1.mul(&t0));
        for p in &pts {
            for v in anti.eval(p).unwrap() {
                assert!(v.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn product_example_from_blade_table() {
        // (theta^0+theta^1)(theta^0-theta^1) = 2 - 2 theta^0^theta^1
        let chart = lorentz_chart();
        let t0 = Multivector::basis_form(&chart, 0, 0);
        let t1 = Multivector::basis_form(&chart, 0, 1);
        let prod = t0.add(&t1).mul(&t0.sub(&t1));
        let p = [0.1, 0.2, 0.3, 0.4];
        let v = prod.eval(&p).unwrap();
        assert!((v[0] - 2.0).abs() < 1e-14);
        assert!((v[0b11] + 2.0).abs() < 1e-14);
        for (mask, val) in v.iter().enumerate() {
            if mask != 0 && mask != 0b11 {
                assert!(val.abs() < 1e-15, "stray component {:b}", mask);
            }
        }
    }

    #[test]
    fn wedge_basics() {
        let chart = lorentz_chart();
        let t1 = Multivector::basis_form(&chart, 0, 1);
        let t2 = Multivector::basis_form(&chart, 0, 2);
        let p = [0.1, 0.2, 0.3, 0.4];
        assert!(t1
            .wedge(&t1)
            .eval(&p)
            .unwrap()
            .iter()
            .all(|v| v.abs() < 1e-15));
        let w = t1.wedge(&t2);
        assert!((w.eval(&p).unwrap()[0b110] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn contraction_examples() {
        // 2-d Euclidean: theta^0 lcontract (theta^0 ^ theta^1) = theta^1
        let chart = Arc::new(
            Chart::new(
                vec!["x1".into(), "x2".into()],
                vec![(0.1, 1.0), (0.1, 1.0)],
                Signature::new(2, 0),
            )
            .unwrap(),
        );
        let t0 = Multivector::basis_form(&chart, 0, 0);
        let t1 = Multivector::basis_form(&chart, 0, 1);
        let b = t0.wedge(&t1);
        let c = t0.lcontract(&b);
        let p = [0.5, 0.5];
        let v = c.eval(&p).unwrap();
        assert!((v[0b10] - 1.0).abs() < 1e-15);
        // orthogonal 1-forms contract to zero
        assert!(t0
            .lcontract(&t1)
            .eval(&p)
            .unwrap()
            .iter()
            .all(|x| x.abs() < 1e-15));
        // scalar lcontract B = scalar * B
        let s = Multivector::scalar(&chart, 0, chart.constant(3.0));
        let sb = s.lcontract(&b).eval(&p).unwrap();
        assert!((sb[0b11] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn scalar_product_gram_determinant() {
        // (theta^0 ^ theta^1) . (theta^0 ^ theta^1) = det diag(1,-1) = -1
        let chart = lorentz_chart();
        let t0 = Multivector::basis_form(&chart, 0, 0);
        let t1 = Multivector::basis_form(&chart, 0, 1);
        let b = t0.wedge(&t1);
        let p = [0.1, 0.2, 0.3, 0.4];
        assert!((b.scalar_product(&b).eval(&p).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn reversion_signs() {
        let chart = lorentz_chart();
        let t0 = Multivector::basis_form(&chart, 0, 0);
        let t1 = Multivector::basis_form(&chart, 0, 1);
        let b = t0.wedge(&t1);
        let p = [0.1, 0.2, 0.3, 0.4];
        assert!((b.reversion().eval(&p).unwrap()[0b11] + 1.0).abs() < 1e-15);
        let s = Multivector::scalar(&chart, 0, chart.constant(2.5));
        assert!((s.reversion().eval(&p).unwrap()[0] - 2.5).abs() < 1e-15);
    }

    #[test]
    fn hodge_star_basics() {
        let chart = lorentz_chart();
        let p = [0.1, 0.2, 0.3, 0.4];
        // star 1 = volume form
        let one = Multivector::scalar(&chart, 0, chart.one());
        let v = one.hodge().eval(&p).unwrap();
        assert!((v[0b1111] - 1.0).abs() < 1e-15);
        // defining relation theta^0 ^ star theta^0 = (theta^0 . theta^0) tau
        let t0 = Multivector::basis_form(&chart, 0, 0);
        let lhs = t0.wedge(&t0.hodge()).eval(&p).unwrap();
        assert!((lhs[0b1111] - 1.0).abs() < 1e-15);
        // star^{-1} star = identity on every blade
        for mask in 0..16usize {
            let b = Multivector::basis_blade(&chart, 0, mask);
            let round = b.hodge().hodge_inv().eval(&p).unwrap();
            for (m2, val) in round.iter().enumerate() {
                let want = if m2 == mask { 1.0 } else { 0.0 };
                assert!((val - want).abs() < 1e-15, "mask {:b}", mask);
            }
        }
        // star(star A) = -A on grade 2 in Lorentzian 4-d
        let b = Multivector::basis_blade(&chart, 0, 0b0110);
        let ss = b.hodge().hodge().eval(&p).unwrap();
        assert!((ss[0b0110] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn hodge_defining_relation_all_grades_all_pairs() {
        // A ^ star B = (A . B) tau for equal-grade basis blades
        for (p_, q_) in [(1usize, 3usize), (2, 0)] {
            let sig = Signature::new(p_, q_);
            let dim = sig.dim();
            let chart = Arc::new(
                Chart::new(
                    (0..dim).map(|i| format!("x{}", i)).collect(),
                    vec![(0.1, 1.0); dim],
                    sig,
                )
                .unwrap(),
            );
            let pt = vec![0.5; dim];
            let full = (1usize << dim) - 1;
            for a in 0..=full {
                for b in 0..=full {
                    if a.count_ones() != b.count_ones() {
                        continue;
                    }
                    let ma = Multivector::basis_blade(&chart, 0, a);
                    let mb = Multivector::basis_blade(&chart, 0, b);
                    let lhs = ma.wedge(&mb.hodge()).eval(&pt).unwrap()[full];
                    let rhs = ma.scalar_product(&mb).eval(&pt).unwrap();
                    assert!(
                        (lhs - rhs).abs() < 1e-14,
                        "sig ({},{}) blades {:b},{:b}: {} vs {}",
                        p_,
                        q_,
                        a,
                        b,
                        lhs,
                        rhs
                    );
                }
            }
        }
    }

    #[test]
    fn frame_mismatch_is_an_error() {
        let chart = lorentz_chart();
        let a = Multivector::basis_form(&chart, 1, 0);
        let b = Multivector::basis_form(&chart, 2, 0);
        assert!(matches!(
            a.checked_mul(&b),
            Err(CliffordError::FrameMismatch(1, 2))
        ));
    }
}

#[cfg(test)]
mod diff_tests {
    use super::*;
    use crate::geometry::sample_points;
    use crate::manifold::builtin;

    #[test]
    fn d_of_x1_dx2_is_the_coordinate_area_element() {
        let m = builtin("minkowski", None).unwrap();
        let pts = sample_points(&m.chart, 4, 0);
        // x1 dx2: identity coframe, so dx^mu = theta^mu
        let a = m.theta(2).scale_field(&m.chart.var(1));
        let da = exterior_derivative(&m.coframe, &a);
        for p in &pts {
            let v = da.eval(p).unwrap();
            for (mask, x) in v.iter().enumerate() {
                let want = if mask == 0b0110 { 1.0 } else { 0.0 };
                assert!((x - want).abs() < 1e-14, "component {:b}", mask);
            }
        }
    }

    #[test]
    fn d_theta2_on_the_sphere_is_cot_theta_times_the_frame_area() {
        let m = builtin("s2", None).unwrap();
        let pts = sample_points(&m.chart, 8, 0);
        let da = exterior_derivative(&m.coframe, &m.theta(1));
        for p in &pts {
            let want = p[0].cos() / p[0].sin();
            let v = da.eval(p).unwrap();
            assert!(
                (v[0b11] - want).abs() < 1e-12,
                "{} vs cot {}",
                v[0b11],
                want
            );
        }
    }

    #[test]
    fn dd_of_random_scalars_vanishes() {
        let m = builtin("schwarzschild", None).unwrap();
        let pts = sample_points(&m.chart, 4, 0);
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(4);
        for _ in 0..3 {
            let f = m.mv_scalar(m.random_scalar(&mut rng));
            let ddf = exterior_derivative(&m.coframe, &exterior_derivative(&m.coframe, &f));
            let (v, _) = ddf.max_abs(&pts).unwrap();
            assert!(v <= 1e-12, "dd f = {}", v);
        }
    }

    #[test]
    fn sphere_covariant_derivative_of_theta2_along_e2() {
        // nabla_{e_2} theta^2 = -cot(theta) theta^1 at unit radius; the
        // commutator route and the coefficient route must agree
        let m = builtin("s2", None).unwrap();
        let pts = sample_points(&m.chart, 8, 0);
        let via_comm = clifford_cov_derivative(&m.coframe, &m.omega_frame, 1, &m.theta(1));
        for p in &pts {
            let want = -p[0].cos() / p[0].sin();
            let v = via_comm.eval(p).unwrap();
            assert!((v[0b01] - want).abs() < 1e-9, "{} vs {}", v[0b01], want);
            assert!(v[0b10].abs() < 1e-12);
        }
        // coefficient route: -omega^b_{ac} theta^c
        let mut rhs = m.mv_zero();
        for c in 0..2 {
            rhs = rhs.sub(&m.theta(c).scale_field(&m.omega_frame[1][1][c]));
        }
        for p in &pts {
            let a = via_comm.eval(p).unwrap();
            let b = rhs.eval(p).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn scalar_covariant_derivative_is_the_frame_derivative() {
        let m = builtin("s2", None).unwrap();
        let pts = sample_points(&m.chart, 8, 0);
        let f = m.chart.var(0).sin().mul(&m.chart.var(1).cos());
        let mv = m.mv_scalar(f.clone());
        for a in 0..2 {
            let lhs = clifford_cov_derivative(&m.coframe, &m.omega_frame, a, &mv);
            for p in &pts {
                let mut want = 0.0;
                for mu in 0..2 {
                    want += m.coframe.qinv[a][mu].eval(p).unwrap() * f.diff(mu).eval(p).unwrap();
                }
                let v = lhs.eval(p).unwrap();
                assert!((v[0] - want).abs() < 1e-12);
                assert!(v[1].abs() < 1e-15 && v[2].abs() < 1e-15);
            }
        }
    }
}

#[cfg(test)]
mod algebra_tests {
    use super::*;
    use crate::geometry::{Chart, Signature};
    use rand::Rng;
    use rand::SeedableRng;
    use std::sync::Arc;

    #[test]
    fn clifford_product_is_bilinear_and_associative() {
        for (p, q) in [(1usize, 3usize), (2, 0)] {
            let sig = Signature::new(p, q);
            let dim = sig.dim();
            let chart = Arc::new(
                Chart::new(
                    (0..dim).map(|i| format!("x{}", i)).collect(),
                    vec![(0.1, 1.0); dim],
                    sig,
                )
                .unwrap(),
            );
            let pt = vec![0.4; dim];
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
            let mut random = || {
                let mut mv = Multivector::zero(&chart, 0);
                for mask in 0..(1usize << dim) {
                    mv.comps[mask] = chart.constant(rng.gen_range(-1.5..1.5));
                }
                mv
            };
            for _ in 0..16 {
                let a = random();
                let b = random();
                let c = random();
                let assoc = a.mul(&b).mul(&c).sub(&a.mul(&b.mul(&c)));
                for v in assoc.eval(&pt).unwrap() {
                    assert!(v.abs() < 1e-12, "associativity residual {}", v);
                }
                let bilinear = a.add(&b).mul(&c).sub(&a.mul(&c)).sub(&b.mul(&c));
                for v in bilinear.eval(&pt).unwrap() {
                    assert!(v.abs() < 1e-12, "bilinearity residual {}", v);
                }
            }
        }
    }
}
