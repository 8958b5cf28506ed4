//! Univariate B-spline machinery and tensor-product space bookkeeping.
//!
//! Knot vectors are `p`-open over `[0, 1]`: the first and last breakpoints
//! carry multiplicity `p + 1`, interior multiplicities stay between 1 and
//! `p`. Basis functions follow the Cox-de Boor recursion with the usual
//! right-continuous convention in the interior and the left limit at
//! `t = 1`, so the last basis function attains the value 1 there.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SplineError {
    #[error("spline degree must be at least 1, got {0}")]
    InvalidDegree(usize),
    #[error("knot vector needs at least one element span")]
    TooFewKnots,
    #[error("knot sequence must be nondecreasing (position {0})")]
    UnsortedKnots(usize),
    #[error("knot vector must span [0, 1], found range [{0}, {1}]")]
    BadRange(f64, f64),
    #[error("boundary knot multiplicity must be degree + 1")]
    NotOpen,
    #[error("interior knot multiplicity {found} exceeds degree {degree}")]
    MultiplicityTooHigh { found: usize, degree: usize },
    #[error("parameter {0} outside the domain [0, 1]")]
    OutOfDomain(f64),
    #[error("derivative order {order} exceeds degree {degree}")]
    OrderTooHigh { order: usize, degree: usize },
    #[error("element count must be at least 1")]
    NoElements,
}

/// A `p`-open knot vector on `[0, 1]` with its run-length encoding into
/// breakpoints and multiplicities.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    degree: usize,
    knots: Vec<f64>,
    breakpoints: Vec<f64>,
    multiplicities: Vec<usize>,
}

impl KnotVector {
    /// Validates the sequence and derives breakpoints/multiplicities.
    ///
    /// Knot comparisons are exact binary equality; no epsilon merging.
    pub fn new(degree: usize, knots: Vec<f64>) -> Result<Self, SplineError> {
        if degree < 1 {
            return Err(SplineError::InvalidDegree(degree));
        }
        if knots.len() < 2 * (degree + 1) {
            return Err(SplineError::TooFewKnots);
        }
        for i in 1..knots.len() {
            if knots[i] < knots[i - 1] {
                return Err(SplineError::UnsortedKnots(i));
            }
        }
        let first = knots[0];
        let last = *knots.last().unwrap();
        if first != 0.0 || last != 1.0 {
            return Err(SplineError::BadRange(first, last));
        }

        let mut breakpoints = Vec::new();
        let mut multiplicities = Vec::new();
        for &k in &knots {
            if let Some(&z) = breakpoints.last() {
                if k == z {
                    *multiplicities.last_mut().unwrap() += 1;
                    continue;
                }
            }
            breakpoints.push(k);
            multiplicities.push(1);
        }
        if multiplicities[0] != degree + 1 || *multiplicities.last().unwrap() != degree + 1 {
            return Err(SplineError::NotOpen);
        }
        for &m in &multiplicities[1..multiplicities.len() - 1] {
            if m > degree {
                return Err(SplineError::MultiplicityTooHigh { found: m, degree });
            }
        }
        Ok(Self {
            degree,
            knots,
            breakpoints,
            multiplicities,
        })
    }

    /// Open knot vector with `elements` equal spans and single interior
    /// knots (maximum smoothness).
    pub fn open_uniform(degree: usize, elements: usize) -> Result<Self, SplineError> {
        if degree < 1 {
            return Err(SplineError::InvalidDegree(degree));
        }
        if elements < 1 {
            return Err(SplineError::NoElements);
        }
        let mut knots = vec![0.0; degree + 1];
        for i in 1..elements {
            knots.push(i as f64 / elements as f64);
        }
        knots.extend(core::iter::repeat(1.0).take(degree + 1));
        Self::new(degree, knots)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    /// Number of basis functions `n = len(knots) - p - 1`.
    pub fn num_basis(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    pub fn num_spans(&self) -> usize {
        self.breakpoints.len() - 1
    }

    /// Largest breakpoint gap.
    pub fn max_span(&self) -> f64 {
        let mut h = 0.0;
        for i in 0..self.num_spans() {
            h = f64::max(h, self.breakpoints[i + 1] - self.breakpoints[i]);
        }
        h
    }

    /// min/max span ratio; a quasi-uniformity diagnostic, nothing is enforced.
    pub fn span_ratio(&self) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for i in 0..self.num_spans() {
            let s = self.breakpoints[i + 1] - self.breakpoints[i];
            lo = lo.min(s);
            hi = hi.max(s);
        }
        lo / hi
    }

    /// Splits every span at its midpoint with a single new knot.
    pub fn uniform_refine(&self) -> KnotVector {
        let mut knots = Vec::with_capacity(self.knots.len() + self.num_spans());
        for i in 0..self.breakpoints.len() {
            for _ in 0..self.multiplicities[i] {
                knots.push(self.breakpoints[i]);
            }
            if i + 1 < self.breakpoints.len() {
                knots.push(0.5 * (self.breakpoints[i] + self.breakpoints[i + 1]));
            }
        }
        KnotVector::new(self.degree, knots).expect("refinement preserves validity")
    }

    /// Breakpoint interval index `i` with `Z[i] <= t < Z[i+1]`; the last
    /// interval is closed at `t = 1`.
    pub fn active_span(&self, t: f64) -> Result<usize, SplineError> {
        if !(0.0..=1.0).contains(&t) {
            return Err(SplineError::OutOfDomain(t));
        }
        if t >= 1.0 {
            return Ok(self.num_spans() - 1);
        }
        // binary search over breakpoints
        let mut lo = 0;
        let mut hi = self.num_spans() - 1;
        while lo < hi {
            let mid = (lo + hi + 1) / 2;
            if self.breakpoints[mid] <= t {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        Ok(lo)
    }

    /// Knot span index `mu` with `knots[mu] <= t < knots[mu+1]`, clamped to
    /// the last nonempty span at `t = 1` (left limit convention).
    fn knot_span(&self, t: f64) -> usize {
        let n = self.num_basis();
        if t >= 1.0 {
            return n - 1;
        }
        let mut lo = self.degree;
        let mut hi = n - 1;
        while lo < hi {
            let mid = (lo + hi + 1) / 2;
            if self.knots[mid] <= t {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        lo
    }

    /// Nonzero basis values at `t`: returns the index of the first active
    /// function and the `p + 1` values `B[p, knots, first..=first+p](t)`.
    pub fn eval_basis(&self, t: f64) -> Result<(usize, Vec<f64>), SplineError> {
        if !(0.0..=1.0).contains(&t) {
            return Err(SplineError::OutOfDomain(t));
        }
        let p = self.degree;
        let mu = self.knot_span(t);
        let mut values = vec![0.0; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        values[0] = 1.0;
        for j in 1..=p {
            left[j] = t - self.knots[mu + 1 - j];
            right[j] = self.knots[mu + j] - t;
            let mut saved = 0.0;
            for r in 0..j {
                let temp = values[r] / (right[r + 1] + left[j - r]);
                values[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            values[j] = saved;
        }
        Ok((mu - p, values))
    }

    /// Basis values and derivatives up to `order` at `t`.
    ///
    /// Row `k` of the returned table holds the `k`-th derivatives of the
    /// `p + 1` active functions; row 0 matches [`Self::eval_basis`].
    pub fn eval_basis_derivs(&self, t: f64, order: usize) -> Result<(usize, DerivTable), SplineError> {
        if !(0.0..=1.0).contains(&t) {
            return Err(SplineError::OutOfDomain(t));
        }
        let p = self.degree;
        if order > p {
            return Err(SplineError::OrderTooHigh { order, degree: p });
        }
        let mu = self.knot_span(t);
        let cols = p + 1;

        // ndu: upper triangle basis values, lower triangle knot differences.
        let mut ndu = vec![0.0; cols * cols];
        let mut left = vec![0.0; cols];
        let mut right = vec![0.0; cols];
        ndu[0] = 1.0;
        for j in 1..=p {
            left[j] = t - self.knots[mu + 1 - j];
            right[j] = self.knots[mu + j] - t;
            let mut saved = 0.0;
            for r in 0..j {
                ndu[j * cols + r] = right[r + 1] + left[j - r];
                let temp = ndu[r * cols + j - 1] / ndu[j * cols + r];
                ndu[r * cols + j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j * cols + j] = saved;
        }

        let mut ders = DerivTable::zeros(order, p);
        for j in 0..=p {
            ders.set(0, j, ndu[j * cols + p]);
        }

        // two alternating rows of expansion coefficients
        let mut a = vec![0.0; 2 * cols];
        for r in 0..=p {
            let (mut s1, mut s2) = (0usize, 1usize);
            a[0] = 1.0;
            a[cols] = 0.0;
            for k in 1..=order {
                let mut d = 0.0;
                let rk = r as isize - k as isize;
                let pk = p - k;
                if r >= k {
                    a[s2 * cols] = a[s1 * cols] / ndu[(pk + 1) * cols + rk as usize];
                    d = a[s2 * cols] * ndu[rk as usize * cols + pk];
                }
                let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
                let j2 = if r as isize - 1 <= pk as isize { k - 1 } else { p - r };
                for j in j1..=j2 {
                    let idx = (rk + j as isize) as usize;
                    a[s2 * cols + j] = (a[s1 * cols + j] - a[s1 * cols + j - 1]) / ndu[(pk + 1) * cols + idx];
                    d += a[s2 * cols + j] * ndu[idx * cols + pk];
                }
                if r <= pk {
                    a[s2 * cols + k] = -a[s1 * cols + k - 1] / ndu[(pk + 1) * cols + r];
                    d += a[s2 * cols + k] * ndu[r * cols + pk];
                }
                ders.set(k, r, d);
                core::mem::swap(&mut s1, &mut s2);
            }
        }

        // scale by p! / (p - k)!
        let mut factor = p as f64;
        for k in 1..=order {
            for j in 0..=p {
                let v = ders.get(k, j) * factor;
                ders.set(k, j, v);
            }
            factor *= (p - k) as f64;
        }
        Ok((mu - p, ders))
    }
}

/// Row-major `(order + 1) x (p + 1)` table of basis derivatives.
#[derive(Debug, Clone)]
pub struct DerivTable {
    cols: usize,
    data: Vec<f64>,
}

impl DerivTable {
    fn zeros(order: usize, degree: usize) -> Self {
        Self {
            cols: degree + 1,
            data: vec![0.0; (order + 1) * (degree + 1)],
        }
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.cols..(k + 1) * self.cols]
    }

    pub fn get(&self, k: usize, j: usize) -> f64 {
        self.data[k * self.cols + j]
    }

    fn set(&mut self, k: usize, j: usize, v: f64) {
        self.data[k * self.cols + j] = v;
    }
}

/// Tensor-product spline space; global index `j * n_u + i` (u fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct TensorSplineSpace {
    kv_u: KnotVector,
    kv_v: KnotVector,
}

impl TensorSplineSpace {
    pub fn new(kv_u: KnotVector, kv_v: KnotVector) -> Self {
        Self { kv_u, kv_v }
    }

    pub fn kv_u(&self) -> &KnotVector {
        &self.kv_u
    }

    pub fn kv_v(&self) -> &KnotVector {
        &self.kv_v
    }

    pub fn n_u(&self) -> usize {
        self.kv_u.num_basis()
    }

    pub fn n_v(&self) -> usize {
        self.kv_v.num_basis()
    }

    pub fn dim(&self) -> usize {
        self.n_u() * self.n_v()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n_u() && j < self.n_v());
        j * self.n_u() + i
    }

    pub fn tensor_index(&self, global: usize) -> (usize, usize) {
        (global % self.n_u(), global / self.n_u())
    }

    pub fn uniform_refine(&self) -> Self {
        Self {
            kv_u: self.kv_u.uniform_refine(),
            kv_v: self.kv_v.uniform_refine(),
        }
    }

    /// Evaluates `sum coeffs[g] * B_g(u, v)` over the full tensor basis.
    pub fn eval(&self, coeffs: &[f64], u: f64, v: f64) -> Result<f64, SplineError> {
        debug_assert_eq!(coeffs.len(), self.dim());
        let (fu, bu) = self.kv_u.eval_basis(u)?;
        let (fv, bv) = self.kv_v.eval_basis(v)?;
        let mut acc = 0.0;
        for (dj, bj) in bv.iter().enumerate() {
            let mut row = 0.0;
            for (di, bi) in bu.iter().enumerate() {
                row += bi * coeffs[self.index(fu + di, fv + dj)];
            }
            acc += bj * row;
        }
        Ok(acc)
    }
}

/// Euclidean distance helper shared by geometry checks.
pub(crate) fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    math::hypot(a[0] - b[0], a[1] - b[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn open_uniform_no_interior() {
        let kv = KnotVector::open_uniform(2, 1).unwrap();
        assert_eq!(kv.knots(), &[0.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        assert_eq!(kv.num_basis(), 3);
    }

    #[test]
    fn open_uniform_midpoint() {
        let kv = KnotVector::open_uniform(1, 2).unwrap();
        assert_eq!(kv.knots(), &[0.0, 0.0, 0.5, 1.0, 1.0]);
    }

    #[test]
    fn open_uniform_counts() {
        // n = sum(m_i) - p - 1
        let kv = KnotVector::open_uniform(3, 4).unwrap();
        assert_eq!(kv.breakpoints().len(), 5);
        let m_sum: usize = kv.multiplicities().iter().sum();
        assert_eq!(m_sum - 3 - 1, 7);
        assert_eq!(kv.num_basis(), 7);
    }

    #[test]
    fn invalid_args_rejected() {
        assert!(KnotVector::open_uniform(0, 3).is_err());
        assert!(KnotVector::open_uniform(2, 0).is_err());
        assert!(KnotVector::new(2, vec![0.0, 0.0, 0.5, 1.0, 1.0]).is_err()); // not open
        assert!(KnotVector::new(1, vec![0.0, 0.0, 0.7, 0.3, 1.0, 1.0]).is_err());
    }

    #[test]
    fn refine_examples() {
        let kv = KnotVector::new(2, vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(kv.uniform_refine().knots(), &[0.0, 0.0, 0.0, 0.5, 1.0, 1.0, 1.0]);

        let kv = KnotVector::new(1, vec![0.0, 0.0, 0.5, 1.0, 1.0]).unwrap();
        assert_eq!(
            kv.uniform_refine().knots(),
            &[0.0, 0.0, 0.25, 0.5, 0.75, 1.0, 1.0]
        );

        let mut kv = KnotVector::open_uniform(2, 1).unwrap();
        for r in 1..=4 {
            kv = kv.uniform_refine();
            assert_eq!(kv.num_spans(), 1 << r);
        }
    }

    #[test]
    fn bernstein_values_at_midpoint() {
        let kv = KnotVector::open_uniform(2, 1).unwrap();
        let (first, vals) = kv.eval_basis(0.5).unwrap();
        assert_eq!(first, 0);
        for (v, want) in vals.iter().zip([0.25, 0.5, 0.25]) {
            assert!((v - want).abs() < 1e-15);
        }
    }

    #[test]
    fn hat_peak() {
        let kv = KnotVector::new(1, vec![0.0, 0.0, 0.5, 1.0, 1.0]).unwrap();
        // right-continuity: t = 0.5 opens the second span, actives (1, 2)
        let (first, vals) = kv.eval_basis(0.5).unwrap();
        assert_eq!(first, 1);
        assert!((vals[0] - 1.0).abs() < 1e-15 && vals[1].abs() < 1e-15);
        let full = full_values(&kv, 0.5);
        assert!((full[1] - 1.0).abs() < 1e-15);
        assert!(full[0].abs() < 1e-15 && full[2].abs() < 1e-15);
    }

    #[test]
    fn endpoint_conventions() {
        let kv = KnotVector::open_uniform(3, 4).unwrap();
        let full0 = full_values(&kv, 0.0);
        assert!((full0[0] - 1.0).abs() < 1e-15);
        let full1 = full_values(&kv, 1.0);
        assert!((full1[kv.num_basis() - 1] - 1.0).abs() < 1e-15);
        assert!(kv.eval_basis(-0.1).is_err());
        assert!(kv.eval_basis(1.1).is_err());
    }

    #[test]
    fn bernstein_first_derivatives() {
        let kv = KnotVector::open_uniform(2, 1).unwrap();
        let (_, table) = kv.eval_basis_derivs(0.5, 1).unwrap();
        for (d, want) in table.row(1).iter().zip([-1.0, 0.0, 1.0]) {
            assert!((d - want).abs() < 1e-14);
        }
        assert!(kv.eval_basis_derivs(0.5, 3).is_err());
    }

    #[test]
    fn derivative_rows_match_eval() {
        let kv = KnotVector::open_uniform(3, 5).unwrap();
        for &t in &[0.0, 0.13, 0.5, 0.77, 1.0] {
            let (f0, vals) = kv.eval_basis(t).unwrap();
            let (f1, table) = kv.eval_basis_derivs(t, 2).unwrap();
            assert_eq!(f0, f1);
            for (a, b) in vals.iter().zip(table.row(0)) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn active_span_convention() {
        let kv = KnotVector::new(1, vec![0.0, 0.0, 0.5, 1.0, 1.0]).unwrap();
        assert_eq!(kv.active_span(0.25).unwrap(), 0);
        assert_eq!(kv.active_span(0.75).unwrap(), 1);
        assert_eq!(kv.active_span(1.0).unwrap(), 1);
        assert!(kv.active_span(1.5).is_err());
    }

    fn full_values(kv: &KnotVector, t: f64) -> Vec<f64> {
        let (first, vals) = kv.eval_basis(t).unwrap();
        let mut full = vec![0.0; kv.num_basis()];
        for (i, v) in vals.iter().enumerate() {
            full[first + i] = *v;
        }
        full
    }

    #[test]
    fn tensor_index_bijection() {
        let kv = KnotVector::open_uniform(2, 3).unwrap();
        let space = TensorSplineSpace::new(kv.clone(), kv.uniform_refine());
        assert_eq!(space.dim(), space.n_u() * space.n_v());
        for g in 0..space.dim() {
            let (i, j) = space.tensor_index(g);
            assert_eq!(space.index(i, j), g);
        }
    }
}
