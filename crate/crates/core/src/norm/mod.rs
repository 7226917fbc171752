//! `p → p` operator-norm estimation with certified brackets.
//!
//! Everything here works on counting-measure matrices; weighted operators are
//! first conjugated by the diagonal isometries `D^{1/p}`.

mod ascent;
mod bracket;
mod certify;

use serde::{Deserialize, Serialize};

use crate::linop::{CMatrix, C64, ZERO};
use crate::sparse::SparseMatrix;

pub use ascent::{ascent_from, lower_bound, opnorm_lower, AscentOptions, AscentTrace};
pub use bracket::{opnorm_bracket, opnorm_bracket_with, BranchBoundOptions, DEFAULT_ORACLE_CAP};
pub use certify::{
    certify_matrix, certify_sparse, certified_norm, riesz_thorin_upper, schur_upper,
    CertifyOptions,
};

/// Certified interval `[lower, upper]` for an operator norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormBracket {
    pub lower: f64,
    pub upper: f64,
}

impl NormBracket {
    /// Panics if the interval is malformed; every producer in this crate
    /// guarantees `0 <= lower <= upper < ∞`.
    pub fn new(lower: f64, upper: f64) -> Self {
        assert!(
            lower.is_finite() && upper.is_finite() && 0.0 <= lower && lower <= upper,
            "malformed norm bracket [{lower}, {upper}]"
        );
        Self { lower, upper }
    }

    pub fn exact(v: f64) -> Self {
        Self::new(v, v)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }

    /// Intersection of two brackets for the same quantity.
    pub fn intersect(&self, other: &NormBracket) -> NormBracket {
        let lower = self.lower.max(other.lower);
        let upper = self.upper.min(other.upper).max(lower);
        NormBracket::new(lower, upper)
    }

    /// Bracket of the maximum of several quantities.
    pub fn max_of(items: impl IntoIterator<Item = NormBracket>) -> NormBracket {
        items
            .into_iter()
            .fold(NormBracket::exact(0.0), |acc, b| {
                NormBracket::new(acc.lower.max(b.lower), acc.upper.max(b.upper))
            })
    }
}

/// Matrix-vector products needed by the estimators.
pub trait MatVec {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn mul_vec(&self, x: &[C64]) -> Vec<C64>;
    /// `M^H y`.
    fn adjoint_mul_vec(&self, y: &[C64]) -> Vec<C64>;
    /// `|M| x` for entrywise moduli.
    fn abs_mul_vec(&self, x: &[f64]) -> Vec<f64>;
    /// `|M|^T y`.
    fn abs_tmul_vec(&self, y: &[f64]) -> Vec<f64>;
    /// `(row, column, value)` for every stored nonzero.
    fn for_each_nonzero(&self, f: &mut dyn FnMut(usize, usize, C64));

    fn col_abs_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.ncols()];
        self.for_each_nonzero(&mut |_, j, v| s[j] += v.norm());
        s
    }

    fn row_abs_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.nrows()];
        self.for_each_nonzero(&mut |i, _, v| s[i] += v.norm());
        s
    }

    fn is_zero(&self) -> bool {
        let mut zero = true;
        self.for_each_nonzero(&mut |_, _, v| zero &= v == ZERO);
        zero
    }
}

impl MatVec for CMatrix {
    fn nrows(&self) -> usize {
        self.nrows()
    }

    fn ncols(&self) -> usize {
        self.ncols()
    }

    fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        (0..self.nrows())
            .map(|i| (0..self.ncols()).map(|j| self[(i, j)] * x[j]).sum())
            .collect()
    }

    fn adjoint_mul_vec(&self, y: &[C64]) -> Vec<C64> {
        (0..self.ncols())
            .map(|j| (0..self.nrows()).map(|i| self[(i, j)].conj() * y[i]).sum())
            .collect()
    }

    fn abs_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.nrows())
            .map(|i| (0..self.ncols()).map(|j| self[(i, j)].norm() * x[j]).sum())
            .collect()
    }

    fn abs_tmul_vec(&self, y: &[f64]) -> Vec<f64> {
        (0..self.ncols())
            .map(|j| (0..self.nrows()).map(|i| self[(i, j)].norm() * y[i]).sum())
            .collect()
    }

    fn for_each_nonzero(&self, f: &mut dyn FnMut(usize, usize, C64)) {
        for j in 0..self.ncols() {
            for i in 0..self.nrows() {
                let v = self[(i, j)];
                if v != ZERO {
                    f(i, j, v);
                }
            }
        }
    }
}

impl MatVec for SparseMatrix {
    fn nrows(&self) -> usize {
        self.nrows()
    }

    fn ncols(&self) -> usize {
        self.ncols()
    }

    fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![ZERO; self.nrows()];
        for (j, xj) in x.iter().enumerate() {
            if *xj != ZERO {
                for (i, v) in self.column(j) {
                    y[*i] += v * xj;
                }
            }
        }
        y
    }

    fn adjoint_mul_vec(&self, y: &[C64]) -> Vec<C64> {
        (0..self.ncols())
            .map(|j| self.column(j).iter().map(|(i, v)| v.conj() * y[*i]).sum())
            .collect()
    }

    fn abs_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows()];
        for (j, xj) in x.iter().enumerate() {
            for (i, v) in self.column(j) {
                y[*i] += v.norm() * xj;
            }
        }
        y
    }

    fn abs_tmul_vec(&self, y: &[f64]) -> Vec<f64> {
        (0..self.ncols())
            .map(|j| self.column(j).iter().map(|(i, v)| v.norm() * y[*i]).sum())
            .collect()
    }

    fn for_each_nonzero(&self, f: &mut dyn FnMut(usize, usize, C64)) {
        for (i, j, v) in self.triplets() {
            f(i, j, v);
        }
    }
}

/// `ψ_r(y) = |y|^{r-1} sgn(y)`, the duality map of `ℓ^r`.
pub(crate) fn duality_map(y: &[C64], r: f64) -> Vec<C64> {
    y.iter()
        .map(|z| {
            let m = z.norm();
            if m == 0.0 {
                ZERO
            } else {
                z * (m.powf(r - 1.0) / m)
            }
        })
        .collect()
}

pub(crate) fn pnorm(x: &[C64], p: f64) -> f64 {
    let m: Vec<f64> = x.iter().map(|z| z.norm()).collect();
    crate::space::counting_norm(&m, crate::exponent::Conjugate::Finite(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bracket_ops() {
        let a = NormBracket::new(1.0, 2.0);
        let b = NormBracket::new(1.5, 3.0);
        assert_eq!(a.intersect(&b), NormBracket::new(1.5, 2.0));
        assert_eq!(NormBracket::max_of([a, b]), NormBracket::new(1.5, 3.0));
        assert!(a.contains(1.0) && !a.contains(2.5));
    }

    #[test]
    #[should_panic]
    fn inverted_bracket_panics() {
        NormBracket::new(2.0, 1.0);
    }

    #[test]
    fn dense_and_sparse_products_agree() {
        let d = CMatrix::from_fn(3, 2, |i, j| C64::new(i as f64 - j as f64, (i * j) as f64));
        let s = SparseMatrix::from_dense(&d);
        let x = [C64::new(1.0, 2.0), C64::new(-0.5, 0.25)];
        let y = [C64::new(0.3, 0.0), C64::new(0.0, 1.0), C64::new(2.0, -1.0)];
        let close = |a: &[C64], b: &[C64]| a.iter().zip(b).all(|(u, v)| (u - v).norm() < 1e-14);
        assert!(close(&d.mul_vec(&x), &s.mul_vec(&x)));
        assert!(close(&d.adjoint_mul_vec(&y), &s.adjoint_mul_vec(&y)));
        assert_eq!(d.col_abs_sums(), s.col_abs_sums());
    }
}
