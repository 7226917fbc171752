//! Finite-dimensional operator subspaces with least-squares membership.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linop::{CMatrix, C64};

/// Relative singular-value cutoff used for rank decisions.
pub const RANK_TOL: f64 = 1e-10;

/// Span of a list of equally shaped matrices, flattened column-major.
#[derive(Debug, Clone)]
pub struct Span {
    nrows: usize,
    ncols: usize,
    generators: Vec<CMatrix>,
    /// Orthonormal basis of the span as columns of an `(nrows*ncols) x r` matrix.
    q: CMatrix,
    /// `σ_max / σ_min` over the retained singular values.
    cond: f64,
    independent: bool,
}

fn flatten(m: &CMatrix) -> DVector<C64> {
    DVector::from_column_slice(m.as_slice())
}

impl Span {
    /// Span of arbitrary generators; dependent generators are allowed.
    pub fn new(nrows: usize, ncols: usize, generators: Vec<CMatrix>) -> Result<Self> {
        if let Some(g) = generators.iter().find(|g| g.shape() != (nrows, ncols)) {
            return Err(Error::DimensionMismatch(format!(
                "generator of shape {:?} in a span of {nrows}x{ncols} matrices",
                g.shape()
            )));
        }
        let len = nrows * ncols;
        if generators.is_empty() || len == 0 {
            return Ok(Self {
                nrows,
                ncols,
                q: CMatrix::zeros(len, 0),
                cond: 1.0,
                independent: true,
                generators,
            });
        }
        let stacked = CMatrix::from_columns(&generators.iter().map(flatten).collect::<Vec<_>>());
        let svd = stacked.svd(true, false);
        let u = svd.u.expect("requested");
        let sv = &svd.singular_values;
        let top = sv.iter().copied().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..sv.len()).filter(|&k| sv[k] > RANK_TOL * top).collect();
        let low = keep.iter().map(|&k| sv[k]).fold(f64::INFINITY, f64::min);
        let q = CMatrix::from_columns(&keep.iter().map(|&k| u.column(k).into_owned()).collect::<Vec<_>>());
        let independent = keep.len() == generators.len();
        Ok(Self {
            nrows,
            ncols,
            generators,
            q,
            cond: if keep.is_empty() { 1.0 } else { top / low },
            independent,
        })
    }

    /// Span that must have the generators as a basis.
    pub fn basis(nrows: usize, ncols: usize, basis: Vec<CMatrix>) -> Result<Self> {
        let s = Self::new(nrows, ncols, basis)?;
        if !s.independent {
            return Err(Error::InvalidModule(format!(
                "{} generators span only a {}-dimensional space",
                s.generators.len(),
                s.dim()
            )));
        }
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.q.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nrows, self.ncols)
    }

    pub fn generators(&self) -> &[CMatrix] {
        &self.generators
    }

    pub fn condition(&self) -> f64 {
        self.cond
    }

    pub fn is_independent(&self) -> bool {
        self.independent
    }

    /// Orthogonal projection onto the span.
    pub fn project(&self, m: &CMatrix) -> CMatrix {
        let v = flatten(m);
        let p = &self.q * (self.q.adjoint() * &v);
        CMatrix::from_column_slice(self.nrows, self.ncols, p.as_slice())
    }

    /// Largest entry modulus of `m` minus its projection.
    pub fn residual(&self, m: &CMatrix) -> f64 {
        (m - self.project(m)).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Membership threshold for `m`: `tol` scaled by the conditioning and by
    /// the size of `m`.
    pub fn threshold(&self, m: &CMatrix, tol: f64) -> f64 {
        let size = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
        tol * self.cond.max(1.0) * (1.0 + size)
    }

    pub fn contains(&self, m: &CMatrix, tol: f64) -> bool {
        self.residual(m) <= self.threshold(m, tol)
    }

    /// Least-squares coordinates of `m` over the generators and the residual.
    pub fn coordinates(&self, m: &CMatrix) -> (Vec<C64>, f64) {
        if self.generators.is_empty() {
            return (Vec::new(), self.residual(m));
        }
        let stacked = CMatrix::from_columns(&self.generators.iter().map(flatten).collect::<Vec<_>>());
        let svd = stacked.svd(true, true);
        let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let c = svd
            .solve(&flatten(m), RANK_TOL * top)
            .expect("both factors computed");
        (c.iter().copied().collect(), self.residual(m))
    }

    /// `Σ c_k g_k`.
    pub fn combine(&self, coeffs: &[C64]) -> CMatrix {
        let mut out = CMatrix::zeros(self.nrows, self.ncols);
        for (c, g) in coeffs.iter().zip(&self.generators) {
            out += g * *c;
        }
        out
    }
}
