//! Finite-dimensional subalgebras of `L(L^p(μ))` given by a basis.

use crate::error::{Error, Result};
use crate::exponent::PExponent;
use crate::linop::{kron, CMatrix, LinOp, C64, ONE};
use crate::space::LpSpace;

use super::span::Span;

pub const CLOSURE_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct MatrixAlgebra {
    ambient: LpSpace,
    names: Vec<String>,
    span: Span,
}

fn unit(n: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    m[(i, j)] = ONE;
    m
}

impl MatrixAlgebra {
    /// Checks shapes, linear independence and closure under products.
    pub fn new(ambient: LpSpace, names: Vec<String>, basis: Vec<CMatrix>) -> Result<Self> {
        let n = ambient.dim();
        if names.len() != basis.len() {
            return Err(Error::InvalidAlgebra("one name per basis element required".into()));
        }
        let span = Span::basis(n, n, basis).map_err(|e| Error::InvalidAlgebra(e.to_string()))?;
        for (i, a) in span.generators().iter().enumerate() {
            for (j, b) in span.generators().iter().enumerate() {
                let ab = a * b;
                if !span.contains(&ab, CLOSURE_TOL) {
                    return Err(Error::InvalidAlgebra(format!(
                        "{} * {} leaves the span (residual {:.3e})",
                        names[i],
                        names[j],
                        span.residual(&ab)
                    )));
                }
            }
        }
        Ok(Self {
            ambient,
            names,
            span,
        })
    }

    /// `L(ℓ_1^p) ≅ ℂ`.
    pub fn scalars(p: PExponent) -> Self {
        Self::full(1, p)
    }

    /// `M_d^p` with the matrix units `E_ij` as basis, row-major.
    pub fn full(d: usize, p: PExponent) -> Self {
        let mut names = Vec::new();
        let mut basis = Vec::new();
        for i in 0..d {
            for j in 0..d {
                names.push(format!("E{}{}", i + 1, j + 1));
                basis.push(unit(d, i, j));
            }
        }
        Self::new(LpSpace::counting(d, p), names, basis).expect("matrix units")
    }

    /// Diagonal matrices `diag_d`.
    pub fn diagonal(d: usize, p: PExponent) -> Self {
        let names = (0..d).map(|i| format!("E{}{}", i + 1, i + 1)).collect();
        let basis = (0..d).map(|i| unit(d, i, i)).collect();
        Self::new(LpSpace::counting(d, p), names, basis).expect("diagonal units")
    }

    /// The non-unital algebra `span{E_12} ⊂ M_2^p`.
    pub fn nilpotent(p: PExponent) -> Self {
        Self::new(LpSpace::counting(2, p), vec!["E12".into()], vec![unit(2, 0, 1)]).expect("E12")
    }

    pub fn ambient(&self) -> &LpSpace {
        &self.ambient
    }

    pub fn exponent(&self) -> PExponent {
        self.ambient.exponent
    }

    pub fn dim(&self) -> usize {
        self.span.generators().len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn span(&self) -> &Span {
        &self.span
    }

    pub fn basis_matrices(&self) -> &[CMatrix] {
        self.span.generators()
    }

    pub fn basis(&self) -> Vec<LinOp> {
        self.span.generators().iter().map(|m| self.op(m.clone())).collect()
    }

    /// Wraps a matrix as an operator on the ambient space (no membership check).
    pub fn op(&self, m: CMatrix) -> LinOp {
        LinOp::new(self.ambient.clone(), self.ambient.clone(), m).expect("ambient shape")
    }

    pub fn element(&self, coeffs: &[C64]) -> LinOp {
        self.op(self.span.combine(coeffs))
    }

    pub fn contains(&self, a: &LinOp, tol: f64) -> bool {
        a.source() == &self.ambient && a.target() == &self.ambient && self.span.contains(a.matrix(), tol)
    }

    pub fn coordinates(&self, a: &CMatrix) -> (Vec<C64>, f64) {
        self.span.coordinates(a)
    }

    /// The identity operator when it lies in the algebra.
    pub fn unit(&self) -> Option<LinOp> {
        let id = CMatrix::identity(self.ambient.dim(), self.ambient.dim());
        self.span.contains(&id, CLOSURE_TOL).then(|| self.op(id))
    }

    pub fn is_unital(&self) -> bool {
        self.unit().is_some()
    }

    /// Spatial tensor product `A ⊗_p B` spanned by Kronecker products.
    pub fn tensor(&self, other: &MatrixAlgebra) -> Result<MatrixAlgebra> {
        let ambient = self.ambient.product(&other.ambient)?;
        let mut names = Vec::new();
        let mut basis = Vec::new();
        for (na, a) in self.names.iter().zip(self.basis()) {
            for (nb, b) in other.names.iter().zip(other.basis()) {
                names.push(format!("{na}⊗{nb}"));
                basis.push(kron(&a, &b)?.into_matrix());
            }
        }
        MatrixAlgebra::new(ambient, names, basis)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(p: f64) -> PExponent {
        PExponent::new(p).unwrap()
    }

    #[test]
    fn standard_algebras() {
        assert_eq!(MatrixAlgebra::full(3, e(2.0)).dim(), 9);
        assert!(MatrixAlgebra::diagonal(3, e(1.5)).is_unital());
        assert!(!MatrixAlgebra::nilpotent(e(3.0)).is_unital());
        assert!(MatrixAlgebra::scalars(e(1.0)).is_unital());
    }

    #[test]
    fn rejects_non_closed_span() {
        let r = MatrixAlgebra::new(
            LpSpace::counting(2, e(2.0)),
            vec!["E12".into(), "E21".into()],
            vec![unit(2, 0, 1), unit(2, 1, 0)],
        );
        assert!(matches!(r, Err(Error::InvalidAlgebra(_))));
    }

    #[test]
    fn tensor_of_full_algebras() {
        let a = MatrixAlgebra::full(2, e(2.0)).tensor(&MatrixAlgebra::diagonal(2, e(2.0))).unwrap();
        assert_eq!(a.dim(), 8);
        assert!(a.is_unital());
    }
}
