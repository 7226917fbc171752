//! Standard examples, finite direct sums and external tensor products.

use crate::error::{Error, Result};
use crate::exponent::PExponent;
use crate::linop::{kron, CMatrix, LinOp, ONE};
use crate::space::{FiniteMeasureSpace, LpSpace};

use super::algebra::MatrixAlgebra;
use super::triple::{check_module_axioms, ModuleTriple, DEFAULT_TOL};

fn column(d: usize, i: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, 1);
    m[(i, 0)] = ONE;
    m
}

/// `(A, A)` over `A`.
pub fn algebra_module(a: &MatrixAlgebra) -> ModuleTriple {
    let named: Vec<(String, CMatrix)> = a
        .names()
        .iter()
        .cloned()
        .zip(a.basis_matrices().iter().cloned())
        .collect();
    ModuleTriple::new("(A,A)", a.clone(), a.ambient().clone(), named.clone(), named).expect("algebra basis")
}

/// `(ℓ_d^p, ℓ_d^q)` over `ℂ = L(ℓ_1^p)`: columns act as `X`, rows as `Y`.
pub fn lp_lq(d: usize, p: PExponent) -> ModuleTriple {
    let x = (0..d).map(|i| (format!("d{}", i + 1), column(d, i))).collect();
    let y = (0..d).map(|i| (format!("d{}*", i + 1), column(d, i).transpose())).collect();
    ModuleTriple::new(
        format!("(l^p_{d},l^q_{d}) over C"),
        MatrixAlgebra::scalars(p),
        LpSpace::counting(d, p),
        x,
        y,
    )
    .expect("coordinate basis")
}

/// `(ℓ_d^q, ℓ_d^p)` over `M_d^p`: rows act as `X`, columns as `Y`.
pub fn lq_lp(d: usize, p: PExponent) -> ModuleTriple {
    let x = (0..d).map(|i| (format!("d{}*", i + 1), column(d, i).transpose())).collect();
    let y = (0..d).map(|i| (format!("d{}", i + 1), column(d, i))).collect();
    ModuleTriple::new(
        format!("(l^q_{d},l^p_{d}) over M_{d}"),
        MatrixAlgebra::full(d, p),
        LpSpace::counting(1, p),
        x,
        y,
    )
    .expect("coordinate basis")
}

/// `(ℓ_d^p ⊗ A, ℓ_d^q ⊗ A)`, the truncated standard module.
pub fn standard_module(d: usize, a: &MatrixAlgebra) -> Result<ModuleTriple> {
    let m = external_tensor(&lp_lq(d, a.exponent()), &algebra_module(a))?;
    Ok(m.with_id(format!("(l^p_{d} x A, l^q_{d} x A)")))
}

fn same_algebra(a: &MatrixAlgebra, b: &MatrixAlgebra) -> bool {
    a.ambient() == b.ambient() && a.basis_matrices() == b.basis_matrices()
}

/// Finite direct sum: `X` acts into the `p`-direct sum of the outer spaces as
/// block columns, `Y` acts out of it as block rows.
pub fn direct_sum(parts: &[ModuleTriple]) -> Result<ModuleTriple> {
    let first = parts
        .first()
        .ok_or_else(|| Error::InvalidModule("direct sum of no modules".into()))?;
    if let Some(bad) = parts.iter().find(|m| !same_algebra(m.algebra(), first.algebra())) {
        return Err(Error::InvalidModule(format!("{} is over a different algebra", bad.id())));
    }
    let outers: Vec<&FiniteMeasureSpace> = parts.iter().map(|m| &*m.outer().space).collect();
    let union = FiniteMeasureSpace::disjoint_union(&outers);
    let n0 = first.inner().dim();
    let total = union.dim();
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut offset = 0;
    for (j, m) in parts.iter().enumerate() {
        let n1 = m.outer().dim();
        for (name, g) in m.x_names().iter().zip(m.x_span().generators()) {
            let mut big = CMatrix::zeros(total, n0);
            big.view_mut((offset, 0), (n1, n0)).copy_from(g);
            x.push((format!("{}:{}", j + 1, name), big));
        }
        for (name, g) in m.y_names().iter().zip(m.y_span().generators()) {
            let mut big = CMatrix::zeros(n0, total);
            big.view_mut((0, offset), (n0, n1)).copy_from(g);
            y.push((format!("{}:{}", j + 1, name), big));
        }
        offset += n1;
    }
    let id = parts.iter().map(|m| m.id()).collect::<Vec<_>>().join(" + ");
    ModuleTriple::new(
        id,
        first.algebra().clone(),
        LpSpace::new(union, first.exponent()),
        x,
        y,
    )
}

/// `(X ⊗_p V, Y ⊗_p W)` over `A ⊗_p B`, with the module axioms re-checked.
pub fn external_tensor(m1: &ModuleTriple, m2: &ModuleTriple) -> Result<ModuleTriple> {
    if m1.exponent() != m2.exponent() {
        return Err(Error::ExponentMismatch {
            left: m1.exponent().p(),
            right: m2.exponent().p(),
        });
    }
    let algebra = m1.algebra().tensor(m2.algebra())?;
    let outer = m1.outer().product(m2.outer())?;
    let pair = |a: &[LinOp], an: &[String], b: &[LinOp], bn: &[String]| -> Result<Vec<(String, CMatrix)>> {
        let mut out = Vec::new();
        for (na, ea) in an.iter().zip(a) {
            for (nb, eb) in bn.iter().zip(b) {
                out.push((format!("{na}⊗{nb}"), kron(ea, eb)?.into_matrix()));
            }
        }
        Ok(out)
    };
    let x = pair(&m1.x_basis(), m1.x_names(), &m2.x_basis(), m2.x_names())?;
    let y = pair(&m1.y_basis(), m1.y_names(), &m2.y_basis(), m2.y_names())?;
    let m = ModuleTriple::new(format!("{} ⊗ {}", m1.id(), m2.id()), algebra, outer, x, y)?;
    let report = check_module_axioms(&m, DEFAULT_TOL);
    if !report.pass {
        return Err(Error::InvalidModule(format!("tensor product fails axioms: {:?}", report.conditions)));
    }
    Ok(m)
}
