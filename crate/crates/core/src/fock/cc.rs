//! Finitely supported `A`-valued sequences `Σ a_n u_n`, their twisted
//! convolution, and the map `γ_0` into the truncated crossed Fock operators.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use super::crossed::{CrossedTruncation, DynSystem};
use super::{LeveledOp, Window};
use crate::error::{Error, Result};
use crate::linop::{max_abs, CMatrix};
use crate::norm::{CertifyOptions, NormBracket};

/// `Σ a_n u_n` with zero coefficients dropped.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CcElement {
    terms: BTreeMap<i64, CMatrix>,
}

impl CcElement {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `a u_n`.
    pub fn monomial(a: CMatrix, n: i64) -> Self {
        let mut out = Self::zero();
        out.add_term(n, a);
        out
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (i64, CMatrix)>) -> Self {
        let mut out = Self::zero();
        for (n, a) in terms {
            out.add_term(n, a);
        }
        out
    }

    pub fn add_term(&mut self, n: i64, a: CMatrix) {
        let merged = match self.terms.remove(&n) {
            Some(old) => old + a,
            None => a,
        };
        if max_abs(&merged) > 0.0 {
            self.terms.insert(n, merged);
        }
    }

    pub fn terms(&self) -> &BTreeMap<i64, CMatrix> {
        &self.terms
    }

    pub fn coefficient(&self, n: i64) -> Option<&CMatrix> {
        self.terms.get(&n)
    }

    pub fn support(&self) -> Vec<i64> {
        self.terms.keys().copied().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Random element with coefficients on every index of `lo..=hi`.
    pub fn random(sys: &DynSystem, lo: i64, hi: i64, rng: &mut impl Rng, integer: bool) -> Self {
        Self::from_terms((lo..=hi).map(|n| (n, sys.random_element(rng, integer))))
    }
}

/// `(a u_j)(b u_k) = a φ^j(b) u_{j+k}`, extended bilinearly.
pub fn twisted_mul(f: &CcElement, g: &CcElement, sys: &DynSystem) -> CcElement {
    let mut out = CcElement::zero();
    for (&j, a) in &f.terms {
        for (&k, b) in &g.terms {
            out.add_term(j + k, a * sys.apply(b, j));
        }
    }
    out
}

/// `γ_0(a u_n)` through the factorizations `a = a·φ^{−1}(e)⋯` and
/// `a = a·φ(e)⋯` with the unit `e` of `A`:
/// `a u_0 ↦ φ_A^∞(a)`, `a u_{−n} ↦ c_A(φ(a)) c_A(e)^{n−1}`,
/// `a u_n ↦ v_A(a) v_A(e)^{n−1}`.
pub fn gamma0_monomial(a: &CMatrix, n: i64, tr: &CrossedTruncation) -> Result<LeveledOp> {
    let sys = tr.system();
    if n == 0 {
        return tr.phi_a_inf(a);
    }
    let e = sys.unit()?;
    let steps = n.unsigned_abs() as usize;
    if steps > tr.levels() {
        return Err(Error::EmptyWindow);
    }
    let (head, tail) = if n < 0 {
        (tr.c_a(&sys.apply(a, 1))?, tr.c_a(e)?)
    } else {
        (tr.v_a(a)?, tr.v_a(e)?)
    };
    let mut out = head;
    for _ in 1..steps {
        out = out.compose(&tail)?;
    }
    Ok(out)
}

pub fn gamma0(f: &CcElement, tr: &CrossedTruncation) -> Result<LeveledOp> {
    let mut out = tr.zero();
    for (&n, a) in &f.terms {
        out = out.add(&gamma0_monomial(a, n, tr)?)?;
    }
    Ok(out)
}

/// `γ_0(fg)` against `γ_0(f)γ_0(g)`. The two agree on input levels
/// `ℓ ≥ K`, where `K` is the largest positive index in the support of `g`;
/// below `K` they differ by an operator of rank at most `K·dim μ`.
#[derive(Debug, Clone, Serialize)]
pub struct MultiplicativityCheck {
    pub cutoff: usize,
    pub window: Window,
    /// Largest entrywise difference on window levels `≥ cutoff`.
    pub residual: f64,
    /// Rank of the difference on the whole window.
    pub defect_rank: usize,
    pub rank_bound: usize,
}

impl MultiplicativityCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.residual <= tol && self.defect_rank <= self.rank_bound
    }
}

pub fn gamma0_multiplicativity(f: &CcElement, g: &CcElement, tr: &CrossedTruncation) -> Result<MultiplicativityCheck> {
    let fg = twisted_mul(f, g, tr.system());
    let lhs = gamma0(&fg, tr)?;
    let rhs = gamma0(f, tr)?.compose(&gamma0(g, tr)?)?;
    let cutoff = g.terms.keys().copied().filter(|n| *n > 0).max().unwrap_or(0) as usize;
    let common = lhs.restrict_window(rhs.window())?;
    let diff = common.sub(&rhs)?;
    let window = diff.window();
    let upper = Window {
        lo: cutoff.max(window.lo),
        hi: window.hi,
    };
    let residual = if upper.lo <= upper.hi {
        diff.restrict_window(upper)?.max_abs_on_window()
    } else {
        0.0
    };
    Ok(MultiplicativityCheck {
        cutoff,
        window,
        residual,
        defect_rank: diff.window_matrix().to_dense().rank(1e-10),
        rank_bound: cutoff * tr.fibre(),
    })
}

/// A lower bound for `‖γ_0(f)‖` next to `Σ_n ‖a_n‖`.
#[derive(Debug, Clone, Serialize)]
pub struct ContractivityCheck {
    pub norm: NormBracket,
    pub bound: f64,
}

impl ContractivityCheck {
    pub fn holds(&self, slack: f64) -> bool {
        self.norm.lower <= self.bound + slack
    }
}

/// The window columns of the truncated `γ_0(f)` coincide with columns of the
/// untruncated operator, so the window norm is a lower bound for its norm.
pub fn gamma0_contractivity(f: &CcElement, tr: &CrossedTruncation, opts: &CertifyOptions) -> Result<ContractivityCheck> {
    let op = gamma0(f, tr)?;
    let bound = f.terms.values().map(|a| tr.system().norm(a, opts).upper).sum();
    Ok(ContractivityCheck {
        norm: op.norm_on_window(opts),
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::PExponent;
    use crate::linop::max_abs_diff;
    use crate::modules::MatrixAlgebra;
    use rand::SeedableRng;
    use std::sync::Arc;

    fn system() -> Arc<DynSystem> {
        let alg = MatrixAlgebra::full(2, PExponent::new(2.0).unwrap());
        Arc::new(DynSystem::conjugation(alg, vec![1, 0]).unwrap())
    }

    #[test]
    fn twisted_rule() {
        let sys = system();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let a = sys.random_element(&mut rng, true);
        let b = sys.random_element(&mut rng, true);
        let m = |x: &CMatrix, n| CcElement::monomial(x.clone(), n);
        assert_eq!(twisted_mul(&m(&a, 0), &m(&b, 0), &sys), m(&(&a * &b), 0));
        assert_eq!(twisted_mul(&m(&a, 1), &m(&b, 1), &sys), m(&(&a * sys.apply(&b, 1)), 2));
        assert_eq!(twisted_mul(&m(&a, -1), &m(&b, 1), &sys), m(&(&a * sys.apply(&b, -1)), 0));
    }

    #[test]
    fn gamma0_of_unit_is_identity() {
        let tr = CrossedTruncation::new(system(), 3).unwrap();
        let g = gamma0(&CcElement::monomial(CMatrix::identity(2, 2), 0), &tr).unwrap();
        assert_eq!(g.residual(&tr.identity()).unwrap(), 0.0);
    }

    #[test]
    fn factorization_does_not_matter() {
        // a u_{-2} through a = a_1 φ^{-1}(a_2).
        let sys = system();
        let tr = CrossedTruncation::new(sys.clone(), 5).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let a1 = sys.random_element(&mut rng, true);
        let a2 = sys.random_element(&mut rng, true);
        let a = &a1 * sys.apply(&a2, -1);
        let direct = gamma0_monomial(&a, -2, &tr).unwrap();
        let other = tr.c_a(&sys.apply(&a1, 1)).unwrap().compose(&tr.c_a(&sys.apply(&a2, 1)).unwrap()).unwrap();
        assert!(max_abs_diff(&direct.window_matrix().to_dense(), &other.window_matrix().to_dense()) == 0.0);
    }

    #[test]
    fn multiplicative_above_cutoff() {
        let sys = system();
        let tr = CrossedTruncation::new(sys.clone(), 8).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10 {
            let f = CcElement::random(&sys, -2, 2, &mut rng, true);
            let g = CcElement::random(&sys, -2, 2, &mut rng, true);
            let c = gamma0_multiplicativity(&f, &g, &tr).unwrap();
            assert!(c.holds(0.0), "{c:?}");
        }
    }

    #[test]
    fn defect_below_cutoff_is_real() {
        let sys = system();
        let tr = CrossedTruncation::new(sys.clone(), 4).unwrap();
        let id = CMatrix::identity(2, 2);
        let f = CcElement::monomial(id.clone(), -1);
        let g = CcElement::monomial(id, 1);
        let c = gamma0_multiplicativity(&f, &g, &tr).unwrap();
        assert_eq!(c.cutoff, 1);
        assert_eq!(c.residual, 0.0);
        assert_eq!(c.defect_rank, 2);
    }

    #[test]
    fn contractive() {
        let sys = system();
        let tr = CrossedTruncation::new(sys.clone(), 6).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let f = CcElement::random(&sys, -2, 2, &mut rng, false);
        let c = gamma0_contractivity(&f, &tr, &CertifyOptions::default()).unwrap();
        assert!(c.holds(1e-9), "{c:?}");
    }
}
