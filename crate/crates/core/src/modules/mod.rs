//! Concrete `L^p`-modules over finite-dimensional `L^p` operator algebras.

mod algebra;
mod construct;
mod defect;
mod span;
mod triple;

pub use algebra::{MatrixAlgebra, CLOSURE_TOL};
pub use construct::{algebra_module, direct_sum, external_tensor, lp_lq, lq_lp, standard_module};
pub use defect::{cstar_defect, CStarDefect, DefectBracket, ElementDefect, DEFAULT_BUDGET};
pub use span::{Span, RANK_TOL};
pub use triple::{
    check_module_axioms, compacts, in_ka, in_la, pairing, theta, AxiomReport, Condition,
    ConditionSummary, Membership, ModuleTriple, PairResidual, Pairing, DEFAULT_TOL,
};
