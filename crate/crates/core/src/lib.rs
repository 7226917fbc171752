//! Finite-dimensional `L^p` operator theory: weighted `ℓ^p` spaces,
//! certified `p → p` norm brackets, spatial partial isometries, concrete
//! `L^p`-modules, and level-truncated `L^p`-Fock representations for the
//! Cuntz case and for crossed products by `ℤ`.

pub mod cli;
pub mod error;
pub mod exponent;
pub mod fock;
pub mod linop;
pub mod measure;
pub mod modules;
pub mod norm;
pub mod space;
pub mod sparse;

pub use error::{Error, Result};
pub use exponent::{holder_conjugate, Conjugate, PExponent};
pub use linop::{kron, LinOp, C64};
pub use norm::{opnorm_bracket, opnorm_lower, NormBracket};
pub use space::{vec_pnorm, FiniteMeasureSpace, LpSpace, LpVector};
