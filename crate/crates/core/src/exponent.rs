//! Hölder exponents with an explicit representation of `q = ∞`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The conjugate side of a Hölder pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Conjugate {
    Finite(f64),
    Infinity,
}

impl Conjugate {
    /// `1/q`, with `1/∞ = 0`.
    pub fn reciprocal(self) -> f64 {
        match self {
            Conjugate::Finite(q) => 1.0 / q,
            Conjugate::Infinity => 0.0,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Conjugate::Infinity)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Conjugate::Finite(q) => Some(q),
            Conjugate::Infinity => None,
        }
    }
}

impl fmt::Display for Conjugate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Conjugate::Finite(q) => write!(f, "{q}"),
            Conjugate::Infinity => write!(f, "inf"),
        }
    }
}

/// Returns `q` with `1/p + 1/q = 1`.
pub fn holder_conjugate(p: f64) -> Result<Conjugate> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidExponent(p));
    }
    if p == 1.0 {
        Ok(Conjugate::Infinity)
    } else if p == 2.0 {
        Ok(Conjugate::Finite(2.0))
    } else {
        Ok(Conjugate::Finite(p / (p - 1.0)))
    }
}

/// A Hölder pair `(p, q)`. Only `p` is stored; `q` is derived on demand so
/// the pair can never drift out of conjugacy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct PExponent {
    p: f64,
}

impl PExponent {
    pub fn new(p: f64) -> Result<Self> {
        holder_conjugate(p)?;
        Ok(Self { p })
    }

    pub fn p(self) -> f64 {
        self.p
    }

    pub fn q(self) -> Conjugate {
        holder_conjugate(self.p).expect("validated on construction")
    }

    /// The exponent with the roles of `p` and `q` swapped, when `q` is finite.
    pub fn dual(self) -> Option<PExponent> {
        self.q().finite().map(|q| PExponent { p: q })
    }

    pub fn is_one(self) -> bool {
        self.p == 1.0
    }

    pub fn is_two(self) -> bool {
        self.p == 2.0
    }
}

impl TryFrom<f64> for PExponent {
    type Error = Error;

    fn try_from(p: f64) -> Result<Self> {
        PExponent::new(p)
    }
}

impl From<PExponent> for f64 {
    fn from(e: PExponent) -> f64 {
        e.p
    }
}

impl fmt::Display for PExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p={} q={}", self.p, self.q())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugate_examples() {
        assert_eq!(holder_conjugate(2.0).unwrap(), Conjugate::Finite(2.0));
        assert_eq!(holder_conjugate(1.0).unwrap(), Conjugate::Infinity);
        let q = holder_conjugate(4.0).unwrap().finite().unwrap();
        assert!((q - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_below_one() {
        assert_eq!(holder_conjugate(0.5), Err(Error::InvalidExponent(0.5)));
        assert!(holder_conjugate(f64::NAN).is_err());
        assert!(PExponent::new(f64::INFINITY).is_err());
    }

    #[test]
    fn reciprocals_sum_to_one() {
        for p in [1.0, 1.25, 1.5, 2.0, 3.0, 7.5] {
            let e = PExponent::new(p).unwrap();
            assert!((1.0 / p + e.q().reciprocal() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn dual_swaps_roles() {
        let e = PExponent::new(3.0).unwrap();
        let d = e.dual().unwrap();
        assert!((d.p() - 1.5).abs() < 1e-15);
        assert!(PExponent::new(1.0).unwrap().dual().is_none());
    }
}
