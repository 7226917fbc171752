//! Finite measure spaces and vectors in `L^p` over them.

use std::collections::HashSet;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::{Conjugate, PExponent};

/// A finite ordered point set with strictly positive weights.
///
/// All points carry positive mass, so the only null set is the empty set and
/// "almost everywhere" statements reduce to pointwise ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpace")]
pub struct FiniteMeasureSpace {
    labels: Vec<String>,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct RawSpace {
    labels: Vec<String>,
    weights: Vec<f64>,
}

impl TryFrom<RawSpace> for FiniteMeasureSpace {
    type Error = Error;

    fn try_from(raw: RawSpace) -> Result<Self> {
        FiniteMeasureSpace::new(raw.labels, raw.weights)
    }
}

impl FiniteMeasureSpace {
    pub fn new(labels: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        if labels.len() != weights.len() {
            return Err(Error::InvalidSpace(format!(
                "{} labels but {} weights",
                labels.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidSpace(format!("non-positive weight {w}")));
        }
        let mut seen = HashSet::with_capacity(labels.len());
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::InvalidSpace(format!("duplicate label `{l}`")));
            }
        }
        Ok(Self { labels, weights })
    }

    /// Counting measure on `{1, ..., n}`.
    pub fn counting(n: usize) -> Self {
        Self {
            labels: (1..=n).map(|i| i.to_string()).collect(),
            weights: vec![1.0; n],
        }
    }

    /// Points labelled `1..=n` with the given weights.
    pub fn weighted(weights: Vec<f64>) -> Result<Self> {
        let labels = (1..=weights.len()).map(|i| i.to_string()).collect();
        Self::new(labels, weights)
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn is_counting(&self) -> bool {
        self.weights.iter().all(|w| *w == 1.0)
    }

    /// Product measure; the flat index of `(i, j)` is `i * other.dim() + j`.
    pub fn product(&self, other: &FiniteMeasureSpace) -> FiniteMeasureSpace {
        let mut labels = Vec::with_capacity(self.dim() * other.dim());
        let mut weights = Vec::with_capacity(self.dim() * other.dim());
        for (a, wa) in self.labels.iter().zip(&self.weights) {
            for (b, wb) in other.labels.iter().zip(&other.weights) {
                labels.push(format!("({a},{b})"));
                weights.push(wa * wb);
            }
        }
        FiniteMeasureSpace { labels, weights }
    }

    /// Disjoint union; labels are prefixed with the summand index.
    pub fn disjoint_union(parts: &[&FiniteMeasureSpace]) -> FiniteMeasureSpace {
        let mut labels = Vec::new();
        let mut weights = Vec::new();
        for (k, part) in parts.iter().enumerate() {
            for (l, w) in part.labels.iter().zip(&part.weights) {
                labels.push(format!("{}:{l}", k + 1));
                weights.push(*w);
            }
        }
        FiniteMeasureSpace { labels, weights }
    }
}

/// A measure space together with the exponent that fixes its norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSpace {
    pub space: Arc<FiniteMeasureSpace>,
    pub exponent: PExponent,
}

impl LpSpace {
    pub fn new(space: FiniteMeasureSpace, exponent: PExponent) -> Self {
        Self {
            space: Arc::new(space),
            exponent,
        }
    }

    pub fn counting(n: usize, exponent: PExponent) -> Self {
        Self::new(FiniteMeasureSpace::counting(n), exponent)
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn weights(&self) -> &[f64] {
        self.space.weights()
    }

    pub fn product(&self, other: &LpSpace) -> Result<LpSpace> {
        if self.exponent != other.exponent {
            return Err(Error::ExponentMismatch {
                left: self.exponent.p(),
                right: other.exponent.p(),
            });
        }
        Ok(LpSpace::new(self.space.product(&other.space), self.exponent))
    }
}

/// A vector over a finite measure space.
#[derive(Debug, Clone, PartialEq)]
pub struct LpVector {
    pub space: Arc<FiniteMeasureSpace>,
    pub entries: Vec<Complex64>,
}

impl LpVector {
    pub fn new(space: Arc<FiniteMeasureSpace>, entries: Vec<Complex64>) -> Result<Self> {
        if space.dim() != entries.len() {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} over space of dimension {}",
                entries.len(),
                space.dim()
            )));
        }
        Ok(Self { space, entries })
    }

    /// Coordinate vector `δ_k` (zero-based `k`).
    pub fn delta(space: Arc<FiniteMeasureSpace>, k: usize) -> Self {
        let mut entries = vec![Complex64::new(0.0, 0.0); space.dim()];
        entries[k] = Complex64::new(1.0, 0.0);
        Self { space, entries }
    }

    pub fn norm(&self, exponent: PExponent) -> f64 {
        vec_pnorm(self, exponent)
    }

    /// `ξ ⊗ η` on the product space.
    pub fn tensor(&self, other: &LpVector) -> LpVector {
        let entries = self
            .entries
            .iter()
            .flat_map(|a| other.entries.iter().map(move |b| a * b))
            .collect();
        LpVector {
            space: Arc::new(self.space.product(&other.space)),
            entries,
        }
    }
}

/// `(Σ |ξ(ω)|^p μ(ω))^{1/p}`.
pub fn vec_pnorm(v: &LpVector, exponent: PExponent) -> f64 {
    weighted_norm(&v.entries, v.space.weights(), Conjugate::Finite(exponent.p()))
}

/// Weighted norm with an exponent that may be infinite; the infinite case is
/// the maximum modulus over the (full) support.
pub fn weighted_norm(entries: &[Complex64], weights: &[f64], r: Conjugate) -> f64 {
    match r {
        Conjugate::Infinity => entries.iter().map(|z| z.norm()).fold(0.0, f64::max),
        Conjugate::Finite(r) => {
            let scale = entries.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if scale == 0.0 {
                return 0.0;
            }
            let sum: f64 = entries
                .iter()
                .zip(weights)
                .map(|(z, w)| (z.norm() / scale).powf(r) * w)
                .sum();
            scale * sum.powf(1.0 / r)
        }
    }
}

/// Unweighted `ℓ^r` norm of real magnitudes.
pub fn counting_norm(entries: &[f64], r: Conjugate) -> f64 {
    match r {
        Conjugate::Infinity => entries.iter().map(|x| x.abs()).fold(0.0, f64::max),
        Conjugate::Finite(r) => {
            let scale = entries.iter().map(|x| x.abs()).fold(0.0, f64::max);
            if scale == 0.0 {
                return 0.0;
            }
            let sum: f64 = entries.iter().map(|x| (x.abs() / scale).powf(r)).sum();
            scale * sum.powf(1.0 / r)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn rejects_bad_spaces() {
        assert!(FiniteMeasureSpace::new(vec!["a".into()], vec![0.0]).is_err());
        assert!(FiniteMeasureSpace::new(vec!["a".into(), "a".into()], vec![1.0, 1.0]).is_err());
        assert!(FiniteMeasureSpace::new(vec!["a".into()], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn pnorm_examples() {
        let s = Arc::new(FiniteMeasureSpace::counting(3));
        for p in [1.0, 1.5, 2.0, 4.0] {
            let e = PExponent::new(p).unwrap();
            assert_eq!(LpVector::delta(s.clone(), 0).norm(e), 1.0);
        }
        let two = Arc::new(FiniteMeasureSpace::counting(2));
        let v = LpVector::new(two, vec![c(1.0), c(1.0)]).unwrap();
        assert!((v.norm(PExponent::new(2.0).unwrap()) - 2f64.sqrt()).abs() < 1e-15);
        let heavy = Arc::new(FiniteMeasureSpace::weighted(vec![2.0, 2.0]).unwrap());
        let v = LpVector::new(heavy, vec![c(1.0), c(1.0)]).unwrap();
        assert_eq!(v.norm(PExponent::new(1.0).unwrap()), 4.0);
    }

    #[test]
    fn infinite_exponent_is_max_modulus() {
        let v = [Complex64::new(0.0, -3.0), c(2.0)];
        assert_eq!(weighted_norm(&v, &[5.0, 1.0], Conjugate::Infinity), 3.0);
    }

    #[test]
    fn serde_round_trip_validates() {
        let s = FiniteMeasureSpace::weighted(vec![0.5, 2.0]).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"labels":["1","2"],"weights":[0.5,2.0]}"#);
        let back: FiniteMeasureSpace = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<FiniteMeasureSpace>(r#"{"labels":["1"],"weights":[-1.0]}"#).is_err());
    }
}
