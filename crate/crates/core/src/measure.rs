//! Point maps between finite measure spaces and the spatial partial
//! isometries they induce.
//!
//! On a finite space every point has positive weight, so "modulo null sets"
//! is vacuous: a measurable set transformation is just an injection of a
//! subset of points.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::PExponent;
use crate::linop::{CMatrix, LinOp, C64, ZERO};
use crate::norm::{certified_norm, CertifyOptions, NormBracket};
use crate::space::{FiniteMeasureSpace, LpSpace};

pub const DEFAULT_TOL: f64 = 1e-10;
/// A norm bound `‖s‖ ≤ 1` is rejected only when the certified lower bound
/// exceeds `1 + NORM_SLACK`.
pub const NORM_SLACK: f64 = 1e-8;

/// Injection of a subset `E` of the source points into the target.
#[derive(Debug, Clone, PartialEq)]
pub struct SetTransformation {
    source: Arc<FiniteMeasureSpace>,
    target: Arc<FiniteMeasureSpace>,
    /// `(source index, target index)` pairs, sorted by source index.
    pairs: Vec<(usize, usize)>,
}

impl SetTransformation {
    pub fn new(
        source: Arc<FiniteMeasureSpace>,
        target: Arc<FiniteMeasureSpace>,
        mut pairs: Vec<(usize, usize)>,
    ) -> Result<Self> {
        pairs.sort_unstable();
        let mut seen_src = BTreeSet::new();
        let mut seen_dst = BTreeSet::new();
        for &(a, b) in &pairs {
            if a >= source.dim() || b >= target.dim() {
                return Err(Error::InvalidSystem(format!("pair ({a}, {b}) out of range")));
            }
            if !seen_src.insert(a) {
                return Err(Error::InvalidSystem(format!("source point {a} mapped twice")));
            }
            if !seen_dst.insert(b) {
                return Err(Error::InvalidSystem(format!("map is not injective at target point {b}")));
            }
        }
        Ok(Self {
            source,
            target,
            pairs,
        })
    }

    /// Builds the map from `(source label, target label)` pairs.
    pub fn from_labels(
        source: Arc<FiniteMeasureSpace>,
        target: Arc<FiniteMeasureSpace>,
        pairs: &[(String, String)],
    ) -> Result<Self> {
        let idx = pairs
            .iter()
            .map(|(a, b)| {
                let i = source
                    .index_of(a)
                    .ok_or_else(|| Error::InvalidSystem(format!("unknown source label {a}")))?;
                let j = target
                    .index_of(b)
                    .ok_or_else(|| Error::InvalidSystem(format!("unknown target label {b}")))?;
                Ok((i, j))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(source, target, idx)
    }

    pub fn identity(space: Arc<FiniteMeasureSpace>) -> Self {
        let pairs = (0..space.dim()).map(|i| (i, i)).collect();
        Self {
            source: space.clone(),
            target: space,
            pairs,
        }
    }

    pub fn source(&self) -> &Arc<FiniteMeasureSpace> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FiniteMeasureSpace> {
        &self.target
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn domain(&self) -> Vec<usize> {
        self.pairs.iter().map(|p| p.0).collect()
    }

    pub fn range(&self) -> Vec<usize> {
        let mut r: Vec<usize> = self.pairs.iter().map(|p| p.1).collect();
        r.sort_unstable();
        r
    }

    pub fn image(&self, i: usize) -> Option<usize> {
        self.pairs.iter().find(|p| p.0 == i).map(|p| p.1)
    }

    pub fn preimage(&self, j: usize) -> Option<usize> {
        self.pairs.iter().find(|p| p.1 == j).map(|p| p.0)
    }

    pub fn inverse(&self) -> Self {
        let mut pairs: Vec<_> = self.pairs.iter().map(|&(a, b)| (b, a)).collect();
        pairs.sort_unstable();
        Self {
            source: self.target.clone(),
            target: self.source.clone(),
            pairs,
        }
    }
}

/// `h(ω) = μ(S⁻¹ω) / ν(ω)` for each `ω` in the range, as `(target index, h)`
/// pairs sorted by target index.
pub fn pushforward_density(s: &SetTransformation) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64)> = s
        .pairs
        .iter()
        .map(|&(a, b)| (b, s.source.weights()[a] / s.target.weights()[b]))
        .collect();
    out.sort_by_key(|x| x.0);
    out
}

/// The data `(E, F, S, g)` of a spatial partial isometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SystemJson", into = "SystemJson")]
pub struct SpatialSystem {
    map: SetTransformation,
    /// Phase per target index of `F`, aligned with `map.range()`.
    phases: Vec<C64>,
}

impl SpatialSystem {
    /// `phases[k]` is the value of `g` at the `k`-th point of `F` in index order.
    pub fn new(map: SetTransformation, phases: Vec<C64>) -> Result<Self> {
        if phases.len() != map.pairs.len() {
            return Err(Error::InvalidSystem(format!(
                "{} phases for a range of {} points",
                phases.len(),
                map.pairs.len()
            )));
        }
        if let Some(g) = phases.iter().find(|g| (g.norm() - 1.0).abs() > 1e-12) {
            return Err(Error::InvalidSystem(format!("phase {g} is not unimodular")));
        }
        Ok(Self { map, phases })
    }

    pub fn unphased(map: SetTransformation) -> Self {
        let phases = vec![C64::new(1.0, 0.0); map.pairs.len()];
        Self { map, phases }
    }

    pub fn map(&self) -> &SetTransformation {
        &self.map
    }

    /// Random system between weighted spaces of sizes `1..=max_dim` with
    /// weights in `[1/4, 4]`, a random partial injection and random phases.
    pub fn random(rng: &mut impl Rng, max_dim: usize) -> Self {
        let n = rng.gen_range(1..=max_dim);
        let m = rng.gen_range(1..=max_dim);
        let mut weights = |k: usize| (0..k).map(|_| rng.gen_range(0.25..4.0)).collect::<Vec<f64>>();
        let src = Arc::new(FiniteMeasureSpace::weighted(weights(n)).expect("positive weights"));
        let dst = Arc::new(FiniteMeasureSpace::weighted(weights(m)).expect("positive weights"));
        let mut from: Vec<usize> = (0..n).collect();
        let mut to: Vec<usize> = (0..m).collect();
        from.shuffle(rng);
        to.shuffle(rng);
        let k = rng.gen_range(0..=n.min(m));
        let pairs = from.into_iter().zip(to).take(k).collect();
        let map = SetTransformation::new(src, dst, pairs).expect("injective by construction");
        let phases = (0..k)
            .map(|_| C64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU)))
            .collect();
        Self::new(map, phases).expect("unimodular phases")
    }

    /// `g` at target index `j ∈ F`.
    pub fn phase_at(&self, j: usize) -> Option<C64> {
        let range = self.map.range();
        range.binary_search(&j).ok().map(|k| self.phases[k])
    }

    /// Spatial (as opposed to semispatial): `S` maps `E` onto all of `F`.
    /// Range and domain are finite sets of equal size, so this always holds
    /// for a valid injection; kept as a method for the checks that need it.
    pub fn is_bijective(&self) -> bool {
        self.map.domain().len() == self.map.range().len()
    }

    pub fn reverse_system(&self) -> Result<SpatialSystem> {
        if !self.is_bijective() {
            return Err(Error::NotBijective);
        }
        let inv = self.map.inverse();
        let phases = inv
            .range()
            .iter()
            .map(|&e| {
                let f = self.map.image(e).expect("point of E");
                self.phase_at(f).expect("point of F").inv()
            })
            .collect();
        Ok(SpatialSystem { map: inv, phases })
    }
}

#[derive(Serialize, Deserialize)]
struct SystemJson {
    source: FiniteMeasureSpace,
    target: FiniteMeasureSpace,
    #[serde(rename = "E")]
    e: Vec<String>,
    #[serde(rename = "F")]
    f: Vec<String>,
    map: Vec<(String, String)>,
    g: Vec<(f64, f64)>,
}

impl TryFrom<SystemJson> for SpatialSystem {
    type Error = Error;

    fn try_from(raw: SystemJson) -> Result<Self> {
        let source = Arc::new(raw.source);
        let target = Arc::new(raw.target);
        let map = SetTransformation::from_labels(source.clone(), target.clone(), &raw.map)?;
        let dom: BTreeSet<usize> = map.domain().into_iter().collect();
        let ran: Vec<usize> = map.range();
        let e: BTreeSet<usize> = raw
            .e
            .iter()
            .map(|l| source.index_of(l).ok_or_else(|| Error::InvalidSystem(format!("unknown label {l}"))))
            .collect::<Result<_>>()?;
        let f: Vec<usize> = raw
            .f
            .iter()
            .map(|l| target.index_of(l).ok_or_else(|| Error::InvalidSystem(format!("unknown label {l}"))))
            .collect::<Result<_>>()?;
        if e != dom {
            return Err(Error::InvalidSystem("E differs from the domain of map".into()));
        }
        let f_set: BTreeSet<usize> = f.iter().copied().collect();
        if f_set.len() != f.len() || f_set.iter().copied().collect::<Vec<_>>() != ran {
            return Err(Error::InvalidSystem("F differs from the range of map".into()));
        }
        if raw.g.len() != f.len() {
            return Err(Error::InvalidSystem("g must list one phase per point of F".into()));
        }
        let mut phases = vec![ZERO; f.len()];
        for (label_idx, &(re, im)) in f.iter().zip(&raw.g) {
            let k = ran.binary_search(label_idx).expect("range point");
            phases[k] = C64::new(re, im);
        }
        SpatialSystem::new(map, phases)
    }
}

impl From<SpatialSystem> for SystemJson {
    fn from(sys: SpatialSystem) -> Self {
        let src = sys.map.source.clone();
        let dst = sys.map.target.clone();
        let ran = sys.map.range();
        SystemJson {
            source: (*src).clone(),
            target: (*dst).clone(),
            e: sys.map.domain().iter().map(|&i| src.labels()[i].clone()).collect(),
            f: ran.iter().map(|&j| dst.labels()[j].clone()).collect(),
            map: sys
                .map
                .pairs
                .iter()
                .map(|&(a, b)| (src.labels()[a].clone(), dst.labels()[b].clone()))
                .collect(),
            g: sys.phases.iter().map(|g| (g.re, g.im)).collect(),
        }
    }
}

/// `ξ ↦ h^{1/p} · (ξ|_E ∘ S⁻¹) · g` on `F`, zero off `F`.
pub fn spatial_from_system(sys: &SpatialSystem, p: PExponent) -> LinOp {
    let map = &sys.map;
    let mut m = CMatrix::zeros(map.target.dim(), map.source.dim());
    for (j, h) in pushforward_density(map) {
        let i = map.preimage(j).expect("range point");
        let g = sys.phase_at(j).expect("range point");
        m[(j, i)] = g * h.powf(1.0 / p.p());
    }
    let source = LpSpace {
        space: map.source.clone(),
        exponent: p,
    };
    let target = LpSpace {
        space: map.target.clone(),
        exponent: p,
    };
    LinOp::new(source, target, m).expect("shape follows the spaces")
}

/// Operator of the system `(F, E, S⁻¹, (S⁻¹)_*(g)⁻¹)`.
pub fn reverse(sys: &SpatialSystem, p: PExponent) -> Result<LinOp> {
    Ok(spatial_from_system(&sys.reverse_system()?, p))
}

/// Support of `e` when `e` is, within `tol`, a diagonal `0/1` matrix.
pub fn is_multiplication_idempotent(e: &LinOp, tol: f64) -> Option<Vec<usize>> {
    if !e.is_square() || e.source() != e.target() {
        return None;
    }
    let m = e.matrix();
    let mut support = Vec::new();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if i != j {
                if v.norm() > tol {
                    return None;
                }
            } else if (v - C64::new(1.0, 0.0)).norm() <= tol {
                support.push(i);
            } else if v.norm() > tol {
                return None;
            }
        }
    }
    Some(support)
}

/// Multiplication by the indicator of `support`.
pub fn indicator(space: &LpSpace, support: &[usize]) -> LinOp {
    let mut m = CMatrix::zeros(space.dim(), space.dim());
    for &i in support {
        m[(i, i)] = C64::new(1.0, 0.0);
    }
    LinOp::new(space.clone(), space.clone(), m).expect("square")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    SpatialPartialIsometry,
    MultiplicationIdempotent,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpatialWitness {
    /// Source support `e` of `ts` and target support `f` of `st`.
    Pair { e: Vec<usize>, f: Vec<usize> },
    Subset(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpatialClassification {
    pub verdict: Verdict,
    pub witness: Option<SpatialWitness>,
    /// Names of the conditions that failed.
    pub failed: Vec<String>,
    pub norm_s: NormBracket,
    pub norm_t: NormBracket,
}

/// Decides whether `s` is a spatial partial isometry with reverse `t` using
/// only the relations `st = f`, `ts = e` idempotent, `fse = s`, `etf = t` and
/// `‖s‖, ‖t‖ ≤ 1`.
pub fn check_spatial_algebraic(s: &LinOp, t: &LinOp, tol: f64) -> Result<SpatialClassification> {
    let st = s.compose(t)?;
    let ts = t.compose(s)?;
    let mut failed = Vec::new();
    let f = is_multiplication_idempotent(&st, tol);
    let e = is_multiplication_idempotent(&ts, tol);
    if f.is_none() {
        failed.push("st is a multiplication idempotent".to_string());
    }
    if e.is_none() {
        failed.push("ts is a multiplication idempotent".to_string());
    }
    if let (Some(fs), Some(es)) = (&f, &e) {
        let f_op = indicator(s.target(), fs);
        let e_op = indicator(s.source(), es);
        let fse = f_op.compose(s)?.compose(&e_op)?;
        let etf = e_op.compose(t)?.compose(&f_op)?;
        if !within(&fse, s, tol) {
            failed.push("fse = s".to_string());
        }
        if !within(&etf, t, tol) {
            failed.push("etf = t".to_string());
        }
    }
    let opts = CertifyOptions {
        grid_resolution: 0,
        ..CertifyOptions::default()
    };
    let norm_s = certified_norm(s, &opts);
    let norm_t = certified_norm(t, &opts);
    if norm_s.lower > 1.0 + NORM_SLACK {
        failed.push("‖s‖ ≤ 1".to_string());
    }
    if norm_t.lower > 1.0 + NORM_SLACK {
        failed.push("‖t‖ ≤ 1".to_string());
    }
    let (verdict, witness) = if failed.is_empty() {
        (
            Verdict::SpatialPartialIsometry,
            Some(SpatialWitness::Pair {
                e: e.expect("checked"),
                f: f.expect("checked"),
            }),
        )
    } else if let Some(sub) = is_multiplication_idempotent(s, tol) {
        (Verdict::MultiplicationIdempotent, Some(SpatialWitness::Subset(sub)))
    } else {
        (Verdict::Neither, None)
    };
    Ok(SpatialClassification {
        verdict,
        witness,
        failed,
        norm_s,
        norm_t,
    })
}

fn within(a: &LinOp, b: &LinOp, tol: f64) -> bool {
    let scale = 1.0 + a.max_abs().max(b.max_abs());
    crate::linop::max_abs_diff(a.matrix(), b.matrix()) <= tol * scale
}
