//! Truncated Fock space over `(ℓ^p_d, ℓ^q_d)` and the Cuntz operators.
//!
//! Level `n` has `d^n` slots, 0-based. The tensor `δ_j ⊗ w` of a level-`n`
//! slot `w` sits at slot `j·d^n + w` of level `n + 1`.

use std::sync::Arc;

use serde::Serialize;

use super::{LevelLayout, LeveledOp, Window};
use crate::error::{Error, Result};
use crate::exponent::PExponent;
use crate::linop::{CMatrix, C64, ONE, ZERO};
use crate::norm::{CertifyOptions, NormBracket};
use crate::sparse::SparseMatrix;

/// Level-major flattening of `⊔_{n ≤ N} {0, …, d^n − 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockIndex {
    d: usize,
    levels: usize,
    layout: Arc<LevelLayout>,
}

impl FockIndex {
    pub fn new(d: usize, levels: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidTruncation(format!("branching must be at least 2, got {d}")));
        }
        let mut sizes = Vec::with_capacity(levels + 1);
        let mut s = 1usize;
        for _ in 0..=levels {
            sizes.push(s);
            s = s
                .checked_mul(d)
                .ok_or_else(|| Error::InvalidTruncation("dimension overflows".into()))?;
        }
        Ok(Self {
            d,
            levels,
            layout: Arc::new(LevelLayout::new(sizes)),
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Highest level `N`.
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn layout(&self) -> &Arc<LevelLayout> {
        &self.layout
    }

    pub fn flat(&self, level: usize, slot: usize) -> usize {
        self.layout.flat(level, slot)
    }

    pub fn split(&self, flat: usize) -> (usize, usize) {
        self.layout.split(flat)
    }

    fn full(&self) -> Window {
        Window {
            lo: 0,
            hi: self.levels,
        }
    }

    fn require_levels(&self) -> Result<()> {
        if self.levels == 0 {
            return Err(Error::InvalidTruncation(
                "creation and annihilation need at least one level".into(),
            ));
        }
        Ok(())
    }

    fn check_vector(&self, x: &[C64]) -> Result<()> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} in ℓ_{}",
                x.len(),
                self.d
            )));
        }
        Ok(())
    }
}

pub fn delta(d: usize, j: usize) -> Vec<C64> {
    let mut v = vec![ZERO; d];
    v[j] = ONE;
    v
}

/// `c(x)`: level `n` slot `w` goes to `Σ_j x_j e_{j·d^n + w}` at level
/// `n + 1`; the top level is sent to zero.
pub fn creation(x: &[C64], idx: &FockIndex, p: PExponent) -> Result<LeveledOp> {
    idx.require_levels()?;
    idx.check_vector(x)?;
    let window = Window {
        lo: 0,
        hi: idx.levels - 1,
    };
    LeveledOp::from_blocks(idx.layout.clone(), p, 1, window, |n| {
        let size = idx.layout.size(n);
        let mut out = Vec::with_capacity(size * x.len());
        for w in 0..size {
            for (j, &xj) in x.iter().enumerate() {
                if xj != ZERO {
                    out.push((j * size + w, w, xj));
                }
            }
        }
        Some(out)
    })
}

/// `v(y)`: level `n` slot `j·d^{n−1} + w` goes to `y_j e_w` at level `n − 1`;
/// level 0 is sent to zero.
pub fn annihilation(y: &[C64], idx: &FockIndex, p: PExponent) -> Result<LeveledOp> {
    idx.require_levels()?;
    idx.check_vector(y)?;
    LeveledOp::from_blocks(idx.layout.clone(), p, -1, idx.full(), |n| {
        let below = idx.layout.size(n - 1);
        let mut out = Vec::new();
        for (j, &yj) in y.iter().enumerate() {
            if yj != ZERO {
                out.extend((0..below).map(|w| (w, j * below + w, yj)));
            }
        }
        Some(out)
    })
}

/// `φ^∞(z)`: multiplication by `z`.
pub fn phi_inf(z: C64, idx: &FockIndex, p: PExponent) -> LeveledOp {
    LeveledOp::identity(idx.layout.clone(), p).scale(z)
}

/// `Θ(k)`: `k` on the first tensor factor at every level `n ≥ 1`.
pub fn theta_lift(k: &CMatrix, idx: &FockIndex, p: PExponent) -> Result<LeveledOp> {
    let d = idx.d;
    if k.shape() != (d, d) {
        return Err(Error::DimensionMismatch(format!(
            "Θ needs a {d}x{d} matrix, got {}x{}",
            k.nrows(),
            k.ncols()
        )));
    }
    LeveledOp::from_blocks(idx.layout.clone(), p, 0, idx.full(), |n| {
        if n == 0 {
            return None;
        }
        let below = idx.layout.size(n - 1);
        let mut out = Vec::new();
        for j in 0..d {
            for i in 0..d {
                let v = k[(i, j)];
                if v != ZERO {
                    out.extend((0..below).map(|w| (i * below + w, j * below + w, v)));
                }
            }
        }
        Some(out)
    })
}

/// `θ_{x,y}` on `ℓ^p_d`, the matrix `x yᵀ`.
pub fn rank_one(x: &[C64], y: &[C64]) -> CMatrix {
    CMatrix::from_fn(x.len(), y.len(), |i, j| x[i] * y[j])
}

/// The finite-rank defect of relation (3): `id − Σ_j c(δ_j)v(δ_j)`,
/// expected to be `θ_{ι,ι}` (the projector onto level 0).
#[derive(Debug, Clone, Serialize)]
pub struct RankOneDefect {
    pub rank: usize,
    pub support: Vec<usize>,
    /// Distance from `θ_{ι,ι}` on the window.
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LeavittReport {
    pub d: usize,
    pub levels: usize,
    /// `max_j |v(δ_j)c(δ_j) − id|` on the window.
    pub isometry: f64,
    /// `max_{j≠k} |v(δ_k)c(δ_j)|` on the window.
    pub orthogonality: f64,
    /// `|Σ_j c(δ_j)v(δ_j) − (id − θ_{ι,ι})|` on the window.
    pub sum: f64,
    pub defect: RankOneDefect,
}

impl LeavittReport {
    pub fn max_residual(&self) -> f64 {
        self.isometry
            .max(self.orthogonality)
            .max(self.sum)
            .max(self.defect.residual)
    }
}

pub fn leavitt_check(idx: &FockIndex, p: PExponent) -> Result<LeavittReport> {
    leavitt_check_perturbed(idx, p, 0.0)
}

/// Same as [`leavitt_check`] with `c(δ_0)` replaced by `(1 + eps) c(δ_0)`.
pub fn leavitt_check_perturbed(idx: &FockIndex, p: PExponent, eps: f64) -> Result<LeavittReport> {
    let d = idx.d;
    let mut cs = Vec::with_capacity(d);
    let mut vs = Vec::with_capacity(d);
    for j in 0..d {
        let c = creation(&delta(d, j), idx, p)?;
        cs.push(if j == 0 { c.scale(C64::new(1.0 + eps, 0.0)) } else { c });
        vs.push(annihilation(&delta(d, j), idx, p)?);
    }
    let id = LeveledOp::identity(idx.layout.clone(), p);
    let mut isometry: f64 = 0.0;
    let mut orthogonality: f64 = 0.0;
    for (k, v) in vs.iter().enumerate() {
        for (j, c) in cs.iter().enumerate() {
            let vc = v.compose(c)?;
            if j == k {
                isometry = isometry.max(vc.residual(&id)?);
            } else {
                orthogonality = orthogonality.max(vc.max_abs_on_window());
            }
        }
    }
    let mut total = cs[0].compose(&vs[0])?;
    for j in 1..d {
        total = total.add(&cs[j].compose(&vs[j])?)?;
    }
    let proj = LeveledOp::new(
        idx.layout.clone(),
        p,
        SparseMatrix::from_triplets(idx.dim(), idx.dim(), [(0, 0, ONE)]),
        [0].into(),
        idx.full(),
    )?;
    let sum = total.residual(&id.sub(&proj)?)?;
    let defect_op = id.sub(&total)?;
    let support: Vec<usize> = defect_op
        .window_matrix()
        .triplets()
        .filter(|(_, _, v)| v.norm() > 0.0)
        .map(|(i, j, _)| i.max(j))
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let rank = defect_op.window_matrix().to_dense().rank(1e-12);
    let defect = RankOneDefect {
        rank,
        support,
        residual: defect_op.residual(&proj)?,
    };
    Ok(LeavittReport {
        d,
        levels: idx.levels,
        isometry,
        orthogonality,
        sum,
        defect,
    })
}

/// `I_j ∩ I_N`: at level `n ≥ 1`, slots `j·d^{n−1} .. (j+1)·d^{n−1} − 1`.
#[derive(Debug, Clone, Serialize)]
pub struct SupportPartition {
    pub j: usize,
    /// `(level, slots)` for levels `1..=N`.
    pub levels: Vec<(usize, Vec<usize>)>,
    pub flat: Vec<usize>,
}

pub fn support_partition(j: usize, idx: &FockIndex) -> Result<SupportPartition> {
    if j >= idx.d {
        return Err(Error::DimensionMismatch(format!("slot {j} out of range for d = {}", idx.d)));
    }
    let mut levels = Vec::new();
    let mut flat = Vec::new();
    for n in 1..=idx.levels {
        let below = idx.layout.size(n - 1);
        let slots: Vec<usize> = (j * below..(j + 1) * below).collect();
        flat.extend(slots.iter().map(|&s| idx.flat(n, s)));
        levels.push((n, slots));
    }
    Ok(SupportPartition { j, levels, flat })
}

/// Largest entrywise distance between `c(δ_j)v(δ_j)` and the 0/1 diagonal
/// on `I_j ∩ I_N`.
pub fn support_partition_residual(j: usize, idx: &FockIndex, p: PExponent) -> Result<f64> {
    let part = support_partition(j, idx)?;
    let e = delta(idx.d, j);
    let cv = creation(&e, idx, p)?.compose(&annihilation(&e, idx, p)?)?;
    let n = idx.dim();
    let diag = SparseMatrix::from_triplets(n, n, part.flat.iter().map(|&i| (i, i, ONE)));
    let target = LeveledOp::new(idx.layout.clone(), p, diag, [0].into(), idx.full())?;
    cv.residual(&target)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Letter {
    C(usize),
    V(usize),
}

/// Product of the letters, leftmost factor outermost. The empty word is the
/// identity.
pub fn word_eval(word: &[Letter], idx: &FockIndex, p: PExponent) -> Result<LeveledOp> {
    let d = idx.d;
    let mut out = LeveledOp::identity(idx.layout.clone(), p);
    for letter in word.iter().rev() {
        let op = match *letter {
            Letter::C(j) if j < d => creation(&delta(d, j), idx, p)?,
            Letter::V(j) if j < d => annihilation(&delta(d, j), idx, p)?,
            Letter::C(j) | Letter::V(j) => {
                return Err(Error::DimensionMismatch(format!("slot {j} out of range for d = {d}")))
            }
        };
        out = op.compose(&out)?;
    }
    Ok(out)
}

/// Norm brackets of `c(x)` and `v(y)` next to their predicted values
/// `‖x‖_p` and `‖y‖_q`.
#[derive(Debug, Clone, Serialize)]
pub struct NormCheck {
    pub predicted: f64,
    pub bracket: NormBracket,
}

impl NormCheck {
    pub fn holds(&self, slack: f64) -> bool {
        self.bracket.lower - slack <= self.predicted && self.predicted <= self.bracket.upper + slack
    }
}

pub fn creation_norm(x: &[C64], idx: &FockIndex, p: PExponent, opts: &CertifyOptions) -> Result<NormCheck> {
    let op = creation(x, idx, p)?;
    let abs: Vec<f64> = x.iter().map(|z| z.norm()).collect();
    Ok(NormCheck {
        predicted: crate::space::counting_norm(&abs, crate::exponent::Conjugate::Finite(p.p())),
        bracket: op.norm_on_window(opts),
    })
}

pub fn annihilation_norm(y: &[C64], idx: &FockIndex, p: PExponent, opts: &CertifyOptions) -> Result<NormCheck> {
    let op = annihilation(y, idx, p)?;
    let abs: Vec<f64> = y.iter().map(|z| z.norm()).collect();
    Ok(NormCheck {
        predicted: crate::space::counting_norm(&abs, p.q()),
        bracket: op.norm_on_window(opts),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(p: f64) -> PExponent {
        PExponent::new(p).unwrap()
    }

    #[test]
    fn creation_slot_arithmetic() {
        let idx = FockIndex::new(2, 2).unwrap();
        let c = creation(&delta(2, 0), &idx, e(2.0)).unwrap();
        let m = c.matrix();
        assert_eq!(m.get(idx.flat(1, 0), idx.flat(0, 0)), ONE);
        assert_eq!(m.get(idx.flat(2, 0), idx.flat(1, 0)), ONE);
        assert_eq!(m.get(idx.flat(2, 1), idx.flat(1, 1)), ONE);
        assert_eq!(m.nnz(), 3);
    }

    #[test]
    fn leavitt_relations_are_exact() {
        for (d, n) in [(2, 3), (3, 2)] {
            let r = leavitt_check(&FockIndex::new(d, n).unwrap(), e(2.0)).unwrap();
            assert_eq!(r.max_residual(), 0.0);
            assert_eq!(r.defect.rank, 1);
            assert_eq!(r.defect.support, vec![0]);
        }
    }

    #[test]
    fn perturbation_shows_up() {
        let r = leavitt_check_perturbed(&FockIndex::new(2, 3).unwrap(), e(2.0), 1e-3).unwrap();
        assert!((r.isometry - 1e-3).abs() < 1e-12);
    }

    #[test]
    fn theta_of_identity_kills_level_zero() {
        let idx = FockIndex::new(2, 2).unwrap();
        let t = theta_lift(&CMatrix::identity(2, 2), &idx, e(2.0)).unwrap();
        assert_eq!(t.matrix().get(0, 0), ZERO);
        for i in 1..idx.dim() {
            assert_eq!(t.matrix().get(i, i), ONE);
        }
    }

    #[test]
    fn words() {
        let idx = FockIndex::new(2, 3).unwrap();
        let p = e(1.5);
        let id = word_eval(&[Letter::V(0), Letter::C(0)], &idx, p).unwrap();
        assert_eq!(id.residual(&LeveledOp::identity(idx.layout().clone(), p)).unwrap(), 0.0);
        let cvc = word_eval(&[Letter::C(0), Letter::V(0), Letter::C(0)], &idx, p).unwrap();
        let c = creation(&delta(2, 0), &idx, p).unwrap();
        assert_eq!(cvc.residual(&c).unwrap(), 0.0);
        assert_eq!(cvc.window(), Window { lo: 0, hi: 2 });
        let deep = [Letter::C(0); 4];
        assert!(matches!(word_eval(&deep, &idx, p), Err(Error::EmptyWindow)));
    }
}
