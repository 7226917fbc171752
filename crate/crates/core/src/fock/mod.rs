//! Level-truncated Fock spaces and operators that move between levels.
//!
//! A truncation keeps levels `0..=N`. Operators are stored on the whole
//! truncated space together with the set of level shifts they perform and a
//! window of input levels on which they agree with the untruncated operator.
//! Identities between truncated operators are only ever compared on the
//! window, which composition maintains automatically.

pub mod cc;
pub mod crossed;
pub mod cuntz;

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent::PExponent;
use crate::linop::{CMatrix, LinOp, C64};
use crate::norm::{certify_sparse, CertifyOptions, NormBracket};
use crate::space::{FiniteMeasureSpace, LpSpace};
use crate::sparse::SparseMatrix;

/// Block sizes of levels `0..=N`, flattened level-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelLayout {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
    /// Measure of each flat index; `None` means counting measure.
    weights: Option<Vec<f64>>,
}

impl LevelLayout {
    pub fn new(sizes: Vec<usize>) -> Self {
        let mut offsets = Vec::with_capacity(sizes.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for s in &sizes {
            acc += s;
            offsets.push(acc);
        }
        Self {
            sizes,
            offsets,
            weights: None,
        }
    }

    /// Equal-size levels whose fibres carry the weights of `fibre`.
    pub fn uniform(levels: usize, fibre: &[f64]) -> Self {
        let mut out = Self::new(vec![fibre.len(); levels + 1]);
        if fibre.iter().any(|w| *w != 1.0) {
            out.weights = Some(fibre.iter().copied().cycle().take(out.dim()).collect());
        }
        out
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    /// Highest level `N`.
    pub fn top(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn dim(&self) -> usize {
        *self.offsets.last().expect("nonempty")
    }

    pub fn size(&self, level: usize) -> usize {
        self.sizes[level]
    }

    pub fn offset(&self, level: usize) -> usize {
        self.offsets[level]
    }

    pub fn range(&self, level: usize) -> std::ops::Range<usize> {
        self.offsets[level]..self.offsets[level + 1]
    }

    pub fn flat(&self, level: usize, slot: usize) -> usize {
        debug_assert!(slot < self.sizes[level]);
        self.offsets[level] + slot
    }

    /// `(level, slot)` of a flat index.
    pub fn split(&self, flat: usize) -> (usize, usize) {
        let level = self.offsets.partition_point(|&o| o <= flat) - 1;
        (level, flat - self.offsets[level])
    }
}

/// Inclusive range of input levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Window {
    pub lo: usize,
    pub hi: usize,
}

impl Window {
    pub fn contains(&self, level: usize) -> bool {
        self.lo <= level && level <= self.hi
    }

    fn intersect(self, other: Window) -> Option<Window> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Window { lo, hi })
    }
}

/// An operator on a level truncation with its shift and window bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct LeveledOp {
    layout: Arc<LevelLayout>,
    exponent: PExponent,
    matrix: SparseMatrix,
    shifts: BTreeSet<i64>,
    window: Window,
}

impl LeveledOp {
    pub fn new(
        layout: Arc<LevelLayout>,
        exponent: PExponent,
        matrix: SparseMatrix,
        shifts: BTreeSet<i64>,
        window: Window,
    ) -> Result<Self> {
        let n = layout.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix on a truncation of dimension {n}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if window.lo > window.hi || window.hi > layout.top() {
            return Err(Error::EmptyWindow);
        }
        Ok(Self {
            layout,
            exponent,
            matrix,
            shifts,
            window,
        })
    }

    /// Block operator with a single level shift built from per-level blocks:
    /// `block(level)` is the `size(level + shift) x size(level)` block, or
    /// `None` when the level is mapped to zero.
    pub fn from_blocks(
        layout: Arc<LevelLayout>,
        exponent: PExponent,
        shift: i64,
        window: Window,
        mut block: impl FnMut(usize) -> Option<Vec<(usize, usize, C64)>>,
    ) -> Result<Self> {
        let n = layout.dim();
        let mut trip = Vec::new();
        for level in 0..=layout.top() {
            let target = level as i64 + shift;
            if target < 0 || target > layout.top() as i64 {
                continue;
            }
            if let Some(entries) = block(level) {
                let (ro, co) = (layout.offset(target as usize), layout.offset(level));
                trip.extend(entries.into_iter().map(|(i, j, v)| (ro + i, co + j, v)));
            }
        }
        let matrix = SparseMatrix::from_triplets(n, n, trip);
        Self::new(layout, exponent, matrix, BTreeSet::from([shift]), window)
    }

    pub fn identity(layout: Arc<LevelLayout>, exponent: PExponent) -> Self {
        let n = layout.dim();
        let top = layout.top();
        Self::new(
            layout,
            exponent,
            SparseMatrix::identity(n),
            BTreeSet::from([0]),
            Window { lo: 0, hi: top },
        )
        .expect("identity")
    }

    pub fn layout(&self) -> &Arc<LevelLayout> {
        &self.layout
    }

    pub fn exponent(&self) -> PExponent {
        self.exponent
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn shifts(&self) -> &BTreeSet<i64> {
        &self.shifts
    }

    /// The single level shift, if there is exactly one.
    pub fn shift(&self) -> Option<i64> {
        (self.shifts.len() == 1).then(|| *self.shifts.iter().next().expect("one"))
    }

    pub fn window(&self) -> Window {
        self.window
    }

    fn same_space(&self, other: &LeveledOp) -> Result<()> {
        if self.layout != other.layout {
            return Err(Error::DimensionMismatch("operators live on different truncations".into()));
        }
        if self.exponent != other.exponent {
            return Err(Error::ExponentMismatch {
                left: self.exponent.p(),
                right: other.exponent.p(),
            });
        }
        Ok(())
    }

    /// `self ∘ inner`. An input level stays in the window when `inner` is
    /// faithful there and each image level is either killed (below level 0)
    /// or inside the window of `self`.
    pub fn compose(&self, inner: &LeveledOp) -> Result<LeveledOp> {
        self.same_space(inner)?;
        let ok = |level: usize| {
            inner.window.contains(level)
                && inner.shifts.iter().all(|s| {
                    let t = level as i64 + s;
                    t < 0 || (t <= self.layout.top() as i64 && self.window.contains(t as usize))
                })
        };
        let levels: Vec<usize> = (0..=self.layout.top()).filter(|&l| ok(l)).collect();
        let (lo, hi) = match (levels.first(), levels.last()) {
            (Some(&lo), Some(&hi)) => (lo, hi),
            _ => return Err(Error::EmptyWindow),
        };
        if hi - lo + 1 != levels.len() {
            return Err(Error::EmptyWindow);
        }
        let shifts = self
            .shifts
            .iter()
            .flat_map(|a| inner.shifts.iter().map(move |b| a + b))
            .collect();
        Ok(LeveledOp {
            layout: self.layout.clone(),
            exponent: self.exponent,
            matrix: self.matrix.mul(&inner.matrix),
            shifts,
            window: Window { lo, hi },
        })
    }

    fn combine(&self, other: &LeveledOp, matrix: SparseMatrix) -> Result<LeveledOp> {
        self.same_space(other)?;
        let window = self.window.intersect(other.window).ok_or(Error::EmptyWindow)?;
        Ok(LeveledOp {
            layout: self.layout.clone(),
            exponent: self.exponent,
            matrix,
            shifts: self.shifts.union(&other.shifts).copied().collect(),
            window,
        })
    }

    pub fn add(&self, other: &LeveledOp) -> Result<LeveledOp> {
        self.combine(other, self.matrix.add(&other.matrix))
    }

    pub fn sub(&self, other: &LeveledOp) -> Result<LeveledOp> {
        self.combine(other, self.matrix.sub(&other.matrix))
    }

    pub fn scale(&self, z: C64) -> LeveledOp {
        LeveledOp {
            matrix: self.matrix.scale(z),
            ..self.clone()
        }
    }

    /// Same operator with a narrower window.
    pub fn restrict_window(&self, window: Window) -> Result<LeveledOp> {
        let window = self.window.intersect(window).ok_or(Error::EmptyWindow)?;
        Ok(LeveledOp {
            window,
            ..self.clone()
        })
    }

    /// Whether a flat column index belongs to a window level.
    pub fn in_window(&self, col: usize) -> bool {
        self.window.contains(self.layout.split(col).0)
    }

    /// Largest entrywise difference on the columns of the common window.
    pub fn residual(&self, other: &LeveledOp) -> Result<f64> {
        self.same_space(other)?;
        let w = self.window.intersect(other.window).ok_or(Error::EmptyWindow)?;
        let layout = &self.layout;
        Ok(self
            .matrix
            .max_abs_diff_on(&other.matrix, |j| w.contains(layout.split(j).0)))
    }

    /// Largest entry on window columns.
    pub fn max_abs_on_window(&self) -> f64 {
        let zero = SparseMatrix::zeros(self.matrix.nrows(), self.matrix.ncols());
        let (w, layout) = (self.window, &self.layout);
        self.matrix.max_abs_diff_on(&zero, |j| w.contains(layout.split(j).0))
    }

    /// The operator restricted to window columns, as a sparse matrix.
    pub fn window_matrix(&self) -> SparseMatrix {
        let (w, layout) = (self.window, &self.layout);
        self.matrix.restrict_columns(|j| w.contains(layout.split(j).0))
    }

    /// Bracket on the norm of the operator restricted to window inputs. With
    /// a single shift the operator is a direct sum of level blocks, so the
    /// norm is the largest block norm.
    pub fn norm_on_window(&self, opts: &CertifyOptions) -> NormBracket {
        let p = self.exponent.p();
        if let Some(w) = self.layout.weights() {
            let scaled = SparseMatrix::from_triplets(
                self.matrix.nrows(),
                self.matrix.ncols(),
                self.matrix
                    .triplets()
                    .map(|(i, j, v)| (i, j, v * (w[i] / w[j]).powf(1.0 / p))),
            );
            let plain = LeveledOp {
                layout: Arc::new(LevelLayout::new(self.layout.sizes.clone())),
                matrix: scaled,
                ..self.clone()
            };
            return plain.norm_on_window(opts);
        }
        match self.shift() {
            Some(s) => {
                let mut seen: HashMap<Vec<(u64, u64)>, NormBracket> = HashMap::new();
                NormBracket::max_of((self.window.lo..=self.window.hi).filter_map(|l| {
                    let t = l as i64 + s;
                    if t < 0 || t > self.layout.top() as i64 {
                        return None;
                    }
                    let block = self.matrix.block(self.layout.range(t as usize), self.layout.range(l));
                    let key = permutation_key(&block.to_dense());
                    if let Some(b) = key.as_ref().and_then(|k| seen.get(k)) {
                        return Some(*b);
                    }
                    let b = certify_sparse(&block, p, opts);
                    if let Some(k) = key {
                        seen.insert(k, b);
                    }
                    Some(b)
                }))
            }
            None => certify_sparse(&self.window_matrix(), p, opts),
        }
    }

    /// Dense operator on the (weighted) truncated space.
    pub fn to_linop(&self) -> LinOp {
        let space = self.space();
        LinOp::new(space.clone(), space, self.matrix.to_dense()).expect("square on the truncation")
    }

    pub fn space(&self) -> LpSpace {
        match self.layout.weights() {
            None => LpSpace::counting(self.layout.dim(), self.exponent),
            Some(w) => LpSpace::new(
                FiniteMeasureSpace::weighted(w.to_vec()).expect("positive weights"),
                self.exponent,
            ),
        }
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for pos in 0..n {
            let mut v = rest.clone();
            v.insert(pos, n - 1);
            out.push(v);
        }
    }
    out
}

/// Counting `p`-norms are invariant under separate row and column
/// permutations, so small blocks are keyed by the lexicographically least
/// entry pattern over all of them. Larger blocks get no key.
fn permutation_key(m: &CMatrix) -> Option<Vec<(u64, u64)>> {
    let (r, c) = m.shape();
    if r > 4 || c > 4 {
        return None;
    }
    let (rp, cp) = (permutations(r), permutations(c));
    let mut best: Option<Vec<(u64, u64)>> = None;
    for pr in &rp {
        for pc in &cp {
            let mut key = Vec::with_capacity(r * c);
            for &i in pr {
                for &j in pc {
                    let z = m[(i, j)];
                    key.push(((z.re + 0.0).to_bits(), (z.im + 0.0).to_bits()));
                }
            }
            if best.as_ref().is_none_or(|b| key < *b) {
                best = Some(key);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_round_trip() {
        let l = LevelLayout::new(vec![1, 2, 4, 8]);
        assert_eq!(l.dim(), 15);
        for f in 0..15 {
            let (lv, s) = l.split(f);
            assert_eq!(l.flat(lv, s), f);
        }
        assert_eq!(l.split(3), (2, 0));
    }
}
