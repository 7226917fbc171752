//! Brute-force bracket oracle: branch and bound over the unit polydisk.
//!
//! Any nonzero `ξ` can be rescaled so that its largest coordinate is exactly
//! `1`; the search therefore covers, for every face `k`, the set
//! `{ξ_k = 1, |ξ_j| ≤ 1}` in `2(n-1)` real coordinates. On a box with centre
//! `c` and complex radii `r`, `‖Tξ‖_p ≤ ‖ |Tc| + |T| r ‖_p` and
//! `‖ξ‖_p ≥ (1 + Σ_j max(0, |c_j| - r_j)^p)^{1/p}`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::ascent::{lower_bound, AscentOptions};
use super::certify::{closed_bracket, closed_form};
use super::{pnorm, MatVec, NormBracket};
use crate::error::{Error, Result};
use crate::linop::{CMatrix, LinOp, C64};

pub const DEFAULT_ORACLE_CAP: usize = 6;

#[derive(Debug, Clone, Copy)]
pub struct BranchBoundOptions {
    /// Leaves have half-width `1 / (2 * grid_resolution)` in every real coordinate.
    pub grid_resolution: usize,
    /// Stop once the bracket is this narrow (0 refines to leaf resolution).
    pub target_width: f64,
    pub max_boxes: usize,
    pub cap: usize,
}

impl Default for BranchBoundOptions {
    fn default() -> Self {
        Self {
            grid_resolution: 64,
            target_width: 0.0,
            max_boxes: 2_000_000,
            cap: DEFAULT_ORACLE_CAP,
        }
    }
}

struct Cell {
    face: usize,
    center: Vec<f64>,
    half: Vec<f64>,
    ub: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.ub.total_cmp(&other.ub) == Ordering::Equal
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ub.total_cmp(&other.ub)
    }
}

/// Point of face `face` given real coordinates for the other entries.
fn embed(face: usize, coords: &[f64], n: usize) -> Vec<C64> {
    let mut x = Vec::with_capacity(n);
    let mut it = coords.chunks(2);
    for j in 0..n {
        if j == face {
            x.push(C64::new(1.0, 0.0));
        } else {
            let c = it.next().expect("coordinate pair");
            x.push(C64::new(c[0], c[1]));
        }
    }
    x
}

/// Returns `(upper bound on the box, objective at the centre)`, or `None`
/// when the box lies outside the polydisk.
fn evaluate(m: &CMatrix, p: f64, face: usize, center: &[f64], half: &[f64]) -> Option<(f64, f64)> {
    let n = m.ncols();
    let xc = embed(face, center, n);
    let mut radii = vec![0.0; n];
    let mut pair = 0;
    let mut den = 1.0;
    for (j, r) in radii.iter_mut().enumerate() {
        if j == face {
            continue;
        }
        let (hr, hi) = (half[2 * pair], half[2 * pair + 1]);
        *r = (hr * hr + hi * hi).sqrt();
        let gap = xc[j].norm() - *r;
        if gap > 1.0 {
            return None;
        }
        if gap > 0.0 {
            den += gap.powf(p);
        }
        pair += 1;
    }
    let y = m.mul_vec(&xc);
    let spread = m.abs_mul_vec(&radii);
    let envelope: Vec<C64> = y
        .iter()
        .zip(&spread)
        .map(|(a, s)| C64::new(a.norm() + s, 0.0))
        .collect();
    let ub = pnorm(&envelope, p) / den.powf(1.0 / p);
    let val = pnorm(&y, p) / pnorm(&xc, p);
    Some((ub, val))
}

pub(crate) fn branch_and_bound(
    m: &CMatrix,
    p: f64,
    lower0: f64,
    upper0: f64,
    opts: &BranchBoundOptions,
) -> NormBracket {
    let n = m.ncols();
    let dims = 2 * n.saturating_sub(1);
    let leaf = 0.5 / opts.grid_resolution.max(1) as f64;
    let mut lower = lower0;
    let mut heap = BinaryHeap::new();
    for face in 0..n {
        let center = vec![0.0; dims];
        let half = vec![1.0; dims];
        if let Some((ub, val)) = evaluate(m, p, face, &center, &half) {
            lower = lower.max(val);
            heap.push(Cell { face, center, half, ub });
        }
    }
    let mut leaf_ub: f64 = 0.0;
    let mut processed = 0usize;
    while let Some(cell) = heap.pop() {
        if cell.ub <= lower + opts.target_width || processed >= opts.max_boxes {
            heap.push(cell);
            break;
        }
        processed += 1;
        let (axis, width) = cell
            .half
            .iter()
            .copied()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap_or((0, 0.0));
        if width <= leaf {
            leaf_ub = leaf_ub.max(cell.ub);
            continue;
        }
        for sign in [-1.0, 1.0] {
            let mut center = cell.center.clone();
            let mut half = cell.half.clone();
            half[axis] *= 0.5;
            center[axis] += sign * half[axis];
            if let Some((ub, val)) = evaluate(m, p, cell.face, &center, &half) {
                lower = lower.max(val);
                if ub > lower {
                    heap.push(Cell {
                        face: cell.face,
                        center,
                        half,
                        ub,
                    });
                }
            }
        }
    }
    let open = heap.peek().map_or(0.0, |c| c.ub);
    let upper = leaf_ub.max(open).max(lower) * (1.0 + 1e-12);
    NormBracket::new(lower, upper.min(upper0).max(lower))
}

/// Bracket `[lo, hi]` on `‖T‖_{p→p}` from ascent plus branch and bound with
/// leaf half-width `1 / (2 * grid_resolution)`. Source dimension is capped.
pub fn opnorm_bracket(t: &LinOp, grid_resolution: usize) -> Result<NormBracket> {
    opnorm_bracket_with(
        t,
        &BranchBoundOptions {
            grid_resolution,
            ..BranchBoundOptions::default()
        },
    )
}

pub fn opnorm_bracket_with(t: &LinOp, opts: &BranchBoundOptions) -> Result<NormBracket> {
    let m = t.counting_matrix();
    if m.ncols() > opts.cap {
        return Err(Error::DimensionAboveCap {
            dim: m.ncols(),
            cap: opts.cap,
        });
    }
    let p = t.exponent().p();
    if m.ncols() == 0 || m.nrows() == 0 {
        return Ok(NormBracket::exact(0.0));
    }
    if let Some(v) = closed_form(&m, p) {
        return Ok(closed_bracket(&m, v));
    }
    let (lo, _) = lower_bound(&m, p, &AscentOptions::default());
    Ok(branch_and_bound(&m, p, lo, f64::INFINITY, opts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::PExponent;
    use crate::space::LpSpace;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn e(p: f64) -> PExponent {
        PExponent::new(p).unwrap()
    }

    #[test]
    fn identity_bracket_has_lower_one() {
        let id = LinOp::identity(LpSpace::counting(3, e(2.5)));
        let b = opnorm_bracket(&id, 16).unwrap();
        assert_eq!(b.lower, 1.0);
        assert!(b.contains(1.0));
    }

    #[test]
    fn p_one_collapses_to_column_sum() {
        let t = LinOp::from_real_rows(&[&[1.0, -2.0], &[0.5, 3.0]], e(1.0));
        assert!(opnorm_bracket(&t, 8).unwrap().contains(5.0));
    }

    #[test]
    fn refuses_above_cap() {
        let id = LinOp::identity(LpSpace::counting(7, e(2.0)));
        assert!(matches!(opnorm_bracket(&id, 8), Err(Error::DimensionAboveCap { dim: 7, cap: 6 })));
    }

    #[test]
    fn width_shrinks_with_resolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = CMatrix::from_fn(3, 3, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let t = LinOp::counting(m, e(2.5));
        let coarse = opnorm_bracket(&t, 8).unwrap();
        let fine = opnorm_bracket(&t, 64).unwrap();
        assert!(fine.width() < coarse.width());
        assert!(fine.width() < 0.05, "{fine:?}");
    }
}
