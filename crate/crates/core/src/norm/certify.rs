//! Certified brackets combining closed forms, the Schur test, Riesz–Thorin
//! interpolation and (for small matrices) the branch-and-bound oracle.

use super::ascent::{lower_bound, AscentOptions};
use super::bracket::{branch_and_bound, BranchBoundOptions, DEFAULT_ORACLE_CAP};
use super::{MatVec, NormBracket};
use crate::exponent::Conjugate;
use crate::linop::{CMatrix, LinOp};
use crate::space::counting_norm;
use crate::sparse::SparseMatrix;

/// Relative outward padding applied to floating-point bounds.
const UPPER_PAD: f64 = 1e-12;
const LOWER_PAD: f64 = 1e-13;

#[derive(Debug, Clone, Copy)]
pub struct CertifyOptions {
    pub ascent: AscentOptions,
    /// Branch-and-bound leaf resolution; 0 disables the oracle.
    pub grid_resolution: usize,
    pub oracle_cap: usize,
    /// The oracle only runs while the analytic bracket is wider than this.
    pub target_width: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            ascent: AscentOptions::default(),
            grid_resolution: 64,
            oracle_cap: DEFAULT_ORACLE_CAP,
            target_width: 1e-9,
        }
    }
}

impl CertifyOptions {
    /// Deep branch and bound for small dense matrices, aiming at brackets
    /// narrower than `1e-4`.
    pub fn fine() -> Self {
        Self {
            grid_resolution: 4096,
            target_width: 1e-4,
            ..Self::default()
        }
    }
}

/// `‖T‖_p ≤ ‖T‖_1^{1/p} ‖T‖_∞^{1 - 1/p}`.
pub fn riesz_thorin_upper(m: &dyn MatVec, p: f64) -> f64 {
    let c = m.col_abs_sums().into_iter().fold(0.0, f64::max);
    let r = m.row_abs_sums().into_iter().fold(0.0, f64::max);
    c.powf(1.0 / p) * r.powf(1.0 - 1.0 / p)
}

/// Schur test with positive weight `z`:
/// `‖T‖_p^p ≤ max_j (|T|^T (|T| z)^{p-1})_j / z_j^{p-1}`.
/// Columns of `T` that vanish are ignored. Exact at the nonnegative
/// maximizer of `|T|`.
pub fn schur_upper(m: &dyn MatVec, p: f64, z: &[f64]) -> f64 {
    let cols = m.col_abs_sums();
    if p == 1.0 {
        return cols.into_iter().fold(0.0, f64::max);
    }
    let w = m.abs_mul_vec(z);
    let a: Vec<f64> = w.iter().map(|v| v.powf(p - 1.0)).collect();
    let b = m.abs_tmul_vec(&a);
    let mut worst: f64 = 0.0;
    for j in 0..cols.len() {
        if cols[j] == 0.0 {
            continue;
        }
        if z[j] <= 0.0 {
            return f64::INFINITY;
        }
        worst = worst.max(b[j] / z[j].powf(p - 1.0));
    }
    worst.powf(1.0 / p)
}

/// Boyd's power method on the nonnegative matrix `|T|`; returns a strictly
/// positive weight for the Schur test.
fn nonnegative_maximizer(m: &dyn MatVec, p: f64, iters: usize) -> Vec<f64> {
    let n = m.ncols();
    let q = p / (p - 1.0);
    let mut x = vec![1.0; n];
    for _ in 0..iters {
        let y = m.abs_mul_vec(&x);
        let a: Vec<f64> = y.iter().map(|v| v.powf(p - 1.0)).collect();
        let z = m.abs_tmul_vec(&a);
        let next: Vec<f64> = z.iter().map(|v| v.powf(q - 1.0)).collect();
        let s = counting_norm(&next, Conjugate::Finite(p));
        if s == 0.0 || !s.is_finite() {
            break;
        }
        let next: Vec<f64> = next.iter().map(|v| v / s).collect();
        let delta = next
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        x = next;
        if delta < 1e-15 {
            break;
        }
    }
    floor_positive(&x)
}

fn floor_positive(x: &[f64]) -> Vec<f64> {
    let top = x.iter().copied().fold(0.0, f64::max).max(1e-300);
    x.iter().map(|v| v.max(top * 1e-14)).collect()
}

fn nonzero_counts(m: &dyn MatVec) -> (Vec<u32>, Vec<u32>) {
    let mut rows = vec![0u32; m.nrows()];
    let mut cols = vec![0u32; m.ncols()];
    m.for_each_nonzero(&mut |i, j, v| {
        if v.norm() > 0.0 {
            rows[i] += 1;
            cols[j] += 1;
        }
    });
    (rows, cols)
}

/// Closed forms that need no search: zero, `p = 1`, and matrices whose rows
/// (or columns) each hold at most one nonzero. In the first case the columns
/// have disjoint supports and the norm is the largest column `p`-norm; in the
/// second it is the largest row `q`-norm.
pub(crate) fn closed_form(m: &dyn MatVec, p: f64) -> Option<f64> {
    if m.is_zero() || m.nrows() == 0 || m.ncols() == 0 {
        return Some(0.0);
    }
    let (rows, cols) = nonzero_counts(m);
    if rows.iter().chain(&cols).all(|c| *c <= 1) {
        let mut best: f64 = 0.0;
        m.for_each_nonzero(&mut |_, _, v| best = best.max(v.norm()));
        return Some(best);
    }
    if p == 1.0 {
        return Some(m.col_abs_sums().into_iter().fold(0.0, f64::max));
    }
    if rows.iter().all(|c| *c <= 1) {
        let mut acc = vec![0.0; m.ncols()];
        m.for_each_nonzero(&mut |_, j, v| acc[j] += v.norm().powf(p));
        return Some(acc.into_iter().fold(0.0, f64::max).powf(1.0 / p));
    }
    if cols.iter().all(|c| *c <= 1) {
        let q = p / (p - 1.0);
        let mut acc = vec![0.0; m.nrows()];
        m.for_each_nonzero(&mut |i, _, v| acc[i] += v.norm().powf(q));
        return Some(acc.into_iter().fold(0.0, f64::max).powf(1.0 / q));
    }
    None
}

/// Closed-form values carry a few roundings, so they get the same outward
/// padding as the analytic bounds.
/// Monomial matrices are exact: the norm is a stored entry modulus.
pub(crate) fn closed_bracket(m: &dyn MatVec, v: f64) -> NormBracket {
    let (rows, cols) = nonzero_counts(m);
    if rows.iter().chain(&cols).all(|c| *c <= 1) {
        NormBracket::exact(v)
    } else {
        NormBracket::new(v * (1.0 - UPPER_PAD), v * (1.0 + UPPER_PAD))
    }
}

/// `‖u wᵀ‖ = ‖u‖_p ‖w‖_q` when the matrix has rank one.
fn rank_one_norm(m: &dyn MatVec, p: f64) -> Option<f64> {
    let mut pivot = (0, 0, crate::linop::ZERO);
    let mut nnz = 0usize;
    m.for_each_nonzero(&mut |i, j, v| {
        nnz += 1;
        if v.norm() > pivot.2.norm() {
            pivot = (i, j, v);
        }
    });
    let (i0, j0, a) = pivot;
    if a.norm() == 0.0 {
        return None;
    }
    let mut u = vec![crate::linop::ZERO; m.nrows()];
    let mut w = vec![crate::linop::ZERO; m.ncols()];
    m.for_each_nonzero(&mut |i, j, v| {
        if j == j0 {
            u[i] = v;
        }
        if i == i0 {
            w[j] = v / a;
        }
    });
    let nu = u.iter().filter(|z| z.norm() > 0.0).count();
    let nw = w.iter().filter(|z| z.norm() > 0.0).count();
    if nu * nw != nnz {
        return None;
    }
    let tol = 1e-14 * a.norm();
    let mut ok = true;
    m.for_each_nonzero(&mut |i, j, v| ok &= (v - u[i] * w[j]).norm() <= tol);
    if !ok {
        return None;
    }
    let un: Vec<f64> = u.iter().map(|z| z.norm()).collect();
    let wn: Vec<f64> = w.iter().map(|z| z.norm()).collect();
    let q = if p == 1.0 { Conjugate::Infinity } else { Conjugate::Finite(p / (p - 1.0)) };
    Some(counting_norm(&un, Conjugate::Finite(p)) * counting_norm(&wn, q))
}

fn analytic_bracket(m: &dyn MatVec, p: f64, opts: &CertifyOptions) -> (NormBracket, Vec<crate::linop::C64>) {
    let (lo, x) = lower_bound(m, p, &opts.ascent);
    let z_boyd = nonnegative_maximizer(m, p, 2000);
    let z_asc = floor_positive(&x.iter().map(|v| v.norm()).collect::<Vec<_>>());
    let up = riesz_thorin_upper(m, p)
        .min(schur_upper(m, p, &z_boyd))
        .min(schur_upper(m, p, &z_asc));
    let lower = lo * (1.0 - LOWER_PAD);
    let upper = (up * (1.0 + UPPER_PAD)).max(lower);
    (NormBracket::new(lower, upper), x)
}

/// Certified bracket for a dense counting-measure matrix.
pub fn certify_matrix(m: &CMatrix, p: f64, opts: &CertifyOptions) -> NormBracket {
    if let Some(v) = closed_form(m, p) {
        return closed_bracket(m, v);
    }
    if let Some(v) = rank_one_norm(m, p) {
        return NormBracket::new(v * (1.0 - UPPER_PAD), v * (1.0 + UPPER_PAD));
    }
    if p == 2.0 {
        let s = m
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .copied()
            .fold(0.0, f64::max);
        return NormBracket::new(s * (1.0 - UPPER_PAD), s * (1.0 + UPPER_PAD));
    }
    let (mut b, _) = analytic_bracket(m, p, opts);
    if b.width() > opts.target_width && opts.grid_resolution > 0 && m.ncols() <= opts.oracle_cap {
        let bb = branch_and_bound(
            m,
            p,
            b.lower,
            b.upper,
            &BranchBoundOptions {
                grid_resolution: opts.grid_resolution,
                target_width: opts.target_width,
                max_boxes: 200_000,
                ..BranchBoundOptions::default()
            },
        );
        b = b.intersect(&bb);
    }
    b
}

/// Certified bracket for a sparse counting-measure matrix. Small matrices
/// are densified and handed to [`certify_matrix`].
pub fn certify_sparse(m: &SparseMatrix, p: f64, opts: &CertifyOptions) -> NormBracket {
    if let Some(v) = closed_form(m, p) {
        return closed_bracket(m, v);
    }
    if let Some(v) = rank_one_norm(m, p) {
        return NormBracket::new(v * (1.0 - UPPER_PAD), v * (1.0 + UPPER_PAD));
    }
    if m.nrows() * m.ncols() <= 4096 {
        return certify_matrix(&m.to_dense(), p, opts);
    }
    analytic_bracket(m, p, opts).0
}

/// Certified bracket for an operator between weighted spaces.
pub fn certified_norm(t: &LinOp, opts: &CertifyOptions) -> NormBracket {
    certify_matrix(&t.counting_matrix(), t.exponent().p(), opts)
}
