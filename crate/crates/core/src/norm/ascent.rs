//! Multistart nonlinear power ascent for `sup_{‖ξ‖_p = 1} ‖Tξ‖_p`.
//!
//! Each step applies `T`, the `p`-duality map, the adjoint, and the
//! `q`-duality map. The objective `‖Tξ‖_p / ‖ξ‖_p` never decreases between
//! steps, so every iterate certifies a lower bound.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{duality_map, pnorm, MatVec};
use crate::linop::{LinOp, C64, ZERO};

#[derive(Debug, Clone, Copy)]
pub struct AscentOptions {
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub rel_tol: f64,
    /// Coordinate starts are all used up to this dimension; above it only
    /// the columns with the largest `p`-norms seed the search.
    pub coordinate_cap: usize,
}

impl Default for AscentOptions {
    fn default() -> Self {
        Self {
            restarts: 8,
            seed: 0,
            max_iter: 500,
            rel_tol: 1e-12,
            coordinate_cap: 256,
        }
    }
}

/// Objective values along one ascent run, starting with the initial point.
#[derive(Debug, Clone)]
pub struct AscentTrace {
    pub objective: Vec<f64>,
    pub best_x: Vec<C64>,
}

impl AscentTrace {
    pub fn best(&self) -> f64 {
        self.objective.iter().copied().fold(0.0, f64::max)
    }
}

fn objective(m: &dyn MatVec, x: &[C64], p: f64) -> f64 {
    let nx = pnorm(x, p);
    if nx == 0.0 {
        return 0.0;
    }
    pnorm(&m.mul_vec(x), p) / nx
}

/// Runs the ascent from `x0` on a counting-measure matrix.
pub fn ascent_from(m: &dyn MatVec, p: f64, x0: &[C64], opts: &AscentOptions) -> AscentTrace {
    let mut x = x0.to_vec();
    let mut f = objective(m, &x, p);
    let mut trace = AscentTrace {
        objective: vec![f],
        best_x: x.clone(),
    };
    if f == 0.0 {
        return trace;
    }
    for _ in 0..opts.max_iter {
        let y = m.mul_vec(&x);
        let z = m.adjoint_mul_vec(&duality_map(&y, p));
        let next = if p == 1.0 {
            // q = ∞: the dual maximizer is a signed coordinate vector.
            let (k, zk) = z
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
                .expect("nonempty");
            let mut e = vec![ZERO; z.len()];
            e[k] = if zk.norm() > 0.0 { zk / zk.norm() } else { C64::new(1.0, 0.0) };
            e
        } else {
            let q = p / (p - 1.0);
            duality_map(&z, q)
        };
        let nf = objective(m, &next, p);
        if !(nf.is_finite()) || nf == 0.0 {
            break;
        }
        trace.objective.push(nf);
        let improved = nf > f;
        if improved {
            trace.best_x = next.clone();
        }
        let done = (nf - f).abs() <= opts.rel_tol * f.max(f64::MIN_POSITIVE);
        f = f.max(nf);
        x = next;
        if done {
            break;
        }
    }
    trace
}

fn column_pnorm(m: &dyn MatVec, p: f64) -> Vec<f64> {
    let mut acc = vec![0.0f64; m.ncols()];
    m.for_each_nonzero(&mut |_, j, v| acc[j] += v.norm().powf(p));
    acc.into_iter().map(|s| s.powf(1.0 / p)).collect()
}

/// Start vectors: coordinate vectors followed by seeded random points.
/// The random sequence depends only on the seed, so adding restarts only
/// appends starts and the bound is monotone in `restarts`.
fn starts(m: &dyn MatVec, p: f64, opts: &AscentOptions) -> Vec<Vec<C64>> {
    let n = m.ncols();
    let mut out = Vec::new();
    let coords: Vec<usize> = if n <= opts.coordinate_cap {
        (0..n).collect()
    } else {
        let norms = column_pnorm(m, p);
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|a, b| norms[*b].total_cmp(&norms[*a]).then(a.cmp(b)));
        idx.truncate(32);
        idx
    };
    for k in coords {
        let mut e = vec![ZERO; n];
        e[k] = C64::new(1.0, 0.0);
        out.push(e);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.restarts {
        let v: Vec<C64> = (0..n)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let s = pnorm(&v, p);
        out.push(if s > 0.0 { v.iter().map(|z| z / s).collect() } else { v });
    }
    out
}

/// Best lower bound and its maximizer for a counting-measure matrix.
pub fn lower_bound(m: &dyn MatVec, p: f64, opts: &AscentOptions) -> (f64, Vec<C64>) {
    let mut best = 0.0;
    let mut best_x = vec![ZERO; m.ncols()];
    if m.ncols() == 0 || m.nrows() == 0 {
        return (best, best_x);
    }
    for x0 in starts(m, p, opts) {
        let t = ascent_from(m, p, &x0, opts);
        let b = t.best();
        if b > best {
            best = b;
            best_x = t.best_x;
        }
    }
    (best, best_x)
}

/// Lower bound on `‖T‖_{p→p}` from multistart ascent; deterministic in `seed`.
pub fn opnorm_lower(t: &LinOp, restarts: usize, seed: u64) -> f64 {
    let opts = AscentOptions {
        restarts,
        seed,
        ..AscentOptions::default()
    };
    let m = t.counting_matrix();
    lower_bound(&m, t.exponent().p(), &opts).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::PExponent;
    use crate::linop::CMatrix;
    use crate::space::LpSpace;

    fn e(p: f64) -> PExponent {
        PExponent::new(p).unwrap()
    }

    #[test]
    fn identity_is_exactly_one() {
        for p in [1.0, 1.5, 2.0, 3.0] {
            let id = LinOp::identity(LpSpace::counting(4, e(p)));
            assert_eq!(opnorm_lower(&id, 4, 1), 1.0);
        }
    }

    #[test]
    fn diagonal_and_all_ones() {
        let d = LinOp::from_real_rows(&[&[3.0, 0.0], &[0.0, 1.0]], e(1.5));
        assert!((opnorm_lower(&d, 4, 7) - 3.0).abs() < 1e-12);
        let ones = LinOp::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]], e(2.0));
        assert!((opnorm_lower(&ones, 4, 7) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn deterministic_and_monotone_in_restarts() {
        let m = CMatrix::from_fn(4, 4, |i, j| C64::new(((i * 3 + j * 5) % 7) as f64 - 3.0, (i as f64 - j as f64) * 0.3));
        let t = LinOp::counting(m, e(2.7));
        assert_eq!(opnorm_lower(&t, 5, 11), opnorm_lower(&t, 5, 11));
        let mut prev = 0.0;
        for r in 0..6 {
            let v = opnorm_lower(&t, r, 11);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn objective_never_decreases() {
        let m = CMatrix::from_fn(5, 5, |i, j| C64::new(((i * 7 + j * 2) % 5) as f64 - 2.0, ((i + j) % 3) as f64 - 1.0));
        for p in [1.0, 1.3, 2.0, 3.5] {
            let x0 = vec![C64::new(1.0, 0.5); 5];
            let t = ascent_from(&m, p, &x0, &AscentOptions::default());
            for w in t.objective.windows(2) {
                assert!(w[1] >= w[0] * (1.0 - 1e-12), "p={p}: {} -> {}", w[0], w[1]);
            }
        }
    }
}
