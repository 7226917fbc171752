//! Bracketed estimate of how far a module is from being C*-like:
//! `‖x‖ - sup_{‖y‖=1} ‖yx‖` and `‖y‖ - sup_{‖x‖=1} ‖yx‖`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linop::{CMatrix, C64, ZERO};
use crate::norm::{certify_matrix, lower_bound, AscentOptions, CertifyOptions, NormBracket};

use super::span::Span;
use super::triple::{check_module_axioms, ModuleTriple, DEFAULT_TOL};

pub const DEFAULT_BUDGET: usize = 64;
const CLIMB_STEPS: usize = 40;
const CERTIFIED_CANDIDATES: usize = 3;

/// Interval for a signed quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DefectBracket {
    pub lower: f64,
    pub upper: f64,
}

impl DefectBracket {
    fn max_of(items: impl IntoIterator<Item = DefectBracket>) -> DefectBracket {
        items.into_iter().fold(
            DefectBracket {
                lower: f64::NEG_INFINITY,
                upper: f64::NEG_INFINITY,
            },
            |a, b| DefectBracket {
                lower: a.lower.max(b.lower),
                upper: a.upper.max(b.upper),
            },
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElementDefect {
    pub element: String,
    pub norm: NormBracket,
    pub sup: NormBracket,
    pub defect: DefectBracket,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CStarDefect {
    pub module_id: String,
    pub defect_x: DefectBracket,
    pub defect_y: DefectBracket,
    pub x_elements: Vec<ElementDefect>,
    pub y_elements: Vec<ElementDefect>,
}

impl CStarDefect {
    /// CSV rows `(module-id, condition, defect, lower, upper)`; the defect
    /// column carries the upper end.
    pub fn csv_rows(&self) -> Vec<String> {
        [("defect_X", self.defect_x), ("defect_Y", self.defect_y)]
            .iter()
            .map(|(name, d)| format!("{},{},{:e},{:e},{:e}", self.module_id, name, d.upper, d.lower, d.upper))
            .collect()
    }
}

pub(crate) fn element_norm(m: &CMatrix, p: f64) -> NormBracket {
    let opts = CertifyOptions {
        grid_resolution: 32,
        target_width: 1e-6,
        ..CertifyOptions::default()
    };
    certify_matrix(m, p, &opts)
}

fn quick_norm(m: &CMatrix, p: f64) -> f64 {
    let opts = AscentOptions {
        restarts: 2,
        max_iter: 100,
        ..AscentOptions::default()
    };
    lower_bound(m, p, &opts).0
}

/// `ψ` with `Σ ψ_i η_i = ‖η‖_p` and `‖ψ‖_q = 1`.
fn dual_functional(eta: &[C64], p: f64) -> Vec<C64> {
    let n = eta.iter().map(|z| z.norm().powf(p)).sum::<f64>().powf(1.0 / p);
    if n == 0.0 {
        return vec![ZERO; eta.len()];
    }
    if p == 1.0 {
        return eta
            .iter()
            .map(|z| if z.norm() > 0.0 { z.conj() / z.norm() } else { ZERO })
            .collect();
    }
    eta.iter()
        .map(|z| {
            let m = z.norm();
            if m == 0.0 {
                ZERO
            } else {
                z.conj() * (m.powf(p - 2.0) / n.powf(p - 1.0))
            }
        })
        .collect()
}

fn outer(u: &[C64], v: &[C64]) -> CMatrix {
    CMatrix::from_fn(u.len(), v.len(), |i, j| u[i] * v[j])
}

/// Conjugates a weighted matrix into counting coordinates.
fn to_counting(m: &CMatrix, row_w: &[f64], col_w: &[f64], p: f64) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        m[(i, j)] * (row_w[i].powf(1.0 / p) / col_w[j].powf(1.0 / p))
    })
}

/// `sup_{u ∈ span, ‖u‖ = 1} ‖f(u)‖` bracketed.
struct SupProblem<'a> {
    span: &'a Span,
    p: f64,
    apply: &'a dyn Fn(&CMatrix) -> CMatrix,
    /// Bound used when nothing sharper is known.
    fallback_upper: f64,
}

impl SupProblem<'_> {
    fn ratio(&self, u: &CMatrix) -> f64 {
        let nu = quick_norm(u, self.p);
        if nu == 0.0 {
            return 0.0;
        }
        quick_norm(&(self.apply)(u), self.p) / nu
    }

    fn solve(&self, seeds: Vec<CMatrix>, budget: usize, seed: u64) -> NormBracket {
        let gens = self.span.generators();
        let images: Vec<CMatrix> = gens.iter().map(|g| (self.apply)(g)).collect();
        if images.iter().all(|m| m.iter().all(|z| *z == ZERO)) {
            return NormBracket::exact(0.0);
        }
        let k = gens.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut starts: Vec<Vec<C64>> = (0..k)
            .map(|i| {
                let mut c = vec![ZERO; k];
                c[i] = C64::new(1.0, 0.0);
                c
            })
            .collect();
        for s in seeds {
            starts.push(self.span.coordinates(&self.span.project(&s)).0);
        }
        for _ in 0..budget {
            starts.push(
                (0..k)
                    .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect(),
            );
        }
        let mut scored: Vec<(f64, Vec<C64>)> = starts
            .into_iter()
            .map(|c| (self.ratio(&self.span.combine(&c)), c))
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0));
        scored.truncate(CERTIFIED_CANDIDATES.max(1));
        let mut finals = Vec::new();
        for (mut best, mut c) in scored {
            let mut step = 0.5;
            for _ in 0..CLIMB_STEPS {
                let trial: Vec<C64> = c
                    .iter()
                    .map(|z| z + C64::new(rng.gen_range(-step..step), rng.gen_range(-step..step)))
                    .collect();
                let r = self.ratio(&self.span.combine(&trial));
                if r > best {
                    best = r;
                    c = trial;
                } else {
                    step *= 0.8;
                }
            }
            finals.push(c);
        }
        let mut lower: f64 = 0.0;
        for c in finals {
            let u = self.span.combine(&c);
            let nu = element_norm(&u, self.p);
            if nu.upper > 0.0 {
                lower = lower.max(element_norm(&(self.apply)(&u), self.p).lower / nu.upper);
            }
        }
        let mut upper = self.fallback_upper;
        if k == 1 {
            let nu = element_norm(&gens[0], self.p);
            let ni = element_norm(&images[0], self.p);
            if nu.lower > 0.0 {
                upper = upper.min(ni.upper / nu.lower);
            }
        }
        let lower = lower.min(upper);
        NormBracket::new(lower, upper.max(lower))
    }
}

/// Bracketed C*-like defects over the basis elements of `X` and of `Y`.
pub fn cstar_defect(m: &ModuleTriple, sample_budget: usize, seed: u64) -> Result<CStarDefect> {
    let report = check_module_axioms(m, DEFAULT_TOL);
    if !report.pass {
        return Err(Error::InvalidModule(format!("{} fails the module axioms", m.id())));
    }
    let p = m.exponent().p();
    let w0 = m.inner().weights();
    let w1 = m.outer().weights();
    let xs: Vec<CMatrix> = m.x_span().generators().iter().map(|x| to_counting(x, w1, w0, p)).collect();
    let ys: Vec<CMatrix> = m.y_span().generators().iter().map(|y| to_counting(y, w0, w1, p)).collect();
    let (n1, n0) = m.x_span().shape();
    let xspan = Span::new(n1, n0, xs.clone())?;
    let yspan = Span::new(n0, n1, ys.clone())?;
    let opts = AscentOptions::default();

    let mut x_elements = Vec::new();
    for (i, (name, x)) in m.x_names().iter().zip(&xs).enumerate() {
        let norm = element_norm(x, p);
        let (_, xi) = lower_bound(x, p, &opts);
        let eta: Vec<C64> = (x * nalgebra::DVector::from_vec(xi.clone())).iter().copied().collect();
        let seed_y = outer(&xi, &dual_functional(&eta, p));
        let apply = |y: &CMatrix| y * x;
        let sup = SupProblem {
            span: &yspan,
            p,
            apply: &apply,
            fallback_upper: norm.upper,
        }
        .solve(vec![seed_y], sample_budget, seed.wrapping_add(i as u64));
        x_elements.push(ElementDefect {
            element: name.clone(),
            norm,
            sup,
            defect: DefectBracket {
                lower: norm.lower - sup.upper,
                upper: norm.upper - sup.lower,
            },
        });
    }
    let mut y_elements = Vec::new();
    for (i, (name, y)) in m.y_names().iter().zip(&ys).enumerate() {
        let norm = element_norm(y, p);
        let (_, eta) = lower_bound(y, p, &opts);
        let zeta: Vec<C64> = (y * nalgebra::DVector::from_vec(eta.clone())).iter().copied().collect();
        let seed_x = outer(&eta, &dual_functional(&zeta, p));
        let apply = |x: &CMatrix| y * x;
        let sup = SupProblem {
            span: &xspan,
            p,
            apply: &apply,
            fallback_upper: norm.upper,
        }
        .solve(vec![seed_x], sample_budget, seed.wrapping_add(1 << 32).wrapping_add(i as u64));
        y_elements.push(ElementDefect {
            element: name.clone(),
            norm,
            sup,
            defect: DefectBracket {
                lower: norm.lower - sup.upper,
                upper: norm.upper - sup.lower,
            },
        });
    }
    Ok(CStarDefect {
        module_id: m.id().to_string(),
        defect_x: DefectBracket::max_of(x_elements.iter().map(|e| e.defect)),
        defect_y: DefectBracket::max_of(y_elements.iter().map(|e| e.defect)),
        x_elements,
        y_elements,
    })
}
