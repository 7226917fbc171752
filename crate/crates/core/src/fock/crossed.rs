//! Truncated Fock representation of `((A, A), φ_A)` for a finite-dimensional
//! algebra `A ⊂ L(L^p(μ))` with an isometric automorphism `φ`.
//!
//! The space is `ℓ^p({0..N}) ⊗ L^p(μ)`; level `n` is a copy of `μ`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use super::{LevelLayout, LeveledOp, Window};
use crate::error::{Error, Result};
use crate::exponent::PExponent;
use crate::linop::{matrix_json, max_abs_diff, CMatrix, C64, ZERO};
use crate::modules::MatrixAlgebra;
use crate::norm::{certified_norm, CertifyOptions, NormBracket};
use crate::space::{FiniteMeasureSpace, LpSpace};
use crate::sparse::SparseMatrix;

pub const DYN_TOL: f64 = 1e-10;
/// Allowed gap between overlapping norm brackets.
pub const NORM_SLACK: f64 = 1e-6;

/// An automorphism of `A`, either conjugation by a permutation of the points
/// of `μ` or a linear map on the basis coordinates.
#[derive(Debug, Clone)]
pub enum Automorphism {
    /// `φ(a)[π(i), π(j)] = a[i, j]`.
    Conjugation { perm: Vec<usize>, inverse: Vec<usize> },
    /// Column `k` of `forward` holds the coordinates of `φ(b_k)`.
    Basis { forward: CMatrix, backward: CMatrix },
}

#[derive(Debug, Clone)]
pub struct DynSystem {
    algebra: MatrixAlgebra,
    phi: Automorphism,
    unit: Option<CMatrix>,
}

fn invert_perm(perm: &[usize]) -> Option<Vec<usize>> {
    let mut inv = vec![usize::MAX; perm.len()];
    for (i, &j) in perm.iter().enumerate() {
        if j >= perm.len() || inv[j] != usize::MAX {
            return None;
        }
        inv[j] = i;
    }
    Some(inv)
}

fn conjugate(a: &CMatrix, perm: &[usize]) -> CMatrix {
    let n = perm.len();
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(perm[i], perm[j])] = a[(i, j)];
        }
    }
    out
}

impl DynSystem {
    /// Conjugation by the permutation `i ↦ perm[i]` of the points of `μ`.
    pub fn conjugation(algebra: MatrixAlgebra, perm: Vec<usize>) -> Result<Self> {
        let n = algebra.ambient().dim();
        if perm.len() != n {
            return Err(Error::InvalidDynamics(format!(
                "permutation of length {} on a space of dimension {n}",
                perm.len()
            )));
        }
        let inverse = invert_perm(&perm)
            .ok_or_else(|| Error::InvalidDynamics(format!("{perm:?} is not a permutation")))?;
        let w = algebra.ambient().weights();
        if perm.iter().enumerate().any(|(i, &j)| w[i] != w[j]) {
            return Err(Error::InvalidDynamics(
                "permutation does not preserve the measure".into(),
            ));
        }
        Self::validated(algebra, Automorphism::Conjugation { perm, inverse })
    }

    /// `φ` given on basis coordinates.
    pub fn from_basis_map(algebra: MatrixAlgebra, forward: CMatrix) -> Result<Self> {
        let k = algebra.dim();
        if forward.shape() != (k, k) {
            return Err(Error::InvalidDynamics(format!(
                "φ must be a {k}x{k} coordinate matrix, got {}x{}",
                forward.nrows(),
                forward.ncols()
            )));
        }
        let backward = forward
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidDynamics("φ is not invertible".into()))?;
        Self::validated(algebra, Automorphism::Basis { forward, backward })
    }

    fn validated(algebra: MatrixAlgebra, phi: Automorphism) -> Result<Self> {
        let unit = algebra.unit().map(|u| u.into_matrix());
        let sys = Self { algebra, phi, unit };
        sys.validate()?;
        Ok(sys)
    }

    /// Homomorphism, invertibility and isometry on basis elements and a few
    /// seeded random elements.
    fn validate(&self) -> Result<()> {
        let basis = self.algebra.basis_matrices();
        let names = self.algebra.names();
        for (i, a) in basis.iter().enumerate() {
            let fa = self.apply(a, 1);
            if !self.algebra.span().contains(&fa, DYN_TOL) {
                return Err(Error::InvalidDynamics(format!("φ({}) leaves A", names[i])));
            }
            let back = self.apply(&fa, -1);
            if max_abs_diff(&back, a) > DYN_TOL {
                return Err(Error::InvalidDynamics(format!("φ⁻¹(φ({})) differs from it", names[i])));
            }
            for (j, b) in basis.iter().enumerate() {
                let lhs = self.apply(&(a * b), 1);
                let rhs = &fa * self.apply(b, 1);
                if max_abs_diff(&lhs, &rhs) > DYN_TOL * (1.0 + crate::linop::max_abs(&lhs)) {
                    return Err(Error::InvalidDynamics(format!(
                        "φ({} {}) differs from φ({})φ({})",
                        names[i], names[j], names[i], names[j]
                    )));
                }
            }
        }
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0x5eed);
        let samples: Vec<CMatrix> = basis
            .iter()
            .cloned()
            .chain((0..4).map(|_| self.random_element(&mut rng, false)))
            .collect();
        let opts = CertifyOptions {
            grid_resolution: 32,
            target_width: 1e-6,
            ..CertifyOptions::default()
        };
        for a in &samples {
            let na = self.norm(a, &opts);
            let nfa = self.norm(&self.apply(a, 1), &opts);
            if na.lower > nfa.upper + NORM_SLACK || nfa.lower > na.upper + NORM_SLACK {
                return Err(Error::InvalidDynamics(format!(
                    "φ is not isometric: ‖a‖ ∈ [{}, {}], ‖φ(a)‖ ∈ [{}, {}]",
                    na.lower, na.upper, nfa.lower, nfa.upper
                )));
            }
        }
        Ok(())
    }

    /// Uses `e` in place of the identity when factorizing elements. `e` must
    /// be a unit for `A` fixed by `φ`.
    pub fn with_unit(mut self, e: CMatrix) -> Result<Self> {
        if !self.algebra.span().contains(&e, DYN_TOL) {
            return Err(Error::NoFactorization("the supplied unit is not in A".into()));
        }
        for b in self.algebra.basis_matrices() {
            if max_abs_diff(&(&e * b), b) > DYN_TOL || max_abs_diff(&(b * &e), b) > DYN_TOL {
                return Err(Error::NoFactorization("the supplied element is not a unit for A".into()));
            }
        }
        if max_abs_diff(&self.apply(&e, 1), &e) > DYN_TOL {
            return Err(Error::NoFactorization("φ moves the supplied unit".into()));
        }
        self.unit = Some(e);
        Ok(self)
    }

    pub fn algebra(&self) -> &MatrixAlgebra {
        &self.algebra
    }

    pub fn automorphism(&self) -> &Automorphism {
        &self.phi
    }

    pub fn exponent(&self) -> PExponent {
        self.algebra.exponent()
    }

    pub fn fibre(&self) -> usize {
        self.algebra.ambient().dim()
    }

    /// The unit used for explicit factorizations.
    pub fn unit(&self) -> Result<&CMatrix> {
        self.unit
            .as_ref()
            .ok_or_else(|| Error::NoFactorization("A is not unital and no unit was supplied".into()))
    }

    /// `φ^k(a)` for any integer `k`.
    pub fn apply(&self, a: &CMatrix, k: i64) -> CMatrix {
        match &self.phi {
            Automorphism::Conjugation { perm, inverse } => {
                let step = if k >= 0 { perm } else { inverse };
                let mut out = a.clone();
                for _ in 0..k.unsigned_abs() {
                    out = conjugate(&out, step);
                }
                out
            }
            Automorphism::Basis { forward, backward } => {
                let (coords, _) = self.algebra.coordinates(a);
                let mut c = nalgebra::DVector::from_vec(coords);
                let step = if k >= 0 { forward } else { backward };
                for _ in 0..k.unsigned_abs() {
                    c = step * c;
                }
                self.algebra.span().combine(c.as_slice())
            }
        }
    }

    /// Operator norm of an element on `L^p(μ)`.
    pub fn norm(&self, a: &CMatrix, opts: &CertifyOptions) -> NormBracket {
        certified_norm(&self.algebra.op(a.clone()), opts)
    }

    /// Random combination of the basis. With `integer` set the coefficients
    /// are Gaussian integers in `[-3, 3]`, so products of 0/1 basis matrices
    /// stay exact in floating point.
    pub fn random_element(&self, rng: &mut impl Rng, integer: bool) -> CMatrix {
        let coeffs: Vec<C64> = (0..self.algebra.dim())
            .map(|_| {
                if integer {
                    C64::new(rng.gen_range(-3..=3) as f64, rng.gen_range(-3..=3) as f64)
                } else {
                    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                }
            })
            .collect();
        self.algebra.span().combine(&coeffs)
    }

    /// `count` integer-valued elements drawn from a ChaCha stream seeded
    /// with `seed`.
    pub fn seeded_elements(&self, seed: u64, count: usize) -> Vec<CMatrix> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| self.random_element(&mut rng, true)).collect()
    }

    pub fn to_json(&self) -> (String, String) {
        let basis = self
            .algebra
            .names()
            .iter()
            .zip(self.algebra.basis_matrices())
            .map(|(n, m)| NamedMatrix {
                name: n.clone(),
                matrix: m.clone(),
            })
            .collect();
        let alg = AlgebraJson {
            mu: Some((*self.algebra.ambient().space).clone()),
            basis,
        };
        let phi = match &self.phi {
            Automorphism::Conjugation { perm, .. } => PhiJson::Permutation { permutation: perm.clone() },
            Automorphism::Basis { forward, .. } => PhiJson::Matrix { matrix: forward.clone() },
        };
        (
            serde_json::to_string_pretty(&alg).expect("serializes"),
            serde_json::to_string_pretty(&phi).expect("serializes"),
        )
    }

    /// Reads an algebra file `{mu?, basis: [{name, matrix}]}` and an
    /// automorphism file, either `{permutation: [...]}` or `{matrix: ...}`
    /// with coordinates of `φ(b_k)` in column `k`.
    pub fn from_json(algebra: &str, phi: &str, p: PExponent) -> Result<Self> {
        let alg: AlgebraJson = serde_json::from_str(algebra)?;
        let n = alg
            .basis
            .first()
            .map(|b| b.matrix.nrows())
            .ok_or_else(|| Error::InvalidAlgebra("empty basis".into()))?;
        let mu = alg.mu.unwrap_or_else(|| FiniteMeasureSpace::counting(n));
        let (names, basis) = alg.basis.into_iter().map(|b| (b.name, b.matrix)).unzip();
        let algebra = MatrixAlgebra::new(LpSpace::new(mu, p), names, basis)?;
        match serde_json::from_str::<PhiJson>(phi)? {
            PhiJson::Permutation { permutation } => Self::conjugation(algebra, permutation),
            PhiJson::Matrix { matrix } => Self::from_basis_map(algebra, matrix),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct NamedMatrix {
    name: String,
    #[serde(with = "matrix_json")]
    matrix: CMatrix,
}

#[derive(Serialize, Deserialize)]
struct AlgebraJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mu: Option<FiniteMeasureSpace>,
    basis: Vec<NamedMatrix>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PhiJson {
    Permutation { permutation: Vec<usize> },
    Matrix {
        #[serde(with = "matrix_json")]
        matrix: CMatrix,
    },
}

/// Levels `0..=N` of `ℓ^p(ℤ_{≥0}) ⊗ L^p(μ)`.
#[derive(Debug, Clone)]
pub struct CrossedTruncation {
    system: Arc<DynSystem>,
    levels: usize,
    layout: Arc<LevelLayout>,
}

impl CrossedTruncation {
    pub fn new(system: Arc<DynSystem>, levels: usize) -> Result<Self> {
        if levels == 0 {
            return Err(Error::InvalidTruncation("need at least one level above 0".into()));
        }
        let layout = Arc::new(LevelLayout::uniform(levels, system.algebra.ambient().weights()));
        Ok(Self {
            system,
            levels,
            layout,
        })
    }

    pub fn system(&self) -> &DynSystem {
        &self.system
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn fibre(&self) -> usize {
        self.system.fibre()
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn layout(&self) -> &Arc<LevelLayout> {
        &self.layout
    }

    pub fn exponent(&self) -> PExponent {
        self.system.exponent()
    }

    /// `(level, point)` of a flat index.
    pub fn split(&self, flat: usize) -> (usize, usize) {
        self.layout.split(flat)
    }

    fn full(&self) -> Window {
        Window {
            lo: 0,
            hi: self.levels,
        }
    }

    fn check(&self, a: &CMatrix) -> Result<()> {
        let k = self.fibre();
        if a.shape() != (k, k) {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} element on a fibre of dimension {k}",
                a.nrows(),
                a.ncols()
            )));
        }
        Ok(())
    }

    /// Operator with one shift whose level-`n` block is `block(n)`.
    fn blocks(
        &self,
        shift: i64,
        window: Window,
        mut block: impl FnMut(usize) -> Option<CMatrix>,
    ) -> Result<LeveledOp> {
        LeveledOp::from_blocks(self.layout.clone(), self.exponent(), shift, window, |n| {
            block(n).map(|m| dense_entries(&m))
        })
    }

    /// `φ_A^∞(a)`: block `φ^n(a)` at level `n`.
    pub fn phi_a_inf(&self, a: &CMatrix) -> Result<LeveledOp> {
        self.check(a)?;
        self.blocks(0, self.full(), |n| Some(self.system.apply(a, n as i64)))
    }

    /// `c_A(a)`: level `n` to `n + 1` through `φ^n(a)`.
    pub fn c_a(&self, a: &CMatrix) -> Result<LeveledOp> {
        self.check(a)?;
        let window = Window {
            lo: 0,
            hi: self.levels - 1,
        };
        self.blocks(1, window, |n| Some(self.system.apply(a, n as i64)))
    }

    /// `v_A(a)`: level `m ≥ 1` to `m − 1` through `φ^{m−1}(a)`.
    pub fn v_a(&self, a: &CMatrix) -> Result<LeveledOp> {
        self.check(a)?;
        self.blocks(-1, self.full(), |m| Some(self.system.apply(a, m as i64 - 1)))
    }

    /// `Θ_A(a)`: block `φ^{n−1}(a)` at level `n ≥ 1`, zero at level 0.
    pub fn theta_a(&self, a: &CMatrix) -> Result<LeveledOp> {
        self.check(a)?;
        self.blocks(0, self.full(), |n| {
            (n > 0).then(|| self.system.apply(a, n as i64 - 1))
        })
    }

    /// `u_ℤ(n)`: moves level `ℓ` to `ℓ − n`, killing levels below `n` when
    /// `n ≥ 0`; for `n < 0` the top `|n|` levels leave the window.
    pub fn u_z(&self, n: i64) -> Result<LeveledOp> {
        let k = self.fibre();
        let id = CMatrix::identity(k, k);
        let window = if n >= 0 {
            self.full()
        } else {
            let up = n.unsigned_abs() as usize;
            if up > self.levels {
                return Err(Error::EmptyWindow);
            }
            Window {
                lo: 0,
                hi: self.levels - up,
            }
        };
        self.blocks(-n, window, |l| (l as i64 >= n).then(|| id.clone()))
    }

    /// `θ_{δ_i, δ_j} ⊗ x`: level `j` to level `i` through `x`.
    pub fn level_rank_one(&self, i: usize, j: usize, x: &CMatrix) -> Result<LeveledOp> {
        self.check(x)?;
        if i > self.levels || j > self.levels {
            return Err(Error::DimensionMismatch(format!(
                "levels {i}, {j} outside 0..={}",
                self.levels
            )));
        }
        self.blocks(i as i64 - j as i64, self.full(), |l| (l == j).then(|| x.clone()))
    }

    fn sum(&self, terms: Vec<LeveledOp>) -> Result<LeveledOp> {
        let mut it = terms.into_iter();
        let first = it.next().unwrap_or_else(|| self.zero());
        it.try_fold(first, |acc, t| acc.add(&t))
    }

    pub fn zero(&self) -> LeveledOp {
        LeveledOp::identity(self.layout.clone(), self.exponent()).scale(ZERO)
    }

    pub fn identity(&self) -> LeveledOp {
        LeveledOp::identity(self.layout.clone(), self.exponent())
    }

    /// `Σ_{k<n} θ_{δ_k,δ_k} ⊗ φ^{k−n}(a)`, the finite-rank gap between
    /// `u(−n)φ_A^∞(a)u(n)` and `φ_A^∞(φ^{−n}(a))`.
    pub fn covariance_correction(&self, n: usize, a: &CMatrix) -> Result<LeveledOp> {
        let terms = (0..n.min(self.levels + 1))
            .map(|k| self.level_rank_one(k, k, &self.system.apply(a, k as i64 - n as i64)))
            .collect::<Result<Vec<_>>>()?;
        self.sum(terms)
    }

    /// The finite-rank gap `u(n+m) − u(n)u(m)` for `n < 0 ≤ m`:
    /// `Σ_{j<−n} θ_{δ_j, δ_{j+n+m}} ⊗ id` when `n + m ≥ 0`, and
    /// `Σ_{j<m} θ_{δ_{j−n−m}, δ_j} ⊗ id` when `n + m < 0`.
    pub fn product_correction(&self, n: i64, m: i64) -> Result<LeveledOp> {
        if n >= 0 || m < 0 {
            return Ok(self.zero());
        }
        let k = self.fibre();
        let id = CMatrix::identity(k, k);
        let top = self.levels as i64;
        let pairs: Vec<(i64, i64)> = if n + m >= 0 {
            (0..-n).map(|j| (j, j + n + m)).collect()
        } else {
            (0..m).map(|j| (j - n - m, j)).collect()
        };
        let terms = pairs
            .into_iter()
            .filter(|&(i, j)| i <= top && j <= top)
            .map(|(i, j)| self.level_rank_one(i as usize, j as usize, &id))
            .collect::<Result<Vec<_>>>()?;
        self.sum(terms)
    }
}

fn dense_entries(m: &CMatrix) -> Vec<(usize, usize, C64)> {
    let mut out = Vec::new();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if v != ZERO {
                out.push((i, j, v));
            }
        }
    }
    out
}

/// Residuals of the six covariance relations for a pair `(a, b)`.
#[derive(Debug, Clone, Serialize)]
pub struct CrossedRelations {
    /// `c_A(ab) = c_A(a)φ_A^∞(b)`.
    pub c_right: f64,
    /// `c_A(φ(a)b) = φ_A^∞(a)c_A(b)`.
    pub c_left: f64,
    /// `v_A(ab) = φ_A^∞(a)v_A(b)`.
    pub v_left: f64,
    /// `v_A(aφ(b)) = v_A(a)φ_A^∞(b)`.
    pub v_right: f64,
    /// `v_A(a)c_A(b) = φ_A^∞(ab)`.
    pub vc: f64,
    /// `c_A(a)v_A(b) = Θ_A(ab)`.
    pub cv: f64,
    /// `Θ_A(ab) = Θ_A(a)Θ_A(b)`.
    pub theta_hom: f64,
}

impl CrossedRelations {
    pub fn max_residual(&self) -> f64 {
        [
            self.c_right,
            self.c_left,
            self.v_left,
            self.v_right,
            self.vc,
            self.cv,
            self.theta_hom,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn crossed_relations(tr: &CrossedTruncation, a: &CMatrix, b: &CMatrix) -> Result<CrossedRelations> {
    let sys = tr.system();
    let ab = a * b;
    let pa = tr.phi_a_inf(a)?;
    let pb = tr.phi_a_inf(b)?;
    Ok(CrossedRelations {
        c_right: tr.c_a(&ab)?.residual(&tr.c_a(a)?.compose(&pb)?)?,
        c_left: tr.c_a(&(sys.apply(a, 1) * b))?.residual(&pa.compose(&tr.c_a(b)?)?)?,
        v_left: tr.v_a(&ab)?.residual(&pa.compose(&tr.v_a(b)?)?)?,
        v_right: tr.v_a(&(a * sys.apply(b, 1)))?.residual(&tr.v_a(a)?.compose(&pb)?)?,
        vc: tr.v_a(a)?.compose(&tr.c_a(b)?)?.residual(&tr.phi_a_inf(&ab)?)?,
        cv: tr.c_a(a)?.compose(&tr.v_a(b)?)?.residual(&tr.theta_a(&ab)?)?,
        theta_hom: tr.theta_a(&ab)?.residual(&tr.theta_a(a)?.compose(&tr.theta_a(b)?)?)?,
    })
}

/// One instance of the translation identities. Conditions: (1) `u(n)φ^∞(a)u(−n)`, (2) `u(−n)φ^∞(a)u(n)`,
/// (3) `u(n)u(m)` with equal signs, (4)/(5) `u(n)u(m)` with `n < 0 ≤ m`.
#[derive(Debug, Clone, Serialize)]
pub struct TranslationCheck {
    pub condition: u8,
    pub n: i64,
    pub m: i64,
    pub residual: f64,
    /// Rank of the finite-rank correction involved (0 when there is none).
    pub correction_rank: usize,
}

fn rank(op: &LeveledOp) -> usize {
    op.window_matrix().to_dense().rank(1e-12)
}

/// Every instance of the five translation identities with `|n|, |m| ≤ N`
/// whose window is nonempty.
pub fn translation_checks(tr: &CrossedTruncation, a: &CMatrix) -> Result<Vec<TranslationCheck>> {
    let sys = tr.system();
    let top = tr.levels() as i64;
    let mut out = Vec::new();
    for n in 0..=top {
        let lhs = tr.u_z(n)?.compose(&tr.phi_a_inf(a)?)?.compose(&tr.u_z(-n)?)?;
        let rhs = tr.phi_a_inf(&sys.apply(a, n))?;
        out.push(TranslationCheck {
            condition: 1,
            n,
            m: -n,
            residual: lhs.residual(&rhs)?,
            correction_rank: 0,
        });
    }
    for n in 1..=top {
        let lhs = tr.u_z(-n)?.compose(&tr.phi_a_inf(a)?)?.compose(&tr.u_z(n)?)?;
        let corr = tr.covariance_correction(n as usize, a)?;
        let rhs = tr.phi_a_inf(&sys.apply(a, -n))?.sub(&corr)?;
        out.push(TranslationCheck {
            condition: 2,
            n,
            m: 0,
            residual: lhs.residual(&rhs)?,
            correction_rank: rank(&corr),
        });
    }
    for n in -top..=top {
        for m in -top..=top {
            if (n + m).abs() > top {
                continue;
            }
            let condition = match (n.signum(), m.signum()) {
                (1, -1) => continue,
                (-1, 0 | 1) if n + m >= 0 => 4,
                (-1, 0 | 1) => 5,
                _ => 3,
            };
            let lhs = match tr.u_z(n)?.compose(&tr.u_z(m)?) {
                Ok(op) => op,
                Err(Error::EmptyWindow) => continue,
                Err(e) => return Err(e),
            };
            let corr = tr.product_correction(n, m)?;
            let rhs = tr.u_z(n + m)?.sub(&corr)?;
            out.push(TranslationCheck {
                condition,
                n,
                m,
                residual: lhs.residual(&rhs)?,
                correction_rank: rank(&corr),
            });
        }
    }
    Ok(out)
}

/// Bracket for a word next to the bracket for its closed-form element.
#[derive(Debug, Clone, Serialize)]
pub struct WordNormCheck {
    pub word: NormBracket,
    pub closed_form: NormBracket,
}

impl WordNormCheck {
    /// Both brackets are narrower than `tol` and overlap up to `tol`.
    pub fn agrees(&self, tol: f64) -> bool {
        self.word.width() <= tol
            && self.closed_form.width() <= tol
            && self.word.lower <= self.closed_form.upper + tol
            && self.closed_form.lower <= self.word.upper + tol
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WordNorms {
    pub creation: Option<WordNormCheck>,
    pub annihilation: Option<WordNormCheck>,
    pub mixed: Option<WordNormCheck>,
}

/// `φ^{n−1}(a_1)⋯φ(a_{n−1})a_n`.
pub fn creation_word_element(sys: &DynSystem, a: &[CMatrix]) -> CMatrix {
    let n = a.len() as i64;
    let k = sys.fibre();
    a.iter()
        .enumerate()
        .fold(CMatrix::identity(k, k), |acc, (i, ai)| acc * sys.apply(ai, n - 1 - i as i64))
}

/// `b_1φ(b_2)⋯φ^{m−1}(b_m)`.
pub fn annihilation_word_element(sys: &DynSystem, b: &[CMatrix]) -> CMatrix {
    let k = sys.fibre();
    b.iter()
        .enumerate()
        .fold(CMatrix::identity(k, k), |acc, (i, bi)| acc * sys.apply(bi, i as i64))
}

fn product(ops: Vec<LeveledOp>, tr: &CrossedTruncation) -> Result<LeveledOp> {
    ops.iter().try_rfold(tr.identity(), |acc, op| op.compose(&acc))
}

/// Norms of `c_A(a_1)⋯c_A(a_n)`, `v_A(b_1)⋯v_A(b_m)` and of their product,
/// each beside the norm of the element it reduces to. The product reduces
/// to `φ^{n−1}(a_1)⋯a_n · b_1φ(b_2)⋯φ^{m−1}(b_m)`.
pub fn word_norms(
    a: &[CMatrix],
    b: &[CMatrix],
    tr: &CrossedTruncation,
    opts: &CertifyOptions,
) -> Result<WordNorms> {
    let sys = tr.system();
    let cw = product(a.iter().map(|x| tr.c_a(x)).collect::<Result<_>>()?, tr)?;
    let vw = product(b.iter().map(|x| tr.v_a(x)).collect::<Result<_>>()?, tr)?;
    let alpha = creation_word_element(sys, a);
    let beta = annihilation_word_element(sys, b);
    let check = |op: &LeveledOp, el: &CMatrix| WordNormCheck {
        word: op.norm_on_window(opts),
        closed_form: sys.norm(el, opts),
    };
    Ok(WordNorms {
        creation: (!a.is_empty()).then(|| check(&cw, &alpha)),
        annihilation: (!b.is_empty()).then(|| check(&vw, &beta)),
        mixed: if a.is_empty() || b.is_empty() {
            None
        } else {
            Some(check(&cw.compose(&vw)?, &(&alpha * &beta)))
        },
    })
}

/// Sparse view of a block-diagonal operator given level by level.
pub fn block_diagonal(tr: &CrossedTruncation, blocks: &[CMatrix]) -> Result<LeveledOp> {
    let n = tr.dim();
    let mut trip = Vec::new();
    for (l, m) in blocks.iter().enumerate().take(tr.levels() + 1) {
        let off = tr.layout().offset(l);
        trip.extend(dense_entries(m).into_iter().map(|(i, j, v)| (off + i, off + j, v)));
    }
    LeveledOp::new(
        tr.layout().clone(),
        tr.exponent(),
        SparseMatrix::from_triplets(n, n, trip),
        [0].into(),
        tr.full(),
    )
}
