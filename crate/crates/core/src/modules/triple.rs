//! Concrete `L^p`-modules `(X, Y)` over a matrix algebra.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::PExponent;
use crate::linop::{matrix_json, CMatrix, LinOp, C64};
use crate::space::{FiniteMeasureSpace, LpSpace};

use super::algebra::MatrixAlgebra;
use super::span::Span;

pub const DEFAULT_TOL: f64 = 1e-8;

/// `X ⊆ L(L^p(μ0), L^p(μ1))` and `Y ⊆ L(L^p(μ1), L^p(μ0))` given by bases.
#[derive(Debug, Clone)]
pub struct ModuleTriple {
    id: String,
    algebra: MatrixAlgebra,
    outer: LpSpace,
    x_names: Vec<String>,
    y_names: Vec<String>,
    x: Span,
    y: Span,
}

impl ModuleTriple {
    pub fn new(
        id: impl Into<String>,
        algebra: MatrixAlgebra,
        outer: LpSpace,
        x: Vec<(String, CMatrix)>,
        y: Vec<(String, CMatrix)>,
    ) -> Result<Self> {
        if outer.exponent != algebra.exponent() {
            return Err(Error::ExponentMismatch {
                left: algebra.exponent().p(),
                right: outer.exponent.p(),
            });
        }
        let n0 = algebra.ambient().dim();
        let n1 = outer.dim();
        let (x_names, xb): (Vec<_>, Vec<_>) = x.into_iter().unzip();
        let (y_names, yb): (Vec<_>, Vec<_>) = y.into_iter().unzip();
        let x = Span::basis(n1, n0, xb).map_err(|e| Error::InvalidModule(format!("X: {e}")))?;
        let y = Span::basis(n0, n1, yb).map_err(|e| Error::InvalidModule(format!("Y: {e}")))?;
        Ok(Self {
            id: id.into(),
            algebra,
            outer,
            x_names,
            y_names,
            x,
            y,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn algebra(&self) -> &MatrixAlgebra {
        &self.algebra
    }

    pub fn exponent(&self) -> PExponent {
        self.algebra.exponent()
    }

    /// `L^p(μ0)`, where the algebra acts.
    pub fn inner(&self) -> &LpSpace {
        self.algebra.ambient()
    }

    /// `L^p(μ1)`.
    pub fn outer(&self) -> &LpSpace {
        &self.outer
    }

    pub fn x_span(&self) -> &Span {
        &self.x
    }

    pub fn y_span(&self) -> &Span {
        &self.y
    }

    pub fn x_names(&self) -> &[String] {
        &self.x_names
    }

    pub fn y_names(&self) -> &[String] {
        &self.y_names
    }

    pub fn x_op(&self, m: CMatrix) -> LinOp {
        LinOp::new(self.inner().clone(), self.outer.clone(), m).expect("X shape")
    }

    pub fn y_op(&self, m: CMatrix) -> LinOp {
        LinOp::new(self.outer.clone(), self.inner().clone(), m).expect("Y shape")
    }

    pub fn x_basis(&self) -> Vec<LinOp> {
        self.x.generators().iter().map(|m| self.x_op(m.clone())).collect()
    }

    pub fn y_basis(&self) -> Vec<LinOp> {
        self.y.generators().iter().map(|m| self.y_op(m.clone())).collect()
    }

    pub fn x_element(&self, coeffs: &[C64]) -> LinOp {
        self.x_op(self.x.combine(coeffs))
    }

    pub fn y_element(&self, coeffs: &[C64]) -> LinOp {
        self.y_op(self.y.combine(coeffs))
    }

    /// The same module with `X` enlarged by an extra generator.
    pub fn with_extra_x(&self, name: &str, m: CMatrix) -> Result<Self> {
        let mut x: Vec<(String, CMatrix)> =
            self.x_names.iter().cloned().zip(self.x.generators().iter().cloned()).collect();
        x.push((name.to_string(), m));
        let y = self.y_names.iter().cloned().zip(self.y.generators().iter().cloned()).collect();
        ModuleTriple::new(self.id.clone(), self.algebra.clone(), self.outer.clone(), x, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    #[serde(rename = "xa in X")]
    RightAction,
    #[serde(rename = "yx in A")]
    Pairing,
    #[serde(rename = "ay in Y")]
    LeftAction,
}

impl Condition {
    pub fn label(self) -> &'static str {
        match self {
            Condition::RightAction => "xa in X",
            Condition::Pairing => "yx in A",
            Condition::LeftAction => "ay in Y",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairResidual {
    pub condition: Condition,
    pub left: String,
    pub right: String,
    pub residual: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionSummary {
    pub condition: Condition,
    pub worst: f64,
    pub worst_pair: Option<(String, String)>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport {
    pub module_id: String,
    pub tol: f64,
    pub conditions: Vec<ConditionSummary>,
    pub pairs: Vec<PairResidual>,
    pub pass: bool,
}

impl AxiomReport {
    /// CSV rows `(module-id, condition, residual, lower, upper)`.
    pub fn csv_rows(&self) -> Vec<String> {
        self.conditions
            .iter()
            .map(|c| {
                format!(
                    "{},{},{:e},{:e},{:e}",
                    self.module_id,
                    c.condition.label(),
                    c.worst,
                    c.worst,
                    c.worst
                )
            })
            .collect()
    }
}

/// Residuals of `x_i a_k ∈ X`, `y_j x_i ∈ A` and `a_k y_j ∈ Y` over all basis pairs.
pub fn check_module_axioms(m: &ModuleTriple, tol: f64) -> AxiomReport {
    let a = m.algebra.basis_matrices();
    let an = m.algebra.names();
    let mut pairs = Vec::new();
    let mut push = |condition, left: &str, right: &str, span: &Span, prod: CMatrix| {
        pairs.push(PairResidual {
            condition,
            left: left.to_string(),
            right: right.to_string(),
            residual: span.residual(&prod),
            threshold: span.threshold(&prod, tol),
        });
    };
    for (xn, x) in m.x_names.iter().zip(m.x.generators()) {
        for (n, ak) in an.iter().zip(a) {
            push(Condition::RightAction, xn, n, &m.x, x * ak);
        }
    }
    for (yn, y) in m.y_names.iter().zip(m.y.generators()) {
        for (xn, x) in m.x_names.iter().zip(m.x.generators()) {
            push(Condition::Pairing, yn, xn, m.algebra.span(), y * x);
        }
    }
    for (n, ak) in an.iter().zip(a) {
        for (yn, y) in m.y_names.iter().zip(m.y.generators()) {
            push(Condition::LeftAction, n, yn, &m.y, ak * y);
        }
    }
    let conditions: Vec<ConditionSummary> = [Condition::RightAction, Condition::Pairing, Condition::LeftAction]
        .into_iter()
        .map(|c| {
            let rel: Vec<&PairResidual> = pairs.iter().filter(|r| r.condition == c).collect();
            let worst = rel.iter().max_by(|a, b| a.residual.total_cmp(&b.residual));
            ConditionSummary {
                condition: c,
                worst: worst.map_or(0.0, |r| r.residual),
                worst_pair: worst.map(|r| (r.left.clone(), r.right.clone())),
                pass: rel.iter().all(|r| r.residual <= r.threshold),
            }
        })
        .collect();
    let pass = conditions.iter().all(|c| c.pass);
    AxiomReport {
        module_id: m.id.clone(),
        tol,
        conditions,
        pairs,
        pass,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pairing {
    /// Coordinates of `yx` over the algebra basis.
    pub coefficients: Vec<C64>,
    pub residual: f64,
}

/// `(y | x)_A = yx` expressed in the algebra basis.
pub fn pairing(y: &LinOp, x: &LinOp, m: &ModuleTriple) -> Result<Pairing> {
    let yx = y.compose(x)?;
    if yx.source() != m.inner() {
        return Err(Error::DimensionMismatch("pairing must land in L(L^p(μ0))".into()));
    }
    let (coefficients, residual) = m.algebra.coordinates(yx.matrix());
    Ok(Pairing {
        coefficients,
        residual,
    })
}

/// The rank-one module operator `θ_{x,y} = xy` on `L^p(μ1)`.
pub fn theta(x: &LinOp, y: &LinOp) -> Result<LinOp> {
    let t = x.compose(y)?;
    if t.source() != t.target() {
        return Err(Error::DimensionMismatch("θ_{x,y} must be an endomorphism".into()));
    }
    Ok(t)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Membership {
    pub member: bool,
    pub worst_residual: f64,
    /// Human-readable names of violated conditions.
    pub violations: Vec<String>,
}

/// Whether `t x ∈ X` and `y t ∈ Y` for every basis `x`, `y`.
pub fn in_la(t: &LinOp, m: &ModuleTriple, tol: f64) -> Result<Membership> {
    if t.source() != m.outer() || t.target() != m.outer() {
        return Err(Error::DimensionMismatch("t must act on L^p(μ1)".into()));
    }
    let mut worst: f64 = 0.0;
    let mut violations = Vec::new();
    for (n, x) in m.x_names.iter().zip(m.x.generators()) {
        let tx = t.matrix() * x;
        let r = m.x.residual(&tx);
        worst = worst.max(r);
        if r > m.x.threshold(&tx, tol) {
            violations.push(format!("t·{n} not in X (residual {r:.3e})"));
        }
    }
    for (n, y) in m.y_names.iter().zip(m.y.generators()) {
        let yt = y * t.matrix();
        let r = m.y.residual(&yt);
        worst = worst.max(r);
        if r > m.y.threshold(&yt, tol) {
            violations.push(format!("{n}·t not in Y (residual {r:.3e})"));
        }
    }
    Ok(Membership {
        member: violations.is_empty(),
        worst_residual: worst,
        violations,
    })
}

/// `K_A((X, Y)) = span{θ_{x_i, y_j}}`.
pub fn compacts(m: &ModuleTriple) -> Span {
    let mut gens = Vec::new();
    for x in m.x.generators() {
        for y in m.y.generators() {
            gens.push(x * y);
        }
    }
    let n = m.outer.dim();
    Span::new(n, n, gens).expect("square generators")
}

/// Membership of `t` in `K_A((X, Y))`.
pub fn in_ka(t: &LinOp, m: &ModuleTriple, tol: f64) -> Membership {
    let k = compacts(m);
    let r = k.residual(t.matrix());
    let member = r <= k.threshold(t.matrix(), tol);
    Membership {
        member,
        worst_residual: r,
        violations: if member {
            Vec::new()
        } else {
            vec![format!("t not in K_A (residual {r:.3e})")]
        },
    }
}

#[derive(Serialize, Deserialize)]
struct NamedMatrix {
    name: String,
    #[serde(with = "matrix_json")]
    matrix: CMatrix,
}

#[derive(Serialize, Deserialize)]
struct ModuleJson {
    id: String,
    p: f64,
    mu0: FiniteMeasureSpace,
    mu1: FiniteMeasureSpace,
    #[serde(rename = "A")]
    a: Vec<NamedMatrix>,
    #[serde(rename = "X")]
    x: Vec<NamedMatrix>,
    #[serde(rename = "Y")]
    y: Vec<NamedMatrix>,
}

fn named(names: &[String], ms: &[CMatrix]) -> Vec<NamedMatrix> {
    names
        .iter()
        .zip(ms)
        .map(|(n, m)| NamedMatrix {
            name: n.clone(),
            matrix: m.clone(),
        })
        .collect()
}

impl ModuleTriple {
    pub fn to_json(&self) -> String {
        let j = ModuleJson {
            id: self.id.clone(),
            p: self.exponent().p(),
            mu0: (*self.inner().space).clone(),
            mu1: (*self.outer.space).clone(),
            a: named(self.algebra.names(), self.algebra.basis_matrices()),
            x: named(&self.x_names, self.x.generators()),
            y: named(&self.y_names, self.y.generators()),
        };
        serde_json::to_string(&j).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: ModuleJson = serde_json::from_str(s)?;
        let p = PExponent::new(j.p)?;
        let split = |v: Vec<NamedMatrix>| v.into_iter().map(|n| (n.name, n.matrix)).unzip::<_, _, Vec<_>, Vec<_>>();
        let (an, am) = split(j.a);
        let algebra = MatrixAlgebra::new(LpSpace::new(j.mu0, p), an, am)?;
        let pairs = |v: Vec<NamedMatrix>| v.into_iter().map(|n| (n.name, n.matrix)).collect();
        ModuleTriple::new(j.id, algebra, LpSpace::new(j.mu1, p), pairs(j.x), pairs(j.y))
    }
}
