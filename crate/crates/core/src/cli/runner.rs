//! Grid expansion, evaluation and report writing.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::{ExperimentConfig, ExperimentKind};
use crate::error::{Error, Result};
use crate::exponent::PExponent;
use crate::fock::cc::{gamma0_contractivity, gamma0_multiplicativity, CcElement};
use crate::fock::crossed::{crossed_relations, translation_checks, word_norms, CrossedTruncation, DynSystem};
use crate::fock::cuntz::{
    annihilation_norm, creation_norm, delta, leavitt_check, support_partition, support_partition_residual,
    FockIndex, NormCheck,
};
use crate::linop::{CMatrix, LinOp, C64};
use crate::measure::{check_spatial_algebraic, reverse, spatial_from_system, SpatialSystem, Verdict, DEFAULT_TOL};
use crate::modules::{
    algebra_module, check_module_axioms, cstar_defect, lp_lq, lq_lp, standard_module, MatrixAlgebra,
    ModuleTriple, DEFAULT_BUDGET,
};
use crate::norm::{certify_matrix, CertifyOptions};

pub const SCHEMA_VERSION: u32 = 1;

/// One line of the JSON-lines report.
#[derive(Debug, Clone, Serialize)]
pub struct Record {
    pub schema: u32,
    pub experiment: String,
    pub index: usize,
    pub params: BTreeMap<String, Value>,
    /// Residual or defect, whichever the experiment measures.
    pub residual: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub pass: bool,
    pub details: Value,
}

/// Parameters of one grid point.
#[derive(Debug, Clone)]
pub struct Point {
    pub p: f64,
    pub dim: usize,
    pub levels: usize,
    pub seed: u64,
    pub name: String,
}

impl Point {
    fn params(&self, kind: ExperimentKind) -> BTreeMap<String, Value> {
        let mut m = BTreeMap::new();
        m.insert("p".into(), json!(self.p));
        m.insert("seed".into(), json!(self.seed));
        match kind {
            ExperimentKind::Opnorm | ExperimentKind::SpatialCheck => {
                m.insert("dim".into(), json!(self.dim));
            }
            ExperimentKind::ModuleCheck | ExperimentKind::CstarDefect => {
                m.insert("dim".into(), json!(self.dim));
                m.insert("module".into(), json!(self.name));
            }
            ExperimentKind::FockCuntz => {
                m.insert("d".into(), json!(self.dim));
                m.insert("levels".into(), json!(self.levels));
            }
            ExperimentKind::FockCrossed => {
                m.insert("algebra".into(), json!(self.name));
                m.insert("levels".into(), json!(self.levels));
            }
        }
        m
    }
}

/// Grid points in a fixed nesting order: name, dim, levels, p, seed.
pub fn expand(cfg: &ExperimentConfig) -> Vec<Point> {
    let g = &cfg.grid;
    let names: Vec<String> = match cfg.kind {
        ExperimentKind::ModuleCheck | ExperimentKind::CstarDefect => g.modules.clone(),
        ExperimentKind::FockCrossed => g.algebras.clone(),
        _ => vec![String::new()],
    };
    let dims = if cfg.kind == ExperimentKind::FockCrossed { vec![0] } else { g.dims.clone() };
    let levels = match cfg.kind {
        ExperimentKind::FockCuntz | ExperimentKind::FockCrossed => g.levels.clone(),
        _ => vec![0],
    };
    let mut out = Vec::new();
    for name in &names {
        for &dim in &dims {
            for &lv in &levels {
                for &p in &g.p {
                    for s in cfg.seeds() {
                        out.push(Point {
                            p,
                            dim,
                            levels: lv,
                            seed: cfg.seed.wrapping_add(s),
                            name: name.clone(),
                        });
                    }
                }
            }
        }
    }
    out
}

fn exponent(p: f64) -> Result<PExponent> {
    PExponent::new(p)
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

struct Outcome {
    residual: f64,
    lower: Option<f64>,
    upper: Option<f64>,
    pass: bool,
    details: Value,
}

fn opnorm(pt: &Point) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(pt.seed);
    let m = random_matrix(&mut rng, pt.dim);
    let b = certify_matrix(&m, pt.p, &CertifyOptions::default());
    let reference = if pt.p == 1.0 {
        Some((0..pt.dim).map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max))
    } else if pt.p == 2.0 {
        Some(m.clone().svd(false, false).singular_values.max())
    } else {
        None
    };
    let contains = reference.is_none_or(|r| b.lower <= r && r <= b.upper);
    Ok(Outcome {
        residual: b.width(),
        lower: Some(b.lower),
        upper: Some(b.upper),
        pass: b.lower <= b.upper && contains,
        details: json!({ "closed_form": reference }),
    })
}

fn module_by_name(name: &str, d: usize, p: PExponent) -> Result<ModuleTriple> {
    match name {
        "lp-lq" => Ok(lp_lq(d, p)),
        "lq-lp" => Ok(lq_lp(d, p)),
        "algebra-full" => Ok(algebra_module(&MatrixAlgebra::full(d, p))),
        "algebra-diag" => Ok(algebra_module(&MatrixAlgebra::diagonal(d, p))),
        "nilpotent" => Ok(algebra_module(&MatrixAlgebra::nilpotent(p))),
        "standard-diag" => standard_module(d, &MatrixAlgebra::diagonal(2, p)),
        other => Err(Error::Config {
            field: "grid.modules".into(),
            message: format!("unknown module `{other}`"),
        }),
    }
}

fn module_check(pt: &Point, cfg: &ExperimentConfig) -> Result<Outcome> {
    let m = module_by_name(&pt.name, pt.dim, exponent(pt.p)?)?;
    let r = check_module_axioms(&m, crate::modules::DEFAULT_TOL);
    let worst = r.conditions.iter().map(|c| c.worst).fold(0.0, f64::max);
    let _ = cfg;
    Ok(Outcome {
        residual: worst,
        lower: None,
        upper: None,
        pass: r.pass,
        details: serde_json::to_value(&r.conditions)?,
    })
}

fn cstar(pt: &Point, cfg: &ExperimentConfig) -> Result<Outcome> {
    let m = module_by_name(&pt.name, pt.dim, exponent(pt.p)?)?;
    let r = cstar_defect(&m, DEFAULT_BUDGET, pt.seed)?;
    let t = &cfg.tolerances;
    let pass = match pt.name.as_str() {
        "nilpotent" => (r.defect_x.lower - 1.0).abs() <= t.unit_defect && (r.defect_x.upper - 1.0).abs() <= t.unit_defect,
        "lp-lq" | "lq-lp" => r.defect_x.upper <= t.defect && r.defect_y.upper <= t.defect,
        other => {
            return Err(Error::Config {
                field: "grid.modules".into(),
                message: format!("no expected defect for module `{other}`"),
            })
        }
    };
    Ok(Outcome {
        residual: r.defect_x.upper,
        lower: Some(r.defect_x.lower),
        upper: Some(r.defect_x.upper),
        pass,
        details: json!({ "defect_x": r.defect_x, "defect_y": r.defect_y }),
    })
}

#[derive(Serialize)]
struct PartitionRow {
    j: usize,
    levels: Vec<(usize, Vec<usize>)>,
    residual: f64,
}

#[derive(Serialize)]
struct NormRow {
    operator: String,
    predicted: f64,
    lower: f64,
    upper: f64,
}

/// The report behind both the `fock-cuntz` subcommand and grid records.
pub fn fock_cuntz_report(d: usize, levels: usize, p: f64, seed: u64, cfg_tol: f64, width: f64) -> Result<(bool, f64, Value)> {
    let p = exponent(p)?;
    let idx = FockIndex::new(d, levels)?;
    let leavitt = leavitt_check(&idx, p)?;
    let mut partitions = Vec::new();
    for j in 0..d {
        partitions.push(PartitionRow {
            j,
            levels: support_partition(j, &idx)?.levels,
            residual: support_partition_residual(j, &idx, p)?,
        });
    }
    let small = FockIndex::new(d, levels.min(2))?;
    let opts = CertifyOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<C64> = (0..d).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let mut norms: Vec<(String, NormCheck)> = vec![
        ("c(x)".into(), creation_norm(&x, &small, p, &opts)?),
        ("v(x)".into(), annihilation_norm(&x, &small, p, &opts)?),
    ];
    for j in 0..d {
        norms.push((format!("c(δ_{j})"), creation_norm(&delta(d, j), &small, p, &opts)?));
        norms.push((format!("v(δ_{j})"), annihilation_norm(&delta(d, j), &small, p, &opts)?));
    }
    let residual = partitions.iter().map(|r| r.residual).fold(leavitt.max_residual(), f64::max);
    let norms_ok = norms.iter().all(|(_, n)| n.holds(0.0) && n.bracket.width() <= width);
    let pass = residual <= cfg_tol && leavitt.defect.rank == 1 && norms_ok;
    let rows: Vec<NormRow> = norms
        .into_iter()
        .map(|(operator, n)| NormRow {
            operator,
            predicted: n.predicted,
            lower: n.bracket.lower,
            upper: n.bracket.upper,
        })
        .collect();
    let report = json!({
        "schema": SCHEMA_VERSION,
        "d": d,
        "levels": levels,
        "p": p.p(),
        "relations": leavitt,
        "partitions": partitions,
        "norms": rows,
        "pass": pass,
    });
    Ok((pass, residual, report))
}

fn fock_cuntz(pt: &Point, cfg: &ExperimentConfig) -> Result<Outcome> {
    let t = &cfg.tolerances;
    let (pass, residual, report) = fock_cuntz_report(pt.dim, pt.levels, pt.p, pt.seed, t.residual, t.norm_width)?;
    Ok(Outcome {
        residual,
        lower: None,
        upper: None,
        pass,
        details: report,
    })
}

/// Built-in dynamical systems.
pub fn builtin_system(name: &str, p: PExponent) -> Result<DynSystem> {
    match name {
        "m2-swap" => DynSystem::conjugation(MatrixAlgebra::full(2, p), vec![1, 0]),
        "diag2-swap" => DynSystem::conjugation(MatrixAlgebra::diagonal(2, p), vec![1, 0]),
        "diag3-cyclic" => DynSystem::conjugation(MatrixAlgebra::diagonal(3, p), vec![1, 2, 0]),
        other => Err(Error::Config {
            field: "grid.algebras".into(),
            message: format!("unknown system `{other}`"),
        }),
    }
}

fn resolve_system(name: &str, base: &Path, p: PExponent) -> Result<DynSystem> {
    match name.strip_prefix("file:") {
        Some(files) => {
            let (a, f) = files.split_once(',').ok_or_else(|| Error::Config {
                field: "grid.algebras".into(),
                message: format!("`{name}` should read file:ALGEBRA.json,PHI.json"),
            })?;
            let read = |f: &str| std::fs::read_to_string(base.join(f.trim()));
            DynSystem::from_json(&read(a)?, &read(f)?, p)
        }
        None => builtin_system(name, p),
    }
}

/// The report behind both the `fock-crossed` subcommand and grid records.
pub fn fock_crossed_report(sys: DynSystem, levels: usize, seed: u64, tol: f64, width: f64) -> Result<(bool, f64, Value)> {
    let sys = Arc::new(sys);
    let tr = CrossedTruncation::new(sys.clone(), levels)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = sys.random_element(&mut rng, true);
    let b = sys.random_element(&mut rng, true);
    let relations = crossed_relations(&tr, &a, &b)?;
    let translations = translation_checks(&tr, &a)?;
    let translation_residual = translations.iter().map(|t| t.residual).fold(0.0, f64::max);
    let f = CcElement::random(&sys, -2, 2, &mut rng, true);
    let g = CcElement::random(&sys, -2, 2, &mut rng, true);
    let gamma = if levels >= 4 { Some(gamma0_multiplicativity(&f, &g, &tr)?) } else { None };
    let opts = CertifyOptions::fine();
    let contract = gamma0_contractivity(&CcElement::random(&sys, -1, 1, &mut rng, false), &tr, &opts)?;
    let len = levels.min(2);
    let words_a: Vec<CMatrix> = (0..len).map(|_| sys.random_element(&mut rng, false)).collect();
    let words_b: Vec<CMatrix> = (0..len).map(|_| sys.random_element(&mut rng, false)).collect();
    let words = word_norms(&words_a, &words_b, &tr, &opts)?;
    let words_ok = [&words.creation, &words.annihilation, &words.mixed]
        .into_iter()
        .flatten()
        .all(|w| w.agrees(width));
    let residual = relations
        .max_residual()
        .max(translation_residual)
        .max(gamma.as_ref().map_or(0.0, |g| g.residual));
    let pass = residual <= tol && gamma.as_ref().is_none_or(|g| g.holds(tol)) && contract.holds(1e-9) && words_ok;
    let report = json!({
        "schema": SCHEMA_VERSION,
        "levels": levels,
        "p": sys.exponent().p(),
        "relations": relations,
        "translations": translations,
        "gamma0": gamma,
        "contractivity": contract,
        "words": words,
        "pass": pass,
    });
    Ok((pass, residual, report))
}

fn fock_crossed(pt: &Point, cfg: &ExperimentConfig) -> Result<Outcome> {
    let sys = resolve_system(&pt.name, &cfg.base_dir, exponent(pt.p)?)?;
    let t = &cfg.tolerances;
    let (pass, residual, report) = fock_crossed_report(sys, pt.levels, pt.seed, t.residual, t.norm_width)?;
    Ok(Outcome {
        residual,
        lower: None,
        upper: None,
        pass,
        details: report,
    })
}

fn spatial(pt: &Point) -> Result<Outcome> {
    let p = exponent(pt.p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(pt.seed);
    let sys = SpatialSystem::random(&mut rng, pt.dim);
    let s = spatial_from_system(&sys, p);
    let t = reverse(&sys, p)?;
    let forward = check_spatial_algebraic(&s, &t, DEFAULT_TOL)?;
    let bumped: LinOp = s.scale(C64::new(1.001, 0.0));
    let control = check_spatial_algebraic(&bumped, &t, DEFAULT_TOL)?;
    let nontrivial = s.max_abs() > 0.0;
    let pass = forward.verdict == Verdict::SpatialPartialIsometry
        && (!nontrivial || control.verdict != Verdict::SpatialPartialIsometry);
    Ok(Outcome {
        residual: if forward.failed.is_empty() { 0.0 } else { 1.0 },
        lower: Some(forward.norm_s.lower),
        upper: Some(forward.norm_s.upper),
        pass,
        details: json!({ "failed": forward.failed, "control_failed": control.failed }),
    })
}

fn evaluate(kind: ExperimentKind, pt: &Point, cfg: &ExperimentConfig) -> Result<Outcome> {
    match kind {
        ExperimentKind::Opnorm => opnorm(pt),
        ExperimentKind::ModuleCheck => module_check(pt, cfg),
        ExperimentKind::CstarDefect => cstar(pt, cfg),
        ExperimentKind::FockCuntz => fock_cuntz(pt, cfg),
        ExperimentKind::FockCrossed => fock_crossed(pt, cfg),
        ExperimentKind::SpatialCheck => spatial(pt),
    }
}

/// Runs the grid on `jobs` worker threads. Records come back in grid order.
/// A point whose evaluation errors becomes a failing record.
pub fn run(cfg: &ExperimentConfig, jobs: usize) -> Result<Vec<Record>> {
    cfg.validate()?;
    let points = expand(cfg);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config {
            field: "jobs".into(),
            message: e.to_string(),
        })?;
    let kind = cfg.kind;
    let outcomes: Vec<Result<Outcome>> =
        pool.install(|| points.par_iter().map(|pt| evaluate(kind, pt, cfg)).collect());
    let mut records = Vec::with_capacity(points.len());
    for (index, (pt, out)) in points.iter().zip(outcomes).enumerate() {
        let out = match out {
            Ok(o) => o,
            Err(e @ Error::Config { .. }) => return Err(e),
            Err(e) => Outcome {
                residual: f64::NAN,
                lower: None,
                upper: None,
                pass: false,
                details: json!({ "error": e.to_string() }),
            },
        };
        records.push(Record {
            schema: SCHEMA_VERSION,
            experiment: kind.name().to_string(),
            index,
            params: pt.params(kind),
            residual: out.residual,
            lower: out.lower,
            upper: out.upper,
            pass: out.pass,
            details: out.details,
        });
    }
    Ok(records)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x:e}"))
}

fn csv_field(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Writes `<stem>.jsonl` and `<stem>.csv` into `dir`.
pub fn write_reports(records: &[Record], dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let jsonl = dir.join(format!("{stem}.jsonl"));
    let csv = dir.join(format!("{stem}.csv"));
    let mut j = std::fs::File::create(&jsonl).map_err(|e| Error::Io(format!("{}: {e}", jsonl.display())))?;
    for r in records {
        serde_json::to_writer(&mut j, r)?;
        j.write_all(b"\n")?;
    }
    let keys: Vec<String> = records.first().map(|r| r.params.keys().cloned().collect()).unwrap_or_default();
    let mut c = std::fs::File::create(&csv).map_err(|e| Error::Io(format!("{}: {e}", csv.display())))?;
    let mut header = vec!["experiment".to_string()];
    header.extend(keys.iter().cloned());
    header.extend(["residual", "lower", "upper", "pass"].map(String::from));
    writeln!(c, "{}", header.join(","))?;
    for r in records {
        let mut row = vec![r.experiment.clone()];
        row.extend(keys.iter().map(|k| r.params.get(k).map_or(String::new(), csv_field)));
        row.push(format!("{:e}", r.residual));
        row.push(fmt_opt(r.lower));
        row.push(fmt_opt(r.upper));
        row.push(r.pass.to_string());
        writeln!(c, "{}", row.join(","))?;
    }
    Ok((jsonl, csv))
}
