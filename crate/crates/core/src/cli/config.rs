//! TOML experiment configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Opnorm,
    ModuleCheck,
    CstarDefect,
    FockCuntz,
    FockCrossed,
    SpatialCheck,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Opnorm => "opnorm",
            Self::ModuleCheck => "module-check",
            Self::CstarDefect => "cstar-defect",
            Self::FockCuntz => "fock-cuntz",
            Self::FockCrossed => "fock-crossed",
            Self::SpatialCheck => "spatial-check",
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    #[serde(default)]
    pub p: Vec<f64>,
    /// Matrix size, branching `d`, or module dimension depending on the kind.
    #[serde(default)]
    pub dims: Vec<usize>,
    #[serde(default)]
    pub levels: Vec<usize>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub modules: Vec<String>,
    /// Built-in systems (`m2-swap`, `diag2-swap`, `diag3-cyclic`) or
    /// `file:ALGEBRA.json,PHI.json` relative to the config file.
    #[serde(default)]
    pub algebras: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub residual: f64,
    pub norm_width: f64,
    pub defect: f64,
    pub unit_defect: f64,
    pub slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            residual: 1e-12,
            norm_width: 1e-3,
            defect: 1e-3,
            unit_defect: 1e-6,
            slack: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub dir: Option<PathBuf>,
    /// File stem for the `.jsonl` and `.csv` reports; defaults to the kind.
    pub stem: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: Output,
    /// Directory that relative paths in the grid resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn config_error(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        message: message.into(),
    }
}

/// Pulls a field path out of a TOML error message when serde names one.
fn field_of(message: &str) -> String {
    for key in ["unknown field `", "missing field `", "unknown variant `"] {
        if let Some(rest) = message.split(key).nth(1) {
            if let Some(name) = rest.split('`').next() {
                return name.to_string();
            }
        }
    }
    "config".to_string()
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            config_error(&field_of(&msg), msg)
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| config_error("config", format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    /// Axes the kind sweeps over; each must be nonempty.
    fn required(&self) -> &'static [&'static str] {
        match self.kind {
            ExperimentKind::Opnorm => &["p", "dims"],
            ExperimentKind::ModuleCheck => &["modules", "p", "dims"],
            ExperimentKind::CstarDefect => &["modules", "p", "dims"],
            ExperimentKind::FockCuntz => &["dims", "levels", "p"],
            ExperimentKind::FockCrossed => &["algebras", "levels", "p"],
            ExperimentKind::SpatialCheck => &["dims", "p"],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        for axis in self.required() {
            let empty = match *axis {
                "p" => g.p.is_empty(),
                "dims" => g.dims.is_empty(),
                "levels" => g.levels.is_empty(),
                "modules" => g.modules.is_empty(),
                "algebras" => g.algebras.is_empty(),
                _ => false,
            };
            if empty {
                return Err(config_error(&format!("grid.{axis}"), "empty grid axis"));
            }
        }
        if let Some(p) = g.p.iter().find(|p| !(p.is_finite() && **p >= 1.0)) {
            return Err(config_error("grid.p", format!("exponent {p} is not a finite value >= 1")));
        }
        if self.kind == ExperimentKind::FockCuntz && g.dims.iter().any(|d| *d < 2) {
            return Err(config_error("grid.dims", "branching must be at least 2"));
        }
        if matches!(self.kind, ExperimentKind::FockCuntz | ExperimentKind::FockCrossed)
            && g.levels.contains(&0)
        {
            return Err(config_error("grid.levels", "levels must be at least 1"));
        }
        if g.dims.contains(&0) {
            return Err(config_error("grid.dims", "dimensions must be positive"));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("tolerances.residual", t.residual),
            ("tolerances.norm_width", t.norm_width),
            ("tolerances.defect", t.defect),
            ("tolerances.unit_defect", t.unit_defect),
            ("tolerances.slack", t.slack),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(config_error(name, format!("tolerance {v} must be finite and nonnegative")));
            }
        }
        Ok(())
    }

    pub fn seeds(&self) -> Vec<u64> {
        if self.grid.seeds.is_empty() {
            vec![0]
        } else {
            self.grid.seeds.clone()
        }
    }

    pub fn stem(&self) -> String {
        self.output.stem.clone().unwrap_or_else(|| self.kind.name().to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let cfg = ExperimentConfig::from_toml(
            "kind = \"fock-cuntz\"\n[grid]\np = [2.0]\ndims = [2, 3]\nlevels = [2]\n",
        )
        .unwrap();
        assert_eq!(cfg.kind, ExperimentKind::FockCuntz);
        assert_eq!(cfg.seeds(), vec![0]);
    }

    #[test]
    fn empty_axis_is_named() {
        let err = ExperimentConfig::from_toml("kind = \"opnorm\"\n[grid]\np = []\ndims = [2]\n").unwrap_err();
        assert!(matches!(err, Error::Config { ref field, .. } if field == "grid.p"), "{err}");
    }

    #[test]
    fn unknown_field_is_named() {
        let err = ExperimentConfig::from_toml("kind = \"opnorm\"\ncolour = 1\n").unwrap_err();
        assert!(matches!(err, Error::Config { ref field, .. } if field == "colour"), "{err}");
    }

    #[test]
    fn rejects_small_exponent() {
        let err = ExperimentConfig::from_toml("kind = \"opnorm\"\n[grid]\np = [0.5]\ndims = [2]\n").unwrap_err();
        assert!(matches!(err, Error::Config { ref field, .. } if field == "grid.p"));
    }
}
