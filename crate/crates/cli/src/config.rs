//! Experiment configuration files.
//!
//! A config names its geometries and deformations and lists tasks that refer
//! to them by name. Unknown keys are rejected everywhere.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use spinlab::SpinStructure;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub seed: u64,
    /// Output directory, relative to the output root. Defaults to `name`.
    #[serde(default)]
    pub output: Option<String>,
    pub geometries: BTreeMap<String, GeometryConfig>,
    pub deformations: BTreeMap<String, DeformationConfig>,
    pub tasks: Vec<TaskConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub dim: usize,
    pub radii: Vec<f64>,
    pub grid: Vec<usize>,
    #[serde(default)]
    pub spin_structure: Option<Vec<SpinStructure>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Cos,
    Sin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DeformationConfig {
    /// `f = mu`
    Constant { mu: f64 },
    /// `f = mu + tau h(r)` with `h` a normalized harmonic of the last circle.
    CircleProfile {
        profile: Profile,
        #[serde(default = "one")]
        mode: u32,
        tau: f64,
        #[serde(default)]
        mu: f64,
    },
    /// `f = -tau a^2 sin(x / a) sin(y / a)` on a two-torus.
    TorusSine { a: f64, tau: f64 },
    /// Real samples in grid order, inline or from a field JSON file.
    Custom {
        #[serde(default)]
        samples: Option<Vec<f64>>,
        #[serde(default)]
        file: Option<PathBuf>,
    },
    /// A named entry of the built-in deformation catalogs.
    Catalog { name: String },
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverChoice {
    #[default]
    Iterative,
    Dense,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskConfig {
    /// Geometry name; may be omitted when exactly one geometry is defined.
    pub geometry: Option<String>,
    /// Deformation name; may be omitted when exactly one deformation is defined.
    pub deformation: Option<String>,
    #[serde(flatten)]
    pub kind: TaskKind,
}

// `flatten` cannot reject unknown keys, so the references are split off by hand
// and the rest goes through the strict `TaskKind` deserializer.
impl<'de> Deserialize<'de> for TaskConfig {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let mut table = toml::Table::deserialize(deserializer)?;
        let mut reference = |key: &str| match table.remove(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s)),
            Some(other) => Err(D::Error::custom(format!("{key}: expected a name, found {}", other.type_str()))),
        };
        let geometry = reference("geometry")?;
        let deformation = reference("deformation")?;
        let kind = TaskKind::deserialize(toml::Value::Table(table)).map_err(|e| D::Error::custom(e.message()))?;
        Ok(Self { geometry, deformation, kind })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum TaskKind {
    Spectrum {
        k: usize,
        #[serde(default = "default_tol")]
        tol: f64,
        #[serde(default = "default_max_iter")]
        max_iter: usize,
        #[serde(default)]
        block_size: Option<usize>,
        #[serde(default)]
        max_basis: Option<usize>,
        #[serde(default)]
        solver: SolverChoice,
        /// Also solve densely and compare the lowest `k` eigenvalues.
        #[serde(default)]
        compare_dense: bool,
        #[serde(default = "default_compare_tol")]
        compare_tol: f64,
    },
    Positivity {
        #[serde(default = "default_positivity_k")]
        k: usize,
        #[serde(default)]
        dense: bool,
    },
    PositivitySweep {
        taus: Vec<f64>,
        #[serde(default = "default_positivity_k")]
        k: usize,
    },
    ZeroMode {
        #[serde(default = "default_residual_tol")]
        residual_tol: f64,
        #[serde(default = "default_pairing_tol")]
        pairing_tol: f64,
        #[serde(default = "default_residual_tol")]
        divergence_tol: f64,
    },
    Flux {
        #[serde(default = "default_balance_tol")]
        balance_tol: f64,
    },
    HeatTrace {
        t_grid: Vec<f64>,
        #[serde(default = "default_accuracy")]
        accuracy: f64,
        #[serde(default = "dense_choice")]
        solver: SolverChoice,
        /// Eigenpairs for the iterative solver.
        #[serde(default)]
        k: Option<usize>,
        /// Keep only eigenvalues below this value.
        #[serde(default)]
        cutoff: Option<f64>,
        /// Report `(4 pi t)^m Theta / (2^m vol)` and check it against this tolerance.
        #[serde(default)]
        weyl_tol: Option<f64>,
    },
    IndexCheck {
        t: f64,
        #[serde(default = "dense_choice")]
        solver: SolverChoice,
        #[serde(default)]
        k: Option<usize>,
        #[serde(default = "default_compare_tol")]
        tol: f64,
    },
    Convergence {
        resolutions: Vec<usize>,
        #[serde(default = "default_floor")]
        floor: f64,
    },
}

fn default_tol() -> f64 {
    1e-9
}
fn default_max_iter() -> usize {
    5000
}
fn default_compare_tol() -> f64 {
    1e-8
}
fn default_positivity_k() -> usize {
    4
}
fn default_residual_tol() -> f64 {
    1e-7
}
fn default_pairing_tol() -> f64 {
    1e-8
}
fn default_balance_tol() -> f64 {
    1e-6
}
fn default_accuracy() -> f64 {
    1e-2
}
fn default_floor() -> f64 {
    1e-12
}
fn dense_choice() -> SolverChoice {
    SolverChoice::Dense
}

impl TaskKind {
    pub fn name(&self) -> &'static str {
        match self {
            TaskKind::Spectrum { .. } => "spectrum",
            TaskKind::Positivity { .. } => "positivity",
            TaskKind::PositivitySweep { .. } => "positivity_sweep",
            TaskKind::ZeroMode { .. } => "zero_mode",
            TaskKind::Flux { .. } => "flux",
            TaskKind::HeatTrace { .. } => "heat_trace",
            TaskKind::IndexCheck { .. } => "index_check",
            TaskKind::Convergence { .. } => "convergence",
        }
    }
}

impl ExperimentConfig {
    /// Parses and validates TOML text. `origin` labels diagnostics.
    pub fn from_toml(text: &str, origin: &str) -> Result<Self, CliError> {
        let config: Self = toml::from_str(text).map_err(|e| CliError::Config(format!("{origin}: {e}")))?;
        config.validate().map_err(|e| CliError::Config(format!("{origin}: {e}")))?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut config = Self::from_toml(&text, &path.display().to_string())?;
        config.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(config)
    }

    /// Makes relative `custom` field paths relative to `base`.
    fn resolve_paths(&mut self, base: &Path) {
        for d in self.deformations.values_mut() {
            if let DeformationConfig::Custom { file: Some(file), .. } = d {
                if file.is_relative() {
                    *file = base.join(&*file);
                }
            }
        }
    }

    /// Checks every semantic rule the type system does not.
    pub fn validate(&self) -> Result<(), String> {
        if self.name.trim().is_empty() {
            return Err("name: must not be empty".into());
        }
        if self.geometries.is_empty() {
            return Err("geometries: at least one geometry is required".into());
        }
        if self.deformations.is_empty() {
            return Err("deformations: at least one deformation is required".into());
        }
        if self.tasks.is_empty() {
            return Err("tasks: at least one task is required".into());
        }
        if let Some(out) = &self.output {
            let p = Path::new(out);
            if p.is_absolute() || p.components().any(|c| matches!(c, std::path::Component::ParentDir)) {
                return Err(format!("output: '{out}' must be a relative path inside the output root"));
            }
        }
        for (name, g) in &self.geometries {
            g.validate().map_err(|e| format!("geometries.{name}.{e}"))?;
        }
        for (name, d) in &self.deformations {
            d.validate().map_err(|e| format!("deformations.{name}.{e}"))?;
        }
        for (i, task) in self.tasks.iter().enumerate() {
            self.geometry_name(task).map_err(|e| format!("tasks[{i}].geometry: {e}"))?;
            self.deformation_name(task).map_err(|e| format!("tasks[{i}].deformation: {e}"))?;
            task.kind.validate().map_err(|e| format!("tasks[{i}].{e}"))?;
        }
        Ok(())
    }

    pub fn geometry_name<'a>(&'a self, task: &'a TaskConfig) -> Result<&'a str, String> {
        resolve(&task.geometry, self.geometries.keys(), "geometry")
    }

    pub fn deformation_name<'a>(&'a self, task: &'a TaskConfig) -> Result<&'a str, String> {
        resolve(&task.deformation, self.deformations.keys(), "deformation")
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical))
    }

    pub fn output_dir(&self) -> &str {
        self.output.as_deref().unwrap_or(&self.name)
    }
}

fn resolve<'a>(
    requested: &'a Option<String>,
    mut available: impl ExactSizeIterator<Item = &'a String>,
    what: &str,
) -> Result<&'a str, String> {
    match requested {
        Some(name) => available
            .find(|k| *k == name)
            .map(|k| k.as_str())
            .ok_or_else(|| format!("unknown {what} '{name}'")),
        None if available.len() == 1 => Ok(available.next().expect("one entry").as_str()),
        None => Err(format!("several {what}s are defined; name one")),
    }
}

impl GeometryConfig {
    fn validate(&self) -> Result<(), String> {
        if self.dim == 0 || !self.dim.is_multiple_of(2) {
            return Err(format!("dim: {} is not a positive even dimension", self.dim));
        }
        if self.radii.len() != self.dim {
            return Err(format!("radii: expected {} entries, found {}", self.dim, self.radii.len()));
        }
        if self.grid.len() != self.dim {
            return Err(format!("grid: expected {} entries, found {}", self.dim, self.grid.len()));
        }
        if let Some(s) = &self.spin_structure {
            if s.len() != self.dim {
                return Err(format!("spin_structure: expected {} entries, found {}", self.dim, s.len()));
            }
        }
        if let Some(r) = self.radii.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            return Err(format!("radii: {r} is not a positive radius"));
        }
        if let Some(n) = self.grid.iter().find(|n| **n < 4) {
            return Err(format!("grid: {n} points is below the minimum of 4"));
        }
        Ok(())
    }

    pub fn spin_structure(&self) -> Vec<SpinStructure> {
        self.spin_structure.clone().unwrap_or_else(|| vec![SpinStructure::Periodic; self.dim])
    }
}

impl DeformationConfig {
    fn validate(&self) -> Result<(), String> {
        let finite = |name: &str, v: f64| if v.is_finite() { Ok(()) } else { Err(format!("{name}: must be finite")) };
        match self {
            DeformationConfig::Constant { mu } => finite("mu", *mu),
            DeformationConfig::CircleProfile { mode, tau, mu, .. } => {
                if *mode == 0 {
                    return Err("mode: must be at least 1".into());
                }
                finite("tau", *tau)?;
                finite("mu", *mu)
            }
            DeformationConfig::TorusSine { a, tau } => {
                if *a <= 0.0 || a.is_nan() {
                    return Err("a: must be positive".into());
                }
                finite("tau", *tau)
            }
            DeformationConfig::Custom { samples, file } => match (samples, file) {
                (Some(_), Some(_)) => Err("samples: give either samples or file, not both".into()),
                (None, None) => Err("samples: either samples or file is required".into()),
                (Some(s), None) if s.iter().any(|v| !v.is_finite()) => Err("samples: must be finite".into()),
                _ => Ok(()),
            },
            DeformationConfig::Catalog { .. } => Ok(()),
        }
    }
}

impl TaskKind {
    fn validate(&self) -> Result<(), String> {
        let positive = |name: &str, v: f64| if v > 0.0 && v.is_finite() { Ok(()) } else { Err(format!("{name}: must be positive")) };
        match self {
            TaskKind::Spectrum { k, tol, max_iter, block_size, max_basis, compare_tol, .. } => {
                if *k == 0 {
                    return Err("k: must be at least 1".into());
                }
                if *max_iter == 0 {
                    return Err("max_iter: must be at least 1".into());
                }
                if block_size == &Some(0) {
                    return Err("block_size: must be at least 1".into());
                }
                if let Some(mb) = max_basis {
                    if mb < k {
                        return Err(format!("max_basis: {mb} is smaller than k = {k}"));
                    }
                }
                positive("tol", *tol)?;
                positive("compare_tol", *compare_tol)
            }
            TaskKind::Positivity { k, .. } | TaskKind::PositivitySweep { k, .. } if *k == 0 => Err("k: must be at least 1".into()),
            TaskKind::PositivitySweep { taus, .. } if taus.is_empty() => Err("taus: must not be empty".into()),
            TaskKind::Positivity { .. } | TaskKind::PositivitySweep { .. } => Ok(()),
            TaskKind::ZeroMode { residual_tol, pairing_tol, divergence_tol } => {
                positive("residual_tol", *residual_tol)?;
                positive("pairing_tol", *pairing_tol)?;
                positive("divergence_tol", *divergence_tol)
            }
            TaskKind::Flux { balance_tol } => positive("balance_tol", *balance_tol),
            TaskKind::HeatTrace { t_grid, accuracy, solver, k, cutoff, weyl_tol } => {
                if t_grid.is_empty() {
                    return Err("t_grid: must not be empty".into());
                }
                if let Some(t) = t_grid.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
                    return Err(format!("t_grid: {t} is not a positive time"));
                }
                positive("accuracy", *accuracy)?;
                if *solver == SolverChoice::Iterative && k.is_none() {
                    return Err("k: required with the iterative solver".into());
                }
                if let Some(c) = cutoff {
                    positive("cutoff", *c)?;
                }
                if let Some(w) = weyl_tol {
                    positive("weyl_tol", *w)?;
                }
                Ok(())
            }
            TaskKind::IndexCheck { t, solver, k, tol } => {
                positive("t", *t)?;
                positive("tol", *tol)?;
                if *solver == SolverChoice::Iterative && k.is_none() {
                    return Err("k: required with the iterative solver".into());
                }
                Ok(())
            }
            TaskKind::Convergence { resolutions, floor } => {
                if resolutions.len() < 2 {
                    return Err("resolutions: at least two are required".into());
                }
                if let Some(n) = resolutions.iter().find(|n| **n < 4) {
                    return Err(format!("resolutions: {n} points is below the minimum of 4"));
                }
                positive("floor", *floor)
            }
        }
    }
}
