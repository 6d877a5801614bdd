//! Runs every task of a config and writes results plus a manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::tasks::{self, TaskInput, TaskOutput};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskStatus {
    Ok,
    CheckFailed,
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct TaskRecord {
    pub index: usize,
    #[serde(rename = "type")]
    pub kind: &'static str,
    pub geometry: String,
    pub deformation: String,
    pub seed: u64,
    pub status: TaskStatus,
    pub error: Option<String>,
    pub checks: std::collections::BTreeMap<String, bool>,
    pub wall_clock_s: f64,
    pub files: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Versions {
    pub spinlab: &'static str,
    pub spinlab_cli: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub name: String,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub output_dir: PathBuf,
    pub versions: Versions,
    pub parallel: bool,
    pub tasks: Vec<TaskRecord>,
    pub files: Vec<String>,
    pub wall_clock_s: f64,
}

impl Manifest {
    pub fn all_ok(&self) -> bool {
        self.tasks.iter().all(|t| t.status == TaskStatus::Ok)
    }
}

pub const MANIFEST_FILE: &str = "manifest.json";

struct Outcome {
    output: Result<TaskOutput, CliError>,
    seconds: f64,
}

fn run_one(config: &ExperimentConfig, index: usize) -> Outcome {
    let task = &config.tasks[index];
    let start = Instant::now();
    // names were checked by `validate`
    let geometry = &config.geometries[config.geometry_name(task).expect("validated geometry")];
    let deformation = &config.deformations[config.deformation_name(task).expect("validated deformation")];
    let input = TaskInput { kind: &task.kind, geometry, deformation, seed: task_seed(config, index) };
    let output = tasks::run(&input);
    Outcome { output, seconds: start.elapsed().as_secs_f64() }
}

fn task_seed(config: &ExperimentConfig, index: usize) -> u64 {
    config.seed.wrapping_add(index as u64)
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn to_pretty(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// Runs all tasks and writes `<root>/<output>/`. Task failures are recorded in
/// the manifest; only I/O problems abort the run.
pub fn run(config: &ExperimentConfig, root: &Path, parallel: bool) -> Result<Manifest, CliError> {
    let start = Instant::now();
    let hash = config.hash();
    let dir = root.join(config.output_dir());
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;

    let outcomes: Vec<Outcome> = if parallel {
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..config.tasks.len()).map(|i| s.spawn(move || run_one(config, i))).collect();
            handles.into_iter().map(|h| h.join().expect("task thread panicked")).collect()
        })
    } else {
        (0..config.tasks.len()).map(|i| run_one(config, i)).collect()
    };

    let mut records = Vec::with_capacity(outcomes.len());
    let mut all_files = Vec::new();
    for (index, outcome) in outcomes.into_iter().enumerate() {
        let task = &config.tasks[index];
        let kind = task.kind.name();
        let stem = format!("{index:02}_{kind}");
        let mut files = Vec::new();
        let (status, error, checks, result) = match outcome.output {
            Ok(out) => {
                if let Some(csv) = &out.csv {
                    let name = format!("{stem}.csv");
                    write(&dir.join(&name), &format!("# config_hash: {hash}\n{csv}"))?;
                    files.push(name);
                }
                let status = if out.checks.values().all(|&ok| ok) { TaskStatus::Ok } else { TaskStatus::CheckFailed };
                (status, None, out.checks, out.result)
            }
            Err(e) => (TaskStatus::Error, Some(e.to_string()), Default::default(), Value::Null),
        };
        let name = format!("{stem}.json");
        let body = json!({
            "config_hash": hash,
            "index": index,
            "task": task,
            "status": status,
            "error": error,
            "checks": checks,
            "result": result,
        });
        write(&dir.join(&name), &to_pretty(&body))?;
        files.insert(0, name);
        all_files.extend(files.iter().cloned());
        records.push(TaskRecord {
            index,
            kind,
            geometry: config.geometry_name(task).expect("validated geometry").to_string(),
            deformation: config.deformation_name(task).expect("validated deformation").to_string(),
            seed: task_seed(config, index),
            status,
            error,
            checks,
            wall_clock_s: outcome.seconds,
            files,
        });
    }

    all_files.push(MANIFEST_FILE.to_string());
    let manifest = Manifest {
        name: config.name.clone(),
        config_hash: hash,
        config: config.clone(),
        output_dir: dir.clone(),
        versions: Versions { spinlab: spinlab::VERSION, spinlab_cli: env!("CARGO_PKG_VERSION") },
        parallel,
        tasks: records,
        files: all_files,
        wall_clock_s: start.elapsed().as_secs_f64(),
    };
    write(&dir.join(MANIFEST_FILE), &to_pretty(&manifest))?;
    Ok(manifest)
}
