//! One function per task type. Each returns a JSON result, an optional CSV
//! payload and named pass/fail checks.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use serde_json::{json, Value};
use spinlab::analysis::{
    build_product_zero_modes_for, nodal_flux, positivity_vs_spectrum, verify_zero_mode, SpectrumCheckOptions,
    ZeroModeTolerances,
};
use spinlab::operators::hamiltonian;
use spinlab::spectral::{
    dense_eigenvalues, dense_spectrum, heat_traces, index_checks, smallest_eigenpairs_with, IndexCheckOptions,
    SolverOptions, SpectrumMethod,
};
use spinlab::{build_gamma_set, decompose_deformation, Field, Gammas, Geometry, Spectrum};

use crate::config::{DeformationConfig, GeometryConfig, SolverChoice, TaskKind};
use crate::error::CliError;
use crate::setup;

pub struct TaskInput<'a> {
    pub kind: &'a TaskKind,
    pub geometry: &'a GeometryConfig,
    pub deformation: &'a DeformationConfig,
    pub seed: u64,
}

#[derive(Debug, Default)]
pub struct TaskOutput {
    pub result: Value,
    pub csv: Option<String>,
    pub checks: BTreeMap<String, bool>,
}

impl TaskOutput {
    fn new(result: Value) -> Self {
        Self { result, ..Self::default() }
    }

    fn check(mut self, name: &str, ok: bool) -> Self {
        self.checks.insert(name.to_string(), ok);
        self
    }

    fn with_csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }
}

struct Problem {
    geom: Arc<Geometry>,
    gammas: Gammas,
    f: Field,
}

fn problem(geometry: &GeometryConfig, deformation: &DeformationConfig) -> Result<Problem, CliError> {
    let geom = setup::geometry(geometry)?;
    let gammas = build_gamma_set(geom.dim())?;
    let f = setup::deformation(&geom, deformation)?;
    Ok(Problem { geom, gammas, f })
}

fn solver_options(seed: u64) -> SolverOptions {
    SolverOptions { seed, ..SolverOptions::default() }
}

pub fn run(input: &TaskInput) -> Result<TaskOutput, CliError> {
    let p = problem(input.geometry, input.deformation)?;
    match input.kind {
        TaskKind::Spectrum { k, tol, max_iter, block_size, max_basis, solver, compare_dense, compare_tol } => {
            let options = SolverOptions {
                tol: *tol,
                max_iter: *max_iter,
                block_size: *block_size,
                max_basis: *max_basis,
                seed: input.seed,
            };
            spectrum(&p, *k, *solver, &options, *compare_dense, *compare_tol)
        }
        TaskKind::Positivity { k, dense } => positivity(&p, *k, *dense, input.seed),
        TaskKind::PositivitySweep { taus, k } => positivity_sweep(&p, taus, *k, input.seed),
        TaskKind::ZeroMode { residual_tol, pairing_tol, divergence_tol } => {
            let tolerances = ZeroModeTolerances { residual: *residual_tol, pairing: *pairing_tol, divergence: *divergence_tol };
            zero_mode(&p, &tolerances)
        }
        TaskKind::Flux { balance_tol } => flux(&p, *balance_tol),
        TaskKind::HeatTrace { t_grid, accuracy, solver, k, cutoff, weyl_tol } => {
            heat_trace(&p, t_grid, *accuracy, *solver, *k, *cutoff, *weyl_tol, input.seed)
        }
        TaskKind::IndexCheck { t, solver, k, tol } => index_check(&p, *t, *solver, *k, *tol, input.seed),
        TaskKind::Convergence { resolutions, floor } => convergence(input, resolutions, *floor),
    }
}

fn spectrum(
    p: &Problem,
    k: usize,
    solver: SolverChoice,
    options: &SolverOptions,
    compare_dense: bool,
    compare_tol: f64,
) -> Result<TaskOutput, CliError> {
    let h = hamiltonian(&p.geom, &p.gammas, &p.f)?;
    let spec = match solver {
        SolverChoice::Iterative => smallest_eigenpairs_with(&h, k, options)?,
        SolverChoice::Dense => dense_spectrum(&h)?.truncated(k),
    };
    let mut result = json!({ "spectrum": spec.to_json_value() });
    let mut out = TaskOutput::default().check("converged", spec.converged);
    if compare_dense {
        let (dense, defect) = dense_eigenvalues(&h)?;
        let gap = spec.eigenvalues.iter().zip(&dense).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        result["dense_comparison"] = json!({
            "eigenvalues": &dense[..spec.len()],
            "max_difference": gap,
            "hermiticity_defect": defect,
            "tolerance": compare_tol,
        });
        out = out.check("matches_dense", gap <= compare_tol);
    }
    out.result = result;
    Ok(out.with_csv(spec.to_csv()))
}

fn positivity(p: &Problem, k: usize, dense: bool, seed: u64) -> Result<TaskOutput, CliError> {
    let opts = SpectrumCheckOptions { k, solver: solver_options(seed), dense };
    let (report, _) = positivity_vs_spectrum(&p.geom, &p.gammas, &p.f, &opts)?;
    Ok(TaskOutput::new(serde_json::to_value(&report).expect("plain data"))
        .check("converged", report.converged)
        .check("consistent", report.consistent))
}

fn positivity_sweep(p: &Problem, taus: &[f64], k: usize, seed: u64) -> Result<TaskOutput, CliError> {
    let spec = decompose_deformation(&p.f)?;
    if spec.degenerate {
        return Err(CliError::Task("positivity_sweep needs a non-constant deformation".into()));
    }
    let opts = SpectrumCheckOptions { k, solver: solver_options(seed), dense: false };
    let mut rows = Vec::new();
    let mut csv = String::from("tau,uniform_margin,uniform_holds,sign_margin,sign_holds,lambda_min,consistent\n");
    let mut consistent = true;
    for &tau in taus {
        let f = spec.h.scale(tau).add_constant(spec.mu);
        let (r, _) = positivity_vs_spectrum(&p.geom, &p.gammas, &f, &opts)?;
        consistent &= r.consistent && r.converged;
        writeln!(
            csv,
            "{tau:.16e},{:.16e},{},{:.16e},{},{:.16e},{}",
            r.uniform.margin, r.uniform.holds, r.sign_definite.margin, r.sign_definite.holds, r.lambda_min, r.consistent
        )
        .expect("write to string");
        rows.push(json!({ "tau": tau, "report": r }));
    }
    let result = json!({ "mu": spec.mu, "tau_of_input": spec.tau, "sweep": rows });
    Ok(TaskOutput::new(result).check("consistent", consistent).with_csv(csv))
}

fn zero_mode(p: &Problem, tolerances: &ZeroModeTolerances) -> Result<TaskOutput, CliError> {
    let modes = build_product_zero_modes_for(&p.geom, &p.gammas, &p.f, None)?;
    let r1 = verify_zero_mode(&p.geom, &p.gammas, &p.f, &modes.phi1, tolerances)?;
    let r2 = verify_zero_mode(&p.geom, &p.gammas, &p.f, &modes.phi2, tolerances)?;
    let (gap1, gap2) = modes.norm_gaps();
    let result = json!({
        "a1": modes.a1,
        "a2": modes.a2,
        "psi0_norm_sq": modes.psi0_norm_sq,
        "kernel_residual": modes.kernel_residual,
        "norm_gap_phi1": gap1,
        "norm_gap_phi2": gap2,
        "phi1": r1,
        "phi2": r2,
    });

    // profile along the last circle at the first grid point of the other axes
    let last = p.geom.dim() - 1;
    let n = p.geom.grid()[last];
    let omega = modes.omega.real_values();
    let d1 = modes.phi1.density().real_values();
    let d2 = modes.phi2.density().real_values();
    let mut csv = String::from("r,omega,density_phi1,density_phi2\n");
    for j in 0..n {
        writeln!(csv, "{:.16e},{:.16e},{:.16e},{:.16e}", p.geom.coordinate(last, j), omega[j], d1[j], d2[j])
            .expect("write to string");
    }
    Ok(TaskOutput::new(result)
        .check("phi1_verified", r1.verified)
        .check("phi2_verified", r2.verified)
        .with_csv(csv))
}

fn flux(p: &Problem, balance_tol: f64) -> Result<TaskOutput, CliError> {
    let modes = build_product_zero_modes_for(&p.geom, &p.gammas, &p.f, None)?;
    let report = nodal_flux(&p.geom, &p.gammas, &p.f, &modes.phi1)?;
    let ok = report.balance_gap <= balance_tol;
    let result = json!({ "flux": report, "balance_tol": balance_tol });
    Ok(TaskOutput::new(result).check("balanced", ok))
}

fn spectrum_for_traces(p: &Problem, solver: SolverChoice, k: Option<usize>, seed: u64) -> Result<Spectrum, CliError> {
    let h = hamiltonian(&p.geom, &p.gammas, &p.f)?;
    match solver {
        SolverChoice::Dense => Ok(dense_spectrum(&h)?),
        SolverChoice::Iterative => {
            let k = k.ok_or_else(|| CliError::Config("k is required with the iterative solver".into()))?;
            let spec = smallest_eigenpairs_with(&h, k, &solver_options(seed))?;
            if !spec.converged {
                return Err(CliError::Task("eigensolver did not converge".into()));
            }
            Ok(spec.complete_clusters(1e-6))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn heat_trace(
    p: &Problem,
    t_grid: &[f64],
    accuracy: f64,
    solver: SolverChoice,
    k: Option<usize>,
    cutoff: Option<f64>,
    weyl_tol: Option<f64>,
    seed: u64,
) -> Result<TaskOutput, CliError> {
    let mut spec = spectrum_for_traces(p, solver, k, seed)?;
    if let Some(c) = cutoff {
        spec = spec.below(c);
    }
    let curve = heat_traces(&spec, &p.gammas, t_grid, accuracy)?;
    let mut result = json!({ "curve": curve });
    let mut out = TaskOutput::default();
    if let Some(tol) = weyl_tol {
        let m = (p.geom.dim() / 2) as i32;
        let leading = p.geom.spinor_components() as f64 * p.geom.volume();
        let ratios: Vec<f64> =
            curve.t.iter().zip(&curve.theta).map(|(t, th)| (4.0 * PI * t).powi(m) * th / leading).collect();
        let (i_min, _) = curve.t.iter().enumerate().fold((0, f64::INFINITY), |a, (i, &t)| if t < a.1 { (i, t) } else { a });
        let ok = (ratios[i_min] - 1.0).abs() <= tol;
        result["weyl"] = json!({ "ratios": ratios, "checked_t": curve.t[i_min], "tolerance": tol });
        out = out.check("weyl_leading_term", ok);
    }
    out.result = result;
    Ok(out.with_csv(curve.to_csv()))
}

fn index_check(p: &Problem, t: f64, solver: SolverChoice, k: Option<usize>, tol: f64, seed: u64) -> Result<TaskOutput, CliError> {
    let method = match solver {
        SolverChoice::Dense => SpectrumMethod::Dense,
        SolverChoice::Iterative => SpectrumMethod::Iterative {
            k: k.ok_or_else(|| CliError::Config("k is required with the iterative solver".into()))?,
            options: solver_options(seed),
        },
    };
    let opts = IndexCheckOptions { method, tol, ..IndexCheckOptions::default() };
    let report = index_checks(&p.geom, &p.gammas, &p.f, t, &opts)?;
    Ok(TaskOutput::new(serde_json::to_value(&report).expect("plain data")).check("identities_hold", report.passed))
}

fn convergence(input: &TaskInput, resolutions: &[usize], floor: f64) -> Result<TaskOutput, CliError> {
    let mut residuals = Vec::with_capacity(resolutions.len());
    let mut csv = String::from("points,residual\n");
    for &n in resolutions {
        let p = problem(&setup::with_last_resolution(input.geometry, n), input.deformation)?;
        let modes = build_product_zero_modes_for(&p.geom, &p.gammas, &p.f, None)?;
        let h = hamiltonian(&p.geom, &p.gammas, &p.f)?;
        let r = h.apply(&modes.phi1)?.norm() / modes.phi1.norm();
        writeln!(csv, "{n},{r:.16e}").expect("write to string");
        residuals.push(r);
    }
    let ok = residuals.windows(2).all(|w| w[0] <= floor || w[1] <= (w[0] / 10.0).max(floor));
    let result = json!({ "resolutions": resolutions, "residuals": residuals, "floor": floor });
    Ok(TaskOutput::new(result).check("tenfold_per_doubling", ok).with_csv(csv))
}
