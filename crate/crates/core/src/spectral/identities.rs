//! Trace identities relating `H_f` and `H_{-f}`, and the action functional.

use std::sync::Arc;

use serde::Serialize;

use super::{dense_spectrum, smallest_eigenpairs_with, SolverOptions, SpectrumResult};
use crate::clifford::GammaSet;
use crate::error::{Error, Result};
use crate::fields::{ScalarField, SpinorField};
use crate::geometry::TorusGeometry;
use crate::operators::{deformed_dirac, dirac_operator, hamiltonian, potential_matrix, OperatorHandle, Sign};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumMethod {
    /// Full spectrum from the dense oracle.
    Dense,
    /// The lowest `k` eigenpairs, trimmed to complete clusters.
    Iterative { k: usize, options: SolverOptions },
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexCheckOptions {
    pub method: SpectrumMethod,
    pub tol: f64,
    /// Tolerance for mapping `H_f` eigenvectors to `H_{-f}` eigenvectors by `Gamma`.
    pub vector_tol: f64,
}

impl Default for IndexCheckOptions {
    fn default() -> Self {
        Self { method: SpectrumMethod::Dense, tol: 1e-8, vector_tol: 1e-7 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IndexReport {
    pub t: f64,
    pub truncation: usize,
    pub theta_f: f64,
    pub theta_minus_f: f64,
    /// `|Theta_f - Theta_{-f}|`, the Witten index at time `t` up to sign.
    pub theta_gap: f64,
    /// `|sum <v, D v> exp(-t lambda)|` over the `H_f` eigenpairs.
    pub d_trace: f64,
    /// `sum <v, Gamma v> exp(-t lambda)` over the `H_f` eigenpairs.
    pub psi_f: f64,
    /// Largest elementwise difference of the sorted spectra.
    pub spectrum_gap: f64,
    /// Largest `||H_{-f} Gamma v - lambda Gamma v||` over `H_f` eigenpairs.
    pub gamma_map_residual: f64,
    pub tol: f64,
    pub vector_tol: f64,
    pub passed: bool,
}

fn spectrum_of<T: Real>(op: &OperatorHandle<T>, method: &SpectrumMethod) -> Result<SpectrumResult<T>> {
    match method {
        SpectrumMethod::Dense => dense_spectrum(op),
        SpectrumMethod::Iterative { k, options } => {
            let s = smallest_eigenpairs_with(op, *k, options)?;
            if !s.converged {
                return Err(Error::Validation(format!("eigensolver did not converge for {}", op.label())));
            }
            Ok(s.complete_clusters(T::lit(1e-6)))
        }
    }
}

pub fn index_checks<T: Real>(
    geom: &Arc<TorusGeometry<T>>,
    gammas: &GammaSet<T>,
    f: &ScalarField<T>,
    t: f64,
    opts: &IndexCheckOptions,
) -> Result<IndexReport> {
    let minus_f = f.scale(-T::one());
    let hp = hamiltonian(geom, gammas, f)?;
    let hm = hamiltonian(geom, gammas, &minus_f)?;
    let d = dirac_operator(geom, gammas)?;
    let sp = spectrum_of(&hp, &opts.method)?;
    let sm = spectrum_of(&hm, &opts.method)?;
    let len = sp.len().min(sm.len());
    let (sp, sm) = (sp.truncated(len), sm.truncated(len));

    let weight = |l: T| (-t * l.as_f64()).exp();
    let theta_f: f64 = sp.eigenvalues.iter().map(|&l| weight(l)).sum();
    let theta_minus_f: f64 = sm.eigenvalues.iter().map(|&l| weight(l)).sum();
    let spectrum_gap = sp
        .eigenvalues
        .iter()
        .zip(&sm.eigenvalues)
        .map(|(a, b)| (*a - *b).abs().as_f64())
        .fold(0.0, f64::max);

    let mut d_trace = 0.0;
    let mut psi_f = 0.0;
    let mut gamma_map_residual: f64 = 0.0;
    for (v, &l) in sp.eigenvectors.iter().zip(&sp.eigenvalues) {
        let w = weight(l);
        d_trace += v.inner(&d.apply(v)?)?.re.as_f64() * w;
        let gv = v.apply_matrix(gammas.chirality())?;
        psi_f += v.inner(&gv)?.re.as_f64() * w;
        let r = hm.apply(&gv)?.sub(&gv.scale_real(l))?.norm() / gv.norm();
        gamma_map_residual = gamma_map_residual.max(r.as_f64());
    }
    let theta_gap = (theta_f - theta_minus_f).abs();
    let d_trace = d_trace.abs();
    let passed = theta_gap <= opts.tol
        && d_trace <= opts.tol
        && spectrum_gap <= opts.tol
        && gamma_map_residual <= opts.vector_tol;
    Ok(IndexReport {
        t,
        truncation: len,
        theta_f,
        theta_minus_f,
        theta_gap,
        d_trace,
        psi_f,
        spectrum_gap,
        gamma_map_residual,
        tol: opts.tol,
        vector_tol: opts.vector_tol,
        passed,
    })
}

/// `S_f(u) = ||D_f u||^2`.
pub fn action_functional<T: Real>(
    geom: &Arc<TorusGeometry<T>>,
    gammas: &GammaSet<T>,
    f: &ScalarField<T>,
    u: &SpinorField<T>,
) -> Result<T> {
    Ok(action_functional_paths(geom, gammas, f, u)?.0)
}

/// `(||D_f u||^2, ||D u||^2 + <u, m_f u>)`: the action evaluated two ways.
pub fn action_functional_paths<T: Real>(
    geom: &Arc<TorusGeometry<T>>,
    gammas: &GammaSet<T>,
    f: &ScalarField<T>,
    u: &SpinorField<T>,
) -> Result<(T, T)> {
    if u.norm() == T::zero() {
        return Err(Error::ZeroField);
    }
    let df = deformed_dirac(geom, gammas, f, Sign::Plus)?;
    let d = dirac_operator(geom, gammas)?;
    let m = potential_matrix(geom, gammas, f)?;
    let composed = df.apply(u)?.norm_sqr();
    let split = d.apply(u)?.norm_sqr() + m.quadratic_form(u)?;
    Ok((composed, split))
}
