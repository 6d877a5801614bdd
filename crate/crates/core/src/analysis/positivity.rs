//! Pointwise positivity criteria for `H_f` and their spectral confirmation.

use std::sync::Arc;

use serde::Serialize;

use crate::clifford::GammaSet;
use crate::error::{Error, Result};
use crate::fields::ScalarField;
use crate::geometry::TorusGeometry;
use crate::operators::hamiltonian;
use crate::scalar::Real;
use crate::spectral::{dense_spectrum, smallest_eigenpairs_with, SolverOptions, SpectrumResult, DENSE_LIMIT, ZERO_FLOOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    UniformGradient,
    SignDefinite,
}

#[derive(Debug, Clone, Serialize)]
pub struct PositivityReport {
    pub condition: Condition,
    pub holds: bool,
    pub margin: f64,
    pub witness_point: usize,
    pub witness_coordinates: Vec<f64>,
}

fn report<T: Real>(f: &ScalarField<T>, condition: Condition, margin: f64, witness: usize) -> PositivityReport {
    PositivityReport {
        condition,
        holds: margin > 0.0,
        margin,
        witness_point: witness,
        witness_coordinates: f.geometry().point_coordinates(witness).iter().map(|x| x.as_f64()).collect(),
    }
}

fn argmin(values: impl Iterator<Item = f64>) -> (usize, f64) {
    values
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, v)| if v < bv { (i, v) } else { (bi, bv) })
}

/// `min (f^2 - |grad f|)` over the grid; holds when strictly positive.
pub fn check_uniform_condition<T: Real>(f: &ScalarField<T>) -> Result<PositivityReport> {
    if !f.is_real() {
        return Err(Error::ComplexDeformation);
    }
    let grad = f.gradient_norm()?;
    let fv = f.real_values();
    let (p, margin) = argmin(fv.iter().zip(&grad).map(|(&v, &g)| (v * v - g).as_f64()));
    Ok(report(f, Condition::UniformGradient, margin, p))
}

/// Margin `min |f|` when `f` has one sign on the grid and `-min |f|` otherwise.
///
/// Errors with [`Error::ImplicationViolated`] if the uniform gradient
/// condition holds for a nonzero `f` that is not sign-definite.
pub fn check_sign_definite<T: Real>(f: &ScalarField<T>) -> Result<PositivityReport> {
    if !f.is_real() {
        return Err(Error::ComplexDeformation);
    }
    let fv: Vec<f64> = f.real_values().iter().map(|v| v.as_f64()).collect();
    let (p, min_abs) = argmin(fv.iter().map(|v| v.abs()));
    let one_sign = fv.iter().all(|&v| v > 0.0) || fv.iter().all(|&v| v < 0.0);
    let margin = if one_sign { min_abs } else { -min_abs };
    let out = report(f, Condition::SignDefinite, margin, p);
    if !out.holds && f.max_abs() > T::zero() && check_uniform_condition(f)?.holds {
        return Err(Error::ImplicationViolated { witness: p });
    }
    Ok(out)
}

/// Halves `tau` from `tau0` until `mu + tau h` passes the uniform condition.
pub fn find_passing_tau<T: Real>(mu: T, h: &ScalarField<T>, tau0: T, max_halvings: usize) -> Result<Option<(T, PositivityReport)>> {
    let mut tau = tau0;
    for _ in 0..=max_halvings {
        let r = check_uniform_condition(&h.scale(tau).add_constant(mu))?;
        if r.holds {
            return Ok(Some((tau, r)));
        }
        tau = tau * T::lit(0.5);
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumCheckOptions {
    /// Number of eigenpairs requested from the iterative solver.
    pub k: usize,
    pub solver: SolverOptions,
    /// Use the dense oracle instead when the dimension allows it.
    pub dense: bool,
}

impl Default for SpectrumCheckOptions {
    fn default() -> Self {
        Self { k: 4, solver: SolverOptions::default(), dense: false }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PositivityVsSpectrum {
    pub uniform: PositivityReport,
    pub sign_definite: PositivityReport,
    pub checker_holds: bool,
    pub lambda_min: f64,
    pub zero_threshold: f64,
    pub converged: bool,
    /// `checker_holds` implies `lambda_min > zero_threshold`.
    pub consistent: bool,
    /// The criteria are sufficient only; a failing checker says nothing about the spectrum.
    pub note: &'static str,
}

pub fn positivity_vs_spectrum<T: Real>(
    geom: &Arc<TorusGeometry<T>>,
    gammas: &GammaSet<T>,
    f: &ScalarField<T>,
    opts: &SpectrumCheckOptions,
) -> Result<(PositivityVsSpectrum, SpectrumResult<T>)> {
    let uniform = check_uniform_condition(f)?;
    let sign_definite = check_sign_definite(f)?;
    let h = hamiltonian(geom, gammas, f)?;
    let spec = if opts.dense && h.dimension() <= DENSE_LIMIT {
        dense_spectrum(&h)?.truncated(opts.k)
    } else {
        smallest_eigenpairs_with(&h, opts.k, &opts.solver)?
    };
    let lambda_min = spec.min_eigenvalue().map(|l| l.as_f64()).unwrap_or(f64::NAN);
    let zero_threshold = spec.zero_threshold().as_f64().max(ZERO_FLOOR);
    let checker_holds = uniform.holds || sign_definite.holds;
    let consistent = !checker_holds || lambda_min > zero_threshold;
    let note = if checker_holds {
        "criterion holds: spectrum must be strictly positive"
    } else {
        "sufficient-only: criterion fails, no spectral conclusion"
    };
    Ok((
        PositivityVsSpectrum {
            uniform,
            sign_definite,
            checker_holds,
            lambda_min,
            zero_threshold,
            converged: spec.converged,
            consistent,
            note,
        },
        spec,
    ))
}
