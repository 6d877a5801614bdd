//! Truncated heat traces `Theta(t) = sum exp(-t lambda)` and chirality-weighted
//! supertraces `Psi(t) = sum <v, Gamma v> exp(-t lambda)`.
//!
//! A partial spectrum misses every eigenvalue above the largest computed one,
//! `Lambda`. The missing part is bounded with a Weyl-type counting bound
//! `N(lambda) <= C lambda^m` (`m = dim / 2`), giving
//! `tail(t) <= C t^{-m} Gamma(m + 1, t Lambda)`. `C` is twice the larger of the
//! Weyl constant and the largest ratio `(i + 1) / lambda_i^m` observed in the
//! upper half of the computed spectrum.

use serde::Serialize;
use std::fmt::Write as _;

use super::SpectrumResult;
use crate::clifford::GammaSet;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Serialize)]
pub struct HeatTraceCurve {
    pub t: Vec<f64>,
    pub theta: Vec<f64>,
    pub psi: Vec<f64>,
    /// Number of eigenvalues summed.
    pub truncation: usize,
    /// Upper bound on the omitted part of `theta` at each `t`.
    pub truncation_bound: Vec<f64>,
    /// Smallest `t` at which the bound is within `accuracy` of `theta`.
    pub threshold: f64,
    pub accuracy: f64,
}

impl HeatTraceCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,theta,psi,truncation_bound\n");
        for i in 0..self.t.len() {
            writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e}", self.t[i], self.theta[i], self.psi[i], self.truncation_bound[i])
                .expect("write to string");
        }
        out
    }
}

/// `2^m vol / ((4 pi)^m m!)`, the leading Weyl coefficient for spinors on an `n = 2m` torus.
pub fn weyl_constant(dim: usize, volume: f64) -> f64 {
    let m = (dim / 2) as i32;
    let fact: f64 = (1..=m).map(f64::from).product();
    2f64.powi(m) * volume / ((4.0 * std::f64::consts::PI).powi(m) * fact)
}

struct TailModel {
    m: i32,
    c: f64,
    lambda_max: f64,
    complete: bool,
}

impl TailModel {
    fn new<T: Real>(spec: &SpectrumResult<T>, dim: usize, volume: f64) -> Self {
        let m = (dim / 2) as i32;
        let lambda_max = spec.eigenvalues.last().map(|l| l.as_f64()).unwrap_or(0.0);
        let observed = spec
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, l)| l.as_f64() >= 0.5 * lambda_max && l.as_f64() > 0.0)
            .map(|(i, l)| (i + 1) as f64 / l.as_f64().powi(m))
            .fold(0.0, f64::max);
        Self { m, c: 2.0 * weyl_constant(dim, volume).max(observed), lambda_max, complete: spec.is_complete() }
    }

    fn bound(&self, t: f64) -> f64 {
        if self.complete {
            return 0.0;
        }
        // Gamma(s, x) = (s-1)! e^{-x} sum_{j<s} x^j / j! for integer s = m + 1
        let s = self.m + 1;
        let x = t * self.lambda_max;
        let mut term = 1.0;
        let mut sum = 1.0;
        for j in 1..s {
            term *= x / f64::from(j);
            sum += term;
        }
        let fact: f64 = (1..s).map(f64::from).product();
        self.c * t.powi(-self.m) * fact * (-x).exp() * sum
    }
}

fn theta_at<T: Real>(spec: &SpectrumResult<T>, t: f64) -> f64 {
    spec.eigenvalues.iter().map(|l| (-t * l.as_f64()).exp()).sum()
}

fn geometry_of<T: Real>(spec: &SpectrumResult<T>) -> Result<(usize, f64)> {
    let v = spec
        .eigenvectors
        .first()
        .ok_or_else(|| Error::Validation("heat traces need eigenvectors".into()))?;
    Ok((v.geometry().dim(), v.geometry().volume().as_f64()))
}

/// Smallest `t` with `tail(t) <= accuracy * Theta(t)`; zero for complete spectra.
pub fn validity_threshold<T: Real>(spec: &SpectrumResult<T>, accuracy: f64) -> Result<f64> {
    let (dim, volume) = geometry_of(spec)?;
    let model = TailModel::new(spec, dim, volume);
    if model.complete {
        return Ok(0.0);
    }
    let ok = |t: f64| model.bound(t) <= accuracy * theta_at(spec, t);
    let mut hi = 1e-3;
    while !ok(hi) {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::Validation("truncation bound never reaches the requested accuracy".into()));
        }
    }
    let mut lo = 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

pub fn heat_traces<T: Real>(
    spec: &SpectrumResult<T>,
    gammas: &GammaSet<T>,
    t_grid: &[f64],
    accuracy: f64,
) -> Result<HeatTraceCurve> {
    if !spec.converged {
        return Err(Error::Validation("heat traces need a converged spectrum".into()));
    }
    if !spec.has_vectors() {
        return Err(Error::Validation("heat traces need eigenvectors".into()));
    }
    let (dim, volume) = geometry_of(spec)?;
    let model = TailModel::new(spec, dim, volume);
    let threshold = validity_threshold(spec, accuracy)?;
    let chirality: Vec<f64> = spec
        .eigenvectors
        .iter()
        .map(|v| {
            let gv = v.apply_matrix(gammas.chirality())?;
            Ok(v.inner(&gv)?.re.as_f64())
        })
        .collect::<Result<_>>()?;

    let mut curve = HeatTraceCurve {
        t: Vec::new(),
        theta: Vec::new(),
        psi: Vec::new(),
        truncation: spec.len(),
        truncation_bound: Vec::new(),
        threshold,
        accuracy,
    };
    for &t in t_grid {
        if t <= 0.0 || t.is_nan() || t < threshold {
            return Err(Error::TBelowThreshold { t, threshold });
        }
        let weights: Vec<f64> = spec.eigenvalues.iter().map(|l| (-t * l.as_f64()).exp()).collect();
        curve.t.push(t);
        curve.theta.push(weights.iter().sum());
        curve.psi.push(weights.iter().zip(&chirality).map(|(w, c)| w * c).sum());
        curve.truncation_bound.push(model.bound(t));
    }
    Ok(curve)
}
