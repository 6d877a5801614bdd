//! Low-lying spectra, heat traces and trace identities.

mod dense;
mod heat;
mod identities;
mod iterative;

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::SpinorField;
use crate::scalar::Real;

pub use dense::{dense_eigenvalues, dense_spectrum, materialize, DENSE_LIMIT};
pub use heat::{heat_traces, validity_threshold, weyl_constant, HeatTraceCurve};
pub use identities::{
    action_functional, action_functional_paths, index_checks, IndexCheckOptions, IndexReport, SpectrumMethod,
};
pub use iterative::{smallest_eigenpairs, smallest_eigenpairs_with, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Iterative,
    Dense,
}

/// Eigenpairs of a self-adjoint operator, ascending.
///
/// Eigenvectors have unit L2 norm; residuals are `||H v - lambda v||`.
#[derive(Debug, Clone)]
pub struct SpectrumResult<T: Real> {
    pub label: String,
    pub eigenvalues: Vec<T>,
    pub eigenvectors: Vec<SpinorField<T>>,
    pub residuals: Vec<T>,
    pub solver: SolverKind,
    pub iterations: usize,
    pub tolerance: T,
    pub converged: bool,
    /// Dimension of the operator the spectrum belongs to.
    pub dimension: usize,
}

/// Eigenvalues below this count as zero regardless of the spectrum.
pub const ZERO_FLOOR: f64 = 1e-9;
/// Relative part of the zero-mode threshold.
pub const ZERO_RELATIVE: f64 = 1e-6;

impl<T: Real> SpectrumResult<T> {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Every eigenvalue of the operator is present.
    pub fn is_complete(&self) -> bool {
        self.len() == self.dimension
    }

    pub fn has_vectors(&self) -> bool {
        self.eigenvectors.len() == self.eigenvalues.len()
    }

    pub fn min_eigenvalue(&self) -> Option<T> {
        self.eigenvalues.first().copied()
    }

    pub fn max_residual(&self) -> T {
        self.residuals.iter().copied().fold(T::zero(), T::max)
    }

    /// Threshold `max(1e-9, 1e-6 * lambda_next)`, `lambda_next` being the
    /// first eigenvalue above the absolute floor.
    pub fn zero_threshold(&self) -> T {
        let floor = T::lit(ZERO_FLOOR);
        match self.eigenvalues.iter().find(|&&l| l >= floor) {
            Some(&next) => floor.max(T::lit(ZERO_RELATIVE) * next),
            None => floor,
        }
    }

    pub fn zero_count(&self) -> usize {
        let th = self.zero_threshold();
        self.eigenvalues.iter().filter(|&&l| l < th).count()
    }

    /// First `k` pairs.
    pub fn truncated(&self, k: usize) -> Self {
        let k = k.min(self.len());
        Self {
            eigenvalues: self.eigenvalues[..k].to_vec(),
            eigenvectors: self.eigenvectors.iter().take(k).cloned().collect(),
            residuals: self.residuals[..k].to_vec(),
            ..self.clone()
        }
    }

    /// Pairs with eigenvalue strictly below `cutoff`.
    pub fn below(&self, cutoff: T) -> Self {
        let k = self.eigenvalues.iter().take_while(|&&l| l < cutoff).count();
        self.truncated(k)
    }

    /// Drops the trailing cluster of (near-)equal eigenvalues, which may be
    /// incomplete when the spectrum is partial. Complete spectra are returned unchanged.
    pub fn complete_clusters(&self, rel_tol: T) -> Self {
        if self.is_complete() || self.is_empty() {
            return self.clone();
        }
        let last = *self.eigenvalues.last().expect("nonempty");
        let width = rel_tol * last.abs().max(T::one());
        let keep = self.eigenvalues.iter().take_while(|&&l| last - l > width).count();
        self.truncated(keep)
    }

    fn summary(&self) -> SpectrumSummary {
        SpectrumSummary {
            label: self.label.clone(),
            solver: self.solver,
            dimension: self.dimension,
            count: self.len(),
            converged: self.converged,
            iterations: self.iterations,
            tolerance: self.tolerance.as_f64(),
            zero_threshold: self.zero_threshold().as_f64(),
            zero_count: self.zero_count(),
            eigenvalues: self.eigenvalues.iter().map(|v| v.as_f64()).collect(),
            residuals: self.residuals.iter().map(|v| v.as_f64()).collect(),
        }
    }

    /// JSON metadata and arrays; eigenvectors are not included.
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self.summary()).expect("plain data")
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.summary()).map_err(|e| Error::Serialization(e.to_string()))
    }

    /// One row per eigenvalue: `index,eigenvalue,residual`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,eigenvalue,residual\n");
        for (i, (l, r)) in self.eigenvalues.iter().zip(&self.residuals).enumerate() {
            writeln!(out, "{i},{:.16e},{:.16e}", l.as_f64(), r.as_f64()).expect("write to string");
        }
        out
    }
}

#[derive(Serialize)]
struct SpectrumSummary {
    label: String,
    solver: SolverKind,
    dimension: usize,
    count: usize,
    converged: bool,
    iterations: usize,
    tolerance: f64,
    zero_threshold: f64,
    zero_count: usize,
    eigenvalues: Vec<f64>,
    residuals: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fake(values: &[f64], dimension: usize) -> SpectrumResult<f64> {
        SpectrumResult {
            label: "test".into(),
            eigenvalues: values.to_vec(),
            eigenvectors: Vec::new(),
            residuals: vec![0.0; values.len()],
            solver: SolverKind::Dense,
            iterations: 0,
            tolerance: 1e-10,
            converged: true,
            dimension,
        }
    }

    #[test]
    fn zero_threshold_rule() {
        let s = fake(&[1e-12, 3e-10, 2.0, 2.0], 10);
        assert_eq!(s.zero_threshold(), 2e-6);
        assert_eq!(s.zero_count(), 2);
        let t = fake(&[1e-12, 1e-4], 10);
        assert_eq!(t.zero_threshold(), 1e-9);
        assert_eq!(t.zero_count(), 1);
    }

    #[test]
    fn trailing_cluster_is_dropped() {
        let s = fake(&[0.0, 1.0, 1.0, 2.0, 2.0 + 1e-12], 10);
        assert_eq!(s.complete_clusters(1e-8).eigenvalues, vec![0.0, 1.0, 1.0]);
        let full = fake(&[0.0, 1.0], 2);
        assert_eq!(full.complete_clusters(1e-8).len(), 2);
    }

    #[test]
    fn csv_has_seventeen_digits() {
        let csv = fake(&[1.0 / 3.0], 1).to_csv();
        assert!(csv.contains("3.3333333333333331e-1"), "{csv}");
        assert!(!csv.contains('\r'));
    }
}
