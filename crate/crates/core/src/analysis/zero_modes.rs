//! Closed-form zero modes on products `N x S^1` and the diagnostics every
//! zero mode of `H_f` must satisfy.
//!
//! With `f = tau h(r)` depending on the last circle only, `omega' = h` and
//! `psi0` a kernel half-spinor of the cross-section operator, the fields
//!
//! ```text
//! phi1 = exp(-tau omega) (psi0,  psi0)
//! phi2 = exp(+tau omega) (psi0, -psi0)
//! ```
//!
//! are annihilated by `D_f`.

use std::sync::Arc;

use serde::Serialize;

use crate::clifford::GammaSet;
use crate::error::{Error, Result};
use crate::fields::{antiderivative_on_circle, decompose_deformation, ScalarField, SpinorField};
use crate::geometry::TorusGeometry;
use crate::operators::{chiral_blocks, dirac_operator, hamiltonian};
use crate::scalar::{cplx, Real};

/// Kernel residual above which `psi0` is rejected.
pub const KERNEL_TOL: f64 = 1e-10;
/// Points with `|f|` below this belong to neither nodal region.
pub const NODAL_EPS: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct ProductZeroModes<T: Real> {
    pub phi1: SpinorField<T>,
    pub phi2: SpinorField<T>,
    /// `2 int exp(-2 tau omega) dr`
    pub a1: T,
    /// `2 int exp(+2 tau omega) dr`
    pub a2: T,
    pub omega: ScalarField<T>,
    /// `||psi0||^2` on the cross-section.
    pub psi0_norm_sq: T,
    pub kernel_residual: T,
}

impl<T: Real> ProductZeroModes<T> {
    /// `| ||phi||^2 - A ||psi0||^2 | / ||phi||^2` for both modes.
    pub fn norm_gaps(&self) -> (T, T) {
        let gap = |phi: &SpinorField<T>, a: T| {
            let n = phi.norm_sqr();
            (n - a * self.psi0_norm_sq).abs() / n
        };
        (gap(&self.phi1, self.a1), gap(&self.phi2, self.a2))
    }
}

/// Constant half-spinor `(1, 0, ..., 0)`.
pub fn constant_kernel_spinor<T: Real>(geom: &Arc<TorusGeometry<T>>) -> SpinorField<T> {
    let half = geom.spinor_components() / 2;
    let mut v = vec![cplx(T::zero(), T::zero()); half];
    v[0] = cplx(T::one(), T::zero());
    SpinorField::constant(geom, &v)
}

/// Builds `phi1`, `phi2` for `f = tau h`; `h` must depend on the last axis
/// only and average to zero. `psi0` defaults to [`constant_kernel_spinor`].
pub fn build_product_zero_modes<T: Real>(
    geom: &Arc<TorusGeometry<T>>,
    gammas: &GammaSet<T>,
    h: &ScalarField<T>,
    tau: T,
    psi0: Option<&SpinorField<T>>,
) -> Result<ProductZeroModes<T>> {
    let r_axis = geom.dim() - 1;
    let omega = antiderivative_on_circle(h, r_axis)?;
    let default_psi0;
    let psi0 = match psi0 {
        Some(p) => p,
        None => {
            default_psi0 = constant_kernel_spinor(geom);
            &default_psi0
        }
    };
    let half = gammas.size() / 2;
    if psi0.components() != half {
        return Err(Error::ComponentMismatch { expected: half, got: psi0.components() });
    }
    let psi_norm = psi0.norm();
    if psi_norm == T::zero() {
        return Err(Error::ZeroField);
    }
    // psi0 must lie in ker A and be constant along the distinguished circle.
    let blocks = chiral_blocks(geom, gammas, h)?;
    let a_res = blocks.a.apply(psi0)?.norm();
    let b_res = blocks.b.apply(psi0)?.norm();
    let kernel_residual = (a_res * a_res + b_res * b_res).sqrt() / psi_norm;
    if kernel_residual > T::lit(KERNEL_TOL) {
        return Err(Error::NotInKernel { residual: kernel_residual.as_f64() });
    }

    let w = omega.real_values();
    let decay = ScalarField::from_real_samples(geom, w.iter().map(|&o| (-tau * o).exp()).collect())?;
    let growth = ScalarField::from_real_samples(geom, w.iter().map(|&o| (tau * o).exp()).collect())?;
    let phi1 = SpinorField::stack(&psi0.multiply(&decay)?, &psi0.multiply(&decay)?)?;
    let phi2 = SpinorField::stack(&psi0.multiply(&growth)?, &psi0.multiply(&growth)?.scale_real(-T::one()))?;

    // Quadrature along the distinguished circle at the other coordinates = 0.
    let n_r = geom.grid()[r_axis];
    let dr = geom.circumference(r_axis) / T::from_usize_lossy(n_r);
    let line = |sign: T| {
        (0..n_r).map(|j| (sign * T::lit(2.0) * tau * w[j]).exp()).sum::<T>() * dr * T::lit(2.0)
    };
    let psi0_norm_sq = psi_norm * psi_norm / geom.circumference(r_axis);
    Ok(ProductZeroModes { phi1, phi2, a1: line(-T::one()), a2: line(T::one()), omega, psi0_norm_sq, kernel_residual })
}

/// Same as [`build_product_zero_modes`] starting from `f = mu + tau h`.
/// Refuses `mu != 0`: the product solutions are then not periodic.
pub fn build_product_zero_modes_for<T: Real>(
    geom: &Arc<TorusGeometry<T>>,
    gammas: &GammaSet<T>,
    f: &ScalarField<T>,
    psi0: Option<&SpinorField<T>>,
) -> Result<ProductZeroModes<T>> {
    let spec = decompose_deformation(f)?;
    let scale = f.max_abs().max(T::one());
    if spec.mu.abs() > T::lit(1e-12) * scale {
        return Err(Error::NonPeriodicSolution { mu: spec.mu.as_f64() });
    }
    if spec.degenerate {
        return Err(Error::Validation("deformation is constant; no product zero modes".into()));
    }
    build_product_zero_modes(geom, gammas, &spec.h, spec.tau, psi0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroModeTolerances {
    pub residual: f64,
    pub pairing: f64,
    pub divergence: f64,
}

impl Default for ZeroModeTolerances {
    fn default() -> Self {
        Self { residual: 1e-7, pairing: 1e-8, divergence: 1e-7 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ZeroModeReport {
    pub residual: f64,
    pub pairing_f: f64,
    pub pairing_d: f64,
    pub norm_identity_gap: f64,
    /// Max-norm of `f |phi|^2 + div J / 2` for unit-norm `phi`.
    pub divergence_gap: f64,
    pub flux_plus: Option<f64>,
    pub flux_minus: Option<f64>,
    pub tolerances: ZeroModeTolerances,
    pub verified: bool,
}

/// Pointwise current `J^a = <phi, gamma^a phi>`.
pub fn current<T: Real>(gammas: &GammaSet<T>, phi: &SpinorField<T>) -> Result<Vec<ScalarField<T>>> {
    gammas
        .gammas()
        .iter()
        .map(|g| {
            let j = phi.fibre_product(g, phi)?;
            ScalarField::from_real_samples(phi.geometry(), j.values().iter().map(|z| z.re).collect())
        })
        .collect()
}

pub fn verify_zero_mode<T: Real>(
    geom: &Arc<TorusGeometry<T>>,
    gammas: &GammaSet<T>,
    f: &ScalarField<T>,
    phi: &SpinorField<T>,
    tolerances: &ZeroModeTolerances,
) -> Result<ZeroModeReport> {
    let phi = phi.normalized()?;
    let h = hamiltonian(geom, gammas, f)?;
    let d = dirac_operator(geom, gammas)?;
    let residual = h.apply(&phi)?.norm().as_f64();
    let fphi = phi.multiply(f)?;
    let dphi = d.apply(&phi)?;
    let pairing_f = phi.inner(&fphi)?.norm().as_f64();
    let pairing_d = phi.inner(&dphi)?.norm().as_f64();
    let norm_identity_gap = (dphi.norm_sqr() - fphi.norm_sqr()).abs().as_f64();

    let mut div = ScalarField::zeros(geom);
    for (axis, j) in current(gammas, &phi)?.iter().enumerate() {
        div = div.add(&j.spectral_derivative(axis)?)?;
    }
    let lhs = f.mul(&phi.density())?;
    let divergence_gap = lhs.add(&div.scale(T::lit(0.5)))?.max_abs().as_f64();

    let (flux_plus, flux_minus) = match nodal_flux(geom, gammas, f, &phi) {
        Ok(r) => (Some(r.flux_plus), Some(r.flux_minus)),
        Err(Error::NoNodalSet) => (None, None),
        Err(e) => return Err(e),
    };
    let verified = residual <= tolerances.residual
        && pairing_f <= tolerances.pairing
        && pairing_d <= tolerances.pairing
        && norm_identity_gap <= tolerances.pairing
        && divergence_gap <= tolerances.divergence;
    Ok(ZeroModeReport {
        residual,
        pairing_f,
        pairing_d,
        norm_identity_gap,
        divergence_gap,
        flux_plus,
        flux_minus,
        tolerances: *tolerances,
        verified,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FluxReport {
    /// `int_{f > 0} f |phi|^2` for unit-norm `phi`.
    pub flux_plus: f64,
    /// `int_{f < 0} f |phi|^2` for unit-norm `phi`.
    pub flux_minus: f64,
    /// `|I+ + I-| / (|I+| + |I-|)`
    pub balance_gap: f64,
    /// `max |J(Gamma phi) + J(phi)| / max |J(phi)|`; zero when the current reverses exactly.
    pub current_reversal_gap: f64,
}

pub fn nodal_flux<T: Real>(
    geom: &Arc<TorusGeometry<T>>,
    gammas: &GammaSet<T>,
    f: &ScalarField<T>,
    phi: &SpinorField<T>,
) -> Result<FluxReport> {
    if !f.is_real() {
        return Err(Error::ComplexDeformation);
    }
    if !geom.same_as(f.geometry()) || !geom.same_as(phi.geometry()) {
        return Err(Error::GeometryMismatch);
    }
    let phi = phi.normalized()?;
    let fv = f.real_values();
    let eps = T::lit(NODAL_EPS);
    if !fv.iter().any(|&v| v > eps) || !fv.iter().any(|&v| v < -eps) {
        return Err(Error::NoNodalSet);
    }
    let dens = phi.density().real_values();
    let w = geom.cell_volume();
    let (mut plus, mut minus) = (T::zero(), T::zero());
    for (&v, &rho) in fv.iter().zip(&dens) {
        if v > eps {
            plus = plus + v * rho * w;
        } else if v < -eps {
            minus = minus + v * rho * w;
        }
    }
    let balance_gap = (plus + minus).abs() / (plus.abs() + minus.abs());

    let j = current(gammas, &phi)?;
    let jg = current(gammas, &phi.apply_matrix(gammas.chirality())?)?;
    let mut num = T::zero();
    let mut den = T::zero();
    for (a, b) in j.iter().zip(&jg) {
        num = num.max(a.add(b)?.max_abs());
        den = den.max(a.max_abs());
    }
    let current_reversal_gap = if den > T::zero() { num / den } else { T::zero() };
    Ok(FluxReport {
        flux_plus: plus.as_f64(),
        flux_minus: minus.as_f64(),
        balance_gap: balance_gap.as_f64(),
        current_reversal_gap: current_reversal_gap.as_f64(),
    })
}
