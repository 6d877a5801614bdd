//! Positivity criteria, closed-form zero modes and zero-mode diagnostics.

pub mod catalog;
mod positivity;
mod zero_modes;

pub use positivity::{
    check_sign_definite, check_uniform_condition, find_passing_tau, positivity_vs_spectrum, Condition,
    PositivityReport, PositivityVsSpectrum, SpectrumCheckOptions,
};
pub use zero_modes::{
    build_product_zero_modes, build_product_zero_modes_for, constant_kernel_spinor, current, nodal_flux,
    verify_zero_mode, FluxReport, ProductZeroModes, ZeroModeReport, ZeroModeTolerances, KERNEL_TOL, NODAL_EPS,
};
