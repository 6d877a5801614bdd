//! Spectral laboratory for deformed Dirac operators `D_f = D + i f` and their
//! Hamiltonians `H_f = D_f^* D_f` on flat tori.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! aliases at the crate root fix `f64`, which is what the tests and the CLI use.

pub mod analysis;
pub mod clifford;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod operators;
pub mod random;
pub mod scalar;
pub mod spectral;

pub use clifford::{build_gamma_set, chiral_projectors, majorana_transform, CMatrix, GammaSet};
pub use error::{Error, Result};
pub use fields::{
    antiderivative_on_circle, decompose_deformation, inner_product, spectral_derivative, DeformationSpec,
    FieldContainer, FieldKind, ScalarField, SpinorField,
};
pub use geometry::{make_torus, SpinStructure, TorusGeometry};
pub use operators::{OperatorHandle, PotentialMatrixField, Sign};
pub use scalar::{Cplx, Real};
pub use spectral::{HeatTraceCurve, SpectrumResult};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Geometry = TorusGeometry<f64>;
pub type Field = ScalarField<f64>;
pub type Spinor = SpinorField<f64>;
pub type Gammas = GammaSet<f64>;
pub type Matrix = CMatrix<f64>;
pub type Deformation = DeformationSpec<f64>;
pub type Operator = OperatorHandle<f64>;
pub type Spectrum = SpectrumResult<f64>;
