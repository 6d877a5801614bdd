//! Named deformation functions used by the test-suite and the CLI presets.
//!
//! Every entry is defined on two-dimensional tori in physical coordinates
//! `(x, y)`, `y` being the distinguished circle.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::fields::ScalarField;
use crate::geometry::TorusGeometry;
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct CatalogEntry<T: Real> {
    pub name: &'static str,
    pub f: ScalarField<T>,
}

/// `h(r) = cos(r) / (pi sqrt 2)`, unit L2 norm on the unit two-torus.
pub fn normalized_cos_profile<T: Real>(geom: &Arc<TorusGeometry<T>>) -> ScalarField<T> {
    let c = T::lit(1.0 / (PI * 2f64.sqrt()));
    let last = geom.dim() - 1;
    ScalarField::from_fn(geom, move |x| c * x[last].cos())
}

/// `-tau a^2 sin(x / a) sin(y / a)`
pub fn torus_sine<T: Real>(geom: &Arc<TorusGeometry<T>>, a: T, tau: T) -> ScalarField<T> {
    ScalarField::from_fn(geom, move |x| -tau * a * a * (x[0] / a).sin() * (x[1] / a).sin())
}

fn entry<T: Real>(geom: &Arc<TorusGeometry<T>>, name: &'static str, f: impl Fn(f64, f64) -> f64) -> CatalogEntry<T> {
    CatalogEntry { name, f: ScalarField::from_fn(geom, |x| T::lit(f(x[0].as_f64(), x[1].as_f64()))) }
}

/// Deformations on which at least one positivity criterion holds.
pub fn positive_catalog<T: Real>(geom: &Arc<TorusGeometry<T>>) -> Vec<CatalogEntry<T>> {
    let h = 1.0 / (PI * 2f64.sqrt());
    vec![
        entry(geom, "constant_one", |_, _| 1.0),
        entry(geom, "constant_minus_two", |_, _| -2.0),
        entry(geom, "two_plus_small_sine", |x, _| 2.0 + 0.1 * x.sin()),
        entry(geom, "one_plus_product_sines", |x, y| 1.0 + 0.2 * x.sin() * y.sin()),
        entry(geom, "unit_mean_small_tau", move |_, y| 1.0 + 0.5 * h * y.cos()),
        entry(geom, "three_plus_cosines", |x, y| 3.0 + x.cos() + y.cos()),
        entry(geom, "negative_diagonal_wave", |x, y| -1.5 - 0.5 * (x + y).sin()),
        entry(geom, "exp_cos", |x, _| x.cos().exp()),
        entry(geom, "mixed_harmonics", |x, y| 1.0 + 0.3 * (2.0 * x).cos() * y.sin()),
        entry(geom, "shifted_torus_sine", |x, y| 2.0 - x.sin() * y.sin()),
        entry(geom, "half_plus_cosine", |x, _| 0.5 + 0.1 * x.cos()),
    ]
}

/// Deformations that change sign; the criteria fail on all of them.
pub fn nodal_catalog<T: Real>(geom: &Arc<TorusGeometry<T>>) -> Vec<CatalogEntry<T>> {
    let h = 1.0 / (PI * 2f64.sqrt());
    vec![
        entry(geom, "normalized_cos", move |_, y| h * y.cos()),
        entry(geom, "torus_sine", |x, y| -x.sin() * y.sin()),
        entry(geom, "one_plus_three_cos", |_, y| 1.0 + 3.0 * y.cos()),
        entry(geom, "fifth_plus_cos_cos", |x, y| 0.2 + x.cos() * y.cos()),
        entry(geom, "sine_r", |_, y| y.sin()),
    ]
}
