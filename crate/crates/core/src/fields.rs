//! Scalar and spinor fields on a [`TorusGeometry`], with Fourier calculus.
//!
//! Spinor samples are stored component-major: component `c` of point `p`
//! lives at `c * num_points + p`. Serialized containers use point-major
//! order instead (all components of point 0, then point 1, ...).
//!
//! Every reduction runs sequentially in storage order, so results are
//! bit-reproducible.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Convention, SpinStructure, TorusGeometry};
use crate::scalar::{cplx, czero, Cplx, Real};

#[derive(Debug, Clone)]
pub struct ScalarField<T: Real> {
    geom: Arc<TorusGeometry<T>>,
    values: Vec<Cplx<T>>,
    real: bool,
}

#[derive(Debug, Clone)]
pub struct SpinorField<T: Real> {
    geom: Arc<TorusGeometry<T>>,
    components: usize,
    data: Vec<Cplx<T>>,
}

impl<T: Real> ScalarField<T> {
    /// Real field sampled from `f(x)` where `x` are the physical coordinates of each grid point.
    pub fn from_fn(geom: &Arc<TorusGeometry<T>>, f: impl Fn(&[T]) -> T) -> Self {
        let values = (0..geom.num_points())
            .map(|p| cplx(f(&geom.point_coordinates(p)), T::zero()))
            .collect();
        Self { geom: geom.clone(), values, real: true }
    }

    pub fn from_complex_fn(geom: &Arc<TorusGeometry<T>>, f: impl Fn(&[T]) -> Cplx<T>) -> Self {
        let values = (0..geom.num_points()).map(|p| f(&geom.point_coordinates(p))).collect();
        Self { geom: geom.clone(), values, real: false }
    }

    pub fn from_real_samples(geom: &Arc<TorusGeometry<T>>, samples: Vec<T>) -> Result<Self> {
        if samples.len() != geom.num_points() {
            return Err(Error::Validation(format!(
                "expected {} samples, got {}",
                geom.num_points(),
                samples.len()
            )));
        }
        Ok(Self {
            geom: geom.clone(),
            values: samples.into_iter().map(|v| cplx(v, T::zero())).collect(),
            real: true,
        })
    }

    pub fn from_complex_samples(geom: &Arc<TorusGeometry<T>>, samples: Vec<Cplx<T>>) -> Result<Self> {
        if samples.len() != geom.num_points() {
            return Err(Error::Validation(format!(
                "expected {} samples, got {}",
                geom.num_points(),
                samples.len()
            )));
        }
        Ok(Self { geom: geom.clone(), values: samples, real: false })
    }

    pub fn constant(geom: &Arc<TorusGeometry<T>>, value: T) -> Self {
        Self::from_fn(geom, |_| value)
    }

    pub fn zeros(geom: &Arc<TorusGeometry<T>>) -> Self {
        Self::constant(geom, T::zero())
    }

    pub fn geometry(&self) -> &Arc<TorusGeometry<T>> {
        &self.geom
    }

    pub fn values(&self) -> &[Cplx<T>] {
        &self.values
    }

    /// Flagged real-valued (imaginary parts exactly zero).
    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn real_values(&self) -> Vec<T> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn value(&self, p: usize) -> Cplx<T> {
        self.values[p]
    }

    pub fn map_real(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            geom: self.geom.clone(),
            values: self.values.iter().map(|v| cplx(f(v.re), T::zero())).collect(),
            real: true,
        }
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            geom: self.geom.clone(),
            values: self.values.iter().map(|v| *v * s).collect(),
            real: self.real,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn add_constant(&self, c: T) -> Self {
        Self {
            geom: self.geom.clone(),
            values: self.values.iter().map(|v| cplx(v.re + c, v.im)).collect(),
            real: self.real,
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Cplx<T>, Cplx<T>) -> Cplx<T>) -> Result<Self> {
        if !self.geom.same_as(&other.geom) {
            return Err(Error::GeometryMismatch);
        }
        let real = self.real && other.real;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| {
                let v = f(a, b);
                if real {
                    cplx(v.re, T::zero())
                } else {
                    v
                }
            })
            .collect();
        Ok(Self { geom: self.geom.clone(), values, real })
    }

    pub fn integral(&self) -> Cplx<T> {
        let w = self.geom.cell_volume();
        self.values.iter().fold(czero(), |acc, &v| acc + v) * w
    }

    /// Volume-weighted mean.
    pub fn mean(&self) -> Cplx<T> {
        self.integral() / self.geom.volume()
    }

    pub fn l2_norm(&self) -> T {
        let w = self.geom.cell_volume();
        (self.values.iter().map(|v| v.norm_sqr()).sum::<T>() * w).sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().map(|v| v.norm()).fold(T::zero(), T::max)
    }

    /// Exact derivative of the trigonometric interpolant along `axis`.
    pub fn spectral_derivative(&self, axis: usize) -> Result<Self> {
        self.geom.check_axis(axis)?;
        let mut values = self.values.clone();
        self.geom.differentiate(&mut values, axis, 1, Convention::Scalar);
        if self.real {
            for v in values.iter_mut() {
                v.im = T::zero();
            }
        }
        Ok(Self { geom: self.geom.clone(), values, real: self.real })
    }

    /// Frame-scaled gradient norm `sqrt(sum_a (e_a f)^2)` of a real field, per grid point.
    pub fn gradient_norm(&self) -> Result<Vec<T>> {
        if !self.real {
            return Err(Error::ComplexDeformation);
        }
        let mut sq = vec![T::zero(); self.values.len()];
        for axis in 0..self.geom.dim() {
            let d = self.spectral_derivative(axis)?;
            for (s, v) in sq.iter_mut().zip(&d.values) {
                *s = *s + v.re * v.re;
            }
        }
        Ok(sq.into_iter().map(|s| s.sqrt()).collect())
    }

    /// Largest deviation from the axis-line average over the other axes,
    /// i.e. how far the field is from depending on `axis` alone.
    pub fn deviation_from_single_axis(&self, axis: usize) -> Result<T> {
        self.geom.check_axis(axis)?;
        let profile = self.axis_profile(axis);
        let g = &self.geom;
        let mut dev = T::zero();
        for p in 0..g.num_points() {
            let j = g.multi_index(p)[axis];
            dev = dev.max((self.values[p] - profile[j]).norm());
        }
        Ok(dev)
    }

    /// Samples along `axis` averaged over all other axes.
    pub fn axis_profile(&self, axis: usize) -> Vec<Cplx<T>> {
        let g = &self.geom;
        let n = g.grid()[axis];
        let mut acc = vec![czero(); n];
        for p in 0..g.num_points() {
            acc[g.multi_index(p)[axis]] = acc[g.multi_index(p)[axis]] + self.values[p];
        }
        let count = T::from_usize_lossy(g.num_points() / n);
        acc.into_iter().map(|v| v / count).collect()
    }

    pub fn to_container(&self) -> FieldContainer {
        let g = &self.geom;
        FieldContainer {
            kind: FieldKind::Scalar,
            dim: g.dim(),
            radii: g.radii().iter().map(|a| a.as_f64()).collect(),
            grid: g.grid().to_vec(),
            spin_structure: g.spin_structure().to_vec(),
            components: 1,
            real: self.real,
            samples: self.values.iter().map(|v| [v.re.as_f64(), v.im.as_f64()]).collect(),
        }
    }

    pub fn from_container(geom: &Arc<TorusGeometry<T>>, c: &FieldContainer) -> Result<Self> {
        c.check_against(geom, FieldKind::Scalar, 1)?;
        let values: Vec<Cplx<T>> = c.samples.iter().map(|s| cplx(T::lit(s[0]), T::lit(s[1]))).collect();
        if c.real && values.iter().any(|v| v.im != T::zero()) {
            return Err(Error::Serialization("real field with nonzero imaginary part".into()));
        }
        Ok(Self { geom: geom.clone(), values, real: c.real })
    }
}

impl<T: Real> SpinorField<T> {
    pub fn zeros(geom: &Arc<TorusGeometry<T>>, components: usize) -> Self {
        Self { geom: geom.clone(), components, data: vec![czero(); components * geom.num_points()] }
    }

    /// Field with `f(x, c)` as component `c` at physical point `x`.
    pub fn from_fn(geom: &Arc<TorusGeometry<T>>, components: usize, f: impl Fn(&[T], usize) -> Cplx<T>) -> Self {
        let np = geom.num_points();
        let mut data = vec![czero(); components * np];
        for p in 0..np {
            let x = geom.point_coordinates(p);
            for c in 0..components {
                data[c * np + p] = f(&x, c);
            }
        }
        Self { geom: geom.clone(), components, data }
    }

    /// Same spinor value at every point.
    pub fn constant(geom: &Arc<TorusGeometry<T>>, value: &[Cplx<T>]) -> Self {
        Self::from_fn(geom, value.len(), |_, c| value[c])
    }

    /// Component-major sample vector.
    pub fn from_data(geom: &Arc<TorusGeometry<T>>, components: usize, data: Vec<Cplx<T>>) -> Result<Self> {
        if data.len() != components * geom.num_points() {
            return Err(Error::Validation(format!(
                "expected {} samples, got {}",
                components * geom.num_points(),
                data.len()
            )));
        }
        Ok(Self { geom: geom.clone(), components, data })
    }

    pub fn geometry(&self) -> &Arc<TorusGeometry<T>> {
        &self.geom
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn num_points(&self) -> usize {
        self.geom.num_points()
    }

    /// Total complex degrees of freedom.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[Cplx<T>] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Cplx<T>] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Cplx<T>> {
        self.data
    }

    pub fn component(&self, c: usize) -> &[Cplx<T>] {
        let np = self.num_points();
        &self.data[c * np..(c + 1) * np]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Cplx<T>] {
        let np = self.num_points();
        &mut self.data[c * np..(c + 1) * np]
    }

    pub fn at(&self, p: usize, c: usize) -> Cplx<T> {
        self.data[c * self.num_points() + p]
    }

    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if !self.geom.same_as(&other.geom) {
            return Err(Error::GeometryMismatch);
        }
        if self.components != other.components {
            return Err(Error::ComponentMismatch { expected: self.components, got: other.components });
        }
        Ok(())
    }

    pub fn inner(&self, other: &Self) -> Result<Cplx<T>> {
        inner_product(self, other)
    }

    pub fn norm_sqr(&self) -> T {
        self.data.iter().map(|v| v.norm_sqr()).sum::<T>() * self.geom.cell_volume()
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().map(|v| v.norm()).fold(T::zero(), T::max)
    }

    pub fn scale(&self, s: Cplx<T>) -> Self {
        Self { geom: self.geom.clone(), components: self.components, data: self.data.iter().map(|v| *v * s).collect() }
    }

    pub fn scale_real(&self, s: T) -> Self {
        Self { geom: self.geom.clone(), components: self.components, data: self.data.iter().map(|v| *v * s).collect() }
    }

    /// `self += alpha * x`
    pub fn axpy(&mut self, alpha: Cplx<T>, x: &Self) -> Result<()> {
        self.check_compatible(x)?;
        for (a, b) in self.data.iter_mut().zip(&x.data) {
            *a = *a + alpha * *b;
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.axpy(cplx(T::one(), T::zero()), other)?;
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.axpy(cplx(-T::one(), T::zero()), other)?;
        Ok(out)
    }

    /// Unit-L2-norm copy.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == T::zero() {
            return Err(Error::ZeroField);
        }
        Ok(self.scale_real(T::one() / n))
    }

    /// Pointwise product with a scalar field.
    pub fn multiply(&self, f: &ScalarField<T>) -> Result<Self> {
        if !self.geom.same_as(f.geometry()) {
            return Err(Error::GeometryMismatch);
        }
        let np = self.num_points();
        let mut out = self.clone();
        for c in 0..self.components {
            for p in 0..np {
                out.data[c * np + p] = out.data[c * np + p] * f.values[p];
            }
        }
        Ok(out)
    }

    /// Pointwise action of a constant `components x components` matrix.
    pub fn apply_matrix(&self, m: &crate::clifford::CMatrix<T>) -> Result<Self> {
        if m.size() != self.components {
            return Err(Error::ComponentMismatch { expected: m.size(), got: self.components });
        }
        let np = self.num_points();
        let mut out = Self::zeros(&self.geom, self.components);
        for r in 0..self.components {
            for c in 0..self.components {
                let e = m.get(r, c);
                if e.re == T::zero() && e.im == T::zero() {
                    continue;
                }
                let (src, dst) = (c * np, r * np);
                for p in 0..np {
                    out.data[dst + p] = out.data[dst + p] + e * self.data[src + p];
                }
            }
        }
        Ok(out)
    }

    /// Spectral derivative along `axis` using this geometry's spin structure.
    pub fn spectral_derivative(&self, axis: usize) -> Result<Self> {
        self.derivative_of_order(axis, 1)
    }

    pub(crate) fn derivative_of_order(&self, axis: usize, order: u32) -> Result<Self> {
        self.geom.check_axis(axis)?;
        let mut out = self.clone();
        let np = self.num_points();
        for c in 0..self.components {
            self.geom.differentiate(&mut out.data[c * np..(c + 1) * np], axis, order, Convention::Spinor);
        }
        Ok(out)
    }

    /// `|psi|^2` per point.
    pub fn density(&self) -> ScalarField<T> {
        let np = self.num_points();
        let values = (0..np)
            .map(|p| {
                let s: T = (0..self.components).map(|c| self.data[c * np + p].norm_sqr()).sum();
                cplx(s, T::zero())
            })
            .collect();
        ScalarField { geom: self.geom.clone(), values, real: true }
    }

    /// Pointwise fibre product `<self, m other>` as a complex scalar field.
    pub fn fibre_product(&self, m: &crate::clifford::CMatrix<T>, other: &Self) -> Result<ScalarField<T>> {
        self.check_compatible(other)?;
        let mo = other.apply_matrix(m)?;
        let np = self.num_points();
        let values = (0..np)
            .map(|p| (0..self.components).fold(czero(), |acc, c| acc + self.data[c * np + p].conj() * mo.data[c * np + p]))
            .collect();
        Ok(ScalarField { geom: self.geom.clone(), values, real: false })
    }

    /// Components `[start, start + count)` as a new field.
    pub fn slice_components(&self, start: usize, count: usize) -> Self {
        let np = self.num_points();
        Self {
            geom: self.geom.clone(),
            components: count,
            data: self.data[start * np..(start + count) * np].to_vec(),
        }
    }

    /// Stacks `upper` over `lower` component-wise.
    pub fn stack(upper: &Self, lower: &Self) -> Result<Self> {
        if !upper.geom.same_as(&lower.geom) {
            return Err(Error::GeometryMismatch);
        }
        let mut data = upper.data.clone();
        data.extend_from_slice(&lower.data);
        Ok(Self { geom: upper.geom.clone(), components: upper.components + lower.components, data })
    }

    pub fn to_container(&self) -> FieldContainer {
        let g = &self.geom;
        let np = self.num_points();
        let mut samples = Vec::with_capacity(self.data.len());
        for p in 0..np {
            for c in 0..self.components {
                let v = self.data[c * np + p];
                samples.push([v.re.as_f64(), v.im.as_f64()]);
            }
        }
        FieldContainer {
            kind: FieldKind::Spinor,
            dim: g.dim(),
            radii: g.radii().iter().map(|a| a.as_f64()).collect(),
            grid: g.grid().to_vec(),
            spin_structure: g.spin_structure().to_vec(),
            components: self.components,
            real: false,
            samples,
        }
    }

    pub fn from_container(geom: &Arc<TorusGeometry<T>>, c: &FieldContainer) -> Result<Self> {
        c.check_against(geom, FieldKind::Spinor, c.components)?;
        let np = geom.num_points();
        let mut data = vec![czero(); c.components * np];
        for p in 0..np {
            for k in 0..c.components {
                let s = c.samples[p * c.components + k];
                data[k * np + p] = cplx(T::lit(s[0]), T::lit(s[1]));
            }
        }
        Ok(Self { geom: geom.clone(), components: c.components, data })
    }
}

/// L2 inner product, conjugate-linear in the first argument.
pub fn inner_product<T: Real>(a: &SpinorField<T>, b: &SpinorField<T>) -> Result<Cplx<T>> {
    a.check_compatible(b)?;
    let mut acc = czero::<T>();
    for (x, y) in a.data.iter().zip(&b.data) {
        acc = acc + x.conj() * *y;
    }
    Ok(acc * a.geom.cell_volume())
}

pub fn spectral_derivative<T: Real>(field: &SpinorField<T>, axis: usize) -> Result<SpinorField<T>> {
    field.spectral_derivative(axis)
}

/// `f = mu + tau h` with `h` of zero mean and unit L2 norm.
#[derive(Debug, Clone)]
pub struct DeformationSpec<T: Real> {
    pub mu: T,
    pub tau: T,
    pub h: ScalarField<T>,
    /// `(axis, omega)` when `h` depends on a single circle coordinate.
    pub omega: Option<(usize, ScalarField<T>)>,
    /// Set when `f` is constant (`tau = 0`, `h` identically zero).
    pub degenerate: bool,
}

impl<T: Real> DeformationSpec<T> {
    pub fn reconstruct(&self) -> ScalarField<T> {
        self.h.scale(self.tau).add_constant(self.mu)
    }
}

pub fn decompose_deformation<T: Real>(f: &ScalarField<T>) -> Result<DeformationSpec<T>> {
    if !f.is_real() {
        return Err(Error::ComplexDeformation);
    }
    let mu = f.mean().re;
    let fluct = f.add_constant(-mu);
    let tau = fluct.l2_norm();
    // Relative to the size of f; rounding in the mean leaves O(eps) residue.
    let scale = f.max_abs().max(T::min_positive_value());
    if tau <= T::lit(1e-14) * scale * f.geometry().volume().sqrt() {
        return Ok(DeformationSpec {
            mu,
            tau: T::zero(),
            h: ScalarField::zeros(f.geometry()),
            omega: None,
            degenerate: true,
        });
    }
    let h = fluct.scale(T::one() / tau);
    let omega = single_axis_of(&h).and_then(|axis| antiderivative_on_circle(&h, axis).ok().map(|w| (axis, w)));
    Ok(DeformationSpec { mu, tau, h, omega, degenerate: false })
}

/// The unique axis along which `h` varies, if it varies along exactly one.
fn single_axis_of<T: Real>(h: &ScalarField<T>) -> Option<usize> {
    let g = h.geometry();
    let tol = T::lit(1e-12) * h.max_abs().max(T::one());
    let varying: Vec<usize> = (0..g.dim())
        .filter(|&axis| {
            let d = h.spectral_derivative(axis).map(|d| d.max_abs()).unwrap_or(T::zero());
            d > tol
        })
        .collect();
    (varying.len() == 1).then(|| varying[0])
}

/// Antiderivative `omega(x) = int_0^x h` along `axis`, normalized to `omega(0) = 0`.
pub fn antiderivative_on_circle<T: Real>(h: &ScalarField<T>, axis: usize) -> Result<ScalarField<T>> {
    let g = h.geometry().clone();
    g.check_axis(axis)?;
    let scale = h.max_abs().max(T::one());
    let dev = h.deviation_from_single_axis(axis)?;
    if dev > T::lit(1e-12) * scale {
        let other = (0..g.dim()).find(|&a| a != axis).unwrap_or(axis);
        return Err(Error::NotSingleAxis { axis: other, expected: axis, deviation: dev.as_f64() });
    }
    let profile = h.axis_profile(axis);
    let n = profile.len();
    let average = profile.iter().fold(czero::<T>(), |a, &v| a + v) / T::from_usize_lossy(n);
    if average.norm() > T::lit(1e-12) * scale {
        return Err(Error::NotPeriodicIntegrable { axis, average: average.norm().as_f64() });
    }

    // Work on a 1-D line through the geometry's FFT machinery by embedding the
    // profile into a full field, then reading the line back.
    let mut line_field: Vec<Cplx<T>> = (0..g.num_points()).map(|p| profile[g.multi_index(p)[axis]]).collect();
    let kappa = g.scalar_wavenumbers(axis).to_vec();
    g.transform_lines(&mut line_field, axis, Convention::Scalar, |coeffs| {
        for (c, &k) in coeffs.iter_mut().zip(&kappa) {
            *c = if k == T::zero() { czero() } else { cplx(c.im / k, -c.re / k) };
        }
    });
    let origin = line_field[0];
    let real = h.is_real();
    let values = line_field
        .into_iter()
        .map(|v| {
            let w = v - origin;
            if real {
                cplx(w.re, T::zero())
            } else {
                w
            }
        })
        .collect();
    Ok(ScalarField { geom: g, values, real })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Scalar,
    Spinor,
}

/// Self-describing serialized field; samples are row-major points with
/// components innermost, as `[re, im]` pairs of 64-bit floats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldContainer {
    pub kind: FieldKind,
    pub dim: usize,
    pub radii: Vec<f64>,
    pub grid: Vec<usize>,
    pub spin_structure: Vec<SpinStructure>,
    pub components: usize,
    pub real: bool,
    pub samples: Vec<[f64; 2]>,
}

impl FieldContainer {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn geometry<T: Real>(&self) -> Result<Arc<TorusGeometry<T>>> {
        let radii: Vec<T> = self.radii.iter().map(|&a| T::lit(a)).collect();
        crate::geometry::make_torus(self.dim, &radii, &self.grid, &self.spin_structure)
    }

    fn check_against<T: Real>(&self, geom: &TorusGeometry<T>, kind: FieldKind, components: usize) -> Result<()> {
        if self.kind != kind {
            return Err(Error::Serialization(format!("expected {kind:?} container, got {:?}", self.kind)));
        }
        let radii_match = self.radii.len() == geom.dim()
            && self.radii.iter().zip(geom.radii()).all(|(a, b)| T::lit(*a) == *b);
        if self.dim != geom.dim() || !radii_match || self.grid != geom.grid() || self.spin_structure != geom.spin_structure() {
            return Err(Error::GeometryMismatch);
        }
        if self.samples.len() != components * geom.num_points() {
            return Err(Error::Serialization(format!(
                "expected {} samples, got {}",
                components * geom.num_points(),
                self.samples.len()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_torus;
    use crate::random::{random_spinor, seeded_rng};
    use std::f64::consts::PI;

    fn torus(n: usize) -> Arc<TorusGeometry<f64>> {
        TorusGeometry::unit_periodic(2, n).unwrap()
    }

    #[test]
    fn derivative_of_sine_is_cosine() {
        let g = torus(16);
        let f = ScalarField::from_fn(&g, |x| x[0].sin());
        let d = f.spectral_derivative(0).unwrap();
        let expected = ScalarField::from_fn(&g, |x| x[0].cos());
        assert!(d.sub(&expected).unwrap().max_abs() < 1e-12);
        assert!(f.spectral_derivative(1).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let g = torus(8);
        let s = SpinorField::constant(&g, &[cplx(1.0, 2.0), cplx(-0.5, 0.0)]);
        assert!(s.spectral_derivative(0).unwrap().max_abs() < 1e-14);
        assert!(ScalarField::constant(&g, 3.0).spectral_derivative(1).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn plane_wave_is_fourier_eigenfunction() {
        let g = torus(16);
        let f = ScalarField::from_complex_fn(&g, |x| cplx((2.0 * x[1]).cos(), (2.0 * x[1]).sin()));
        let d = f.spectral_derivative(1).unwrap();
        for p in 0..g.num_points() {
            let expected = cplx(0.0, 2.0) * f.value(p);
            assert!((d.value(p) - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn derivative_scales_with_radius() {
        let g = make_torus::<f64>(2, &[2.0, 1.0], &[16, 8], &[SpinStructure::Periodic; 2]).unwrap();
        let f = ScalarField::from_fn(&g, |x| (x[0] / 2.0).sin());
        let d = f.spectral_derivative(0).unwrap();
        let expected = ScalarField::from_fn(&g, |x| 0.5 * (x[0] / 2.0).cos());
        assert!(d.sub(&expected).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn antiperiodic_spinor_derivative() {
        let g = make_torus::<f64>(2, &[1.0, 1.0], &[16, 8], &[SpinStructure::Antiperiodic, SpinStructure::Periodic])
            .unwrap();
        // e^{i 3x/2} is antiperiodic on the unit circle
        let u = SpinorField::from_fn(&g, 1, |x, _| cplx((1.5 * x[0]).cos(), (1.5 * x[0]).sin()));
        let d = u.spectral_derivative(0).unwrap();
        for p in 0..g.num_points() {
            assert!((d.at(p, 0) - cplx(0.0, 1.5) * u.at(p, 0)).norm() < 1e-12);
        }
    }

    #[test]
    fn axis_out_of_range() {
        let g = torus(8);
        let f = ScalarField::constant(&g, 1.0);
        assert_eq!(f.spectral_derivative(2).unwrap_err(), Error::AxisOutOfRange { axis: 2, dim: 2 });
    }

    #[test]
    fn derivatives_commute() {
        let g = torus(16);
        let f = ScalarField::from_fn(&g, |x| (x[0].cos() + 2.0 * x[1]).sin().exp());
        let a = f.spectral_derivative(0).unwrap().spectral_derivative(1).unwrap();
        let b = f.spectral_derivative(1).unwrap().spectral_derivative(0).unwrap();
        assert!(a.sub(&b).unwrap().max_abs() <= 1e-12 * a.max_abs().max(1.0));
    }

    #[test]
    fn leibniz_error_decays_exponentially() {
        let mut errors = Vec::new();
        for n in [8usize, 16, 32] {
            let g = torus(n);
            let f = ScalarField::from_fn(&g, |x| x[0].cos().exp());
            let h = ScalarField::from_fn(&g, |x| x[0].sin());
            let lhs = f.mul(&h).unwrap().spectral_derivative(0).unwrap();
            let rhs = f
                .spectral_derivative(0)
                .unwrap()
                .mul(&h)
                .unwrap()
                .add(&f.mul(&h.spectral_derivative(0).unwrap()).unwrap())
                .unwrap();
            errors.push(lhs.sub(&rhs).unwrap().max_abs());
        }
        assert!(errors[1] < errors[0] * 1e-3, "{errors:?}");
        assert!(errors[2] < 1e-12, "{errors:?}");
    }

    #[test]
    fn volume_of_constant_unit_spinor() {
        let g = torus(16);
        let u = SpinorField::constant(&g, &[cplx(1.0, 0.0)]);
        let v = inner_product(&u, &u).unwrap();
        assert!((v.re - 4.0 * PI * PI).abs() < 1e-12);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn plane_waves_are_orthogonal() {
        let g = torus(16);
        let a = SpinorField::from_fn(&g, 1, |x, _| cplx(x[0].cos(), x[0].sin()));
        let b = SpinorField::from_fn(&g, 1, |x, _| cplx((2.0 * x[0]).cos(), (2.0 * x[0]).sin()));
        assert!(inner_product(&a, &b).unwrap().norm() < 1e-12);
    }

    #[test]
    fn quadrature_exact_for_trig_polynomials() {
        // int cos^2(x) cos^2(2y) over the unit torus = pi * pi
        let g = torus(16);
        let f = ScalarField::from_fn(&g, |x| x[0].cos().powi(2) * (2.0 * x[1]).cos().powi(2));
        assert!((f.integral().re - PI * PI).abs() < 1e-12);
        let h = ScalarField::from_fn(&g, |x| (3.0 * x[0]).sin() * (x[1] + 0.3).cos());
        assert!(h.integral().norm() < 1e-13);
    }

    #[test]
    fn inner_product_hermitian_symmetry() {
        let g = torus(8);
        let mut rng = seeded_rng(11);
        let a = random_spinor(&g, 2, &mut rng);
        let b = random_spinor(&g, 2, &mut rng);
        let ab = inner_product(&a, &b).unwrap();
        let ba = inner_product(&b, &a).unwrap();
        assert!((ab - ba.conj()).norm() < 1e-12);
        assert!(inner_product(&a, &a).unwrap().re > 0.0);
    }

    #[test]
    fn inner_product_geometry_mismatch() {
        let a = SpinorField::<f64>::zeros(&torus(8), 2);
        let b = SpinorField::<f64>::zeros(&torus(16), 2);
        assert_eq!(inner_product(&a, &b).unwrap_err(), Error::GeometryMismatch);
    }

    #[test]
    fn decompose_constant_is_degenerate() {
        let g = torus(16);
        let spec = decompose_deformation(&ScalarField::constant(&g, 3.0)).unwrap();
        assert!((spec.mu - 3.0).abs() < 1e-14);
        assert_eq!(spec.tau, 0.0);
        assert!(spec.degenerate);
        assert!(spec.h.max_abs() == 0.0);
    }

    #[test]
    fn decompose_cosine() {
        let g = torus(16);
        let w = g.cell_volume();
        // quadrature oracle: sum of cos^2 over grid points times the cell volume
        let tau_oracle: f64 = (0..g.num_points())
            .map(|p| g.point_coordinates(p)[1].cos().powi(2) * w)
            .sum::<f64>()
            .sqrt();
        assert!((tau_oracle - (2.0 * PI * PI).sqrt()).abs() < 1e-12);
        for mu in [0.0, 1.0] {
            let f = ScalarField::from_fn(&g, |x| mu + x[1].cos());
            let spec = decompose_deformation(&f).unwrap();
            assert!((spec.mu - mu).abs() < 1e-13);
            assert!((spec.tau - tau_oracle).abs() < 1e-12);
            assert!((spec.h.l2_norm() - 1.0).abs() < 1e-12);
            assert!(spec.h.mean().norm() < 1e-14);
            assert!(spec.reconstruct().sub(&f).unwrap().max_abs() < 1e-12);
            let (axis, omega) = spec.omega.expect("depends on one axis");
            assert_eq!(axis, 1);
            let expected = ScalarField::from_fn(&g, |x| x[1].sin() / tau_oracle);
            assert!(omega.sub(&expected).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn decompose_rejects_complex() {
        let g = torus(8);
        let f = ScalarField::from_complex_fn(&g, |_| cplx(1.0, 1.0));
        assert_eq!(decompose_deformation(&f).unwrap_err(), Error::ComplexDeformation);
    }

    #[test]
    fn antiderivative_examples() {
        let g = torus(32);
        let omega = antiderivative_on_circle(&ScalarField::from_fn(&g, |x| x[1].cos()), 1).unwrap();
        assert!(omega.sub(&ScalarField::from_fn(&g, |x| x[1].sin())).unwrap().max_abs() < 1e-13);
        let omega2 = antiderivative_on_circle(&ScalarField::from_fn(&g, |x| (2.0 * x[0]).sin()), 0).unwrap();
        let expected = ScalarField::from_fn(&g, |x| (1.0 - (2.0 * x[0]).cos()) / 2.0);
        assert!(omega2.sub(&expected).unwrap().max_abs() < 1e-13);
        assert_eq!(omega2.value(0).re, 0.0);
    }

    #[test]
    fn antiderivative_rejects_nonzero_average() {
        let g = torus(16);
        let err = antiderivative_on_circle(&ScalarField::constant(&g, 1.0), 1).unwrap_err();
        assert!(matches!(err, Error::NotPeriodicIntegrable { axis: 1, .. }));
        assert!(err.to_string().contains("not integrable to a periodic function"));
    }

    #[test]
    fn antiderivative_rejects_other_axis_dependence() {
        let g = torus(16);
        let h = ScalarField::from_fn(&g, |x| x[1].cos() * (1.0 + 0.1 * x[0].sin()));
        assert!(matches!(antiderivative_on_circle(&h, 1), Err(Error::NotSingleAxis { .. })));
    }

    #[test]
    fn container_roundtrip() {
        let g = make_torus::<f64>(2, &[1.5, 1.0], &[8, 4], &[SpinStructure::Antiperiodic, SpinStructure::Periodic])
            .unwrap();
        let mut rng = seeded_rng(3);
        let u = random_spinor(&g, 2, &mut rng);
        let json = u.to_container().to_json().unwrap();
        let c = FieldContainer::from_json(&json).unwrap();
        let g2 = c.geometry::<f64>().unwrap();
        let back = SpinorField::from_container(&g2, &c).unwrap();
        assert_eq!(back.data(), u.data());
        // point-major layout: sample 1 is component 1 of point 0
        assert_eq!(c.samples[1], [u.at(0, 1).re, u.at(0, 1).im]);

        let f = ScalarField::from_fn(&g, |x| x[0].sin());
        let fc = f.to_container();
        assert!(fc.real);
        let f2 = ScalarField::from_container(&g, &fc).unwrap();
        assert_eq!(f2.values(), f.values());
        assert!(ScalarField::from_container(&torus(8), &fc).is_err());
    }
}
