//! Flat tori `T^n = S^1(a_1) x ... x S^1(a_n)` sampled on uniform grids.
//!
//! Grid points are stored row-major with axis 0 slowest. The coordinate along
//! axis `i` at grid index `j` is the arc length `a_i * 2 pi j / N_i`, so every
//! derivative the crate produces is a physical (frame) derivative.
//!
//! Scalar functions are always periodic. Spinor fields follow the spin
//! structure chosen per circle: periodic circles use integer wavenumbers
//! `k / a`, antiperiodic circles use half-integer wavenumbers `(k + 1/2) / a`.
//! On a periodic circle the Nyquist mode of a spinor keeps the wavenumber
//! `-N/2`, which keeps the discrete Dirac operator free of spurious kernel
//! vectors. Scalar first derivatives zero the Nyquist mode so that real
//! functions have real gradients.

use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cplx, Cplx, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SpinStructure {
    #[default]
    Periodic,
    Antiperiodic,
}

/// Which Fourier convention a derivative uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Convention {
    Scalar,
    Spinor,
}

pub struct TorusGeometry<T: Real> {
    dim: usize,
    radii: Vec<T>,
    grid: Vec<usize>,
    spin_structure: Vec<SpinStructure>,
    strides: Vec<usize>,
    npoints: usize,
    spinor_wavenumbers: Vec<Vec<T>>,
    scalar_wavenumbers: Vec<Vec<T>>,
    // e^{i theta_j / 2} along antiperiodic axes
    twist: Vec<Option<Vec<Cplx<T>>>>,
    forward: Vec<Arc<dyn Fft<T>>>,
    inverse: Vec<Arc<dyn Fft<T>>>,
}

impl<T: Real> fmt::Debug for TorusGeometry<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusGeometry")
            .field("dim", &self.dim)
            .field("radii", &self.radii)
            .field("grid", &self.grid)
            .field("spin_structure", &self.spin_structure)
            .finish()
    }
}

/// Builds a flat torus and precomputes its Fourier tables.
pub fn make_torus<T: Real>(
    dim: usize,
    radii: &[T],
    grid: &[usize],
    spin_structure: &[SpinStructure],
) -> Result<Arc<TorusGeometry<T>>> {
    TorusGeometry::new(dim, radii, grid, spin_structure).map(Arc::new)
}

impl<T: Real> TorusGeometry<T> {
    pub fn new(
        dim: usize,
        radii: &[T],
        grid: &[usize],
        spin_structure: &[SpinStructure],
    ) -> Result<Self> {
        if dim == 0 || !dim.is_multiple_of(2) {
            return Err(Error::OddDimension(dim));
        }
        if radii.len() != dim || grid.len() != dim || spin_structure.len() != dim {
            return Err(Error::Validation(format!(
                "dimension {dim} but {} radii, {} grid sizes, {} spin flags",
                radii.len(),
                grid.len(),
                spin_structure.len()
            )));
        }
        for (i, &a) in radii.iter().enumerate() {
            if a <= T::zero() || !a.is_finite() {
                return Err(Error::Validation(format!("radius {i} must be positive, got {a}")));
            }
        }
        for (i, &n) in grid.iter().enumerate() {
            if n < 4 {
                return Err(Error::Validation(format!("grid size {i} must be >= 4, got {n}")));
            }
        }

        let mut strides = vec![1usize; dim];
        for i in (0..dim.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * grid[i + 1];
        }
        let npoints = grid.iter().product();

        let mut planner = FftPlanner::new();
        let mut forward = Vec::with_capacity(dim);
        let mut inverse = Vec::with_capacity(dim);
        let mut spinor_wavenumbers = Vec::with_capacity(dim);
        let mut scalar_wavenumbers = Vec::with_capacity(dim);
        let mut twist = Vec::with_capacity(dim);
        for axis in 0..dim {
            let n = grid[axis];
            let a = radii[axis];
            forward.push(planner.plan_fft_forward(n));
            inverse.push(planner.plan_fft_inverse(n));
            let ints = fft_integers(n);
            let shift = match spin_structure[axis] {
                SpinStructure::Periodic => 0.0,
                SpinStructure::Antiperiodic => 0.5,
            };
            spinor_wavenumbers.push(ints.iter().map(|&k| T::lit(k as f64 + shift) / a).collect());
            scalar_wavenumbers.push(
                ints.iter()
                    .map(|&k| if 2 * k.unsigned_abs() as usize == n { T::zero() } else { T::lit(k as f64) / a })
                    .collect(),
            );
            twist.push(match spin_structure[axis] {
                SpinStructure::Periodic => None,
                SpinStructure::Antiperiodic => Some(
                    (0..n)
                        .map(|j| {
                            let half_theta = T::PI() * T::from_usize_lossy(j) / T::from_usize_lossy(n);
                            cplx(half_theta.cos(), half_theta.sin())
                        })
                        .collect(),
                ),
            });
        }

        Ok(Self {
            dim,
            radii: radii.to_vec(),
            grid: grid.to_vec(),
            spin_structure: spin_structure.to_vec(),
            strides,
            npoints,
            spinor_wavenumbers,
            scalar_wavenumbers,
            twist,
            forward,
            inverse,
        })
    }

    /// Unit-radius periodic torus with `n` points per circle.
    pub fn unit_periodic(dim: usize, n: usize) -> Result<Arc<Self>> {
        make_torus(dim, &vec![T::one(); dim], &vec![n; dim], &vec![SpinStructure::Periodic; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radii(&self) -> &[T] {
        &self.radii
    }

    pub fn grid(&self) -> &[usize] {
        &self.grid
    }

    pub fn spin_structure(&self) -> &[SpinStructure] {
        &self.spin_structure
    }

    pub fn num_points(&self) -> usize {
        self.npoints
    }

    /// Spinor components per point, `2^{dim/2}`.
    pub fn spinor_components(&self) -> usize {
        1 << (self.dim / 2)
    }

    pub fn volume(&self) -> T {
        self.radii.iter().fold(T::one(), |v, &a| v * T::TAU() * a)
    }

    /// Quadrature weight of one grid point.
    pub fn cell_volume(&self) -> T {
        self.volume() / T::from_usize_lossy(self.npoints)
    }

    pub fn circumference(&self, axis: usize) -> T {
        T::TAU() * self.radii[axis]
    }

    /// Spinor wavenumbers of `axis` in FFT order.
    pub fn wavenumbers(&self, axis: usize) -> &[T] {
        &self.spinor_wavenumbers[axis]
    }

    /// Scalar wavenumbers of `axis` in FFT order (Nyquist zeroed).
    pub fn scalar_wavenumbers(&self, axis: usize) -> &[T] {
        &self.scalar_wavenumbers[axis]
    }

    pub fn coordinate(&self, axis: usize, j: usize) -> T {
        self.radii[axis] * T::TAU() * T::from_usize_lossy(j) / T::from_usize_lossy(self.grid[axis])
    }

    pub fn multi_index(&self, mut p: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim];
        for (i, &stride) in idx.iter_mut().zip(&self.strides) {
            *i = p / stride;
            p %= stride;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn point_coordinates(&self, p: usize) -> Vec<T> {
        self.multi_index(p)
            .iter()
            .enumerate()
            .map(|(axis, &j)| self.coordinate(axis, j))
            .collect()
    }

    pub fn check_axis(&self, axis: usize) -> Result<()> {
        if axis >= self.dim {
            Err(Error::AxisOutOfRange { axis, dim: self.dim })
        } else {
            Ok(())
        }
    }

    /// Same torus parameters (radii compared exactly).
    pub fn same_as(&self, other: &Self) -> bool {
        std::ptr::eq(self, other)
            || (self.dim == other.dim
                && self.radii == other.radii
                && self.grid == other.grid
                && self.spin_structure == other.spin_structure)
    }

    /// Runs `spectral` on the Fourier coefficients of every grid line along `axis`.
    ///
    /// `data` holds one complex sample per grid point. With the spinor
    /// convention on an antiperiodic axis the samples are untwisted before
    /// the forward transform and retwisted afterwards.
    pub(crate) fn transform_lines<F>(&self, data: &mut [Cplx<T>], axis: usize, convention: Convention, mut spectral: F)
    where
        F: FnMut(&mut [Cplx<T>]),
    {
        debug_assert_eq!(data.len(), self.npoints);
        let n = self.grid[axis];
        let stride = self.strides[axis];
        let outer = self.npoints / (n * stride);
        let twist = match convention {
            Convention::Spinor => self.twist[axis].as_deref(),
            Convention::Scalar => None,
        };
        let norm = T::one() / T::from_usize_lossy(n);
        let mut line = vec![cplx(T::zero(), T::zero()); n];
        for o in 0..outer {
            for inner in 0..stride {
                let start = o * n * stride + inner;
                for j in 0..n {
                    line[j] = data[start + j * stride];
                }
                if let Some(tw) = twist {
                    for (v, w) in line.iter_mut().zip(tw) {
                        *v = *v * w.conj();
                    }
                }
                self.forward[axis].process(&mut line);
                spectral(&mut line);
                self.inverse[axis].process(&mut line);
                match twist {
                    Some(tw) => {
                        for (v, w) in line.iter_mut().zip(tw) {
                            *v = *v * *w * norm;
                        }
                    }
                    None => {
                        for v in line.iter_mut() {
                            *v = *v * norm;
                        }
                    }
                }
                for j in 0..n {
                    data[start + j * stride] = line[j];
                }
            }
        }
    }

    /// In-place derivative of one sample block along `axis`; `order` is 1 or 2.
    pub(crate) fn differentiate(&self, data: &mut [Cplx<T>], axis: usize, order: u32, convention: Convention) {
        let kappa = match convention {
            Convention::Spinor => &self.spinor_wavenumbers[axis],
            Convention::Scalar => &self.scalar_wavenumbers[axis],
        };
        // Second scalar derivatives keep the Nyquist wavenumber so that -d^2 stays definite.
        let kappa2: Vec<T> = if order == 2 && convention == Convention::Scalar {
            fft_integers(self.grid[axis]).iter().map(|&k| T::lit(k as f64) / self.radii[axis]).collect()
        } else {
            kappa.clone()
        };
        self.transform_lines(data, axis, convention, |coeffs| match order {
            1 => {
                for (c, &k) in coeffs.iter_mut().zip(kappa.iter()) {
                    *c = cplx(-c.im * k, c.re * k);
                }
            }
            2 => {
                for (c, &k) in coeffs.iter_mut().zip(kappa2.iter()) {
                    *c = *c * (-(k * k));
                }
            }
            _ => unreachable!("derivative order {order}"),
        });
    }
}

/// Integer frequencies in FFT order: `0, 1, ..., N/2 - 1, -N/2, ..., -1`
/// (for odd N: `0, ..., (N-1)/2, -(N-1)/2, ..., -1`).
pub(crate) fn fft_integers(n: usize) -> Vec<i64> {
    let n = n as i64;
    (0..n).map(|j| if j < (n + 1) / 2 { j } else { j - n }).collect()
}
