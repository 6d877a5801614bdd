//! Dense Hermitian eigensolver used as ground truth.
//!
//! The operator is materialized column by column in `f64` and handed to
//! `faer`'s self-adjoint eigendecomposition.

use faer::{Mat, Side};
use num_complex::Complex;

use super::{SolverKind, SpectrumResult};
use crate::error::{Error, Result};
use crate::fields::SpinorField;
use crate::operators::OperatorHandle;
use crate::scalar::{cplx, czero, Real};

/// Largest operator dimension the dense path accepts.
pub const DENSE_LIMIT: usize = 4096;

/// Matrix of `op` in the canonical basis of its sample vector.
pub fn materialize<T: Real>(op: &OperatorHandle<T>) -> Result<Mat<Complex<f64>>> {
    let n = op.dimension();
    if n > DENSE_LIMIT {
        return Err(Error::DimensionGuard { dim: n, limit: DENSE_LIMIT });
    }
    let mut m = Mat::<Complex<f64>>::zeros(n, n);
    let mut e = vec![czero::<T>(); n];
    for j in 0..n {
        e[j] = cplx(T::one(), T::zero());
        let field = SpinorField::from_data(op.geometry(), op.components(), e.clone())?;
        let col = op.apply(&field)?;
        for (i, z) in col.data().iter().enumerate() {
            m[(i, j)] = Complex::new(z.re.as_f64(), z.im.as_f64());
        }
        e[j] = czero();
    }
    Ok(m)
}

/// Hermitian part of `m` and the defect `max |m - m^*|`.
fn hermitian_part(m: &Mat<Complex<f64>>) -> (Mat<Complex<f64>>, f64) {
    let n = m.nrows();
    let mut defect: f64 = 0.0;
    let h = Mat::from_fn(n, n, |i, j| {
        let (a, b) = (m[(i, j)], m[(j, i)].conj());
        defect = defect.max((a - b).norm());
        (a + b) * 0.5
    });
    (h, defect)
}

fn eigen_error(e: faer::linalg::evd::EvdError) -> Error {
    Error::Validation(format!("dense eigensolver failed: {e:?}"))
}

fn check<T: Real>(op: &OperatorHandle<T>) -> Result<()> {
    if !op.is_self_adjoint() {
        return Err(Error::NotSelfAdjoint(op.label().to_string()));
    }
    Ok(())
}

/// Full spectrum with eigenvectors.
pub fn dense_spectrum<T: Real>(op: &OperatorHandle<T>) -> Result<SpectrumResult<T>> {
    check(op)?;
    let (h, defect) = hermitian_part(&materialize(op)?);
    let n = h.nrows();
    let eig = h.self_adjoint_eigen(Side::Lower).map_err(eigen_error)?;
    let (u, s) = (eig.U(), eig.S());

    let scale = 1.0 / op.geometry().cell_volume().as_f64().sqrt();
    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    for j in 0..n {
        let lambda = s[j].re;
        let v = u.col(j);
        let hv = &h * v;
        let r = (0..n).map(|i| (hv[i] - v[i] * lambda).norm_sqr()).sum::<f64>().sqrt();
        let data = (0..n).map(|i| cplx(T::lit(v[i].re * scale), T::lit(v[i].im * scale))).collect();
        eigenvalues.push(T::lit(lambda));
        eigenvectors.push(SpinorField::from_data(op.geometry(), op.components(), data)?);
        residuals.push(T::lit(r));
    }
    Ok(SpectrumResult {
        label: op.label().to_string(),
        eigenvalues,
        eigenvectors,
        residuals,
        solver: SolverKind::Dense,
        iterations: 0,
        tolerance: T::lit(defect.max(f64::EPSILON)),
        converged: true,
        dimension: n,
    })
}

/// Full spectrum without eigenvectors; also returns the Hermiticity defect
/// `max |H - H^*|` of the materialized matrix.
pub fn dense_eigenvalues<T: Real>(op: &OperatorHandle<T>) -> Result<(Vec<T>, f64)> {
    check(op)?;
    let (h, defect) = hermitian_part(&materialize(op)?);
    let values = h.self_adjoint_eigenvalues(Side::Lower).map_err(eigen_error)?;
    Ok((values.into_iter().map(T::lit).collect(), defect))
}
