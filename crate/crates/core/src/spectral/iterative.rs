//! Thick-restart block Krylov solver for the smallest eigenpairs.
//!
//! The search space grows by the residual block of the current Ritz pairs,
//! so without a preconditioner it spans the same block Krylov space as block
//! Lanczos. Every new vector is fully reorthogonalized (classical Gram-Schmidt,
//! two passes) against the whole basis. When the basis is full it is
//! compressed to the leading Ritz vectors. The small Rayleigh-Ritz problem
//! is solved in `f64` by `faer`.
//!
//! Starting vectors come from a `ChaCha8` stream seeded with
//! [`SolverOptions::seed`].

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use faer::{Mat, Side};
use num_complex::Complex;
use super::{SolverKind, SpectrumResult};
use crate::error::{Error, Result};
use crate::fields::SpinorField;
use crate::operators::OperatorHandle;
use crate::random::seeded_rng;
use crate::scalar::{cplx, czero, Cplx, Real};

type Column<T> = Vec<Cplx<T>>;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Defaults to `k + 2`.
    pub block_size: Option<usize>,
    /// Defaults to `max(k + 3b, 8b)`, capped at the operator dimension.
    pub max_basis: Option<usize>,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 5000, block_size: None, max_basis: None, seed: 0x5eed }
    }
}

pub fn smallest_eigenpairs<T: Real>(op: &OperatorHandle<T>, k: usize, tol: f64, max_iter: usize) -> Result<SpectrumResult<T>> {
    smallest_eigenpairs_with(op, k, &SolverOptions { tol, max_iter, ..SolverOptions::default() })
}

pub fn smallest_eigenpairs_with<T: Real>(op: &OperatorHandle<T>, k: usize, opts: &SolverOptions) -> Result<SpectrumResult<T>> {
    if !op.is_self_adjoint() {
        return Err(Error::NotSelfAdjoint(op.label().to_string()));
    }
    let n = op.dimension();
    if k == 0 || k > n {
        return Err(Error::Validation(format!("requested {k} eigenpairs of an operator of dimension {n}")));
    }
    let b = opts.block_size.unwrap_or(k + 2).clamp(1, n);
    let max_basis = opts.max_basis.unwrap_or((k + 3 * b).max(8 * b)).min(n).max(k.min(n));
    let keep = (k + b).min(max_basis);
    let tol = T::lit(opts.tol);
    let mut rng = seeded_rng(opts.seed);
    let mut solver = Krylov::new(op, n);

    let start: Vec<Vec<Cplx<T>>> = (0..b).map(|_| random_vector(n, &mut rng)).collect();
    solver.extend(start);

    let mut iterations = 0;
    loop {
        let (theta, y) = solver.ritz();
        let m = solver.len();
        let watch = (k + b).min(m);
        let (x, hx) = solver.ritz_vectors(&y, watch);
        let residuals: Vec<Vec<Cplx<T>>> = (0..watch)
            .map(|i| hx[i].iter().zip(&x[i]).map(|(h, v)| *h - *v * theta[i]).collect())
            .collect();
        let rnorm: Vec<T> = residuals.iter().map(|r| norm(r)).collect();
        let converged = m >= k && rnorm[..k].iter().all(|&r| r <= tol);

        if converged || iterations >= opts.max_iter || (m == n && m >= k) {
            let converged = converged || m == n;
            let kk = k.min(watch);
            return Ok(solver.finish(&theta, &x[..kk], &rnorm[..kk], iterations, tol, converged));
        }

        let block: Vec<Vec<Cplx<T>>> = (0..watch)
            .filter(|&i| rnorm[i] > tol)
            .take(b)
            .map(|i| residuals[i].clone())
            .collect();

        if m + block.len() > max_basis {
            solver.restart(&y, keep.min(m));
        }
        let added = solver.extend(block);
        if added == 0 {
            // Residuals already lie in the basis; widen with a random direction.
            let fresh = (0..b).map(|_| random_vector(n, &mut rng)).collect();
            if solver.len() + b > max_basis {
                let (_, y) = solver.ritz();
                solver.restart(&y, keep.min(solver.len()));
            }
            solver.extend(fresh);
        }
        iterations += 1;
    }
}

struct Krylov<'a, T: Real> {
    op: &'a OperatorHandle<T>,
    n: usize,
    v: Vec<Vec<Cplx<T>>>,
    w: Vec<Vec<Cplx<T>>>,
    // Projected matrix V^H H V, grown row by row.
    g: Vec<Vec<Cplx<T>>>,
}

impl<'a, T: Real> Krylov<'a, T> {
    fn new(op: &'a OperatorHandle<T>, n: usize) -> Self {
        Self { op, n, v: Vec::new(), w: Vec::new(), g: Vec::new() }
    }

    fn len(&self) -> usize {
        self.v.len()
    }

    fn apply(&self, x: &[Cplx<T>]) -> Vec<Cplx<T>> {
        let field = SpinorField::from_data(self.op.geometry(), self.op.components(), x.to_vec()).expect("sized by construction");
        self.op.apply(&field).expect("layout matches operator").into_data()
    }

    /// Orthonormalizes `block` against the basis and appends the survivors.
    fn extend(&mut self, block: Vec<Vec<Cplx<T>>>) -> usize {
        let mut added = 0;
        for mut x in block {
            if self.v.len() >= self.n {
                break;
            }
            let before = norm(&x);
            if before == T::zero() {
                continue;
            }
            for _pass in 0..2 {
                for q in &self.v {
                    let c = dot(q, &x);
                    axpy(&mut x, -c, q);
                }
            }
            let after = norm(&x);
            if after <= T::lit(1e-10) * before {
                continue;
            }
            let inv = T::one() / after;
            for e in x.iter_mut() {
                *e = *e * inv;
            }
            let hx = self.apply(&x);
            let m = self.v.len();
            let mut row: Vec<Cplx<T>> = self.v.iter().map(|q| dot(q, &hx)).collect();
            row.push(cplx(dot(&x, &hx).re, T::zero()));
            for (i, r) in self.g.iter_mut().enumerate() {
                r.push(row[i]);
            }
            self.g.push(row.iter().map(|z| z.conj()).collect());
            self.g[m][m] = row[m];
            self.v.push(x);
            self.w.push(hx);
            added += 1;
        }
        added
    }

    /// Ritz values ascending and the matching eigenvectors of the projected
    /// matrix as columns of a row-major `m x m` array.
    fn ritz(&self) -> (Vec<T>, Vec<Cplx<T>>) {
        let m = self.len();
        let g = Mat::from_fn(m, m, |i, j| Complex::new(self.g[i][j].re.as_f64(), self.g[i][j].im.as_f64()));
        let eig = g.self_adjoint_eigen(Side::Lower).expect("projected matrix is finite");
        let (u, s) = (eig.U(), eig.S());
        let values = (0..m).map(|i| T::lit(s[i].re)).collect();
        let mut vectors = vec![czero(); m * m];
        for col in 0..m {
            for r in 0..m {
                let z = u[(r, col)];
                vectors[r * m + col] = cplx(T::lit(z.re), T::lit(z.im));
            }
        }
        (values, vectors)
    }

    /// First `count` Ritz vectors and their images.
    fn ritz_vectors(&self, y: &[Cplx<T>], count: usize) -> (Vec<Column<T>>, Vec<Column<T>>) {
        let m = self.len();
        let combine = |basis: &[Vec<Cplx<T>>], col: usize| {
            let mut out = vec![czero(); self.n];
            for j in 0..m {
                axpy(&mut out, y[j * m + col], &basis[j]);
            }
            out
        };
        let x = (0..count).map(|c| combine(&self.v, c)).collect();
        let hx = (0..count).map(|c| combine(&self.w, c)).collect();
        (x, hx)
    }

    /// Compresses the basis to the first `keep` Ritz vectors.
    fn restart(&mut self, y: &[Cplx<T>], keep: usize) {
        let (x, hx) = self.ritz_vectors(y, keep);
        self.g = (0..keep)
            .map(|i| (0..keep).map(|j| dot(&x[i], &hx[j])).collect())
            .collect();
        for i in 0..keep {
            for j in 0..i {
                let avg = (self.g[i][j] + self.g[j][i].conj()) * T::lit(0.5);
                self.g[i][j] = avg;
                self.g[j][i] = avg.conj();
            }
            self.g[i][i] = cplx(self.g[i][i].re, T::zero());
        }
        self.v = x;
        self.w = hx;
    }

    fn finish(&self, theta: &[T], x: &[Vec<Cplx<T>>], rnorm: &[T], iterations: usize, tol: T, converged: bool) -> SpectrumResult<T> {
        let geom = self.op.geometry();
        let scale = T::one() / geom.cell_volume().sqrt();
        let eigenvectors = x
            .iter()
            .map(|v| {
                let data = v.iter().map(|z| *z * scale).collect();
                SpinorField::from_data(geom, self.op.components(), data).expect("sized by construction")
            })
            .collect();
        SpectrumResult {
            label: self.op.label().to_string(),
            eigenvalues: theta[..x.len()].to_vec(),
            eigenvectors,
            residuals: rnorm.to_vec(),
            solver: SolverKind::Iterative,
            iterations,
            tolerance: tol,
            converged,
            dimension: self.n,
        }
    }
}

fn random_vector<T: Real>(n: usize, rng: &mut ChaCha8Rng) -> Vec<Cplx<T>> {
    (0..n)
        .map(|_| cplx(T::lit(rng.gen_range(-1.0..1.0)), T::lit(rng.gen_range(-1.0..1.0))))
        .collect()
}

fn dot<T: Real>(a: &[Cplx<T>], b: &[Cplx<T>]) -> Cplx<T> {
    a.iter().zip(b).fold(czero(), |acc, (x, y)| acc + x.conj() * *y)
}

fn axpy<T: Real>(y: &mut [Cplx<T>], alpha: Cplx<T>, x: &[Cplx<T>]) {
    for (a, b) in y.iter_mut().zip(x) {
        *a = *a + alpha * *b;
    }
}

fn norm<T: Real>(a: &[Cplx<T>]) -> T {
    a.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}
