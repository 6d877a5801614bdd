//! Hermitian Dirac matrices in even dimension `n = 2m`.
//!
//! The basis is built recursively. Given the `n - 2` set `(g'_1..g'_{n-2}, G')`,
//! the hatted `n - 1` set is `h_j = g'_j` together with `h_{n-1} = G'`, and
//!
//! ```text
//! gamma_j = [[0, -i h_j], [i h_j, 0]]   (j < n)
//! gamma_n = [[0, I], [I, 0]]
//! Gamma   = diag(I, -I)
//! ```
//!
//! Starting from `h_1 = [1]` this reproduces the standard two-dimensional set.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{ci, cplx, czero, Cplx, Real};

/// Small dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T: Real> {
    n: usize,
    data: Vec<Cplx<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![czero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, cplx(T::one(), T::zero()));
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Cplx<T>>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "square matrix required");
        Self { n, data: rows.iter().flatten().copied().collect() }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Cplx<T> {
        self.data[r * self.n + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Cplx<T>) {
        self.data[r * self.n + c] = v;
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == czero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] = out.data[i * n + j] + a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, s: Cplx<T>) -> Self {
        Self { n: self.n, data: self.data.iter().map(|a| a * s).collect() }
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn trace(&self) -> Cplx<T> {
        (0..self.n).fold(czero(), |acc, i| acc + self.get(i, i))
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(T::zero(), T::max)
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    /// Block `(row_block, col_block)` of size `n/2` in the 2x2 block partition.
    pub fn block(&self, row_block: usize, col_block: usize) -> Self {
        let h = self.n / 2;
        let mut out = Self::zeros(h);
        for i in 0..h {
            for j in 0..h {
                out.set(i, j, self.get(row_block * h + i, col_block * h + j));
            }
        }
        out
    }

    fn from_blocks(a: &Self, b: &Self, c: &Self, d: &Self) -> Self {
        let h = a.n;
        let mut out = Self::zeros(2 * h);
        for i in 0..h {
            for j in 0..h {
                out.set(i, j, a.get(i, j));
                out.set(i, h + j, b.get(i, j));
                out.set(h + i, j, c.get(i, j));
                out.set(h + i, h + j, d.get(i, j));
            }
        }
        out
    }

    /// Entries as `[re, im]` pairs, row by row.
    pub fn to_pairs(&self) -> Vec<Vec<[f64; 2]>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| [self.get(i, j).re.as_f64(), self.get(i, j).im.as_f64()]).collect())
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct GammaSet<T: Real> {
    dim: usize,
    gammas: Vec<CMatrix<T>>,
    chirality: CMatrix<T>,
    p_plus: CMatrix<T>,
    p_minus: CMatrix<T>,
}

#[derive(Serialize)]
struct GammaDump {
    dim: usize,
    size: usize,
    gammas: Vec<Vec<Vec<[f64; 2]>>>,
    chirality: Vec<Vec<[f64; 2]>>,
}

pub fn build_gamma_set<T: Real>(n: usize) -> Result<GammaSet<T>> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::OddDimension(n));
    }
    let mut gammas = vec![CMatrix::from_rows(&[
        vec![czero(), -ci::<T>()],
        vec![ci(), czero()],
    ])];
    gammas.push(CMatrix::from_rows(&[
        vec![czero(), cplx(T::one(), T::zero())],
        vec![cplx(T::one(), T::zero()), czero()],
    ]));
    let mut chirality = diag_pm::<T>(1);
    let mut d = 2;
    while d < n {
        let mut hatted = gammas.clone();
        hatted.push(chirality.clone());
        let half = chirality.size();
        let zero = CMatrix::zeros(half);
        let id = CMatrix::identity(half);
        gammas = hatted
            .iter()
            .map(|h| CMatrix::from_blocks(&zero, &h.scale(-ci::<T>()), &h.scale(ci::<T>()), &zero))
            .collect();
        gammas.push(CMatrix::from_blocks(&zero, &id, &id, &zero));
        chirality = diag_pm(half);
        d += 2;
    }
    let size = chirality.size();
    let id = CMatrix::identity(size);
    let half = cplx(T::lit(0.5), T::zero());
    let p_plus = id.add(&chirality).scale(half);
    let p_minus = id.sub(&chirality).scale(half);
    Ok(GammaSet { dim: n, gammas, chirality, p_plus, p_minus })
}

fn diag_pm<T: Real>(half: usize) -> CMatrix<T> {
    let mut m = CMatrix::zeros(2 * half);
    for i in 0..half {
        m.set(i, i, cplx(T::one(), T::zero()));
        m.set(half + i, half + i, cplx(-T::one(), T::zero()));
    }
    m
}

impl<T: Real> GammaSet<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Spinor components, `2^{dim/2}`.
    pub fn size(&self) -> usize {
        self.chirality.size()
    }

    /// `gamma(a)` for `a` in `0..dim`.
    pub fn gamma(&self, a: usize) -> &CMatrix<T> {
        &self.gammas[a]
    }

    pub fn gammas(&self) -> &[CMatrix<T>] {
        &self.gammas
    }

    pub fn chirality(&self) -> &CMatrix<T> {
        &self.chirality
    }

    pub fn projectors(&self) -> (&CMatrix<T>, &CMatrix<T>) {
        (&self.p_plus, &self.p_minus)
    }

    pub fn to_json(&self) -> Result<String> {
        let dump = GammaDump {
            dim: self.dim,
            size: self.size(),
            gammas: self.gammas.iter().map(CMatrix::to_pairs).collect(),
            chirality: self.chirality.to_pairs(),
        };
        serde_json::to_string_pretty(&dump).map_err(|e| Error::Serialization(e.to_string()))
    }
}

pub fn chiral_projectors<T: Real>(gs: &GammaSet<T>) -> (CMatrix<T>, CMatrix<T>) {
    (gs.p_plus.clone(), gs.p_minus.clone())
}

/// `(T, T^{-1})` mapping `(gamma_1, gamma_2, Gamma)` to `(gamma_2, Gamma, gamma_1)`.
pub fn majorana_transform<T: Real>(gs: &GammaSet<T>) -> Result<(CMatrix<T>, CMatrix<T>)> {
    if gs.dim != 2 {
        return Err(Error::Unsupported(format!("Majorana transform is defined in dimension 2, got {}", gs.dim)));
    }
    let one = cplx(T::one(), T::zero());
    let h = T::lit(0.5);
    let t = CMatrix::from_rows(&[vec![one, one], vec![ci(), -ci::<T>()]]);
    let t_inv = CMatrix::from_rows(&[vec![cplx(h, T::zero()), cplx(T::zero(), -h)], vec![cplx(h, T::zero()), cplx(T::zero(), h)]]);
    Ok((t, t_inv))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Cplx<f64> {
        cplx(re, im)
    }

    #[test]
    fn two_dimensional_matrices() {
        let gs = build_gamma_set::<f64>(2).unwrap();
        let g1 = CMatrix::from_rows(&[vec![c(0., 0.), c(0., -1.)], vec![c(0., 1.), c(0., 0.)]]);
        let g2 = CMatrix::from_rows(&[vec![c(0., 0.), c(1., 0.)], vec![c(1., 0.), c(0., 0.)]]);
        let gamma = CMatrix::from_rows(&[vec![c(1., 0.), c(0., 0.)], vec![c(0., 0.), c(-1., 0.)]]);
        assert_eq!(gs.gamma(0), &g1);
        assert_eq!(gs.gamma(1), &g2);
        assert_eq!(gs.chirality(), &gamma);
        assert_eq!(&g1.mul(&g2).scale(c(0., 1.)), gs.chirality());
    }

    #[test]
    fn four_dimensional_anticommutators() {
        let gs = build_gamma_set::<f64>(4).unwrap();
        let id = CMatrix::identity(4);
        let mut zero_pairs = 0;
        for a in 0..4 {
            for b in 0..4 {
                let ac = gs.gamma(a).mul(gs.gamma(b)).add(&gs.gamma(b).mul(gs.gamma(a)));
                if a == b {
                    assert_eq!(ac, id.scale(c(2., 0.)));
                } else {
                    assert_eq!(ac, CMatrix::zeros(4));
                    zero_pairs += 1;
                }
            }
        }
        assert_eq!(zero_pairs, 12);
    }

    #[test]
    fn chirality_is_product_of_gammas() {
        for n in [2, 4, 6, 8] {
            let gs = build_gamma_set::<f64>(n).unwrap();
            let m = n / 2;
            let mut prod = CMatrix::identity(gs.size());
            for g in gs.gammas() {
                prod = prod.mul(g);
            }
            let phase = (0..m).fold(c(1., 0.), |acc, _| acc * c(0., 1.));
            assert!(prod.scale(phase).max_abs_diff(gs.chirality()) < 1e-14, "n = {n}");
        }
    }

    #[test]
    fn odd_or_zero_rejected() {
        assert!(build_gamma_set::<f64>(3).is_err());
        assert!(build_gamma_set::<f64>(0).is_err());
    }

    #[test]
    fn majorana_cycles_the_triple() {
        let gs = build_gamma_set::<f64>(2).unwrap();
        let (t, ti) = majorana_transform(&gs).unwrap();
        assert!(t.mul(&ti).max_abs_diff(&CMatrix::identity(2)) < 1e-15);
        let conj = |m: &CMatrix<f64>| t.mul(m).mul(&ti);
        assert!(conj(gs.gamma(0)).max_abs_diff(gs.gamma(1)) < 1e-15);
        assert!(conj(gs.gamma(1)).max_abs_diff(gs.chirality()) < 1e-15);
        assert!(conj(gs.chirality()).max_abs_diff(gs.gamma(0)) < 1e-15);
        assert!(conj(&conj(gs.gamma(0))).max_abs_diff(gs.chirality()) < 1e-15);
        assert!(majorana_transform(&build_gamma_set::<f64>(4).unwrap()).is_err());
    }

    #[test]
    fn projectors_in_two_dimensions() {
        let gs = build_gamma_set::<f64>(2).unwrap();
        let (pp, pm) = chiral_projectors(&gs);
        let expected = CMatrix::from_rows(&[vec![c(1., 0.), c(0., 0.)], vec![c(0., 0.), c(0., 0.)]]);
        assert_eq!(pp, expected);
        assert_eq!(pp.mul(&pm), CMatrix::zeros(2));
        assert_eq!(pp.mul(gs.gamma(0)).mul(&pp), CMatrix::zeros(2));
    }

    #[test]
    fn json_dump_lists_all_matrices() {
        let gs = build_gamma_set::<f64>(4).unwrap();
        let v: serde_json::Value = serde_json::from_str(&gs.to_json().unwrap()).unwrap();
        assert_eq!(v["gammas"].as_array().unwrap().len(), 4);
        assert_eq!(v["size"], 4);
    }
}
