//! Matrix-free operators on spinor fields.
//!
//! Derivatives act in Fourier space and multiplication by `f` acts pointwise
//! on the grid. The Hamiltonian is the composition `D_f^* D_f`; the direct
//! form `D^2 + m_f` is kept alongside as an independent evaluation path.

use std::fmt;
use std::sync::Arc;

use crate::clifford::{CMatrix, GammaSet};
use crate::error::{Error, Result};
use crate::fields::{ScalarField, SpinorField};
use crate::geometry::TorusGeometry;
use crate::scalar::{ci, cplx, Cplx, Real};

type ApplyFn<T> = Arc<dyn Fn(&SpinorField<T>) -> SpinorField<T> + Send + Sync>;

/// Linear map on spinor fields with a known adjoint.
#[derive(Clone)]
pub struct OperatorHandle<T: Real> {
    label: String,
    geom: Arc<TorusGeometry<T>>,
    components: usize,
    self_adjoint: bool,
    apply: ApplyFn<T>,
    adjoint: ApplyFn<T>,
}

impl<T: Real> fmt::Debug for OperatorHandle<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperatorHandle")
            .field("label", &self.label)
            .field("components", &self.components)
            .field("dimension", &self.dimension())
            .field("self_adjoint", &self.self_adjoint)
            .finish()
    }
}

impl<T: Real> OperatorHandle<T> {
    pub fn new<F, G>(
        label: impl Into<String>,
        geom: &Arc<TorusGeometry<T>>,
        components: usize,
        self_adjoint: bool,
        apply: F,
        adjoint: G,
    ) -> Self
    where
        F: Fn(&SpinorField<T>) -> SpinorField<T> + Send + Sync + 'static,
        G: Fn(&SpinorField<T>) -> SpinorField<T> + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            geom: geom.clone(),
            components,
            self_adjoint,
            apply: Arc::new(apply),
            adjoint: Arc::new(adjoint),
        }
    }

    /// Self-adjoint operator; the adjoint reuses `apply`.
    pub fn hermitian<F>(label: impl Into<String>, geom: &Arc<TorusGeometry<T>>, components: usize, apply: F) -> Self
    where
        F: Fn(&SpinorField<T>) -> SpinorField<T> + Send + Sync + 'static,
    {
        let apply: ApplyFn<T> = Arc::new(apply);
        Self {
            label: label.into(),
            geom: geom.clone(),
            components,
            self_adjoint: true,
            apply: apply.clone(),
            adjoint: apply,
        }
    }

    pub fn identity(geom: &Arc<TorusGeometry<T>>, components: usize) -> Self {
        Self::hermitian("identity", geom, components, |u| u.clone())
    }

    pub fn apply(&self, u: &SpinorField<T>) -> Result<SpinorField<T>> {
        self.check_input(u)?;
        Ok((self.apply)(u))
    }

    pub fn adjoint_apply(&self, u: &SpinorField<T>) -> Result<SpinorField<T>> {
        self.check_input(u)?;
        Ok((self.adjoint)(u))
    }

    /// The adjoint as an operator in its own right.
    pub fn adjoint(&self) -> Self {
        Self {
            label: format!("{}*", self.label),
            geom: self.geom.clone(),
            components: self.components,
            self_adjoint: self.self_adjoint,
            apply: self.adjoint.clone(),
            adjoint: self.apply.clone(),
        }
    }

    /// `self . inner`
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if !self.geom.same_as(&inner.geom) {
            return Err(Error::GeometryMismatch);
        }
        if self.components != inner.components {
            return Err(Error::ComponentMismatch { expected: self.components, got: inner.components });
        }
        let (a, b) = (self.apply.clone(), inner.apply.clone());
        let (a_adj, b_adj) = (self.adjoint.clone(), inner.adjoint.clone());
        Ok(Self {
            label: format!("{} . {}", self.label, inner.label),
            geom: self.geom.clone(),
            components: self.components,
            self_adjoint: false,
            apply: Arc::new(move |u| a(&b(u))),
            adjoint: Arc::new(move |u| b_adj(&a_adj(u))),
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub(crate) fn flagged_self_adjoint(mut self) -> Self {
        self.self_adjoint = true;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn geometry(&self) -> &Arc<TorusGeometry<T>> {
        &self.geom
    }

    pub fn components(&self) -> usize {
        self.components
    }

    /// Total complex degrees of freedom.
    pub fn dimension(&self) -> usize {
        self.components * self.geom.num_points()
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.self_adjoint
    }

    fn check_input(&self, u: &SpinorField<T>) -> Result<()> {
        if !self.geom.same_as(u.geometry()) {
            return Err(Error::GeometryMismatch);
        }
        if u.components() != self.components {
            return Err(Error::ComponentMismatch { expected: self.components, got: u.components() });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn value<T: Real>(self) -> T {
        match self {
            Sign::Plus => T::one(),
            Sign::Minus => -T::one(),
        }
    }
}

fn check_dims<T: Real>(geom: &TorusGeometry<T>, gammas: &GammaSet<T>) -> Result<()> {
    if geom.dim() != gammas.dim() {
        return Err(Error::Validation(format!(
            "dimension mismatch: geometry has dim {}, gamma set has dim {}",
            geom.dim(),
            gammas.dim()
        )));
    }
    Ok(())
}

fn check_deformation<T: Real>(geom: &TorusGeometry<T>, f: &ScalarField<T>) -> Result<()> {
    if !f.is_real() {
        return Err(Error::ComplexDeformation);
    }
    if !geom.same_as(f.geometry()) {
        return Err(Error::GeometryMismatch);
    }
    Ok(())
}

/// `sum_a M_a d_a u` for constant matrices `M_a` over the listed axes.
fn first_order<T: Real>(u: &SpinorField<T>, mats: &[(usize, CMatrix<T>)]) -> SpinorField<T> {
    let mut out = SpinorField::zeros(u.geometry(), u.components());
    for (axis, m) in mats {
        let du = u.spectral_derivative(*axis).expect("axis checked at construction");
        let term = du.apply_matrix(m).expect("components checked at construction");
        out.axpy(cplx(T::one(), T::zero()), &term).expect("same layout");
    }
    out
}

fn i_gammas<T: Real>(gammas: &GammaSet<T>) -> Vec<(usize, CMatrix<T>)> {
    gammas.gammas().iter().enumerate().map(|(a, g)| (a, g.scale(ci()))).collect()
}

/// `D = i gamma^a e_a`, self-adjoint.
pub fn dirac_operator<T: Real>(geom: &Arc<TorusGeometry<T>>, gammas: &GammaSet<T>) -> Result<OperatorHandle<T>> {
    check_dims(geom, gammas)?;
    let mats = i_gammas(gammas);
    Ok(OperatorHandle::hermitian("D", geom, gammas.size(), move |u| first_order(u, &mats)))
}

/// `D + i s f` for sign `s`; its adjoint is `D - i s f`.
pub fn deformed_dirac<T: Real>(
    geom: &Arc<TorusGeometry<T>>,
    gammas: &GammaSet<T>,
    f: &ScalarField<T>,
    sign: Sign,
) -> Result<OperatorHandle<T>> {
    check_dims(geom, gammas)?;
    check_deformation(geom, f)?;
    let mats = i_gammas(gammas);
    let mats_adj = mats.clone();
    let fs = f.scale(sign.value());
    let fs_adj = fs.clone();
    let label = match sign {
        Sign::Plus => "D_f",
        Sign::Minus => "D_f*",
    };
    let zero = f.max_abs() == T::zero();
    let op = OperatorHandle::new(
        label,
        geom,
        gammas.size(),
        zero,
        move |u| {
            let mut out = first_order(u, &mats);
            out.axpy(ci(), &u.multiply(&fs).expect("geometry checked")).expect("same layout");
            out
        },
        move |u| {
            let mut out = first_order(u, &mats_adj);
            out.axpy(-ci::<T>(), &u.multiply(&fs_adj).expect("geometry checked")).expect("same layout");
            out
        },
    );
    Ok(op)
}

/// `H_f = D_f^* D_f` as a composition.
pub fn hamiltonian<T: Real>(
    geom: &Arc<TorusGeometry<T>>,
    gammas: &GammaSet<T>,
    f: &ScalarField<T>,
) -> Result<OperatorHandle<T>> {
    let df = deformed_dirac(geom, gammas, f, Sign::Plus)?;
    let dfs = deformed_dirac(geom, gammas, f, Sign::Minus)?;
    Ok(dfs.compose(&df)?.flagged_self_adjoint().with_label("H_f"))
}

/// `H_f = -Laplacian + m_f`, evaluated without composing first-order operators.
pub fn hamiltonian_direct<T: Real>(
    geom: &Arc<TorusGeometry<T>>,
    gammas: &GammaSet<T>,
    f: &ScalarField<T>,
) -> Result<OperatorHandle<T>> {
    let m = potential_matrix(geom, gammas, f)?;
    let dim = geom.dim();
    Ok(OperatorHandle::hermitian("H_f direct", geom, gammas.size(), move |u| {
        let mut out = m.apply(u).expect("layout checked");
        for axis in 0..dim {
            let d2 = u.derivative_of_order(axis, 2).expect("axis in range");
            out.axpy(cplx(-T::one(), T::zero()), &d2).expect("same layout");
        }
        out
    }))
}

/// Pointwise Hermitian potential `m_f = f^2 - gamma^a e_a f`.
#[derive(Debug, Clone)]
pub struct PotentialMatrixField<T: Real> {
    geom: Arc<TorusGeometry<T>>,
    gammas: GammaSet<T>,
    f: Vec<T>,
    grad: Vec<Vec<T>>,
    lambda_min: Vec<T>,
    lambda_max: Vec<T>,
}

pub fn potential_matrix<T: Real>(
    geom: &Arc<TorusGeometry<T>>,
    gammas: &GammaSet<T>,
    f: &ScalarField<T>,
) -> Result<PotentialMatrixField<T>> {
    check_dims(geom, gammas)?;
    check_deformation(geom, f)?;
    let grad: Vec<Vec<T>> = (0..geom.dim())
        .map(|a| f.spectral_derivative(a).map(|d| d.real_values()))
        .collect::<Result<_>>()?;
    let fv = f.real_values();
    let np = geom.num_points();
    let mut lambda_min = Vec::with_capacity(np);
    let mut lambda_max = Vec::with_capacity(np);
    for p in 0..np {
        let g = grad.iter().map(|g| g[p] * g[p]).sum::<T>().sqrt();
        let f2 = fv[p] * fv[p];
        lambda_min.push(f2 - g);
        lambda_max.push(f2 + g);
    }
    Ok(PotentialMatrixField { geom: geom.clone(), gammas: gammas.clone(), f: fv, grad, lambda_min, lambda_max })
}

impl<T: Real> PotentialMatrixField<T> {
    pub fn geometry(&self) -> &Arc<TorusGeometry<T>> {
        &self.geom
    }

    pub fn matrix_at(&self, p: usize) -> CMatrix<T> {
        let n = self.gammas.size();
        let f2 = self.f[p] * self.f[p];
        let mut m = CMatrix::identity(n).scale(cplx(f2, T::zero()));
        for (a, g) in self.gammas.gammas().iter().enumerate() {
            m = m.sub(&g.scale(cplx(self.grad[a][p], T::zero())));
        }
        m
    }

    /// `f^2 - |grad f|` per point.
    pub fn lambda_min(&self) -> &[T] {
        &self.lambda_min
    }

    /// `f^2 + |grad f|` per point.
    pub fn lambda_max(&self) -> &[T] {
        &self.lambda_max
    }

    pub fn apply(&self, u: &SpinorField<T>) -> Result<SpinorField<T>> {
        if !self.geom.same_as(u.geometry()) {
            return Err(Error::GeometryMismatch);
        }
        if u.components() != self.gammas.size() {
            return Err(Error::ComponentMismatch { expected: self.gammas.size(), got: u.components() });
        }
        let np = self.geom.num_points();
        let mut out = u.clone();
        for c in 0..u.components() {
            for (v, &f) in out.component_mut(c).iter_mut().zip(&self.f) {
                *v = *v * (f * f);
            }
        }
        let mut scratch = SpinorField::zeros(&self.geom, u.components());
        for (a, g) in self.gammas.gammas().iter().enumerate() {
            let gu = u.apply_matrix(g)?;
            for c in 0..u.components() {
                let src = gu.component(c);
                let dst = scratch.component_mut(c);
                for p in 0..np {
                    dst[p] = dst[p] + src[p] * self.grad[a][p];
                }
            }
        }
        out.axpy(cplx(-T::one(), T::zero()), &scratch)?;
        Ok(out)
    }

    /// `<u, m_f u>`, real because `m_f` is Hermitian.
    pub fn quadratic_form(&self, u: &SpinorField<T>) -> Result<T> {
        Ok(u.inner(&self.apply(u)?)?.re)
    }
}

/// Half-spinor blocks of `D` relative to `Gamma = diag(I, -I)`, the last axis
/// being the distinguished circle.
#[derive(Debug, Clone)]
pub struct ChiralBlocks<T: Real> {
    pub a: OperatorHandle<T>,
    pub b: OperatorHandle<T>,
    pub f: OperatorHandle<T>,
    pub f_star: OperatorHandle<T>,
    deformation: ScalarField<T>,
}

/// Hatted matrices `h_j = i * (upper-right block of gamma_j)` for `j < n`.
pub fn hatted_gammas<T: Real>(gammas: &GammaSet<T>) -> Vec<CMatrix<T>> {
    let n = gammas.dim();
    gammas.gammas()[..n - 1].iter().map(|g| g.block(0, 1).scale(ci())).collect()
}

pub fn chiral_blocks<T: Real>(
    geom: &Arc<TorusGeometry<T>>,
    gammas: &GammaSet<T>,
    f: &ScalarField<T>,
) -> Result<ChiralBlocks<T>> {
    check_dims(geom, gammas)?;
    check_deformation(geom, f)?;
    let n = geom.dim();
    let half = gammas.size() / 2;
    let hat: Vec<(usize, CMatrix<T>)> = hatted_gammas(gammas).into_iter().enumerate().collect();
    let last = vec![(n - 1, CMatrix::identity(half))];
    let neg = |v: SpinorField<T>| v.scale_real(-T::one());

    let (h1, h2) = (hat.clone(), hat.clone());
    let a = OperatorHandle::new("A", geom, half, false, move |u| first_order(u, &h1), move |u| neg(first_order(u, &h2)));
    let (l1, l2) = (last.clone(), last.clone());
    let b = OperatorHandle::new("B", geom, half, false, move |u| first_order(u, &l1), move |u| neg(first_order(u, &l2)));

    // F = -A + iB and F* = A + iB; each is the other's adjoint.
    let block = |sa: T, hat: Vec<(usize, CMatrix<T>)>, last: Vec<(usize, CMatrix<T>)>| {
        move |u: &SpinorField<T>| {
            let mut out = first_order(u, &hat).scale_real(sa);
            out.axpy(ci(), &first_order(u, &last)).expect("same layout");
            out
        }
    };
    let one = T::one();
    let f_op = OperatorHandle::new(
        "F",
        geom,
        half,
        false,
        block(-one, hat.clone(), last.clone()),
        block(one, hat.clone(), last.clone()),
    );
    let f_star = f_op.adjoint().with_label("F*");
    Ok(ChiralBlocks { a, b, f: f_op, f_star, deformation: f.clone() })
}

impl<T: Real> ChiralBlocks<T> {
    /// `D (u+, u-) = (F* u-, F u+)`.
    pub fn reassemble_dirac(&self, u: &SpinorField<T>) -> Result<SpinorField<T>> {
        let half = self.a.components();
        let (up, dn) = (u.slice_components(0, half), u.slice_components(half, half));
        SpinorField::stack(&self.f_star.apply(&dn)?, &self.f.apply(&up)?)
    }

    /// `D_f (u+, u-) = (i f u+ + F* u-, F u+ + i f u-)`.
    pub fn reassemble_deformed(&self, u: &SpinorField<T>) -> Result<SpinorField<T>> {
        let mut out = self.reassemble_dirac(u)?;
        out.axpy(ci(), &u.multiply(&self.deformation)?)?;
        Ok(out)
    }
}

/// `J`, `Q`, `Q*` on doubled fields `(u1, u2)`, stored as one field with the
/// components of `u1` followed by those of `u2`.
#[derive(Debug, Clone)]
pub struct SuperchargeBlocks<T: Real> {
    pub j: OperatorHandle<T>,
    pub q: OperatorHandle<T>,
    pub q_star: OperatorHandle<T>,
}

pub fn supercharge_blocks<T: Real>(
    geom: &Arc<TorusGeometry<T>>,
    gammas: &GammaSet<T>,
    f: &ScalarField<T>,
) -> Result<SuperchargeBlocks<T>> {
    let df = deformed_dirac(geom, gammas, f, Sign::Plus)?;
    let s = gammas.size();
    let split = move |u: &SpinorField<T>| (u.slice_components(0, s), u.slice_components(s, s));

    let j = OperatorHandle::hermitian("J", geom, 2 * s, move |u| {
        let (u1, u2) = split(u);
        SpinorField::stack(&u1, &u2.scale_real(-T::one())).expect("same geometry")
    });
    let (d1, d2) = (df.clone(), df.clone());
    let q = OperatorHandle::new(
        "Q",
        geom,
        2 * s,
        false,
        move |u| {
            let (u1, _) = split(u);
            let lower = d1.apply(&u1).expect("layout checked");
            SpinorField::stack(&SpinorField::zeros(u.geometry(), s), &lower).expect("same geometry")
        },
        move |u| {
            let (_, u2) = split(u);
            let upper = d2.adjoint_apply(&u2).expect("layout checked");
            SpinorField::stack(&upper, &SpinorField::zeros(u.geometry(), s)).expect("same geometry")
        },
    );
    let q_star = q.adjoint().with_label("Q*");
    Ok(SuperchargeBlocks { j, q, q_star })
}

impl<T: Real> SuperchargeBlocks<T> {
    /// `(Q + Q*)^2 u`
    pub fn square(&self, u: &SpinorField<T>) -> Result<SpinorField<T>> {
        let v = self.q.apply(u)?.add(&self.q_star.apply(u)?)?;
        self.q.apply(&v)?.add(&self.q_star.apply(&v)?)
    }
}

/// Pointwise `Gamma u`.
pub fn apply_chirality<T: Real>(gammas: &GammaSet<T>, u: &SpinorField<T>) -> Result<SpinorField<T>> {
    u.apply_matrix(gammas.chirality())
}

/// Multiplication by a constant, as an operator. Used for shifts and tests.
pub fn scalar_multiple<T: Real>(geom: &Arc<TorusGeometry<T>>, components: usize, c: Cplx<T>) -> OperatorHandle<T> {
    let cc = c.conj();
    OperatorHandle::new("c I", geom, components, c.im == T::zero(), move |u| u.scale(c), move |u| u.scale(cc))
}
