//! Symplectic and Riemannian structure on the sphere: Jordan product, Poisson
//! bracket, dispersion and the uncertainty relation for operator-backed
//! (kaehlerian) functions.

use nalgebra::DVector;

use crate::error::{HvError, Result};
use crate::hidden::HiddenObservable;
use crate::measure::hidden_moments;
use crate::operators::HermitianOperator;
use crate::realspace::{apply_j, StateVector};
use crate::scalar::Real;

/// Slack allowed in the uncertainty inequalities.
pub const HEISENBERG_TOL: f64 = 1e-10;

/// `l(φ) = ½<φ, Aφ>` for a Hermitian `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct KaehlerFunction<T: Real> {
    op: HermitianOperator<T>,
}

impl<T: Real> KaehlerFunction<T> {
    pub fn new(op: HermitianOperator<T>) -> Self {
        KaehlerFunction { op }
    }

    pub fn op(&self) -> &HermitianOperator<T> {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn eval(&self, phi: &StateVector<T>) -> Result<T> {
        self.op.expect(phi)
    }

    /// Gradient along the sphere: `Aφ − l(φ)φ`.
    pub fn grad(&self, phi: &StateVector<T>) -> Result<DVector<T>> {
        self.op.grad_expect(phi)
    }

    /// The function whose operator is `½(AB + BA)`.
    pub fn jordan_with(&self, other: &Self) -> Self {
        KaehlerFunction::new(self.op.jordan(&other.op))
    }

    /// The function whose operator is `−i[A, B]`.
    pub fn poisson_with(&self, other: &Self) -> Self {
        KaehlerFunction::new(self.op.lie(&other.op))
    }
}

fn same_dim<T: Real>(h: &KaehlerFunction<T>, l: &KaehlerFunction<T>) -> Result<()> {
    if h.dim() != l.dim() {
        return Err(HvError::DimensionMismatch {
            expected: h.dim(),
            got: l.dim(),
        });
    }
    Ok(())
}

/// `(h∘l)(φ) = ½<∇h, ∇l> + h(φ)l(φ)`
pub fn jordan<T: Real>(
    h: &KaehlerFunction<T>,
    l: &KaehlerFunction<T>,
    phi: &StateVector<T>,
) -> Result<T> {
    same_dim(h, l)?;
    let gh = h.grad(phi)?;
    let gl = l.grad(phi)?;
    Ok(T::lit(0.5) * gh.dot(&gl) + h.eval(phi)? * l.eval(phi)?)
}

/// `{h, l}(φ) = <J∇h, ∇l>`
pub fn poisson<T: Real>(
    h: &KaehlerFunction<T>,
    l: &KaehlerFunction<T>,
    phi: &StateVector<T>,
) -> Result<T> {
    same_dim(h, l)?;
    let gh = h.grad(phi)?;
    let gl = l.grad(phi)?;
    Ok(apply_j(&gh).dot(&gl))
}

/// `√<(A − <A>)²>_φ`
pub fn dispersion<T: Real>(l: &KaehlerFunction<T>, phi: &StateVector<T>) -> Result<T> {
    let mean = l.eval(phi)?;
    let centered = l.op().shift(-mean);
    let sq = HermitianOperator::new(centered.matrix() * centered.matrix())?;
    Ok(sq.expect(phi)?.max(T::zero()).sqrt())
}

/// `‖∇l‖/√2`
pub fn dispersion_gradient<T: Real>(l: &KaehlerFunction<T>, phi: &StateVector<T>) -> Result<T> {
    Ok(l.grad(phi)?.norm() / T::lit(2.0).sqrt())
}

/// Standard deviation of a hidden observable over the orbit, from exact arcs.
pub fn dispersion_arcs<T: Real>(f: &HiddenObservable<T>, phi: &StateVector<T>) -> T {
    hidden_moments(f, phi).1.max(T::zero()).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeisenbergReport<T> {
    /// `δ(h)·δ(l)`
    pub lhs: T,
    /// `√([(h∘l) − hl]² + ¼{h,l}²)`
    pub rhs_strong: T,
    /// `½|{h,l}|`
    pub rhs_weak: T,
    pub pass: bool,
}

pub fn heisenberg_check<T: Real>(
    h: &KaehlerFunction<T>,
    l: &KaehlerFunction<T>,
    phi: &StateVector<T>,
) -> Result<HeisenbergReport<T>> {
    let lhs = dispersion(h, phi)? * dispersion(l, phi)?;
    let cov = jordan(h, l, phi)? - h.eval(phi)? * l.eval(phi)?;
    let br = poisson(h, l, phi)?;
    let quarter = T::lit(0.25);
    let rhs_strong = (cov * cov + quarter * br * br).sqrt();
    let rhs_weak = T::lit(0.5) * br.abs();
    let tol = T::tolerance(HEISENBERG_TOL);
    Ok(HeisenbergReport {
        lhs,
        rhs_strong,
        rhs_weak,
        pass: lhs >= rhs_strong - tol && rhs_strong >= rhs_weak - tol,
    })
}

/// Largest relative error between `<∇l, w>` and a central difference of `l`
/// along the great circle `cos ε·φ + sin ε·w`, over the given tangent
/// directions (each orthogonal to `φ`, any length). Errors are relative to the
/// larger of the directional derivative, `‖∇l‖·√2` and `‖A‖_F`, so a vanishing
/// gradient does not divide by zero.
pub fn gradient_fd_error<T: Real>(
    l: &KaehlerFunction<T>,
    phi: &StateVector<T>,
    directions: &[DVector<T>],
    step: T,
) -> Result<T> {
    let g = l.grad(phi)?;
    let radius = T::lit(2.0).sqrt();
    let floor = l
        .op()
        .matrix()
        .iter()
        .fold(T::zero(), |a, z| a + z.re * z.re + z.im * z.im)
        .sqrt();
    let mut worst = T::zero();
    for d in directions {
        let w = d * (radius / d.norm());
        let at = |e: T| StateVector::normalized(phi.coords() * e.cos() + &w * e.sin());
        let fd = (l.eval(&at(step)?)? - l.eval(&at(-step)?)?) / (T::lit(2.0) * step);
        let exact = g.dot(&w);
        let scale = exact.abs().max(g.norm() * radius).max(floor);
        if scale > T::zero() {
            worst = worst.max((fd - exact).abs() / scale);
        }
    }
    Ok(worst)
}
