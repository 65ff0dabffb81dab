//! Hamiltonian flows on the sphere, their integration, and the split of an
//! automorphism into a Hilbert automorphism and an internal phase equivalence.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::context::{Context, RayFn, RigidOffset};
use crate::error::{HvError, Result};
use crate::operators::HermitianOperator;
use crate::random::random_state;
use crate::realspace::{apply_j, from_complex, to_complex, GaugeSection, StateVector};
use crate::scalar::{wrap_angle, Real, C};

pub const DEFAULT_QUAD_TOL: f64 = 1e-9;
/// Energy drift beyond this rejects an integration step size.
pub const ENERGY_DRIFT_TOL: f64 = 1e-3;
pub const ORBIT_CONSTANT_TOL: f64 = 1e-12;
pub const SIGN_TOL: f64 = 1e-9;
/// Agreement required between the two forms of the vector field.
pub const FIELD_FORMS_TOL: f64 = 1e-10;
const QUAD_MAX_DEPTH: u32 = 48;
const QUAD_MAX_EVALS: usize = 1 << 22;
const ORBIT_PROBES: usize = 8;

/// A phase speed `h`, constant on orbits.
#[derive(Clone)]
pub enum PhaseSpeed<T: Real> {
    Constant(T),
    /// `<A>_φ`
    Expect(HermitianOperator<T>),
    Sum(Vec<PhaseSpeed<T>>),
    Product(Vec<PhaseSpeed<T>>),
    Scaled(T, Box<PhaseSpeed<T>>),
    /// `H(σ[φ])`: any function, made orbit-constant by evaluating on the section.
    OnSection(RayFn<T>),
    /// Evaluated on the state as given; orbit-constancy is the caller's claim.
    Raw(RayFn<T>),
}

impl<T: Real> fmt::Debug for PhaseSpeed<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhaseSpeed::Constant(c) => write!(f, "Constant({c:?})"),
            PhaseSpeed::Expect(a) => write!(f, "Expect(dim {})", a.dim()),
            PhaseSpeed::Sum(v) => f.debug_tuple("Sum").field(v).finish(),
            PhaseSpeed::Product(v) => f.debug_tuple("Product").field(v).finish(),
            PhaseSpeed::Scaled(c, e) => f.debug_tuple("Scaled").field(c).field(e).finish(),
            PhaseSpeed::OnSection(_) => write!(f, "OnSection(..)"),
            PhaseSpeed::Raw(_) => write!(f, "Raw(..)"),
        }
    }
}

impl<T: Real> PhaseSpeed<T> {
    pub fn zero() -> Self {
        PhaseSpeed::Constant(T::zero())
    }

    pub fn eval(&self, phi: &StateVector<T>) -> T {
        match self {
            PhaseSpeed::Constant(c) => *c,
            PhaseSpeed::Expect(a) => a.expect_unchecked(phi.coords()),
            PhaseSpeed::Sum(v) => v.iter().fold(T::zero(), |acc, e| acc + e.eval(phi)),
            PhaseSpeed::Product(v) => v.iter().fold(T::one(), |acc, e| acc * e.eval(phi)),
            PhaseSpeed::Scaled(c, e) => *c * e.eval(phi),
            PhaseSpeed::OnSection(f) => f(&GaugeSection::MaxModulus.apply(phi)),
            PhaseSpeed::Raw(f) => f(phi),
        }
    }

    pub fn as_constant(&self) -> Option<T> {
        match self {
            PhaseSpeed::Constant(c) => Some(*c),
            _ => None,
        }
    }

    /// Largest variation of `h` along orbits over deterministic probe states.
    pub fn orbit_spread(&self, n: usize) -> T {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut spread = T::zero();
        for k in 0..ORBIT_PROBES {
            let phi: StateVector<T> = random_state(n, &mut rng);
            let base = self.eval(&phi);
            for m in 1..4 {
                let th = T::lit(-3.0 + 1.7 * m as f64 + 0.37 * k as f64);
                let v = self.eval(&phi.rotate(th));
                let scale = T::one().max(base.abs());
                spread = spread.max((v - base).abs() / scale);
            }
        }
        spread
    }

    pub fn check_orbit_constant(&self, n: usize) -> Result<()> {
        let spread = self.orbit_spread(n);
        if !(spread <= T::tolerance(ORBIT_CONSTANT_TOL)) {
            return Err(HvError::PhaseNotOrbitConstant {
                spread: spread.as_f64(),
            });
        }
        Ok(())
    }
}

/// `e^{-itA}` through the spectral decomposition.
pub fn unitary_matrix<T: Real>(a: &HermitianOperator<T>, t: T) -> Result<DMatrix<C<T>>> {
    let d = a.spectral()?;
    let n = a.dim();
    let mut u = DMatrix::zeros(n, n);
    for s in d.spaces() {
        let (sin, cos) = (-t * s.value).sin_cos();
        let phase = C::new(cos, sin);
        u += (&s.basis * s.basis.adjoint()) * phase;
    }
    Ok(u)
}

/// Real `2n × 2n` form `[[Re U, -Im U], [Im U, Re U]]` of a complex matrix.
pub fn realify<T: Real>(u: &DMatrix<C<T>>) -> DMatrix<T> {
    let n = u.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = u[(i % n, j % n)];
        match (i / n, j / n) {
            (0, 0) | (1, 1) => z.re,
            (0, 1) => -z.im,
            _ => z.im,
        }
    })
}

/// Spectral components `P_iψ`, so that `e^{-irA}ψ = Σ e^{-irλ_i}P_iψ`.
#[derive(Debug, Clone)]
struct Evolver<T: Real> {
    parts: Vec<(T, DVector<C<T>>)>,
}

impl<T: Real> Evolver<T> {
    fn new(a: &HermitianOperator<T>, phi: &StateVector<T>) -> Result<Self> {
        if a.dim() != phi.dim() {
            return Err(HvError::DimensionMismatch {
                expected: a.dim(),
                got: phi.dim(),
            });
        }
        let d = a.spectral()?;
        let z = to_complex(phi.coords());
        let parts = d
            .spaces()
            .iter()
            .map(|s| (s.value, &s.basis * (s.basis.adjoint() * &z)))
            .collect();
        Ok(Evolver { parts })
    }

    fn coords_at(&self, r: T) -> DVector<T> {
        let n = self.parts[0].1.len();
        let mut z = DVector::zeros(n);
        for (lam, p) in &self.parts {
            let (sin, cos) = (-r * *lam).sin_cos();
            z += p * C::new(cos, sin);
        }
        from_complex(&z)
    }

    fn at(&self, r: T) -> StateVector<T> {
        // the components are orthogonal, so the norm is preserved up to rounding
        StateVector::normalized(self.coords_at(r)).expect("unitary image is nonzero")
    }
}

/// `e^{-itA}φ`
pub fn unitary_evolve<T: Real>(
    a: &HermitianOperator<T>,
    t: T,
    phi: &StateVector<T>,
) -> Result<StateVector<T>> {
    Ok(Evolver::new(a, phi)?.at(t))
}

/// Generator `A` with an orbit-constant phase speed `h`.
#[derive(Debug, Clone)]
pub struct HamiltonianSystem<T: Real> {
    generator: HermitianOperator<T>,
    phase_speed: PhaseSpeed<T>,
}

impl<T: Real> HamiltonianSystem<T> {
    /// Validates orbit-constancy of `h` on probe states.
    pub fn new(generator: HermitianOperator<T>, phase_speed: PhaseSpeed<T>) -> Result<Self> {
        phase_speed.check_orbit_constant(generator.dim())?;
        generator.spectral()?;
        Ok(HamiltonianSystem {
            generator,
            phase_speed,
        })
    }

    pub fn generator(&self) -> &HermitianOperator<T> {
        &self.generator
    }

    pub fn phase_speed(&self) -> &PhaseSpeed<T> {
        &self.phase_speed
    }

    pub fn dim(&self) -> usize {
        self.generator.dim()
    }

    fn check_dim(&self, phi: &StateVector<T>) -> Result<()> {
        if phi.dim() != self.dim() {
            return Err(HvError::DimensionMismatch {
                expected: self.dim(),
                got: phi.dim(),
            });
        }
        Ok(())
    }
}

/// Adaptive Simpson quadrature with a global evaluation budget.
pub fn adaptive_simpson<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, tol: T) -> Result<T> {
    struct State {
        evals: usize,
    }
    fn rec<T: Real, F: FnMut(T) -> T>(
        f: &mut F,
        st: &mut State,
        (a, fa): (T, T),
        (m, fm): (T, T),
        (b, fb): (T, T),
        whole: T,
        tol: T,
        depth: u32,
    ) -> Result<T> {
        let half = T::lit(0.5);
        let six = T::lit(6.0);
        let lm = (a + m) * half;
        let rm = (m + b) * half;
        let flm = f(lm);
        let frm = f(rm);
        st.evals += 2;
        let left = (m - a) / six * (fa + T::lit(4.0) * flm + fm);
        let right = (b - m) / six * (fm + T::lit(4.0) * frm + fb);
        let delta = left + right - whole;
        if delta.abs() <= T::lit(15.0) * tol
            || (depth > 8 && (b - a).abs() <= T::default_epsilon() * (a.abs() + b.abs()))
        {
            return Ok(left + right + delta / T::lit(15.0));
        }
        if depth >= QUAD_MAX_DEPTH || st.evals >= QUAD_MAX_EVALS {
            return Err(HvError::QuadratureFailure);
        }
        let l = rec(
            f,
            st,
            (a, fa),
            (lm, flm),
            (m, fm),
            left,
            tol * half,
            depth + 1,
        )?;
        let r = rec(
            f,
            st,
            (m, fm),
            (rm, frm),
            (b, fb),
            right,
            tol * half,
            depth + 1,
        )?;
        Ok(l + r)
    }
    if a == b {
        return Ok(T::zero());
    }
    let m = (a + b) * T::lit(0.5);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb);
    let mut st = State { evals: 3 };
    let v = rec(&mut f, &mut st, (a, fa), (m, fm), (b, fb), whole, tol, 0)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(HvError::QuadratureFailure)
    }
}

fn phase_integral<T: Real>(
    sys: &HamiltonianSystem<T>,
    ev: &Evolver<T>,
    a: T,
    b: T,
    tol: T,
) -> Result<T> {
    if let Some(c) = sys.phase_speed.as_constant() {
        return Ok(c * (b - a));
    }
    adaptive_simpson(|r| sys.phase_speed.eval(&ev.at(r)), a, b, tol)
}

/// `Φ_t(φ) = e^{-i∫₀ᵗ h(e^{-irA}φ)dr}·e^{-itA}φ`
pub fn hamiltonian_flow<T: Real>(
    sys: &HamiltonianSystem<T>,
    t: T,
    phi: &StateVector<T>,
    quad_tol: T,
) -> Result<StateVector<T>> {
    sys.check_dim(phi)?;
    let ev = Evolver::new(&sys.generator, phi)?;
    let phase = phase_integral(sys, &ev, T::zero(), t, quad_tol)?;
    Ok(ev.at(t).rotate(-phase))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowMethod {
    ClosedForm,
    Integrated,
}

#[derive(Debug, Clone)]
pub struct FlowResult<T: Real> {
    pub times: Vec<T>,
    pub states: Vec<StateVector<T>>,
    pub method: FlowMethod,
    /// For integrated flows: largest distance to the closed form over the samples.
    pub error_estimate: T,
}

/// Closed-form flow sampled on increasing `times`, accumulating the phase
/// integral interval by interval.
pub fn closed_form_trajectory<T: Real>(
    sys: &HamiltonianSystem<T>,
    phi: &StateVector<T>,
    times: &[T],
    quad_tol: T,
) -> Result<FlowResult<T>> {
    sys.check_dim(phi)?;
    let ev = Evolver::new(&sys.generator, phi)?;
    let mut phase = T::zero();
    let mut prev = T::zero();
    let mut states = Vec::with_capacity(times.len());
    for &t in times {
        phase += phase_integral(sys, &ev, prev, t, quad_tol)?;
        prev = t;
        states.push(ev.at(t).rotate(-phase));
    }
    Ok(FlowResult {
        times: times.to_vec(),
        states,
        method: FlowMethod::ClosedForm,
        error_estimate: T::zero(),
    })
}

/// `X(φ) = −J(Aφ) − h(φ)·Jφ`
pub fn vector_field<T: Real>(
    sys: &HamiltonianSystem<T>,
    phi: &StateVector<T>,
) -> Result<DVector<T>> {
    let (direct, via_grad) = vector_field_forms(sys, phi)?;
    let scale = T::one().max(direct.amax());
    debug_assert!(
        (&direct - &via_grad).amax() <= T::tolerance(FIELD_FORMS_TOL) * scale,
        "vector field forms disagree"
    );
    Ok(direct)
}

/// Both forms of the field: `−J(Aφ) − h·Jφ` and `−J∇l − (l + h)·Jφ`.
pub fn vector_field_forms<T: Real>(
    sys: &HamiltonianSystem<T>,
    phi: &StateVector<T>,
) -> Result<(DVector<T>, DVector<T>)> {
    sys.check_dim(phi)?;
    let v = phi.coords();
    let h = sys.phase_speed.eval(phi);
    let jphi = apply_j(v);
    let av = sys.generator.apply_real(v);
    let direct = -apply_j(&av) - &jphi * h;
    let grad = sys.generator.grad_expect(phi)?;
    let l = sys.generator.expect(phi)?;
    let via_grad = -apply_j(&grad) - &jphi * (l + h);
    Ok((direct, via_grad))
}

fn field_raw<T: Real>(sys: &HamiltonianSystem<T>, v: &DVector<T>) -> DVector<T> {
    let phi = StateVector::from_coords_unchecked(v.clone());
    let h = sys.phase_speed.eval(&phi);
    let av = sys.generator.apply_real(v);
    -apply_j(&av) - apply_j(v) * h
}

/// Classical RK4 with renormalization to the sphere after every step.
pub fn integrate_field<T: Real>(
    sys: &HamiltonianSystem<T>,
    t: T,
    phi: &StateVector<T>,
    step: T,
) -> Result<FlowResult<T>> {
    integrate_field_with(sys, t, phi, step, T::tolerance(DEFAULT_QUAD_TOL))
}

pub fn integrate_field_with<T: Real>(
    sys: &HamiltonianSystem<T>,
    t: T,
    phi: &StateVector<T>,
    step: T,
    quad_tol: T,
) -> Result<FlowResult<T>> {
    if !(step > T::zero()) {
        return Err(HvError::NonPositiveStep);
    }
    sys.check_dim(phi)?;
    let steps = (t.abs() / step).ceil().to_usize().unwrap_or(0);
    let dt = if steps == 0 {
        T::zero()
    } else {
        t / T::lit(steps as f64)
    };
    let half = T::lit(0.5);
    let e0 = sys.generator.expect(phi)?;
    let mut v = phi.coords().clone();
    let mut times = vec![T::zero()];
    let mut states = vec![phi.clone()];
    for k in 1..=steps {
        let k1 = field_raw(sys, &v);
        let k2 = field_raw(sys, &(&v + &k1 * (dt * half)));
        let k3 = field_raw(sys, &(&v + &k2 * (dt * half)));
        let k4 = field_raw(sys, &(&v + &k3 * dt));
        v += (k1 + (k2 + k3) * T::lit(2.0) + k4) * (dt / T::lit(6.0));
        let s = StateVector::normalized(v.clone())?;
        let drift = (sys.generator.expect(&s)? - e0).abs();
        if drift > T::tolerance(ENERGY_DRIFT_TOL) {
            return Err(HvError::StepTooLarge {
                step: step.as_f64(),
                drift: drift.as_f64(),
            });
        }
        v = s.coords().clone();
        times.push(dt * T::lit(k as f64));
        states.push(s);
    }
    let exact = closed_form_trajectory(sys, phi, &times, quad_tol)?;
    let error_estimate = states
        .iter()
        .zip(&exact.states)
        .fold(T::zero(), |acc, (a, b)| {
            acc.max((a.coords() - b.coords()).amax())
        });
    Ok(FlowResult {
        times,
        states,
        method: FlowMethod::Integrated,
        error_estimate,
    })
}

/// Largest ray distance between the two flows over `times`, with the time
/// where it occurs.
pub fn projective_compare<T: Real>(
    a: &HamiltonianSystem<T>,
    b: &HamiltonianSystem<T>,
    times: &[T],
    phi: &StateVector<T>,
    quad_tol: T,
) -> Result<(T, T)> {
    if a.dim() != b.dim() {
        return Err(HvError::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let ta = closed_form_trajectory(a, phi, times, quad_tol)?;
    let tb = closed_form_trajectory(b, phi, times, quad_tol)?;
    let mut worst = (T::zero(), times.first().copied().unwrap_or(T::zero()));
    for ((x, y), &t) in ta.states.iter().zip(&tb.states).zip(times) {
        let d = x.ray_distance(y)?;
        if d > worst.0 {
            worst = (d, t);
        }
    }
    Ok(worst)
}

/// `+1` if `U` commutes with `J` (unitary), `−1` if it anticommutes (antiunitary).
pub fn symmetry_sign<T: Real>(u: &DMatrix<T>) -> Result<i8> {
    let m = u.nrows();
    if m != u.ncols() || !m.is_multiple_of(2) {
        return Err(HvError::NotIsometry {
            defect: f64::INFINITY,
        });
    }
    let tol = T::tolerance(SIGN_TOL);
    let defect = (u.transpose() * u - DMatrix::identity(m, m)).amax();
    if defect > tol {
        return Err(HvError::NotIsometry {
            defect: defect.as_f64(),
        });
    }
    let j = crate::realspace::ComplexSpace::new(m / 2).j_matrix::<T>();
    let uj = u * &j;
    let ju = &j * u;
    if (&uj - &ju).amax() <= tol {
        Ok(1)
    } else if (&uj + &ju).amax() <= tol {
        Ok(-1)
    } else {
        Err(HvError::NotComplexOrConjugateLinear)
    }
}

/// A real isometry of `R^{2n}` that is complex linear or conjugate linear.
#[derive(Debug, Clone, PartialEq)]
pub struct HilbertAutomorphism<T: Real> {
    pub matrix: DMatrix<T>,
    pub sign: i8,
}

impl<T: Real> HilbertAutomorphism<T> {
    pub fn new(matrix: DMatrix<T>) -> Result<Self> {
        let sign = symmetry_sign(&matrix)?;
        Ok(HilbertAutomorphism { matrix, sign })
    }

    pub fn apply(&self, phi: &StateVector<T>) -> Result<StateVector<T>> {
        StateVector::from_coords(&self.matrix * phi.coords())
    }
}

/// `ν(φ) = e^{−ih(φ)}φ`, together with its realization as a rigid context.
#[derive(Debug, Clone)]
pub struct InternalEquivalence<T: Real> {
    pub phase_speed: PhaseSpeed<T>,
    pub context: Context<T>,
}

impl<T: Real> InternalEquivalence<T> {
    pub fn apply(&self, phi: &StateVector<T>) -> StateVector<T> {
        phi.rotate(-self.phase_speed.eval(phi))
    }
}

/// Splits `Φ(φ) = U(e^{−ih(φ)}φ)` into its Hilbert automorphism and internal
/// equivalence, and checks that the latter acts on orbit coordinates as the
/// rigid context with offset `−h`.
pub fn decompose_automorphism<T: Real>(
    u: &DMatrix<T>,
    h: &PhaseSpeed<T>,
) -> Result<(HilbertAutomorphism<T>, InternalEquivalence<T>)> {
    let aut = HilbertAutomorphism::new(u.clone())?;
    let n = u.nrows() / 2;
    h.check_orbit_constant(n)?;
    let hh = h.clone();
    let offset: RayFn<T> = Arc::new(move |rep: &StateVector<T>| -hh.eval(rep));
    let nu = InternalEquivalence {
        phase_speed: h.clone(),
        context: Context::Rigid(RigidOffset::Custom(offset)),
    };
    let gauge = GaugeSection::MaxModulus;
    let mut rng = ChaCha8Rng::seed_from_u64(0xdec0);
    for _ in 0..ORBIT_PROBES {
        let phi: StateVector<T> = random_state(n, &mut rng);
        let moved = nu.apply(&phi);
        let rep = gauge.apply(&phi);
        let want = nu.context.forward(gauge.coordinate(&phi), &rep);
        let got = gauge.coordinate(&moved);
        if wrap_angle(want - got).abs() > T::tolerance(FIELD_FORMS_TOL) {
            return Err(HvError::PhaseNotOrbitConstant {
                spread: wrap_angle(want - got).abs().as_f64(),
            });
        }
    }
    Ok((aut, nu))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hidden::proposition_of;
    use crate::random::{random_hermitian, random_projector, random_unitary};
    use rand::Rng;
    use std::f64::consts::PI;

    fn sys(a: HermitianOperator<f64>, h: PhaseSpeed<f64>) -> HamiltonianSystem<f64> {
        HamiltonianSystem::new(a, h).unwrap()
    }

    fn dist(a: &StateVector<f64>, b: &StateVector<f64>) -> f64 {
        (a.coords() - b.coords()).amax()
    }

    #[test]
    fn unitary_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_hermitian::<f64, _>(3, &mut rng);
        let phi = random_state(3, &mut rng);
        assert!(dist(&unitary_evolve(&a, 0.0, &phi).unwrap(), &phi) < 1e-15);
        let e1 = StateVector::basis(2, 0);
        let out = unitary_evolve(&HermitianOperator::pauli_z(), PI, &e1).unwrap();
        assert!(dist(&out, &e1.rotate(-PI)) < 1e-15);
        assert!(out.same_ray(&e1));
        let t = 0.77;
        let out = unitary_evolve(&HermitianOperator::identity(3), t, &phi).unwrap();
        assert!(dist(&out, &phi.rotate(-t)) < 1e-15);
    }

    #[test]
    fn unitary_group_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let n = rng.random_range(1..=6);
            let a = random_hermitian::<f64, _>(n, &mut rng);
            let phi = random_state(n, &mut rng);
            let (s, t) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let two = unitary_evolve(&a, s, &unitary_evolve(&a, t, &phi).unwrap()).unwrap();
            let one = unitary_evolve(&a, s + t, &phi).unwrap();
            assert!(dist(&two, &one) < 1e-10);
            let u = realify(&unitary_matrix(&a, t).unwrap());
            assert!(
                (&u * phi.coords() - unitary_evolve(&a, t, &phi).unwrap().coords()).amax() < 1e-12
            );
        }
    }

    #[test]
    fn flow_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_hermitian::<f64, _>(3, &mut rng);
        let phi = random_state(3, &mut rng);
        let t = 1.3;
        let c = 0.4;
        let s = sys(a.clone(), PhaseSpeed::Constant(c));
        let out = hamiltonian_flow(&s, t, &phi, 1e-9).unwrap();
        assert!(dist(&out, &unitary_evolve(&a, t, &phi).unwrap().rotate(-c * t)) < 1e-14);
        let s0 = sys(a.clone(), PhaseSpeed::zero());
        assert!(
            dist(
                &hamiltonian_flow(&s0, t, &phi, 1e-9).unwrap(),
                &unitary_evolve(&a, t, &phi).unwrap()
            ) < 1e-15
        );
    }

    #[test]
    fn flow_matches_integrated_field() {
        let s = sys(
            HermitianOperator::pauli_z(),
            PhaseSpeed::Expect(HermitianOperator::pauli_x()),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let phi = random_state(2, &mut rng);
        let r = integrate_field(&s, 1.0, &phi, 1e-3).unwrap();
        assert_eq!(r.method, FlowMethod::Integrated);
        let mut sup: f64 = 0.0;
        for (t, st) in r.times.iter().zip(&r.states) {
            let exact = hamiltonian_flow(&s, *t, &phi, 1e-11).unwrap();
            sup = sup.max(dist(st, &exact));
        }
        assert!(sup <= 1e-6, "{sup}");
        assert!(r.error_estimate <= 1e-6);
    }

    #[test]
    fn flow_group_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let tol = 1e-9;
        for _ in 0..30 {
            let n = rng.random_range(2..=4);
            let a = random_hermitian::<f64, _>(n, &mut rng);
            let b = random_hermitian::<f64, _>(n, &mut rng);
            let h = PhaseSpeed::Sum(vec![
                PhaseSpeed::Expect(b.clone()),
                PhaseSpeed::Product(vec![PhaseSpeed::Expect(b), PhaseSpeed::Constant(0.3)]),
            ]);
            let s = sys(a, h);
            let phi = random_state(n, &mut rng);
            let (t1, t2) = (rng.random_range(0.0..1.5), rng.random_range(0.0..1.5));
            let two = hamiltonian_flow(&s, t2, &hamiltonian_flow(&s, t1, &phi, tol).unwrap(), tol)
                .unwrap();
            let one = hamiltonian_flow(&s, t1 + t2, &phi, tol).unwrap();
            assert!(dist(&two, &one) <= 2.0 * tol * 10.0, "{}", dist(&two, &one));
            // phase error: distances in coordinates are at most |Δphase|·√2
            assert!(two.phase_distance(&one).unwrap() <= 2.0 * tol);
        }
    }

    #[test]
    fn vector_field_examples() {
        let e1 = StateVector::basis(2, 0);
        let sz = HermitianOperator::pauli_z();
        let v = vector_field(&sys(sz.clone(), PhaseSpeed::zero()), &e1).unwrap();
        assert!((&v + e1.j().coords()).amax() < 1e-15);
        let c = 0.6;
        let vc = vector_field(&sys(sz, PhaseSpeed::Constant(c)), &e1).unwrap();
        assert!((&vc - (&v - e1.j().coords() * c)).amax() < 1e-15);
        let v0 = vector_field(
            &sys(HermitianOperator::zero(2), PhaseSpeed::Constant(1.0)),
            &e1,
        )
        .unwrap();
        assert!((&v0 + e1.j().coords()).amax() < 1e-15);
    }

    #[test]
    fn vector_field_forms_agree_and_are_tangent() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..500 {
            let n = rng.random_range(1..=6);
            let a = random_hermitian::<f64, _>(n, &mut rng);
            let h = PhaseSpeed::Expect(random_hermitian(n, &mut rng));
            let s = sys(a, h);
            let phi = random_state(n, &mut rng);
            let (x, y) = vector_field_forms(&s, &phi).unwrap();
            assert!((&x - &y).amax() <= 1e-10);
            assert!(x.dot(phi.coords()).abs() <= 1e-10);
        }
    }

    #[test]
    fn vector_field_is_time_derivative_of_flow() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let n = rng.random_range(1..=4);
            let a = random_hermitian::<f64, _>(n, &mut rng);
            let s = sys(a, PhaseSpeed::Expect(random_hermitian(n, &mut rng)));
            let phi = random_state(n, &mut rng);
            let eps = 1e-5;
            let fwd = hamiltonian_flow(&s, eps, &phi, 1e-13).unwrap();
            let bwd = hamiltonian_flow(&s, -eps, &phi, 1e-13).unwrap();
            let fd = (fwd.coords() - bwd.coords()) / (2.0 * eps);
            assert!((fd - vector_field(&s, &phi).unwrap()).amax() <= 1e-6);
        }
    }

    #[test]
    fn integrator_conserves_energy_and_sphere() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 3;
        let a = random_hermitian::<f64, _>(n, &mut rng);
        let s = sys(a.clone(), PhaseSpeed::Expect(random_hermitian(n, &mut rng)));
        let phi = random_state(n, &mut rng);
        let r = integrate_field(&s, 2.0, &phi, 1e-3).unwrap();
        let e0 = a.expect(&phi).unwrap();
        for st in &r.states {
            assert!((a.expect(st).unwrap() - e0).abs() <= 1e-8);
            assert!((st.coords().norm() - 2f64.sqrt()).abs() <= 1e-9);
        }
        let z = integrate_field(&s, 0.0, &phi, 1e-3).unwrap();
        assert_eq!(z.states.len(), 1);
        assert_eq!(z.states[0], phi);
        assert!(matches!(
            integrate_field(&s, 1.0, &phi, 0.0),
            Err(HvError::NonPositiveStep)
        ));
        let big = sys(a.scale(50.0), PhaseSpeed::zero());
        assert!(matches!(
            integrate_field(&big, 1.0, &phi, 0.5),
            Err(HvError::StepTooLarge { .. })
        ));
    }

    #[test]
    fn projective_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 3;
        let a = random_hermitian::<f64, _>(n, &mut rng);
        let phi = random_state(n, &mut rng);
        let grid: Vec<f64> = (0..=20).map(|k| k as f64 * 0.1).collect();
        let d = projective_compare(
            &sys(a.clone(), PhaseSpeed::zero()),
            &sys(a.clone(), PhaseSpeed::Constant(5.0)),
            &grid,
            &phi,
            1e-9,
        )
        .unwrap();
        assert!(d.0 <= 1e-9);
        let h = PhaseSpeed::Expect(random_hermitian(n, &mut rng));
        let d = projective_compare(
            &sys(a.clone(), PhaseSpeed::zero()),
            &sys(a.clone(), h),
            &grid,
            &phi,
            1e-9,
        )
        .unwrap();
        assert!(d.0 <= 1e-9);
        let d = projective_compare(
            &sys(a.clone(), PhaseSpeed::zero()),
            &sys(a.shift(2.5), PhaseSpeed::zero()),
            &grid,
            &phi,
            1e-9,
        )
        .unwrap();
        assert!(d.0 <= 1e-9);
        let phi2 = random_state(2, &mut rng);
        let d = projective_compare(
            &sys(HermitianOperator::pauli_x(), PhaseSpeed::zero()),
            &sys(HermitianOperator::pauli_z(), PhaseSpeed::zero()),
            &grid,
            &phi2,
            1e-9,
        )
        .unwrap();
        assert!(d.0 > 0.01);
    }

    #[test]
    fn symmetry_sign_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let a = random_hermitian::<f64, _>(3, &mut rng);
        assert_eq!(
            symmetry_sign(&realify(&unitary_matrix(&a, 0.9).unwrap())).unwrap(),
            1
        );
        let n = 3;
        let conj = DMatrix::from_fn(2 * n, 2 * n, |i, j| {
            if i != j {
                0.0
            } else if i < n {
                1.0
            } else {
                -1.0
            }
        });
        assert_eq!(symmetry_sign(&conj).unwrap(), -1);
        let j = crate::realspace::ComplexSpace::new(n).j_matrix::<f64>();
        assert_eq!(symmetry_sign(&j).unwrap(), 1);
        let mut mixed = DMatrix::<f64>::identity(4, 4);
        mixed[(1, 1)] = -1.0;
        assert!(matches!(
            symmetry_sign(&mixed),
            Err(HvError::NotComplexOrConjugateLinear)
        ));
        assert!(matches!(
            symmetry_sign(&(DMatrix::<f64>::identity(4, 4) * 2.0)),
            Err(HvError::NotIsometry { .. })
        ));
    }

    #[test]
    fn symmetry_sign_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let n = rng.random_range(1..=4);
            let pick = |rng: &mut ChaCha8Rng| {
                let u = realify(&random_unitary::<f64, _>(n, rng));
                if rng.random_bool(0.5) {
                    let conj = DMatrix::from_fn(2 * n, 2 * n, |i, j| {
                        if i != j {
                            0.0
                        } else if i < n {
                            1.0
                        } else {
                            -1.0
                        }
                    });
                    u * conj
                } else {
                    u
                }
            };
            let u = pick(&mut rng);
            let v = pick(&mut rng);
            let su = symmetry_sign(&u).unwrap();
            let sv = symmetry_sign(&v).unwrap();
            assert_eq!(symmetry_sign(&(&u * &v)).unwrap(), su * sv);
        }
    }

    #[test]
    fn decompose_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 3;
        let u = realify(&random_unitary::<f64, _>(n, &mut rng));
        let phi = random_state(n, &mut rng);
        let (aut, nu) = decompose_automorphism(&u, &PhaseSpeed::zero()).unwrap();
        assert_eq!(aut.sign, 1);
        assert!(dist(&nu.apply(&phi), &phi) == 0.0);
        let id = DMatrix::identity(2 * n, 2 * n);
        let c = 0.8;
        let (_, nu) = decompose_automorphism(&id, &PhaseSpeed::Constant(c)).unwrap();
        let rep = GaugeSection::MaxModulus.apply(&phi);
        assert!(wrap_angle(nu.context.forward(0.1, &rep) - (0.1 - c)).abs() < 1e-15);

        let h = PhaseSpeed::Expect(random_hermitian(n, &mut rng));
        let (aut, nu) = decompose_automorphism(&u, &h).unwrap();
        for _ in 0..100 {
            let phi = random_state(n, &mut rng);
            let whole = StateVector::from_coords(&u * phi.rotate(-h.eval(&phi)).coords()).unwrap();
            assert!(dist(&aut.apply(&nu.apply(&phi)).unwrap(), &whole) <= 1e-10);
            let e = random_projector::<f64, _>(n, 1, &mut rng);
            let l = proposition_of(&e, GaugeSection::MaxModulus, Context::Identity).unwrap();
            assert_eq!(
                l.apply_context(&nu.context).member(&nu.apply(&phi)),
                l.member(&phi)
            );
        }
    }

    #[test]
    fn decompose_rejects_phase_dependent_speed() {
        let raw: RayFn<f64> = Arc::new(|phi: &StateVector<f64>| phi.coords()[0]);
        let id = DMatrix::identity(4, 4);
        assert!(matches!(
            decompose_automorphism(&id, &PhaseSpeed::Raw(raw)),
            Err(HvError::PhaseNotOrbitConstant { .. })
        ));
        let on_section: RayFn<f64> = Arc::new(|phi: &StateVector<f64>| phi.coords()[0]);
        assert!(decompose_automorphism(&id, &PhaseSpeed::OnSection(on_section)).is_ok());
    }

    #[test]
    fn phase_speed_is_orbit_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let n = 4;
        let h = PhaseSpeed::Product(vec![
            PhaseSpeed::Expect(random_hermitian(n, &mut rng)),
            PhaseSpeed::Scaled(
                2.0,
                Box::new(PhaseSpeed::Expect(random_hermitian(n, &mut rng))),
            ),
        ]);
        for _ in 0..100 {
            let phi = random_state(n, &mut rng);
            let th = rng.random_range(-PI..PI);
            assert!((h.eval(&phi) - h.eval(&phi.rotate(th))).abs() <= 1e-12);
        }
    }
}
