//! Logical structure of hidden propositions: compatibility, the boolean
//! morphism to projectors, the failure of total independence, contextuality
//! witnesses, frame functions and factorization of observables.

use nalgebra::{ComplexField, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::arcs::ArcSet;
use crate::borel::BorelSet;
use crate::context::Context;
use crate::error::{HvError, Result};
use crate::hidden::{
    partition_of_projectors, proposition_of_projector, HiddenObservable, Proposition,
};
use crate::measure::{form_fit, FORM_FIT_FAIL, FORM_FIT_SAMPLES};
use crate::operators::{
    Eigenspace, HermitianOperator, Projector, SpectralDecomposition, DEFAULT_MERGE_TOL,
};
use crate::random::{random_basis, random_state};
use crate::realspace::{GaugeSection, StateVector};
use crate::scalar::{Real, C};

/// Commutator norm below which projectors count as commuting.
pub const COMMUTE_TOL: f64 = 1e-10;
/// Tolerance for `E ∈ {0, I}`.
pub const BANAL_TOL: f64 = 1e-10;
/// Fit residual above which no Hermitian `G` reproduces `<E><F>`.
pub const NO_G_THRESHOLD: f64 = 1e-6;
pub const ORTHONORMAL_TOL: f64 = 1e-9;
/// Tolerance for the measure identities of [`boolean_morphism_check`].
pub const MEASURE_TOL: f64 = 1e-12;
/// Random superposition paths tried when hunting an incompatibility witness.
const WITNESS_RANDOM_PATHS: usize = 16;

fn max_abs<T: Real>(m: &DMatrix<C<T>>) -> T {
    m.iter().fold(T::zero(), |a, z| a.max(z.modulus()))
}

fn commutator_norm<T: Real>(a: &HermitianOperator<T>, b: &HermitianOperator<T>) -> T {
    max_abs(&a.commutator(b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// All members are preimages under one hidden observable.
    SpectralFamily,
    AdHoc,
}

/// Propositions sharing one gauge.
#[derive(Debug, Clone)]
pub struct PropositionFamily<T: Real> {
    members: Vec<Proposition<T>>,
    provenance: Provenance,
}

impl<T: Real> PropositionFamily<T> {
    pub fn new(members: Vec<Proposition<T>>, provenance: Provenance) -> Result<Self> {
        if let Some(first) = members.first() {
            if members.iter().any(|m| m.gauge() != first.gauge()) {
                return Err(HvError::GaugeMismatch);
            }
        }
        let fam = PropositionFamily {
            members,
            provenance,
        };
        if provenance == Provenance::SpectralFamily
            && fam.max_commutator() > T::tolerance(COMMUTE_TOL)
        {
            return Err(HvError::IncompatibleFamily);
        }
        Ok(fam)
    }

    /// `{f⁻¹(B) : B ∈ sets}`
    pub fn from_observable(f: &HiddenObservable<T>, sets: &[BorelSet<T>]) -> Self {
        PropositionFamily {
            members: sets.iter().map(|b| f.preimage(b)).collect(),
            provenance: Provenance::SpectralFamily,
        }
    }

    pub fn members(&self) -> &[Proposition<T>] {
        &self.members
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn max_commutator(&self) -> T {
        let mut worst = T::zero();
        for (i, a) in self.members.iter().enumerate() {
            for b in &self.members[i + 1..] {
                worst = worst.max(commutator_norm(a.projector().op(), b.projector().op()));
            }
        }
        worst
    }
}

/// A superposition path on which the `L ∩ M` orbit measure is not of the
/// `a·cos²t + b·sin t·cos t + c·sin²t` form.
#[derive(Debug, Clone)]
pub struct IncompatibilityWitness<T: Real> {
    pub phi: StateVector<T>,
    pub psi: StateVector<T>,
    pub residual: T,
    pub commutator: T,
}

#[derive(Debug, Clone)]
pub enum Compatibility<T: Real> {
    /// `L` and `M` are measure-equivalent to `f⁻¹(first)` and `f⁻¹(second)`.
    Compatible {
        observable: HiddenObservable<T>,
        first: BorelSet<T>,
        second: BorelSet<T>,
    },
    Incompatible(IncompatibilityWitness<T>),
}

impl<T: Real> Compatibility<T> {
    pub fn is_compatible(&self) -> bool {
        matches!(self, Compatibility::Compatible { .. })
    }
}

/// Orbit measure of `L ∩ M` at `phi`.
pub fn intersection_measure<T: Real>(
    l: &Proposition<T>,
    m: &Proposition<T>,
    phi: &StateVector<T>,
) -> T {
    l.orbit_arc(phi).intersection(&m.orbit_arc(phi)).measure()
}

/// Joint observable of two commuting projectors: value `2·[E] + [F]` on the
/// atoms `E^a F^b`.
pub fn joint_observable<T: Real>(
    e: &Projector<T>,
    f: &Projector<T>,
    gauge: GaugeSection<T>,
    nu: Context<T>,
) -> Result<(HiddenObservable<T>, BorelSet<T>, BorelSet<T>)> {
    let n = e.dim();
    let (ec, fc) = (e.complement(), f.complement());
    let mut spaces = Vec::new();
    for (a, pa) in [(0.0, &ec), (1.0, e)] {
        for (b, pb) in [(0.0, &fc), (1.0, f)] {
            let prod = HermitianOperator::new(pa.op().matrix() * pb.op().matrix())?;
            let atom = Projector::new(&prod)?;
            if atom.rank() > 0 {
                spaces.push(Eigenspace {
                    value: T::lit(2.0 * a + b),
                    basis: atom.range().clone(),
                });
            }
        }
    }
    let d = SpectralDecomposition::from_eigenspaces(n, spaces, T::lit(0.5));
    let obs = HiddenObservable::from_decomposition(&d, gauge, nu);
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    Ok((
        obs,
        BorelSet::points(&[two, three]),
        BorelSet::points(&[T::one(), three]),
    ))
}

/// Orthogonal partner of `phi` built from `x` (Gram–Schmidt against `φ` and `Jφ`).
pub fn orthogonal_partner<T: Real>(phi: &StateVector<T>, x: &DVector<T>) -> Option<StateVector<T>> {
    let half = T::lit(0.5);
    let jphi = phi.j();
    let a = phi.coords().dot(x) * half;
    let b = jphi.coords().dot(x) * half;
    let v = x - phi.coords() * a - jphi.coords() * b;
    if v.norm() <= T::lit(1e-6) {
        return None;
    }
    StateVector::normalized(v).ok()
}

fn eigvec_states<T: Real>(p: &Projector<T>) -> Vec<StateVector<T>> {
    let mut out = Vec::new();
    for proj in [p.clone(), p.complement()] {
        for col in proj.range().column_iter() {
            if let Ok(s) = StateVector::from_amplitudes(col.as_slice()) {
                out.push(s);
            }
        }
    }
    out
}

/// Decides compatibility of two propositions. Compatible pairs come with a
/// joint observable; incompatible pairs with the superposition path (among
/// eigenvector paths of the projectors and a few seeded random ones) where the
/// intersection measure is furthest from the quadratic form.
pub fn compatible<T: Real>(l: &Proposition<T>, m: &Proposition<T>) -> Result<Compatibility<T>> {
    if l.gauge() != m.gauge() {
        return Err(HvError::GaugeMismatch);
    }
    let (e, f) = (l.projector(), m.projector());
    let comm = commutator_norm(e.op(), f.op());
    if comm <= T::tolerance(COMMUTE_TOL) {
        let (observable, first, second) = joint_observable(e, f, l.gauge(), l.context().clone())?;
        return Ok(Compatibility::Compatible {
            observable,
            first,
            second,
        });
    }
    let n = e.dim();
    let mut paths: Vec<(StateVector<T>, StateVector<T>)> = Vec::new();
    let ve = eigvec_states(e);
    let vf = eigvec_states(f);
    for phi in &ve {
        for other in ve.iter().chain(&vf) {
            if let Some(psi) = orthogonal_partner(phi, other.coords()) {
                paths.push((phi.clone(), psi));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x0b5e);
    for _ in 0..WITNESS_RANDOM_PATHS {
        let phi: StateVector<T> = random_state(n, &mut rng);
        let x: StateVector<T> = random_state(n, &mut rng);
        if let Some(psi) = orthogonal_partner(&phi, x.coords()) {
            paths.push((phi, psi));
        }
    }
    let mut best: Option<IncompatibilityWitness<T>> = None;
    for (phi, psi) in paths {
        let fit = form_fit(
            &phi,
            &psi,
            |s, _| intersection_measure(l, m, s),
            FORM_FIT_SAMPLES,
        )?;
        if best.as_ref().is_none_or(|b| fit.residual > b.residual) {
            best = Some(IncompatibilityWitness {
                phi,
                psi,
                residual: fit.residual,
                commutator: comm,
            });
        }
        if fit.residual > T::lit(FORM_FIT_FAIL) * T::lit(10.0) {
            break;
        }
    }
    Ok(Compatibility::Incompatible(
        best.expect("at least one path"),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BooleanReport<T> {
    pub pairs: usize,
    pub states: usize,
    /// `|μ(L∩M) − <ε(L)ε(M)>|`
    pub intersection_error: T,
    /// `|μ(𝕊∖L) − <I − ε(L)>|`
    pub complement_error: T,
    /// `|μ(L∪M) − <ε(L) + ε(M) − ε(L)ε(M)>|`
    pub union_error: T,
    /// `|μ(M∖L) − <ε(M) − ε(L)>|` over nested pairs
    pub difference_error: T,
    /// `|μ(⋃L_n) − Σ<ε(L_n)>|` over a maximal disjoint subfamily
    pub additivity_error: T,
    pub pass: bool,
}

/// Checks that `ε` acts as a boolean algebra morphism on a spectral family, at
/// `states` seeded random hidden states.
pub fn boolean_morphism_check<T: Real>(
    family: &PropositionFamily<T>,
    states: usize,
    seed: u64,
) -> Result<BooleanReport<T>> {
    if family.provenance() != Provenance::SpectralFamily {
        return Err(HvError::IncompatibleFamily);
    }
    let tol = T::tolerance(COMMUTE_TOL);
    if family.max_commutator() > tol {
        return Err(HvError::IncompatibleFamily);
    }
    let members = family.members();
    let Some(first) = members.first() else {
        return Ok(BooleanReport {
            pairs: 0,
            states: 0,
            intersection_error: T::zero(),
            complement_error: T::zero(),
            union_error: T::zero(),
            difference_error: T::zero(),
            additivity_error: T::zero(),
            pass: true,
        });
    };
    let n = first.projector().dim();
    let ops: Vec<&HermitianOperator<T>> = members.iter().map(|m| m.projector().op()).collect();
    let products: Vec<Vec<HermitianOperator<T>>> = ops
        .iter()
        .map(|a| {
            ops.iter()
                .map(|b| {
                    HermitianOperator::new(a.matrix() * b.matrix()).expect("commuting product")
                })
                .collect()
        })
        .collect();
    let zero_tol = T::lit(1e-9);
    // greedy maximal pairwise-disjoint subfamily (ε(L)ε(M) = 0)
    let mut disjoint: Vec<usize> = Vec::new();
    for i in 0..members.len() {
        let z = HermitianOperator::zero(n);
        if disjoint
            .iter()
            .all(|&j| products[i][j].max_distance(&z) <= zero_tol)
        {
            disjoint.push(i);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = BooleanReport {
        pairs: members.len() * (members.len().saturating_sub(1)) / 2,
        states,
        intersection_error: T::zero(),
        complement_error: T::zero(),
        union_error: T::zero(),
        difference_error: T::zero(),
        additivity_error: T::zero(),
        pass: false,
    };
    for _ in 0..states {
        let phi: StateVector<T> = random_state(n, &mut rng);
        let arcs: Vec<ArcSet<T>> = members.iter().map(|m| m.orbit_arc(&phi)).collect();
        let w: Vec<T> = ops
            .iter()
            .map(|a| a.expect_unchecked(phi.coords()))
            .collect();
        for i in 0..members.len() {
            let c = arcs[i].complement().measure();
            report.complement_error = report.complement_error.max((c - (T::one() - w[i])).abs());
            for j in i + 1..members.len() {
                let both = products[i][j].expect_unchecked(phi.coords());
                let inter = arcs[i].intersection(&arcs[j]).measure();
                report.intersection_error = report.intersection_error.max((inter - both).abs());
                let uni = arcs[i].union(&arcs[j]).measure();
                report.union_error = report.union_error.max((uni - (w[i] + w[j] - both)).abs());
            }
            for j in 0..members.len() {
                // ε(L_i) ≤ ε(L_j)
                if i != j && products[i][j].max_distance(ops[i]) <= zero_tol {
                    let diff = arcs[j].difference(&arcs[i]).measure();
                    report.difference_error =
                        report.difference_error.max((diff - (w[j] - w[i])).abs());
                }
            }
        }
        let mut union = ArcSet::empty();
        let mut total = T::zero();
        for &i in &disjoint {
            union = union.union(&arcs[i]);
            total += w[i];
        }
        report.additivity_error = report.additivity_error.max((union.measure() - total).abs());
    }
    let mt = T::tolerance(MEASURE_TOL);
    report.pass = report.intersection_error <= mt
        && report.complement_error <= mt
        && report.union_error <= mt
        && report.difference_error <= mt
        && report.additivity_error <= mt;
    Ok(report)
}

#[derive(Debug, Clone)]
pub enum IndependenceVerdict<T: Real> {
    /// One projector is `0` or `I`; `g` satisfies `<G> = <E><F>`.
    Banal { g: HermitianOperator<T> },
    /// The best Hermitian fit misses `<E><F>` by `residual` at `witness`.
    NoG {
        residual: T,
        witness: StateVector<T>,
        samples: usize,
    },
    /// A fit was found for a non-banal pair (never expected).
    Fitted {
        g: HermitianOperator<T>,
        residual: T,
    },
}

impl<T: Real> IndependenceVerdict<T> {
    pub fn is_banal(&self) -> bool {
        matches!(self, IndependenceVerdict::Banal { .. })
    }

    pub fn is_no_g(&self) -> bool {
        matches!(self, IndependenceVerdict::NoG { .. })
    }
}

fn trivial_value<T: Real>(p: &HermitianOperator<T>) -> Option<T> {
    let n = p.dim();
    let tol = T::tolerance(BANAL_TOL);
    if p.max_distance(&HermitianOperator::zero(n)) <= tol {
        Some(T::zero())
    } else if p.max_distance(&HermitianOperator::identity(n)) <= tol {
        Some(T::one())
    } else {
        None
    }
}

/// Row of the linear map `G ↦ <G>_φ` in the `n²` real coordinates of a
/// Hermitian matrix: diagonal, then `Re G_kl`, `Im G_kl` for `k < l`.
fn quadratic_row<T: Real>(psi: &DVector<C<T>>) -> Vec<T> {
    let n = psi.len();
    let mut row = Vec::with_capacity(n * n);
    for k in 0..n {
        row.push(psi[k].norm_sqr());
    }
    let two = T::lit(2.0);
    for k in 0..n {
        for l in k + 1..n {
            let z = psi[k].conj() * psi[l];
            row.push(two * z.re);
            row.push(-two * z.im);
        }
    }
    row
}

fn hermitian_from_params<T: Real>(n: usize, p: &DVector<T>) -> HermitianOperator<T> {
    let mut m = DMatrix::from_element(n, n, C::new(T::zero(), T::zero()));
    for k in 0..n {
        m[(k, k)] = C::new(p[k], T::zero());
    }
    let mut idx = n;
    for k in 0..n {
        for l in k + 1..n {
            let z = C::new(p[idx], p[idx + 1]);
            m[(k, l)] = z;
            m[(l, k)] = z.conj();
            idx += 2;
        }
    }
    HermitianOperator::new(m).expect("built Hermitian")
}

/// Is there a Hermitian `G` with `<G>_φ = <E>_φ<F>_φ` for all `φ`? Only for
/// banal pairs; otherwise a least-squares fit over at least `n²` seeded states
/// exhibits the misfit.
pub fn independence_scan<T: Real>(
    e: &HermitianOperator<T>,
    f: &HermitianOperator<T>,
    trials: usize,
    seed: u64,
) -> Result<IndependenceVerdict<T>> {
    let n = e.dim();
    if f.dim() != n {
        return Err(HvError::DimensionMismatch {
            expected: n,
            got: f.dim(),
        });
    }
    if let Some(v) = trivial_value(f) {
        return Ok(IndependenceVerdict::Banal { g: e.scale(v) });
    }
    if let Some(v) = trivial_value(e) {
        return Ok(IndependenceVerdict::Banal { g: f.scale(v) });
    }
    let samples = trials.max(4 * n * n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states: Vec<StateVector<T>> = (0..samples).map(|_| random_state(n, &mut rng)).collect();
    let rows: Vec<Vec<T>> = states
        .iter()
        .map(|s| quadratic_row(&s.unit_amplitudes()))
        .collect();
    let design = DMatrix::from_fn(samples, n * n, |i, j| rows[i][j]);
    let target = DVector::from_iterator(
        samples,
        states
            .iter()
            .map(|s| e.expect_unchecked(s.coords()) * f.expect_unchecked(s.coords())),
    );
    let params = design
        .clone()
        .svd(true, true)
        .solve(&target, T::lit(1e-12))
        .map_err(|_| HvError::EigSolverFailure)?;
    let resid = &design * &params - &target;
    let (imax, residual) = resid
        .iter()
        .enumerate()
        .fold((0, T::zero()), |acc, (i, r)| {
            if r.abs() > acc.1 {
                (i, r.abs())
            } else {
                acc
            }
        });
    if residual > T::tolerance(NO_G_THRESHOLD) {
        Ok(IndependenceVerdict::NoG {
            residual,
            witness: states[imax].clone(),
            samples,
        })
    } else {
        Ok(IndependenceVerdict::Fitted {
            g: hermitian_from_params(n, &params),
            residual,
        })
    }
}

/// A hidden state where the same projector has different truth values under
/// two contexts.
#[derive(Debug, Clone)]
pub struct ContextualityWitness<T: Real> {
    pub phi: StateVector<T>,
    pub first: bool,
    pub second: bool,
    pub sample: usize,
}

/// Phases tried per ray in [`contextuality_witness`].
const WITNESS_PHASES: usize = 32;

/// Searches `budget` hidden states (seeded rays with `0 < <E> < 1`, phases on a
/// grid) for a truth-value disagreement. The lowest sample index wins.
pub fn contextuality_witness<T: Real>(
    e: &HermitianOperator<T>,
    gauge: GaugeSection<T>,
    nu1: &Context<T>,
    nu2: &Context<T>,
    budget: usize,
    seed: u64,
) -> Result<Option<ContextualityWitness<T>>> {
    let p = Projector::new(e)?;
    if p.is_trivial(T::tolerance(BANAL_TOL)) || nu1 == nu2 {
        return Ok(None);
    }
    let l1 = proposition_of_projector(&p, gauge, nu1.clone());
    let l2 = proposition_of_projector(&p, gauge, nu2.clone());
    let n = p.dim();
    let rays = budget.div_ceil(WITNESS_PHASES);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eps = T::lit(1e-6);
    let mut reps = Vec::with_capacity(rays);
    while reps.len() < rays {
        let phi: StateVector<T> = random_state(n, &mut rng);
        let w = p.expect(&phi);
        if w > eps && w < T::one() - eps {
            reps.push(gauge.apply(&phi));
        }
    }
    let hit = (0..budget).into_par_iter().find_map_first(|i| {
        let rep = &reps[i / WITNESS_PHASES];
        let k = i % WITNESS_PHASES;
        let th = -T::pi()
            + T::two_pi() * (T::lit(k as f64) + T::lit(0.5)) / T::lit(WITNESS_PHASES as f64);
        let phi = rep.rotate(th);
        let (a, b) = (l1.member(&phi), l2.member(&phi));
        (a != b).then_some(ContextualityWitness {
            phi,
            first: a,
            second: b,
            sample: i,
        })
    });
    Ok(hit)
}

/// Which basis vector's cell holds the hidden state, per basis, and a shared
/// vector whose value differs between two bases.
#[derive(Debug, Clone)]
pub struct FrameReport<T: Real> {
    /// `Σ_u G(u)` per basis; exactly 1 when the cells partition the orbit.
    pub weights: Vec<usize>,
    /// Position of the cell containing `φ₀` in each basis.
    pub selected: Vec<usize>,
    /// `(basis a, position in a, basis b, position in b)` of the shared vector.
    pub shared: (usize, usize, usize, usize),
    /// `G(u)` in the two bases at `φ₀` itself.
    pub values_at_phi0: (bool, bool),
    /// A phase `θ` on the orbit of `φ₀` where the two bases disagree on `G(u)`.
    pub disagreement: Option<(T, bool, bool)>,
}

fn check_basis<T: Real>(index: usize, basis: &[DVector<C<T>>], n: usize) -> Result<()> {
    if basis.len() != n {
        return Err(HvError::NotOrthonormal {
            index,
            defect: f64::INFINITY,
        });
    }
    let mut defect = T::zero();
    for (a, u) in basis.iter().enumerate() {
        if u.len() != n {
            return Err(HvError::DimensionMismatch {
                expected: n,
                got: u.len(),
            });
        }
        for (b, v) in basis.iter().enumerate() {
            let want = if a == b { T::one() } else { T::zero() };
            defect = defect.max((u.dotc(v) - C::new(want, T::zero())).modulus());
        }
    }
    if defect > T::tolerance(ORTHONORMAL_TOL) {
        return Err(HvError::NotOrthonormal {
            index,
            defect: defect.as_f64(),
        });
    }
    Ok(())
}

fn find_shared<T: Real>(bases: &[Vec<DVector<C<T>>>]) -> Option<(usize, usize, usize, usize)> {
    let tol = T::tolerance(ORTHONORMAL_TOL);
    let mut fallback = None;
    for a in 0..bases.len() {
        for b in a + 1..bases.len() {
            for (i, u) in bases[a].iter().enumerate() {
                for (j, v) in bases[b].iter().enumerate() {
                    if (u.dotc(v).modulus() - T::one()).abs() <= tol {
                        // a vector at different positions can take different values
                        if i != j {
                            return Some((a, i, b, j));
                        }
                        fallback.get_or_insert((a, i, b, j));
                    }
                }
            }
        }
    }
    fallback
}

/// Truth values of the rank-one propositions of each basis at the hidden
/// state `φ₀`, and a value disagreement for a vector shared by two bases,
/// searched over `phases` grid points of the orbit.
pub fn frame_function_demo<T: Real>(
    phi0: &StateVector<T>,
    bases: &[Vec<DVector<C<T>>>],
    gauge: GaugeSection<T>,
    nu: Context<T>,
    phases: usize,
) -> Result<FrameReport<T>> {
    let n = phi0.dim();
    if n < 3 {
        return Err(HvError::NeedsDimensionThree(n));
    }
    for (i, b) in bases.iter().enumerate() {
        check_basis(i, b, n)?;
    }
    let shared = find_shared(bases).ok_or(HvError::NoSharedVector)?;
    let partitions: Vec<Vec<Proposition<T>>> = bases
        .iter()
        .map(|b| {
            let ps: Vec<Projector<T>> = b
                .iter()
                .map(|u| Projector::from_range(DMatrix::from_columns(std::slice::from_ref(u))))
                .collect();
            partition_of_projectors(&ps, gauge, nu.clone())
        })
        .collect();
    let mut weights = Vec::with_capacity(bases.len());
    let mut selected = Vec::with_capacity(bases.len());
    for cells in &partitions {
        let hits: Vec<usize> = cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.member(phi0))
            .map(|(i, _)| i)
            .collect();
        weights.push(hits.len());
        selected.push(hits.first().copied().unwrap_or(usize::MAX));
    }
    let (a, i, b, j) = shared;
    let (la, lb) = (&partitions[a][i], &partitions[b][j]);
    let values_at_phi0 = (la.member(phi0), lb.member(phi0));
    let rep = gauge.apply(phi0);
    let disagreement = (0..phases).find_map(|k| {
        let th = -T::pi() + T::two_pi() * (T::lit(k as f64) + T::lit(0.5)) / T::lit(phases as f64);
        let s = rep.rotate(th);
        let (x, y) = (la.member(&s), lb.member(&s));
        (x != y).then_some((th, x, y))
    });
    Ok(FrameReport {
        weights,
        selected,
        shared,
        values_at_phi0,
        disagreement,
    })
}

/// Random orthonormal bases of `C^n` for frame-function experiments.
pub fn random_bases<T: Real, R: Rng + ?Sized>(
    n: usize,
    count: usize,
    rng: &mut R,
) -> Vec<Vec<DVector<C<T>>>> {
    (0..count).map(|_| random_basis(n, rng)).collect()
}

#[derive(Debug, Clone)]
pub enum Factorization<T: Real> {
    /// `τ(g) = b(τ(f))` with `b` given on `spec(τ(f))`. When `pointwise` holds,
    /// the cells of `g` are runs of consecutive cells of `f`, so
    /// `g(φ) = b(f(φ))` at every hidden state.
    Nested { map: Vec<(T, T)>, pointwise: bool },
    /// A spectral projector of `g` that is not a sum of those of `f`.
    NotNested { separating: HermitianOperator<T> },
}

impl<T: Real> Factorization<T> {
    /// Evaluates `b` at an eigenvalue of `f`.
    pub fn apply(&self, x: T) -> Option<T> {
        match self {
            Factorization::Nested { map, .. } => map
                .iter()
                .min_by(|a, b| (a.0 - x).abs().partial_cmp(&(b.0 - x).abs()).unwrap())
                .map(|p| p.1),
            Factorization::NotNested { .. } => None,
        }
    }
}

/// Consecutive cells carrying the same value, merged.
fn merge_runs<'a, T: Real>(
    cells: impl Iterator<Item = (T, &'a Projector<T>)>,
) -> Vec<(T, HermitianOperator<T>)> {
    cells.fold(
        Vec::new(),
        |mut acc: Vec<(T, HermitianOperator<T>)>, (v, p)| {
            match acc.last_mut() {
                Some((last, op)) if (*last - v).abs() <= T::tolerance(DEFAULT_MERGE_TOL) => {
                    *op = op.add(p.op())
                }
                _ => acc.push((v, p.op().clone())),
            }
            acc
        },
    )
}

/// Finds `b` with `g = b∘f` at the level of spectral families.
pub fn factorize<T: Real>(
    g: &HiddenObservable<T>,
    f: &HiddenObservable<T>,
) -> Result<Factorization<T>> {
    if g.gauge() != f.gauge() || g.context() != f.context() {
        return Err(HvError::GaugeMismatch);
    }
    let tol = T::tolerance(1e-9);
    let fs = f.spectral();
    let gs = g.spectral();
    let f_proj: Vec<HermitianOperator<T>> = fs.projectors();
    let mut partial: Vec<(T, Option<T>)> =
        fs.eigenvalues().into_iter().map(|v| (v, None)).collect();
    for (q, mu) in gs.projectors().iter().zip(gs.eigenvalues()) {
        let mut covered = HermitianOperator::zero(q.dim());
        for (i, p) in f_proj.iter().enumerate() {
            let qp = HermitianOperator::new(q.matrix() * p.matrix());
            let inside = qp
                .as_ref()
                .map(|x| x.max_distance(p) <= tol)
                .unwrap_or(false);
            let outside = max_abs(&(q.matrix() * p.matrix())) <= tol;
            if inside {
                partial[i].1 = Some(mu);
                covered = covered.add(p);
            } else if !outside {
                return Ok(Factorization::NotNested {
                    separating: q.clone(),
                });
            }
        }
        if covered.max_distance(q) > tol {
            return Ok(Factorization::NotNested {
                separating: q.clone(),
            });
        }
    }
    if partial.iter().any(|(_, v)| v.is_none()) {
        return Ok(Factorization::NotNested {
            separating: HermitianOperator::identity(f.dim()),
        });
    }
    let map: Vec<(T, T)> = partial.into_iter().map(|(x, y)| (x, y.unwrap())).collect();
    // pointwise: g's cells, bottom up, are runs of f's cells mapped through b
    let lookup = |x: T| {
        map.iter()
            .min_by(|a, b| (a.0 - x).abs().partial_cmp(&(b.0 - x).abs()).unwrap())
            .map(|p| p.1)
            .unwrap()
    };
    let f_run = merge_runs(f.layout().iter().map(|(v, p)| (lookup(*v), p)));
    let g_run = merge_runs(g.layout().iter().map(|(v, p)| (*v, p)));
    let pointwise = f_run.len() == g_run.len()
        && f_run.iter().zip(&g_run).all(|((v, op), (w, q))| {
            (*v - *w).abs() <= T::tolerance(DEFAULT_MERGE_TOL) && op.max_distance(q) <= tol
        });
    Ok(Factorization::Nested { map, pointwise })
}
