//! Propositions and hidden observables.
//!
//! On every orbit the phase coordinate `u ∈ (-π, π]` (relative to the gauge
//! representative) is cut into stacked cells: a list of orthogonal projectors
//! `P_1, …, P_k` summing to the identity gives edges `-π + 2π·C_i`, with `C_i` the
//! cumulative weight `Σ_{j≤i} <P_j>_φ`. A proposition selects some cells; a hidden
//! observable assigns a value to each cell. A context then rearranges the
//! coordinate before the lookup.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::arcs::ArcSet;
use crate::borel::BorelSet;
use crate::context::Context;
use crate::error::{HvError, Result};
use crate::operators::{HermitianOperator, Projector, SpectralDecomposition, DEFAULT_MERGE_TOL};
use crate::realspace::{herm_inner, GaugeSection, StateVector};
use crate::scalar::{wrap_angle, Real, C};

/// Tolerance for pairwise orthogonality and completeness of a resolution.
pub const RESOLUTION_TOL: f64 = 1e-9;
/// A coordinate this close above a cell edge still counts as on the edge, so
/// rounding in the cumulative weights cannot move boundary points across cells.
pub const EDGE_TOL: f64 = 1e-12;

/// Cell edges `e_0 = -π < … ≤ e_k = π` for the given blocks at `psi`.
fn cell_edges<T: Real>(blocks: &[Projector<T>], psi: &DVector<C<T>>) -> Vec<T> {
    let pi = T::pi();
    let weights: Vec<T> = blocks.iter().map(|b| b.weight_of(psi)).collect();
    let total = weights.iter().fold(T::zero(), |a, &w| a + w);
    let mut edges = Vec::with_capacity(blocks.len() + 1);
    edges.push(-pi);
    let mut acc = T::zero();
    for w in weights {
        acc += w;
        let c = acc / total;
        let e = if c >= T::one() {
            pi
        } else {
            -pi + T::two_pi() * c
        };
        edges.push(e);
    }
    if let Some(last) = edges.last_mut() {
        *last = pi;
    }
    edges
}

fn cell_of<T: Real>(edges: &[T], u: T) -> usize {
    let k = edges.len() - 1;
    let tol = T::tolerance(EDGE_TOL);
    (0..k).find(|&i| u <= edges[i + 1] + tol).unwrap_or(k - 1)
}

/// Angular coordinate of `phi` relative to `rep` (same ray by construction).
fn coordinate<T: Real>(rep: &StateVector<T>, phi: &StateVector<T>) -> T {
    let z = herm_inner(rep.coords(), phi.coords()).expect("same dimension");
    wrap_angle(z.im.atan2(z.re))
}

fn concat_ranges<T: Real>(dim: usize, blocks: &[&Projector<T>]) -> Projector<T> {
    let cols: Vec<_> = blocks
        .iter()
        .flat_map(|b| b.range().column_iter().map(|c| c.into_owned()))
        .collect();
    if cols.is_empty() {
        Projector::zero(dim)
    } else {
        Projector::from_range(DMatrix::from_columns(&cols))
    }
}

/// How a proposition's arc is laid out on an orbit, before the context acts.
#[derive(Debug, Clone, PartialEq)]
pub enum ArcRule<T: Real> {
    /// Union of the selected stacked cells.
    Cells {
        blocks: Arc<[Projector<T>]>,
        selected: Vec<bool>,
    },
    /// The second member of a product pair:
    /// `(π(1 - 2e - 2f + 2ef), π(1 - 2e + 2ef)]` with `e = <E>`, `f = <F>`.
    ProductSecond {
        e: Projector<T>,
        f: Projector<T>,
    },
    Complement(Box<ArcRule<T>>),
}

impl<T: Real> ArcRule<T> {
    fn arc(&self, psi: &DVector<C<T>>) -> ArcSet<T> {
        match self {
            ArcRule::Cells { blocks, selected } => {
                let edges = cell_edges(blocks, psi);
                let pieces = selected
                    .iter()
                    .enumerate()
                    .filter(|(_, &s)| s)
                    .map(|(i, _)| (edges[i], edges[i + 1]))
                    .collect();
                ArcSet::from_pieces(pieces)
            }
            ArcRule::ProductSecond { e, f } => {
                let (e, f) = (e.weight_of(psi), f.weight_of(psi));
                let one = T::one();
                let two = T::lit(2.0);
                let pi = T::pi();
                let lo = pi * (one - two * e - two * f + two * e * f);
                let hi = pi * (one - two * e + two * e * f);
                ArcSet::interval(lo, hi)
            }
            ArcRule::Complement(inner) => inner.arc(psi).complement(),
        }
    }

    fn complement(&self) -> Self {
        match self {
            ArcRule::Cells { blocks, selected } => ArcRule::Cells {
                blocks: blocks.clone(),
                selected: selected.iter().map(|s| !s).collect(),
            },
            ArcRule::Complement(inner) => (**inner).clone(),
            other => ArcRule::Complement(Box::new(other.clone())),
        }
    }
}

/// A hidden yes/no property: its projector, gauge, context and arc layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Proposition<T: Real> {
    projector: Projector<T>,
    gauge: GaugeSection<T>,
    context: Context<T>,
    rule: ArcRule<T>,
}

impl<T: Real> Proposition<T> {
    /// The projector `ε(L)` this proposition realizes.
    pub fn projector(&self) -> &Projector<T> {
        &self.projector
    }

    pub fn gauge(&self) -> GaugeSection<T> {
        self.gauge
    }

    pub fn context(&self) -> &Context<T> {
        &self.context
    }

    pub fn rule(&self) -> &ArcRule<T> {
        &self.rule
    }

    /// The arc before the context acts, in the gauge coordinate.
    pub fn canonical_arc(&self, phi: &StateVector<T>) -> ArcSet<T> {
        self.rule.arc(&phi.unit_amplitudes())
    }

    /// The membership arc on the orbit of `phi`, in the gauge coordinate.
    pub fn orbit_arc(&self, phi: &StateVector<T>) -> ArcSet<T> {
        let rep = self.gauge.apply(phi);
        self.context.image(&self.canonical_arc(phi), &rep)
    }

    /// Normalized length of the membership arc on `[φ]`.
    pub fn orbit_measure(&self, phi: &StateVector<T>) -> T {
        self.orbit_arc(phi).measure()
    }

    /// Truth value of the proposition at the hidden state `phi`.
    pub fn member(&self, phi: &StateVector<T>) -> bool {
        let rep = self.gauge.apply(phi);
        let u = coordinate(&rep, phi);
        let pulled = self.context.inverse(u, &rep);
        match &self.rule {
            ArcRule::Cells { blocks, selected } => {
                let edges = cell_edges(blocks, &rep.unit_amplitudes());
                selected[cell_of(&edges, pulled)]
            }
            rule => rule.arc(&phi.unit_amplitudes()).contains(pulled),
        }
    }

    pub fn complement(&self) -> Self {
        Proposition {
            projector: self.projector.complement(),
            gauge: self.gauge,
            context: self.context.clone(),
            rule: self.rule.complement(),
        }
    }

    /// The image `ν(L)`: arcs move, the projector stays.
    pub fn apply_context(&self, nu: &Context<T>) -> Self {
        Proposition {
            context: self.context.then(nu),
            ..self.clone()
        }
    }

    pub fn with_gauge(&self, gauge: GaugeSection<T>) -> Self {
        Proposition {
            gauge,
            ..self.clone()
        }
    }
}

/// The canonical proposition of a projector: arc `(π - 2π<E>_φ, π]`, moved by `ν`.
pub fn proposition_of<T: Real>(
    e: &HermitianOperator<T>,
    gauge: GaugeSection<T>,
    nu: Context<T>,
) -> Result<Proposition<T>> {
    let p = Projector::new(e)?;
    Ok(proposition_of_projector(&p, gauge, nu))
}

pub fn proposition_of_projector<T: Real>(
    p: &Projector<T>,
    gauge: GaugeSection<T>,
    nu: Context<T>,
) -> Proposition<T> {
    let blocks: Arc<[Projector<T>]> = vec![p.complement(), p.clone()].into();
    Proposition {
        projector: p.clone(),
        gauge,
        context: nu,
        rule: ArcRule::Cells {
            blocks,
            selected: vec![false, true],
        },
    }
}

/// Stacked partition of every orbit by a resolution of the identity.
///
/// The first projector takes the top cell `(π - 2π<E_1>, π]`, the next one the
/// cell below it, and so on.
pub fn partition_of<T: Real>(
    projectors: &[HermitianOperator<T>],
    gauge: GaugeSection<T>,
    nu: Context<T>,
) -> Result<Vec<Proposition<T>>> {
    let ps = validate_resolution(projectors)?;
    Ok(partition_of_projectors(&ps, gauge, nu))
}

pub(crate) fn partition_of_projectors<T: Real>(
    ps: &[Projector<T>],
    gauge: GaugeSection<T>,
    nu: Context<T>,
) -> Vec<Proposition<T>> {
    let k = ps.len();
    let blocks: Arc<[Projector<T>]> = ps.iter().rev().cloned().collect::<Vec<_>>().into();
    (0..k)
        .map(|n| Proposition {
            projector: ps[n].clone(),
            gauge,
            context: nu.clone(),
            rule: ArcRule::Cells {
                blocks: blocks.clone(),
                selected: (0..k).map(|i| i == k - 1 - n).collect(),
            },
        })
        .collect()
}

/// Checks idempotence, pairwise orthogonality and completeness.
pub fn validate_resolution<T: Real>(
    projectors: &[HermitianOperator<T>],
) -> Result<Vec<Projector<T>>> {
    let first = projectors.first().ok_or_else(|| HvError::NotAResolution {
        reason: "empty list".into(),
    })?;
    let n = first.dim();
    let tol = T::tolerance(RESOLUTION_TOL);
    let mut sum = HermitianOperator::zero(n);
    for (i, p) in projectors.iter().enumerate() {
        if p.dim() != n {
            return Err(HvError::DimensionMismatch {
                expected: n,
                got: p.dim(),
            });
        }
        for (j, q) in projectors.iter().enumerate().skip(i + 1) {
            let prod = p.matrix() * q.matrix();
            let defect = prod
                .iter()
                .fold(T::zero(), |a, z| a.max(nalgebra::ComplexField::modulus(*z)));
            if defect > tol {
                return Err(HvError::NotAResolution {
                    reason: format!(
                        "projectors {i} and {j} are not orthogonal ({:e})",
                        defect.as_f64()
                    ),
                });
            }
        }
        sum = sum.add(p);
    }
    let gap = sum.max_distance(&HermitianOperator::identity(n));
    if gap > tol {
        return Err(HvError::NotAResolution {
            reason: format!("sum differs from identity by {:e}", gap.as_f64()),
        });
    }
    projectors
        .iter()
        .map(|p| {
            Projector::new(p).map_err(|e| HvError::NotAResolution {
                reason: e.to_string(),
            })
        })
        .collect()
}

/// The product pair `(L, M)` with `ε(L) = E`, `ε(M) = F` whose orbit
/// intersection has measure `<E>·<F>`.
pub fn product_pair<T: Real>(
    e: &HermitianOperator<T>,
    f: &HermitianOperator<T>,
    gauge: GaugeSection<T>,
) -> Result<(Proposition<T>, Proposition<T>)> {
    let pe = Projector::new(e)?;
    let pf = Projector::new(f)?;
    let l = proposition_of_projector(&pe, gauge, Context::Identity);
    let m = Proposition {
        projector: pf.clone(),
        gauge,
        context: Context::Identity,
        rule: ArcRule::ProductSecond { e: pe, f: pf },
    };
    Ok((l, m))
}

/// One orbit's lookup table for a hidden observable.
#[derive(Debug, Clone)]
pub struct OrbitChart<T: Real> {
    rep: StateVector<T>,
    edges: Vec<T>,
    values: Vec<T>,
    context: Context<T>,
}

impl<T: Real> OrbitChart<T> {
    /// Value at gauge coordinate `u`.
    pub fn value_at(&self, u: T) -> T {
        let pulled = self.context.inverse(u, &self.rep);
        self.values[cell_of(&self.edges, pulled)]
    }

    pub fn representative(&self) -> &StateVector<T> {
        &self.rep
    }

    /// Cells as `(value, arc before context)`.
    pub fn cells(&self) -> impl Iterator<Item = (T, ArcSet<T>)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, ArcSet::interval(self.edges[i], self.edges[i + 1])))
    }
}

/// A deterministic observable on hidden states.
///
/// `layout` lists `(value, block)` from the bottom cell up; for the canonical
/// quantile observable of `T` these are the eigenvalues in ascending order.
#[derive(Debug, Clone)]
pub struct HiddenObservable<T: Real> {
    layout: Vec<(T, Projector<T>)>,
    blocks: Arc<[Projector<T>]>,
    spectral: Arc<SpectralDecomposition<T>>,
    gauge: GaugeSection<T>,
    context: Context<T>,
}

impl<T: Real> HiddenObservable<T> {
    /// The quantile observable `f(φ) = min{ s : F_φ(s) ≥ (π + u)/2π }`.
    pub fn from_decomposition(
        d: &SpectralDecomposition<T>,
        gauge: GaugeSection<T>,
        nu: Context<T>,
    ) -> Self {
        let layout: Vec<(T, Projector<T>)> = d
            .spaces()
            .iter()
            .map(|s| (s.value, Projector::from_range(s.basis.clone())))
            .collect();
        let blocks: Arc<[Projector<T>]> = layout
            .iter()
            .map(|(_, p)| p.clone())
            .collect::<Vec<_>>()
            .into();
        HiddenObservable {
            layout,
            blocks,
            spectral: Arc::new(d.clone()),
            gauge,
            context: nu,
        }
    }

    pub fn from_operator(
        a: &HermitianOperator<T>,
        gauge: GaugeSection<T>,
        nu: Context<T>,
    ) -> Result<Self> {
        Ok(Self::from_decomposition(&*a.spectral()?, gauge, nu))
    }

    /// `b∘f`: same cells, values relabelled by `b`.
    pub fn compose<F: Fn(T) -> T>(&self, b: F) -> Self {
        HiddenObservable {
            layout: self
                .layout
                .iter()
                .map(|(v, p)| (b(*v), p.clone()))
                .collect(),
            blocks: self.blocks.clone(),
            spectral: Arc::new(
                self.spectral
                    .borel_transform(&b, T::tolerance(DEFAULT_MERGE_TOL)),
            ),
            gauge: self.gauge,
            context: self.context.clone(),
        }
    }

    pub fn with_context(&self, nu: Context<T>) -> Self {
        HiddenObservable {
            context: nu,
            ..self.clone()
        }
    }

    /// `f∘ν⁻¹`-style rearrangement: the context applied after the current one.
    pub fn apply_context(&self, nu: &Context<T>) -> Self {
        self.with_context(self.context.then(nu))
    }

    pub fn with_gauge(&self, gauge: GaugeSection<T>) -> Self {
        HiddenObservable {
            gauge,
            ..self.clone()
        }
    }

    pub fn gauge(&self) -> GaugeSection<T> {
        self.gauge
    }

    pub fn context(&self) -> &Context<T> {
        &self.context
    }

    /// `τ(f)` as a spectral decomposition.
    pub fn spectral(&self) -> &SpectralDecomposition<T> {
        &self.spectral
    }

    pub fn layout(&self) -> &[(T, Projector<T>)] {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.spectral.dim()
    }

    pub fn chart(&self, phi: &StateVector<T>) -> OrbitChart<T> {
        let rep = self.gauge.apply(phi);
        let edges = cell_edges(&self.blocks, &rep.unit_amplitudes());
        OrbitChart {
            rep,
            edges,
            values: self.layout.iter().map(|(v, _)| *v).collect(),
            context: self.context.clone(),
        }
    }

    /// The value of the observable at the hidden state `phi`.
    pub fn value(&self, phi: &StateVector<T>) -> T {
        let chart = self.chart(phi);
        let u = coordinate(chart.representative(), phi);
        chart.value_at(u)
    }

    /// `spec(τ(f))`
    pub fn essential_image(&self) -> Vec<T> {
        self.spectral.eigenvalues()
    }

    /// `f⁻¹(B)` as a proposition with projector `E_B`.
    pub fn preimage(&self, set: &BorelSet<T>) -> Proposition<T> {
        let selected: Vec<bool> = self.layout.iter().map(|(v, _)| set.contains(*v)).collect();
        let chosen: Vec<&Projector<T>> = self
            .layout
            .iter()
            .zip(&selected)
            .filter(|(_, &s)| s)
            .map(|((_, p), _)| p)
            .collect();
        Proposition {
            projector: concat_ranges(self.dim(), &chosen),
            gauge: self.gauge,
            context: self.context.clone(),
            rule: ArcRule::Cells {
                blocks: self.blocks.clone(),
                selected,
            },
        }
    }
}

pub fn hidden_value<T: Real>(f: &HiddenObservable<T>, phi: &StateVector<T>) -> T {
    f.value(phi)
}

pub fn essential_image<T: Real>(f: &HiddenObservable<T>) -> Vec<T> {
    f.essential_image()
}

pub fn preimage_proposition<T: Real>(f: &HiddenObservable<T>, set: &BorelSet<T>) -> Proposition<T> {
    f.preimage(set)
}

pub fn member<T: Real>(l: &Proposition<T>, phi: &StateVector<T>) -> bool {
    l.member(phi)
}

pub fn apply_context<T: Real>(l: &Proposition<T>, nu: &Context<T>) -> Proposition<T> {
    l.apply_context(nu)
}
