//! Contexts: measure-preserving rearrangements of the phase on each orbit.
//!
//! A context acts on the angular coordinate `u ∈ (-π, π]` of a state relative to
//! its gauge representative. Two families are available: rigid rotations by a
//! ray-dependent offset, and interval exchanges of `k` equal bins.

use std::fmt;
use std::sync::Arc;

use crate::arcs::ArcSet;
use crate::error::{HvError, Result};
use crate::realspace::StateVector;
use crate::scalar::{wrap_angle, Real};

pub type RayFn<T> = Arc<dyn Fn(&StateVector<T>) -> T + Send + Sync>;

/// Offset of a rigid context, evaluated on the gauge representative of a ray.
#[derive(Clone)]
pub enum RigidOffset<T: Real> {
    Constant(T),
    /// Smooth pseudo-random function of the ray's basis weights `|ψ_j|²`.
    RayHash {
        salt: u64,
    },
    /// Arbitrary orbit-constant function.
    Custom(RayFn<T>),
}

impl<T: Real> fmt::Debug for RigidOffset<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RigidOffset::Constant(c) => write!(f, "Constant({c:?})"),
            RigidOffset::RayHash { salt } => write!(f, "RayHash({salt})"),
            RigidOffset::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl<T: Real> PartialEq for RigidOffset<T> {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (RigidOffset::Constant(a), RigidOffset::Constant(b)) => a == b,
            (RigidOffset::RayHash { salt: a }, RigidOffset::RayHash { salt: b }) => a == b,
            (RigidOffset::Custom(a), RigidOffset::Custom(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl<T: Real> RigidOffset<T> {
    pub fn eval(&self, rep: &StateVector<T>) -> T {
        match self {
            RigidOffset::Constant(c) => *c,
            RigidOffset::RayHash { salt } => {
                let n = rep.dim();
                let v = rep.coords();
                let mut state = splitmix(*salt);
                let mut acc = T::lit((state >> 11) as f64 / (1u64 << 53) as f64) * T::two_pi();
                for k in 0..n {
                    state = splitmix(state);
                    let freq = T::lit(1.0 + (state % 7) as f64);
                    // |ψ_k|² with ψ = φ/√2
                    let w = (v[k] * v[k] + v[n + k] * v[n + k]) * T::lit(0.5);
                    acc += freq * w * T::two_pi();
                }
                T::pi() * acc.sin()
            }
            RigidOffset::Custom(f) => f(rep),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum Context<T: Real> {
    #[default]
    Identity,
    /// `u ↦ wrap(u + c([φ]))`
    Rigid(RigidOffset<T>),
    /// Bin `j` of `k = perm.len()` equal bins `(-π + jw, -π + (j+1)w]` moves to
    /// position `perm[j]`.
    Exchange { perm: Vec<usize> },
    /// Contexts applied left to right.
    Chain(Vec<Context<T>>),
}

impl<T: Real> Context<T> {
    pub fn rigid(offset: T) -> Self {
        Context::Rigid(RigidOffset::Constant(offset))
    }

    pub fn exchange(perm: Vec<usize>) -> Result<Self> {
        let k = perm.len();
        if k == 0 {
            return Err(HvError::InvalidContext(
                "exchange needs at least one bin".into(),
            ));
        }
        let mut seen = vec![false; k];
        for &p in &perm {
            if p >= k || seen[p] {
                return Err(HvError::InvalidContext(format!(
                    "{perm:?} is not a permutation"
                )));
            }
            seen[p] = true;
        }
        Ok(Context::Exchange { perm })
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Context<T>) -> Context<T> {
        match (self, next) {
            (Context::Identity, n) => n.clone(),
            (s, Context::Identity) => s.clone(),
            (Context::Chain(a), Context::Chain(b)) => {
                Context::Chain(a.iter().chain(b).cloned().collect())
            }
            (Context::Chain(a), n) => {
                let mut v = a.clone();
                v.push(n.clone());
                Context::Chain(v)
            }
            (s, n) => Context::Chain(vec![s.clone(), n.clone()]),
        }
    }

    fn bin_edges(k: usize) -> Vec<T> {
        let w = T::two_pi() / T::lit(k as f64);
        (0..=k)
            .map(|j| {
                if j == k {
                    T::pi()
                } else {
                    -T::pi() + w * T::lit(j as f64)
                }
            })
            .collect()
    }

    fn bin_of(edges: &[T], u: T) -> usize {
        let k = edges.len() - 1;
        (0..k).find(|&j| u <= edges[j + 1]).unwrap_or(k - 1)
    }

    /// Transport `u` across bins so edges land exactly on edges.
    fn move_point(edges: &[T], from: usize, to: usize, x: T) -> T {
        if x == edges[from] {
            edges[to]
        } else if x == edges[from + 1] {
            edges[to + 1]
        } else {
            x - edges[from] + edges[to]
        }
    }

    /// The context's action on the angular coordinate of the orbit of `rep`.
    pub fn forward(&self, u: T, rep: &StateVector<T>) -> T {
        match self {
            Context::Identity => u,
            Context::Rigid(off) => wrap_angle(u + off.eval(rep)),
            Context::Exchange { perm } => {
                let edges = Self::bin_edges(perm.len());
                let j = Self::bin_of(&edges, u);
                Self::move_point(&edges, j, perm[j], u)
            }
            Context::Chain(cs) => cs.iter().fold(u, |acc, c| c.forward(acc, rep)),
        }
    }

    pub fn inverse(&self, u: T, rep: &StateVector<T>) -> T {
        match self {
            Context::Identity => u,
            Context::Rigid(off) => wrap_angle(u - off.eval(rep)),
            Context::Exchange { perm } => {
                let edges = Self::bin_edges(perm.len());
                let target = Self::bin_of(&edges, u);
                let j = perm.iter().position(|&p| p == target).expect("permutation");
                Self::move_point(&edges, target, j, u)
            }
            Context::Chain(cs) => cs.iter().rev().fold(u, |acc, c| c.inverse(acc, rep)),
        }
    }

    /// Image of an arc set on the orbit of `rep`.
    pub fn image(&self, arcs: &ArcSet<T>, rep: &StateVector<T>) -> ArcSet<T> {
        match self {
            Context::Identity => arcs.clone(),
            Context::Rigid(off) => arcs.rotate(off.eval(rep)),
            Context::Exchange { perm } => {
                let edges = Self::bin_edges(perm.len());
                let mut pieces = Vec::new();
                for (j, &p) in perm.iter().enumerate() {
                    let bin = ArcSet::interval(edges[j], edges[j + 1]);
                    for &(a, b) in arcs.intersection(&bin).pieces() {
                        pieces.push((
                            Self::move_point(&edges, j, p, a),
                            Self::move_point(&edges, j, p, b),
                        ));
                    }
                }
                ArcSet::from_pieces(pieces)
            }
            Context::Chain(cs) => cs.iter().fold(arcs.clone(), |acc, c| c.image(&acc, rep)),
        }
    }
}
