//! A classical hidden-phase model of finite-dimensional quantum mechanics.
//!
//! Classical states are points of the sphere of radius √2 in `R^{2n}`; the
//! circle acting by complex phases is the hidden variable. Observables become
//! deterministic functions of the hidden state, and averaging over the phase
//! recovers Born probabilities, expectation values, brackets and dynamics.
//!
//! Everything is generic over the scalar through [`Real`]; the `*64` aliases
//! below fix it to `f64`.

pub mod arcs;
pub mod borel;
pub mod context;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod hidden;
pub mod literal;
pub mod logic;
pub mod measure;
pub mod operators;
pub mod random;
pub mod realspace;
pub mod scalar;

pub use arcs::ArcSet;
pub use borel::BorelSet;
pub use context::{Context, RigidOffset};
pub use dynamics::{FlowResult, HamiltonianSystem, PhaseSpeed};
pub use error::{HvError, Result};
pub use geometry::KaehlerFunction;
pub use hidden::{HiddenObservable, Proposition};
pub use logic::{Compatibility, Factorization, IndependenceVerdict, PropositionFamily};
pub use measure::{FormFit, PhaseSampler};
pub use operators::{HermitianOperator, Projector, SpectralDecomposition};
pub use realspace::{ComplexSpace, GaugeSection, Ray, StateVector};
pub use scalar::{wrap_angle, Real, C};

pub type StateVector64 = StateVector<f64>;
pub type Ray64 = Ray<f64>;
pub type HermitianOperator64 = HermitianOperator<f64>;
pub type SpectralDecomposition64 = SpectralDecomposition<f64>;
pub type BorelSet64 = BorelSet<f64>;
pub type ArcSet64 = ArcSet<f64>;
pub type Context64 = Context<f64>;
pub type HiddenObservable64 = HiddenObservable<f64>;
pub type Proposition64 = Proposition<f64>;
pub type KaehlerFunction64 = KaehlerFunction<f64>;
pub type HamiltonianSystem64 = HamiltonianSystem<f64>;
pub type PhaseSpeed64 = PhaseSpeed<f64>;
