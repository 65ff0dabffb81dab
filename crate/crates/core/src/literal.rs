//! Serializable literals for operators, states, contexts, Borel sets and phase
//! speeds, as they appear in experiment configs.
//!
//! Literals are plain `f64` data; `build` converts them into model objects at
//! any scalar precision. Seeded literals draw from their own `ChaCha8Rng`, so
//! the same literal always builds the same object.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::borel::BorelSet;
use crate::context::{Context, RigidOffset};
use crate::dynamics::PhaseSpeed;
use crate::error::{HvError, Result};
use crate::operators::HermitianOperator;
use crate::random::{random_hermitian, random_projector, random_state, random_unitary};
use crate::realspace::{GaugeSection, StateVector};
use crate::scalar::{Real, C};

fn invalid(msg: impl Into<String>) -> HvError {
    HvError::InvalidLiteral(msg.into())
}

fn check_dim(what: &str, got: usize, want: Option<usize>) -> Result<()> {
    match want {
        Some(n) if n != got => Err(invalid(format!("{what} has dimension {got}, expected {n}"))),
        _ if got == 0 => Err(invalid(format!("{what} has dimension 0"))),
        _ => Ok(()),
    }
}

/// A complex number written as `x` or `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Amplitude {
    Real(f64),
    Complex([f64; 2]),
}

impl Amplitude {
    pub fn to_complex<T: Real>(self) -> C<T> {
        match self {
            Amplitude::Real(x) => C::new(T::lit(x), T::zero()),
            Amplitude::Complex([re, im]) => C::new(T::lit(re), T::lit(im)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeededDim {
    pub n: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumLit {
    pub eigenvalues: Vec<f64>,
    /// Seed of the Haar-random eigenbasis; omitted means the standard basis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomProjectorLit {
    pub n: usize,
    pub rank: usize,
    pub seed: u64,
}

/// A Hermitian operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorLit {
    /// Row-major complex entries.
    Entries(Vec<Vec<Amplitude>>),
    Diag(Vec<f64>),
    Pauli(Pauli),
    /// `U·diag(λ)·U†` with `U` Haar-random from the seed.
    Spectrum(SpectrumLit),
    /// Orthogonal projector onto the line through the given amplitudes.
    Projector(Vec<Amplitude>),
    RandomProjector(RandomProjectorLit),
    /// Hermitian matrix with Gaussian entries.
    Random(SeededDim),
}

impl OperatorLit {
    pub fn build<T: Real>(&self, n: Option<usize>) -> Result<HermitianOperator<T>> {
        let op = match self {
            OperatorLit::Entries(rows) => {
                let k = rows.len();
                if rows.iter().any(|r| r.len() != k) {
                    return Err(invalid("operator entries must form a square matrix"));
                }
                check_dim("operator", k, n)?;
                HermitianOperator::new(DMatrix::from_fn(k, k, |i, j| rows[i][j].to_complex()))?
            }
            OperatorLit::Diag(d) => {
                check_dim("operator", d.len(), n)?;
                let vals: Vec<T> = d.iter().map(|&x| T::lit(x)).collect();
                HermitianOperator::from_real_diag(&vals)
            }
            OperatorLit::Pauli(p) => {
                check_dim("operator", 2, n)?;
                match p {
                    Pauli::I => HermitianOperator::identity(2),
                    Pauli::X => HermitianOperator::pauli_x(),
                    Pauli::Y => HermitianOperator::pauli_y(),
                    Pauli::Z => HermitianOperator::pauli_z(),
                }
            }
            OperatorLit::Spectrum(s) => {
                let k = s.eigenvalues.len();
                check_dim("operator", k, n)?;
                let vals: Vec<T> = s.eigenvalues.iter().map(|&x| T::lit(x)).collect();
                let u = match s.seed {
                    Some(seed) => random_unitary::<T, _>(k, &mut ChaCha8Rng::seed_from_u64(seed)),
                    None => DMatrix::identity(k, k),
                };
                HermitianOperator::from_spectrum(&vals, &u)?
            }
            OperatorLit::Projector(v) => {
                check_dim("operator", v.len(), n)?;
                let z = DVector::from_iterator(v.len(), v.iter().map(|a| a.to_complex::<T>()));
                if z.norm() <= T::zero() {
                    return Err(invalid("projector onto the zero vector"));
                }
                HermitianOperator::projector_onto(&z)
            }
            OperatorLit::RandomProjector(p) => {
                check_dim("operator", p.n, n)?;
                if p.rank > p.n {
                    return Err(invalid(format!(
                        "rank {} exceeds dimension {}",
                        p.rank, p.n
                    )));
                }
                random_projector(p.n, p.rank, &mut ChaCha8Rng::seed_from_u64(p.seed))
            }
            OperatorLit::Random(s) => {
                check_dim("operator", s.n, n)?;
                random_hermitian(s.n, &mut ChaCha8Rng::seed_from_u64(s.seed))
            }
        };
        Ok(op)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisLit {
    pub n: usize,
    pub k: usize,
}

/// A classical state; amplitudes are rescaled onto the sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateLit {
    Amplitudes(Vec<Amplitude>),
    Random(SeededDim),
    Basis(BasisLit),
}

impl StateLit {
    pub fn build<T: Real>(&self, n: Option<usize>) -> Result<StateVector<T>> {
        match self {
            StateLit::Amplitudes(a) => {
                check_dim("state", a.len(), n)?;
                let z: Vec<C<T>> = a.iter().map(|x| x.to_complex()).collect();
                StateVector::from_amplitudes(&z).map_err(|_| invalid("state amplitudes vanish"))
            }
            StateLit::Random(s) => {
                check_dim("state", s.n, n)?;
                Ok(random_state(s.n, &mut ChaCha8Rng::seed_from_u64(s.seed)))
            }
            StateLit::Basis(b) => {
                check_dim("state", b.n, n)?;
                if b.k >= b.n {
                    return Err(invalid(format!(
                        "basis index {} out of range for n = {}",
                        b.k, b.n
                    )));
                }
                Ok(StateVector::basis(b.n, b.k))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HashTag {
    #[serde(rename = "per-ray-hash")]
    PerRayHash,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OffsetLit {
    Radians(f64),
    Hash(HashTag),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RigidLit {
    pub offset: OffsetLit,
    /// Salt of the per-ray hash offset.
    #[serde(default)]
    pub salt: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExchangeLit {
    /// Number of bins; must equal `perm.len()` when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub perm: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ContextLit {
    #[default]
    Identity,
    Rigid(RigidLit),
    Exchange(ExchangeLit),
    Chain(Vec<ContextLit>),
}

impl ContextLit {
    pub fn build<T: Real>(&self) -> Result<Context<T>> {
        match self {
            ContextLit::Identity => Ok(Context::Identity),
            ContextLit::Rigid(r) => Ok(Context::Rigid(match r.offset {
                OffsetLit::Radians(x) => RigidOffset::Constant(T::lit(x)),
                OffsetLit::Hash(HashTag::PerRayHash) => RigidOffset::RayHash { salt: r.salt },
            })),
            ContextLit::Exchange(e) => {
                if e.k.is_some_and(|k| k != e.perm.len()) {
                    return Err(HvError::InvalidContext(format!(
                        "k = {} but perm has {} entries",
                        e.k.unwrap(),
                        e.perm.len()
                    )));
                }
                Context::exchange(e.perm.clone())
            }
            ContextLit::Chain(v) => Ok(Context::Chain(
                v.iter().map(|c| c.build()).collect::<Result<_>>()?,
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum GaugeLit {
    #[default]
    MaxModulus,
    Rotated(f64),
}

impl GaugeLit {
    pub fn build<T: Real>(&self) -> GaugeSection<T> {
        match *self {
            GaugeLit::MaxModulus => GaugeSection::MaxModulus,
            GaugeLit::Rotated(a) => GaugeSection::Rotated(T::lit(a)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BorelLit {
    All,
    Empty,
    Points(Vec<f64>),
    Closed([f64; 2]),
    Open([f64; 2]),
    LeftOpen([f64; 2]),
    /// `(−∞, s]`
    AtMost(f64),
    Union(Vec<BorelLit>),
    Complement(Box<BorelLit>),
}

impl BorelLit {
    pub fn build<T: Real>(&self) -> Result<BorelSet<T>> {
        let ordered = |[a, b]: [f64; 2]| {
            if a <= b {
                Ok((T::lit(a), T::lit(b)))
            } else {
                Err(invalid(format!("interval [{a}, {b}] is reversed")))
            }
        };
        Ok(match self {
            BorelLit::All => BorelSet::all(),
            BorelLit::Empty => BorelSet::empty(),
            BorelLit::Points(p) => {
                BorelSet::points(&p.iter().map(|&x| T::lit(x)).collect::<Vec<_>>())
            }
            BorelLit::Closed(i) => {
                let (a, b) = ordered(*i)?;
                BorelSet::closed(a, b)
            }
            BorelLit::Open(i) => {
                let (a, b) = ordered(*i)?;
                BorelSet::open(a, b)
            }
            BorelLit::LeftOpen(i) => {
                let (a, b) = ordered(*i)?;
                BorelSet::left_open(a, b)
            }
            BorelLit::AtMost(s) => BorelSet::at_most(T::lit(*s)),
            BorelLit::Union(v) => v.iter().try_fold(BorelSet::empty(), |acc, b| {
                Ok::<_, HvError>(acc.union(&b.build()?))
            })?,
            BorelLit::Complement(b) => b.build()?.complement(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleLit {
    pub by: f64,
    pub of: Box<PhaseSpeedLit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PhaseExpr {
    Expect(OperatorLit),
    Sum(Vec<PhaseSpeedLit>),
    Product(Vec<PhaseSpeedLit>),
    Scale(ScaleLit),
}

/// A phase speed: a number, or an expression over expectation values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PhaseSpeedLit {
    Constant(f64),
    Expr(PhaseExpr),
}

impl Default for PhaseSpeedLit {
    fn default() -> Self {
        PhaseSpeedLit::Constant(0.0)
    }
}

impl PhaseSpeedLit {
    pub fn build<T: Real>(&self, n: usize) -> Result<PhaseSpeed<T>> {
        let all = |v: &[PhaseSpeedLit]| v.iter().map(|e| e.build(n)).collect::<Result<Vec<_>>>();
        Ok(match self {
            PhaseSpeedLit::Constant(c) => PhaseSpeed::Constant(T::lit(*c)),
            PhaseSpeedLit::Expr(PhaseExpr::Expect(a)) => PhaseSpeed::Expect(a.build(Some(n))?),
            PhaseSpeedLit::Expr(PhaseExpr::Sum(v)) => PhaseSpeed::Sum(all(v)?),
            PhaseSpeedLit::Expr(PhaseExpr::Product(v)) => PhaseSpeed::Product(all(v)?),
            PhaseSpeedLit::Expr(PhaseExpr::Scale(s)) => {
                PhaseSpeed::Scaled(T::lit(s.by), Box::new(s.of.build(n)?))
            }
        })
    }
}
