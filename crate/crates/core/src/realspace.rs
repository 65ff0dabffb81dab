//! The real Hilbert space `R^{2n}` carrying a complex structure.
//!
//! A real vector `v = [x; y]` stands for the complex vector `x + iy`. The complex
//! structure is `J[x; y] = [-y; x]` and the circle acts on states by
//! `rotate(φ, θ) = cos θ·φ + sin θ·Jφ`. States live on the sphere of radius √2.

use nalgebra::{ComplexField, DVector};

use crate::error::{HvError, Result};
use crate::scalar::{wrap_angle, Real, C};

/// Same-ray threshold on `| |<<φ,ψ>>| - 2 |`.
pub const SAME_RAY_TOL: f64 = 1e-9;
/// Sphere membership threshold on `| ‖φ‖ - √2 |`.
pub const SPHERE_TOL: f64 = 1e-12;
/// Modulus ties closer than this pick the lowest index in the gauge section.
pub const PIVOT_TIE_TOL: f64 = 1e-12;

/// Complex dimension `n`; real dimension `2n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ComplexSpace {
    n: usize,
}

impl ComplexSpace {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "complex dimension must be positive");
        ComplexSpace { n }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn real_dim(&self) -> usize {
        2 * self.n
    }

    /// `J` applied to an arbitrary real `2n`-vector.
    pub fn j<T: Real>(&self, v: &DVector<T>) -> DVector<T> {
        apply_j(v)
    }

    /// The real matrix of `J = [[0, -I], [I, 0]]`.
    pub fn j_matrix<T: Real>(&self) -> nalgebra::DMatrix<T> {
        let n = self.n;
        let mut m = nalgebra::DMatrix::zeros(2 * n, 2 * n);
        for k in 0..n {
            m[(k, n + k)] = -T::one();
            m[(n + k, k)] = T::one();
        }
        m
    }
}

pub(crate) fn apply_j<T: Real>(v: &DVector<T>) -> DVector<T> {
    let n = v.len() / 2;
    DVector::from_fn(2 * n, |i, _| if i < n { -v[n + i] } else { v[i - n] })
}

/// Real block vector to complex amplitudes.
pub fn to_complex<T: Real>(v: &DVector<T>) -> DVector<C<T>> {
    let n = v.len() / 2;
    DVector::from_fn(n, |i, _| C::new(v[i], v[n + i]))
}

/// Complex amplitudes to the real block layout.
pub fn from_complex<T: Real>(z: &DVector<C<T>>) -> DVector<T> {
    let n = z.len();
    DVector::from_fn(2 * n, |i, _| if i < n { z[i].re } else { z[i - n].im })
}

/// `<<v, w>> = <v, w> + i<Jv, w>`, conjugate linear in `v`.
pub fn herm_inner<T: Real>(v: &DVector<T>, w: &DVector<T>) -> Result<C<T>> {
    if v.len() != w.len() {
        return Err(HvError::DimensionMismatch {
            expected: v.len(),
            got: w.len(),
        });
    }
    let n = v.len() / 2;
    let mut re = T::zero();
    let mut im = T::zero();
    for k in 0..n {
        let (x, y) = (v[k], v[n + k]);
        let (a, b) = (w[k], w[n + k]);
        re += x * a + y * b;
        im += x * b - y * a;
    }
    Ok(C::new(re, im))
}

/// A hidden classical state: a point of the sphere of radius √2 in `R^{2n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T: Real> {
    coords: DVector<T>,
}

impl<T: Real> StateVector<T> {
    /// Accepts coordinates already on the sphere.
    pub fn from_coords(coords: DVector<T>) -> Result<Self> {
        if coords.is_empty() || !coords.len().is_multiple_of(2) {
            return Err(HvError::DimensionMismatch {
                expected: 2 * (coords.len() / 2).max(1),
                got: coords.len(),
            });
        }
        let norm = coords.norm();
        if (norm - T::lit(2.0).sqrt()).abs() > T::tolerance(SPHERE_TOL) {
            return Err(HvError::OffSphere {
                norm: norm.as_f64(),
            });
        }
        Ok(StateVector { coords })
    }

    /// Rescales any nonzero real `2n`-vector onto the sphere.
    pub fn normalized(coords: DVector<T>) -> Result<Self> {
        let norm = coords.norm();
        if !coords.len().is_multiple_of(2) || coords.is_empty() || norm == T::zero() {
            return Err(HvError::OffSphere {
                norm: norm.as_f64(),
            });
        }
        Ok(StateVector {
            coords: coords * (T::lit(2.0).sqrt() / norm),
        })
    }

    /// State `√2·ψ/‖ψ‖` for complex amplitudes `ψ`.
    pub fn from_amplitudes(amps: &[C<T>]) -> Result<Self> {
        Self::normalized(from_complex(&DVector::from_column_slice(amps)))
    }

    /// `√2·e_k`.
    pub fn basis(n: usize, k: usize) -> Self {
        assert!(k < n);
        let mut v = DVector::zeros(2 * n);
        v[k] = T::lit(2.0).sqrt();
        StateVector { coords: v }
    }

    pub(crate) fn from_coords_unchecked(coords: DVector<T>) -> Self {
        StateVector { coords }
    }

    pub fn coords(&self) -> &DVector<T> {
        &self.coords
    }

    pub fn into_coords(self) -> DVector<T> {
        self.coords
    }

    pub fn space(&self) -> ComplexSpace {
        ComplexSpace::new(self.coords.len() / 2)
    }

    pub fn dim(&self) -> usize {
        self.coords.len() / 2
    }

    /// The unit complex vector `ψ = φ/√2`.
    pub fn unit_amplitudes(&self) -> DVector<C<T>> {
        to_complex(&self.coords).unscale(T::lit(2.0).sqrt())
    }

    pub fn j(&self) -> StateVector<T> {
        StateVector {
            coords: apply_j(&self.coords),
        }
    }

    /// `cos θ·φ + sin θ·Jφ`.
    pub fn rotate(&self, theta: T) -> StateVector<T> {
        let (s, c) = theta.sin_cos();
        let n = self.dim();
        let v = &self.coords;
        let coords = DVector::from_fn(2 * n, |i, _| {
            let jv = if i < n { -v[n + i] } else { v[i - n] };
            c * v[i] + s * jv
        });
        StateVector { coords }
    }

    pub fn herm_inner(&self, other: &StateVector<T>) -> Result<C<T>> {
        herm_inner(&self.coords, &other.coords)
    }

    pub fn same_ray(&self, other: &StateVector<T>) -> bool {
        match self.herm_inner(other) {
            Ok(z) => (z.modulus() - T::lit(2.0)).abs() <= T::tolerance(SAME_RAY_TOL),
            Err(_) => false,
        }
    }

    /// The angle `θ ∈ (-π, π]` with `self = rotate(base, θ)`.
    pub fn arg_rel(&self, base: &StateVector<T>) -> Result<T> {
        let z = base.herm_inner(self)?;
        let modulus = z.modulus();
        if (modulus - T::lit(2.0)).abs() > T::tolerance(SAME_RAY_TOL) {
            return Err(HvError::NotSameRay {
                modulus: modulus.as_f64(),
            });
        }
        Ok(wrap_angle(z.im.atan2(z.re)))
    }

    /// `|Arg(ψ/φ)|`, the distance along the orbit.
    pub fn phase_distance(&self, other: &StateVector<T>) -> Result<T> {
        Ok(other.arg_rel(self)?.abs())
    }

    /// Gauge-free distance between the rays of two states: `1 - |<<φ,ψ>>|/2`.
    pub fn ray_distance(&self, other: &StateVector<T>) -> Result<T> {
        let z = self.herm_inner(other)?;
        Ok((T::one() - z.modulus() / T::lit(2.0)).max(T::zero()))
    }

    /// The default gauge section `σ[φ]`.
    pub fn section(&self) -> StateVector<T> {
        GaugeSection::MaxModulus.apply(self)
    }

    pub fn ray(&self) -> Ray<T> {
        Ray::of(self)
    }
}

/// A choice of one representative per ray.
#[derive(Debug, Clone, Copy, PartialEq)]
#[derive(Default)]
pub enum GaugeSection<T: Real> {
    /// Rotate the largest-modulus complex coordinate (lowest index on ties)
    /// to the positive real axis.
    #[default]
    MaxModulus,
    /// The `MaxModulus` representative rotated by a fixed angle.
    Rotated(T),
}


impl<T: Real> GaugeSection<T> {
    pub fn apply(&self, phi: &StateVector<T>) -> StateVector<T> {
        let canonical = pivot_section(phi);
        match *self {
            GaugeSection::MaxModulus => canonical,
            GaugeSection::Rotated(a) => canonical.rotate(a),
        }
    }

    /// Angular coordinate `u = arg_rel(φ, σ[φ])` of a state within its orbit.
    pub fn coordinate(&self, phi: &StateVector<T>) -> T {
        let base = self.apply(phi);
        // base is built from phi, so the same-ray test cannot fail
        let z = herm_inner(base.coords(), phi.coords()).expect("same dimension");
        wrap_angle(z.im.atan2(z.re))
    }
}

fn pivot_section<T: Real>(phi: &StateVector<T>) -> StateVector<T> {
    let n = phi.dim();
    let v = phi.coords();
    let moduli: Vec<T> = (0..n)
        .map(|k| (v[k] * v[k] + v[n + k] * v[n + k]).sqrt())
        .collect();
    let max = moduli.iter().copied().fold(T::zero(), |a, b| a.max(b));
    let tie = T::tolerance(PIVOT_TIE_TOL);
    let pivot = moduli.iter().position(|&m| m >= max - tie).unwrap_or(0);
    // rotate by -arg(z_pivot) so the pivot becomes real positive
    let arg = v[n + pivot].atan2(v[pivot]);
    let mut out = phi.rotate(-arg);
    let c = &mut out.coords;
    c[n + pivot] = T::zero();
    c[pivot] = moduli[pivot];
    out
}

/// A circle orbit `[φ]`, held by its gauge representative.
#[derive(Debug, Clone, PartialEq)]
pub struct Ray<T: Real> {
    representative: StateVector<T>,
}

impl<T: Real> Ray<T> {
    pub fn of(phi: &StateVector<T>) -> Self {
        Ray {
            representative: phi.section(),
        }
    }

    pub fn representative(&self) -> &StateVector<T> {
        &self.representative
    }

    pub fn contains(&self, phi: &StateVector<T>) -> bool {
        self.representative.same_ray(phi)
    }

    pub fn dim(&self) -> usize {
        self.representative.dim()
    }
}
