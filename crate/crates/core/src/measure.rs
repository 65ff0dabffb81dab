//! Probabilities: exact orbit measures, Monte Carlo over phases, mean values and
//! the `a·cos²t + b·sin t·cos t + c·sin²t` test along superposition paths.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::borel::BorelSet;
use crate::error::{HvError, Result};
use crate::hidden::HiddenObservable;
use crate::realspace::{Ray, StateVector};
use crate::scalar::Real;

/// Number of grid points on `[0, π)` used by [`form_fit`] by default.
pub const FORM_FIT_SAMPLES: usize = 64;
/// Residual at or below this is numerical noise.
pub const FORM_FIT_PASS: f64 = 1e-9;
/// Residual above this means the function is not of the quadratic form.
pub const FORM_FIT_FAIL: f64 = 1e-3;
/// Orthogonality tolerance for superposition paths.
pub const ORTHOGONAL_TOL: f64 = 1e-9;
/// Draws per parallel work unit in [`born_monte_carlo`]; each unit has its own stream.
pub const MC_CHUNK: usize = 1 << 14;

/// Seeded source of uniform phases on `(-π, π]`.
#[derive(Debug, Clone)]
pub struct PhaseSampler {
    seed: u64,
    rng: ChaCha8Rng,
}

impl PhaseSampler {
    pub fn new(seed: u64) -> Self {
        PhaseSampler {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream `k` of the same seed.
    pub fn substream(&self, k: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(k);
        PhaseSampler {
            seed: self.seed,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn draw<T: Real>(&mut self) -> T {
        let u: f64 = self.rng.random();
        T::lit(std::f64::consts::PI - std::f64::consts::TAU * u)
    }
}

/// Least-squares fit of `a·cos²t + b·sin t·cos t + c·sin²t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormFit<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    /// Largest absolute deviation on the sample grid.
    pub residual: T,
}

impl<T: Real> FormFit<T> {
    pub fn is_form(&self) -> bool {
        self.residual <= T::tolerance(FORM_FIT_PASS)
    }

    pub fn eval(&self, t: T) -> T {
        let (s, c) = t.sin_cos();
        self.a * c * c + self.b * s * c + self.c * s * s
    }
}

/// `γ(t) = cos t·φ + sin t·ψ`
pub fn superposition<T: Real>(phi: &StateVector<T>, psi: &StateVector<T>, t: T) -> StateVector<T> {
    let v = phi.coords() * t.cos() + psi.coords() * t.sin();
    StateVector::normalized(v).expect("orthogonal unit path stays on the sphere")
}

pub fn check_orthogonal<T: Real>(phi: &StateVector<T>, psi: &StateVector<T>) -> Result<()> {
    let z = phi.herm_inner(psi)?;
    let m = z.re.hypot(z.im);
    if m > T::tolerance(ORTHOGONAL_TOL) {
        return Err(HvError::NotOrthogonal {
            modulus: m.as_f64(),
        });
    }
    Ok(())
}

/// Fits `g` along the path through orthogonal `phi`, `psi` on `samples` uniform
/// points of `[0, π)`.
pub fn form_fit<T: Real, G: Fn(&StateVector<T>, T) -> T>(
    phi: &StateVector<T>,
    psi: &StateVector<T>,
    g: G,
    samples: usize,
) -> Result<FormFit<T>> {
    check_orthogonal(phi, psi)?;
    let ts: Vec<T> = (0..samples)
        .map(|k| T::pi() * T::lit(k as f64) / T::lit(samples as f64))
        .collect();
    let ys: Vec<T> = ts
        .iter()
        .map(|&t| g(&superposition(phi, psi, t), t))
        .collect();
    Ok(fit_samples(&ts, &ys))
}

/// Least-squares fit of sampled values against `cos²t, sin t·cos t, sin²t`.
pub fn fit_samples<T: Real>(ts: &[T], ys: &[T]) -> FormFit<T> {
    let m = ts.len();
    let design = DMatrix::from_fn(m, 3, |i, j| {
        let (s, c) = ts[i].sin_cos();
        match j {
            0 => c * c,
            1 => s * c,
            _ => s * s,
        }
    });
    let y = DVector::from_column_slice(ys);
    let svd = design.clone().svd(true, true);
    let coef = svd
        .solve(&y, T::lit(1e-14))
        .unwrap_or_else(|_| DVector::zeros(3));
    let resid = &design * &coef - &y;
    let residual = resid.iter().fold(T::zero(), |acc, r| acc.max(r.abs()));
    FormFit {
        a: coef[0],
        b: coef[1],
        c: coef[2],
        residual,
    }
}

/// `π(φ, f, B)`: the arc measure of `f⁻¹(B)` on the orbit of `phi`.
pub fn born_exact<T: Real>(phi: &StateVector<T>, f: &HiddenObservable<T>, set: &BorelSet<T>) -> T {
    f.preimage(set).orbit_measure(phi)
}

/// Relative frequency of `f ∈ B` over `n` uniform phases on the ray, and its
/// binomial standard error.
///
/// Draws are split into fixed chunks of [`MC_CHUNK`], chunk `k` using stream `k`
/// of the sampler's seed, so the result does not depend on the thread count.
pub fn born_monte_carlo<T: Real>(
    ray: &Ray<T>,
    f: &HiddenObservable<T>,
    set: &BorelSet<T>,
    n: usize,
    sampler: &PhaseSampler,
) -> (T, T) {
    let chart = f.chart(ray.representative());
    let chunks = n.div_ceil(MC_CHUNK);
    let hits: usize = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut s = sampler.substream(k as u64);
            let len = MC_CHUNK.min(n - k * MC_CHUNK);
            (0..len)
                .filter(|_| set.contains(chart.value_at(s.draw::<T>())))
                .count()
        })
        .sum();
    let p = T::lit(hits as f64 / n.max(1) as f64);
    let stderr = (p * (T::one() - p) / T::lit(n.max(1) as f64)).sqrt();
    (p, stderr)
}

/// `Σ λ_i·μ(f = λ_i)` over the orbit, from exact arc lengths.
pub fn mean_value<T: Real>(f: &HiddenObservable<T>, ray: &Ray<T>) -> T {
    hidden_moments(f, ray.representative()).0
}

/// Mean and variance of `f` on the orbit of `phi`, from exact arc lengths.
pub fn hidden_moments<T: Real>(f: &HiddenObservable<T>, phi: &StateVector<T>) -> (T, T) {
    let chart = f.chart(phi);
    let cells: Vec<(T, T)> = chart.cells().map(|(v, a)| (v, a.measure())).collect();
    let mean = cells.iter().fold(T::zero(), |acc, &(v, p)| acc + v * p);
    let var = cells
        .iter()
        .fold(T::zero(), |acc, &(v, p)| acc + p * (v - mean) * (v - mean));
    (mean, var)
}
