//! Seeded generators for states, operators, unitaries and bases.

use nalgebra::{ComplexField, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::operators::HermitianOperator;
use crate::realspace::StateVector;
use crate::scalar::{Real, C};

fn gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::lit(rng.sample::<f64, _>(StandardNormal))
}

/// Uniformly distributed point of the sphere of radius √2 in `R^{2n}`.
pub fn random_state<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> StateVector<T> {
    loop {
        let v = DVector::from_fn(2 * n, |_, _| gaussian::<T, R>(rng));
        if let Ok(s) = StateVector::normalized(v) {
            return s;
        }
    }
}

/// Complex Ginibre matrix with standard normal real and imaginary parts.
pub fn ginibre<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<C<T>> {
    DMatrix::from_fn(n, n, |_, _| {
        C::new(gaussian::<T, R>(rng), gaussian::<T, R>(rng))
    })
}

/// Haar-distributed unitary via QR with the phase correction on `R`'s diagonal.
pub fn random_unitary<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<C<T>> {
    let qr = ginibre::<T, R>(n, rng).qr();
    let (mut q, r) = qr.unpack();
    for k in 0..n {
        let d = r[(k, k)];
        let m = d.modulus();
        if m > T::zero() {
            let phase = d / C::new(m, T::zero());
            let mut col = q.column_mut(k);
            col *= phase;
        }
    }
    q
}

/// GUE-like Hermitian matrix `(G + G†)/2`.
pub fn random_hermitian<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> HermitianOperator<T> {
    let g = ginibre::<T, R>(n, rng);
    let h = (&g + g.adjoint()).map(|z| z * T::lit(0.5));
    HermitianOperator::new(h).expect("symmetrized matrix is Hermitian")
}

/// Orthogonal projector onto a Haar-random subspace of the given rank.
pub fn random_projector<T: Real, R: Rng + ?Sized>(
    n: usize,
    rank: usize,
    rng: &mut R,
) -> HermitianOperator<T> {
    let u = random_unitary::<T, R>(n, rng);
    let cols = u.columns(0, rank.min(n)).into_owned();
    HermitianOperator::new(&cols * cols.adjoint()).expect("projector is Hermitian")
}

/// Columns of a Haar-random unitary, as a list of unit vectors.
pub fn random_basis<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<DVector<C<T>>> {
    let u = random_unitary::<T, R>(n, rng);
    (0..n).map(|k| u.column(k).into_owned()).collect()
}

/// Random orthonormal basis with the unit vector `u` at `position`; the other
/// vectors are a Haar-random basis of `u`'s orthogonal complement.
pub fn random_basis_containing<T: Real, R: Rng + ?Sized>(
    u: &DVector<C<T>>,
    position: usize,
    rng: &mut R,
) -> Vec<DVector<C<T>>> {
    let n = u.len();
    assert!(position < n);
    let unit = u.map(|z| z / C::new(u.norm(), T::zero()));
    let w = random_unitary::<T, R>(n, rng);
    // the Haar measure is invariant, so deflating u from a Haar frame is Haar on u⊥
    let mut rest: Vec<DVector<C<T>>> = Vec::with_capacity(n - 1);
    for col in w.column_iter() {
        if rest.len() == n - 1 {
            break;
        }
        let mut v = col.into_owned();
        for b in std::iter::once(&unit).chain(rest.iter()) {
            let c = b.dotc(&v);
            v -= b * c;
        }
        let norm = v.norm();
        if norm > T::lit(1e-8) {
            rest.push(v.map(|z| z / C::new(norm, T::zero())));
        }
    }
    rest.insert(position, unit);
    rest
}

/// Random resolution of the identity into `k` nonzero orthogonal projectors.
pub fn random_resolution<T: Real, R: Rng + ?Sized>(
    n: usize,
    k: usize,
    rng: &mut R,
) -> Vec<HermitianOperator<T>> {
    assert!(k >= 1 && k <= n);
    let u = random_unitary::<T, R>(n, rng);
    // k-1 distinct cut points in 1..n
    let mut cuts: Vec<usize> = (1..n).collect();
    for i in 0..cuts.len() {
        let j = rng.random_range(i..cuts.len());
        cuts.swap(i, j);
    }
    let mut cuts: Vec<usize> = cuts.into_iter().take(k - 1).collect();
    cuts.sort_unstable();
    cuts.push(n);
    let mut start = 0;
    cuts.into_iter()
        .map(|end| {
            let cols = u.columns(start, end - start).into_owned();
            start = end;
            HermitianOperator::new(&cols * cols.adjoint()).expect("projector is Hermitian")
        })
        .collect()
}
