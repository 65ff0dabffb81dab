//! Hermitian operators, their spectral decompositions, and the expectation
//! functions `φ ↦ ½<φ, Aφ>` they induce on the sphere.

use std::sync::{Arc, OnceLock};

use nalgebra::{ComplexField, DMatrix, DVector, SymmetricEigen};

use crate::borel::BorelSet;
use crate::error::{HvError, Result};
use crate::realspace::{from_complex, to_complex, StateVector};
use crate::scalar::{Real, C};

/// Eigenvalues closer than this collapse into one eigenspace by default.
pub const DEFAULT_MERGE_TOL: f64 = 1e-10;
/// Asymmetry `‖A - A†‖_max` above which input is rejected.
pub const HERMITIAN_INPUT_TOL: f64 = 1e-8;
/// Idempotence defect tolerated for projector input.
pub const PROJECTOR_TOL: f64 = 1e-9;

const EIG_MAX_ITER: usize = 10_000;

/// A self-adjoint complex-linear operator on `C^n`.
///
/// Clones share a lazily computed default-tolerance decomposition.
#[derive(Clone)]
pub struct HermitianOperator<T: Real> {
    matrix: Arc<DMatrix<C<T>>>,
    memo: Arc<OnceLock<Result<Arc<SpectralDecomposition<T>>>>>,
}

impl<T: Real> std::fmt::Debug for HermitianOperator<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HermitianOperator")
            .field("matrix", &self.matrix)
            .finish()
    }
}

impl<T: Real> PartialEq for HermitianOperator<T> {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

fn max_abs<T: Real>(m: &DMatrix<C<T>>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(z.modulus()))
}

impl<T: Real> HermitianOperator<T> {
    /// Symmetrizes `(A + A†)/2` when the asymmetry is within
    /// [`HERMITIAN_INPUT_TOL`]; rejects larger asymmetry.
    pub fn new(matrix: DMatrix<C<T>>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(HvError::DimensionMismatch {
                expected: matrix.nrows(),
                got: matrix.ncols(),
            });
        }
        let asym = max_abs(&(&matrix - matrix.adjoint()));
        if asym > T::tolerance(HERMITIAN_INPUT_TOL) {
            return Err(HvError::NotHermitian {
                asymmetry: asym.as_f64(),
            });
        }
        let half = C::new(T::lit(0.5), T::zero());
        let sym = (&matrix + matrix.adjoint()) * half;
        Ok(Self::from_trusted(sym))
    }

    fn from_trusted(matrix: DMatrix<C<T>>) -> Self {
        HermitianOperator {
            matrix: Arc::new(matrix),
            memo: Arc::new(OnceLock::new()),
        }
    }

    pub fn from_real_diag(values: &[T]) -> Self {
        let d = DVector::from_iterator(values.len(), values.iter().map(|&v| C::new(v, T::zero())));
        Self::from_trusted(DMatrix::from_diagonal(&d))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_trusted(DMatrix::identity(n, n))
    }

    pub fn zero(n: usize) -> Self {
        Self::from_trusted(DMatrix::zeros(n, n))
    }

    pub fn pauli_x() -> Self {
        let (o, l) = (C::new(T::zero(), T::zero()), C::new(T::one(), T::zero()));
        Self::from_trusted(DMatrix::from_row_slice(2, 2, &[o, l, l, o]))
    }

    pub fn pauli_y() -> Self {
        let o = C::new(T::zero(), T::zero());
        let i = C::new(T::zero(), T::one());
        Self::from_trusted(DMatrix::from_row_slice(2, 2, &[o, -i, i, o]))
    }

    pub fn pauli_z() -> Self {
        Self::from_real_diag(&[T::one(), -T::one()])
    }

    /// Rank-one projector onto the line spanned by `v` (need not be normalized).
    pub fn projector_onto(v: &DVector<C<T>>) -> Self {
        let norm2 = v.norm_squared();
        let m = (v * v.adjoint()).map(|z| z / C::new(norm2, T::zero()));
        Self::from_trusted(m)
    }

    /// `U diag(eigs) U†` for a unitary `U`.
    pub fn from_spectrum(eigs: &[T], unitary: &DMatrix<C<T>>) -> Result<Self> {
        let d = DVector::from_iterator(eigs.len(), eigs.iter().map(|&v| C::new(v, T::zero())));
        Self::new(unitary * DMatrix::from_diagonal(&d) * unitary.adjoint())
    }

    pub fn matrix(&self) -> &DMatrix<C<T>> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_trusted(self.matrix.map(|z| z * s))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_trusted(self.matrix.as_ref() + other.matrix.as_ref())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_trusted(self.matrix.as_ref() - other.matrix.as_ref())
    }

    /// `A + cI`
    pub fn shift(&self, c: T) -> Self {
        self.add(&Self::identity(self.dim()).scale(c))
    }

    /// `½(AB + BA)`
    pub fn jordan(&self, other: &Self) -> Self {
        let ab = self.matrix.as_ref() * other.matrix.as_ref();
        let ba = other.matrix.as_ref() * self.matrix.as_ref();
        Self::from_trusted((ab + ba).map(|z| z * T::lit(0.5)))
    }

    /// `-i[A, B]`, Hermitian for Hermitian `A`, `B`.
    pub fn lie(&self, other: &Self) -> Self {
        let comm = self.commutator(other);
        Self::from_trusted(comm.map(|z| z * C::new(T::zero(), -T::one())))
    }

    /// `AB - BA`, anti-Hermitian.
    pub fn commutator(&self, other: &Self) -> DMatrix<C<T>> {
        self.matrix.as_ref() * other.matrix.as_ref() - other.matrix.as_ref() * self.matrix.as_ref()
    }

    pub fn commutes_with(&self, other: &Self, tol: T) -> bool {
        max_abs(&self.commutator(other)) <= tol
    }

    /// `‖A² - A‖_max`
    pub fn idempotence_defect(&self) -> T {
        let sq = self.matrix.as_ref() * self.matrix.as_ref();
        max_abs(&(sq - self.matrix.as_ref()))
    }

    pub fn max_distance(&self, other: &Self) -> T {
        max_abs(&(self.matrix.as_ref() - other.matrix.as_ref()))
    }

    /// Action on a real block vector `[x; y]`.
    pub fn apply_real(&self, v: &DVector<T>) -> DVector<T> {
        from_complex(&(self.matrix.as_ref() * to_complex(v)))
    }

    /// The real `2n × 2n` representation `[[Re A, -Im A], [Im A, Re A]]`.
    pub fn real_matrix(&self) -> DMatrix<T> {
        let n = self.dim();
        let a = self.matrix.as_ref();
        DMatrix::from_fn(2 * n, 2 * n, |i, j| {
            let (bi, bj) = (i / n, j / n);
            let z = a[(i % n, j % n)];
            match (bi, bj) {
                (0, 0) | (1, 1) => z.re,
                (0, 1) => -z.im,
                _ => z.im,
            }
        })
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

    /// `½<φ, Aφ>`: the textbook expectation in the state `φ/√2`.
    pub fn expect(&self, phi: &StateVector<T>) -> Result<T> {
        self.check_dim(phi)?;
        Ok(self.expect_unchecked(phi.coords()))
    }

    pub(crate) fn expect_unchecked(&self, v: &DVector<T>) -> T {
        let z = to_complex(v);
        let az = self.matrix.as_ref() * &z;
        z.dotc(&az).re * T::lit(0.5)
    }

    /// Spherical gradient `Aφ - <A>_φ·φ`.
    pub fn grad_expect(&self, phi: &StateVector<T>) -> Result<DVector<T>> {
        self.check_dim(phi)?;
        let v = phi.coords();
        let av = self.apply_real(v);
        let e = av.dot(v) * T::lit(0.5);
        Ok(av - v * e)
    }

    /// Default-tolerance decomposition, computed once and shared by clones.
    pub fn spectral(&self) -> Result<Arc<SpectralDecomposition<T>>> {
        self.memo
            .get_or_init(|| spectral_decompose(self, T::tolerance(DEFAULT_MERGE_TOL)).map(Arc::new))
            .clone()
    }
}

/// One eigenspace: a value and an orthonormal basis of its range (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenspace<T: Real> {
    pub value: T,
    pub basis: DMatrix<C<T>>,
}

impl<T: Real> Eigenspace<T> {
    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn projector(&self) -> HermitianOperator<T> {
        HermitianOperator::from_trusted(&self.basis * self.basis.adjoint())
    }

    /// `<E>_φ = ‖B†ψ‖²` for the unit vector `ψ = φ/√2`.
    pub fn weight(&self, psi: &DVector<C<T>>) -> T {
        if self.basis.ncols() == 0 {
            return T::zero();
        }
        (self.basis.adjoint() * psi).norm_squared()
    }
}

/// Distinct ascending eigenvalues with their orthogonal eigenprojectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition<T: Real> {
    dim: usize,
    spaces: Vec<Eigenspace<T>>,
}

impl<T: Real> SpectralDecomposition<T> {
    /// Builds a decomposition from eigenspaces, sorting by value and merging
    /// values within `tol`.
    pub fn from_eigenspaces(dim: usize, mut spaces: Vec<Eigenspace<T>>, tol: T) -> Self {
        spaces.sort_by(|a, b| {
            a.value
                .partial_cmp(&b.value)
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let mut merged: Vec<(Vec<T>, Vec<usize>, Vec<DMatrix<C<T>>>)> = Vec::new();
        for s in spaces {
            let rank = s.rank();
            match merged.last_mut() {
                Some((vals, ranks, bases)) if s.value - *vals.last().unwrap() <= tol => {
                    vals.push(s.value);
                    ranks.push(rank);
                    bases.push(s.basis);
                }
                _ => merged.push((vec![s.value], vec![rank], vec![s.basis])),
            }
        }
        let spaces = merged
            .into_iter()
            .map(|(vals, ranks, bases)| {
                let total: usize = ranks.iter().sum();
                let mut weighted = T::zero();
                for (v, r) in vals.iter().zip(&ranks) {
                    weighted += *v * T::lit(*r as f64);
                }
                let value = if total == 0 {
                    vals[0]
                } else {
                    weighted / T::lit(total as f64)
                };
                let cols: Vec<_> = bases
                    .iter()
                    .flat_map(|b| b.column_iter().map(|c| c.into_owned()))
                    .collect();
                let basis = if cols.is_empty() {
                    DMatrix::zeros(dim, 0)
                } else {
                    DMatrix::from_columns(&cols)
                };
                Eigenspace { value, basis }
            })
            .collect();
        SpectralDecomposition { dim, spaces }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        self.spaces.iter().map(|s| s.value).collect()
    }

    pub fn multiplicities(&self) -> Vec<usize> {
        self.spaces.iter().map(|s| s.rank()).collect()
    }

    pub fn spaces(&self) -> &[Eigenspace<T>] {
        &self.spaces
    }

    pub fn projectors(&self) -> Vec<HermitianOperator<T>> {
        self.spaces.iter().map(|s| s.projector()).collect()
    }

    /// `Σ λ_i E_i`
    pub fn reconstruct(&self) -> HermitianOperator<T> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for s in &self.spaces {
            let p = &s.basis * s.basis.adjoint();
            m += p.map(|z| z * s.value);
        }
        HermitianOperator::from_trusted(m)
    }

    /// Per-eigenspace weights `<E_i>_φ`.
    pub fn weights(&self, phi: &StateVector<T>) -> Vec<T> {
        let psi = phi.unit_amplitudes();
        self.spaces.iter().map(|s| s.weight(&psi)).collect()
    }

    /// `E_B`: sum of the eigenprojectors whose eigenvalue lies in `B`.
    pub fn spectral_projector(&self, set: &BorelSet<T>) -> HermitianOperator<T> {
        let cols: Vec<_> = self
            .spaces
            .iter()
            .filter(|s| set.contains(s.value))
            .flat_map(|s| s.basis.column_iter().map(|c| c.into_owned()))
            .collect();
        if cols.is_empty() {
            return HermitianOperator::zero(self.dim);
        }
        let b = DMatrix::from_columns(&cols);
        HermitianOperator::from_trusted(&b * b.adjoint())
    }

    /// `F(s) = <E_(-∞,s]>_φ`, a right-continuous step function.
    pub fn cumulative(&self, phi: &StateVector<T>, s: T) -> T {
        match self.spaces.last() {
            None => return T::one(),
            Some(top) if s >= top.value => return T::one(),
            _ => {}
        }
        let psi = phi.unit_amplitudes();
        let mut acc = T::zero();
        for sp in self.spaces.iter().take_while(|sp| sp.value <= s) {
            acc += sp.weight(&psi);
        }
        acc.min(T::one()).max(T::zero())
    }

    /// `b(T)`: eigenvalues mapped through `b`, eigenspaces merged where the
    /// images agree within `tol`.
    pub fn borel_transform<F: Fn(T) -> T>(&self, b: F, tol: T) -> SpectralDecomposition<T> {
        let spaces = self
            .spaces
            .iter()
            .map(|s| Eigenspace {
                value: b(s.value),
                basis: s.basis.clone(),
            })
            .collect();
        Self::from_eigenspaces(self.dim, spaces, tol)
    }

    pub fn max_eigenvalue(&self) -> T {
        self.spaces.last().map(|s| s.value).unwrap_or_else(T::zero)
    }
}

/// Eigendecomposition with eigenvalues closer than `tol` merged.
pub fn spectral_decompose<T: Real>(
    a: &HermitianOperator<T>,
    tol: T,
) -> Result<SpectralDecomposition<T>> {
    let n = a.dim();
    let eig = SymmetricEigen::try_new(a.matrix().clone(), T::default_epsilon(), EIG_MAX_ITER)
        .ok_or(HvError::EigSolverFailure)?;
    let spaces = (0..n)
        .map(|k| Eigenspace {
            value: eig.eigenvalues[k],
            basis: eig.eigenvectors.columns(k, 1).into_owned(),
        })
        .collect();
    Ok(SpectralDecomposition::from_eigenspaces(n, spaces, tol))
}

/// An orthogonal projector together with an orthonormal basis of its range.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector<T: Real> {
    op: HermitianOperator<T>,
    range: DMatrix<C<T>>,
}

impl<T: Real> Projector<T> {
    /// Validates idempotence within [`PROJECTOR_TOL`].
    pub fn new(op: &HermitianOperator<T>) -> Result<Self> {
        let defect = op.idempotence_defect();
        if defect > T::tolerance(PROJECTOR_TOL) {
            return Err(HvError::NotProjector {
                defect: defect.as_f64(),
            });
        }
        let d = op.spectral()?;
        let half = T::lit(0.5);
        let cols: Vec<_> = d
            .spaces()
            .iter()
            .filter(|s| s.value > half)
            .flat_map(|s| s.basis.column_iter().map(|c| c.into_owned()))
            .collect();
        let range = if cols.is_empty() {
            DMatrix::zeros(op.dim(), 0)
        } else {
            DMatrix::from_columns(&cols)
        };
        Ok(Projector {
            op: op.clone(),
            range,
        })
    }

    pub fn from_range(range: DMatrix<C<T>>) -> Self {
        let op = HermitianOperator::from_trusted(&range * range.adjoint());
        Projector { op, range }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_range(DMatrix::identity(n, n))
    }

    pub fn zero(n: usize) -> Self {
        Self::from_range(DMatrix::zeros(n, 0))
    }

    pub fn op(&self) -> &HermitianOperator<T> {
        &self.op
    }

    pub fn range(&self) -> &DMatrix<C<T>> {
        &self.range
    }

    pub fn rank(&self) -> usize {
        self.range.ncols()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// Range basis of `I - E`.
    pub fn complement(&self) -> Self {
        let n = self.dim();
        let d = self.op.spectral().expect("projector decomposes");
        let half = T::lit(0.5);
        let cols: Vec<_> = d
            .spaces()
            .iter()
            .filter(|s| s.value <= half)
            .flat_map(|s| s.basis.column_iter().map(|c| c.into_owned()))
            .collect();
        if cols.is_empty() {
            Self::zero(n)
        } else {
            Self::from_range(DMatrix::from_columns(&cols))
        }
    }

    pub fn weight_of(&self, psi: &DVector<C<T>>) -> T {
        if self.range.ncols() == 0 {
            return T::zero();
        }
        (self.range.adjoint() * psi).norm_squared()
    }

    /// `<E>_φ`
    pub fn expect(&self, phi: &StateVector<T>) -> T {
        self.weight_of(&phi.unit_amplitudes())
    }

    pub fn eigenspace(&self, value: T) -> Eigenspace<T> {
        Eigenspace {
            value,
            basis: self.range.clone(),
        }
    }

    pub fn is_trivial(&self, tol: T) -> bool {
        let n = self.dim();
        self.op.max_distance(&HermitianOperator::zero(n)) <= tol
            || self.op.max_distance(&HermitianOperator::identity(n)) <= tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_hermitian, random_projector, random_state};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C<f64> {
        C::new(re, 0.0)
    }

    #[test]
    fn diag_decomposition() {
        let a = HermitianOperator::from_real_diag(&[1.0, 1.0, 2.0]);
        let d = a.spectral().unwrap();
        assert_eq!(d.eigenvalues(), vec![1.0, 2.0]);
        assert_eq!(d.multiplicities(), vec![2, 1]);
    }

    #[test]
    fn pauli_x_decomposition() {
        let d = HermitianOperator::<f64>::pauli_x().spectral().unwrap();
        let ev = d.eigenvalues();
        assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
        let id = HermitianOperator::<f64>::identity(2);
        let sx = HermitianOperator::<f64>::pauli_x();
        let minus = id.sub(&sx).scale(0.5);
        let plus = id.add(&sx).scale(0.5);
        assert!(d.projectors()[0].max_distance(&minus) < 1e-14);
        assert!(d.projectors()[1].max_distance(&plus) < 1e-14);
    }

    #[test]
    fn identity_decomposition() {
        let d = HermitianOperator::<f64>::identity(3).spectral().unwrap();
        assert_eq!(d.eigenvalues(), vec![1.0]);
        assert!(d.projectors()[0].max_distance(&HermitianOperator::identity(3)) < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian_and_symmetrizes_noise() {
        let m = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
        assert!(matches!(
            HermitianOperator::new(m),
            Err(HvError::NotHermitian { .. })
        ));
        let m = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0 + 1e-9), c(1.0), c(0.0)]);
        let a = HermitianOperator::new(m).unwrap();
        assert_eq!(a.matrix()[(0, 1)], a.matrix()[(1, 0)].conj());
    }

    #[test]
    fn expect_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let phi: StateVector<f64> = random_state(3, &mut rng);
        assert!((HermitianOperator::identity(3).expect(&phi).unwrap() - 1.0).abs() < 1e-15);
        let beta = 0.4f64;
        let phi_b = StateVector::from_amplitudes(&[c(beta.cos()), c(beta.sin())]).unwrap();
        let e0 = HermitianOperator::from_real_diag(&[1.0, 0.0]);
        assert!((e0.expect(&phi_b).unwrap() - beta.cos().powi(2)).abs() < 1e-15);
        let e1 = StateVector::<f64>::basis(2, 0);
        assert!((HermitianOperator::pauli_z().expect(&e1).unwrap() - 1.0).abs() < 1e-15);
        assert!(HermitianOperator::pauli_z().expect(&phi).is_err());
    }

    #[test]
    fn grad_expect_examples() {
        let sz = HermitianOperator::<f64>::pauli_z();
        let e1 = StateVector::basis(2, 0);
        assert!(sz.grad_expect(&e1).unwrap().amax() < 1e-15);
        let b = std::f64::consts::FRAC_PI_4;
        let phi = StateVector::from_amplitudes(&[c(b.cos()), c(b.sin())]).unwrap();
        let g = sz.grad_expect(&phi).unwrap();
        let s2 = 2f64.sqrt();
        let want = DVector::from_vec(vec![s2 * b.cos(), -s2 * b.sin(), 0.0, 0.0]);
        assert!((&g - want).amax() < 1e-15);
        assert!(g.dot(phi.coords()).abs() < 1e-15);
    }

    #[test]
    fn projector_gradient_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..500 {
            let n = rng.random_range(1..=6);
            let r = rng.random_range(0..=n);
            let e: HermitianOperator<f64> = random_projector(n, r, &mut rng);
            let phi = random_state(n, &mut rng);
            let g = e.grad_expect(&phi).unwrap();
            let m = e.expect(&phi).unwrap();
            assert!((g.norm_squared() - 2.0 * (m - m * m)).abs() < 1e-9);
            assert!(g.dot(phi.coords()).abs() < 1e-10);
        }
    }

    #[test]
    fn spectral_projector_examples() {
        let d = HermitianOperator::<f64>::pauli_z().spectral().unwrap();
        let e = d.spectral_projector(&BorelSet::point(1.0));
        assert!(e.max_distance(&HermitianOperator::from_real_diag(&[1.0, 0.0])) < 1e-15);
        assert!(
            d.spectral_projector(&BorelSet::empty())
                .max_distance(&HermitianOperator::zero(2))
                == 0.0
        );
        assert!(
            d.spectral_projector(&BorelSet::at_most(-2.0))
                .max_distance(&HermitianOperator::zero(2))
                == 0.0
        );
        assert!(
            d.spectral_projector(&BorelSet::all())
                .max_distance(&HermitianOperator::identity(2))
                < 1e-15
        );
    }

    #[test]
    fn cumulative_examples() {
        let d = HermitianOperator::<f64>::pauli_z().spectral().unwrap();
        let phi = StateVector::from_amplitudes(&[c(1.0), c(1.0)]).unwrap();
        assert!((d.cumulative(&phi, -1.0) - 0.5).abs() < 1e-15);
        assert_eq!(d.cumulative(&phi, 1.0), 1.0);
        assert_eq!(d.cumulative(&phi, -1.5), 0.0);
        let e2 = StateVector::basis(2, 1);
        assert_eq!(d.cumulative(&e2, -1.0), 1.0);
    }

    #[test]
    fn borel_transform_examples() {
        let d = HermitianOperator::<f64>::pauli_z().spectral().unwrap();
        let tol = DEFAULT_MERGE_TOL;
        assert_eq!(d.borel_transform(|x| x, tol), *d);
        let sq = d.borel_transform(|x| x * x, tol);
        assert_eq!(sq.eigenvalues(), vec![1.0]);
        assert!(sq.projectors()[0].max_distance(&HermitianOperator::identity(2)) < 1e-15);
        let ind = d.borel_transform(|x| if x == 1.0 { 1.0 } else { 0.0 }, tol);
        assert_eq!(ind.eigenvalues(), vec![0.0, 1.0]);
        assert!(
            ind.reconstruct()
                .max_distance(&HermitianOperator::from_real_diag(&[1.0, 0.0]))
                < 1e-15
        );
    }

    #[test]
    fn random_decompositions_reconstruct() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for trial in 0..1000 {
            let n = 1 + trial % 16;
            let a: HermitianOperator<f64> = random_hermitian(n, &mut rng);
            let d = a.spectral().unwrap();
            assert!(d.reconstruct().max_distance(&a) <= 1e-9);
            let ps = d.projectors();
            let mut sum = HermitianOperator::zero(n);
            for (i, p) in ps.iter().enumerate() {
                assert!(p.idempotence_defect() <= 1e-10);
                for q in &ps[i + 1..] {
                    let prod = p.matrix() * q.matrix();
                    assert!(max_abs(&prod) <= 1e-10);
                }
                sum = sum.add(p);
            }
            assert!(sum.max_distance(&HermitianOperator::identity(n)) <= 1e-10);
        }
    }

    #[test]
    fn expect_is_phase_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10_000 {
            let n = rng.random_range(1..=6);
            let a: HermitianOperator<f64> = random_hermitian(n, &mut rng);
            let phi = random_state(n, &mut rng);
            let th = rng.random_range(-4.0..4.0);
            let d = a.expect(&phi).unwrap() - a.expect(&phi.rotate(th)).unwrap();
            assert!(d.abs() <= 1e-12);
        }
    }

    #[test]
    fn borel_transform_is_functorial() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let n = rng.random_range(1..=6);
            let a: HermitianOperator<f64> = random_hermitian(n, &mut rng);
            let d = a.spectral().unwrap();
            let c_map = |x: f64| (x * 2.0).round();
            let b_map = |x: f64| x.abs() - 1.0;
            let tol = DEFAULT_MERGE_TOL;
            let lhs = d.borel_transform(|x| b_map(c_map(x)), tol);
            let rhs = d.borel_transform(c_map, tol).borel_transform(b_map, tol);
            assert_eq!(lhs.eigenvalues(), rhs.eigenvalues());
            assert_eq!(lhs.multiplicities(), rhs.multiplicities());
        }
    }

    #[test]
    fn real_matrix_commutes_with_j() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let a: HermitianOperator<f64> = random_hermitian(4, &mut rng);
        let r = a.real_matrix();
        let j: DMatrix<f64> = crate::realspace::ComplexSpace::new(4).j_matrix();
        assert!((&r * &j - &j * &r).amax() < 1e-14);
        assert!((&r - r.transpose()).amax() < 1e-14);
    }

    #[test]
    fn projector_validation() {
        let bad = HermitianOperator::<f64>::from_real_diag(&[0.5, 1.0]);
        assert!(matches!(
            Projector::new(&bad),
            Err(HvError::NotProjector { .. })
        ));
        let p =
            Projector::new(&HermitianOperator::<f64>::from_real_diag(&[1.0, 0.0, 1.0])).unwrap();
        assert_eq!(p.rank(), 2);
        assert_eq!(p.complement().rank(), 1);
    }
}
