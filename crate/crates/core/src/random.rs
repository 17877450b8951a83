//! Seeded random instances for property batteries and scenario generation.
//!
//! Channels are built by dilation: a Haar-random isometry `V: C^d -> C^d ⊗ C^r`
//! is cut into `r` blocks `M_k`, so `Σ M_k^† M_k = V^† V = I` exactly up to
//! rounding.

use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channel::{DensityMatrix, KrausKind, KrausMap};
use crate::classical::{Distribution, StochasticMatrix};
use crate::linalg::{c, CMatrix, Hermitian};
use crate::scalar::Real;

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    let x: f64 = rng.sample(StandardNormal);
    T::lit(x)
}

/// Complex Ginibre matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<T: Real, R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix<T> {
    let half = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    DMatrix::from_fn(rows, cols, |_, _| Complex::new(gaussian::<T, _>(rng) * half, gaussian::<T, _>(rng) * half))
}

/// Haar-random isometry with `rows >= cols` (orthonormal columns).
pub fn random_isometry<T: Real, R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix<T> {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let g = ginibre::<T, _>(rng, rows, cols);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    // fix the phases of diag(R) so the distribution is Haar
    for j in 0..cols {
        let d = r[(j, j)];
        let n = d.norm_sqr().sqrt();
        if n > T::zero() {
            let phase = d / c(n);
            let mut col = q.column_mut(j);
            col *= phase;
        }
    }
    q
}

pub fn random_unitary<T: Real, R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix<T> {
    random_isometry(rng, dim, dim)
}

pub fn random_hermitian<T: Real, R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Hermitian<T> {
    Hermitian::symmetrize(ginibre::<T, _>(rng, dim, dim))
}

/// Unit vector drawn uniformly from the complex sphere.
pub fn random_pure_vector<T: Real, R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DVector<Complex<T>> {
    let g = ginibre::<T, _>(rng, dim, 1);
    let v = DVector::from_iterator(dim, g.iter().copied());
    let n = v.norm();
    v / c(n)
}

/// PSD matrix of exact rank `rank` (Wishart with `rank` columns).
pub fn random_psd_with_rank<T: Real, R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> Hermitian<T> {
    let g = ginibre::<T, _>(rng, dim, rank);
    Hermitian::symmetrize(&g * g.adjoint())
}

/// Hermitian matrix `U diag(λ) U^†` with eigenvalues uniform in `[lo, hi]`.
pub fn random_hermitian_in<T: Real, R: Rng + ?Sized>(rng: &mut R, dim: usize, lo: f64, hi: f64) -> Hermitian<T> {
    let u = random_unitary::<T, _>(rng, dim);
    let eig: Vec<T> = (0..dim).map(|_| T::lit(rng.random_range(lo..=hi))).collect();
    Hermitian::from_real_diagonal(&eig).congruence(&u)
}

/// Full-rank density matrix from the Hilbert-Schmidt ensemble.
pub fn random_state<T: Real, R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityMatrix<T> {
    let w = random_psd_with_rank::<T, _>(rng, dim, dim);
    DensityMatrix::normalized(w)
}

/// Full-rank state projected onto a random `rank`-dimensional subspace.
pub fn random_state_with_rank<T: Real, R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> DensityMatrix<T> {
    let full = random_psd_with_rank::<T, _>(rng, dim, dim);
    if rank >= dim {
        return DensityMatrix::normalized(full);
    }
    let basis = random_isometry::<T, _>(rng, dim, rank);
    let proj = &basis * basis.adjoint();
    DensityMatrix::normalized(full.congruence(&proj))
}

/// Diagonal full-rank state with entries drawn from a flat Dirichlet.
pub fn random_diagonal_state<T: Real, R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityMatrix<T> {
    let d = random_distribution::<T, _>(rng, dim);
    DensityMatrix::normalized(Hermitian::from_real_diagonal(d.as_slice()))
}

/// Random CPTP map with `kraus_rank` Kraus operators via a Haar isometry.
pub fn random_channel<T: Real, R: Rng + ?Sized>(rng: &mut R, dim: usize, kraus_rank: usize) -> KrausMap<T> {
    let v = random_isometry::<T, _>(rng, dim * kraus_rank, dim);
    let ops = (0..kraus_rank).map(|k| v.rows(k * dim, dim).into_owned()).collect();
    KrausMap::from_parts(ops, KrausKind::TracePreserving)
}

/// Kraus family with `Σ M_k^† M_k = I` and `count` members (same construction
/// as [`random_channel`]).
pub fn random_kraus_family<T: Real, R: Rng + ?Sized>(rng: &mut R, dim: usize, count: usize) -> Vec<CMatrix<T>> {
    random_channel::<T, _>(rng, dim, count).operators().to_vec()
}

/// Probability vector with i.i.d. exponential weights (flat Dirichlet).
pub fn random_distribution<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize) -> Distribution<T> {
    let w: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = w.iter().sum();
    let v: Vec<T> = w.iter().map(|x| T::lit(x / s)).collect();
    Distribution::normalized(v)
}

/// Row-normalized matrix of positive uniform entries.
pub fn random_stochastic<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize) -> StochasticMatrix<T> {
    let raw: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.random::<f64>() + 1e-3).collect()).collect();
    let m = DMatrix::from_fn(n, n, |i, j| {
        let s: f64 = raw[i].iter().sum();
        T::lit(raw[i][j] / s)
    });
    StochasticMatrix::normalized(m)
}

/// Stochastic matrix with some exact zeros, so that downstream
/// distributions can lose support.
pub fn random_sparse_stochastic<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize) -> StochasticMatrix<T> {
    let m = DMatrix::from_fn(n, n, |_, _| if rng.random_bool(0.4) { 0.0 } else { rng.random::<f64>() });
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut row: Vec<f64> = m.row(i).iter().copied().collect();
        if row.iter().all(|&x| x == 0.0) {
            row[rng.random_range(0..n)] = 1.0;
        }
        let s: f64 = row.iter().sum();
        rows.push(row.into_iter().map(|x| x / s).collect::<Vec<_>>());
    }
    StochasticMatrix::normalized(DMatrix::from_fn(n, n, |i, j| T::lit(rows[i][j])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::spectral_norm;

    #[test]
    fn isometry_is_isometric() {
        let mut r = rng(3);
        for (rows, cols) in [(2, 2), (6, 3), (12, 4)] {
            let v = random_isometry::<f64, _>(&mut r, rows, cols);
            let e = v.adjoint() * &v - CMatrix::identity(cols, cols);
            assert!(spectral_norm(&e) < 1e-13);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = random_channel::<f64, _>(&mut rng(17), 3, 2);
        let b = random_channel::<f64, _>(&mut rng(17), 3, 2);
        assert_eq!(a.operators(), b.operators());
    }

    #[test]
    fn rank_reduced_state_has_requested_rank() {
        let t = crate::Tolerances::default();
        let mut r = rng(8);
        for d in 2..=6 {
            for k in 1..=d {
                let s = random_state_with_rank::<f64, _>(&mut r, d, k);
                assert_eq!(crate::linalg::spectral_decompose(s.as_hermitian()).rank(&t), k);
                assert!((s.as_hermitian().trace() - 1.0).abs() < 1e-13);
            }
        }
    }
}
