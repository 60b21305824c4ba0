//! Seeded random operators: Hermitian directions, unitaries and positive
//! definite matrices with a prescribed spectrum.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::matrix::{matmul, operator_norm, ComplexMatrix, HermitianOperator};

/// A standard complex normal scalar.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

/// Hermitian part of a matrix with i.i.d. standard complex normal entries.
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> HermitianOperator {
    let g = ComplexMatrix::from_fn(n, |_, _| complex_normal(rng));
    HermitianOperator::symmetrize(&g)
}

/// A random Hermitian direction rescaled to operator norm `norm`.
pub fn scaled_hermitian_direction<R: Rng + ?Sized>(
    n: usize,
    norm: f64,
    rng: &mut R,
) -> Result<HermitianOperator> {
    let h = random_hermitian(n, rng);
    let current = operator_norm(&h)?;
    Ok(h.scaled(norm / current))
}

/// Unitary matrix from Gram-Schmidt (applied twice) on complex normal columns.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|_| (0..n).map(|_| complex_normal(rng)).collect()).collect();
    for k in 0..n {
        for _ in 0..2 {
            for j in 0..k {
                let proj: Complex64 = cols[j].iter().zip(&cols[k]).map(|(q, v)| q.conj() * v).sum();
                let qj = cols[j].clone();
                for (v, q) in cols[k].iter_mut().zip(&qj) {
                    *v -= proj * q;
                }
            }
        }
        let norm = cols[k].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols[k].iter_mut().for_each(|z| *z /= norm);
    }
    ComplexMatrix::from_fn(n, |i, j| cols[j][i])
}

/// `Q · diag(spectrum) · Q*` for a seeded random unitary `Q`.
pub fn with_spectrum(spectrum: &[f64], seed: u64) -> HermitianOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = random_unitary(spectrum.len(), &mut rng);
    conjugate_diag(&q, spectrum)
}

pub(crate) fn conjugate_diag(q: &ComplexMatrix, spectrum: &[f64]) -> HermitianOperator {
    let d = ComplexMatrix::from_diag(spectrum);
    let m = matmul(&matmul(q, &d).expect("square"), &q.conj_transpose()).expect("square");
    HermitianOperator::symmetrize(&m)
}

/// Geometrically spaced spectrum on `[1/cond, 1]`, including both ends.
pub fn geometric_spectrum(n: usize, cond: f64) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n).map(|i| cond.powf(-(i as f64) / (n as f64 - 1.0))).collect()
}

/// Seeded positive definite matrix with `‖L‖ = 1` and condition number `cond`.
pub fn random_pd(n: usize, cond: f64, seed: u64) -> HermitianOperator {
    with_spectrum(&geometric_spectrum(n, cond), seed)
}
