//! Dense complex matrices and the Hermitian operator wrapper.
//!
//! Storage is row-major. Every product accumulates in a fixed order so that
//! results are reproducible bit-for-bit across runs.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral;

/// Dimension at or above which norms switch from the Jacobi oracle to
/// power iteration.
pub const ORACLE_DIM_LIMIT: usize = 256;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A square matrix of complex scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![ZERO; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// Builds a matrix from rows, rejecting ragged input and non-finite entries.
    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotSquare { row: i, len: row.len(), expected: n });
            }
            data.extend(row);
        }
        let m = Self { n, data };
        m.check_finite()?;
        Ok(m)
    }

    /// Builds a matrix from real rows.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.data.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            Some(k) => Err(Error::NonFinite { row: k / self.n, col: k % self.n }),
            None => Ok(()),
        }
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, alpha: Complex64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|&z| alpha * z).collect() }
    }

    pub fn scale_real(&self, alpha: f64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|&z| z * alpha).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        lincomb(ONE, self, ONE, other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        lincomb(ONE, self, -ONE, other)
    }

    /// `self += alpha * other`, in place.
    pub fn axpy(&mut self, alpha: Complex64, other: &Self) -> Result<()> {
        check_dims(self, other)?;
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
        Ok(())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        matmul(self, other)
    }

    pub fn matvec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { left: self.n, right: x.len() });
        }
        Ok((0..self.n)
            .map(|i| self.row(i).iter().zip(x).fold(ZERO, |acc, (&a, &b)| acc + a * b))
            .collect())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    /// The Hermitian part `(A + A*)/2`.
    pub fn hermitian_part(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            out[(i, i)] = Complex64::new(self[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let v = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
                out[(i, j)] = v;
                out[(j, i)] = v.conj();
            }
        }
        out
    }

    /// Frobenius norm of `A - A*`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// Frobenius norm of the anti-Hermitian part `(A - A*)/2`.
    pub fn anti_hermitian_norm(&self) -> f64 {
        0.5 * self.asymmetry()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

fn check_dims(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch { left: a.n, right: b.n });
    }
    Ok(())
}

/// Matrix product with i-k-j loop order; each output entry accumulates over
/// `k` in ascending order.
pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_dims(a, b)?;
    let n = a.n;
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..n {
        let out_row = &mut out.data[i * n..(i + 1) * n];
        for k in 0..n {
            let aik = a.data[i * n + k];
            if aik == ZERO {
                continue;
            }
            let b_row = &b.data[k * n..(k + 1) * n];
            for (o, &bkj) in out_row.iter_mut().zip(b_row) {
                *o += aik * bkj;
            }
        }
    }
    Ok(out)
}

/// `alpha * a + beta * b`, entrywise.
pub fn lincomb(
    alpha: Complex64,
    a: &ComplexMatrix,
    beta: Complex64,
    b: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    check_dims(a, b)?;
    Ok(ComplexMatrix {
        n: a.n,
        data: a.data.iter().zip(&b.data).map(|(&x, &y)| alpha * x + beta * y).collect(),
    })
}

/// A matrix equal to its own conjugate transpose, bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    mat: ComplexMatrix,
    asym_residual: f64,
}

/// Admits `raw` as a Hermitian operator.
///
/// The asymmetry `‖raw − raw*‖_F` must not exceed `admit_tol · ‖raw‖_F`; the
/// stored matrix is the average `(raw + raw*)/2`.
pub fn make_hermitian(raw: &ComplexMatrix, admit_tol: f64) -> Result<HermitianOperator> {
    raw.check_finite()?;
    let residual = raw.asymmetry();
    let bound = admit_tol * raw.frobenius_norm();
    if residual > bound {
        return Err(Error::AsymmetryTooLarge { residual, bound });
    }
    Ok(HermitianOperator { mat: raw.hermitian_part(), asym_residual: residual })
}

pub fn identity(n: usize) -> HermitianOperator {
    assert!(n >= 1, "identity dimension must be positive");
    HermitianOperator { mat: ComplexMatrix::identity(n), asym_residual: 0.0 }
}

impl HermitianOperator {
    /// Wraps a matrix that is Hermitian up to rounding, e.g. a product of
    /// commuting Hermitian factors. The asymmetry is recorded, never checked.
    pub fn symmetrize(raw: &ComplexMatrix) -> Self {
        Self { asym_residual: raw.asymmetry(), mat: raw.hermitian_part() }
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        Self { mat: ComplexMatrix::from_diag(diag), asym_residual: 0.0 }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn asym_residual(&self) -> f64 {
        self.asym_residual
    }

    pub fn n(&self) -> usize {
        self.mat.n
    }

    /// `alpha * self + beta * other` for real coefficients; stays Hermitian.
    pub fn lincomb(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        let m = lincomb(
            Complex64::new(alpha, 0.0),
            &self.mat,
            Complex64::new(beta, 0.0),
            &other.mat,
        )?;
        Ok(Self { mat: m, asym_residual: 0.0 })
    }

    /// `self + shift * I` for a real shift.
    pub fn shifted(&self, shift: f64) -> Self {
        let mut m = self.mat.clone();
        for i in 0..m.n {
            m[(i, i)] += shift;
        }
        Self { mat: m, asym_residual: 0.0 }
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self { mat: self.mat.scale_real(alpha), asym_residual: 0.0 }
    }
}

/// `⟨Lx, x⟩ = Σᵢⱼ conj(xᵢ) Lᵢⱼ xⱼ`, real for Hermitian `L`.
pub fn quadratic_form(l: &HermitianOperator, x: &[Complex64]) -> Result<f64> {
    let lx = l.mat.matvec(x)?;
    let form: Complex64 = x.iter().zip(&lx).fold(ZERO, |acc, (&xi, &yi)| acc + xi.conj() * yi);
    let x_norm_sqr: f64 = x.iter().map(|z| z.norm_sqr()).sum();
    // Frobenius norm stands in for ‖L‖; it is an upper bound.
    let bound = 1e-12 * l.mat.frobenius_norm() * x_norm_sqr;
    if form.im.abs() > bound {
        return Err(Error::NonRealForm { imag: form.im.abs(), bound });
    }
    Ok(form.re)
}

/// `‖L‖ = max |λᵢ|`.
pub fn operator_norm(l: &HermitianOperator) -> Result<f64> {
    if l.n() < ORACLE_DIM_LIMIT {
        let eig = spectral::eig_oracle(l)?;
        Ok(eig.eigenvalues.iter().fold(0.0_f64, |m, &v| m.max(v.abs())))
    } else {
        power_norm(l)
    }
}

/// Power iteration for `‖L‖` with a fixed starting vector. Iterates on `L²`
/// so that a `±λ` pair at the top of the spectrum cannot stall it.
pub fn power_norm(l: &HermitianOperator) -> Result<f64> {
    const MAX_ITER: usize = 20_000;
    let n = l.n();
    let mut x: Vec<Complex64> = (0..n)
        .map(|i| {
            let t = (i as f64 + 1.0) * 0.618_033_988_749_895;
            Complex64::new(1.0 + t.fract(), 0.5 * (2.0 * t).fract())
        })
        .collect();
    normalize(&mut x);
    let mut estimate = 0.0_f64;
    for _ in 0..MAX_ITER {
        let y = l.mat.matvec(&x)?;
        let mut z = l.mat.matvec(&y)?;
        let z_norm = normalize(&mut z);
        if z_norm == 0.0 {
            return Ok(0.0);
        }
        let next = z_norm.sqrt();
        let converged = (next - estimate).abs() <= 1e-12 * next;
        estimate = next;
        x = z;
        if converged {
            return Ok(estimate);
        }
    }
    Err(Error::ConvergenceFailure { what: "power iteration", iterations: MAX_ITER })
}

fn normalize(x: &mut [Complex64]) -> f64 {
    let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for z in x.iter_mut() {
            *z /= norm;
        }
    }
    norm
}

/// Spectral norm of an arbitrary square matrix, `sqrt(‖A*A‖)`.
pub fn spectral_norm(a: &ComplexMatrix) -> Result<f64> {
    let gram = matmul(&a.conj_transpose(), a)?;
    Ok(operator_norm(&HermitianOperator::symmetrize(&gram))?.sqrt())
}
