//! Resolvents, invertibility margins, the positivity constant and the
//! Jacobi eigensolver used as ground truth.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, HermitianOperator, ORACLE_DIM_LIMIT};

/// Pivots below this multiple of `‖L‖` mark a shift as spectral.
pub const PIVOT_THRESHOLD: f64 = 1e-13;

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_OFF_TOL: f64 = 1e-13;

/// Ascending eigenvalues with orthonormal eigenvectors stored as columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    /// `V · diag(f(λᵢ)) · V*`.
    pub fn reconstruct(&self, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let n = v.n();
        let fl: Vec<Complex64> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        ComplexMatrix::from_fn(n, |i, j| {
            (0..n).fold(Complex64::new(0.0, 0.0), |acc, k| acc + v[(i, k)] * fl[k] * v[(j, k)].conj())
        })
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    pub fn column(&self, k: usize) -> Vec<Complex64> {
        (0..self.eigenvectors.n()).map(|i| self.eigenvectors[(i, k)]).collect()
    }
}

/// Cyclic Jacobi eigensolver for Hermitian matrices.
///
/// Sweeps over the strict upper triangle in row order until the off-diagonal
/// Frobenius norm drops to `1e-13 · ‖L‖_F`.
pub fn eig_oracle(l: &HermitianOperator) -> Result<EigenDecomposition> {
    let mut a = l.matrix().clone();
    let n = a.n();
    let mut v = ComplexMatrix::identity(n);
    let target = JACOBI_OFF_TOL * a.frobenius_norm();

    let off_norm = |a: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += 2.0 * a[(i, j)].norm_sqr();
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while off_norm(&a) > target {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::ConvergenceFailure { what: "Jacobi eigensolver", iterations: sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let phase = apq / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta.is_finite() {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                } else {
                    0.0
                };
                if t == 0.0 {
                    // Off-diagonal entry is negligible next to the diagonal gap.
                    a[(p, q)] = Complex64::new(0.0, 0.0);
                    a[(q, p)] = Complex64::new(0.0, 0.0);
                    continue;
                }
                let cos = 1.0 / (t * t + 1.0).sqrt();
                let sin = t * cos;
                // U = [[c, s·e^{iφ}], [-s·e^{-iφ}, c]] acting on columns p, q.
                let upq = phase * sin;
                let uqp = -phase.conj() * sin;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * cos + akq * uqp;
                    a[(k, q)] = akp * upq + akq * cos;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * cos + aqk * uqp.conj();
                    a[(q, k)] = apk * upq.conj() + aqk * cos;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)] = Complex64::new(app - t * mag, 0.0);
                a[(q, q)] = Complex64::new(aqq + t * mag, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * cos + vkq * uqp;
                    v[(k, q)] = vkp * upq + vkq * cos;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps diagonal order among ties.
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, |i, k| v[(i, order[k])]);
    Ok(EigenDecomposition { eigenvalues, eigenvectors })
}

/// LU factors with partial pivoting, `P·A = L·U` packed in one matrix.
#[derive(Debug, Clone)]
pub struct LuFactors {
    lu: ComplexMatrix,
    perm: Vec<usize>,
}

impl LuFactors {
    /// Factors `a`, failing with `SingularShift` when a pivot magnitude does
    /// not exceed `threshold`.
    pub fn factor(a: &ComplexMatrix, threshold: f64, shift: Complex64) -> Result<Self> {
        let mut lu = a.clone();
        let n = lu.n();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (pivot_row, pivot_mag) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot_mag.is_nan() || pivot_mag <= threshold {
                return Err(Error::SingularShift { re: shift.re, im: shift.im });
            }
            if pivot_row != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(pivot_row, j)];
                    lu[(pivot_row, j)] = tmp;
                }
                perm.swap(k, pivot_row);
            }
            let inv_pivot = lu[(k, k)].inv();
            for i in (k + 1)..n {
                let factor = lu[(i, k)] * inv_pivot;
                lu[(i, k)] = factor;
                if factor == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in (k + 1)..n {
                    let ukj = lu[(k, j)];
                    lu[(i, j)] -= factor * ukj;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.lu.n();
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for (j, xj) in x[..i].iter().enumerate() {
                s -= self.lu[(i, j)] * xj;
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for (j, xj) in x.iter().enumerate().skip(i + 1) {
                s -= self.lu[(i, j)] * xj;
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }

    /// Solves against the identity, column block at once.
    pub fn inverse(&self) -> ComplexMatrix {
        let n = self.lu.n();
        let zero = Complex64::new(0.0, 0.0);
        // Row-major right-hand side: row i of P·I.
        let mut x = ComplexMatrix::zeros(n);
        for (i, &p) in self.perm.iter().enumerate() {
            x[(i, p)] = Complex64::new(1.0, 0.0);
        }
        for i in 0..n {
            for j in 0..i {
                let lij = self.lu[(i, j)];
                if lij == zero {
                    continue;
                }
                for k in 0..n {
                    let xjk = x[(j, k)];
                    x[(i, k)] -= lij * xjk;
                }
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let uij = self.lu[(i, j)];
                if uij == zero {
                    continue;
                }
                for k in 0..n {
                    let xjk = x[(j, k)];
                    x[(i, k)] -= uij * xjk;
                }
            }
            let inv = self.lu[(i, i)].inv();
            for k in 0..n {
                x[(i, k)] *= inv;
            }
        }
        x
    }

    pub fn min_pivot(&self) -> f64 {
        (0..self.lu.n()).map(|i| self.lu[(i, i)].norm()).fold(f64::INFINITY, f64::min)
    }
}

fn shifted(l: &HermitianOperator, lambda: Complex64) -> ComplexMatrix {
    let mut m = l.matrix().clone();
    for i in 0..m.n() {
        m[(i, i)] -= lambda;
    }
    m
}

// The Frobenius norm bounds ‖L‖ from above and costs O(n²).
fn pivot_threshold(l: &HermitianOperator) -> f64 {
    PIVOT_THRESHOLD * l.matrix().frobenius_norm()
}

/// Factors `L − λI` with the spectral pivot test applied.
pub fn factor_shifted(l: &HermitianOperator, lambda: Complex64) -> Result<LuFactors> {
    LuFactors::factor(&shifted(l, lambda), pivot_threshold(l), lambda)
}

/// `R(λ) = (L − λI)⁻¹` by pivoted LU against the identity.
pub fn resolvent(l: &HermitianOperator, lambda: Complex64) -> Result<ComplexMatrix> {
    Ok(factor_shifted(l, lambda)?.inverse())
}

pub fn is_regular_value(l: &HermitianOperator, lambda: Complex64) -> bool {
    factor_shifted(l, lambda).is_ok()
}

/// `‖L⁻¹‖`, which is `1/min|λᵢ|` for Hermitian `L`.
pub fn inverse_norm(l: &HermitianOperator) -> Result<f64> {
    let lu = factor_shifted(l, Complex64::new(0.0, 0.0))?;
    if l.n() < ORACLE_DIM_LIMIT {
        let eig = eig_oracle(l)?;
        inverse_norm_from(&eig)
    } else {
        inverse_power_norm(&lu)
    }
}

fn inverse_norm_from(eig: &EigenDecomposition) -> Result<f64> {
    let smallest = eig.eigenvalues.iter().fold(f64::INFINITY, |m, &v| m.min(v.abs()));
    if smallest == 0.0 {
        return Err(Error::SingularShift { re: 0.0, im: 0.0 });
    }
    Ok(1.0 / smallest)
}

/// Inverse power iteration for `‖L⁻¹‖` on an existing factorization.
pub fn inverse_power_norm(lu: &LuFactors) -> Result<f64> {
    const MAX_ITER: usize = 20_000;
    let n = lu.lu.n();
    let mut x: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + ((i as f64 + 1.0) * 0.754_877_666).fract(), 0.25))
        .collect();
    let mut estimate = 0.0_f64;
    for _ in 0..MAX_ITER {
        let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        x.iter_mut().for_each(|z| *z /= norm);
        let y = lu.solve(&x);
        let z = lu.solve(&y);
        let next = z.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt().sqrt();
        let converged = (next - estimate).abs() <= 1e-12 * next;
        estimate = next;
        x = z;
        if converged {
            return Ok(estimate);
        }
    }
    Err(Error::ConvergenceFailure { what: "inverse power iteration", iterations: MAX_ITER })
}

/// Positivity test by Cholesky factorization: every pivot must be positive.
pub fn cholesky_positive(l: &HermitianOperator) -> bool {
    let n = l.n();
    let a = l.matrix();
    let mut g = ComplexMatrix::zeros(n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= g[(j, k)].norm_sqr();
        }
        if d.is_nan() || d <= 0.0 {
            return false;
        }
        let djj = d.sqrt();
        g[(j, j)] = Complex64::new(djj, 0.0);
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= g[(i, k)] * g[(j, k)].conj();
            }
            g[(i, j)] = s / djj;
        }
    }
    true
}

/// The positivity constant `c = (1/‖L⁻¹‖)² / ‖L‖`.
///
/// Guarantees `inf_{‖x‖=1} ⟨Lx, x⟩ ≥ c` for a positive isomorphism, via
/// `‖Lx‖² ≤ ‖L‖·⟨Lx, x⟩`. Positivity itself is established by Cholesky.
pub fn positivity_bound_c(l: &HermitianOperator) -> Result<f64> {
    let inv = inverse_norm(l)?;
    let norm = crate::matrix::operator_norm(l)?;
    positivity_constant(l, norm, inv)
}

fn positivity_constant(l: &HermitianOperator, norm: f64, inv_norm: f64) -> Result<f64> {
    if !cholesky_positive(l) {
        return Err(Error::NotPositive("Cholesky factorization found a non-positive pivot".into()));
    }
    let c1 = (1.0 / inv_norm).powi(2);
    let c = c1 / norm;
    if c.is_nan() || c <= 0.0 {
        return Err(Error::NotPositive(format!("positivity bound c = {c:e}")));
    }
    Ok(c)
}

/// `(m, M)`: the extremes of the Rayleigh quotient, i.e. of the spectrum.
pub fn rayleigh_interval(l: &HermitianOperator) -> Result<(f64, f64)> {
    let eig = eig_oracle(l)?;
    Ok((eig.min(), eig.max()))
}

/// Bounds certifying that `L` is a positive isomorphism.
#[derive(Debug, Clone, PartialEq)]
pub struct PositivityCertificate {
    pub norm_l: f64,
    pub inv_norm: f64,
    pub c_bound: f64,
    pub rayleigh_min: f64,
    pub rayleigh_max: f64,
}

impl PositivityCertificate {
    /// The exact floor `1/‖L⁻¹‖`, which equals `rayleigh_min` for positive `L`.
    pub fn sharp_floor(&self) -> f64 {
        1.0 / self.inv_norm
    }
}

/// Computes every certificate field from a single eigendecomposition.
pub fn certify(l: &HermitianOperator) -> Result<PositivityCertificate> {
    factor_shifted(l, Complex64::new(0.0, 0.0))?;
    let eig = eig_oracle(l)?;
    let norm_l = eig.eigenvalues.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
    let inv_norm = inverse_norm_from(&eig)?;
    let c_bound = positivity_constant(l, norm_l, inv_norm)?;
    let cert = PositivityCertificate {
        norm_l,
        inv_norm,
        c_bound,
        rayleigh_min: eig.min(),
        rayleigh_max: eig.max(),
    };
    if cert.rayleigh_min.is_nan() || cert.rayleigh_min <= 0.0 {
        return Err(Error::NotPositive(format!("minimum eigenvalue {:e}", cert.rayleigh_min)));
    }
    Ok(cert)
}
