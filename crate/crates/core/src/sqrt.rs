//! The principal square-root branch and three ways to compute `L^{1/2}`:
//! contour quadrature of `γ(λ)(L − λI)⁻¹`, the fixed-point iteration
//! `Rₙ₊₁ = Rₙ + (L − Rₙ²)/2`, and the eigendecomposition oracle.

use std::fmt;

use num_complex::Complex64;

use crate::contour::{
    grading_density, integrate_fcalc, make_sqrt_contour, Contour, ContourVariant, QuadratureOptions,
    QuadratureReport, ScalarFn,
};
use crate::error::{Error, Result};
use crate::matrix::{lincomb, matmul, operator_norm, ComplexMatrix, HermitianOperator};
use crate::spectral::{certify, eig_oracle, PositivityCertificate};

/// Largest anti-Hermitian residue tolerated in a contour result before it is
/// symmetrized, relative to the result's norm.
pub const MAX_RAW_ASYMMETRY: f64 = 1e-10;

/// Eigenvalues above `−CLAMP · ‖L‖` count as nonnegative.
pub const NEGATIVE_CLAMP: f64 = 1e-12;

pub const DEFAULT_KREYSZIG_TOL: f64 = 1e-10;
pub const DEFAULT_KREYSZIG_MAX_ITER: usize = 10_000;

/// The principal branch `γ(λ) = |λ|^{1/2} e^{i Arg(λ)/2}` on `Re λ > 0`.
///
/// Uses `s = sqrt((|λ| + Re λ)/2)`, `γ = s + i·Im λ/(2s)`, which is exactly
/// odd in `Im λ` and hence satisfies `γ(conj λ) = conj γ(λ)` bit for bit.
pub fn gamma(lambda: Complex64) -> Result<Complex64> {
    if lambda.re.is_nan() || lambda.re <= 0.0 || !lambda.im.is_finite() {
        return Err(Error::OutsideDomain(lambda));
    }
    Ok(gamma_unchecked(lambda))
}

/// [`gamma`] without the domain check, for use as a quadrature integrand on
/// contours already known to lie in the right half-plane.
#[inline]
pub fn gamma_unchecked(lambda: Complex64) -> Complex64 {
    let s = ((lambda.re.hypot(lambda.im) + lambda.re) * 0.5).sqrt();
    Complex64::new(s, lambda.im / (2.0 * s))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SqrtMethod {
    Contour,
    Kreyszig,
    Oracle,
}

impl SqrtMethod {
    pub const ALL: [SqrtMethod; 3] = [SqrtMethod::Contour, SqrtMethod::Kreyszig, SqrtMethod::Oracle];

    pub fn name(self) -> &'static str {
        match self {
            SqrtMethod::Contour => "contour",
            SqrtMethod::Kreyszig => "kreyszig",
            SqrtMethod::Oracle => "oracle",
        }
    }
}

impl fmt::Display for SqrtMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A computed square root with its diagnostics.
#[derive(Debug, Clone)]
pub struct SqrtResult {
    pub root: HermitianOperator,
    pub method: SqrtMethod,
    /// `‖R² − L‖ / ‖L‖` in operator norm.
    pub residual: f64,
    /// Smallest eigenvalue of `R`.
    pub positivity_floor: f64,
    /// Contour method only: quadrature diagnostics.
    pub quadrature: Option<QuadratureReport>,
    /// Contour method only: `‖(A − A*)/2‖_F / ‖A‖_F` of the raw quadrature output.
    pub raw_asymmetry: Option<f64>,
    /// Kreyszig method only: iterations used.
    pub iterations: Option<usize>,
}

/// Lower end of the spectral enclosure used to place the square-root contour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ContourFloor {
    /// `1/‖L⁻¹‖`, which equals the smallest eigenvalue of a positive `L`.
    #[default]
    InverseNorm,
    /// The positivity constant `c = (1/‖L⁻¹‖)²/‖L‖`.
    PositivityConstant,
}

impl ContourFloor {
    pub fn value(self, cert: &PositivityCertificate) -> f64 {
        match self {
            ContourFloor::InverseNorm => cert.sharp_floor().min(cert.norm_l),
            ContourFloor::PositivityConstant => cert.c_bound,
        }
    }
}

/// Settings for contour evaluations of functions of a certified operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourSettings {
    pub tol: f64,
    pub n0: usize,
    pub n_max: usize,
    pub floor: ContourFloor,
    pub variant: ContourVariant,
    /// Pack nodes toward the real-axis crossings (see [`grading_density`]).
    pub graded: bool,
}

impl Default for ContourSettings {
    fn default() -> Self {
        let q = QuadratureOptions::default();
        Self {
            tol: q.tol,
            n0: q.n0,
            n_max: q.n_max,
            floor: ContourFloor::default(),
            variant: ContourVariant::Tight,
            graded: true,
        }
    }
}

impl ContourSettings {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    /// Contour and quadrature options for a certified operator.
    ///
    /// The stopping tolerance is raised to the rounding floor
    /// `ε · ‖L‖ / dist(Γ, σ(L))` of the resolvent solves when that is larger;
    /// below it successive levels differ by noise only.
    pub fn plan(&self, cert: &PositivityCertificate) -> Result<(Contour, QuadratureOptions)> {
        let floor = self.floor.value(cert);
        let gamma = make_sqrt_contour(floor, cert.norm_l, self.variant)?;
        let density = if self.graded { grading_density(&gamma, floor, cert.norm_l) } else { 1.0 };
        let dist = (cert.sharp_floor() - gamma.left()).min(gamma.right() - cert.norm_l);
        let tol = self.tol.max(f64::EPSILON * cert.norm_l / dist);
        Ok((gamma, QuadratureOptions { tol, n0: self.n0, n_max: self.n_max, density }))
    }
}

/// `f(L)` by contour quadrature on the square-root contour of `L`.
pub fn contour_calculus(
    l: &HermitianOperator,
    f: &ScalarFn,
    settings: &ContourSettings,
) -> Result<(ComplexMatrix, QuadratureReport)> {
    let cert = certify(l)?;
    let (gamma, opts) = settings.plan(&cert)?;
    integrate_fcalc(f, l, &gamma, &opts)
}

fn relative_residual(root: &HermitianOperator, l: &HermitianOperator) -> Result<f64> {
    let sq = matmul(root.matrix(), root.matrix())?;
    let diff = HermitianOperator::symmetrize(&sq.sub(l.matrix())?);
    let norm = operator_norm(l)?;
    let d = operator_norm(&diff)?;
    Ok(if norm > 0.0 { d / norm } else { d })
}

fn finish(
    root: HermitianOperator,
    method: SqrtMethod,
    l: &HermitianOperator,
) -> Result<SqrtResult> {
    let residual = relative_residual(&root, l)?;
    let positivity_floor = eig_oracle(&root)?.min();
    Ok(SqrtResult {
        root,
        method,
        residual,
        positivity_floor,
        quadrature: None,
        raw_asymmetry: None,
        iterations: None,
    })
}

/// `L^{1/2} = γ(L)` by contour quadrature on the tight circle.
pub fn sqrt_contour(l: &HermitianOperator, tol: f64) -> Result<SqrtResult> {
    sqrt_contour_with(l, &ContourSettings::with_tol(tol))
}

pub fn sqrt_contour_with(l: &HermitianOperator, settings: &ContourSettings) -> Result<SqrtResult> {
    let (raw, report) = contour_calculus(l, &gamma_unchecked, settings)?;
    let size = raw.frobenius_norm();
    let residue = raw.anti_hermitian_norm();
    let bound = MAX_RAW_ASYMMETRY * size;
    if residue > bound {
        return Err(Error::AsymmetricResult { residue, bound });
    }
    let root = HermitianOperator::symmetrize(&raw);
    let mut out = finish(root, SqrtMethod::Contour, l)?;
    out.raw_asymmetry = Some(if size > 0.0 { residue / size } else { 0.0 });
    out.quadrature = Some(report);
    Ok(out)
}

/// The fixed-point iteration `Rₙ₊₁ = Rₙ + (A − Rₙ²)/2`, `R₀ = 0`, applied to
/// `A` as given. Stops when `‖Rₙ₊₁ − Rₙ‖_F ≤ tol`.
pub fn kreyszig_iterate(a: &HermitianOperator, tol: f64, max_iter: usize) -> Result<(HermitianOperator, usize)> {
    let n = a.n();
    let half = Complex64::new(0.5, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let mut r = ComplexMatrix::zeros(n);
    for iter in 1..=max_iter {
        let sq = matmul(&r, &r)?;
        let step = lincomb(half, a.matrix(), -half, &sq)?;
        let next = lincomb(one, &r, one, &step)?.hermitian_part();
        let change = step.frobenius_norm();
        if !change.is_finite() {
            break;
        }
        r = next;
        if change <= tol {
            return Ok((HermitianOperator::symmetrize(&r), iter));
        }
    }
    Err(Error::ConvergenceFailure { what: "fixed-point square-root iteration", iterations: max_iter })
}

/// `L^{1/2}` by the fixed-point iteration on `A = L/‖L‖`, rescaled by `√‖L‖`.
///
/// The iteration converges only when the spectrum of `A` lies in `[0, 1]`
/// (unscaled, the fixed point repels once an eigenvalue exceeds 4). The
/// rate is linear and degrades as the smallest eigenvalue of `A` shrinks.
pub fn sqrt_kreyszig(l: &HermitianOperator, tol: f64, max_iter: usize) -> Result<SqrtResult> {
    let eig = eig_oracle(l)?;
    let norm = eig.eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if eig.min() < -NEGATIVE_CLAMP * norm {
        return Err(Error::NegativeSpectrum { min: eig.min() });
    }
    if norm == 0.0 {
        return finish(l.clone(), SqrtMethod::Kreyszig, l);
    }
    let a = l.scaled(1.0 / norm);
    let (r, iterations) = kreyszig_iterate(&a, tol, max_iter).map_err(|e| match e {
        Error::ConvergenceFailure { iterations, .. } => Error::ConvergenceFailure {
            what: "fixed-point square-root iteration (iteration cap reached)",
            iterations,
        },
        other => other,
    })?;
    let mut out = finish(r.scaled(norm.sqrt()), SqrtMethod::Kreyszig, l)?;
    out.iterations = Some(iterations);
    Ok(out)
}

/// `V · diag(√λᵢ) · V*` from the Jacobi eigendecomposition.
pub fn sqrt_oracle(l: &HermitianOperator) -> Result<SqrtResult> {
    let eig = eig_oracle(l)?;
    let norm = eig.eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if eig.min() < -NEGATIVE_CLAMP * norm {
        return Err(Error::NegativeSpectrum { min: eig.min() });
    }
    let root = eig.reconstruct(|x| Complex64::new(x.max(0.0).sqrt(), 0.0));
    finish(HermitianOperator::symmetrize(&root), SqrtMethod::Oracle, l)
}

pub fn sqrt_by(method: SqrtMethod, l: &HermitianOperator, tol: f64) -> Result<SqrtResult> {
    match method {
        SqrtMethod::Contour => sqrt_contour(l, tol),
        SqrtMethod::Kreyszig => sqrt_kreyszig(l, tol, DEFAULT_KREYSZIG_MAX_ITER),
        SqrtMethod::Oracle => sqrt_oracle(l),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolyRoute {
    /// Horner evaluation in `L`.
    Direct,
    /// Contour quadrature of the scalar polynomial.
    Contour,
}

fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

/// `Σ aₖ Lᵏ` for `coeffs = [a₀, a₁, …]`.
pub fn poly_calculus(l: &HermitianOperator, coeffs: &[Complex64], via: PolyRoute) -> Result<ComplexMatrix> {
    poly_calculus_with(l, coeffs, via, &ContourSettings::default())
}

pub fn poly_calculus_with(
    l: &HermitianOperator,
    coeffs: &[Complex64],
    via: PolyRoute,
    settings: &ContourSettings,
) -> Result<ComplexMatrix> {
    match via {
        PolyRoute::Direct => {
            let n = l.n();
            let mut acc = ComplexMatrix::zeros(n);
            for &a in coeffs.iter().rev() {
                acc = matmul(&acc, l.matrix())?;
                for i in 0..n {
                    acc[(i, i)] += a;
                }
            }
            Ok(acc)
        }
        PolyRoute::Contour => {
            let f = |z: Complex64| horner(coeffs, z);
            Ok(contour_calculus(l, &f, settings)?.0)
        }
    }
}

/// `L ↦ L²`, re-certified Hermitian.
pub fn square_map(l: &HermitianOperator) -> HermitianOperator {
    HermitianOperator::symmetrize(&matmul(l.matrix(), l.matrix()).expect("square operands"))
}

/// Outcome of comparing `σ(f(L))` with `f(σ(L))`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMappingReport {
    /// Eigenvalues of `f(L)`, ascending.
    pub spectrum_of_image: Vec<f64>,
    /// `f(λᵢ)` sorted by real part.
    pub image_of_spectrum: Vec<Complex64>,
    pub max_pairing_distance: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Greedy nearest-pair matching after sorting both sides by real part.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let mut a: Vec<Complex64> = a.to_vec();
    let mut left: Vec<Complex64> = b.to_vec();
    a.sort_by(|x, y| x.re.total_cmp(&y.re));
    left.sort_by(|x, y| x.re.total_cmp(&y.re));
    if a.len() != left.len() {
        return f64::INFINITY;
    }
    let mut worst = 0.0_f64;
    for z in a {
        let (k, d) = left
            .iter()
            .enumerate()
            .map(|(k, w)| (k, (z - w).norm()))
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
        worst = worst.max(d);
        left.remove(k);
    }
    worst
}

/// Checks `σ(f(L)) = f(σ(L))` for a conjugate-symmetric `f`.
pub fn spectral_mapping_check(l: &HermitianOperator, f: &ScalarFn) -> Result<SpectralMappingReport> {
    spectral_mapping_check_with(l, f, &ContourSettings::default())
}

pub fn spectral_mapping_check_with(
    l: &HermitianOperator,
    f: &ScalarFn,
    settings: &ContourSettings,
) -> Result<SpectralMappingReport> {
    let (fl, _) = contour_calculus(l, f, settings)?;
    let fl = HermitianOperator::symmetrize(&fl);
    let image_eig = eig_oracle(&fl)?;
    let mut image_of_spectrum: Vec<Complex64> =
        eig_oracle(l)?.eigenvalues.iter().map(|&x| f(Complex64::new(x, 0.0))).collect();
    image_of_spectrum.sort_by(|x, y| x.re.total_cmp(&y.re));
    let lhs: Vec<Complex64> = image_eig.eigenvalues.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let max_pairing_distance = multiset_distance(&lhs, &image_of_spectrum);
    let norm = image_eig.eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let tolerance = 1e-8 * norm;
    Ok(SpectralMappingReport {
        spectrum_of_image: image_eig.eigenvalues,
        image_of_spectrum,
        max_pairing_distance,
        tolerance,
        passed: max_pairing_distance <= tolerance,
    })
}

/// `‖f(L)·g(L) − h(L)‖ / ‖L‖` with `f = g = γ` and `h(λ) = λ`, each factor
/// evaluated on a different contour.
pub fn product_rule_residual(l: &HermitianOperator, tol: f64) -> Result<f64> {
    let tight = ContourSettings { tol, variant: ContourVariant::Tight, ..Default::default() };
    let robust = ContourSettings { tol, variant: ContourVariant::Robust, ..Default::default() };
    let (f_l, _) = contour_calculus(l, &gamma_unchecked, &tight)?;
    let (g_l, _) = contour_calculus(l, &gamma_unchecked, &robust)?;
    let (h_l, _) = contour_calculus(l, &|z| z, &tight)?;
    let diff = matmul(&f_l, &g_l)?.sub(&h_l)?;
    Ok(crate::matrix::spectral_norm(&diff)? / operator_norm(l)?)
}

/// `‖S·R − R·S‖ / (‖S‖·‖R‖)`.
pub fn commutator_residual(s: &ComplexMatrix, r: &ComplexMatrix) -> Result<f64> {
    let comm = matmul(s, r)?.sub(&matmul(r, s)?)?;
    let scale = crate::matrix::spectral_norm(s)? * crate::matrix::spectral_norm(r)?;
    let c = crate::matrix::spectral_norm(&comm)?;
    Ok(if scale > 0.0 { c / scale } else { c })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{identity, make_hermitian, spectral_norm};
    use crate::random::{random_pd, with_spectrum};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn diag(d: &[f64]) -> HermitianOperator {
        HermitianOperator::from_real_diag(d)
    }

    fn op_dist(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
        spectral_norm(&a.sub(b).unwrap()).unwrap()
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma(c(4.0, 0.0)).unwrap(), c(2.0, 0.0));
        assert!(matches!(gamma(c(0.0, 1.0)), Err(Error::OutsideDomain(_))));
        assert!(matches!(gamma(c(-1.0, 0.5)), Err(Error::OutsideDomain(_))));
        let z = gamma(c(3.0, 4.0)).unwrap();
        assert!((z - c(2.0, 1.0)).norm() < 1e-15);
        assert!((z * z - c(3.0, 4.0)).norm() < 1e-15);
    }

    #[test]
    fn gamma_branch_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10_000 {
            let re = 10f64.powf(rng.random_range(-6.0..3.0));
            let im = rng.random_range(-1.0..1.0) * 10f64.powf(rng.random_range(-6.0..3.0));
            let z = c(re, im);
            let g = gamma(z).unwrap();
            assert!((g * g - z).norm() <= 1e-15 * z.norm(), "{z}");
            assert_eq!(gamma(z.conj()).unwrap(), g.conj());
            assert!(g.re > 0.0);
        }
    }

    #[test]
    fn contour_root_examples() {
        let r = sqrt_contour(&identity(3), 1e-12).unwrap();
        assert!(r.residual <= 1e-12);
        assert!(r.root.matrix().sub(&ComplexMatrix::identity(3)).unwrap().max_abs() <= 1e-12);
        let r = sqrt_contour(&diag(&[4.0, 9.0]), 1e-12).unwrap();
        assert!(r.root.matrix().sub(&ComplexMatrix::from_diag(&[2.0, 3.0])).unwrap().max_abs() <= 1e-11);
    }

    #[test]
    fn contour_root_matches_oracle() {
        let l = random_pd(8, 100.0, 31);
        let a = sqrt_contour(&l, 1e-12).unwrap();
        let b = sqrt_oracle(&l).unwrap();
        assert!(op_dist(a.root.matrix(), b.root.matrix()) <= 1e-10);
        assert!(a.positivity_floor > 0.0);
        assert!(a.raw_asymmetry.unwrap() <= MAX_RAW_ASYMMETRY);
    }

    #[test]
    fn positivity_constant_contour_also_works() {
        let l = diag(&[4.0, 9.0]);
        let settings = ContourSettings { floor: ContourFloor::PositivityConstant, ..Default::default() };
        let r = sqrt_contour_with(&l, &settings).unwrap();
        assert!(r.root.matrix().sub(&ComplexMatrix::from_diag(&[2.0, 3.0])).unwrap().max_abs() <= 1e-11);
    }

    #[test]
    fn contour_root_rejects_indefinite() {
        assert!(matches!(sqrt_contour(&diag(&[-1.0, 2.0]), 1e-12), Err(Error::NotPositive(_))));
    }

    #[test]
    fn kreyszig_scalar_recurrence() {
        let one = diag(&[1.0]);
        let (r1, _) = kreyszig_iterate(&one, f64::INFINITY, 1).unwrap();
        assert_eq!(r1.matrix()[(0, 0)].re, 0.5);
        let (r2, _) = kreyszig_iterate(&one, 0.4, 2).unwrap();
        assert_eq!(r2.matrix()[(0, 0)].re, 0.875);
        let err = kreyszig_iterate(&one, 0.0, 2).unwrap_err();
        assert!(matches!(err, Error::ConvergenceFailure { iterations: 2, .. }));
        let mut r = 0.0_f64;
        let mut prev = -1.0;
        for _ in 0..60 {
            r += (1.0 - r * r) / 2.0;
            assert!(r >= prev && r <= 1.0);
            prev = r;
        }
        let res = sqrt_kreyszig(&identity(2), 1e-14, 1000).unwrap();
        assert!((res.root.matrix()[(0, 0)].re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn kreyszig_rescales() {
        let r = sqrt_kreyszig(&diag(&[0.25]), 1e-14, 100).unwrap();
        assert!((r.root.matrix()[(0, 0)].re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn kreyszig_matches_oracle() {
        let l = random_pd(8, 100.0, 32);
        let a = sqrt_kreyszig(&l, 1e-12, DEFAULT_KREYSZIG_MAX_ITER).unwrap();
        let b = sqrt_oracle(&l).unwrap();
        assert!(op_dist(a.root.matrix(), b.root.matrix()) <= 1e-8);
    }

    #[test]
    fn unscaled_iteration_diverges_for_large_spectrum() {
        assert!(kreyszig_iterate(&diag(&[16.0, 1.0]), 1e-12, 500).is_err());
        // Stable fixed point below 4.
        let (r, _) = kreyszig_iterate(&diag(&[3.5]), 1e-13, 5000).unwrap();
        assert!((r.matrix()[(0, 0)].re - 3.5_f64.sqrt()).abs() < 1e-12);
        assert!(sqrt_kreyszig(&diag(&[16.0, 1.0]), 1e-12, 5000).is_ok());
    }

    #[test]
    fn kreyszig_stalls_on_near_singular() {
        let l = with_spectrum(&[1e-8, 0.5, 1.0], 4);
        let err = sqrt_kreyszig(&l, 1e-10, DEFAULT_KREYSZIG_MAX_ITER).unwrap_err();
        assert!(err.to_string().contains("10000"));
    }

    #[test]
    fn oracle_examples() {
        let r = sqrt_oracle(&diag(&[4.0, 9.0])).unwrap();
        assert!(r.root.matrix().sub(&ComplexMatrix::from_diag(&[2.0, 3.0])).unwrap().max_abs() < 1e-15);
        let r = sqrt_oracle(&diag(&[0.0, 0.0])).unwrap();
        assert_eq!(r.root.matrix().max_abs(), 0.0);
        let m = make_hermitian(&ComplexMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap(), 0.0).unwrap();
        let r = sqrt_oracle(&m).unwrap();
        let sq = matmul(r.root.matrix(), r.root.matrix()).unwrap();
        assert!(sq.sub(m.matrix()).unwrap().max_abs() <= 1e-12);
        let s = 3f64.sqrt();
        assert!((r.root.matrix()[(0, 0)].re - (1.0 + s) / 2.0).abs() < 1e-14);
        assert!(matches!(sqrt_oracle(&diag(&[-1.0, 1.0])), Err(Error::NegativeSpectrum { .. })));
        // Clamped: tiny negative rounding is admitted.
        assert!(sqrt_oracle(&diag(&[-1e-14, 1.0])).is_ok());
    }

    #[test]
    fn polynomial_routes_agree() {
        let l = diag(&[2.0, 5.0]);
        let lin = [c(0.0, 0.0), c(1.0, 0.0)];
        for via in [PolyRoute::Direct, PolyRoute::Contour] {
            let p = poly_calculus(&l, &lin, via).unwrap();
            assert!(p.sub(l.matrix()).unwrap().max_abs() <= 1e-11);
        }
        let pd = random_pd(5, 10.0, 33);
        for via in [PolyRoute::Direct, PolyRoute::Contour] {
            let p = poly_calculus(&pd, &[c(1.0, 0.0)], via).unwrap();
            assert!(p.sub(&ComplexMatrix::identity(5)).unwrap().max_abs() <= 1e-11);
        }
        let quad = [c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let direct = poly_calculus(&pd, &quad, PolyRoute::Direct).unwrap();
        let contour = poly_calculus(&pd, &quad, PolyRoute::Contour).unwrap();
        assert!(op_dist(&direct, &contour) <= 1e-10 * spectral_norm(&direct).unwrap());
        assert!(poly_calculus(&diag(&[-1.0, 1.0]), &quad, PolyRoute::Contour).is_err());
    }

    #[test]
    fn square_map_examples() {
        assert_eq!(square_map(&identity(2)).matrix(), &ComplexMatrix::identity(2));
        assert_eq!(square_map(&diag(&[2.0, 3.0])).matrix(), &ComplexMatrix::from_diag(&[4.0, 9.0]));
        let l = random_pd(6, 50.0, 34);
        let r = sqrt_contour(&l, 1e-12).unwrap();
        assert!(op_dist(square_map(&r.root).matrix(), l.matrix()) <= 1e-9);
    }

    #[test]
    fn spectral_mapping_examples() {
        let r = spectral_mapping_check(&diag(&[4.0, 9.0]), &gamma_unchecked).unwrap();
        assert!(r.passed);
        assert!((r.spectrum_of_image[0] - 2.0).abs() < 1e-10 && (r.spectrum_of_image[1] - 3.0).abs() < 1e-10);
        let r = spectral_mapping_check(&diag(&[2.0, 3.0]), &|z| z * z).unwrap();
        assert!(r.passed);
        let r = spectral_mapping_check(&random_pd(8, 100.0, 35), &gamma_unchecked).unwrap();
        assert!(r.max_pairing_distance <= 1e-8);
    }

    #[test]
    fn multiset_matching() {
        let a = [c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0)];
        let b = [c(2.0, 0.0), c(1.0, 1e-9), c(2.0, 0.0)];
        assert!(multiset_distance(&a, &b) <= 1e-9 + 1e-18);
        assert!(multiset_distance(&a, &b[..2]).is_infinite());
    }

    #[test]
    fn product_rule_holds() {
        let l = random_pd(6, 30.0, 36);
        assert!(product_rule_residual(&l, 1e-12).unwrap() <= 1e-9);
    }

    #[test]
    fn root_commutes_with_polynomials_in_l() {
        let l = random_pd(6, 30.0, 37);
        let r = sqrt_contour(&l, 1e-12).unwrap();
        let s = poly_calculus(&l, &[c(0.5, 0.0), c(-2.0, 0.0), c(1.0, 0.0), c(0.25, 0.0)], PolyRoute::Direct)
            .unwrap();
        assert!(commutator_residual(&s, r.root.matrix()).unwrap() <= 1e-9);
        // A matrix co-diagonal with L.
        let e = eig_oracle(&l).unwrap();
        let codiag = e.reconstruct(|x| c((3.0 * x).cos(), 0.0));
        assert!(commutator_residual(&codiag, r.root.matrix()).unwrap() <= 1e-9);
    }

    #[test]
    fn root_of_isomorphism_is_bounded_below() {
        for seed in 0..5 {
            let l = random_pd(5, 100.0, 40 + seed);
            let cert = certify(&l).unwrap();
            let r = sqrt_contour(&l, 1e-12).unwrap();
            assert!(r.positivity_floor >= cert.c_bound.sqrt() * (1.0 - 1e-6));
        }
    }

    #[test]
    fn methods_agree_across_conditioning() {
        for (n, cond) in [(2, 1.0), (4, 10.0), (8, 1e3), (16, 10.0)] {
            let l = random_pd(n, cond, 50 + n as u64);
            let roots: Vec<SqrtResult> = SqrtMethod::ALL.iter().map(|&m| sqrt_by(m, &l, 1e-12).unwrap()).collect();
            for i in 0..3 {
                for j in (i + 1)..3 {
                    assert!(op_dist(roots[i].root.matrix(), roots[j].root.matrix()) <= 1e-8);
                }
            }
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn methods_agree(seed in any::<u64>(), n in 1usize..10, log_cond in 0.0f64..3.0, scale in 0.1f64..20.0) {
                let l = random_pd(n, 10f64.powf(log_cond), seed).scaled(scale);
                let a = sqrt_contour(&l, 1e-12).unwrap();
                let b = sqrt_oracle(&l).unwrap();
                let c = sqrt_kreyszig(&l, 1e-13, 20_000).unwrap();
                prop_assert!(op_dist(a.root.matrix(), b.root.matrix()) <= 1e-8);
                prop_assert!(op_dist(a.root.matrix(), c.root.matrix()) <= 1e-8);
            }

            #[test]
            fn root_commutes_and_stays_positive(seed in any::<u64>(), n in 1usize..10, log_cond in 0.0f64..3.0) {
                let l = random_pd(n, 10f64.powf(log_cond), seed);
                let r = sqrt_contour(&l, 1e-12).unwrap();
                let cert = certify(&l).unwrap();
                prop_assert!(r.positivity_floor >= cert.c_bound.sqrt() * (1.0 - 1e-6));
                let e = eig_oracle(&l).unwrap();
                let codiag = e.reconstruct(|x| c(x.ln(), 0.0));
                prop_assert!(commutator_residual(&codiag, r.root.matrix()).unwrap() <= 1e-9);
                let p = poly_calculus(&l, &[c(1.0, 0.0), c(-3.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)], PolyRoute::Direct).unwrap();
                prop_assert!(commutator_residual(&p, r.root.matrix()).unwrap() <= 1e-9);
            }

            #[test]
            fn nonnegative_and_invertible_is_positive(seed in any::<u64>(), n in 1usize..8, shift in 0.0f64..2.0) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let h = crate::random::random_hermitian(n, &mut rng);
                let l = h.shifted(shift - eig_oracle(&h).unwrap().min());
                let e = eig_oracle(&l).unwrap();
                let invertible = crate::spectral::is_regular_value(&l, c(0.0, 0.0));
                if e.min() >= 0.0 && invertible {
                    prop_assert!(e.min() > 0.0);
                }
            }
        }
    }
}
