//! Circular contours in the right half-plane, their partitions, and the
//! resolvent quadrature that defines `f(L) = −(1/2πi) ∮ f(λ)(L − λI)⁻¹ dλ`.
//!
//! A partition of the circle is generated from a parameter `s ∈ [0, 2π)`
//! sampled uniformly; the angle is `θ(s) = atan2(sin s, k·cos s)`. With
//! `k = 1` the nodes are equispaced in angle. Larger `k` packs nodes near the
//! two real-axis crossings, where the contour passes closest to the spectrum
//! and to the branch point at the origin, by a factor `k` and thins them near
//! `θ = ±π/2` by the same factor. Nodes are always conjugate-closed.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{spectral_norm, ComplexMatrix, HermitianOperator};
use crate::spectral::resolvent;

/// Scalar integrand. `Sync` so that nodes can be evaluated in parallel.
pub type ScalarFn<'a> = dyn Fn(Complex64) -> Complex64 + Sync + 'a;

/// Nodes evaluated per parallel batch; batches are reduced in node order.
const BATCH: usize = 64;

/// Samples used for the operator-valued ML bound stored in reports.
pub const REPORT_ML_SAMPLES: usize = 64;

/// A positively oriented circle with center on the positive real axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contour {
    center: f64,
    radius: f64,
}

impl Contour {
    /// The circle must stay inside the open right half-plane.
    pub fn new(center: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && center - radius > 0.0 && center.is_finite() && radius.is_finite()) {
            return Err(Error::InvalidContour { center, radius });
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Leftmost real crossing.
    pub fn left(&self) -> f64 {
        self.center - self.radius
    }

    /// Rightmost real crossing.
    pub fn right(&self) -> f64 {
        self.center + self.radius
    }

    pub fn length(&self) -> f64 {
        2.0 * PI * self.radius
    }

    pub fn point(&self, angle: f64) -> Complex64 {
        Complex64::new(self.center + self.radius * angle.cos(), self.radius * angle.sin())
    }

    pub fn encloses(&self, z: Complex64) -> bool {
        (z - self.center).norm() < self.radius
    }
}

/// Which circle the square-root construction uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContourVariant {
    /// Through `c/2` and `‖L‖ + c/2`.
    Tight,
    /// Through `c/3` and `‖L‖ + c/2`; encloses every spectrum in a ball
    /// around `L`.
    Robust,
}

/// The circle through `(left, right)` on the real axis for the variant.
pub fn make_sqrt_contour(c: f64, norm_l: f64, variant: ContourVariant) -> Result<Contour> {
    if !(c > 0.0 && c <= norm_l && norm_l.is_finite()) {
        return Err(Error::InvalidBounds { c, norm: norm_l });
    }
    match variant {
        // Midpoint of (c/2, ‖L‖ + c/2) and half their distance.
        ContourVariant::Tight => Contour::new((c + norm_l) / 2.0, norm_l / 2.0),
        ContourVariant::Robust => {
            let (left, right) = (c / 3.0, norm_l + c / 2.0);
            Contour::new((left + right) / 2.0, (right - left) / 2.0)
        }
    }
}

/// Node density factor for a circle that must enclose `[lo, hi]` and
/// exclude the origin: `1/sqrt(g)`, with `g` the smallest of the three gaps
/// relative to the radius.
pub fn grading_density(gamma: &Contour, lo: f64, hi: f64) -> f64 {
    let gap = gamma.left().min(lo - gamma.left()).min(gamma.right() - hi);
    let g = gap / gamma.radius;
    if g.is_nan() || g <= 0.0 || g >= 1.0 {
        return 1.0;
    }
    1.0 / g.sqrt()
}

/// Tags, nodes and quadrature weights on a contour.
#[derive(Debug, Clone)]
pub struct Partition {
    contour: Contour,
    density: f64,
    /// `λ₀, …, λₙ` in counterclockwise order with `λₙ = λ₀`.
    pub nodes: Vec<Complex64>,
    /// `ζᵢ` at the parametric midpoint of `[λᵢ₋₁, λᵢ]`, `i = 1..=n`.
    pub tags: Vec<Complex64>,
    /// `dλ/ds` at each tag times the step, normalized to total length `l`.
    pub arc_weights: Vec<Complex64>,
}

fn graded_angle(s: f64, k: f64) -> f64 {
    f64::atan2(s.sin(), k * s.cos())
}

fn graded_speed(s: f64, k: f64) -> f64 {
    let (sin, cos) = s.sin_cos();
    k / (k * k * cos * cos + sin * sin)
}

/// `n` nodes equispaced in angle, starting at the rightmost real point.
pub fn partition(gamma: &Contour, n: usize) -> Result<Partition> {
    Partition::graded(gamma, n, 1.0)
}

impl Partition {
    pub fn graded(gamma: &Contour, n: usize, density: f64) -> Result<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::BadNodeCount(n));
        }
        if !(density >= 1.0 && density.is_finite()) {
            return Err(Error::InvalidArgument(format!("node density {density} must be ≥ 1")));
        }
        let h = 2.0 * PI / n as f64;
        let half = n / 2;

        // Upper half computed directly, lower half mirrored, so that the node
        // and tag sets are exactly closed under conjugation.
        let mut nodes = vec![Complex64::new(0.0, 0.0); n + 1];
        nodes[0] = Complex64::new(gamma.right(), 0.0);
        nodes[half] = Complex64::new(gamma.left(), 0.0);
        for j in 1..half {
            nodes[j] = gamma.point(graded_angle(j as f64 * h, density));
            nodes[n - j] = nodes[j].conj();
        }
        nodes[n] = nodes[0];

        let mut tags = vec![Complex64::new(0.0, 0.0); n];
        let mut speeds = vec![0.0; n];
        for j in 1..=half {
            let s = (j as f64 - 0.5) * h;
            let z = gamma.point(graded_angle(s, density));
            tags[j - 1] = z;
            tags[n - j] = z.conj();
            let v = graded_speed(s, density);
            speeds[j - 1] = v;
            speeds[n - j] = v;
        }
        let total: f64 = speeds.iter().sum::<f64>() * h;
        let norm = 2.0 * PI / total;
        let arc_weights = tags
            .iter()
            .zip(&speeds)
            .map(|(&z, &v)| Complex64::i() * (z - gamma.center) * (v * h * norm))
            .collect();
        Ok(Self { contour: *gamma, density, nodes, tags, arc_weights })
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn contour(&self) -> &Contour {
        &self.contour
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    /// `λᵢ − λᵢ₋₁` for `i = 1..=n`.
    pub fn increments(&self) -> Vec<Complex64> {
        self.nodes.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// `‖P‖ = max |λᵢ − λᵢ₋₁|`.
    pub fn mesh(&self) -> f64 {
        self.increments().iter().map(|d| d.norm()).fold(0.0, f64::max)
    }
}

/// `Σ wᵢ · f(zᵢ) · (L − zᵢI)⁻¹`, summed in index order.
fn weighted_resolvent_sum(
    f: &ScalarFn,
    l: &HermitianOperator,
    points: &[Complex64],
    weights: &[Complex64],
) -> Result<ComplexMatrix> {
    let mut acc = ComplexMatrix::zeros(l.n());
    for start in (0..points.len()).step_by(BATCH) {
        let end = (start + BATCH).min(points.len());
        let terms: Vec<Result<(Complex64, ComplexMatrix)>> = (start..end)
            .into_par_iter()
            .map(|k| Ok((weights[k] * f(points[k]), resolvent(l, points[k])?)))
            .collect();
        for term in terms {
            let (coeff, r) = term?;
            acc.axpy(coeff, &r)?;
        }
    }
    Ok(acc)
}

/// The Riemann sum `S(P, Q, f) = Σ (λᵢ − λᵢ₋₁) · f(ζᵢ) · (L − ζᵢI)⁻¹`.
///
/// Chord increments make this only second-order accurate in the mesh;
/// [`trapezoid_sum`] is the same sum with arc-length weights.
pub fn riemann_sum(f: &ScalarFn, p: &Partition, l: &HermitianOperator) -> Result<ComplexMatrix> {
    weighted_resolvent_sum(f, l, &p.tags, &p.increments())
}

/// `Σ wᵢ · f(ζᵢ) · (L − ζᵢI)⁻¹` with arc-length weights `wᵢ`.
pub fn trapezoid_sum(f: &ScalarFn, p: &Partition, l: &HermitianOperator) -> Result<ComplexMatrix> {
    weighted_resolvent_sum(f, l, &p.tags, &p.arc_weights)
}

/// `−S / (2πi)`.
pub fn calculus_scale(sum: &ComplexMatrix) -> ComplexMatrix {
    sum.scale(Complex64::new(0.0, 1.0 / (2.0 * PI)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub tol: f64,
    pub n0: usize,
    pub n_max: usize,
    /// Node density factor, see [`grading_density`].
    pub density: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { tol: 1e-12, n0: 16, n_max: 1 << 17, density: 1.0 }
    }
}

/// Diagnostics of a node-doubling quadrature run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QuadratureReport {
    /// Node count at each level.
    pub node_counts: Vec<usize>,
    /// `‖F₂ₙ − Fₙ‖_F / ‖F₂ₙ‖_F` for each doubling, `F = −S/(2πi)`.
    pub deltas: Vec<f64>,
    /// Spectral norm of `F` at each level.
    pub sum_norms: Vec<f64>,
    /// `(1/2π) · M̂ · l` with `M̂` the sampled max of `|f(λ)|·‖(L − λI)⁻¹‖`;
    /// bounds the norm of the result.
    pub ml_bound: f64,
    pub density: f64,
    /// Stopping tolerance applied to `deltas`.
    pub tol: f64,
    pub converged: bool,
}

/// Evaluates `f(L) = −(1/2πi) ∮ f(λ)(L − λI)⁻¹ dλ` on `gamma`, doubling the
/// node count from `n0` until successive levels agree to `tol` relative.
pub fn integrate_fcalc(
    f: &ScalarFn,
    l: &HermitianOperator,
    gamma: &Contour,
    opts: &QuadratureOptions,
) -> Result<(ComplexMatrix, QuadratureReport)> {
    debug_assert!(
        crate::spectral::eig_oracle(l)
            .map(|e| e.eigenvalues.iter().all(|&x| gamma.encloses(Complex64::new(x, 0.0))))
            .unwrap_or(true),
        "spectrum is not enclosed by the contour"
    );
    if opts.n0 > opts.n_max {
        return Err(Error::InvalidArgument(format!("n0 {} exceeds n_max {}", opts.n0, opts.n_max)));
    }
    let level = |n: usize| -> Result<ComplexMatrix> {
        let p = Partition::graded(gamma, n, opts.density)?;
        Ok(calculus_scale(&trapezoid_sum(f, &p, l)?))
    };

    let mut report = QuadratureReport { density: opts.density, tol: opts.tol, ..Default::default() };
    let mut n = opts.n0;
    let mut current = level(n)?;
    report.node_counts.push(n);
    report.sum_norms.push(spectral_norm(&current)?);
    let mut last_delta = f64::INFINITY;
    while 2 * n <= opts.n_max {
        n *= 2;
        let next = level(n)?;
        let scale = next.frobenius_norm();
        let diff = next.sub(&current)?.frobenius_norm();
        let delta = if scale > 0.0 { diff / scale } else { diff };
        report.node_counts.push(n);
        report.deltas.push(delta);
        report.sum_norms.push(spectral_norm(&next)?);
        current = next;
        last_delta = delta;
        if delta <= opts.tol {
            report.converged = true;
            report.ml_bound = ml_bound_resolvent(f, l, gamma, REPORT_ML_SAMPLES)? / (2.0 * PI);
            return Ok((current, report));
        }
    }
    Err(Error::NoConvergence { max_nodes: opts.n_max, last_delta })
}

fn ml_samples(gamma: &Contour, samples: usize) -> Vec<Complex64> {
    (0..samples).map(|k| gamma.point(2.0 * PI * k as f64 / samples as f64)).collect()
}

/// `M̂ · l` with `M̂ = max |f|` over `samples` equispaced points from angle 0.
pub fn ml_bound(f: &ScalarFn, gamma: &Contour, samples: usize) -> Result<f64> {
    if samples < 64 {
        return Err(Error::InvalidArgument(format!("ML bound needs ≥ 64 samples, got {samples}")));
    }
    let m = ml_samples(gamma, samples).into_iter().map(|z| f(z).norm()).fold(0.0, f64::max);
    Ok(m * gamma.length())
}

/// Operator-valued ML bound: `M̂ · l` with `M̂ = max |f(λ)|·‖(L − λI)⁻¹‖`
/// over equispaced samples.
pub fn ml_bound_resolvent(f: &ScalarFn, l: &HermitianOperator, gamma: &Contour, samples: usize) -> Result<f64> {
    if samples < 64 {
        return Err(Error::InvalidArgument(format!("ML bound needs ≥ 64 samples, got {samples}")));
    }
    ml_bound_at(f, l, gamma, &ml_samples(gamma, samples))
}

/// Operator-valued ML bound with `M̂` taken over the given points.
pub fn ml_bound_at(f: &ScalarFn, l: &HermitianOperator, gamma: &Contour, points: &[Complex64]) -> Result<f64> {
    let values: Vec<Result<f64>> = points
        .par_iter()
        .map(|&z| Ok(f(z).norm() * spectral_norm(&resolvent(l, z)?)?))
        .collect();
    let mut m = 0.0_f64;
    for v in values {
        m = m.max(v?);
    }
    Ok(m * gamma.length())
}
