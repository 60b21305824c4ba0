//! Numerical probes of the positive definite cone: convex combinations,
//! openness balls, spectral inclusion under perturbation, and the continuity
//! modulus of the square-root map.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::contour::{make_sqrt_contour, partition, Contour, ContourVariant};
use crate::error::{Error, Result};
use crate::matrix::{operator_norm, spectral_norm, HermitianOperator};
use crate::random::scaled_hermitian_direction;
use crate::spectral::{certify, eig_oracle, PositivityCertificate};
use crate::sqrt::{sqrt_contour, square_map};

/// Slack allowed below the convexity floor `t·c₁ + (1 − t)·c₂`.
pub const CONVEX_FLOOR_SLACK: f64 = 1e-10;

/// Node count of the contour partition sampled by [`continuity_budget`].
pub const BUDGET_NODES: usize = 256;

pub const DEFAULT_SQRT_TOL: f64 = 1e-12;

/// A convex combination `tA + (1 − t)B` with its certificate.
#[derive(Debug, Clone)]
pub struct ConvexCombination {
    pub t: f64,
    pub operator: HermitianOperator,
    pub certificate: PositivityCertificate,
    /// `t·c₁ + (1 − t)·c₂`.
    pub floor: f64,
}

/// `tA + (1 − t)B`, certified positive with smallest eigenvalue no lower
/// than `t·c₁ + (1 − t)·c₂` (less [`CONVEX_FLOOR_SLACK`]).
pub fn convex_combination(a: &HermitianOperator, b: &HermitianOperator, t: f64) -> Result<ConvexCombination> {
    let ca = certify(a)?;
    let cb = certify(b)?;
    convex_combination_certified(a, &ca, b, &cb, t)
}

pub fn convex_combination_certified(
    a: &HermitianOperator,
    ca: &PositivityCertificate,
    b: &HermitianOperator,
    cb: &PositivityCertificate,
    t: f64,
) -> Result<ConvexCombination> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!("t = {t} is outside [0, 1]")));
    }
    let operator = a.lincomb(t, b, 1.0 - t)?;
    let floor = t * ca.c_bound + (1.0 - t) * cb.c_bound;
    let certificate = certify(&operator)
        .map_err(|e| Error::PropertyViolation(format!("combination at t = {t} is not positive: {e}")))?;
    if certificate.rayleigh_min < floor - CONVEX_FLOOR_SLACK {
        return Err(Error::PropertyViolation(format!(
            "combination at t = {t} has minimum eigenvalue {:e} below floor {floor:e}",
            certificate.rayleigh_min
        )));
    }
    Ok(ConvexCombination { t, operator, certificate, floor })
}

/// Convex combinations at `t = k/steps` for `k = 0..=steps`.
pub fn convexity_scan(a: &HermitianOperator, b: &HermitianOperator, steps: usize) -> Result<Vec<ConvexCombination>> {
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be positive".into()));
    }
    let ca = certify(a)?;
    let cb = certify(b)?;
    (0..=steps)
        .map(|k| convex_combination_certified(a, &ca, b, &cb, k as f64 / steps as f64))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BallVariant {
    /// `r = min{1/‖L⁻¹‖, c}`: every self-adjoint `T` with `‖L − T‖ < r` is positive.
    Openness,
    /// `r = min{1/‖L⁻¹‖, c/2}`: the ball on which the continuity modulus holds.
    Continuity,
}

impl BallVariant {
    pub fn name(self) -> &'static str {
        match self {
            BallVariant::Openness => "openness",
            BallVariant::Continuity => "continuity",
        }
    }
}

/// An open ball of self-adjoint operators around a positive `L`.
#[derive(Debug, Clone)]
pub struct BallSpec {
    pub center: HermitianOperator,
    pub radius: f64,
    pub variant: BallVariant,
    pub certificate: PositivityCertificate,
}

pub fn openness_radius(l: &HermitianOperator, variant: BallVariant) -> Result<BallSpec> {
    let cert = certify(l)?;
    let floor = 1.0 / cert.inv_norm;
    let radius = match variant {
        BallVariant::Openness => floor.min(cert.c_bound),
        BallVariant::Continuity => floor.min(cert.c_bound / 2.0),
    };
    Ok(BallSpec { center: l.clone(), radius, variant, certificate: cert })
}

/// `T = L + Δ` with `Δ` a seeded isotropic Hermitian direction of operator
/// norm `fraction · radius`.
pub fn perturb_in_ball(ball: &BallSpec, seed: u64, fraction: f64) -> Result<HermitianOperator> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    perturb_with(ball, &mut rng, fraction)
}

fn perturb_with<R: Rng + ?Sized>(ball: &BallSpec, rng: &mut R, fraction: f64) -> Result<HermitianOperator> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidArgument(format!("fraction {fraction} is outside [0, 1]")));
    }
    if fraction == 0.0 {
        return Ok(ball.center.clone());
    }
    let delta = scaled_hermitian_direction(ball.center.n(), fraction * ball.radius, rng)?;
    ball.center.lincomb(1.0, &delta, 1.0)
}

/// Independent generator for trial `k` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    rng
}

/// Whether every eigenvalue of `T` lies strictly inside `(c/3, ‖L‖ + c/2)`.
pub fn spectral_inclusion_check(t: &HermitianOperator, c: f64, norm_l: f64) -> Result<bool> {
    let (lo, hi) = (c / 3.0, norm_l + c / 2.0);
    Ok(eig_oracle(t)?.eigenvalues.iter().all(|&x| x > lo && x < hi))
}

/// The constants of the continuity estimate `‖√L − √T‖ ≤ (1/2π)·m·M²·l·‖L − T‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityBudget {
    pub contour: Contour,
    /// `max |γ|` on the contour, attained at its rightmost point.
    pub m_gamma: f64,
    /// Twice the largest sampled resolvent norm over contour × ball.
    pub m_resolvent: f64,
    pub length: f64,
    pub coefficient: f64,
}

impl ContinuityBudget {
    pub fn compose(m_gamma: f64, m_resolvent: f64, length: f64) -> f64 {
        m_gamma * m_resolvent * m_resolvent * length / (2.0 * PI)
    }
}

/// Builds the robust contour for `L` and estimates `M` from `L` itself and
/// `2·samples` seeded operators on the boundary of the continuity ball.
///
/// Resolvent norms are sampled at the quadrature tags of a
/// [`BUDGET_NODES`]-node partition. The right crossing `‖L‖ + c/2` lies on
/// the closure of the spectra reachable in the ball, so the supremum over
/// the whole contour is unbounded; the tags stay off the real axis.
pub fn continuity_budget(l: &HermitianOperator, samples: usize, seed: u64) -> Result<ContinuityBudget> {
    let ball = openness_radius(l, BallVariant::Continuity)?;
    let cert = &ball.certificate;
    let contour = make_sqrt_contour(cert.c_bound, cert.norm_l, ContourVariant::Robust)?;
    let p = partition(&contour, BUDGET_NODES)?;
    let points: &[Complex64] = &p.tags;

    // Resolvent norms of a Hermitian T are 1/dist(λ, σ(T)).
    let worst = |t: &HermitianOperator| -> Result<f64> {
        let eig = eig_oracle(t)?;
        let mut m = 0.0_f64;
        for z in points {
            let d = eig.eigenvalues.iter().map(|&x| (z - x).norm()).fold(f64::INFINITY, f64::min);
            m = m.max(1.0 / d);
        }
        Ok(m)
    };
    let boundary: Vec<Result<f64>> = (0..2 * samples)
        .into_par_iter()
        .map(|k| worst(&perturb_with(&ball, &mut trial_rng(seed, k), 1.0)?))
        .collect();
    let mut m = worst(l)?;
    for v in boundary {
        m = m.max(v?);
    }

    let m_gamma = contour.right().sqrt();
    let m_resolvent = 2.0 * m;
    let length = contour.length();
    Ok(ContinuityBudget {
        contour,
        m_gamma,
        m_resolvent,
        length,
        coefficient: ContinuityBudget::compose(m_gamma, m_resolvent, length),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeOptions {
    pub trials: usize,
    pub seed: u64,
    /// Perturbation sizes are drawn uniformly from `(0, max_fraction]` of the radius.
    pub max_fraction: f64,
    /// Boundary samples for the budget estimate.
    pub budget_samples: usize,
    pub tol: f64,
}

impl ProbeOptions {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self { trials, seed, max_fraction: 1.0, budget_samples: 32, tol: DEFAULT_SQRT_TOL }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeTrial {
    pub index: usize,
    pub perturbation: f64,
    /// `None` when the perturbation vanished.
    pub ratio: Option<f64>,
    pub inclusion: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub radius: f64,
    pub budget: ContinuityBudget,
    pub trials: Vec<ProbeTrial>,
    pub skipped: usize,
    pub max_ratio: f64,
    pub min_ratio: f64,
    pub inclusion_passes: usize,
}

impl ProbeReport {
    pub fn within_budget(&self) -> bool {
        self.max_ratio <= self.budget.coefficient
    }

    pub fn passed(&self) -> bool {
        self.within_budget() && self.inclusion_passes == self.trials.len()
    }
}

/// Samples `T` in the continuity ball and compares `‖√L − √T‖ / ‖L − T‖`
/// with the budget coefficient.
pub fn probe_continuity(l: &HermitianOperator, opts: &ProbeOptions) -> Result<ProbeReport> {
    if !(opts.max_fraction > 0.0 && opts.max_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!("max_fraction {} is outside (0, 1]", opts.max_fraction)));
    }
    let ball = openness_radius(l, BallVariant::Continuity)?;
    let budget = continuity_budget(l, opts.budget_samples, opts.seed ^ 0x5eed_b0d9e7)?;
    let root_l = sqrt_contour(l, opts.tol)?.root;
    let (c, norm_l) = (ball.certificate.c_bound, ball.certificate.norm_l);

    let results: Vec<Result<ProbeTrial>> = (0..opts.trials)
        .into_par_iter()
        .map(|index| {
            let mut rng = trial_rng(opts.seed, index);
            let fraction = opts.max_fraction * (1.0 - rng.random::<f64>());
            let t = perturb_with(&ball, &mut rng, fraction)?;
            let inclusion = spectral_inclusion_check(&t, c, norm_l)?;
            let diff = l.lincomb(1.0, &t, -1.0)?;
            let perturbation = operator_norm(&diff)?;
            let ratio = if perturbation == 0.0 {
                None
            } else {
                let root_t = sqrt_contour(&t, opts.tol)?.root;
                let d = spectral_norm(&root_l.matrix().sub(root_t.matrix())?)?;
                Some(d / perturbation)
            };
            Ok(ProbeTrial { index, perturbation, ratio, inclusion })
        })
        .collect();
    let trials = results.into_iter().collect::<Result<Vec<_>>>()?;

    let ratios: Vec<f64> = trials.iter().filter_map(|t| t.ratio).collect();
    Ok(ProbeReport {
        radius: ball.radius,
        skipped: trials.len() - ratios.len(),
        max_ratio: ratios.iter().copied().fold(0.0, f64::max),
        min_ratio: ratios.iter().copied().fold(f64::INFINITY, f64::min),
        inclusion_passes: trials.iter().filter(|t| t.inclusion).count(),
        budget,
        trials,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundtripReport {
    /// `‖(√L)² − L‖ / ‖L‖`.
    pub sqrt_then_square: f64,
    /// `‖√(L²) − L‖ / ‖L‖`.
    pub square_then_sqrt: f64,
}

impl RoundtripReport {
    pub fn max(&self) -> f64 {
        self.sqrt_then_square.max(self.square_then_sqrt)
    }
}

pub fn homeomorphism_roundtrip(l: &HermitianOperator, tol: f64) -> Result<RoundtripReport> {
    let norm = operator_norm(l)?;
    let rel = |x: &HermitianOperator| -> Result<f64> { Ok(operator_norm(&x.lincomb(1.0, l, -1.0)?)? / norm) };
    let root = sqrt_contour(l, tol)?.root;
    let sqrt_then_square = rel(&square_map(&root))?;
    let back = sqrt_contour(&square_map(l), tol)?.root;
    let square_then_sqrt = rel(&back)?;
    Ok(RoundtripReport { sqrt_then_square, square_then_sqrt })
}
