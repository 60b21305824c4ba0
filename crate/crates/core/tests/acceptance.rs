//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Run with `cargo test -p possqrt-core --test acceptance`.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use possqrt_core::contour::{Partition, ScalarFn};
use possqrt_core::matrix::{identity, operator_norm, spectral_norm};
use possqrt_core::random::random_pd;
use possqrt_core::spectral::{certify, eig_oracle, is_regular_value, positivity_bound_c, PositivityCertificate};
use possqrt_core::sqrt::{
    gamma_unchecked, poly_calculus, product_rule_residual, spectral_mapping_check, sqrt_contour,
    sqrt_kreyszig, sqrt_oracle, ContourSettings, PolyRoute, SqrtResult,
};
use possqrt_core::topology::{
    convex_combination_certified, homeomorphism_roundtrip, openness_radius, perturb_in_ball,
    probe_continuity, spectral_inclusion_check, BallVariant, ProbeOptions,
};
use possqrt_core::{Complex64, HermitianOperator, Result};

const SQRT_TOL: f64 = 1e-12;
const KREYSZIG_TOL: f64 = 1e-13;
const KREYSZIG_MAX_ITER: usize = 20_000;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self { passed, detail: detail.into() }
    }
}

struct Case {
    label: String,
    l: HermitianOperator,
    cert: PositivityCertificate,
    contour: SqrtResult,
    kreyszig: SqrtResult,
    oracle: SqrtResult,
}

fn build_cases() -> Result<Vec<Case>> {
    let mut cases = Vec::new();
    for n in [2usize, 4, 8, 16, 32] {
        for cond in [1.0f64, 10.0, 1e3] {
            for (rep, scale) in [(0u64, 1.0), (1, 4.0)] {
                let seed = 1000 * n as u64 + 10 * cond.log10() as u64 + rep;
                let l = random_pd(n, cond, seed).scaled(scale);
                cases.push(Case {
                    label: format!("n={n} cond={cond:e} scale={scale}"),
                    cert: certify(&l)?,
                    contour: sqrt_contour(&l, SQRT_TOL)?,
                    kreyszig: sqrt_kreyszig(&l, KREYSZIG_TOL, KREYSZIG_MAX_ITER)?,
                    oracle: sqrt_oracle(&l)?,
                    l,
                });
            }
        }
    }
    Ok(cases)
}

fn op_dist(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    spectral_norm(&a.matrix().sub(b.matrix())?)
}

fn polynomial_reproduction() -> Result<Outcome> {
    let mut worst = 0.0_f64;
    let mut count = 0;
    for n in [2usize, 4, 8, 16] {
        for cond in [1.0, 10.0, 100.0] {
            let l = random_pd(n, cond, 7 * n as u64 + cond as u64).scaled(2.5);
            for k in 0..=3 {
                let mut coeffs = vec![Complex64::new(0.0, 0.0); k + 1];
                coeffs[k] = Complex64::new(1.0, 0.0);
                let direct = poly_calculus(&l, &coeffs, PolyRoute::Direct)?;
                let contour = poly_calculus(&l, &coeffs, PolyRoute::Contour)?;
                let err = spectral_norm(&direct.sub(&contour)?)? / spectral_norm(&direct)?;
                worst = worst.max(err);
                count += 1;
            }
        }
    }
    Ok(Outcome::new(worst <= 1e-10, format!("{count} cases, max relative error {worst:.2e} (bound 1e-10)")))
}

fn sqrt_correctness(cases: &[Case]) -> Result<Outcome> {
    let (mut rc, mut ro, mut rk, mut dis) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    let mut worst_case = "";
    for c in cases {
        rc = rc.max(c.contour.residual);
        ro = ro.max(c.oracle.residual);
        rk = rk.max(c.kreyszig.residual);
        let d = op_dist(&c.contour.root, &c.oracle.root)?
            .max(op_dist(&c.contour.root, &c.kreyszig.root)?)
            .max(op_dist(&c.oracle.root, &c.kreyszig.root)?);
        if d > dis {
            dis = d;
            worst_case = &c.label;
        }
    }
    let passed = rc <= 1e-10 && ro <= 1e-10 && rk <= 1e-8 && dis <= 1e-8;
    Ok(Outcome::new(
        passed,
        format!(
            "{} matrices, residual contour {rc:.2e} oracle {ro:.2e} kreyszig {rk:.2e}, disagreement {dis:.2e} ({worst_case})",
            cases.len()
        ),
    ))
}

fn self_adjointness(cases: &[Case]) -> Result<Outcome> {
    let mut worst = 0.0_f64;
    for c in cases {
        // ‖raw‖_F² = ‖H‖_F² + ‖K‖_F² splits the raw output into its
        // Hermitian and anti-Hermitian parts.
        let r = c.contour.raw_asymmetry.expect("contour diagnostics");
        let raw_frob = c.contour.root.matrix().frobenius_norm() / (1.0 - r * r).sqrt();
        let residue = r * raw_frob;
        worst = worst.max(residue / operator_norm(&c.contour.root)?);
    }
    Ok(Outcome::new(worst <= 1e-10, format!("max residue/‖γ(L)‖ {worst:.2e} (bound 1e-10)")))
}

fn spectral_mapping(cases: &[Case]) -> Result<Outcome> {
    let square = |z: Complex64| z * z;
    let fs: [(&str, &ScalarFn); 2] = [("γ", &gamma_unchecked), ("λ²", &square)];
    let mut worst = [0.0_f64; 2];
    for c in cases {
        for (k, (_, f)) in fs.iter().enumerate() {
            worst[k] = worst[k].max(spectral_mapping_check(&c.l, *f)?.max_pairing_distance);
        }
    }
    Ok(Outcome::new(
        worst.iter().all(|&w| w <= 1e-8),
        format!("max pairing distance γ {:.2e}, λ² {:.2e} (bound 1e-8)", worst[0], worst[1]),
    ))
}

fn product_rule(cases: &[Case]) -> Result<Outcome> {
    let mut worst = 0.0_f64;
    for c in cases {
        worst = worst.max(product_rule_residual(&c.l, SQRT_TOL)?);
    }
    Ok(Outcome::new(worst <= 1e-9, format!("max ‖γ(L)·γ(L) − L‖/‖L‖ {worst:.2e} (bound 1e-9)")))
}

fn positivity_bound(cases: &[Case]) -> Result<Outcome> {
    let mut violations = 0;
    let mut min_gap = f64::INFINITY;
    for c in cases {
        let ok = c.cert.c_bound > 0.0 && c.cert.c_bound <= c.cert.rayleigh_min;
        violations += usize::from(!ok);
        min_gap = min_gap.min(c.cert.rayleigh_min - c.cert.c_bound);
    }
    let mut tight = 0.0_f64;
    for alpha in [0.25, 1.0, 3.0, 17.5] {
        for n in [1usize, 3, 8] {
            let l = identity(n).scaled(alpha);
            let c = positivity_bound_c(&l)?;
            let m = eig_oracle(&l)?.min();
            tight = tight.max((c - m).abs() / m);
        }
    }
    Ok(Outcome::new(
        violations == 0 && tight <= 1e-12,
        format!("{violations} violations of 0 < c ≤ m, min gap {min_gap:.2e}; scalar-identity mismatch {tight:.2e}"),
    ))
}

fn convexity() -> Result<Outcome> {
    let mut failures = 0;
    let mut slack = f64::INFINITY;
    let mut total = 0;
    for pair in 0..100u64 {
        let n = 2 + (pair % 7) as usize;
        let cond = [1.0, 10.0, 1e3][(pair % 3) as usize];
        let a = random_pd(n, cond, 50_000 + 2 * pair);
        let b = random_pd(n, 10.0, 50_001 + 2 * pair).scaled(1.0 + (pair % 5) as f64);
        let (ca, cb) = (certify(&a)?, certify(&b)?);
        for k in 0..=10 {
            total += 1;
            match convex_combination_certified(&a, &ca, &b, &cb, k as f64 / 10.0) {
                Ok(c) => slack = slack.min(c.certificate.rayleigh_min - c.floor),
                Err(_) => failures += 1,
            }
        }
    }
    Ok(Outcome::new(
        failures == 0,
        format!("{total} combinations, {failures} failures, min (m − floor) {slack:.2e}"),
    ))
}

fn bases() -> Vec<HermitianOperator> {
    vec![
        identity(3),
        HermitianOperator::from_real_diag(&[2.0, 5.0]),
        random_pd(4, 10.0, 71),
        random_pd(6, 100.0, 72).scaled(3.0),
        random_pd(8, 1e3, 73),
    ]
}

fn openness() -> Result<Outcome> {
    let mut failures = 0;
    let mut total = 0;
    for (b, l) in bases().iter().enumerate() {
        let ball = openness_radius(l, BallVariant::Openness)?;
        for k in 0..40 {
            let t = perturb_in_ball(&ball, 80_000 + 100 * b as u64 + k, 0.99)?;
            total += 1;
            let ok = certify(&t).is_ok() && is_regular_value(&t, Complex64::new(0.0, 0.0));
            failures += usize::from(!ok);
        }
    }
    Ok(Outcome::new(failures == 0, format!("{total} perturbations at 0.99·r, {failures} not positive or singular")))
}

fn spectral_inclusion() -> Result<Outcome> {
    let mut failures = 0;
    let mut total = 0;
    for (b, l) in bases().iter().enumerate() {
        let ball = openness_radius(l, BallVariant::Continuity)?;
        let c = &ball.certificate;
        for k in 0..40 {
            let fraction = (k as f64 + 1.0) / 40.0 * 0.999;
            let t = perturb_in_ball(&ball, 90_000 + 100 * b as u64 + k, fraction)?;
            total += 1;
            failures += usize::from(!spectral_inclusion_check(&t, c.c_bound, c.norm_l)?);
        }
    }
    Ok(Outcome::new(failures == 0, format!("{total} perturbations, {failures} outside (c/3, ‖L‖ + c/2)")))
}

fn continuity_modulus() -> Result<Outcome> {
    let mut ok = true;
    let mut parts = Vec::new();
    for (b, l) in bases().iter().enumerate() {
        let r = probe_continuity(l, &ProbeOptions::new(50, 100 + b as u64))?;
        ok &= r.within_budget() && r.skipped == 0;
        parts.push(format!("{:.2e}/{:.2e}", r.max_ratio, r.budget.coefficient));
    }
    let near = probe_continuity(&identity(4), &ProbeOptions { max_fraction: 0.1, ..ProbeOptions::new(50, 200) })?;
    let sane = (near.min_ratio - 0.5).abs() <= 0.025 && (near.max_ratio - 0.5).abs() <= 0.025;
    Ok(Outcome::new(
        ok && sane,
        format!(
            "ratio/budget per base [{}]; near identity ratios in [{:.4}, {:.4}]",
            parts.join(", "),
            near.min_ratio,
            near.max_ratio
        ),
    ))
}

fn roundtrip(cases: &[Case]) -> Result<Outcome> {
    let mut worst = (0.0_f64, 0.0_f64);
    for c in cases {
        let r = homeomorphism_roundtrip(&c.l, SQRT_TOL)?;
        worst.0 = worst.0.max(r.sqrt_then_square);
        worst.1 = worst.1.max(r.square_then_sqrt);
    }
    Ok(Outcome::new(
        worst.0 <= 1e-9 && worst.1 <= 1e-9,
        format!("max (√L)² − L {:.2e}, √(L²) − L {:.2e} (bound 1e-9)", worst.0, worst.1),
    ))
}

fn ml_bound(cases: &[Case]) -> Result<Outcome> {
    let mut levels = 0;
    let mut violations = 0;
    let mut tightest = 0.0_f64;
    for c in cases {
        let report = c.contour.quadrature.as_ref().expect("contour diagnostics");
        let (gamma, opts) = ContourSettings::default().plan(&c.cert)?;
        let spectrum = eig_oracle(&c.l)?.eigenvalues;
        for (&n, &norm) in report.node_counts.iter().zip(&report.sum_norms) {
            let p = Partition::graded(&gamma, n, opts.density)?;
            // ‖(L − ζI)⁻¹‖ = 1/dist(ζ, σ(L)) for Hermitian L.
            let m_hat = p
                .tags
                .iter()
                .map(|&z| {
                    let d = spectrum.iter().map(|&x| (z - x).norm()).fold(f64::INFINITY, f64::min);
                    gamma_unchecked(z).norm() / d
                })
                .fold(0.0, f64::max);
            let bound = m_hat * gamma.length() / (2.0 * PI);
            levels += 1;
            violations += usize::from(norm > bound);
            tightest = tightest.max(norm / bound);
        }
    }
    Ok(Outcome::new(
        violations == 0,
        format!("{levels} partial sums, {violations} violations, max ‖F‖/(M̂l/2π) {tightest:.3}"),
    ))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let cases = match build_cases() {
        Ok(c) => c,
        Err(e) => {
            println!("FAIL setup: {e}");
            return ExitCode::FAILURE;
        }
    };
    println!("setup: {} matrices in {:.1}s", cases.len(), start.elapsed().as_secs_f64());

    type Check<'a> = Box<dyn Fn() -> Result<Outcome> + 'a>;
    let checks: Vec<(&str, Check)> = vec![
        ("C01 polynomial reproduction", Box::new(polynomial_reproduction)),
        ("C02 square-root correctness", Box::new(|| sqrt_correctness(&cases))),
        ("C03 self-adjointness of γ(L)", Box::new(|| self_adjointness(&cases))),
        ("C04 spectral mapping", Box::new(|| spectral_mapping(&cases))),
        ("C05 product rule", Box::new(|| product_rule(&cases))),
        ("C06 positivity bound", Box::new(|| positivity_bound(&cases))),
        ("C07 convexity", Box::new(convexity)),
        ("C08 openness", Box::new(openness)),
        ("C09 spectral inclusion", Box::new(spectral_inclusion)),
        ("C10 continuity modulus", Box::new(continuity_modulus)),
        ("C11 homeomorphism round trip", Box::new(|| roundtrip(&cases))),
        ("C12 ML bound", Box::new(|| ml_bound(&cases))),
    ];

    let mut failed = 0;
    for (name, check) in &checks {
        let t = Instant::now();
        let outcome = check().unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        failed += usize::from(!outcome.passed);
        println!(
            "{} {name}: {} [{:.1}s]",
            if outcome.passed { "PASS" } else { "FAIL" },
            outcome.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {}/{} passed in {:.1}s",
        checks.len() - failed,
        checks.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
