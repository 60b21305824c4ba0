use std::path::{Path, PathBuf};

use possqrt_core::matrix::{make_hermitian, operator_norm, spectral_norm};
use possqrt_core::spectral::{certify, eig_oracle, is_regular_value, positivity_bound_c, PositivityCertificate};
use possqrt_core::sqrt::{
    commutator_residual, gamma_unchecked, poly_calculus, product_rule_residual, spectral_mapping_check,
    sqrt_contour_with, sqrt_kreyszig, sqrt_oracle, ContourSettings, PolyRoute, SqrtMethod, SqrtResult,
    DEFAULT_KREYSZIG_MAX_ITER, DEFAULT_KREYSZIG_TOL,
};
use possqrt_core::topology::{
    convex_combination_certified, homeomorphism_roundtrip, probe_continuity, ProbeOptions,
};
use possqrt_core::{Complex64, Error, HermitianOperator};
use serde_json::{json, Map, Value};

use crate::error::CliError;
use crate::matrix_file;
use crate::report::{num, nums, quadrature, RunReport};

/// Relative asymmetry admitted when reading a matrix file.
pub const ADMIT_TOL: f64 = 1e-10;
pub const DEFAULT_CONTOUR_TOL: f64 = 1e-12;

const ROOT_RESIDUAL_BOUND: f64 = 1e-10;
const AGREEMENT_BOUND: f64 = 1e-8;
const COMMUTATION_BOUND: f64 = 1e-9;
const PRODUCT_RULE_BOUND: f64 = 1e-9;
const ROUNDTRIP_BOUND: f64 = 1e-9;

pub type Outcome = Result<(), CliError>;

fn load_hermitian(path: &Path, report: &mut RunReport) -> Result<(HermitianOperator, Option<String>), CliError> {
    let file = matrix_file::load(path)?;
    report.input(path, &file.digest, file.seed);
    Ok((make_hermitian(&file.matrix, ADMIT_TOL)?, file.label))
}

fn certificate(c: &PositivityCertificate) -> Value {
    json!({
        "norm": num(c.norm_l),
        "inverse_norm": num(c.inv_norm),
        "c": num(c.c_bound),
        "rayleigh_interval": [num(c.rayleigh_min), num(c.rayleigh_max)],
    })
}

fn sqrt_diagnostics(r: &SqrtResult) -> Value {
    let mut d = Map::new();
    d.insert("residual".into(), num(r.residual));
    d.insert("positivity_floor".into(), num(r.positivity_floor));
    if let Some(q) = &r.quadrature {
        d.insert("quadrature".into(), quadrature(q));
    }
    if let Some(a) = r.raw_asymmetry {
        d.insert("raw_asymmetry".into(), num(a));
    }
    if let Some(i) = r.iterations {
        d.insert("iterations".into(), json!(i));
    }
    Value::Object(d)
}

fn run_method(l: &HermitianOperator, method: SqrtMethod, tol: Option<f64>, nodes: usize) -> Result<SqrtResult, Error> {
    match method {
        SqrtMethod::Contour => {
            let settings =
                ContourSettings { tol: tol.unwrap_or(DEFAULT_CONTOUR_TOL), n0: nodes, ..Default::default() };
            sqrt_contour_with(l, &settings)
        }
        SqrtMethod::Kreyszig => sqrt_kreyszig(l, tol.unwrap_or(DEFAULT_KREYSZIG_TOL), DEFAULT_KREYSZIG_MAX_ITER),
        SqrtMethod::Oracle => sqrt_oracle(l),
    }
}

/// `root.json` → `root.contour.json` for multi-method runs.
fn method_path(out: &Path, method: SqrtMethod) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = out.extension().map(|e| e.to_string_lossy().into_owned()).unwrap_or_else(|| "json".into());
    out.with_file_name(format!("{stem}.{}.{ext}", method.name()))
}

fn root_label(label: Option<&str>, method: SqrtMethod) -> String {
    match label {
        Some(l) => format!("sqrt({l}) by {method}"),
        None => format!("sqrt by {method}"),
    }
}

pub fn sqrt(
    report: &mut RunReport,
    input: &Path,
    methods: &[SqrtMethod],
    tol: Option<f64>,
    nodes: usize,
    out: Option<&Path>,
) -> Outcome {
    let (l, label) = load_hermitian(input, report)?;
    let mut results = Vec::new();
    for &method in methods {
        let r = run_method(&l, method, tol, nodes)?;
        report.diagnostics.insert(method.name().into(), sqrt_diagnostics(&r));
        results.push((method, r));
    }
    if let Some(out) = out {
        let mut files = Map::new();
        for (method, r) in &results {
            let path = if methods.len() == 1 { out.to_path_buf() } else { method_path(out, *method) };
            matrix_file::write(&path, r.root.matrix(), Some(&root_label(label.as_deref(), *method)))?;
            files.insert(method.name().into(), json!(path.display().to_string()));
        }
        report.outputs.insert("files".into(), Value::Object(files));
    }
    if results.len() > 1 {
        let mut pairs = Map::new();
        let mut worst = 0.0_f64;
        for (i, (ma, ra)) in results.iter().enumerate() {
            for (mb, rb) in &results[i + 1..] {
                let d = spectral_norm(&ra.root.matrix().sub(rb.root.matrix())?)?;
                worst = worst.max(d);
                pairs.insert(format!("{ma}-{mb}"), num(d));
            }
        }
        report.outputs.insert("disagreement".into(), Value::Object(pairs));
        report.outputs.insert("max_disagreement".into(), num(worst));
    }
    let residuals: Map<String, Value> =
        results.iter().map(|(m, r)| (m.name().to_owned(), num(r.residual))).collect();
    report.outputs.insert("residual".into(), Value::Object(residuals));
    Ok(())
}

pub fn spectrum(report: &mut RunReport, input: &Path) -> Outcome {
    let (l, _) = load_hermitian(input, report)?;
    let eig = eig_oracle(&l)?;
    let norm = eig.eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let o = &mut report.outputs;
    o.insert("n".into(), json!(l.n()));
    o.insert("norm".into(), num(norm));
    let inverse_norm = if is_regular_value(&l, Complex64::new(0.0, 0.0)) {
        let smallest = eig.eigenvalues.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        num(1.0 / smallest)
    } else {
        json!("singular")
    };
    o.insert("inverse_norm".into(), inverse_norm);
    let c = match positivity_bound_c(&l) {
        Ok(c) => num(c),
        Err(Error::NotPositive(_) | Error::SingularShift { .. }) => json!("n/a (not positive)"),
        Err(e) => return Err(e.into()),
    };
    o.insert("c".into(), c);
    o.insert("rayleigh_interval".into(), json!([num(eig.min()), num(eig.max())]));
    o.insert("eigenvalues".into(), nums(&eig.eigenvalues));
    Ok(())
}

struct Check {
    name: &'static str,
    value: f64,
    bound: f64,
}

pub fn verify(report: &mut RunReport, input: &Path, tol: f64, nodes: usize) -> Outcome {
    let (l, _) = load_hermitian(input, report)?;
    let cert = certify(&l)?;
    report.diagnostics.insert("certificate".into(), certificate(&cert));

    let roots: Vec<SqrtResult> =
        SqrtMethod::ALL.iter().map(|&m| run_method(&l, m, Some(tol), nodes)).collect::<Result<_, _>>()?;
    let root_norm = operator_norm(&roots[0].root)?;
    let mut agreement = 0.0_f64;
    for i in 0..roots.len() {
        for j in (i + 1)..roots.len() {
            agreement = agreement.max(spectral_norm(&roots[i].root.matrix().sub(roots[j].root.matrix())?)?);
        }
    }
    let p = [0.5, -1.0, 0.25, 1.0 / 8.0].map(|a| Complex64::new(a, 0.0));
    let p_l = poly_calculus(&l, &p, PolyRoute::Direct)?;
    let commutation = commutator_residual(&p_l, roots[0].root.matrix())?;
    let square = |z: Complex64| z * z;
    let map_gamma = spectral_mapping_check(&l, &gamma_unchecked)?;
    let map_square = spectral_mapping_check(&l, &square)?;

    let checks = [
        Check { name: "square_root_residual", value: roots[0].residual, bound: ROOT_RESIDUAL_BOUND },
        Check { name: "method_agreement", value: agreement / root_norm, bound: AGREEMENT_BOUND },
        Check { name: "commutation", value: commutation, bound: COMMUTATION_BOUND },
        Check {
            name: "spectral_mapping_sqrt",
            value: map_gamma.max_pairing_distance,
            bound: map_gamma.tolerance,
        },
        Check {
            name: "spectral_mapping_square",
            value: map_square.max_pairing_distance,
            bound: map_square.tolerance,
        },
        Check { name: "product_rule", value: product_rule_residual(&l, tol)?, bound: PRODUCT_RULE_BOUND },
    ];
    let mut failed = Vec::new();
    for c in &checks {
        let passed = c.value <= c.bound;
        if !passed {
            failed.push(c.name);
        }
        report
            .outputs
            .insert(c.name.into(), json!({ "value": num(c.value), "bound": num(c.bound), "passed": passed }));
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::property(format!("properties failed: {}", failed.join(", "))))
    }
}

pub fn probe(report: &mut RunReport, input: &Path, trials: usize, seed: u64) -> Outcome {
    let (l, _) = load_hermitian(input, report)?;
    let r = probe_continuity(&l, &ProbeOptions::new(trials, seed))?;
    let rt = homeomorphism_roundtrip(&l, DEFAULT_CONTOUR_TOL)?;
    let b = &r.budget;
    report.diagnostics.insert(
        "budget".into(),
        json!({
            "m_gamma": num(b.m_gamma),
            "m_resolvent": num(b.m_resolvent),
            "length": num(b.length),
            "contour": { "center": num(b.contour.center()), "radius": num(b.contour.radius()) },
        }),
    );
    let o = &mut report.outputs;
    o.insert("trials".into(), json!(r.trials.len()));
    o.insert("skipped".into(), json!(r.skipped));
    o.insert("radius".into(), num(r.radius));
    o.insert("max_ratio".into(), num(r.max_ratio));
    o.insert("min_ratio".into(), if r.skipped < r.trials.len() { num(r.min_ratio) } else { Value::Null });
    o.insert("coefficient".into(), num(b.coefficient));
    o.insert("inclusion_passes".into(), json!(r.inclusion_passes));
    o.insert(
        "roundtrip".into(),
        json!({ "sqrt_then_square": num(rt.sqrt_then_square), "square_then_sqrt": num(rt.square_then_sqrt) }),
    );

    let mut failed = Vec::new();
    if !r.within_budget() {
        failed.push("continuity budget");
    }
    if r.inclusion_passes != r.trials.len() {
        failed.push("spectral inclusion");
    }
    if rt.max() > ROUNDTRIP_BOUND {
        failed.push("round trip");
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::property(format!("properties failed: {}", failed.join(", "))))
    }
}

pub fn convexity(report: &mut RunReport, a: &Path, b: &Path, steps: usize) -> Outcome {
    if steps == 0 {
        return Err(CliError::parse("steps must be positive"));
    }
    let (la, _) = load_hermitian(a, report)?;
    let (lb, _) = load_hermitian(b, report)?;
    if la.n() != lb.n() {
        return Err(Error::DimensionMismatch { left: la.n(), right: lb.n() }.into());
    }
    let (ca, cb) = (certify(&la)?, certify(&lb)?);
    report.diagnostics.insert("certificate_a".into(), certificate(&ca));
    report.diagnostics.insert("certificate_b".into(), certificate(&cb));

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut min_margin = f64::INFINITY;
    for k in 0..=steps {
        let t = k as f64 / steps as f64;
        match convex_combination_certified(&la, &ca, &lb, &cb, t) {
            Ok(c) => {
                min_margin = min_margin.min(c.certificate.rayleigh_min - c.floor);
                rows.push(json!({
                    "t": num(t),
                    "rayleigh_min": num(c.certificate.rayleigh_min),
                    "floor": num(c.floor),
                    "positive": true,
                }));
            }
            Err(Error::PropertyViolation(msg)) => {
                failures.push(msg);
                rows.push(json!({ "t": num(t), "positive": false }));
            }
            Err(e) => return Err(e.into()),
        }
    }
    report.outputs.insert("steps".into(), Value::Array(rows));
    report.outputs.insert("min_margin".into(), num(min_margin));
    report.outputs.insert("failures".into(), json!(failures.len()));
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::property(failures.join("; ")))
    }
}
