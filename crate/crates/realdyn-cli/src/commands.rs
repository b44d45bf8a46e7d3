use std::io::Write;

use num_complex::Complex;
use realdyn::blaschke::{
    cantor_certificate, circle_julia_certificate, circle_multiplier, joukowsky_quotient,
    parabolic_full_form, CertificateKind, MaximalEntropyCertificate, QuotientMode,
};
use realdyn::degree::{quadrature_degree, topological_degree_seeded};
use realdyn::entropy::{
    lap_entropy_within_budget, preimage_growth_entropy, rotation_number, EntropyEstimate, POINT_BUDGET,
};
use realdyn::families::{grid, linspace, sweep, Estimator, FamilySpec, SweepResult, FAMILY_NAMES};
use realdyn::julia::{classify_with_depth, sample_real_julia};
use realdyn::kneading::{estimate_from, kneading_determinant_with, KneadingInvariant};
use realdyn::{CirclePoint, RealRationalMap};
use serde_json::{json, Value};

use crate::expr::{parse_map, parse_poly};
use crate::output::{
    csv_error, csv_writer, entropy_cells, estimate_fields, merge, point, point_text, write_json,
    ENTROPY_COLUMNS,
};
use crate::{CertKind, Cli, CliError, Command, Format, MethodArg, QuotientArg, RunConfig};

const PREIMAGE_BASE: f64 = 0.577_215_664_901_532_9;
const QUADRATURE_POINTS: usize = 4096;

pub fn dispatch(cli: &Cli, cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let method = cli.opts.method.unwrap_or(MethodArg::Auto);
    let format = cli.opts.format;
    let json_only = |name: &str| match format {
        Some(Format::Csv) => Err(CliError::input(format!("{name} has no CSV output"))),
        _ => Ok(()),
    };
    match &cli.command {
        Command::Entropy { map, point } => {
            let f = parse_map(map)?;
            entropy(&f, method, *point, cfg, format.unwrap_or(Format::Json), out)
        }
        Command::Degree { map } => {
            json_only("degree")?;
            let f = parse_map(map)?;
            let mut v = header("degree", &f, cfg)?;
            v["quadrature"] = json!(quadrature_degree(&f, QUADRATURE_POINTS));
            write_json(out, &v)
        }
        Command::Kneading { map } => {
            json_only("kneading")?;
            let f = parse_map(map)?;
            let inv = kneading_determinant_with(&f, cfg.max_iter)?;
            let v = merge(header("kneading", &f, cfg)?, kneading_fields(&inv));
            write_json(out, &v)
        }
        Command::Classify { map } => {
            json_only("classify")?;
            let f = parse_map(map)?;
            let shape = classify_with_depth(&f, cfg.depth)?;
            let mut v = header("classify", &f, cfg)?;
            v["kind"] = serde_json::to_value(shape.kind).expect("enum serializes");
            v["interval"] = match &shape.interval {
                Some((a, b)) => json!([point(a), point(b)]),
                None => Value::Null,
            };
            v["evidence"] = json!(shape.evidence);
            write_json(out, &v)
        }
        Command::JuliaSample { map } => {
            let f = parse_map(map)?;
            julia_sample(&f, cfg, format.unwrap_or(Format::Csv), out)
        }
        Command::Rotation { map } => {
            json_only("rotation")?;
            let f = parse_map(map)?;
            let rho = rotation_number(&f, cfg.max_iter)?;
            let mut v = header("rotation", &f, cfg)?;
            v["rotation_number"] = json!(rho);
            v["iterations"] = json!(cfg.max_iter);
            write_json(out, &v)
        }
        Command::BlaschkeCert {
            kind,
            zeros,
            theta0,
            orientation,
            p,
            q,
            eps,
        } => {
            json_only("blaschke-cert")?;
            let cert = match kind {
                CertKind::Cantor => cantor_certificate(&parse_zeros(zeros.as_deref())?, *theta0)?,
                CertKind::Circle => circle_julia_certificate(&parse_zeros(zeros.as_deref())?, *orientation)?,
                CertKind::Parabolic => {
                    let p = parse_poly(p.as_deref().ok_or_else(|| CliError::input("--p is required"))?)?;
                    let q = parse_poly(q.as_deref().ok_or_else(|| CliError::input("--q is required"))?)?;
                    parabolic_full_form(&p, &q, *eps)?.certificate()?
                }
            };
            write_json(out, &certificate_fields(&cert, cfg)?)
        }
        Command::Quotient { map, mode } => {
            json_only("quotient")?;
            let g = parse_map(map)?;
            let mode = match mode {
                QuotientArg::Joukowsky => QuotientMode::Joukowsky,
                QuotientArg::Square => QuotientMode::Square,
            };
            let qt = joukowsky_quotient(&g, mode)?;
            let mut v = header("quotient", &g, cfg)?;
            v["mode"] = serde_json::to_value(mode).expect("enum serializes");
            v["quotient"] = json!(qt.map.to_string());
            v["quotient_degree"] = json!(qt.map.degree());
            v["residual"] = json!(qt.residual);
            v["exact"] = json!(qt.exact);
            write_json(out, &v)
        }
        Command::FamilySweep {
            family,
            lambda,
            c,
            order,
            degree,
            circle_degree,
            delta,
            params,
            check_constant,
        } => {
            let spec = FamilySpec::by_name(family).ok_or_else(|| {
                CliError::input(format!("unknown family {family:?}; known: {}", FAMILY_NAMES.join(", ")))
            })?;
            let mut given: Vec<(String, String)> = Vec::new();
            for (name, v) in [
                ("lambda", lambda),
                ("c", c),
                ("order", order),
                ("degree", degree),
                ("circle_degree", circle_degree),
                ("delta", delta),
            ] {
                if let Some(v) = v {
                    given.push((name.to_string(), v.clone()));
                }
            }
            for p in params {
                let (k, v) = p
                    .split_once('=')
                    .ok_or_else(|| CliError::input(format!("--param expects name=range, got {p:?}")))?;
                given.push((k.trim().to_string(), v.trim().to_string()));
            }
            let axes = sweep_axes(&spec, &given)?;
            let estimator = match method {
                MethodArg::Lap => Estimator::Lap(cfg.depth),
                MethodArg::Preimage => Estimator::Preimage(cfg.depth),
                MethodArg::Kneading => Estimator::Kneading,
                MethodArg::Auto => Estimator::Auto(cfg.depth),
            };
            let tol = check_constant.unwrap_or(cfg.tolerance);
            let r = sweep(&spec, &grid(&axes), estimator, tol);
            match format.unwrap_or(Format::Csv) {
                Format::Csv => sweep_csv(&r, out)?,
                Format::Json => write_json(out, &sweep_json(&r))?,
            }
            writeln!(err, "{}", sweep_summary(&r))?;
            if check_constant.is_some() && !r.constant {
                return Err(CliError::precondition(format!(
                    "entropy not constant within {tol} over the sweep"
                )));
            }
            Ok(())
        }
        Command::Verify => {
            json_only("verify")?;
            let checks = verify_checks(cfg);
            let passed = checks.iter().all(|c| c["passed"] == json!(true));
            write_json(out, &json!({"command": "verify", "checks": checks, "passed": passed}))?;
            if passed {
                Ok(())
            } else {
                Err(CliError::precondition("verification failed"))
            }
        }
    }
}

/// Fields shared by every single-map payload.
fn header(command: &str, f: &RealRationalMap, cfg: &RunConfig) -> Result<Value, CliError> {
    let s = topological_degree_seeded(f, cfg.seed)?;
    Ok(json!({
        "command": command,
        "map": f.to_string(),
        "d": f.degree(),
        "s": s,
    }))
}

fn kneading_fields(inv: &KneadingInvariant) -> Value {
    let (lo, hi) = inv.entropy_bracket();
    json!({
        "entropy": inv.entropy,
        "bracket": [lo, hi],
        "bracket_width": hi - lo,
        "determinant": inv.determinant.to_string(),
        "growth_polynomial": inv.growth_polynomial().to_string(),
        "shapes": inv.shapes,
        "coordinates": inv.coordinates.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "cut": inv.cut.as_ref().map(point),
        "minors_consistent": inv.minors_consistent(),
    })
}

fn entropy(
    f: &RealRationalMap,
    method: MethodArg,
    base: Option<f64>,
    cfg: &RunConfig,
    format: Format,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let lap = || lap_entropy_within_budget(f, cfg.depth, POINT_BUDGET);
    let (est, inv): (EntropyEstimate, Option<KneadingInvariant>) = match method {
        MethodArg::Lap => (lap()?, None),
        MethodArg::Preimage => {
            let x = CirclePoint::finite(base.unwrap_or(PREIMAGE_BASE));
            (preimage_growth_entropy(f, &x, cfg.depth)?, None)
        }
        MethodArg::Kneading => {
            let inv = kneading_determinant_with(f, cfg.max_iter)?;
            (estimate_from(&inv), Some(inv))
        }
        MethodArg::Auto => match kneading_determinant_with(f, cfg.max_iter) {
            Ok(inv) => (estimate_from(&inv), Some(inv)),
            Err(_) => (lap()?, None),
        },
    };
    let s = topological_degree_seeded(f, cfg.seed)?;
    match format {
        Format::Json => {
            let mut v = merge(header("entropy", f, cfg)?, estimate_fields(&est));
            let (width, poly) = match &inv {
                Some(inv) => {
                    let (lo, hi) = inv.entropy_bracket();
                    (json!(hi - lo), json!(inv.growth_polynomial().to_string()))
                }
                None => (Value::Null, Value::Null),
            };
            v["bracket_width"] = width;
            v["growth_polynomial"] = poly;
            write_json(out, &v)
        }
        Format::Csv => {
            let mut w = csv_writer(out);
            w.write_record(ENTROPY_COLUMNS).map_err(csv_error)?;
            w.write_record(entropy_cells(Some(f.degree() as i64), Some(s), Some(&est), "ok"))
                .map_err(csv_error)?;
            w.flush()?;
            Ok(())
        }
    }
}

fn julia_sample(f: &RealRationalMap, cfg: &RunConfig, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    let sample = sample_real_julia(f, cfg.depth)?;
    match format {
        Format::Csv => {
            let mut w = csv_writer(out);
            w.write_record(["level", "t", "x"]).map_err(csv_error)?;
            for (k, level) in sample.levels.iter().enumerate() {
                let mut pts = level.clone();
                pts.sort_by(|a, b| a.cmp_angle(b));
                for p in &pts {
                    w.write_record([k.to_string(), p.angle().to_string(), point_text(p)])
                        .map_err(csv_error)?;
                }
            }
            w.flush()?;
            Ok(())
        }
        Format::Json => {
            let mut v = header("julia-sample", f, cfg)?;
            v["depth"] = json!(sample.depth);
            v["seed_point"] = point(&sample.seed);
            v["seed_multiplier"] = json!(sample.seed_multiplier);
            v["size"] = json!(sample.points.len());
            v["backward_defect"] = json!(sample.backward_defect(f));
            v["widest_gap"] = match sample.widest_gap() {
                Some((a, b, len)) => json!({"from": point(&a), "to": point(&b), "length": len}),
                None => Value::Null,
            };
            write_json(out, &v)
        }
    }
}

fn parse_zeros(text: Option<&str>) -> Result<Vec<Complex<f64>>, CliError> {
    let text = text.ok_or_else(|| CliError::input("--zeros is required"))?;
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            let s = s.trim();
            let (re, im) = s.split_once(':').unwrap_or((s, "0"));
            match (re.trim().parse::<f64>(), im.trim().parse::<f64>()) {
                (Ok(a), Ok(b)) => Ok(Complex::new(a, b)),
                _ => Err(CliError::input(format!("bad zero {s:?}"))),
            }
        })
        .collect()
}

fn certificate_fields(cert: &MaximalEntropyCertificate, cfg: &RunConfig) -> Result<Value, CliError> {
    let mut v = header("blaschke-cert", &cert.map, cfg)?;
    v["kind"] = serde_json::to_value(cert.kind).expect("enum serializes");
    v["theta0"] = json!(cert.theta0);
    v["multiplier"] = json!(cert.multiplier);
    v["verified"] = json!(cert.verify().is_ok());
    v["fixed_point_residual"] = match (cert.kind, &cert.product, cert.theta0) {
        (CertificateKind::CantorFixedPoint, Some(b), Some(th)) => {
            let z = Complex::from_polar(1.0, 2.0 * std::f64::consts::PI * th);
            json!((b.eval(z) - z).norm())
        }
        _ => Value::Null,
    };
    v["circle_multiplier"] = match (cert.kind, &cert.product, cert.theta0) {
        (CertificateKind::CantorFixedPoint, Some(b), Some(th)) => json!(circle_multiplier(b, th)?),
        _ => Value::Null,
    };
    Ok(v)
}

/// Parses `lo:hi:n`, `a,b,c` or a single number.
pub fn parse_range(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::input(format!("bad range {text:?}; use lo:hi:n, a,b,c or a number"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [lo, hi, n] => {
            let n: usize = n.trim().parse().map_err(|_| bad())?;
            if n == 0 {
                return Err(bad());
            }
            Ok(linspace(num(lo)?, num(hi)?, n))
        }
        [one] => one.split(',').map(num).collect(),
        _ => Err(bad()),
    }
}

fn sweep_axes(spec: &FamilySpec, given: &[(String, String)]) -> Result<Vec<Vec<f64>>, CliError> {
    for (k, _) in given {
        if !spec.parameters.iter().any(|r| &r.name == k) {
            return Err(CliError::input(format!("{} has no parameter {k:?}", spec.name)));
        }
    }
    spec.parameters
        .iter()
        .map(|r| {
            let (_, v) = given
                .iter()
                .rev()
                .find(|(k, _)| *k == r.name)
                .ok_or_else(|| {
                    CliError::input(format!("{} needs --{}", spec.name, r.name.replace('_', "-")))
                })?;
            parse_range(v)
        })
        .collect()
}

fn sweep_csv(r: &SweepResult, out: &mut dyn Write) -> Result<(), CliError> {
    let mut w = csv_writer(out);
    let mut head: Vec<String> = r.parameter_names.clone();
    head.extend(ENTROPY_COLUMNS.iter().map(|s| s.to_string()));
    w.write_record(&head).map_err(csv_error)?;
    for row in &r.rows {
        let mut cells: Vec<String> = row.params.iter().map(|x| x.to_string()).collect();
        let status = match &row.error {
            Some(e) => format!("error: {e}"),
            None => "ok".into(),
        };
        cells.extend(entropy_cells(
            row.label.map(|l| l.algebraic_degree),
            row.label.map(|l| l.circle_degree),
            row.estimate.as_ref(),
            &status,
        ));
        w.write_record(&cells).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn sweep_json(r: &SweepResult) -> Value {
    let rows: Vec<Value> = r
        .rows
        .iter()
        .map(|row| {
            json!({
                "params": row.params,
                "d": row.label.map(|l| l.algebraic_degree),
                "s": row.label.map(|l| l.circle_degree),
                "estimate": row.estimate.as_ref().map(estimate_fields),
                "status": match &row.error { Some(e) => format!("error: {e}"), None => "ok".into() },
            })
        })
        .collect();
    json!({
        "command": "family-sweep",
        "family": r.family,
        "parameters": r.parameter_names,
        "rows": rows,
        "min": r.min,
        "max": r.max,
        "median": r.median,
        "tolerance": r.tolerance,
        "constant": r.constant,
    })
}

pub fn sweep_summary(r: &SweepResult) -> String {
    let f = |x: Option<f64>| x.map_or("none".to_string(), |v| v.to_string());
    format!(
        "summary: family={} rows={} min={} max={} median={} tolerance={} constant={}",
        r.family,
        r.rows.len(),
        f(r.min),
        f(r.max),
        f(r.median),
        r.tolerance,
        r.constant
    )
}

fn check(name: &str, value: f64, expected: f64, tol: f64) -> Value {
    json!({
        "name": name,
        "value": value,
        "expected": expected,
        "tolerance": tol,
        "passed": (value - expected).abs() <= tol,
    })
}

fn failed(name: &str, expected: f64, tol: f64, e: impl std::fmt::Display) -> Value {
    json!({
        "name": name,
        "value": null,
        "expected": expected,
        "tolerance": tol,
        "passed": false,
        "error": e.to_string(),
    })
}

/// Closed-form values the library must reproduce.
fn verify_checks(cfg: &RunConfig) -> Vec<Value> {
    let ln2 = 2f64.ln();
    let lap = |text: &str, depth: usize| {
        parse_map(text)
            .map_err(|e| e.to_string())
            .and_then(|f| lap_entropy_within_budget(&f, depth, POINT_BUDGET).map_err(|e| e.to_string()))
            .map(|e| e.value)
    };
    let mut out = Vec::new();
    let mut push = |name: &str, v: Result<f64, String>, expected: f64, tol: f64| {
        out.push(match v {
            Ok(x) => check(name, x, expected, tol),
            Err(e) => failed(name, expected, tol, e),
        })
    };
    let knead = parse_map("z^3-3*z")
        .map_err(|e| e.to_string())
        .and_then(|f| kneading_determinant_with(&f, cfg.max_iter).map_err(|e| e.to_string()))
        .map(|inv| inv.entropy);
    push("chebyshev-3-kneading", knead, 3f64.ln(), 1e-11);
    push("quadratic-escaping", lap("z^2+1", 10), 0.0, cfg.tolerance);
    push("quadratic-full", lap("z^2-3", 10), ln2, cfg.tolerance);
    push("lattes-sqrt2", lap("-(1/4)*(z+1/z-2)", 10), 0.5 * ln2, cfg.tolerance);
    let deg = parse_map("z-1/z")
        .map_err(|e| e.to_string())
        .and_then(|f| topological_degree_seeded(&f, cfg.seed).map_err(|e| e.to_string()))
        .map(|s| s as f64);
    push("covering-degree", deg, 2.0, 0.0);
    let cert = cantor_certificate(&[Complex::new(0.9, 0.0), Complex::new(0.9, 0.0)], 0.5)
        .map(|c| c.multiplier)
        .map_err(|e| e.to_string());
    push("cantor-multiplier", cert, 2.0 * 0.19 / 3.61, 1e-12);
    let quotient = parse_map("z^2")
        .map_err(|e| e.to_string())
        .and_then(|g| joukowsky_quotient(&g, QuotientMode::Joukowsky).map_err(|e| e.to_string()))
        .and_then(|q| parse_map("z^2-2").map_err(|e| e.to_string()).map(|t| (q.map == t) as u8 as f64));
    push("joukowsky-quotient-of-square", quotient, 1.0, 0.0);
    out
}
