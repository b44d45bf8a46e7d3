//! End-to-end checks of the library against known closed-form values.
//!
//! Each criterion prints one `criterion N: PASS|FAIL: detail` line; the test fails
//! if any of them fails. Run with `--nocapture` to see the lines.

use std::f64::consts::{LN_2, PI};
use std::time::Instant;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use realdyn::blaschke::{
    cantor_certificate, cayley, circle_degree_of, joukowsky_quotient, BlaschkeProduct, QuotientMode,
};
use realdyn::degree::{component_label, topological_degree};
use realdyn::entropy::{
    cut_lap_counts, lap_counts, lap_entropy_within_budget, preimage_counts, preimage_growth_entropy,
    rotation_number, solve_real_preimages, EntropyEstimate, POINT_BUDGET,
};
use realdyn::families::{
    chebyshev, full_real_julia_family, lattes_legendre, lattes_rigid_sqrt2, lattes_rigid_sqrt3, linspace,
    quadratic, sweep, Estimator, FamilySpec,
};
use realdyn::julia::{classify_maximal, ShapeKind};
use realdyn::kneading::{kneading_determinant, KneadingInvariant};
use realdyn::scalar::rat_int;
use realdyn::{MobiusReal, Point64, QPoly, RealPolynomial, RealRationalMap};

type C64 = Complex<f64>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn lap(f: &RealRationalMap, depth: usize) -> EntropyEstimate {
    lap_entropy_within_budget(f, depth, POINT_BUDGET).expect("lap estimate")
}

fn map(p: &[i64], q: &[i64]) -> RealRationalMap {
    RealRationalMap::from_i64(p, q).unwrap()
}

/// Numerator of `f - g` after cross-multiplication.
fn difference_numerator(f: &RealRationalMap, g: &RealRationalMap) -> QPoly {
    &(f.numerator() * g.denominator()) - &(g.numerator() * f.denominator())
}

/// Random maps of degree 2..=5 with integer coefficients in [-5, 5].
fn corpus(n: usize, seed: u64) -> Vec<RealRationalMap> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < n {
        let d = rng.gen_range(2..=5usize);
        let other = rng.gen_range(0..=d);
        let (dp, dq) = if rng.gen_bool(0.5) { (d, other) } else { (other, d) };
        let mut coeffs = |k: usize| {
            let mut c: Vec<i64> = (0..=k).map(|_| rng.gen_range(-5..=5)).collect();
            while c[k] == 0 {
                c[k] = rng.gen_range(-5..=5);
            }
            c
        };
        let p = coeffs(dp);
        let q = coeffs(dq);
        if let Ok(f) = RealRationalMap::from_i64(&p, &q) {
            if f.degree() >= 2 {
                out.push(f);
            }
        }
    }
    out
}

fn random_mobius(rng: &mut ChaCha8Rng) -> MobiusReal {
    loop {
        let e: Vec<i64> = (0..4).map(|_| rng.gen_range(-3..=3)).collect();
        if let Ok(m) = MobiusReal::from_i64(e[0], e[1], e[2], e[3]) {
            return m;
        }
    }
}

const CORPUS_SEED: u64 = 2024;
const CORPUS_DEPTH: usize = 8;

fn chebyshev_entropies() -> Outcome {
    let mut bad = Vec::new();
    let mut worst_width: f64 = 0.0;
    let mut worst_lap: f64 = 0.0;
    for d in 2..=6usize {
        let f = chebyshev(d).unwrap();
        let h = (d as f64).ln();
        let inv = kneading_determinant(&f).unwrap();
        let (lo, hi) = inv.entropy_bracket();
        worst_width = worst_width.max(hi - lo);
        if !(hi - lo < 1e-11 && lo <= h + 1e-12 && h <= hi + 1e-12) {
            bad.push(format!("T{d} kneading [{lo}, {hi}]"));
        }
        let e = lap(&f, 10);
        worst_lap = worst_lap.max((e.value - h).abs());
        if (e.value - h).abs() >= 0.02 {
            bad.push(format!("T{d} lap {}", e.value));
        }
    }
    outcome(
        bad.is_empty(),
        format!("bracket width <= {worst_width:.1e}, lap error <= {worst_lap:.4} {bad:?}"),
    )
}

fn quadratic_dichotomy() -> Outcome {
    let h0 = lap(&quadratic(1.0), 12).value;
    let h1 = lap(&quadratic(-3.0), 12).value;
    outcome(
        h0.abs() < 0.02 && (h1 - LN_2).abs() < 0.02,
        format!("h(z^2+1) = {h0:.4}, h(z^2-3) = {h1:.4}"),
    )
}

fn rigid_lattes() -> Outcome {
    let cases = [
        ("sqrt2", lattes_rigid_sqrt2(), map(&[-1, 2, -1], &[0, 4]), 2f64.sqrt().ln()),
        ("sqrt3", lattes_rigid_sqrt3(), map(&[0, -81, 18, -1], &[27, -54, 27]), 3f64.sqrt().ln()),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, f, oracle, h) in cases {
        let same = f == oracle;
        let e = lap(&f, 12).value;
        let e2 = lap(&f.iterate(2).unwrap(), 6).value;
        let ok = same && (e - h).abs() < 0.02 && (e2 - 2.0 * e).abs() < 0.03;
        pass &= ok;
        parts.push(format!("{name}: h = {e:.4} (want {h:.4}), h(f^2) = {e2:.4}, formula {same}"));
    }
    outcome(pass, parts.join("; "))
}

fn legendre_rigidity() -> Outcome {
    let spec = FamilySpec::lattes_legendre();
    let grid: Vec<Vec<f64>> = linspace(0.1, 0.9, 9).into_iter().map(|l| vec![l]).collect();
    let r = sweep(&spec, &grid, Estimator::Lap(10), 0.02);
    let values: Vec<f64> = r.rows.iter().filter_map(|row| row.estimate.map(|e| e.value)).collect();
    let all_near = values.len() == 9 && values.iter().all(|h| (h - LN_2).abs() < 0.03);
    let spread = r.max.unwrap_or(f64::NAN) - r.min.unwrap_or(f64::NAN);
    // the family itself must be a genuine one-parameter family
    let distinct = lattes_legendre(0.1).unwrap() != lattes_legendre(0.9).unwrap();
    outcome(
        all_near && spread < 0.02 && distinct,
        format!("{} rows, spread {spread:.2e}, values {values:.4?}", values.len()),
    )
}

fn random_symmetric_product(rng: &mut ChaCha8Rng) -> BlaschkeProduct<f64> {
    loop {
        let mut inside = Vec::new();
        let mut outside = Vec::new();
        let d = rng.gen_range(2..=6usize);
        while inside.len() + outside.len() < d {
            let r = rng.gen_range(0.05..0.9);
            let pair = inside.len() + outside.len() + 2 <= d && rng.gen_bool(0.5);
            let zeros = if pair {
                let phi = rng.gen_range(0.2..PI - 0.2);
                let z = C64::from_polar(r, phi);
                vec![z, z.conj()]
            } else {
                vec![C64::new(if rng.gen_bool(0.5) { r } else { -r }, 0.0)]
            };
            if rng.gen_bool(0.5) {
                inside.extend(zeros);
            } else {
                outside.extend(zeros.into_iter().map(|z| z / z.norm_sqr()));
            }
        }
        let rotation = if rng.gen_bool(0.5) { 0.0 } else { 0.5 };
        if let Ok(b) = BlaschkeProduct::new(inside, outside, rotation, rng.gen_bool(0.5)) {
            return b;
        }
    }
}

fn blaschke_degree_formula() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut mismatches = Vec::new();
    for i in 0..200 {
        let b = random_symmetric_product(&mut rng);
        let k = b.inside_zeros.len() as i64;
        let d = b.degree() as i64;
        let expected = if b.reciprocal_post { d - 2 * k } else { 2 * k - d };
        let closed = circle_degree_of(&b);
        let crossing = cayley(&b).and_then(|f| topological_degree(&f));
        if closed != expected || crossing != Ok(expected) {
            mismatches.push(format!("#{i}: want {expected}, closed {closed}, crossing {crossing:?}"));
        }
    }
    outcome(
        mismatches.is_empty(),
        format!("200 products, {} mismatches {:?}", mismatches.len(), mismatches.iter().take(3).collect::<Vec<_>>()),
    )
}

fn cantor_certificate_check() -> Outcome {
    let zeros = [C64::new(0.9, 0.0), C64::new(0.9, 0.0)];
    let cert = match cantor_certificate(&zeros, 0.5) {
        Ok(c) => c,
        Err(e) => return outcome(false, format!("construction failed: {e}")),
    };
    let b = cert.product.as_ref().unwrap();
    let residual = (b.eval(C64::new(-1.0, 0.0)) - C64::new(-1.0, 0.0)).norm();
    // sum of (1 - |a|^2) / |z0 - a|^2 at z0 = -1
    let oracle: f64 = zeros.iter().map(|a| (1.0 - a.norm_sqr()) / (C64::new(-1.0, 0.0) - a).norm_sqr()).sum();
    let h = lap(&cert.map, 12).value;
    let kind = classify_maximal(&cert.map).map(|s| s.kind);
    let pass = residual < 1e-10
        && (cert.multiplier - oracle).abs() < 1e-6
        // 0.10526 is the oracle rounded to five places
        && (oracle * 1e5).round() == 10526.0
        && (h - LN_2).abs() < 0.03
        && kind == Ok(ShapeKind::Cantor)
        && cert.verify().is_ok();
    outcome(
        pass,
        format!(
            "residual {residual:.1e}, multiplier {:.7} (oracle {oracle:.7}), h = {h:.4}, kind {kind:?}",
            cert.multiplier
        ),
    )
}

fn trichotomy() -> Outcome {
    let cases = [
        ("z-1/z", map(&[-1, 0, 1], &[0, 1]), ShapeKind::Circle),
        ("z+1/z-2", map(&[1, -2, 1], &[0, 1]), ShapeKind::Interval),
        ("z-1/z+1", map(&[-1, 1, 1], &[0, 1]), ShapeKind::Cantor),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, f, want) in cases {
        let got = classify_maximal(&f).map(|s| s.kind);
        pass &= got == Ok(want);
        parts.push(format!("{name} -> {got:?}"));
    }
    outcome(pass, parts.join(", "))
}

fn quotient_identities() -> Outcome {
    let j = map(&[1, 0, 1], &[0, 1]);
    let sq = map(&[0, 0, 1], &[1]);
    let t2 = map(&[-2, 0, 1], &[1]);
    let first = difference_numerator(&j.compose(&sq).unwrap(), &t2.compose(&j).unwrap());
    let minus = map(&[-1, 0, 1], &[0, 1]);
    let w = map(&[1, -2, 1], &[0, 1]);
    let second = difference_numerator(&sq.compose(&minus).unwrap(), &w.compose(&sq).unwrap());
    // the library quotients land on the same maps
    let qj = joukowsky_quotient(&sq, QuotientMode::Joukowsky).map(|q| q.map);
    let qs = joukowsky_quotient(&minus, QuotientMode::Square).map(|q| q.map);
    let pass = first.is_zero()
        && second.is_zero()
        && qj.as_ref() == Ok(&chebyshev(2).unwrap())
        && qs.as_ref() == Ok(&w);
    outcome(
        pass,
        format!(
            "j(z^2)-T2(j) = {first}, (z-1/z)^2-(w+1/w-2)(z^2) = {second}, quotients {} / {}",
            qj.map(|m| m.to_string()).unwrap_or_else(|e| e.to_string()),
            qs.map(|m| m.to_string()).unwrap_or_else(|e| e.to_string())
        ),
    )
}

fn full_real_julia() -> Outcome {
    let fam = match full_real_julia_family(
        5,
        3,
        &RealPolynomial::from_i64(&[-4, 0, 12, 0, 0, 4]),
        &[rat_int(-1), rat_int(0)],
        &[rat_int(1)],
        Some(rat_int(35)),
    ) {
        Ok(f) => f,
        Err(e) => return outcome(false, format!("construction failed: {e}")),
    };
    let f = fam.map;
    // 4(x^5+3x^2-1)/((x^2+x)(x-1)^2) - 35 written out
    let p = QPoly::from_i64(&[-1, 0, 3, 0, 0, 1]).scale(&rat_int(4));
    let q = &QPoly::from_i64(&[0, 1, 1]) * &QPoly::from_i64(&[1, -2, 1]);
    let oracle = RealRationalMap::from_polys(&p - &q.scale(&rat_int(35)), q).unwrap();
    let label = component_label(&f).map(|l| (l.algebraic_degree, l.circle_degree));
    let h = lap_entropy_within_budget(&f, 8, 400_000).map(|e| e.value);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut sampled = 0;
    let mut outside = 0;
    while sampled < 1000 {
        let y = rng.gen_range(-12.0..=12.0);
        for (x, _) in solve_real_preimages(&f, &Point64::finite(y)) {
            sampled += 1;
            if x.value().map_or(true, |v| v.abs() > 12.0) {
                outside += 1;
            }
        }
    }
    let pass = f == oracle
        && label == Ok((5, 3))
        && matches!(h, Ok(v) if (v - 5f64.ln()).abs() < 0.05)
        && outside == 0;
    outcome(
        pass,
        format!("formula {}, label {label:?}, h = {h:.4?} (want {:.4}), {outside}/{sampled} preimages outside", f == oracle, 5f64.ln()),
    )
}

fn range_and_sandwich(maps: &[RealRationalMap]) -> Outcome {
    let base = Point64::finite(0.577_215_664_901_532_9);
    let mut problems = Vec::new();
    let mut estimates = 0;
    let mut sandwiched = 0;
    let mut coverings = 0;
    let mut plain_lap_exceeded = 0;
    for (i, f) in maps.iter().enumerate() {
        let d = f.degree();
        let s = topological_degree(f).unwrap();
        let lo = (s.unsigned_abs().max(1) as f64).ln() - 0.05;
        let hi = (d as f64).ln() + 1e-9;
        let mut ests = vec![("lap", lap(f, CORPUS_DEPTH))];
        if let Ok(e) = preimage_growth_entropy(f, &base, CORPUS_DEPTH) {
            ests.push(("preimage", e));
        }
        if let Ok(inv) = kneading_determinant(f) {
            ests.push(("kneading", realdyn::kneading::estimate_from(&inv)));
        }
        for (name, e) in ests {
            estimates += 1;
            let inside = [e.value, e.lower, e.upper].iter().all(|v| (lo..=hi).contains(v));
            if !inside || e.lower > e.upper {
                problems.push(format!("#{i} {name} [{}, {}, {}] range [{lo:.4}, {hi:.4}]", e.lower, e.value, e.upper));
            }
        }
        let depth = 6;
        match cut_lap_counts(f, depth) {
            Ok(cut) => {
                let pre = preimage_counts(f, &base, depth).unwrap();
                if (1..=depth).any(|k| pre[k] > cut[k - 1]) {
                    problems.push(format!("#{i} preimages {pre:?} exceed laps {cut:?}"));
                }
                sandwiched += 1;
                if let Ok(l) = lap_counts(f, depth) {
                    if (1..=depth).any(|k| pre[k] > l[k - 1]) {
                        plain_lap_exceeded += 1;
                    }
                }
            }
            Err(_) => coverings += 1,
        }
    }
    outcome(
        problems.is_empty(),
        format!(
            "{} maps, {estimates} estimates, {sandwiched} lap/preimage comparisons ({coverings} coverings without laps; \
             {plain_lap_exceeded} maps where preimages exceed the turning-point lap count) {problems:?}",
            maps.len()
        ),
    )
}

fn conjugation_invariance(maps: &[RealRationalMap]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut problems = Vec::new();
    for (i, f) in maps.iter().take(25).enumerate() {
        let h = lap(f, CORPUS_DEPTH).value;
        let s = topological_degree(f).unwrap();
        for _ in 0..4 {
            let m = random_mobius(&mut rng);
            let g = f.conjugate(&m).unwrap();
            let hg = lap(&g, CORPUS_DEPTH).value;
            worst = worst.max((hg - h).abs());
            let sg = topological_degree(&g).unwrap();
            if (hg - h).abs() >= 0.02 || g.degree() != f.degree() || sg != s {
                problems.push(format!("#{i} by {m:?}: h {h:.4} vs {hg:.4}, s {s} vs {sg}"));
            }
        }
    }
    outcome(problems.is_empty(), format!("100 conjugates, worst entropy gap {worst:.2e} {problems:?}"))
}

/// Relative size of `P(exp h)` against the sum of the absolute terms.
fn growth_residual(inv: &KneadingInvariant) -> Option<f64> {
    let rate = inv.growth_rate()?;
    let x = inv.entropy.exp();
    let p = rate.poly.to_f64();
    let mut value = 0.0;
    let mut scale = 0.0;
    for (k, c) in p.coeffs().iter().enumerate() {
        let term = c * x.powi(k as i32);
        value += term;
        scale += term.abs();
    }
    Some((value / scale).abs())
}

fn kneading_identity(maps: &[RealRationalMap]) -> Outcome {
    let mut runs: Vec<RealRationalMap> = (2..=6).map(|d| chebyshev(d).unwrap()).collect();
    runs.extend([quadratic(1.0), quadratic(-3.0), quadratic(-1.75), quadratic(-1.0)]);
    runs.push(lattes_rigid_sqrt2());
    runs.extend(maps.iter().cloned());
    let mut successes = 0;
    let mut with_root = 0;
    let mut worst: f64 = 0.0;
    let mut problems = Vec::new();
    for (i, f) in runs.iter().enumerate() {
        let Ok(inv) = kneading_determinant(f) else {
            continue;
        };
        successes += 1;
        if !inv.minors_consistent() {
            problems.push(format!("run {i}: minors disagree"));
        }
        if let Some(r) = growth_residual(&inv) {
            with_root += 1;
            worst = worst.max(r);
            if r >= 1e-8 {
                problems.push(format!("run {i}: residual {r:.1e}"));
            }
        }
    }
    outcome(
        problems.is_empty() && successes > 0,
        format!(
            "{successes}/{} kneading runs succeeded, {with_root} with a root, worst residual {worst:.1e} {problems:?}",
            runs.len()
        ),
    )
}

/// Whether every turning orbit of `f` leaves `[-R, R]`, i.e. is attracted by `∞`.
fn turning_orbits_escape(f: &RealRationalMap) -> bool {
    f.critical_points_real().iter().all(|(c, _)| {
        let mut x = c.value().unwrap_or(f64::INFINITY);
        for _ in 0..20 {
            if x.abs() > 1e6 {
                return true;
            }
            x = f.eval_f64(x);
        }
        x.abs() > 1e6
    })
}

fn hyperbolic_constancy() -> Outcome {
    let f = map(&[0, -6, 0, 2], &[1]);
    let base = match kneading_determinant(&f).ok().and_then(|inv| inv.growth_rate()) {
        Some(r) => r,
        None => return outcome(false, "no growth rate for 2*T3"),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let scale = 6.0;
    let mut accepted = 0;
    let mut problems = Vec::new();
    while accepted < 20 {
        // every coefficient moves, zero ones included, by up to 1e-3 of the largest
        let mut p: Vec<f64> = vec![0.0, -6.0, 0.0, 2.0];
        for c in p.iter_mut() {
            *c += 1e-3 * scale * rng.gen_range(-1.0..1.0);
        }
        let q = [1.0 + 1e-3 * rng.gen_range(-1.0..1.0)];
        let g = RealRationalMap::from_f64(&p, &q).unwrap();
        if !turning_orbits_escape(&g) {
            continue;
        }
        accepted += 1;
        match kneading_determinant(&g).map(|inv| inv.growth_rate()) {
            Ok(Some(r)) if r.same_as(&base) => {}
            other => problems.push(format!("{g}: {:?}", other.map(|r| r.map(|r| r.to_f64())))),
        }
    }
    outcome(
        problems.is_empty(),
        format!("20 perturbations, growth rate {:.12} {problems:?}", base.to_f64()),
    )
}

fn rotation_numbers() -> Outcome {
    let f = map(&[1, 2, 0, 1], &[2, 0, 1]);
    let h = lap(&f, 10).value;
    let rho = rotation_number(&f, 100_000);
    let m = map(&[1, 1], &[1, -1]);
    let rho_m = rotation_number(&m, 100_000);
    // x = tan(π(t - 1/2)) turns m into a rigid rotation; follow it in that angle
    let n = 1000;
    let mut phi: f64 = 0.3;
    let mut total = 0.0;
    for _ in 0..n {
        let x = phi.tan();
        let next = ((x + 1.0) / (1.0 - x)).atan();
        let step = (next - phi).rem_euclid(PI);
        total += step;
        phi = next;
    }
    let oracle = total / (n as f64 * PI);
    let pass = h.abs() < 0.02
        && matches!(rho, Ok(r) if r < 1e-3)
        && matches!(rho_m, Ok(r) if (r - oracle).abs() < 1e-3 && (r - 0.25).abs() < 1e-3);
    outcome(
        pass,
        format!("h = {h:.4}, rho = {rho:?}; elliptic rho = {rho_m:.6?} (oracle {oracle:.6})"),
    )
}

#[test]
fn acceptance_criteria() {
    let maps = corpus(100, CORPUS_SEED);
    let checks: Vec<(usize, Box<dyn Fn() -> Outcome + Sync + '_>)> = vec![
        (1, Box::new(chebyshev_entropies)),
        (2, Box::new(quadratic_dichotomy)),
        (3, Box::new(rigid_lattes)),
        (4, Box::new(legendre_rigidity)),
        (5, Box::new(blaschke_degree_formula)),
        (6, Box::new(cantor_certificate_check)),
        (7, Box::new(trichotomy)),
        (8, Box::new(quotient_identities)),
        (9, Box::new(full_real_julia)),
        (10, Box::new(|| range_and_sandwich(&maps))),
        (11, Box::new(|| conjugation_invariance(&maps))),
        (12, Box::new(|| kneading_identity(&maps))),
        (13, Box::new(hyperbolic_constancy)),
        (14, Box::new(rotation_numbers)),
    ];
    let results: Vec<(usize, Outcome, f64)> = std::thread::scope(|scope| {
        let handles: Vec<_> = checks
            .iter()
            .map(|(n, check)| {
                scope.spawn(move || {
                    let t = Instant::now();
                    let o = check();
                    (*n, o, t.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("criterion panicked")).collect()
    });
    let mut failed = Vec::new();
    for (n, o, secs) in &results {
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {n}: {verdict}: {} [{secs:.1}s]", o.detail);
        if !o.pass {
            failed.push(*n);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
