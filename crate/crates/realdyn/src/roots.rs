//! Floating-point real roots of low-degree polynomials.
//!
//! Roots of `p'` split the line into monotone pieces; each sign change is
//! polished by safeguarded Newton. A critical point where `|p|` is at
//! rounding level is reported as a multiple root.

use crate::poly::Poly;
use crate::scalar::RealFloat;

/// Distinct real roots in increasing order, with multiplicities.
pub fn real_roots<F: RealFloat>(p: &Poly<F>) -> Vec<(F, usize)> {
    let p = trim_leading(p);
    match p.degree() {
        0 => Vec::new(),
        1 => vec![(-p.coeff(0) / p.coeff(1), 1)],
        2 => quadratic(&p),
        _ => general(&p),
    }
}

fn trim_leading<F: RealFloat>(p: &Poly<F>) -> Poly<F> {
    let scale = p.coeffs().iter().fold(F::zero(), |m, c| m.max(c.abs()));
    let cut = scale * F::epsilon() * F::lit(1e-3);
    let mut v = p.coeffs().to_vec();
    while v.len() > 1 && v.last().unwrap().abs() <= cut {
        v.pop();
    }
    Poly::new(v)
}

fn rounding_bound<F: RealFloat>(p: &Poly<F>, x: F) -> F {
    let ax = x.abs();
    let mut acc = F::zero();
    for c in p.coeffs().iter().rev() {
        acc = acc * ax + c.abs();
    }
    acc * F::epsilon() * F::lit(16.0)
}

fn quadratic<F: RealFloat>(p: &Poly<F>) -> Vec<(F, usize)> {
    let (c, b, a) = (p.coeff(0), p.coeff(1), p.coeff(2));
    let two = F::lit(2.0);
    let four = F::lit(4.0);
    let disc = b * b - four * a * c;
    let tol = F::epsilon() * F::lit(32.0) * (b * b + (four * a * c).abs());
    if disc.abs() <= tol {
        return vec![(-b / (two * a), 2)];
    }
    if disc < F::zero() {
        return Vec::new();
    }
    let s = disc.sqrt();
    let q = if b >= F::zero() {
        -(b + s) / two
    } else {
        -(b - s) / two
    };
    let r1 = q / a;
    let r2 = if q == F::zero() { F::zero() } else { c / q };
    let (lo, hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
    vec![(polish(p, lo), 1), (polish(p, hi), 1)]
}

fn polish<F: RealFloat>(p: &Poly<F>, x: F) -> F {
    let dp = p.derivative();
    let mut x = x;
    for _ in 0..3 {
        let d = dp.eval(&x);
        if d == F::zero() {
            break;
        }
        let nx = x - p.eval(&x) / d;
        if !nx.is_finite() || (nx - x).abs() > F::lit(1e-6) * (F::one() + x.abs()) {
            break;
        }
        if p.eval(&nx).abs() > p.eval(&x).abs() {
            break;
        }
        x = nx;
    }
    x
}

fn cauchy_bound<F: RealFloat>(p: &Poly<F>) -> F {
    let lead = p.lead().abs();
    let n = p.degree();
    let m = p.coeffs()[..n]
        .iter()
        .fold(F::zero(), |m, c| m.max(c.abs() / lead));
    F::one() + m
}

fn general<F: RealFloat>(p: &Poly<F>) -> Vec<(F, usize)> {
    let dp = p.derivative();
    let crit = real_roots(&dp);
    let b = cauchy_bound(p);
    // breakpoints with their values; critical values at rounding level are roots
    let mut pts: Vec<(F, F, Option<usize>)> = Vec::with_capacity(crit.len() + 2);
    pts.push((-b, p.eval(&-b), None));
    for &(c, m) in &crit {
        if c <= -b || c >= b {
            continue;
        }
        let v = p.eval(&c);
        let root = if v.abs() <= rounding_bound(p, c) {
            Some(m + 1)
        } else {
            None
        };
        pts.push((c, v, root));
    }
    pts.push((b, p.eval(&b), None));

    let mut out = Vec::new();
    for i in 0..pts.len() {
        if let Some(m) = pts[i].2 {
            out.push((pts[i].0, m));
        }
        if i + 1 == pts.len() {
            break;
        }
        let (a, fa, ra) = pts[i];
        let (bb, fb, rb) = pts[i + 1];
        if ra.is_some() || rb.is_some() {
            continue;
        }
        if fa == F::zero() {
            continue;
        }
        if fb == F::zero() {
            out.push((bb, 1));
            continue;
        }
        if (fa < F::zero()) != (fb < F::zero()) {
            out.push((bracketed_newton(p, &dp, a, bb, fa), 1));
        }
    }
    out
}

fn bracketed_newton<F: RealFloat>(p: &Poly<F>, dp: &Poly<F>, a: F, b: F, fa: F) -> F {
    let two = F::lit(2.0);
    let (mut lo, mut hi) = (a, b);
    let neg_lo = fa < F::zero();
    let mut x = (lo + hi) / two;
    for _ in 0..200 {
        let fx = p.eval(&x);
        if fx == F::zero() {
            return x;
        }
        if (fx < F::zero()) == neg_lo {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= F::epsilon() * F::lit(4.0) * (lo.abs().max(hi.abs())) {
            break;
        }
        let d = dp.eval(&x);
        let nx = x - fx / d;
        x = if nx.is_finite() && nx > lo && nx < hi {
            if (nx - x).abs() <= F::epsilon() * F::lit(2.0) * x.abs() {
                return nx;
            }
            nx
        } else {
            lo + (hi - lo) / two
        };
    }
    x
}
