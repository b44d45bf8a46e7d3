//! Topological degree of `f` restricted to the real circle.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chart::CirclePoint;
use crate::error::{Error, Result};
use crate::realmap::{QPoly, RealRationalMap};
use crate::sturm::{isolate, refine, RootInterval, SturmChain};

/// The pair `(d, s)` naming the connected component of the real moduli space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ComponentLabel {
    #[serde(rename = "d")]
    pub algebraic_degree: i64,
    #[serde(rename = "s")]
    pub circle_degree: i64,
}

impl ComponentLabel {
    pub fn new(d: i64, s: i64) -> Result<Self> {
        if s.abs() > d || (d - s).rem_euclid(2) != 0 {
            return Err(Error::ParityViolation { d, s });
        }
        Ok(ComponentLabel {
            algebraic_degree: d,
            circle_degree: s,
        })
    }
}

const REGULAR_VALUE_ATTEMPTS: usize = 32;

/// Exact degree by a signed count of preimages of a random rational regular value.
pub fn topological_degree(f: &RealRationalMap) -> Result<i64> {
    topological_degree_seeded(f, 0)
}

pub fn topological_degree_seeded(f: &RealRationalMap, seed: u64) -> Result<i64> {
    let d = f.degree();
    if d == 0 {
        return Err(Error::DegenerateMap);
    }
    let w = f.wronskian();
    if w.is_zero() {
        return Err(Error::DegenerateMap);
    }
    let w_chain = SturmChain::new(&w.square_free_part());
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_d3c0);
    for _ in 0..REGULAR_VALUE_ATTEMPTS {
        let den: i64 = rng.gen_range(1..=97);
        let num: i64 = rng.gen_range(-7 * den..=7 * den);
        let y = BigRational::new(BigInt::from(num), BigInt::from(den));
        let h = f.numerator() - &f.denominator().scale(&y);
        // a preimage at ∞ or a critical point over y: try another value
        if h.degree() != d || h.gcd(&w).degree() > 0 {
            continue;
        }
        let mut s = 0i64;
        for iv in isolate(&h) {
            s += wronskian_sign(&h, &w, &w_chain, &iv);
        }
        return Ok(s);
    }
    Err(Error::DegenerateMap)
}

/// Sign of `w` at the unique root of `h` in `iv`, where `h` and `w` are coprime.
fn wronskian_sign(h: &QPoly, w: &QPoly, w_chain: &SturmChain, iv: &RootInterval) -> i64 {
    if iv.is_exact() {
        return w.sign_at(&iv.lo) as i64;
    }
    let sf = h.square_free_part();
    let mut cur = iv.clone();
    loop {
        if w_chain.count(&cur.lo, &cur.hi) == 0 && w.sign_at(&cur.hi) != 0 {
            return w.sign_at(&cur.hi) as i64;
        }
        let width = cur.width() / BigRational::from_integer(BigInt::from(4));
        cur = refine(&sf, &cur, &width);
        if cur.is_exact() {
            return w.sign_at(&cur.lo) as i64;
        }
    }
}

/// Trapezoid/Simpson estimate of the degree integral over the circle; a cross-check only.
pub fn quadrature_degree(f: &RealRationalMap, n_points: usize) -> f64 {
    let n = n_points.max(64);
    let fm = f.float_map();
    let g = |t: f64| {
        let p = CirclePoint::from_angle(t);
        fm.chart_derivative(p.raw())
    };
    let h = 1.0 / n as f64;
    let mut total = 0.0;
    for i in 0..n {
        let a = i as f64 * h;
        let b = a + h;
        let (fa, fm_, fb) = (g(a), g(a + h / 2.0), g(b));
        let whole = h / 6.0 * (fa + 4.0 * fm_ + fb);
        total += adaptive_simpson(&g, a, b, fa, fm_, fb, whole, 1e-11, 24);
    }
    total
}

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson(
    g: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = g(lm);
    let frm = g(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive_simpson(g, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + adaptive_simpson(g, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// `(d, s)` with the parity invariant and the quadrature cross-check enforced.
pub fn component_label(f: &RealRationalMap) -> Result<ComponentLabel> {
    let d = f.degree();
    if d < 2 {
        return Err(Error::DegreeTooSmall(d));
    }
    let s = topological_degree(f)?;
    let label = ComponentLabel::new(d as i64, s)?;
    let q = quadrature_degree(f, 4096);
    if (q - s as f64).abs() >= 0.5 {
        return Err(Error::InternalConsistency(format!(
            "quadrature degree {q} disagrees with exact degree {s}"
        )));
    }
    Ok(label)
}
