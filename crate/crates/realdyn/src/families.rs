//! Named families of real rational maps, and a parameter sweep harness.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::blaschke::{cayley, BlaschkeProduct};
use crate::chart::CirclePoint;
use crate::degree::{component_label, ComponentLabel};
use crate::entropy::{lap_entropy_within_budget, preimage_growth_entropy, EntropyEstimate, POINT_BUDGET};
use crate::error::{Error, Result};
use crate::kneading::algebraic_entropy;
use crate::realmap::{QPoly, RealPolynomial, RealRationalMap, Q};
use crate::scalar::{rat_int, rational_approx, rational_from_f64, rational_to_f64};
use crate::sturm::real_roots_with_multiplicity;

/// Short decimals like `0.1` become the rational they spell; other doubles are taken exactly.
pub fn parameter(x: f64) -> Q {
    let r = rational_approx(x, 1_000_000);
    if (rational_to_f64(&r) - x).abs() <= 1e-15 * x.abs().max(1.0) {
        r
    } else {
        rational_from_f64(x)
    }
}

/// `z² + c`.
pub fn quadratic(c: f64) -> RealRationalMap {
    let p = QPoly::new(vec![parameter(c), Q::zero(), Q::one()]);
    RealRationalMap::polynomial(p).expect("z^2 + c has degree 2")
}

/// Monic Chebyshev polynomial `T_d` with `T_d(z + 1/z) = z^d + z^{-d}`.
pub fn chebyshev(d: usize) -> Result<RealRationalMap> {
    RealRationalMap::polynomial(chebyshev_poly(d)?)
}

fn chebyshev_poly(d: usize) -> Result<QPoly> {
    if d < 2 {
        return Err(Error::DegreeTooSmall(d));
    }
    let z = QPoly::x();
    let (mut prev, mut cur) = (z.clone(), QPoly::from_i64(&[-2, 0, 1]));
    for _ in 2..d {
        let next = &(&z * &cur) - &prev;
        prev = cur;
        cur = next;
    }
    if chebyshev_defect(&cur) != QPoly::zero() {
        return Err(Error::InternalConsistency(format!("T_{d} fails z^d + z^-d")));
    }
    Ok(cur)
}

/// `T(z + 1/z)·z^d − z^{2d} − 1`, identically zero for the Chebyshev polynomial.
pub fn chebyshev_defect(t: &QPoly) -> QPoly {
    let d = t.degree();
    let z2p1 = QPoly::from_i64(&[1, 0, 1]);
    let mut acc = QPoly::zero();
    for (k, c) in t.coeffs().iter().enumerate() {
        let term = &z2p1.pow(k as u32) * &QPoly::monomial(c.clone(), d - k);
        acc = &acc + &term;
    }
    &acc - &(&QPoly::monomial(Q::one(), 2 * d) + &QPoly::one())
}

/// `x`-coordinate doubling on `y² = x(x−1)(x−λ)`: `(x²−λ)² / (4x(x−1)(x−λ))`.
pub fn lattes_legendre(lambda: f64) -> Result<RealRationalMap> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::ParameterOutOfRange(format!("lambda = {lambda} outside (0, 1)")));
    }
    let l = parameter(lambda);
    let x2_l = QPoly::new(vec![-l.clone(), Q::zero(), Q::one()]);
    let cubic = &QPoly::from_i64(&[0, -1, 1]) * &QPoly::new(vec![-l.clone(), Q::one()]);
    let f = RealRationalMap::from_polys(x2_l.pow(2), cubic.scale(&rat_int(4)))?;
    let defect = duplication_defect(&f, lambda, 5, 0x1e9e);
    if defect > 1e-9 {
        return Err(Error::InternalConsistency(format!(
            "duplication check off by {defect:e}"
        )));
    }
    Ok(f)
}

/// Largest relative gap between `f(x(P))` and the tangent-line `x(2P)` over random curve points.
pub fn duplication_defect(f: &RealRationalMap, lambda: f64, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for i in 0..samples {
        // y² > 0 on (0, λ) and on (1, ∞)
        let x = if i % 2 == 0 {
            rng.gen_range(0.05..0.95) * lambda
        } else {
            1.0 + rng.gen_range(0.05..4.0)
        };
        let y = (x * (x - 1.0) * (x - lambda)).sqrt();
        let m = (3.0 * x * x - 2.0 * (1.0 + lambda) * x + lambda) / (2.0 * y);
        let x2 = m * m + (1.0 + lambda) - 2.0 * x;
        let fx = f.eval_f64(x);
        worst = worst.max((fx - x2).abs() / x2.abs().max(1.0));
    }
    worst
}

/// `−¼(z + 1/z − 2)`, real entropy `log √2`.
pub fn lattes_rigid_sqrt2() -> RealRationalMap {
    let p = QPoly::from_i64(&[-1, 2, -1]);
    RealRationalMap::from_polys(p, QPoly::from_i64(&[0, 4])).expect("valid map")
}

/// `−z(z−9)² / (27(z−1)²)`, real entropy `log √3`.
pub fn lattes_rigid_sqrt3() -> RealRationalMap {
    let p = QPoly::from_i64(&[0, -81, 18, -1]);
    let q = QPoly::from_i64(&[1, -2, 1]).scale(&rat_int(27));
    RealRationalMap::from_polys(p, q).expect("valid map")
}

/// A map whose Julia set lies in `[−M′, M′]`, with the constants used to build it.
#[derive(Clone, Debug)]
pub struct FullRealJulia {
    /// `f − a`.
    pub map: RealRationalMap,
    pub unshifted: RealRationalMap,
    /// Leading coefficient of `p`; `1/λ` is the multiplier of `∞`.
    pub lambda: f64,
    pub m: f64,
    pub m_prime: Q,
    /// `min` (or `max` for negative `s`) of `f` over the degree-zero laps.
    pub extremum: Option<f64>,
    pub shift: Q,
}

/// `±p / (∏(x−u_i) ∏(x−v_j)²)` shifted by a constant so that `[−M′, M′]` is backward invariant.
///
/// `s = 0` gives `2·T_d`. When `a` is `None` the shift is taken 1% above the sufficient bound.
pub fn full_real_julia_family(
    d: usize,
    s: i64,
    p: &RealPolynomial,
    u: &[Q],
    v: &[Q],
    a: Option<Q>,
) -> Result<FullRealJulia> {
    if s.unsigned_abs() as usize > d || (d as i64 - s).rem_euclid(2) != 0 {
        return Err(Error::ParityViolation { d: d as i64, s });
    }
    if s == 0 {
        let t = chebyshev_poly(d)?.scale(&rat_int(2));
        let map = RealRationalMap::polynomial(t)?;
        return Ok(FullRealJulia {
            unshifted: map.clone(),
            map,
            lambda: 2.0,
            m: 2.0,
            m_prime: rat_int(2),
            extremum: None,
            shift: Q::zero(),
        });
    }
    let k = s.unsigned_abs() as usize;
    let p = p.exact();
    if p.degree() != d || u.len() != k - 1 || v.len() != (d - k) / 2 {
        return Err(Error::ParameterOutOfRange(format!(
            "need deg p = {d}, {} poles u and {} double poles v",
            k - 1,
            (d - k) / 2
        )));
    }
    let pts: Vec<&Q> = u.iter().chain(v).collect();
    if pts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::SignPatternViolated("u and v must be strictly increasing".into()));
    }
    for (i, ui) in u.iter().enumerate() {
        let want = if (k - 1 - i) % 2 == 0 { 1 } else { -1 };
        if p.sign_at(ui) != want {
            return Err(Error::SignPatternViolated(format!(
                "p(u_{}) should have sign {want}",
                i + 1
            )));
        }
    }
    if let Some(j) = v.iter().position(|vj| p.sign_at(vj) != 1) {
        return Err(Error::SignPatternViolated(format!("p(v_{}) must be positive", j + 1)));
    }
    let lambda = p.lead();
    if lambda <= rat_int(2) {
        return Err(Error::MultiplierTooSmall(rational_to_f64(&lambda)));
    }

    let mut q = QPoly::one();
    for ui in u {
        q = &q * &QPoly::new(vec![-ui.clone(), Q::one()]);
    }
    for vj in v {
        q = &q * &QPoly::new(vec![-vj.clone(), Q::one()]).pow(2);
    }
    let big_f = RealRationalMap::from_polys(p.clone(), q.clone())?;

    // |F(x)| > λ_w|x| beyond M, with 2 < λ_w < λ
    let lw = (&lambda + rat_int(2)) / rat_int(2);
    let x_q = &QPoly::x() * &q;
    let cross = &p.pow(2) - &x_q.pow(2).scale(&(&lw * &lw));
    let m = real_roots_with_multiplicity(&cross)
        .iter()
        .map(|(iv, _)| iv.to_f64().abs())
        .fold(0.0, f64::max);

    let extremum = match v.first() {
        None => None,
        Some(v1) => {
            let v1 = rational_to_f64(v1);
            let lowest = big_f
                .critical_points_real()
                .iter()
                .filter_map(|(c, _)| c.value())
                .filter(|&x| x > v1)
                .map(|x| big_f.eval_f64(x))
                .fold(f64::INFINITY, f64::min);
            if !lowest.is_finite() {
                return Err(Error::InternalConsistency("no minimum beyond v_1".into()));
            }
            Some(lowest)
        }
    };

    let lw_f = rational_to_f64(&lw);
    let user_shift = a.is_some();
    let a = match a {
        // the negative form is the mirror image of the positive one
        Some(a) if s < 0 => -a,
        Some(a) => a,
        None => {
            let bound = match extremum {
                Some(mn) => (mn + m).max((lw_f - 1.0) / (lw_f - 2.0) * mn),
                None => 0.0,
            };
            let raised = bound + 0.01 * bound.abs();
            Q::from_integer(rational_from_f64((raised * 100.0).ceil()).to_integer()) / rat_int(100)
        }
    };
    let a_f = rational_to_f64(&a);
    let lo = m.max(a_f.abs() / (lw_f - 1.0));
    let mut candidates: Vec<Q> = Vec::new();
    match extremum {
        Some(mn) => {
            let hi = a_f - mn;
            let top = hi.ceil() - 1.0;
            if top > 0.0 {
                candidates.push(rat_int(top as i64));
            }
            if lo < hi {
                candidates.push(parameter(0.5 * (lo + hi)));
            }
            if hi > 0.0 {
                candidates.push(parameter(0.999 * hi));
            }
        }
        None => {
            candidates.push(rat_int(lo.ceil() as i64 + 1));
            candidates.push(rat_int(2 * (lo.ceil() as i64 + 1)));
        }
    }
    let shifted = RealRationalMap::from_polys(p - &q.scale(&a), q.clone())?;
    let m_prime = candidates
        .into_iter()
        .find(|mp| backward_invariant(&shifted, mp, extremum.map(|mn| mn - a_f)));
    let Some(m_prime) = m_prime else {
        let msg = format!("shift {a_f} leaves no backward-invariant [-M', M']");
        return Err(if user_shift {
            Error::ParameterOutOfRange(msg)
        } else {
            Error::InternalConsistency(msg)
        });
    };

    let (map, unshifted, extremum, shift) = if s < 0 {
        let neg = |m: &RealRationalMap| {
            RealRationalMap::from_polys(-m.numerator(), m.denominator().clone())
        };
        (neg(&shifted)?, neg(&big_f)?, extremum.map(|x| -x), -a)
    } else {
        (shifted, big_f, extremum, a)
    };
    Ok(FullRealJulia {
        map,
        unshifted,
        lambda: rational_to_f64(&lambda),
        m,
        m_prime,
        extremum,
        shift,
    })
}

/// Exact check that every real solution of `g(x) = ±M′` lies in `[−M′, M′]`,
/// and that the shifted extremum lies below `−M′`.
fn backward_invariant(g: &RealRationalMap, mp: &Q, shifted_min: Option<f64>) -> bool {
    if !mp.is_positive() {
        return false;
    }
    let mp_f = rational_to_f64(mp);
    if matches!(shifted_min, Some(x) if x >= -mp_f) {
        return false;
    }
    [mp.clone(), -mp.clone()].iter().all(|y| {
        let h = g.numerator() - &g.denominator().scale(y);
        h.degree() == g.degree()
            && real_roots_with_multiplicity(&h)
                .iter()
                .all(|(iv, _)| iv.to_f64().abs() <= mp_f)
    })
}

/// Blaschke product with `(d+s)/2` zeros of modulus `δ` and `(d−s)/2` of modulus `1/δ`.
/// At `δ = 0` this is `z^s` itself.
pub fn perturbed_power_cover(d: usize, s: i64, delta: f64) -> Result<BlaschkeProduct<f64>> {
    if s == 0 || s.unsigned_abs() as usize > d || (d as i64 - s).rem_euclid(2) != 0 {
        return Err(Error::ParityViolation { d: d as i64, s });
    }
    if !(0.0..0.1).contains(&delta) {
        return Err(Error::ParameterOutOfRange(format!("delta = {delta} outside [0, 0.1)")));
    }
    let k = s.unsigned_abs() as usize;
    if delta == 0.0 {
        return BlaschkeProduct::new(vec![Complex::zero(); k], Vec::new(), 0.0, s < 0);
    }
    let n_in = (d as i64 + s) as usize / 2;
    let n_out = d - n_in;
    let ring = |n: usize, r: f64, offset: f64| -> Vec<Complex<f64>> {
        (0..n)
            .map(|j| Complex::from_polar(r, std::f64::consts::PI * (2 * j) as f64 / n as f64 + offset))
            .map(|z| if z.im.abs() < 1e-15 { Complex::new(z.re, 0.0) } else { z })
            .collect()
    };
    let inside = ring(n_in, delta, 0.0);
    let outside = if n_out == 0 {
        Vec::new()
    } else {
        ring(n_out, 1.0 / delta, std::f64::consts::PI / n_out as f64)
    };
    BlaschkeProduct::new(inside, outside, 0.0, false)
}

/// Names accepted by [`FamilySpec::by_name`].
pub const FAMILY_NAMES: [&str; 4] = ["quadratic", "lattes-legendre", "chebyshev", "perturbed-power-cover"];

pub type Generator = Arc<dyn Fn(&[f64]) -> Result<RealRationalMap> + Send + Sync>;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParameterRange {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
}

/// A named family `parameters → map`.
#[derive(Clone)]
pub struct FamilySpec {
    pub name: String,
    pub parameters: Vec<ParameterRange>,
    pub generator: Generator,
    pub expected_entropy: Option<f64>,
}

impl fmt::Debug for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FamilySpec")
            .field("name", &self.name)
            .field("parameters", &self.parameters)
            .field("expected_entropy", &self.expected_entropy)
            .finish()
    }
}

fn range(name: &str, lo: f64, hi: f64) -> ParameterRange {
    ParameterRange {
        name: name.to_string(),
        lo,
        hi,
    }
}

impl FamilySpec {
    pub fn quadratic() -> Self {
        FamilySpec {
            name: "quadratic".into(),
            parameters: vec![range("c", f64::NEG_INFINITY, f64::INFINITY)],
            generator: Arc::new(|x| Ok(quadratic(x[0]))),
            expected_entropy: None,
        }
    }

    pub fn lattes_legendre() -> Self {
        FamilySpec {
            name: "lattes-legendre".into(),
            parameters: vec![range("lambda", 0.0, 1.0)],
            generator: Arc::new(|x| lattes_legendre(x[0])),
            expected_entropy: Some(2f64.ln()),
        }
    }

    pub fn chebyshev() -> Self {
        FamilySpec {
            name: "chebyshev".into(),
            parameters: vec![range("order", 2.0, 16.0)],
            generator: Arc::new(|x| chebyshev(integer_param(x[0])? as usize)),
            expected_entropy: None,
        }
    }

    /// Cayley images of [`perturbed_power_cover`]; parameters `degree`, `circle_degree`, `delta`.
    pub fn perturbed_power_cover() -> Self {
        FamilySpec {
            name: "perturbed-power-cover".into(),
            parameters: vec![
                range("degree", 1.0, 16.0),
                range("circle_degree", -16.0, 16.0),
                range("delta", 0.0, 0.1),
            ],
            generator: Arc::new(|x| {
                let d = integer_param(x[0])? as usize;
                let s = integer_param(x[1])?;
                cayley(&perturbed_power_cover(d, s, x[2])?)
            }),
            expected_entropy: None,
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "quadratic" => Some(Self::quadratic()),
            "lattes-legendre" => Some(Self::lattes_legendre()),
            "chebyshev" => Some(Self::chebyshev()),
            "perturbed-power-cover" => Some(Self::perturbed_power_cover()),
            _ => None,
        }
    }

    pub fn generate(&self, params: &[f64]) -> Result<RealRationalMap> {
        if params.len() != self.parameters.len() {
            return Err(Error::ParameterOutOfRange(format!(
                "{} expects {} parameters",
                self.name,
                self.parameters.len()
            )));
        }
        for (x, r) in params.iter().zip(&self.parameters) {
            if !(*x >= r.lo && *x <= r.hi) {
                return Err(Error::ParameterOutOfRange(format!("{} = {x}", r.name)));
            }
        }
        (self.generator)(params)
    }
}

fn integer_param(x: f64) -> Result<i64> {
    if x.fract() != 0.0 {
        return Err(Error::ParameterOutOfRange(format!("{x} is not an integer")));
    }
    Ok(x as i64)
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Cartesian product of per-parameter value lists.
pub fn grid(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![Vec::new()], |acc, axis| {
        acc.iter()
            .flat_map(|prefix| {
                axis.iter().map(move |x| {
                    let mut p = prefix.clone();
                    p.push(*x);
                    p
                })
            })
            .collect()
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Lap(usize),
    Preimage(usize),
    Kneading,
    /// Kneading, falling back to laps at the given depth.
    Auto(usize),
}

const PREIMAGE_BASE: f64 = 0.577_215_664_901_532_9;

impl Estimator {
    pub fn estimate(&self, f: &RealRationalMap) -> Result<EntropyEstimate> {
        match *self {
            Estimator::Lap(n) => lap_entropy_within_budget(f, n, POINT_BUDGET),
            Estimator::Preimage(n) => {
                preimage_growth_entropy(f, &CirclePoint::finite(PREIMAGE_BASE), n)
            }
            Estimator::Kneading => algebraic_entropy(f),
            Estimator::Auto(n) => {
                algebraic_entropy(f).or_else(|_| lap_entropy_within_budget(f, n, POINT_BUDGET))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub params: Vec<f64>,
    pub label: Option<ComponentLabel>,
    pub estimate: Option<EntropyEstimate>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub family: String,
    pub parameter_names: Vec<String>,
    pub rows: Vec<SweepRow>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub median: Option<f64>,
    pub tolerance: f64,
    pub constant: bool,
}

fn sweep_row(spec: &FamilySpec, params: &[f64], estimator: Estimator) -> SweepRow {
    let mut row = SweepRow {
        params: params.to_vec(),
        label: None,
        estimate: None,
        error: None,
    };
    let f = match spec.generate(params) {
        Ok(f) => f,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    match component_label(&f) {
        Ok(l) => row.label = Some(l),
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    }
    match estimator.estimate(&f) {
        Ok(e) => row.estimate = Some(e),
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Evaluate `estimator` at every grid point; rows come back sorted by parameters.
pub fn sweep(spec: &FamilySpec, grid: &[Vec<f64>], estimator: Estimator, tolerance: f64) -> SweepResult {
    let mut rows: Vec<SweepRow> = grid
        .par_iter()
        .map(|p| sweep_row(spec, p, estimator))
        .collect();
    rows.sort_by(|a, b| {
        a.params
            .iter()
            .zip(&b.params)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
    });
    let mut values: Vec<f64> = rows
        .iter()
        .filter_map(|r| r.estimate.map(|e| e.value))
        .collect();
    values.sort_by(f64::total_cmp);
    let (min, max, median) = if values.is_empty() {
        (None, None, None)
    } else {
        let n = values.len();
        let med = if n % 2 == 1 {
            values[n / 2]
        } else {
            0.5 * (values[n / 2 - 1] + values[n / 2])
        };
        (Some(values[0]), Some(values[n - 1]), Some(med))
    };
    let constant = matches!((min, max), (Some(a), Some(b)) if b - a < tolerance);
    SweepResult {
        family: spec.name.clone(),
        parameter_names: spec.parameters.iter().map(|r| r.name.clone()).collect(),
        rows,
        min,
        max,
        median,
        tolerance,
        constant,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blaschke::circle_degree_of;
    use crate::degree::topological_degree;
    use crate::entropy::{lap_entropy, turning_points};
    use crate::kneading::kneading_determinant;
    use crate::scalar::rat;

    const LN2: f64 = std::f64::consts::LN_2;

    #[test]
    fn chebyshev_small() {
        assert_eq!(chebyshev(2).unwrap(), RealRationalMap::from_i64(&[-2, 0, 1], &[1]).unwrap());
        assert_eq!(chebyshev(3).unwrap(), RealRationalMap::from_i64(&[0, -3, 0, 1], &[1]).unwrap());
        assert_eq!(
            chebyshev(4).unwrap(),
            RealRationalMap::from_i64(&[2, 0, -4, 0, 1], &[1]).unwrap()
        );
        assert!(chebyshev(1).is_err());
    }

    #[test]
    fn chebyshev_identity_to_eight() {
        for d in 2..=8 {
            let t = chebyshev(d).unwrap();
            assert!(chebyshev_defect(t.numerator()).is_zero(), "d = {d}");
        }
        // a wrong constant term breaks it
        assert!(!chebyshev_defect(&QPoly::from_i64(&[-1, 0, 1])).is_zero());
    }

    #[test]
    fn quadratic_values() {
        let e = lap_entropy(&quadratic(1.0), 10).unwrap();
        assert!(e.value.abs() < 0.02);
        let e = lap_entropy(&quadratic(-3.0), 10).unwrap();
        assert!((e.value - LN2).abs() < 0.02);
        let f = quadratic(0.0);
        let l = component_label(&f).unwrap();
        assert_eq!((l.algebraic_degree, l.circle_degree), (2, 0));
        assert!(lap_entropy(&f, 8).unwrap().value.abs() < 0.02);
        // 0.1 is taken as 1/10, not its binary neighbour
        assert_eq!(quadratic(0.1).numerator().coeff(0), rat(1, 10));
    }

    #[test]
    fn legendre_matches_tangent_duplication() {
        for i in 1..=9 {
            let l = i as f64 / 10.0;
            let f = lattes_legendre(l).unwrap();
            assert_eq!(f.degree(), 4);
            assert!(duplication_defect(&f, l, 5, i) < 1e-9);
        }
        assert!(matches!(lattes_legendre(0.0), Err(Error::ParameterOutOfRange(_))));
        assert!(matches!(lattes_legendre(1.5), Err(Error::ParameterOutOfRange(_))));
        // a different λ fails the oracle
        let g = lattes_legendre(0.3).unwrap();
        assert!(duplication_defect(&g, 0.5, 5, 1) > 1e-3);
    }

    #[test]
    fn legendre_entropy() {
        for l in [0.1, 0.5, 0.9] {
            let e = lap_entropy(&lattes_legendre(l).unwrap(), 10).unwrap();
            assert!((e.value - LN2).abs() < 0.03, "λ = {l}: {}", e.value);
        }
    }

    #[test]
    fn rigid_lattes() {
        let f2 = lattes_rigid_sqrt2();
        assert_eq!(f2.eval_f64(2.0), -0.125);
        let f3 = lattes_rigid_sqrt3();
        assert!((f3.eval_f64(3.0) + 1.0).abs() < 1e-15);
        let e = lap_entropy(&f2, 10).unwrap();
        assert!((e.value - 0.5 * LN2).abs() < 0.02);
        let e = lap_entropy(&f3, 10).unwrap();
        assert!((e.value - 0.5 * 3f64.ln()).abs() < 0.02);
        let e = lap_entropy(&f2.iterate(2).unwrap(), 8).unwrap();
        assert!((e.value - LN2).abs() < 0.03);
    }

    fn fig3() -> FullRealJulia {
        let p = RealPolynomial::from_i64(&[-4, 0, 12, 0, 0, 4]);
        full_real_julia_family(5, 3, &p, &[rat_int(-1), rat_int(0)], &[rat_int(1)], Some(rat_int(35)))
            .unwrap()
    }

    #[test]
    fn figure_map() {
        let j = fig3();
        assert_eq!(j.m_prime, rat_int(12));
        assert_eq!(j.lambda, 4.0);
        assert!((j.extremum.unwrap() - 22.411).abs() < 1e-3);
        let expect = RealRationalMap::from_i64(&[-4, -35, 47, 35, -35, 4], &[0, 1, -1, -1, 1]).unwrap();
        assert_eq!(j.map, expect);
        assert_eq!(topological_degree(&j.map), Ok(3));
        let e = lap_entropy_within_budget(&j.map, 8, 400_000).unwrap();
        assert!((e.value - 5f64.ln()).abs() < 0.05, "{} at depth {}", e.value, e.depth);
    }

    #[test]
    fn automatic_shift() {
        let p = RealPolynomial::from_i64(&[-4, 0, 12, 0, 0, 4]);
        let j = full_real_julia_family(5, 3, &p, &[rat_int(-1), rat_int(0)], &[rat_int(1)], None)
            .unwrap();
        let mp = rational_to_f64(&j.m_prime);
        let a = rational_to_f64(&j.shift);
        assert!(a > j.extremum.unwrap() + j.m);
        assert!(j.extremum.unwrap() - a < -mp);
        assert_eq!(topological_degree(&j.map), Ok(3));
    }

    #[test]
    fn negative_form() {
        let p = RealPolynomial::from_i64(&[-4, 0, 12, 0, 0, 4]);
        let j = full_real_julia_family(5, -3, &p, &[rat_int(-1), rat_int(0)], &[rat_int(1)], None)
            .unwrap();
        assert_eq!(topological_degree(&j.map), Ok(-3));
        // signed crossings of a regular value, counted by hand on a grid
        let g = j.map.float_map();
        let y = 0.37;
        let mut s = 0i64;
        let n = 200_000;
        let mut prev = CirclePoint::from_angle(0.5 / n as f64);
        for i in 1..n {
            let cur = CirclePoint::from_angle((i as f64 + 0.5) / n as f64);
            let (a, b) = (g.eval(&prev), g.eval(&cur));
            if let (Some(fa), Some(fb)) = (a.value(), b.value()) {
                if (fa - y) * (fb - y) < 0.0 && (fa - fb).abs() < 1e3 {
                    s += if fb > fa { 1 } else { -1 };
                }
            }
            prev = cur;
        }
        assert_eq!(s, -3);
        assert!(j.extremum.unwrap() < -22.0);
    }

    #[test]
    fn even_zero_uses_chebyshev() {
        let j = full_real_julia_family(2, 0, &RealPolynomial::from_i64(&[1]), &[], &[], None).unwrap();
        assert_eq!(j.map, RealRationalMap::from_i64(&[-4, 0, 2], &[1]).unwrap());
        let e = lap_entropy(&j.map, 10).unwrap();
        assert!((e.value - LN2).abs() < 0.03);
    }

    #[test]
    fn construction_errors() {
        let p = RealPolynomial::from_i64(&[-4, 0, 12, 0, 0, 4]);
        let u = [rat_int(-1), rat_int(0)];
        let r = full_real_julia_family(5, 3, &p, &[rat_int(0), rat_int(-1)], &[rat_int(1)], None);
        assert!(matches!(r, Err(Error::SignPatternViolated(_))));
        let r = full_real_julia_family(5, 3, &p, &[rat_int(-2), rat_int(0)], &[rat_int(1)], None);
        assert!(matches!(r, Err(Error::SignPatternViolated(_))));
        let weak = RealPolynomial::from_i64(&[-2, 0, 6, 0, 0, 2]);
        let r = full_real_julia_family(5, 3, &weak, &u, &[rat_int(1)], None);
        assert!(matches!(r, Err(Error::MultiplierTooSmall(_))));
        let r = full_real_julia_family(5, 2, &p, &u, &[rat_int(1)], None);
        assert!(matches!(r, Err(Error::ParityViolation { .. })));
        let r = full_real_julia_family(5, 3, &p, &u, &[rat_int(1)], Some(rat_int(-100)));
        assert!(matches!(r, Err(Error::ParameterOutOfRange(_))));
    }

    #[test]
    fn power_covers() {
        for (d, s) in [(3, 3), (5, 3), (4, -2), (5, -1)] {
            let b = perturbed_power_cover(d, s, 0.05).unwrap();
            assert_eq!(b.degree(), d);
            assert_eq!(circle_degree_of(&b), s);
            let f = cayley(&b).unwrap();
            assert_eq!(topological_degree(&f), Ok(s));
        }
        let f = cayley(&perturbed_power_cover(3, 3, 0.05).unwrap()).unwrap();
        assert!(turning_points(&f).is_empty());
        let e = lap_entropy(&f, 8).unwrap();
        assert!((e.value - 3f64.ln()).abs() < 0.03);
        let f = cayley(&perturbed_power_cover(5, 3, 0.05).unwrap()).unwrap();
        let e = lap_entropy(&f, 8).unwrap();
        assert!((e.value - 3f64.ln()).abs() < 0.05);

        let b = perturbed_power_cover(3, 3, 0.0).unwrap();
        assert_eq!(b.degree(), 3);
        let f = cayley(&b).unwrap();
        let inv = kneading_determinant(&f).unwrap();
        assert!((inv.entropy - 3f64.ln()).abs() < 1e-12);
        assert!(matches!(perturbed_power_cover(4, 3, 0.01), Err(Error::ParityViolation { .. })));
        assert!(perturbed_power_cover(3, 3, 0.2).is_err());
    }

    #[test]
    fn sweeps() {
        let spec = FamilySpec::lattes_legendre();
        let g = grid(&[linspace(0.1, 0.9, 9)]);
        let r = sweep(&spec, &g, Estimator::Lap(10), 0.02);
        assert_eq!(r.rows.len(), 9);
        assert!(r.constant, "{:?} {:?}", r.min, r.max);
        assert!(r.rows.windows(2).all(|w| w[0].params[0] < w[1].params[0]));
        for row in &r.rows {
            assert!((row.estimate.unwrap().value - LN2).abs() < 0.03);
        }

        let spec = FamilySpec::perturbed_power_cover();
        let r = sweep(&spec, &grid(&[vec![3.0], vec![3.0], vec![0.0, 0.02, 0.04]]), Estimator::Lap(8), 0.02);
        assert!(r.constant);

        let r = sweep(&FamilySpec::lattes_legendre(), &[vec![0.5], vec![2.0]], Estimator::Lap(8), 0.02);
        assert!(r.rows[1].error.is_some());
        assert_eq!(r.min, r.max);
    }

    #[test]
    fn grid_shape() {
        let g = grid(&[vec![1.0, 2.0], vec![3.0, 4.0, 5.0]]);
        assert_eq!(g.len(), 6);
        assert_eq!(g[1], vec![1.0, 4.0]);
        assert_eq!(linspace(0.1, 0.9, 9).len(), 9);
    }
}
