//! Blaschke products on the unit circle and their real models under the Cayley transform.
//!
//! Angles are in turns: `θ` stands for `e^{2πiθ}`. The Cayley transform
//! `x = i(1+z)/(1-z)` sends the angle `θ` to the chart point with `t = θ`.

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::realmap::{QPoly, RealRationalMap};
use crate::scalar::{rat, RealFloat};

type C64 = Complex<f64>;

/// `e^{2πic} ∏ (z-a_i)/(1-ā_i z) ∏ (z-b_j)/(1-b̄_j z)`, optionally followed by `z ↦ 1/z`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlaschkeProduct<F: RealFloat = f64> {
    pub inside_zeros: Vec<Complex<F>>,
    pub outside_zeros: Vec<Complex<F>>,
    /// `c` in turns, in `[0, 1)`.
    pub rotation: F,
    pub reciprocal_post: bool,
}

impl<F: RealFloat> BlaschkeProduct<F> {
    pub fn new(
        inside_zeros: Vec<Complex<F>>,
        outside_zeros: Vec<Complex<F>>,
        rotation: F,
        reciprocal_post: bool,
    ) -> Result<Self> {
        let margin = F::lit(1e-12);
        if let Some(a) = inside_zeros.iter().find(|a| a.norm() >= F::one() - margin) {
            return Err(Error::ParameterOutOfRange(format!(
                "inside zero of modulus {:?}",
                a.norm()
            )));
        }
        if let Some(b) = outside_zeros.iter().find(|b| b.norm() <= F::one() + margin) {
            return Err(Error::ParameterOutOfRange(format!(
                "outside zero of modulus {:?}",
                b.norm()
            )));
        }
        let d = inside_zeros.len() + outside_zeros.len();
        if d < 2 {
            return Err(Error::DegreeTooSmall(d));
        }
        let rotation = rotation - rotation.floor();
        Ok(BlaschkeProduct {
            inside_zeros,
            outside_zeros,
            rotation,
            reciprocal_post,
        })
    }

    /// All zeros inside the disk, no rotation.
    pub fn with_inside_zeros(zeros: Vec<Complex<F>>) -> Result<Self> {
        Self::new(zeros, Vec::new(), F::zero(), false)
    }

    pub fn degree(&self) -> usize {
        self.inside_zeros.len() + self.outside_zeros.len()
    }

    pub fn eval(&self, z: Complex<F>) -> Complex<F> {
        let two_pi = F::PI() + F::PI();
        let mut w = Complex::from_polar(F::one(), two_pi * self.rotation);
        for a in self.inside_zeros.iter().chain(&self.outside_zeros) {
            let one: Complex<F> = Complex::one();
            w = w * (z - a) / (one - a.conj() * z);
        }
        if self.reciprocal_post {
            w.inv()
        } else {
            w
        }
    }

    /// Image of the angle `θ`, as an angle in `[0, 1)`.
    pub fn eval_angle(&self, theta: F) -> F {
        let two_pi = F::PI() + F::PI();
        let w = self.eval(Complex::from_polar(F::one(), two_pi * theta));
        let t = w.arg() / two_pi;
        t - t.floor()
    }

    /// Largest deviation of `|B(z)|` from 1 over `n` equally spaced angles.
    pub fn unimodularity_defect(&self, n: usize) -> F {
        let two_pi = F::PI() + F::PI();
        (0..n)
            .map(|k| {
                let th = (F::from_usize(k).unwrap() + F::lit(0.5)) / F::from_usize(n).unwrap();
                (self.eval(Complex::from_polar(F::one(), two_pi * th)).norm() - F::one()).abs()
            })
            .fold(F::zero(), F::max)
    }

    /// Numerator and denominator coefficients (lowest power first).
    pub fn polynomials(&self) -> (Vec<Complex<F>>, Vec<Complex<F>>) {
        let two_pi = F::PI() + F::PI();
        let mut num = vec![Complex::from_polar(F::one(), two_pi * self.rotation)];
        let mut den = vec![Complex::one()];
        for a in self.inside_zeros.iter().chain(&self.outside_zeros) {
            num = cmul(&num, &[-*a, Complex::one()]);
            den = cmul(&den, &[Complex::one(), -a.conj()]);
        }
        if self.reciprocal_post {
            (den, num)
        } else {
            (num, den)
        }
    }
}

fn cmul<F: RealFloat>(a: &[Complex<F>], b: &[Complex<F>]) -> Vec<Complex<F>> {
    let mut out = vec![Complex::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j] + x * y;
        }
    }
    out
}

fn cpad(mut a: Vec<C64>, n: usize) -> Vec<C64> {
    a.resize(n, C64::zero());
    a
}

/// Circle degree `±(2k - d)`, negated by the reciprocal post-composition.
pub fn circle_degree_of<F: RealFloat>(b: &BlaschkeProduct<F>) -> i64 {
    let k = b.inside_zeros.len() as i64;
    let s = 2 * k - b.degree() as i64;
    if b.reciprocal_post {
        -s
    } else {
        s
    }
}

const REAL_TOL: f64 = 1e-9;

/// Real map conjugate to `B` by the Cayley transform.
pub fn cayley<F: RealFloat>(b: &BlaschkeProduct<F>) -> Result<RealRationalMap> {
    let d = b.degree();
    let to64 = |z: &Complex<F>| C64::new(z.re.to_double(), z.im.to_double());
    let (n, m) = b.polynomials();
    let n: Vec<C64> = cpad(n.iter().map(to64).collect(), d + 1);
    let m: Vec<C64> = cpad(m.iter().map(to64).collect(), d + 1);
    // (x - i)^k (x + i)^(d - k), lowest power first
    let minus = [C64::new(0.0, -1.0), C64::one()];
    let plus = [C64::new(0.0, 1.0), C64::one()];
    let mut pm = vec![vec![C64::one()]];
    let mut pp = vec![vec![C64::one()]];
    for k in 1..=d {
        pm.push(cmul(&pm[k - 1], &minus));
        pp.push(cmul(&pp[k - 1], &plus));
    }
    let homogenize = |c: &[C64]| {
        let mut out = vec![C64::zero(); d + 1];
        for (k, ck) in c.iter().enumerate() {
            for (i, v) in cmul(&pm[k], &pp[d - k]).iter().enumerate() {
                out[i] += ck * v;
            }
        }
        out
    };
    let nh = homogenize(&n);
    let mh = homogenize(&m);
    let i = C64::new(0.0, 1.0);
    let p: Vec<C64> = nh.iter().zip(&mh).map(|(a, b)| i * (b + a)).collect();
    let q: Vec<C64> = nh.iter().zip(&mh).map(|(a, b)| b - a).collect();
    let (p, q) = realify(&p, &q)?;
    RealRationalMap::from_f64(&p, &q)
}

/// Rotate `(p, q)` by a common unit scalar so that both become real.
fn realify(p: &[C64], q: &[C64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let big = p
        .iter()
        .chain(q)
        .copied()
        .max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap())
        .unwrap_or_else(C64::one);
    let lam = big.conj() / (big.norm() * big.norm());
    let mut residue: f64 = 0.0;
    let mut conv = |c: &[C64]| -> Vec<f64> {
        c.iter()
            .map(|z| {
                let w = z * lam;
                residue = residue.max(w.im.abs() / (1.0 + w.norm()));
                if w.re.abs() < 1e-14 {
                    0.0
                } else {
                    w.re
                }
            })
            .collect()
    };
    let (pr, qr) = (conv(p), conv(q));
    if residue > REAL_TOL {
        return Err(Error::NotRealizable(residue));
    }
    Ok((pr, qr))
}

/// `|B'|` at the angle `θ` for a product with all zeros inside the disk.
pub fn circle_multiplier(b: &BlaschkeProduct<f64>, theta: f64) -> Result<f64> {
    if !b.outside_zeros.is_empty() || b.reciprocal_post {
        return Err(Error::UnsupportedConfiguration(
            "multiplier formula needs all zeros inside the disk".into(),
        ));
    }
    Ok(multiplier_sum(&b.inside_zeros, theta))
}

fn multiplier_sum(zeros: &[C64], theta: f64) -> f64 {
    let z = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * theta);
    zeros
        .iter()
        .map(|a| (1.0 - a.norm_sqr()) / (z - a).norm_sqr())
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    CantorFixedPoint,
    CircleJuliaHyperbolic,
    ParabolicFull,
}

/// Witness that a map has real entropy `log d`.
#[derive(Clone, Debug)]
pub struct MaximalEntropyCertificate {
    pub kind: CertificateKind,
    /// Fixed-point angle for Cantor certificates.
    pub theta0: Option<f64>,
    pub multiplier: f64,
    pub product: Option<BlaschkeProduct<f64>>,
    pub map: RealRationalMap,
}

impl MaximalEntropyCertificate {
    /// Re-checks the defining property of the certificate.
    pub fn verify(&self) -> Result<()> {
        match self.kind {
            CertificateKind::CantorFixedPoint => {
                let b = self.product.as_ref().ok_or(Error::EliminationDegenerate)?;
                let th = self.theta0.unwrap_or(0.0);
                let z = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * th);
                let r = (b.eval(z) - z).norm();
                if r >= 1e-10 {
                    return Err(Error::InternalConsistency(format!("fixed point residual {r:e}")));
                }
                let m = circle_multiplier(b, th)?;
                if m >= 1.0 {
                    return Err(Error::ConditionFails(m));
                }
                Ok(())
            }
            CertificateKind::CircleJuliaHyperbolic => {
                let b = self.product.as_ref().ok_or(Error::EliminationDegenerate)?;
                // 0 is fixed, or swapped with ∞ after the reciprocal; either way the
                // product before the reciprocal vanishes at 0
                let inner = BlaschkeProduct {
                    reciprocal_post: false,
                    ..b.clone()
                };
                let ok = inner.eval(C64::zero()).norm() < 1e-12;
                if ok && self.multiplier < 1.0 {
                    Ok(())
                } else {
                    Err(Error::InternalConsistency("no attracting orbit at 0".into()))
                }
            }
            CertificateKind::ParabolicFull => {
                ParabolicReport::of(&self.map).check()
            }
        }
    }
}

/// Product with an attracting fixed point `e^{2πiθ₀}`, so that its Julia set is a Cantor set.
pub fn cantor_certificate(zeros: &[C64], theta0: f64) -> Result<MaximalEntropyCertificate> {
    let sum = multiplier_sum(zeros, theta0);
    if sum >= 1.0 {
        return Err(Error::ConditionFails(sum));
    }
    let d = zeros.len() as f64;
    let z = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * theta0);
    let args: f64 = zeros.iter().map(|a| (z - a).arg()).sum();
    let c = ((d + 1.0) * theta0 - args / std::f64::consts::PI).rem_euclid(1.0);
    let b = BlaschkeProduct::new(zeros.to_vec(), Vec::new(), c, false)?;
    let map = cayley(&b)?;
    let cert = MaximalEntropyCertificate {
        kind: CertificateKind::CantorFixedPoint,
        theta0: Some(theta0),
        multiplier: sum,
        product: Some(b),
        map,
    };
    cert.verify()?;
    Ok(cert)
}

/// `z ∏ (z-a_i)/(1-ā_i z)`, post-composed with `1/z` when `orientation = -1`.
pub fn circle_julia_normal_form(a: &[C64], orientation: i8) -> Result<BlaschkeProduct<f64>> {
    let mut zeros = vec![C64::zero()];
    zeros.extend_from_slice(a);
    BlaschkeProduct::new(zeros, Vec::new(), 0.0, orientation < 0)
}

/// Certificate for the hyperbolic case with Julia set the whole circle.
pub fn circle_julia_certificate(a: &[C64], orientation: i8) -> Result<MaximalEntropyCertificate> {
    let b = circle_julia_normal_form(a, orientation)?;
    let prod: C64 = a.iter().fold(C64::one(), |acc, x| acc * x);
    // f'(0) = ∏(-a_i); for the 2-cycle 0 ↔ ∞ the multiplier is |∏ a_i|^2
    let multiplier = if orientation < 0 {
        prod.norm_sqr()
    } else {
        prod.norm()
    };
    let map = cayley(&b)?;
    let cert = MaximalEntropyCertificate {
        kind: CertificateKind::CircleJuliaHyperbolic,
        theta0: None,
        multiplier,
        product: Some(b),
        map,
    };
    cert.verify()?;
    Ok(cert)
}

/// Checks on a map of the form `ε(z + P/Q)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParabolicReport {
    pub real_critical_points: Vec<f64>,
    pub infinity_multiplier: Option<f64>,
    pub infinity_multiplicity: usize,
}

impl ParabolicReport {
    pub fn of(f: &RealRationalMap) -> Self {
        let real_critical_points = f
            .critical_points_real()
            .into_iter()
            .map(|(c, _)| c.raw())
            .collect();
        let inf = f.fixed_points_real().into_iter().find(|p| p.point.is_infinite());
        ParabolicReport {
            real_critical_points,
            infinity_multiplier: inf.as_ref().map(|p| p.multiplier),
            infinity_multiplicity: inf.map_or(0, |p| p.multiplicity),
        }
    }

    pub fn check(&self) -> Result<()> {
        if let Some(c) = self.real_critical_points.first() {
            return Err(Error::RealCriticalPointPresent(*c));
        }
        match self.infinity_multiplier {
            Some(m) if (m.abs() - 1.0).abs() < 1e-12 => Ok(()),
            _ => Err(Error::InternalConsistency("∞ is not a parabolic fixed point".into())),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ParabolicForm {
    pub map: RealRationalMap,
    pub report: ParabolicReport,
}

impl ParabolicForm {
    pub fn certificate(&self) -> Result<MaximalEntropyCertificate> {
        self.report.check()?;
        Ok(MaximalEntropyCertificate {
            kind: CertificateKind::ParabolicFull,
            theta0: Some(0.0),
            multiplier: self.report.infinity_multiplier.unwrap_or(1.0),
            product: None,
            map: self.map.clone(),
        })
    }
}

/// `ε(z + P/Q)` with the degree constraints checked. Validation failures are kept in
/// the report rather than returned, so the map is always available.
pub fn parabolic_full_form(p: &QPoly, q: &QPoly, eps: i8) -> Result<ParabolicForm> {
    if q.is_zero() {
        return Err(Error::ZeroDenominator);
    }
    let d = q.degree() + 1;
    let strict = eps > 0;
    if p.degree() > d - 1 || (strict && !p.is_zero() && p.degree() == d - 1) {
        return Err(Error::DegreeConstraintViolated(format!(
            "deg P = {} with deg Q = {}",
            p.degree(),
            q.degree()
        )));
    }
    if p.gcd(q).degree() > 0 {
        return Err(Error::DegreeConstraintViolated("P and Q share a factor".into()));
    }
    let num = &(&QPoly::x() * q) + p;
    let num = if eps < 0 { -&num } else { num };
    let map = RealRationalMap::from_polys(num, q.clone())?;
    if map.degree() != d {
        return Err(Error::DegreeConstraintViolated(format!(
            "map has degree {} instead of {d}",
            map.degree()
        )));
    }
    let report = ParabolicReport::of(&map);
    Ok(ParabolicForm { map, report })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QuotientMode {
    /// Quotient by `z ↦ 1/z` through `j(z) = z + 1/z`.
    Joukowsky,
    /// Quotient by `z ↦ -z` through `z ↦ z^2`.
    Square,
}

#[derive(Clone, Debug)]
pub struct Quotient {
    pub map: RealRationalMap,
    /// Largest sampled semiconjugacy defect.
    pub residual: f64,
    /// Whether the symmetry held exactly (otherwise it was imposed by averaging).
    pub exact: bool,
}

/// `f` with `j∘g = f∘j` (Joukowsky) or `f(z^2) = g(z)^2` (square).
pub fn joukowsky_quotient(g: &RealRationalMap, mode: QuotientMode) -> Result<Quotient> {
    let (n, d) = (g.numerator(), g.denominator());
    let deg = g.degree();
    let (a, b, exact) = match mode {
        QuotientMode::Joukowsky => {
            let a = &(n * n) + &(d * d);
            let b = n * d;
            let (a, ea) = symmetrize(&a, 2 * deg)?;
            let (b, eb) = symmetrize(&b, 2 * deg)?;
            (laurent_to_joukowsky(&a, deg), laurent_to_joukowsky(&b, deg), ea && eb)
        }
        QuotientMode::Square => {
            let (ok, res) = odd_defect(g);
            if !ok && res > REAL_TOL {
                return Err(Error::CommutationFails(format!(
                    "g is not odd: defect {res:e}"
                )));
            }
            (even_part_in_square(&(n * n)), even_part_in_square(&(d * d)), ok)
        }
    };
    if b.is_zero() {
        return Err(Error::EliminationDegenerate);
    }
    let f = RealRationalMap::from_polys(a, b).map_err(|_| Error::EliminationDegenerate)?;
    let residual = semiconjugacy_residual(g, &f, mode);
    if residual >= 1e-8 {
        return Err(Error::CommutationFails(format!("residual {residual:e}")));
    }
    Ok(Quotient {
        map: f,
        residual,
        exact,
    })
}

/// Blaschke products with real coefficients (conjugation-symmetric zeros, `c ∈ {0, 1/2}`).
pub fn joukowsky_quotient_blaschke(b: &BlaschkeProduct<f64>, mode: QuotientMode) -> Result<Quotient> {
    let (n, m) = b.polynomials();
    let (n, m) = realify(&n, &m)?;
    let g = RealRationalMap::from_f64(&n, &m)?;
    joukowsky_quotient(&g, mode)
}

/// Imposes `c_k = c_{n-k}`; exact when it already holds, averaged when the
/// defect is below `1e-9`.
fn symmetrize(p: &QPoly, n: usize) -> Result<(QPoly, bool)> {
    let rev = p.reversed(n);
    if rev == *p {
        return Ok((p.clone(), true));
    }
    let scale = p.to_f64().coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs())).max(1e-300);
    let defect = (&rev - p)
        .to_f64()
        .coeffs()
        .iter()
        .fold(0.0f64, |m, c| m.max(c.abs()))
        / scale;
    if defect > REAL_TOL {
        return Err(Error::CommutationFails(format!(
            "g does not commute with 1/z: defect {defect:e}"
        )));
    }
    Ok(((&rev + p).scale(&rat(1, 2)), false))
}

/// `Σ c_k z^{k-m}` with `c_k = c_{2m-k}`, rewritten in `w = z + 1/z`.
fn laurent_to_joukowsky(p: &QPoly, m: usize) -> QPoly {
    // C_0 = 2, C_1 = w, C_{k+1} = w C_k - C_{k-1}; z^k + z^{-k} = C_k(w)
    let mut cheb = vec![QPoly::constant(rat(2, 1)), QPoly::x()];
    for k in 1..m {
        let next = &(&QPoly::x() * &cheb[k]) - &cheb[k - 1];
        cheb.push(next);
    }
    let mut out = QPoly::constant(p.coeff(m));
    for k in 1..=m {
        out = &out + &cheb[k].scale(&p.coeff(m + k));
    }
    out
}

fn even_part_in_square(p: &QPoly) -> QPoly {
    QPoly::new(p.coeffs().iter().step_by(2).cloned().collect())
}

/// Exact oddness test `N(-z) D(z) = -N(z) D(-z)`, with a float defect otherwise.
fn odd_defect(g: &RealRationalMap) -> (bool, f64) {
    let (n, d) = (g.numerator(), g.denominator());
    let lhs = &n.reflect() * d;
    let rhs = -&(n * &d.reflect());
    if lhs == rhs {
        return (true, 0.0);
    }
    let scale = (n * d).to_f64().coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs())).max(1e-300);
    let defect = (&lhs - &rhs)
        .to_f64()
        .coeffs()
        .iter()
        .fold(0.0f64, |m, c| m.max(c.abs()));
    (false, defect / scale)
}

fn eval_c(p: &Poly<f64>, z: C64) -> C64 {
    p.coeffs().iter().rev().fold(C64::zero(), |acc, c| acc * z + c)
}

fn eval_map_c(f: &RealRationalMap, z: C64) -> C64 {
    let fm = f.float_map();
    eval_c(&fm.p, z) / eval_c(&fm.q, z)
}

/// Largest relative semiconjugacy defect over `4d + 7` points of the unit circle.
pub fn semiconjugacy_residual(g: &RealRationalMap, f: &RealRationalMap, mode: QuotientMode) -> f64 {
    let n = 4 * g.degree() + 7;
    let mut worst: f64 = 0.0;
    for k in 0..n {
        let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.3183) / n as f64;
        let z = C64::from_polar(1.0, th) * 1.1;
        let gz = eval_map_c(g, z);
        let (lhs, rhs) = match mode {
            QuotientMode::Joukowsky => (gz + gz.inv(), eval_map_c(f, z + z.inv())),
            QuotientMode::Square => (gz * gz, eval_map_c(f, z * z)),
        };
        if !lhs.is_finite() || !rhs.is_finite() {
            continue;
        }
        worst = worst.max((lhs - rhs).norm() / (1.0 + lhs.norm()));
    }
    worst
}
