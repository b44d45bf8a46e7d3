//! Dense univariate polynomials over a [`Scalar`] field.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::scalar::Scalar;

/// Coefficients are stored lowest power first; trailing zeros are trimmed.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<T: Scalar> {
    coeffs: Vec<T>,
}

impl<T: Scalar> Poly<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(T::one())
    }

    pub fn constant(c: T) -> Self {
        Self::new(vec![c])
    }

    /// The identity polynomial `x`.
    pub fn x() -> Self {
        Self::new(vec![T::zero(), T::one()])
    }

    pub fn monomial(c: T, k: usize) -> Self {
        let mut v = vec![T::zero(); k + 1];
        v[k] = c;
        Self::new(v)
    }

    pub fn from_i64(cs: &[i64]) -> Self {
        Self::new(cs.iter().map(|&c| T::from_int(c)).collect())
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).cloned().unwrap_or_else(T::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn lead(&self) -> T {
        self.coeffs.last().cloned().unwrap_or_else(T::zero)
    }

    pub fn eval(&self, x: &T) -> T {
        let mut acc = T::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x.clone() + c.clone();
        }
        acc
    }

    pub fn scale(&self, s: &T) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.clone() * s.clone()).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c.clone() * T::from_int(k as i64))
                .collect(),
        )
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let l = self.lead();
        Self::new(self.coeffs.iter().map(|c| c.clone() / l.clone()).collect())
    }

    /// Euclidean division `self = q * other + r`.
    pub fn div_rem(&self, other: &Self) -> (Self, Self) {
        assert!(!other.is_zero(), "polynomial division by zero");
        let mut r = self.coeffs.clone();
        let dd = other.degree();
        let lead = other.lead();
        if r.len() < other.coeffs.len() {
            return (Self::zero(), self.clone());
        }
        let mut q = vec![T::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = r[k + dd].clone() / lead.clone();
            if !c.is_zero() {
                for (j, oc) in other.coeffs.iter().enumerate() {
                    r[k + j] = r[k + j].clone() - c.clone() * oc.clone();
                }
            }
            r[k + dd] = T::zero();
            q[k] = c;
        }
        if !T::EXACT {
            r.truncate(dd);
        }
        (Self::new(q), Self::new(r))
    }

    pub fn rem(&self, other: &Self) -> Self {
        self.div_rem(other).1
    }

    /// Exact division; panics in debug builds if the remainder is nonzero.
    pub fn div_exact(&self, other: &Self) -> Self {
        let (q, r) = self.div_rem(other);
        debug_assert!(!T::EXACT || r.is_zero(), "inexact polynomial division");
        q
    }

    /// Monic greatest common divisor. Meaningful for exact scalars only.
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `self(g(x))`.
    pub fn compose(&self, g: &Self) -> Self {
        let mut acc = Self::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * g) + &Self::constant(c.clone());
        }
        acc
    }

    /// `sum_i a_i u^i v^(d-i)`: the degree-`d` homogenisation evaluated at polynomials.
    pub fn homogeneous(&self, d: usize, u: &Self, v: &Self) -> Self {
        assert!(self.degree() <= d || self.is_zero());
        let mut upow = vec![Self::one()];
        let mut vpow = vec![Self::one()];
        for k in 1..=d {
            upow.push(&upow[k - 1] * u);
            vpow.push(&vpow[k - 1] * v);
        }
        let mut acc = Self::zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            acc = &acc + &(&upow[i] * &vpow[d - i]).scale(c);
        }
        acc
    }

    /// `x^d p(1/x)`.
    pub fn reversed(&self, d: usize) -> Self {
        let mut v = vec![T::zero(); d + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            v[d - i] = c.clone();
        }
        Self::new(v)
    }

    /// `p(-x)`.
    pub fn reflect(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| if k % 2 == 1 { -c.clone() } else { c.clone() })
                .collect(),
        )
    }

    /// Multiplicity of 0 as a root.
    pub fn valuation(&self) -> usize {
        self.coeffs.iter().take_while(|c| c.is_zero()).count()
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Poly<U> {
        Poly::new(self.coeffs.iter().map(f).collect())
    }

    pub fn to_f64(&self) -> Poly<f64> {
        self.map(|c| c.to_double())
    }

    /// Yun square-free decomposition: `self = c * prod_k f_k^k`, returned as `(f_k, k)`.
    pub fn square_free_decomposition(&self) -> Vec<(Self, usize)> {
        let mut out = Vec::new();
        if self.degree() == 0 {
            return out;
        }
        let d = self.derivative();
        let mut a = self.gcd(&d);
        let mut b = self.div_exact(&a);
        let mut c = d.div_exact(&a);
        let mut k = 1;
        loop {
            let dd = &c - &b.derivative();
            if b.degree() == 0 {
                break;
            }
            a = b.gcd(&dd);
            if a.degree() > 0 {
                out.push((a.clone(), k));
            }
            b = b.div_exact(&a);
            c = dd.div_exact(&a);
            k += 1;
        }
        out
    }

    pub fn square_free_part(&self) -> Self {
        if self.degree() == 0 {
            return Self::one();
        }
        self.div_exact(&self.gcd(&self.derivative())).monic()
    }

    /// Resultant via the Euclidean remainder sequence.
    pub fn resultant(&self, other: &Self) -> T {
        if self.is_zero() || other.is_zero() {
            return T::zero();
        }
        let mut a = self.clone();
        let mut b = other.clone();
        let mut acc = T::one();
        loop {
            let da = a.degree();
            let db = b.degree();
            if db == 0 {
                let mut p = T::one();
                for _ in 0..da {
                    p = p * b.lead();
                }
                return acc * p;
            }
            let r = a.rem(&b);
            if r.is_zero() {
                return T::zero();
            }
            let dr = r.degree();
            if (da * db) % 2 == 1 {
                acc = -acc;
            }
            for _ in 0..(da - dr) {
                acc = acc * b.lead();
            }
            a = b;
            b = r;
        }
    }
}

impl Poly<BigRational> {
    /// Scale to a primitive integer polynomial with positive leading coefficient.
    pub fn primitive_integer(&self) -> Vec<BigInt> {
        if self.is_zero() {
            return Vec::new();
        }
        let mut l = BigInt::one();
        for c in &self.coeffs {
            l = l.lcm(c.denom());
        }
        let ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .map(|c| (c * BigRational::from_integer(l.clone())).to_integer())
            .collect();
        let mut g = BigInt::zero();
        for c in &ints {
            g = g.gcd(c);
        }
        let sign = if ints.last().unwrap().is_negative() { -1 } else { 1 };
        ints.into_iter().map(|c| c / &g * sign).collect()
    }

    pub fn from_integers(cs: &[BigInt]) -> Self {
        Self::new(cs.iter().map(|c| BigRational::from_integer(c.clone())).collect())
    }

    /// Rational `p(a/b) * b^deg` sign helper: sign of `p` at a rational point.
    pub fn sign_at(&self, x: &BigRational) -> i32 {
        let v = self.eval(x);
        if v.is_zero() {
            0
        } else if v.is_positive() {
            1
        } else {
            -1
        }
    }
}

impl<T: Scalar> Add for &Poly<T> {
    type Output = Poly<T>;
    fn add(self, o: &Poly<T>) -> Poly<T> {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }
}

impl<T: Scalar> Sub for &Poly<T> {
    type Output = Poly<T>;
    fn sub(self, o: &Poly<T>) -> Poly<T> {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) - o.coeff(k)).collect())
    }
}

impl<T: Scalar> Mul for &Poly<T> {
    type Output = Poly<T>;
    fn mul(self, o: &Poly<T>) -> Poly<T> {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut v = vec![T::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                v[i + j] = v[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::new(v)
    }
}

impl<T: Scalar> Neg for &Poly<T> {
    type Output = Poly<T>;
    fn neg(self) -> Poly<T> {
        Poly::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

impl<T: Scalar> Add for Poly<T> {
    type Output = Poly<T>;
    fn add(self, o: Poly<T>) -> Poly<T> {
        &self + &o
    }
}

impl<T: Scalar> Sub for Poly<T> {
    type Output = Poly<T>;
    fn sub(self, o: Poly<T>) -> Poly<T> {
        &self - &o
    }
}

impl<T: Scalar> Mul for Poly<T> {
    type Output = Poly<T>;
    fn mul(self, o: Poly<T>) -> Poly<T> {
        &self * &o
    }
}

impl<T: Scalar> Neg for Poly<T> {
    type Output = Poly<T>;
    fn neg(self) -> Poly<T> {
        -&self
    }
}

/// Writes the polynomial in the input syntax understood by the CLI parser.
impl<T: Scalar + fmt::Display> fmt::Display for Poly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_poly(self, "z", f)
    }
}

pub fn fmt_poly<T: Scalar + fmt::Display>(
    p: &Poly<T>,
    var: &str,
    f: &mut fmt::Formatter<'_>,
) -> fmt::Result {
    if p.is_zero() {
        return write!(f, "0");
    }
    let mut first = true;
    for (k, c) in p.coeffs.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let neg = c.is_negative();
        let a = c.abs();
        if first {
            if neg {
                write!(f, "-")?;
            }
        } else {
            write!(f, "{}", if neg { "-" } else { "+" })?;
        }
        first = false;
        let unit = a.is_one();
        let cs = format!("{a}");
        let cs = if cs.contains('/') { format!("({cs})") } else { cs };
        match k {
            0 => write!(f, "{cs}")?,
            1 if unit => write!(f, "{var}")?,
            1 => write!(f, "{cs}*{var}")?,
            _ if unit => write!(f, "{var}^{k}")?,
            _ => write!(f, "{cs}*{var}^{k}")?,
        }
    }
    Ok(())
}
