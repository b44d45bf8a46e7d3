//! Scalar traits shared by the exact and floating code paths.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// A field element usable as a polynomial coefficient.
///
/// Implemented for `f32`, `f64` and `BigRational`. Exact types report
/// `EXACT = true`, which switches zero tests from tolerances to equality.
pub trait Scalar:
    Clone + Debug + PartialEq + PartialOrd + Num + Signed + Send + Sync + 'static
{
    const EXACT: bool;

    fn from_rational(q: &BigRational) -> Self;
    fn from_int(n: i64) -> Self;
    fn to_double(&self) -> f64;
}

impl Scalar for f64 {
    const EXACT: bool = false;
    fn from_rational(q: &BigRational) -> Self {
        rational_to_f64(q)
    }
    fn from_int(n: i64) -> Self {
        n as f64
    }
    fn to_double(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;
    fn from_rational(q: &BigRational) -> Self {
        rational_to_f64(q) as f32
    }
    fn from_int(n: i64) -> Self {
        n as f32
    }
    fn to_double(&self) -> f64 {
        *self as f64
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;
    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }
    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn to_double(&self) -> f64 {
        rational_to_f64(self)
    }
}

/// Floating scalar used by iteration, root finding and the circle chart.
pub trait RealFloat: Scalar + Float + FloatConst + FromPrimitive + Copy {
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("representable literal")
    }
}

impl RealFloat for f32 {}
impl RealFloat for f64 {}

/// Nearest double to a big rational, robust to huge numerators/denominators.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    if let Some(v) = ToPrimitive::to_f64(q) {
        if v.is_finite() && (v != 0.0 || q.is_zero()) {
            return v;
        }
    }
    let n = q.numer();
    let d = q.denom();
    let shift = n.bits() as i64 - d.bits() as i64;
    // scale into a range where both parts fit comfortably
    let (n2, d2) = if shift > 0 {
        (n.clone(), d << (shift as usize))
    } else {
        (n << ((-shift) as usize), d.clone())
    };
    let head_bits = 64u64;
    let nb = n2.bits().saturating_sub(head_bits);
    let db = d2.bits().saturating_sub(head_bits);
    let nf = (&n2 >> (nb as usize)).to_f64().unwrap_or(0.0);
    let df = (&d2 >> (db as usize)).to_f64().unwrap_or(1.0);
    let e = shift + nb as i64 - db as i64;
    (nf / df) * 2f64.powi(e.clamp(-2000, 2000) as i32)
}

/// Exact rational from a finite double.
pub fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(BigRational::zero)
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Best rational approximation with denominator at most `max_den`.
pub fn rational_approx(x: f64, max_den: i64) -> BigRational {
    let sign = if x < 0.0 { -1 } else { 1 };
    let mut v = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    for _ in 0..64 {
        let a = v.floor();
        if a > 1e15 {
            break;
        }
        let a = a as i64;
        let p2 = a.saturating_mul(p1).saturating_add(p0);
        let q2 = a.saturating_mul(q1).saturating_add(q0);
        if q2 > max_den {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = v - a as f64;
        if frac < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    if q1 == 0 {
        return rat_int(sign * p1.max(1));
    }
    BigRational::new(BigInt::from(sign * p1), BigInt::from(q1))
}
