//! Points of the real circle in the angle chart `x = tan(pi (t - 1/2))`.

use std::cmp::Ordering;

use crate::scalar::RealFloat;

/// A point of `R ∪ {∞}`. `t = 0` is `∞`; the finite value is kept alongside the
/// angle so that values near `∞` do not lose precision through the chart.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CirclePoint<F: RealFloat> {
    t: F,
    x: F,
}

impl<F: RealFloat> CirclePoint<F> {
    pub fn infinity() -> Self {
        CirclePoint {
            t: F::zero(),
            x: F::infinity(),
        }
    }

    pub fn finite(x: F) -> Self {
        if !x.is_finite() {
            return Self::infinity();
        }
        let t = F::lit(0.5) + x.atan() / F::PI();
        let t = if t >= F::one() { F::zero() } else { t };
        CirclePoint { t, x }
    }

    /// From an angle, reduced into `[0, 1)`.
    pub fn from_angle(t: F) -> Self {
        let mut t = t - t.floor();
        if t >= F::one() {
            t = F::zero();
        }
        if t == F::zero() {
            return Self::infinity();
        }
        let x = (F::PI() * (t - F::lit(0.5))).tan();
        CirclePoint { t, x }
    }

    /// From homogeneous coordinates `(u : v)` meaning `u / v`.
    pub fn from_homogeneous(u: F, v: F) -> Self {
        if v == F::zero() {
            return Self::infinity();
        }
        Self::finite(u / v)
    }

    pub fn angle(&self) -> F {
        self.t
    }

    pub fn is_infinite(&self) -> bool {
        !self.x.is_finite()
    }

    /// The finite value, or `None` at `∞`.
    pub fn value(&self) -> Option<F> {
        if self.is_infinite() {
            None
        } else {
            Some(self.x)
        }
    }

    /// Value with `∞` mapped to `F::infinity()`.
    pub fn raw(&self) -> F {
        self.x
    }

    /// Circular distance between angles, at most 1/2.
    pub fn distance(&self, other: &Self) -> F {
        angle_distance(self.t, other.t)
    }

    pub fn cmp_angle(&self, other: &Self) -> Ordering {
        self.t.partial_cmp(&other.t).unwrap_or(Ordering::Equal)
    }
}

pub fn angle_distance<F: RealFloat>(a: F, b: F) -> F {
    let d = (a - b).abs();
    let d = d - d.floor();
    d.min(F::one() - d)
}

/// Sort by angle and merge points closer than `tol` (including across `t = 0`).
pub fn dedup_sorted<F: RealFloat>(pts: &mut Vec<CirclePoint<F>>, tol: F) {
    pts.sort_by(|a, b| a.cmp_angle(b));
    let mut out: Vec<CirclePoint<F>> = Vec::with_capacity(pts.len());
    for p in pts.drain(..) {
        match out.last() {
            Some(q) if p.t - q.t < tol => {}
            _ => out.push(p),
        }
    }
    if out.len() > 1 {
        let first = out[0];
        let last = *out.last().unwrap();
        if first.distance(&last) < tol {
            out.pop();
        }
    }
    *pts = out;
}
