//! Real rational maps on the circle `R ∪ {∞}`.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::chart::CirclePoint;
use crate::error::{Error, Result};
use crate::poly::{fmt_poly, Poly};
use crate::roots::real_roots;
use crate::scalar::{rational_approx, rational_from_f64, rational_to_f64, RealFloat};
use crate::sturm::real_roots_with_multiplicity;

pub type Q = BigRational;
pub type QPoly = Poly<Q>;

/// Polynomial with exact rational coefficients and a cached double view.
#[derive(Clone, Debug, PartialEq)]
pub struct RealPolynomial {
    exact: QPoly,
    float: Poly<f64>,
}

impl RealPolynomial {
    pub fn new(exact: QPoly) -> Self {
        let float = exact.to_f64();
        RealPolynomial { exact, float }
    }

    pub fn from_i64(cs: &[i64]) -> Self {
        Self::new(QPoly::from_i64(cs))
    }

    /// Exact rationals equal to the given doubles.
    pub fn from_f64(cs: &[f64]) -> Self {
        Self::new(QPoly::new(cs.iter().map(|&c| rational_from_f64(c)).collect()))
    }

    pub fn exact(&self) -> &QPoly {
        &self.exact
    }

    pub fn float(&self) -> &Poly<f64> {
        &self.float
    }

    pub fn degree(&self) -> usize {
        self.exact.degree()
    }

    pub fn is_zero(&self) -> bool {
        self.exact.is_zero()
    }
}

impl From<QPoly> for RealPolynomial {
    fn from(p: QPoly) -> Self {
        RealPolynomial::new(p)
    }
}

/// Floating view of a map, with reversed polynomials for evaluation near `∞`.
#[derive(Clone, Debug)]
pub struct FloatMap<F: RealFloat> {
    pub p: Poly<F>,
    pub q: Poly<F>,
    p_rev: Poly<F>,
    q_rev: Poly<F>,
    w: Poly<F>,
    w_rev: Poly<F>,
    d: usize,
}

impl<F: RealFloat> FloatMap<F> {
    fn new(p: &QPoly, q: &QPoly, d: usize) -> Self {
        let conv = |c: &Q| F::from_rational(c);
        let w = &(&p.derivative() * q) - &(p * &q.derivative());
        FloatMap {
            p: p.map(conv),
            q: q.map(conv),
            p_rev: p.reversed(d).map(conv),
            q_rev: q.reversed(d).map(conv),
            w_rev: w.reversed(2 * d - 2).map(conv),
            w: w.map(conv),
            d,
        }
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    /// Homogeneous value `(u : v)` of `f(x)`, scaled to stay bounded near `∞`.
    pub fn eval_homogeneous(&self, x: F) -> (F, F) {
        if !x.is_finite() {
            return (self.p.coeff(self.d), self.q.coeff(self.d));
        }
        if x.abs() <= F::one() {
            (self.p.eval(&x), self.q.eval(&x))
        } else {
            let w = x.recip();
            (self.p_rev.eval(&w), self.q_rev.eval(&w))
        }
    }

    pub fn eval(&self, x: &CirclePoint<F>) -> CirclePoint<F> {
        let (u, v) = self.eval_homogeneous(x.raw());
        CirclePoint::from_homogeneous(u, v)
    }

    pub fn eval_value(&self, x: F) -> F {
        let (u, v) = self.eval_homogeneous(x);
        if v == F::zero() {
            F::infinity()
        } else {
            u / v
        }
    }

    /// Derivative of the circle map in the angle chart, `dt(f(x)) / dt(x)`.
    pub fn chart_derivative(&self, x: F) -> F {
        if self.d == 0 {
            return F::zero();
        }
        if x.is_finite() && x.abs() <= F::one() {
            let (u, v) = (self.p.eval(&x), self.q.eval(&x));
            self.w.eval(&x) * (F::one() + x * x) / (u * u + v * v)
        } else {
            let w = if x.is_finite() { x.recip() } else { F::zero() };
            let (u, v) = (self.p_rev.eval(&w), self.q_rev.eval(&w));
            self.w_rev.eval(&w) * (F::one() + w * w) / (u * u + v * v)
        }
    }

    /// Sign of `f'` at a finite point, as seen in the chart (also valid at poles).
    pub fn derivative_sign(&self, x: F) -> F {
        self.chart_derivative(x).signum()
    }

    /// Real solutions of `f(x) = y` with multiplicities, sorted by angle.
    pub fn preimages(&self, y: &CirclePoint<F>) -> Vec<(CirclePoint<F>, usize)> {
        let h = match y.value() {
            None => self.q.clone(),
            Some(y) if y.abs() <= F::one() => &self.p - &self.q.scale(&y),
            Some(y) => &self.p.scale(&y.recip()) - &self.q,
        };
        let scale = h.coeffs().iter().fold(F::zero(), |m, c| m.max(c.abs()));
        let mut cs = h.coeffs().to_vec();
        while cs.len() > 1 && cs.last().unwrap().abs() <= scale * F::lit(1e-14) {
            cs.pop();
        }
        let h = Poly::new(cs);
        let mut out: Vec<(CirclePoint<F>, usize)> = real_roots(&h)
            .into_iter()
            .map(|(r, m)| (CirclePoint::finite(r), m))
            .collect();
        let at_inf = self.d.saturating_sub(h.degree());
        if at_inf > 0 {
            out.push((CirclePoint::infinity(), at_inf));
        }
        out.sort_by(|a, b| a.0.cmp_angle(&b.0));
        out
    }
}

/// A real rational map `P/Q` in lowest terms with `Q` monic.
#[derive(Clone, Debug)]
pub struct RealRationalMap {
    p: RealPolynomial,
    q: RealPolynomial,
    degree: usize,
    float: FloatMap<f64>,
}

impl PartialEq for RealRationalMap {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.q == other.q
    }
}

/// Reduce `P/Q`, cancelling the exact gcd. Degree is recomputed afterwards.
pub fn make_map(p: RealPolynomial, q: RealPolynomial) -> Result<RealRationalMap> {
    RealRationalMap::from_polys(p.exact, q.exact)
}

impl RealRationalMap {
    pub fn from_polys(p: QPoly, q: QPoly) -> Result<Self> {
        Self::from_polys_allow_constant(p, q).and_then(|m| {
            if m.degree == 0 {
                Err(Error::DegeneratesToConstant)
            } else {
                Ok(m)
            }
        })
    }

    fn from_polys_allow_constant(p: QPoly, q: QPoly) -> Result<Self> {
        if q.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let g = p.gcd(&q);
        let (mut p, mut q) = if g.degree() > 0 {
            (p.div_exact(&g), q.div_exact(&g))
        } else {
            (p, q)
        };
        let l = q.lead();
        if !l.is_one() {
            p = p.scale(&(Q::one() / &l));
            q = q.monic();
        }
        let degree = if p.is_zero() {
            q.degree()
        } else {
            p.degree().max(q.degree())
        };
        let float = FloatMap::new(&p, &q, degree.max(1));
        Ok(RealRationalMap {
            p: RealPolynomial::new(p),
            q: RealPolynomial::new(q),
            degree,
            float,
        })
    }

    pub fn polynomial(p: QPoly) -> Result<Self> {
        Self::from_polys(p, QPoly::one())
    }

    /// Convenience constructor from integer coefficient lists.
    pub fn from_i64(p: &[i64], q: &[i64]) -> Result<Self> {
        Self::from_polys(QPoly::from_i64(p), QPoly::from_i64(q))
    }

    pub fn from_f64(p: &[f64], q: &[f64]) -> Result<Self> {
        Self::from_polys(
            RealPolynomial::from_f64(p).exact,
            RealPolynomial::from_f64(q).exact,
        )
    }

    pub fn identity() -> Self {
        Self::from_polys(QPoly::x(), QPoly::one()).unwrap()
    }

    pub fn numerator(&self) -> &QPoly {
        &self.p.exact
    }

    pub fn denominator(&self) -> &QPoly {
        &self.q.exact
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn float_map(&self) -> &FloatMap<f64> {
        &self.float
    }

    /// Float view in an arbitrary precision.
    pub fn float_view<F: RealFloat>(&self) -> FloatMap<F> {
        FloatMap::new(&self.p.exact, &self.q.exact, self.degree)
    }

    pub fn resultant(&self) -> Q {
        self.p.exact.resultant(&self.q.exact)
    }

    pub fn eval(&self, x: &CirclePoint<f64>) -> CirclePoint<f64> {
        self.float.eval(x)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.float.eval_value(x)
    }

    /// Exact evaluation; `None` stands for `∞` on input and output.
    pub fn eval_exact(&self, x: Option<&Q>) -> Option<Q> {
        let (u, v) = match x {
            None => (
                self.p.exact.coeff(self.degree),
                self.q.exact.coeff(self.degree),
            ),
            Some(x) => (self.p.exact.eval(x), self.q.exact.eval(x)),
        };
        if v.is_zero() {
            None
        } else {
            Some(u / v)
        }
    }

    /// `P'Q - PQ'`.
    pub fn wronskian(&self) -> QPoly {
        let (p, q) = (&self.p.exact, &self.q.exact);
        &(&p.derivative() * q) - &(p * &q.derivative())
    }

    /// `1 / f(1/x)`, the map seen in the chart at `∞`, as numerator/denominator.
    fn at_infinity(&self) -> (QPoly, QPoly) {
        (
            self.q.exact.reversed(self.degree),
            self.p.exact.reversed(self.degree),
        )
    }

    /// `self ∘ g`.
    pub fn compose(&self, g: &RealRationalMap) -> Result<RealRationalMap> {
        let d = self.degree;
        let (gp, gq) = (&g.p.exact, &g.q.exact);
        let n = self.p.exact.homogeneous(d, gp, gq);
        let m = self.q.exact.homogeneous(d, gp, gq);
        Self::from_polys(n, m)
    }

    /// `f∘f∘…∘f`, `n ≥ 1` times.
    pub fn iterate(&self, n: usize) -> Result<RealRationalMap> {
        let mut acc = self.clone();
        for _ in 1..n {
            acc = self.compose(&acc)?;
        }
        Ok(acc)
    }

    /// Real critical points with multiplicities (local degree minus one), by angle.
    pub fn critical_points_real(&self) -> Vec<(CirclePoint<f64>, usize)> {
        let mut out: Vec<(CirclePoint<f64>, usize)> =
            real_roots_with_multiplicity(&self.wronskian())
                .into_iter()
                .map(|(iv, k)| (CirclePoint::finite(iv.to_f64()), k))
                .collect();
        let (gp, gq) = self.at_infinity();
        let wg = &(&gp.derivative() * &gq) - &(&gp * &gq.derivative());
        let k = wg.valuation();
        if k > 0 && !wg.is_zero() {
            out.push((CirclePoint::infinity(), k));
        }
        out.sort_by(|a, b| a.0.cmp_angle(&b.0));
        out
    }

    /// Real fixed points with multipliers and multiplicities.
    pub fn fixed_points_real(&self) -> Vec<FixedPoint> {
        let (p, q) = (&self.p.exact, &self.q.exact);
        let h = p - &(&QPoly::x() * q);
        let w = self.wronskian();
        let mut out = Vec::new();
        if !h.is_zero() {
            for (iv, k) in real_roots_with_multiplicity(&h) {
                let x = iv.midpoint();
                let qx = q.eval(&x);
                let mult = rational_to_f64(&(w.eval(&x) / (&qx * &qx)));
                out.push(FixedPoint {
                    point: CirclePoint::finite(iv.to_f64()),
                    multiplier: mult,
                    multiplicity: k,
                });
            }
        }
        let (gp, gq) = self.at_infinity();
        let hg = &gp - &(&QPoly::x() * &gq);
        let k = hg.valuation();
        if k > 0 {
            let wg = &(&gp.derivative() * &gq) - &(&gp * &gq.derivative());
            let g0 = gq.coeff(0);
            let mult = rational_to_f64(&(wg.coeff(0) / (&g0 * &g0)));
            out.push(FixedPoint {
                point: CirclePoint::infinity(),
                multiplier: mult,
                multiplicity: k,
            });
        }
        out.sort_by(|a, b| a.point.cmp_angle(&b.point));
        out
    }

    /// `m ∘ f ∘ m⁻¹`.
    pub fn conjugate(&self, m: &MobiusReal) -> Result<RealRationalMap> {
        let inv = m.inverse()?;
        let f_minv = self.compose(&inv.as_map())?;
        m.as_map().compose(&f_minv)
    }

    /// Exact test of `f∘σ = σ∘f`.
    pub fn commutes_with(&self, sigma: &Symmetry) -> bool {
        match sigma {
            Symmetry::Mobius(m) => {
                let mm = m.as_map();
                let (Ok(a), Ok(b)) = (self.compose(&mm), mm.compose(self)) else {
                    return false;
                };
                &a.p.exact * &b.q.exact == &a.q.exact * &b.p.exact
            }
            Symmetry::Antipodal => {
                // f(-1/z) f(z) = -1
                let d = self.degree;
                let neg_one = QPoly::constant(-Q::one());
                let z = QPoly::x();
                let a = self.p.exact.homogeneous(d, &neg_one, &z);
                let b = self.q.exact.homogeneous(d, &neg_one, &z);
                (&(&a * &self.p.exact) + &(&b * &self.q.exact)).is_zero()
            }
        }
    }

    /// Members of a finite candidate list of real Möbius symmetries that commute with `f`.
    pub fn candidate_symmetries(&self) -> Vec<MobiusReal> {
        let q = |n: i64| Q::from_integer(n.into());
        let mut cands = vec![
            MobiusReal::new(q(-1), q(0), q(0), q(1)).unwrap(),
            MobiusReal::new(q(0), q(1), q(1), q(0)).unwrap(),
            MobiusReal::new(q(0), q(-1), q(1), q(0)).unwrap(),
        ];
        let fps: Vec<f64> = self
            .fixed_points_real()
            .iter()
            .filter_map(|fp| fp.point.value())
            .filter(|x| x.abs() > 1e-12)
            .collect();
        for a in &fps {
            for b in &fps {
                let k = a / b;
                if (k - 1.0).abs() < 1e-9 || (k + 1.0).abs() < 1e-9 {
                    continue;
                }
                let kq = rational_approx(k, 1000);
                if (rational_to_f64(&kq) - k).abs() > 1e-9 * k.abs() {
                    continue;
                }
                if let Ok(m) = MobiusReal::new(kq, q(0), q(0), q(1)) {
                    if !cands.contains(&m) {
                        cands.push(m);
                    }
                }
            }
        }
        cands
            .into_iter()
            .filter(|m| self.commutes_with(&Symmetry::Mobius(m.clone())))
            .collect()
    }

    /// Multiply every coefficient by `(1 + rel_i)`.
    pub fn perturb(&self, rel: impl Fn(usize) -> f64) -> Result<RealRationalMap> {
        let mut k = 0;
        let mut bump = |c: &Q| {
            let r = rational_from_f64(rel(k));
            k += 1;
            c * (Q::one() + r)
        };
        let p = QPoly::new(self.p.exact.coeffs().iter().map(&mut bump).collect());
        let q = QPoly::new(self.q.exact.coeffs().iter().map(&mut bump).collect());
        Self::from_polys(p, q)
    }

    /// Largest coefficient magnitude, as a double.
    pub fn coefficient_scale(&self) -> f64 {
        self.p
            .exact
            .coeffs()
            .iter()
            .chain(self.q.exact.coeffs())
            .map(|c| rational_to_f64(&c.abs()))
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for RealRationalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q.exact.degree() == 0 {
            fmt_poly(&self.p.exact, "z", f)
        } else {
            write!(f, "(")?;
            fmt_poly(&self.p.exact, "z", f)?;
            write!(f, ")/(")?;
            fmt_poly(&self.q.exact, "z", f)?;
            write!(f, ")")
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixedPoint {
    #[serde(serialize_with = "ser_point")]
    pub point: CirclePoint<f64>,
    pub multiplier: f64,
    pub multiplicity: usize,
}

fn ser_point<S: serde::Serializer>(p: &CirclePoint<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match p.value() {
        Some(x) => s.serialize_f64(x),
        None => s.serialize_str("inf"),
    }
}

/// `x ↦ (ax + b)/(cx + d)` with rational entries.
#[derive(Clone, Debug, PartialEq)]
pub struct MobiusReal {
    pub a: Q,
    pub b: Q,
    pub c: Q,
    pub d: Q,
}

impl MobiusReal {
    pub fn new(a: Q, b: Q, c: Q, d: Q) -> Result<Self> {
        let m = MobiusReal { a, b, c, d };
        if m.det().is_zero() {
            Err(Error::SingularMobius)
        } else {
            Ok(m)
        }
    }

    pub fn from_i64(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        let q = |n: i64| Q::from_integer(n.into());
        Self::new(q(a), q(b), q(c), q(d))
    }

    pub fn identity() -> Self {
        Self::from_i64(1, 0, 0, 1).unwrap()
    }

    /// `x ↦ 1/(x - r)`, which moves `r` to `∞`.
    pub fn shift_invert(r: Q) -> Self {
        Self::new(Q::zero(), Q::one(), Q::one(), -r).unwrap()
    }

    pub fn det(&self) -> Q {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn inverse(&self) -> Result<Self> {
        Self::new(self.d.clone(), -self.b.clone(), -self.c.clone(), self.a.clone())
    }

    /// `self ∘ other`.
    pub fn compose(&self, o: &MobiusReal) -> Result<Self> {
        Self::new(
            &self.a * &o.a + &self.b * &o.c,
            &self.a * &o.b + &self.b * &o.d,
            &self.c * &o.a + &self.d * &o.c,
            &self.c * &o.b + &self.d * &o.d,
        )
    }

    pub fn as_map(&self) -> RealRationalMap {
        RealRationalMap::from_polys(
            QPoly::new(vec![self.b.clone(), self.a.clone()]),
            QPoly::new(vec![self.d.clone(), self.c.clone()]),
        )
        .expect("nonsingular Möbius map has degree 1")
    }

    pub fn apply(&self, x: &CirclePoint<f64>) -> CirclePoint<f64> {
        let [a, b, c, d] = [&self.a, &self.b, &self.c, &self.d].map(rational_to_f64);
        match x.value() {
            None => CirclePoint::from_homogeneous(a, c),
            Some(x) => CirclePoint::from_homogeneous(a * x + b, c * x + d),
        }
    }
}

/// A candidate symmetry: a real Möbius map or the antipodal involution `z ↦ -1/z̄`.
#[derive(Clone, Debug, PartialEq)]
pub enum Symmetry {
    Mobius(MobiusReal),
    Antipodal,
}

/// Helper used in tests and families: `P/Q` from signed integer lists.
pub fn map_i64(p: &[i64], q: &[i64]) -> RealRationalMap {
    RealRationalMap::from_i64(p, q).expect("valid map")
}
