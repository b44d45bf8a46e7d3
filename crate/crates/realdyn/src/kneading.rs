//! Milnor–Thurston kneading invariants of the circle map cut open into an interval map.
//!
//! The circle is cut at a point `p` and read in the coordinate `u = (t - t_p) mod 1`.
//! Either `p` lies outside the image of `f` (then `f` is an interval map into a proper
//! sub-arc) or `p` is a fixed point whose other real preimages are turning points, so
//! that the lifted map stays continuous.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::chart::{angle_distance, CirclePoint};
use crate::degree::topological_degree;
use crate::entropy::{turning_points, EntropyEstimate, Method};
use crate::error::{Error, Result};
use crate::poly::fmt_poly;
use crate::realmap::{QPoly, RealRationalMap};
use crate::scalar::{rat, rational_to_f64};
use crate::sturm::{smallest_root_in, RootInterval};

type Point = CirclePoint<f64>;

pub const DEFAULT_MAX_ITER: usize = 100_000;
pub const MAX_PERIOD: usize = 1000;
/// Total symbols over all kneading sequences; exact root isolation beyond this is too slow.
pub const MAX_KNEADING_LENGTH: usize = 400;
const RECURRENCE_TOL: f64 = 1e-10;
const LANDING_TOL: f64 = 1e-12;
const SNAP_TOL: f64 = 1e-12;
const CYCLE_SNAP_TOL: f64 = 1e-9;
const MEASURE_ZONE: f64 = 1e-4;

/// A signed lap address `±I_n`. Laps are numbered from 0 in the cut coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Symbol {
    pub sign: i8,
    pub lap: usize,
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.sign < 0 { '-' } else { '+' };
        write!(f, "{s}I{}", self.lap + 1)
    }
}

/// `preperiod` followed by `period` repeated forever.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EventuallyPeriodicSeq {
    pub preperiod: Vec<Symbol>,
    pub period: Vec<Symbol>,
}

impl EventuallyPeriodicSeq {
    /// Primitive period and shortest preperiod.
    pub fn new(mut preperiod: Vec<Symbol>, mut period: Vec<Symbol>) -> Self {
        assert!(!period.is_empty());
        let n = period.len();
        if let Some(q) = (1..=n).find(|q| n % q == 0 && (0..n).all(|i| period[i] == period[i % q])) {
            period.truncate(q);
        }
        while let Some(last) = preperiod.last() {
            if *last != *period.last().unwrap() {
                break;
            }
            preperiod.pop();
            period.rotate_right(1);
        }
        EventuallyPeriodicSeq { preperiod, period }
    }

    pub fn get(&self, k: usize) -> Symbol {
        if k < self.preperiod.len() {
            self.preperiod[k]
        } else {
            self.period[(k - self.preperiod.len()) % self.period.len()]
        }
    }

    /// Coefficients of lap `j` as an eventually periodic integer sequence.
    pub fn lap_series(&self, j: usize) -> RationalPowerSeries {
        let coef = |s: &Symbol| if s.lap == j { s.sign as i64 } else { 0 };
        let pre: Vec<i64> = self.preperiod.iter().map(coef).collect();
        let per: Vec<i64> = self.period.iter().map(coef).collect();
        RationalPowerSeries::eventually_periodic(&pre, &per)
    }
}

impl fmt::Display for EventuallyPeriodicSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.preperiod {
            write!(f, "{s} ")?;
        }
        write!(f, "(")?;
        for (i, s) in self.period.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, ")^inf")
    }
}

/// A power series with integer coefficients given as `numerator / denominator`,
/// where the denominator divides a product of cyclotomic factors and has constant term 1.
#[derive(Clone, Debug)]
pub struct RationalPowerSeries {
    numerator: QPoly,
    denominator: QPoly,
}

impl RationalPowerSeries {
    pub fn new(numerator: QPoly, denominator: QPoly) -> Self {
        assert!(!denominator.coeff(0).is_zero(), "not a power series");
        let g = numerator.gcd(&denominator);
        let (mut n, mut d) = if g.degree() > 0 {
            (numerator.div_exact(&g), denominator.div_exact(&g))
        } else {
            (numerator, denominator)
        };
        let c = d.coeff(0);
        if !c.is_one() {
            let inv = BigRational::one() / c;
            n = n.scale(&inv);
            d = d.scale(&inv);
        }
        RationalPowerSeries {
            numerator: n,
            denominator: d,
        }
    }

    pub fn polynomial(p: QPoly) -> Self {
        RationalPowerSeries {
            numerator: p,
            denominator: QPoly::one(),
        }
    }

    pub fn zero() -> Self {
        Self::polynomial(QPoly::zero())
    }

    pub fn one() -> Self {
        Self::polynomial(QPoly::one())
    }

    /// `Σ pre_k t^k + t^m Σ per_i t^i / (1 - t^P)`, with `m = pre.len()`, `P = per.len()`.
    pub fn eventually_periodic(pre: &[i64], per: &[i64]) -> Self {
        let m = pre.len();
        let cycle = &QPoly::one() - &QPoly::monomial(rat(1, 1), per.len());
        let a = QPoly::from_i64(pre);
        let mut b = vec![0i64; m];
        b.extend_from_slice(per);
        let b = QPoly::from_i64(&b);
        Self::new(&(&a * &cycle) + &b, cycle)
    }

    pub fn numerator(&self) -> &QPoly {
        &self.numerator
    }

    pub fn denominator(&self) -> &QPoly {
        &self.denominator
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    /// First `n` coefficients of the expansion at `t = 0`.
    pub fn coefficients(&self, n: usize) -> Vec<BigRational> {
        let d = self.denominator.coeffs();
        let mut out: Vec<BigRational> = Vec::with_capacity(n);
        for k in 0..n {
            let mut c = self.numerator.coeff(k);
            for (i, di) in d.iter().enumerate().skip(1).take(k) {
                c -= di * &out[k - i];
            }
            out.push(c);
        }
        out
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.numerator.to_f64().eval(&t);
        let d = self.denominator.to_f64().eval(&t);
        n / d
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(
            &(&self.numerator * &o.denominator) + &(&o.numerator * &self.denominator),
            &self.denominator * &o.denominator,
        )
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::new(
            &(&self.numerator * &o.denominator) - &(&o.numerator * &self.denominator),
            &self.denominator * &o.denominator,
        )
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::new(
            &self.numerator * &o.numerator,
            &self.denominator * &o.denominator,
        )
    }

    pub fn scale(&self, c: i64) -> Self {
        Self::new(self.numerator.scale(&rat(c, 1)), self.denominator.clone())
    }
}

impl PartialEq for RationalPowerSeries {
    fn eq(&self, o: &Self) -> bool {
        &self.numerator * &o.denominator == &o.numerator * &self.denominator
    }
}

impl fmt::Display for RationalPowerSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denominator.degree() == 0 {
            return fmt_poly(&self.numerator, "t", f);
        }
        write!(f, "(")?;
        fmt_poly(&self.numerator, "t", f)?;
        write!(f, ")/(")?;
        fmt_poly(&self.denominator, "t", f)?;
        write!(f, ")")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CutKind {
    /// The cut lies in the arc missing from `f(R ∪ {∞})`.
    MissingArc,
    /// The cut is a fixed point whose other real preimages are turning points.
    FixedPoint,
}

/// The interval obtained by cutting the circle, with its laps.
#[derive(Clone, Debug)]
pub struct KneadingDomain {
    pub cut: Point,
    pub kind: CutKind,
    /// Turning points other than the cut, in increasing cut coordinate.
    pub turning: Vec<Point>,
    boundaries: Vec<f64>,
    /// Shape `ε_n = ±1` of each lap.
    pub shapes: Vec<i8>,
}

impl KneadingDomain {
    /// Finds a cut point. Fails for surjective maps with turning points when no
    /// fixed point has all its other real preimages at turning points.
    pub fn for_map(f: &RealRationalMap) -> Result<Self> {
        let turning = turning_points(f);
        if turning.is_empty() {
            return Err(Error::PreconditionFailed("no turning points".into()));
        }
        let (cut, kind) = match missing_arc_cut(f, &turning) {
            Some(p) => (p, CutKind::MissingArc),
            None => (
                fixed_point_cut(f, &turning).ok_or(Error::UnsupportedSurjectiveNonCover)?,
                CutKind::FixedPoint,
            ),
        };
        let tp = cut.angle();
        let mut interior: Vec<(f64, Point)> = turning
            .iter()
            .map(|c| ((c.angle() - tp).rem_euclid(1.0), *c))
            .filter(|(u, _)| u.min(1.0 - u) > SNAP_TOL)
            .collect();
        interior.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let boundaries: Vec<f64> = interior.iter().map(|(u, _)| *u).collect();
        let mut edges = vec![0.0];
        edges.extend_from_slice(&boundaries);
        edges.push(1.0);
        let fm = f.float_map();
        let shapes = edges
            .windows(2)
            .map(|w| {
                let mid = Point::from_angle(tp + 0.5 * (w[0] + w[1]));
                if fm.derivative_sign(mid.raw()) < 0.0 {
                    -1
                } else {
                    1
                }
            })
            .collect();
        Ok(KneadingDomain {
            cut,
            kind,
            turning: interior.into_iter().map(|(_, c)| c).collect(),
            boundaries,
            shapes,
        })
    }

    pub fn laps(&self) -> usize {
        self.shapes.len()
    }

    pub fn coordinate(&self, x: &Point) -> f64 {
        (x.angle() - self.cut.angle()).rem_euclid(1.0)
    }

    /// Lap of `u`, or of the side `side` of `u` when `u` sits on a lap boundary.
    pub fn lap_of(&self, u: f64, side: i8, snap: f64) -> usize {
        if u.min(1.0 - u) <= snap {
            return if side > 0 { 0 } else { self.laps() - 1 };
        }
        for (i, b) in self.boundaries.iter().enumerate() {
            if (u - b).abs() <= snap {
                return if side > 0 { i + 1 } else { i };
            }
        }
        self.boundaries.partition_point(|b| *b < u)
    }

    /// Side of the cut on which `y` sits, when it is close enough to tell.
    fn side_of_cut(&self, y: &Point, u: f64) -> Option<i8> {
        let dist = u.min(1.0 - u);
        if dist >= MEASURE_ZONE {
            return None;
        }
        if self.cut.is_infinite() {
            // the sign of x stays exact however large x gets
            return y.value().map(|x| if x < 0.0 { 1 } else { -1 });
        }
        (dist > SNAP_TOL).then_some(if u < 0.5 { 1 } else { -1 })
    }

    fn nearest_boundary(&self, u: f64) -> Option<(f64, f64)> {
        self.boundaries
            .iter()
            .map(|b| (u - b, (u - b).abs()))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
    }
}

fn missing_arc_cut(f: &RealRationalMap, turning: &[Point]) -> Option<Point> {
    if topological_degree(f).ok()? != 0 {
        return None;
    }
    let fm = f.float_map();
    let mut values: Vec<f64> = turning.iter().map(|c| fm.eval(c).angle()).collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let n = values.len();
    for i in 0..n {
        let a = values[i];
        let gap = if i + 1 < n { values[i + 1] - a } else { values[0] + 1.0 - a };
        if gap < 1e-9 {
            continue;
        }
        for frac in [0.5, 1.0 / 3.0, 2.0 / 3.0, 0.25, 0.75] {
            let p = Point::from_angle(a + frac * gap);
            if !fm.preimages(&p).is_empty() {
                break;
            }
            if turning.iter().all(|c| c.distance(&p) > 1e-6) {
                return Some(p);
            }
        }
    }
    None
}

fn fixed_point_cut(f: &RealRationalMap, turning: &[Point]) -> Option<Point> {
    let mut fixed: Vec<Point> = f.fixed_points_real().into_iter().map(|fp| fp.point).collect();
    fixed.sort_by_key(|p| !p.is_infinite());
    let fm = f.float_map();
    fixed.into_iter().find(|p| {
        fm.preimages(p).iter().all(|(x, _)| {
            x.distance(p) < 1e-9 || turning.iter().any(|c| c.distance(x) < 1e-9)
        })
    })
}

/// Signed itinerary `θ(c^±)` of `c` pushed infinitesimally to `side`.
///
/// The float orbit is followed until it recurs within `1e-10` with period at most
/// 1000 on an attracting cycle (or lands exactly on a repelling one); from there the
/// itinerary is continued symbolically along the cycle.
pub fn kneading_coordinates(
    f: &RealRationalMap,
    domain: &KneadingDomain,
    c: &Point,
    side: i8,
    max_iter: usize,
) -> Result<EventuallyPeriodicSeq> {
    let fm = f.float_map();
    let tag = domain
        .turning
        .iter()
        .position(|t| t.distance(c) < SNAP_TOL)
        .unwrap_or(0);
    let mut symbols: Vec<Symbol> = Vec::new();
    let mut orbit: Vec<Point> = Vec::new();
    // (side, running sign) before each step
    let mut states: Vec<(i8, i8)> = Vec::new();
    let mut window: BTreeSet<(u64, usize)> = BTreeSet::new();
    let mut sigma = side;
    let mut sign: i8 = 1;
    let mut y = *c;
    let mut cycle: Option<(usize, usize)> = None;
    for k in 0..=max_iter {
        if let Some((j, p)) = find_recurrence(&fm, &orbit, &window, &y, k) {
            cycle = Some((j, p));
            break;
        }
        if k == max_iter {
            break;
        }
        let u = domain.coordinate(&y);
        if let Some(side) = domain.side_of_cut(&y, u) {
            sigma = side;
        } else if let Some((du, dist)) = domain.nearest_boundary(u) {
            if dist > SNAP_TOL && dist < MEASURE_ZONE {
                sigma = if du > 0.0 { 1 } else { -1 };
            }
        }
        orbit.push(y);
        states.push((sigma, sign));
        window.insert((y.angle().to_bits(), k));
        if k >= MAX_PERIOD {
            let old = orbit[k - MAX_PERIOD].angle().to_bits();
            window.remove(&(old, k - MAX_PERIOD));
        }
        let lap = domain.lap_of(u, sigma, SNAP_TOL);
        symbols.push(Symbol { sign, lap });
        let e = domain.shapes[lap];
        sigma *= e;
        sign *= e;
        y = fm.eval(&y);
    }
    let (j, p) = cycle.ok_or(Error::NotEventuallyAttracted(tag))?;
    // symbolic continuation along the cycle y_j, ..., y_{j+p-1}
    symbols.truncate(j);
    let (mut sigma, mut sign) = states[j];
    let mut seen: HashMap<(usize, i8, i8), usize> = HashMap::new();
    let mut phase = 0;
    loop {
        let key = (phase, sigma, sign);
        if let Some(&start) = seen.get(&key) {
            let period = symbols.split_off(start);
            return Ok(EventuallyPeriodicSeq::new(symbols, period));
        }
        seen.insert(key, symbols.len());
        let u = domain.coordinate(&orbit[j + phase]);
        let lap = domain.lap_of(u, sigma, CYCLE_SNAP_TOL);
        symbols.push(Symbol { sign, lap });
        let e = domain.shapes[lap];
        sigma *= e;
        sign *= e;
        phase = (phase + 1) % p;
    }
}

/// Looks for an earlier orbit point matching `y`; returns `(index, period)`.
fn find_recurrence(
    fm: &crate::realmap::FloatMap<f64>,
    orbit: &[Point],
    window: &BTreeSet<(u64, usize)>,
    y: &Point,
    k: usize,
) -> Option<(usize, usize)> {
    let t = y.angle();
    let mut best: Option<usize> = None;
    let mut scan = |lo: f64, hi: f64| {
        let lo = (lo.max(0.0).to_bits(), 0);
        let hi = (hi.min(1.0).to_bits(), usize::MAX);
        for &(_, j) in window.range(lo..=hi) {
            if angle_distance(orbit[j].angle(), t) < RECURRENCE_TOL && best.map_or(true, |b| j > b) {
                best = Some(j);
            }
        }
    };
    scan(t - RECURRENCE_TOL, t + RECURRENCE_TOL);
    if t < RECURRENCE_TOL {
        scan(1.0 - RECURRENCE_TOL, 1.0);
    }
    if t > 1.0 - RECURRENCE_TOL {
        scan(0.0, RECURRENCE_TOL);
    }
    let j = best?;
    let p = k - j;
    let mut mult = 1.0;
    for x in &orbit[j..k] {
        mult *= fm.chart_derivative(x.raw());
    }
    if mult.abs() <= 1.0 + 1e-8 {
        return Some((j, p));
    }
    // a repelling cycle only counts when the orbit lands on it exactly
    let next = fm.eval(y);
    let dist = angle_distance(orbit[j].angle(), t);
    let target = if j + 1 < k { orbit[j + 1] } else { *y };
    // rounding errors grow by the multiplier on each lap around the cycle
    if dist < LANDING_TOL && next.distance(&target) < 2.0 * LANDING_TOL * mult.abs() {
        Some((j, p))
    } else {
        None
    }
}

/// Exact kneading data of a map.
#[derive(Clone, Debug)]
pub struct KneadingInvariant {
    /// The kneading determinant `D(t)`.
    pub determinant: RationalPowerSeries,
    /// Bracket around the smallest root of `D` in `(0, 1)`.
    pub smallest_root: Option<RootInterval>,
    pub entropy: f64,
    pub shapes: Vec<i8>,
    /// `θ(c^+)` for each interior turning point, in lap order.
    pub coordinates: Vec<EventuallyPeriodicSeq>,
    pub cut: Option<Point>,
    /// `D_n` for every lap `n`, before normalization.
    pub minors: Vec<RationalPowerSeries>,
}

const ROOT_WIDTH_DEN: i64 = 10_000_000_000_000; // 1e-13

impl KneadingInvariant {
    fn from_determinant(
        determinant: RationalPowerSeries,
        shapes: Vec<i8>,
        coordinates: Vec<EventuallyPeriodicSeq>,
        cut: Option<Point>,
        minors: Vec<RationalPowerSeries>,
    ) -> Self {
        let num = determinant.numerator();
        let smallest_root = if num.is_zero() {
            None
        } else {
            smallest_root_in(num, &rat(0, 1), &rat(1, 1), &rat(1, ROOT_WIDTH_DEN))
        };
        let entropy = match &smallest_root {
            Some(iv) => -iv.to_f64().ln(),
            None => 0.0,
        };
        KneadingInvariant {
            determinant,
            smallest_root,
            entropy,
            shapes,
            coordinates,
            cut,
            minors,
        }
    }

    /// `[-ln hi, -ln lo]`, or `[0, 0]` without a root.
    pub fn entropy_bracket(&self) -> (f64, f64) {
        match &self.smallest_root {
            Some(iv) => (-rational_to_f64(&iv.hi).ln(), -rational_to_f64(&iv.lo).ln()),
            None => (0.0, 0.0),
        }
    }

    /// Primitive integer polynomial with `exp(entropy)` as a root: the reversed numerator of `D`.
    pub fn growth_polynomial(&self) -> QPoly {
        let num = self.determinant.numerator();
        let n = num.degree();
        let rev = num.reversed(n);
        let v = rev.valuation();
        let cs: Vec<BigRational> = rev.coeffs()[v..].to_vec();
        QPoly::from_integers(&QPoly::new(cs).primitive_integer())
    }

    /// `exp(entropy)` as an algebraic number, or `None` at zero entropy.
    pub fn growth_rate(&self) -> Option<AlgebraicNumber> {
        let iv = self.smallest_root.as_ref()?;
        let lo = BigRational::one() / &iv.hi;
        let hi = if iv.lo.is_zero() {
            return None;
        } else {
            BigRational::one() / &iv.lo
        };
        Some(AlgebraicNumber {
            poly: self.growth_polynomial(),
            lo,
            hi,
        })
    }

    /// Checks `(-1)^{n+1} D_n (1 - ε_m t) = (-1)^{m+1} D_m (1 - ε_n t)` for all pairs.
    pub fn minors_consistent(&self) -> bool {
        let l = self.minors.len();
        let lin = |e: i8| {
            RationalPowerSeries::polynomial(QPoly::from_i64(&[1, -(e as i64)]))
        };
        let signed = |n: usize| {
            if n % 2 == 0 {
                self.minors[n].clone()
            } else {
                self.minors[n].scale(-1)
            }
        };
        (1..l).all(|n| signed(n).mul(&lin(self.shapes[0])) == signed(0).mul(&lin(self.shapes[n])))
    }
}

/// A real algebraic number: the unique root of `poly` in `[lo, hi]`.
#[derive(Clone, Debug)]
pub struct AlgebraicNumber {
    pub poly: QPoly,
    pub lo: BigRational,
    pub hi: BigRational,
}

impl AlgebraicNumber {
    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&((&self.lo + &self.hi) / rat(2, 1)))
    }

    /// Exact equality: the common factor of both polynomials has a root in the
    /// intersection of the two brackets.
    pub fn same_as(&self, o: &AlgebraicNumber) -> bool {
        let lo = if self.lo > o.lo { &self.lo } else { &o.lo };
        let hi = if self.hi < o.hi { &self.hi } else { &o.hi };
        if lo > hi {
            return false;
        }
        let g = self.poly.gcd(&o.poly);
        if g.degree() == 0 {
            return false;
        }
        if g.sign_at(lo) == 0 || g.sign_at(hi) == 0 {
            return true;
        }
        crate::sturm::SturmChain::new(&g.square_free_part()).count(lo, hi) > 0
    }
}

/// Kneading determinant with the default iteration cap.
pub fn kneading_determinant(f: &RealRationalMap) -> Result<KneadingInvariant> {
    kneading_determinant_with(f, DEFAULT_MAX_ITER)
}

pub fn kneading_determinant_with(f: &RealRationalMap, max_iter: usize) -> Result<KneadingInvariant> {
    if f.degree() < 2 {
        return Err(Error::DegreeTooSmall(f.degree()));
    }
    if turning_points(f).is_empty() {
        // a covering of degree s: D = 1 for homeomorphisms, 1 - |s| t otherwise
        let s = topological_degree(f)?.unsigned_abs() as i64;
        let d = if s <= 1 {
            QPoly::one()
        } else {
            QPoly::from_i64(&[1, -s])
        };
        let det = RationalPowerSeries::polynomial(d);
        return Ok(KneadingInvariant::from_determinant(
            det.clone(),
            vec![1],
            Vec::new(),
            None,
            vec![det],
        ));
    }
    let domain = KneadingDomain::for_map(f)?;
    let l = domain.laps();
    if l == 1 {
        // every turning point sits at the cut: the lifted map is monotone
        let det = RationalPowerSeries::one();
        return Ok(KneadingInvariant::from_determinant(
            det.clone(),
            domain.shapes.clone(),
            Vec::new(),
            Some(domain.cut),
            vec![det],
        ));
    }
    let mut coordinates = Vec::new();
    let mut rows: Vec<Vec<RationalPowerSeries>> = Vec::new();
    let mut length = 0;
    for c in &domain.turning {
        let plus = kneading_coordinates(f, &domain, c, 1, max_iter)?;
        let minus = kneading_coordinates(f, &domain, c, -1, max_iter)?;
        length += [&plus, &minus]
            .iter()
            .map(|s| s.preperiod.len() + s.period.len())
            .sum::<usize>();
        if length > MAX_KNEADING_LENGTH {
            return Err(Error::KneadingTooLong {
                length,
                limit: MAX_KNEADING_LENGTH,
            });
        }
        rows.push(
            (0..l)
                .map(|j| plus.lap_series(j).sub(&minus.lap_series(j)))
                .collect(),
        );
        coordinates.push(plus);
    }
    // clear each row to a common denominator
    let mut common = QPoly::one();
    let mut matrix: Vec<Vec<QPoly>> = Vec::new();
    for row in &rows {
        let mut den = QPoly::one();
        for e in row {
            let g = den.gcd(e.denominator());
            den = &den * &e.denominator().div_exact(&g);
        }
        matrix.push(
            row.iter()
                .map(|e| e.numerator() * &den.div_exact(e.denominator()))
                .collect(),
        );
        common = &common * &den;
    }
    let mut memo: HashMap<u64, QPoly> = HashMap::new();
    let full: u64 = (1u64 << l) - 1;
    let minors: Vec<RationalPowerSeries> = (0..l)
        .map(|n| {
            let det = laplace(&matrix, full & !(1u64 << n), &mut memo);
            RationalPowerSeries::new(det, common.clone())
        })
        .collect();
    let d0 = &minors[0];
    let lin0 = QPoly::from_i64(&[1, -(domain.shapes[0] as i64)]);
    let determinant = RationalPowerSeries::new(
        d0.numerator().clone(),
        d0.denominator() * &lin0,
    );
    let inv = KneadingInvariant::from_determinant(
        determinant,
        domain.shapes.clone(),
        coordinates,
        Some(domain.cut),
        minors,
    );
    if !inv.minors_consistent() {
        return Err(Error::InconsistentMinors);
    }
    let c0 = inv.determinant.numerator().coeff(0);
    if c0.abs() != BigRational::one() {
        return Err(Error::InternalConsistency(format!(
            "kneading determinant has D(0) = {c0}"
        )));
    }
    Ok(inv)
}

/// Determinant of the rows `[l - |cols|, l)` restricted to the columns in `cols`.
fn laplace(m: &[Vec<QPoly>], cols: u64, memo: &mut HashMap<u64, QPoly>) -> QPoly {
    let k = cols.count_ones() as usize;
    if k == 0 {
        return QPoly::one();
    }
    if let Some(v) = memo.get(&cols) {
        return v.clone();
    }
    let row = &m[m.len() - k];
    let mut acc = QPoly::zero();
    let mut pos = 0;
    for j in 0..64 {
        if cols & (1u64 << j) == 0 {
            continue;
        }
        if !row[j].is_zero() {
            let sub = laplace(m, cols & !(1u64 << j), memo);
            let term = &row[j] * &sub;
            acc = if pos % 2 == 0 { &acc + &term } else { &acc - &term };
        }
        pos += 1;
    }
    memo.insert(cols, acc.clone());
    acc
}

/// Exact entropy from the kneading determinant; `lower = value = upper`, with the
/// certified bracket available from [`KneadingInvariant::entropy_bracket`].
pub fn algebraic_entropy(f: &RealRationalMap) -> Result<EntropyEstimate> {
    let inv = kneading_determinant(f)?;
    Ok(estimate_from(&inv))
}

pub fn estimate_from(inv: &KneadingInvariant) -> EntropyEstimate {
    let depth = inv
        .coordinates
        .iter()
        .map(|c| c.preperiod.len() + c.period.len())
        .max()
        .unwrap_or(0);
    EntropyEstimate {
        value: inv.entropy,
        lower: inv.entropy,
        upper: inv.entropy,
        depth,
        method: Method::Kneading,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::realmap::map_i64;

    fn check(p: &[i64], q: &[i64], h: f64) -> KneadingInvariant {
        let f = map_i64(p, q);
        let inv = kneading_determinant(&f).unwrap();
        assert!((inv.entropy - h).abs() < 1e-11, "{} vs {h} for D = {}", inv.entropy, inv.determinant);
        let (lo, hi) = inv.entropy_bracket();
        assert!(hi - lo < 1e-11 && lo <= h + 1e-12 && h <= hi + 1e-12);
        assert!(inv.minors_consistent());
        inv
    }

    #[test]
    fn quadratic_chebyshev_has_log2() {
        let inv = check(&[-2, 0, 1], &[1], 2f64.ln());
        let iv = inv.smallest_root.unwrap();
        assert!((iv.to_f64() - 0.5).abs() < 1e-13);
    }

    #[test]
    fn cubic_chebyshev_has_log3() {
        let inv = check(&[0, -3, 0, 1], &[1], 3f64.ln());
        assert_eq!(inv.cut.unwrap().is_infinite(), true);
        // exp(h) = 3 is a root of the growth polynomial
        let g = inv.growth_polynomial().to_f64();
        assert!(g.eval(&3.0).abs() < 1e-8);
    }

    #[test]
    fn quadratic_dichotomy() {
        check(&[1, 0, 1], &[1], 0.0);
        check(&[-3, 0, 1], &[1], 2f64.ln());
        check(&[-1, 0, 1], &[1], 0.0);
    }

    #[test]
    fn monotone_conventions() {
        let inv = kneading_determinant(&map_i64(&[0, 0, 0, 1], &[1])).unwrap();
        assert_eq!(inv.determinant, RationalPowerSeries::one());
        assert_eq!(inv.entropy, 0.0);
        let inv = kneading_determinant(&map_i64(&[-1, 0, 1], &[0, 1])).unwrap();
        assert!((inv.entropy - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn itinerary_of_critical_point_of_z2_minus_2() {
        let f = map_i64(&[-2, 0, 1], &[1]);
        let dom = KneadingDomain::for_map(&f).unwrap();
        let zero = dom
            .turning
            .iter()
            .find(|c| !c.is_infinite())
            .copied()
            .unwrap();
        let seq = kneading_coordinates(&f, &dom, &zero, 1, DEFAULT_MAX_ITER).unwrap();
        assert!(seq.preperiod.len() <= 2);
        assert_eq!(seq.period.len(), 1);
    }

    #[test]
    fn basilica_orbit_converges() {
        // z^2 - 1: superattracting 2-cycle 0 -> -1 -> 0
        let f = map_i64(&[-1, 0, 1], &[1]);
        let dom = KneadingDomain::for_map(&f).unwrap();
        let zero = *dom.turning.iter().find(|c| !c.is_infinite()).unwrap();
        let seq = kneading_coordinates(&f, &dom, &zero, 1, 1000).unwrap();
        assert_eq!(seq.preperiod.len() + seq.period.len() <= 5, true);
    }

    #[test]
    fn series_expansion() {
        // 1 + t + t^2 + ... = 1/(1-t)
        let s = RationalPowerSeries::eventually_periodic(&[], &[1]);
        assert_eq!(s.coefficients(4), vec![rat(1, 1); 4]);
        assert_eq!(s.denominator(), &QPoly::from_i64(&[1, -1]));
        // 2, then (1, -1) repeated
        let s = RationalPowerSeries::eventually_periodic(&[2], &[1, -1]);
        let c: Vec<BigRational> = s.coefficients(5);
        assert_eq!(c, vec![rat(2, 1), rat(1, 1), rat(-1, 1), rat(1, 1), rat(-1, 1)]);
        let seq = EventuallyPeriodicSeq::new(
            vec![Symbol { sign: 1, lap: 0 }, Symbol { sign: 1, lap: 1 }],
            vec![Symbol { sign: 1, lap: 1 }, Symbol { sign: 1, lap: 1 }],
        );
        assert_eq!(seq.preperiod.len(), 1);
        assert_eq!(seq.period.len(), 1);
    }

    #[test]
    fn algebraic_numbers_compare_exactly() {
        let a = AlgebraicNumber {
            poly: QPoly::from_i64(&[-2, 0, 1]),
            lo: rat(1, 1),
            hi: rat(3, 2),
        };
        let b = AlgebraicNumber {
            poly: QPoly::from_i64(&[-4, 0, 2]),
            lo: rat(141, 100),
            hi: rat(142, 100),
        };
        let c = AlgebraicNumber {
            poly: QPoly::from_i64(&[-3, 0, 1]),
            lo: rat(1, 1),
            hi: rat(2, 1),
        };
        assert!(a.same_as(&b));
        assert!(!a.same_as(&c));
    }

    #[test]
    fn chaotic_orbit_is_reported() {
        // a quartic with a chaotic turning orbit: z^2 - 1.8
        let f = RealRationalMap::from_polys(
            QPoly::new(vec![rat(-9, 5), rat(0, 1), rat(1, 1)]),
            QPoly::one(),
        )
        .unwrap();
        assert!(matches!(
            kneading_determinant_with(&f, 5000),
            Err(Error::NotEventuallyAttracted(_))
        ));
    }

    #[test]
    fn orbits_sinking_into_the_cut() {
        // ∞ is the cut and attracts a turning orbit; laps grow linearly
        check(&[5, 2, 3, 4], &[2, 2, 1], 0.0);
        // same with ∞ reversing orientation, the orbit overflowing to ∞ in five steps
        check(&[4, 3, -3, -4, 1, -5], &[1], 0.0);
    }

    #[test]
    fn long_itineraries_are_refused() {
        let f = map_i64(&[-5], &[5, 5, -5, -2, 1]);
        assert!(matches!(
            kneading_determinant(&f),
            Err(Error::KneadingTooLong { .. })
        ));
    }
}
