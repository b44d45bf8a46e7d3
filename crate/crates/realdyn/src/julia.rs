//! The real slice of the Julia set: sampling by backward iteration, and the shape of
//! `J(f)` for maps of maximal real entropy.

use serde::Serialize;

use crate::chart::{dedup_sorted, CirclePoint};
use crate::degree::topological_degree;
use crate::entropy::{lap_entropy_within_budget, PreimageTree, DEDUP_TOL, POINT_BUDGET};
use crate::error::{Error, Result};
use crate::realmap::{FixedPoint, RealRationalMap};

type Point = CirclePoint<f64>;

/// Largest depth used by the entropy gate.
pub const GATE_DEPTH: usize = 12;
/// Probes of `I` used to compare `f^{-1}(I)` with `I`.
pub const PROBES: usize = 1000;
pub const HAUSDORFF_TOL: f64 = 1e-6;
pub const GAP_TOL: f64 = 1e-4;
const SAMPLE_BUDGET: usize = 200_000;
const ORBIT_STEPS: usize = 32;

/// Backward orbit of a real repelling point; `levels[k]` solves `f^k(x) = seed`.
#[derive(Clone, Debug)]
pub struct RealJuliaSample {
    /// All levels together, sorted by angle.
    pub points: Vec<Point>,
    pub depth: usize,
    pub seed: Point,
    pub seed_multiplier: f64,
    pub levels: Vec<Vec<Point>>,
}

impl RealJuliaSample {
    /// Largest distance from `f(x)` to the previous level, over `x` in levels `1..`.
    pub fn backward_defect(&self, f: &RealRationalMap) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 1..self.levels.len() {
            let mut prev = self.levels[k - 1].clone();
            prev.sort_by(|a, b| a.cmp_angle(b));
            for x in &self.levels[k] {
                worst = worst.max(nearest_distance(&prev, &f.eval(x)));
            }
        }
        worst
    }

    /// Widest gap between consecutive sample points, as an arc `(from, to)` and its length.
    pub fn widest_gap(&self) -> Option<(Point, Point, f64)> {
        widest_gap(&self.points)
    }
}

/// Distance from `y` to the nearest point of `sorted` (sorted by angle, nonempty).
fn nearest_distance(sorted: &[Point], y: &Point) -> f64 {
    let i = sorted.partition_point(|p| p.angle() < y.angle());
    let n = sorted.len();
    [i % n, (i + n - 1) % n]
        .iter()
        .map(|&j| sorted[j].distance(y))
        .fold(f64::INFINITY, f64::min)
}

fn arc_length(from: &Point, to: &Point) -> f64 {
    let d = to.angle() - from.angle();
    d - d.floor()
}

fn widest_gap(sorted: &[Point]) -> Option<(Point, Point, f64)> {
    if sorted.is_empty() {
        return None;
    }
    let n = sorted.len();
    (0..n)
        .map(|i| {
            let (a, b) = (sorted[i], sorted[(i + 1) % n]);
            let len = if n == 1 { 1.0 } else { arc_length(&a, &b) };
            (a, b, len)
        })
        .max_by(|x, y| x.2.total_cmp(&y.2))
}

/// `true` when `x` lies on the arc running counterclockwise from `from` to `to`.
fn on_arc(x: &Point, from: &Point, to: &Point) -> bool {
    arc_length(from, x) <= arc_length(from, to)
}

/// Periodic points of period one and two, multipliers of the matching return map.
struct Cycles {
    fixed: Vec<FixedPoint>,
    period_two: Vec<FixedPoint>,
    second_iterate: RealRationalMap,
}

fn cycles(f: &RealRationalMap) -> Result<Cycles> {
    let fixed = f.fixed_points_real();
    let f2 = f.iterate(2)?;
    let period_two = f2
        .fixed_points_real()
        .into_iter()
        .filter(|q| fixed.iter().all(|p| p.point.distance(&q.point) > 1e-9))
        .collect();
    Ok(Cycles {
        fixed,
        period_two,
        second_iterate: f2,
    })
}

/// The real repelling point of period at most two with the largest per-step expansion.
pub fn repelling_seed(f: &RealRationalMap) -> Result<(Point, f64)> {
    seed_among(&cycles(f)?)
}

fn seed_among(c: &Cycles) -> Result<(Point, f64)> {
    let per_step = c
        .fixed
        .iter()
        .map(|p| (p.point, p.multiplier, p.multiplier.abs()))
        .chain(
            c.period_two
                .iter()
                .map(|p| (p.point, p.multiplier, p.multiplier.abs().sqrt())),
        );
    per_step
        .filter(|(_, _, r)| *r > 1.0 + 1e-9)
        .max_by(|a, b| a.2.total_cmp(&b.2))
        .map(|(p, m, _)| (p, m))
        .ok_or(Error::NoRealRepeller)
}

/// Real backward orbit of the seed, to `depth` levels or until the point budget runs out.
pub fn sample_real_julia(f: &RealRationalMap, depth: usize) -> Result<RealJuliaSample> {
    if f.degree() < 2 {
        return Err(Error::DegreeTooSmall(f.degree()));
    }
    sample_with(f, depth, &cycles(f)?)
}

fn sample_with(f: &RealRationalMap, depth: usize, c: &Cycles) -> Result<RealJuliaSample> {
    let (seed, seed_multiplier) = seed_among(c)?;
    let mut tree = PreimageTree::new(seed);
    let mut total = 1;
    let mut reached = 0;
    for _ in 0..depth {
        let n = tree.grow(f);
        if total + n > SAMPLE_BUDGET {
            tree.levels.pop();
            break;
        }
        total += n;
        reached += 1;
    }
    let levels: Vec<Vec<Point>> = tree
        .levels
        .iter()
        .map(|l| l.iter().map(|(p, _)| *p).collect())
        .collect();
    let mut points: Vec<Point> = levels.iter().flatten().copied().collect();
    dedup_sorted(&mut points, DEDUP_TOL);
    Ok(RealJuliaSample {
        points,
        depth: reached,
        seed,
        seed_multiplier,
        levels,
    })
}

/// Maximal real entropy `log d`, tested on the lap estimate at depth 12 (or the deepest
/// level the point budget allows).
pub fn is_maximal_entropy(f: &RealRationalMap, tol: f64) -> bool {
    let d = f.degree();
    if d < 2 {
        return false;
    }
    match lap_entropy_within_budget(f, GATE_DEPTH, POINT_BUDGET) {
        Ok(e) => e.value >= (d as f64).ln() - tol,
        Err(_) => false,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeKind {
    Cantor,
    Interval,
    Circle,
    Mixed,
    Unknown,
}

#[derive(Clone, Debug, PartialEq)]
pub struct JuliaShape {
    pub kind: ShapeKind,
    /// The arc `I` from its first to its second endpoint, counterclockwise.
    pub interval: Option<(Point, Point)>,
    pub evidence: String,
}

/// A real fixed point of `g` with an attracting direction along the circle, and the side
/// (+1 counterclockwise, −1 clockwise, 0 both) from which it attracts.
struct Sink {
    point: Point,
    multiplier: f64,
    side: i8,
}

const SIDE_STEP: f64 = 1e-4;

fn sinks(g: &RealRationalMap, fixed: &[FixedPoint]) -> Vec<Sink> {
    let mut out = Vec::new();
    for p in fixed {
        let m = p.multiplier;
        if m.abs() < 1.0 - 1e-9 {
            out.push(Sink {
                point: p.point,
                multiplier: m,
                side: 0,
            });
        } else if (m.abs() - 1.0).abs() <= 1e-9 {
            let attracts = |dir: f64| {
                let x = CirclePoint::from_angle(p.point.angle() + dir * SIDE_STEP);
                let y = g.eval(&g.eval(&x));
                y.distance(&p.point) < x.distance(&p.point)
            };
            let side = match (attracts(1.0), attracts(-1.0)) {
                (true, true) => 0,
                (true, false) => 1,
                (false, true) => -1,
                (false, false) => continue,
            };
            out.push(Sink {
                point: p.point,
                multiplier: m,
                side,
            });
        }
    }
    out
}

/// The Fatou gap at a sink, bounded by the nearest known Julia points.
fn gap_at(sink: &Sink, julia: &[Point]) -> Option<(Point, Point)> {
    let t = sink.point.angle();
    // Julia points other than the sink itself, as offsets from it in (0, 1)
    let mut offsets: Vec<(f64, Point)> = julia
        .iter()
        .filter(|q| q.distance(&sink.point) > 1e-12)
        .map(|q| {
            let o = q.angle() - t;
            (o - o.floor(), *q)
        })
        .collect();
    if offsets.is_empty() {
        return None;
    }
    offsets.sort_by(|a, b| a.0.total_cmp(&b.0));
    let ahead = offsets[0].1;
    let behind = offsets[offsets.len() - 1].1;
    match sink.side {
        0 => Some((behind, ahead)),
        1 => Some((sink.point, ahead)),
        _ => Some((behind, sink.point)),
    }
}

/// Classify `J(f)` ⊂ `R̂` for a map of maximal real entropy as a circle, an interval or a
/// Cantor set.
pub fn classify_maximal(f: &RealRationalMap) -> Result<JuliaShape> {
    classify_with_depth(f, 12)
}

pub fn classify_with_depth(f: &RealRationalMap, depth: usize) -> Result<JuliaShape> {
    let d = f.degree();
    if !is_maximal_entropy(f, 0.05) {
        return Err(Error::PreconditionFailed(
            "real entropy is below log d - 0.05".into(),
        ));
    }
    let c = cycles(f)?;
    let f2 = &c.second_iterate;
    let mut sink_list: Vec<(Sink, bool)> = sinks(f, &c.fixed).into_iter().map(|s| (s, false)).collect();
    if sink_list.is_empty() {
        sink_list = sinks(f2, &c.period_two).into_iter().map(|s| (s, true)).collect();
    }

    if sink_list.is_empty() {
        let s = topological_degree(f)?;
        let covering = f.critical_points_real().is_empty() && s.unsigned_abs() as usize == d;
        if covering {
            return Ok(JuliaShape {
                kind: ShapeKind::Circle,
                interval: None,
                evidence: format!(
                    "no real critical points, circle degree {s} = ±{d}, no real sink of period ≤ 2"
                ),
            });
        }
        let report = structure_report(f, depth)?;
        let kind = if !report.components.is_empty() && report.totally_disconnected_points > 0 {
            ShapeKind::Mixed
        } else {
            ShapeKind::Unknown
        };
        return Ok(JuliaShape {
            kind,
            interval: None,
            evidence: format!(
                "no real sink of period ≤ 2; {} interval components, {} isolated sample points",
                report.components.len(),
                report.totally_disconnected_points
            ),
        });
    }

    // known Julia points: the sample, non-sink cycles of period ≤ 2 and their preimages
    let sample = sample_with(f, depth, &c)?;
    let mut julia = sample.points.clone();
    let sink_points: Vec<Point> = sink_list.iter().map(|(s, _)| s.point).collect();
    for q in c.fixed.iter().chain(&c.period_two) {
        if sink_points.iter().any(|s| s.distance(&q.point) < 1e-12) {
            continue;
        }
        julia.push(q.point);
        julia.extend(f.float_map().preimages(&q.point).into_iter().map(|(p, _)| p));
    }
    for (s, _) in &sink_list {
        if s.side != 0 {
            // a parabolic point lies in J
            julia.extend(f.float_map().preimages(&s.point).into_iter().map(|(p, _)| p));
        }
    }
    dedup_sorted(&mut julia, 1e-12);

    let (sink, use_square, gap) = sink_list
        .iter()
        .filter_map(|(s, sq)| gap_at(s, &julia).map(|g| (s, *sq, g)))
        .max_by(|a, b| arc_length(&a.2 .0, &a.2 .1).total_cmp(&arc_length(&b.2 .0, &b.2 .1)))
        .ok_or_else(|| Error::InternalConsistency("no Julia points beside the sink".into()))?;
    let g = if use_square { f2 } else { f };
    // I runs from the far end of the gap back round to its near end
    let (lo, hi) = (gap.1, gap.0);
    let span = arc_length(&lo, &hi);
    let mut escape: f64 = 0.0;
    for i in 0..PROBES {
        let x = CirclePoint::from_angle(lo.angle() + span * (i as f64 + 0.5) / PROBES as f64);
        let y = g.eval(&x);
        if !on_arc(&y, &lo, &hi) {
            escape = escape.max(y.distance(&lo).min(y.distance(&hi)));
        }
    }
    let kind = if escape <= HAUSDORFF_TOL {
        ShapeKind::Interval
    } else if escape > GAP_TOL {
        ShapeKind::Cantor
    } else {
        ShapeKind::Unknown
    };
    Ok(JuliaShape {
        kind,
        interval: Some((lo, hi)),
        evidence: format!(
            "sink at {} (multiplier {:.6}{}), I = [{}, {}], largest escape of f(I) from I {:.3e}",
            fmt_point(&sink.point),
            sink.multiplier,
            if use_square { ", period 2" } else { "" },
            fmt_point(&lo),
            fmt_point(&hi),
            escape
        ),
    })
}

fn fmt_point(p: &Point) -> String {
    match p.value() {
        Some(x) => format!("{x:.9}"),
        None => "inf".into(),
    }
}

/// Heuristic split of the sampled real Julia set into interval pieces and the rest.
#[derive(Clone, Debug, PartialEq)]
pub struct StructureReport {
    pub depth: usize,
    pub sample_size: usize,
    /// Runs of closely spaced sample points that meet a critical orbit.
    pub components: Vec<(Point, Point)>,
    pub totally_disconnected_points: usize,
    pub totally_disconnected_span: Option<(Point, Point)>,
    /// At most `2d − 2` cycles of periodic intervals.
    pub cycle_bound: usize,
    pub gap_threshold: f64,
}

/// Sample points within this many mean spacings of each other are treated as one piece.
const RUN_SPACINGS: f64 = 10.0;
const MIN_RUN: usize = 8;

pub fn structure_report(f: &RealRationalMap, depth: usize) -> Result<StructureReport> {
    let d = f.degree();
    if d < 2 {
        return Err(Error::DegreeTooSmall(d));
    }
    let sample = sample_real_julia(f, depth)?;
    let pts = &sample.points;
    let n = pts.len();
    let cycle_bound = 2 * d - 2;
    let hull = widest_gap(pts).map(|(_, _, g)| 1.0 - g).unwrap_or(0.0);
    let threshold = RUN_SPACINGS * hull / n.max(1) as f64;

    let mut orbit: Vec<Point> = Vec::new();
    for (c, _) in f.critical_points_real() {
        let mut x = c;
        for _ in 0..ORBIT_STEPS {
            orbit.push(x);
            x = f.eval(&x);
        }
    }
    let touches = |a: &Point, b: &Point| {
        orbit
            .iter()
            .any(|x| on_arc(x, a, b) || x.distance(a) < threshold || x.distance(b) < threshold)
    };

    // runs of consecutive points, starting after the widest gap
    let mut components = Vec::new();
    let mut isolated: Vec<Point> = Vec::new();
    if n > 0 {
        let start = (0..n)
            .max_by(|&i, &j| {
                arc_length(&pts[i], &pts[(i + 1) % n]).total_cmp(&arc_length(&pts[j], &pts[(j + 1) % n]))
            })
            .map(|i| (i + 1) % n)
            .unwrap_or(0);
        let order: Vec<Point> = (0..n).map(|k| pts[(start + k) % n]).collect();
        let mut run = vec![order[0]];
        let mut close_run = |run: &mut Vec<Point>| {
            let (a, b) = (run[0], run[run.len() - 1]);
            if run.len() >= MIN_RUN && touches(&a, &b) {
                components.push((a, b));
            } else {
                isolated.extend(run.iter().copied());
            }
            run.clear();
        };
        for w in order.windows(2) {
            if arc_length(&w[0], &w[1]) < threshold {
                run.push(w[1]);
            } else {
                close_run(&mut run);
                run.push(w[1]);
            }
        }
        close_run(&mut run);
    }
    let totally_disconnected_span = if isolated.len() < 2 {
        None
    } else if isolated.iter().any(Point::is_infinite) {
        // complement of the widest gap
        isolated.sort_by(|a, b| a.cmp_angle(b));
        widest_gap(&isolated).map(|(a, b, _)| (b, a))
    } else {
        let lo = isolated.iter().min_by(|a, b| a.cmp_angle(b)).copied();
        let hi = isolated.iter().max_by(|a, b| a.cmp_angle(b)).copied();
        lo.zip(hi)
    };
    Ok(StructureReport {
        depth: sample.depth,
        sample_size: n,
        components,
        totally_disconnected_points: isolated.len(),
        totally_disconnected_span,
        cycle_bound,
        gap_threshold: threshold,
    })
}
