//! Entropy estimates from lap growth and preimage growth, and rotation numbers.

use rayon::prelude::*;
use serde::Serialize;

use crate::chart::CirclePoint;
use crate::degree::topological_degree;
use crate::error::{Error, Result};
use crate::realmap::RealRationalMap;

type Point = CirclePoint<f64>;

/// Points of the circle closer than this in the angle chart are identified.
pub const DEDUP_TOL: f64 = 1e-9;
/// Largest number of tree nodes a single estimate may create.
pub const POINT_BUDGET: usize = 2_000_000;
const CRITICAL_VALUE_TOL: f64 = 1e-11;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Lap,
    Preimage,
    Kneading,
    Covering,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Lap => "lap",
            Method::Preimage => "preimage",
            Method::Kneading => "kneading",
            Method::Covering => "covering",
        }
    }
}

/// Entropy in nats with a bracket `lower ≤ value ≤ upper`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EntropyEstimate {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub depth: usize,
    pub method: Method,
}

impl EntropyEstimate {
    /// `0 ≤ lower ≤ value ≤ upper ≤ log d` up to `1e-9`.
    pub fn is_consistent(&self, d: usize) -> bool {
        let eps = 1e-9;
        self.lower >= -eps
            && self.lower <= self.value + eps
            && self.value <= self.upper + eps
            && self.upper <= (d as f64).ln() + eps
    }
}

/// Backward orbit levels: `levels[k]` holds the distinct real solutions of `f^k(y) = root`.
#[derive(Clone, Debug)]
pub struct PreimageTree {
    pub root: Point,
    pub levels: Vec<Vec<(Point, usize)>>,
}

impl PreimageTree {
    pub fn new(root: Point) -> Self {
        PreimageTree {
            root,
            levels: vec![vec![(root, 1)]],
        }
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn counts(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }

    /// Append one level; returns its size.
    pub fn grow(&mut self, f: &RealRationalMap) -> usize {
        self.grow_by_parent(f).iter().sum()
    }

    /// Append one level, kept in parent order; returns the number of children of each parent.
    ///
    /// Distinct parents have disjoint preimages, so points are only merged within one parent.
    pub fn grow_by_parent(&mut self, f: &RealRationalMap) -> Vec<usize> {
        let parts = expand_level(f, self.levels.last().unwrap());
        let sizes = parts.iter().map(Vec::len).collect();
        self.levels.push(parts.into_iter().flatten().collect());
        sizes
    }
}

fn expand_level(f: &RealRationalMap, level: &[(Point, usize)]) -> Vec<Vec<(Point, usize)>> {
    let fm = f.float_map();
    let critical: Vec<(Point, usize, Point)> = f
        .critical_points_real()
        .into_iter()
        .map(|(c, m)| (c, m, fm.eval(&c)))
        .collect();
    level
        .par_iter()
        .map(|(y, _)| snap_to_critical(merge_multiset(fm.preimages(y)), y, &critical))
        .collect()
}

/// Over a critical value, the roots split off a critical point by rounding are
/// put back together as one root of full multiplicity.
fn snap_to_critical(
    mut roots: Vec<(Point, usize)>,
    y: &Point,
    critical: &[(Point, usize, Point)],
) -> Vec<(Point, usize)> {
    for (c, m, v) in critical {
        if v.distance(y) > CRITICAL_VALUE_TOL {
            continue;
        }
        let mut near: Vec<(usize, f64)> = roots
            .iter()
            .enumerate()
            .map(|(i, (x, _))| (i, x.distance(c)))
            .filter(|(_, dist)| *dist < 1e-4)
            .collect();
        near.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let mut drop: Vec<usize> = near.iter().take(m + 1).map(|(i, _)| *i).collect();
        if drop.is_empty() {
            continue;
        }
        drop.sort_unstable();
        for i in drop.into_iter().rev() {
            roots.remove(i);
        }
        roots.push((*c, m + 1));
    }
    roots.sort_by(|a, b| a.0.cmp_angle(&b.0));
    roots
}

fn merge_multiset(mut pts: Vec<(Point, usize)>) -> Vec<(Point, usize)> {
    pts.sort_by(|a, b| a.0.cmp_angle(&b.0));
    let mut out: Vec<(Point, usize)> = Vec::with_capacity(pts.len());
    for (p, m) in pts {
        match out.last_mut() {
            Some(last) if p.angle() - last.0.angle() < DEDUP_TOL => last.1 += m,
            _ => out.push((p, m)),
        }
    }
    if out.len() > 1 && out[0].0.distance(&out[out.len() - 1].0) < DEDUP_TOL {
        let (_, m) = out.pop().unwrap();
        out[0].1 += m;
    }
    out
}

/// Real solutions of `f(x) = y`, with multiplicities, merged at chart distance `1e-9`.
pub fn solve_real_preimages(f: &RealRationalMap, y: &Point) -> Vec<(Point, usize)> {
    merge_multiset(f.float_map().preimages(y))
}

/// Real critical points of odd multiplicity, where `f` folds the circle.
pub fn turning_points(f: &RealRationalMap) -> Vec<Point> {
    f.critical_points_real()
        .into_iter()
        .filter(|(_, k)| k % 2 == 1)
        .map(|(p, _)| p)
        .collect()
}

struct LapData {
    laps: Vec<usize>,
    counts: Vec<Vec<usize>>,
    depth: usize,
}

/// Grow one tree per turning point until depth `n` or the budget is hit.
/// `laps[k]` is `l_{k+1}`, available for `k ≤ depth`.
///
/// A node that lands on a turning point repeats that point's own tree, so it and
/// its descendants are left out of the lap union.
fn lap_data(f: &RealRationalMap, turning: &[Point], n: usize, budget: usize) -> LapData {
    let mut trees: Vec<PreimageTree> = turning.iter().map(|c| PreimageTree::new(*c)).collect();
    let mut repeats: Vec<Vec<bool>> = vec![vec![false]; trees.len()];
    let mut laps = vec![turning.len()];
    let mut total = turning.len();
    let mut depth = 0;
    let mut sizes = vec![turning.len()];
    while depth < n {
        // skip a level that would clearly overrun the budget
        if depth >= 1 {
            let (prev, cur) = (sizes[depth - 1] as f64, sizes[depth] as f64);
            if total as f64 + cur * (cur / prev).max(1.0) > 1.5 * budget as f64 {
                break;
            }
        }
        let mut grown = 0;
        let mut next_repeats = Vec::with_capacity(trees.len());
        for (t, rep) in trees.iter_mut().zip(&repeats) {
            let sizes = t.grow_by_parent(f);
            let level = t.levels.last().unwrap();
            let mut flags = Vec::with_capacity(level.len());
            let mut k = 0;
            for (parent, size) in sizes.into_iter().enumerate() {
                for (p, _) in &level[k..k + size] {
                    flags.push(rep[parent] || turning.iter().any(|c| c.distance(p) < DEDUP_TOL));
                }
                k += size;
            }
            grown += level.len();
            next_repeats.push(flags);
        }
        if total + grown > budget {
            for t in trees.iter_mut() {
                t.levels.pop();
            }
            break;
        }
        total += grown;
        depth += 1;
        sizes.push(grown);
        let fresh: usize = next_repeats
            .iter()
            .map(|fl| fl.iter().filter(|r| !**r).count())
            .sum();
        laps.push(laps[depth - 1] + fresh);
        repeats = next_repeats;
    }
    LapData {
        laps,
        counts: trees.iter().map(PreimageTree::counts).collect(),
        depth,
    }
}

/// `l_1..l_N`: sizes of `⋃_{k<n} f^{-k}(turning points)`.
pub fn lap_counts(f: &RealRationalMap, n: usize) -> Result<Vec<usize>> {
    if !(1..=16).contains(&n) {
        return Err(Error::PreconditionFailed(format!("depth {n} outside 1..=16")));
    }
    let turning = turning_points(f);
    if turning.is_empty() {
        return Err(Error::PreconditionFailed("no turning points".into()));
    }
    let data = lap_data(f, &turning, n - 1, POINT_BUDGET);
    if data.depth < n - 1 {
        return Err(Error::DepthBudgetExceeded {
            depth: data.depth + 1,
            points: POINT_BUDGET,
        });
    }
    Ok(data.laps[..n].to_vec())
}

/// Laps of the interval lift of `f^n` cut at the first turning point `c`, for
/// `n = 1..=N`: `l_n + #f^{-n}(c)`. Each such piece maps into the circle without
/// wrapping, so it bounds `#f^{-n}(x)` for every `x`; `l_n` alone does not when laps wrap.
pub fn cut_lap_counts(f: &RealRationalMap, n: usize) -> Result<Vec<usize>> {
    if !(1..=16).contains(&n) {
        return Err(Error::PreconditionFailed(format!("depth {n} outside 1..=16")));
    }
    let turning = turning_points(f);
    if turning.is_empty() {
        return Err(Error::PreconditionFailed("no turning points".into()));
    }
    let data = lap_data(f, &turning, n, POINT_BUDGET);
    if data.depth < n {
        return Err(Error::DepthBudgetExceeded {
            depth: data.depth + 1,
            points: POINT_BUDGET,
        });
    }
    Ok((1..=n).map(|k| data.laps[k - 1] + data.counts[0][k]).collect())
}

/// Least-squares slope of `log count` over the last `ceil(N/2)` depths `1..=N`,
/// widened by one depth when that count is even so that a period-two wobble in
/// the counts cancels out of the slope.
pub fn fitted_slope(counts: &[usize]) -> Option<f64> {
    let n = counts.len().checked_sub(1)?;
    if n == 0 {
        return None;
    }
    let mut k = n.div_ceil(2);
    if k % 2 == 0 && k < n {
        k += 1;
    }
    let pts: Vec<(f64, f64)> = ((n + 1 - k)..=n)
        .map(|i| (i as f64, counts[i] as f64))
        .collect();
    if pts.iter().any(|&(_, c)| c <= 0.0) {
        return None;
    }
    if pts.len() == 1 {
        return Some(pts[0].1.ln() / pts[0].0);
    }
    let m = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1.ln()).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1.ln()).sum();
    Some((m * sxy - sx * sy) / (m * sxx - sx * sx))
}

fn covering_estimate(f: &RealRationalMap) -> Result<EntropyEstimate> {
    let s = topological_degree(f)?;
    let v = (s.unsigned_abs().max(1) as f64).ln();
    Ok(EntropyEstimate {
        value: v,
        lower: v,
        upper: v,
        depth: 0,
        method: Method::Covering,
    })
}

fn lap_estimate(f: &RealRationalMap, data: &LapData) -> EntropyEstimate {
    let log_d = (f.degree() as f64).ln();
    // Laps of f^n may wrap around the circle. Cutting them at the n-th preimages
    // of one turning point leaves injective pieces, whose count bounds the entropy.
    let cuts = &data.counts[0];
    let upper = data.laps[..data.depth.max(1)]
        .iter()
        .enumerate()
        .filter_map(|(i, &l)| cuts.get(i + 1).map(|&m| (i + 1, l + m)))
        .map(|(n, pieces)| ((pieces as f64).ln() + 2f64.ln()) / n as f64)
        .fold(f64::INFINITY, f64::min)
        .min(log_d);
    let slope = data
        .counts
        .iter()
        .filter_map(|c| fitted_slope(c))
        .fold(0.0, f64::max);
    let lower = slope.clamp(0.0, upper);
    EntropyEstimate {
        value: lower,
        lower,
        upper,
        depth: data.depth,
        method: Method::Lap,
    }
}

/// Lap-growth estimate at depth `N`; exact `log max(|s|, 1)` for coverings.
pub fn lap_entropy(f: &RealRationalMap, n: usize) -> Result<EntropyEstimate> {
    if f.degree() < 2 {
        return Err(Error::DegreeTooSmall(f.degree()));
    }
    let turning = turning_points(f);
    if turning.is_empty() {
        return covering_estimate(f);
    }
    if !(1..=16).contains(&n) {
        return Err(Error::PreconditionFailed(format!("depth {n} outside 1..=16")));
    }
    let data = lap_data(f, &turning, n, POINT_BUDGET);
    if data.depth < n {
        return Err(Error::DepthBudgetExceeded {
            depth: data.depth + 1,
            points: POINT_BUDGET,
        });
    }
    Ok(lap_estimate(f, &data))
}

/// Like [`lap_entropy`] but stops at the deepest level the point budget allows.
pub fn lap_entropy_within_budget(
    f: &RealRationalMap,
    max_n: usize,
    budget: usize,
) -> Result<EntropyEstimate> {
    if f.degree() < 2 {
        return Err(Error::DegreeTooSmall(f.degree()));
    }
    let turning = turning_points(f);
    if turning.is_empty() {
        return covering_estimate(f);
    }
    let data = lap_data(f, &turning, max_n.clamp(1, 16), budget);
    if data.depth < 2 {
        return Err(Error::DepthBudgetExceeded {
            depth: data.depth + 1,
            points: budget,
        });
    }
    Ok(lap_estimate(f, &data))
}

/// Growth rate of `#f^{-n}(x)`, fitted over the last half of the depths.
pub fn preimage_growth_entropy(f: &RealRationalMap, x: &Point, n: usize) -> Result<EntropyEstimate> {
    let d = f.degree();
    if d < 2 {
        return Err(Error::DegreeTooSmall(d));
    }
    let counts = preimage_counts(f, x, n)?;
    let log_d = (d as f64).ln();
    let v = fitted_slope(&counts).unwrap_or(0.0).clamp(0.0, log_d);
    Ok(EntropyEstimate {
        value: v,
        lower: v,
        upper: log_d,
        depth: n,
        method: Method::Preimage,
    })
}

/// `#f^{-k}(x)` for `k = 0..=n`, distinct points.
pub fn preimage_counts(f: &RealRationalMap, x: &Point, n: usize) -> Result<Vec<usize>> {
    let mut tree = PreimageTree::new(*x);
    let mut total = 1;
    for k in 1..=n {
        total += tree.grow(f);
        if total > POINT_BUDGET {
            return Err(Error::DepthBudgetExceeded {
                depth: k,
                points: POINT_BUDGET,
            });
        }
    }
    Ok(tree.counts())
}

/// Rotation number in `[0, 1)` of an orientation-preserving circle homeomorphism.
pub fn rotation_number(f: &RealRationalMap, n: usize) -> Result<f64> {
    if topological_degree(f).ok() != Some(1) || !turning_points(f).is_empty() {
        return Err(Error::NotACircleHomeo);
    }
    let lift = Lift::new(f);
    let t0 = 0.25;
    let mut t = t0;
    for _ in 0..n.max(1) {
        t = lift.apply(t);
    }
    let rho = (t - t0) / n.max(1) as f64;
    Ok(rho - rho.floor())
}

/// Degree-one lift `F` of the circle map in the angle chart, `F(t + 1) = F(t) + 1`.
struct Lift<'a> {
    f: &'a RealRationalMap,
    grid: Vec<f64>,
}

impl<'a> Lift<'a> {
    const GRID: usize = 4096;

    fn new(f: &'a RealRationalMap) -> Self {
        let mut grid = Vec::with_capacity(Self::GRID);
        let mut prev: Option<f64> = None;
        for j in 0..Self::GRID {
            let t = j as f64 / Self::GRID as f64;
            let raw = Self::raw_disp(f, t);
            let v = match prev {
                None => raw,
                Some(p) => raw + (p - raw).round(),
            };
            grid.push(v);
            prev = Some(v);
        }
        Lift { f, grid }
    }

    fn raw_disp(f: &RealRationalMap, t: f64) -> f64 {
        let y = f.eval(&CirclePoint::from_angle(t)).angle();
        let r = y - t;
        r - r.floor()
    }

    fn apply(&self, t: f64) -> f64 {
        let base = t.floor();
        let frac = t - base;
        let j = ((frac * Self::GRID as f64).round() as usize) % Self::GRID;
        let reference = self.grid[j];
        let raw = Self::raw_disp(self.f, frac);
        t + raw + (reference - raw).round()
    }
}
