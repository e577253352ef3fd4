//! Phase-space index sets: uniform discreteness, lattices, exact cube
//! counting with extremal translates, and density profiles.
//!
//! Extremal counts over a search region are exact: the count of points in a
//! translated closed cube is piecewise constant in the center, with
//! breakpoints at coordinate events lambda +- R. Maxima live at events
//! (closed cubes), minima on open gaps between them, so evaluating at
//! events plus gap midpoints covers every extremum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stft::PhasePoint;

const BOUNDARY_EPS: f64 = 1e-9;

/// Closed cube |x - a| <= R, |y - b| <= R.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cube {
    pub center: (f64, f64),
    pub half_side: f64,
}

impl Cube {
    pub fn new(center: (f64, f64), half_side: f64) -> Result<Self> {
        if !(half_side > 0.0) {
            return Err(Error::invalid("half_side", "must be positive"));
        }
        Ok(Cube { center, half_side })
    }

    pub fn contains(&self, p: &PhasePoint) -> bool {
        (p.x - self.center.0).abs() <= self.half_side && (p.y - self.center.1).abs() <= self.half_side
    }
}

/// A finite phase-space point set, optionally with a declared separation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    points: Vec<PhasePoint>,
    declared_separation: Option<f64>,
}

impl PointSet {
    /// Validates distinctness and, when declared, the separation constant
    /// (grid hashing: neighbors within delta sit in adjacent cells).
    pub fn new(points: Vec<PhasePoint>, declared_separation: Option<f64>) -> Result<Self> {
        let mut sorted: Vec<(f64, f64)> = points.iter().map(|p| (p.x, p.y)).collect();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("points", "points must be distinct"));
        }
        if let Some(delta) = declared_separation {
            if !(delta > 0.0) {
                return Err(Error::invalid("declared_separation", "must be positive"));
            }
            if !separation_holds(&points, delta) {
                return Err(Error::invalid(
                    "declared_separation",
                    "a pair of points is closer than the declared separation",
                ));
            }
        }
        Ok(PointSet { points, declared_separation })
    }

    pub fn points(&self) -> &[PhasePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn declared_separation(&self) -> Option<f64> {
        self.declared_separation
    }

    /// Axis-aligned bounding box; None when empty.
    pub fn bounding_box(&self) -> Option<((f64, f64), (f64, f64))> {
        if self.points.is_empty() {
            return None;
        }
        let mut lo = (f64::INFINITY, f64::INFINITY);
        let mut hi = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.points {
            lo.0 = lo.0.min(p.x);
            lo.1 = lo.1.min(p.y);
            hi.0 = hi.0.max(p.x);
            hi.1 = hi.1.max(p.y);
        }
        Some((lo, hi))
    }
}

fn separation_holds(points: &[PhasePoint], delta: f64) -> bool {
    use std::collections::HashMap;
    let mut cells: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let key = |p: &PhasePoint| ((p.x / delta).floor() as i64, (p.y / delta).floor() as i64);
    for (i, p) in points.iter().enumerate() {
        cells.entry(key(p)).or_default().push(i);
    }
    for (i, p) in points.iter().enumerate() {
        let (cx, cy) = key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(idxs) = cells.get(&(cx + dx, cy + dy)) {
                    for &j in idxs {
                        if j != i {
                            let d = ((p.x - points[j].x).powi(2) + (p.y - points[j].y).powi(2)).sqrt();
                            if d <= delta {
                                return false;
                            }
                        }
                    }
                }
            }
        }
    }
    true
}

/// Minimum pairwise Euclidean distance; +inf for fewer than two points.
pub fn separation_constant(ps: &PointSet) -> f64 {
    let pts = ps.points();
    if pts.len() < 2 {
        return f64::INFINITY;
    }
    // x-sorted strip sweep (classic closest pair, O(n log n) in practice)
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&a, &b| pts[a].x.partial_cmp(&pts[b].x).unwrap());
    let mut best = f64::INFINITY;
    for (rank, &i) in order.iter().enumerate() {
        for &j in order[rank + 1..].iter() {
            let dx = pts[j].x - pts[i].x;
            if dx * dx >= best * best && best.is_finite() {
                break;
            }
            let d = ((pts[j].x - pts[i].x).powi(2) + (pts[j].y - pts[i].y).powi(2)).sqrt();
            best = best.min(d);
        }
    }
    best
}

/// A 2-D lattice { n v + k w : (n, k) in Z^2 }.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lattice2D {
    pub v: (f64, f64),
    pub w: (f64, f64),
}

impl Lattice2D {
    pub fn new(v: (f64, f64), w: (f64, f64)) -> Result<Self> {
        let lat = Lattice2D { v, w };
        if lat.det().abs() < 1e-12 {
            return Err(Error::invalid("lattice", "generators are degenerate (det = 0)"));
        }
        Ok(lat)
    }

    pub fn det(&self) -> f64 {
        self.v.0 * self.w.1 - self.v.1 * self.w.0
    }

    /// Uniform density 1/|det|.
    pub fn density(&self) -> f64 {
        1.0 / self.det().abs()
    }

    /// Length of the shortest nonzero lattice vector (Lagrange-Gauss reduction).
    pub fn minimum_distance(&self) -> f64 {
        let norm = |a: (f64, f64)| (a.0 * a.0 + a.1 * a.1).sqrt();
        let mut u = self.v;
        let mut w = self.w;
        if norm(u) > norm(w) {
            std::mem::swap(&mut u, &mut w);
        }
        loop {
            let m = ((w.0 * u.0 + w.1 * u.1) / (u.0 * u.0 + u.1 * u.1)).round();
            let r = (w.0 - m * u.0, w.1 - m * u.1);
            if norm(r) >= norm(u) {
                return norm(u);
            }
            w = u;
            u = r;
        }
    }
}

/// All lattice points inside a window cube; separation set to the lattice minimum.
pub fn lattice_points(lat: &Lattice2D, window: &Cube) -> Result<PointSet> {
    let det = lat.det();
    let inv = [
        [lat.w.1 / det, -lat.w.0 / det],
        [-lat.v.1 / det, lat.v.0 / det],
    ];
    let (cx, cy) = window.center;
    let r = window.half_side;
    let mut n_lo = f64::INFINITY;
    let mut n_hi = f64::NEG_INFINITY;
    let mut k_lo = f64::INFINITY;
    let mut k_hi = f64::NEG_INFINITY;
    for &sx in &[-1.0, 1.0] {
        for &sy in &[-1.0, 1.0] {
            let px = cx + sx * r;
            let py = cy + sy * r;
            let n = inv[0][0] * px + inv[0][1] * py;
            let k = inv[1][0] * px + inv[1][1] * py;
            n_lo = n_lo.min(n);
            n_hi = n_hi.max(n);
            k_lo = k_lo.min(k);
            k_hi = k_hi.max(k);
        }
    }
    let mut points = Vec::new();
    for n in (n_lo.floor() as i64 - 1)..=(n_hi.ceil() as i64 + 1) {
        for k in (k_lo.floor() as i64 - 1)..=(k_hi.ceil() as i64 + 1) {
            let p = PhasePoint::new(
                n as f64 * lat.v.0 + k as f64 * lat.w.0,
                n as f64 * lat.v.1 + k as f64 * lat.w.1,
            );
            if window.contains(&p) {
                points.push(p);
            }
        }
    }
    let sep = lat.minimum_distance();
    // declared separation must be strictly below the minimum distance
    PointSet::new(points, Some(sep * (1.0 - 1e-9)))
}

/// A finite family of point sets (multi-generator systems).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointFamily {
    members: Vec<PointSet>,
}

impl PointFamily {
    pub fn new(members: Vec<PointSet>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::invalid("members", "family must be nonempty"));
        }
        Ok(PointFamily { members })
    }

    pub fn members(&self) -> &[PointSet] {
        &self.members
    }

    /// Concatenated points with multiplicity (family counts are sums).
    fn all_points(&self) -> Vec<PhasePoint> {
        self.members.iter().flat_map(|m| m.points().iter().copied()).collect()
    }
}

/// Either one point set or a family, for counting purposes.
#[derive(Debug, Clone, Copy)]
pub enum CountTarget<'a> {
    Set(&'a PointSet),
    Family(&'a PointFamily),
}

/// Exact count of points in a closed cube.
pub fn count_in_cube(ps: &PointSet, q: &Cube) -> usize {
    ps.points().iter().filter(|p| q.contains(p)).count()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremalCounts {
    pub min: usize,
    pub max: usize,
    pub argmin: PhasePoint,
    pub argmax: PhasePoint,
}

/// Exact extremal counts of |points in Q_(a,b)(R)| over all centers (a, b)
/// in the search region, by an event sweep in x and a 1-D endpoint sweep
/// in y per slab. Handles multisets (family counting).
pub fn extremal_counts_of(points: &[PhasePoint], r: f64, search: &Cube) -> ExtremalCounts {
    let (a_lo, a_hi) = (search.center.0 - search.half_side, search.center.0 + search.half_side);
    let (b_lo, b_hi) = (search.center.1 - search.half_side, search.center.1 + search.half_side);
    let center = PhasePoint::new(search.center.0, search.center.1);
    if points.is_empty() {
        return ExtremalCounts { min: 0, max: 0, argmin: center, argmax: center };
    }

    // x-events: centers where the active set changes
    let mut xs: Vec<f64> = vec![a_lo, a_hi];
    for p in points {
        for e in [p.x - r, p.x + r] {
            if e > a_lo - BOUNDARY_EPS && e < a_hi + BOUNDARY_EPS {
                xs.push(e.clamp(a_lo, a_hi));
            }
        }
    }
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup_by(|a, b| (*a - *b).abs() <= BOUNDARY_EPS);

    let max_candidates: Vec<f64> = xs.clone();
    let mut min_candidates: Vec<f64> = vec![a_lo, a_hi];
    min_candidates.extend(xs.windows(2).map(|w| 0.5 * (w[0] + w[1])));

    let mut best_max: Option<(usize, PhasePoint)> = None;
    let mut best_min: Option<(usize, PhasePoint)> = None;

    let sweep = |a: f64, want_max: bool, best: &mut Option<(usize, PhasePoint)>| {
        // active points for this x-slab
        let mut lows: Vec<f64> = Vec::new();
        let mut highs: Vec<f64> = Vec::new();
        for p in points {
            if (p.x - a).abs() <= r + BOUNDARY_EPS {
                lows.push(p.y - r);
                highs.push(p.y + r);
            }
        }
        if lows.is_empty() {
            if !want_max {
                let cand = (0, PhasePoint::new(a, 0.5 * (b_lo + b_hi)));
                if best.is_none() || cand.0 < best.unwrap().0 {
                    *best = Some(cand);
                }
            }
            return;
        }
        lows.sort_by(|x, y| x.partial_cmp(y).unwrap());
        highs.sort_by(|x, y| x.partial_cmp(y).unwrap());

        // coverage at b: #(low <= b) - #(high < b)
        let coverage = |b: f64| -> usize {
            let n_low = lows.partition_point(|&l| l <= b + BOUNDARY_EPS);
            let n_high = highs.partition_point(|&h| h < b - BOUNDARY_EPS);
            n_low - n_high
        };

        let mut bs: Vec<f64> = vec![b_lo, b_hi];
        for &e in lows.iter().chain(highs.iter()) {
            if e > b_lo - BOUNDARY_EPS && e < b_hi + BOUNDARY_EPS {
                bs.push(e.clamp(b_lo, b_hi));
            }
        }
        bs.sort_by(|x, y| x.partial_cmp(y).unwrap());
        bs.dedup_by(|x, y| (*x - *y).abs() <= BOUNDARY_EPS);

        let candidates: Vec<f64> = if want_max {
            bs
        } else {
            let mut mids = vec![b_lo, b_hi];
            mids.extend(bs.windows(2).map(|w| 0.5 * (w[0] + w[1])));
            mids
        };
        for b in candidates {
            let c = coverage(b);
            let better = match best {
                None => true,
                Some((cur, _)) => {
                    if want_max {
                        c > *cur
                    } else {
                        c < *cur
                    }
                }
            };
            if better {
                *best = Some((c, PhasePoint::new(a, b)));
            }
        }
    };

    for &a in &max_candidates {
        sweep(a, true, &mut best_max);
    }
    min_candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    min_candidates.dedup_by(|a, b| (*a - *b).abs() <= BOUNDARY_EPS);
    for &a in &min_candidates {
        sweep(a, false, &mut best_min);
    }

    let (max, argmax) = best_max.unwrap_or((0, center));
    let (min, argmin) = best_min.unwrap_or((0, center));
    ExtremalCounts { min, max, argmin, argmax }
}

/// Extremal counts of a [`PointSet`] (see [`extremal_counts_of`]).
pub fn extremal_counts(ps: &PointSet, r: f64, search: &Cube) -> ExtremalCounts {
    extremal_counts_of(ps.points(), r, search)
}

/// Finite-radius density evidence: per-R extremal counts and their
/// (2R)^-2 normalizations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub radii: Vec<f64>,
    pub max_counts: Vec<u64>,
    pub min_counts: Vec<u64>,
    pub normalized_max: Vec<f64>,
    pub normalized_min: Vec<f64>,
    /// True where the search region inflated by R exceeds the data window
    /// (bounding box of the points): those entries see truncation.
    pub truncated: Vec<bool>,
}

/// Density profile over increasing radii for a set or a family.
pub fn density_profile(target: CountTarget<'_>, radii: &[f64], search: &Cube) -> Result<DensityReport> {
    if radii.is_empty() {
        return Err(Error::invalid("radii", "must be nonempty"));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("radii", "must be strictly increasing"));
    }
    if radii.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::invalid("radii", "must be positive"));
    }
    let (points, bbox) = match target {
        CountTarget::Set(ps) => (ps.points().to_vec(), ps.bounding_box()),
        CountTarget::Family(fam) => {
            let pts = fam.all_points();
            let tmp = PointSet { points: pts.clone(), declared_separation: None };
            (pts, tmp.bounding_box())
        }
    };
    let mut report = DensityReport {
        radii: radii.to_vec(),
        max_counts: Vec::new(),
        min_counts: Vec::new(),
        normalized_max: Vec::new(),
        normalized_min: Vec::new(),
        truncated: Vec::new(),
    };
    for &r in radii {
        let ext = extremal_counts_of(&points, r, search);
        let area = (2.0 * r) * (2.0 * r);
        report.max_counts.push(ext.max as u64);
        report.min_counts.push(ext.min as u64);
        report.normalized_max.push(ext.max as f64 / area);
        report.normalized_min.push(ext.min as f64 / area);
        let trunc = match bbox {
            None => true,
            Some((lo, hi)) => {
                search.center.0 - search.half_side - r < lo.0 - BOUNDARY_EPS
                    || search.center.0 + search.half_side + r > hi.0 + BOUNDARY_EPS
                    || search.center.1 - search.half_side - r < lo.1 - BOUNDARY_EPS
                    || search.center.1 + search.half_side + r > hi.1 + BOUNDARY_EPS
            }
        };
        report.truncated.push(trunc);
    }
    Ok(report)
}

/// Growth envelope: R^{2-alpha} below alpha = 2, log R at alpha = 2,
/// constant 1 beyond.
pub fn growth_envelope(r: f64, alpha: &crate::signal::WeightExponent) -> Result<f64> {
    if !(r > 1.0) {
        return Err(Error::invalid("r", "envelope defined for R > 1"));
    }
    let a = alpha.alpha();
    Ok(if a < 2.0 {
        r.powf(2.0 - a)
    } else if a == 2.0 {
        r.ln()
    } else {
        1.0
    })
}
