//! Depth regions `{z : n D_n(z) >= k}` in the plane.
//!
//! A point has depth at least `k` iff `<z, u> <= q_k(u)` for every unit `u`,
//! where `q_k(u)` is the k-th largest projection of the sample. Between two
//! directions at which the sample point realizing `q_k` changes, the
//! constraint family is a cone whose intersection is fixed by its two
//! extreme members, and such changes only happen at normals of lines
//! through two sample points. [`RegionEngine`] records, for every such line,
//! how many points lie strictly on each side and on the line; the
//! constraints for a level are then read off by one scan of the table.

use serde::{Deserialize, Serialize};

use super::angular::AngularSweep;
use super::PointCloud;
use crate::error::{Error, Result};
use crate::geom::{
    clip_ring, intersect_halfplanes, region_barycenter, ConvexRegion, HalfPlane, Point2,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthRegionResult {
    pub level: usize,
    pub n: usize,
    pub region: ConvexRegion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TukeyMedian {
    pub median: Point2,
    pub set: ConvexRegion,
    /// Maximal depth count `k*`.
    pub level: usize,
    pub n: usize,
}

#[derive(Debug, Clone, Copy)]
struct LineRecord {
    pivot: u32,
    through: u32,
    /// Points strictly left of the directed line pivot -> through.
    left: u32,
    /// Points on the line, the pivot and its duplicates included.
    on: u32,
}

/// Side counts for every line through two distinct sample points.
#[derive(Debug, Clone)]
pub struct RegionEngine {
    points: Vec<Point2>,
    lines: Vec<LineRecord>,
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl RegionEngine {
    pub fn new(cloud: &PointCloud) -> Result<Self> {
        let points = cloud.points2()?;
        let n = points.len();
        if n > u32::MAX as usize {
            return Err(Error::invalid("sample too large for the region engine"));
        }
        let mut lines = Vec::new();
        for (i, &pivot) in points.iter().enumerate() {
            let sweep = AngularSweep::new(pivot, &points, 0..n);
            // each line is recorded from its lowest-indexed pivot
            for b in sweep.blocks.iter().filter(|b| b.min_index > i) {
                lines.push(LineRecord {
                    pivot: i as u32,
                    through: b.rep as u32,
                    left: b.open as u32,
                    on: (b.size + b.antipodal + sweep.coincident) as u32,
                });
            }
        }
        let mut xs: Vec<f64> = points.iter().map(|p| p.x).collect();
        let mut ys: Vec<f64> = points.iter().map(|p| p.y).collect();
        xs.sort_by(f64::total_cmp);
        ys.sort_by(f64::total_cmp);
        Ok(RegionEngine {
            points,
            lines,
            xs,
            ys,
        })
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    fn check_level(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.n() {
            return Err(Error::LevelOutOfRange { level: k, max: self.n() });
        }
        Ok(())
    }

    /// Constraints `<z, u> <= q_k(u)` at the line normals realizing a
    /// change of the k-th largest projection (plus possibly redundant ones).
    pub fn support_halfplanes(&self, k: usize) -> Result<Vec<HalfPlane>> {
        self.check_level(k)?;
        let n = self.n() as u32;
        let k = k as u32;
        let mut out = Vec::new();
        for rec in &self.lines {
            let right = n - rec.left - rec.on;
            let for_left = rec.left < k && k <= rec.left + rec.on;
            let for_right = right < k && k <= right + rec.on;
            if !(for_left || for_right) {
                continue;
            }
            let p = self.points[rec.pivot as usize];
            let u = (self.points[rec.through as usize] - p).perp();
            if for_left {
                out.extend(HalfPlane::through(p, u).ok());
            }
            if for_right {
                out.extend(HalfPlane::through(p, -u).ok());
            }
        }
        Ok(out)
    }

    /// Box `[q_k(-e1), q_k(e1)] x [q_k(-e2), q_k(e2)]`, or `None` if empty.
    fn axis_box(&self, k: usize) -> Option<Vec<Point2>> {
        let n = self.n();
        let (x0, x1) = (self.xs[k - 1], self.xs[n - k]);
        let (y0, y1) = (self.ys[k - 1], self.ys[n - k]);
        if x0 > x1 || y0 > y1 {
            return None;
        }
        Some(vec![
            Point2::new(x0, y0),
            Point2::new(x1, y0),
            Point2::new(x1, y1),
            Point2::new(x0, y1),
        ])
    }

    pub fn region(&self, k: usize) -> Result<ConvexRegion> {
        self.check_level(k)?;
        let Some(ring) = self.axis_box(k) else {
            return Ok(ConvexRegion::empty());
        };
        let hs = self.support_halfplanes(k)?;
        Ok(ConvexRegion::from_ring(clip_ring(ring, &hs)))
    }

    /// Largest `k` with a nonempty region, and that region.
    pub fn max_depth(&self) -> (usize, ConvexRegion) {
        let n = self.n();
        let region = |k: usize| self.region(k).expect("level within range");
        let hi = n.div_ceil(2);
        let top = region(hi);
        if !top.is_empty() {
            // only reachable with repeated points
            let (mut k, mut best) = (hi, top);
            while k < n {
                let r = region(k + 1);
                if r.is_empty() {
                    break;
                }
                k += 1;
                best = r;
            }
            return (k, best);
        }
        // centerpoint bound: depth >= n/3 is always attained
        let guess = n.div_ceil(3).max(1);
        let (mut lo, mut lo_region) = (guess, region(guess));
        let mut hi = hi;
        if lo_region.is_empty() {
            hi = lo;
            lo = 1;
            lo_region = region(1);
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            let r = region(mid);
            if r.is_empty() {
                hi = mid;
            } else {
                lo = mid;
                lo_region = r;
            }
        }
        (lo, lo_region)
    }
}

/// The region of points with depth count at least `k`.
pub fn depth_region(cloud: &PointCloud, k: usize) -> Result<DepthRegionResult> {
    let engine = RegionEngine::new(cloud)?;
    Ok(DepthRegionResult {
        level: k,
        n: engine.n(),
        region: engine.region(k)?,
    })
}

/// Same region, recomputing `q_k` by sorting at every critical direction.
/// Cubic in `n`; used to cross-check [`RegionEngine`].
pub fn depth_region_bruteforce(cloud: &PointCloud, k: usize) -> Result<DepthRegionResult> {
    let pts = cloud.points2()?;
    let n = pts.len();
    if k == 0 || k > n {
        return Err(Error::LevelOutOfRange { level: k, max: n });
    }
    let kth_largest = |u: Point2| {
        let mut proj: Vec<f64> = pts.iter().map(|p| p.dot(u)).collect();
        proj.sort_by(|a, b| b.total_cmp(a));
        proj[k - 1]
    };
    let mut dirs = vec![
        Point2::new(1.0, 0.0),
        Point2::new(-1.0, 0.0),
        Point2::new(0.0, 1.0),
        Point2::new(0.0, -1.0),
    ];
    for i in 0..n {
        for j in i + 1..n {
            let d = pts[j] - pts[i];
            if d.x != 0.0 || d.y != 0.0 {
                let u = d.perp() * (1.0 / d.norm());
                dirs.push(u);
                dirs.push(-u);
            }
        }
    }
    let hs: Vec<HalfPlane> = dirs
        .into_iter()
        .filter_map(|u| HalfPlane::new(u, kth_largest(u)).ok())
        .collect();
    Ok(DepthRegionResult {
        level: k,
        n,
        region: intersect_halfplanes(&hs),
    })
}

/// Maximal depth count `k*` of a planar sample.
pub fn max_depth(cloud: &PointCloud) -> Result<usize> {
    Ok(RegionEngine::new(cloud)?.max_depth().0)
}

/// Set of deepest points and its barycenter.
pub fn tukey_median(cloud: &PointCloud) -> Result<TukeyMedian> {
    let engine = RegionEngine::new(cloud)?;
    let (level, set) = engine.max_depth();
    Ok(TukeyMedian {
        median: region_barycenter(&set)?,
        set,
        level,
        n: engine.n(),
    })
}

/// Nested depth regions for ascending levels in `[1, k*]`.
pub fn depth_contours(cloud: &PointCloud, levels: &[usize]) -> Result<Vec<DepthRegionResult>> {
    let engine = RegionEngine::new(cloud)?;
    let (k_star, _) = engine.max_depth();
    if levels.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("contour levels must be ascending"));
    }
    levels
        .iter()
        .map(|&k| {
            if k == 0 || k > k_star {
                return Err(Error::LevelOutOfRange { level: k, max: k_star });
            }
            Ok(DepthRegionResult {
                level: k,
                n: engine.n(),
                region: engine.region(k)?,
            })
        })
        .collect()
}

/// Interval of deepest points of a univariate sample.
pub fn median_interval_1d(cloud: &PointCloud) -> Result<(f64, f64)> {
    cloud.require_dim(1)?;
    let mut xs = cloud.coords().to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    // (n+1)/2-th and (n/2+1)-th order statistics, 1-based
    Ok((xs[n.div_ceil(2) - 1], xs[n / 2]))
}
