//! Empirical halfspace depth: exact in one and two dimensions, by sampled
//! directions in higher dimension, together with depth regions, Tukey
//! medians and a Stahel-Donoho type location estimate.

mod angular;
mod oracle;
mod region;
mod stahel;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point2;
use crate::rng::{seeded, NormalStream};

pub use oracle::{depth_oracle, ORACLE_MAX_N};
pub use region::{
    depth_contours, depth_region, depth_region_bruteforce, max_depth, median_interval_1d,
    tukey_median, DepthRegionResult, RegionEngine, TukeyMedian,
};
pub use stahel::{stahel_donoho_approx, stahel_donoho_with_directions};

/// An ordered sample of `n >= 1` finite points in `R^dim`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        if coords.is_empty() || coords.len() % dim != 0 {
            return Err(Error::invalid(format!(
                "{} coordinates do not form points of dimension {dim}",
                coords.len()
            )));
        }
        if let Some(bad) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::invalid(format!("non-finite coordinate in point {}", bad / dim)));
        }
        Ok(PointCloud { dim, coords })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if let Some(r) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: r.len(),
            });
        }
        PointCloud::new(dim, rows.concat())
    }

    pub fn from_points2(points: &[Point2]) -> Result<Self> {
        PointCloud::new(2, points.iter().flat_map(|p| [p.x, p.y]).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    /// Always false; kept for the `len`/`is_empty` convention.
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn require_dim(&self, dim: usize) -> Result<()> {
        if self.dim != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: self.dim,
            });
        }
        Ok(())
    }

    /// Points of a planar cloud.
    pub fn points2(&self) -> Result<Vec<Point2>> {
        self.require_dim(2)?;
        Ok(self.iter().map(|p| Point2::new(p[0], p[1])).collect())
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for p in self.iter() {
            for (acc, x) in m.iter_mut().zip(p) {
                *acc += x;
            }
        }
        let n = self.len() as f64;
        m.iter_mut().for_each(|x| *x /= n);
        m
    }

    /// Applies `f` to each point.
    pub fn map_points(&self, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> Result<Self> {
        let rows: Vec<Vec<f64>> = self.iter().map(|p| f(p)).collect();
        PointCloud::from_rows(&rows)
    }

    pub(crate) fn set_point(&mut self, i: usize, p: &[f64]) {
        self.coords[i * self.dim..(i + 1) * self.dim].copy_from_slice(p);
    }
}

/// Depth stored as an exact count of sample points out of `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DepthValue {
    pub count: usize,
    pub n: usize,
}

impl DepthValue {
    pub fn value(&self) -> f64 {
        self.count as f64 / self.n as f64
    }
}

#[derive(Serialize, Deserialize)]
struct DepthValueRepr {
    count: usize,
    n: usize,
    depth: f64,
}

impl Serialize for DepthValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DepthValueRepr {
            count: self.count,
            n: self.n,
            depth: self.value(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DepthValue {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = DepthValueRepr::deserialize(d)?;
        Ok(DepthValue { count: r.count, n: r.n })
    }
}

/// Univariate depth `min(#{X <= z}, #{X >= z})`.
pub fn depth_1d(cloud: &PointCloud, z: f64) -> Result<DepthValue> {
    cloud.require_dim(1)?;
    let below = cloud.coords.iter().filter(|&&x| x <= z).count();
    let above = cloud.coords.iter().filter(|&&x| x >= z).count();
    Ok(DepthValue {
        count: below.min(above),
        n: cloud.len(),
    })
}

/// Exact planar halfspace depth by an angular sweep around `z`.
pub fn depth_exact_2d(cloud: &PointCloud, z: Point2) -> Result<DepthValue> {
    let pts = cloud.points2()?;
    Ok(depth_exact_points(&pts, z))
}

pub(crate) fn depth_exact_points(points: &[Point2], z: Point2) -> DepthValue {
    let sweep = angular::AngularSweep::new(z, points, 0..points.len());
    DepthValue {
        count: sweep.min_closed_count(),
        n: points.len(),
    }
}

/// Depth evaluated over `n_dirs` random directions plus the directions
/// towards every sample point; never below the exact depth.
pub fn depth_approx(cloud: &PointCloud, z: &[f64], n_dirs: usize, seed: u64) -> Result<DepthValue> {
    if z.len() != cloud.dim {
        return Err(Error::DimensionMismatch {
            expected: cloud.dim,
            found: z.len(),
        });
    }
    if n_dirs == 0 {
        return Err(Error::invalid("n_dirs must be at least 1"));
    }
    let diffs: Vec<Vec<f64>> = cloud
        .iter()
        .map(|p| p.iter().zip(z).map(|(a, b)| a - b).collect())
        .collect();
    let closed_count = |u: &[f64]| {
        diffs
            .iter()
            .filter(|d| d.iter().zip(u).map(|(a, b)| a * b).sum::<f64>() >= 0.0)
            .count()
    };

    let mut normals = NormalStream::new(seeded(seed));
    let mut best = cloud.len();
    for _ in 0..n_dirs {
        best = best.min(closed_count(&normals.unit_vector(cloud.dim)));
    }
    for d in &diffs {
        let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            let u: Vec<f64> = d.iter().map(|x| x / norm).collect();
            best = best.min(closed_count(&u));
        }
    }
    Ok(DepthValue {
        count: best,
        n: cloud.len(),
    })
}
