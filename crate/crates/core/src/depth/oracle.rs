//! Brute-force depth for verification: closed counts evaluated at every
//! critical direction and at the bisector of each pair of neighbouring
//! critical directions. Quadratic in `n`.

use std::f64::consts::{FRAC_PI_2, TAU};

use super::{DepthValue, PointCloud};
use crate::error::{Error, Result};

pub const ORACLE_MAX_N: usize = 500;

pub fn depth_oracle(cloud: &PointCloud, z: &[f64]) -> Result<DepthValue> {
    let n = cloud.len();
    if n > ORACLE_MAX_N {
        return Err(Error::SizeGuard { n, max: ORACLE_MAX_N });
    }
    if z.len() != cloud.dim() {
        return Err(Error::DimensionMismatch {
            expected: cloud.dim(),
            found: z.len(),
        });
    }
    let count = match cloud.dim() {
        1 => {
            let right = cloud.iter().filter(|p| p[0] - z[0] >= 0.0).count();
            let left = cloud.iter().filter(|p| z[0] - p[0] >= 0.0).count();
            right.min(left)
        }
        2 => planar(cloud, z[0], z[1]),
        d => {
            return Err(Error::DimensionMismatch { expected: 2, found: d });
        }
    };
    Ok(DepthValue { count, n })
}

fn planar(cloud: &PointCloud, zx: f64, zy: f64) -> usize {
    let diffs: Vec<(f64, f64)> = cloud.iter().map(|p| (p[0] - zx, p[1] - zy)).collect();
    let closed = |ux: f64, uy: f64| diffs.iter().filter(|(dx, dy)| dx * ux + dy * uy >= 0.0).count();

    let mut best = diffs.len();
    let mut angles = Vec::with_capacity(2 * diffs.len());
    for &(dx, dy) in &diffs {
        if dx == 0.0 && dy == 0.0 {
            continue;
        }
        // both normals of the line through z and the point
        best = best.min(closed(-dy, dx)).min(closed(dy, -dx));
        let a = dy.atan2(dx);
        angles.push((a + FRAC_PI_2).rem_euclid(TAU));
        angles.push((a - FRAC_PI_2).rem_euclid(TAU));
    }
    angles.sort_by(f64::total_cmp);
    for (i, &a) in angles.iter().enumerate() {
        let b = if i + 1 < angles.len() { angles[i + 1] } else { angles[0] + TAU };
        let mid = 0.5 * (a + b);
        best = best.min(closed(mid.cos(), mid.sin()));
    }
    best
}
