//! Weighted-mean location estimate from projection outlyingness.

use super::PointCloud;
use crate::error::{Error, Result};
use crate::rng::{seeded, NormalStream};

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len();
    if m % 2 == 1 {
        values[m / 2]
    } else {
        0.5 * (values[m / 2 - 1] + values[m / 2])
    }
}

/// Stahel-Donoho type estimate over `n_dirs` uniformly drawn directions.
///
/// Outlyingness is the largest standardized deviation
/// `|<X_i,u> - med| / MAD` over the directions; points are averaged with
/// weights `min(1, (c/O_i)^2)` where `c` is the median outlyingness.
/// Directions with zero MAD are skipped.
pub fn stahel_donoho_approx(cloud: &PointCloud, n_dirs: usize, seed: u64) -> Result<Vec<f64>> {
    if n_dirs == 0 {
        return Err(Error::invalid("n_dirs must be at least 1"));
    }
    let mut normals = NormalStream::new(seeded(seed));
    let dirs: Vec<Vec<f64>> = (0..n_dirs).map(|_| normals.unit_vector(cloud.dim())).collect();
    stahel_donoho_with_directions(cloud, &dirs)
}

/// Same estimate with caller-supplied directions.
pub fn stahel_donoho_with_directions(cloud: &PointCloud, dirs: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = cloud.len();
    if n < 2 {
        return Err(Error::invalid("at least two points are needed"));
    }
    if dirs.is_empty() {
        return Err(Error::invalid("at least one direction is needed"));
    }
    let mut out = vec![0.0f64; n];
    let mut used = 0;
    let mut proj = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    for u in dirs {
        if u.len() != cloud.dim() {
            return Err(Error::DimensionMismatch {
                expected: cloud.dim(),
                found: u.len(),
            });
        }
        for (p, x) in proj.iter_mut().zip(cloud.iter()) {
            *p = x.iter().zip(u).map(|(a, b)| a * b).sum();
        }
        scratch.copy_from_slice(&proj);
        let med = median(&mut scratch);
        for (s, p) in scratch.iter_mut().zip(&proj) {
            *s = (p - med).abs();
        }
        let mad = median(&mut scratch);
        if mad <= 0.0 {
            continue;
        }
        used += 1;
        for (o, p) in out.iter_mut().zip(&proj) {
            *o = o.max((p - med).abs() / mad);
        }
    }
    if used == 0 {
        return Err(Error::AllDirectionsDegenerate);
    }

    let c = median(&mut out.clone());
    let weights: Vec<f64> = out
        .iter()
        .map(|&o| if o <= c { 1.0 } else { (c / o).powi(2) })
        .collect();
    let total: f64 = weights.iter().sum();
    let mut est = vec![0.0; cloud.dim()];
    for (w, x) in weights.iter().zip(cloud.iter()) {
        for (e, xi) in est.iter_mut().zip(x) {
            *e += w * xi;
        }
    }
    est.iter_mut().for_each(|e| *e /= total);
    Ok(est)
}
