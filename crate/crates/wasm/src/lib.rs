//! Browser bindings. Clouds travel as JSON arrays of `[x, y]` pairs.

use depthlab::contamination::{contaminate, ContaminationPlan};
use depthlab::depth::{depth_exact_2d, PointCloud, RegionEngine};
use depthlab::geom::Point2;
use depthlab::models::{sample_elliptical, EllipticalModel, Radial};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn parse_cloud(points: &str) -> Result<PointCloud, String> {
    let rows: Vec<Vec<f64>> = serde_json::from_str(points).map_err(|e| e.to_string())?;
    let cloud = PointCloud::from_rows(&rows).map_err(|e| e.to_string())?;
    cloud.require_dim(2).map_err(|e| e.to_string())?;
    Ok(cloud)
}

fn cloud_json(cloud: &PointCloud) -> String {
    let rows: Vec<&[f64]> = cloud.iter().collect();
    serde_json::to_string(&rows).expect("finite coordinates")
}

/// Planar elliptical sample with unit variances and correlation `rho`.
pub fn sample(radial: &str, n: usize, seed: u64, rho: f64, nu: f64) -> Result<String, String> {
    let radial = match radial {
        "gaussian" => Radial::Gaussian,
        "student_t" => Radial::StudentT { nu },
        "unit_radius" => Radial::UnitRadius,
        other => return Err(format!("unknown radial law {other:?}")),
    };
    let model = EllipticalModel {
        mu: vec![0.0, 0.0],
        shape: vec![vec![1.0, rho], vec![rho, 1.0]],
        radial,
    };
    let cloud = sample_elliptical(&model, n, seed).map_err(|e| e.to_string())?;
    Ok(cloud_json(&cloud))
}

/// Up to `count` depth regions at evenly spaced levels from 1 to the
/// maximal depth, together with the Tukey median.
pub fn contours(points: &str, count: usize) -> Result<String, String> {
    let cloud = parse_cloud(points)?;
    let engine = RegionEngine::new(&cloud).map_err(|e| e.to_string())?;
    let (k_star, top) = engine.max_depth();
    let count = count.clamp(1, k_star);
    let mut levels: Vec<usize> = (0..count)
        .map(|i| 1 + (i * (k_star - 1)) / (count - 1).max(1))
        .collect();
    levels.dedup();
    let mut regions = Vec::with_capacity(levels.len());
    for &k in &levels {
        let region = if k == k_star {
            top.clone()
        } else {
            engine.region(k).map_err(|e| e.to_string())?
        };
        regions.push(json!({ "level": k, "region": region }));
    }
    let median = depthlab::geom::region_barycenter(&top).map_err(|e| e.to_string())?;
    Ok(json!({
        "n": cloud.len(),
        "max_depth": k_star,
        "median": median,
        "regions": regions,
    })
    .to_string())
}

/// Moves `floor(epsilon n)` random points to the centroid plus
/// `radius` in direction `angle`.
pub fn contaminate_far(points: &str, epsilon: f64, angle: f64, radius: f64, seed: u64) -> Result<String, String> {
    let cloud = parse_cloud(points)?;
    let plan = ContaminationPlan::far_cluster(epsilon, vec![angle.cos(), angle.sin()], radius);
    let dirty = contaminate(&cloud, &plan, seed).map_err(|e| e.to_string())?;
    Ok(cloud_json(&dirty))
}

pub fn depth(points: &str, x: f64, y: f64) -> Result<String, String> {
    let cloud = parse_cloud(points)?;
    let d = depth_exact_2d(&cloud, Point2::new(x, y)).map_err(|e| e.to_string())?;
    serde_json::to_string(&d).map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = sampleCloud)]
pub fn sample_cloud_js(radial: &str, n: usize, seed: u32, rho: f64, nu: f64) -> Result<String, JsError> {
    sample(radial, n, u64::from(seed), rho, nu).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = depthContours)]
pub fn contours_js(points: &str, count: usize) -> Result<String, JsError> {
    contours(points, count).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = contaminateCloud)]
pub fn contaminate_js(points: &str, epsilon: f64, angle: f64, radius: f64, seed: u32) -> Result<String, JsError> {
    contaminate_far(points, epsilon, angle, radius, u64::from(seed)).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = depthAt)]
pub fn depth_js(points: &str, x: f64, y: f64) -> Result<String, JsError> {
    depth(points, x, y).map_err(|e| JsError::new(&e))
}
