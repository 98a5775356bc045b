use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, ExperimentKind, ExperimentOutput, Harness, Report, Row, RunOptions};
use crate::contamination::replaced_count;
use crate::depth::{PointCloud, RegionEngine};
use crate::error::{Error, Result};
use crate::geom::{region_diameter, ConvexRegion, RegionKind};
use crate::models::sample_elliptical;
use crate::stats::{loglog_fit, mean, median, std_error, LinearFit};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: usize,
    pub mean_diameter: f64,
    pub std_error: f64,
    /// Mean of `sqrt(n) * diameter`.
    pub mean_scaled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub dim: usize,
    pub epsilon_exponent: Option<f64>,
    pub table: Vec<ScalingRow>,
    pub fit: LinearFit,
    /// Set when the fit explains less than 90% of the variance.
    pub inconclusive: bool,
}

/// Length of `{z : depth count >= k}` for a univariate sample.
fn level_length_1d(cloud: &PointCloud, k: usize) -> f64 {
    let mut xs = cloud.coords().to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    xs[n - k] - xs[k - 1]
}

pub(super) fn diameter_scaling(h: &Harness) -> Result<ExperimentOutput> {
    let cfg = h.cfg;
    let dim = cfg.model.dim();
    if dim > 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: dim });
    }
    let exponent = cfg.params.epsilon_exponent;
    let mut rows = Vec::new();
    let mut table = Vec::new();
    for &n in &cfg.n_grid {
        let allowance = exponent.map_or(0, |a| replaced_count((n as f64).powf(-a), n));
        let diams = h.replicate(n, cfg.reps, |_, seed| {
            let x = sample_elliptical(&cfg.model, n, seed)?;
            if dim == 1 {
                let k = n.div_ceil(2).saturating_sub(allowance).max(1);
                return Ok(level_length_1d(&x, k));
            }
            let engine = RegionEngine::new(&x)?;
            let (k_star, top) = engine.max_depth();
            if allowance == 0 {
                return Ok(region_diameter(&top));
            }
            let k = k_star.saturating_sub(allowance).max(1);
            Ok(region_diameter(&engine.region(k)?))
        })?;
        for (r, d) in diams.iter().enumerate() {
            rows.push(Row::rep(n, r, None, "diameter", *d));
        }
        let scaled: Vec<f64> = diams.iter().map(|d| d * (n as f64).sqrt()).collect();
        let row = ScalingRow {
            n,
            mean_diameter: mean(&diams),
            std_error: std_error(&diams),
            mean_scaled: mean(&scaled),
        };
        rows.push(Row::aggregate(n, None, "mean_diameter", row.mean_diameter));
        rows.push(Row::aggregate(n, None, "std_error", row.std_error));
        rows.push(Row::aggregate(n, None, "mean_scaled_diameter", row.mean_scaled));
        table.push(row);
    }
    let ns: Vec<f64> = table.iter().map(|r| r.n as f64).collect();
    let ds: Vec<f64> = table.iter().map(|r| r.mean_diameter).collect();
    let fit = loglog_fit(&ns, &ds)?;
    Ok(ExperimentOutput {
        report: Report::DiameterScaling(ScalingReport {
            dim,
            epsilon_exponent: exponent,
            table,
            inconclusive: fit.r_squared < 0.9,
            fit,
        }),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundCell {
    pub n: usize,
    pub epsilons: Vec<f64>,
    pub mean_diameter: Vec<f64>,
    pub mean_ratio: Vec<f64>,
    /// Replications where the level `k* - ceil(eps n)` falls below 1.
    pub sentinel_count: Vec<usize>,
    pub median_minkowski_c: Vec<f64>,
    /// Fraction of replications with diameters nondecreasing in `eps`.
    pub nested_fraction: f64,
    /// Fraction of replications with `min_eps diam / eps >= ratio_threshold`.
    pub ratio_pass_fraction: f64,
    pub median_min_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundReport {
    pub ratio_threshold: f64,
    pub cells: Vec<LowerBoundCell>,
}

/// Geometric grid of `points` values from `8 ln n / n` to `n^(-1/2)`,
/// whichever order the two endpoints come in.
pub fn default_epsilon_grid(n: usize, points: usize) -> Vec<f64> {
    let a = 8.0 * (n as f64).ln() / n as f64;
    let b = 1.0 / (n as f64).sqrt();
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    if points <= 1 {
        return vec![lo];
    }
    (0..points)
        .map(|i| lo * (hi / lo).powf(i as f64 / (points - 1) as f64))
        .collect()
}

/// Largest `c = 2^-k` (`k >= 0`) with `inner + B(0, c eps)` inside `outer`,
/// or 0 if none.
pub fn minkowski_c(inner: &ConvexRegion, outer: &ConvexRegion, eps: f64) -> f64 {
    if outer.kind() != RegionKind::Polygon || inner.is_empty() {
        return 0.0;
    }
    let slack = outer
        .facets()
        .iter()
        .map(|f| f.offset() - inner.support(f.normal()))
        .fold(f64::INFINITY, f64::min);
    let c = slack / eps;
    if !(c > 0.0) {
        return 0.0;
    }
    let k = (-c.log2()).ceil().max(0.0);
    let mut v = 2f64.powf(-k);
    // guard against log2 rounding
    while v > c {
        v /= 2.0;
    }
    v
}

struct LowerBoundRep {
    diam: Vec<Option<f64>>,
    c: Vec<f64>,
}

pub(super) fn lower_bound(h: &Harness) -> Result<ExperimentOutput> {
    let cfg = h.cfg;
    cfg.require_dim(2)?;
    let threshold = cfg.params.ratio_threshold.unwrap_or(0.1);
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for &n in &cfg.n_grid {
        let mut eps = match &cfg.params.epsilon_grid {
            Some(g) => g.clone(),
            None => default_epsilon_grid(n, cfg.params.epsilon_points.unwrap_or(8)),
        };
        if eps.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::invalid("epsilon grid values must be positive"));
        }
        eps.sort_by(f64::total_cmp);
        let reps = h.replicate(n, cfg.reps, |_, seed| {
            let x = sample_elliptical(&cfg.model, n, seed)?;
            let engine = RegionEngine::new(&x)?;
            let (k_star, top) = engine.max_depth();
            let mut cache: Vec<(usize, ConvexRegion)> = Vec::new();
            let mut diam = Vec::with_capacity(eps.len());
            let mut c = Vec::with_capacity(eps.len());
            for &e in &eps {
                let drop = (e * n as f64 - 1e-9).ceil() as usize;
                if drop >= k_star {
                    diam.push(None);
                    c.push(0.0);
                    continue;
                }
                let k = k_star - drop;
                if cache.last().map(|(lvl, _)| *lvl) != Some(k) {
                    cache.push((k, engine.region(k)?));
                }
                let region = &cache.last().expect("cached").1;
                diam.push(Some(region_diameter(region)));
                c.push(minkowski_c(&top, region, e));
            }
            Ok(LowerBoundRep { diam, c })
        })?;

        let mut nested = 0usize;
        let mut passes = 0usize;
        let mut min_ratios = Vec::new();
        for (r, rep) in reps.iter().enumerate() {
            let ds: Vec<f64> = rep.diam.iter().flatten().copied().collect();
            if ds.windows(2).all(|w| w[0] <= w[1]) {
                nested += 1;
            }
            let min_ratio = rep
                .diam
                .iter()
                .zip(&eps)
                .filter_map(|(d, e)| d.map(|d| d / e))
                .fold(f64::INFINITY, f64::min);
            if min_ratio >= threshold {
                passes += 1;
            }
            if min_ratio.is_finite() {
                min_ratios.push(min_ratio);
            }
            for (i, &e) in eps.iter().enumerate() {
                match rep.diam[i] {
                    Some(d) => {
                        rows.push(Row::rep(n, r, Some(e), "diameter", d));
                        rows.push(Row::rep(n, r, Some(e), "ratio", d / e));
                        rows.push(Row::rep(n, r, Some(e), "minkowski_c", rep.c[i]));
                    }
                    None => rows.push(Row::rep(n, r, Some(e), "full_plane", 1.0)),
                }
            }
        }
        let mut cell = LowerBoundCell {
            n,
            epsilons: eps.clone(),
            mean_diameter: Vec::new(),
            mean_ratio: Vec::new(),
            sentinel_count: Vec::new(),
            median_minkowski_c: Vec::new(),
            nested_fraction: nested as f64 / reps.len() as f64,
            ratio_pass_fraction: passes as f64 / reps.len() as f64,
            median_min_ratio: if min_ratios.is_empty() { f64::NAN } else { median(&min_ratios) },
        };
        for (i, &e) in eps.iter().enumerate() {
            let ds: Vec<f64> = reps.iter().filter_map(|r| r.diam[i]).collect();
            let cs: Vec<f64> = reps.iter().filter(|r| r.diam[i].is_some()).map(|r| r.c[i]).collect();
            let md = if ds.is_empty() { f64::NAN } else { mean(&ds) };
            cell.mean_diameter.push(md);
            cell.mean_ratio.push(md / e);
            cell.sentinel_count.push(reps.len() - ds.len());
            cell.median_minkowski_c.push(if cs.is_empty() { 0.0 } else { median(&cs) });
            if !ds.is_empty() {
                rows.push(Row::aggregate(n, Some(e), "mean_diameter", md));
                rows.push(Row::aggregate(n, Some(e), "median_minkowski_c", median(&cs)));
            }
            rows.push(Row::aggregate(n, Some(e), "full_plane_count", (reps.len() - ds.len()) as f64));
        }
        rows.push(Row::aggregate(n, None, "nested_fraction", cell.nested_fraction));
        rows.push(Row::aggregate(n, Some(threshold), "ratio_pass_fraction", cell.ratio_pass_fraction));
        cells.push(cell);
    }
    Ok(ExperimentOutput {
        report: Report::LowerBound(LowerBoundReport {
            ratio_threshold: threshold,
            cells,
        }),
        rows,
    })
}

pub fn run_diameter_scaling(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<(ScalingReport, Vec<Row>)> {
    match super::run_kind(cfg, opts, ExperimentKind::DiameterScaling)? {
        (Report::DiameterScaling(r), rows) => Ok((r, rows)),
        _ => unreachable!("kind checked"),
    }
}

pub fn run_lower_bound_check(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<(LowerBoundReport, Vec<Row>)> {
    match super::run_kind(cfg, opts, ExperimentKind::LowerBound)? {
        (Report::LowerBound(r), rows) => Ok((r, rows)),
        _ => unreachable!("kind checked"),
    }
}
