use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, ExperimentKind, ExperimentOutput, Harness, Report, Row, RunOptions};
use crate::contamination::{contaminate, replaced_count, ContaminationPlan, Strategy};
use crate::depth::{depth_exact_2d, tukey_median, PointCloud, RegionEngine};
use crate::error::{Error, Result};
use crate::geom::Point2;
use crate::models::{affine_apply, matrix_power, sample_elliptical, shape_summary, EllipticalModel};
use crate::rng::mix_seed;
use crate::stats::{angle_histogram, chi_square_uniform, mean, median, quantile, std_error, ChiSquareTest};

fn center(model: &EllipticalModel) -> Point2 {
    Point2::new(model.mu[0], model.mu[1])
}

fn mean_point(cloud: &PointCloud) -> Point2 {
    let m = cloud.mean();
    Point2::new(m[0], m[1])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContaminationCell {
    pub n: usize,
    pub radius: Option<f64>,
    pub replaced: usize,
    pub median_tukey_error: f64,
    pub median_mean_error: f64,
    pub tukey_error_quantile: f64,
    pub mean_error_quantile: f64,
    /// Fraction of replications with the contaminated median inside the
    /// clean region of level `k* - 2 floor(eps n)`.
    pub containment_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContaminationReport {
    pub epsilon: f64,
    pub quantile_level: f64,
    pub cells: Vec<ContaminationCell>,
}

fn with_radius(plan: &ContaminationPlan, radius: Option<f64>) -> ContaminationPlan {
    let mut p = plan.clone();
    if let Some(r) = radius {
        match &mut p.strategy {
            Strategy::FarCluster { radius, .. } | Strategy::Smear { radius } => *radius = r,
            Strategy::Replay { .. } => {}
        }
    }
    p
}

struct ContaminationRep {
    tukey: f64,
    mean: f64,
    contained: bool,
}

/// Whether `z` has clean depth count at least `level`, by exact count or,
/// for points within rounding of the region boundary, by membership.
fn in_clean_region(engine: &RegionEngine, clean: &PointCloud, z: Point2, level: usize) -> Result<bool> {
    if level == 0 || depth_exact_2d(clean, z)?.count >= level {
        return Ok(true);
    }
    Ok(engine.region(level)?.contains(z, 1e-9))
}

pub(super) fn contamination_error(h: &Harness) -> Result<ExperimentOutput> {
    let cfg = h.cfg;
    cfg.require_dim(2)?;
    let plan = cfg
        .plan
        .as_ref()
        .ok_or_else(|| Error::invalid("contamination_error needs a plan"))?;
    plan.validate(2)?;
    let radii: Vec<Option<f64>> = match (&cfg.params.radii, &plan.strategy) {
        (Some(rs), Strategy::FarCluster { .. } | Strategy::Smear { .. }) => rs.iter().map(|&r| Some(r)).collect(),
        (_, Strategy::FarCluster { radius, .. } | Strategy::Smear { radius }) => vec![Some(*radius)],
        (_, Strategy::Replay { .. }) => vec![None],
    };
    let mu = center(&cfg.model);
    let q = cfg.quantile_level();
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for &n in &cfg.n_grid {
        let m = replaced_count(plan.epsilon, n);
        let reps = h.replicate(n, cfg.reps, |_, seed| {
            let x = sample_elliptical(&cfg.model, n, seed)?;
            let engine = RegionEngine::new(&x)?;
            let (k_star, _) = engine.max_depth();
            let level = k_star.saturating_sub(2 * m);
            radii
                .iter()
                .enumerate()
                .map(|(j, &r)| {
                    let y = contaminate(&x, &with_radius(plan, r), mix_seed(seed, j as u64 + 1))?;
                    let med = tukey_median(&y)?.median;
                    Ok(ContaminationRep {
                        tukey: med.dist(mu),
                        mean: mean_point(&y).dist(mu),
                        contained: in_clean_region(&engine, &x, med, level)?,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })?;
        for (j, &r) in radii.iter().enumerate() {
            let tk: Vec<f64> = reps.iter().map(|v| v[j].tukey).collect();
            let mn: Vec<f64> = reps.iter().map(|v| v[j].mean).collect();
            let contained = reps.iter().filter(|v| v[j].contained).count();
            for (rep, v) in reps.iter().enumerate() {
                rows.push(Row::rep(n, rep, r, "tukey_error", v[j].tukey));
                rows.push(Row::rep(n, rep, r, "mean_error", v[j].mean));
                rows.push(Row::rep(n, rep, r, "contained", if v[j].contained { 1.0 } else { 0.0 }));
            }
            let cell = ContaminationCell {
                n,
                radius: r,
                replaced: m,
                median_tukey_error: median(&tk),
                median_mean_error: median(&mn),
                tukey_error_quantile: quantile(&tk, q),
                mean_error_quantile: quantile(&mn, q),
                containment_rate: contained as f64 / reps.len() as f64,
            };
            rows.push(Row::aggregate(n, r, "median_tukey_error", cell.median_tukey_error));
            rows.push(Row::aggregate(n, r, "median_mean_error", cell.median_mean_error));
            rows.push(Row::aggregate(n, r, "tukey_error_quantile", cell.tukey_error_quantile));
            rows.push(Row::aggregate(n, r, "mean_error_quantile", cell.mean_error_quantile));
            rows.push(Row::aggregate(n, r, "containment_rate", cell.containment_rate));
            cells.push(cell);
        }
    }
    Ok(ExperimentOutput {
        report: Report::ContaminationError(ContaminationReport {
            epsilon: plan.epsilon,
            quantile_level: q,
            cells,
        }),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformityCell {
    pub n: usize,
    pub used: usize,
    /// Replications whose standardized error vanished.
    pub excluded: usize,
    pub counts: Vec<u64>,
    pub chi_square: ChiSquareTest,
    /// Mean of `|S^(1/2) U|` with `U` the standardized error direction.
    pub mean_norm: f64,
    pub mean_norm_se: f64,
    /// `sqrt(tr(S) / 2)`.
    pub norm_upper_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformityReport {
    pub cells: Vec<UniformityCell>,
}

pub(super) fn direction_uniformity(h: &Harness) -> Result<ExperimentOutput> {
    let cfg = h.cfg;
    cfg.require_dim(2)?;
    let bins = cfg.params.bins.unwrap_or(12);
    if bins < 2 {
        return Err(Error::invalid("at least two bins are needed"));
    }
    let inv_root = matrix_power(&cfg.model.shape, -0.5)?;
    let root = cfg.model.sqrt_shape()?;
    let summary = shape_summary(&cfg.model.shape)?;
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for &n in &cfg.n_grid {
        let reps = h.replicate(n, cfg.reps, |_, seed| {
            let x = sample_elliptical(&cfg.model, n, seed)?;
            let med = tukey_median(&x)?.median;
            let e = [med.x - cfg.model.mu[0], med.y - cfg.model.mu[1]];
            let w = affine_apply(&[0.0, 0.0], &inv_root, &e);
            let len = w[0].hypot(w[1]);
            if len == 0.0 {
                return Ok(None);
            }
            let u = [w[0] / len, w[1] / len];
            let su = affine_apply(&[0.0, 0.0], &root, &u);
            Ok(Some((w[1].atan2(w[0]), su[0].hypot(su[1]))))
        })?;
        let kept: Vec<(f64, f64)> = reps.iter().flatten().copied().collect();
        for (r, v) in reps.iter().enumerate() {
            if let Some((a, norm)) = v {
                rows.push(Row::rep(n, r, None, "angle", *a));
                rows.push(Row::rep(n, r, None, "norm", *norm));
            } else {
                rows.push(Row::rep(n, r, None, "excluded", 1.0));
            }
        }
        if kept.is_empty() {
            return Err(Error::invalid("every replication had a vanishing error"));
        }
        let counts = angle_histogram(kept.iter().map(|v| v.0), bins);
        let chi = chi_square_uniform(&counts)?;
        let norms: Vec<f64> = kept.iter().map(|v| v.1).collect();
        let cell = UniformityCell {
            n,
            used: kept.len(),
            excluded: reps.len() - kept.len(),
            counts,
            chi_square: chi,
            mean_norm: mean(&norms),
            mean_norm_se: std_error(&norms),
            norm_upper_bound: (summary.trace / 2.0).sqrt(),
        };
        rows.push(Row::aggregate(n, None, "chi_square", chi.statistic));
        rows.push(Row::aggregate(n, None, "p_value", chi.p_value));
        rows.push(Row::aggregate(n, None, "mean_norm", cell.mean_norm));
        rows.push(Row::aggregate(n, None, "mean_norm_se", cell.mean_norm_se));
        rows.push(Row::aggregate(n, None, "excluded", cell.excluded as f64));
        cells.push(cell);
    }
    Ok(ExperimentOutput {
        report: Report::DirectionUniformity(UniformityReport { cells }),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRatioCell {
    pub n: usize,
    pub lambda: f64,
    pub rms_identity: f64,
    pub rms_anisotropic: f64,
    pub ratio: f64,
    /// `sqrt(tr(I) / tr(diag(1, lambda)))`.
    pub trace_target: f64,
    pub identity_error_quantile: f64,
    pub anisotropic_error_quantile: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRatioReport {
    pub quantile_level: f64,
    pub cells: Vec<RankRatioCell>,
}

pub(super) fn effective_rank_ratio(h: &Harness) -> Result<ExperimentOutput> {
    let cfg = h.cfg;
    cfg.require_dim(2)?;
    let lambda = cfg.params.lambda.unwrap_or(0.01);
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid("lambda must be positive"));
    }
    let mut iso = cfg.model.clone();
    iso.shape = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    let mut aniso = cfg.model.clone();
    aniso.shape = vec![vec![1.0, 0.0], vec![0.0, lambda]];
    let mu = center(&cfg.model);
    let q = cfg.quantile_level();
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for &n in &cfg.n_grid {
        let reps = h.replicate(n, cfg.reps, |_, seed| {
            let a = tukey_median(&sample_elliptical(&iso, n, mix_seed(seed, 1))?)?.median;
            let b = tukey_median(&sample_elliptical(&aniso, n, mix_seed(seed, 2))?)?.median;
            Ok((a.dist(mu), b.dist(mu)))
        })?;
        let e1: Vec<f64> = reps.iter().map(|v| v.0).collect();
        let e2: Vec<f64> = reps.iter().map(|v| v.1).collect();
        for (r, v) in reps.iter().enumerate() {
            rows.push(Row::rep(n, r, Some(1.0), "error", v.0));
            rows.push(Row::rep(n, r, Some(lambda), "error", v.1));
        }
        let rms = |e: &[f64]| (e.iter().map(|x| x * x).sum::<f64>() / e.len() as f64).sqrt();
        let cell = RankRatioCell {
            n,
            lambda,
            rms_identity: rms(&e1),
            rms_anisotropic: rms(&e2),
            ratio: rms(&e1) / rms(&e2),
            trace_target: (2.0 / (1.0 + lambda)).sqrt(),
            identity_error_quantile: quantile(&e1, q),
            anisotropic_error_quantile: quantile(&e2, q),
        };
        rows.push(Row::aggregate(n, Some(1.0), "rms_error", cell.rms_identity));
        rows.push(Row::aggregate(n, Some(lambda), "rms_error", cell.rms_anisotropic));
        rows.push(Row::aggregate(n, Some(lambda), "rms_ratio", cell.ratio));
        cells.push(cell);
    }
    Ok(ExperimentOutput {
        report: Report::EffectiveRankRatio(RankRatioReport {
            quantile_level: q,
            cells,
        }),
        rows,
    })
}

pub fn run_contamination_error(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
) -> Result<(ContaminationReport, Vec<Row>)> {
    match super::run_kind(cfg, opts, ExperimentKind::ContaminationError)? {
        (Report::ContaminationError(r), rows) => Ok((r, rows)),
        _ => unreachable!("kind checked"),
    }
}

pub fn run_direction_uniformity(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<(UniformityReport, Vec<Row>)> {
    match super::run_kind(cfg, opts, ExperimentKind::DirectionUniformity)? {
        (Report::DirectionUniformity(r), rows) => Ok((r, rows)),
        _ => unreachable!("kind checked"),
    }
}

pub fn run_effective_rank_ratio(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<(RankRatioReport, Vec<Row>)> {
    match super::run_kind(cfg, opts, ExperimentKind::EffectiveRankRatio)? {
        (Report::EffectiveRankRatio(r), rows) => Ok((r, rows)),
        _ => unreachable!("kind checked"),
    }
}
