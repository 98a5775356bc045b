use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, ExperimentKind, ExperimentOutput, Harness, Report, Row, RunOptions};
use crate::depth::{depth_exact_2d, RegionEngine};
use crate::error::{Error, Result};
use crate::geom::Point2;
use crate::limit::{evaluate_w, BridgeSampler, DirectionGrid, Lattice, DEFAULT_DIRECTIONS, DRIFT};
use crate::models::{sample_elliptical, Radial};
use crate::rng::{mix_seed, seeded};
use crate::stats::{ks_two_sample, mean, median, ols, LinearFit};

/// Pairs are drawn in the bounding box of the region whose depth is this
/// far below the maximum.
pub const PAIR_BOX_DEPTH_DROP: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusCell {
    pub n: usize,
    pub deltas: Vec<f64>,
    pub mean_sup: Vec<f64>,
    pub median_sup: Vec<f64>,
    /// `delta / sqrt(2 pi)`.
    pub leading_term: Vec<f64>,
    /// Fit of `mean_sup - delta / sqrt(2 pi)` on `delta` over positive deltas.
    pub remainder_fit: Option<LinearFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusReport {
    pub pairs: usize,
    pub cells: Vec<ModulusCell>,
}

pub(super) fn depth_modulus(h: &Harness) -> Result<ExperimentOutput> {
    let cfg = h.cfg;
    cfg.require_dim(2)?;
    let mut deltas = cfg
        .params
        .delta_grid
        .clone()
        .unwrap_or_else(|| vec![0.0, 0.025, 0.05, 0.1, 0.2]);
    if deltas.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
        return Err(Error::invalid("deltas must be nonnegative"));
    }
    deltas.sort_by(f64::total_cmp);
    let pairs = cfg.params.pairs.unwrap_or(200);
    if pairs == 0 {
        return Err(Error::invalid("pairs must be at least 1"));
    }
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for &n in &cfg.n_grid {
        let sups = h.replicate(n, cfg.reps, |_, seed| {
            let x = sample_elliptical(&cfg.model, n, seed)?;
            let engine = RegionEngine::new(&x)?;
            let (k_star, _) = engine.max_depth();
            let drop = (PAIR_BOX_DEPTH_DROP * n as f64).floor() as usize;
            let level = k_star.saturating_sub(drop).max(1);
            let (lo, hi) = engine
                .region(level)?
                .bounding_box()
                .ok_or(Error::EmptyRegion)?;
            let mut rng = seeded(mix_seed(seed, 7));
            let mut sup = Vec::with_capacity(deltas.len());
            let mut running: f64 = 0.0;
            for &delta in &deltas {
                for _ in 0..pairs {
                    let z1 = Point2::new(rng.gen_range(lo.x..=hi.x), rng.gen_range(lo.y..=hi.y));
                    let z2 = z1 + Point2::from_angle(rng.gen_range(0.0..std::f64::consts::TAU)) * delta;
                    let a = depth_exact_2d(&x, z1)?.count as f64;
                    let b = depth_exact_2d(&x, z2)?.count as f64;
                    running = running.max((a - b).abs() / n as f64);
                }
                sup.push(running);
            }
            Ok(sup)
        })?;
        let mut cell = ModulusCell {
            n,
            deltas: deltas.clone(),
            mean_sup: Vec::new(),
            median_sup: Vec::new(),
            leading_term: deltas.iter().map(|d| d * DRIFT).collect(),
            remainder_fit: None,
        };
        for (i, &d) in deltas.iter().enumerate() {
            let s: Vec<f64> = sups.iter().map(|v| v[i]).collect();
            for (r, v) in s.iter().enumerate() {
                rows.push(Row::rep(n, r, Some(d), "sup_difference", *v));
            }
            cell.mean_sup.push(mean(&s));
            cell.median_sup.push(median(&s));
            rows.push(Row::aggregate(n, Some(d), "mean_sup_difference", mean(&s)));
            rows.push(Row::aggregate(n, Some(d), "leading_term", d * DRIFT));
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) = deltas
            .iter()
            .zip(&cell.mean_sup)
            .filter(|(d, _)| **d > 0.0)
            .map(|(d, s)| (*d, s - d * DRIFT))
            .unzip();
        cell.remainder_fit = ols(&xs, &ys).ok();
        cells.push(cell);
    }
    Ok(ExperimentOutput {
        report: Report::DepthModulus(ModulusReport { pairs, cells }),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakConvergenceCell {
    pub n: usize,
    /// Mean of `sqrt(n) (k* / n - 1/2)`.
    pub empirical_mean: f64,
    /// Distance to the lattice maxima of the limit field.
    pub ks_lattice: f64,
    /// Distance to the maxima over the whole plane.
    pub ks_plane: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakConvergenceReport {
    pub directions: usize,
    pub lattice: Lattice,
    pub limit_lattice_mean: f64,
    pub limit_plane_mean: f64,
    pub cells: Vec<WeakConvergenceCell>,
}

pub(super) fn weak_convergence(h: &Harness) -> Result<ExperimentOutput> {
    let cfg = h.cfg;
    cfg.require_dim(2)?;
    if cfg.model.radial != Radial::Gaussian {
        return Err(Error::invalid("weak convergence compares against the Gaussian limit"));
    }
    let m = cfg.params.directions.unwrap_or(DEFAULT_DIRECTIONS);
    let d = Lattice::default();
    let lattice = Lattice::new(
        cfg.params.lattice_radius.unwrap_or(d.radius),
        cfg.params.lattice_spacing.unwrap_or(d.spacing),
    )?;
    let sampler = BridgeSampler::new(DirectionGrid::new(m)?)?;
    // the limit arm uses sample size 0 in the seed derivation
    let limit = h.replicate(0, cfg.reps, |_, seed| {
        let g = sampler.sample(seed);
        let f = evaluate_w(sampler.grid(), &g, lattice)?;
        Ok((f.w_max, f.refined.w_max))
    })?;
    let lat: Vec<f64> = limit.iter().map(|v| v.0).collect();
    let plane: Vec<f64> = limit.iter().map(|v| v.1).collect();
    let mut rows = Vec::new();
    for (r, v) in limit.iter().enumerate() {
        rows.push(Row::rep(0, r, None, "limit_lattice_max", v.0));
        rows.push(Row::rep(0, r, None, "limit_plane_max", v.1));
    }
    let mut cells = Vec::new();
    for &n in &cfg.n_grid {
        let emp = h.replicate(n, cfg.reps, |_, seed| {
            let x = sample_elliptical(&cfg.model, n, seed)?;
            let (k_star, _) = RegionEngine::new(&x)?.max_depth();
            Ok((n as f64).sqrt() * (k_star as f64 / n as f64 - 0.5))
        })?;
        for (r, v) in emp.iter().enumerate() {
            rows.push(Row::rep(n, r, None, "scaled_max_depth", *v));
        }
        let cell = WeakConvergenceCell {
            n,
            empirical_mean: mean(&emp),
            ks_lattice: ks_two_sample(&emp, &lat),
            ks_plane: ks_two_sample(&emp, &plane),
        };
        rows.push(Row::aggregate(n, None, "ks_lattice", cell.ks_lattice));
        rows.push(Row::aggregate(n, None, "ks_plane", cell.ks_plane));
        cells.push(cell);
    }
    Ok(ExperimentOutput {
        report: Report::WeakConvergence(WeakConvergenceReport {
            directions: m,
            lattice,
            limit_lattice_mean: mean(&lat),
            limit_plane_mean: mean(&plane),
            cells,
        }),
        rows,
    })
}

pub fn run_depth_modulus(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<(ModulusReport, Vec<Row>)> {
    match super::run_kind(cfg, opts, ExperimentKind::DepthModulus)? {
        (Report::DepthModulus(r), rows) => Ok((r, rows)),
        _ => unreachable!("kind checked"),
    }
}

pub fn run_weak_convergence(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
) -> Result<(WeakConvergenceReport, Vec<Row>)> {
    match super::run_kind(cfg, opts, ExperimentKind::WeakConvergence)? {
        (Report::WeakConvergence(r), rows) => Ok((r, rows)),
        _ => unreachable!("kind checked"),
    }
}
