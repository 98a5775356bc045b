//! Monte Carlo harness. Every experiment is a pure function of its config:
//! replication `r` at sample size `n` draws from the stream seeded by
//! `mix_seed(mix_seed(seed, n), r)`, and results are collected in
//! replication order whatever the number of worker threads.

mod limit_runs;
mod location;
mod scaling;

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::contamination::ContaminationPlan;
use crate::error::{Error, Result};
use crate::models::{EllipticalModel, Radial};
use crate::rng::mix_seed;

pub use limit_runs::{run_depth_modulus, run_weak_convergence, ModulusReport, WeakConvergenceReport};
pub use location::{
    run_contamination_error, run_direction_uniformity, run_effective_rank_ratio, ContaminationReport,
    RankRatioReport, UniformityReport,
};
pub use scaling::{run_diameter_scaling, run_lower_bound_check, LowerBoundReport, ScalingReport};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    DiameterScaling,
    LowerBound,
    ContaminationError,
    DirectionUniformity,
    EffectiveRankRatio,
    DepthModulus,
    WeakConvergence,
}

/// Optional knobs; unset fields take per-experiment defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentParams {
    /// Level allowance `eps_n = n^(-a)` for diameter scaling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_points: Option<usize>,
    /// Threshold for the lower-bound ratio `diam / eps`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_threshold: Option<f64>,
    /// Attack radii overriding the plan's radius.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directions: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice_spacing: Option<f64>,
}

fn default_model() -> EllipticalModel {
    EllipticalModel::standard(2, Radial::Gaussian)
}

fn default_t() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub n_grid: Vec<usize>,
    pub reps: usize,
    #[serde(default = "default_model")]
    pub model: EllipticalModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<ContaminationPlan>,
    /// Confidence parameter; tail quantiles are reported at `1 - exp(-t)`.
    #[serde(default = "default_t")]
    pub t: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub params: ExperimentParams,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind, n_grid: Vec<usize>, reps: usize, seed: u64) -> Self {
        ExperimentConfig {
            kind,
            n_grid,
            reps,
            model: default_model(),
            plan: None,
            t: default_t(),
            seed,
            params: ExperimentParams::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::invalid("reps must be at least 1"));
        }
        if self.n_grid.is_empty() || self.n_grid.contains(&0) {
            return Err(Error::invalid("n_grid must list positive sample sizes"));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("n_grid must be strictly ascending"));
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(Error::invalid("t must be positive"));
        }
        self.model.validate()
    }

    /// Tail quantile level `1 - exp(-t)`.
    pub fn quantile_level(&self) -> f64 {
        1.0 - (-self.t).exp()
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(text.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub(crate) fn rep_seed(&self, n: usize, rep: usize) -> u64 {
        mix_seed(mix_seed(self.seed, n as u64), rep as u64)
    }

    pub(crate) fn require_dim(&self, dim: usize) -> Result<()> {
        if self.model.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: self.model.dim(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowLevel {
    Rep,
    Aggregate,
}

impl RowLevel {
    fn as_str(self) -> &'static str {
        match self {
            RowLevel::Rep => "rep",
            RowLevel::Aggregate => "aggregate",
        }
    }
}

/// One line of the long-format result table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub level: RowLevel,
    pub n: usize,
    pub rep: Option<usize>,
    pub param: Option<f64>,
    pub metric: String,
    pub value: f64,
}

impl Row {
    pub fn rep(n: usize, rep: usize, param: Option<f64>, metric: &str, value: f64) -> Self {
        Row {
            level: RowLevel::Rep,
            n,
            rep: Some(rep),
            param,
            metric: metric.to_string(),
            value,
        }
    }

    pub fn aggregate(n: usize, param: Option<f64>, metric: &str, value: f64) -> Self {
        Row {
            level: RowLevel::Aggregate,
            n,
            rep: None,
            param,
            metric: metric.to_string(),
            value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Report {
    DiameterScaling(ScalingReport),
    LowerBound(LowerBoundReport),
    ContaminationError(ContaminationReport),
    DirectionUniformity(UniformityReport),
    EffectiveRankRatio(RankRatioReport),
    DepthModulus(ModulusReport),
    WeakConvergence(WeakConvergenceReport),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub report: Report,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses one per core.
    pub threads: Option<usize>,
    pub budget_seconds: Option<f64>,
    pub verbose: bool,
}

/// Shared state of a running experiment.
pub(crate) struct Harness<'a> {
    pub cfg: &'a ExperimentConfig,
    opts: &'a RunOptions,
    start: Instant,
}

impl Harness<'_> {
    /// Runs `f(n, rep, seed)` for every replication, in parallel, and
    /// returns the results in replication order.
    pub fn replicate<T: Send>(
        &self,
        n: usize,
        reps: usize,
        f: impl Fn(usize, u64) -> Result<T> + Sync + Send,
    ) -> Result<Vec<T>> {
        let out: Result<Vec<T>> = (0..reps)
            .into_par_iter()
            .map(|r| f(r, self.cfg.rep_seed(n, r)))
            .collect();
        self.checkpoint(n)?;
        out
    }

    /// Reports progress and enforces the time budget after a grid cell.
    pub fn checkpoint(&self, n: usize) -> Result<()> {
        let elapsed = self.start.elapsed().as_secs_f64();
        if self.opts.verbose {
            eprintln!("[{:?}] n={n} done after {elapsed:.1}s", self.cfg.kind);
        }
        if let Some(b) = self.opts.budget_seconds {
            if elapsed > b {
                return Err(Error::BudgetExceeded(format!(
                    "{elapsed:.1}s spent, budget {b}s"
                )));
            }
        }
        Ok(())
    }
}

/// Rough single-thread cost in seconds, used to refuse runs that cannot
/// fit the budget.
pub fn estimated_seconds(cfg: &ExperimentConfig) -> f64 {
    let reps = cfg.reps as f64;
    let region = |n: usize| 2.0e-7 * (n as f64).powi(2) + 1e-5 * n as f64;
    let per_n: f64 = cfg
        .n_grid
        .iter()
        .map(|&n| match cfg.kind {
            ExperimentKind::DiameterScaling if cfg.model.dim() == 1 => 1e-7 * n as f64 * (n as f64).ln(),
            ExperimentKind::DepthModulus => region(n) + 1e-4 * n as f64 * 0.1,
            ExperimentKind::EffectiveRankRatio => 2.0 * region(n),
            ExperimentKind::ContaminationError => {
                let radii = cfg.params.radii.as_ref().map_or(1, Vec::len) as f64;
                2.0 * radii * region(n)
            }
            _ => region(n),
        })
        .sum();
    let limit = match cfg.kind {
        ExperimentKind::WeakConvergence => {
            let m = cfg.params.directions.unwrap_or(crate::limit::DEFAULT_DIRECTIONS) as f64;
            let r = cfg.params.lattice_radius.unwrap_or(crate::limit::DEFAULT_RADIUS);
            let s = cfg.params.lattice_spacing.unwrap_or(crate::limit::DEFAULT_SPACING);
            let points = std::f64::consts::PI * (r / s).powi(2);
            1e-9 * points * m / 2.0 + 2e-7 * m * m
        }
        _ => 0.0,
    };
    reps * (per_n + limit)
}

/// Runs the experiment named by `cfg.kind` on a pool of `opts.threads`.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ExperimentOutput> {
    cfg.validate()?;
    if let Some(b) = opts.budget_seconds {
        let est = estimated_seconds(cfg);
        if est > b {
            return Err(Error::BudgetExceeded(format!(
                "estimated {est:.0}s of work exceeds the {b}s budget"
            )));
        }
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = opts.threads {
        builder = builder.num_threads(t.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    let h = Harness {
        cfg,
        opts,
        start: Instant::now(),
    };
    pool.install(|| match cfg.kind {
        ExperimentKind::DiameterScaling => scaling::diameter_scaling(&h),
        ExperimentKind::LowerBound => scaling::lower_bound(&h),
        ExperimentKind::ContaminationError => location::contamination_error(&h),
        ExperimentKind::DirectionUniformity => location::direction_uniformity(&h),
        ExperimentKind::EffectiveRankRatio => location::effective_rank_ratio(&h),
        ExperimentKind::DepthModulus => limit_runs::depth_modulus(&h),
        ExperimentKind::WeakConvergence => limit_runs::weak_convergence(&h),
    })
}

pub(crate) fn run_kind(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
    kind: ExperimentKind,
) -> Result<(Report, Vec<Row>)> {
    if cfg.kind != kind {
        return Err(Error::invalid(format!("config kind {:?} where {kind:?} was expected", cfg.kind)));
    }
    let out = run_experiment(cfg, opts)?;
    Ok((out.report, out.rows))
}

fn fmt_param(v: Option<f64>) -> String {
    v.map(crate::io::fmt_f64).unwrap_or_default()
}

/// Writes the header comment and the long-format rows.
pub fn write_results_csv<W: Write>(mut out: W, cfg: &ExperimentConfig, rows: &[Row]) -> Result<()> {
    writeln!(
        out,
        "# depthlab v{VERSION}, config-hash={}, seed={}",
        cfg.hash(),
        cfg.seed
    )?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(["level", "n", "rep", "param", "metric", "value"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.level.as_str().to_string(),
            r.n.to_string(),
            r.rep.map(|x| x.to_string()).unwrap_or_default(),
            fmt_param(r.param),
            r.metric.clone(),
            crate::io::fmt_f64(r.value),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Csv {
        line: e.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    }
}
