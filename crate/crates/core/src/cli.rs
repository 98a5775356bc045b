//! Command-line front end. `run` returns the process exit code: 0 on
//! success, 2 on usage errors, 1 on runtime errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::contamination::{contaminate, ContaminationPlan, Strategy};
use crate::depth::{
    depth_1d, depth_approx, depth_contours, depth_exact_2d, depth_region, depth_region_bruteforce,
    stahel_donoho_approx, tukey_median, PointCloud,
};
use crate::error::{Error, Result};
use crate::experiments::{run_experiment, write_results_csv, ExperimentConfig, RunOptions};
use crate::geom::Point2;
use crate::io::{parse_floats, parse_levels, read_cloud_path, write_cloud, write_field};
use crate::limit::{evaluate_w, simulate_bridge, DirectionGrid, Lattice, DEFAULT_DIRECTIONS};
use crate::models::{sample_elliptical, EllipticalModel};

#[derive(Debug, Parser)]
#[command(name = "depthlab", version, about = "Exact halfspace depth, depth regions and Monte Carlo experiments")]
struct Cli {
    /// Worker threads for parallel work; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print one progress line per completed sample size.
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Input {
    /// CSV file with a header row.
    #[arg(long)]
    input: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Depth of a point: exact in one and two dimensions, random directions above.
    Depth {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_parser = point_arg)]
        point: ::std::vec::Vec<f64>,
        #[arg(long, default_value_t = 1000)]
        n_dirs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tukey median of a planar sample, or a random-direction Stahel-Donoho estimate.
    Median {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = Estimator::Tukey)]
        estimator: Estimator,
        #[arg(long, default_value_t = 1000)]
        n_dirs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Depth region of level k.
    Region {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        level: usize,
        /// Use the slow reference construction.
        #[arg(long)]
        bruteforce: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Nested depth regions, one JSON line per level.
    Contour {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_parser = levels_arg)]
        levels: ::std::vec::Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw from an elliptical model.
    Sample {
        /// Model JSON file.
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replace a fraction of a sample by adversarial points.
    Contaminate {
        #[command(flatten)]
        input: Input,
        /// Plan JSON file.
        #[arg(long, conflicts_with_all = ["epsilon", "strategy", "radius", "direction"])]
        plan: Option<PathBuf>,
        #[arg(long, required_unless_present = "plan")]
        epsilon: Option<f64>,
        #[arg(long, value_enum, default_value_t = StrategyArg::FarCluster)]
        strategy: StrategyArg,
        #[arg(long, default_value_t = 10.0)]
        radius: f64,
        /// Cluster direction; defaults to the first axis.
        #[arg(long, value_parser = point_arg)]
        direction: Option<::std::vec::Vec<f64>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate the limit field on a lattice and maximize it.
    Limit {
        #[arg(long, default_value_t = DEFAULT_DIRECTIONS)]
        directions: usize,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        spacing: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte Carlo experiment from a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        budget_seconds: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Estimator {
    Tukey,
    StahelDonoho,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StrategyArg {
    FarCluster,
    Smear,
}

fn point_arg(s: &str) -> std::result::Result<Vec<f64>, String> {
    parse_floats(s).map_err(|e| e.to_string())
}

fn levels_arg(s: &str) -> std::result::Result<Vec<usize>, String> {
    parse_levels(s).map_err(|e| e.to_string())
}

enum Format {
    Json,
    Csv,
}

fn format_of(path: &Path) -> Format {
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("csv") => Format::Csv,
        _ => Format::Json,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn emit_json<T: Serialize>(value: &T, out: &Option<PathBuf>, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => {
            if let Format::Csv = format_of(path) {
                return Err(Error::invalid("this command writes JSON only"));
            }
            let mut f = create(path)?;
            serde_json::to_writer(&mut f, value)?;
            writeln!(f)?;
            f.flush()?;
        }
        None => {
            serde_json::to_writer(&mut *stdout, value)?;
            writeln!(stdout)?;
        }
    }
    Ok(())
}

fn emit_cloud(cloud: &PointCloud, out: &Option<PathBuf>, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => match format_of(path) {
            Format::Csv => {
                let mut f = create(path)?;
                write_cloud(&mut f, cloud)?;
                f.flush()?;
                Ok(())
            }
            Format::Json => {
                let rows: Vec<&[f64]> = cloud.iter().collect();
                emit_json(&rows, out, stdout)
            }
        },
        None => write_cloud(stdout, cloud),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Depth {
            input,
            point,
            n_dirs,
            seed,
            out,
        } => {
            let cloud = read_cloud_path(&input.input)?;
            if point.len() != cloud.dim() {
                return Err(Error::DimensionMismatch {
                    expected: cloud.dim(),
                    found: point.len(),
                });
            }
            let d = match cloud.dim() {
                1 => depth_1d(&cloud, point[0])?,
                2 => depth_exact_2d(&cloud, Point2::new(point[0], point[1]))?,
                _ => depth_approx(&cloud, &point, n_dirs, seed)?,
            };
            emit_json(&d, &out, stdout)
        }
        Command::Median {
            input,
            estimator,
            n_dirs,
            seed,
            out,
        } => {
            let cloud = read_cloud_path(&input.input)?;
            match estimator {
                Estimator::Tukey => emit_json(&tukey_median(&cloud)?, &out, stdout),
                Estimator::StahelDonoho => {
                    let m = stahel_donoho_approx(&cloud, n_dirs, seed)?;
                    emit_json(&serde_json::json!({ "median": m }), &out, stdout)
                }
            }
        }
        Command::Region {
            input,
            level,
            bruteforce,
            out,
        } => {
            let cloud = read_cloud_path(&input.input)?;
            let r = if bruteforce {
                depth_region_bruteforce(&cloud, level)?
            } else {
                depth_region(&cloud, level)?
            };
            emit_json(&r, &out, stdout)
        }
        Command::Contour { input, levels, out } => {
            let cloud = read_cloud_path(&input.input)?;
            let regions = depth_contours(&cloud, &levels)?;
            let mut text = Vec::new();
            for r in &regions {
                serde_json::to_writer(&mut text, r)?;
                text.push(b'\n');
            }
            match out {
                Some(path) => {
                    let mut f = create(&path)?;
                    f.write_all(&text)?;
                    f.flush()?;
                }
                None => stdout.write_all(&text)?,
            }
            Ok(())
        }
        Command::Sample { model, n, seed, out } => {
            let model: EllipticalModel = read_json(&model)?;
            let cloud = sample_elliptical(&model, n, seed)?;
            emit_cloud(&cloud, &out, stdout)
        }
        Command::Contaminate {
            input,
            plan,
            epsilon,
            strategy,
            radius,
            direction,
            seed,
            out,
        } => {
            let cloud = read_cloud_path(&input.input)?;
            let plan: ContaminationPlan = match plan {
                Some(path) => read_json(&path)?,
                None => {
                    let epsilon = epsilon.expect("required unless a plan is given");
                    let strategy = match strategy {
                        StrategyArg::FarCluster => Strategy::FarCluster {
                            direction: direction.unwrap_or_else(|| {
                                let mut e = vec![0.0; cloud.dim()];
                                e[0] = 1.0;
                                e
                            }),
                            radius,
                        },
                        StrategyArg::Smear => Strategy::Smear { radius },
                    };
                    ContaminationPlan { epsilon, strategy }
                }
            };
            let dirty = contaminate(&cloud, &plan, seed)?;
            emit_cloud(&dirty, &out, stdout)
        }
        Command::Limit {
            directions,
            radius,
            spacing,
            seed,
            out,
        } => {
            let d = Lattice::default();
            let lattice = Lattice::new(radius.unwrap_or(d.radius), spacing.unwrap_or(d.spacing))?;
            let grid = DirectionGrid::new(directions)?;
            let bridge = simulate_bridge(&grid, seed)?;
            let field = evaluate_w(&grid, &bridge, lattice)?;
            match out.as_deref().map(format_of) {
                Some(Format::Csv) => {
                    let mut f = create(out.as_deref().unwrap())?;
                    write_field(&mut f, &field)?;
                    f.flush()?;
                    Ok(())
                }
                _ => emit_json(&field.summary(), &out, stdout),
            }
        }
        Command::Experiment {
            config,
            seed,
            budget_seconds,
            out,
        } => {
            let mut cfg = ExperimentConfig::from_json(&std::fs::read_to_string(&config)?)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let opts = RunOptions {
                threads: cli.threads,
                budget_seconds,
                verbose: cli.verbose,
            };
            let result = run_experiment(&cfg, &opts)?;
            match out.as_deref().map(format_of) {
                Some(Format::Csv) => {
                    let mut f = create(out.as_deref().unwrap())?;
                    write_results_csv(&mut f, &cfg, &result.rows)?;
                    f.flush()?;
                    Ok(())
                }
                _ => emit_json(
                    &serde_json::json!({
                        "config_hash": cfg.hash(),
                        "seed": cfg.seed,
                        "report": result.report,
                        "rows": result.rows,
                    }),
                    &out,
                    stdout,
                ),
            }
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(stdout, "{text}")
            } else {
                write!(stderr, "{text}")
            };
            return code;
        }
    };
    match execute(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}
