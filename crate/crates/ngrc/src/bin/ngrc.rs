//! Thin command-line front end for the ngrc library.
//!
//! Exit codes: 0 success, 2 config error, 3 numerical failure, 4 IO error.

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ngrc::harness::{AlphaPolicy, Harness};
use ngrc::ridge::ReadoutMode;
use ngrc::{io as nio, Error, RunConfig};

#[derive(Parser)]
#[command(name = "ngrc", about = "Parallel NG-RC forecasting of the multi-scale Lorenz96 model")]
struct Cli {
    /// Optional TOML config file; CLI flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker thread count.
    #[arg(long, global = true, env = "NGRC_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct CommonFlags {
    /// Experiment preset: main, small, or flat.
    #[arg(long)]
    preset: Option<String>,
    /// Readout mode: independent or shared.
    #[arg(long)]
    mode: Option<String>,
    /// Ridge parameter.
    #[arg(long)]
    alpha: Option<f64>,
    /// Training time in MTU.
    #[arg(long = "t-train")]
    t_train: Option<f64>,
    /// Recording length in MTU.
    #[arg(long = "t-record")]
    t_record: Option<f64>,
    /// Training-window seed.
    #[arg(long = "seed-train")]
    seed_train: Option<u64>,
    /// Test-window (initial condition) seed.
    #[arg(long = "seed-ic")]
    seed_ic: Option<u64>,
    /// Output path (file or directory depending on the command).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the model and write a binary trajectory file.
    Generate {
        #[command(flatten)]
        common: CommonFlags,
        /// Also write a CSV copy next to the binary file.
        #[arg(long)]
        csv: bool,
    },
    /// Train readout weights from a trajectory file.
    Train {
        #[command(flatten)]
        common: CommonFlags,
        /// Input trajectory file.
        #[arg(long)]
        trajectory: PathBuf,
    },
    /// Run a closed-loop forecast and emit plot-ready CSVs.
    Forecast {
        #[command(flatten)]
        common: CommonFlags,
        /// Input trajectory file.
        #[arg(long)]
        trajectory: PathBuf,
        /// Trained weights file.
        #[arg(long)]
        weights: PathBuf,
        /// Forecast length in steps (default: the preset's 5 MTU test window).
        #[arg(long = "n-steps")]
        n_steps: Option<usize>,
    },
    /// Sweep alpha or training time and emit sweep CSVs.
    Sweep {
        #[command(flatten)]
        common: CommonFlags,
        /// Sweep axis: alpha or ttrain.
        #[arg(long)]
        axis: String,
        /// Input trajectory file.
        #[arg(long)]
        trajectory: PathBuf,
        /// Explicit grid values (comma separated).
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
        /// Optimize alpha per training time (ttrain axis only).
        #[arg(long = "optimize-alpha")]
        optimize_alpha: bool,
    },
    /// Emit the training-complexity comparison tables.
    ReportComplexity {
        #[command(flatten)]
        common: CommonFlags,
        /// Which table: small, flat, or both.
        #[arg(long, default_value = "both")]
        table: String,
    },
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) => 4,
        Error::NumericalBlowup { .. }
        | Error::RankDeficient
        | Error::DegenerateData(_)
        | Error::DegenerateWeights(_) => 3,
        _ => 2,
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(exit_code(&err));
    }
}

fn build_config(
    file: &Option<PathBuf>,
    common: &CommonFlags,
    workers: Option<usize>,
) -> ngrc::Result<RunConfig> {
    let base = match file {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    let overrides = RunConfig {
        preset: common.preset.as_deref().map(str::parse).transpose()?,
        mode: common.mode.as_deref().map(str::parse).transpose()?,
        alpha: common.alpha,
        t_train: common.t_train,
        t_record: common.t_record,
        seed_train: common.seed_train,
        seed_ic: common.seed_ic,
        workers,
        out: common.out.clone(),
        ..Default::default()
    };
    let merged = base.merged_with(overrides);
    if let Some(n) = merged.workers() {
        // ignore failure if a global pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(merged)
}

#[derive(Serialize)]
struct TrajectoryMeta<'a> {
    format_version: u32,
    preset: String,
    params: &'a ngrc::ModelParams,
    h_internal: f64,
    dt_save: f64,
    t_transient: f64,
    t_record: f64,
}

fn out_path(cfg: &RunConfig, default: &str) -> PathBuf {
    cfg.out.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn run(cli: Cli) -> ngrc::Result<()> {
    match &cli.command {
        Command::Generate { common, csv } => {
            let cfg = build_config(&cli.config, common, cli.workers)?;
            let preset = cfg.resolve_preset()?;
            let t_record = cfg.t_record.unwrap_or(preset.t_record);
            let path = out_path(&cfg, "trajectory.l96t");
            let start = Instant::now();
            let grid = preset.generate(t_record)?;
            eprintln!(
                "generated {} x {} samples in {:.1} s",
                grid.n_locations(),
                grid.n_samples(),
                start.elapsed().as_secs_f64()
            );
            nio::write_trajectory(&path, &grid)?;
            let meta = TrajectoryMeta {
                format_version: 1,
                preset: preset.name.to_string(),
                params: &preset.params,
                h_internal: preset.h_internal,
                dt_save: preset.dt_save,
                t_transient: preset.t_transient,
                t_record,
            };
            std::fs::write(
                sidecar_path(&path),
                toml::to_string_pretty(&meta).map_err(|e| Error::Format(e.to_string()))?,
            )?;
            if *csv {
                let mut f = std::io::BufWriter::new(std::fs::File::create(path.with_extension("csv"))?);
                nio::write_trajectory_csv(&mut f, &grid)?;
            }
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Train { common, trajectory } => {
            let cfg = build_config(&cli.config, common, cli.workers)?;
            let preset = cfg.resolve_preset()?;
            let grid = nio::read_trajectory(trajectory)?;
            check_grid(&preset, &grid)?;
            let harness = Harness::new(&grid, preset.clone());
            let t_train = cfg.t_train.unwrap_or(10.0);
            let start = Instant::now();
            let (sys, _window) = harness.accumulate(cfg.mode(), t_train, cfg.seed_train.unwrap_or(0))?;
            let weights = sys.solve(cfg.alpha())?;
            let elapsed = start.elapsed();
            let m = (t_train / grid.dt_save).round() as usize;
            println!(
                "trained {} readout(s), d_total = {}, M = {m}, wall-clock {:.1} ms",
                weights.weights.nrows(),
                weights.cfg.d_total(),
                elapsed.as_secs_f64() * 1e3
            );
            let path = out_path(&cfg, "weights.ngrw");
            nio::write_weights(&path, &weights)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Forecast {
            common,
            trajectory,
            weights,
            n_steps,
        } => {
            let cfg = build_config(&cli.config, common, cli.workers)?;
            let preset = cfg.resolve_preset()?;
            let grid = nio::read_trajectory(trajectory)?;
            check_grid(&preset, &grid)?;
            let w = nio::read_weights(weights)?;
            if w.cfg != preset.feature {
                return Err(Error::Incompatible {
                    field: "features".into(),
                    detail: format!("weights use {:?}, preset uses {:?}", w.cfg, preset.feature),
                });
            }
            if w.mode == ReadoutMode::PerLocation && w.weights.nrows() != grid.n_locations() {
                return Err(Error::Incompatible {
                    field: "locations".into(),
                    detail: format!(
                        "weights have {} rows, trajectory has {} locations",
                        w.weights.nrows(),
                        grid.n_locations()
                    ),
                });
            }
            let harness = Harness::new(&grid, preset.clone());
            let (warm_range, truth_range) = harness.test_window(cfg.seed_ic.unwrap_or(0))?;
            let n_steps = n_steps.unwrap_or(truth_range.len()).min(truth_range.len());
            let warmup = grid
                .slice_cols(warm_range.start, warm_range.len())?
                .normalize_with(w.norm_mean, w.norm_std);
            let truth = grid
                .slice_cols(truth_range.start, n_steps)?
                .normalize_with(w.norm_mean, w.norm_std);

            let out_dir = out_path(&cfg, "forecast-out");
            std::fs::create_dir_all(&out_dir)?;
            if n_steps == 0 {
                write_forecast_csvs(&out_dir, &truth, &truth, &ngrc::NrmseSeries {
                    values: vec![],
                    dt_save: grid.dt_save,
                })?;
                println!("horizon: 0 MTU (censored)");
                return Ok(());
            }

            let start = Instant::now();
            let (result, series, horizon) = ngrc::forecast::evaluate_forecast(
                &w,
                &warmup.data,
                &truth.data,
                grid.dt_save,
                ngrc::forecast::HORIZON_THRESHOLD,
            )?;
            let elapsed = start.elapsed();
            let per_step = elapsed.as_secs_f64() * 1e6
                / (result.predicted.ncols().max(1) * grid.n_locations()) as f64;
            let pred_grid = grid_like(&truth, result.predicted.clone());
            let diff = grid_like(&truth, &result.truth - &result.predicted);
            let truth_cut = grid_like(&truth, result.truth.clone());
            write_forecast_csvs(&out_dir, &truth_cut, &pred_grid, &series)?;
            let mut line = format!("horizon: {:.4} MTU", horizon.time);
            if let Some(lt) = preset.lyapunov_time {
                line.push_str(&format!(" = {:.4} Lyapunov times", horizon.time / lt));
            }
            if horizon.censored {
                line.push_str(" (censored)");
            }
            println!("{line}");
            println!("forecast wall-clock: {per_step:.2} us per location per step");
            let mut f = std::io::BufWriter::new(std::fs::File::create(out_dir.join("difference.csv"))?);
            nio::write_trajectory_csv(&mut f, &diff)?;
            Ok(())
        }
        Command::Sweep {
            common,
            axis,
            trajectory,
            grid: grid_values,
            optimize_alpha,
        } => {
            let cfg = build_config(&cli.config, common, cli.workers)?;
            let preset = cfg.resolve_preset()?;
            if !matches!(axis.as_str(), "alpha" | "ttrain") {
                return Err(Error::Config(format!("unknown sweep axis `{axis}`")));
            }
            let recording = nio::read_trajectory(trajectory)?;
            check_grid(&preset, &recording)?;
            let harness = Harness::new(&recording, preset);
            let sweep = match axis.as_str() {
                "alpha" => {
                    let grid_vals = grid_values.clone().unwrap_or_else(default_alpha_grid);
                    harness.sweep_alpha(cfg.mode(), cfg.t_train.unwrap_or(10.0), &grid_vals)?
                }
                "ttrain" => {
                    let grid_vals = grid_values
                        .clone()
                        .unwrap_or_else(|| vec![1.0, 2.0, 5.0, 10.0, 20.0, 40.0]);
                    let policy = if *optimize_alpha {
                        AlphaPolicy::OptimizedInSample(default_alpha_grid())
                    } else {
                        AlphaPolicy::Fixed(cfg.alpha())
                    };
                    harness.sweep_train_time(cfg.mode(), &grid_vals, &policy)?
                }
                other => return Err(Error::Config(format!("unknown sweep axis `{other}`"))),
            };
            let out_dir = out_path(&cfg, "sweep-out");
            std::fs::create_dir_all(&out_dir)?;
            let mut f = std::io::BufWriter::new(std::fs::File::create(out_dir.join("sweep.csv"))?);
            nio::write_sweep_csv(&mut f, &sweep)?;
            let mut f =
                std::io::BufWriter::new(std::fs::File::create(out_dir.join("samples.csv"))?);
            nio::write_sweep_samples_csv(&mut f, &sweep)?;
            for cell in &sweep.cells {
                match &cell.failed {
                    Some(e) => println!("{}: failed ({e})", cell.axis),
                    None => println!(
                        "{}: mean horizon {:.4} +/- {:.4} MTU (n = {})",
                        cell.axis,
                        cell.mean,
                        cell.std_of_mean,
                        cell.horizons.len()
                    ),
                }
            }
            if let Some(best) = sweep.best_axis {
                println!("best axis value: {best}");
            }
            Ok(())
        }
        Command::ReportComplexity { common, table } => {
            let cfg = build_config(&cli.config, common, cli.workers)?;
            let out_dir = out_path(&cfg, "complexity-out");
            std::fs::create_dir_all(&out_dir)?;
            let tables: Vec<(&str, Vec<ngrc::ComplexityEntry>)> = match table.as_str() {
                "small" => vec![("complexity_small.csv", ngrc::harness::complexity_table_small())],
                "flat" => vec![("complexity_flat.csv", ngrc::harness::complexity_table_flat())],
                "both" => vec![
                    ("complexity_small.csv", ngrc::harness::complexity_table_small()),
                    ("complexity_flat.csv", ngrc::harness::complexity_table_flat()),
                ],
                other => return Err(Error::Config(format!("unknown table `{other}`"))),
            };
            for (name, entries) in tables {
                let rows = ngrc::harness::complexity_report(&entries, "ours-shared")?;
                let mut f =
                    std::io::BufWriter::new(std::fs::File::create(out_dir.join(name))?);
                nio::write_complexity_csv(&mut f, &rows)?;
                for row in &rows {
                    println!("{}: speedup {:.3e}", row.entry.label, row.speedup);
                }
            }
            Ok(())
        }
    }
}

fn default_alpha_grid() -> Vec<f64> {
    // 13 points, logarithmic from 1e-7 to 1e1
    (0..13).map(|i| 10f64.powf(-7.0 + (2.0 / 3.0) * i as f64)).collect()
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.toml");
    path.with_file_name(name)
}

fn check_grid(preset: &ngrc::ExperimentPreset, grid: &ngrc::TrajectoryGrid) -> ngrc::Result<()> {
    if grid.n_locations() != preset.params.l {
        return Err(Error::Incompatible {
            field: "locations".into(),
            detail: format!(
                "trajectory has {} locations, preset expects {}",
                grid.n_locations(),
                preset.params.l
            ),
        });
    }
    Ok(())
}

fn grid_like(template: &ngrc::TrajectoryGrid, data: nalgebra::DMatrix<f64>) -> ngrc::TrajectoryGrid {
    ngrc::TrajectoryGrid {
        data,
        dt_save: template.dt_save,
        t0: template.t0,
        norm_mean: template.norm_mean,
        norm_std: template.norm_std,
        normalized: template.normalized,
    }
}

fn write_forecast_csvs(
    out_dir: &Path,
    truth: &ngrc::TrajectoryGrid,
    predicted: &ngrc::TrajectoryGrid,
    series: &ngrc::NrmseSeries,
) -> ngrc::Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(out_dir.join("truth.csv"))?);
    nio::write_trajectory_csv(&mut f, truth)?;
    let mut f = std::io::BufWriter::new(std::fs::File::create(out_dir.join("predicted.csv"))?);
    nio::write_trajectory_csv(&mut f, predicted)?;
    let mut f = std::io::BufWriter::new(std::fs::File::create(out_dir.join("nrmse.csv"))?);
    nio::write_nrmse_csv(&mut f, series, truth.t0)?;
    Ok(())
}
