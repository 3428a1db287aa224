//! `qcs`: evaluate radial-stretch series maps and run their verification checks.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use qcstretch::analysis::{
    calibrate_stretch_constant, predict_r_star, ScaleLadder, StretchCalibration,
};
use qcstretch::composite::{eval_map, jac_map, MapConfig};
use qcstretch::field::{
    config_digest, format_f64, load_config, run_verification_suite, sweep_distortion,
    sweep_exponent, write_exponent_csv, write_field_csv, Axis, DirectionMode, GridSpec,
    RunManifest, SuiteOptions, Target,
};
use qcstretch::symmat::eigen_sym;
use qcstretch::{par, vector, Execution};

#[derive(Parser)]
#[command(
    name = "qcs",
    version,
    about = "Radial-stretch series maps: evaluation, distortion fields and verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// JSON config: {"dim": d, "K": k, "lambdas": [[...], ...]}
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output file; stdout when omitted. A manifest sidecar is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    Fixed,
    Sweep,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate F at one or more points.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Comma-separated coordinates; repeat for several points.
        #[arg(long = "point", required = true, allow_hyphen_values = true)]
        points: Vec<String>,
    },
    /// Analytic Jacobian DF and its eigenvalues at one or more points.
    Jac {
        #[command(flatten)]
        common: Common,
        #[arg(long = "point", required = true, allow_hyphen_values = true)]
        points: Vec<String>,
    },
    /// Distortion field over a box as CSV.
    DistortionGrid {
        #[command(flatten)]
        common: Common,
        /// LO,HI,N per axis; a single value is reused for every axis.
        #[arg(long = "grid", required = true, allow_hyphen_values = true)]
        grid: Vec<String>,
    },
    /// Multiscale stretching-exponent estimates.
    Exponent {
        #[command(flatten)]
        common: Common,
        /// Center index n (1-based) or comma-separated point; defaults to every center.
        #[arg(long = "target", allow_hyphen_values = true)]
        targets: Vec<String>,
        /// R0,Q,COUNT
        #[arg(long, default_value = "0.0009765625,0.5,31")]
        ladder: String,
        #[arg(long, value_enum, default_value = "fixed")]
        direction: Direction,
        /// Random directions in sweep mode.
        #[arg(long, default_value_t = 16)]
        samples: usize,
    },
    /// Calibrate the single-stretch constant C by direction sweep.
    CalibrateC {
        #[command(flatten)]
        common: Common,
        /// Random directions.
        #[arg(long, default_value_t = 1024)]
        samples: usize,
    },
    /// Cutoff N* and radius r* for a target center.
    PredictRstar {
        #[command(flatten)]
        common: Common,
        /// Target center index N (1-based).
        #[arg(long)]
        index: usize,
        /// Tolerance epsilon; defaults to 2^-(N+2).
        #[arg(long)]
        epsilon: Option<f64>,
        /// Constant C; calibrated when omitted.
        #[arg(long)]
        c: Option<f64>,
        #[arg(long, default_value_t = 1024)]
        samples: usize,
    },
    /// Run the full verification suite.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
}

enum Failure {
    Usage(String),
    Checks,
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Usage(format!("cannot parse number {v:?} in {s:?}")))
        })
        .collect()
}

fn parse_point(s: &str, dim: usize) -> Result<Vec<f64>, Failure> {
    let p = parse_list(s)?;
    if p.len() != dim {
        return Err(Failure::Usage(format!(
            "point {s:?} has {} coordinates, expected {dim}",
            p.len()
        )));
    }
    Ok(p)
}

fn parse_grid(specs: &[String], dim: usize, seed: u64) -> Result<GridSpec, Failure> {
    let axes: Vec<Axis> = specs
        .iter()
        .map(|s| {
            let v = parse_list(s)?;
            if v.len() != 3 || v[2].fract() != 0.0 || v[2] < 0.0 {
                return Err(Failure::Usage(format!("--grid expects LO,HI,N, got {s:?}")));
            }
            Ok(Axis::new(v[0], v[1], v[2] as usize)?)
        })
        .collect::<Result<_, _>>()?;
    let axes = match axes.len() {
        1 => vec![axes[0]; dim],
        n if n == dim => axes,
        n => {
            return Err(Failure::Usage(format!(
                "{n} --grid axes given for dimension {dim}"
            )))
        }
    };
    Ok(GridSpec { axes, seed })
}

fn parse_ladder(s: &str) -> Result<ScaleLadder, Failure> {
    let v = parse_list(s)?;
    if v.len() != 3 || v[2].fract() != 0.0 || v[2] < 0.0 {
        return Err(Failure::Usage(format!(
            "--ladder expects R0,Q,COUNT, got {s:?}"
        )));
    }
    Ok(ScaleLadder::new(v[0], v[1], v[2] as usize)?)
}

fn parse_target(s: &str, dim: usize) -> Result<Target, Failure> {
    match s.trim().parse::<usize>() {
        Ok(n) => Ok(Target::Center(n)),
        Err(_) => Ok(Target::Point(parse_point(s, dim)?)),
    }
}

fn calibrate(cfg: &MapConfig, directions: usize, seed: u64) -> Result<StretchCalibration, Failure> {
    Ok(calibrate_stretch_constant(
        &vector::basis(cfg.dim(), 0),
        cfg.k(),
        (1e-6, 1e6),
        121,
        directions,
        seed,
        Execution::Parallel,
    )?)
}

/// Writes `bytes` to `--out` (plus manifest) or stdout.
fn emit(common: &Common, cfg: &MapConfig, started: Instant, bytes: &[u8]) -> Result<(), Failure> {
    match &common.out {
        Some(path) => {
            std::fs::write(path, bytes)?;
            write_manifest(common, cfg, started, path)?;
        }
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn write_manifest(
    common: &Common,
    cfg: &MapConfig,
    started: Instant,
    path: &Path,
) -> Result<(), Failure> {
    let mut m = RunManifest::new(config_digest(cfg), common.seed);
    m.outputs.push(path.display().to_string());
    m.wall_time_seconds = started.elapsed().as_secs_f64();
    m.write_for(path)?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let started = Instant::now();
    match cli.command {
        Command::Eval { common, points } => {
            let cfg = load_config(&common.config)?;
            let d = cfg.dim();
            let mut header: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
            header.extend((1..=d).map(|i| format!("F{i}")));
            let mut out = header.join(",") + "\n";
            for p in &points {
                let x = parse_point(p, d)?;
                let y = eval_map(&cfg, &x);
                let cols: Vec<String> = x.iter().chain(&y).map(|v| format_f64(*v)).collect();
                out += &(cols.join(",") + "\n");
            }
            emit(&common, &cfg, started, out.as_bytes())
        }
        Command::Jac { common, points } => {
            let cfg = load_config(&common.config)?;
            let mut rows = Vec::new();
            for p in &points {
                let x = parse_point(p, cfg.dim())?;
                let j = jac_map(&cfg, &x)?;
                let d = j.dim();
                let matrix: Vec<Vec<f64>> = (0..d)
                    .map(|i| (0..d).map(|k| j.get(i, k)).collect())
                    .collect();
                let eig = eigen_sym(&j)?;
                rows.push(serde_json::json!({
                    "point": x,
                    "jacobian": matrix,
                    "eigenvalues": eig.eigenvalues(),
                }));
            }
            let text = serde_json::to_string_pretty(&rows)? + "\n";
            emit(&common, &cfg, started, text.as_bytes())
        }
        Command::DistortionGrid { common, grid } => {
            let cfg = load_config(&common.config)?;
            let spec = parse_grid(&grid, cfg.dim(), common.seed)?;
            let field = sweep_distortion(&cfg, &spec, Execution::Parallel)?;
            let mut buf = Vec::new();
            write_field_csv(&field, &mut buf)?;
            emit(&common, &cfg, started, &buf)
        }
        Command::Exponent {
            common,
            targets,
            ladder,
            direction,
            samples,
        } => {
            let cfg = load_config(&common.config)?;
            let ladder = parse_ladder(&ladder)?;
            let targets: Vec<Target> = if targets.is_empty() {
                (1..=cfg.lambdas().len()).map(Target::Center).collect()
            } else {
                targets
                    .iter()
                    .map(|t| parse_target(t, cfg.dim()))
                    .collect::<Result<_, _>>()?
            };
            let mode = match direction {
                Direction::Fixed => DirectionMode::Fixed,
                Direction::Sweep => DirectionMode::Sweep(samples),
            };
            let rows = sweep_exponent(
                &cfg,
                &targets,
                &ladder,
                mode,
                common.seed,
                Execution::Parallel,
            );
            let mut buf = Vec::new();
            write_exponent_csv(&rows, cfg.dim(), &mut buf)?;
            emit(&common, &cfg, started, &buf)
        }
        Command::CalibrateC { common, samples } => {
            let cfg = load_config(&common.config)?;
            let cal = calibrate(&cfg, samples, common.seed)?;
            let text = serde_json::to_string_pretty(&cal)? + "\n";
            emit(&common, &cfg, started, text.as_bytes())
        }
        Command::PredictRstar {
            common,
            index,
            epsilon,
            c,
            samples,
        } => {
            let cfg = load_config(&common.config)?;
            let c = match c {
                Some(c) => c,
                None => calibrate(&cfg, samples, common.seed)?.c,
            };
            let eps = epsilon.unwrap_or_else(|| qcstretch::composite::weight(index + 2));
            let plan = predict_r_star(&cfg, index, eps, c)?;
            let text = serde_json::to_string_pretty(&plan)? + "\n";
            emit(&common, &cfg, started, text.as_bytes())
        }
        Command::Verify { common, samples } => {
            let cfg = load_config(&common.config)?;
            let opts = SuiteOptions::new(samples, common.seed);
            let report = run_verification_suite(&cfg, &opts)?;
            match &common.out {
                Some(path) => {
                    std::fs::write(path, report.to_json())?;
                    write_manifest(&common, &cfg, started, path)?;
                    print!("{}", report.render_text());
                }
                None => print!("{}", report.to_json()),
            }
            if report.exit_code() == 0 {
                Ok(())
            } else {
                if common.out.is_none() {
                    eprint!("{}", report.render_text());
                }
                Err(Failure::Checks)
            }
        }
    }
}

fn main() -> ExitCode {
    par::configure_threads_from_env();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("qcs: {msg}");
            ExitCode::from(2)
        }
    }
}
