//! `heatlab`: command-line driver for the heat-content laboratory.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use heatcontent::asymptotics::{c0, c1};
use heatcontent::experiment::{self, ExperimentConfig, SausageSpec, PRESETS};
use heatcontent::green::Lambda;
use heatcontent::solver::{solve_2d, GeometrySpec, SolverConfig};
use heatcontent::specfun::beta_coefficient;
use heatcontent::Error;

const EXIT_CHECK: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_OTHER: u8 = 1;

#[derive(Parser, Debug)]
#[command(
    name = "heatlab",
    version,
    about = "Short-time heat content of two-media transmission problems"
)]
struct Cli {
    /// write outputs into this directory instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// exit with status 2 when an acceptance check fails
    #[arg(long, global = true)]
    check: bool,
    /// worker threads for independent experiments
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// override the config seed (Monte Carlo sausage estimates)
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Source {
    /// experiment or solver config, TOML or JSON
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// built-in figure setup; repeat or use `all` for several
    #[arg(long)]
    preset: Vec<String>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Shape {
    Square,
    Circle,
    Prefractal,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Mode {
    Auto,
    Analytic,
    Grid,
    MonteCarlo,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Emit boundary vertices as CSV.
    Geometry {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum)]
        shape: Option<Shape>,
        #[arg(long, default_value_t = 1)]
        generation: u32,
        #[arg(long, default_value_t = 1.0)]
        side: f64,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
    },
    /// Emit a table of the interior sausage volume μ(∂Ω, ℓ).
    Sausage {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum)]
        shape: Option<Shape>,
        #[arg(long, default_value_t = 1)]
        generation: u32,
        #[arg(long, value_enum, default_value_t = Mode::Auto)]
        mode: Mode,
        #[arg(long, default_value_t = 2048)]
        resolution: usize,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        /// smallest width
        #[arg(long, default_value_t = 1e-3)]
        min_width: f64,
        /// largest width
        #[arg(long, default_value_t = 0.25)]
        max_width: f64,
        #[arg(long, default_value_t = 17)]
        count: usize,
    },
    /// Evaluate the configured short-time laws.
    Asymptote {
        #[command(flatten)]
        source: Source,
    },
    /// Run the finite-volume solver.
    Solve {
        #[command(flatten)]
        source: Source,
    },
    /// Run solver and laws on the same setup and tabulate deviations.
    Compare {
        #[command(flatten)]
        source: Source,
    },
    /// Print C₀, C₁ and a table of β_x.
    Constants,
}

/// Unit-size domain with D₊ = D₋ = 1 and perfect contact, for geometry-only commands.
fn shape_experiment(
    shape: Shape,
    generation: u32,
    side: f64,
    radius: f64,
) -> heatcontent::Result<ExperimentConfig> {
    let spec = match shape {
        Shape::Square => GeometrySpec::Square,
        Shape::Circle => GeometrySpec::Circle,
        Shape::Prefractal => GeometrySpec::Prefractal,
    };
    let mut solver = SolverConfig::new(spec, 1.0, 1.0, Lambda::Infinite);
    match shape {
        Shape::Square => solver.side = Some(side),
        Shape::Circle => solver.radius = Some(radius),
        Shape::Prefractal => solver.generation = Some(generation),
    }
    ExperimentConfig::from_solver(format!("{shape:?}").to_lowercase(), solver)
}

fn load_configs(src: &Source, seed: Option<u64>) -> heatcontent::Result<Vec<ExperimentConfig>> {
    let mut out = Vec::new();
    if let Some(p) = &src.config {
        out.push(ExperimentConfig::load(p)?);
    }
    for name in &src.preset {
        if name == "all" {
            for p in PRESETS {
                out.push(experiment::preset(p)?);
            }
        } else {
            out.push(experiment::preset(name)?);
        }
    }
    if out.is_empty() {
        return Err(Error::Config("give --config PATH or --preset NAME".into()));
    }
    if let Some(s) = seed {
        for c in &mut out {
            c.seed = s;
        }
    }
    Ok(out)
}

fn header(c: &ExperimentConfig) -> String {
    format!(
        "# heatlab experiment={} config_sha256={}\n",
        c.name,
        c.hash()
    )
}

fn emit(out: Option<&Path>, file: &str, text: &str) -> heatcontent::Result<()> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(file), text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

/// Exit status for a finished command: 2 for failed checks under `--check`.
fn execute(cli: &Cli) -> heatcontent::Result<u8> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Geometry {
            source,
            shape,
            generation,
            side,
            radius,
        } => {
            let c = match shape {
                Some(s) => shape_experiment(*s, *generation, *side, *radius)?,
                None => load_configs(source, cli.seed)?.remove(0),
            };
            let text = header(&c) + &c.solver.build_geometry()?.to_csv();
            emit(out, &format!("{}.geometry.csv", c.name), &text)?;
        }
        Command::Sausage {
            source,
            shape,
            generation,
            mode,
            resolution,
            samples,
            min_width,
            max_width,
            count,
        } => {
            let mut cfg = match shape {
                Some(s) => shape_experiment(*s, *generation, 1.0, 1.0)?,
                None => load_configs(source, cli.seed)?.remove(0),
            };
            let name = cfg.name.clone();
            cfg.sausage = match mode {
                Mode::Auto => cfg.sausage,
                Mode::Analytic => SausageSpec::Analytic,
                Mode::Grid => SausageSpec::Grid {
                    resolution: *resolution,
                },
                Mode::MonteCarlo => SausageSpec::MonteCarlo { samples: *samples },
            };
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            if !(*min_width > 0.0 && max_width > min_width) || *count < 2 {
                return Err(Error::Config(
                    "need 0 < min-width < max-width and count ≥ 2".into(),
                ));
            }
            let (a, b) = (min_width.ln(), max_width.ln());
            let widths: Vec<f64> = (0..*count)
                .map(|i| (a + (b - a) * i as f64 / (*count - 1) as f64).exp())
                .collect();
            let csv = header(&cfg) + &cfg.sausage_profile()?.to_csv(&widths)?;
            emit(out, &format!("{name}.sausage.csv"), &csv)?;
        }
        Command::Asymptote { source } => {
            for mut c in load_configs(source, cli.seed)? {
                c.solve = false;
                let rep = experiment::run(&c, None)?;
                emit(
                    out,
                    &format!("{}.asymptote.csv", c.name),
                    &rep.compare_csv(),
                )?;
            }
        }
        Command::Solve { source } => {
            for c in load_configs(source, cli.seed)? {
                let res = solve_2d(
                    &c.solver.build_geometry()?,
                    &c.solver.medium()?,
                    &c.solver.solve_params()?,
                )
                .map_err(|e| e.context(format!("experiment {}", c.name)))?;
                let text = header(&c) + &res.series.to_csv();
                emit(out, &format!("{}.numeric.csv", c.name), &text)?;
                if let Some(dir) = out {
                    for (k, snap) in res.snapshots.iter().enumerate() {
                        snap.write_snapshot(dir, &format!("{}.u{k:03}", c.name))?;
                    }
                }
            }
        }
        Command::Compare { source } => {
            let cfgs = load_configs(source, cli.seed)?;
            let mut failed = false;
            for r in experiment::run_batch(&cfgs, out, cli.threads) {
                let rep = r?;
                if out.is_some() {
                    print!("{}", rep.summary());
                } else {
                    print!("{}", rep.compare_csv());
                    for c in &rep.checks {
                        println!("# {}", c.describe());
                    }
                }
                failed |= !rep.passed();
            }
            if failed && cli.check {
                return Ok(EXIT_CHECK);
            }
        }
        Command::Constants => {
            let mut s = String::from("# heatlab constants\nname,value\n");
            let _ = writeln!(s, "C0,{:.10}", c0());
            let _ = writeln!(s, "C1,{:.10}", c1());
            s.push_str("x,beta_x\n");
            for k in 0..=8 {
                let x = 0.25 * k as f64;
                let _ = writeln!(s, "{x},{:.10}", beta_coefficient(x)?);
            }
            emit(out, "constants.csv", &s)?;
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_OTHER } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("heatlab: {e}");
            ExitCode::from(if e.is_numerical() {
                EXIT_NUMERIC
            } else {
                EXIT_OTHER
            })
        }
    }
}
