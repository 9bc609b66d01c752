//! `lietraj` command-line front end.
//!
//! Every subcommand reads its inputs, runs one library operation, writes a
//! versioned artifact and prints a one-line summary. Exit codes: 0 success,
//! 1 I/O, 2 parse or schema, 3 numerical, 4 planner.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lietraj::bench::Shape;
use lietraj::io::RunConfig;
use lietraj::liegroup::Space;
use lietraj::ErrorClass;

#[derive(Parser, Debug)]
#[command(name = "lietraj", version, about = "Trajectory distributions on SE(3) and PCG(3)")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// Run configuration (TOML); built-in defaults when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the configured pose representation.
    #[arg(long, global = true)]
    space: Option<Space>,
    /// Overrides the configured number of time steps.
    #[arg(long = "n-step", global = true)]
    n_step: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Re-time demonstrations onto a common speed-normalized grid.
    Gora {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
        /// Project slightly non-orthonormal rotations instead of failing.
        #[arg(long)]
        lenient: bool,
    },
    /// Learn a trajectory distribution from aligned demonstrations.
    Encode {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        timings: Option<PathBuf>,
    },
    /// Condition a distribution on via poses.
    Condition {
        #[arg(long)]
        dist: PathBuf,
        #[arg(long)]
        vias: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        timings: Option<PathBuf>,
    },
    /// Draw trajectories from a distribution.
    Sample {
        #[arg(long)]
        dist: PathBuf,
        #[arg(long, default_value_t = 5)]
        count: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Fuse a distribution with the robot's workspace density.
    FuseWd {
        #[arg(long)]
        dist: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the workspace density itself.
        #[arg(long)]
        density_out: Option<PathBuf>,
    },
    /// Plan a joint trajectory guided by a distribution.
    Plan {
        #[arg(long)]
        dist: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the configured scene.
        #[arg(long)]
        scene: Option<PathBuf>,
        /// Plan metrics and cost history (JSON).
        #[arg(long)]
        metrics: Option<PathBuf>,
        #[arg(long)]
        timings: Option<PathBuf>,
        /// Exit with the planner code when the result collides.
        #[arg(long)]
        require_collision_free: bool,
    },
    /// Compute metrics and emit plot data.
    Report(ReportArgs),
    /// Generate synthetic letter demonstrations.
    GenDemos {
        #[arg(long, default_value = "n")]
        shape: Shape,
        #[arg(long, default_value_t = 100)]
        n_points: usize,
        #[arg(long, default_value_t = 5)]
        n_demos: usize,
        #[arg(long, default_value_t = 0.01)]
        noise: f64,
        #[arg(long, default_value_t = 0.3)]
        time_warp: f64,
        /// Heading follows the stroke instead of staying fixed.
        #[arg(long)]
        tangent: bool,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[arg(long)]
    dist: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// Demonstrations for the demo distance.
    #[arg(long, num_args = 1..)]
    demos: Vec<PathBuf>,
    /// Via poses for the via distance.
    #[arg(long)]
    vias: Option<PathBuf>,
    /// Planned joint trajectory for tracking errors.
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Timing files written by `encode` and `condition`.
    #[arg(long, num_args = 1..)]
    timings: Vec<PathBuf>,
    /// Samples drawn for the metrics.
    #[arg(long, default_value_t = 20)]
    samples: usize,
    /// Also render translation traces as SVG.
    #[arg(long)]
    svg: bool,
}

#[derive(Debug)]
enum Failure {
    Lib(lietraj::Error),
    Collision,
}

impl From<lietraj::Error> for Failure {
    fn from(e: lietraj::Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(e.into())
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Lib(e) => match e.class() {
                ErrorClass::Io => 1,
                ErrorClass::Parse => 2,
                ErrorClass::Math => 3,
                ErrorClass::Planner => 4,
            },
            Failure::Collision => 4,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Lib(e) => {
                write!(f, "{e}")?;
                let mut source = std::error::Error::source(e);
                while let Some(s) = source {
                    write!(f, ": {s}")?;
                    source = s.source();
                }
                Ok(())
            }
            Failure::Collision => write!(f, "no collision-free trajectory found"),
        }
    }
}

fn load_config(global: &GlobalArgs) -> Result<RunConfig, Failure> {
    let mut cfg = match &global.config {
        Some(p) => RunConfig::read(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = global.seed {
        cfg.seed = seed;
    }
    if let Some(space) = global.space {
        cfg.space = space;
    }
    if let Some(n) = global.n_step {
        cfg.n_step = n;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<String, Failure> {
    let cfg = load_config(&cli.global)?;
    match cli.command {
        Command::Gora { inputs, out_dir, lenient } => commands::gora(&cfg, &inputs, &out_dir, !lenient),
        Command::Encode { inputs, out, timings } => commands::encode(&cfg, &inputs, &out, timings.as_deref()),
        Command::Condition { dist, vias, out, timings } => {
            commands::condition(&dist, &vias, &out, timings.as_deref())
        }
        Command::Sample { dist, count, out_dir } => commands::sample(&cfg, &dist, count, &out_dir),
        Command::FuseWd { dist, out, density_out } => commands::fuse_wd(&cfg, &dist, &out, density_out.as_deref()),
        Command::Plan { dist, out, scene, metrics, timings, require_collision_free } => commands::plan(
            &cfg,
            &commands::PlanPaths { dist, out, scene, metrics, timings },
            require_collision_free,
        ),
        Command::Report(args) => report::run(
            &cfg,
            &report::ReportInputs {
                dist: args.dist,
                out_dir: args.out_dir,
                demos: args.demos,
                vias: args.vias,
                plan: args.plan,
                timings: args.timings,
                samples: args.samples,
                svg: args.svg,
            },
        ),
        Command::GenDemos { shape, n_points, n_demos, noise, time_warp, tangent, out_dir } => commands::gen_demos(
            &cfg,
            shape,
            &commands::DemoArgs { n_points, n_demos, noise, time_warp, tangent },
            &out_dir,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
