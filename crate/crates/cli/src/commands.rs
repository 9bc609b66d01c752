use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use lietraj::adapt::{condition_on_via_set, fuse_workspace_density};
use lietraj::bench::{generate_letter_with, LetterOptions, Orientation, Shape};
use lietraj::encoder::{encode as encode_demos, sample_trajectories, DemoSet};
use lietraj::gora::{reparameterize, Trajectory};
use lietraj::io::{
    format_joint_trajectory, format_workspace_density, read_distribution, read_scene, read_trajectory, read_vias,
    write_distribution, write_trajectory, RunConfig,
};
use lietraj::planner::{plan_report, stomp_plan};
use lietraj::workspace::workspace_density;
use serde::Serialize;

use crate::Failure;

/// Wall-clock record kept apart from the deterministic artifacts.
#[derive(Serialize, serde::Deserialize)]
pub struct Timing {
    pub command: String,
    pub ms: f64,
}

fn write_timing(path: Option<&Path>, command: &str, ms: f64) -> Result<(), Failure> {
    if let Some(p) = path {
        let text = serde_json::to_string_pretty(&Timing { command: command.into(), ms }).expect("timing serializes");
        fs::write(p, text + "\n")?;
    }
    Ok(())
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

pub fn read_demos(cfg: &RunConfig, inputs: &[PathBuf], strict: bool) -> Result<Vec<Trajectory>, Failure> {
    Ok(inputs
        .iter()
        .map(|p| read_trajectory(p, strict).map(|t| t.with_space(cfg.space)))
        .collect::<lietraj::Result<_>>()?)
}

pub fn gora(cfg: &RunConfig, inputs: &[PathBuf], out_dir: &Path, strict: bool) -> Result<String, Failure> {
    let demos = read_demos(cfg, inputs, strict)?;
    fs::create_dir_all(out_dir)?;
    let opts = cfg.gora_options();
    for (path, demo) in inputs.iter().zip(&demos) {
        let (aligned, _) = reparameterize(demo, &opts)?;
        let name = path.file_name().ok_or_else(|| lietraj::Error::InvalidArgument(format!("{} has no file name", path.display())))?;
        write_trajectory(&out_dir.join(name), &aligned)?;
    }
    Ok(format!("gora: aligned {} trajectories to {} steps in {}", demos.len(), opts.n_step, out_dir.display()))
}

pub fn encode(cfg: &RunConfig, inputs: &[PathBuf], out: &Path, timings: Option<&Path>) -> Result<String, Failure> {
    let demos = DemoSet::new(read_demos(cfg, inputs, true)?)?;
    let start = Instant::now();
    let dist = encode_demos(&demos, &cfg.encode_options())?;
    let ms = elapsed_ms(start);
    write_distribution(out, &dist)?;
    write_timing(timings, "encode", ms)?;
    Ok(format!(
        "encode: {} demos, {} steps, {} -> {} ({ms:.2} ms)",
        demos.len(),
        dist.n_steps() + 1,
        dist.space(),
        out.display()
    ))
}

pub fn condition(dist: &Path, vias: &Path, out: &Path, timings: Option<&Path>) -> Result<String, Failure> {
    let prior = read_distribution(dist)?;
    let vias = read_vias(vias, prior.space())?;
    let start = Instant::now();
    let posterior = condition_on_via_set(&prior, &vias)?;
    let ms = elapsed_ms(start);
    write_distribution(out, &posterior)?;
    write_timing(timings, "condition", ms)?;
    let (before, after) = (prior.joint_covariance()?.trace(), posterior.joint_covariance()?.trace());
    Ok(format!(
        "condition: {} via poses, covariance trace {before:.3e} -> {after:.3e}, -> {} ({ms:.2} ms)",
        vias.len(),
        out.display()
    ))
}

pub fn sample(cfg: &RunConfig, dist: &Path, count: usize, out_dir: &Path) -> Result<String, Failure> {
    let dist = read_distribution(dist)?;
    let samples = sample_trajectories(&dist, count, cfg.seed)?;
    fs::create_dir_all(out_dir)?;
    for (k, s) in samples.iter().enumerate() {
        write_trajectory(&out_dir.join(format!("sample_{k:03}.traj")), s)?;
    }
    Ok(format!("sample: {count} trajectories of {} steps in {}", dist.n_steps() + 1, out_dir.display()))
}

pub fn fuse_wd(cfg: &RunConfig, dist: &Path, out: &Path, density_out: Option<&Path>) -> Result<String, Failure> {
    let prior = read_distribution(dist)?;
    let chain = cfg.load_chain()?;
    let wd = workspace_density(&chain, cfg.samples_per_joint, cfg.seed)?;
    let fused = fuse_workspace_density(&prior, &wd)?;
    write_distribution(out, &fused)?;
    if let Some(p) = density_out {
        fs::write(p, format_workspace_density(&wd))?;
    }
    let (before, after) = (prior.joint_covariance()?.trace(), fused.joint_covariance()?.trace());
    Ok(format!(
        "fuse-wd: {}-joint workspace density, covariance trace {before:.3e} -> {after:.3e}, -> {}",
        chain.dof(),
        out.display()
    ))
}

pub struct PlanPaths {
    pub dist: PathBuf,
    pub out: PathBuf,
    pub scene: Option<PathBuf>,
    pub metrics: Option<PathBuf>,
    pub timings: Option<PathBuf>,
}

#[derive(Serialize)]
struct PlanMetricsDoc {
    e_rot: f64,
    e_tran: f64,
    collision_free: bool,
    iterations: usize,
    best_cost: f64,
    cost_history: Vec<f64>,
}

pub fn plan(cfg: &RunConfig, paths: &PlanPaths, require_collision_free: bool) -> Result<String, Failure> {
    let dist = read_distribution(&paths.dist)?;
    let chain = cfg.load_chain()?;
    let scene = match &paths.scene {
        Some(p) => read_scene(p)?,
        None => cfg.load_scene()?,
    };
    let params = cfg.stomp.params();
    let result = stomp_plan(&chain, &scene, &dist, &params, cfg.seed)?;
    let metrics = plan_report(&chain, &result, &dist, &scene, params.body_radius)?;
    fs::write(&paths.out, format_joint_trajectory(&result.trajectory))?;
    if let Some(p) = &paths.metrics {
        let doc = PlanMetricsDoc {
            e_rot: metrics.e_rot,
            e_tran: metrics.e_tran,
            collision_free: metrics.collision_free,
            iterations: metrics.iterations,
            best_cost: result.best_cost,
            cost_history: result.cost_history.clone(),
        };
        fs::write(p, serde_json::to_string_pretty(&doc).expect("metrics serialize") + "\n")?;
    }
    write_timing(paths.timings.as_deref(), "plan", metrics.planning_ms)?;
    if require_collision_free && !metrics.collision_free {
        return Err(Failure::Collision);
    }
    Ok(format!(
        "plan: {} waypoints, {} iterations, cost {:.4} -> {:.4}, e_rot {:.4} rad, e_tran {:.4} m, collision_free {} ({:.0} ms)",
        result.trajectory.len(),
        metrics.iterations,
        result.cost_history[0],
        result.best_cost,
        metrics.e_rot,
        metrics.e_tran,
        metrics.collision_free,
        metrics.planning_ms
    ))
}

pub struct DemoArgs {
    pub n_points: usize,
    pub n_demos: usize,
    pub noise: f64,
    pub time_warp: f64,
    pub tangent: bool,
}

pub fn gen_demos(cfg: &RunConfig, shape: Shape, args: &DemoArgs, out_dir: &Path) -> Result<String, Failure> {
    let opts = LetterOptions {
        n_points: args.n_points,
        noise_scale: args.noise,
        n_demos: args.n_demos,
        seed: cfg.seed,
        time_warp: args.time_warp,
        orientation: if args.tangent { Orientation::Tangent } else { Orientation::Fixed },
        space: cfg.space,
        ..Default::default()
    };
    let demos = generate_letter_with(shape, &opts)?;
    fs::create_dir_all(out_dir)?;
    for (k, d) in demos.demos().iter().enumerate() {
        write_trajectory(&out_dir.join(format!("demo_{k}.traj")), d)?;
    }
    Ok(format!(
        "gen-demos: {} '{shape}' demonstrations of {} points in {}",
        args.n_demos,
        args.n_points,
        out_dir.display()
    ))
}
