//! Metrics and plot data: `metrics.json`, one CSV point set per trace group,
//! and an optional top-view SVG of the translation traces.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use lietraj::bench::{d_demo, d_via, MetricReport};
use lietraj::encoder::{sample_trajectories, DemoSet};
use lietraj::io::{parse_joint_trajectory, read_distribution, read_vias, RunConfig};
use lietraj::liegroup::Pose;
use lietraj::planner::tracking_error;
use serde::Serialize;

use crate::commands::{read_demos, Timing};
use crate::Failure;

pub struct ReportInputs {
    pub dist: PathBuf,
    pub out_dir: PathBuf,
    pub demos: Vec<PathBuf>,
    pub vias: Option<PathBuf>,
    pub plan: Option<PathBuf>,
    pub timings: Vec<PathBuf>,
    pub samples: usize,
    pub svg: bool,
}

#[derive(Serialize)]
struct PointRow {
    trace: usize,
    step: usize,
    x: f64,
    y: f64,
    z: f64,
}

struct Group {
    name: &'static str,
    color: &'static str,
    traces: Vec<Vec<Pose>>,
}

fn write_csv(path: &Path, traces: &[Vec<Pose>]) -> Result<(), Failure> {
    let mut writer = csv::Writer::from_path(path).map_err(csv_error)?;
    for (trace, poses) in traces.iter().enumerate() {
        for (step, g) in poses.iter().enumerate() {
            let t = g.translation();
            writer.serialize(PointRow { trace, step, x: t.x, y: t.y, z: t.z }).map_err(csv_error)?;
        }
    }
    writer.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Failure {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io.into(),
        other => Failure::Lib(lietraj::Error::InvalidArgument(format!("csv: {other:?}"))),
    }
}

/// Polylines of the x-y translation traces in a square canvas.
fn render_svg(groups: &[Group]) -> String {
    const SIZE: f64 = 600.0;
    const MARGIN: f64 = 30.0;
    let points = groups.iter().flat_map(|g| g.traces.iter().flatten());
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in points {
        let t = p.translation();
        for (k, v) in [t.x, t.y].into_iter().enumerate() {
            lo[k] = lo[k].min(v);
            hi[k] = hi[k].max(v);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9);
    let scale = (SIZE - 2.0 * MARGIN) / span;

    let mut svg = String::new();
    writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#)
        .unwrap();
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    for group in groups {
        let width = if group.name == "samples" || group.name == "demos" { 1.0 } else { 2.5 };
        writeln!(svg, r#"<g id="{}" stroke="{}" stroke-width="{width}" fill="none">"#, group.name, group.color).unwrap();
        for trace in &group.traces {
            let coords: Vec<String> = trace
                .iter()
                .map(|p| {
                    let t = p.translation();
                    // y grows upward in the plot.
                    format!("{:.2},{:.2}", MARGIN + (t.x - lo[0]) * scale, SIZE - MARGIN - (t.y - lo[1]) * scale)
                })
                .collect();
            writeln!(svg, r#"<polyline points="{}"/>"#, coords.join(" ")).unwrap();
        }
        writeln!(svg, "</g>").unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn run(cfg: &RunConfig, inputs: &ReportInputs) -> Result<String, Failure> {
    let dist = read_distribution(&inputs.dist)?;
    let samples = sample_trajectories(&dist, inputs.samples, cfg.seed)?;
    let mut report = MetricReport::default();
    let mut groups = vec![Group {
        name: "samples",
        color: "#9ecae1",
        traces: samples.iter().map(|s| s.poses().to_vec()).collect(),
    }];

    if !inputs.demos.is_empty() {
        let demos = DemoSet::new(read_demos(cfg, &inputs.demos, true)?)?;
        (report.d_demo_rot, report.d_demo_tran) = d_demo(&samples, &demos)?;
        groups.push(Group { name: "demos", color: "#bdbdbd", traces: demos.demos().iter().map(|d| d.poses().to_vec()).collect() });
    }

    if let Some(path) = &inputs.vias {
        let vias = read_vias(path, dist.space())?;
        for via in &vias {
            let (r, t) = d_via(&samples, via.step_index(dist.n_steps()), via.g_star())?;
            report.d_via_rot += r / vias.len() as f64;
            report.d_via_tran += t / vias.len() as f64;
        }
    }

    groups.push(Group { name: "mean", color: "black", traces: vec![dist.mean().to_vec()] });

    if let Some(path) = &inputs.plan {
        let plan = parse_joint_trajectory(&fs::read_to_string(path)?)?;
        let ee = plan.ee_poses(&cfg.load_chain()?)?;
        (report.e_rot, report.e_tran) = tracking_error(&ee, dist.mean())?;
        groups.push(Group { name: "plan", color: "#d62728", traces: vec![ee] });
    }

    for path in &inputs.timings {
        let timing: Timing = serde_json::from_str(&fs::read_to_string(path)?)
            .map_err(|e| lietraj::Error::Schema(format!("{}: {e}", path.display())))?;
        match timing.command.as_str() {
            "encode" => report.encode_ms = timing.ms,
            "condition" => report.condition_ms = timing.ms,
            _ => {}
        }
    }

    fs::create_dir_all(&inputs.out_dir)?;
    fs::write(
        inputs.out_dir.join("metrics.json"),
        serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
    )?;
    for group in &groups {
        write_csv(&inputs.out_dir.join(format!("{}.csv", group.name)), &group.traces)?;
    }
    if inputs.svg {
        fs::write(inputs.out_dir.join("traces.svg"), render_svg(&groups))?;
    }

    Ok(format!(
        "report: D_demo ({:.4e}, {:.4e}) D_via ({:.4e}, {:.4e}) e ({:.4e}, {:.4e}) -> {}",
        report.d_demo_rot,
        report.d_demo_tran,
        report.d_via_rot,
        report.d_via_tran,
        report.e_rot,
        report.e_tran,
        inputs.out_dir.display()
    ))
}
