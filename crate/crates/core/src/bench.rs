//! Evaluation metrics and synthetic demonstrations.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Vector2, Vector3};
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::encoder::DemoSet;
use crate::error::{Error, Result};
use crate::gora::{uniform_grid, Trajectory};
use crate::liegroup::{pack, pose_distance, Pose, Space};
use crate::rng;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub d_demo_rot: f64,
    pub d_demo_tran: f64,
    pub d_via_rot: f64,
    pub d_via_tran: f64,
    pub e_rot: f64,
    pub e_tran: f64,
    pub encode_ms: f64,
    pub condition_ms: f64,
}

/// Unconstrained DTW over a precomputed local cost grid.
pub fn dtw(cost: &DMatrix<f64>) -> f64 {
    let (n, m) = cost.shape();
    let mut acc = DMatrix::from_element(n, m, f64::INFINITY);
    for i in 0..n {
        for j in 0..m {
            let prev = if i == 0 && j == 0 {
                0.0
            } else {
                let mut best = f64::INFINITY;
                if i > 0 {
                    best = best.min(acc[(i - 1, j)]);
                }
                if j > 0 {
                    best = best.min(acc[(i, j - 1)]);
                }
                if i > 0 && j > 0 {
                    best = best.min(acc[(i - 1, j - 1)]);
                }
                best
            };
            acc[(i, j)] = cost[(i, j)] + prev;
        }
    }
    acc[(n - 1, m - 1)]
}

/// DTW of the rotation (Frobenius) and translation distance grids, each
/// aligned independently.
pub fn dtw_distance(a: &Trajectory, b: &Trajectory) -> (f64, f64) {
    let (pa, pb) = (a.poses(), b.poses());
    let mut rot = DMatrix::zeros(pa.len(), pb.len());
    let mut tran = DMatrix::zeros(pa.len(), pb.len());
    for (i, g1) in pa.iter().enumerate() {
        for (j, g2) in pb.iter().enumerate() {
            let (r, t) = pose_distance(g1, g2);
            rot[(i, j)] = r;
            tran[(i, j)] = t;
        }
    }
    (dtw(&rot), dtw(&tran))
}

/// Mean DTW over all sample and demo pairs, normalized by the number of
/// steps.
pub fn d_demo(samples: &[Trajectory], demos: &DemoSet) -> Result<(f64, f64)> {
    if samples.is_empty() || demos.is_empty() {
        return Err(Error::invalid("d_demo needs samples and demos"));
    }
    let (mut rot, mut tran) = (0.0, 0.0);
    for s in samples {
        for d in demos.demos() {
            let (r, t) = dtw_distance(s, d);
            rot += r;
            tran += t;
        }
    }
    let norm = (samples.len() * demos.len() * demos.n_step()) as f64;
    Ok((rot / norm, tran / norm))
}

/// Mean pose distance of every sample at `step` to `mu_star`.
pub fn d_via(samples: &[Trajectory], step: usize, mu_star: &Pose) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::invalid("d_via needs at least one sample"));
    }
    let (mut rot, mut tran) = (0.0, 0.0);
    for s in samples {
        let g = s
            .poses()
            .get(step)
            .ok_or_else(|| Error::invalid(format!("step {step} outside sample of length {}", s.len())))?;
        let (r, t) = pose_distance(g, mu_star);
        rot += r;
        tran += t;
    }
    Ok((rot / samples.len() as f64, tran / samples.len() as f64))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    N,
    U,
    S,
    Arc,
    Screw,
}

impl std::str::FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "n" => Ok(Shape::N),
            "u" => Ok(Shape::U),
            "s" => Ok(Shape::S),
            "arc" => Ok(Shape::Arc),
            "screw" => Ok(Shape::Screw),
            other => Err(Error::invalid(format!("unknown shape '{other}'"))),
        }
    }
}

impl std::fmt::Display for Shape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Shape::N => "n",
            Shape::U => "u",
            Shape::S => "s",
            Shape::Arc => "arc",
            Shape::Screw => "screw",
        };
        f.write_str(name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// Tool axis pointing down, constant heading.
    Fixed,
    /// Tool axis pointing down, heading along the stroke.
    Tangent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LetterOptions {
    pub n_points: usize,
    pub noise_scale: f64,
    pub n_demos: usize,
    pub seed: u64,
    /// Strength of the random monotone time warp, in `[0, 0.9]`.
    pub time_warp: f64,
    /// Edge length of the letter box in meters.
    pub size: f64,
    pub center: [f64; 3],
    pub orientation: Orientation,
    pub space: Space,
}

impl Default for LetterOptions {
    fn default() -> Self {
        LetterOptions {
            n_points: 100,
            noise_scale: 0.0,
            n_demos: 5,
            seed: 0,
            time_warp: 0.0,
            size: 0.2,
            center: [0.45, 0.0, 0.3],
            orientation: Orientation::Fixed,
            space: Space::Se3,
        }
    }
}

enum Segment {
    Line(Vector2<f64>, Vector2<f64>),
    Arc { center: Vector2<f64>, radius: f64, from: f64, to: f64 },
}

impl Segment {
    fn length(&self) -> f64 {
        match self {
            Segment::Line(a, b) => (b - a).norm(),
            Segment::Arc { radius, from, to, .. } => radius * (to - from).abs(),
        }
    }

    fn point(&self, u: f64) -> (Vector2<f64>, Vector2<f64>) {
        match self {
            Segment::Line(a, b) => (a + (b - a) * u, (b - a).normalize()),
            Segment::Arc { center, radius, from, to } => {
                let phi = from + (to - from) * u;
                let dir = (to - from).signum();
                (
                    center + Vector2::new(phi.cos(), phi.sin()) * *radius,
                    Vector2::new(-phi.sin(), phi.cos()) * dir,
                )
            }
        }
    }
}

fn strokes(shape: Shape) -> Vec<Segment> {
    let v = Vector2::new;
    match shape {
        Shape::N => vec![
            Segment::Line(v(-0.5, -0.5), v(-0.5, 0.5)),
            Segment::Line(v(-0.5, 0.5), v(0.5, -0.5)),
            Segment::Line(v(0.5, -0.5), v(0.5, 0.5)),
        ],
        Shape::U => vec![
            Segment::Line(v(-0.5, 0.5), v(-0.5, 0.0)),
            Segment::Arc { center: v(0.0, 0.0), radius: 0.5, from: PI, to: 2.0 * PI },
            Segment::Line(v(0.5, 0.0), v(0.5, 0.5)),
        ],
        Shape::S => vec![
            Segment::Arc { center: v(0.0, 0.25), radius: 0.25, from: 0.0, to: 1.5 * PI },
            Segment::Arc { center: v(0.0, -0.25), radius: 0.25, from: 0.5 * PI, to: -PI },
        ],
        Shape::Arc | Shape::Screw => {
            vec![Segment::Arc { center: v(0.0, 0.0), radius: 0.5, from: 0.0, to: PI }]
        }
    }
}

/// Point and unit tangent at arc-length fraction `s` of the stroke.
fn stroke_point(segments: &[Segment], s: f64) -> (Vector2<f64>, Vector2<f64>) {
    let total: f64 = segments.iter().map(Segment::length).sum();
    let mut remaining = s.clamp(0.0, 1.0) * total;
    for seg in segments {
        let len = seg.length();
        if remaining <= len {
            return seg.point(remaining / len);
        }
        remaining -= len;
    }
    segments.last().expect("strokes are nonempty").point(1.0)
}

/// Smooth random perturbation from three Fourier modes per component.
struct FourierNoise {
    coeffs: [[(f64, f64); 3]; 6],
}

impl FourierNoise {
    fn draw(rng: &mut rng::Rng) -> Self {
        let mut coeffs = [[(0.0, 0.0); 3]; 6];
        for comp in coeffs.iter_mut() {
            for c in comp.iter_mut() {
                *c = (StandardNormal.sample(rng), StandardNormal.sample(rng));
            }
        }
        FourierNoise { coeffs }
    }

    fn eval(&self, comp: usize, s: f64) -> f64 {
        self.coeffs[comp]
            .iter()
            .enumerate()
            .map(|(k, (a, b))| {
                let f = (k + 1) as f64 * PI * s;
                (a * f.sin() + b * f.cos()) / (k + 1) as f64
            })
            .sum()
    }
}

/// Random monotone map of `[0, 1]` onto itself.
struct TimeWarp {
    coeffs: [f64; 3],
}

impl TimeWarp {
    fn draw(rng: &mut rng::Rng, strength: f64) -> Self {
        let u = Uniform::new_inclusive(-1.0, 1.0).expect("valid range");
        let mut coeffs = [0.0; 3];
        for c in coeffs.iter_mut() {
            *c = strength * u.sample(rng) / 3.0;
        }
        TimeWarp { coeffs }
    }

    /// `s(u) = u + sum b_k sin(k pi u) / (k pi)`; `s'(u) >= 1 - sum |b_k| > 0`.
    fn eval(&self, u: f64) -> f64 {
        let s = u + self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, b)| {
                let f = (k + 1) as f64 * PI;
                b * (f * u).sin() / f
            })
            .sum::<f64>();
        s.clamp(0.0, 1.0)
    }
}

pub fn generate_letter(shape: Shape, n_points: usize, noise_scale: f64, n_demos: usize, seed: u64) -> Result<DemoSet> {
    generate_letter_with(shape, &LetterOptions { n_points, noise_scale, n_demos, seed, ..Default::default() })
}

pub fn generate_letter_with(shape: Shape, opts: &LetterOptions) -> Result<DemoSet> {
    if opts.n_points < 10 {
        return Err(Error::invalid(format!("need at least 10 points, got {}", opts.n_points)));
    }
    if opts.n_demos == 0 {
        return Err(Error::invalid("need at least one demonstration"));
    }
    if !(0.0..=0.9).contains(&opts.time_warp) {
        return Err(Error::invalid(format!("time warp {} outside [0, 0.9]", opts.time_warp)));
    }
    if !(opts.noise_scale >= 0.0 && opts.size > 0.0) {
        return Err(Error::invalid("noise scale must be nonnegative and size positive"));
    }
    let segments = strokes(shape);
    let center = Vector3::from(opts.center);
    let tool_down = Pose::from_axis_angle(Vector3::x() * PI, Space::Se3);
    let mut rng = rng::stream(opts.seed, rng::DEMOS);
    let times = uniform_grid(opts.n_points);

    let mut demos = Vec::with_capacity(opts.n_demos);
    for _ in 0..opts.n_demos {
        let noise = FourierNoise::draw(&mut rng);
        let warp = TimeWarp::draw(&mut rng, opts.time_warp);
        let mut poses = Vec::with_capacity(opts.n_points);
        for &u in &times {
            let s = warp.eval(u);
            let (p, tangent) = stroke_point(&segments, s);
            let mut heading = match opts.orientation {
                Orientation::Fixed => 0.0,
                Orientation::Tangent => tangent.y.atan2(tangent.x),
            };
            let mut translation = center + Vector3::new(p.x, p.y, 0.0) * opts.size;
            if shape == Shape::Screw {
                translation.z += opts.size * s;
                heading += PI * s;
            }
            let dt = Vector3::new(noise.eval(0, s), noise.eval(1, s), noise.eval(2, s)) * opts.noise_scale;
            // Two radians of orientation noise per meter of position noise.
            let dw = Vector3::new(noise.eval(3, s), noise.eval(4, s), noise.eval(5, s)) * (2.0 * opts.noise_scale);
            let base = Pose::from_translation(translation + dt, Space::Se3)
                * Pose::from_axis_angle(Vector3::z() * heading, Space::Se3)
                * tool_down;
            let noisy = base.retract(&pack(&dw, &Vector3::zeros()))?;
            poses.push(noisy.with_space(opts.space));
        }
        demos.push(Trajectory::new(poses, times.clone())?);
    }
    DemoSet::new(demos)
}
