//! Globally optimal temporal reparameterization of pose trajectories.
//!
//! Each demonstration is re-timed so that its weighted body speed
//! `g(tau)^(1/2)` becomes constant. The optimal time map is the inverse of the
//! normalized cumulative integral
//!
//! ```text
//! F(tau) = int_0^tau g^(1/2) / int_0^1 g^(1/2)
//! ```
//!
//! where `g(tau) = |g^-1 dg/dtau|_W^2` is the squared body velocity measured in
//! the inertia-weighted norm `|A|_W^2 = tr(A W A^T)`.

use nalgebra::{Matrix3, Matrix4};

use crate::error::{Error, Result};
use crate::liegroup::{hat, interpolate, log_map, Pose, Space};

/// An ordered pose sequence with strictly increasing times pinned to `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    poses: Vec<Pose>,
    times: Vec<f64>,
}

impl Trajectory {
    pub fn new(poses: Vec<Pose>, times: Vec<f64>) -> Result<Self> {
        if poses.len() < 2 {
            return Err(Error::invalid("trajectory needs at least two poses"));
        }
        if poses.len() != times.len() {
            return Err(Error::invalid(format!(
                "{} poses but {} time stamps",
                poses.len(),
                times.len()
            )));
        }
        let space = poses[0].space();
        if poses.iter().any(|p| p.space() != space) {
            return Err(Error::invalid("trajectory mixes SE(3) and PCG(3) poses"));
        }
        if times[0] != 0.0 || *times.last().expect("non-empty") != 1.0 {
            return Err(Error::invalid("trajectory times must start at 0 and end at 1"));
        }
        if let Some(k) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::invalid(format!(
                "trajectory times not strictly increasing at index {}",
                k + 1
            )));
        }
        Ok(Trajectory { poses, times })
    }

    /// Poses on the uniform grid `k / (len - 1)`.
    pub fn uniform(poses: Vec<Pose>) -> Result<Self> {
        let times = uniform_grid(poses.len());
        Trajectory::new(poses, times)
    }

    pub fn poses(&self) -> &[Pose] {
        &self.poses
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn space(&self) -> Space {
        self.poses[0].space()
    }

    /// Same data, reinterpreted in another group.
    pub fn with_space(&self, space: Space) -> Trajectory {
        Trajectory {
            poses: self.poses.iter().map(|p| p.with_space(space)).collect(),
            times: self.times.clone(),
        }
    }
}

/// `k / (n - 1)` for `k = 0..n`, with both endpoints exact.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => {
            let mut t: Vec<f64> = (0..n).map(|k| k as f64 / (n - 1) as f64).collect();
            t[n - 1] = 1.0;
            t
        }
    }
}

/// The 4x4 weight of the kinetic-energy norm on se(3).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightMatrix {
    inertia: Matrix3<f64>,
}

impl WeightMatrix {
    /// Inertia tensor of a solid sphere with unit mass and the given radius.
    pub fn solid_sphere(radius: f64) -> Self {
        WeightMatrix { inertia: Matrix3::identity() * (0.4 * radius * radius) }
    }

    pub fn from_inertia(inertia: Matrix3<f64>) -> Result<Self> {
        if (inertia - inertia.transpose()).norm() > 1e-12 {
            return Err(Error::invalid("inertia tensor must be symmetric"));
        }
        Ok(WeightMatrix { inertia })
    }

    pub fn inertia(&self) -> &Matrix3<f64> {
        &self.inertia
    }

    /// `[[tr(I)/2 * I3 - I, 0], [0, 1]]`.
    pub fn matrix(&self) -> Matrix4<f64> {
        let mut w = Matrix4::zeros();
        let upper = Matrix3::identity() * (0.5 * self.inertia.trace()) - self.inertia;
        w.fixed_view_mut::<3, 3>(0, 0).copy_from(&upper);
        w[(3, 3)] = 1.0;
        w
    }

    /// `tr(A W A^T)`.
    pub fn norm_squared(&self, a: &Matrix4<f64>) -> f64 {
        (a * self.matrix() * a.transpose()).trace()
    }
}

impl Default for WeightMatrix {
    fn default() -> Self {
        WeightMatrix::solid_sphere(1.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GoraOptions {
    pub n_step: usize,
    pub weight: WeightMatrix,
    /// Centered moving-average window applied to the body speed before
    /// integration; `0` or `1` disables smoothing.
    pub smoothing_window: usize,
}

impl Default for GoraOptions {
    fn default() -> Self {
        GoraOptions { n_step: 50, weight: WeightMatrix::default(), smoothing_window: 0 }
    }
}

impl GoraOptions {
    pub fn with_n_step(n_step: usize) -> Self {
        GoraOptions { n_step, ..Default::default() }
    }
}

/// Finite-difference body-velocity integrand on step `i -> i + 1`.
pub fn integrand_g(traj: &Trajectory, i: usize, weight: &WeightMatrix) -> Result<f64> {
    if i + 1 >= traj.len() {
        return Err(Error::invalid(format!(
            "step index {i} out of range for trajectory of length {}",
            traj.len()
        )));
    }
    let dt = traj.times[i + 1] - traj.times[i];
    if dt <= 0.0 {
        return Err(Error::DegenerateTime { index: i });
    }
    let xi = log_map(&traj.poses[i].relative(&traj.poses[i + 1])?)?;
    Ok(weight.norm_squared(&(hat(&xi) / dt)))
}

fn smooth(values: &[f64], window: usize) -> Vec<f64> {
    if window <= 1 {
        return values.to_vec();
    }
    let half = window / 2;
    (0..values.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(values.len());
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// Re-times `traj` onto `opts.n_step` uniformly spaced samples of the optimal
/// time map. Returns the resampled trajectory and `tau*` evaluated on the
/// uniform output grid.
pub fn reparameterize(traj: &Trajectory, opts: &GoraOptions) -> Result<(Trajectory, Vec<f64>)> {
    if opts.n_step < 2 {
        return Err(Error::invalid("n_step must be at least 2"));
    }
    let n_raw = traj.len();
    let speeds: Vec<f64> = (0..n_raw - 1)
        .map(|i| integrand_g(traj, i, &opts.weight).map(f64::sqrt))
        .collect::<Result<_>>()?;
    let speeds = smooth(&speeds, opts.smoothing_window);

    // Trapezoidal accumulation; the forward-difference speed is constant over
    // each step, so both trapezoid nodes of a step carry the same value.
    let mut cumulative = Vec::with_capacity(n_raw);
    cumulative.push(0.0);
    for (i, s) in speeds.iter().enumerate() {
        let dt = traj.times[i + 1] - traj.times[i];
        let prev = *cumulative.last().expect("non-empty");
        cumulative.push(prev + 0.5 * (s + s) * dt);
    }
    let total = cumulative[n_raw - 1];
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::DegenerateTrajectory);
    }
    for f in cumulative.iter_mut() {
        *f /= total;
    }
    cumulative[n_raw - 1] = 1.0;

    let grid = uniform_grid(opts.n_step);
    let mut tau_star = Vec::with_capacity(opts.n_step);
    let mut poses = Vec::with_capacity(opts.n_step);
    for (k, &t) in grid.iter().enumerate() {
        if k == 0 {
            tau_star.push(0.0);
            poses.push(traj.poses[0]);
            continue;
        }
        if k == opts.n_step - 1 {
            tau_star.push(1.0);
            poses.push(traj.poses[n_raw - 1]);
            continue;
        }
        // First step whose upper cumulative value reaches t.
        let j = cumulative[1..].partition_point(|&f| f < t).min(n_raw - 2);
        let (f0, f1) = (cumulative[j], cumulative[j + 1]);
        let alpha = if f1 > f0 { ((t - f0) / (f1 - f0)).clamp(0.0, 1.0) } else { 0.0 };
        let (t0, t1) = (traj.times[j], traj.times[j + 1]);
        tau_star.push(t0 + alpha * (t1 - t0));
        poses.push(interpolate(&traj.poses[j], &traj.poses[j + 1], alpha)?);
    }
    Ok((Trajectory::uniform(poses)?, tau_star))
}

/// Per-step weighted body speeds of a trajectory.
pub fn body_speeds(traj: &Trajectory, weight: &WeightMatrix) -> Result<Vec<f64>> {
    (0..traj.len() - 1)
        .map(|i| integrand_g(traj, i, weight).map(f64::sqrt))
        .collect()
}
