//! Joint-space STOMP guided toward a learned trajectory distribution.
//!
//! The per-step cost is a guidance term (mean Lie-group distance from the
//! end effector to a fixed set of reference samples) plus a hinge penalty
//! on sphere obstacles. Rollout noise is correlated through the inverse of
//! the finite-difference acceleration metric, and updates are smoothed by
//! the usual projection matrix.

use std::time::Instant;

use nalgebra::{DMatrix, DVector, Vector3};
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::encoder::TrajectoryDistribution;
use crate::error::{Error, Result};
use crate::gora::Trajectory;
use crate::liegroup::{rotation_angle, Pose, Space};
use crate::rng;
use crate::workspace::{forward_kinematics, inverse_kinematics, KinematicChain};

/// Spacing of collision spheres along each link.
pub const BODY_SPHERE_SPACING: f64 = 0.05;
const IK_RESTARTS: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct Sphere {
    pub center: Vector3<f64>,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct PlanningScene {
    obstacles: Vec<Sphere>,
    clearance: f64,
}

impl PlanningScene {
    pub fn new(obstacles: Vec<Sphere>, clearance: f64) -> Result<Self> {
        if !(clearance >= 0.0 && clearance.is_finite()) {
            return Err(Error::invalid(format!("clearance must be nonnegative, got {clearance}")));
        }
        for (i, s) in obstacles.iter().enumerate() {
            if !(s.radius > 0.0 && s.radius.is_finite()) || s.center.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("obstacle {i} needs a finite center and positive radius")));
            }
        }
        Ok(PlanningScene { obstacles, clearance })
    }

    pub fn empty() -> Self {
        PlanningScene::default()
    }

    pub fn obstacles(&self) -> &[Sphere] {
        &self.obstacles
    }

    pub fn clearance(&self) -> f64 {
        self.clearance
    }
}

/// Waypoints as rows of joint angles.
#[derive(Clone, Debug, PartialEq)]
pub struct JointTrajectory {
    pub waypoints: DMatrix<f64>,
    pub fixed_endpoints: bool,
}

impl JointTrajectory {
    pub fn len(&self) -> usize {
        self.waypoints.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.nrows() == 0
    }

    pub fn waypoint(&self, i: usize) -> DVector<f64> {
        self.waypoints.row(i).transpose()
    }

    /// End-effector poses of every waypoint.
    pub fn ee_poses(&self, chain: &KinematicChain) -> Result<Vec<Pose>> {
        (0..self.len())
            .map(|i| forward_kinematics(chain, &self.waypoint(i)).map(|(ee, _)| ee))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StompParams {
    pub n_rollouts: usize,
    pub n_iterations: usize,
    pub noise_stddev: f64,
    pub temperature: f64,
    pub w_rot: f64,
    pub w_tran: f64,
    pub w_guide: f64,
    pub w_obs: f64,
    pub w_smooth: f64,
    pub m_r: usize,
    pub body_radius: f64,
    /// Seed configuration for the first IK solve; the middle of the joint
    /// limits when absent.
    pub ik_seed: Option<Vec<f64>>,
}

impl Default for StompParams {
    fn default() -> Self {
        StompParams {
            n_rollouts: 20,
            n_iterations: 100,
            noise_stddev: 0.05,
            temperature: 10.0,
            w_rot: 1.0,
            w_tran: 1.0,
            w_guide: 1.0,
            w_obs: 10.0,
            w_smooth: 1.0,
            m_r: 20,
            body_radius: 0.05,
            ik_seed: None,
        }
    }
}

impl StompParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("noise_stddev", self.noise_stddev),
            ("temperature", self.temperature),
            ("body_radius", self.body_radius),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        let weights = [
            ("w_rot", self.w_rot),
            ("w_tran", self.w_tran),
            ("w_guide", self.w_guide),
            ("w_obs", self.w_obs),
            ("w_smooth", self.w_smooth),
        ];
        for (name, v) in weights {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be nonnegative, got {v}")));
            }
        }
        if self.n_rollouts < 2 {
            return Err(Error::invalid("need at least two rollouts"));
        }
        if self.m_r == 0 {
            return Err(Error::invalid("need at least one reference sample"));
        }
        Ok(())
    }
}

/// Mean of `w_rot |log(R^T R_k)| + w_tran |t - t_k|` over the reference
/// samples at `step`.
pub fn guidance_cost(ee: &Pose, step: usize, refs: &[Trajectory], w_rot: f64, w_tran: f64) -> Result<f64> {
    if refs.is_empty() {
        return Err(Error::invalid("guidance needs at least one reference sample"));
    }
    let mut total = 0.0;
    for r in refs {
        let g = r
            .poses()
            .get(step)
            .ok_or_else(|| Error::invalid(format!("step {step} outside reference sample of length {}", r.len())))?;
        let rot = rotation_angle(&(ee.rotation().transpose() * g.rotation()));
        let tran = (ee.translation() - g.translation()).norm();
        total += w_rot * rot + w_tran * tran;
    }
    Ok(total / refs.len() as f64)
}

/// Collision spheres along the segments joining consecutive link origins,
/// from the base to the end effector.
pub fn body_spheres(chain: &KinematicChain, q: &DVector<f64>) -> Result<Vec<Vector3<f64>>> {
    let (ee, frames) = forward_kinematics(chain, q)?;
    let mut points = vec![Vector3::zeros()];
    points.extend(frames.iter().map(|f| *f.translation()));
    points.push(*ee.translation());
    let mut centers = Vec::new();
    for w in points.windows(2) {
        let length = (w[1] - w[0]).norm();
        let count = (length / BODY_SPHERE_SPACING).ceil() as usize;
        centers.push(w[0]);
        for k in 1..=count {
            centers.push(w[0] + (w[1] - w[0]) * (k as f64 / count as f64));
        }
    }
    centers.dedup();
    Ok(centers)
}

/// Sum over body and obstacle sphere pairs of the penetration depth, with
/// the clearance added to both radii.
pub fn obstacle_cost(chain: &KinematicChain, q: &DVector<f64>, scene: &PlanningScene, body_radius: f64) -> Result<f64> {
    if scene.obstacles.is_empty() {
        return Ok(0.0);
    }
    Ok(sphere_penetration(&body_spheres(chain, q)?, scene, body_radius))
}

fn sphere_penetration(centers: &[Vector3<f64>], scene: &PlanningScene, body_radius: f64) -> f64 {
    let mut cost = 0.0;
    for c in centers {
        for o in &scene.obstacles {
            cost += (scene.clearance + body_radius + o.radius - (c - o.center).norm()).max(0.0);
        }
    }
    cost
}

#[derive(Clone, Debug)]
pub struct PlanResult {
    pub trajectory: JointTrajectory,
    /// Total cost of the current trajectory after each iteration, preceded
    /// by the cost of the initialization.
    pub cost_history: Vec<f64>,
    pub best_cost: f64,
    pub collision_free: bool,
    pub iterations: usize,
    pub planning_ms: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlanMetrics {
    pub e_rot: f64,
    pub e_tran: f64,
    pub collision_free: bool,
    pub planning_ms: f64,
    pub iterations: usize,
}

/// Accumulated rotation log-norm and translation distance between two
/// pose sequences of equal length.
pub fn tracking_error(poses: &[Pose], reference: &[Pose]) -> Result<(f64, f64)> {
    if poses.len() != reference.len() {
        return Err(Error::invalid(format!(
            "trajectories have {} and {} steps",
            poses.len(),
            reference.len()
        )));
    }
    Ok(poses.iter().zip(reference).fold((0.0, 0.0), |(r, t), (a, b)| {
        (
            r + rotation_angle(&(a.rotation().transpose() * b.rotation())),
            t + (a.translation() - b.translation()).norm(),
        )
    }))
}

pub fn plan_report(
    chain: &KinematicChain,
    result: &PlanResult,
    dist: &TrajectoryDistribution,
    scene: &PlanningScene,
    body_radius: f64,
) -> Result<PlanMetrics> {
    let ee = result.trajectory.ee_poses(chain)?;
    let (e_rot, e_tran) = tracking_error(&ee, dist.mean())?;
    let mut collision_free = true;
    for i in 0..result.trajectory.len() {
        if obstacle_cost(chain, &result.trajectory.waypoint(i), scene, body_radius)? > 0.0 {
            collision_free = false;
            break;
        }
    }
    Ok(PlanMetrics { e_rot, e_tran, collision_free, planning_ms: result.planning_ms, iterations: result.iterations })
}

/// Reference samples drawn in antithetic pairs `mu exp(+-x)`.
pub fn reference_samples(dist: &TrajectoryDistribution, m_r: usize, seed: u64) -> Result<Vec<Trajectory>> {
    let pairs = m_r.div_ceil(2);
    let mut out = Vec::with_capacity(2 * pairs);
    for x in dist.sample_tangent(pairs, seed)? {
        out.push(Trajectory::uniform(dist.poses_from_tangent(&x)?)?);
        if out.len() < m_r {
            out.push(Trajectory::uniform(dist.poses_from_tangent(&(-x))?)?);
        }
    }
    Ok(out)
}

/// Solves IK along the mean, seeding each waypoint with the previous
/// solution and falling back to deterministic random restarts.
pub fn initialize(
    chain: &KinematicChain,
    targets: &[Pose],
    ik_seed: Option<&[f64]>,
    seed: u64,
) -> Result<DMatrix<f64>> {
    let m = chain.dof();
    let mid = DVector::from_iterator(m, chain.joints().iter().map(|j| 0.5 * (j.limits.0 + j.limits.1)));
    let mut prev = match ik_seed {
        Some(s) if s.len() == m => chain.clamp(&DVector::from_column_slice(s)),
        Some(s) => {
            return Err(Error::invalid(format!("IK seed has {} entries, chain has {m} joints", s.len())));
        }
        None => mid,
    };
    let mut rng = rng::stream(seed, rng::PLANNER_REFERENCE + 100);
    let mut out = DMatrix::zeros(targets.len(), m);
    for (i, target) in targets.iter().enumerate() {
        let mut solved = inverse_kinematics(chain, target, &prev);
        let mut restarts = 0;
        let q = loop {
            match solved {
                Ok(q) => break q,
                Err(e) if restarts == IK_RESTARTS => {
                    return Err(Error::PlannerInit { waypoint: i, source: Box::new(e) });
                }
                Err(_) => {
                    let q0 = DVector::from_iterator(
                        m,
                        chain.joints().iter().map(|j| rng.random_range(j.limits.0..=j.limits.1)),
                    );
                    solved = inverse_kinematics(chain, target, &q0);
                    restarts += 1;
                }
            }
        };
        out.set_row(i, &q.transpose());
        prev = q;
    }
    Ok(out)
}

/// Finite-difference acceleration metric `R = A^T A` over the free
/// waypoints, with the fixed endpoints padding `A`.
fn acceleration_metric(n: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(n + 2, n);
    for row in 0..n + 2 {
        for (offset, c) in [(0usize, 1.0), (1, -2.0), (2, 1.0)] {
            // Column index row - 2 + offset, in range.
            if let Some(col) = (row + offset).checked_sub(2) {
                if col < n {
                    a[(row, col)] = c;
                }
            }
        }
    }
    a.transpose() * a
}

struct Smoothing {
    /// Cholesky factor of `R^-1` scaled to unit maximum variance.
    noise_factor: DMatrix<f64>,
    /// `R^-1` with columns scaled to a maximum of `1 / n`.
    projection: DMatrix<f64>,
}

impl Smoothing {
    fn new(n: usize) -> Result<Self> {
        let r_inv = acceleration_metric(n)
            .try_inverse()
            .ok_or_else(|| Error::invalid("acceleration metric is singular"))?;
        let r_inv = (&r_inv + r_inv.transpose()) * 0.5;
        let max_diag = r_inv.diagonal().max();
        let noise_factor = (&r_inv / max_diag)
            .cholesky()
            .ok_or_else(|| Error::NotPositiveDefinite("smoothing covariance".into()))?
            .l();
        let mut projection = r_inv;
        for mut col in projection.column_iter_mut() {
            let peak = col.max();
            col /= peak * n as f64;
        }
        Ok(Smoothing { noise_factor, projection })
    }
}

/// Smoothness-correlated noise in antithetic pairs, one free-waypoint x
/// joint matrix per rollout.
fn rollout_noise(
    smoothing: &Smoothing,
    pairs: usize,
    m: usize,
    stddev: f64,
    rng: &mut rng::Rng,
) -> Vec<DMatrix<f64>> {
    let free = smoothing.noise_factor.nrows();
    let mut noise = Vec::with_capacity(2 * pairs);
    for _ in 0..pairs {
        let z = DMatrix::from_fn(free, m, |_, _| StandardNormal.sample(rng));
        let eps: DMatrix<f64> = &smoothing.noise_factor * z * stddev;
        noise.push(eps.clone());
        noise.push(-eps);
    }
    noise
}

struct Problem<'a> {
    chain: &'a KinematicChain,
    scene: &'a PlanningScene,
    refs: Vec<Trajectory>,
    params: &'a StompParams,
}

impl Problem<'_> {
    fn step_cost(&self, q: &DVector<f64>, step: usize) -> Result<f64> {
        let mut cost = 0.0;
        if self.params.w_guide > 0.0 {
            let (ee, _) = forward_kinematics(self.chain, q)?;
            cost += self.params.w_guide * guidance_cost(&ee, step, &self.refs, self.params.w_rot, self.params.w_tran)?;
        }
        if self.params.w_obs > 0.0 {
            cost += self.params.w_obs * obstacle_cost(self.chain, q, self.scene, self.params.body_radius)?;
        }
        Ok(cost)
    }

    fn total_cost(&self, theta: &DMatrix<f64>) -> Result<f64> {
        let mut cost = 0.0;
        for i in 0..theta.nrows() {
            cost += self.step_cost(&theta.row(i).transpose(), i)?;
        }
        if self.params.w_smooth > 0.0 {
            let mut acc = 0.0;
            for i in 1..theta.nrows().saturating_sub(1) {
                acc += (theta.row(i - 1) - theta.row(i) * 2.0 + theta.row(i + 1)).norm_squared();
            }
            cost += 0.5 * self.params.w_smooth * acc;
        }
        Ok(cost)
    }

    fn collision_free(&self, theta: &DMatrix<f64>) -> Result<bool> {
        for i in 0..theta.nrows() {
            if obstacle_cost(self.chain, &theta.row(i).transpose(), self.scene, self.params.body_radius)? > 0.0 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Runs guided STOMP from the IK solution of the distribution's mean and
/// returns the lowest-cost trajectory seen. Endpoints stay at the IK
/// solutions of the first and last mean poses.
pub fn stomp_plan(
    chain: &KinematicChain,
    scene: &PlanningScene,
    dist: &TrajectoryDistribution,
    params: &StompParams,
    seed: u64,
) -> Result<PlanResult> {
    params.validate()?;
    let start = Instant::now();
    let targets: Vec<Pose> = dist.mean().iter().map(|p| p.with_space(Space::Se3)).collect();
    let mut theta = initialize(chain, &targets, params.ik_seed.as_deref(), seed)?;
    let n_wp = theta.nrows();
    let m = chain.dof();

    let ref_seed: u64 = rng::stream(seed, rng::PLANNER_REFERENCE).random();
    let problem = Problem { chain, scene, refs: reference_samples(dist, params.m_r, ref_seed)?, params };

    let mut best = theta.clone();
    let mut best_cost = problem.total_cost(&theta)?;
    let mut history = vec![best_cost];
    let free = n_wp.saturating_sub(2);
    if free == 0 || params.n_iterations == 0 {
        return Ok(PlanResult {
            collision_free: problem.collision_free(&best)?,
            trajectory: JointTrajectory { waypoints: best, fixed_endpoints: true },
            cost_history: history,
            best_cost,
            iterations: 0,
            planning_ms: start.elapsed().as_secs_f64() * 1e3,
        });
    }

    let smoothing = Smoothing::new(free)?;
    let mut noise_rng = rng::stream(seed, rng::PLANNER_NOISE);
    let pairs = params.n_rollouts.div_ceil(2);
    let k_total = 2 * pairs;

    for _ in 0..params.n_iterations {
        let noise = rollout_noise(&smoothing, pairs, m, params.noise_stddev, &mut noise_rng);

        let mut effective: Vec<DMatrix<f64>> = Vec::with_capacity(k_total);
        let mut costs = DMatrix::zeros(k_total, free);
        for (k, eps) in noise.iter().enumerate() {
            let mut eff = DMatrix::zeros(free, m);
            for s in 0..free {
                let base = theta.row(s + 1).transpose();
                let q = chain.clamp(&(&base + eps.row(s).transpose()));
                eff.set_row(s, &(&q - &base).transpose());
                costs[(k, s)] = problem.step_cost(&q, s + 1)?;
            }
            effective.push(eff);
        }

        let mut delta = DMatrix::zeros(free, m);
        for s in 0..free {
            let col = costs.column(s);
            let (lo, hi) = (col.min(), col.max());
            let range = hi - lo;
            let weights: Vec<f64> = if range > 1e-12 {
                col.iter().map(|c| (-params.temperature * (c - lo) / range).exp()).collect()
            } else {
                vec![1.0; k_total]
            };
            let norm: f64 = weights.iter().sum();
            for (k, w) in weights.iter().enumerate() {
                let row = effective[k].row(s) * (w / norm);
                let mut target = delta.row_mut(s);
                target += row;
            }
        }
        let delta = &smoothing.projection * delta;
        for s in 0..free {
            let q = chain.clamp(&(theta.row(s + 1) + delta.row(s)).transpose());
            theta.set_row(s + 1, &q.transpose());
        }

        let cost = problem.total_cost(&theta)?;
        history.push(cost);
        if cost < best_cost {
            best_cost = cost;
            best.copy_from(&theta);
        }
    }

    Ok(PlanResult {
        collision_free: problem.collision_free(&best)?,
        trajectory: JointTrajectory { waypoints: best, fixed_endpoints: true },
        cost_history: history,
        best_cost,
        iterations: params.n_iterations,
        planning_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}
