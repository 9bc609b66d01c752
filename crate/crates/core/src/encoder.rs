//! Encoding time-aligned demonstrations as a joint Gaussian over the whole
//! trajectory.
//!
//! Step `i` of a trajectory is written as `g_i = mu_i exp(x_i)`. The start pose
//! is pinned to `mu_0`, and each step only depends on its predecessor through
//! the relative-pose covariance `Sigma_{i,i+1}`. Linearizing
//! `log((mu_i^-1 mu_{i+1})^-1 g_i^-1 g_{i+1}) ~ x_{i+1} - Ad_{i,i+1}^-1 x_i`
//! gives a zero-mean Gaussian on the stacked `x_1..x_n` whose precision is
//! block-tridiagonal:
//!
//! ```text
//! P(i, i)     = Sigma_{i-1,i}^-1 + Ad_{i,i+1}^-T Sigma_{i,i+1}^-1 Ad_{i,i+1}^-1   (i < n)
//! P(n, n)     = Sigma_{n-1,n}^-1
//! P(i, i + 1) = -Ad_{i,i+1}^-T Sigma_{i,i+1}^-1
//! P(i + 1, i) = P(i, i + 1)^T
//! ```

use nalgebra::{Cholesky, DMatrix, DVector, Matrix6};
use rand_distr::{Distribution, StandardNormal};

use crate::banded::{Block, BlockTridiagonal};
use crate::error::{Error, Result};
use crate::gora::Trajectory;
use crate::liegroup::{log_map, Pose, Space, Twist};
use crate::rng;

/// Convergence threshold on `|sum_k log(mu^-1 g_k)|`.
pub const MEAN_TOLERANCE: f64 = 1e-8;
pub const MEAN_MAX_ITERATIONS: usize = 100;

/// Default covariance floor added to every relative covariance.
pub const DEFAULT_LAMBDA_REG: f64 = 1e-6;

/// A set of demonstrations resampled onto a common grid.
#[derive(Clone, Debug)]
pub struct DemoSet {
    demos: Vec<Trajectory>,
}

impl DemoSet {
    pub fn new(demos: Vec<Trajectory>) -> Result<Self> {
        let first = demos.first().ok_or_else(|| Error::invalid("demo set is empty"))?;
        let (len, space) = (first.len(), first.space());
        for (k, d) in demos.iter().enumerate() {
            if d.len() != len {
                return Err(Error::invalid(format!(
                    "demo {k} has {} steps, expected {len}",
                    d.len()
                )));
            }
            if d.space() != space {
                return Err(Error::invalid(format!("demo {k} uses {} poses, expected {space}", d.space())));
            }
        }
        Ok(DemoSet { demos })
    }

    pub fn demos(&self) -> &[Trajectory] {
        &self.demos
    }

    pub fn len(&self) -> usize {
        self.demos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.demos.is_empty()
    }

    /// Number of poses per demonstration.
    pub fn n_step(&self) -> usize {
        self.demos[0].len()
    }

    pub fn space(&self) -> Space {
        self.demos[0].space()
    }

    fn step(&self, i: usize) -> Vec<Pose> {
        self.demos.iter().map(|d| d.poses()[i]).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EncodeOptions {
    pub lambda_reg: f64,
    /// Replaces the `lambda_reg * I` floor when set, e.g. to give a single
    /// demonstration a hand-picked spread.
    pub initial_covariance: Option<Matrix6<f64>>,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        EncodeOptions { lambda_reg: DEFAULT_LAMBDA_REG, initial_covariance: None }
    }
}

impl EncodeOptions {
    fn floor(&self) -> Matrix6<f64> {
        self.initial_covariance
            .unwrap_or_else(|| Matrix6::identity() * self.lambda_reg)
    }
}

/// Uncertainty over the stacked tangent deviations `x_1..x_n`.
#[derive(Clone, Debug, PartialEq)]
pub enum JointUncertainty {
    /// Block-tridiagonal precision, as produced by [`encode`].
    Banded(BlockTridiagonal),
    /// Dense covariance; conditioning fills in the band.
    Dense(DMatrix<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryDistribution {
    space: Space,
    mean: Vec<Pose>,
    rel_cov: Vec<Matrix6<f64>>,
    uncertainty: JointUncertainty,
}

impl TrajectoryDistribution {
    /// Assembles the banded joint precision from a mean trajectory
    /// `mu_0..mu_n` and relative covariances `Sigma_{0,1}..Sigma_{n-1,n}`.
    pub fn from_parts(mean: Vec<Pose>, rel_cov: Vec<Matrix6<f64>>) -> Result<Self> {
        let space = check_mean(&mean)?;
        if rel_cov.len() + 1 != mean.len() {
            return Err(Error::invalid(format!(
                "{} mean poses need {} relative covariances, got {}",
                mean.len(),
                mean.len() - 1,
                rel_cov.len()
            )));
        }
        let precision = assemble_precision(&mean, &rel_cov)?;
        Ok(TrajectoryDistribution { space, mean, rel_cov, uncertainty: JointUncertainty::Banded(precision) })
    }

    /// A distribution whose joint covariance is stored densely.
    pub fn with_covariance(mean: Vec<Pose>, rel_cov: Vec<Matrix6<f64>>, covariance: DMatrix<f64>) -> Result<Self> {
        let space = check_mean(&mean)?;
        let dim = 6 * (mean.len() - 1);
        if rel_cov.len() + 1 != mean.len() {
            return Err(Error::invalid("relative covariance count does not match mean"));
        }
        if covariance.nrows() != dim || covariance.ncols() != dim {
            return Err(Error::invalid(format!(
                "joint covariance must be {dim}x{dim}, got {}x{}",
                covariance.nrows(),
                covariance.ncols()
            )));
        }
        let t = covariance.transpose();
        let covariance = (covariance + t) * 0.5;
        Ok(TrajectoryDistribution { space, mean, rel_cov, uncertainty: JointUncertainty::Dense(covariance) })
    }

    pub fn space(&self) -> Space {
        self.space
    }

    /// Number of random steps `n` (the mean has `n + 1` poses).
    pub fn n_steps(&self) -> usize {
        self.mean.len() - 1
    }

    pub fn dim(&self) -> usize {
        6 * self.n_steps()
    }

    pub fn mean(&self) -> &[Pose] {
        &self.mean
    }

    pub fn mean_trajectory(&self) -> Result<Trajectory> {
        Trajectory::uniform(self.mean.clone())
    }

    pub fn rel_cov(&self) -> &[Matrix6<f64>] {
        &self.rel_cov
    }

    pub fn uncertainty(&self) -> &JointUncertainty {
        &self.uncertainty
    }

    /// The banded precision, if the band structure is still intact.
    pub fn joint_precision(&self) -> Option<&BlockTridiagonal> {
        match &self.uncertainty {
            JointUncertainty::Banded(p) => Some(p),
            JointUncertainty::Dense(_) => None,
        }
    }

    pub fn joint_covariance(&self) -> Result<DMatrix<f64>> {
        match &self.uncertainty {
            JointUncertainty::Banded(p) => Ok(p.cholesky()?.inverse()),
            JointUncertainty::Dense(c) => Ok(c.clone()),
        }
    }

    /// `Ad(mu_i^-1 mu_{i+1})` for `i = 0..n`.
    pub fn step_adjoints(&self) -> Vec<Matrix6<f64>> {
        self.mean
            .windows(2)
            .map(|w| (w[0].inverse() * w[1]).adjoint())
            .collect()
    }

    /// Stacked `x_i = log(mu_i^-1 g_i)` for `i = 1..n`.
    pub fn tangent_coordinates(&self, poses: &[Pose]) -> Result<DVector<f64>> {
        if poses.len() != self.mean.len() {
            return Err(Error::invalid(format!(
                "expected {} poses, got {}",
                self.mean.len(),
                poses.len()
            )));
        }
        let mut x = DVector::zeros(self.dim());
        for i in 1..self.mean.len() {
            let xi = log_map(&self.mean[i].relative(&poses[i])?)?;
            x.fixed_rows_mut::<6>(6 * (i - 1)).copy_from(&xi);
        }
        Ok(x)
    }

    /// Gaussian log-density of stacked tangent deviations.
    pub fn log_density(&self, x: &DVector<f64>) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::invalid("tangent vector has the wrong dimension"));
        }
        let norm = -0.5 * self.dim() as f64 * (2.0 * std::f64::consts::PI).ln();
        match &self.uncertainty {
            JointUncertainty::Banded(p) => {
                let chol = p.cholesky()?;
                Ok(norm + 0.5 * chol.log_det() - 0.5 * p.quadratic_form(x))
            }
            JointUncertainty::Dense(c) => {
                let chol = dense_cholesky(c)?;
                let l = chol.l();
                let log_det: f64 = (0..l.nrows()).map(|k| 2.0 * l[(k, k)].ln()).sum();
                let y = chol.l().solve_lower_triangular(x).expect("positive diagonal");
                Ok(norm - 0.5 * log_det - 0.5 * y.norm_squared())
            }
        }
    }

    /// Draws `count` stacked tangent deviations `x ~ N(0, Sigma')`.
    pub fn sample_tangent(&self, count: usize, seed: u64) -> Result<Vec<DVector<f64>>> {
        let mut rng = rng::stream(seed, rng::SAMPLE);
        let dim = self.dim();
        let mut draw = || DVector::from_fn(dim, |_, _| StandardNormal.sample(&mut rng));
        match &self.uncertainty {
            JointUncertainty::Banded(p) => {
                // P = L L^T, so x = L^-T z has covariance P^-1.
                let chol = p.cholesky()?;
                Ok((0..count).map(|_| chol.solve_upper(&draw())).collect())
            }
            JointUncertainty::Dense(c) => {
                let l = dense_cholesky(c)?.l();
                Ok((0..count).map(|_| &l * draw()).collect())
            }
        }
    }

    /// Maps stacked deviations to poses `mu_i exp(x_i)`, with `g_0 = mu_0`.
    pub fn poses_from_tangent(&self, x: &DVector<f64>) -> Result<Vec<Pose>> {
        let mut poses = Vec::with_capacity(self.mean.len());
        poses.push(self.mean[0]);
        for i in 1..self.mean.len() {
            let xi: Twist = x.fixed_rows::<6>(6 * (i - 1)).into_owned();
            poses.push(self.mean[i].retract(&xi)?);
        }
        Ok(poses)
    }
}

fn check_mean(mean: &[Pose]) -> Result<Space> {
    if mean.len() < 2 {
        return Err(Error::invalid("a trajectory distribution needs at least two mean poses"));
    }
    let space = mean[0].space();
    if mean.iter().any(|p| p.space() != space) {
        return Err(Error::invalid("mean trajectory mixes SE(3) and PCG(3) poses"));
    }
    Ok(space)
}

pub(crate) fn dense_cholesky(c: &DMatrix<f64>) -> Result<Cholesky<f64, nalgebra::Dyn>> {
    Cholesky::new(c.clone()).ok_or_else(|| Error::NotPositiveDefinite("joint covariance".into()))
}

fn spd_inverse(m: &Matrix6<f64>, what: &str) -> Result<Matrix6<f64>> {
    let inv = Cholesky::new(*m)
        .ok_or_else(|| Error::NotPositiveDefinite(what.to_string()))?
        .inverse();
    Ok((inv + inv.transpose()) * 0.5)
}

fn assemble_precision(mean: &[Pose], rel_cov: &[Matrix6<f64>]) -> Result<BlockTridiagonal> {
    let n = rel_cov.len();
    let info: Vec<Block> = rel_cov
        .iter()
        .enumerate()
        .map(|(i, s)| spd_inverse(s, &format!("relative covariance {i}")))
        .collect::<Result<_>>()?;
    // Ad(mu_{i+1}^-1 mu_i) = Ad_{i,i+1}^-1
    let ad_inv: Vec<Block> = mean.windows(2).map(|w| (w[1].inverse() * w[0]).adjoint()).collect();

    let mut diag = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n.saturating_sub(1));
    for s in 1..=n {
        let mut d = info[s - 1];
        if s < n {
            d += ad_inv[s].transpose() * info[s] * ad_inv[s];
            upper.push(-(ad_inv[s].transpose() * info[s]));
        }
        diag.push((d + d.transpose()) * 0.5);
    }
    BlockTridiagonal::new(diag, upper)
}

/// Iterative group mean: `mu <- mu exp(mean_k log(mu^-1 g_k))`, started at
/// the first pose.
pub fn sample_mean(poses: &[Pose]) -> Result<Pose> {
    let first = poses.first().ok_or_else(|| Error::invalid("cannot average an empty pose set"))?;
    if poses.iter().any(|p| p.space() != first.space()) {
        return Err(Error::invalid("cannot average poses from different groups"));
    }
    if poses.len() == 1 {
        return Ok(*first);
    }
    let m = poses.len() as f64;
    let mut mu = *first;
    let mut residual = f64::INFINITY;
    for _ in 0..MEAN_MAX_ITERATIONS {
        let sum = residual_sum(&mu, poses)?;
        residual = sum.norm();
        if residual < MEAN_TOLERANCE {
            return Ok(mu);
        }
        mu = mu.retract(&(sum / m))?;
    }
    let sum = residual_sum(&mu, poses)?;
    if sum.norm() < MEAN_TOLERANCE {
        return Ok(mu);
    }
    residual = residual.min(sum.norm());
    Err(Error::Convergence { iterations: MEAN_MAX_ITERATIONS, residual })
}

/// `sum_k log(mu^-1 g_k)`.
pub fn residual_sum(mu: &Pose, poses: &[Pose]) -> Result<Twist> {
    let inv = mu.inverse();
    poses.iter().try_fold(Twist::zeros(), |acc, g| {
        Ok(acc + log_map(&inv.compose(g)?)?)
    })
}

/// Scatter of `log(mu^-1 g_k)` about the group mean, divided by `m`.
pub fn scatter(poses: &[Pose], mu: &Pose) -> Result<Matrix6<f64>> {
    let inv = mu.inverse();
    let mut cov = Matrix6::zeros();
    for g in poses {
        let x = log_map(&inv.compose(g)?)?;
        cov += x * x.transpose();
    }
    Ok(cov / poses.len() as f64)
}

/// Covariance of step `i + 1` relative to step `i`, plus the floor.
pub fn relative_covariance(demo_set: &DemoSet, i: usize, opts: &EncodeOptions) -> Result<Matrix6<f64>> {
    if i + 1 >= demo_set.n_step() {
        return Err(Error::invalid(format!(
            "step index {i} out of range for {} steps",
            demo_set.n_step()
        )));
    }
    let deltas: Vec<Pose> = demo_set
        .demos()
        .iter()
        .map(|d| d.poses()[i].relative(&d.poses()[i + 1]))
        .collect::<Result<_>>()?;
    let mu = sample_mean(&deltas)?;
    let cov = scatter(&deltas, &mu)? + opts.floor();
    Ok((cov + cov.transpose()) * 0.5)
}

pub fn encode(demo_set: &DemoSet, opts: &EncodeOptions) -> Result<TrajectoryDistribution> {
    let n_step = demo_set.n_step();
    if n_step < 3 {
        return Err(Error::invalid("encoding needs at least three steps per demonstration"));
    }
    let mean: Vec<Pose> = (0..n_step)
        .map(|i| sample_mean(&demo_set.step(i)))
        .collect::<Result<_>>()?;
    let rel_cov: Vec<Matrix6<f64>> = (0..n_step - 1)
        .map(|i| relative_covariance(demo_set, i, opts))
        .collect::<Result<_>>()?;
    TrajectoryDistribution::from_parts(mean, rel_cov)
}

/// Draws `count` trajectories `g_i = mu_i exp(x_i)` on the uniform grid.
pub fn sample_trajectories(dist: &TrajectoryDistribution, count: usize, seed: u64) -> Result<Vec<Trajectory>> {
    if count == 0 {
        return Err(Error::invalid("sample count must be at least 1"));
    }
    dist.sample_tangent(count, seed)?
        .iter()
        .map(|x| Trajectory::uniform(dist.poses_from_tangent(x)?))
        .collect()
}
