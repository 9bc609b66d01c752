//! Adapting an encoded trajectory distribution to new situations: via poses,
//! a new start pose, a change of viewing frame, and a robot's workspace
//! density.
//!
//! Conditioning works on the stacked tangent deviations `x_1..x_n` with the
//! linearized observation `y = log(mu_i^-1 g*) ~ x_i + xi`. The posterior
//! covariance is evaluated in Joseph form and stored densely, since the
//! update fills in the block-tridiagonal band.

use nalgebra::{Cholesky, DMatrix, DVector, Matrix6, SymmetricEigen};

use crate::encoder::{JointUncertainty, TrajectoryDistribution};
use crate::error::{Error, Result};
use crate::liegroup::{log_map, Pose, Twist};
use crate::workspace::WorkspaceDensity;

/// A desired pose at normalized time `t`, with a tangent-space covariance.
#[derive(Clone, Debug, PartialEq)]
pub struct ViaPoseConstraint {
    t: f64,
    g_star: Pose,
    sigma_star: Matrix6<f64>,
}

impl ViaPoseConstraint {
    pub fn new(t: f64, g_star: Pose, sigma_star: Matrix6<f64>) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::invalid(format!("via pose time {t} outside [0, 1]")));
        }
        check_psd(&sigma_star, "via pose covariance")?;
        Ok(ViaPoseConstraint { t, g_star, sigma_star })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn g_star(&self) -> &Pose {
        &self.g_star
    }

    pub fn sigma_star(&self) -> &Matrix6<f64> {
        &self.sigma_star
    }

    /// Step index for a distribution with `n` random steps: `0` only for
    /// `t == 0`, otherwise `round(t n)` clamped to `[1, n]`.
    pub fn step_index(&self, n: usize) -> usize {
        if self.t == 0.0 {
            0
        } else {
            ((self.t * n as f64).round() as usize).clamp(1, n)
        }
    }

    /// The same constraint seen from the frame reached by `h`.
    pub fn change_view(&self, view: &ViewChange) -> ViaPoseConstraint {
        let ad = view.h.inverse().adjoint();
        ViaPoseConstraint {
            t: self.t,
            g_star: view.conjugate(&self.g_star),
            sigma_star: symmetrize6(&(ad * self.sigma_star * ad.transpose())),
        }
    }
}

/// Relative transformation `h` from the current frame to a new one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ViewChange {
    pub h: Pose,
}

impl ViewChange {
    pub fn new(h: Pose) -> Self {
        ViewChange { h }
    }

    /// `h^-1 g h`.
    pub fn conjugate(&self, g: &Pose) -> Pose {
        self.h.inverse() * *g * self.h
    }

    pub fn inverse(&self) -> ViewChange {
        ViewChange { h: self.h.inverse() }
    }
}

fn symmetrize6(m: &Matrix6<f64>) -> Matrix6<f64> {
    (m + m.transpose()) * 0.5
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}

fn check_psd(m: &Matrix6<f64>, what: &str) -> Result<()> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("{what} contains non-finite values")));
    }
    let scale = m.norm().max(1.0);
    if (m - m.transpose()).norm() > 1e-12 * scale {
        return Err(Error::invalid(format!("{what} is not symmetric")));
    }
    let min_eig = SymmetricEigen::new(symmetrize6(m)).eigenvalues.min();
    if min_eig < -1e-12 * scale {
        return Err(Error::invalid(format!(
            "{what} is not positive semi-definite (min eigenvalue {min_eig:e})"
        )));
    }
    Ok(())
}

fn check_space(dist: &TrajectoryDistribution, g: &Pose) -> Result<()> {
    if dist.space() != g.space() {
        return Err(Error::invalid(format!(
            "pose uses {} but the distribution is over {}",
            g.space(),
            dist.space()
        )));
    }
    Ok(())
}

fn shifted_mean(dist: &TrajectoryDistribution, x_hat: &DVector<f64>) -> Result<Vec<Pose>> {
    let mut mean = dist.mean().to_vec();
    for (i, mu) in mean.iter_mut().enumerate().skip(1) {
        let xi: Twist = x_hat.fixed_rows::<6>(6 * (i - 1)).into_owned();
        *mu = mu.retract(&xi)?;
    }
    Ok(mean)
}

/// Gaussian update for an observation of block `step` (1-based).
fn condition_block(
    dist: &TrajectoryDistribution,
    step: usize,
    y: &Twist,
    sigma_star: &Matrix6<f64>,
) -> Result<TrajectoryDistribution> {
    let s = dist.joint_covariance()?;
    let col = 6 * (step - 1);
    let p = s.columns(col, 6).into_owned(); // Sigma' C^T
    let a: Matrix6<f64> = s.fixed_view::<6, 6>(col, col).into_owned(); // C Sigma' C^T
    let innovation = symmetrize6(&(a + sigma_star));
    let chol = Cholesky::new(innovation)
        .ok_or_else(|| Error::invalid("innovation covariance is singular"))?;
    // K = P S^-1, via S^-1 P^T.
    let k = chol.solve(&p.transpose()).transpose();
    let x_hat = &k * y;

    // (I - K C) S (I - K C)^T + K Sigma* K^T, expanded with P = S C^T.
    let kpt = &k * p.transpose();
    let post = &s - &kpt - kpt.transpose() + &k * innovation * k.transpose();
    TrajectoryDistribution::with_covariance(shifted_mean(dist, &x_hat)?, dist.rel_cov().to_vec(), symmetrize(post))
}

/// Posterior distribution given a via pose.
///
/// A constraint at `t == 0` re-anchors the start pose instead, since the
/// first step is deterministic.
pub fn condition_on_via(dist: &TrajectoryDistribution, via: &ViaPoseConstraint) -> Result<TrajectoryDistribution> {
    check_space(dist, &via.g_star)?;
    let step = via.step_index(dist.n_steps());
    if step == 0 {
        return reanchor_start(dist, &via.g_star);
    }
    let y = log_map(&dist.mean()[step].relative(&via.g_star)?)?;
    condition_block(dist, step, &y, &via.sigma_star)
}

/// Applies several via poses in ascending time order.
pub fn condition_on_via_set(
    dist: &TrajectoryDistribution,
    vias: &[ViaPoseConstraint],
) -> Result<TrajectoryDistribution> {
    let n = dist.n_steps();
    let mut ordered: Vec<&ViaPoseConstraint> = vias.iter().collect();
    ordered.sort_by(|a, b| a.t.total_cmp(&b.t));
    for w in ordered.windows(2) {
        if w[0].step_index(n) == w[1].step_index(n) {
            return Err(Error::invalid(format!(
                "via poses at t = {} and t = {} map to the same step {}",
                w[0].t,
                w[1].t,
                w[0].step_index(n)
            )));
        }
    }
    ordered
        .into_iter()
        .try_fold(dist.clone(), |d, via| condition_on_via(&d, via))
}

/// Moves the whole trajectory so it starts at `g0_new`, keeping every
/// relative pose between mean steps.
pub fn reanchor_start(dist: &TrajectoryDistribution, g0_new: &Pose) -> Result<TrajectoryDistribution> {
    check_space(dist, g0_new)?;
    let shift = *g0_new * dist.mean()[0].inverse();
    let mut mean: Vec<Pose> = dist.mean().iter().map(|mu| shift * *mu).collect();
    mean[0] = *g0_new;
    match dist.uncertainty() {
        JointUncertainty::Banded(_) => TrajectoryDistribution::from_parts(mean, dist.rel_cov().to_vec()),
        JointUncertainty::Dense(cov) => {
            TrajectoryDistribution::with_covariance(mean, dist.rel_cov().to_vec(), cov.clone())
        }
    }
}

/// Re-expresses the distribution in the frame reached by `view.h`.
pub fn change_view(dist: &TrajectoryDistribution, view: &ViewChange) -> Result<TrajectoryDistribution> {
    check_space(dist, &view.h)?;
    let ad = view.h.inverse().adjoint();
    let mean: Vec<Pose> = dist.mean().iter().map(|mu| view.conjugate(mu)).collect();
    let rel_cov: Vec<Matrix6<f64>> = dist
        .rel_cov()
        .iter()
        .map(|c| symmetrize6(&(ad * c * ad.transpose())))
        .collect();
    match dist.uncertainty() {
        JointUncertainty::Banded(_) => TrajectoryDistribution::from_parts(mean, rel_cov),
        JointUncertainty::Dense(cov) => {
            let n = dist.n_steps();
            let mut out = DMatrix::zeros(6 * n, 6 * n);
            for a in 0..n {
                for b in 0..n {
                    let block: Matrix6<f64> = cov.fixed_view::<6, 6>(6 * a, 6 * b).into_owned();
                    out.fixed_view_mut::<6, 6>(6 * a, 6 * b)
                        .copy_from(&(ad * block * ad.transpose()));
                }
            }
            TrajectoryDistribution::with_covariance(mean, rel_cov, out)
        }
    }
}

/// Conditions every step on the workspace-density Gaussian at once.
///
/// The density is always an SE(3) Gaussian; for a PCG(3) distribution its
/// mean is reinterpreted in PCG(3) with the covariance unchanged.
pub fn fuse_workspace_density(dist: &TrajectoryDistribution, wd: &WorkspaceDensity) -> Result<TrajectoryDistribution> {
    check_psd(&wd.sigma_wd, "workspace density covariance")?;
    let g_wd = wd.g_wd.with_space(dist.space());
    let n = dist.n_steps();
    let dim = 6 * n;
    let s = dist.joint_covariance()?;

    let mut y = DVector::zeros(dim);
    let mut noise = DMatrix::zeros(dim, dim);
    for i in 1..=n {
        let yi = log_map(&dist.mean()[i].relative(&g_wd)?)?;
        y.fixed_rows_mut::<6>(6 * (i - 1)).copy_from(&yi);
        noise
            .fixed_view_mut::<6, 6>(6 * (i - 1), 6 * (i - 1))
            .copy_from(&wd.sigma_wd);
    }
    let chol = Cholesky::new(symmetrize(&s + &noise))
        .ok_or_else(|| Error::invalid("fusion innovation covariance is singular"))?;
    // K = S (S + D)^-1 = ((S + D)^-1 S)^T
    let k = chol.solve(&s).transpose();
    let x_hat = &k * &y;
    let i_minus_k = DMatrix::identity(dim, dim) - &k;
    let post = &i_minus_k * &s * i_minus_k.transpose() + &k * &noise * k.transpose();
    TrajectoryDistribution::with_covariance(shifted_mean(dist, &x_hat)?, dist.rel_cov().to_vec(), symmetrize(post))
}
