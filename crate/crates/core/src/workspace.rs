//! Serial-manipulator kinematics and the workspace density of a robot.
//!
//! Link `j` contributes `B_j(q_j) = exp(xi_j q_j) * offset_j`, so the joint
//! rotates first and the offset then reaches the next joint frame. The end
//! effector is `B_1 ... B_m * ee_offset`.

use nalgebra::{DMatrix, DVector, Matrix6, Vector3};
use rand::Rng as _;

use crate::encoder::{sample_mean, scatter};
use crate::error::{Error, Result};
use crate::liegroup::{exp_map, log_map, Pose, Space, Twist};
use crate::rng;

pub const IK_TOLERANCE: f64 = 1e-4;
pub const IK_MAX_ITERATIONS: usize = 200;
pub const DEFAULT_SAMPLES_PER_JOINT: usize = 25;

#[derive(Clone, Debug, PartialEq)]
pub struct Joint {
    /// Joint twist `[omega; v]` with unit `omega`.
    pub axis: Twist,
    pub offset: Pose,
    pub limits: (f64, f64),
}

impl Joint {
    pub fn revolute_z(offset: Pose, limits: (f64, f64)) -> Self {
        Joint { axis: Twist::new(0.0, 0.0, 1.0, 0.0, 0.0, 0.0), offset, limits }
    }

    pub fn transform(&self, q: f64) -> Pose {
        exp_map(&(self.axis * q), Space::Se3).expect("joint exponentials never fail") * self.offset
    }

    fn clamp(&self, q: f64) -> f64 {
        q.clamp(self.limits.0, self.limits.1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KinematicChain {
    joints: Vec<Joint>,
    ee_offset: Pose,
}

impl KinematicChain {
    pub fn new(joints: Vec<Joint>, ee_offset: Pose) -> Result<Self> {
        if joints.is_empty() {
            return Err(Error::invalid("a kinematic chain needs at least one joint"));
        }
        for (i, j) in joints.iter().enumerate() {
            let w = j.axis.fixed_rows::<3>(0).norm();
            if (w - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(format!("joint {i} axis has rotational norm {w}, expected 1")));
            }
            let (lo, hi) = j.limits;
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::invalid(format!("joint {i} has invalid limits [{lo}, {hi}]")));
            }
            if j.offset.space() != Space::Se3 {
                return Err(Error::invalid(format!("joint {i} offset must be an SE(3) pose")));
            }
        }
        if ee_offset.space() != Space::Se3 {
            return Err(Error::invalid("end-effector offset must be an SE(3) pose"));
        }
        Ok(KinematicChain { joints, ee_offset })
    }

    /// Seven-joint arm with Panda-like geometry and limits of +-2.8 rad.
    /// The numbers are representative of a desk-scale arm, not calibrated.
    pub fn reference_arm() -> Self {
        use std::f64::consts::FRAC_PI_2;
        let rx = |a: f64| Pose::from_axis_angle(Vector3::x() * a, Space::Se3);
        let tr = |x: f64, z: f64| Pose::from_translation(Vector3::new(x, 0.0, z), Space::Se3);
        let offsets = [
            tr(0.0, 0.333) * rx(-FRAC_PI_2),
            rx(FRAC_PI_2) * tr(0.0, 0.316),
            rx(FRAC_PI_2) * tr(0.0825, 0.0),
            rx(-FRAC_PI_2) * tr(-0.0825, 0.384),
            rx(FRAC_PI_2),
            rx(FRAC_PI_2) * tr(0.088, 0.0),
            tr(0.0, 0.107),
        ];
        let joints = offsets.iter().map(|&o| Joint::revolute_z(o, (-2.8, 2.8))).collect();
        KinematicChain::new(joints, tr(0.0, 0.1034)).expect("reference arm is valid")
    }

    pub fn joints(&self) -> &[Joint] {
        &self.joints
    }

    pub fn ee_offset(&self) -> &Pose {
        &self.ee_offset
    }

    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    /// Sum of offset lengths; no end-effector position lies farther from the
    /// base than this.
    pub fn reach(&self) -> f64 {
        self.joints.iter().map(|j| j.offset.translation().norm()).sum::<f64>()
            + self.ee_offset.translation().norm()
    }

    fn check_dim(&self, q: &DVector<f64>) -> Result<()> {
        if q.len() != self.dof() {
            return Err(Error::invalid(format!(
                "configuration has {} entries, chain has {} joints",
                q.len(),
                self.dof()
            )));
        }
        Ok(())
    }

    pub fn clamp(&self, q: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(q.len(), q.iter().zip(&self.joints).map(|(&v, j)| j.clamp(v)))
    }

    pub fn within_limits(&self, q: &DVector<f64>) -> bool {
        q.iter().zip(&self.joints).all(|(&v, j)| v >= j.limits.0 && v <= j.limits.1)
    }
}

/// End-effector pose and the distal frame of every link. The last link
/// frame excludes `ee_offset`.
pub fn forward_kinematics(chain: &KinematicChain, q: &DVector<f64>) -> Result<(Pose, Vec<Pose>)> {
    chain.check_dim(q)?;
    let mut frames = Vec::with_capacity(chain.dof());
    let mut g = Pose::identity(Space::Se3);
    for (joint, &qi) in chain.joints.iter().zip(q.iter()) {
        g = g * joint.transform(qi);
        frames.push(g);
    }
    Ok((g * chain.ee_offset, frames))
}

/// Body Jacobian: column `j` is `Ad(S_j^-1) xi_j` with `S_j` the transform
/// from joint `j` (after its rotation) to the end effector.
pub fn body_jacobian(chain: &KinematicChain, q: &DVector<f64>) -> Result<DMatrix<f64>> {
    chain.check_dim(q)?;
    let m = chain.dof();
    let mut jac = DMatrix::zeros(6, m);
    let mut suffix = chain.ee_offset;
    for j in (0..m).rev() {
        suffix = chain.joints[j].offset * suffix;
        let col = suffix.inverse().adjoint() * chain.joints[j].axis;
        jac.set_column(j, &col);
        if j > 0 {
            let rot = exp_map(&(chain.joints[j].axis * q[j]), Space::Se3)?;
            suffix = rot * suffix;
        }
    }
    Ok(jac)
}

fn pose_error(chain: &KinematicChain, q: &DVector<f64>, target: &Pose) -> Result<Option<Twist>> {
    let (ee, _) = forward_kinematics(chain, q)?;
    match log_map(&ee.relative(target)?) {
        Ok(e) => Ok(Some(e)),
        Err(Error::BranchAmbiguity { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Damped least squares with adaptive damping and clamping to the joint
/// limits after each step.
pub fn inverse_kinematics(chain: &KinematicChain, target: &Pose, q_seed: &DVector<f64>) -> Result<DVector<f64>> {
    chain.check_dim(q_seed)?;
    let target = target.with_space(Space::Se3);
    let mut q = q_seed.clone();
    let mut lambda = 1e-2;
    let mut err = pose_error(chain, &q, &target)?;
    for _ in 0..IK_MAX_ITERATIONS {
        let e = match err {
            Some(e) if e.norm() < IK_TOLERANCE => return Ok(q),
            Some(e) => e,
            None => {
                // Rotation error of exactly pi has no unique direction.
                q = chain.clamp(&q.map(|v| v + 0.05));
                err = pose_error(chain, &q, &target)?;
                continue;
            }
        };
        let jac = body_jacobian(chain, &q)?;
        let jjt = &jac * jac.transpose() + DMatrix::identity(6, 6) * (lambda * lambda);
        let y = jjt
            .cholesky()
            .ok_or_else(|| Error::invalid("damped Jacobian is singular"))?
            .solve(&DVector::from_column_slice(e.as_slice()));
        let candidate = chain.clamp(&(&q + jac.transpose() * y));
        let cand_err = pose_error(chain, &candidate, &target)?;
        let better = match cand_err {
            Some(c) => c.norm() < e.norm(),
            None => false,
        };
        if better {
            q = candidate;
            err = cand_err;
            lambda = (lambda * 0.5).max(1e-6);
        } else {
            lambda = (lambda * 4.0).min(1e3);
        }
    }
    match err {
        Some(e) if e.norm() < IK_TOLERANCE => Ok(q),
        Some(e) => Err(Error::IkFailure { residual: e.norm() }),
        None => Err(Error::IkFailure { residual: std::f64::consts::PI }),
    }
}

/// Stratified uniform samples over `[lo, hi]`, one jittered sample per
/// stratum.
fn joint_samples(lo: f64, hi: f64, count: usize, rng: &mut rng::Rng) -> Vec<f64> {
    let width = (hi - lo) / count as f64;
    (0..count)
        .map(|k| lo + (k as f64 + rng.random::<f64>()) * width)
        .collect()
}

/// Mean and absolute covariance of the distal-end pose of link `i` relative
/// to its proximal frame, with joint `i` sampled uniformly over its limits.
/// The last link includes the end-effector offset.
pub fn link_pose_distribution(
    chain: &KinematicChain,
    link: usize,
    samples_per_joint: usize,
    seed: u64,
) -> Result<(Pose, Matrix6<f64>)> {
    if link >= chain.dof() {
        return Err(Error::invalid(format!("link {link} out of range for {} joints", chain.dof())));
    }
    if samples_per_joint < 2 {
        return Err(Error::invalid("need at least two samples per joint"));
    }
    let joint = &chain.joints[link];
    let tail = if link + 1 == chain.dof() { chain.ee_offset } else { Pose::identity(Space::Se3) };
    let mut rng = rng::stream(seed, rng::WORKSPACE + ((link as u64 + 1) << 8));
    let poses: Vec<Pose> = joint_samples(joint.limits.0, joint.limits.1, samples_per_joint, &mut rng)
        .into_iter()
        .map(|q| joint.transform(q) * tail)
        .collect();
    let mean = sample_mean(&poses)?;
    let cov = scatter(&poses, &mean)?;
    Ok((mean, cov))
}

/// First-order convolution of two pose Gaussians.
pub fn compound_gaussians(
    mu1: &Pose,
    sigma1: &Matrix6<f64>,
    mu2: &Pose,
    sigma2: &Matrix6<f64>,
) -> (Pose, Matrix6<f64>) {
    let ad = mu2.inverse().adjoint();
    let sigma = ad * sigma1 * ad.transpose() + sigma2;
    (*mu1 * *mu2, (sigma + sigma.transpose()) * 0.5)
}

/// Gaussian over all end-effector poses the robot can reach.
#[derive(Clone, Debug, PartialEq)]
pub struct WorkspaceDensity {
    pub g_wd: Pose,
    pub sigma_wd: Matrix6<f64>,
}

pub fn workspace_density(chain: &KinematicChain, samples_per_joint: usize, seed: u64) -> Result<WorkspaceDensity> {
    let links = (0..chain.dof())
        .map(|i| link_pose_distribution(chain, i, samples_per_joint, seed))
        .collect::<Result<Vec<_>>>()?;
    let (g_wd, sigma_wd) = links
        .into_iter()
        .reduce(|(m1, s1), (m2, s2)| compound_gaussians(&m1, &s1, &m2, &s2))
        .expect("chain has at least one joint");
    Ok(WorkspaceDensity { g_wd, sigma_wd })
}
