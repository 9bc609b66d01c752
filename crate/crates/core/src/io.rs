//! File formats: plain-text trajectories, JSON distributions and TOML
//! descriptions of chains, scenes, via poses and runs.
//!
//! Trajectory file layout:
//!
//! ```text
//! lietraj-trajectory 1
//! space se3
//! units rad m
//! points 3
//! 0.0 1.0 0.0 0.0 0.0 1.0 0.0 0.0 0.0 1.0 0.0 0.0 0.0
//! ...
//! ```
//!
//! Each row holds `t`, the rotation in row-major order and the translation.
//! Numbers are written in shortest round-trip form, so reading and writing
//! a file produced here reproduces it byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, Matrix3, Matrix6, Vector3};
use serde::{Deserialize, Serialize};

use crate::adapt::ViaPoseConstraint;
use crate::encoder::{EncodeOptions, JointUncertainty, TrajectoryDistribution, DEFAULT_LAMBDA_REG};
use crate::error::{Error, Result};
use crate::gora::{GoraOptions, Trajectory, WeightMatrix};
use crate::liegroup::{orthonormality_error, Pose, Space, Twist, ORTHONORMAL_TOL};
use crate::planner::{JointTrajectory, PlanningScene, Sphere, StompParams};
use crate::workspace::{Joint, KinematicChain, WorkspaceDensity, DEFAULT_SAMPLES_PER_JOINT};

pub const TRAJECTORY_MAGIC: &str = "lietraj-trajectory";
pub const TRAJECTORY_VERSION: u32 = 1;
pub const DISTRIBUTION_FORMAT: &str = "lietraj-distribution";
pub const DISTRIBUTION_VERSION: u32 = 1;
/// Rotations farther than this from SO(3) are rejected in strict mode.
pub const PARSE_ORTHONORMAL_TOL: f64 = 1e-6;

fn fmt_num(out: &mut String, v: f64) {
    let _ = write!(out, "{v:?}");
}

pub fn format_trajectory(traj: &Trajectory) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{TRAJECTORY_MAGIC} {TRAJECTORY_VERSION}");
    let _ = writeln!(out, "space {}", traj.space());
    let _ = writeln!(out, "units rad m");
    let _ = writeln!(out, "points {}", traj.len());
    for (t, g) in traj.times().iter().zip(traj.poses()) {
        fmt_num(&mut out, *t);
        let r = g.rotation();
        for i in 0..3 {
            for j in 0..3 {
                out.push(' ');
                fmt_num(&mut out, r[(i, j)]);
            }
        }
        for v in g.translation().iter() {
            out.push(' ');
            fmt_num(&mut out, *v);
        }
        out.push('\n');
    }
    out
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn header_value<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, key: &str) -> Result<(usize, &'a str)> {
    let (no, line) = lines.next().ok_or_else(|| parse_err(0, format!("missing '{key}' header")))?;
    let mut parts = line.split_whitespace();
    if parts.next() != Some(key) {
        return Err(parse_err(no, format!("expected '{key}' header")));
    }
    let rest = line.trim_start().strip_prefix(key).unwrap_or("").trim();
    Ok((no, rest))
}

/// Parses a trajectory file. Rotations within `1e-6` of SO(3) are projected;
/// farther ones are an error when `strict` and projected otherwise.
pub fn parse_trajectory(text: &str, strict: bool) -> Result<Trajectory> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));

    let (no, version) = header_value(&mut lines, TRAJECTORY_MAGIC)?;
    let found: u32 = version.parse().map_err(|_| parse_err(no, format!("bad version '{version}'")))?;
    if found != TRAJECTORY_VERSION {
        return Err(Error::Version { found, expected: TRAJECTORY_VERSION });
    }
    let (no, space) = header_value(&mut lines, "space")?;
    let space: Space = space.parse().map_err(|_| parse_err(no, format!("unknown space '{space}'")))?;
    let (no, units) = header_value(&mut lines, "units")?;
    if units.split_whitespace().collect::<Vec<_>>() != ["rad", "m"] {
        return Err(parse_err(no, format!("unsupported units '{units}', expected 'rad m'")));
    }
    let (no, points) = header_value(&mut lines, "points")?;
    let points: usize = points.parse().map_err(|_| parse_err(no, format!("bad point count '{points}'")))?;

    let mut poses = Vec::with_capacity(points);
    let mut times = Vec::with_capacity(points);
    for (no, line) in lines {
        let values = line
            .split_whitespace()
            .map(|tok| tok.parse::<f64>().map_err(|_| parse_err(no, format!("bad number '{tok}'"))))
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != 13 {
            return Err(parse_err(no, format!("expected 13 values, found {}", values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(parse_err(no, "non-finite value"));
        }
        let rotation = Matrix3::from_row_slice(&values[1..10]);
        let translation = Vector3::new(values[10], values[11], values[12]);
        let err = orthonormality_error(&rotation);
        let pose = if err <= ORTHONORMAL_TOL && rotation.determinant() > 0.0 {
            Pose::new(rotation, translation, space)
        } else if err <= PARSE_ORTHONORMAL_TOL || !strict {
            Pose::new_projected(rotation, translation, space)
        } else {
            return Err(parse_err(no, format!("rotation is not orthonormal (error {err:e})")));
        }
        .map_err(|e| parse_err(no, e.to_string()))?;
        times.push(values[0]);
        poses.push(pose);
    }
    if poses.len() != points {
        return Err(Error::Schema(format!("header declares {points} points, found {}", poses.len())));
    }
    Trajectory::new(poses, times).map_err(|e| Error::Schema(e.to_string()))
}

pub fn read_trajectory(path: &Path, strict: bool) -> Result<Trajectory> {
    parse_trajectory(&fs::read_to_string(path)?, strict)
}

pub fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<()> {
    fs::write(path, format_trajectory(traj))?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoseDoc {
    /// Row-major rotation matrix.
    #[serde(default = "identity_rows")]
    pub rotation: [f64; 9],
    #[serde(default)]
    pub translation: [f64; 3],
}

fn identity_rows() -> [f64; 9] {
    [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]
}

impl PoseDoc {
    pub fn from_pose(g: &Pose) -> Self {
        let r = g.rotation();
        let mut rotation = [0.0; 9];
        for i in 0..3 {
            for j in 0..3 {
                rotation[3 * i + j] = r[(i, j)];
            }
        }
        let t = g.translation();
        PoseDoc { rotation, translation: [t.x, t.y, t.z] }
    }

    pub fn to_pose(&self, space: Space) -> Result<Pose> {
        let rotation = Matrix3::from_row_slice(&self.rotation);
        let translation = Vector3::from(self.translation);
        if let Ok(g) = Pose::new(rotation, translation, space) {
            return Ok(g);
        }
        if orthonormality_error(&rotation) > PARSE_ORTHONORMAL_TOL || rotation.determinant() <= 0.0 {
            return Err(Error::Schema("rotation is not orthonormal".into()));
        }
        Pose::new_projected(rotation, translation, space).map_err(|e| Error::Schema(e.to_string()))
    }
}

fn matrix6_to_vec(m: &Matrix6<f64>) -> Vec<f64> {
    (0..6).flat_map(|i| (0..6).map(move |j| m[(i, j)])).collect()
}

fn matrix6_from_slice(v: &[f64], what: &str) -> Result<Matrix6<f64>> {
    if v.len() != 36 {
        return Err(Error::Schema(format!("{what} needs 36 entries, found {}", v.len())));
    }
    Ok(Matrix6::from_row_slice(v))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseDoc {
    pub dim: usize,
    /// Row-major entries.
    pub data: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionDoc {
    pub format: String,
    pub version: u32,
    pub space: Space,
    pub mean: Vec<PoseDoc>,
    /// Row-major relative covariances between consecutive steps.
    pub rel_cov: Vec<Vec<f64>>,
    /// Dense joint covariance after adaptation; absent for an encoded
    /// distribution, whose banded precision is rebuilt on load.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covariance: Option<DenseDoc>,
}

pub fn distribution_to_doc(dist: &TrajectoryDistribution) -> DistributionDoc {
    let covariance = match dist.uncertainty() {
        JointUncertainty::Banded(_) => None,
        JointUncertainty::Dense(c) => Some(DenseDoc {
            dim: c.nrows(),
            data: (0..c.nrows()).flat_map(|i| (0..c.ncols()).map(move |j| c[(i, j)])).collect(),
        }),
    };
    DistributionDoc {
        format: DISTRIBUTION_FORMAT.into(),
        version: DISTRIBUTION_VERSION,
        space: dist.space(),
        mean: dist.mean().iter().map(PoseDoc::from_pose).collect(),
        rel_cov: dist.rel_cov().iter().map(matrix6_to_vec).collect(),
        covariance,
    }
}

pub fn distribution_from_doc(doc: &DistributionDoc) -> Result<TrajectoryDistribution> {
    if doc.format != DISTRIBUTION_FORMAT {
        return Err(Error::Schema(format!("expected format '{DISTRIBUTION_FORMAT}', found '{}'", doc.format)));
    }
    if doc.version != DISTRIBUTION_VERSION {
        return Err(Error::Version { found: doc.version, expected: DISTRIBUTION_VERSION });
    }
    let mean = doc.mean.iter().map(|p| p.to_pose(doc.space)).collect::<Result<Vec<_>>>()?;
    let rel_cov = doc
        .rel_cov
        .iter()
        .map(|v| matrix6_from_slice(v, "relative covariance"))
        .collect::<Result<Vec<_>>>()?;
    let dist = match &doc.covariance {
        None => TrajectoryDistribution::from_parts(mean, rel_cov),
        Some(c) => {
            if c.data.len() != c.dim * c.dim {
                return Err(Error::Schema(format!("covariance of dimension {} has {} entries", c.dim, c.data.len())));
            }
            TrajectoryDistribution::with_covariance(mean, rel_cov, DMatrix::from_row_slice(c.dim, c.dim, &c.data))
        }
    };
    dist.map_err(|e| match e {
        Error::InvalidArgument(m) => Error::Schema(m),
        other => other,
    })
}

pub fn format_distribution(dist: &TrajectoryDistribution) -> String {
    let mut s = serde_json::to_string_pretty(&distribution_to_doc(dist)).expect("documents serialize");
    s.push('\n');
    s
}

pub fn parse_distribution(text: &str) -> Result<TrajectoryDistribution> {
    let doc: DistributionDoc = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    distribution_from_doc(&doc)
}

pub fn read_distribution(path: &Path) -> Result<TrajectoryDistribution> {
    parse_distribution(&fs::read_to_string(path)?)
}

pub fn write_distribution(path: &Path, dist: &TrajectoryDistribution) -> Result<()> {
    fs::write(path, format_distribution(dist))?;
    Ok(())
}

/// Parses TOML, reporting the 1-based line of the offending span.
fn from_toml<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| {
        let line = e
            .span()
            .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
            .unwrap_or(0);
        Error::Parse { line, message: e.message().to_string() }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointDoc {
    /// Joint twist `[omega; v]`; a z-axis revolute joint when absent.
    #[serde(default = "z_axis")]
    pub axis: [f64; 6],
    #[serde(flatten)]
    pub offset: PoseDoc,
    pub limits: [f64; 2],
}

fn z_axis() -> [f64; 6] {
    [0.0, 0.0, 1.0, 0.0, 0.0, 0.0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainDoc {
    pub joints: Vec<JointDoc>,
    #[serde(default = "identity_pose_doc")]
    pub ee_offset: PoseDoc,
}

fn identity_pose_doc() -> PoseDoc {
    PoseDoc { rotation: identity_rows(), translation: [0.0; 3] }
}

pub fn chain_to_doc(chain: &KinematicChain) -> ChainDoc {
    ChainDoc {
        joints: chain
            .joints()
            .iter()
            .map(|j| {
                let mut axis = [0.0; 6];
                axis.copy_from_slice(j.axis.as_slice());
                JointDoc { axis, offset: PoseDoc::from_pose(&j.offset), limits: [j.limits.0, j.limits.1] }
            })
            .collect(),
        ee_offset: PoseDoc::from_pose(chain.ee_offset()),
    }
}

pub fn chain_from_doc(doc: &ChainDoc) -> Result<KinematicChain> {
    let joints = doc
        .joints
        .iter()
        .map(|j| {
            Ok(Joint {
                axis: Twist::from_column_slice(&j.axis),
                offset: j.offset.to_pose(Space::Se3)?,
                limits: (j.limits[0], j.limits[1]),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    KinematicChain::new(joints, doc.ee_offset.to_pose(Space::Se3)?).map_err(|e| Error::Schema(e.to_string()))
}

pub fn parse_chain(text: &str) -> Result<KinematicChain> {
    chain_from_doc(&from_toml(text)?)
}

pub fn format_chain(chain: &KinematicChain) -> String {
    toml::to_string(&chain_to_doc(chain)).expect("chain documents serialize")
}

pub fn read_chain(path: &Path) -> Result<KinematicChain> {
    parse_chain(&fs::read_to_string(path)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereDoc {
    pub center: [f64; 3],
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneDoc {
    #[serde(default)]
    pub clearance: f64,
    #[serde(default)]
    pub obstacles: Vec<SphereDoc>,
}

pub fn scene_from_doc(doc: &SceneDoc) -> Result<PlanningScene> {
    let spheres = doc
        .obstacles
        .iter()
        .map(|s| Sphere { center: Vector3::from(s.center), radius: s.radius })
        .collect();
    PlanningScene::new(spheres, doc.clearance).map_err(|e| Error::Schema(e.to_string()))
}

pub fn scene_to_doc(scene: &PlanningScene) -> SceneDoc {
    SceneDoc {
        clearance: scene.clearance(),
        obstacles: scene
            .obstacles()
            .iter()
            .map(|s| SphereDoc { center: [s.center.x, s.center.y, s.center.z], radius: s.radius })
            .collect(),
    }
}

pub fn parse_scene(text: &str) -> Result<PlanningScene> {
    scene_from_doc(&from_toml(text)?)
}

pub fn format_scene(scene: &PlanningScene) -> String {
    toml::to_string(&scene_to_doc(scene)).expect("scene documents serialize")
}

pub fn read_scene(path: &Path) -> Result<PlanningScene> {
    parse_scene(&fs::read_to_string(path)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViaDoc {
    pub t: f64,
    #[serde(flatten)]
    pub pose: PoseDoc,
    /// Isotropic variance; ignored when `covariance` is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    /// Row-major 6x6 covariance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covariance: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViaSetDoc {
    #[serde(default)]
    pub vias: Vec<ViaDoc>,
}

pub fn via_from_doc(doc: &ViaDoc, space: Space) -> Result<ViaPoseConstraint> {
    let sigma = match (&doc.covariance, doc.sigma) {
        (Some(c), _) => matrix6_from_slice(c, "via covariance")?,
        (None, Some(s)) => Matrix6::identity() * s,
        (None, None) => return Err(Error::Schema("via pose needs 'sigma' or 'covariance'".into())),
    };
    ViaPoseConstraint::new(doc.t, doc.pose.to_pose(space)?, sigma).map_err(|e| Error::Schema(e.to_string()))
}

pub fn via_to_doc(via: &ViaPoseConstraint) -> ViaDoc {
    ViaDoc {
        t: via.t(),
        pose: PoseDoc::from_pose(via.g_star()),
        sigma: None,
        covariance: Some(matrix6_to_vec(via.sigma_star())),
    }
}

pub fn parse_vias(text: &str, space: Space) -> Result<Vec<ViaPoseConstraint>> {
    let doc: ViaSetDoc = from_toml(text)?;
    doc.vias.iter().map(|v| via_from_doc(v, space)).collect()
}

pub fn format_vias(vias: &[ViaPoseConstraint]) -> String {
    toml::to_string(&ViaSetDoc { vias: vias.iter().map(via_to_doc).collect() }).expect("via documents serialize")
}

pub fn read_vias(path: &Path, space: Space) -> Result<Vec<ViaPoseConstraint>> {
    parse_vias(&fs::read_to_string(path)?, space)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkspaceDensityDoc {
    pub format: String,
    pub version: u32,
    pub g_wd: PoseDoc,
    pub sigma_wd: Vec<f64>,
}

pub fn format_workspace_density(wd: &WorkspaceDensity) -> String {
    let doc = WorkspaceDensityDoc {
        format: "lietraj-workspace-density".into(),
        version: 1,
        g_wd: PoseDoc::from_pose(&wd.g_wd),
        sigma_wd: matrix6_to_vec(&wd.sigma_wd),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("documents serialize");
    s.push('\n');
    s
}

pub fn parse_workspace_density(text: &str) -> Result<WorkspaceDensity> {
    let doc: WorkspaceDensityDoc =
        serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })?;
    if doc.version != 1 {
        return Err(Error::Version { found: doc.version, expected: 1 });
    }
    Ok(WorkspaceDensity { g_wd: doc.g_wd.to_pose(Space::Se3)?, sigma_wd: matrix6_from_slice(&doc.sigma_wd, "sigma_wd")? })
}

/// Joint trajectory as whitespace-separated rows, one waypoint per line.
pub fn format_joint_trajectory(traj: &JointTrajectory) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "lietraj-joints 1");
    let _ = writeln!(out, "joints {}", traj.waypoints.ncols());
    let _ = writeln!(out, "points {}", traj.len());
    for row in traj.waypoints.row_iter() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        let _ = writeln!(out, "{}", cells.join(" "));
    }
    out
}

pub fn parse_joint_trajectory(text: &str) -> Result<JointTrajectory> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| !l.trim().is_empty());
    let (no, version) = header_value(&mut lines, "lietraj-joints")?;
    if version != "1" {
        return Err(parse_err(no, format!("unsupported version '{version}'")));
    }
    let (no, joints) = header_value(&mut lines, "joints")?;
    let joints: usize = joints.parse().map_err(|_| parse_err(no, "bad joint count"))?;
    let (no, points) = header_value(&mut lines, "points")?;
    let points: usize = points.parse().map_err(|_| parse_err(no, "bad point count"))?;
    let mut data = Vec::with_capacity(joints * points);
    let mut rows = 0;
    for (no, line) in lines {
        let values = line
            .split_whitespace()
            .map(|tok| tok.parse::<f64>().map_err(|_| parse_err(no, format!("bad number '{tok}'"))))
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != joints {
            return Err(parse_err(no, format!("expected {joints} values, found {}", values.len())));
        }
        data.extend(values);
        rows += 1;
    }
    if rows != points {
        return Err(Error::Schema(format!("header declares {points} points, found {rows}")));
    }
    Ok(JointTrajectory { waypoints: DMatrix::from_row_slice(points, joints, &data), fixed_endpoints: true })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GoraSection {
    /// Radius of the solid sphere whose inertia weights rotations.
    pub sphere_radius: f64,
    pub smoothing_window: usize,
}

impl Default for GoraSection {
    fn default() -> Self {
        GoraSection { sphere_radius: 1.0, smoothing_window: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StompSection {
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
    pub ik_seed: Option<Vec<f64>>,
}

impl Default for StompSection {
    fn default() -> Self {
        let p = StompParams::default();
        StompSection {
            n_rollouts: p.n_rollouts,
            n_iterations: p.n_iterations,
            noise_stddev: p.noise_stddev,
            temperature: p.temperature,
            w_rot: p.w_rot,
            w_tran: p.w_tran,
            w_guide: p.w_guide,
            w_obs: p.w_obs,
            w_smooth: p.w_smooth,
            m_r: p.m_r,
            body_radius: p.body_radius,
            ik_seed: Some(READY_CONFIGURATION.to_vec()),
        }
    }
}

/// Elbow-bent configuration of the reference arm with the tool pointing
/// down, used to seed the first IK solve.
pub const READY_CONFIGURATION: [f64; 7] = [0.0, -0.3, 0.0, -2.2, 0.0, 2.0, 0.8];

impl StompSection {
    pub fn params(&self) -> StompParams {
        StompParams {
            n_rollouts: self.n_rollouts,
            n_iterations: self.n_iterations,
            noise_stddev: self.noise_stddev,
            temperature: self.temperature,
            w_rot: self.w_rot,
            w_tran: self.w_tran,
            w_guide: self.w_guide,
            w_obs: self.w_obs,
            w_smooth: self.w_smooth,
            m_r: self.m_r,
            body_radius: self.body_radius,
            ik_seed: self.ik_seed.clone(),
        }
    }
}

/// Every tunable of a run. Relative paths resolve against the directory of
/// the configuration file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub space: Space,
    pub n_step: usize,
    pub lambda_reg: f64,
    pub samples_per_joint: usize,
    /// Kinematic chain file; the bundled reference arm when absent.
    pub chain: Option<PathBuf>,
    /// Planning scene file; an empty scene when absent.
    pub scene: Option<PathBuf>,
    pub gora: GoraSection,
    pub stomp: StompSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            space: Space::Se3,
            n_step: 50,
            lambda_reg: DEFAULT_LAMBDA_REG,
            samples_per_joint: DEFAULT_SAMPLES_PER_JOINT,
            chain: None,
            scene: None,
            gora: GoraSection::default(),
            stomp: StompSection::default(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        from_toml(text)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut cfg = RunConfig::parse(&fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.chain, &mut cfg.scene].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn gora_options(&self) -> GoraOptions {
        GoraOptions {
            n_step: self.n_step,
            weight: WeightMatrix::solid_sphere(self.gora.sphere_radius),
            smoothing_window: self.gora.smoothing_window,
        }
    }

    pub fn encode_options(&self) -> EncodeOptions {
        EncodeOptions { lambda_reg: self.lambda_reg, ..Default::default() }
    }

    pub fn load_chain(&self) -> Result<KinematicChain> {
        match &self.chain {
            Some(p) => read_chain(p),
            None => Ok(KinematicChain::reference_arm()),
        }
    }

    pub fn load_scene(&self) -> Result<PlanningScene> {
        match &self.scene {
            Some(p) => read_scene(p),
            None => Ok(PlanningScene::empty()),
        }
    }
}
