//! SE(3) and PCG(3) group operations.
//!
//! A [`Pose`] stores a rotation matrix and a translation vector together with
//! the group it lives in. The two groups share storage but differ in how the
//! parts combine:
//!
//! * SE(3): `(R1, t1)(R2, t2) = (R1 R2, R1 t2 + t1)`
//! * PCG(3): `(R1, t1)(R2, t2) = (R1 R2, t1 + t2)` (direct product SO(3) x R^3)
//!
//! Tangent vectors are packed as `[omega; v]`, rotational block first. All
//! operations use the right-perturbation convention `g = mu * exp(x)`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Mul;

use nalgebra::{Matrix3, Matrix4, Matrix6, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tangent coordinates `[omega; v]`.
pub type Twist = Vector6<f64>;

/// 6x6 adjoint representation acting on packed twists.
pub type AdjointMatrix = Matrix6<f64>;

/// Frobenius tolerance on `R^T R - I` accepted by [`Pose::new`].
pub const ORTHONORMAL_TOL: f64 = 1e-9;

/// Below this rotation magnitude the exp/log coefficient functions switch to
/// their Taylor expansions.
pub const SMALL_ANGLE: f64 = 1e-8;

/// Logarithms are rejected for rotation angles within this margin of pi.
pub const BRANCH_MARGIN: f64 = 1e-6;

/// Composition count after which chained products are re-orthonormalized.
pub const RENORMALIZE_EVERY: usize = 1000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    #[default]
    Se3,
    Pcg3,
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Se3 => f.write_str("se3"),
            Space::Pcg3 => f.write_str("pcg3"),
        }
    }
}

impl std::str::FromStr for Space {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "se3" => Ok(Space::Se3),
            "pcg3" => Ok(Space::Pcg3),
            other => Err(Error::invalid(format!("unknown space '{other}' (expected se3 or pcg3)"))),
        }
    }
}

/// A rigid-body pose in SE(3) or PCG(3).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
    space: Space,
}

impl Pose {
    /// Builds a pose, checking that `rotation` is a proper rotation matrix.
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>, space: Space) -> Result<Self> {
        if rotation.iter().chain(translation.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("pose contains non-finite values"));
        }
        let err = orthonormality_error(&rotation);
        if err > ORTHONORMAL_TOL {
            return Err(Error::invalid(format!(
                "rotation is not orthonormal (|R^T R - I|_F = {err:e})"
            )));
        }
        if rotation.determinant() <= 0.0 {
            return Err(Error::invalid("rotation has non-positive determinant"));
        }
        Ok(Pose { rotation, translation, space })
    }

    /// Builds a pose after projecting `rotation` onto SO(3).
    pub fn new_projected(rotation: Matrix3<f64>, translation: Vector3<f64>, space: Space) -> Result<Self> {
        if rotation.iter().chain(translation.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("pose contains non-finite values"));
        }
        Ok(Pose { rotation: nearest_rotation(&rotation), translation, space })
    }

    pub fn identity(space: Space) -> Self {
        Pose { rotation: Matrix3::identity(), translation: Vector3::zeros(), space }
    }

    pub fn from_translation(translation: Vector3<f64>, space: Space) -> Self {
        Pose { rotation: Matrix3::identity(), translation, space }
    }

    /// Pure rotation given as an axis-angle vector.
    pub fn from_axis_angle(omega: Vector3<f64>, space: Space) -> Self {
        Pose { rotation: so3_exp(&omega), translation: Vector3::zeros(), space }
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    pub fn space(&self) -> Space {
        self.space
    }

    /// Same rotation and translation, reinterpreted in another group.
    pub fn with_space(&self, space: Space) -> Self {
        Pose { space, ..*self }
    }

    pub fn inverse(&self) -> Pose {
        let rt = self.rotation.transpose();
        let translation = match self.space {
            Space::Se3 => -(rt * self.translation),
            Space::Pcg3 => -self.translation,
        };
        Pose { rotation: rt, translation, space: self.space }
    }

    pub fn compose(&self, other: &Pose) -> Result<Pose> {
        check_space(self, other)?;
        Ok(self.compose_same(other))
    }

    fn compose_same(&self, other: &Pose) -> Pose {
        let rotation = self.rotation * other.rotation;
        let translation = match self.space {
            Space::Se3 => self.rotation * other.translation + self.translation,
            Space::Pcg3 => self.translation + other.translation,
        };
        Pose { rotation, translation, space: self.space }
    }

    /// `self^-1 * other`.
    pub fn relative(&self, other: &Pose) -> Result<Pose> {
        check_space(self, other)?;
        Ok(self.inverse().compose_same(other))
    }

    pub fn adjoint(&self) -> AdjointMatrix {
        let mut ad = Matrix6::zeros();
        ad.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        match self.space {
            Space::Se3 => {
                ad.fixed_view_mut::<3, 3>(3, 3).copy_from(&self.rotation);
                ad.fixed_view_mut::<3, 3>(3, 0)
                    .copy_from(&(hat3(&self.translation) * self.rotation));
            }
            Space::Pcg3 => {
                ad.fixed_view_mut::<3, 3>(3, 3).copy_from(&Matrix3::identity());
            }
        }
        ad
    }

    /// Homogeneous 4x4 form. Only meaningful as a group element for SE(3).
    pub fn to_homogeneous(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    /// Projects the rotation back onto SO(3) (polar decomposition).
    pub fn orthonormalized(&self) -> Pose {
        Pose { rotation: nearest_rotation(&self.rotation), ..*self }
    }

    pub fn log(&self) -> Result<Twist> {
        log_map(self)
    }

    /// `self * exp(xi)`.
    pub fn retract(&self, xi: &Twist) -> Result<Pose> {
        Ok(self.compose_same(&exp_map(xi, self.space)?))
    }
}

/// Composition. Panics if the poses belong to different groups; use
/// [`Pose::compose`] for a fallible version.
impl Mul for Pose {
    type Output = Pose;

    fn mul(self, rhs: Pose) -> Pose {
        &self * &rhs
    }
}

impl<'a> Mul<&'a Pose> for &'a Pose {
    type Output = Pose;

    fn mul(self, rhs: &'a Pose) -> Pose {
        assert_eq!(self.space, rhs.space, "cannot compose poses from different groups");
        self.compose_same(rhs)
    }
}

fn check_space(a: &Pose, b: &Pose) -> Result<()> {
    if a.space != b.space {
        return Err(Error::invalid(format!("space mismatch: {} vs {}", a.space, b.space)));
    }
    Ok(())
}

pub fn orthonormality_error(r: &Matrix3<f64>) -> f64 {
    (r.transpose() * r - Matrix3::identity()).norm()
}

/// Closest rotation matrix in the Frobenius sense.
pub fn nearest_rotation(m: &Matrix3<f64>) -> Matrix3<f64> {
    let svd = m.svd(true, true);
    let u = svd.u.expect("svd computed with u");
    let v_t = svd.v_t.expect("svd computed with v_t");
    let d = (u * v_t).determinant().signum();
    u * Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, d)) * v_t
}

pub fn hat3(w: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

pub fn vee3(m: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)])
}

/// 4x4 Lie-algebra matrix of a twist.
pub fn hat(xi: &Twist) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&hat3(&omega(xi)));
    m.fixed_view_mut::<3, 1>(0, 3).copy_from(&linear(xi));
    m
}

pub fn vee(m: &Matrix4<f64>) -> Twist {
    let w = vee3(&m.fixed_view::<3, 3>(0, 0).into_owned());
    let v = m.fixed_view::<3, 1>(0, 3).into_owned();
    pack(&w, &v)
}

pub fn omega(xi: &Twist) -> Vector3<f64> {
    xi.fixed_rows::<3>(0).into_owned()
}

pub fn linear(xi: &Twist) -> Vector3<f64> {
    xi.fixed_rows::<3>(3).into_owned()
}

pub fn pack(w: &Vector3<f64>, v: &Vector3<f64>) -> Twist {
    Twist::new(w.x, w.y, w.z, v.x, v.y, v.z)
}

// sin(t)/t, (1 - cos t)/t^2 and (t - sin t)/t^3
fn rodrigues_coefficients(theta: f64) -> (f64, f64, f64) {
    if theta < SMALL_ANGLE {
        let t2 = theta * theta;
        let t4 = t2 * t2;
        (
            1.0 - t2 / 6.0 + t4 / 120.0,
            0.5 - t2 / 24.0 + t4 / 720.0,
            1.0 / 6.0 - t2 / 120.0 + t4 / 5040.0,
        )
    } else {
        let half = (0.5 * theta).sin();
        (
            theta.sin() / theta,
            2.0 * half * half / (theta * theta),
            (theta - theta.sin()) / (theta * theta * theta),
        )
    }
}

pub fn so3_exp(w: &Vector3<f64>) -> Matrix3<f64> {
    let theta = w.norm();
    let (a, b, _) = rodrigues_coefficients(theta);
    let k = hat3(w);
    Matrix3::identity() + k * a + k * k * b
}

/// Rotation angle in `[0, pi]`.
pub fn rotation_angle(r: &Matrix3<f64>) -> f64 {
    let c = ((r.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let s = (vee3(&(r - r.transpose())) * 0.5).norm();
    s.atan2(c)
}

pub fn so3_log(r: &Matrix3<f64>) -> Result<Vector3<f64>> {
    let c = ((r.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let s_vec = vee3(&(r - r.transpose())) * 0.5;
    let s = s_vec.norm();
    let theta = s.atan2(c);
    if theta > PI - BRANCH_MARGIN {
        return Err(Error::BranchAmbiguity { angle: theta });
    }
    if theta < SMALL_ANGLE {
        let t2 = theta * theta;
        return Ok(s_vec * (1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0));
    }
    if theta < 2.5 {
        return Ok(s_vec * (theta / s));
    }
    // Near pi, sin(theta) is small; recover the axis from the symmetric part.
    let sym = (r + r.transpose()) * 0.5 - Matrix3::identity() * c;
    let k = (0..3)
        .max_by(|&i, &j| sym[(i, i)].total_cmp(&sym[(j, j)]))
        .expect("three diagonal entries");
    let col = sym.column(k).into_owned();
    let mut axis = col / ((1.0 - c) * sym[(k, k)]).sqrt();
    if axis.dot(&s_vec) < 0.0 {
        axis = -axis;
    }
    Ok(axis.normalize() * theta)
}

pub fn exp_map(xi: &Twist, space: Space) -> Result<Pose> {
    if xi.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("twist contains non-finite values"));
    }
    let w = omega(xi);
    let v = linear(xi);
    let theta = w.norm();
    let (a, b, c) = rodrigues_coefficients(theta);
    let k = hat3(&w);
    let k2 = k * k;
    let rotation = Matrix3::identity() + k * a + k2 * b;
    let translation = match space {
        Space::Se3 => (Matrix3::identity() + k * b + k2 * c) * v,
        Space::Pcg3 => v,
    };
    Ok(Pose { rotation, translation, space })
}

pub fn log_map(g: &Pose) -> Result<Twist> {
    let w = so3_log(&g.rotation)?;
    let v = match g.space {
        Space::Se3 => {
            let theta = w.norm();
            let d = if theta < SMALL_ANGLE {
                let t2 = theta * theta;
                1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0
            } else {
                let half = 0.5 * theta;
                (1.0 - half * half.cos() / half.sin()) / (theta * theta)
            };
            let k = hat3(&w);
            (Matrix3::identity() - k * 0.5 + k * k * d) * g.translation
        }
        Space::Pcg3 => g.translation,
    };
    Ok(pack(&w, &v))
}

pub fn adjoint(g: &Pose) -> AdjointMatrix {
    g.adjoint()
}

pub fn compose(g1: &Pose, g2: &Pose) -> Result<Pose> {
    g1.compose(g2)
}

pub fn inverse(g: &Pose) -> Pose {
    g.inverse()
}

pub fn relative(g1: &Pose, g2: &Pose) -> Result<Pose> {
    g1.relative(g2)
}

/// Product of a sequence of poses, re-orthonormalized every
/// [`RENORMALIZE_EVERY`] compositions.
pub fn compose_all<'a, I>(space: Space, poses: I) -> Result<Pose>
where
    I: IntoIterator<Item = &'a Pose>,
{
    let mut acc = Pose::identity(space);
    for (k, p) in poses.into_iter().enumerate() {
        acc = acc.compose(p)?;
        if (k + 1) % RENORMALIZE_EVERY == 0 {
            acc = acc.orthonormalized();
        }
    }
    Ok(acc)
}

/// Geodesic interpolation `g1 * exp(alpha * log(g1^-1 g2))`.
///
/// For PCG(3) this is slerp on the rotation and linear interpolation on the
/// translation. The endpoints are returned verbatim at `alpha` 0 and 1.
pub fn interpolate(g1: &Pose, g2: &Pose, alpha: f64) -> Result<Pose> {
    check_space(g1, g2)?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid(format!("interpolation parameter {alpha} outside [0, 1]")));
    }
    if alpha == 0.0 {
        return Ok(*g1);
    }
    if alpha == 1.0 {
        return Ok(*g2);
    }
    let xi = log_map(&g1.relative(g2)?)?;
    g1.retract(&(xi * alpha))
}

/// `(|R1 - R2|_F, |t1 - t2|_2)`.
pub fn pose_distance(g1: &Pose, g2: &Pose) -> (f64, f64) {
    (
        (g1.rotation - g2.rotation).norm(),
        (g1.translation - g2.translation).norm(),
    )
}
