//! Quaternion and rotation helpers shared across the workspace.
//!
//! All rotations are unit quaternions kept on the canonical hemisphere
//! (nonnegative scalar part) so that finite differences and interpolation
//! never hit the double-cover ambiguity.

use nalgebra::{UnitQuaternion, Vector3};

pub type Vec3 = Vector3<f64>;
pub type Quat = UnitQuaternion<f64>;

/// Flip a unit quaternion onto the hemisphere with nonnegative scalar part.
pub fn canonicalize(q: Quat) -> Quat {
    if q.w < 0.0 {
        Quat::new_unchecked(-q.into_inner())
    } else {
        q
    }
}

/// Canonical quaternion from a rotation vector (axis * angle, radians).
pub fn quat_from_rotvec(v: Vec3) -> Quat {
    canonicalize(Quat::from_scaled_axis(v))
}

/// Rotation vector (axis * angle, radians) of a unit quaternion.
///
/// The angle is taken in [0, pi] so the map is the inverse of
/// [`quat_from_rotvec`] on the canonical hemisphere.
pub fn rotvec_from_quat(q: Quat) -> Vec3 {
    canonicalize(q).scaled_axis()
}

/// Rotation about +y by `deg` degrees (right-handed).
pub fn yaw_rotation(deg: f64) -> Quat {
    canonicalize(Quat::from_axis_angle(&Vector3::y_axis(), deg.to_radians()))
}

/// Shortest-arc spherical interpolation; result is canonical.
pub fn slerp_shortest(a: Quat, b: Quat, t: f64) -> Quat {
    let qa = a.into_inner();
    let mut qb = b.into_inner();
    let mut dot = qa.coords.dot(&qb.coords);
    if dot < 0.0 {
        qb = -qb;
        dot = -dot;
    }
    let out = if dot > 1.0 - 1e-12 {
        // Nearly parallel: normalized lerp avoids sin(theta) ~ 0.
        (qa * (1.0 - t) + qb * t).normalize()
    } else {
        let theta = dot.clamp(-1.0, 1.0).acos();
        let sin_theta = theta.sin();
        let wa = ((1.0 - t) * theta).sin() / sin_theta;
        let wb = (t * theta).sin() / sin_theta;
        (qa * wa + qb * wb).normalize()
    };
    canonicalize(Quat::new_unchecked(out))
}

/// World-frame angular velocity taking `q_a` to `q_b` over `dt` seconds.
pub fn angular_velocity(q_a: Quat, q_b: Quat, dt: f64) -> Vec3 {
    rotvec_from_quat(q_b * q_a.inverse()) / dt
}
