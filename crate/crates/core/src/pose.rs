//! Kinematic poses, rigid-body states, and forward kinematics.

use crate::math::{angular_velocity, canonicalize, Quat, Vec3};
use crate::skeleton::SkeletonTopology;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PoseError {
    #[error("pose has {pose} joints but topology has {topology}")]
    DimensionMismatch { pose: usize, topology: usize },
    #[error("quaternion at joint {0} is not normalizable")]
    BadQuaternion(usize),
    #[error("non-finite value at joint {0}")]
    NonFinite(usize),
    #[error("dt must be positive, got {0}")]
    NonPositiveDt(f64),
}

/// Root translation plus per-joint local rotations.
///
/// Quaternions are unit, canonical (scalar part >= 0).
#[derive(Debug, Clone, PartialEq)]
pub struct KinematicPose {
    pub root_translation: Vec3,
    local_rotations: Vec<Quat>,
}

impl KinematicPose {
    /// Builds a pose, normalizing and canonicalizing every quaternion.
    pub fn new(root_translation: Vec3, rotations: Vec<Quat>) -> Result<Self, PoseError> {
        let mut local_rotations = Vec::with_capacity(rotations.len());
        for (i, q) in rotations.into_iter().enumerate() {
            let inner = q.into_inner();
            if !inner.coords.iter().all(|c| c.is_finite()) {
                return Err(PoseError::NonFinite(i));
            }
            let norm = inner.norm();
            if !(norm > 1e-9) {
                return Err(PoseError::BadQuaternion(i));
            }
            local_rotations.push(canonicalize(Quat::new_unchecked(inner / norm)));
        }
        if !root_translation.iter().all(|c| c.is_finite()) {
            return Err(PoseError::NonFinite(0));
        }
        Ok(Self {
            root_translation,
            local_rotations,
        })
    }

    /// Standing rest pose: identity rotations, root at its rest offset.
    pub fn rest(topology: &SkeletonTopology) -> Self {
        Self {
            root_translation: topology.joints()[0].local_offset,
            local_rotations: vec![Quat::identity(); topology.len()],
        }
    }

    pub fn len(&self) -> usize {
        self.local_rotations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.local_rotations.is_empty()
    }

    pub fn local_rotation(&self, joint: usize) -> Quat {
        self.local_rotations[joint]
    }

    pub fn local_rotations(&self) -> &[Quat] {
        &self.local_rotations
    }

    /// Replaces one joint's local rotation (canonicalized).
    pub fn set_local_rotation(&mut self, joint: usize, q: Quat) {
        self.local_rotations[joint] = canonicalize(Quat::new_normalize(q.into_inner()));
    }

    /// Yaw of the root about +y: the angle of the facing direction
    /// (root rotation applied to +z) projected to the horizontal plane,
    /// measured from world +z toward +x.
    pub fn root_yaw(&self) -> f64 {
        let facing = self.local_rotations[0] * Vec3::z();
        facing.x.atan2(facing.z)
    }
}

/// World transform of a single joint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointTransform {
    pub position: Vec3,
    pub orientation: Quat,
}

/// World transforms for every joint, in topology order.
pub fn forward_kinematics(
    topology: &SkeletonTopology,
    pose: &KinematicPose,
) -> Result<Vec<JointTransform>, PoseError> {
    if pose.len() != topology.len() {
        return Err(PoseError::DimensionMismatch {
            pose: pose.len(),
            topology: topology.len(),
        });
    }
    let mut out: Vec<JointTransform> = Vec::with_capacity(topology.len());
    for (i, joint) in topology.joints().iter().enumerate() {
        let t = match joint.parent {
            None => JointTransform {
                position: pose.root_translation,
                orientation: pose.local_rotation(i),
            },
            Some(p) => {
                let parent = out[p];
                JointTransform {
                    position: parent.position + parent.orientation * joint.local_offset,
                    orientation: canonicalize(parent.orientation * pose.local_rotation(i)),
                }
            }
        };
        out.push(t);
    }
    Ok(out)
}

/// State of one rigid body: position, orientation, linear and angular velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidBodyState {
    pub position: Vec3,
    pub orientation: Quat,
    pub linear_velocity: Vec3,
    pub angular_velocity: Vec3,
}

impl RigidBodyState {
    pub fn is_finite(&self) -> bool {
        self.position.iter().all(|c| c.is_finite())
            && self.orientation.coords.iter().all(|c| c.is_finite())
            && self.linear_velocity.iter().all(|c| c.is_finite())
            && self.angular_velocity.iter().all(|c| c.is_finite())
    }
}

/// Full physical state: one rigid body per topology joint, same order.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub bodies: Vec<RigidBodyState>,
}

impl SimState {
    pub fn is_finite(&self) -> bool {
        self.bodies.iter().all(|b| b.is_finite())
    }

    /// Static state (zero velocities) matching a kinematic pose.
    pub fn from_pose(
        topology: &SkeletonTopology,
        pose: &KinematicPose,
    ) -> Result<SimState, PoseError> {
        let transforms = forward_kinematics(topology, pose)?;
        Ok(SimState {
            bodies: transforms
                .iter()
                .map(|t| RigidBodyState {
                    position: t.position,
                    orientation: t.orientation,
                    linear_velocity: Vec3::zeros(),
                    angular_velocity: Vec3::zeros(),
                })
                .collect(),
        })
    }

    /// Reconstructs the kinematic pose (root translation + local rotations)
    /// from body world transforms.
    pub fn to_pose(&self, topology: &SkeletonTopology) -> Result<KinematicPose, PoseError> {
        if self.bodies.len() != topology.len() {
            return Err(PoseError::DimensionMismatch {
                pose: self.bodies.len(),
                topology: topology.len(),
            });
        }
        let mut rotations = Vec::with_capacity(self.bodies.len());
        for (i, joint) in topology.joints().iter().enumerate() {
            let q = match joint.parent {
                None => self.bodies[i].orientation,
                Some(p) => self.bodies[p].orientation.inverse() * self.bodies[i].orientation,
            };
            rotations.push(q);
        }
        KinematicPose::new(self.bodies[0].position, rotations)
    }
}

/// Physical state at `pose_b`, with velocities from the finite difference
/// of the two poses' world transforms over `dt`.
pub fn pose_pair_to_sim_state(
    topology: &SkeletonTopology,
    pose_a: &KinematicPose,
    pose_b: &KinematicPose,
    dt: f64,
) -> Result<SimState, PoseError> {
    if !(dt > 0.0) {
        return Err(PoseError::NonPositiveDt(dt));
    }
    let ta = forward_kinematics(topology, pose_a)?;
    let tb = forward_kinematics(topology, pose_b)?;
    let bodies = ta
        .iter()
        .zip(&tb)
        .map(|(a, b)| RigidBodyState {
            position: b.position,
            orientation: b.orientation,
            linear_velocity: (b.position - a.position) / dt,
            angular_velocity: angular_velocity(a.orientation, b.orientation, dt),
        })
        .collect();
    Ok(SimState { bodies })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::yaw_rotation;
    use crate::skeleton::default_humanoid;
    use approx::assert_relative_eq;
    use nalgebra::{Matrix4, Vector3, Vector4};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_pose(topology: &SkeletonTopology, rng: &mut ChaCha8Rng) -> KinematicPose {
        let rots = (0..topology.len())
            .map(|_| {
                let v = Vec3::new(
                    rng.random_range(-1.5..1.5),
                    rng.random_range(-1.5..1.5),
                    rng.random_range(-1.5..1.5),
                );
                Quat::from_scaled_axis(v)
            })
            .collect();
        let root = Vec3::new(
            rng.random_range(-2.0..2.0),
            rng.random_range(0.0..2.0),
            rng.random_range(-2.0..2.0),
        );
        KinematicPose::new(root, rots).unwrap()
    }

    /// Independent FK oracle using 4x4 homogeneous matrix products.
    fn matrix_fk(topology: &SkeletonTopology, pose: &KinematicPose) -> Vec<Vec3> {
        let mut world: Vec<Matrix4<f64>> = Vec::new();
        for (i, joint) in topology.joints().iter().enumerate() {
            let rot = pose.local_rotation(i).to_homogeneous();
            let local = match joint.parent {
                None => Matrix4::new_translation(&pose.root_translation) * rot,
                Some(p) => {
                    world[p] * Matrix4::new_translation(&joint.local_offset) * rot
                }
            };
            world.push(local);
        }
        world
            .iter()
            .map(|m| {
                let h = m * Vector4::new(0.0, 0.0, 0.0, 1.0);
                Vec3::new(h.x, h.y, h.z)
            })
            .collect()
    }

    #[test]
    fn identity_pose_accumulates_offsets() {
        let topo = default_humanoid();
        let mut pose = KinematicPose::rest(&topo);
        pose.root_translation = Vec3::zeros();
        let fk = forward_kinematics(&topo, &pose).unwrap();
        for (i, _) in topo.joints().iter().enumerate() {
            let mut expect = Vec3::zeros();
            let mut cur = Some(i);
            while let Some(j) = cur {
                if topo.parent(j).is_some() {
                    expect += topo.joints()[j].local_offset;
                }
                cur = topo.parent(j);
            }
            assert_relative_eq!(fk[i].position, expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn yaw_180_negates_x_and_z() {
        let topo = default_humanoid();
        let mut pose = KinematicPose::rest(&topo);
        pose.root_translation = Vec3::zeros();
        let upright = forward_kinematics(&topo, &pose).unwrap();
        pose.set_local_rotation(0, yaw_rotation(180.0));
        let turned = forward_kinematics(&topo, &pose).unwrap();
        for (a, b) in upright.iter().zip(&turned) {
            assert_relative_eq!(b.position.x, -a.position.x, epsilon = 1e-12);
            assert_relative_eq!(b.position.y, a.position.y, epsilon = 1e-12);
            assert_relative_eq!(b.position.z, -a.position.z, epsilon = 1e-12);
        }
    }

    #[test]
    fn fk_matches_matrix_oracle_on_50_random_poses() {
        let topo = default_humanoid();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let pose = random_pose(&topo, &mut rng);
            let fk = forward_kinematics(&topo, &pose).unwrap();
            let oracle = matrix_fk(&topo, &pose);
            for (t, o) in fk.iter().zip(&oracle) {
                assert_relative_eq!(t.position, *o, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn fk_child_is_parent_composed_with_local() {
        let topo = default_humanoid();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pose = random_pose(&topo, &mut rng);
        let fk = forward_kinematics(&topo, &pose).unwrap();
        for (i, joint) in topo.joints().iter().enumerate() {
            if let Some(p) = joint.parent {
                let expect = fk[p].position + fk[p].orientation * joint.local_offset;
                assert_relative_eq!(fk[i].position, expect, epsilon = 1e-12);
                let expect_q = fk[p].orientation * pose.local_rotation(i);
                assert_relative_eq!(
                    fk[i].orientation.to_rotation_matrix(),
                    expect_q.to_rotation_matrix(),
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn equal_poses_give_zero_velocities() {
        let topo = default_humanoid();
        let pose = KinematicPose::rest(&topo);
        let state = pose_pair_to_sim_state(&topo, &pose, &pose, 0.05).unwrap();
        for b in &state.bodies {
            assert_relative_eq!(b.linear_velocity, Vec3::zeros(), epsilon = 1e-12);
            assert_relative_eq!(b.angular_velocity, Vec3::zeros(), epsilon = 1e-12);
        }
    }

    #[test]
    fn root_translation_gives_linear_velocity() {
        let topo = default_humanoid();
        let a = KinematicPose::rest(&topo);
        let mut b = a.clone();
        b.root_translation += Vec3::new(0.2, 0.0, 0.0);
        let state = pose_pair_to_sim_state(&topo, &a, &b, 0.05).unwrap();
        for body in &state.bodies {
            assert_relative_eq!(
                body.linear_velocity,
                Vec3::new(4.0, 0.0, 0.0),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn joint_rotation_gives_angular_velocity() {
        let topo = default_humanoid();
        let a = KinematicPose::rest(&topo);
        let mut b = a.clone();
        let elbow = topo.joint_index("left_elbow").unwrap();
        b.set_local_rotation(elbow, yaw_rotation(9.0));
        let state = pose_pair_to_sim_state(&topo, &a, &b, 0.05).unwrap();
        let w = state.bodies[elbow].angular_velocity;
        assert_relative_eq!(w.norm(), 3.14159, epsilon = 1e-5);
        assert_relative_eq!(w.normalize(), Vec3::y(), epsilon = 1e-9);
    }

    #[test]
    fn swapped_poses_negate_velocities() {
        let topo = default_humanoid();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_pose(&topo, &mut rng);
        let b = random_pose(&topo, &mut rng);
        let ab = pose_pair_to_sim_state(&topo, &a, &b, 0.05).unwrap();
        let ba = pose_pair_to_sim_state(&topo, &b, &a, 0.05).unwrap();
        for (x, y) in ab.bodies.iter().zip(&ba.bodies) {
            assert_relative_eq!(x.linear_velocity, -y.linear_velocity, epsilon = 1e-9);
            assert_relative_eq!(x.angular_velocity, -y.angular_velocity, epsilon = 1e-9);
        }
    }

    #[test]
    fn nonpositive_dt_is_an_error() {
        let topo = default_humanoid();
        let pose = KinematicPose::rest(&topo);
        assert!(pose_pair_to_sim_state(&topo, &pose, &pose, 0.0).is_err());
        assert!(pose_pair_to_sim_state(&topo, &pose, &pose, -1.0).is_err());
    }

    #[test]
    fn construction_canonicalizes_quaternions() {
        let topo = default_humanoid();
        let q = Quat::from_axis_angle(&Vector3::y_axis(), 3.0);
        let neg = Quat::new_unchecked(-q.into_inner());
        let pose = KinematicPose::new(Vec3::zeros(), vec![neg; topo.len()]).unwrap();
        for i in 0..pose.len() {
            assert!(pose.local_rotation(i).w >= 0.0);
            assert_relative_eq!(pose.local_rotation(i).norm(), 1.0, epsilon = 1e-12);
        }
    }
}
