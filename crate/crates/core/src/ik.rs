//! Gradient-descent inverse kinematics over a joint chain.
//!
//! The solver minimizes the squared distance between the chain tip and a
//! target point over the chain joints' rotations. Steps are damped and
//! backtracked (halve the step until the residual decreases, at most 10
//! halvings), so the recorded residual sequence is nonincreasing by
//! construction.

use crate::math::{canonicalize, Quat, Vec3};
use crate::pose::{forward_kinematics, KinematicPose, PoseError};
use crate::skeleton::SkeletonTopology;
use thiserror::Error;

const MAX_HALVINGS: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IkConfig {
    pub max_iterations: usize,
    /// Meters; the solve stops once the tip is closer than this.
    pub tolerance: f64,
    pub step_size: f64,
    pub damping: f64,
}

impl Default for IkConfig {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            tolerance: 0.01,
            step_size: 1.0,
            damping: 1e-3,
        }
    }
}

impl IkConfig {
    pub fn validate(&self) -> Result<(), IkError> {
        if self.max_iterations < 1 || !(self.tolerance > 0.0) || !(self.step_size > 0.0) {
            return Err(IkError::BadConfig);
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum IkError {
    #[error("ik config invalid: max_iterations >= 1, tolerance > 0, step_size > 0 required")]
    BadConfig,
    #[error("chain is empty")]
    EmptyChain,
    #[error("chain link {child} does not have {parent} as parent")]
    NotContiguous { parent: String, child: String },
    #[error("target is not finite")]
    BadTarget,
    #[error(transparent)]
    Pose(#[from] PoseError),
}

/// Result of an IK solve.
#[derive(Debug, Clone)]
pub struct IkSolution {
    pub pose: KinematicPose,
    /// Final tip-to-target distance, meters.
    pub residual: f64,
    /// Accepted gradient steps.
    pub iterations: usize,
    /// Residual before the first step and after each accepted step;
    /// nonincreasing.
    pub residual_history: Vec<f64>,
}

pub fn solve_ik(
    topology: &SkeletonTopology,
    pose: &KinematicPose,
    chain: &[usize],
    target: Vec3,
    config: &IkConfig,
) -> Result<IkSolution, IkError> {
    config.validate()?;
    if chain.is_empty() {
        return Err(IkError::EmptyChain);
    }
    for w in chain.windows(2) {
        if topology.parent(w[1]) != Some(w[0]) {
            return Err(IkError::NotContiguous {
                parent: topology.joint_name(w[0]).to_string(),
                child: topology.joint_name(w[1]).to_string(),
            });
        }
    }
    if !target.iter().all(|c| c.is_finite()) {
        return Err(IkError::BadTarget);
    }

    let tip = *chain.last().unwrap();
    let mut current = pose.clone();
    let mut transforms = forward_kinematics(topology, &current)?;
    let mut residual = (transforms[tip].position - target).norm();
    let mut history = vec![residual];
    let mut iterations = 0;

    while residual >= config.tolerance && iterations < config.max_iterations {
        let tip_pos = transforms[tip].position;
        let error = tip_pos - target;

        // Gradient of |tip - target|^2 w.r.t. a world-frame rotation at each
        // chain joint: 2 * ((tip - joint) x error).
        let grads: Vec<Vec3> = chain
            .iter()
            .map(|&j| 2.0 * (tip_pos - transforms[j].position).cross(&error))
            .collect();
        let grad_norm = grads.iter().map(|g| g.norm_squared()).sum::<f64>().sqrt();
        if grad_norm < 1e-15 {
            break; // stalled: no descent direction
        }
        let scale = 1.0 / (1.0 + config.damping * grad_norm);

        let mut step = config.step_size;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let mut candidate = current.clone();
            for (&j, g) in chain.iter().zip(&grads) {
                let world_delta = -step * scale * g;
                let parent_rot = match topology.parent(j) {
                    Some(p) => transforms[p].orientation,
                    None => Quat::identity(),
                };
                let local_delta = parent_rot.inverse() * world_delta;
                candidate.set_local_rotation(
                    j,
                    canonicalize(Quat::from_scaled_axis(local_delta) * current.local_rotation(j)),
                );
            }
            let cand_transforms = forward_kinematics(topology, &candidate)?;
            let cand_residual = (cand_transforms[tip].position - target).norm();
            if cand_residual < residual {
                accepted = Some((candidate, cand_transforms, cand_residual));
                break;
            }
            step *= 0.5;
        }
        match accepted {
            Some((pose2, transforms2, residual2)) => {
                current = pose2;
                transforms = transforms2;
                residual = residual2;
                history.push(residual);
                iterations += 1;
            }
            None => break, // no step improves: converged or stuck
        }
    }

    Ok(IkSolution {
        pose: current,
        residual,
        iterations,
        residual_history: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skeleton::default_humanoid;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn arm_chain(topo: &SkeletonTopology) -> Vec<usize> {
        topo.ik_chain(topo.joint_index("left_fingers").unwrap())
            .unwrap()
            .to_vec()
    }

    #[test]
    fn target_at_tip_returns_immediately() {
        let topo = default_humanoid();
        let pose = KinematicPose::rest(&topo);
        let chain = arm_chain(&topo);
        let tip = *chain.last().unwrap();
        let target = forward_kinematics(&topo, &pose).unwrap()[tip].position;
        let sol = solve_ik(&topo, &pose, &chain, target, &IkConfig::default()).unwrap();
        assert_eq!(sol.iterations, 0);
        assert_eq!(sol.residual, 0.0);
        assert_eq!(sol.pose, pose);
    }

    #[test]
    fn reachable_targets_converge() {
        let topo = default_humanoid();
        let pose = KinematicPose::rest(&topo);
        let config = IkConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut converged = 0;
        let trials = 100;
        for _ in 0..trials {
            // Perturb a copy of the pose along the chain, take its FK tip as a
            // guaranteed-reachable target.
            let chain = arm_chain(&topo);
            let mut perturbed = pose.clone();
            for &j in &chain {
                let v = Vec3::new(
                    rng.random_range(-0.8..0.8),
                    rng.random_range(-0.8..0.8),
                    rng.random_range(-0.8..0.8),
                );
                perturbed.set_local_rotation(j, Quat::from_scaled_axis(v));
            }
            let tip = *chain.last().unwrap();
            let target = forward_kinematics(&topo, &perturbed).unwrap()[tip].position;
            let sol = solve_ik(&topo, &pose, &chain, target, &config).unwrap();
            if sol.residual < config.tolerance {
                converged += 1;
            }
            for w in sol.residual_history.windows(2) {
                assert!(w[1] <= w[0], "residual increased: {w:?}");
            }
        }
        assert!(converged >= 95, "only {converged}/{trials} converged");
    }

    #[test]
    fn unreachable_target_extends_chain_fully() {
        let topo = default_humanoid();
        let pose = KinematicPose::rest(&topo);
        let chain = arm_chain(&topo);
        let base = chain[0];
        let fk = forward_kinematics(&topo, &pose).unwrap();
        let base_pos = fk[base].position;
        let chain_len: f64 = chain[1..]
            .iter()
            .map(|&j| topo.joints()[j].local_offset.norm())
            .sum();
        let dir = Vec3::new(1.0, 2.0, 0.5).normalize();
        let target = base_pos + 10.0 * dir;
        let sol = solve_ik(&topo, &pose, &chain, target, &IkConfig::default()).unwrap();
        assert_relative_eq!(sol.residual, 10.0 - chain_len, epsilon = 0.02);
        // Tip lies on the segment from the chain base toward the target.
        let tip_pos = forward_kinematics(&topo, &sol.pose).unwrap()[*chain.last().unwrap()].position;
        let along = (tip_pos - base_pos).dot(&dir);
        let offaxis = (tip_pos - base_pos - along * dir).norm();
        assert!(along > 0.0);
        assert!(offaxis < 0.02, "tip {offaxis} m off the base-target line");
    }

    #[test]
    fn joints_outside_chain_are_untouched() {
        let topo = default_humanoid();
        let pose = KinematicPose::rest(&topo);
        let chain = arm_chain(&topo);
        let target = Vec3::new(0.5, 1.2, 0.4);
        let sol = solve_ik(&topo, &pose, &chain, target, &IkConfig::default()).unwrap();
        for j in 0..topo.len() {
            if !chain.contains(&j) {
                assert_eq!(sol.pose.local_rotation(j), pose.local_rotation(j));
            }
        }
        assert_eq!(sol.pose.root_translation, pose.root_translation);
    }

    #[test]
    fn invalid_chain_is_rejected() {
        let topo = default_humanoid();
        let pose = KinematicPose::rest(&topo);
        let bad = vec![
            topo.joint_index("left_hip").unwrap(),
            topo.joint_index("right_knee").unwrap(),
        ];
        assert!(matches!(
            solve_ik(&topo, &pose, &bad, Vec3::zeros(), &IkConfig::default()),
            Err(IkError::NotContiguous { .. })
        ));
    }
}
