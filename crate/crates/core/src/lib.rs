//! Kinematic core: humanoid skeleton, poses and forward kinematics, the
//! pose-adjustment command set with its gradient-descent IK solver, a
//! deterministic software renderer, and keyframe-to-clip interpolation.

pub mod commands;
pub mod ik;
pub mod interp;
pub mod math;
pub mod pose;
pub mod render;
pub mod skeleton;

pub use commands::{
    apply_command, format_command, parse_agent_command, CameraState, Command, CommandError,
    CommandParseError,
};
pub use ik::{solve_ik, IkConfig, IkError, IkSolution};
pub use interp::{
    interpolate, pad_clip, parse_clip, sample_rollout_window, write_clip, ClipDataset, ClipError,
    MotionClip, CLIP_FPS,
};
pub use math::{Quat, Vec3};
pub use pose::{
    forward_kinematics, pose_pair_to_sim_state, JointTransform, KinematicPose, PoseError,
    RigidBodyState, SimState,
};
pub use render::{render_view, ImageConfig, RasterImage, RenderError};
pub use skeleton::{
    default_humanoid, parse_skeleton, write_skeleton, BodyGeometry, BodyPart, JointSpec,
    SkeletonError, SkeletonTopology,
};
