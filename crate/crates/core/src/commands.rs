//! The pose-adjustment command set: text grammar, parser, formatter, and
//! command application over the kinematic pose.
//!
//! Command text is wrapped in literal `[start of command]` / `[end of command]`
//! markers. The grammar is comma-separated:
//!
//!   command1, selected joint <name>, movement [dx, dy, dz]
//!   command2, selected end effector <name>, movement [dx, dy, dz]
//!   command3, selected joint <name>, roll_degree <deg>
//!   command4, rotate_degree <deg>
//!   command5, rotation_degree <deg>, movement [dx, dy, dz], support points [<name>, ...]
//!   command6, rotation_degree <deg>, movement [dx, dy, dz]
//!
//! A bare reply of `Done` (no markers) terminates an adjustment loop.

use crate::ik::{solve_ik, IkConfig, IkError};
use crate::math::{canonicalize, yaw_rotation, Quat, Vec3};
use crate::pose::{forward_kinematics, KinematicPose, PoseError};
use crate::skeleton::SkeletonTopology;
use thiserror::Error;

pub const COMMAND_START: &str = "[start of command]";
pub const COMMAND_END: &str = "[end of command]";

/// Numbers outside these bounds are rejected as implausible agent output.
pub const MAX_MOVEMENT_M: f64 = 1000.0;
pub const MAX_DEGREES: f64 = 36_000.0;

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    /// Rotate the joint's parent so the joint moves toward its position + delta.
    SingleJointMove { joint: String, delta: Vec3 },
    /// Move an end effector along its fixed IK chain.
    EndEffectorMove { effector: String, delta: Vec3 },
    /// Rotate/translate the pelvis, then restore the support points via IK.
    PelvisSupported {
        rotation_deg: f64,
        translation: Vec3,
        support: Vec<String>,
    },
    /// Rotate/translate the pelvis directly; descendants follow by FK.
    PelvisFree { rotation_deg: f64, translation: Vec3 },
    /// Roll a joint about its bone axis, degrees clockwise seen from the parent.
    SingleJointRoll { joint: String, degrees: f64 },
    /// Rotate the camera clockwise (top-down) around the humanoid.
    CameraRotate { degrees: f64 },
    Done,
}

impl Command {
    /// Stable identifier used in the wire grammar; `None` for `Done`.
    pub fn id(&self) -> Option<u8> {
        match self {
            Command::SingleJointMove { .. } => Some(1),
            Command::EndEffectorMove { .. } => Some(2),
            Command::SingleJointRoll { .. } => Some(3),
            Command::CameraRotate { .. } => Some(4),
            Command::PelvisSupported { .. } => Some(5),
            Command::PelvisFree { .. } => Some(6),
            Command::Done => None,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum CommandParseError {
    #[error("no [start of command] block and reply is not \"Done\"")]
    MissingBlock,
    #[error("unknown command id {id:?} in {span:?}")]
    UnknownCommandId { id: String, span: String },
    #[error("unknown joint name {name:?} in {span:?}")]
    UnknownJointName { name: String, span: String },
    #[error("{name:?} is not an end effector, in {span:?}")]
    NotAnEndEffector { name: String, span: String },
    #[error("malformed vector in {span:?}")]
    MalformedVector { span: String },
    #[error("number {value} out of range in {span:?}")]
    OutOfRangeNumber { value: f64, span: String },
    #[error("missing field {field:?} in {span:?}")]
    MissingField { field: &'static str, span: String },
    #[error("support point set is empty in {span:?}")]
    EmptySupportSet { span: String },
}

impl CommandParseError {
    /// The offending text span, for logging.
    pub fn span(&self) -> Option<&str> {
        match self {
            CommandParseError::MissingBlock => None,
            CommandParseError::UnknownCommandId { span, .. }
            | CommandParseError::UnknownJointName { span, .. }
            | CommandParseError::NotAnEndEffector { span, .. }
            | CommandParseError::MalformedVector { span }
            | CommandParseError::OutOfRangeNumber { span, .. }
            | CommandParseError::MissingField { span, .. }
            | CommandParseError::EmptySupportSet { span } => Some(span),
        }
    }
}

fn find_ci(haystack: &str, needle: &str) -> Option<usize> {
    haystack
        .to_ascii_lowercase()
        .find(&needle.to_ascii_lowercase())
}

fn is_done(text: &str) -> bool {
    text.trim().trim_matches(['.', '"', '\'']).eq_ignore_ascii_case("done")
}

/// Splits on commas that are not nested inside brackets.
fn split_top_level(content: &str) -> Vec<&str> {
    let mut fields = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, c) in content.char_indices() {
        match c {
            '[' => depth += 1,
            ']' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                fields.push(content[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    fields.push(content[start..].trim());
    fields
}

fn parse_number(text: &str, span: &str, max_abs: f64) -> Result<f64, CommandParseError> {
    let value: f64 = text
        .trim()
        .parse()
        .map_err(|_| CommandParseError::MalformedVector {
            span: span.to_string(),
        })?;
    if !value.is_finite() || value.abs() > max_abs {
        return Err(CommandParseError::OutOfRangeNumber {
            value,
            span: span.to_string(),
        });
    }
    Ok(value)
}

fn parse_bracket_list<'a>(field: &'a str) -> Result<Vec<&'a str>, CommandParseError> {
    let open = field
        .find('[')
        .ok_or_else(|| CommandParseError::MalformedVector {
            span: field.to_string(),
        })?;
    let close = field
        .rfind(']')
        .filter(|c| *c > open)
        .ok_or_else(|| CommandParseError::MalformedVector {
            span: field.to_string(),
        })?;
    Ok(field[open + 1..close]
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect())
}

fn parse_vector(field: &str) -> Result<Vec3, CommandParseError> {
    let parts = parse_bracket_list(field)?;
    if parts.len() != 3 {
        return Err(CommandParseError::MalformedVector {
            span: field.to_string(),
        });
    }
    let mut v = [0.0; 3];
    for (slot, text) in v.iter_mut().zip(&parts) {
        *slot = parse_number(text, field, MAX_MOVEMENT_M)?;
    }
    Ok(Vec3::new(v[0], v[1], v[2]))
}

fn field_after<'a>(
    fields: &[&'a str],
    key: &'static str,
    span: &str,
) -> Result<&'a str, CommandParseError> {
    fields
        .iter()
        .find_map(|f| {
            let lower = f.to_ascii_lowercase();
            lower
                .starts_with(&key.to_ascii_lowercase())
                .then(|| f[key.len()..].trim())
        })
        .ok_or_else(|| CommandParseError::MissingField {
            field: key,
            span: span.to_string(),
        })
}

fn check_joint(
    topology: &SkeletonTopology,
    name: &str,
    span: &str,
) -> Result<String, CommandParseError> {
    topology
        .joint_index(name)
        .map(|_| name.to_string())
        .map_err(|_| CommandParseError::UnknownJointName {
            name: name.to_string(),
            span: span.to_string(),
        })
}

/// Extracts the command block from an agent reply and parses it.
pub fn parse_agent_command(
    topology: &SkeletonTopology,
    reply: &str,
) -> Result<Command, CommandParseError> {
    let content = match (find_ci(reply, COMMAND_START), find_ci(reply, COMMAND_END)) {
        (Some(s), Some(e)) if e > s => reply[s + COMMAND_START.len()..e].trim(),
        _ => {
            if is_done(reply) {
                return Ok(Command::Done);
            }
            return Err(CommandParseError::MissingBlock);
        }
    };
    if is_done(content) {
        return Ok(Command::Done);
    }

    let fields = split_top_level(content);
    let head = fields[0].to_ascii_lowercase();
    let id = head
        .strip_prefix("command")
        .and_then(|rest| rest.trim().parse::<u32>().ok());
    match id {
        Some(1) => {
            let joint = field_after(&fields, "selected joint", content)?;
            let joint = check_joint(topology, joint, content)?;
            let delta = parse_vector(field_after(&fields, "movement", content)?)?;
            Ok(Command::SingleJointMove { joint, delta })
        }
        Some(2) => {
            let name = field_after(&fields, "selected end effector", content)?;
            let name = check_joint(topology, name, content)?;
            let idx = topology.joint_index(&name).unwrap();
            if !topology.is_end_effector(idx) {
                return Err(CommandParseError::NotAnEndEffector {
                    name,
                    span: content.to_string(),
                });
            }
            let delta = parse_vector(field_after(&fields, "movement", content)?)?;
            Ok(Command::EndEffectorMove {
                effector: name,
                delta,
            })
        }
        Some(3) => {
            let joint = field_after(&fields, "selected joint", content)?;
            let joint = check_joint(topology, joint, content)?;
            let degrees = parse_number(
                field_after(&fields, "roll_degree", content)?,
                content,
                MAX_DEGREES,
            )?;
            Ok(Command::SingleJointRoll { joint, degrees })
        }
        Some(4) => {
            let degrees = parse_number(
                field_after(&fields, "rotate_degree", content)?,
                content,
                MAX_DEGREES,
            )?;
            Ok(Command::CameraRotate { degrees })
        }
        Some(5) => {
            let rotation_deg = parse_number(
                field_after(&fields, "rotation_degree", content)?,
                content,
                MAX_DEGREES,
            )?;
            let translation = parse_vector(field_after(&fields, "movement", content)?)?;
            let list = parse_bracket_list(field_after(&fields, "support points", content)?)?;
            if list.is_empty() {
                return Err(CommandParseError::EmptySupportSet {
                    span: content.to_string(),
                });
            }
            let mut support = Vec::with_capacity(list.len());
            for name in list {
                support.push(check_joint(topology, name, content)?);
            }
            Ok(Command::PelvisSupported {
                rotation_deg,
                translation,
                support,
            })
        }
        Some(6) => {
            let rotation_deg = parse_number(
                field_after(&fields, "rotation_degree", content)?,
                content,
                MAX_DEGREES,
            )?;
            let translation = parse_vector(field_after(&fields, "movement", content)?)?;
            Ok(Command::PelvisFree {
                rotation_deg,
                translation,
            })
        }
        _ => Err(CommandParseError::UnknownCommandId {
            id: fields[0].to_string(),
            span: content.to_string(),
        }),
    }
}

/// Canonical wire text for a command; inverse of [`parse_agent_command`].
pub fn format_command(cmd: &Command) -> String {
    let vec = |v: &Vec3| format!("[{}, {}, {}]", v.x, v.y, v.z);
    let body = match cmd {
        Command::SingleJointMove { joint, delta } => {
            format!("command1, selected joint {joint}, movement {}", vec(delta))
        }
        Command::EndEffectorMove { effector, delta } => format!(
            "command2, selected end effector {effector}, movement {}",
            vec(delta)
        ),
        Command::SingleJointRoll { joint, degrees } => {
            format!("command3, selected joint {joint}, roll_degree {degrees}")
        }
        Command::CameraRotate { degrees } => format!("command4, rotate_degree {degrees}"),
        Command::PelvisSupported {
            rotation_deg,
            translation,
            support,
        } => format!(
            "command5, rotation_degree {rotation_deg}, movement {}, support points [{}]",
            vec(translation),
            support.join(", ")
        ),
        Command::PelvisFree {
            rotation_deg,
            translation,
        } => format!(
            "command6, rotation_degree {rotation_deg}, movement {}",
            vec(translation)
        ),
        Command::Done => return "Done".to_string(),
    };
    format!("{COMMAND_START} {body} {COMMAND_END}")
}

// --- camera --------------------------------------------------------------------

/// Camera on a horizontal circle around the pelvis, looking at the pelvis.
///
/// `azimuth_deg` counts clockwise from world +z when seen from above, so a
/// positive camera-rotation command increases it. The default (-45 deg)
/// places the viewer in front of the humanoid and toward its left side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraState {
    pub azimuth_deg: f64,
    pub radius: f64,
    /// Vertical offset from the pelvis; unchanged by camera rotation.
    pub height_offset: f64,
}

impl Default for CameraState {
    fn default() -> Self {
        Self {
            azimuth_deg: -45.0,
            radius: 3.0,
            height_offset: 0.3,
        }
    }
}

impl CameraState {
    /// World-space eye position for a given pelvis position.
    pub fn eye(&self, pelvis: Vec3) -> Vec3 {
        let az = self.azimuth_deg.to_radians();
        pelvis + Vec3::new(-az.sin() * self.radius, self.height_offset, az.cos() * self.radius)
    }
}

// --- application ---------------------------------------------------------------

#[derive(Debug, Error)]
pub enum CommandError {
    #[error("Done is not an executable command")]
    DoneNotExecutable,
    #[error("unknown joint {0:?}")]
    UnknownJoint(String),
    #[error("{0:?} has no IK chain")]
    NoChain(String),
    #[error("the root joint cannot be moved with a single-joint command")]
    RootJointNotMovable,
    #[error(transparent)]
    Ik(#[from] IkError),
    #[error(transparent)]
    Pose(#[from] PoseError),
}

/// Applies one command, returning the updated pose and camera.
///
/// Every command except camera rotation leaves the camera untouched; camera
/// rotation leaves the pose untouched. Support points that cannot be fully
/// restored are kept best-effort and the residual is logged.
pub fn apply_command(
    topology: &SkeletonTopology,
    pose: &KinematicPose,
    camera: &CameraState,
    cmd: &Command,
    ik: &IkConfig,
) -> Result<(KinematicPose, CameraState), CommandError> {
    match cmd {
        Command::Done => Err(CommandError::DoneNotExecutable),
        Command::CameraRotate { degrees } => {
            let mut cam = *camera;
            cam.azimuth_deg += degrees;
            Ok((pose.clone(), cam))
        }
        Command::SingleJointMove { joint, delta } => {
            let j = topology
                .joint_index(joint)
                .map_err(|_| CommandError::UnknownJoint(joint.clone()))?;
            let parent = topology.parent(j).ok_or(CommandError::RootJointNotMovable)?;
            let fk = forward_kinematics(topology, pose)?;
            let target = fk[j].position + delta;
            let sol = solve_ik(topology, pose, &[parent, j], target, ik)?;
            Ok((sol.pose, *camera))
        }
        Command::EndEffectorMove { effector, delta } => {
            let e = topology
                .joint_index(effector)
                .map_err(|_| CommandError::UnknownJoint(effector.clone()))?;
            let chain = topology
                .ik_chain(e)
                .ok_or_else(|| CommandError::NoChain(effector.clone()))?
                .to_vec();
            let fk = forward_kinematics(topology, pose)?;
            let target = fk[e].position + delta;
            let sol = solve_ik(topology, pose, &chain, target, ik)?;
            Ok((sol.pose, *camera))
        }
        Command::PelvisFree {
            rotation_deg,
            translation,
        } => {
            let mut out = pose.clone();
            apply_root_transform(&mut out, *rotation_deg, *translation);
            Ok((out, *camera))
        }
        Command::PelvisSupported {
            rotation_deg,
            translation,
            support,
        } => {
            let fk = forward_kinematics(topology, pose)?;
            let mut anchors = Vec::with_capacity(support.len());
            for name in support {
                let j = topology
                    .joint_index(name)
                    .map_err(|_| CommandError::UnknownJoint(name.clone()))?;
                anchors.push((j, fk[j].position));
            }
            let mut out = pose.clone();
            apply_root_transform(&mut out, *rotation_deg, *translation);
            for (j, original) in anchors {
                let chain = topology.path_from_root(j);
                let sol = solve_ik(topology, &out, &chain, original, ik)?;
                if sol.residual > ik.tolerance {
                    log::warn!(
                        "support point {} not fully restored: residual {:.4} m",
                        topology.joint_name(j),
                        sol.residual
                    );
                }
                out = sol.pose;
            }
            Ok((out, *camera))
        }
        Command::SingleJointRoll { joint, degrees } => {
            let j = topology
                .joint_index(joint)
                .map_err(|_| CommandError::UnknownJoint(joint.clone()))?;
            let fk = forward_kinematics(topology, pose)?;
            // Bone axis: parent -> joint in the current pose; +y for the root.
            // Clockwise (seen from the parent toward the joint) is a negative
            // rotation about that axis.
            let (axis, parent_rot) = match topology.parent(j) {
                Some(p) => {
                    let dir = fk[j].position - fk[p].position;
                    let norm = dir.norm();
                    let axis = if norm < 1e-12 { Vec3::y() } else { dir / norm };
                    (axis, fk[p].orientation)
                }
                None => (Vec3::y(), Quat::identity()),
            };
            let world_delta = Quat::from_axis_angle(
                &nalgebra::Unit::new_normalize(axis),
                -degrees.to_radians(),
            );
            let local_delta = parent_rot.inverse() * world_delta * parent_rot;
            let mut out = pose.clone();
            out.set_local_rotation(j, canonicalize(local_delta * pose.local_rotation(j)));
            Ok((out, *camera))
        }
    }
}

fn apply_root_transform(pose: &mut KinematicPose, rotation_deg: f64, translation: Vec3) {
    // Positive rotation turns the humanoid about +y (to its left).
    let q = yaw_rotation(rotation_deg);
    pose.set_local_rotation(0, canonicalize(q * pose.local_rotation(0)));
    pose.root_translation += translation;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skeleton::default_humanoid;
    use approx::assert_relative_eq;

    fn setup() -> (SkeletonTopology, KinematicPose, CameraState, IkConfig) {
        let topo = default_humanoid();
        let pose = KinematicPose::rest(&topo);
        (topo, pose, CameraState::default(), IkConfig::default())
    }

    #[test]
    fn parses_supplementary_end_effector_example() {
        let (topo, ..) = setup();
        let reply = "Some analysis first.\n[start of command] \n command2, selected end effector right_toes, movement [0, 0.1, 0.1] \n [end of command]\nConclusion.";
        let cmd = parse_agent_command(&topo, reply).unwrap();
        assert_eq!(
            cmd,
            Command::EndEffectorMove {
                effector: "right_toes".into(),
                delta: Vec3::new(0.0, 0.1, 0.1),
            }
        );
    }

    #[test]
    fn parses_bare_done() {
        let (topo, ..) = setup();
        assert_eq!(parse_agent_command(&topo, "Done").unwrap(), Command::Done);
        assert_eq!(parse_agent_command(&topo, " done \n").unwrap(), Command::Done);
    }

    #[test]
    fn parses_roll_command() {
        let (topo, ..) = setup();
        let reply = "[start of command] command3, selected joint right_hip, roll_degree 90 [end of command]";
        assert_eq!(
            parse_agent_command(&topo, reply).unwrap(),
            Command::SingleJointRoll {
                joint: "right_hip".into(),
                degrees: 90.0,
            }
        );
    }

    #[test]
    fn unknown_command_id_is_an_error() {
        let (topo, ..) = setup();
        let reply = "[start of command] command9, foo [end of command]";
        assert!(matches!(
            parse_agent_command(&topo, reply),
            Err(CommandParseError::UnknownCommandId { .. })
        ));
    }

    #[test]
    fn missing_block_is_an_error() {
        let (topo, ..) = setup();
        assert_eq!(
            parse_agent_command(&topo, "I think we should move the leg."),
            Err(CommandParseError::MissingBlock)
        );
    }

    #[test]
    fn unknown_joint_is_an_error_with_span() {
        let (topo, ..) = setup();
        let reply = "[start of command] command1, selected joint left_tentacle, movement [0, 0, 0.2] [end of command]";
        match parse_agent_command(&topo, reply) {
            Err(CommandParseError::UnknownJointName { name, span }) => {
                assert_eq!(name, "left_tentacle");
                assert!(span.contains("command1"));
            }
            other => panic!("expected unknown joint, got {other:?}"),
        }
    }

    #[test]
    fn malformed_vector_and_out_of_range() {
        let (topo, ..) = setup();
        let bad = "[start of command] command1, selected joint head, movement [0, 0] [end of command]";
        assert!(matches!(
            parse_agent_command(&topo, bad),
            Err(CommandParseError::MalformedVector { .. })
        ));
        let huge = "[start of command] command1, selected joint head, movement [0, 1e9, 0] [end of command]";
        assert!(matches!(
            parse_agent_command(&topo, huge),
            Err(CommandParseError::OutOfRangeNumber { .. })
        ));
    }

    #[test]
    fn pelvis_commands_round_trip() {
        let (topo, ..) = setup();
        let cmd = Command::PelvisSupported {
            rotation_deg: -15.0,
            translation: Vec3::new(0.1, 0.0, 0.05),
            support: vec!["left_toes".into(), "right_toes".into()],
        };
        let text = format_command(&cmd);
        assert_eq!(parse_agent_command(&topo, &text).unwrap(), cmd);
        let free = Command::PelvisFree {
            rotation_deg: 30.0,
            translation: Vec3::new(0.0, 0.1, 0.0),
        };
        assert_eq!(
            parse_agent_command(&topo, &format_command(&free)).unwrap(),
            free
        );
    }

    #[test]
    fn pelvis_free_translates_every_joint() {
        let (topo, pose, camera, ik) = setup();
        let cmd = Command::PelvisFree {
            rotation_deg: 0.0,
            translation: Vec3::new(0.0, 0.1, 0.0),
        };
        let before = forward_kinematics(&topo, &pose).unwrap();
        let (after_pose, after_cam) = apply_command(&topo, &pose, &camera, &cmd, &ik).unwrap();
        assert_eq!(after_cam, camera);
        let after = forward_kinematics(&topo, &after_pose).unwrap();
        for (a, b) in before.iter().zip(&after) {
            assert_relative_eq!(
                b.position - a.position,
                Vec3::new(0.0, 0.1, 0.0),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn pelvis_supported_restores_support_point() {
        let (topo, pose, camera, ik) = setup();
        let toes = topo.joint_index("left_toes").unwrap();
        let before = forward_kinematics(&topo, &pose).unwrap();
        let cmd = Command::PelvisSupported {
            rotation_deg: 0.0,
            translation: Vec3::new(0.1, 0.0, 0.0),
            support: vec!["left_toes".into()],
        };
        let (after_pose, _) = apply_command(&topo, &pose, &camera, &cmd, &ik).unwrap();
        let after = forward_kinematics(&topo, &after_pose).unwrap();
        assert!(
            (after[toes].position - before[toes].position).norm() <= ik.tolerance,
            "support point moved {} m",
            (after[toes].position - before[toes].position).norm()
        );
        assert_relative_eq!(
            after[0].position - before[0].position,
            Vec3::new(0.1, 0.0, 0.0),
            epsilon = 1e-9
        );
    }

    #[test]
    fn roll_preserves_joint_and_rotates_child_about_axis() {
        let (topo, pose, camera, ik) = setup();
        let hip = topo.joint_index("right_hip").unwrap();
        let knee = topo.joint_index("right_knee").unwrap();
        let pelvis_pos = forward_kinematics(&topo, &pose).unwrap()[0].position;
        let before = forward_kinematics(&topo, &pose).unwrap();
        let cmd = Command::SingleJointRoll {
            joint: "right_hip".into(),
            degrees: 90.0,
        };
        let (after_pose, _) = apply_command(&topo, &pose, &camera, &cmd, &ik).unwrap();
        let after = forward_kinematics(&topo, &after_pose).unwrap();

        assert_relative_eq!(after[hip].position, before[hip].position, epsilon = 1e-12);

        // Oracle: rotate the knee by -90 degrees about the bone axis anchored
        // at the hip.
        let axis = (before[hip].position - pelvis_pos).normalize();
        let rot = Quat::from_axis_angle(
            &nalgebra::Unit::new_normalize(axis),
            (-90.0_f64).to_radians(),
        );
        let expected = before[hip].position + rot * (before[knee].position - before[hip].position);
        assert_relative_eq!(after[knee].position, expected, epsilon = 1e-9);

        // Distance from the knee to the bone axis is preserved.
        let dist = |p: Vec3| {
            let rel = p - before[hip].position;
            (rel - rel.dot(&axis) * axis).norm()
        };
        assert_relative_eq!(
            dist(after[knee].position),
            dist(before[knee].position),
            epsilon = 1e-9
        );
    }

    #[test]
    fn camera_rotation_is_periodic_and_leaves_pose() {
        let (topo, pose, camera, ik) = setup();
        let cmd = Command::CameraRotate { degrees: 360.0 };
        let (after_pose, after_cam) = apply_command(&topo, &pose, &camera, &cmd, &ik).unwrap();
        assert_eq!(after_pose, pose);
        assert_relative_eq!(
            after_cam.eye(Vec3::new(0.0, 0.95, 0.0)),
            camera.eye(Vec3::new(0.0, 0.95, 0.0)),
            epsilon = 1e-9
        );
        assert_relative_eq!(
            (after_cam.azimuth_deg - camera.azimuth_deg).rem_euclid(360.0),
            0.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn single_joint_move_reaches_rotation_reachable_target() {
        let (topo, pose, camera, ik) = setup();
        let hip = topo.joint_index("right_hip").unwrap();
        let knee = topo.joint_index("right_knee").unwrap();
        let fk = forward_kinematics(&topo, &pose).unwrap();
        // Targets of a single-joint move lie on the sphere around the parent,
        // so pick one by rotating the bone 25 degrees about +x.
        let rot = Quat::from_axis_angle(&nalgebra::Vector3::x_axis(), 25.0_f64.to_radians());
        let target = fk[hip].position + rot * (fk[knee].position - fk[hip].position);
        let delta = target - fk[knee].position;
        let cmd = Command::SingleJointMove {
            joint: "right_knee".into(),
            delta,
        };
        let (after_pose, _) = apply_command(&topo, &pose, &camera, &cmd, &ik).unwrap();
        let after = forward_kinematics(&topo, &after_pose).unwrap()[knee].position;
        assert!(
            (after - target).norm() < ik.tolerance,
            "residual {}",
            (after - target).norm()
        );
    }

    #[test]
    fn done_cannot_be_applied() {
        let (topo, pose, camera, ik) = setup();
        assert!(matches!(
            apply_command(&topo, &pose, &camera, &Command::Done, &ik),
            Err(CommandError::DoneNotExecutable)
        ));
    }
}
