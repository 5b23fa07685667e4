//! Skeleton definition: joint hierarchy, body-part partition, and IK chains.
//!
//! The root joint is always `pelvis`. Joints are topologically sorted
//! (parent index strictly below the joint's own index), which lets forward
//! kinematics run as a single in-order pass. Seven body parts partition the
//! joints in the fixed order pelvis, left leg, right leg, torso, head,
//! left arm, right arm; the four IK chains run shoulder-to-fingers and
//! hip-to-toes.

use std::collections::HashMap;
use std::fmt;

use crate::math::Vec3;
use thiserror::Error;

/// Capsule geometry and mass of the rigid body attached at a joint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyGeometry {
    pub radius: f64,
    pub half_length: f64,
    pub mass: f64,
}

/// One joint of the hierarchy plus its attached rigid body.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSpec {
    pub name: String,
    /// Index of the parent joint; `None` only for the pelvis root.
    pub parent: Option<usize>,
    /// Rest-pose offset from the parent joint, meters. For the root this
    /// stores the default standing height of the pelvis.
    pub local_offset: Vec3,
    pub body: BodyGeometry,
}

/// The seven body parts, in the fixed adjustment order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BodyPart {
    Pelvis,
    LeftLeg,
    RightLeg,
    Torso,
    Head,
    LeftArm,
    RightArm,
}

impl BodyPart {
    pub const ALL: [BodyPart; 7] = [
        BodyPart::Pelvis,
        BodyPart::LeftLeg,
        BodyPart::RightLeg,
        BodyPart::Torso,
        BodyPart::Head,
        BodyPart::LeftArm,
        BodyPart::RightArm,
    ];

    pub fn key(self) -> &'static str {
        match self {
            BodyPart::Pelvis => "pelvis",
            BodyPart::LeftLeg => "left_leg",
            BodyPart::RightLeg => "right_leg",
            BodyPart::Torso => "torso",
            BodyPart::Head => "head",
            BodyPart::LeftArm => "left_arm",
            BodyPart::RightArm => "right_arm",
        }
    }

    /// Human-readable name as used in prompts ("left leg", "right arm", ...).
    pub fn label(self) -> &'static str {
        match self {
            BodyPart::Pelvis => "pelvis",
            BodyPart::LeftLeg => "left leg",
            BodyPart::RightLeg => "right leg",
            BodyPart::Torso => "torso",
            BodyPart::Head => "head",
            BodyPart::LeftArm => "left arm",
            BodyPart::RightArm => "right arm",
        }
    }

    pub fn from_key(key: &str) -> Option<BodyPart> {
        BodyPart::ALL.iter().copied().find(|p| p.key() == key)
    }
}

impl fmt::Display for BodyPart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Error)]
pub enum SkeletonError {
    #[error("skeleton has no joints")]
    Empty,
    #[error("root joint must be named \"pelvis\", found {0:?}")]
    BadRoot(String),
    #[error("joint {0:?} appears more than once")]
    DuplicateJoint(String),
    #[error("joint {name:?} (index {index}) must come after its parent (index {parent})")]
    NotTopologicallySorted {
        name: String,
        index: usize,
        parent: usize,
    },
    #[error("joint {0:?} has more than one root or a missing parent")]
    BadParent(String),
    #[error("joint {name:?}: {field} must be positive, got {value}")]
    NonPositive {
        name: String,
        field: &'static str,
        value: f64,
    },
    #[error("body parts must partition the joints: joint {0:?} {1}")]
    BadPartition(String, &'static str),
    #[error("ik chain for {effector:?} invalid: {reason}")]
    BadChain { effector: String, reason: String },
    #[error("end effector set must be the four fingers/toes joints")]
    BadEndEffectors,
    #[error("unknown joint name {0:?}")]
    UnknownJoint(String),
    #[error("skeleton file parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Joint hierarchy, body-part partition, and the four fixed IK chains.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonTopology {
    joints: Vec<JointSpec>,
    children: Vec<Vec<usize>>,
    name_index: HashMap<String, usize>,
    /// Joint indices per body part, in [`BodyPart::ALL`] order.
    parts: [Vec<usize>; 7],
    /// End effector joint indices (left_fingers, right_fingers, left_toes, right_toes).
    end_effectors: Vec<usize>,
    /// Base-to-tip joint index chains, keyed by their tip end effector.
    ik_chains: HashMap<usize, Vec<usize>>,
}

impl SkeletonTopology {
    pub fn new(
        joints: Vec<JointSpec>,
        parts: [Vec<usize>; 7],
        end_effectors: Vec<usize>,
        ik_chains: HashMap<usize, Vec<usize>>,
    ) -> Result<Self, SkeletonError> {
        if joints.is_empty() {
            return Err(SkeletonError::Empty);
        }
        let mut name_index = HashMap::new();
        for (i, j) in joints.iter().enumerate() {
            if name_index.insert(j.name.clone(), i).is_some() {
                return Err(SkeletonError::DuplicateJoint(j.name.clone()));
            }
            match j.parent {
                None => {
                    if i != 0 {
                        return Err(SkeletonError::BadParent(j.name.clone()));
                    }
                    if j.name != "pelvis" {
                        return Err(SkeletonError::BadRoot(j.name.clone()));
                    }
                }
                Some(p) => {
                    if i == 0 {
                        return Err(SkeletonError::BadRoot(j.name.clone()));
                    }
                    if p >= i {
                        return Err(SkeletonError::NotTopologicallySorted {
                            name: j.name.clone(),
                            index: i,
                            parent: p,
                        });
                    }
                }
            }
            for (field, value) in [("mass", j.body.mass), ("radius", j.body.radius)] {
                if !(value > 0.0) {
                    return Err(SkeletonError::NonPositive {
                        name: j.name.clone(),
                        field,
                        value,
                    });
                }
            }
        }

        let mut seen = vec![false; joints.len()];
        for part in &parts {
            for &idx in part {
                if idx >= joints.len() {
                    return Err(SkeletonError::BadPartition(
                        format!("#{idx}"),
                        "is out of range",
                    ));
                }
                if seen[idx] {
                    return Err(SkeletonError::BadPartition(
                        joints[idx].name.clone(),
                        "is assigned to two parts",
                    ));
                }
                seen[idx] = true;
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(SkeletonError::BadPartition(
                joints[missing].name.clone(),
                "is not assigned to any part",
            ));
        }

        if end_effectors.len() != 4 {
            return Err(SkeletonError::BadEndEffectors);
        }
        for &e in &end_effectors {
            let name = &joints[e].name;
            if !name.ends_with("fingers") && !name.ends_with("toes") {
                return Err(SkeletonError::BadEndEffectors);
            }
        }

        for (&tip, chain) in &ik_chains {
            let effector = joints[tip].name.clone();
            if !end_effectors.contains(&tip) {
                return Err(SkeletonError::BadChain {
                    effector,
                    reason: "tip is not an end effector".into(),
                });
            }
            if chain.last() != Some(&tip) {
                return Err(SkeletonError::BadChain {
                    effector,
                    reason: "chain does not end at its effector".into(),
                });
            }
            let base = &joints[chain[0]].name;
            if !base.ends_with("shoulder") && !base.ends_with("hip") {
                return Err(SkeletonError::BadChain {
                    effector,
                    reason: format!("chain base {base:?} is not a shoulder or hip"),
                });
            }
            for w in chain.windows(2) {
                if joints[w[1]].parent != Some(w[0]) {
                    return Err(SkeletonError::BadChain {
                        effector,
                        reason: format!(
                            "{:?} is not the parent of {:?}",
                            joints[w[0]].name, joints[w[1]].name
                        ),
                    });
                }
            }
        }
        if ik_chains.len() != 4 {
            return Err(SkeletonError::BadChain {
                effector: "-".into(),
                reason: format!("expected 4 chains, found {}", ik_chains.len()),
            });
        }

        let mut children = vec![Vec::new(); joints.len()];
        for (i, j) in joints.iter().enumerate() {
            if let Some(p) = j.parent {
                children[p].push(i);
            }
        }

        Ok(Self {
            joints,
            children,
            name_index,
            parts,
            end_effectors,
            ik_chains,
        })
    }

    pub fn joints(&self) -> &[JointSpec] {
        &self.joints
    }

    pub fn len(&self) -> usize {
        self.joints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.joints.is_empty()
    }

    pub fn joint_index(&self, name: &str) -> Result<usize, SkeletonError> {
        self.name_index
            .get(name)
            .copied()
            .ok_or_else(|| SkeletonError::UnknownJoint(name.to_string()))
    }

    pub fn joint_name(&self, index: usize) -> &str {
        &self.joints[index].name
    }

    pub fn parent(&self, index: usize) -> Option<usize> {
        self.joints[index].parent
    }

    pub fn children(&self, index: usize) -> &[usize] {
        &self.children[index]
    }

    pub fn part_joints(&self, part: BodyPart) -> &[usize] {
        let pos = BodyPart::ALL.iter().position(|p| *p == part).unwrap();
        &self.parts[pos]
    }

    pub fn part_of(&self, joint: usize) -> BodyPart {
        for (part, members) in BodyPart::ALL.iter().zip(&self.parts) {
            if members.contains(&joint) {
                return *part;
            }
        }
        unreachable!("partition covers every joint")
    }

    pub fn end_effectors(&self) -> &[usize] {
        &self.end_effectors
    }

    pub fn is_end_effector(&self, joint: usize) -> bool {
        self.end_effectors.contains(&joint)
    }

    /// Base-to-tip chain for an end effector joint.
    pub fn ik_chain(&self, effector: usize) -> Option<&[usize]> {
        self.ik_chains.get(&effector).map(|c| c.as_slice())
    }

    /// Path root..=joint excluding the root itself, in base-to-tip order.
    pub fn path_from_root(&self, joint: usize) -> Vec<usize> {
        let mut path = Vec::new();
        let mut cur = joint;
        while let Some(p) = self.joints[cur].parent {
            path.push(cur);
            cur = p;
        }
        path.reverse();
        path
    }

    /// Direction of the bone axis at a joint in its local frame: toward the
    /// first child's rest offset, or along the joint's own rest offset for
    /// leaves. Falls back to +y for degenerate offsets.
    pub fn bone_axis_local(&self, joint: usize) -> Vec3 {
        let offset = self
            .children(joint)
            .first()
            .map(|&c| self.joints[c].local_offset)
            .unwrap_or(self.joints[joint].local_offset);
        let norm = offset.norm();
        if norm < 1e-12 {
            Vec3::y()
        } else {
            offset / norm
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.joints.iter().map(|j| j.body.mass).sum()
    }
}

/// The default 20-joint humanoid (about 1.7 m tall, 66 kg).
///
/// Rest pose: standing upright facing +z, up +y, pelvis at 0.95 m; +x is the
/// character's left. Foot bones lie flat at the capsule radius so heel and
/// toe spheres touch the ground exactly in the rest pose.
pub fn default_humanoid() -> SkeletonTopology {
    struct J(&'static str, Option<&'static str>, [f64; 3], [f64; 3]);
    // name, parent, offset, (radius, half_length, mass)
    let defs = [
        J("pelvis", None, [0.0, 0.95, 0.0], [0.12, 0.08, 10.0]),
        J("spine", Some("pelvis"), [0.0, 0.15, 0.0], [0.11, 0.075, 8.0]),
        J("chest", Some("spine"), [0.0, 0.15, 0.0], [0.11, 0.11, 8.0]),
        J("head", Some("chest"), [0.0, 0.22, 0.0], [0.09, 0.09, 5.0]),
        J("left_shoulder", Some("chest"), [0.20, 0.14, 0.0], [0.045, 0.13, 2.5]),
        J("left_elbow", Some("left_shoulder"), [0.0, -0.26, 0.0], [0.04, 0.125, 1.8]),
        J("left_wrist", Some("left_elbow"), [0.0, -0.25, 0.0], [0.04, 0.06, 1.0]),
        J("left_fingers", Some("left_wrist"), [0.0, -0.12, 0.0], [0.035, 0.04, 0.8]),
        J("right_shoulder", Some("chest"), [-0.20, 0.14, 0.0], [0.045, 0.13, 2.5]),
        J("right_elbow", Some("right_shoulder"), [0.0, -0.26, 0.0], [0.04, 0.125, 1.8]),
        J("right_wrist", Some("right_elbow"), [0.0, -0.25, 0.0], [0.04, 0.06, 1.0]),
        J("right_fingers", Some("right_wrist"), [0.0, -0.12, 0.0], [0.035, 0.04, 0.8]),
        J("left_hip", Some("pelvis"), [0.09, -0.06, 0.0], [0.07, 0.20, 5.0]),
        J("left_knee", Some("left_hip"), [0.0, -0.40, 0.0], [0.055, 0.205, 3.0]),
        J("left_ankle", Some("left_knee"), [0.0, -0.41, 0.0], [0.08, 0.07, 2.0]),
        J("left_toes", Some("left_ankle"), [0.0, 0.0, 0.14], [0.08, 0.03, 1.0]),
        J("right_hip", Some("pelvis"), [-0.09, -0.06, 0.0], [0.07, 0.20, 5.0]),
        J("right_knee", Some("right_hip"), [0.0, -0.40, 0.0], [0.055, 0.205, 3.0]),
        J("right_ankle", Some("right_knee"), [0.0, -0.41, 0.0], [0.08, 0.07, 2.0]),
        J("right_toes", Some("right_ankle"), [0.0, 0.0, 0.14], [0.08, 0.03, 1.0]),
    ];

    let names: Vec<&str> = defs.iter().map(|d| d.0).collect();
    let index = |name: &str| names.iter().position(|n| *n == name).unwrap();
    let joints = defs
        .iter()
        .map(|d| JointSpec {
            name: d.0.to_string(),
            parent: d.1.map(index),
            local_offset: Vec3::new(d.2[0], d.2[1], d.2[2]),
            body: BodyGeometry {
                radius: d.3[0],
                half_length: d.3[1],
                mass: d.3[2],
            },
        })
        .collect();

    let part = |names: &[&str]| names.iter().map(|n| index(n)).collect::<Vec<_>>();
    let parts = [
        part(&["pelvis"]),
        part(&["left_hip", "left_knee", "left_ankle", "left_toes"]),
        part(&["right_hip", "right_knee", "right_ankle", "right_toes"]),
        part(&["spine", "chest"]),
        part(&["head"]),
        part(&["left_shoulder", "left_elbow", "left_wrist", "left_fingers"]),
        part(&["right_shoulder", "right_elbow", "right_wrist", "right_fingers"]),
    ];

    let end_effectors = part(&["left_fingers", "right_fingers", "left_toes", "right_toes"]);
    let mut ik_chains = HashMap::new();
    for (base, tip) in [
        ("left_shoulder", "left_fingers"),
        ("right_shoulder", "right_fingers"),
        ("left_hip", "left_toes"),
        ("right_hip", "right_toes"),
    ] {
        let mut chain = vec![index(base)];
        while *chain.last().unwrap() != index(tip) {
            let cur = *chain.last().unwrap();
            let child = defs
                .iter()
                .position(|d| d.1 == Some(names[cur]))
                .expect("chain link");
            chain.push(child);
        }
        ik_chains.insert(index(tip), chain);
    }

    SkeletonTopology::new(joints, parts, end_effectors, ik_chains)
        .expect("default humanoid is valid")
}

// --- skeleton definition file -------------------------------------------------
//
// Line-based structured text, bit-exact on round trip (floats are printed in
// Rust's shortest round-trip form):
//
//   freemotion-skeleton v1
//   joint <name> <parent|-> <ox> <oy> <oz> <radius> <half_length> <mass>
//   part <part_key> <joint> ...
//   end_effectors <joint> ...
//   chain <effector> <joint> ...

pub fn write_skeleton(topo: &SkeletonTopology) -> String {
    let mut out = String::from("freemotion-skeleton v1\n");
    for j in topo.joints() {
        let parent = match j.parent {
            Some(p) => topo.joint_name(p),
            None => "-",
        };
        out.push_str(&format!(
            "joint {} {} {} {} {} {} {} {}\n",
            j.name,
            parent,
            j.local_offset.x,
            j.local_offset.y,
            j.local_offset.z,
            j.body.radius,
            j.body.half_length,
            j.body.mass
        ));
    }
    for part in BodyPart::ALL {
        out.push_str(&format!("part {}", part.key()));
        for &idx in topo.part_joints(part) {
            out.push(' ');
            out.push_str(topo.joint_name(idx));
        }
        out.push('\n');
    }
    out.push_str("end_effectors");
    for &e in topo.end_effectors() {
        out.push(' ');
        out.push_str(topo.joint_name(e));
    }
    out.push('\n');
    let mut effectors: Vec<usize> = topo.end_effectors().to_vec();
    effectors.sort_by(|a, b| topo.joint_name(*a).cmp(topo.joint_name(*b)));
    for e in effectors {
        let chain = topo.ik_chain(e).unwrap();
        out.push_str(&format!("chain {}", topo.joint_name(e)));
        for &idx in chain {
            out.push(' ');
            out.push_str(topo.joint_name(idx));
        }
        out.push('\n');
    }
    out
}

pub fn parse_skeleton(text: &str) -> Result<SkeletonTopology, SkeletonError> {
    let err = |line: usize, message: String| SkeletonError::Parse { line, message };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "freemotion-skeleton v1")) => {}
        other => {
            return Err(err(
                1,
                format!(
                    "expected header \"freemotion-skeleton v1\", found {:?}",
                    other.map(|(_, l)| l).unwrap_or("")
                ),
            ))
        }
    }

    let mut joints: Vec<JointSpec> = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let mut parts: [Vec<usize>; 7] = Default::default();
    let mut parts_seen = 0usize;
    let mut end_effectors = Vec::new();
    let mut ik_chains = HashMap::new();

    let lookup = |names: &[String], name: &str, line: usize| -> Result<usize, SkeletonError> {
        names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| err(line, format!("unknown joint {name:?}")))
    };

    for (i, raw) in lines {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "joint" => {
                if fields.len() != 9 {
                    return Err(err(line_no, format!("joint line needs 9 fields, found {}", fields.len())));
                }
                let parent = if fields[2] == "-" {
                    None
                } else {
                    Some(lookup(&names, fields[2], line_no)?)
                };
                let nums: Result<Vec<f64>, _> = fields[3..9].iter().map(|s| s.parse()).collect();
                let nums = nums.map_err(|e| err(line_no, format!("bad number: {e}")))?;
                names.push(fields[1].to_string());
                joints.push(JointSpec {
                    name: fields[1].to_string(),
                    parent,
                    local_offset: Vec3::new(nums[0], nums[1], nums[2]),
                    body: BodyGeometry {
                        radius: nums[3],
                        half_length: nums[4],
                        mass: nums[5],
                    },
                });
            }
            "part" => {
                if parts_seen >= 7 {
                    return Err(err(line_no, "more than 7 part lines".into()));
                }
                let expected = BodyPart::ALL[parts_seen].key();
                if fields.len() < 2 || fields[1] != expected {
                    return Err(err(line_no, format!("expected part {expected:?}")));
                }
                let mut members = Vec::new();
                for name in &fields[2..] {
                    members.push(lookup(&names, name, line_no)?);
                }
                parts[parts_seen] = members;
                parts_seen += 1;
            }
            "end_effectors" => {
                for name in &fields[1..] {
                    end_effectors.push(lookup(&names, name, line_no)?);
                }
            }
            "chain" => {
                if fields.len() < 3 {
                    return Err(err(line_no, "chain line needs an effector and joints".into()));
                }
                let tip = lookup(&names, fields[1], line_no)?;
                let mut chain = Vec::new();
                for name in &fields[2..] {
                    chain.push(lookup(&names, name, line_no)?);
                }
                ik_chains.insert(tip, chain);
            }
            other => return Err(err(line_no, format!("unknown record {other:?}"))),
        }
    }
    if parts_seen != 7 {
        return Err(err(0, format!("expected 7 part lines, found {parts_seen}")));
    }
    SkeletonTopology::new(joints, parts, end_effectors, ik_chains)
}
