//! Four five-bar loops composed into one body: head, two body sides, tail.
//!
//! Each loop solves independently in its own local frame and is then placed
//! in the world by a rigid frame (origin + rotation). Loops are coupled only
//! through their input angles: a loop's crank angle can come from one of the
//! four actuators, from a previously solved loop's passive angle plus an
//! offset, or from a constant. The reference graph must be acyclic; loops
//! are evaluated in dependency order.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::fivebar::{
    forward_pose, solve_passive, Branch, DrivenInput, FiveBarError, FiveBarGeometry,
    LoopPose, LoopSolution,
};
use crate::gait::GaitSchedule;
use crate::geom::{Angle, Vec2};
use crate::topology::MechanismGraph;

/// Which loop of the body a value refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LoopRole {
    Head,
    BodyLeft,
    BodyRight,
    Tail,
}

impl LoopRole {
    pub const ALL: [LoopRole; 4] =
        [LoopRole::Head, LoopRole::BodyLeft, LoopRole::BodyRight, LoopRole::Tail];

    pub fn as_str(self) -> &'static str {
        match self {
            LoopRole::Head => "Head",
            LoopRole::BodyLeft => "BodyLeft",
            LoopRole::BodyRight => "BodyRight",
            LoopRole::Tail => "Tail",
        }
    }
}

impl std::fmt::Display for LoopRole {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for LoopRole {
    type Err = String;
    fn from_str(s: &str) -> Result<LoopRole, String> {
        match s.to_ascii_lowercase().replace(['_', '-'], "").as_str() {
            "head" => Ok(LoopRole::Head),
            "bodyleft" => Ok(LoopRole::BodyLeft),
            "bodyright" => Ok(LoopRole::BodyRight),
            "tail" => Ok(LoopRole::Tail),
            other => Err(format!(
                "unknown loop '{other}' (expected Head, BodyLeft, BodyRight, or Tail)"
            )),
        }
    }
}

/// The two passive angles a solved loop exposes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PassiveAngle {
    Theta3,
    Theta4,
}

impl PassiveAngle {
    pub fn as_str(self) -> &'static str {
        match self {
            PassiveAngle::Theta3 => "theta3",
            PassiveAngle::Theta4 => "theta4",
        }
    }
}

/// Where a loop's driven crank angle comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AngleSource {
    /// One of the four actuators (1-based index).
    Actuator(u8),
    /// A previously solved loop's passive angle plus a rigid offset.
    Solved { loop_role: LoopRole, angle: PassiveAngle, offset: Angle },
    /// A fixed angle.
    Constant(Angle),
}

/// Sources for a loop's two driven angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopInputs {
    pub theta2: AngleSource,
    pub theta5: AngleSource,
}

impl LoopInputs {
    fn sources(&self) -> [&AngleSource; 2] {
        [&self.theta2, &self.theta5]
    }
}

/// Rigid placement of a loop's local frame in the world.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub origin: Vec2,
    pub rotation: Angle,
}

impl Frame {
    pub fn new(origin: Vec2, rotation: Angle) -> Frame {
        Frame { origin, rotation }
    }

    pub fn to_world(&self, local: Vec2) -> Vec2 {
        let (s, c) = (self.rotation.sin(), self.rotation.cos());
        Vec2::new(
            self.origin.x + c * local.x - s * local.y,
            self.origin.y + s * local.x + c * local.y,
        )
    }
}

/// The four moving links of a loop, for marker attachment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkId {
    /// First ground pivot to first crank tip.
    CrankA,
    /// First crank tip to coupler joint.
    CouplerA,
    /// Second crank tip to coupler joint.
    CouplerB,
    /// Second ground pivot to second crank tip.
    CrankB,
}

impl LinkId {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkId::CrankA => "crank_a",
            LinkId::CouplerA => "coupler_a",
            LinkId::CouplerB => "coupler_b",
            LinkId::CrankB => "crank_b",
        }
    }
}

impl std::str::FromStr for LinkId {
    type Err = String;
    fn from_str(s: &str) -> Result<LinkId, String> {
        match s {
            "crank_a" => Ok(LinkId::CrankA),
            "coupler_a" => Ok(LinkId::CouplerA),
            "coupler_b" => Ok(LinkId::CouplerB),
            "crank_b" => Ok(LinkId::CrankB),
            other => Err(format!(
                "unknown link '{other}' (expected crank_a, coupler_a, coupler_b, or crank_b)"
            )),
        }
    }
}

/// Named joints of a loop pose, for shared-joint declarations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointId {
    G1,
    G2,
    P2,
    P5,
    PCouple,
}

impl JointId {
    pub fn as_str(self) -> &'static str {
        match self {
            JointId::G1 => "g1",
            JointId::G2 => "g2",
            JointId::P2 => "p2",
            JointId::P5 => "p5",
            JointId::PCouple => "p_couple",
        }
    }

    pub fn of(self, pose: &LoopPose) -> Vec2 {
        match self {
            JointId::G1 => pose.g1,
            JointId::G2 => pose.g2,
            JointId::P2 => pose.p2,
            JointId::P5 => pose.p5,
            JointId::PCouple => pose.p_couple,
        }
    }
}

impl std::str::FromStr for JointId {
    type Err = String;
    fn from_str(s: &str) -> Result<JointId, String> {
        match s {
            "g1" => Ok(JointId::G1),
            "g2" => Ok(JointId::G2),
            "p2" => Ok(JointId::P2),
            "p5" => Ok(JointId::P5),
            "p_couple" => Ok(JointId::PCouple),
            other => Err(format!("unknown joint '{other}'")),
        }
    }
}

/// A tracked point riding on one link of one loop.
///
/// `fraction` interpolates from the link's start to its end; `perp_offset`
/// displaces the point perpendicular to the link, positive to the left of
/// the link direction.
#[derive(Debug, Clone, PartialEq)]
pub struct Marker {
    pub name: String,
    pub loop_role: LoopRole,
    pub link: LinkId,
    pub fraction: f64,
    pub perp_offset: f64,
}

/// Declaration that two loops' joints are physically the same pivot.
#[derive(Debug, Clone, PartialEq)]
pub struct SharedJoint {
    pub name: String,
    pub a: (LoopRole, JointId),
    pub b: (LoopRole, JointId),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssemblyError {
    #[error("assembly is missing loop {0}")]
    MissingLoop(LoopRole),
    #[error("actuator index {0} is out of range 1..=4")]
    ActuatorIndex(u8),
    #[error("actuator {0} is never referenced by any loop input")]
    UnusedActuator(u8),
    #[error("loop input references form a cycle involving {0}")]
    CyclicInputs(LoopRole),
    #[error("marker '{name}' has fraction {fraction} outside [0, 1]")]
    MarkerFraction { name: String, fraction: f64 },
    #[error("marker '{name}' has non-finite perpendicular offset")]
    MarkerOffset { name: String },
    #[error("duplicate marker name '{0}'")]
    DuplicateMarker(String),
    #[error("loop {role}: {source}")]
    Solve { role: LoopRole, source: FiveBarError },
}

impl AssemblyError {
    /// True when the failure is a pose that does not exist (rather than a
    /// malformed assembly).
    pub fn is_unreachable(&self) -> bool {
        matches!(
            self,
            AssemblyError::Solve { source: FiveBarError::Unreachable { .. }, .. }
        )
    }
}

/// Everything needed to build a [`LizardAssembly`].
#[derive(Debug, Clone, PartialEq)]
pub struct AssemblyDefinition {
    pub loops: BTreeMap<LoopRole, FiveBarGeometry>,
    pub frames: BTreeMap<LoopRole, Frame>,
    pub inputs: BTreeMap<LoopRole, LoopInputs>,
    pub branches: BTreeMap<LoopRole, Branch>,
    pub neutral_actuators: [Angle; 4],
    pub markers: Vec<Marker>,
    pub shared_joints: Vec<SharedJoint>,
    pub mechanism_graph: Option<MechanismGraph>,
    pub schedule: Option<GaitSchedule>,
}

/// A validated four-loop assembly.
#[derive(Debug, Clone, PartialEq)]
pub struct LizardAssembly {
    def: AssemblyDefinition,
    eval_order: Vec<LoopRole>,
}

impl LizardAssembly {
    pub fn new(def: AssemblyDefinition) -> Result<LizardAssembly, AssemblyError> {
        for role in LoopRole::ALL {
            if !def.loops.contains_key(&role)
                || !def.frames.contains_key(&role)
                || !def.inputs.contains_key(&role)
                || !def.branches.contains_key(&role)
            {
                return Err(AssemblyError::MissingLoop(role));
            }
        }

        let mut referenced = [false; 4];
        for inputs in def.inputs.values() {
            for source in inputs.sources() {
                if let AngleSource::Actuator(i) = source {
                    if !(1..=4).contains(i) {
                        return Err(AssemblyError::ActuatorIndex(*i));
                    }
                    referenced[(*i - 1) as usize] = true;
                }
            }
        }
        if let Some(idx) = referenced.iter().position(|r| !r) {
            return Err(AssemblyError::UnusedActuator(idx as u8 + 1));
        }

        let mut names = BTreeSet::new();
        for marker in &def.markers {
            if !marker.fraction.is_finite() || !(0.0..=1.0).contains(&marker.fraction) {
                return Err(AssemblyError::MarkerFraction {
                    name: marker.name.clone(),
                    fraction: marker.fraction,
                });
            }
            if !marker.perp_offset.is_finite() {
                return Err(AssemblyError::MarkerOffset { name: marker.name.clone() });
            }
            if !names.insert(marker.name.as_str()) {
                return Err(AssemblyError::DuplicateMarker(marker.name.clone()));
            }
        }

        let eval_order = evaluation_order(&def.inputs)?;
        Ok(LizardAssembly { def, eval_order })
    }

    pub fn geometry(&self, role: LoopRole) -> &FiveBarGeometry {
        &self.def.loops[&role]
    }

    pub fn frame(&self, role: LoopRole) -> &Frame {
        &self.def.frames[&role]
    }

    pub fn inputs(&self, role: LoopRole) -> &LoopInputs {
        &self.def.inputs[&role]
    }

    pub fn branch(&self, role: LoopRole) -> Branch {
        self.def.branches[&role]
    }

    pub fn neutral_actuators(&self) -> [Angle; 4] {
        self.def.neutral_actuators
    }

    pub fn markers(&self) -> &[Marker] {
        &self.def.markers
    }

    pub fn shared_joints(&self) -> &[SharedJoint] {
        &self.def.shared_joints
    }

    pub fn mechanism_graph(&self) -> Option<&MechanismGraph> {
        self.def.mechanism_graph.as_ref()
    }

    pub fn schedule(&self) -> Option<&GaitSchedule> {
        self.def.schedule.as_ref()
    }

    /// Loop roles in dependency order (referenced loops first).
    pub fn evaluation_order(&self) -> &[LoopRole] {
        &self.eval_order
    }
}

/// Dependency-orders the loops; errors if the references cycle.
fn evaluation_order(
    inputs: &BTreeMap<LoopRole, LoopInputs>,
) -> Result<Vec<LoopRole>, AssemblyError> {
    let mut order = Vec::with_capacity(4);
    let mut placed = BTreeSet::new();
    while order.len() < 4 {
        let mut progressed = false;
        for role in LoopRole::ALL {
            if placed.contains(&role) {
                continue;
            }
            let ready = inputs[&role].sources().iter().all(|source| match source {
                AngleSource::Solved { loop_role, .. } => placed.contains(loop_role),
                _ => true,
            });
            if ready {
                order.push(role);
                placed.insert(role);
                progressed = true;
            }
        }
        if !progressed {
            let stuck = LoopRole::ALL.into_iter().find(|r| !placed.contains(r)).unwrap();
            return Err(AssemblyError::CyclicInputs(stuck));
        }
    }
    Ok(order)
}

/// A fully solved assembly at one set of actuator angles. All poses and
/// marker points are in world coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyPose {
    pub actuator_angles: [Angle; 4],
    pub solutions: BTreeMap<LoopRole, LoopSolution>,
    pub poses: BTreeMap<LoopRole, LoopPose>,
    pub marker_points: BTreeMap<String, Vec2>,
}

fn resolve_source(
    source: &AngleSource,
    actuators: &[Angle; 4],
    solved: &BTreeMap<LoopRole, LoopSolution>,
) -> Angle {
    match source {
        AngleSource::Actuator(i) => actuators[(*i - 1) as usize],
        AngleSource::Constant(angle) => *angle,
        AngleSource::Solved { loop_role, angle, offset } => {
            let solution = &solved[loop_role];
            let base = match angle {
                PassiveAngle::Theta3 => solution.theta3,
                PassiveAngle::Theta4 => solution.theta4,
            };
            Angle::wrap(base.radians() + offset.radians())
        }
    }
}

pub(crate) fn link_endpoints(pose: &LoopPose, link: LinkId) -> (Vec2, Vec2) {
    match link {
        LinkId::CrankA => (pose.g1, pose.p2),
        LinkId::CouplerA => (pose.p2, pose.p_couple),
        LinkId::CouplerB => (pose.p5, pose.p_couple),
        LinkId::CrankB => (pose.g2, pose.p5),
    }
}

fn marker_point(marker: &Marker, pose: &LoopPose) -> Vec2 {
    let (start, end) = link_endpoints(pose, marker.link);
    let dir = end - start;
    let unit = dir * (1.0 / dir.norm());
    start + dir * marker.fraction + unit.perp() * marker.perp_offset
}

/// Solves every loop at the given actuator angles and assembles the world
/// pose. Deterministic: identical inputs produce bit-identical poses.
pub fn solve_assembly(
    asm: &LizardAssembly,
    actuators: [Angle; 4],
) -> Result<BodyPose, AssemblyError> {
    let mut solutions: BTreeMap<LoopRole, LoopSolution> = BTreeMap::new();
    let mut poses: BTreeMap<LoopRole, LoopPose> = BTreeMap::new();

    for &role in &asm.eval_order {
        let inputs = asm.inputs(role);
        let input = DrivenInput::new(
            resolve_source(&inputs.theta2, &actuators, &solutions),
            resolve_source(&inputs.theta5, &actuators, &solutions),
        );
        let geom = asm.geometry(role);
        let solution = solve_passive(geom, input, asm.branch(role))
            .map_err(|source| AssemblyError::Solve { role, source })?;
        let local = forward_pose(geom, input, &solution);
        let frame = asm.frame(role);
        poses.insert(
            role,
            LoopPose {
                g1: frame.to_world(local.g1),
                g2: frame.to_world(local.g2),
                p2: frame.to_world(local.p2),
                p5: frame.to_world(local.p5),
                p_couple: frame.to_world(local.p_couple),
            },
        );
        solutions.insert(role, solution);
    }

    let marker_points = asm
        .def
        .markers
        .iter()
        .map(|m| (m.name.clone(), marker_point(m, &poses[&m.loop_role])))
        .collect();

    Ok(BodyPose { actuator_angles: actuators, solutions, poses, marker_points })
}

/// Distance between the two world positions of each declared shared joint.
pub fn shared_joint_deviations(asm: &LizardAssembly, pose: &BodyPose) -> Vec<(String, f64)> {
    asm.def
        .shared_joints
        .iter()
        .map(|sj| {
            let pa = sj.a.1.of(&pose.poses[&sj.a.0]);
            let pb = sj.b.1.of(&pose.poses[&sj.b.0]);
            (sj.name.clone(), pa.distance(pb))
        })
        .collect()
}

/// The bundled reference assembly: head and tail five-bars on a rigid trunk,
/// closed by left and right body loops whose cranks follow the head/tail
/// passive angles. Ships as `configs/lizard_default.json`.
pub fn default_lizard() -> LizardAssembly {
    crate::config::load_assembly_str(DEFAULT_LIZARD_JSON)
        .expect("bundled default assembly must be valid")
}

/// JSON source of the bundled default assembly.
pub const DEFAULT_LIZARD_JSON: &str = include_str!("../../../configs/lizard_default.json");
