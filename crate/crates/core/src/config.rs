//! JSON configuration loading.
//!
//! A config file describes a whole assembly: loop geometries, world frames,
//! input wiring, branch choices, neutral actuator angles, markers, shared
//! joints, and optionally a mechanism graph and a gait schedule. Angles are
//! written in degrees; lengths are unitless. See `configs/` for examples.

use std::collections::BTreeMap;
use std::io;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::assembly::{
    AngleSource, AssemblyDefinition, AssemblyError, Frame, LinkId, LizardAssembly, LoopInputs,
    LoopRole, Marker, PassiveAngle, SharedJoint,
};
use crate::fivebar::{Branch, FiveBarError, FiveBarGeometry};
use crate::gait::{GaitError, GaitSchedule, WaveShape, Waveform};
use crate::geom::{Angle, GeomError, Vec2};
use crate::topology::{Joint, LoopSpec, MechanismGraph, TopologyError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{context}: {message}")]
    Invalid { context: String, message: String },
    #[error("invalid angle: {0}")]
    Geom(#[from] GeomError),
    #[error("invalid loop geometry: {0}")]
    Geometry(#[from] FiveBarError),
    #[error("invalid assembly: {0}")]
    Assembly(#[from] AssemblyError),
    #[error("invalid mechanism graph: {0}")]
    Topology(#[from] TopologyError),
    #[error("invalid schedule: {0}")]
    Schedule(#[from] GaitError),
}

fn invalid(context: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { context: context.into(), message: message.into() }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    loops: BTreeMap<String, RawLoop>,
    frames: BTreeMap<String, RawFrame>,
    inputs: BTreeMap<String, RawInputs>,
    branches: BTreeMap<String, String>,
    neutral_actuators_deg: [f64; 4],
    #[serde(default)]
    markers: Vec<RawMarker>,
    #[serde(default)]
    shared_joints: Vec<RawSharedJoint>,
    #[serde(default)]
    mechanism_graph: Option<RawGraph>,
    #[serde(default)]
    schedule: Option<RawSchedule>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLoop {
    l1: f64,
    l2: f64,
    l3: f64,
    l4: f64,
    l5: f64,
    theta1_deg: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFrame {
    origin: [f64; 2],
    #[serde(default)]
    rotation_deg: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInputs {
    theta2: RawSource,
    theta5: RawSource,
}

/// Exactly one of the three fields must be present.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSource {
    #[serde(default)]
    actuator: Option<u8>,
    #[serde(default)]
    solved: Option<RawSolved>,
    #[serde(default)]
    constant_deg: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolved {
    #[serde(rename = "loop")]
    loop_role: String,
    angle: String,
    #[serde(default)]
    offset_deg: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMarker {
    name: String,
    #[serde(rename = "loop")]
    loop_role: String,
    link: String,
    fraction: f64,
    #[serde(default)]
    perp_offset: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSharedJoint {
    name: String,
    a: [String; 2],
    b: [String; 2],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraph {
    links: usize,
    joints: Vec<RawJoint>,
    loops: Vec<RawLoopSpec>,
    #[serde(default)]
    poc_dimension: Option<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawJoint {
    id: String,
    #[serde(default = "default_dof")]
    dof: u32,
    #[serde(default)]
    driving: bool,
}

fn default_dof() -> u32 {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLoopSpec {
    joints: Vec<String>,
    #[serde(default = "default_xi")]
    xi: u32,
}

fn default_xi() -> u32 {
    3
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchedule {
    period_s: f64,
    sample_rate_hz: f64,
    actuators: [RawWaveform; 4],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWaveform {
    center_deg: f64,
    amplitude_deg: f64,
    #[serde(default)]
    phase: f64,
    #[serde(default)]
    shape: RawShape,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawShape {
    Sine,
    Trapezoid { rise_fraction: f64 },
}

impl Default for RawShape {
    fn default() -> RawShape {
        RawShape::Sine
    }
}

fn parse_role(s: &str, context: &str) -> Result<LoopRole, ConfigError> {
    s.parse().map_err(|message: String| invalid(context, message))
}

fn parse_branch(s: &str, context: &str) -> Result<Branch, ConfigError> {
    s.parse().map_err(|message: String| invalid(context, message))
}

fn parse_link(s: &str, context: &str) -> Result<LinkId, ConfigError> {
    s.parse().map_err(|message: String| invalid(context, message))
}

fn parse_passive(s: &str, context: &str) -> Result<PassiveAngle, ConfigError> {
    match s {
        "theta3" => Ok(PassiveAngle::Theta3),
        "theta4" => Ok(PassiveAngle::Theta4),
        other => Err(invalid(context, format!("unknown passive angle '{other}' (expected theta3 or theta4)"))),
    }
}

fn angle_deg(value: f64) -> Result<Angle, ConfigError> {
    Ok(Angle::from_degrees(value)?)
}

fn convert_source(raw: &RawSource, context: &str) -> Result<AngleSource, ConfigError> {
    match (&raw.actuator, &raw.solved, &raw.constant_deg) {
        (Some(i), None, None) => Ok(AngleSource::Actuator(*i)),
        (None, Some(s), None) => Ok(AngleSource::Solved {
            loop_role: parse_role(&s.loop_role, context)?,
            angle: parse_passive(&s.angle, context)?,
            offset: angle_deg(s.offset_deg)?,
        }),
        (None, None, Some(deg)) => Ok(AngleSource::Constant(angle_deg(*deg)?)),
        _ => Err(invalid(
            context,
            "exactly one of 'actuator', 'solved', or 'constant_deg' must be given",
        )),
    }
}

fn convert_graph(raw: &RawGraph) -> Result<MechanismGraph, ConfigError> {
    let joints = raw
        .joints
        .iter()
        .map(|j| Joint { id: j.id.clone(), dof: j.dof, driving: j.driving })
        .collect();
    let loops = raw
        .loops
        .iter()
        .map(|l| LoopSpec { joint_ids: l.joints.clone(), xi: l.xi })
        .collect();
    let graph = MechanismGraph::new(raw.links, joints, loops)?;
    Ok(match raw.poc_dimension {
        Some(dim) => graph.with_poc_dimension(dim),
        None => graph,
    })
}

fn convert_schedule(raw: &RawSchedule) -> Result<GaitSchedule, ConfigError> {
    let mut actuators = Vec::with_capacity(4);
    for wf in &raw.actuators {
        actuators.push(Waveform {
            center: angle_deg(wf.center_deg)?,
            amplitude: wf.amplitude_deg.to_radians(),
            phase: wf.phase,
            shape: match wf.shape {
                RawShape::Sine => WaveShape::Sine,
                RawShape::Trapezoid { rise_fraction } => WaveShape::Trapezoid { rise_fraction },
            },
        });
    }
    let actuators: [Waveform; 4] = actuators.try_into().expect("length checked by serde");
    Ok(GaitSchedule::new(raw.period_s, raw.sample_rate_hz, actuators)?)
}

fn convert_config(raw: &RawConfig) -> Result<AssemblyDefinition, ConfigError> {
    let mut loops = BTreeMap::new();
    for (name, l) in &raw.loops {
        let role = parse_role(name, "loops")?;
        let geom = FiveBarGeometry::new(l.l1, l.l2, l.l3, l.l4, l.l5, angle_deg(l.theta1_deg)?)?;
        loops.insert(role, geom);
    }

    let mut frames = BTreeMap::new();
    for (name, f) in &raw.frames {
        let role = parse_role(name, "frames")?;
        frames.insert(
            role,
            Frame::new(Vec2::new(f.origin[0], f.origin[1]), angle_deg(f.rotation_deg)?),
        );
    }

    let mut inputs = BTreeMap::new();
    for (name, i) in &raw.inputs {
        let role = parse_role(name, "inputs")?;
        let context = format!("inputs.{name}");
        inputs.insert(
            role,
            LoopInputs {
                theta2: convert_source(&i.theta2, &context)?,
                theta5: convert_source(&i.theta5, &context)?,
            },
        );
    }

    let mut branches = BTreeMap::new();
    for (name, b) in &raw.branches {
        let role = parse_role(name, "branches")?;
        branches.insert(role, parse_branch(b, "branches")?);
    }

    let mut neutral = [Angle::ZERO; 4];
    for (slot, deg) in neutral.iter_mut().zip(raw.neutral_actuators_deg) {
        *slot = angle_deg(deg)?;
    }

    let markers = raw
        .markers
        .iter()
        .map(|m| {
            Ok(Marker {
                name: m.name.clone(),
                loop_role: parse_role(&m.loop_role, "markers")?,
                link: parse_link(&m.link, "markers")?,
                fraction: m.fraction,
                perp_offset: m.perp_offset,
            })
        })
        .collect::<Result<Vec<_>, ConfigError>>()?;

    let shared_joints = raw
        .shared_joints
        .iter()
        .map(|sj| {
            let context = format!("shared_joints.{}", sj.name);
            let parse_end = |end: &[String; 2]| -> Result<(LoopRole, _), ConfigError> {
                let role = parse_role(&end[0], &context)?;
                let joint =
                    end[1].parse().map_err(|message: String| invalid(&context, message))?;
                Ok((role, joint))
            };
            Ok(SharedJoint { name: sj.name.clone(), a: parse_end(&sj.a)?, b: parse_end(&sj.b)? })
        })
        .collect::<Result<Vec<_>, ConfigError>>()?;

    Ok(AssemblyDefinition {
        loops,
        frames,
        inputs,
        branches,
        neutral_actuators: neutral,
        markers,
        shared_joints,
        mechanism_graph: raw.mechanism_graph.as_ref().map(convert_graph).transpose()?,
        schedule: raw.schedule.as_ref().map(convert_schedule).transpose()?,
    })
}

/// Parses a full assembly config from JSON text.
pub fn load_assembly_str(json: &str) -> Result<LizardAssembly, ConfigError> {
    let raw: RawConfig = serde_json::from_str(json)?;
    Ok(LizardAssembly::new(convert_config(&raw)?)?)
}

/// Reads and parses a full assembly config.
pub fn load_assembly_path(path: impl AsRef<Path>) -> Result<LizardAssembly, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    load_assembly_str(&text)
}

/// Parses a standalone gait schedule object from JSON text.
pub fn load_schedule_str(json: &str) -> Result<GaitSchedule, ConfigError> {
    let raw: RawSchedule = serde_json::from_str(json)?;
    convert_schedule(&raw)
}

/// Reads and parses a standalone gait schedule.
pub fn load_schedule_path(path: impl AsRef<Path>) -> Result<GaitSchedule, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    load_schedule_str(&text)
}

/// Parses a mechanism graph from JSON text. Accepts either a bare graph
/// object or any object with a `mechanism_graph` field (such as a full
/// assembly config).
pub fn load_graph_str(json: &str) -> Result<MechanismGraph, ConfigError> {
    let value: serde_json::Value = serde_json::from_str(json)?;
    let graph_value = match value.get("mechanism_graph") {
        Some(inner) => inner.clone(),
        None => value,
    };
    let raw: RawGraph = serde_json::from_value(graph_value)?;
    convert_graph(&raw)
}

/// Reads and parses a mechanism graph (bare or embedded in a config).
pub fn load_graph_path(path: impl AsRef<Path>) -> Result<MechanismGraph, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    load_graph_str(&text)
}
