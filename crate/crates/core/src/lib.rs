//! Kinematics of a four-loop planar five-bar robot body.
//!
//! The crate solves a single five-bar loop exactly (both assembly
//! branches), composes four such loops into one articulated body, checks
//! mechanism mobility and driving-pair choices, maps reachable workspaces
//! onto grids with CSV/SVG export, and plays back periodic actuator
//! schedules into full-body trajectories with stride metrics.
//!
//! Entry points:
//! - [`fivebar::solve_passive`] / [`fivebar::solve_both_branches`] for one loop
//! - [`assembly::solve_assembly`] and [`assembly::default_lizard`] for the body
//! - [`topology::validate_driving_pairs`] for mobility checks
//! - [`workspace::sweep`] with [`workspace::export_csv`] / [`workspace::export_svg`]
//! - [`gait::rollout`] with [`gait::stride_metrics`] / [`gait::export_trajectory_jsonl`]
//! - [`config::load_assembly_path`] to read everything from JSON

pub mod assembly;
pub mod config;
pub mod fivebar;
pub mod gait;
pub mod geom;
pub mod topology;
pub mod workspace;

pub use assembly::{
    default_lizard, solve_assembly, AssemblyDefinition, AssemblyError, BodyPose, LizardAssembly,
    LoopRole,
};
pub use fivebar::{
    solve_both_branches, solve_passive, Branch, DrivenInput, FiveBarError, FiveBarGeometry,
    LoopPose, LoopSolution,
};
pub use gait::{rollout, rollout_sequential, GaitError, GaitSchedule, StrideMetrics, Trajectory};
pub use geom::{Angle, GeomError, Vec2};
pub use topology::{mobility, validate_driving_pairs, MechanismGraph, ValidationReport};
pub use workspace::{sweep, sweep_sequential, SvgMode, SweepRange, SweepSpec, WorkspaceGrid};
