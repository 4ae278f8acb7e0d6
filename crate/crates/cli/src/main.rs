//! `lizard`: command-line front end for the lizard-kinematics library.
//!
//! Exit codes: 0 success, 1 bad usage or config, 2 kinematically infeasible
//! request, 3 I/O failure.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lizard_kinematics::assembly::{default_lizard, LoopRole};
use lizard_kinematics::config::{self, ConfigError};
use lizard_kinematics::fivebar::{
    solve_both_branches, solve_passive, Branch, DrivenInput, FiveBarError,
};
use lizard_kinematics::gait::{
    export_trajectory_jsonl, rollout, rollout_sequential, stride_metrics, GaitError,
};
use lizard_kinematics::geom::Angle;
use lizard_kinematics::topology::validate_driving_pairs;
use lizard_kinematics::workspace::{
    export_csv, export_svg, sweep, sweep_sequential, SvgMode, SweepRange, SweepSpec,
    WorkspaceError,
};
use lizard_kinematics::{solve_assembly, LizardAssembly};

#[derive(Parser)]
#[command(
    name = "lizard",
    version,
    about = "Exact kinematics for a four-loop five-bar robot body",
    arg_required_else_help = true
)]
struct Cli {
    /// Assembly config JSON; defaults to the bundled reference lizard.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one loop's passive angles for given crank angles.
    Solve {
        /// First crank angle in degrees.
        #[arg(long, allow_negative_numbers = true)]
        theta2: f64,
        /// Second crank angle in degrees.
        #[arg(long, allow_negative_numbers = true)]
        theta5: f64,
        /// Which loop of the assembly to solve.
        #[arg(long = "loop", default_value = "Head", value_name = "LOOP")]
        loop_role: String,
        /// Assembly branch; defaults to the loop's configured branch.
        #[arg(long)]
        branch: Option<String>,
        /// Report every real branch instead of one.
        #[arg(long)]
        both: bool,
        /// Emit JSON instead of key=value lines.
        #[arg(long)]
        json: bool,
    },
    /// Mobility and driving-pair report for a mechanism graph.
    Dof,
    /// Sweep one loop's reachable workspace onto a grid.
    Workspace {
        /// Output file; format chosen by extension (.csv or .svg).
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        /// SVG rendering mode.
        #[arg(long, value_enum, default_value_t = Mode::Points)]
        mode: Mode,
        /// Which loop of the assembly to sweep.
        #[arg(long = "loop", default_value = "Head", value_name = "LOOP")]
        loop_role: String,
        /// Assembly branch; defaults to the loop's configured branch.
        #[arg(long)]
        branch: Option<String>,
        #[arg(long, default_value_t = 45.0, allow_negative_numbers = true)]
        theta2_start: f64,
        #[arg(long, default_value_t = 160.0, allow_negative_numbers = true)]
        theta2_end: f64,
        #[arg(long, default_value_t = 1.0)]
        theta2_step: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        theta5_start: f64,
        #[arg(long, default_value_t = 135.0, allow_negative_numbers = true)]
        theta5_end: f64,
        #[arg(long, default_value_t = 1.0)]
        theta5_step: f64,
        /// Sweep on one thread instead of in parallel.
        #[arg(long)]
        sequential: bool,
    },
    /// Roll a gait schedule out into a full-body trajectory.
    Gait {
        /// Standalone schedule JSON; defaults to the config's schedule.
        #[arg(long, value_name = "PATH")]
        schedule: Option<PathBuf>,
        /// Rollout length in seconds; defaults to ten periods.
        #[arg(long)]
        duration: Option<f64>,
        /// Write the trajectory as JSON lines.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        /// Report stride metrics for this marker.
        #[arg(long, value_name = "MARKER")]
        metrics: Option<String>,
        /// Ground-contact height for stride metrics; defaults to the
        /// marker's mid-range height over the rollout.
        #[arg(long, allow_negative_numbers = true)]
        contact_y: Option<f64>,
        /// Roll out on one thread instead of in parallel.
        #[arg(long)]
        sequential: bool,
    },
    /// Check a config end to end: parse, solve the neutral pose, verify
    /// shared joints, and report mobility.
    Validate,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    /// One dot per reachable coupler-joint position.
    Points,
    /// Every reachable pose drawn as its links.
    Overlay,
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> CliError {
        CliError { code: 1, message: message.into() }
    }

    fn infeasible(message: impl Into<String>) -> CliError {
        CliError { code: 2, message: message.into() }
    }

    fn io(message: impl Into<String>) -> CliError {
        CliError { code: 3, message: message.into() }
    }
}

impl From<ConfigError> for CliError {
    fn from(err: ConfigError) -> CliError {
        match err {
            ConfigError::Io { .. } => CliError::io(err.to_string()),
            other => CliError::usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> CliError {
        CliError::io(err.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}

fn load_assembly(path: &Option<PathBuf>) -> Result<LizardAssembly, CliError> {
    match path {
        Some(p) => Ok(config::load_assembly_path(p)?),
        None => Ok(default_lizard()),
    }
}

fn parse_role(name: &str) -> Result<LoopRole, CliError> {
    name.parse().map_err(CliError::usage)
}

fn parse_branch(asm: &LizardAssembly, role: LoopRole, branch: &Option<String>) -> Result<Branch, CliError> {
    match branch {
        Some(name) => name.parse().map_err(CliError::usage),
        None => Ok(asm.branch(role)),
    }
}

fn angle_arg(value: f64, name: &str) -> Result<Angle, CliError> {
    Angle::from_degrees(value).map_err(|e| CliError::usage(format!("--{name}: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve { theta2, theta5, loop_role, branch, both, json } => {
            let asm = load_assembly(&cli.config)?;
            let role = parse_role(&loop_role)?;
            let geom = asm.geometry(role);
            let input =
                DrivenInput::new(angle_arg(theta2, "theta2")?, angle_arg(theta5, "theta5")?);
            if both {
                let solutions = solve_both_branches(geom, input)
                    .map_err(|e| CliError::infeasible(e.to_string()))?;
                if solutions.is_empty() {
                    return Err(CliError::infeasible(format!(
                        "loop {role} cannot assemble at theta2={theta2}°, theta5={theta5}°"
                    )));
                }
                if json {
                    let entries: Vec<_> = solutions
                        .iter()
                        .map(|s| {
                            serde_json::json!({
                                "branch": s.branch.as_str(),
                                "theta3_deg": s.theta3.degrees(),
                                "theta4_deg": s.theta4.degrees(),
                                "residual": s.residual,
                            })
                        })
                        .collect();
                    println!("{}", serde_json::Value::Array(entries));
                } else {
                    for s in &solutions {
                        println!(
                            "branch={} theta3={:.6} theta4={:.6} residual={:.3e}",
                            s.branch.as_str(),
                            s.theta3.degrees(),
                            s.theta4.degrees(),
                            s.residual
                        );
                    }
                }
                return Ok(());
            }
            let branch = parse_branch(&asm, role, &branch)?;
            let solution = match solve_passive(geom, input, branch) {
                Ok(s) => s,
                Err(err @ FiveBarError::Unreachable { .. }) => {
                    return Err(CliError::infeasible(format!("loop {role}: {err}")))
                }
                Err(err) => return Err(CliError::infeasible(format!("loop {role}: {err}"))),
            };
            let pose = lizard_kinematics::fivebar::forward_pose(geom, input, &solution);
            if json {
                let value = serde_json::json!({
                    "branch": solution.branch.as_str(),
                    "theta3_deg": solution.theta3.degrees(),
                    "theta4_deg": solution.theta4.degrees(),
                    "residual": solution.residual,
                    "joints": {
                        "g1": [pose.g1.x, pose.g1.y],
                        "g2": [pose.g2.x, pose.g2.y],
                        "p2": [pose.p2.x, pose.p2.y],
                        "p5": [pose.p5.x, pose.p5.y],
                        "p_couple": [pose.p_couple.x, pose.p_couple.y],
                    },
                });
                println!("{value}");
            } else {
                println!("branch={}", solution.branch.as_str());
                println!("theta3={:.6}", solution.theta3.degrees());
                println!("theta4={:.6}", solution.theta4.degrees());
                println!("residual={:.3e}", solution.residual);
                for (name, p) in [
                    ("g1", pose.g1),
                    ("g2", pose.g2),
                    ("p2", pose.p2),
                    ("p5", pose.p5),
                    ("p_couple", pose.p_couple),
                ] {
                    println!("{name}={:.6},{:.6}", p.x, p.y);
                }
            }
            Ok(())
        }

        Command::Dof => {
            let graph = match &cli.config {
                Some(path) => config::load_graph_path(path)?,
                None => default_lizard()
                    .mechanism_graph()
                    .cloned()
                    .expect("bundled config has a graph"),
            };
            let report = validate_driving_pairs(&graph);
            println!("{}", report.summary_line());
            println!("drivers={}", report.driving.join(","));
            if let Some(dim) = report.poc_dimension {
                println!("poc_dimension={dim}");
            }
            for reason in &report.reasons {
                println!("reason: {reason}");
            }
            Ok(())
        }

        Command::Workspace {
            out,
            mode,
            loop_role,
            branch,
            theta2_start,
            theta2_end,
            theta2_step,
            theta5_start,
            theta5_end,
            theta5_step,
            sequential,
        } => {
            let asm = load_assembly(&cli.config)?;
            let role = parse_role(&loop_role)?;
            let spec = SweepSpec {
                theta2: SweepRange::new(theta2_start, theta2_end, theta2_step),
                theta5: SweepRange::new(theta5_start, theta5_end, theta5_step),
                branch: parse_branch(&asm, role, &branch)?,
            };
            let geom = asm.geometry(role);
            let grid = if sequential { sweep_sequential(geom, &spec) } else { sweep(geom, &spec) }
                .map_err(workspace_error)?;
            println!("samples={} reachable={}", grid.len(), grid.reachable_count());
            if let Some(path) = out {
                let mut writer = BufWriter::new(File::create(&path)?);
                match path.extension().and_then(|e| e.to_str()) {
                    Some("csv") => export_csv(&grid, &mut writer)?,
                    Some("svg") => {
                        let svg_mode = match mode {
                            Mode::Points => SvgMode::PointCloud,
                            Mode::Overlay => SvgMode::LinkageOverlay,
                        };
                        export_svg(&grid, svg_mode, &mut writer).map_err(workspace_error)?;
                    }
                    _ => {
                        return Err(CliError::usage(format!(
                            "--out {}: unsupported extension (expected .csv or .svg)",
                            path.display()
                        )))
                    }
                }
                writer.flush()?;
                println!("wrote {}", path.display());
            }
            Ok(())
        }

        Command::Gait { schedule, duration, out, metrics, contact_y, sequential } => {
            let asm = load_assembly(&cli.config)?;
            let schedule = match &schedule {
                Some(path) => config::load_schedule_path(path)?,
                None => *asm.schedule().ok_or_else(|| {
                    CliError::usage(
                        "config has no gait schedule; pass --schedule".to_string(),
                    )
                })?,
            };
            let duration = duration.unwrap_or(10.0 * schedule.period);
            let traj = if sequential {
                rollout_sequential(&asm, &schedule, duration)
            } else {
                rollout(&asm, &schedule, duration)
            }
            .map_err(gait_error)?;
            println!(
                "frames={} period={} rate={}",
                traj.frames.len(),
                traj.period,
                traj.sample_rate
            );
            if let Some(marker) = metrics {
                let threshold = match contact_y {
                    Some(y) => y,
                    None => mid_height(&traj, &marker)?,
                };
                let m = stride_metrics(&traj, &marker, threshold).map_err(gait_error)?;
                println!(
                    "marker={marker} contact_y={threshold:.6} stride_length={:.6} path_length={:.6} duty={:.6}",
                    m.stride_length, m.path_length, m.duty_estimate
                );
            }
            if let Some(path) = out {
                let mut writer = BufWriter::new(File::create(&path)?);
                export_trajectory_jsonl(&traj, &mut writer)?;
                writer.flush()?;
                println!("wrote {}", path.display());
            }
            Ok(())
        }

        Command::Validate => {
            let asm = load_assembly(&cli.config)?;
            println!(
                "config ok: 4 loops, {} markers, {} shared joints",
                asm.markers().len(),
                asm.shared_joints().len()
            );
            let pose = solve_assembly(&asm, asm.neutral_actuators())
                .map_err(|e| CliError::infeasible(format!("neutral pose: {e}")))?;
            let worst = lizard_kinematics::assembly::shared_joint_deviations(&asm, &pose)
                .into_iter()
                .map(|(_, d)| d)
                .fold(0.0f64, f64::max);
            println!("neutral pose ok (max shared-joint deviation {worst:.3e})");
            match asm.mechanism_graph() {
                Some(graph) => {
                    let report = validate_driving_pairs(graph);
                    println!("{}", report.summary_line());
                    for reason in &report.reasons {
                        println!("reason: {reason}");
                    }
                }
                None => println!("no mechanism graph declared"),
            }
            Ok(())
        }
    }
}

fn mid_height(
    traj: &lizard_kinematics::Trajectory,
    marker: &str,
) -> Result<f64, CliError> {
    let mut lo = f64::MAX;
    let mut hi = f64::MIN;
    for frame in &traj.frames {
        match frame.pose.marker_points.get(marker) {
            Some(p) => {
                lo = lo.min(p.y);
                hi = hi.max(p.y);
            }
            None => {
                return Err(CliError::usage(format!("unknown marker '{marker}'")));
            }
        }
    }
    Ok((lo + hi) / 2.0)
}

fn workspace_error(err: WorkspaceError) -> CliError {
    match err {
        WorkspaceError::InvalidRange { .. } => CliError::usage(err.to_string()),
        WorkspaceError::EmptyWorkspace => CliError::infeasible(err.to_string()),
        WorkspaceError::Solve { .. } => CliError::infeasible(err.to_string()),
        WorkspaceError::Io(e) => CliError::io(e.to_string()),
    }
}

fn gait_error(err: GaitError) -> CliError {
    match err {
        GaitError::Infeasible { .. } => CliError::infeasible(err.to_string()),
        other => CliError::usage(other.to_string()),
    }
}
