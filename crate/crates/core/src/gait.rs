//! Actuator schedules and gait playback.
//!
//! A schedule assigns each of the four actuators a periodic waveform
//! `center + amplitude · shape((t/period − phase) mod 1)`. Rolling a
//! schedule out solves the whole assembly at every sample instant; the
//! branch configured per loop is held for the entire rollout, and the first
//! unreachable frame aborts playback with the offending time and loop.

use std::io::{self, Write};

use rayon::prelude::*;
use thiserror::Error;

use crate::assembly::{solve_assembly, AssemblyError, BodyPose, LizardAssembly, LoopRole};
use crate::geom::Angle;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaitError {
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid rollout duration {0}")]
    InvalidDuration(f64),
    #[error("gait infeasible at t={t}s: {source}")]
    Infeasible { t: f64, source: AssemblyError },
    #[error("unknown marker '{0}'")]
    UnknownMarker(String),
    #[error("trajectory has {frames} frames, shorter than one period ({needed} frames)")]
    TooShort { frames: usize, needed: usize },
}

impl GaitError {
    /// The loop that failed, for infeasibility errors.
    pub fn infeasible_role(&self) -> Option<LoopRole> {
        match self {
            GaitError::Infeasible { source: AssemblyError::Solve { role, .. }, .. } => {
                Some(*role)
            }
            _ => None,
        }
    }
}

/// Periodic waveform shape over one unit cycle, ranging over [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WaveShape {
    /// `sin(2π·u)`: crosses zero rising at the cycle start.
    Sine,
    /// Symmetric trapezoid: ramps −1→+1 over `rise_fraction`, holds +1 until
    /// the half cycle, ramps back down over `rise_fraction`, holds −1.
    Trapezoid { rise_fraction: f64 },
}

impl WaveShape {
    fn eval(self, u: f64) -> f64 {
        match self {
            WaveShape::Sine => (2.0 * std::f64::consts::PI * u).sin(),
            WaveShape::Trapezoid { rise_fraction: r } => {
                if u < r {
                    -1.0 + 2.0 * u / r
                } else if u < 0.5 {
                    1.0
                } else if u < 0.5 + r {
                    1.0 - 2.0 * (u - 0.5) / r
                } else {
                    -1.0
                }
            }
        }
    }
}

/// One actuator's periodic command.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waveform {
    pub center: Angle,
    /// Swing amplitude in radians.
    pub amplitude: f64,
    /// Phase offset as a fraction of the period, in [0, 1).
    pub phase: f64,
    pub shape: WaveShape,
}

/// Periodic commands for all four actuators plus the sampling clock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaitSchedule {
    /// Cycle length in seconds.
    pub period: f64,
    /// Samples per second for rollout.
    pub sample_rate: f64,
    pub actuators: [Waveform; 4],
}

impl GaitSchedule {
    pub fn new(
        period: f64,
        sample_rate: f64,
        actuators: [Waveform; 4],
    ) -> Result<GaitSchedule, GaitError> {
        let schedule = GaitSchedule { period, sample_rate, actuators };
        schedule.validate()?;
        Ok(schedule)
    }

    pub fn validate(&self) -> Result<(), GaitError> {
        if !self.period.is_finite() || self.period <= 0.0 {
            return Err(GaitError::InvalidSchedule(format!(
                "period must be positive, got {}",
                self.period
            )));
        }
        if !self.sample_rate.is_finite() || self.sample_rate <= 0.0 {
            return Err(GaitError::InvalidSchedule(format!(
                "sample rate must be positive, got {}",
                self.sample_rate
            )));
        }
        for (i, wf) in self.actuators.iter().enumerate() {
            if !wf.amplitude.is_finite() || wf.amplitude < 0.0 {
                return Err(GaitError::InvalidSchedule(format!(
                    "actuator {} amplitude must be non-negative, got {}",
                    i + 1,
                    wf.amplitude
                )));
            }
            if !wf.phase.is_finite() || !(0.0..1.0).contains(&wf.phase) {
                return Err(GaitError::InvalidSchedule(format!(
                    "actuator {} phase must lie in [0, 1), got {}",
                    i + 1,
                    wf.phase
                )));
            }
            if let WaveShape::Trapezoid { rise_fraction } = wf.shape {
                if !rise_fraction.is_finite() || rise_fraction <= 0.0 || rise_fraction > 0.5 {
                    return Err(GaitError::InvalidSchedule(format!(
                        "actuator {} trapezoid rise fraction must lie in (0, 0.5], got {}",
                        i + 1,
                        rise_fraction
                    )));
                }
            }
        }
        Ok(())
    }

    /// Actuator angles at time `t` (seconds). Periodic in `t` with the
    /// schedule period.
    pub fn sample(&self, t: f64) -> [Angle; 4] {
        self.actuators.map(|wf| {
            let u = (t / self.period - wf.phase).rem_euclid(1.0);
            Angle::wrap(wf.center.radians() + wf.amplitude * wf.shape.eval(u))
        })
    }
}

/// One solved instant of a rollout.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryFrame {
    pub t: f64,
    pub pose: BodyPose,
}

/// A rolled-out gait: frames every `1/sample_rate` seconds from 0 through
/// the requested duration.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub frames: Vec<TrajectoryFrame>,
    pub period: f64,
    pub sample_rate: f64,
}

impl Trajectory {
    /// Frames spanning exactly one schedule period.
    pub fn frames_per_period(&self) -> usize {
        (self.period * self.sample_rate).round() as usize
    }
}

fn frame_times(schedule: &GaitSchedule, duration: f64) -> Result<Vec<f64>, GaitError> {
    schedule.validate()?;
    if !duration.is_finite() || duration < 0.0 {
        return Err(GaitError::InvalidDuration(duration));
    }
    // Small slack so durations that are exact period multiples in intent
    // (e.g. 0.3 at 30 Hz) keep their final frame despite rounding.
    let steps = (duration * schedule.sample_rate + 1e-9).floor() as usize;
    Ok((0..=steps).map(|i| i as f64 / schedule.sample_rate).collect())
}

fn collect_frames(
    times: Vec<f64>,
    results: Vec<Result<BodyPose, AssemblyError>>,
) -> Result<Vec<TrajectoryFrame>, GaitError> {
    let mut frames = Vec::with_capacity(times.len());
    for (t, result) in times.into_iter().zip(results) {
        match result {
            Ok(pose) => frames.push(TrajectoryFrame { t, pose }),
            Err(source) => return Err(GaitError::Infeasible { t, source }),
        }
    }
    Ok(frames)
}

/// Rolls the schedule out over `[0, duration]`, solving frames in parallel.
/// The earliest infeasible frame wins the error regardless of thread
/// scheduling, so results are identical to [`rollout_sequential`].
pub fn rollout(
    asm: &LizardAssembly,
    schedule: &GaitSchedule,
    duration: f64,
) -> Result<Trajectory, GaitError> {
    let times = frame_times(schedule, duration)?;
    let results: Vec<Result<BodyPose, AssemblyError>> = times
        .par_iter()
        .map(|&t| solve_assembly(asm, schedule.sample(t)))
        .collect();
    Ok(Trajectory {
        frames: collect_frames(times, results)?,
        period: schedule.period,
        sample_rate: schedule.sample_rate,
    })
}

/// Single-threaded rollout; bit-identical to [`rollout`].
pub fn rollout_sequential(
    asm: &LizardAssembly,
    schedule: &GaitSchedule,
    duration: f64,
) -> Result<Trajectory, GaitError> {
    let times = frame_times(schedule, duration)?;
    let results: Vec<Result<BodyPose, AssemblyError>> =
        times.iter().map(|&t| solve_assembly(asm, schedule.sample(t))).collect();
    Ok(Trajectory {
        frames: collect_frames(times, results)?,
        period: schedule.period,
        sample_rate: schedule.sample_rate,
    })
}

/// Ground-contact summary of one marker over the first full period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrideMetrics {
    /// Magnitude of the net x-displacement accumulated while the marker is
    /// in contact (y below the threshold): the stance sweep of a foot.
    pub stride_length: f64,
    /// Total arc length traveled over one period.
    pub path_length: f64,
    /// Fraction of the period's frames spent in contact.
    pub duty_estimate: f64,
}

/// Computes stride metrics for `marker` using `contact_y` as the
/// ground-contact threshold. Requires at least one full period of frames.
pub fn stride_metrics(
    traj: &Trajectory,
    marker: &str,
    contact_y: f64,
) -> Result<StrideMetrics, GaitError> {
    let per_period = traj.frames_per_period();
    if per_period == 0 || traj.frames.len() < per_period + 1 {
        return Err(GaitError::TooShort {
            frames: traj.frames.len(),
            needed: per_period + 1,
        });
    }
    let points: Vec<_> = traj.frames[..=per_period]
        .iter()
        .map(|f| {
            f.pose
                .marker_points
                .get(marker)
                .copied()
                .ok_or_else(|| GaitError::UnknownMarker(marker.to_string()))
        })
        .collect::<Result<_, _>>()?;

    let mut swept = 0.0;
    let mut path = 0.0;
    for pair in points.windows(2) {
        path += pair[0].distance(pair[1]);
        if pair[0].y < contact_y && pair[1].y < contact_y {
            swept += pair[1].x - pair[0].x;
        }
    }
    let contact_frames = points[..per_period].iter().filter(|p| p.y < contact_y).count();
    Ok(StrideMetrics {
        stride_length: swept.abs(),
        path_length: path,
        duty_estimate: contact_frames as f64 / per_period as f64,
    })
}

fn write_vec2(out: &mut String, v: crate::geom::Vec2) {
    out.push('[');
    out.push_str(&format!("{},{}", v.x, v.y));
    out.push(']');
}

/// Writes one JSON object per frame:
/// `{"t":…,"actuators_deg":[…],"joints":{"Head":{"g1":[x,y],…},…},"markers":{…}}`.
///
/// Joints appear in loop order (Head, BodyLeft, BodyRight, Tail) and markers
/// in name order; numbers use the shortest round-trip decimal form, so the
/// output is byte-stable for identical trajectories.
pub fn export_trajectory_jsonl(traj: &Trajectory, writer: &mut impl Write) -> io::Result<()> {
    for frame in &traj.frames {
        let mut line = String::new();
        line.push_str(&format!("{{\"t\":{},\"actuators_deg\":[", frame.t));
        for (i, angle) in frame.pose.actuator_angles.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&format!("{}", angle.degrees()));
        }
        line.push_str("],\"joints\":{");
        for (i, (role, pose)) in frame.pose.poses.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&format!("\"{}\":{{", role.as_str()));
            for (j, (joint, point)) in [
                ("g1", pose.g1),
                ("g2", pose.g2),
                ("p2", pose.p2),
                ("p5", pose.p5),
                ("p_couple", pose.p_couple),
            ]
            .into_iter()
            .enumerate()
            {
                if j > 0 {
                    line.push(',');
                }
                line.push_str(&format!("\"{joint}\":"));
                write_vec2(&mut line, point);
            }
            line.push('}');
        }
        line.push_str("},\"markers\":{");
        for (i, (name, point)) in frame.pose.marker_points.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&format!("\"{name}\":"));
            write_vec2(&mut line, *point);
        }
        line.push_str("}}\n");
        writer.write_all(line.as_bytes())?;
    }
    Ok(())
}
