//! Reachable-workspace mapping for a single five-bar loop.
//!
//! A sweep samples a rectangular grid of driven angles (theta2 across
//! columns ascending, theta5 down rows descending) and records, per cell,
//! whether the requested branch assembles and where the joints land. Grids
//! export to CSV and to SVG, either as a linkage overlay (every reachable
//! pose drawn as its four moving links) or as a point cloud of the coupler
//! joint.

use std::io::{self, Write};

use rayon::prelude::*;
use thiserror::Error;

use crate::fivebar::{
    forward_pose, solve_passive, Branch, DrivenInput, FiveBarError, FiveBarGeometry,
    LoopPose, LoopSolution,
};
use crate::geom::{Angle, Vec2};

#[derive(Debug, Error)]
pub enum WorkspaceError {
    #[error("invalid sweep range for {name}: {message}")]
    InvalidRange { name: &'static str, message: String },
    #[error("sweep cell (theta2={theta2_deg}°, theta5={theta5_deg}°) failed: {source}")]
    Solve { theta2_deg: f64, theta5_deg: f64, source: FiveBarError },
    #[error("workspace has no reachable samples to draw")]
    EmptyWorkspace,
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Inclusive sampled range in degrees. Produces `floor((end-start)/step)+1`
/// values from `start` upward; `end` itself is included when the span is a
/// whole number of steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRange {
    pub start_deg: f64,
    pub end_deg: f64,
    pub step_deg: f64,
}

impl SweepRange {
    pub fn new(start_deg: f64, end_deg: f64, step_deg: f64) -> SweepRange {
        SweepRange { start_deg, end_deg, step_deg }
    }

    fn validate(&self, name: &'static str) -> Result<(), WorkspaceError> {
        let bad = |message: String| WorkspaceError::InvalidRange { name, message };
        if !self.start_deg.is_finite() || !self.end_deg.is_finite() {
            return Err(bad(format!(
                "bounds must be finite, got [{}, {}]",
                self.start_deg, self.end_deg
            )));
        }
        if !self.step_deg.is_finite() || self.step_deg <= 0.0 {
            return Err(bad(format!("step must be positive, got {}", self.step_deg)));
        }
        if self.end_deg < self.start_deg {
            return Err(bad(format!(
                "end {} is below start {}",
                self.end_deg, self.start_deg
            )));
        }
        Ok(())
    }

    /// Number of samples; assumes the range is valid.
    pub fn count(&self) -> usize {
        ((self.end_deg - self.start_deg) / self.step_deg + 1e-9).floor() as usize + 1
    }

    /// Ascending sample values in degrees.
    pub fn values(&self) -> Vec<f64> {
        (0..self.count()).map(|i| self.start_deg + i as f64 * self.step_deg).collect()
    }
}

/// What to sweep: both driven-angle ranges and the branch to hold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub theta2: SweepRange,
    pub theta5: SweepRange,
    pub branch: Branch,
}

/// One grid cell. Unreachable cells keep their angles but carry no pose.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub theta2_deg: f64,
    pub theta5_deg: f64,
    pub reachable: bool,
    pub solution: Option<LoopSolution>,
    pub pose: Option<LoopPose>,
}

/// Row-major sweep result: rows step theta5 downward from its end value,
/// columns step theta2 upward from its start.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkspaceGrid {
    theta2_deg: Vec<f64>,
    theta5_deg: Vec<f64>,
    samples: Vec<Sample>,
    geometry: FiveBarGeometry,
    branch: Branch,
}

impl WorkspaceGrid {
    pub fn rows(&self) -> usize {
        self.theta5_deg.len()
    }

    pub fn cols(&self) -> usize {
        self.theta2_deg.len()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Column labels, ascending.
    pub fn theta2_values(&self) -> &[f64] {
        &self.theta2_deg
    }

    /// Row labels, descending.
    pub fn theta5_values(&self) -> &[f64] {
        &self.theta5_deg
    }

    pub fn sample(&self, row: usize, col: usize) -> &Sample {
        &self.samples[row * self.cols() + col]
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn reachable_count(&self) -> usize {
        self.samples.iter().filter(|s| s.reachable).count()
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    pub fn geometry(&self) -> &FiveBarGeometry {
        &self.geometry
    }
}

fn solve_cell(
    geom: &FiveBarGeometry,
    branch: Branch,
    theta2_deg: f64,
    theta5_deg: f64,
) -> Result<Sample, WorkspaceError> {
    let wrap_err = |message: String| WorkspaceError::InvalidRange { name: "sweep", message };
    let input = DrivenInput::new(
        Angle::from_degrees(theta2_deg).map_err(|e| wrap_err(e.to_string()))?,
        Angle::from_degrees(theta5_deg).map_err(|e| wrap_err(e.to_string()))?,
    );
    match solve_passive(geom, input, branch) {
        Ok(solution) => {
            let pose = forward_pose(geom, input, &solution);
            Ok(Sample { theta2_deg, theta5_deg, reachable: true, solution: Some(solution), pose: Some(pose) })
        }
        Err(FiveBarError::Unreachable { .. }) => {
            Ok(Sample { theta2_deg, theta5_deg, reachable: false, solution: None, pose: None })
        }
        Err(source) => Err(WorkspaceError::Solve { theta2_deg, theta5_deg, source }),
    }
}

fn grid_axes(spec: &SweepSpec) -> Result<(Vec<f64>, Vec<f64>), WorkspaceError> {
    spec.theta2.validate("theta2")?;
    spec.theta5.validate("theta5")?;
    let theta2 = spec.theta2.values();
    let mut theta5 = spec.theta5.values();
    theta5.reverse();
    Ok((theta2, theta5))
}

fn assemble_grid(
    geom: &FiveBarGeometry,
    spec: &SweepSpec,
    theta2: Vec<f64>,
    theta5: Vec<f64>,
    cells: Vec<Result<Sample, WorkspaceError>>,
) -> Result<WorkspaceGrid, WorkspaceError> {
    let mut samples = Vec::with_capacity(cells.len());
    for cell in cells {
        samples.push(cell?);
    }
    Ok(WorkspaceGrid {
        theta2_deg: theta2,
        theta5_deg: theta5,
        samples,
        geometry: *geom,
        branch: spec.branch,
    })
}

/// Sweeps the grid in parallel. Bit-identical to [`sweep_sequential`]:
/// cells are computed independently and stitched back in grid order, and
/// the earliest failing cell (in grid order) wins the error.
pub fn sweep(geom: &FiveBarGeometry, spec: &SweepSpec) -> Result<WorkspaceGrid, WorkspaceError> {
    let (theta2, theta5) = grid_axes(spec)?;
    let cols = theta2.len();
    let cells: Vec<Result<Sample, WorkspaceError>> = (0..theta5.len() * cols)
        .into_par_iter()
        .map(|i| solve_cell(geom, spec.branch, theta2[i % cols], theta5[i / cols]))
        .collect();
    assemble_grid(geom, spec, theta2, theta5, cells)
}

/// Single-threaded sweep; bit-identical to [`sweep`].
pub fn sweep_sequential(
    geom: &FiveBarGeometry,
    spec: &SweepSpec,
) -> Result<WorkspaceGrid, WorkspaceError> {
    let (theta2, theta5) = grid_axes(spec)?;
    let cols = theta2.len();
    let cells: Vec<Result<Sample, WorkspaceError>> = (0..theta5.len() * cols)
        .map(|i| solve_cell(geom, spec.branch, theta2[i % cols], theta5[i / cols]))
        .collect();
    assemble_grid(geom, spec, theta2, theta5, cells)
}

fn fmt(v: f64) -> String {
    format!("{:.8e}", v)
}

/// Writes the grid as CSV with the header
/// `theta2_deg,theta5_deg,reachable,x1,y1,x2,y2,x3,y3,x4,y4,x5,y5`.
///
/// Columns 1–5 hold the ground pivot, first crank tip, the coupler joint as
/// carried by each coupler link (3 from the first, 4 rebuilt from the
/// second — equal up to the closure residual), and the second crank tip.
/// Unreachable rows keep their angles and leave the coordinates empty.
/// Numbers use a fixed scientific format, so identical grids serialize
/// byte-identically.
pub fn export_csv(grid: &WorkspaceGrid, writer: &mut impl Write) -> io::Result<()> {
    writer.write_all(b"theta2_deg,theta5_deg,reachable,x1,y1,x2,y2,x3,y3,x4,y4,x5,y5\n")?;
    for sample in &grid.samples {
        let mut line = format!(
            "{},{},{}",
            fmt(sample.theta2_deg),
            fmt(sample.theta5_deg),
            u8::from(sample.reachable)
        );
        match (&sample.pose, &sample.solution) {
            (Some(pose), Some(solution)) => {
                let rebuilt =
                    pose.p5 + Vec2::from_polar(grid.geometry.l4(), solution.theta4);
                for p in [pose.g1, pose.p2, pose.p_couple, rebuilt, pose.p5] {
                    line.push_str(&format!(",{},{}", fmt(p.x), fmt(p.y)));
                }
            }
            _ => line.push_str(",,,,,,,,,,"),
        }
        line.push('\n');
        writer.write_all(line.as_bytes())?;
    }
    Ok(())
}

/// How [`export_svg`] draws the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SvgMode {
    /// Every reachable pose drawn as its four moving links.
    LinkageOverlay,
    /// One dot per reachable coupler-joint position.
    PointCloud,
}

struct Bounds {
    min: Vec2,
    max: Vec2,
}

impl Bounds {
    fn new() -> Bounds {
        Bounds {
            min: Vec2::new(f64::INFINITY, f64::INFINITY),
            max: Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    fn include(&mut self, p: Vec2) {
        self.min.x = self.min.x.min(p.x);
        self.min.y = self.min.y.min(p.y);
        self.max.x = self.max.x.max(p.x);
        self.max.y = self.max.y.max(p.y);
    }
}

const LINK_COLORS: [&str; 4] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728"];

fn overlay_segments(pose: &LoopPose) -> [(Vec2, Vec2); 4] {
    [
        (pose.g1, pose.p2),
        (pose.p2, pose.p_couple),
        (pose.p_couple, pose.p5),
        (pose.p5, pose.g2),
    ]
}

/// Renders the reachable samples as a standalone SVG document. The y axis
/// is flipped so world "up" is screen "up"; the view box fits the drawn
/// content with a 5% margin. Errors with [`WorkspaceError::EmptyWorkspace`]
/// when no sample is reachable.
pub fn export_svg(
    grid: &WorkspaceGrid,
    mode: SvgMode,
    writer: &mut impl Write,
) -> Result<(), WorkspaceError> {
    let reachable: Vec<&Sample> = grid.samples.iter().filter(|s| s.reachable).collect();
    if reachable.is_empty() {
        return Err(WorkspaceError::EmptyWorkspace);
    }

    let mut bounds = Bounds::new();
    for sample in &reachable {
        let pose = sample.pose.as_ref().expect("reachable sample has a pose");
        match mode {
            SvgMode::LinkageOverlay => {
                for (a, b) in overlay_segments(pose) {
                    bounds.include(a);
                    bounds.include(b);
                }
            }
            SvgMode::PointCloud => bounds.include(pose.p_couple),
        }
    }

    let span = bounds.max - bounds.min;
    let margin = 0.05 * span.x.max(span.y).max(1e-6);
    let origin = bounds.min - Vec2::new(margin, margin);
    let size = span + Vec2::new(2.0 * margin, 2.0 * margin);
    // Flip y: world (x, y) draws at (x, -y), so the box top is -max.y.
    let view_top = -(bounds.max.y + margin);

    let width = 800.0;
    let height = (width * size.y / size.x).round().max(1.0);
    let stroke = 0.0025 * size.x.max(size.y);
    let dot = 0.004 * size.x.max(size.y);

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{:.0}\" height=\"{:.0}\" viewBox=\"{:.6} {:.6} {:.6} {:.6}\">\n",
        width, height, origin.x, view_top, size.x, size.y
    ));
    match mode {
        SvgMode::LinkageOverlay => {
            out.push_str(&format!(
                "<g fill=\"none\" stroke-width=\"{stroke:.6}\" stroke-linecap=\"round\" stroke-opacity=\"0.35\">\n"
            ));
            for sample in &reachable {
                let pose = sample.pose.as_ref().unwrap();
                for ((a, b), color) in overlay_segments(pose).into_iter().zip(LINK_COLORS) {
                    out.push_str(&format!(
                        "<line x1=\"{:.6}\" y1=\"{:.6}\" x2=\"{:.6}\" y2=\"{:.6}\" stroke=\"{}\"/>\n",
                        a.x, -a.y, b.x, -b.y, color
                    ));
                }
            }
            out.push_str("</g>\n");
        }
        SvgMode::PointCloud => {
            out.push_str("<g fill=\"#1f77b4\" fill-opacity=\"0.6\">\n");
            for sample in &reachable {
                let p = sample.pose.as_ref().unwrap().p_couple;
                out.push_str(&format!(
                    "<circle cx=\"{:.6}\" cy=\"{:.6}\" r=\"{dot:.6}\"/>\n",
                    p.x, -p.y
                ));
            }
            out.push_str("</g>\n");
        }
    }
    out.push_str("</svg>\n");
    writer.write_all(out.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{default_lizard, LoopRole};

    fn sqrt2_geometry() -> FiveBarGeometry {
        FiveBarGeometry::new(
            2.0,
            1.0,
            std::f64::consts::SQRT_2,
            std::f64::consts::SQRT_2,
            1.0,
            Angle::ZERO,
        )
        .unwrap()
    }

    fn head_geometry() -> FiveBarGeometry {
        *default_lizard().geometry(LoopRole::Head)
    }

    fn default_spec() -> SweepSpec {
        SweepSpec {
            theta2: SweepRange::new(45.0, 160.0, 1.0),
            theta5: SweepRange::new(0.0, 135.0, 1.0),
            branch: Branch::ElbowUp,
        }
    }

    #[test]
    fn range_counts_include_both_endpoints() {
        assert_eq!(SweepRange::new(45.0, 160.0, 1.0).count(), 116);
        assert_eq!(SweepRange::new(0.0, 135.0, 1.0).count(), 136);
        assert_eq!(SweepRange::new(0.0, 1.0, 0.1).count(), 11);
        assert_eq!(SweepRange::new(90.0, 90.0, 1.0).count(), 1);
    }

    #[test]
    fn range_validation_rejects_bad_inputs() {
        let spec = SweepSpec {
            theta2: SweepRange::new(10.0, 0.0, 1.0),
            theta5: SweepRange::new(0.0, 1.0, 1.0),
            branch: Branch::ElbowUp,
        };
        assert!(matches!(
            sweep_sequential(&head_geometry(), &spec),
            Err(WorkspaceError::InvalidRange { name: "theta2", .. })
        ));
        let spec = SweepSpec {
            theta2: SweepRange::new(0.0, 1.0, 1.0),
            theta5: SweepRange::new(0.0, 1.0, 0.0),
            branch: Branch::ElbowUp,
        };
        assert!(matches!(
            sweep_sequential(&head_geometry(), &spec),
            Err(WorkspaceError::InvalidRange { name: "theta5", .. })
        ));
    }

    #[test]
    fn default_grid_shape_and_order() {
        let grid = sweep(&head_geometry(), &default_spec()).unwrap();
        assert_eq!(grid.rows(), 136);
        assert_eq!(grid.cols(), 116);
        assert_eq!(grid.len(), 15_776);
        // Rows descend in theta5, columns ascend in theta2.
        assert_eq!(grid.sample(0, 0).theta5_deg, 135.0);
        assert_eq!(grid.sample(135, 0).theta5_deg, 0.0);
        assert_eq!(grid.sample(0, 0).theta2_deg, 45.0);
        assert_eq!(grid.sample(0, 115).theta2_deg, 160.0);
        assert!(grid.reachable_count() > 0);
    }

    #[test]
    fn single_cell_matches_known_pose() {
        let spec = SweepSpec {
            theta2: SweepRange::new(90.0, 90.0, 1.0),
            theta5: SweepRange::new(90.0, 90.0, 1.0),
            branch: Branch::ElbowUp,
        };
        let grid = sweep_sequential(&sqrt2_geometry(), &spec).unwrap();
        assert_eq!(grid.len(), 1);
        let pose = grid.sample(0, 0).pose.as_ref().unwrap();
        assert!(pose.p_couple.distance(Vec2::new(1.0, 2.0)) < 1e-9);
    }

    #[test]
    fn short_couplers_reach_nothing() {
        let geom =
            FiveBarGeometry::new(2.0, 1.0, 0.1, 0.1, 1.0, Angle::ZERO).unwrap();
        let spec = SweepSpec {
            theta2: SweepRange::new(0.0, 90.0, 10.0),
            theta5: SweepRange::new(0.0, 90.0, 10.0),
            branch: Branch::ElbowUp,
        };
        let grid = sweep(&geom, &spec).unwrap();
        assert_eq!(grid.reachable_count(), 0);
        let mut buf = Vec::new();
        assert!(matches!(
            export_svg(&grid, SvgMode::LinkageOverlay, &mut buf),
            Err(WorkspaceError::EmptyWorkspace)
        ));
    }

    #[test]
    fn parallel_and_sequential_sweeps_are_identical() {
        let spec = SweepSpec {
            theta2: SweepRange::new(45.0, 160.0, 7.0),
            theta5: SweepRange::new(0.0, 135.0, 7.0),
            branch: Branch::ElbowDown,
        };
        let par = sweep(&head_geometry(), &spec).unwrap();
        let seq = sweep_sequential(&head_geometry(), &spec).unwrap();
        assert_eq!(par, seq);
    }

    #[test]
    fn longer_couplers_keep_every_reachable_cell() {
        let spec = SweepSpec {
            theta2: SweepRange::new(0.0, 350.0, 25.0),
            theta5: SweepRange::new(0.0, 350.0, 25.0),
            branch: Branch::ElbowUp,
        };
        let mut previous = 0usize;
        let mut last_reach: Option<Vec<bool>> = None;
        for coupler in [0.8, 1.2, 1.8, 2.5] {
            let geom =
                FiveBarGeometry::new(2.0, 1.0, coupler, coupler, 1.0, Angle::ZERO).unwrap();
            let grid = sweep(&geom, &spec).unwrap();
            let reach: Vec<bool> = grid.samples().iter().map(|s| s.reachable).collect();
            if let Some(prev) = &last_reach {
                for (was, now) in prev.iter().zip(&reach) {
                    assert!(!was || *now, "cell lost reachability as couplers grew");
                }
            }
            assert!(grid.reachable_count() >= previous);
            previous = grid.reachable_count();
            last_reach = Some(reach);
        }
    }

    #[test]
    fn csv_shape_and_empty_columns() {
        let spec = SweepSpec {
            theta2: SweepRange::new(45.0, 135.0, 45.0),
            theta5: SweepRange::new(-90.0, 0.0, 45.0),
            branch: Branch::ElbowUp,
        };
        let grid = sweep_sequential(&head_geometry(), &spec).unwrap();
        assert!(grid.reachable_count() > 0 && grid.reachable_count() < grid.len());
        let mut buf = Vec::new();
        export_csv(&grid, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "theta2_deg,theta5_deg,reachable,x1,y1,x2,y2,x3,y3,x4,y4,x5,y5"
        );
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), grid.len());
        for (row, sample) in rows.iter().zip(grid.samples()) {
            let fields: Vec<&str> = row.split(',').collect();
            assert_eq!(fields.len(), 13);
            if sample.reachable {
                assert_eq!(fields[2], "1");
                assert!(fields[3..].iter().all(|f| !f.is_empty()));
                // Coupler joint from either side agrees to the residual.
                let x3: f64 = fields[7].parse().unwrap();
                let x4: f64 = fields[9].parse().unwrap();
                assert!((x3 - x4).abs() < 1e-8);
            } else {
                assert_eq!(fields[2], "0");
                assert!(fields[3..].iter().all(|f| f.is_empty()));
            }
        }
    }

    #[test]
    fn overlay_draws_four_lines_per_pose() {
        let spec = SweepSpec {
            theta2: SweepRange::new(90.0, 90.0, 1.0),
            theta5: SweepRange::new(90.0, 90.0, 1.0),
            branch: Branch::ElbowUp,
        };
        let grid = sweep_sequential(&sqrt2_geometry(), &spec).unwrap();
        let mut buf = Vec::new();
        export_svg(&grid, SvgMode::LinkageOverlay, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.matches("<line ").count(), 4);
        for color in LINK_COLORS {
            assert!(text.contains(color));
        }

        let mut buf = Vec::new();
        export_svg(&grid, SvgMode::PointCloud, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.matches("<circle ").count(), 1);
    }

    #[test]
    fn svg_output_is_deterministic() {
        let spec = SweepSpec {
            theta2: SweepRange::new(45.0, 160.0, 20.0),
            theta5: SweepRange::new(0.0, 135.0, 20.0),
            branch: Branch::ElbowUp,
        };
        let grid = sweep(&head_geometry(), &spec).unwrap();
        let mut a = Vec::new();
        export_svg(&grid, SvgMode::LinkageOverlay, &mut a).unwrap();
        let mut b = Vec::new();
        export_svg(&grid, SvgMode::LinkageOverlay, &mut b).unwrap();
        assert_eq!(a, b);
    }
}
