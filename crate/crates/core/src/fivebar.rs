//! Closed-form position analysis of a planar five-bar linkage.
//!
//! The loop has two grounded pivots joined by a fixed ground link (length
//! `l1`, direction `theta1`), two driven cranks (`l2` at the first pivot,
//! `l5` at the second) and two coupler links (`l3`, `l4`) meeting at the
//! coupler joint. All link angles are absolute, measured from the global
//! x-axis. Given the two crank angles, the two coupler angles follow from
//! the vector loop closure
//!
//! ```text
//! l2·u(θ2) + l3·u(θ3) − l4·u(θ4) − l5·u(θ5) − l1·u(θ1) = 0
//! ```
//!
//! eliminated down to a quadratic in tan(θ4/2). The two real roots are the
//! two assembly branches (coupler joint on either side of the line between
//! the crank tips); θ3 then follows exactly by back-substitution. When the
//! half-angle parameterization degenerates (θ4 at ±180°, i.e. the quadratic
//! leading coefficient vanishes) the solver falls back to an atan2-based
//! circle-intersection formulation of the same constraint.

use thiserror::Error;

use crate::geom::{Angle, Vec2};

/// Default tolerance (length units) on the loop-closure residual.
pub const DEFAULT_CLOSURE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum FiveBarError {
    #[error("link length {name} = {value} must be positive and finite")]
    InvalidGeometry { name: &'static str, value: f64 },
    /// The coupler circles around the two crank tips do not intersect.
    /// Carries the (negative) discriminant of the branch quadratic.
    #[error("pose is unreachable: coupler circles do not intersect (discriminant {discriminant:e})")]
    Unreachable { discriminant: f64 },
    /// Crank tips coincide and the couplers have equal length: the coupler
    /// joint can sit anywhere on a circle, so no discrete solution exists.
    #[error("pose is indeterminate: crank tips coincide and coupler lengths are equal")]
    Indeterminate,
    /// Internal guard: a computed solution failed to satisfy loop closure.
    #[error("loop closure residual {residual:e} exceeds tolerance {tolerance:e}")]
    ClosureFailure { residual: f64, tolerance: f64 },
}

/// Link lengths and ground direction of one five-bar loop.
///
/// All lengths are strictly positive and finite; `theta1` is the absolute
/// direction of the ground link from the first pivot to the second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiveBarGeometry {
    l1: f64,
    l2: f64,
    l3: f64,
    l4: f64,
    l5: f64,
    theta1: Angle,
}

impl FiveBarGeometry {
    pub fn new(
        l1: f64,
        l2: f64,
        l3: f64,
        l4: f64,
        l5: f64,
        theta1: Angle,
    ) -> Result<FiveBarGeometry, FiveBarError> {
        for (name, value) in [("l1", l1), ("l2", l2), ("l3", l3), ("l4", l4), ("l5", l5)] {
            if !value.is_finite() || value <= 0.0 {
                return Err(FiveBarError::InvalidGeometry { name, value });
            }
        }
        Ok(FiveBarGeometry { l1, l2, l3, l4, l5, theta1 })
    }

    pub fn l1(&self) -> f64 {
        self.l1
    }
    pub fn l2(&self) -> f64 {
        self.l2
    }
    pub fn l3(&self) -> f64 {
        self.l3
    }
    pub fn l4(&self) -> f64 {
        self.l4
    }
    pub fn l5(&self) -> f64 {
        self.l5
    }
    pub fn theta1(&self) -> Angle {
        self.theta1
    }

    fn max_length(&self) -> f64 {
        self.l1.max(self.l2).max(self.l3).max(self.l4).max(self.l5)
    }
}

/// The two driven crank angles of a loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrivenInput {
    pub theta2: Angle,
    pub theta5: Angle,
}

impl DrivenInput {
    pub fn new(theta2: Angle, theta5: Angle) -> DrivenInput {
        DrivenInput { theta2, theta5 }
    }
}

/// Assembly branch: which side of the directed line from the first crank
/// tip to the second the coupler joint lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    /// Coupler joint to the left of the crank-tip line.
    ElbowUp,
    /// Coupler joint to the right of the crank-tip line.
    ElbowDown,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::ElbowUp => "up",
            Branch::ElbowDown => "down",
        }
    }
}

impl std::str::FromStr for Branch {
    type Err = String;
    fn from_str(s: &str) -> Result<Branch, String> {
        match s {
            "up" => Ok(Branch::ElbowUp),
            "down" => Ok(Branch::ElbowDown),
            other => Err(format!("unknown branch '{other}' (expected 'up' or 'down')")),
        }
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Solved passive angles for one branch of one loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopSolution {
    pub theta3: Angle,
    pub theta4: Angle,
    pub branch: Branch,
    /// Loop-closure residual (length units) of the returned angles.
    pub residual: f64,
}

/// All five joint positions of a solved loop, in the loop's local frame
/// (first ground pivot at the origin).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopPose {
    /// First ground pivot (local origin).
    pub g1: Vec2,
    /// Second ground pivot.
    pub g2: Vec2,
    /// Tip of the first crank.
    pub p2: Vec2,
    /// Tip of the second crank.
    pub p5: Vec2,
    /// Coupler joint where the two coupler links meet.
    pub p_couple: Vec2,
}

impl LoopPose {
    /// Joint position by conventional name; used by config-driven lookups.
    pub fn joint(&self, name: &str) -> Option<Vec2> {
        match name {
            "g1" => Some(self.g1),
            "g2" => Some(self.g2),
            "p2" => Some(self.p2),
            "p5" => Some(self.p5),
            "p_couple" => Some(self.p_couple),
            _ => None,
        }
    }
}

/// One raw solution candidate before branch tagging.
#[derive(Debug, Clone, Copy)]
struct Candidate {
    theta3: Angle,
    theta4: Angle,
    /// Coupler joint relative to the first crank tip.
    rel: Vec2,
    /// Cross product of the crank-tip separation with `rel`: positive when
    /// the coupler joint is left of the directed crank-tip line.
    side: f64,
}

/// Half-angle quadratic coefficients for θ4, plus the crank-tip offsets.
///
/// `k1`/`k2` are the y/x components of the second crank tip minus the first;
/// `a·t² + b·t + c = 0` with `t = tan(θ4/2)` expresses loop closure.
fn coefficients(geom: &FiveBarGeometry, input: &DrivenInput) -> (f64, f64, f64, f64, f64) {
    let k1 = geom.l1 * geom.theta1.sin() + geom.l5 * input.theta5.sin()
        - geom.l2 * input.theta2.sin();
    let k2 = geom.l1 * geom.theta1.cos() + geom.l5 * input.theta5.cos()
        - geom.l2 * input.theta2.cos();
    let (l3, l4) = (geom.l3, geom.l4);
    let a = 0.5 * (l4 * l4 - 2.0 * k2 * l4 - l3 * l3 + k2 * k2 + k1 * k1);
    let b = 2.0 * k1 * l4;
    let c = 0.5 * (l4 * l4 + 2.0 * k2 * l4 - l3 * l3 + k2 * k2 + k1 * k1);
    (k1, k2, a, b, c)
}

fn candidate_from_theta4(geom: &FiveBarGeometry, k1: f64, k2: f64, theta4: Angle) -> Candidate {
    let (s4, c4) = (theta4.sin(), theta4.cos());
    // Back-substitute into the closure components: l3·u(θ3) = (k2, k1) + l4·u(θ4).
    let rel = Vec2::new(k2 + geom.l4 * c4, k1 + geom.l4 * s4);
    let theta3 = Angle::wrap(rel.y.atan2(rel.x));
    let side = geom.l4 * (k2 * s4 - k1 * c4);
    Candidate { theta3, theta4, rel, side }
}

/// Circle-intersection fallback used when the half-angle parameterization is
/// singular (θ4 at ±180°). Intersects the circle of radius `l3` around the
/// first crank tip with the circle of radius `l4` around the second.
fn circle_candidates(geom: &FiveBarGeometry, k1: f64, k2: f64) -> Vec<Candidate> {
    let c = Vec2::new(k2, k1);
    let d = c.norm();
    let along = (d * d + geom.l3 * geom.l3 - geom.l4 * geom.l4) / (2.0 * d);
    let h = (geom.l3 * geom.l3 - along * along).max(0.0).sqrt();
    let unit = c * (1.0 / d);
    let base = unit * along;
    let left = unit.perp();
    let rels = if h == 0.0 {
        vec![base]
    } else {
        vec![base + left * h, base - left * h]
    };
    rels.into_iter()
        .map(|rel| {
            let theta3 = Angle::wrap(rel.y.atan2(rel.x));
            let to_couple = rel - c;
            let theta4 = Angle::wrap(to_couple.y.atan2(to_couple.x));
            Candidate { theta3, theta4, rel, side: c.cross(rel) }
        })
        .collect()
}

/// Solves the branch quadratic and returns one or two candidates, ordered
/// with the left-side (ElbowUp) candidate first.
fn candidates(geom: &FiveBarGeometry, input: &DrivenInput) -> Result<Vec<Candidate>, FiveBarError> {
    let (k1, k2, a, b, c) = coefficients(geom, input);
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Err(FiveBarError::Unreachable { discriminant: disc });
    }
    let coeff_scale = a.abs().max(b.abs()).max(c.abs());
    let len = geom.max_length();
    if coeff_scale <= 1e-14 * len * len {
        // All coefficients vanish: crank tips coincide with l3 = l4.
        return Err(FiveBarError::Indeterminate);
    }
    let cands = if a.abs() < 1e-12 * coeff_scale {
        circle_candidates(geom, k1, k2)
    } else {
        let sqrt_disc = disc.sqrt();
        if sqrt_disc == 0.0 {
            vec![candidate_from_theta4(geom, k1, k2, Angle::wrap(2.0 * (-b / (2.0 * a)).atan()))]
        } else {
            // Numerically stable root pair: q/a and c/q avoid cancellation.
            let q = -0.5 * (b + b.signum() * sqrt_disc);
            let first = candidate_from_theta4(geom, k1, k2, Angle::wrap(2.0 * (q / a).atan()));
            let second = candidate_from_theta4(geom, k1, k2, Angle::wrap(2.0 * (c / q).atan()));
            vec![first, second]
        }
    };
    Ok(match cands.as_slice() {
        [one] => vec![*one],
        [x, y] if x.side >= y.side => vec![*x, *y],
        [x, y] => vec![*y, *x],
        _ => unreachable!("quadratic yields at most two candidates"),
    })
}

fn tag(
    geom: &FiveBarGeometry,
    input: &DrivenInput,
    cand: &Candidate,
    branch: Branch,
    tolerance: f64,
) -> Result<LoopSolution, FiveBarError> {
    let residual = closure_residual(geom, input, cand.theta3, cand.theta4);
    if !(residual <= tolerance) {
        return Err(FiveBarError::ClosureFailure { residual, tolerance });
    }
    Ok(LoopSolution { theta3: cand.theta3, theta4: cand.theta4, branch, residual })
}

/// Solves the passive angles for one assembly branch with the default
/// closure tolerance.
pub fn solve_passive(
    geom: &FiveBarGeometry,
    input: DrivenInput,
    branch: Branch,
) -> Result<LoopSolution, FiveBarError> {
    solve_passive_with_tolerance(geom, input, branch, DEFAULT_CLOSURE_TOLERANCE)
}

/// Solves the passive angles for one assembly branch.
///
/// At a tangent configuration (zero discriminant) the unique solution is
/// returned for either requested branch.
pub fn solve_passive_with_tolerance(
    geom: &FiveBarGeometry,
    input: DrivenInput,
    branch: Branch,
    tolerance: f64,
) -> Result<LoopSolution, FiveBarError> {
    let cands = candidates(geom, &input)?;
    let chosen = match cands.as_slice() {
        [only] => only,
        [up, down] => {
            if up.rel.distance(down.rel) <= tolerance {
                up
            } else {
                match branch {
                    Branch::ElbowUp => up,
                    Branch::ElbowDown => down,
                }
            }
        }
        _ => unreachable!(),
    };
    tag(geom, &input, chosen, branch, tolerance)
}

/// Returns every real assembly branch with the default closure tolerance.
pub fn solve_both_branches(
    geom: &FiveBarGeometry,
    input: DrivenInput,
) -> Result<Vec<LoopSolution>, FiveBarError> {
    solve_both_branches_with_tolerance(geom, input, DEFAULT_CLOSURE_TOLERANCE)
}

/// Returns every real assembly branch: two solutions generically, one at a
/// tangent configuration (tagged `ElbowUp`), and an empty list — not an
/// error — when the pose is unreachable.
pub fn solve_both_branches_with_tolerance(
    geom: &FiveBarGeometry,
    input: DrivenInput,
    tolerance: f64,
) -> Result<Vec<LoopSolution>, FiveBarError> {
    let cands = match candidates(geom, &input) {
        Ok(c) => c,
        Err(FiveBarError::Unreachable { .. }) => return Ok(Vec::new()),
        Err(other) => return Err(other),
    };
    match cands.as_slice() {
        [only] => Ok(vec![tag(geom, &input, only, Branch::ElbowUp, tolerance)?]),
        [up, down] if up.rel.distance(down.rel) <= tolerance => {
            Ok(vec![tag(geom, &input, up, Branch::ElbowUp, tolerance)?])
        }
        [up, down] => Ok(vec![
            tag(geom, &input, up, Branch::ElbowUp, tolerance)?,
            tag(geom, &input, down, Branch::ElbowDown, tolerance)?,
        ]),
        _ => unreachable!(),
    }
}

/// Euclidean norm of the loop-closure components for the given angles;
/// zero (up to rounding) exactly when the angles close the loop.
pub fn closure_residual(
    geom: &FiveBarGeometry,
    input: &DrivenInput,
    theta3: Angle,
    theta4: Angle,
) -> f64 {
    let ex = geom.l2 * input.theta2.cos() + geom.l3 * theta3.cos()
        - geom.l4 * theta4.cos()
        - geom.l5 * input.theta5.cos()
        - geom.l1 * geom.theta1.cos();
    let ey = geom.l2 * input.theta2.sin() + geom.l3 * theta3.sin()
        - geom.l4 * theta4.sin()
        - geom.l5 * input.theta5.sin()
        - geom.l1 * geom.theta1.sin();
    Vec2::new(ex, ey).norm()
}

/// Joint positions of a solved loop in its local frame (first ground pivot
/// at the origin).
pub fn forward_pose(
    geom: &FiveBarGeometry,
    input: DrivenInput,
    solution: &LoopSolution,
) -> LoopPose {
    let g1 = Vec2::ZERO;
    let g2 = Vec2::from_polar(geom.l1, geom.theta1);
    let p2 = Vec2::from_polar(geom.l2, input.theta2);
    let p5 = g2 + Vec2::from_polar(geom.l5, input.theta5);
    let p_couple = p2 + Vec2::from_polar(geom.l3, solution.theta3);
    LoopPose { g1, g2, p2, p5, p_couple }
}
