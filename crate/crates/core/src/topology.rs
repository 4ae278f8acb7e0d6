//! Mechanism-graph bookkeeping: independent loop count, mobility, and
//! driving-pair validation.
//!
//! A mechanism is summarized as a set of links, a set of 1-dof (or higher)
//! joints, and its independent loops. Each loop carries the number of
//! independent displacement constraints `xi` it imposes (3 for a general
//! planar loop). Mobility is the classic sum
//!
//! ```text
//! F = Σ f_i − Σ ξ_j
//! ```
//!
//! and a driving set is valid when fixing the driving joints leaves zero
//! residual mobility and the set is exactly as large as `F`.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TopologyError {
    #[error("a mechanism needs at least 2 links, got {0}")]
    TooFewLinks(usize),
    #[error("a mechanism graph needs at least one joint")]
    NoJoints,
    #[error("duplicate joint id '{0}'")]
    DuplicateJointId(String),
    #[error("joint '{0}' has zero degrees of freedom")]
    ZeroDofJoint(String),
    #[error("{n_joints} joints cannot connect {n_links} links into one mechanism")]
    Disconnected { n_links: usize, n_joints: usize },
    #[error("graph declares {declared} loops but link/joint counts imply {expected}")]
    LoopCountMismatch { declared: usize, expected: usize },
    #[error("loop {index} has only {len} joints (minimum 3)")]
    ShortLoop { index: usize, len: usize },
    #[error("loop {index} references unknown joint '{id}'")]
    UnknownJoint { index: usize, id: String },
    #[error("loop {index} lists joint '{id}' twice")]
    RepeatedJoint { index: usize, id: String },
}

/// A kinematic pair between two links.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Joint {
    pub id: String,
    /// Degrees of freedom the pair permits (1 for a revolute).
    pub dof: u32,
    /// Whether an actuator drives this joint.
    pub driving: bool,
}

impl Joint {
    pub fn revolute(id: &str, driving: bool) -> Joint {
        Joint { id: id.to_string(), dof: 1, driving }
    }
}

/// One independent loop and the constraint count it contributes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopSpec {
    pub joint_ids: Vec<String>,
    /// Independent displacement constraints imposed by this loop
    /// (3 for a general planar loop).
    pub xi: u32,
}

/// Number of independent loops in a connected mechanism with `n_links`
/// links and `n_joints` joints.
pub fn independent_loop_count(n_links: usize, n_joints: usize) -> Result<usize, TopologyError> {
    if n_links < 2 {
        return Err(TopologyError::TooFewLinks(n_links));
    }
    if n_joints + 1 < n_links {
        return Err(TopologyError::Disconnected { n_links, n_joints });
    }
    Ok(n_joints + 1 - n_links)
}

/// Validated link/joint/loop summary of a mechanism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MechanismGraph {
    n_links: usize,
    joints: Vec<Joint>,
    loops: Vec<LoopSpec>,
    /// Dimension of the output motion set, when known from an external
    /// analysis; carried as data and reported alongside mobility.
    poc_dimension: Option<u32>,
}

impl MechanismGraph {
    pub fn new(
        n_links: usize,
        joints: Vec<Joint>,
        loops: Vec<LoopSpec>,
    ) -> Result<MechanismGraph, TopologyError> {
        if joints.is_empty() {
            return Err(TopologyError::NoJoints);
        }
        let mut seen = std::collections::BTreeSet::new();
        for joint in &joints {
            if !seen.insert(joint.id.as_str()) {
                return Err(TopologyError::DuplicateJointId(joint.id.clone()));
            }
            if joint.dof == 0 {
                return Err(TopologyError::ZeroDofJoint(joint.id.clone()));
            }
        }
        let expected = independent_loop_count(n_links, joints.len())?;
        if loops.len() != expected {
            return Err(TopologyError::LoopCountMismatch { declared: loops.len(), expected });
        }
        for (index, spec) in loops.iter().enumerate() {
            if spec.joint_ids.len() < 3 {
                return Err(TopologyError::ShortLoop { index, len: spec.joint_ids.len() });
            }
            let mut in_loop = std::collections::BTreeSet::new();
            for id in &spec.joint_ids {
                if !seen.contains(id.as_str()) {
                    return Err(TopologyError::UnknownJoint { index, id: id.clone() });
                }
                if !in_loop.insert(id.as_str()) {
                    return Err(TopologyError::RepeatedJoint { index, id: id.clone() });
                }
            }
        }
        Ok(MechanismGraph { n_links, joints, loops, poc_dimension: None })
    }

    pub fn with_poc_dimension(mut self, dim: u32) -> MechanismGraph {
        self.poc_dimension = Some(dim);
        self
    }

    pub fn n_links(&self) -> usize {
        self.n_links
    }

    pub fn n_joints(&self) -> usize {
        self.joints.len()
    }

    pub fn joints(&self) -> &[Joint] {
        &self.joints
    }

    pub fn loops(&self) -> &[LoopSpec] {
        &self.loops
    }

    pub fn poc_dimension(&self) -> Option<u32> {
        self.poc_dimension
    }

    pub fn independent_loops(&self) -> usize {
        // Validated at construction, so this cannot fail.
        self.joints.len() + 1 - self.n_links
    }

    fn constraint_sum(&self) -> i64 {
        self.loops.iter().map(|l| i64::from(l.xi)).sum()
    }

    fn freedom_sum(&self, include_driving: bool) -> i64 {
        self.joints
            .iter()
            .filter(|j| include_driving || !j.driving)
            .map(|j| i64::from(j.dof))
            .sum()
    }
}

/// Mobility `F = Σ f_i − Σ ξ_j`. Negative values mean an overconstrained
/// graph.
pub fn mobility(graph: &MechanismGraph) -> i64 {
    graph.freedom_sum(true) - graph.constraint_sum()
}

/// Outcome of checking the declared driving joints against mobility.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub n_links: usize,
    pub n_joints: usize,
    pub independent_loops: usize,
    /// Mobility of the full graph.
    pub mobility: i64,
    /// Mobility left after treating every driving joint as fixed.
    pub residual_mobility: i64,
    pub driving: Vec<String>,
    pub poc_dimension: Option<u32>,
    pub valid: bool,
    pub reasons: Vec<String>,
}

impl ValidationReport {
    /// One-line summary, e.g. `n=13 m=16 v=4 F=4 F*=0 driving=VALID`.
    pub fn summary_line(&self) -> String {
        format!(
            "n={} m={} v={} F={} F*={} driving={}",
            self.n_links,
            self.n_joints,
            self.independent_loops,
            self.mobility,
            self.residual_mobility,
            if self.valid { "VALID" } else { "INVALID" }
        )
    }
}

/// Checks that the driving joints, treated as fixed, absorb the mechanism's
/// mobility exactly. Failures are reported, not raised.
pub fn validate_driving_pairs(graph: &MechanismGraph) -> ValidationReport {
    let driving: Vec<String> =
        graph.joints.iter().filter(|j| j.driving).map(|j| j.id.clone()).collect();
    let mobility_value = mobility(graph);
    let residual = graph.freedom_sum(false) - graph.constraint_sum();

    let mut reasons = Vec::new();
    if driving.is_empty() {
        reasons.push("no joints are marked driving".to_string());
    }
    if residual != 0 {
        reasons.push(format!(
            "fixing the driving joints leaves residual mobility {residual} (want 0)"
        ));
    }
    if driving.len() as i64 != mobility_value {
        reasons.push(format!(
            "{} driving joints for mobility {} (want exactly {})",
            driving.len(),
            mobility_value,
            mobility_value
        ));
    }

    ValidationReport {
        n_links: graph.n_links,
        n_joints: graph.joints.len(),
        independent_loops: graph.independent_loops(),
        mobility: mobility_value,
        residual_mobility: residual,
        driving,
        poc_dimension: graph.poc_dimension,
        valid: reasons.is_empty(),
        reasons,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn planar_loop(ids: &[&str]) -> LoopSpec {
        LoopSpec { joint_ids: ids.iter().map(|s| s.to_string()).collect(), xi: 3 }
    }

    /// 13 links, 16 revolutes, four planar loops; drivers at the four
    /// shared ground pivots.
    fn lizard_graph() -> MechanismGraph {
        let driving = ["R1", "R5", "R11", "R12"];
        let joints = (1..=16)
            .map(|i| {
                let id = format!("R{i}");
                Joint { driving: driving.contains(&id.as_str()), id, dof: 1 }
            })
            .collect();
        let loops = vec![
            planar_loop(&["R1", "R2", "R3", "R4", "R5"]),
            planar_loop(&["R1", "R7", "R8", "R10", "R11"]),
            planar_loop(&["R5", "R6", "R9", "R12", "R13"]),
            planar_loop(&["R11", "R12", "R14", "R15", "R16"]),
        ];
        MechanismGraph::new(13, joints, loops).unwrap().with_poc_dimension(3)
    }

    fn four_bar() -> MechanismGraph {
        let joints = vec![
            Joint::revolute("R1", true),
            Joint::revolute("R2", false),
            Joint::revolute("R3", false),
            Joint::revolute("R4", false),
        ];
        MechanismGraph::new(4, joints, vec![planar_loop(&["R1", "R2", "R3", "R4"])]).unwrap()
    }

    fn five_bar() -> MechanismGraph {
        let joints = vec![
            Joint::revolute("R1", true),
            Joint::revolute("R2", false),
            Joint::revolute("R3", false),
            Joint::revolute("R4", false),
            Joint::revolute("R5", true),
        ];
        MechanismGraph::new(5, joints, vec![planar_loop(&["R1", "R2", "R3", "R4", "R5"])])
            .unwrap()
    }

    #[test]
    fn loop_count_examples() {
        assert_eq!(independent_loop_count(13, 16).unwrap(), 4);
        assert_eq!(independent_loop_count(4, 4).unwrap(), 1);
        assert_eq!(independent_loop_count(5, 5).unwrap(), 1);
        assert!(independent_loop_count(5, 3).is_err());
    }

    #[test]
    fn mobility_examples() {
        assert_eq!(mobility(&four_bar()), 1);
        assert_eq!(mobility(&five_bar()), 2);
        assert_eq!(mobility(&lizard_graph()), 4);
    }

    #[test]
    fn lizard_driving_set_is_valid() {
        let report = validate_driving_pairs(&lizard_graph());
        assert!(report.valid, "{:?}", report.reasons);
        assert_eq!(report.residual_mobility, 0);
        assert_eq!(report.driving, vec!["R1", "R5", "R11", "R12"]);
        assert_eq!(report.poc_dimension, Some(3));
        assert_eq!(report.summary_line(), "n=13 m=16 v=4 F=4 F*=0 driving=VALID");
    }

    #[test]
    fn underdriven_lizard_is_invalid() {
        let driving = ["R1", "R5"];
        let joints: Vec<Joint> = (1..=16)
            .map(|i| {
                let id = format!("R{i}");
                Joint { driving: driving.contains(&id.as_str()), id, dof: 1 }
            })
            .collect();
        let loops = vec![
            planar_loop(&["R1", "R2", "R3", "R4", "R5"]),
            planar_loop(&["R1", "R7", "R8", "R10", "R11"]),
            planar_loop(&["R5", "R6", "R9", "R12", "R13"]),
            planar_loop(&["R11", "R12", "R14", "R15", "R16"]),
        ];
        let graph = MechanismGraph::new(13, joints, loops).unwrap();
        let report = validate_driving_pairs(&graph);
        assert!(!report.valid);
        assert_eq!(report.residual_mobility, 2);
    }

    #[test]
    fn adding_drivers_never_increases_residual_mobility() {
        let base = lizard_graph();
        let ids: Vec<String> = base.joints().iter().map(|j| j.id.clone()).collect();
        // Grow a driving set one joint at a time, in several rotated
        // orders, and watch the residual shrink monotonically.
        for rotation in 0..ids.len() {
            let mut driving: Vec<&str> = Vec::new();
            let mut last = validate_driving_pairs(&rebuild(&base, &driving)).residual_mobility;
            for k in 0..ids.len() {
                let id = &ids[(rotation + k) % ids.len()];
                driving.push(id);
                let next = validate_driving_pairs(&rebuild(&base, &driving)).residual_mobility;
                assert!(next <= last, "residual grew when adding {id}");
                last = next;
            }
        }
    }

    fn rebuild(base: &MechanismGraph, driving: &[&str]) -> MechanismGraph {
        let joints = base
            .joints()
            .iter()
            .map(|j| Joint {
                id: j.id.clone(),
                dof: j.dof,
                driving: driving.contains(&j.id.as_str()),
            })
            .collect();
        MechanismGraph::new(base.n_links(), joints, base.loops().to_vec()).unwrap()
    }

    #[test]
    fn construction_rejects_malformed_graphs() {
        let dup = vec![Joint::revolute("R1", false), Joint::revolute("R1", false)];
        assert_eq!(
            MechanismGraph::new(2, dup, vec![]),
            Err(TopologyError::DuplicateJointId("R1".into()))
        );

        let joints = vec![
            Joint::revolute("R1", false),
            Joint::revolute("R2", false),
            Joint::revolute("R3", false),
            Joint::revolute("R4", false),
        ];
        // Declared loops must match v = m - n + 1.
        assert!(matches!(
            MechanismGraph::new(4, joints.clone(), vec![]),
            Err(TopologyError::LoopCountMismatch { declared: 0, expected: 1 })
        ));
        // Loops must reference known joints.
        assert!(matches!(
            MechanismGraph::new(4, joints.clone(), vec![planar_loop(&["R1", "R2", "R9", "R4"])]),
            Err(TopologyError::UnknownJoint { .. })
        ));
        // Loops need at least three joints.
        assert!(matches!(
            MechanismGraph::new(4, joints, vec![planar_loop(&["R1", "R2"])]),
            Err(TopologyError::ShortLoop { .. })
        ));
    }
}
