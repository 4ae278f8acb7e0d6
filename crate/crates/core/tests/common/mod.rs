//! Shared test support: an independent reference solver for one five-bar
//! loop, written against plain circle intersection so it shares no code
//! path (and no intermediate quantities) with the library's half-angle
//! solver, plus golden-file comparison.

#![allow(dead_code)]

use std::path::Path;

/// One reference solution in radians.
#[derive(Debug, Clone, Copy)]
pub struct OracleSolution {
    pub theta3: f64,
    pub theta4: f64,
    /// True when the coupler joint lies left of the directed line from the
    /// first crank tip to the second.
    pub left: bool,
}

#[derive(Debug, Clone)]
pub enum OracleVerdict {
    /// Left-side solution first; one entry at a tangent configuration.
    Reachable(Vec<OracleSolution>),
    Unreachable,
}

/// Intersects the circle of radius `l3` about the first crank tip with the
/// circle of radius `l4` about the second crank tip.
#[allow(clippy::too_many_arguments)]
pub fn oracle_solve(
    l1: f64,
    l2: f64,
    l3: f64,
    l4: f64,
    l5: f64,
    theta1: f64,
    theta2: f64,
    theta5: f64,
) -> OracleVerdict {
    let p2 = (l2 * theta2.cos(), l2 * theta2.sin());
    let p5 = (
        l1 * theta1.cos() + l5 * theta5.cos(),
        l1 * theta1.sin() + l5 * theta5.sin(),
    );
    let dx = p5.0 - p2.0;
    let dy = p5.1 - p2.1;
    let d = dx.hypot(dy);
    if d > l3 + l4 || d < (l3 - l4).abs() {
        return OracleVerdict::Unreachable;
    }
    let along = (d * d + l3 * l3 - l4 * l4) / (2.0 * d);
    let h_sq = l3 * l3 - along * along;
    let h = h_sq.max(0.0).sqrt();
    let (ux, uy) = (dx / d, dy / d);
    // Left normal of the crank-tip direction.
    let (nx, ny) = (-uy, ux);
    let base = (p2.0 + along * ux, p2.1 + along * uy);

    let make = |sx: f64, sy: f64, left: bool| {
        let pc = (base.0 + sx, base.1 + sy);
        OracleSolution {
            theta3: (pc.1 - p2.1).atan2(pc.0 - p2.0),
            theta4: (pc.1 - p5.1).atan2(pc.0 - p5.0),
            left,
        }
    };

    if h == 0.0 {
        OracleVerdict::Reachable(vec![make(0.0, 0.0, true)])
    } else {
        OracleVerdict::Reachable(vec![
            make(h * nx, h * ny, true),
            make(-h * nx, -h * ny, false),
        ])
    }
}

/// Absolute distance between two angles in radians, accounting for wrap.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let diff = (a - b).rem_euclid(2.0 * std::f64::consts::PI);
    diff.min(2.0 * std::f64::consts::PI - diff)
}

/// Compares bytes against a golden file (path relative to this crate's
/// root). Set `UPDATE_GOLDEN=1` to rewrite the golden from the actual
/// output instead.
pub fn check_golden(relative: &str, actual: &[u8]) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join(relative);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read(&path).unwrap_or_else(|e| {
        panic!("missing golden {}: {e}; rerun with UPDATE_GOLDEN=1 to create it", path.display())
    });
    if expected != actual {
        let first_diff = expected
            .iter()
            .zip(actual)
            .position(|(a, b)| a != b)
            .unwrap_or_else(|| expected.len().min(actual.len()));
        panic!(
            "golden mismatch for {}: expected {} bytes, got {}, first difference at byte {}",
            path.display(),
            expected.len(),
            actual.len(),
            first_diff
        );
    }
}
