//! End-to-end acceptance checks. Each test prints one `[PASS]` line with
//! its headline numbers (visible with `--nocapture`); a failing assertion
//! is the corresponding `[FAIL]`.

mod common;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{angle_distance, check_golden, oracle_solve, OracleVerdict};
use lizard_kinematics::assembly::{default_lizard, solve_assembly, LoopRole};
use lizard_kinematics::fivebar::{
    closure_residual, solve_both_branches, Branch, DrivenInput, FiveBarGeometry,
};
use lizard_kinematics::gait::{export_trajectory_jsonl, rollout, rollout_sequential};
use lizard_kinematics::geom::Angle;
use lizard_kinematics::topology::validate_driving_pairs;
use lizard_kinematics::workspace::{
    export_csv, export_svg, sweep, sweep_sequential, SvgMode, SweepRange, SweepSpec,
};

fn rad(r: f64) -> Angle {
    Angle::from_radians(r).unwrap()
}

struct RandomCase {
    lengths: [f64; 5],
    theta1: f64,
    theta2: f64,
    theta5: f64,
}

impl RandomCase {
    fn sample(rng: &mut ChaCha8Rng) -> RandomCase {
        RandomCase {
            lengths: [(); 5].map(|_| rng.random_range(0.1..10.0)),
            theta1: rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
            theta2: rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
            theta5: rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
        }
    }

    fn geometry(&self) -> FiveBarGeometry {
        let [l1, l2, l3, l4, l5] = self.lengths;
        FiveBarGeometry::new(l1, l2, l3, l4, l5, rad(self.theta1)).unwrap()
    }

    fn input(&self) -> DrivenInput {
        DrivenInput::new(rad(self.theta2), rad(self.theta5))
    }

    fn oracle(&self) -> OracleVerdict {
        let [l1, l2, l3, l4, l5] = self.lengths;
        oracle_solve(l1, l2, l3, l4, l5, self.theta1, self.theta2, self.theta5)
    }
}

#[test]
fn mobility_report_is_exact_and_fast() {
    let asm = default_lizard();
    let graph = asm.mechanism_graph().expect("bundled graph").clone();
    validate_driving_pairs(&graph); // warm up
    let start = Instant::now();
    let report = validate_driving_pairs(&graph);
    let elapsed = start.elapsed();

    assert_eq!(report.summary_line(), "n=13 m=16 v=4 F=4 F*=0 driving=VALID");
    assert_eq!(report.n_links, 13);
    assert_eq!(report.n_joints, 16);
    assert_eq!(report.independent_loops, 4);
    assert_eq!(report.mobility, 4);
    assert_eq!(report.residual_mobility, 0);
    assert_eq!(report.driving, vec!["R1", "R5", "R11", "R12"]);
    assert_eq!(report.poc_dimension, Some(3));
    assert!(report.valid);
    assert!(elapsed < Duration::from_millis(1), "took {elapsed:?}");
    println!("[PASS] mobility-report: {} in {elapsed:?}", report.summary_line());
}

#[test]
fn solver_matches_independent_circle_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1124_7D0C);
    let cases = 10_000;
    let mut reachable = 0usize;
    let mut max_angle_err = 0.0f64;
    let start = Instant::now();

    for case_index in 0..cases {
        let case = RandomCase::sample(&mut rng);
        let geom = case.geometry();
        let solutions = solve_both_branches(&geom, case.input())
            .unwrap_or_else(|e| panic!("case {case_index}: solver error {e}"));
        match case.oracle() {
            OracleVerdict::Unreachable => {
                assert!(
                    solutions.is_empty(),
                    "case {case_index}: solver found {} solutions, oracle says unreachable",
                    solutions.len()
                );
            }
            OracleVerdict::Reachable(reference) => {
                reachable += 1;
                assert_eq!(
                    solutions.len(),
                    reference.len(),
                    "case {case_index}: branch count mismatch"
                );
                for (sol, oracle) in solutions.iter().zip(&reference) {
                    assert_eq!(
                        sol.branch == Branch::ElbowUp,
                        oracle.left,
                        "case {case_index}: branch side mismatch"
                    );
                    let e3 = angle_distance(sol.theta3.radians(), oracle.theta3);
                    let e4 = angle_distance(sol.theta4.radians(), oracle.theta4);
                    max_angle_err = max_angle_err.max(e3).max(e4);
                    assert!(
                        e3 <= 1e-9 && e4 <= 1e-9,
                        "case {case_index}: angle deviation {e3:.3e}/{e4:.3e}"
                    );
                }
            }
        }
    }

    let elapsed = start.elapsed();
    assert!(reachable >= 1000, "only {reachable} reachable cases; vacuous run");
    assert!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    println!(
        "[PASS] oracle-equivalence: {cases} geometries, {reachable} reachable, max angle deviation {max_angle_err:.3e}, {elapsed:?}"
    );
}

#[test]
fn closure_residuals_stay_within_tolerance() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC105_0E5);
    let mut checked = 0usize;
    let mut max_residual = 0.0f64;
    while checked < 2_000 {
        let case = RandomCase::sample(&mut rng);
        let geom = case.geometry();
        let input = case.input();
        let solutions = solve_both_branches(&geom, input).unwrap();
        if solutions.is_empty() {
            continue;
        }
        for sol in &solutions {
            let recomputed = closure_residual(&geom, &input, sol.theta3, sol.theta4);
            assert!(sol.residual <= 1e-9, "reported residual {:.3e}", sol.residual);
            assert!(recomputed <= 1e-9, "recomputed residual {recomputed:.3e}");
            max_residual = max_residual.max(recomputed).max(sol.residual);
        }
        checked += 1;
    }

    // The assembled body's loops close too.
    let asm = default_lizard();
    let pose = solve_assembly(&asm, asm.neutral_actuators()).unwrap();
    for (role, sol) in &pose.solutions {
        assert!(sol.residual <= 1e-9, "loop {role}: residual {:.3e}", sol.residual);
    }
    println!(
        "[PASS] closure-residual: {checked} reachable poses, max residual {max_residual:.3e}"
    );
}

#[test]
fn workspace_grid_dimensions_and_golden_images() {
    let geom = *default_lizard().geometry(LoopRole::Head);
    let spec = SweepSpec {
        theta2: SweepRange::new(45.0, 160.0, 1.0),
        theta5: SweepRange::new(0.0, 135.0, 1.0),
        branch: Branch::ElbowUp,
    };
    let start = Instant::now();
    let grid = sweep(&geom, &spec).unwrap();
    let elapsed = start.elapsed();
    assert_eq!(grid.rows(), 136);
    assert_eq!(grid.cols(), 116);
    assert_eq!(grid.len(), 15_776);
    assert_eq!(grid.reachable_count(), 15_776);
    assert!(elapsed < Duration::from_secs(5), "sweep took {elapsed:?}");

    // Coarser grid for byte-stable rendered artifacts.
    let coarse = SweepSpec {
        theta2: SweepRange::new(45.0, 160.0, 5.0),
        theta5: SweepRange::new(0.0, 135.0, 5.0),
        branch: Branch::ElbowUp,
    };
    let coarse_grid = sweep(&geom, &coarse).unwrap();
    let mut svg = Vec::new();
    export_svg(&coarse_grid, SvgMode::LinkageOverlay, &mut svg).unwrap();
    check_golden("tests/golden/head_workspace_5deg_overlay.svg", &svg);

    // Small mixed reachable/unreachable grid for a byte-stable CSV.
    let mixed = SweepSpec {
        theta2: SweepRange::new(45.0, 135.0, 45.0),
        theta5: SweepRange::new(-90.0, 0.0, 45.0),
        branch: Branch::ElbowUp,
    };
    let mixed_grid = sweep(&geom, &mixed).unwrap();
    assert!(mixed_grid.reachable_count() > 0);
    assert!(mixed_grid.reachable_count() < mixed_grid.len());
    let mut csv = Vec::new();
    export_csv(&mixed_grid, &mut csv).unwrap();
    check_golden("tests/golden/head_workspace_3x3.csv", &csv);

    println!(
        "[PASS] workspace-grid: 136x116 grid ({} reachable) in {elapsed:?}, golden SVG and CSV byte-identical"
    , grid.reachable_count());
}

#[test]
fn parallel_and_sequential_runs_are_identical() {
    let geom = *default_lizard().geometry(LoopRole::Head);
    let spec = SweepSpec {
        theta2: SweepRange::new(45.0, 160.0, 2.0),
        theta5: SweepRange::new(0.0, 135.0, 2.0),
        branch: Branch::ElbowUp,
    };
    let par_grid = sweep(&geom, &spec).unwrap();
    let seq_grid = sweep_sequential(&geom, &spec).unwrap();
    assert_eq!(par_grid, seq_grid);
    let mut csv_par = Vec::new();
    export_csv(&par_grid, &mut csv_par).unwrap();
    let mut csv_seq = Vec::new();
    export_csv(&seq_grid, &mut csv_seq).unwrap();
    assert_eq!(csv_par, csv_seq);

    let asm = default_lizard();
    let schedule = *asm.schedule().expect("bundled schedule");
    let par = rollout(&asm, &schedule, 2.0 * schedule.period).unwrap();
    let seq = rollout_sequential(&asm, &schedule, 2.0 * schedule.period).unwrap();
    assert_eq!(par, seq);
    let mut jsonl_par = Vec::new();
    export_trajectory_jsonl(&par, &mut jsonl_par).unwrap();
    let mut jsonl_seq = Vec::new();
    export_trajectory_jsonl(&seq, &mut jsonl_seq).unwrap();
    assert_eq!(jsonl_par, jsonl_seq);

    println!(
        "[PASS] determinism: parallel and sequential sweeps ({} cells) and rollouts ({} frames) byte-identical",
        seq_grid.len(),
        par.frames.len()
    );
}

#[test]
fn default_gait_is_feasible_periodic_and_branch_stable() {
    let asm = default_lizard();
    let schedule = *asm.schedule().expect("bundled schedule");
    let duration = 10.0 * schedule.period;
    let traj = rollout(&asm, &schedule, duration).expect("default gait must stay feasible");
    let per_period = traj.frames_per_period();
    assert_eq!(per_period, 50);
    assert_eq!(traj.frames.len(), 501);

    let mut max_angle_dev = 0.0f64;
    let mut max_pose_dev = 0.0f64;
    for i in 0..traj.frames.len() - per_period {
        let a = &traj.frames[i].pose;
        let b = &traj.frames[i + per_period].pose;
        for (x, y) in a.actuator_angles.iter().zip(&b.actuator_angles) {
            let dev = angle_distance(x.radians(), y.radians());
            max_angle_dev = max_angle_dev.max(dev);
            assert!(dev <= 1e-12, "actuator angle drifts {dev:.3e} across one period");
        }
        for role in LoopRole::ALL {
            let pa = &a.poses[&role];
            let pb = &b.poses[&role];
            for (ja, jb) in [
                (pa.g1, pb.g1),
                (pa.g2, pb.g2),
                (pa.p2, pb.p2),
                (pa.p5, pb.p5),
                (pa.p_couple, pb.p_couple),
            ] {
                let dev = ja.distance(jb);
                max_pose_dev = max_pose_dev.max(dev);
                assert!(dev <= 1e-9, "loop {role} joint drifts {dev:.3e} across one period");
            }
        }
        for (name, pa) in &a.marker_points {
            let dev = pa.distance(b.marker_points[name]);
            max_pose_dev = max_pose_dev.max(dev);
            assert!(dev <= 1e-9, "marker {name} drifts {dev:.3e} across one period");
        }
    }

    // Branch stability: the configured branch holds in every frame, and the
    // passive angles move continuously (a flip would jump by the elbow gap,
    // far above this bound at 50 Hz).
    let max_amp = schedule.actuators.iter().map(|w| w.amplitude).fold(0.0, f64::max);
    let step_bound =
        10.0 * max_amp * 2.0 * std::f64::consts::PI / (schedule.sample_rate * schedule.period);
    for pair in traj.frames.windows(2) {
        for role in LoopRole::ALL {
            let s0 = &pair[0].pose.solutions[&role];
            let s1 = &pair[1].pose.solutions[&role];
            assert_eq!(s0.branch, asm.branch(role), "loop {role} left its configured branch");
            assert_eq!(s1.branch, asm.branch(role));
            let d3 = angle_distance(s0.theta3.radians(), s1.theta3.radians());
            let d4 = angle_distance(s0.theta4.radians(), s1.theta4.radians());
            assert!(
                d3 <= step_bound && d4 <= step_bound,
                "loop {role} passive angle jumps {d3:.3e}/{d4:.3e} in one frame (bound {step_bound:.3e})"
            );
        }
    }

    println!(
        "[PASS] gait-playback: {} frames over {duration}s, max periodicity deviation {max_angle_dev:.3e} rad / {max_pose_dev:.3e} units, branches stable",
        traj.frames.len()
    );
}
