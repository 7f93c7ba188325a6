use std::sync::Arc;

use fbp_core::driver::snapshot::{load_snapshot, save_snapshot};
use fbp_core::verify::study::measure_config;
use fbp_core::{
    run_simulation, BoundarySupply, FbpError, InitialData, ModelName, Problem, SolverConfig, Stepper,
};

fn small_mms(steps: usize) -> SolverConfig {
    SolverConfig {
        steps,
        degree: 10,
        grid_cells: 50,
        ..SolverConfig::default()
    }
}

fn resting_template(steps: usize) -> Problem {
    let cfg = SolverConfig {
        steps,
        degree: 8,
        grid_cells: 40,
        ..SolverConfig::full_template()
    };
    let mut problem = Problem::from_config(&cfg).unwrap();
    let zero: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(|_| 0.0);
    problem.initial = InitialData {
        radius: cfg.r0,
        p: zero.clone(),
        q: zero.clone(),
        d: zero,
    };
    problem.supply = BoundarySupply::constant(0.0, 0.0);
    problem
}

#[test]
fn empty_tumor_stays_at_rest() {
    for steps in [1, 10] {
        let problem = resting_template(steps);
        let r0 = problem.initial.radius;
        let out = run_simulation(problem).unwrap();
        let s = &out.final_state;
        assert_eq!(s.step, steps);
        assert_eq!(s.radius, r0);
        for v in [&s.c, &s.w, &s.p, &s.q, &s.d] {
            assert!(v.iter().all(|x| *x == 0.0));
        }
        assert_eq!(out.trajectory.len(), steps + 1);
    }
}

#[test]
fn manufactured_quiescent_error_is_small() {
    let report = measure_config(&SolverConfig::default()).unwrap();
    assert!(report.max[3] <= 1e-3, "q error {:e}", report.max[3]);
    assert!(report.radius <= 1e-5, "radius error {:e}", report.radius);
    assert_eq!(report.levels_observed, 1001);
}

#[test]
fn history_reads_grow_quadratically() {
    let mut stepper = Stepper::new(Problem::from_config(&small_mms(40)).unwrap()).unwrap();
    let mut reads = Vec::new();
    while !stepper.is_finished() {
        stepper.step().unwrap();
        reads.push(stepper.stats().history_reads);
    }
    // Step n reads n - 1 history levels for each of the two fields.
    for (i, r) in reads.iter().enumerate() {
        let n = (i + 1) as u64;
        assert_eq!(*r, n * (n - 1), "after step {n}");
    }
}

#[test]
fn reruns_are_bitwise_identical() {
    let cfg = small_mms(50);
    let a = run_simulation(Problem::from_config(&cfg).unwrap()).unwrap();
    let b = run_simulation(Problem::from_config(&cfg).unwrap()).unwrap();
    assert_eq!(a.final_state, b.final_state);
}

#[test]
fn resume_from_file_matches_uninterrupted_run() {
    let cfg = small_mms(60);
    let full = run_simulation(Problem::from_config(&cfg).unwrap()).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mid.snapshot");
    let mut first = Stepper::new(Problem::from_config(&cfg).unwrap()).unwrap();
    for _ in 0..25 {
        first.step().unwrap();
    }
    save_snapshot(&path, first.state(), &cfg.hash()).unwrap();
    let (hash, state) = load_snapshot(&path).unwrap();
    assert_eq!(hash, cfg.hash());
    assert_eq!(&state, first.state());

    let mut resumed = Stepper::resume(Problem::from_config(&cfg).unwrap(), state).unwrap();
    while !resumed.is_finished() {
        resumed.step().unwrap();
    }
    assert_eq!(resumed.state(), &full.final_state);
}

#[test]
fn resume_rejects_mismatched_degree() {
    let cfg = small_mms(10);
    let mut s = Stepper::new(Problem::from_config(&cfg).unwrap()).unwrap();
    s.step().unwrap();
    let state = s.state().clone();
    let other = SolverConfig { degree: 12, ..cfg };
    assert!(Stepper::resume(Problem::from_config(&other).unwrap(), state).is_err());
}

#[test]
fn stepping_past_the_end_fails() {
    let mut s = Stepper::new(Problem::from_config(&small_mms(2)).unwrap()).unwrap();
    s.step().unwrap();
    s.step().unwrap();
    assert!(s.is_finished());
    assert!(matches!(s.step(), Err(FbpError::Precondition(_))));
}

#[test]
fn non_finite_supply_is_reported() {
    let cfg = SolverConfig {
        steps: 5,
        degree: 6,
        grid_cells: 20,
        ..SolverConfig::full_template()
    };
    let mut problem = Problem::from_config(&cfg).unwrap();
    problem.supply = BoundarySupply::constant(f64::NAN, 0.5);
    let err = run_simulation(problem).unwrap_err();
    assert!(matches!(err, FbpError::NonFinite { .. }), "{err}");
    assert!(err.is_numerical());
}

#[test]
fn template_run_keeps_total_density() {
    let cfg = SolverConfig {
        steps: 200,
        degree: 12,
        grid_cells: 100,
        ..SolverConfig::full_template()
    };
    assert_eq!(cfg.model, ModelName::FullTemplate);
    let out = run_simulation(Problem::from_config(&cfg).unwrap()).unwrap();
    let s = &out.final_state;
    for j in 0..s.p.len() {
        let total = s.p[j] + s.q[j] + s.d[j];
        assert!((total - cfg.n_total).abs() <= 1e-10 * cfg.n_total);
    }
    assert!(s.radius > 0.0 && s.radius.is_finite());
    assert!(out.stats.max_condition.is_finite());
    assert_eq!(out.stats.clamped, 0);
}

#[test]
fn invalid_config_is_rejected() {
    let cfg = SolverConfig {
        steps: 0,
        ..SolverConfig::default()
    };
    assert!(matches!(Problem::from_config(&cfg), Err(FbpError::Config(_))));
    let cfg = SolverConfig {
        r0: 0.7,
        ..SolverConfig::default()
    };
    assert!(Problem::from_config(&cfg).is_err());
}
