use std::path::Path;

use manifold_hermite::harness::output::errors_csv;
use manifold_hermite::harness::{run_experiment, ExperimentConfig, Method};

fn bundled(name: &str) -> ExperimentConfig {
    ExperimentConfig::from_path(
        &Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("configs")
            .join(name),
    )
    .unwrap()
}

#[test]
fn bundled_runs_keep_run_invariants() {
    for (name, trials) in [("sphere_gauss.cfg", 0), ("so3_cheby.cfg", 6)] {
        let mut cfg = bundled(name);
        cfg.timing_repeats = 1;
        let report = run_experiment(&cfg).unwrap_or_else(|f| panic!("{name}: {}", f.error));
        assert!(report.summary_is_consistent(), "{name}");
        assert_eq!(report.records.len(), cfg.grid_resolution.pow(2));
        assert_eq!(report.trial_rotations.len(), trials, "{name}");
        for m in [Method::Bhi, Method::Thi] {
            let r = report.method(m).unwrap();
            assert!(r.max_constraint_residual.unwrap() <= 1e-9, "{name} {m:?}");
            assert!(r.online_seconds_avg.unwrap() > 0.0 && r.offline_seconds.unwrap() > 0.0);
        }
        assert_eq!(
            report.bhi.as_ref().unwrap().monotonicity_violations,
            Some(0),
            "{name}"
        );
        assert!(report
            .thi
            .as_ref()
            .unwrap()
            .monotonicity_violations
            .is_none());
        assert_eq!(
            errors_csv(&report).lines().count(),
            report.records.len() + 1
        );
    }
}

#[test]
fn trial_rotations_are_rotations() {
    let mut cfg = bundled("so3_cheby.cfg");
    cfg.grid_resolution = 5;
    cfg.timing_repeats = 1;
    let report = run_experiment(&cfg).unwrap();
    for t in &report.trial_rotations {
        for m in [Some(t.exact), t.bhi, t.thi] {
            let m = nalgebra::Matrix3::from(m.unwrap()).transpose();
            assert!((m.transpose() * m - nalgebra::Matrix3::identity()).amax() < 1e-12);
            assert!((m.determinant() - 1.0).abs() < 1e-12);
        }
        let close = nalgebra::Matrix3::from(t.exact) - nalgebra::Matrix3::from(t.bhi.unwrap());
        assert!(close.amax() < 0.1);
    }
}
