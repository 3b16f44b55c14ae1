//! Sampling, model construction, grid evaluation, error metrics and timing.

use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::Serialize;

use super::config::{ExperimentConfig, ManifoldId, Method, PlanType, TestFunctionId};
use super::plan::{chebyshev_plan, tensor_grid, uniform_nodes, uniform_plan};
use super::testfun;
use crate::bhi::{bhi_build, HermiteSampleSet};
use crate::error::{Error, Result};
use crate::gek::SamplePlan;
use crate::manifold::{Manifold, ManifoldPoint, TangentVector};
use crate::thi::thi_build;
use crate::vecops;

/// Parameter points at which SO(3) runs export the interpolated rotations.
pub const TRIAL_POINTS: [[f64; 2]; 6] = [
    [-0.3, -0.3],
    [0.0, -0.3],
    [0.3, -0.3],
    [-0.3, 0.3],
    [0.0, 0.3],
    [0.3, 0.3],
];

pub fn evaluate(f: TestFunctionId, omega: &[f64]) -> ManifoldPoint {
    match f {
        TestFunctionId::GaussMap => testfun::gauss_map(omega),
        TestFunctionId::So3Exp => testfun::so3_testfun(omega),
        TestFunctionId::Saddle => testfun::saddle(omega),
    }
}

pub fn evaluate_partial(f: TestFunctionId, omega: &[f64], axis: usize) -> TangentVector {
    match f {
        TestFunctionId::GaussMap => testfun::gauss_map_partial(omega, axis),
        TestFunctionId::So3Exp => testfun::so3_testfun_partial(omega, axis),
        TestFunctionId::Saddle => testfun::saddle_partial(omega, axis),
    }
}

/// Pointwise error: ambient 2-norm, divided by `sqrt(3)` on SO(3).
pub fn point_error(manifold: ManifoldId, exact: &[f64], approx: &[f64]) -> f64 {
    let e = vecops::dist(exact, approx);
    match manifold {
        ManifoldId::So3 => e / 3f64.sqrt(),
        _ => e,
    }
}

pub fn build_plan(cfg: &ExperimentConfig) -> Result<SamplePlan> {
    let (a, b, k, d) = (
        cfg.domain_lower,
        cfg.domain_upper,
        cfg.samples_per_axis,
        cfg.input_dim(),
    );
    match cfg.plan {
        PlanType::UniformGrid => uniform_plan(a, b, k, d),
        PlanType::Chebyshev => chebyshev_plan(a, b, k, d),
    }
}

pub fn sample(f: TestFunctionId, plan: SamplePlan) -> Result<HermiteSampleSet> {
    let d = plan.dim();
    let points = plan.locations().iter().map(|w| evaluate(f, w)).collect();
    let derivatives = plan
        .locations()
        .iter()
        .map(|w| (0..d).map(|i| evaluate_partial(f, w, i)).collect())
        .collect();
    HermiteSampleSet::new(plan, points, derivatives)
}

/// Evaluation grid, row-major with the first coordinate varying slowest.
pub fn evaluation_grid(cfg: &ExperimentConfig) -> Vec<Vec<f64>> {
    let nodes = uniform_nodes(cfg.domain_lower, cfg.domain_upper, cfg.grid_resolution);
    tensor_grid(&nodes, cfg.input_dim())
}

/// Central-difference derivative errors of an interpolant at the sample sites.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdCheck {
    /// `errors[l][i] = |(q(w_l + h e_i) - q(w_l - h e_i)) / 2h - v_l^i|`
    pub errors: Vec<Vec<f64>>,
    pub axis_avg: Vec<f64>,
}

pub fn fd_derivative_check<Q>(mut query: Q, samples: &HermiteSampleSet, h: f64) -> Result<FdCheck>
where
    Q: FnMut(&[f64]) -> Result<ManifoldPoint>,
{
    let (k, d) = (samples.len(), samples.plan().dim());
    let mut errors = vec![vec![0.0; d]; k];
    for (l, row) in errors.iter_mut().enumerate() {
        let w = samples.plan().location(l);
        for (i, slot) in row.iter_mut().enumerate() {
            let mut shifted = w.to_vec();
            shifted[i] = w[i] + h;
            let forward = query(&shifted)?;
            shifted[i] = w[i] - h;
            let backward = query(&shifted)?;
            let fd = vecops::scale(&vecops::sub(forward.coords(), backward.coords()), 0.5 / h);
            *slot = vecops::dist(&fd, samples.derivative(l, i).coords());
        }
    }
    let axis_avg = (0..d)
        .map(|i| errors.iter().map(|r| r[i]).sum::<f64>() / k as f64)
        .collect();
    Ok(FdCheck { errors, axis_avg })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointRecord {
    pub omega: Vec<f64>,
    pub err_bhi: Option<f64>,
    pub err_thi: Option<f64>,
    pub iters_bhi: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationStats {
    pub avg: f64,
    pub max: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MethodReport {
    pub offline_seconds: Option<f64>,
    pub online_seconds_avg: Option<f64>,
    pub err_max: Option<f64>,
    pub err_avg: Option<f64>,
    pub fd_err_axis_avg: Option<Vec<f64>>,
    /// Largest manifold-constraint residual over the interpolated points.
    pub max_constraint_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monotonicity_violations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRotation {
    pub omega: [f64; 2],
    pub exact: [[f64; 3]; 3],
    pub bhi: Option<[[f64; 3]; 3]>,
    pub thi: Option<[[f64; 3]; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub status: RunStatus,
    pub failure: Option<String>,
    pub manifold: ManifoldId,
    pub test_function: TestFunctionId,
    pub num_samples: usize,
    pub grid_points: usize,
    pub bhi: Option<MethodReport>,
    pub thi: Option<MethodReport>,
    pub bhi_iterations: Option<IterationStats>,
    pub trial_rotations: Vec<TrialRotation>,
    #[serde(skip)]
    pub records: Vec<PointRecord>,
    #[serde(skip)]
    pub fd_bhi: Option<FdCheck>,
    #[serde(skip)]
    pub fd_thi: Option<FdCheck>,
}

/// `(max, avg)` over the recorded errors of one method, in record order.
pub fn error_summary(records: &[PointRecord], method: Method) -> Option<(f64, f64)> {
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0;
    let mut n = 0usize;
    for r in records {
        let e = match method {
            Method::Bhi => r.err_bhi,
            Method::Thi => r.err_thi,
        };
        if let Some(e) = e {
            max = max.max(e);
            sum += e;
            n += 1;
        }
    }
    (n > 0).then(|| (max, sum / n as f64))
}

pub fn iteration_summary(records: &[PointRecord]) -> Option<IterationStats> {
    let iters: Vec<usize> = records.iter().filter_map(|r| r.iters_bhi).collect();
    let max = *iters.iter().max()?;
    Some(IterationStats {
        avg: iters.iter().sum::<usize>() as f64 / iters.len() as f64,
        max,
    })
}

impl ErrorReport {
    fn new(cfg: &ExperimentConfig, num_samples: usize, grid: &[Vec<f64>]) -> Self {
        let blank = |m| cfg.runs(m).then(MethodReport::default);
        Self {
            status: RunStatus::Ok,
            failure: None,
            manifold: cfg.manifold,
            test_function: cfg.test_function,
            num_samples,
            grid_points: grid.len(),
            bhi: blank(Method::Bhi),
            thi: blank(Method::Thi),
            bhi_iterations: None,
            trial_rotations: Vec::new(),
            records: grid
                .iter()
                .map(|w| PointRecord {
                    omega: w.clone(),
                    err_bhi: None,
                    err_thi: None,
                    iters_bhi: None,
                })
                .collect(),
            fd_bhi: None,
            fd_thi: None,
        }
    }

    pub fn method(&self, m: Method) -> Option<&MethodReport> {
        match m {
            Method::Bhi => self.bhi.as_ref(),
            Method::Thi => self.thi.as_ref(),
        }
    }

    fn method_mut(&mut self, m: Method) -> &mut MethodReport {
        match m {
            Method::Bhi => self.bhi.get_or_insert_with(Default::default),
            Method::Thi => self.thi.get_or_insert_with(Default::default),
        }
    }

    /// Recomputes error and iteration summaries from the point records.
    pub fn refresh_summary(&mut self) {
        for m in [Method::Bhi, Method::Thi] {
            if self.method(m).is_some() {
                let s = error_summary(&self.records, m);
                let rep = self.method_mut(m);
                rep.err_max = s.map(|s| s.0);
                rep.err_avg = s.map(|s| s.1);
            }
        }
        self.bhi_iterations = iteration_summary(&self.records);
    }

    /// True when the stored summaries equal a fresh recomputation.
    pub fn summary_is_consistent(&self) -> bool {
        let mut copy = self.clone();
        copy.refresh_summary();
        copy == *self
    }
}

/// A failed run with everything computed before the failure.
#[derive(Debug, Clone)]
pub struct ExperimentFailure {
    pub error: Error,
    pub partial: Box<ErrorReport>,
}

impl std::fmt::Display for ExperimentFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.error)
    }
}

impl std::error::Error for ExperimentFailure {}

fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start {threads} threads: {e}")))
}

fn timed_build<T>(repeats: usize, mut build: impl FnMut() -> Result<T>) -> Result<(T, Duration)> {
    let mut best = Duration::MAX;
    let mut model = None;
    for _ in 0..repeats {
        let start = Instant::now();
        let m = build()?;
        best = best.min(start.elapsed());
        model = Some(m);
    }
    Ok((model.expect("at least one repeat"), best))
}

fn to_mat(coords: &[f64]) -> [[f64; 3]; 3] {
    [
        [coords[0], coords[1], coords[2]],
        [coords[3], coords[4], coords[5]],
        [coords[6], coords[7], coords[8]],
    ]
}

struct Run<'a> {
    cfg: &'a ExperimentConfig,
    manifold: Arc<dyn Manifold>,
    exact: Vec<ManifoldPoint>,
    grid: Vec<Vec<f64>>,
    report: ErrorReport,
}

impl Run<'_> {
    fn record(&mut self, m: Method, idx: usize, approx: &ManifoldPoint) {
        let e = point_error(self.cfg.manifold, self.exact[idx].coords(), approx.coords());
        let r = &mut self.report.records[idx];
        match m {
            Method::Bhi => r.err_bhi = Some(e),
            Method::Thi => r.err_thi = Some(e),
        }
        let residual = self.manifold.point_residual(approx.coords());
        let rep = self.report.method_mut(m);
        rep.max_constraint_residual =
            Some(rep.max_constraint_residual.unwrap_or(0.0).max(residual));
    }

    fn run_bhi(&mut self, samples: &HermiteSampleSet) -> Result<()> {
        let cfg = self.cfg;
        let settings = cfg.descent_settings();
        let (mut model, offline) = timed_build(cfg.timing_repeats, || {
            bhi_build(
                samples.clone(),
                Arc::clone(&self.manifold),
                &cfg.theta,
                settings,
            )
        })?;
        self.report.method_mut(Method::Bhi).offline_seconds = Some(offline.as_secs_f64());

        let mut violations = 0;
        let online = if cfg.stateless_bhi && cfg.threads > 1 {
            let pool = thread_pool(cfg.threads)?;
            let start = Instant::now();
            let outcomes = pool.install(|| {
                use rayon::prelude::*;
                self.grid
                    .par_iter()
                    .map(|w| model.query_stateless_detailed(w))
                    .collect::<Vec<_>>()
            });
            let total = start.elapsed();
            for (idx, out) in outcomes.into_iter().enumerate() {
                let out = out?;
                violations += out.monotonicity_violations;
                self.report.records[idx].iters_bhi = Some(out.iterations);
                self.record(Method::Bhi, idx, &out.point);
            }
            total
        } else {
            let mut total = Duration::ZERO;
            for idx in 0..self.grid.len() {
                let start = Instant::now();
                let out = if cfg.stateless_bhi {
                    model.query_stateless_detailed(&self.grid[idx])
                } else {
                    model.query_detailed(&self.grid[idx])
                };
                total += start.elapsed();
                let out = out?;
                violations += out.monotonicity_violations;
                self.report.records[idx].iters_bhi = Some(out.iterations);
                self.record(Method::Bhi, idx, &out.point);
            }
            total
        };
        let rep = self.report.method_mut(Method::Bhi);
        rep.online_seconds_avg = Some(online.as_secs_f64() / self.grid.len() as f64);
        rep.monotonicity_violations = Some(violations);
        self.report.refresh_summary();

        let fd = if cfg.stateless_bhi {
            fd_derivative_check(|w| model.query_stateless(w), samples, cfg.fd_step)?
        } else {
            fd_derivative_check(|w| model.query(w), samples, cfg.fd_step)?
        };
        self.report.method_mut(Method::Bhi).fd_err_axis_avg = Some(fd.axis_avg.clone());
        self.report.fd_bhi = Some(fd);
        if cfg.manifold == ManifoldId::So3 {
            self.trials(Method::Bhi, |w| {
                if cfg.stateless_bhi {
                    model.query_stateless(w)
                } else {
                    model.query(w)
                }
            })?;
        }
        Ok(())
    }

    fn run_thi(&mut self, samples: &HermiteSampleSet) -> Result<()> {
        let cfg = self.cfg;
        let rule = cfg.base_rule()?;
        let settings = cfg.descent_settings();
        let (model, offline) = timed_build(cfg.timing_repeats, || {
            thi_build(
                samples,
                Arc::clone(&self.manifold),
                rule,
                &cfg.theta,
                cfg.dt,
                &settings,
            )
        })?;
        self.report.method_mut(Method::Thi).offline_seconds = Some(offline.as_secs_f64());

        let online = if cfg.threads > 1 {
            let pool = thread_pool(cfg.threads)?;
            let start = Instant::now();
            let points = pool.install(|| {
                use rayon::prelude::*;
                self.grid
                    .par_iter()
                    .map(|w| model.query(w))
                    .collect::<Vec<_>>()
            });
            let total = start.elapsed();
            for (idx, p) in points.into_iter().enumerate() {
                self.record(Method::Thi, idx, &p?);
            }
            total
        } else {
            let mut total = Duration::ZERO;
            for idx in 0..self.grid.len() {
                let start = Instant::now();
                let p = model.query(&self.grid[idx]);
                total += start.elapsed();
                self.record(Method::Thi, idx, &p?);
            }
            total
        };
        self.report.method_mut(Method::Thi).online_seconds_avg =
            Some(online.as_secs_f64() / self.grid.len() as f64);
        self.report.refresh_summary();

        let fd = fd_derivative_check(|w| model.query(w), samples, cfg.fd_step)?;
        self.report.method_mut(Method::Thi).fd_err_axis_avg = Some(fd.axis_avg.clone());
        self.report.fd_thi = Some(fd);
        if cfg.manifold == ManifoldId::So3 {
            self.trials(Method::Thi, |w| model.query(w))?;
        }
        Ok(())
    }

    fn trials(
        &mut self,
        m: Method,
        mut query: impl FnMut(&[f64]) -> Result<ManifoldPoint>,
    ) -> Result<()> {
        if self.report.trial_rotations.is_empty() {
            self.report.trial_rotations = TRIAL_POINTS
                .iter()
                .map(|w| TrialRotation {
                    omega: *w,
                    exact: to_mat(evaluate(self.cfg.test_function, w).coords()),
                    bhi: None,
                    thi: None,
                })
                .collect();
        }
        for t in &mut self.report.trial_rotations {
            let r = Some(to_mat(query(&t.omega)?.coords()));
            match m {
                Method::Bhi => t.bhi = r,
                Method::Thi => t.thi = r,
            }
        }
        Ok(())
    }
}

/// Runs one experiment. On failure the partially filled report is returned
/// inside the error with `status = failed`.
pub fn run_experiment(
    cfg: &ExperimentConfig,
) -> std::result::Result<ErrorReport, ExperimentFailure> {
    let grid = evaluation_grid(cfg);
    let k = cfg.samples_per_axis.pow(cfg.input_dim() as u32);
    let mut run = Run {
        cfg,
        manifold: cfg.manifold.kind().instantiate(),
        exact: Vec::new(),
        report: ErrorReport::new(cfg, k, &grid),
        grid,
    };
    let result = (|| -> Result<()> {
        cfg.validate()?;
        let samples = sample(cfg.test_function, build_plan(cfg)?)?;
        run.exact = run
            .grid
            .iter()
            .map(|w| evaluate(cfg.test_function, w))
            .collect();
        if cfg.runs(Method::Bhi) {
            run.run_bhi(&samples)?;
        }
        if cfg.runs(Method::Thi) {
            run.run_thi(&samples)?;
        }
        Ok(())
    })();
    let mut report = run.report;
    report.refresh_summary();
    match result {
        Ok(()) => Ok(report),
        Err(error) => {
            report.status = RunStatus::Failed;
            report.failure = Some(error.to_string());
            Err(ExperimentFailure {
                error,
                partial: Box::new(report),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_sphere() -> ExperimentConfig {
        ExperimentConfig::from_toml_str(
            r#"
manifold = "sphere"
test_function = "gauss_map"
domain_lower = -0.7853981633974483
domain_upper = 0.7853981633974483
plan = "uniform_grid"
samples_per_axis = 3
grid_resolution = 9
"#,
        )
        .unwrap()
    }

    #[test]
    fn exact_function_fd_check_is_truncation_only() {
        let cfg = small_sphere();
        let samples = sample(cfg.test_function, build_plan(&cfg).unwrap()).unwrap();
        let fd =
            fd_derivative_check(|w| Ok(evaluate(cfg.test_function, w)), &samples, 1e-3).unwrap();
        assert_eq!(fd.errors.len(), 9);
        for row in &fd.errors {
            for e in row {
                assert!(*e < 1e-5, "{e:e}");
            }
        }
        assert!(fd.axis_avg.iter().all(|a| *a > 1e-9));
    }

    #[test]
    fn grid_is_row_major_with_endpoints() {
        let cfg = small_sphere();
        let g = evaluation_grid(&cfg);
        assert_eq!(g.len(), 81);
        assert_eq!(g[0], vec![cfg.domain_lower, cfg.domain_lower]);
        assert_eq!(g[1][0], cfg.domain_lower);
        assert!(g[1][1] > g[0][1]);
        assert_eq!(g[80], vec![cfg.domain_upper, cfg.domain_upper]);
    }

    #[test]
    fn small_run_fills_report_consistently() {
        let cfg = small_sphere();
        let rep = run_experiment(&cfg).unwrap();
        assert_eq!(rep.status, RunStatus::Ok);
        assert!(rep.summary_is_consistent());
        let bhi = rep.bhi.as_ref().unwrap();
        let (max, avg) = error_summary(&rep.records, Method::Bhi).unwrap();
        assert_eq!(bhi.err_max, Some(max));
        assert_eq!(bhi.err_avg, Some(avg));
        assert!(rep
            .records
            .iter()
            .all(|r| r.err_thi.is_some() && r.iters_bhi.is_some()));
        assert!(rep.trial_rotations.is_empty());
        // interpolation at the grid corners, which are samples
        assert!(rep.records[0].err_bhi.unwrap() < 1e-7);
        assert!(rep.records[0].err_thi.unwrap() < 1e-7);
    }

    #[test]
    fn forced_nonconvergence_keeps_partial_report() {
        let mut cfg = small_sphere();
        cfg.tau = 0.0;
        cfg.max_iter = 1;
        cfg.methods = vec![Method::Bhi];
        let fail = run_experiment(&cfg).unwrap_err();
        assert!(matches!(fail.error, Error::NonConvergence { .. }));
        assert_eq!(fail.partial.status, RunStatus::Failed);
        assert!(fail.partial.failure.is_some());
        assert!(fail.partial.summary_is_consistent());
    }

    #[test]
    fn threads_do_not_change_thi_results() {
        let mut cfg = small_sphere();
        cfg.methods = vec![Method::Thi];
        let one = run_experiment(&cfg).unwrap();
        cfg.threads = 3;
        let three = run_experiment(&cfg).unwrap();
        assert_eq!(one.records, three.records);
    }
}
