//! Fast numerical invariant suite: exp/log round trips, finite-difference
//! checks of the squared-distance gradient and Hessian, the weight
//! derivative solver against a dense least-norm KKT solve, and checks on the
//! interpolation models built for the reference problems.

use std::f64::consts::FRAC_PI_4;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bhi::{bhi_build, weight_derivatives, BhiModel, DescentSettings, HermiteSampleSet};
use crate::error::Result;
use crate::gek::{GekModel, SamplePlan};
use crate::harness::experiment::sample;
use crate::harness::plan::{chebyshev_plan, uniform_plan};
use crate::harness::TestFunctionId;
use crate::manifold::{Manifold, ManifoldPoint, TangentVector};
use crate::manifolds::matfun::{expm3, expm_frechet};
use crate::manifolds::ManifoldKind;
use crate::thi::{thi_build, BaseRule};
use crate::vecops;

/// Random pairs stay this fraction of `pi` inside the injectivity radius.
const MAX_ANGLE_FRACTION: f64 = 0.9;

pub const ROUND_TRIP_TOL: f64 = 1e-9;
pub const GRADIENT_TOL: f64 = 1e-6;
pub const HESSIAN_TOL: f64 = 1e-5;
pub const KKT_TOL: f64 = 1e-10;
pub const RECONSTRUCTION_TOL: f64 = 1e-8;
/// Random Euclidean instances for the weight derivative checks.
pub const KKT_INSTANCES: usize = 50;
pub const SUM_ZERO_TOL: f64 = 1e-10;
pub const PARTITION_TOL: f64 = 1e-8;
pub const FRECHET_TOL: f64 = 1e-8;
pub const GEK_VALUE_TOL: f64 = 1e-8;
pub const GEK_GRADIENT_TOL: f64 = 1e-6;
/// Flat-space BHI tolerance in units of the descent tolerance.
pub const FLAT_BHI_TAU_FACTOR: f64 = 10.0;
const THETA: [f64; 2] = [0.5, 0.5];

fn random_ambient(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Random unit tangent vector at `base`.
pub fn random_unit_tangent(
    manifold: &dyn Manifold,
    base: &ManifoldPoint,
    rng: &mut ChaCha8Rng,
) -> TangentVector {
    loop {
        let v = manifold.project_tangent(base, &random_ambient(rng, manifold.ambient_dim()));
        let norm = manifold.inner(&v, &v).sqrt();
        if norm > 1e-3 {
            return v.scaled(1.0 / norm);
        }
    }
}

/// Tangent vector of random direction whose geodesic length is below
/// `MAX_ANGLE_FRACTION * pi` (measured as a rotation angle on SO(3)).
pub fn random_tangent(
    manifold: &dyn Manifold,
    base: &ManifoldPoint,
    rng: &mut ChaCha8Rng,
) -> TangentVector {
    let u = random_unit_tangent(manifold, base, rng);
    // SO(3) with the Frobenius metric has |Log| = sqrt(2) * angle.
    let unit = if manifold.descriptor().name == "so3" {
        2f64.sqrt()
    } else {
        1.0
    };
    u.scaled(rng.gen_range(0.0..MAX_ANGLE_FRACTION * std::f64::consts::PI) * unit)
}

pub fn random_point(manifold: &dyn Manifold, rng: &mut ChaCha8Rng) -> Result<ManifoldPoint> {
    let seed = match manifold.descriptor().name.as_str() {
        "so3" => {
            let mut id = vec![0.0; 9];
            id[0] = 1.0;
            id[4] = 1.0;
            id[8] = 1.0;
            ManifoldPoint::from_coords(id)
        }
        _ => manifold.project_point(&random_ambient(rng, manifold.ambient_dim())),
    };
    let v = random_tangent(manifold, &seed, rng);
    manifold.exp(&v)
}

/// Worst of `|exp_q(log_q p) - p|` and `|log_q(exp_q v) - v|` over `pairs`
/// random pairs.
pub fn round_trip_error(manifold: &dyn Manifold, pairs: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let q = random_point(manifold, &mut rng)?;
        let v = random_tangent(manifold, &q, &mut rng);
        let p = manifold.exp(&v)?;
        let back = manifold.log(&q, &p)?;
        worst = worst.max(vecops::dist(back.coords(), v.coords()));
        let again = manifold.exp(&back)?;
        worst = worst.max(vecops::dist(again.coords(), p.coords()));
    }
    Ok(worst)
}

fn half_sq_dist(manifold: &dyn Manifold, q: &ManifoldPoint, p: &ManifoldPoint) -> Result<f64> {
    let v = manifold.log(q, p)?;
    Ok(0.5 * manifold.inner(&v, &v))
}

/// Central difference of `t -> dist(exp_q(t v), p)^2 / 2` against
/// `<-log_q(p), v>`, worst over `trials`.
pub fn karcher_gradient_error(manifold: &dyn Manifold, trials: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let q = random_point(manifold, &mut rng)?;
        let p = manifold.exp(&random_tangent(manifold, &q, &mut rng))?;
        let v = random_unit_tangent(manifold, &q, &mut rng);
        let plus = half_sq_dist(manifold, &manifold.exp(&v.scaled(t))?, &p)?;
        let minus = half_sq_dist(manifold, &manifold.exp(&v.scaled(-t))?, &p)?;
        let fd = (plus - minus) / (2.0 * t);
        let grad = manifold.log(&q, &p)?.scaled(-1.0);
        worst = worst.max((fd - manifold.inner(&grad, &v)).abs());
    }
    Ok(worst)
}

/// Second central difference of `t -> dist(exp_p(t v), p)^2 / 2` against
/// `<v, v>`, worst over `trials`.
pub fn hessian_identity_error(manifold: &dyn Manifold, trials: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = 1e-3;
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let p = random_point(manifold, &mut rng)?;
        let v = random_unit_tangent(manifold, &p, &mut rng).scaled(rng.gen_range(0.5..2.0));
        let plus = half_sq_dist(manifold, &p, &manifold.exp(&v.scaled(t))?)?;
        let minus = half_sq_dist(manifold, &p, &manifold.exp(&v.scaled(-t))?)?;
        let fd = (plus + minus) / (t * t);
        worst = worst.max((fd - manifold.inner(&v, &v)).abs());
    }
    Ok(worst)
}

/// Minimum-norm `c` with `x c = v` and `sum(c) = 0`, from the dense KKT system
/// `[[2I, A^T], [A, 0]] [c; lambda] = [0; b]`, `A = [x; 1^T]`, `b = [v; 0]`.
pub fn kkt_least_norm(x: &DMatrix<f64>, v: &[f64]) -> Option<DVector<f64>> {
    let (n, cols) = x.shape();
    let rows = n + 1;
    let size = cols + rows;
    let mut kkt = DMatrix::<f64>::zeros(size, size);
    for i in 0..cols {
        kkt[(i, i)] = 2.0;
    }
    for r in 0..rows {
        for c in 0..cols {
            let a = if r < n { x[(r, c)] } else { 1.0 };
            kkt[(cols + r, c)] = a;
            kkt[(c, cols + r)] = a;
        }
    }
    let mut rhs = DVector::<f64>::zeros(size);
    for (r, val) in v.iter().enumerate() {
        rhs[cols + r] = *val;
    }
    let lu = kkt.clone().lu();
    let mut sol = lu.solve(&rhs)?;
    // the KKT matrix squares the conditioning of [X; 1^T]
    for _ in 0..2 {
        sol += lu.solve(&(&rhs - &kkt * &sol))?;
    }
    Some(sol.rows(0, cols).into_owned())
}

/// Errors of the weight derivative solver on one Euclidean instance.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WeightSolverErrors {
    /// Distance to the KKT solution.
    pub kkt: f64,
    /// `|sum_j c_j (p_j - p_l) - v|`
    pub reconstruction: f64,
    /// `|sum_j c_j|`
    pub sum_zero: f64,
}

impl WeightSolverErrors {
    fn worst(self, o: Self) -> Self {
        Self {
            kkt: self.kkt.max(o.kkt),
            reconstruction: self.reconstruction.max(o.reconstruction),
            sum_zero: self.sum_zero.max(o.sum_zero),
        }
    }
}

/// Random Euclidean instances in `R^n` with `k` samples of a `d`-parameter
/// function, compared with [`kkt_least_norm`].
pub fn weight_solver_errors(instances: usize, seed: u64) -> Result<WeightSolverErrors> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = WeightSolverErrors::default();
    for _ in 0..instances {
        let n = rng.gen_range(2..=4);
        let k = rng.gen_range(n + 2..=n + 6);
        let d = 2;
        let manifold = ManifoldKind::Euclidean(n).instantiate();
        let locations = (0..k).map(|_| random_ambient(&mut rng, d)).collect();
        let plan = SamplePlan::new(locations)?;
        let points: Vec<Vec<f64>> = (0..k).map(|_| random_ambient(&mut rng, n)).collect();
        let derivatives = (0..k)
            .map(|_| (0..d).map(|_| random_ambient(&mut rng, n)).collect())
            .collect();
        let set =
            HermiteSampleSet::from_coords(manifold.as_ref(), plan, points.clone(), derivatives)?;
        let table = weight_derivatives(&set, manifold.as_ref())?;
        for l in 0..k {
            let others: Vec<usize> = (0..k).filter(|&j| j != l).collect();
            let x = DMatrix::from_fn(n, k - 1, |r, c| points[others[c]][r] - points[l][r]);
            for i in 0..d {
                let v = set.derivative(l, i).coords();
                let c = table.coefficients(l, i);
                let c_red = DVector::from_iterator(k - 1, others.iter().map(|&j| c[j]));
                let oracle =
                    kkt_least_norm(&x, v).expect("generic instance has a regular KKT matrix");
                let recon = &x * &c_red;
                worst = worst.worst(WeightSolverErrors {
                    kkt: (&c_red - oracle).amax().max(c[l].abs()),
                    reconstruction: vecops::dist(recon.as_slice(), v),
                    sum_zero: c.iter().sum::<f64>().abs(),
                });
            }
        }
    }
    Ok(worst)
}

/// Largest `d(exp)(X)[E]` error against central differences, `|X|, |E| <= 2`.
pub fn frechet_error(trials: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random = |rng: &mut ChaCha8Rng| {
        let m: Matrix3<f64> = Matrix3::from_iterator((0..9).map(|_| rng.gen_range(-1.0..1.0)));
        let scale = rng.gen_range(0.0..2.0f64) / m.norm().max(f64::MIN_POSITIVE);
        m * scale
    };
    let t = 1e-5;
    (0..trials)
        .map(|_| {
            let (x, e) = (random(&mut rng), random(&mut rng));
            let fd = (expm3(&(x + e * t)) - expm3(&(x - e * t))) / (2.0 * t);
            (expm_frechet(&x, &e) - fd).amax()
        })
        .fold(0.0, f64::max)
}

/// The saddle sampled on a 3x3 grid in `R^3`.
fn flat_reference() -> Result<(Arc<dyn Manifold>, HermiteSampleSet)> {
    // node spacing 1/theta makes the cubic-kernel system singular
    let plan = uniform_plan(-0.75, 0.75, 3, 2)?;
    Ok((
        ManifoldKind::Euclidean(3).instantiate(),
        sample(TestFunctionId::Saddle, plan)?,
    ))
}

/// Largest gap between flat-space BHI and the weighted average `sum_j phi_j p_j`
/// at random parameters.
pub fn flat_bhi_error(queries: usize, seed: u64, settings: DescentSettings) -> Result<f64> {
    let (m, set) = flat_reference()?;
    let model = bhi_build(set.clone(), m, &THETA, settings)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..queries {
        let omega = [rng.gen_range(-0.75..0.75), rng.gen_range(-0.75..0.75)];
        let mut want = vec![0.0; 3];
        for (w, p) in model.weights(&omega).iter().zip(set.points()) {
            vecops::axpy(&mut want, *w, p.coords());
        }
        worst = worst.max(vecops::dist(model.query_stateless(&omega)?.coords(), &want));
    }
    Ok(worst)
}

/// Manifold, samples and half-width of the square parameter domain.
type Problem = (Arc<dyn Manifold>, HermiteSampleSet, f64);

/// The two reference problems: Gauss map on a uniform 3x3 grid and the
/// rotation test function on a 7x7 Chebyshev grid.
fn reference_problems() -> Result<Vec<Problem>> {
    Ok(vec![
        (
            ManifoldKind::Sphere.instantiate(),
            sample(
                TestFunctionId::GaussMap,
                uniform_plan(-FRAC_PI_4, FRAC_PI_4, 3, 2)?,
            )?,
            FRAC_PI_4,
        ),
        (
            ManifoldKind::So3.instantiate(),
            sample(TestFunctionId::So3Exp, chebyshev_plan(-0.5, 0.5, 7, 2)?)?,
            0.5,
        ),
    ])
}

fn reference_bhi(m: &Arc<dyn Manifold>, set: &HermiteSampleSet) -> Result<BhiModel> {
    bhi_build(
        set.clone(),
        Arc::clone(m),
        &THETA,
        DescentSettings::default(),
    )
}

/// Largest `|sum_j phi_j(w) - 1|` over random `w` on both reference problems.
pub fn partition_error(queries: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for (m, set, half) in reference_problems()? {
        let model = reference_bhi(&m, &set)?;
        for _ in 0..queries {
            let omega = [rng.gen_range(-half..half), rng.gen_range(-half..half)];
            worst = worst.max((model.weights(&omega).iter().sum::<f64>() - 1.0).abs());
        }
    }
    Ok(worst)
}

/// Worst value and gradient misfit of scalar models at the sample sites.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ReproductionErrors {
    pub values: f64,
    pub gradients: f64,
}

fn reproduction<V, G>(model: &GekModel, value: V, gradient: G, out: &mut ReproductionErrors)
where
    V: Fn(usize) -> f64,
    G: Fn(usize, usize) -> f64,
{
    let plan = model.plan();
    for l in 0..plan.len() {
        let w = plan.location(l);
        out.values = out.values.max((model.predict(w) - value(l)).abs());
        for i in 0..plan.dim() {
            out.gradients = out
                .gradients
                .max((model.predict_partial(w, i) - gradient(l, i)).abs());
        }
    }
}

/// Hermite data reproduction of every BHI weight model and THI coefficient
/// model on both reference problems.
pub fn gek_reproduction_errors() -> Result<ReproductionErrors> {
    let mut out = ReproductionErrors::default();
    let unit = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    for (m, set, _) in reference_problems()? {
        let bhi = reference_bhi(&m, &set)?;
        let table = bhi.weight_derivatives();
        for (j, model) in bhi.weight_models().iter().enumerate() {
            reproduction(model, |l| unit(l, j), |l, i| table.get(l, j, i), &mut out);
        }
        let thi = thi_build(
            &set,
            m,
            BaseRule::Barycenter,
            &THETA,
            1e-4,
            &DescentSettings::default(),
        )?;
        for (j, model) in thi.phi_models().iter().enumerate() {
            reproduction(model, |l| unit(l, j), |_, _| 0.0, &mut out);
        }
        for i in 0..set.plan().dim() {
            for l in 0..set.len() {
                let model = thi.psi_model(i, l);
                reproduction(model, |_| 0.0, |l2, i2| unit(l2, l) * unit(i2, i), &mut out);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub error: Option<String>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.value <= self.tolerance
    }
}

impl std::fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed() { "PASS" } else { "FAIL" };
        match &self.error {
            Some(e) => write!(f, "{tag} {}: error: {e}", self.name),
            None => write!(
                f,
                "{tag} {}: {:.3e} <= {:.1e}",
                self.name, self.value, self.tolerance
            ),
        }
    }
}

fn outcome(name: String, value: Result<f64>, tolerance: f64) -> CheckOutcome {
    match value {
        Ok(v) => CheckOutcome {
            name,
            value: v,
            tolerance,
            error: None,
        },
        Err(e) => CheckOutcome {
            name,
            value: f64::NAN,
            tolerance,
            error: Some(e.to_string()),
        },
    }
}

/// Runs the suite with every tolerance multiplied by `tolerance_scale`.
pub fn run_checks(pairs: usize, seed: u64, tolerance_scale: f64) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    for kind in [
        ManifoldKind::Sphere,
        ManifoldKind::So3,
        ManifoldKind::Euclidean(3),
    ] {
        let m = kind.instantiate();
        let name = m.descriptor().name.clone();
        out.push(outcome(
            format!("{name} exp/log round trip ({pairs} pairs)"),
            round_trip_error(m.as_ref(), pairs, seed),
            ROUND_TRIP_TOL * tolerance_scale,
        ));
        out.push(outcome(
            format!("{name} squared-distance gradient"),
            karcher_gradient_error(m.as_ref(), 100, seed + 1),
            GRADIENT_TOL * tolerance_scale,
        ));
        out.push(outcome(
            format!("{name} squared-distance Hessian at the base"),
            hessian_identity_error(m.as_ref(), 100, seed + 2),
            HESSIAN_TOL * tolerance_scale,
        ));
    }
    let w = weight_solver_errors(KKT_INSTANCES, seed + 3);
    let pick = |f: fn(&WeightSolverErrors) -> f64| w.as_ref().map(f).map_err(Clone::clone);
    out.push(outcome(
        format!("weight derivatives vs KKT least-norm solve ({KKT_INSTANCES} instances)"),
        pick(|w| w.kkt),
        KKT_TOL * tolerance_scale,
    ));
    out.push(outcome(
        "weight derivative reconstruction".into(),
        pick(|w| w.reconstruction),
        RECONSTRUCTION_TOL * tolerance_scale,
    ));
    out.push(outcome(
        "weight derivative sum".into(),
        pick(|w| w.sum_zero),
        SUM_ZERO_TOL * tolerance_scale,
    ));
    let settings = DescentSettings::default();
    out.push(outcome(
        "flat-space BHI vs weighted average (100 queries)".into(),
        flat_bhi_error(100, seed + 4, settings),
        FLAT_BHI_TAU_FACTOR * settings.tolerance * tolerance_scale,
    ));
    out.push(outcome(
        "weight partition of unity (100 queries per problem)".into(),
        partition_error(100, seed + 5),
        PARTITION_TOL * tolerance_scale,
    ));
    out.push(outcome(
        "expm Frechet derivative vs central differences".into(),
        Ok(frechet_error(100, seed + 6)),
        FRECHET_TOL * tolerance_scale,
    ));
    let rep = gek_reproduction_errors();
    out.push(outcome(
        "GEK value reproduction".into(),
        rep.as_ref().map(|r| r.values).map_err(Clone::clone),
        GEK_VALUE_TOL * tolerance_scale,
    ));
    out.push(outcome(
        "GEK gradient reproduction".into(),
        rep.map(|r| r.gradients),
        GEK_GRADIENT_TOL * tolerance_scale,
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kkt_oracle_on_hand_instance() {
        // x = [1 0 -1], v = 2, sum zero: c = (1, 0, -1)
        let x = DMatrix::from_row_slice(1, 3, &[1.0, 0.0, -1.0]);
        let c = kkt_least_norm(&x, &[2.0]).unwrap();
        assert!((c - DVector::from_vec(vec![1.0, 0.0, -1.0])).amax() < 1e-14);
    }

    #[test]
    fn suite_passes_and_scale_zero_fails() {
        let all = run_checks(200, 7, 1.0);
        assert!(all.iter().all(CheckOutcome::passed), "{all:#?}");
        let forced = run_checks(20, 7, 0.0);
        assert!(forced.iter().any(|c| !c.passed()));
    }
}
