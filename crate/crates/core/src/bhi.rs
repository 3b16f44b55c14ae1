//! Barycentric Hermite interpolation (BHI).
//!
//! The interpolant is the weighted Riemannian barycenter
//! `argmin_q 1/2 sum_j phi_j(w) dist(q, p_j)^2` whose weight functions
//! `phi_j` interpolate the unit vectors `e_j` and carry adjusted partial
//! derivatives, so that the barycenter reproduces the sampled tangent vectors.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gek::{gek_build, GekModel, HermiteScalarData, SamplePlan};
use crate::manifold::{Manifold, ManifoldPoint, TangentVector};
use crate::vecops;

/// Relative tolerance of the span check on `X_l c = v_l^i`.
pub const SPAN_REL_TOL: f64 = 1e-8;
/// Absolute floor of the span check.
pub const SPAN_ABS_TOL: f64 = 1e-12;
/// Smallest admissible Schur complement `s` of the sum-zero constraint.
pub const DEGENERATE_S_TOL: f64 = 1e-12;

/// Sample points and sampled partial derivatives on a plan.
#[derive(Debug, Clone)]
pub struct HermiteSampleSet {
    plan: SamplePlan,
    points: Vec<ManifoldPoint>,
    /// `derivatives[j][i] = d_i f(w_j)`, based at `points[j]`.
    derivatives: Vec<Vec<TangentVector>>,
}

impl HermiteSampleSet {
    pub fn new(
        plan: SamplePlan,
        points: Vec<ManifoldPoint>,
        derivatives: Vec<Vec<TangentVector>>,
    ) -> Result<Self> {
        let (k, d) = (plan.len(), plan.dim());
        if points.len() != k || derivatives.len() != k {
            return Err(Error::InvalidInput(format!(
                "expected {k} points and derivative rows, got {} and {}",
                points.len(),
                derivatives.len()
            )));
        }
        for (j, row) in derivatives.iter().enumerate() {
            if row.len() != d {
                return Err(Error::InvalidInput(format!(
                    "sample {j} has {} partial derivatives, expected {d}",
                    row.len()
                )));
            }
            if row.iter().any(|v| v.base() != &points[j]) {
                return Err(Error::InvalidInput(format!(
                    "derivatives of sample {j} are not based at its point"
                )));
            }
        }
        Ok(Self {
            plan,
            points,
            derivatives,
        })
    }

    /// Builds a sample set from raw coordinates, checking every constraint
    /// against `manifold`.
    pub fn from_coords(
        manifold: &dyn Manifold,
        plan: SamplePlan,
        points: Vec<Vec<f64>>,
        derivatives: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let points = points
            .into_iter()
            .map(|p| manifold.point(p))
            .collect::<Result<Vec<_>>>()?;
        if derivatives.len() != points.len() {
            return Err(Error::InvalidInput(
                "derivative rows do not match points".into(),
            ));
        }
        let derivatives = derivatives
            .into_iter()
            .zip(&points)
            .map(|(row, p)| {
                row.into_iter()
                    .map(|v| manifold.tangent(p, v))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(plan, points, derivatives)
    }

    pub fn plan(&self) -> &SamplePlan {
        &self.plan
    }

    pub fn points(&self) -> &[ManifoldPoint] {
        &self.points
    }

    pub fn derivative(&self, sample: usize, axis: usize) -> &TangentVector {
        &self.derivatives[sample][axis]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Table of `d_i phi_j(w_l)` for all samples `l`, weights `j`, axes `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightDerivatives {
    k: usize,
    d: usize,
    data: Vec<f64>,
}

impl WeightDerivatives {
    fn zeros(k: usize, d: usize) -> Self {
        Self {
            k,
            d,
            data: vec![0.0; k * k * d],
        }
    }

    #[inline]
    fn index(&self, sample: usize, weight: usize, axis: usize) -> usize {
        (sample * self.k + weight) * self.d + axis
    }

    /// `d_axis phi_weight (w_sample)`
    pub fn get(&self, sample: usize, weight: usize, axis: usize) -> f64 {
        self.data[self.index(sample, weight, axis)]
    }

    /// The coefficient vector `(d_i phi_1(w_l), ..., d_i phi_k(w_l))`.
    pub fn coefficients(&self, sample: usize, axis: usize) -> Vec<f64> {
        (0..self.k).map(|j| self.get(sample, j, axis)).collect()
    }

    pub fn num_samples(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.d
    }
}

/// Computes the partial derivatives of the BHI weight functions at every
/// sample location.
///
/// For each sample `l` the matrix `X_l` collects `Log_{p_l}(p_j)`, `j != l`,
/// as ambient columns. With the reduced SVD `X_l = U_r S_r V_r^T`, the
/// minimum-norm solution of `X_l c = v`, `sum(c) = 0` is
///
/// ```text
/// c = x + <1, x> / s * (V_r V_r^T 1 - 1),   x = V_r S_r^{-1} U_r^T v,
/// s = (k - 1) - |V_r^T 1|^2
/// ```
///
/// and `c` is scattered into all weights but `l`, whose entry is zero.
pub fn weight_derivatives(
    samples: &HermiteSampleSet,
    manifold: &dyn Manifold,
) -> Result<WeightDerivatives> {
    let k = samples.len();
    let d = samples.plan().dim();
    let n = manifold.ambient_dim();
    let m = manifold.intrinsic_dim();
    if k < m + 2 {
        return Err(Error::InvalidInput(format!(
            "barycentric Hermite interpolation needs at least {} samples on a {m}-dimensional manifold, got {k}",
            m + 2
        )));
    }
    let mut out = WeightDerivatives::zeros(k, d);
    let cols = k - 1;

    for l in 0..k {
        let p_l = &samples.points()[l];
        let mut x_mat = DMatrix::<f64>::zeros(n, cols);
        let others: Vec<usize> = (0..k).filter(|&j| j != l).collect();
        for (c, &j) in others.iter().enumerate() {
            let log = manifold.log(p_l, &samples.points()[j])?;
            x_mat.column_mut(c).copy_from_slice(log.coords());
        }

        let svd = x_mat.clone().svd(true, true);
        let u = svd.u.expect("requested U");
        let v_t = svd.v_t.expect("requested V^T");
        let sigma = &svd.singular_values;
        let sigma_max = sigma.iter().cloned().fold(0.0, f64::max);
        let cutoff = n.max(cols) as f64 * sigma_max * f64::EPSILON;
        let kept: Vec<usize> = (0..sigma.len()).filter(|&r| sigma[r] > cutoff).collect();

        // V_r^T 1 and s
        let vt_one: Vec<f64> = kept.iter().map(|&r| v_t.row(r).sum()).collect();
        let s = cols as f64 - vt_one.iter().map(|x| x * x).sum::<f64>();
        if s <= DEGENERATE_S_TOL {
            return Err(Error::DegenerateConstraint { sample: l, s });
        }
        // V_r (V_r^T 1) - 1
        let mut correction = DVector::<f64>::from_element(cols, -1.0);
        for (idx, &r) in kept.iter().enumerate() {
            correction += v_t.row(r).transpose() * vt_one[idx];
        }

        for i in 0..d {
            let v = samples.derivative(l, i).coords();
            let v_norm = vecops::norm(v);
            let coords: Vec<f64> = kept
                .iter()
                .map(|&r| vecops::dot(u.column(r).as_slice(), v))
                .collect();

            let mut projected = vec![0.0; n];
            for (idx, &r) in kept.iter().enumerate() {
                vecops::axpy(&mut projected, coords[idx], u.column(r).as_slice());
            }
            let residual = vecops::dist(&projected, v);
            if residual > (SPAN_REL_TOL * v_norm).max(SPAN_ABS_TOL) {
                return Err(Error::Span {
                    sample: l,
                    axis: i,
                    residual,
                });
            }

            // min-norm solution of X c = rhs, sum(c) = target
            let min_norm = |rhs: &[f64], target: f64| {
                let mut x = DVector::<f64>::zeros(cols);
                for &r in &kept {
                    let coord = vecops::dot(u.column(r).as_slice(), rhs);
                    x += v_t.row(r).transpose() * (coord / sigma[r]);
                }
                let alpha = (x.sum() - target) / s;
                x + &correction * alpha
            };
            let mut c = min_norm(v, 0.0);
            // a small s amplifies rounding in the sum constraint; refine once
            // against the residual of both constraints
            let fitted = &x_mat * &c;
            let res_v: Vec<f64> = v.iter().zip(fitted.iter()).map(|(a, b)| a - b).collect();
            c += min_norm(&res_v, -c.sum());

            for (pos, &j) in others.iter().enumerate() {
                let at = out.index(l, j, i);
                out.data[at] = c[pos];
            }
        }
    }
    Ok(out)
}

/// Objective `1/2 sum_j phi_j dist(q, p_j)^2` and its Riemannian gradient
/// `sum_j phi_j (-Log_q(p_j))`.
pub fn bary_objective_and_gradient(
    manifold: &dyn Manifold,
    points: &[ManifoldPoint],
    weights: &[f64],
    q: &ManifoldPoint,
) -> Result<(f64, TangentVector)> {
    if points.len() != weights.len() {
        return Err(Error::InvalidInput(format!(
            "{} points but {} weights",
            points.len(),
            weights.len()
        )));
    }
    let mut grad = vec![0.0; q.len()];
    let mut objective = 0.0;
    for (p, &w) in points.iter().zip(weights) {
        let log = manifold.log(q, p)?;
        let len2 = vecops::dot(log.coords(), log.coords());
        objective += 0.5 * w * len2;
        vecops::axpy(&mut grad, -w, log.coords());
    }
    Ok((objective, TangentVector::from_parts(q.clone(), grad)))
}

/// Riemannian gradient of the weighted barycenter objective at `q`.
pub fn bary_gradient(
    manifold: &dyn Manifold,
    points: &[ManifoldPoint],
    weights: &[f64],
    q: &ManifoldPoint,
) -> Result<TangentVector> {
    Ok(bary_objective_and_gradient(manifold, points, weights, q)?.1)
}

/// Fixed-step Riemannian gradient descent settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentSettings {
    pub step: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for DescentSettings {
    fn default() -> Self {
        Self {
            step: 1.0,
            tolerance: 1e-8,
            max_iterations: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentOutcome {
    pub point: ManifoldPoint,
    pub iterations: usize,
    pub grad_norm: f64,
    /// Steps at which the objective increased beyond round-off.
    pub monotonicity_violations: usize,
}

/// Weighted Riemannian barycenter by gradient descent
/// `q <- Exp_q(-step * grad)` until `|grad| <= tolerance`.
pub fn bary_descent(
    manifold: &dyn Manifold,
    points: &[ManifoldPoint],
    weights: &[f64],
    start: &ManifoldPoint,
    settings: &DescentSettings,
) -> Result<DescentOutcome> {
    let mut q = start.clone();
    let (mut objective, mut grad) = bary_objective_and_gradient(manifold, points, weights, &q)?;
    let mut grad_norm = manifold.inner(&grad, &grad).sqrt();
    let mut iterations = 0;
    let mut violations = 0;
    while grad_norm > settings.tolerance {
        if iterations >= settings.max_iterations {
            return Err(Error::NonConvergence {
                iterations,
                grad_norm,
            });
        }
        let moved = manifold.exp(&grad.scaled(-settings.step))?;
        q = manifold.project_point(moved.coords());
        iterations += 1;
        let (next_objective, next_grad) =
            bary_objective_and_gradient(manifold, points, weights, &q)?;
        if next_objective > objective + 1e-12 * objective.abs().max(1.0) {
            violations += 1;
        }
        objective = next_objective;
        grad = next_grad;
        grad_norm = manifold.inner(&grad, &grad).sqrt();
        if !grad_norm.is_finite() {
            return Err(Error::NonConvergence {
                iterations,
                grad_norm,
            });
        }
    }
    Ok(DescentOutcome {
        point: q,
        iterations,
        grad_norm,
        monotonicity_violations: violations,
    })
}

/// Fitted BHI interpolant.
#[derive(Debug, Clone)]
pub struct BhiModel {
    manifold: Arc<dyn Manifold>,
    samples: HermiteSampleSet,
    derivatives: WeightDerivatives,
    weight_models: Vec<GekModel>,
    settings: DescentSettings,
    warm_start: ManifoldPoint,
}

/// Builds the weight models `phi_j` from unit-vector values and the weight
/// derivatives of [`weight_derivatives`]. The warm start begins at `p_1`.
pub fn bhi_build(
    samples: HermiteSampleSet,
    manifold: Arc<dyn Manifold>,
    theta: &[f64],
    settings: DescentSettings,
) -> Result<BhiModel> {
    let derivatives = weight_derivatives(&samples, manifold.as_ref())?;
    let (k, d) = (samples.len(), samples.plan().dim());
    let weight_models = (0..k)
        .map(|j| {
            let values = (0..k).map(|l| if l == j { 1.0 } else { 0.0 }).collect();
            let gradients = (0..k)
                .map(|l| (0..d).map(|i| derivatives.get(l, j, i)).collect())
                .collect();
            gek_build(
                samples.plan().clone(),
                &HermiteScalarData::new(values, gradients),
                theta,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let warm_start = samples.points()[0].clone();
    Ok(BhiModel {
        manifold,
        samples,
        derivatives,
        weight_models,
        settings,
        warm_start,
    })
}

impl BhiModel {
    pub fn manifold(&self) -> &Arc<dyn Manifold> {
        &self.manifold
    }

    pub fn samples(&self) -> &HermiteSampleSet {
        &self.samples
    }

    pub fn weight_derivatives(&self) -> &WeightDerivatives {
        &self.derivatives
    }

    pub fn weight_models(&self) -> &[GekModel] {
        &self.weight_models
    }

    pub fn settings(&self) -> &DescentSettings {
        &self.settings
    }

    pub fn warm_start(&self) -> &ManifoldPoint {
        &self.warm_start
    }

    /// Resets the warm start to the first sample point.
    pub fn reset_warm_start(&mut self) {
        self.warm_start = self.samples.points()[0].clone();
    }

    /// Values `phi_j(w)` of all weight functions.
    pub fn weights(&self, omega: &[f64]) -> Vec<f64> {
        let Some(first) = self.weight_models.first() else {
            return Vec::new();
        };
        // every model has the same plan and theta, hence the same r(w)
        let r = first.system().cross_correlation(omega);
        self.weight_models
            .iter()
            .map(|m| m.predict_with(&r))
            .collect()
    }

    fn descend(&self, omega: &[f64], start: &ManifoldPoint) -> Result<DescentOutcome> {
        if omega.len() != self.samples.plan().dim() {
            return Err(Error::InvalidInput(format!(
                "query has dimension {}, expected {}",
                omega.len(),
                self.samples.plan().dim()
            )));
        }
        let weights = self.weights(omega);
        bary_descent(
            self.manifold.as_ref(),
            self.samples.points(),
            &weights,
            start,
            &self.settings,
        )
    }

    /// Evaluates the interpolant starting from the warm start, then moves the
    /// warm start to the result.
    pub fn query_detailed(&mut self, omega: &[f64]) -> Result<DescentOutcome> {
        let outcome = self.descend(omega, &self.warm_start)?;
        self.warm_start = outcome.point.clone();
        Ok(outcome)
    }

    pub fn query(&mut self, omega: &[f64]) -> Result<ManifoldPoint> {
        Ok(self.query_detailed(omega)?.point)
    }

    /// Evaluates the interpolant from `p_1` without touching the warm start.
    pub fn query_stateless_detailed(&self, omega: &[f64]) -> Result<DescentOutcome> {
        self.descend(omega, &self.samples.points()[0])
    }

    pub fn query_stateless(&self, omega: &[f64]) -> Result<ManifoldPoint> {
        Ok(self.query_stateless_detailed(omega)?.point)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::{Euclidean, Sphere};

    fn euclid_samples(k_side: usize) -> (Arc<dyn Manifold>, HermiteSampleSet) {
        let e: Arc<dyn Manifold> = Arc::new(Euclidean::new(2));
        let mut locs = Vec::new();
        let mut pts = Vec::new();
        let mut ders = Vec::new();
        for a in 0..k_side {
            for b in 0..k_side {
                let w = vec![a as f64 * 0.5 - 0.5, b as f64 * 0.5 - 0.5];
                pts.push(vec![w[0] + 0.3 * w[1] * w[1], (w[0] * w[1]).sin()]);
                ders.push(vec![
                    vec![1.0, w[1] * (w[0] * w[1]).cos()],
                    vec![0.6 * w[1], w[0] * (w[0] * w[1]).cos()],
                ]);
                locs.push(w);
            }
        }
        let plan = SamplePlan::new(locs).unwrap();
        let s = HermiteSampleSet::from_coords(e.as_ref(), plan, pts, ders).unwrap();
        (e, s)
    }

    #[test]
    fn zero_derivatives_give_zero_coefficients() {
        let (e, s) = euclid_samples(3);
        let plan = s.plan().clone();
        let pts: Vec<Vec<f64>> = s.points().iter().map(|p| p.coords().to_vec()).collect();
        let zeros = vec![vec![vec![0.0, 0.0]; 2]; 9];
        let s = HermiteSampleSet::from_coords(e.as_ref(), plan, pts, zeros).unwrap();
        let wd = weight_derivatives(&s, e.as_ref()).unwrap();
        assert!(wd.data.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn coefficients_reconstruct_derivative_and_sum_to_zero() {
        let (e, s) = euclid_samples(3);
        let wd = weight_derivatives(&s, e.as_ref()).unwrap();
        for l in 0..s.len() {
            for i in 0..2 {
                let c = wd.coefficients(l, i);
                assert_eq!(c[l], 0.0);
                assert!(c.iter().sum::<f64>().abs() < 1e-10);
                let mut recon = vec![0.0; 2];
                for (j, cj) in c.iter().enumerate() {
                    let log = e.log(&s.points()[l], &s.points()[j]).unwrap();
                    vecops::axpy(&mut recon, *cj, log.coords());
                }
                assert!(vecops::dist(&recon, s.derivative(l, i).coords()) < 1e-8);
            }
        }
    }

    #[test]
    fn too_few_samples_is_rejected() {
        let s2: Arc<dyn Manifold> = Arc::new(Sphere::new());
        let plan = SamplePlan::new(vec![vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let pts = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let ders = vec![vec![vec![0.0; 3]]; 3];
        let s = HermiteSampleSet::from_coords(s2.as_ref(), plan, pts, ders).unwrap();
        assert!(matches!(
            weight_derivatives(&s, s2.as_ref()),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn derivative_outside_span_is_rejected() {
        // All four points on one great circle: their logs span a line only.
        let s2: Arc<dyn Manifold> = Arc::new(Sphere::new());
        let plan = SamplePlan::new((0..4).map(|j| vec![j as f64]).collect()).unwrap();
        let pts: Vec<Vec<f64>> = (0..4)
            .map(|j| {
                let t = 0.3 * j as f64;
                vec![t.cos(), t.sin(), 0.0]
            })
            .collect();
        let ders = vec![vec![vec![0.0, 0.0, 1.0]]; 4];
        let s = HermiteSampleSet::from_coords(s2.as_ref(), plan, pts, ders).unwrap();
        assert!(matches!(
            weight_derivatives(&s, s2.as_ref()),
            Err(Error::Span {
                sample: 0,
                axis: 0,
                ..
            })
        ));
    }

    #[test]
    fn gradient_vanishes_at_sample_with_unit_weight() {
        let (e, s) = euclid_samples(2);
        let g = bary_gradient(
            e.as_ref(),
            s.points(),
            &[0.0, 1.0, 0.0, 0.0],
            &s.points()[1],
        )
        .unwrap();
        assert_eq!(g.norm(), 0.0);
    }

    #[test]
    fn euclidean_gradient_formula() {
        let (e, s) = euclid_samples(2);
        let w = [0.1, 0.4, -0.2, 0.7];
        let q = ManifoldPoint::from_coords(vec![0.3, -0.8]);
        let g = bary_gradient(e.as_ref(), s.points(), &w, &q).unwrap();
        let mut want = vec![0.0; 2];
        for (p, wj) in s.points().iter().zip(w) {
            vecops::axpy(&mut want, wj, &vecops::sub(q.coords(), p.coords()));
        }
        assert!(vecops::dist(g.coords(), &want) < 1e-15);
    }

    #[test]
    fn symmetric_pair_on_sphere_has_zero_gradient_and_slerp_midpoint() {
        let s2 = Sphere::new();
        let a = 0.4f64;
        let p1 = ManifoldPoint::from_coords(vec![a.cos(), a.sin(), 0.0]);
        let p2 = ManifoldPoint::from_coords(vec![a.cos(), -a.sin(), 0.0]);
        let mid = ManifoldPoint::from_coords(vec![1.0, 0.0, 0.0]);
        let pts = [p1.clone(), p2];
        let g = bary_gradient(&s2, &pts, &[0.5, 0.5], &mid).unwrap();
        assert!(g.norm() < 1e-15);

        let out = bary_descent(&s2, &pts, &[0.5, 0.5], &p1, &DescentSettings::default()).unwrap();
        assert!(vecops::dist(out.point.coords(), mid.coords()) < 1e-8);
        assert_eq!(out.monotonicity_violations, 0);
    }

    #[test]
    fn unit_weight_descent_lands_on_sample_in_one_step() {
        let s2 = Sphere::new();
        let pts = [
            ManifoldPoint::from_coords(vec![1.0, 0.0, 0.0]),
            ManifoldPoint::from_coords(vec![0.0, 1.0, 0.0]),
            ManifoldPoint::from_coords(vec![0.0, 0.0, 1.0]),
        ];
        let out = bary_descent(
            &s2,
            &pts,
            &[0.0, 0.0, 1.0],
            &pts[0],
            &DescentSettings::default(),
        )
        .unwrap();
        assert!(out.iterations <= 1);
        assert!(vecops::dist(out.point.coords(), pts[2].coords()) < 1e-15);
    }

    #[test]
    fn euclidean_descent_is_affine_combination() {
        let (e, s) = euclid_samples(2);
        let w = [0.1, 0.4, -0.2, 0.7];
        let out = bary_descent(
            e.as_ref(),
            s.points(),
            &w,
            &s.points()[0],
            &DescentSettings::default(),
        )
        .unwrap();
        let mut want = vec![0.0; 2];
        for (p, wj) in s.points().iter().zip(w) {
            vecops::axpy(&mut want, wj, p.coords());
        }
        assert!(vecops::dist(out.point.coords(), &want) < 1e-8);
    }

    #[test]
    fn descent_reports_nonconvergence() {
        let s2 = Sphere::new();
        let pts = [
            ManifoldPoint::from_coords(vec![1.0, 0.0, 0.0]),
            ManifoldPoint::from_coords(vec![0.0, 1.0, 0.0]),
        ];
        let settings = DescentSettings {
            step: 1.0,
            tolerance: 0.0,
            max_iterations: 1,
        };
        let err = bary_descent(&s2, &pts, &[0.3, 0.7], &pts[0], &settings).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { iterations: 1, .. }));
    }

    #[test]
    fn model_interpolates_and_updates_warm_start() {
        let (e, s) = euclid_samples(3);
        let mut model = bhi_build(s.clone(), e, &[0.5, 0.5], DescentSettings::default()).unwrap();
        assert_eq!(model.warm_start(), &s.points()[0]);
        for l in 0..s.len() {
            let w = s.plan().location(l).to_vec();
            let q = model.query(&w).unwrap();
            assert!(vecops::dist(q.coords(), s.points()[l].coords()) < 1e-7);
            assert_eq!(model.warm_start(), &q);
        }
        let stateless = model.query_stateless(&[0.1, 0.2]).unwrap();
        let stateful = model.query(&[0.1, 0.2]).unwrap();
        assert!(vecops::dist(stateless.coords(), stateful.coords()) < 1e-7);
    }
}
