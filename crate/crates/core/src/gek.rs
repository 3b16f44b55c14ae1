//! Gradient-enhanced Kriging (GEK) of scalar functions with the cubic
//! correlation model at fixed hyperparameters.
//!
//! The augmented data vector of length `k(d+1)` is laid out in packs of `k`:
//! the `k` values first, then the `k` partial derivatives along axis 1, and so
//! on up to axis `d`. The augmented correlation matrix uses the same layout:
//!
//! ```text
//! R = [ rho(w_j, w_l)          d rho / d b_i (w_j, w_l)        ]
//!     [ d rho / d a_i (w_j,..)  d^2 rho / d a_i d b_i' (w_j, w_l) ]
//! ```
//!
//! A constant trend is estimated by generalized least squares against the
//! regressor that is 1 on value slots and 0 on derivative slots, which makes
//! the predictor reproduce constants exactly.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::vecops;

/// Diagonal regularization of the factorized augmented correlation matrix.
pub const NUGGET: f64 = 1e-10;

/// Upper bound on refinement sweeps of each solve against the matrix without
/// the nugget.
pub const MAX_REFINEMENT_STEPS: usize = 8;

/// Minimum infinity-norm gap between two sample locations.
const MIN_LOCATION_GAP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SamplePlan {
    locations: Vec<Vec<f64>>,
    dim: usize,
}

impl SamplePlan {
    pub fn new(locations: Vec<Vec<f64>>) -> Result<Self> {
        let dim = match locations.first() {
            Some(first) if !first.is_empty() => first.len(),
            _ => return Err(Error::InvalidInput("sample plan is empty".into())),
        };
        for (j, w) in locations.iter().enumerate() {
            if w.len() != dim {
                return Err(Error::InvalidInput(format!(
                    "location {j} has dimension {}, expected {dim}",
                    w.len()
                )));
            }
            if w.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput(format!("location {j} is not finite")));
            }
        }
        for a in 0..locations.len() {
            for b in a + 1..locations.len() {
                let gap = locations[a]
                    .iter()
                    .zip(&locations[b])
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max);
                if gap <= MIN_LOCATION_GAP {
                    return Err(Error::InvalidInput(format!(
                        "sample locations {a} and {b} coincide"
                    )));
                }
            }
        }
        Ok(Self { locations, dim })
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn location(&self, j: usize) -> &[f64] {
        &self.locations[j]
    }

    pub fn locations(&self) -> &[Vec<f64>] {
        &self.locations
    }
}

/// Values `y_j` and gradients `g_{j,i}` of one scalar function at the plan.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteScalarData {
    pub values: Vec<f64>,
    /// `gradients[j][i]` is the partial along axis `i` at location `j`.
    pub gradients: Vec<Vec<f64>>,
}

impl HermiteScalarData {
    pub fn new(values: Vec<f64>, gradients: Vec<Vec<f64>>) -> Self {
        Self { values, gradients }
    }

    /// Data vector in the augmented (pack) layout.
    fn augmented(&self, plan: &SamplePlan) -> Result<DVector<f64>> {
        let (k, d) = (plan.len(), plan.dim());
        if self.values.len() != k
            || self.gradients.len() != k
            || self.gradients.iter().any(|g| g.len() != d)
        {
            return Err(Error::InvalidInput(format!(
                "Hermite data does not match a plan with k = {k}, d = {d}"
            )));
        }
        let mut y = DVector::zeros(k * (d + 1));
        for j in 0..k {
            y[j] = self.values[j];
            for i in 0..d {
                y[k * (1 + i) + j] = self.gradients[j][i];
            }
        }
        if y.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("Hermite data is not finite".into()));
        }
        Ok(y)
    }
}

/// Per-axis cubic factor and its first two derivatives in the difference `t`.
/// The second derivative takes the value from inside the support at `theta |t| = 1`.
#[inline]
fn axis_factor(theta: f64, t: f64) -> (f64, f64, f64) {
    let u = theta * t.abs();
    let h = if u < 1.0 {
        1.0 - 3.0 * u * u + 2.0 * u * u * u
    } else {
        0.0
    };
    let h1 = if u < 1.0 {
        -6.0 * theta * theta * t + 6.0 * theta * theta * theta * t * t.abs()
    } else {
        0.0
    };
    let h2 = if u <= 1.0 {
        -6.0 * theta * theta + 12.0 * theta * theta * theta * t.abs()
    } else {
        0.0
    };
    (h, h1, h2)
}

fn factors(theta: &[f64], a: &[f64], b: &[f64]) -> Vec<(f64, f64, f64)> {
    debug_assert!(theta.len() == a.len() && a.len() == b.len());
    theta
        .iter()
        .zip(a.iter().zip(b))
        .map(|(th, (x, y))| axis_factor(*th, x - y))
        .collect()
}

fn product_except(f: &[(f64, f64, f64)], skip: &[usize]) -> f64 {
    f.iter()
        .enumerate()
        .filter(|(l, _)| !skip.contains(l))
        .map(|(_, v)| v.0)
        .product()
}

/// Product cubic correlation `prod_l rho_l(theta_l, a_l - b_l)`.
pub fn cubic_corr(theta: &[f64], a: &[f64], b: &[f64]) -> f64 {
    factors(theta, a, b).iter().map(|f| f.0).product()
}

/// Gradient of [`cubic_corr`] with respect to `b`.
pub fn cubic_corr_d1(theta: &[f64], a: &[f64], b: &[f64]) -> Vec<f64> {
    let f = factors(theta, a, b);
    (0..f.len())
        .map(|i| -f[i].1 * product_except(&f, &[i]))
        .collect()
}

/// Mixed second derivative `d^2 rho / (d a_i d b_j)`, row `i`, column `j`.
pub fn cubic_corr_d2(theta: &[f64], a: &[f64], b: &[f64]) -> Vec<Vec<f64>> {
    let f = factors(theta, a, b);
    let d = f.len();
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    if i == j {
                        -f[i].2 * product_except(&f, &[i])
                    } else {
                        -f[i].1 * f[j].1 * product_except(&f, &[i, j])
                    }
                })
                .collect()
        })
        .collect()
}

/// Factorized augmented correlation matrix for one plan and `theta`.
///
/// Every scalar model fitted on the same plan shares one system.
#[derive(Debug)]
pub struct GekSystem {
    plan: SamplePlan,
    theta: Vec<f64>,
    /// Augmented correlation matrix without the nugget.
    matrix: DMatrix<f64>,
    /// Cholesky factor of `matrix + NUGGET * I`.
    chol: nalgebra::linalg::Cholesky<f64, nalgebra::Dyn>,
    /// `F^T R^{-1} F`
    f_rinv_f: f64,
}

/// Assembles the augmented correlation matrix without the nugget.
pub fn augmented_correlation(plan: &SamplePlan, theta: &[f64]) -> DMatrix<f64> {
    let (k, d) = (plan.len(), plan.dim());
    let n = k * (d + 1);
    let mut r = DMatrix::zeros(n, n);
    for j in 0..k {
        for l in 0..k {
            let (a, b) = (plan.location(j), plan.location(l));
            r[(j, l)] = cubic_corr(theta, a, b);
            let d1 = cubic_corr_d1(theta, a, b);
            let d2 = cubic_corr_d2(theta, a, b);
            for i in 0..d {
                // value(j) vs gradient(l, i)
                r[(j, k * (1 + i) + l)] = d1[i];
                // gradient(j, i) vs value(l): d/da_i = -d/db_i
                r[(k * (1 + i) + j, l)] = -d1[i];
                for i2 in 0..d {
                    r[(k * (1 + i) + j, k * (1 + i2) + l)] = d2[i][i2];
                }
            }
        }
    }
    r
}

fn condition_estimate(m: &DMatrix<f64>) -> f64 {
    let sv = m.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// `b - matrix x` for symmetric `matrix`, rows accumulated with [`vecops::dot2`].
fn residual(matrix: &DMatrix<f64>, x: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    let neg: Vec<f64> = x.iter().map(|v| -v).collect();
    DVector::from_iterator(
        b.len(),
        matrix
            .column_iter()
            .zip(b.iter())
            .map(|(col, bi)| vecops::dot2(*bi, col.as_slice(), &neg)),
    )
}

/// Solves `matrix x = b` with the regularized factor, then refines against
/// `matrix` itself using compensated residuals. For SPD `matrix` with smallest
/// eigenvalue `lambda` each sweep shrinks the error by
/// `NUGGET / (lambda + NUGGET)`; sweeps stop once the residual no longer
/// decreases.
fn refined_solve(
    matrix: &DMatrix<f64>,
    chol: &nalgebra::linalg::Cholesky<f64, nalgebra::Dyn>,
    b: &DVector<f64>,
) -> DVector<f64> {
    let mut x = chol.solve(b);
    let mut res = residual(matrix, &x, b);
    let mut norm = res.norm();
    for _ in 0..MAX_REFINEMENT_STEPS {
        if norm == 0.0 {
            break;
        }
        let candidate = &x + chol.solve(&res);
        let next = residual(matrix, &candidate, b);
        let next_norm = next.norm();
        if !(next_norm < norm) {
            break;
        }
        x = candidate;
        res = next;
        norm = next_norm;
    }
    x
}

impl GekSystem {
    pub fn new(plan: SamplePlan, theta: &[f64]) -> Result<Arc<Self>> {
        if theta.len() != plan.dim() || theta.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(Error::InvalidInput(format!(
                "theta must hold {} positive finite values, got {theta:?}",
                plan.dim()
            )));
        }
        let (k, d) = (plan.len(), plan.dim());
        let matrix = augmented_correlation(&plan, theta);
        let mut r = matrix.clone();
        for i in 0..r.nrows() {
            r[(i, i)] += NUGGET;
        }
        let chol = match r.clone().cholesky() {
            Some(c) => c,
            None => {
                return Err(Error::Conditioning {
                    condition: condition_estimate(&r),
                })
            }
        };
        let mut f = DVector::zeros(k * (d + 1));
        f.rows_mut(0, k).fill(1.0);
        let rinv_f = refined_solve(&matrix, &chol, &f);
        let f_rinv_f = f.dot(&rinv_f);
        if !(f_rinv_f.is_finite() && f_rinv_f > 0.0) {
            return Err(Error::Conditioning {
                condition: condition_estimate(&r),
            });
        }
        Ok(Arc::new(Self {
            plan,
            theta: theta.to_vec(),
            matrix,
            chol,
            f_rinv_f,
        }))
    }

    pub fn plan(&self) -> &SamplePlan {
        &self.plan
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Length of the augmented data vector, `k(d+1)`.
    pub fn augmented_len(&self) -> usize {
        self.plan.len() * (self.plan.dim() + 1)
    }

    pub fn fit(self: &Arc<Self>, data: &HermiteScalarData) -> Result<GekModel> {
        let y = data.augmented(&self.plan)?;
        let rinv_y = refined_solve(&self.matrix, &self.chol, &y);
        let k = self.plan.len();
        let trend = rinv_y.rows(0, k).sum() / self.f_rinv_f;
        // solving for the detrended data directly avoids cancellation in
        // rinv_y - rinv_f * trend
        let mut detrended = y;
        detrended.rows_mut(0, k).add_scalar_mut(-trend);
        let dual_weights = refined_solve(&self.matrix, &self.chol, &detrended);
        Ok(GekModel {
            system: Arc::clone(self),
            trend,
            dual_weights,
        })
    }

    /// Correlations of the prediction at `omega` with every augmented sample slot.
    pub fn cross_correlation(&self, omega: &[f64]) -> Vec<f64> {
        let (k, d) = (self.plan.len(), self.plan.dim());
        let mut r = vec![0.0; k * (d + 1)];
        for j in 0..k {
            let f = factors(&self.theta, omega, self.plan.location(j));
            r[j] = f.iter().map(|x| x.0).product();
            for i in 0..d {
                r[k * (1 + i) + j] = -f[i].1 * product_except(&f, &[i]);
            }
        }
        r
    }

    /// Derivative of [`Self::cross_correlation`] along `axis` of `omega`.
    pub fn cross_correlation_partial(&self, omega: &[f64], axis: usize) -> Vec<f64> {
        let (k, d) = (self.plan.len(), self.plan.dim());
        let mut r = vec![0.0; k * (d + 1)];
        for j in 0..k {
            let b = self.plan.location(j);
            r[j] = -cubic_corr_d1(&self.theta, omega, b)[axis];
            let d2 = cubic_corr_d2(&self.theta, omega, b);
            for i in 0..d {
                r[k * (1 + i) + j] = d2[axis][i];
            }
        }
        r
    }
}

/// One fitted scalar predictor `mu + r(w)^T weights`.
#[derive(Debug, Clone)]
pub struct GekModel {
    system: Arc<GekSystem>,
    trend: f64,
    dual_weights: DVector<f64>,
}

/// Fits a model on a fresh system. Prefer [`GekSystem::fit`] when several
/// models share one plan.
pub fn gek_build(plan: SamplePlan, data: &HermiteScalarData, theta: &[f64]) -> Result<GekModel> {
    GekSystem::new(plan, theta)?.fit(data)
}

impl GekModel {
    pub fn system(&self) -> &Arc<GekSystem> {
        &self.system
    }

    pub fn plan(&self) -> &SamplePlan {
        &self.system.plan
    }

    pub fn theta(&self) -> &[f64] {
        &self.system.theta
    }

    pub fn trend(&self) -> f64 {
        self.trend
    }

    pub fn dual_weights(&self) -> &[f64] {
        self.dual_weights.as_slice()
    }

    pub fn predict(&self, omega: &[f64]) -> f64 {
        self.predict_with(&self.system.cross_correlation(omega))
    }

    /// Prediction from a precomputed [`GekSystem::cross_correlation`] vector.
    #[inline]
    pub fn predict_with(&self, r: &[f64]) -> f64 {
        vecops::dot2(self.trend, r, self.dual_weights.as_slice())
    }

    pub fn predict_partial(&self, omega: &[f64], axis: usize) -> f64 {
        let r = self.system.cross_correlation_partial(omega, axis);
        vecops::dot2(0.0, &r, self.dual_weights.as_slice())
    }
}
