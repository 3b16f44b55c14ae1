//! Tangent-space Hermite interpolation (THI).
//!
//! All sample points and derivatives are moved into the tangent space at one
//! base point `q0`, a vector-space Hermite interpolant is formed there from
//! `k(d+1)` scalar coefficient functions, and the result is mapped back with
//! `Exp_{q0}`.

use std::sync::Arc;

use crate::bhi::{bary_descent, DescentSettings, HermiteSampleSet};
use crate::error::{Error, Result};
use crate::gek::{gek_build, GekModel, HermiteScalarData};
use crate::manifold::{dlog_fd, Manifold, ManifoldPoint, TangentVector};
use crate::vecops;

/// How the tangent-space base point is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseRule {
    /// The sample point with this zero-based index.
    SampleIndex(usize),
    /// The uniformly weighted Riemannian barycenter of the samples.
    Barycenter,
}

pub fn choose_base(
    samples: &HermiteSampleSet,
    manifold: &dyn Manifold,
    rule: BaseRule,
    settings: &DescentSettings,
) -> Result<ManifoldPoint> {
    match rule {
        BaseRule::SampleIndex(j) => samples.points().get(j).cloned().ok_or_else(|| {
            Error::InvalidInput(format!(
                "base sample index {j} out of range for {} samples",
                samples.len()
            ))
        }),
        BaseRule::Barycenter => {
            let k = samples.len();
            let weights = vec![1.0 / k as f64; k];
            let out = bary_descent(
                manifold,
                samples.points(),
                &weights,
                &samples.points()[0],
                settings,
            )?;
            Ok(out.point)
        }
    }
}

#[derive(Debug, Clone)]
pub struct ThiModel {
    manifold: Arc<dyn Manifold>,
    base: ManifoldPoint,
    /// `Log_{q0}(p_j)`
    mapped: Vec<TangentVector>,
    /// `transported[l][i]` approximates `d(Log_{q0})_{p_l}[v_l^i]`.
    transported: Vec<Vec<TangentVector>>,
    phi: Vec<GekModel>,
    /// `psi[i][l]`
    psi: Vec<Vec<GekModel>>,
    /// `sum_m mu_m a_m` over all coefficient models `m` with tangent data `a_m`.
    offset: Vec<f64>,
    /// Row-major `N x k(d+1)` matrix `sum_m a_m w_m^T` of stacked dual weights.
    combined: Vec<f64>,
    dt: f64,
}

pub fn thi_build(
    samples: &HermiteSampleSet,
    manifold: Arc<dyn Manifold>,
    rule: BaseRule,
    theta: &[f64],
    dt: f64,
    settings: &DescentSettings,
) -> Result<ThiModel> {
    let base = choose_base(samples, manifold.as_ref(), rule, settings)?;
    let (k, d) = (samples.len(), samples.plan().dim());

    let mapped = samples
        .points()
        .iter()
        .map(|p| manifold.log(&base, p))
        .collect::<Result<Vec<_>>>()?;
    let transported = (0..k)
        .map(|l| {
            (0..d)
                .map(|i| dlog_fd(manifold.as_ref(), &base, samples.derivative(l, i), dt))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let plan = samples.plan();
    let unit = |j: usize| -> Vec<f64> { (0..k).map(|l| if l == j { 1.0 } else { 0.0 }).collect() };
    let phi = (0..k)
        .map(|j| {
            gek_build(
                plan.clone(),
                &HermiteScalarData::new(unit(j), vec![vec![0.0; d]; k]),
                theta,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let psi = (0..d)
        .map(|i| {
            (0..k)
                .map(|l| {
                    let gradients = (0..k)
                        .map(|j| {
                            let mut g = vec![0.0; d];
                            if j == l {
                                g[i] = 1.0;
                            }
                            g
                        })
                        .collect();
                    gek_build(
                        plan.clone(),
                        &HermiteScalarData::new(vec![0.0; k], gradients),
                        theta,
                    )
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    // The tangent interpolant is linear in the coefficient predictors, so
    // fold every model into one affine map of the correlation vector.
    let n = base.len();
    let width = phi[0].dual_weights().len();
    let mut offset = vec![0.0; n];
    let mut combined = vec![0.0; n * width];
    let moved = &transported;
    let terms = phi.iter().zip(&mapped).chain(
        psi.iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().enumerate().map(move |(l, m)| (m, &moved[l][i]))),
    );
    for (model, a) in terms {
        vecops::axpy(&mut offset, model.trend(), a.coords());
        for (row, a_r) in combined.chunks_exact_mut(width).zip(a.coords()) {
            vecops::axpy(row, *a_r, model.dual_weights());
        }
    }

    Ok(ThiModel {
        manifold,
        base,
        mapped,
        transported,
        phi,
        psi,
        offset,
        combined,
        dt,
    })
}

impl ThiModel {
    pub fn base(&self) -> &ManifoldPoint {
        &self.base
    }

    pub fn mapped_points(&self) -> &[TangentVector] {
        &self.mapped
    }

    pub fn transported(&self, sample: usize, axis: usize) -> &TangentVector {
        &self.transported[sample][axis]
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn manifold(&self) -> &Arc<dyn Manifold> {
        &self.manifold
    }

    /// Number of scalar coefficient functions, `k(d+1)`.
    pub fn coefficient_model_count(&self) -> usize {
        self.phi.len() + self.psi.iter().map(Vec::len).sum::<usize>()
    }

    pub fn phi_models(&self) -> &[GekModel] {
        &self.phi
    }

    pub fn psi_model(&self, axis: usize, sample: usize) -> &GekModel {
        &self.psi[axis][sample]
    }

    /// `sum_j phi_j(w) w_j + sum_i sum_l psi_{i,l}(w) v_l^i` in `T_{q0} M`.
    pub fn tangent_interpolant(&self, omega: &[f64]) -> Result<TangentVector> {
        let d = self.psi.len();
        if omega.len() != d {
            return Err(Error::InvalidInput(format!(
                "query has dimension {}, expected {d}",
                omega.len()
            )));
        }
        // all coefficient models share plan and theta, hence r(w)
        let r = self.phi[0].system().cross_correlation(omega);
        let width = r.len();
        let acc: Vec<f64> = self
            .offset
            .iter()
            .zip(self.combined.chunks_exact(width))
            .map(|(o, row)| o + vecops::dot(row, &r))
            .collect();
        Ok(self.manifold.project_tangent(&self.base, &acc))
    }

    pub fn query(&self, omega: &[f64]) -> Result<ManifoldPoint> {
        let v = self.tangent_interpolant(omega)?;
        let p = self.manifold.exp(&v)?;
        Ok(self.manifold.project_point(p.coords()))
    }
}
