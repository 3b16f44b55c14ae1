use nalgebra::Matrix3;

use super::matfun::{logm_rotation, rodrigues, skew_part};
use crate::error::{Error, Result};
use crate::manifold::{Manifold, ManifoldDescriptor, ManifoldPoint, TangentVector, CONSTRAINT_TOL};

/// Rotation group SO(3) with the Frobenius (bi-invariant) metric.
///
/// Points are 3x3 matrices flattened row-major into length-9 vectors.
/// `Exp_Q(V) = Q exp(Q^T V)`, `Log_Q(R) = Q log(Q^T R)`.
#[derive(Debug, Clone)]
pub struct So3 {
    descriptor: ManifoldDescriptor,
}

impl So3 {
    pub fn new() -> Self {
        Self {
            descriptor: ManifoldDescriptor::new("so3", 9, 3),
        }
    }
}

impl Default for So3 {
    fn default() -> Self {
        Self::new()
    }
}

pub fn row_major_to_mat(v: &[f64]) -> Matrix3<f64> {
    Matrix3::from_row_slice(v)
}

pub fn mat_to_row_major(m: &Matrix3<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(9);
    for i in 0..3 {
        for j in 0..3 {
            out.push(m[(i, j)]);
        }
    }
    out
}

impl Manifold for So3 {
    fn descriptor(&self) -> &ManifoldDescriptor {
        &self.descriptor
    }

    fn point_residual(&self, coords: &[f64]) -> f64 {
        let q = row_major_to_mat(coords);
        let orth = (q.transpose() * q - Matrix3::identity()).amax();
        orth.max((q.determinant() - 1.0).abs())
    }

    fn tangent_residual(&self, base: &[f64], v: &[f64]) -> f64 {
        let s = row_major_to_mat(base).transpose() * row_major_to_mat(v);
        (s + s.transpose()).amax()
    }

    fn exp(&self, v: &TangentVector) -> Result<ManifoldPoint> {
        let q = row_major_to_mat(v.base().coords());
        let s = q.transpose() * row_major_to_mat(v.coords());
        let residual = (s + s.transpose()).amax();
        if !(residual <= CONSTRAINT_TOL * v.norm().max(1.0)) {
            return Err(Error::Tangency { residual });
        }
        if v.coords().iter().all(|x| *x == 0.0) {
            return Ok(v.base().clone());
        }
        Ok(ManifoldPoint::from_coords(mat_to_row_major(
            &(q * rodrigues(&skew_part(&s))),
        )))
    }

    fn log(&self, q: &ManifoldPoint, p: &ManifoldPoint) -> Result<TangentVector> {
        let qm = row_major_to_mat(q.coords());
        let rel = qm.transpose() * row_major_to_mat(p.coords());
        let s = logm_rotation(&rel)?;
        Ok(TangentVector::from_parts(
            q.clone(),
            mat_to_row_major(&(qm * s)),
        ))
    }

    /// Orthogonal polar factor, with the sign fixed so that `det = +1`.
    fn project_point(&self, coords: &[f64]) -> ManifoldPoint {
        let m = row_major_to_mat(coords);
        let svd = m.svd(true, true);
        let mut u = svd.u.expect("requested U");
        let vt = svd.v_t.expect("requested V^T");
        if (u * vt).determinant() < 0.0 {
            let min = (0..3)
                .min_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]))
                .unwrap();
            u.column_mut(min).neg_mut();
        }
        ManifoldPoint::from_coords(mat_to_row_major(&(u * vt)))
    }

    fn project_tangent(&self, base: &ManifoldPoint, v: &[f64]) -> TangentVector {
        let q = row_major_to_mat(base.coords());
        let s = skew_part(&(q.transpose() * row_major_to_mat(v)));
        TangentVector::from_parts(base.clone(), mat_to_row_major(&(q * s)))
    }
}
