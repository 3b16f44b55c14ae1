use crate::error::{Error, Result};
use crate::manifold::{Manifold, ManifoldDescriptor, ManifoldPoint, TangentVector, CONSTRAINT_TOL};
use crate::vecops;

/// Below this norm `exp` returns its base point unchanged.
const EXP_SERIES_LIMIT: f64 = 1e-12;

/// Unit sphere S² ⊂ R³ with the round metric.
#[derive(Debug, Clone)]
pub struct Sphere {
    descriptor: ManifoldDescriptor,
}

impl Sphere {
    pub fn new() -> Self {
        Self {
            descriptor: ManifoldDescriptor::new("sphere", 3, 2),
        }
    }
}

impl Default for Sphere {
    fn default() -> Self {
        Self::new()
    }
}

impl Manifold for Sphere {
    fn descriptor(&self) -> &ManifoldDescriptor {
        &self.descriptor
    }

    fn point_residual(&self, coords: &[f64]) -> f64 {
        (vecops::norm(coords) - 1.0).abs()
    }

    fn tangent_residual(&self, base: &[f64], v: &[f64]) -> f64 {
        vecops::dot(base, v).abs()
    }

    /// `cos(|v|) q + sin(|v|) v / |v|`
    fn exp(&self, v: &TangentVector) -> Result<ManifoldPoint> {
        let q = v.base().coords();
        let residual = self.tangent_residual(q, v.coords());
        let nv = v.norm();
        if !(residual <= CONSTRAINT_TOL * nv.max(1.0)) {
            return Err(Error::Tangency { residual });
        }
        if nv < EXP_SERIES_LIMIT {
            return Ok(v.base().clone());
        }
        let (s, c) = nv.sin_cos();
        let out: Vec<f64> = q
            .iter()
            .zip(v.coords())
            .map(|(qi, vi)| c * qi + s * vi / nv)
            .collect();
        Ok(self.project_point(&out))
    }

    /// `arccos(<q,p>) (p - <q,p> q) / |p - <q,p> q|`, with the angle taken
    /// through `atan2` for accuracy near `p = q`.
    fn log(&self, q: &ManifoldPoint, p: &ManifoldPoint) -> Result<TangentVector> {
        let inner = vecops::dot(q.coords(), p.coords()).clamp(-1.0, 1.0);
        if inner <= -1.0 + CONSTRAINT_TOL {
            return Err(Error::Antipodal { inner });
        }
        let mut w = p.coords().to_vec();
        vecops::axpy(&mut w, -inner, q.coords());
        let nw = vecops::norm(&w);
        if nw == 0.0 {
            return Ok(TangentVector::zero(q.clone()));
        }
        let angle = nw.atan2(inner);
        Ok(TangentVector::from_parts(
            q.clone(),
            vecops::scale(&w, angle / nw),
        ))
    }

    fn project_point(&self, coords: &[f64]) -> ManifoldPoint {
        let n = vecops::norm(coords);
        ManifoldPoint::from_coords(vecops::scale(coords, 1.0 / n))
    }

    fn project_tangent(&self, base: &ManifoldPoint, v: &[f64]) -> TangentVector {
        let mut out = v.to_vec();
        vecops::axpy(&mut out, -vecops::dot(base.coords(), v), base.coords());
        TangentVector::from_parts(base.clone(), out)
    }

    fn dist(&self, q: &ManifoldPoint, p: &ManifoldPoint) -> Result<f64> {
        Ok(self.log(q, p)?.norm())
    }
}
