use crate::error::Result;
use crate::manifold::{Manifold, ManifoldDescriptor, ManifoldPoint, TangentVector};
use crate::vecops;

/// Flat `R^n`: `exp(q, v) = q + v`, `log(q, p) = p - q`.
#[derive(Debug, Clone)]
pub struct Euclidean {
    descriptor: ManifoldDescriptor,
}

impl Euclidean {
    pub fn new(n: usize) -> Self {
        Self {
            descriptor: ManifoldDescriptor::new("euclidean", n, n),
        }
    }
}

impl Manifold for Euclidean {
    fn descriptor(&self) -> &ManifoldDescriptor {
        &self.descriptor
    }

    fn point_residual(&self, coords: &[f64]) -> f64 {
        if coords.iter().all(|x| x.is_finite()) {
            0.0
        } else {
            f64::INFINITY
        }
    }

    fn tangent_residual(&self, _base: &[f64], _v: &[f64]) -> f64 {
        0.0
    }

    fn exp(&self, v: &TangentVector) -> Result<ManifoldPoint> {
        Ok(ManifoldPoint::from_coords(vecops::add(
            v.base().coords(),
            v.coords(),
        )))
    }

    fn log(&self, q: &ManifoldPoint, p: &ManifoldPoint) -> Result<TangentVector> {
        Ok(TangentVector::from_parts(
            q.clone(),
            vecops::sub(p.coords(), q.coords()),
        ))
    }

    fn project_point(&self, coords: &[f64]) -> ManifoldPoint {
        ManifoldPoint::from_coords(coords.to_vec())
    }

    fn project_tangent(&self, base: &ManifoldPoint, v: &[f64]) -> TangentVector {
        TangentVector::from_parts(base.clone(), v.to_vec())
    }

    fn dist(&self, q: &ManifoldPoint, p: &ManifoldPoint) -> Result<f64> {
        Ok(vecops::dist(q.coords(), p.coords()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_and_log_are_exact_affine_maps() {
        let e = Euclidean::new(2);
        let q = e.point(vec![0.1, -0.7]).unwrap();
        let p = e.point(vec![2.5, 3.25]).unwrap();
        let v = e.log(&q, &p).unwrap();
        assert_eq!(v.coords(), &[2.4, 3.25 + 0.7]);
        let v = e.tangent(&q, vec![1.0, 2.0]).unwrap();
        assert_eq!(e.exp(&v).unwrap().coords(), &[1.1, 2.0 - 0.7]);
    }
}
