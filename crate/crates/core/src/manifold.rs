//! Abstract Riemannian manifold contract in extrinsic coordinates.
//!
//! Points and tangent vectors are stored as flat `f64` vectors of the ambient
//! dimension `N`. Tangent vectors carry their base point so that tangency can
//! be checked wherever a vector crosses an API boundary.

use std::fmt;

use crate::error::{Error, Result};
use crate::vecops;

/// Residual above which a point or tangent vector is rejected.
pub const CONSTRAINT_TOL: f64 = 1e-10;

/// Default finite-difference step used to transport derivatives through `d(Log)`.
pub const DEFAULT_DLOG_STEP: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifoldDescriptor {
    pub name: String,
    /// Length of extrinsic coordinate vectors.
    pub ambient_dim: usize,
    /// Manifold dimension `m`.
    pub intrinsic_dim: usize,
}

impl ManifoldDescriptor {
    pub fn new(name: impl Into<String>, ambient_dim: usize, intrinsic_dim: usize) -> Self {
        assert!(intrinsic_dim >= 1 && intrinsic_dim <= ambient_dim);
        Self {
            name: name.into(),
            ambient_dim,
            intrinsic_dim,
        }
    }
}

/// A point in extrinsic coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldPoint(Vec<f64>);

impl ManifoldPoint {
    /// Wraps raw coordinates without checking the manifold constraint.
    /// Use [`Manifold::point`] for a checked constructor.
    pub fn from_coords(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// An ambient-coordinate vector attached to a base point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: ManifoldPoint,
    coords: Vec<f64>,
}

impl TangentVector {
    /// Unchecked constructor; see [`Manifold::tangent`] for the checked one.
    pub fn from_parts(base: ManifoldPoint, coords: Vec<f64>) -> Self {
        debug_assert_eq!(base.len(), coords.len());
        Self { base, coords }
    }

    pub fn zero(base: ManifoldPoint) -> Self {
        let n = base.len();
        Self {
            base,
            coords: vec![0.0; n],
        }
    }

    pub fn base(&self) -> &ManifoldPoint {
        &self.base
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            base: self.base.clone(),
            coords: vecops::scale(&self.coords, s),
        }
    }

    /// Ambient Euclidean norm. All manifolds in this crate use the metric
    /// induced by the ambient inner product, so this is also the Riemannian norm.
    pub fn norm(&self) -> f64 {
        vecops::norm(&self.coords)
    }
}

/// Riemannian manifold embedded in `R^N`, addressed through its exponential
/// and logarithm maps.
///
/// Implementations must satisfy `exp(log(q, p)) == p` on the domain of `log`
/// and `dist(q, p) == |log(q, p)|`.
pub trait Manifold: Send + Sync + fmt::Debug {
    fn descriptor(&self) -> &ManifoldDescriptor;

    /// Constraint residual of raw coordinates (0 for a valid point).
    fn point_residual(&self, coords: &[f64]) -> f64;

    /// Tangency residual of `v` at `base` (0 for a tangent vector).
    fn tangent_residual(&self, base: &[f64], v: &[f64]) -> f64;

    /// Riemannian exponential at `v.base()`.
    fn exp(&self, v: &TangentVector) -> Result<ManifoldPoint>;

    /// Riemannian logarithm `Log_q(p)`.
    fn log(&self, q: &ManifoldPoint, p: &ManifoldPoint) -> Result<TangentVector>;

    /// Nearest point satisfying the constraint. Only meant to repair round-off.
    fn project_point(&self, coords: &[f64]) -> ManifoldPoint;

    /// Orthogonal projection of an ambient vector onto `T_base M`.
    fn project_tangent(&self, base: &ManifoldPoint, v: &[f64]) -> TangentVector;

    fn inner(&self, u: &TangentVector, v: &TangentVector) -> f64 {
        vecops::dot(u.coords(), v.coords())
    }

    fn dist(&self, q: &ManifoldPoint, p: &ManifoldPoint) -> Result<f64> {
        Ok(self.log(q, p)?.norm())
    }

    fn ambient_dim(&self) -> usize {
        self.descriptor().ambient_dim
    }

    fn intrinsic_dim(&self) -> usize {
        self.descriptor().intrinsic_dim
    }

    /// Checked point constructor.
    fn point(&self, coords: Vec<f64>) -> Result<ManifoldPoint> {
        self.check_len(coords.len())?;
        let residual = self.point_residual(&coords);
        if !(residual <= CONSTRAINT_TOL) {
            return Err(Error::NotOnManifold { residual });
        }
        Ok(ManifoldPoint(coords))
    }

    /// Checked tangent-vector constructor.
    fn tangent(&self, base: &ManifoldPoint, coords: Vec<f64>) -> Result<TangentVector> {
        self.check_len(coords.len())?;
        let residual = self.tangent_residual(base.coords(), &coords);
        if !(residual <= CONSTRAINT_TOL * vecops::norm(&coords).max(1.0)) {
            return Err(Error::Tangency { residual });
        }
        Ok(TangentVector::from_parts(base.clone(), coords))
    }

    fn check_len(&self, len: usize) -> Result<()> {
        let n = self.ambient_dim();
        if len != n {
            return Err(Error::InvalidInput(format!(
                "{}: expected {n} ambient coordinates, got {len}",
                self.descriptor().name
            )));
        }
        Ok(())
    }
}

/// Central-difference approximation of `d(Log_{q0})_p[v]`:
/// `[log_{q0}(exp_p(dt v)) - log_{q0}(exp_p(-dt v))] / (2 dt)`.
pub fn dlog_fd(
    manifold: &dyn Manifold,
    q0: &ManifoldPoint,
    v: &TangentVector,
    dt: f64,
) -> Result<TangentVector> {
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!(
            "dlog step must be positive, got {dt}"
        )));
    }
    let p = v.base();
    let log_at = |sign: f64| -> Result<TangentVector> {
        let moved = manifold.exp(&v.scaled(sign * dt))?;
        manifold.log(q0, &moved).map_err(|e| {
            Error::Domain(format!(
                "log at {:?} of exp_p(({sign})*dt*v) with p = {:?}: {e}",
                q0.coords(),
                p.coords()
            ))
        })
    };
    let forward = log_at(1.0)?;
    let backward = log_at(-1.0)?;
    let diff = vecops::sub(forward.coords(), backward.coords());
    Ok(TangentVector::from_parts(
        q0.clone(),
        vecops::scale(&diff, 0.5 / dt),
    ))
}

/// Central difference `[g(w + h e_i) - g(w - h e_i)] / (2h)` in ambient coordinates.
pub fn fd_partial<G>(g: G, omega: &[f64], axis: usize, h: f64) -> Result<Vec<f64>>
where
    G: Fn(&[f64]) -> Result<ManifoldPoint>,
{
    if axis >= omega.len() {
        return Err(Error::InvalidInput(format!(
            "axis {axis} out of range for a {}-dimensional parameter",
            omega.len()
        )));
    }
    let mut shifted = omega.to_vec();
    shifted[axis] = omega[axis] + h;
    let forward = g(&shifted)?;
    shifted[axis] = omega[axis] - h;
    let backward = g(&shifted)?;
    let diff = vecops::sub(forward.coords(), backward.coords());
    Ok(vecops::scale(&diff, 0.5 / h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::{Euclidean, Sphere};

    #[test]
    fn dlog_at_own_base_is_identity() {
        let s = Sphere::new();
        let q = s.point(vec![0.0, 0.6, 0.8]).unwrap();
        let v = s.tangent(&q, vec![0.3, 0.4, -0.3]).unwrap();
        let out = dlog_fd(&s, &q, &v, 1e-4).unwrap();
        assert!(vecops::dist(out.coords(), v.coords()) < 1e-8);
        assert_eq!(out.base(), &q);
    }

    #[test]
    fn dlog_is_exact_on_flat_space() {
        let e = Euclidean::new(3);
        let q0 = e.point(vec![1.0, -2.0, 0.5]).unwrap();
        let p = e.point(vec![0.2, 0.1, 3.0]).unwrap();
        let v = e.tangent(&p, vec![0.7, -1.1, 0.25]).unwrap();
        let out = dlog_fd(&e, &q0, &v, 1e-4).unwrap();
        assert!(vecops::dist(out.coords(), v.coords()) < 1e-11);
    }

    #[test]
    fn dlog_sphere_agrees_with_step_halving_oracle() {
        let s = Sphere::new();
        let q0 = s.point(vec![1.0, 0.0, 0.0]).unwrap();
        let p = s.point(vec![0.0, 1.0, 0.0]).unwrap();
        let v = s.tangent(&p, vec![0.0, 0.0, 0.1]).unwrap();
        let coarse = dlog_fd(&s, &q0, &v, 1e-4).unwrap();
        // Richardson on the O(dt^2) error: (4 D(dt/2) - D(dt)) / 3.
        let a = dlog_fd(&s, &q0, &v, 2e-3).unwrap();
        let b = dlog_fd(&s, &q0, &v, 1e-3).unwrap();
        let oracle: Vec<f64> = a
            .coords()
            .iter()
            .zip(b.coords())
            .map(|(x, y)| (4.0 * y - x) / 3.0)
            .collect();
        let fine = dlog_fd(&s, &q0, &v, 1e-6).unwrap();
        assert!(vecops::dist(coarse.coords(), oracle.as_slice()) < 1e-7);
        assert!(vecops::dist(coarse.coords(), fine.coords()) < 1e-7);
    }

    #[test]
    fn dlog_reports_antipodal_pair() {
        let s = Sphere::new();
        let q0 = s.point(vec![1.0, 0.0, 0.0]).unwrap();
        let p = s.point(vec![-1.0, 0.0, 0.0]).unwrap();
        let v = TangentVector::zero(p);
        match dlog_fd(&s, &q0, &v, 1e-4) {
            Err(Error::Domain(msg)) => assert!(msg.contains("antipodal")),
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn fd_partial_of_constant_and_affine_maps() {
        let c = |_: &[f64]| Ok(ManifoldPoint::from_coords(vec![1.0, 2.0]));
        assert_eq!(fd_partial(c, &[0.3, 0.4], 1, 1e-3).unwrap(), vec![0.0, 0.0]);

        let affine = |w: &[f64]| {
            Ok(ManifoldPoint::from_coords(vec![
                2.0 * w[0] - 3.0 * w[1],
                0.5 * w[1] + 1.0,
            ]))
        };
        let d = fd_partial(affine, &[0.3, 0.4], 1, 1e-3).unwrap();
        assert!((d[0] + 3.0).abs() < 1e-12 && (d[1] - 0.5).abs() < 1e-12);
        assert!(fd_partial(affine, &[0.3, 0.4], 2, 1e-3).is_err());
    }

    #[test]
    fn checked_constructors_reject_bad_input() {
        let s = Sphere::new();
        assert!(matches!(
            s.point(vec![1.0, 1.0, 0.0]),
            Err(Error::NotOnManifold { .. })
        ));
        let q = s.point(vec![0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            s.tangent(&q, vec![0.0, 0.0, 0.5]),
            Err(Error::Tangency { .. })
        ));
        assert!(matches!(s.point(vec![1.0]), Err(Error::InvalidInput(_))));
    }
}
