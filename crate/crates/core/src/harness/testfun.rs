//! Analytic test functions with closed-form partial derivatives.

use std::f64::consts::PI;

use nalgebra::Matrix3;

use crate::manifold::{ManifoldPoint, TangentVector};
use crate::manifolds::mat_to_row_major;
use crate::manifolds::matfun::{expm3, expm_frechet};

/// Gauss map of the helicoid, `R^2 -> S^2`:
/// `(2 e^w1 cos w2, 2 e^w1 sin w2, e^{2 w1} - 1) / (e^{2 w1} + 1)`.
pub fn gauss_map(omega: &[f64]) -> ManifoldPoint {
    let (e, e2) = (omega[0].exp(), (2.0 * omega[0]).exp());
    let (s, c) = omega[1].sin_cos();
    let den = e2 + 1.0;
    ManifoldPoint::from_coords(vec![2.0 * e * c / den, 2.0 * e * s / den, (e2 - 1.0) / den])
}

pub fn gauss_map_partial(omega: &[f64], axis: usize) -> TangentVector {
    let (e, e2) = (omega[0].exp(), (2.0 * omega[0]).exp());
    let (s, c) = omega[1].sin_cos();
    let den = e2 + 1.0;
    let v = match axis {
        0 => {
            let a = -2.0 * e2 / (den * den);
            let b = 2.0 / den;
            vec![
                a * 2.0 * e * c + b * e * c,
                a * 2.0 * e * s + b * e * s,
                a * (e2 - 1.0) + b * e2,
            ]
        }
        1 => vec![-2.0 * e * s / den, 2.0 * e * c / den, 0.0],
        _ => panic!("the Gauss map has two inputs, got axis {axis}"),
    };
    TangentVector::from_parts(gauss_map(omega), v)
}

/// Skew generator of the SO(3) test function.
pub fn so3_generator(omega: &[f64]) -> Matrix3<f64> {
    let (w1, w2) = (omega[0], omega[1]);
    let a = w1 * w1 + 0.5 * w2;
    let b = w1 + w2 * w2;
    let c = (4.0 * PI * (w1 * w1 + w2 * w2)).sin();
    Matrix3::new(0.0, a, c, -a, 0.0, b, -c, -b, 0.0)
}

pub fn so3_generator_partial(omega: &[f64], axis: usize) -> Matrix3<f64> {
    let (w1, w2) = (omega[0], omega[1]);
    let cos = (4.0 * PI * (w1 * w1 + w2 * w2)).cos();
    let (da, db, dc) = match axis {
        0 => (2.0 * w1, 1.0, 8.0 * PI * w1 * cos),
        1 => (0.5, 2.0 * w2, 8.0 * PI * w2 * cos),
        _ => panic!("the SO(3) test function has two inputs, got axis {axis}"),
    };
    Matrix3::new(0.0, da, dc, -da, 0.0, db, -dc, -db, 0.0)
}

/// `w -> exp(X(w))`, flattened row-major.
pub fn so3_testfun(omega: &[f64]) -> ManifoldPoint {
    ManifoldPoint::from_coords(mat_to_row_major(&expm3(&so3_generator(omega))))
}

/// `d(exp)(X(w))[d_i X(w)]` via the block-triangular exponential.
pub fn so3_testfun_partial(omega: &[f64], axis: usize) -> TangentVector {
    let x = so3_generator(omega);
    let v = expm_frechet(&x, &so3_generator_partial(omega, axis));
    TangentVector::from_parts(so3_testfun(omega), mat_to_row_major(&v))
}

/// Saddle surface in R^3, `(w1, w2, w1^2 - w2^2 + w1 w2 / 2)`.
pub fn saddle(omega: &[f64]) -> ManifoldPoint {
    let (w1, w2) = (omega[0], omega[1]);
    ManifoldPoint::from_coords(vec![w1, w2, w1 * w1 - w2 * w2 + 0.5 * w1 * w2])
}

pub fn saddle_partial(omega: &[f64], axis: usize) -> TangentVector {
    let (w1, w2) = (omega[0], omega[1]);
    let v = match axis {
        0 => vec![1.0, 0.0, 2.0 * w1 + 0.5 * w2],
        1 => vec![0.0, 1.0, -2.0 * w2 + 0.5 * w1],
        _ => panic!("the saddle has two inputs, got axis {axis}"),
    };
    TangentVector::from_parts(saddle(omega), v)
}
