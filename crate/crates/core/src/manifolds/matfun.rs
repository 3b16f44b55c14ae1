//! Small dense matrix functions: exponential, rotation logarithm and the
//! Fréchet derivative of the exponential.

use nalgebra::{DMatrix, Matrix3, Vector3};

use crate::error::{Error, Result};

/// Coefficients of the degree-13 diagonal Padé approximant to `exp`.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Largest 1-norm for which the unscaled degree-13 approximant is accurate to
/// unit roundoff.
const THETA13: f64 = 5.371920351148152;

/// Rotation angles below this use the Taylor branch of `theta / sin(theta)`.
const SMALL_ANGLE: f64 = 1e-4;

/// Threshold on `trace + 1` marking the excluded eigenvalue `-1`.
const ANGLE_PI_TOL: f64 = 1e-10;

fn one_norm(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with the order-13 Padé approximant.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    assert!(a.is_square(), "expm needs a square matrix");
    let n = a.nrows();
    let norm = one_norm(a);
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a * 2f64.powi(-squarings);

    let ident = DMatrix::<f64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &PADE13;

    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9])
        + &a6 * b[7]
        + &a4 * b[5]
        + &a2 * b[3]
        + &ident * b[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8])
        + &a6 * b[6]
        + &a4 * b[4]
        + &a2 * b[2]
        + &ident * b[0];

    let denom = &v - &u;
    let numer = &v + &u;
    let mut r = denom
        .lu()
        .solve(&numer)
        .expect("Padé denominator is nonsingular for finite input");
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

/// Fréchet derivative `d(exp)(X)[E]` read off the upper-right block of
/// `exp([[X, E], [0, X]])`.
pub fn expm_frechet(x: &Matrix3<f64>, e: &Matrix3<f64>) -> Matrix3<f64> {
    let mut block = DMatrix::<f64>::zeros(6, 6);
    block.view_mut((0, 0), (3, 3)).copy_from(x);
    block.view_mut((3, 3), (3, 3)).copy_from(x);
    block.view_mut((0, 3), (3, 3)).copy_from(e);
    let big = expm(&block);
    big.fixed_view::<3, 3>(0, 3).into_owned()
}

pub fn expm3(x: &Matrix3<f64>) -> Matrix3<f64> {
    let d = DMatrix::from_column_slice(3, 3, x.as_slice());
    Matrix3::from_column_slice(expm(&d).as_slice())
}

pub fn hat(w: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

/// Axial vector of the skew part of `m`.
pub fn vee(m: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(
        0.5 * (m[(2, 1)] - m[(1, 2)]),
        0.5 * (m[(0, 2)] - m[(2, 0)]),
        0.5 * (m[(1, 0)] - m[(0, 1)]),
    )
}

pub fn skew_part(m: &Matrix3<f64>) -> Matrix3<f64> {
    (m - m.transpose()) * 0.5
}

/// Closed-form exponential of a skew-symmetric 3x3 matrix.
pub fn rodrigues(s: &Matrix3<f64>) -> Matrix3<f64> {
    let w = vee(s);
    let theta2 = w.norm_squared();
    let theta = theta2.sqrt();
    let (a, b) = if theta < 1e-6 {
        (
            1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0,
            0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0,
        )
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / theta2)
    };
    let k = hat(&w);
    Matrix3::identity() + k * a + k * k * b
}

/// Principal logarithm of a rotation matrix with angle `< pi`.
pub fn logm_rotation(r: &Matrix3<f64>) -> Result<Matrix3<f64>> {
    let trace = r.trace();
    if trace <= -1.0 + ANGLE_PI_TOL {
        return Err(Error::Domain(format!(
            "rotation angle is pi (trace {trace:.17}); -1 is an eigenvalue"
        )));
    }
    let cos = (0.5 * (trace - 1.0)).clamp(-1.0, 1.0);
    let w = vee(r);
    let sin = w.norm();
    let theta = sin.atan2(cos);

    if theta < SMALL_ANGLE {
        let t2 = theta * theta;
        let factor = 1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0;
        return Ok(hat(&w) * factor);
    }
    if cos > -0.5 {
        return Ok(hat(&w) * (theta / sin));
    }

    // Large angles: the skew part is small, so take the axis from the
    // symmetric part (1 - cos) n n^T and the sign from the skew part.
    let sym = (r + r.transpose()) * 0.5 - Matrix3::identity() * cos;
    let j = (0..3)
        .max_by(|&a, &b| sym[(a, a)].total_cmp(&sym[(b, b)]))
        .unwrap();
    let mut axis: Vector3<f64> = sym.column(j).into_owned();
    axis /= axis.norm();
    if axis.dot(&w) < 0.0 {
        axis = -axis;
    }
    Ok(hat(&axis) * theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, FRAC_PI_2, PI};

    fn max_abs(m: &DMatrix<f64>) -> f64 {
        m.iter().fold(0.0, |a, x| a.max(x.abs()))
    }

    #[test]
    fn expm_of_zero_is_identity() {
        let z = DMatrix::<f64>::zeros(3, 3);
        assert_eq!(expm(&z), DMatrix::identity(3, 3));
    }

    #[test]
    fn expm_diagonal() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0, 3.0]));
        let e = expm(&a);
        for (i, want) in [E, E * E, E * E * E].iter().enumerate() {
            assert!((e[(i, i)] - want).abs() <= 1e-13 * want);
        }
        assert!(e
            .iter()
            .enumerate()
            .all(|(idx, x)| idx % 4 == 0 || *x == 0.0));
    }

    #[test]
    fn expm_quarter_turn_about_z_matches_rodrigues() {
        let s = hat(&Vector3::new(0.0, 0.0, FRAC_PI_2));
        let want = Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        assert!((expm3(&s) - want).amax() < 1e-15);
        assert!((rodrigues(&s) - want).amax() < 1e-15);
    }

    #[test]
    fn expm_agrees_with_nalgebra_on_nonnormal_block() {
        // Independent implementation as cross-check.
        let a = DMatrix::from_row_slice(
            6,
            6,
            &[
                0.1, 2.0, -0.3, 0.5, 1.0, 0.0, //
                -1.0, 0.2, 0.7, 0.0, 0.4, 3.0, //
                0.3, -0.6, 0.0, 1.1, 0.0, -2.0, //
                0.0, 0.0, 0.0, 0.1, 2.0, -0.3, //
                0.0, 0.0, 0.0, -1.0, 0.2, 0.7, //
                0.0, 0.0, 0.0, 0.3, -0.6, 0.0,
            ],
        );
        let ours = expm(&a);
        let theirs = a.clone().exp();
        assert!(max_abs(&(ours - &theirs)) <= 1e-12 * max_abs(&theirs));
    }

    #[test]
    fn large_norm_uses_squaring() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 9.0, -9.0, 0.0]);
        let e = expm(&a);
        let (s, c) = 9f64.sin_cos();
        assert!((e[(0, 0)] - c).abs() < 1e-12 && (e[(0, 1)] - s).abs() < 1e-12);
    }

    #[test]
    fn logm_of_identity_is_zero() {
        assert_eq!(
            logm_rotation(&Matrix3::identity()).unwrap(),
            Matrix3::zeros()
        );
    }

    #[test]
    fn logm_round_trips_quarter_turn() {
        let r = Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        let s = logm_rotation(&r).unwrap();
        assert!((s + s.transpose()).amax() < 1e-15);
        assert!((s[(0, 1)] + FRAC_PI_2).abs() < 1e-15);
        assert!((expm3(&s) - r).amax() < 1e-10);
    }

    #[test]
    fn logm_rejects_half_turn() {
        let r = Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, -1.0));
        assert!(matches!(logm_rotation(&r), Err(Error::Domain(_))));
    }

    #[test]
    fn logm_large_and_small_angles() {
        let axis = Vector3::new(0.3, -0.5, 0.81).normalize();
        for theta in [1e-7, 5e-5, 2e-4, 1.0, 2.2, PI - 0.1, PI - 1e-3] {
            let s = hat(&(axis * theta));
            let back = logm_rotation(&rodrigues(&s)).unwrap();
            assert!((back - s).amax() < 1e-9, "theta = {theta}");
        }
    }

    #[test]
    fn frechet_special_directions() {
        let x = hat(&Vector3::new(0.4, -0.2, 0.9)) + Matrix3::identity() * 0.1;
        assert_eq!(expm_frechet(&x, &Matrix3::zeros()), Matrix3::zeros());

        let e = Matrix3::new(1.0, 2.0, 0.0, -0.5, 0.3, 0.2, 0.0, 0.1, -1.0);
        assert!((expm_frechet(&Matrix3::zeros(), &e) - e).amax() < 1e-14);

        let along = expm_frechet(&x, &x);
        assert!((along - expm3(&x) * x).amax() < 1e-13);
    }

    #[test]
    fn frechet_matches_central_differences() {
        let x = Matrix3::new(0.3, -1.2, 0.4, 0.9, 0.1, -0.7, -0.2, 0.8, -0.5);
        let e = Matrix3::new(-0.6, 0.2, 1.1, 0.0, 0.5, -0.3, 0.7, -0.9, 0.2);
        let t = 1e-5;
        let fd = (expm3(&(x + e * t)) - expm3(&(x - e * t))) / (2.0 * t);
        assert!((expm_frechet(&x, &e) - fd).amax() < 1e-8);
    }
}
