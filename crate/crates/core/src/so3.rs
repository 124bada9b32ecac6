//! Rotation-group and vector algebra primitives.
//!
//! Attitudes are stored as plain 3×3 matrices (global coordinates on SO(3)),
//! never as quaternions or Euler angles.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Orthonormality drift above which a rotation is re-projected onto SO(3).
pub const ORTHONORMAL_TOL: f64 = 1e-9;

const ZERO_TOL: f64 = 1e-12;

/// Skew-symmetric matrix with `hat(v) * w == v.cross(&w)`.
#[inline]
pub fn hat(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Inverse of [`hat`]; reads the three generators of a skew matrix.
#[inline]
pub fn vee(m: &Mat3) -> Vec3 {
    Vec3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)])
}

/// Rodrigues formula `I + sinθ û + (1 − cosθ) û²`.
///
/// The axis is normalized first. A zero axis is only accepted together with a
/// zero angle.
pub fn exp_so3(axis: &Vec3, angle: f64) -> Result<Rotation> {
    let n = axis.norm();
    if n < ZERO_TOL {
        if angle == 0.0 {
            return Ok(Rotation::identity());
        }
        return Err(Error::ZeroAxis);
    }
    let u = hat(&(axis / n));
    let m = Mat3::identity() + u * angle.sin() + u * u * (1.0 - angle.cos());
    Ok(Rotation(m))
}

/// Exponential of a rotation vector `w` (axis·angle). Never fails.
pub fn exp_vec(w: &Vec3) -> Rotation {
    let theta = w.norm();
    if theta < ZERO_TOL {
        // second-order series keeps the result orthonormal to O(θ³)
        let k = hat(w);
        return Rotation(Mat3::identity() + k + k * k * 0.5).normalized();
    }
    let u = hat(&(w / theta));
    Rotation(Mat3::identity() + u * theta.sin() + u * u * (1.0 - theta.cos()))
}

/// Rotation about a coordinate axis `e_k` (k = 0, 1, 2).
pub fn axis_rotation(k: usize, angle: f64) -> Rotation {
    let mut w = Vec3::zeros();
    w[k] = angle;
    exp_vec(&w)
}

/// Orthogonal projection `I − z zᵀ / ‖z‖²` removing the `z` component.
pub fn project(z: &Vec3) -> Result<Mat3> {
    let n2 = z.norm_squared();
    if n2.sqrt() <= ZERO_TOL {
        return Err(Error::ZeroVector);
    }
    Ok(Mat3::identity() - z * z.transpose() / n2)
}

/// Element-wise sign with `sgn(0) = 0`.
#[inline]
pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// A 3×3 rotation matrix kept on SO(3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(Mat3);

impl Default for Rotation {
    fn default() -> Self {
        Self::identity()
    }
}

impl Rotation {
    pub fn identity() -> Self {
        Self(Mat3::identity())
    }

    /// Wraps a matrix, re-orthonormalizing it when it has drifted off SO(3).
    ///
    /// Fails when the matrix is far from a rotation (determinant ≤ 0 or
    /// non-finite entries).
    pub fn from_matrix(m: Mat3) -> Result<Self> {
        if !m.iter().all(|x| x.is_finite()) {
            return Err(Error::NotARotation("non-finite entries".into()));
        }
        let det = m.determinant();
        if det <= 0.0 {
            return Err(Error::NotARotation(format!("determinant {det}")));
        }
        Ok(Self(m).normalized())
    }

    /// Wraps a matrix without any check. Callers guarantee orthonormality.
    pub fn from_matrix_unchecked(m: Mat3) -> Self {
        Self(m)
    }

    #[inline]
    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    #[inline]
    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    /// `‖RᵀR − I‖∞` (max absolute entry).
    pub fn orthonormality_error(&self) -> f64 {
        (self.0.transpose() * self.0 - Mat3::identity()).amax()
    }

    /// Gram–Schmidt on the columns if the drift exceeds [`ORTHONORMAL_TOL`].
    pub fn normalized(self) -> Self {
        if self.orthonormality_error() <= ORTHONORMAL_TOL {
            return self;
        }
        let c0 = self.0.column(0).normalize();
        let c1 = self.0.column(1) - c0 * c0.dot(&self.0.column(1));
        let c1 = c1.normalize();
        let c2 = c0.cross(&c1);
        Self(Mat3::from_columns(&[c0, c1, c2]))
    }

    /// Right-multiplies by `exp(ŵ)`: the body-frame update `R ← R exp(ŵ)`.
    pub fn right_exp(&self, w: &Vec3) -> Self {
        Self(self.0 * exp_vec(w).0).normalized()
    }

    pub fn compose(&self, other: &Rotation) -> Self {
        Self(self.0 * other.0)
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        self.0 * v
    }

    /// Row-major entries, as written to trajectory files.
    pub fn row_major(&self) -> [f64; 9] {
        let m = &self.0;
        [m[(0, 0)], m[(0, 1)], m[(0, 2)], m[(1, 0)], m[(1, 1)], m[(1, 2)], m[(2, 0)], m[(2, 1)], m[(2, 2)]]
    }
}

impl std::ops::Mul for Rotation {
    type Output = Rotation;
    fn mul(self, rhs: Rotation) -> Rotation {
        self.compose(&rhs)
    }
}

impl std::ops::Mul<Vec3> for &Rotation {
    type Output = Vec3;
    fn mul(self, rhs: Vec3) -> Vec3 {
        self.0 * rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn e(k: usize) -> Vec3 {
        let mut v = Vec3::zeros();
        v[k] = 1.0;
        v
    }

    #[test]
    fn hat_basis_and_display() {
        assert_relative_eq!(hat(&e(0)) * e(1), e(2));
        let m = hat(&Vec3::new(1.0, 2.0, 3.0));
        let expected = Mat3::new(0.0, -3.0, 2.0, 3.0, 0.0, -1.0, -2.0, 1.0, 0.0);
        assert_eq!(m, expected);
    }

    #[test]
    fn exp_special_cases() {
        assert_eq!(*exp_so3(&e(2), 0.0).unwrap().matrix(), Mat3::identity());
        let r = exp_so3(&e(2), PI / 2.0).unwrap();
        assert_relative_eq!(r.apply(&e(0)), e(1), epsilon = 1e-15);
        assert!(matches!(exp_so3(&Vec3::zeros(), 1.0), Err(Error::ZeroAxis)));
        assert!(exp_so3(&Vec3::zeros(), 0.0).is_ok());
    }

    #[test]
    fn project_cases() {
        let p = project(&e(1)).unwrap();
        assert_relative_eq!(p * Vec3::new(1.0, 2.0, 3.0), Vec3::new(1.0, 0.0, 3.0));
        assert_relative_eq!(project(&e(0)).unwrap(), Mat3::from_diagonal(&Vec3::new(0.0, 1.0, 1.0)));
        assert!(matches!(project(&Vec3::zeros()), Err(Error::ZeroVector)));
    }

    #[test]
    fn sgn_of_zero_is_zero() {
        assert_eq!(sgn(0.0), 0.0);
        assert_eq!(sgn(-0.0), 0.0);
        assert_eq!(sgn(-2.0), -1.0);
    }

    #[test]
    fn drift_is_repaired() {
        let mut m = *exp_vec(&Vec3::new(0.3, -0.2, 0.9)).matrix();
        m[(0, 1)] += 1e-6;
        let r = Rotation::from_matrix(m).unwrap();
        assert!(r.orthonormality_error() < 1e-14);
        assert!((r.matrix().determinant() - 1.0).abs() < 1e-12);
        assert!(Rotation::from_matrix(-Mat3::identity()).is_err());
    }

    fn vec3() -> impl Strategy<Value = Vec3> {
        (-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn hat_is_cross_and_vee_inverts(v in vec3(), w in vec3()) {
            prop_assert!((hat(&v) * w - v.cross(&w)).norm() < 1e-12);
            prop_assert!((hat(&v) * v).norm() < 1e-12);
            prop_assert_eq!(vee(&hat(&v)), v);
        }

        #[test]
        fn exp_is_rotation_and_inverse_pairs(u in vec3(), theta in -10.0..10.0f64) {
            prop_assume!(u.norm() > 1e-3);
            let r = exp_so3(&u, theta).unwrap();
            prop_assert!(r.orthonormality_error() <= 1e-9);
            prop_assert!((r.matrix().determinant() - 1.0).abs() <= 1e-9);
            let back = r * exp_so3(&u, -theta).unwrap();
            prop_assert!((back.matrix() - Mat3::identity()).amax() < 1e-12);
        }

        #[test]
        fn projection_is_idempotent_with_spectrum_011(z in vec3()) {
            prop_assume!(z.norm() > 1e-3);
            let p = project(&z).unwrap();
            prop_assert!((p * p - p).amax() < 1e-12);
            prop_assert!((p - p.transpose()).amax() < 1e-15);
            prop_assert!((p * z).norm() < 1e-12 * z.norm().max(1.0));
            let mut ev: Vec<f64> = p.symmetric_eigenvalues().iter().copied().collect();
            ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
            prop_assert!(ev[0].abs() < 1e-12 && (ev[1] - 1.0).abs() < 1e-12 && (ev[2] - 1.0).abs() < 1e-12);
        }

        #[test]
        fn hat_is_linear(a in vec3(), b in vec3(), s in -3.0..3.0f64) {
            prop_assert!((hat(&(a * s + b)) - (hat(&a) * s + hat(&b))).amax() < 1e-12);
        }
    }
}
