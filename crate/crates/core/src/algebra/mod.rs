//! Dense linear algebra on small square matrices: wedge products, the
//! orthogonal factor of the polar decomposition, the exponential of
//! antisymmetric matrices and the projection onto the tangent space of SO(n).

mod eigen;
mod expm;
mod fields;
mod matrix;
mod polar;

use thiserror::Error;

pub use eigen::symmetric_eigen;
pub use expm::exp_antisym;
pub use fields::{rotation_generator, theta_div_theta, wedge_nabla, ThetaDivTheta};
pub use matrix::{SquareMatrix, Vector};
pub use polar::{polar_factor, polar_factor_eigen};

/// Tolerance on ‖ΘΘᵀ − I‖_F and |det Θ − 1| accepted for a rotation.
pub const ROTATION_TOL: f64 = 1e-10;
/// Tolerance on ‖A + Aᵀ‖_F accepted for an antisymmetric matrix.
pub const ANTISYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-positive determinant {det:e}")]
    NonPositiveDeterminant { det: f64 },
    #[error("polar decomposition did not converge (input too ill-conditioned)")]
    SingularInput,
    #[error("matrix is not a rotation: |ΘΘᵀ - I| = {orthogonality:e}, det = {det}")]
    NotRotation { orthogonality: f64, det: f64 },
    #[error("matrix is not antisymmetric: |A + Aᵀ| = {defect:e}")]
    NotAntisymmetric { defect: f64 },
}

/// An element of SO(n), validated to [`ROTATION_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct Rotation(SquareMatrix);

impl Rotation {
    pub fn new(m: SquareMatrix) -> Result<Self, AlgebraError> {
        let orthogonality = m.orthogonality_defect();
        let det = m.determinant();
        if orthogonality <= ROTATION_TOL && (det - 1.0).abs() <= ROTATION_TOL {
            Ok(Self(m))
        } else {
            Err(AlgebraError::NotRotation { orthogonality, det })
        }
    }

    pub fn identity(n: usize) -> Self {
        Self(SquareMatrix::identity(n))
    }

    /// Planar rotation by `angle` (counter-clockwise).
    pub fn planar(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self(SquareMatrix::from_row_slice(2, &[c, -s, s, c]).expect("2x2"))
    }

    /// Rotation by |w| about the axis w (n = 3).
    pub fn from_axis_angle(w: [f64; 3]) -> Self {
        let a = SquareMatrix::from_row_slice(3, &[0.0, -w[2], w[1], w[2], 0.0, -w[0], -w[1], w[0], 0.0])
            .expect("3x3");
        exp_antisym(&AntisymmetricMatrix(a))
    }

    pub(crate) fn new_unchecked(m: SquareMatrix) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> SquareMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn compose(&self, other: &Rotation) -> Self {
        Self(&self.0 * &other.0)
    }
}

/// An element of the Lie algebra 𝒜 of antisymmetric matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct AntisymmetricMatrix(SquareMatrix);

impl AntisymmetricMatrix {
    pub fn new(m: SquareMatrix) -> Result<Self, AlgebraError> {
        let defect = m.antisymmetry_defect();
        if defect <= ANTISYMMETRY_TOL {
            Ok(Self(m))
        } else {
            Err(AlgebraError::NotAntisymmetric { defect })
        }
    }

    /// Antisymmetric part of an arbitrary matrix.
    pub fn skew_part(m: &SquareMatrix) -> Self {
        Self(m.skew())
    }

    pub fn zeros(n: usize) -> Self {
        Self(SquareMatrix::zeros(n))
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> SquareMatrix {
        self.0
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.scale(s))
    }
}

/// X ∧ Y, the antisymmetric matrix with entries XᵢYⱼ − XⱼYᵢ.
pub fn wedge_vectors(x: &[f64], y: &[f64]) -> Result<AntisymmetricMatrix, AlgebraError> {
    if x.len() != y.len() {
        return Err(AlgebraError::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(AntisymmetricMatrix(wedge(x, y)))
}

#[inline]
pub(crate) fn wedge(x: &[f64], y: &[f64]) -> SquareMatrix {
    SquareMatrix::from_fn(x.len(), |i, j| x[i] * y[j] - x[j] * y[i])
}

/// Orthogonal projection of `x` onto T_Θ SO(n) = 𝒜Θ: ((XΘᵀ − ΘXᵀ)/2) Θ.
pub fn tangent_project(theta: &Rotation, x: &SquareMatrix) -> SquareMatrix {
    tangent_project_raw(theta.matrix(), x)
}

#[inline]
pub(crate) fn tangent_project_raw(theta: &SquareMatrix, x: &SquareMatrix) -> SquareMatrix {
    &(x * &theta.transpose()).skew() * theta
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vec3() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0..10.0f64, 3)
    }

    #[test]
    fn wedge_of_basis_vectors() {
        let w = wedge_vectors(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]).unwrap();
        let expected = SquareMatrix::from_row_slice(3, &[0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(w.matrix(), &expected);
    }

    #[test]
    fn wedge_entry_arithmetic() {
        let w = wedge_vectors(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!(w.matrix()[(0, 1)], -2.0);
        assert_eq!(w.matrix()[(1, 0)], 2.0);
    }

    #[test]
    fn wedge_dimension_mismatch() {
        assert!(matches!(
            wedge_vectors(&[1.0, 2.0], &[1.0, 2.0, 3.0]),
            Err(AlgebraError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn tangent_projection_fixed_points() {
        let id = Rotation::identity(3);
        let s = SquareMatrix::from_row_slice(3, &[1.0, 2.0, 3.0, 2.0, 5.0, 6.0, 3.0, 6.0, 9.0]).unwrap();
        assert!(tangent_project(&id, &s).max_abs() == 0.0);
        let a = wedge(&[1.0, -2.0, 0.5], &[0.3, 0.2, 4.0]);
        assert!((&tangent_project(&id, &a) - &a).max_abs() < 1e-15);
    }

    #[test]
    fn tangent_projection_planar() {
        let theta = Rotation::planar(30f64.to_radians());
        let x = SquareMatrix::diagonal(&[1.0, 2.0]);
        let p = tangent_project(&theta, &x);
        // skew(XΘᵀ) for X = diag(1,2), Θ = R(30°): XΘᵀ = [[c, s], [-2s, 2c]]
        let s = 30f64.to_radians().sin();
        let w = 0.5 * (s + 2.0 * s);
        let expected = &SquareMatrix::from_row_slice(2, &[0.0, w, -w, 0.0]).unwrap() * theta.matrix();
        assert!((&p - &expected).max_abs() < 1e-15);
        assert!((&p * &theta.matrix().transpose()).antisymmetry_defect() < 1e-12);
    }

    proptest! {
        #[test]
        fn wedge_is_antisymmetric(x in vec3(), y in vec3()) {
            let a = wedge_vectors(&x, &y).unwrap().into_matrix();
            let b = wedge_vectors(&y, &x).unwrap().into_matrix();
            prop_assert!((&a + &b).max_abs() == 0.0);
            prop_assert!(wedge_vectors(&x, &x).unwrap().matrix().max_abs() == 0.0);
        }

        #[test]
        fn wedge_acting_on_vector(x in vec3(), y in vec3(), z in vec3()) {
            let lhs = wedge(&x, &y).mul_vec(&z);
            let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
            let (yz, xz) = (dot(&y, &z), dot(&x, &z));
            for i in 0..3 {
                let rhs = yz * x[i] - xz * y[i];
                let scale = dot(&x, &x).sqrt() * dot(&y, &y).sqrt() * dot(&z, &z).sqrt();
                prop_assert!((lhs[i] - rhs).abs() <= 1e-13 * (1.0 + scale));
            }
        }

        #[test]
        fn wedge_is_bilinear(x in vec3(), y in vec3(), z in vec3(), a in -3.0..3.0f64) {
            let xz: Vec<f64> = x.iter().zip(&z).map(|(p, q)| a * p + q).collect();
            let lhs = wedge(&xz, &y);
            let mut rhs = wedge(&x, &y).scale(a);
            rhs.axpy(1.0, &wedge(&z, &y));
            prop_assert!((&lhs - &rhs).max_abs() < 1e-11);
        }
    }
}
