use super::SolverError;
use crate::algebra::{symmetric_eigen, AlgebraError, SquareMatrix};

/// Closed-form solution of the homogeneous eigenvalue flow
/// d′ = −(2/α)(d² − d), which every eigenvalue of MMᵀ follows.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxOdeSolution {
    pub d0: Vec<f64>,
    pub alpha: f64,
}

impl RelaxOdeSolution {
    pub fn new(d0: Vec<f64>, alpha: f64) -> Result<Self, SolverError> {
        if let Some(bad) = d0.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
            return Err(SolverError::InvalidParameter(format!("d0 > 0 required, got {bad}")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(SolverError::InvalidParameter(format!("alpha > 0 required, got {alpha}")));
        }
        Ok(Self { d0, alpha })
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let e = (-2.0 * t / self.alpha).exp();
        self.d0.iter().map(|&d| d / (e + d * (1.0 - e))).collect()
    }
}

pub fn relax_ode_exact(d0: &[f64], alpha: f64, t: f64) -> Result<Vec<f64>, SolverError> {
    if !(t >= 0.0) {
        return Err(SolverError::InvalidParameter(format!("t >= 0 required, got {t}")));
    }
    Ok(RelaxOdeSolution::new(d0.to_vec(), alpha)?.eval(t))
}

/// Exact solution of dM/dt = −(1/α)(MMᵀ − I)M.
///
/// With MMᵀ = U D₀ Uᵀ at t = 0 the solution is M(t) = U D(t)^{1/2} D₀^{-1/2} Uᵀ M₀.
pub fn relax_matrix_exact(m0: &SquareMatrix, alpha: f64, t: f64) -> Result<SquareMatrix, AlgebraError> {
    let det = m0.determinant();
    if !(det > 0.0) {
        return Err(AlgebraError::NonPositiveDeterminant { det });
    }
    let (d0, u) = symmetric_eigen(&(m0 * &m0.transpose()));
    if d0.iter().any(|d| !(*d > 0.0)) {
        return Err(AlgebraError::SingularInput);
    }
    let e = (-2.0 * t / alpha).exp();
    let scale: Vec<f64> = d0.iter().map(|&d| (1.0 / (e + d * (1.0 - e))).sqrt()).collect();
    let s = &(&u * &SquareMatrix::diagonal(&scale)) * &u.transpose();
    Ok(&s * m0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{polar_factor, Rotation};
    use proptest::prelude::*;

    #[test]
    fn fixed_point_and_ln2_value() {
        assert_eq!(relax_ode_exact(&[1.0], 0.7, 3.0).unwrap(), vec![1.0]);
        let d = relax_ode_exact(&[2.0, 0.25], 1.0, 2f64.ln()).unwrap();
        assert!((d[0] - 8.0 / 7.0).abs() < 1e-15);
        assert!((d[1] - 0.25 / (0.25 + 0.25 * 0.75)).abs() < 1e-15);
        let late = relax_ode_exact(&[5.0, 0.01], 1.0, 40.0).unwrap();
        assert!(late.iter().all(|x| (x - 1.0).abs() < 1e-12));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(relax_ode_exact(&[0.0], 1.0, 1.0).is_err());
        assert!(relax_ode_exact(&[1.0], -1.0, 1.0).is_err());
        assert!(relax_ode_exact(&[1.0], 1.0, -1.0).is_err());
        let flip = SquareMatrix::diagonal(&[1.0, -1.0]);
        assert!(matches!(relax_matrix_exact(&flip, 1.0, 1.0), Err(AlgebraError::NonPositiveDeterminant { .. })));
    }

    #[test]
    fn rotation_is_fixed() {
        let r = Rotation::from_axis_angle([0.1, 0.5, -0.3]).into_matrix();
        assert!((&relax_matrix_exact(&r, 0.1, 2.0).unwrap() - &r).max_abs() < 1e-14);
    }

    #[test]
    fn diagonal_case() {
        let m0 = SquareMatrix::diagonal(&[2.0, 0.5]);
        let t = 0.3;
        let m = relax_matrix_exact(&m0, 1.0, t).unwrap();
        let d = relax_ode_exact(&[4.0, 0.25], 1.0, t).unwrap();
        assert!((m[(0, 0)] - d[0].sqrt()).abs() < 1e-14);
        assert!((m[(1, 1)] - d[1].sqrt()).abs() < 1e-14);
        assert!(m[(0, 1)].abs() < 1e-15 && m[(1, 0)].abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn monotone_approach(d0 in 0.01..10.0f64, t1 in 0.0..3.0f64, dt in 0.0..3.0f64) {
            let a = relax_ode_exact(&[d0], 1.0, t1).unwrap()[0];
            let b = relax_ode_exact(&[d0], 1.0, t1 + dt).unwrap()[0];
            prop_assert!(a > 0.0 && b > 0.0);
            prop_assert!((b - 1.0).abs() <= (a - 1.0).abs() + 1e-15);
        }

        #[test]
        fn long_time_limit_is_polar_factor(v in prop::collection::vec(-2.0..2.0f64, 9)) {
            let mut m0 = SquareMatrix::from_row_slice(3, &v).unwrap();
            prop_assume!(m0.determinant().abs() > 0.05);
            if m0.determinant() < 0.0 {
                m0 = m0.scale(-1.0);
            }
            let limit = relax_matrix_exact(&m0, 1.0, 30.0).unwrap();
            let p = polar_factor(&m0).unwrap();
            prop_assert!((&limit - p.matrix()).max_abs() < 1e-10);
        }
    }
}
