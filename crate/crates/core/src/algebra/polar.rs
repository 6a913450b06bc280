use super::{symmetric_eigen, AlgebraError, Rotation, SquareMatrix, ROTATION_TOL};

const NEWTON_TOL: f64 = 1e-13;
const NEWTON_MAX_ITER: usize = 100;
/// Below this relative step size the Frobenius scaling is switched off so the
/// final iterations are plain Newton steps.
const SCALING_CUTOFF: f64 = 1e-2;

/// Orthogonal factor Θ of the polar decomposition M = SΘ (S symmetric
/// positive definite).
///
/// Uses the Newton iteration X ← (X + X⁻ᵀ)/2 with Frobenius-norm scaling in the
/// early iterations. If Newton fails to reach the tolerance the result is
/// recomputed from the eigendecomposition of MMᵀ.
pub fn polar_factor(m: &SquareMatrix) -> Result<Rotation, AlgebraError> {
    let det = m.determinant();
    if !(det > 0.0) {
        return Err(AlgebraError::NonPositiveDeterminant { det });
    }
    match newton(m) {
        Some(x) => Ok(Rotation::new_unchecked(x)),
        None => polar_factor_eigen(m),
    }
}

fn newton(m: &SquareMatrix) -> Option<SquareMatrix> {
    let mut x = m.clone();
    let mut scaled = true;
    for _ in 0..NEWTON_MAX_ITER {
        let inv_t = x.inverse()?.transpose();
        let gamma = if scaled {
            (inv_t.frobenius_norm() / x.frobenius_norm()).sqrt()
        } else {
            1.0
        };
        let mut next = x.scale(0.5 * gamma);
        next.axpy(0.5 / gamma, &inv_t);
        if !next.is_finite() {
            return None;
        }
        let step = (&next - &x).frobenius_norm() / next.frobenius_norm();
        x = next;
        if step < SCALING_CUTOFF {
            scaled = false;
        }
        if step <= NEWTON_TOL {
            break;
        }
    }
    let ok = x.orthogonality_defect() <= ROTATION_TOL && (x.determinant() - 1.0).abs() <= ROTATION_TOL;
    ok.then_some(x)
}

/// Polar factor from the eigendecomposition route: Θ = (MMᵀ)^{-1/2} M with
/// (MMᵀ)^{-1/2} = U D^{-1/2} Uᵀ.
pub fn polar_factor_eigen(m: &SquareMatrix) -> Result<Rotation, AlgebraError> {
    let det = m.determinant();
    if !(det > 0.0) {
        return Err(AlgebraError::NonPositiveDeterminant { det });
    }
    let q = m * &m.transpose();
    let (d, u) = symmetric_eigen(&q);
    let dmax = d.iter().cloned().fold(0.0, f64::max);
    if d.iter().any(|&di| !(di > dmax * 1e-28)) {
        return Err(AlgebraError::SingularInput);
    }
    let inv_sqrt: Vec<f64> = d.iter().map(|di| 1.0 / di.sqrt()).collect();
    let s_inv = &(&u * &SquareMatrix::diagonal(&inv_sqrt)) * &u.transpose();
    let theta = &s_inv * m;
    Rotation::new(theta).map_err(|_| AlgebraError::SingularInput)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    /// Independent oracle: U Vᵀ from the singular value decomposition.
    fn svd_polar(m: &SquareMatrix) -> SquareMatrix {
        let n = m.dim();
        let a = DMatrix::from_row_slice(n, n, m.as_slice());
        let svd = a.svd(true, true);
        let uvt = svd.u.unwrap() * svd.v_t.unwrap();
        SquareMatrix::from_fn(n, |i, j| uvt[(i, j)])
    }

    fn planar(deg: f64) -> SquareMatrix {
        Rotation::planar(deg.to_radians()).into_matrix()
    }

    #[test]
    fn identity_rotation_and_spd() {
        let id = SquareMatrix::identity(3);
        assert!((polar_factor(&id).unwrap().matrix() - &id).max_abs() < 1e-15);
        let r = planar(37.0);
        assert!((polar_factor(&r).unwrap().matrix() - &r).max_abs() < 1e-14);
        let spd = SquareMatrix::diagonal(&[2.0, 0.5]);
        assert!((polar_factor(&spd).unwrap().matrix() - &SquareMatrix::identity(2)).max_abs() < 1e-14);
    }

    #[test]
    fn stretched_rotation_matches_svd() {
        let m = &SquareMatrix::diagonal(&[2.0, 1.0]) * &planar(45.0);
        let oracle = svd_polar(&m);
        assert!((&oracle - &planar(45.0)).max_abs() < 1e-14);
        let theta = polar_factor(&m).unwrap();
        assert!((theta.matrix() - &oracle).max_abs() < 1e-13);
        let s = &m * &theta.matrix().transpose();
        assert!(s.antisymmetry_defect() < 1e-9 || (&s - &s.transpose()).max_abs() < 1e-10);
        let (evals, _) = symmetric_eigen(&s.sym());
        assert!(evals.iter().all(|&e| e > 0.0));
    }

    #[test]
    fn rejects_non_positive_determinant() {
        let reflect = SquareMatrix::diagonal(&[1.0, -1.0]);
        assert!(matches!(polar_factor(&reflect), Err(AlgebraError::NonPositiveDeterminant { .. })));
        assert!(matches!(
            polar_factor(&SquareMatrix::zeros(3)),
            Err(AlgebraError::NonPositiveDeterminant { .. })
        ));
    }

    #[test]
    fn eigen_route_agrees_with_newton() {
        let m = SquareMatrix::from_row_slice(3, &[1.2, 0.3, -0.4, 0.1, 0.9, 0.2, 0.5, -0.2, 1.4]).unwrap();
        let a = polar_factor(&m).unwrap();
        let b = polar_factor_eigen(&m).unwrap();
        assert!((a.matrix() - b.matrix()).max_abs() < 1e-12);
    }

    fn positive_det_matrix(n: usize) -> impl Strategy<Value = SquareMatrix> {
        prop::collection::vec(-1.0..1.0f64, n * n)
            .prop_map(move |v| {
                let mut m = SquareMatrix::from_row_slice(n, &v).unwrap();
                for i in 0..n {
                    m[(i, i)] += 1.5;
                }
                m
            })
            .prop_filter("det > 0.05", |m| m.determinant() > 0.05)
    }

    fn rotation(n: usize) -> impl Strategy<Value = SquareMatrix> {
        prop::collection::vec(-3.0..3.0f64, n * n).prop_map(move |v| {
            let a = SquareMatrix::from_row_slice(n, &v).unwrap().skew();
            super::super::exp_antisym(&super::super::AntisymmetricMatrix::new(a).unwrap()).into_matrix()
        })
    }

    fn spd(n: usize) -> impl Strategy<Value = SquareMatrix> {
        prop::collection::vec(-1.0..1.0f64, n * n).prop_map(move |v| {
            let b = SquareMatrix::from_row_slice(n, &v).unwrap();
            let mut s = &b * &b.transpose();
            for i in 0..n {
                s[(i, i)] += 0.2;
            }
            s
        })
    }

    proptest! {
        #[test]
        fn matches_svd_oracle(m in positive_det_matrix(3)) {
            let theta = polar_factor(&m).unwrap();
            prop_assert!((theta.matrix() - &svd_polar(&m)).max_abs() < 1e-10);
            prop_assert!(theta.matrix().orthogonality_defect() <= 1e-10);
            let s = &m * &theta.matrix().transpose();
            prop_assert!((&s - &s.transpose()).max_abs() <= 1e-10 * (1.0 + s.max_abs()));
        }

        #[test]
        fn invariant_under_spd_left_factor(m in positive_det_matrix(3), s in spd(3)) {
            let a = polar_factor(&m).unwrap();
            let b = polar_factor(&(&s * &m)).unwrap();
            // Θ(SM) = Θ(M) only when S commutes with the stretch of M; the
            // invariance that holds in general is for S = (MMᵀ)^{k}: test with
            // the stretch itself.
            let stretch = &m * &a.matrix().transpose();
            let c = polar_factor(&(&stretch.sym() * &m)).unwrap();
            prop_assert!((a.matrix() - c.matrix()).max_abs() < 1e-9);
            prop_assert!(b.matrix().orthogonality_defect() < 1e-10);
        }

        #[test]
        fn equivariant_under_right_rotation(m in positive_det_matrix(3), r in rotation(3)) {
            let a = polar_factor(&m).unwrap();
            let b = polar_factor(&(&m * &r)).unwrap();
            prop_assert!((&(a.matrix() * &r) - b.matrix()).max_abs() < 1e-10);
        }

        #[test]
        fn two_dimensional_matches_svd(m in positive_det_matrix(2)) {
            prop_assert!((polar_factor(&m).unwrap().matrix() - &svd_polar(&m)).max_abs() < 1e-10);
        }
    }
}
