use super::{perp, ModelError, SohState};
use crate::grid::{map_cells, GridSpec};
use crate::lin_analysis::Coefficients;

/// Largest ||v| − c1| accepted by [`soh_rhs`].
pub const DIRECTION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SohVariant {
    /// ρ(∂t + c2 Ω·∇)Ω = −c3 P_{Ω⊥}∇ρ
    Standard,
    /// c2 replaced by c2 − 2c4: the 2D reduction of SOHB.
    C2Shifted,
    /// ρ(∂t + (c2 + c4')Ω·∇)Ω = −c3 P_{Ω⊥}∇ρ + c4' ρ curl Ω Ω⊥, the
    /// formal limit of the relaxation family with parameter c4'.
    Family(f64),
}

#[derive(Debug, Clone)]
pub struct SohRhs {
    pub drho: Vec<f64>,
    pub domega: Vec<[f64; 2]>,
}

/// Plain central differences throughout; Ω = v / c1.
pub fn soh_rhs(state: &SohState, c: &Coefficients, variant: SohVariant) -> Result<SohRhs, ModelError> {
    let grid = &state.grid;
    let omega = directions(state, c.c1)?;
    let flux: Vec<Vec<f64>> = (0..2)
        .map(|a| state.rho.iter().zip(&state.v).map(|(r, v)| r * v[a]).collect())
        .collect();
    let comps: [Vec<f64>; 2] = [omega.iter().map(|o| o[0]).collect(), omega.iter().map(|o| o[1]).collect()];
    let (c2, c4f) = match variant {
        SohVariant::Standard => (c.c2, 0.0),
        SohVariant::C2Shifted => (c.c2 - 2.0 * c.c4, 0.0),
        SohVariant::Family(k) => (c.c2 + k, k),
    };
    let out = map_cells(grid.num_cells(), |idx| {
        let drho = -(0..2).map(|a| grid.central(&flux[a], idx, a)).sum::<f64>();
        let o = omega[idx];
        let rho = state.rho[idx];
        let adv = advective(grid, &comps, o, idx);
        let g = grid.gradient(&state.rho, idx);
        let w = perp(o);
        let perp_grad = w[0] * g[0] + w[1] * g[1];
        let curl = grid.central(&comps[1], idx, 0) - grid.central(&comps[0], idx, 1);
        let d = [0, 1].map(|i| -c2 * adv[i] - c.c3 * perp_grad * w[i] / rho + c4f * curl * w[i]);
        (drho, d)
    });
    let (drho, domega) = out.into_iter().unzip();
    Ok(SohRhs { drho, domega })
}

pub(crate) fn directions(state: &SohState, c1: f64) -> Result<Vec<[f64; 2]>, ModelError> {
    state
        .v
        .iter()
        .enumerate()
        .map(|(cell, v)| {
            let norm = v[0].hypot(v[1]);
            if (norm - c1).abs() > DIRECTION_TOL || !norm.is_finite() {
                Err(ModelError::NonUnitDirection { cell, norm })
            } else {
                Ok([v[0] / c1, v[1] / c1])
            }
        })
        .collect()
}

/// (Ω·∇)Ω at one cell.
fn advective(grid: &GridSpec, comps: &[Vec<f64>; 2], o: [f64; 2], idx: usize) -> [f64; 2] {
    [0, 1].map(|i| o[0] * grid.central(&comps[i], idx, 0) + o[1] * grid.central(&comps[i], idx, 1))
}

/// curl Ω = ∂ₓΩ_y − ∂_yΩₓ by central differences.
pub fn curl_2d(grid: &GridSpec, omega: &[[f64; 2]]) -> Vec<f64> {
    let comps: [Vec<f64>; 2] = [omega.iter().map(|o| o[0]).collect(), omega.iter().map(|o| o[1]).collect()];
    map_cells(grid.num_cells(), |idx| grid.central(&comps[1], idx, 0) - grid.central(&comps[0], idx, 1))
}

/// max over cells of |(Ω·∇)Ω − curl Ω Ω⊥| for a unit field.
pub fn curl_identity_defect(grid: &GridSpec, omega: &[[f64; 2]]) -> f64 {
    let comps: [Vec<f64>; 2] = [omega.iter().map(|o| o[0]).collect(), omega.iter().map(|o| o[1]).collect()];
    let curl = curl_2d(grid, omega);
    map_cells(grid.num_cells(), |idx| {
        let adv = advective(grid, &comps, omega[idx], idx);
        let w = perp(omega[idx]);
        (adv[0] - curl[idx] * w[0]).abs().max((adv[1] - curl[idx] * w[1]).abs())
    })
    .into_iter()
    .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn pulse(cells: usize, c1: f64) -> SohState {
        let g = GridSpec::cube(2, cells, 1.0).unwrap();
        let k = 2.0 * PI;
        SohState::from_angle(
            g,
            c1,
            |x| 1.0 + 0.2 * (k * x[0]).cos() * (k * x[1]).sin(),
            |x| 0.5 * (k * x[0]).sin() + 0.3 * (k * x[1]).cos(),
        )
    }

    #[test]
    fn uniform_is_stationary() {
        let g = GridSpec::cube(2, 8, 1.0).unwrap();
        let s = SohState::from_angle(g, 1.5, |_| 2.0, |_| 0.4);
        let c = Coefficients::new(1.5, 1.0, 1.0, 0.2);
        for v in [SohVariant::Standard, SohVariant::C2Shifted, SohVariant::Family(0.7)] {
            let r = soh_rhs(&s, &c, v).unwrap();
            assert!(r.drho.iter().all(|x| x.abs() < 1e-13));
            assert!(r.domega.iter().all(|d| d[0].abs() < 1e-13 && d[1].abs() < 1e-13));
        }
    }

    #[test]
    fn shift_vanishes_without_c4() {
        let c = Coefficients::new(1.0, 0.8, 1.1, 0.0);
        let s = pulse(16, 1.0);
        let a = soh_rhs(&s, &c, SohVariant::Standard).unwrap();
        let b = soh_rhs(&s, &c, SohVariant::C2Shifted).unwrap();
        assert_eq!(a.domega, b.domega);
    }

    #[test]
    fn rejects_off_constraint_velocity() {
        let c = Coefficients::new(1.0, 0.8, 1.1, 0.0);
        let mut s = pulse(8, 1.0);
        s.v[7] = [1.1, 0.0];
        assert!(matches!(soh_rhs(&s, &c, SohVariant::Standard), Err(ModelError::NonUnitDirection { cell: 7, .. })));
    }

    #[test]
    fn curl_identity_second_order() {
        let defect = |cells: usize| {
            let g = GridSpec::cube(2, cells, 1.0).unwrap();
            let omega: Vec<[f64; 2]> = (0..g.num_cells())
                .map(|i| {
                    let phi = (2.0 * PI * g.coords(i)[0]).sin();
                    [phi.cos(), phi.sin()]
                })
                .collect();
            curl_identity_defect(&g, &omega)
        };
        let rate = (defect(32) / defect(64)).log2();
        assert!(rate > 1.9, "rate {rate}");
    }

    #[test]
    fn curl_matches_analytic() {
        let g = GridSpec::cube(2, 64, 1.0).unwrap();
        let k = 2.0 * PI;
        let omega: Vec<[f64; 2]> = (0..g.num_cells())
            .map(|i| {
                let phi = (k * g.coords(i)[0]).sin();
                [phi.cos(), phi.sin()]
            })
            .collect();
        let curl = curl_2d(&g, &omega);
        for (i, cv) in curl.iter().enumerate() {
            let x = g.coords(i)[0];
            let exact = (k * x).sin().cos() * k * (k * x).cos();
            assert!((cv - exact).abs() < 0.05);
        }
    }

    #[test]
    fn family_agrees_with_standard_to_truncation() {
        let c = Coefficients::new(1.0, 0.8, 1.1, 0.0);
        let gap = |cells: usize| {
            let s = pulse(cells, 1.0);
            let a = soh_rhs(&s, &c, SohVariant::Standard).unwrap();
            let b = soh_rhs(&s, &c, SohVariant::Family(0.9)).unwrap();
            a.domega
                .iter()
                .zip(&b.domega)
                .map(|(x, y)| (x[0] - y[0]).abs().max((x[1] - y[1]).abs()))
                .fold(0.0, f64::max)
        };
        let (g1, g2) = (gap(32), gap(64));
        assert!(g1 > 0.0 && (g1 / g2).log2() > 1.9);
    }
}
