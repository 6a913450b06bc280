use smallvec::smallvec;

use super::{FluidState, ModelError};
use crate::algebra::{rotation_generator, wedge, SquareMatrix, Vector};
use crate::grid::{map_cells, GridSpec};
use crate::lin_analysis::Coefficients;

/// dρ/dt and dΘ/dt = GΘ with G antisymmetric.
#[derive(Debug, Clone)]
pub struct SohbRhs {
    pub drho: Vec<f64>,
    pub generator: Vec<SquareMatrix>,
    pub dtheta: Vec<SquareMatrix>,
}

/// dρ/dt and dΩⱼ/dt, indexed `domega[cell][j]`.
#[derive(Debug, Clone)]
pub struct OmegaRhs {
    pub drho: Vec<f64>,
    pub domega: Vec<Vec<Vector>>,
}

/// SOHB right-hand side with the reference vector e₁.
pub fn sohb_rhs(state: &FluidState, c: &Coefficients) -> Result<SohbRhs, ModelError> {
    let mut e1: Vector = smallvec![0.0; state.dim()];
    e1[0] = 1.0;
    sohb_rhs_in_frame(state, c, &e1)
}

/// SOHB right-hand side with Ω₁ = Θe for an arbitrary unit reference
/// vector `e`. Replacing (Θ, e) by (ΘR, Rᵀe) maps dΘ/dt to (dΘ/dt)R.
///
/// Every derivative of Θ is the tangent-projected central difference, so
/// dΘ/dt·Θᵀ is antisymmetric up to rounding.
pub fn sohb_rhs_in_frame(state: &FluidState, c: &Coefficients, e: &[f64]) -> Result<SohbRhs, ModelError> {
    state.check_rotation_field()?;
    let grid = &state.grid;
    let n = grid.dim();
    if e.len() != n {
        return Err(ModelError::DimensionMismatch {
            expected: n,
            found: e.len(),
        });
    }
    let omega1: Vec<Vector> = state.m.iter().map(|t| t.mul_vec(e)).collect();
    let drho = mass_rhs(grid, &state.rho, &omega1, c.c1);
    let generator = map_cells(grid.num_cells(), |idx| {
        let theta = &state.m[idx];
        let rho = state.rho[idx];
        let o1 = &omega1[idx];
        let gens: Vec<SquareMatrix> = (0..n).map(|a| rotation_generator(&state.m, grid, idx, a)).collect();
        let grad_rho = grid.gradient(&state.rho, idx);

        let mut div: Vector = smallvec![0.0; n];
        for (a, g) in gens.iter().enumerate() {
            let d = g * theta;
            for k in 0..n {
                div[k] += d[(a, k)];
            }
        }
        let theta_div_theta = theta.mul_vec(&div);
        let f: Vector = (0..n)
            .map(|i| -c.c3 * grad_rho[i] - c.c4 * rho * theta_div_theta[i])
            .collect();

        // ∂ₐΩ₁ = GₐΩ₁
        let d_omega1: Vec<Vector> = gens.iter().map(|g| g.mul_vec(o1)).collect();
        let curl = SquareMatrix::from_fn(n, |i, j| d_omega1[i][j] - d_omega1[j][i]);

        let mut w = wedge(&f, o1);
        w.axpy(-c.c4 * rho, &curl);
        let mut g_eff = w.scale(1.0 / rho);
        for (a, g) in gens.iter().enumerate() {
            g_eff.axpy(-c.c2 * o1[a], g);
        }
        g_eff
    });
    let dtheta = generator.iter().zip(&state.m).map(|(g, t)| g * t).collect();
    Ok(SohbRhs {
        drho,
        generator,
        dtheta,
    })
}

/// −∇·(c1 ρ Ω₁) by central differences of the cell fluxes.
pub(crate) fn mass_rhs(grid: &GridSpec, rho: &[f64], omega1: &[Vector], c1: f64) -> Vec<f64> {
    let n = grid.dim();
    let flux: Vec<Vec<f64>> = (0..n)
        .map(|a| rho.iter().zip(omega1).map(|(r, o)| c1 * r * o[a]).collect())
        .collect();
    map_cells(grid.num_cells(), |idx| -(0..n).map(|a| grid.central(&flux[a], idx, a)).sum::<f64>())
}

/// The same system written for ρ and the columns Ωⱼ = Θeⱼ, on the same
/// stencils as [`sohb_rhs`].
pub fn sohb_rhs_omega_form(state: &FluidState, c: &Coefficients) -> Result<OmegaRhs, ModelError> {
    state.check_rotation_field()?;
    let grid = &state.grid;
    let n = grid.dim();
    let omega1: Vec<Vector> = state.m.iter().map(|t| t.column(0)).collect();
    let drho = mass_rhs(grid, &state.rho, &omega1, c.c1);
    let domega = map_cells(grid.num_cells(), |idx| {
        let theta = &state.m[idx];
        let rho = state.rho[idx];
        let gens: Vec<SquareMatrix> = (0..n).map(|a| rotation_generator(&state.m, grid, idx, a)).collect();
        let grad_rho = grid.gradient(&state.rho, idx);
        let cols: Vec<Vector> = (0..n).map(|k| theta.column(k)).collect();
        // jac[k][a] = ∂ₐΩₖ
        let jac: Vec<Vec<Vector>> = cols
            .iter()
            .map(|ok| gens.iter().map(|g| g.mul_vec(ok)).collect())
            .collect();
        let div: Vec<f64> = (0..n).map(|k| (0..n).map(|a| jac[k][a][a]).sum()).collect();
        let o1 = &cols[0];
        let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
        let directional = |dir: &[f64], k: usize| -> Vector {
            (0..n).map(|m| (0..n).map(|a| dir[a] * jac[k][a][m]).sum()).collect()
        };

        let mut out = Vec::with_capacity(n);
        let o1_grad = dot(o1, &grad_rho);
        let adv1 = directional(o1, 0);
        let d1: Vector = (0..n)
            .map(|i| {
                let perp_grad = grad_rho[i] - o1_grad * o1[i];
                let twist: f64 = (1..n).map(|k| div[k] * cols[k][i]).sum();
                -(c.c2 - c.c4) * adv1[i] + (-c.c3 * perp_grad - c.c4 * rho * twist) / rho
            })
            .collect();
        out.push(d1);
        for j in 1..n {
            let oj = &cols[j];
            let advj = directional(o1, j);
            let along = c.c3 * dot(oj, &grad_rho) + c.c4 * rho * div[j];
            let shear = directional(oj, 0);
            let dj: Vector = (0..n)
                .map(|i| {
                    // ((∇Ωⱼ)Ω₁)ᵢ = Σₘ ∂ᵢΩⱼₘ Ω₁ₘ
                    let grad_dot = dot(&jac[j][i], o1);
                    -c.c2 * advj[i] + (along * o1[i] + c.c4 * rho * (grad_dot + shear[i])) / rho
                })
                .collect();
            out.push(dj);
        }
        out
    });
    Ok(OmegaRhs { drho, domega })
}

/// (ν/ρ) P_{T_Θ} Δ(ρΘ) with the 2n+1-point Laplacian.
pub fn viscous_term(state: &FluidState, nu_visc: f64) -> Vec<SquareMatrix> {
    viscous_generator(state, nu_visc)
        .iter()
        .zip(&state.m)
        .map(|(g, t)| g * t)
        .collect()
}

/// Generator G of the viscous term, which equals GΘ.
pub(crate) fn viscous_generator(state: &FluidState, nu_visc: f64) -> Vec<SquareMatrix> {
    let grid = &state.grid;
    let n = grid.dim();
    if nu_visc == 0.0 {
        return vec![SquareMatrix::zeros(n); grid.num_cells()];
    }
    map_cells(grid.num_cells(), |idx| {
        let mut lap = SquareMatrix::zeros(n);
        let centre = state.m[idx].scale(state.rho[idx]);
        for a in 0..n {
            let h2 = grid.spacing()[a] * grid.spacing()[a];
            let p = grid.neighbor(idx, a, 1);
            let m = grid.neighbor(idx, a, -1);
            lap.axpy(state.rho[p] / h2, &state.m[p]);
            lap.axpy(state.rho[m] / h2, &state.m[m]);
            lap.axpy(-2.0 / h2, &centre);
        }
        (&lap * &state.m[idx].transpose()).skew().scale(nu_visc / state.rho[idx])
    })
}
