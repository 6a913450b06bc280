use super::{SchemeConfig, SolverError, TimeIntegrator};
use crate::algebra::SquareMatrix;
use crate::grid::map_cells;
use crate::lin_analysis::Coefficients;
use crate::model::soh::directions;
use crate::model::sohb::viscous_generator;
use crate::model::{rotate_by, sohb_rhs, soh_rhs, FluidState, SohState, SohVariant};

type GroupRhs = (Vec<f64>, Vec<SquareMatrix>);

/// SSP-RK2 (or forward Euler) on ℝ × SO(n): ρ is stepped as usual and Θ is
/// moved by exponentials of the stage generators from Θⁿ, so every stage
/// stays on SO(n).
fn group_step<F>(state: &FluidState, dt: f64, integrator: TimeIntegrator, rhs: F) -> Result<FluidState, SolverError>
where
    F: Fn(&FluidState) -> Result<GroupRhs, SolverError>,
{
    let (d0, w0) = rhs(state)?;
    let stage = |drho: &[f64], gens: &[SquareMatrix], mix: Option<&[f64]>| -> Result<FluidState, SolverError> {
        let rho: Vec<f64> = match mix {
            None => state.rho.iter().zip(drho).map(|(r, d)| r + dt * d).collect(),
            Some(r1) => state
                .rho
                .iter()
                .zip(r1)
                .zip(drho)
                .map(|((r0, r1), d)| 0.5 * r0 + 0.5 * (r1 + dt * d))
                .collect(),
        };
        if let Some(cell) = rho.iter().position(|r| !(*r > 0.0)) {
            return Err(SolverError::NegativeDensity { cell, rho: rho[cell] });
        }
        let m = map_cells(state.grid.num_cells(), |i| rotate_by(&gens[i].scale(dt), &state.m[i]));
        Ok(FluidState {
            grid: state.grid.clone(),
            rho,
            m,
        })
    };
    let s1 = stage(&d0, &w0, None)?;
    if integrator == TimeIntegrator::ForwardEuler {
        return Ok(s1);
    }
    let (d1, w1) = rhs(&s1)?;
    let mean: Vec<SquareMatrix> = w0
        .iter()
        .zip(&w1)
        .map(|(a, b)| {
            let mut m = a.scale(0.5);
            m.axpy(0.5, b);
            m
        })
        .collect();
    stage(&d1, &mean, Some(&s1.rho))
}

fn sohb_generators(state: &FluidState, c: &Coefficients, nu: f64) -> Result<GroupRhs, SolverError> {
    let r = sohb_rhs(state, c)?;
    let mut gens = r.generator;
    if nu > 0.0 {
        for (g, v) in gens.iter_mut().zip(viscous_generator(state, nu)) {
            g.axpy(1.0, &v);
        }
    }
    Ok((r.drho, gens))
}

/// Method of lines on the SOHB system with the update Θ ← exp(dt W)Θ.
pub fn direct_smooth_advance(state: &FluidState, c: &Coefficients, cfg: &SchemeConfig, dt: f64) -> Result<FluidState, SolverError> {
    group_step(state, dt, cfg.time_integrator, |s| sohb_generators(s, c, 0.0))
}

/// Largest explicit diffusion step h²ρ_min / (2n ν).
pub fn diffusion_limit(state: &FluidState, nu: f64) -> f64 {
    if nu <= 0.0 {
        return f64::INFINITY;
    }
    let h = state.grid.min_spacing();
    h * h * state.min_rho() / (2.0 * state.dim() as f64 * nu)
}

fn check_diffusion(state: &FluidState, nu: f64, dt: f64) -> Result<(), SolverError> {
    let limit = diffusion_limit(state, nu);
    if dt > limit * (1.0 + 1e-12) {
        return Err(SolverError::DiffusionCflViolation { dt, limit });
    }
    Ok(())
}

/// Direct scheme with the viscous term (ν = `c.nu_visc`) added to the generator.
pub fn viscous_advance(state: &FluidState, c: &Coefficients, cfg: &SchemeConfig, dt: f64) -> Result<FluidState, SolverError> {
    check_diffusion(state, c.nu_visc, dt)?;
    group_step(state, dt, cfg.time_integrator, |s| sohb_generators(s, c, c.nu_visc))
}

/// Viscous flow alone with ρ frozen.
pub fn pure_viscous_advance(state: &FluidState, nu: f64, integrator: TimeIntegrator, dt: f64) -> Result<FluidState, SolverError> {
    check_diffusion(state, nu, dt)?;
    let cells = state.grid.num_cells();
    group_step(state, dt, integrator, |s| Ok((vec![0.0; cells], viscous_generator(s, nu))))
}

/// Stable step for the direct scheme: cfl · h / (|c1| + |c2| + 2|c4| + sqrt(c1c3)).
pub fn direct_time_step(state: &FluidState, c: &Coefficients, cfl: f64) -> f64 {
    let speed = c.c1.abs() + c.c2.abs() + 2.0 * c.c4.abs() + (c.c1 * c.c3).sqrt();
    cfl * state.grid.min_spacing() / speed
}

/// Direct SOH scheme: SSP-RK2 stages with Ω renormalised after each update.
pub fn soh_direct_advance(
    state: &SohState,
    c: &Coefficients,
    variant: SohVariant,
    cfg: &SchemeConfig,
    dt: f64,
) -> Result<SohState, SolverError> {
    let omega0 = directions(state, c.c1)?;
    let r0 = soh_rhs(state, c, variant)?;
    let build = |drho: &[f64], dom: &[[f64; 2]], rho_base: Option<&[f64]>| -> Result<SohState, SolverError> {
        let rho: Vec<f64> = match rho_base {
            None => state.rho.iter().zip(drho).map(|(r, d)| r + dt * d).collect(),
            Some(r1) => state
                .rho
                .iter()
                .zip(r1)
                .zip(drho)
                .map(|((r0, r1), d)| 0.5 * r0 + 0.5 * (r1 + dt * d))
                .collect(),
        };
        if let Some(cell) = rho.iter().position(|r| !(*r > 0.0)) {
            return Err(SolverError::NegativeDensity { cell, rho: rho[cell] });
        }
        let v = omega0
            .iter()
            .zip(dom)
            .map(|(o, d)| {
                let w = [o[0] + dt * d[0], o[1] + dt * d[1]];
                let norm = w[0].hypot(w[1]);
                [c.c1 * w[0] / norm, c.c1 * w[1] / norm]
            })
            .collect();
        Ok(SohState {
            grid: state.grid.clone(),
            rho,
            v,
        })
    };
    let s1 = build(&r0.drho, &r0.domega, None)?;
    if cfg.time_integrator == TimeIntegrator::ForwardEuler {
        return Ok(s1);
    }
    let r1 = soh_rhs(&s1, c, variant)?;
    let mean: Vec<[f64; 2]> = r0
        .domega
        .iter()
        .zip(&r1.domega)
        .map(|(a, b)| [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])])
        .collect();
    build(&r1.drho, &mean, Some(&s1.rho))
}
