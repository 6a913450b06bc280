//! Rusanov finite volumes for systems stored cell-major in a flat array.

use super::{SolverError, TimeIntegrator};
use crate::grid::{map_cells, GridSpec};

/// A conservation law ∂ₜU + Σₐ ∂ₐFₐ(U) = 0 with U[0] the density.
pub(crate) trait ConservativeSystem: Sync {
    fn num_vars(&self) -> usize;
    fn flux(&self, u: &[f64], axis: usize, out: &mut [f64]);
    /// Upper bound on the characteristic speeds at a state.
    fn speed(&self, u: &[f64]) -> f64;
}

pub(crate) fn max_speed<S: ConservativeSystem>(sys: &S, u: &[f64]) -> f64 {
    let nv = sys.num_vars();
    map_cells(u.len() / nv, |i| sys.speed(&u[i * nv..(i + 1) * nv]))
        .into_iter()
        .fold(0.0, f64::max)
}

/// Largest stable step 1 / (s_max Σₐ 1/hₐ), which keeps the unsplit
/// forward Euler update a convex combination (h / (n s_max) on a cube).
pub(crate) fn cfl_limit<S: ConservativeSystem>(sys: &S, grid: &GridSpec, u: &[f64]) -> f64 {
    let s = max_speed(sys, u);
    if s > 0.0 {
        1.0 / (s * grid.spacing().iter().map(|h| 1.0 / h).sum::<f64>())
    } else {
        f64::INFINITY
    }
}

/// −Σₐ (F_{i+½} − F_{i−½}) / hₐ with the local Lax–Friedrichs interface flux.
pub(crate) fn rusanov_rhs<S: ConservativeSystem>(sys: &S, grid: &GridSpec, u: &[f64]) -> Vec<f64> {
    let nv = sys.num_vars();
    let n = grid.dim();
    let cells = grid.num_cells();
    let fluxes: Vec<f64> = map_cells(cells, |i| {
        let mut f = vec![0.0; n * nv];
        for a in 0..n {
            sys.flux(&u[i * nv..(i + 1) * nv], a, &mut f[a * nv..(a + 1) * nv]);
        }
        f
    })
    .concat();
    let speeds = map_cells(cells, |i| sys.speed(&u[i * nv..(i + 1) * nv]));
    // The same (left, right) evaluation order from both sides of a face keeps
    // the update exactly telescoping.
    let face = |l: usize, r: usize, a: usize, k: usize| {
        let s = speeds[l].max(speeds[r]);
        0.5 * (fluxes[(l * n + a) * nv + k] + fluxes[(r * n + a) * nv + k]) - 0.5 * s * (u[r * nv + k] - u[l * nv + k])
    };
    map_cells(cells, |i| {
        let mut d = vec![0.0; nv];
        for a in 0..n {
            let p = grid.neighbor(i, a, 1);
            let m = grid.neighbor(i, a, -1);
            let h = grid.spacing()[a];
            for (k, dk) in d.iter_mut().enumerate() {
                *dk -= (face(i, p, a, k) - face(m, i, a, k)) / h;
            }
        }
        d
    })
    .concat()
}

/// One explicit step without source terms.
pub(crate) fn conservative_update<S: ConservativeSystem>(
    sys: &S,
    grid: &GridSpec,
    u0: &[f64],
    dt: f64,
    integrator: TimeIntegrator,
) -> Result<Vec<f64>, SolverError> {
    let limit = cfl_limit(sys, grid, u0);
    if dt > limit * (1.0 + 1e-12) {
        return Err(SolverError::CflViolation { dt, limit });
    }
    let nv = sys.num_vars();
    let l0 = rusanov_rhs(sys, grid, u0);
    let u1: Vec<f64> = u0.iter().zip(&l0).map(|(u, l)| u + dt * l).collect();
    check_density(&u1, nv)?;
    if integrator == TimeIntegrator::ForwardEuler {
        return Ok(u1);
    }
    let l1 = rusanov_rhs(sys, grid, &u1);
    let u2: Vec<f64> = u0
        .iter()
        .zip(&u1)
        .zip(&l1)
        .map(|((a, b), l)| 0.5 * a + 0.5 * (b + dt * l))
        .collect();
    check_density(&u2, nv)?;
    Ok(u2)
}

fn check_density(u: &[f64], nv: usize) -> Result<(), SolverError> {
    match u.iter().step_by(nv).position(|r| !(*r > 0.0)) {
        Some(cell) => Err(SolverError::NegativeDensity { cell, rho: u[cell * nv] }),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Scalar advection ∂ₜu + ∂ₓu = 0 along axis 0.
    struct Advection;

    impl ConservativeSystem for Advection {
        fn num_vars(&self) -> usize {
            1
        }
        fn flux(&self, u: &[f64], axis: usize, out: &mut [f64]) {
            out[0] = if axis == 0 { u[0] } else { 0.0 };
        }
        fn speed(&self, _: &[f64]) -> f64 {
            1.0
        }
    }

    #[test]
    fn advection_conserves_and_converges() {
        let err = |cells: usize| {
            let g = GridSpec::new(&[cells, 4], &[1.0 / cells as f64, 0.25]).unwrap();
            let k = 2.0 * std::f64::consts::PI;
            let mut u: Vec<f64> = (0..g.num_cells()).map(|i| 2.0 + (k * g.coords(i)[0]).sin()).collect();
            let mass0: f64 = u.iter().sum();
            let dt = 0.4 * g.spacing()[0];
            let steps = (0.25 / dt).round() as usize;
            for _ in 0..steps {
                u = conservative_update(&Advection, &g, &u, dt, TimeIntegrator::SspRk2).unwrap();
            }
            let mass: f64 = u.iter().sum();
            assert!(((mass - mass0) / mass0).abs() < 1e-13);
            let t = steps as f64 * dt;
            (0..g.num_cells())
                .map(|i| (u[i] - 2.0 - (k * (g.coords(i)[0] - t)).sin()).abs())
                .sum::<f64>()
                / g.num_cells() as f64
        };
        let rate = (err(64) / err(128)).log2();
        assert!(rate > 0.8, "rate {rate}");
    }

    #[test]
    fn cfl_is_enforced() {
        let g = GridSpec::cube(2, 8, 1.0).unwrap();
        let u = vec![1.0; g.num_cells()];
        let r = conservative_update(&Advection, &g, &u, 0.2, TimeIntegrator::ForwardEuler);
        assert!(matches!(r, Err(SolverError::CflViolation { .. })));
    }
}
