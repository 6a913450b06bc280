use super::fv::{conservative_update, ConservativeSystem};
use super::{relax_matrix_exact, SchemeConfig, SolverError};
use crate::algebra::{polar_factor, AlgebraError, SquareMatrix};
use crate::grid::{try_map_cells, GridSpec};
use crate::lin_analysis::Coefficients;
use crate::model::{perp, FluidState, FramePairState, FramePairVariant, SohState};
use crate::model::relaxation::{constrained_flux, matrix_flux, soh_flux, two_vector_flux};

/// Wave-speed bound of the matrix relaxation system at a cell:
/// (|c1| + |c2| + 2|c4|) max|M| + sqrt(2 c1 |c3 − c4|).
pub fn relaxation_wave_speed(c: &Coefficients, m: &SquareMatrix) -> f64 {
    (c.c1.abs() + c.c2.abs() + 2.0 * c.c4.abs()) * m.max_abs() + (2.0 * c.c1 * (c.c3 - c.c4).abs()).sqrt()
}

/// Unknowns (ρ, ρM row-major).
struct MatrixRelaxation {
    c: Coefficients,
    n: usize,
}

impl MatrixRelaxation {
    fn matrix(&self, u: &[f64]) -> SquareMatrix {
        SquareMatrix::from_fn(self.n, |i, j| u[1 + i * self.n + j] / u[0])
    }
}

impl ConservativeSystem for MatrixRelaxation {
    fn num_vars(&self) -> usize {
        1 + self.n * self.n
    }

    fn flux(&self, u: &[f64], axis: usize, out: &mut [f64]) {
        let (mass, f) = matrix_flux(u[0], &self.matrix(u), &self.c, axis);
        out[0] = mass;
        out[1..].copy_from_slice(f.as_slice());
    }

    fn speed(&self, u: &[f64]) -> f64 {
        relaxation_wave_speed(&self.c, &self.matrix(u))
    }
}

pub(super) fn pack(state: &FluidState) -> Vec<f64> {
    let nv = 1 + state.dim() * state.dim();
    let mut u = Vec::with_capacity(nv * state.rho.len());
    for (r, m) in state.rho.iter().zip(&state.m) {
        u.push(*r);
        u.extend(m.as_slice().iter().map(|x| r * x));
    }
    u
}

fn unpack(grid: &GridSpec, u: &[f64]) -> FluidState {
    let n = grid.dim();
    let nv = 1 + n * n;
    let (rho, m) = u
        .chunks_exact(nv)
        .map(|c| {
            let r = c[0];
            (r, SquareMatrix::from_fn(n, |i, j| c[1 + i * n + j] / r))
        })
        .unzip();
    FluidState {
        grid: grid.clone(),
        rho,
        m,
    }
}

pub(super) fn matrix_system(c: &Coefficients, n: usize) -> impl ConservativeSystem {
    MatrixRelaxation { c: *c, n }
}

/// Flux-form update of (ρ, ρM) without the stiff source.
pub fn conservative_step(state: &FluidState, c: &Coefficients, cfg: &SchemeConfig, dt: f64) -> Result<FluidState, SolverError> {
    let sys = MatrixRelaxation { c: *c, n: state.dim() };
    let u = conservative_update(&sys, &state.grid, &pack(state), dt, cfg.time_integrator)?;
    Ok(unpack(&state.grid, &u))
}

/// Cell-wise M ← polar factor of M; ρ unchanged.
pub fn projection_step(state: &FluidState) -> Result<FluidState, SolverError> {
    let m = try_map_cells(state.grid.num_cells(), |cell| {
        polar_factor(&state.m[cell])
            .map(|r| r.into_matrix())
            .map_err(|e| match e {
                AlgebraError::NonPositiveDeterminant { det } => SolverError::NonPositiveDeterminant { cell, det },
                _ => SolverError::SingularProjection { cell },
            })
    })?;
    Ok(FluidState {
        grid: state.grid.clone(),
        rho: state.rho.clone(),
        m,
    })
}

/// Conservative step followed by projection: the α → 0 relaxation scheme.
pub fn splitting_advance(state: &FluidState, c: &Coefficients, cfg: &SchemeConfig, dt: f64) -> Result<FluidState, SolverError> {
    projection_step(&conservative_step(state, c, cfg, dt)?)
}

/// Finite-α variant: the conservative step followed by the exact solution of
/// the homogeneous relaxation over dt in every cell.
pub fn relaxed_advance(
    state: &FluidState,
    c: &Coefficients,
    cfg: &SchemeConfig,
    dt: f64,
    alpha: f64,
) -> Result<FluidState, SolverError> {
    let mut s = conservative_step(state, c, cfg, dt)?;
    s.m = try_map_cells(s.grid.num_cells(), |cell| {
        relax_matrix_exact(&s.m[cell], alpha, dt).map_err(|e| match e {
            AlgebraError::NonPositiveDeterminant { det } => SolverError::NonPositiveDeterminant { cell, det },
            _ => SolverError::SingularProjection { cell },
        })
    })?;
    Ok(s)
}

/// Unknowns (ρ, ρv) of the SOH relaxation family.
struct SohRelaxation {
    c: Coefficients,
    c4_family: f64,
}

impl ConservativeSystem for SohRelaxation {
    fn num_vars(&self) -> usize {
        3
    }

    fn flux(&self, u: &[f64], axis: usize, out: &mut [f64]) {
        out.copy_from_slice(&soh_flux(u[0], [u[1] / u[0], u[2] / u[0]], &self.c, self.c4_family, axis));
    }

    fn speed(&self, u: &[f64]) -> f64 {
        let c = &self.c;
        let v = (u[1] / u[0]).hypot(u[2] / u[0]);
        let k = self.c4_family.abs();
        v * (1.0 + (c.c2.abs() + 2.0 * k) / c.c1) + (c.c1 * c.c3 + k * (c.c1 + v * v / c.c1)).sqrt()
    }
}

/// Unknowns (ρ, ρv1, ρv2) or (ρ, ρv) of the 2D frame-pair relaxations.
struct FramePairRelaxation {
    c: Coefficients,
    variant: FramePairVariant,
}

impl ConservativeSystem for FramePairRelaxation {
    fn num_vars(&self) -> usize {
        self.variant.num_vars()
    }

    fn flux(&self, u: &[f64], axis: usize, out: &mut [f64]) {
        let r = u[0];
        match self.variant {
            FramePairVariant::TwoVector => {
                two_vector_flux(r, [u[1] / r, u[2] / r], [u[3] / r, u[4] / r], &self.c, axis, out)
            }
            FramePairVariant::Constrained => constrained_flux(r, [u[1] / r, u[2] / r], &self.c, axis, out),
        }
    }

    fn speed(&self, u: &[f64]) -> f64 {
        let c = &self.c;
        match self.variant {
            FramePairVariant::TwoVector => {
                let m = SquareMatrix::from_row_slice(2, &[u[1], u[3], u[2], u[4]]).expect("2x2").scale(1.0 / u[0]);
                relaxation_wave_speed(c, &m)
            }
            FramePairVariant::Constrained => {
                let v = (u[1] / u[0]).hypot(u[2] / u[0]);
                v * (1.0 + ((c.c2 - c.c4).abs() + c.c4.abs()) / c.c1) + (c.c1 * (c.c3 - c.c4).abs()).sqrt()
            }
        }
    }
}

fn normalize_to(v: [f64; 2], c1: f64, cell: usize) -> Result<[f64; 2], SolverError> {
    let norm = v[0].hypot(v[1]);
    if !(norm > 0.0) {
        return Err(SolverError::SingularProjection { cell });
    }
    Ok([c1 * v[0] / norm, c1 * v[1] / norm])
}

/// Conservative step of the SOH relaxation family with parameter
/// `c4_family`, then v ← c1 v/|v|.
pub fn soh_splitting_advance(
    state: &SohState,
    c: &Coefficients,
    c4_family: f64,
    cfg: &SchemeConfig,
    dt: f64,
) -> Result<SohState, SolverError> {
    let sys = SohRelaxation { c: *c, c4_family };
    let u0: Vec<f64> = state
        .rho
        .iter()
        .zip(&state.v)
        .flat_map(|(r, v)| [*r, r * v[0], r * v[1]])
        .collect();
    let u = conservative_update(&sys, &state.grid, &u0, dt, cfg.time_integrator)?;
    let (rho, v) = u
        .chunks_exact(3)
        .enumerate()
        .map(|(cell, x)| Ok((x[0], normalize_to([x[1] / x[0], x[2] / x[0]], c.c1, cell)?)))
        .collect::<Result<Vec<_>, SolverError>>()?
        .into_iter()
        .unzip();
    Ok(SohState {
        grid: state.grid.clone(),
        rho,
        v,
    })
}

/// Conservative step of a frame-pair relaxation followed by its α → 0
/// projection: polar factor of (v1 v2) or v1 ← v/|v|, v2 ← v1⊥.
pub fn frame_pair_splitting_advance(
    state: &FramePairState,
    c: &Coefficients,
    variant: FramePairVariant,
    cfg: &SchemeConfig,
    dt: f64,
) -> Result<FramePairState, SolverError> {
    let sys = FramePairRelaxation { c: *c, variant };
    let u0: Vec<f64> = (0..state.rho.len())
        .flat_map(|i| {
            let r = state.rho[i];
            let (a, b) = (state.v1[i], state.v2[i]);
            match variant {
                FramePairVariant::TwoVector => vec![r, r * a[0], r * a[1], r * b[0], r * b[1]],
                FramePairVariant::Constrained => vec![r, r * c.c1 * a[0], r * c.c1 * a[1]],
            }
        })
        .collect();
    let u = conservative_update(&sys, &state.grid, &u0, dt, cfg.time_integrator)?;
    let mut out = state.clone();
    let nv = variant.num_vars();
    for (cell, x) in u.chunks_exact(nv).enumerate() {
        let r = x[0];
        out.rho[cell] = r;
        match variant {
            FramePairVariant::TwoVector => {
                let m = SquareMatrix::from_row_slice(2, &[x[1] / r, x[3] / r, x[2] / r, x[4] / r]).expect("2x2");
                let p = polar_factor(&m).map_err(|e| match e {
                    AlgebraError::NonPositiveDeterminant { det } => SolverError::NonPositiveDeterminant { cell, det },
                    _ => SolverError::SingularProjection { cell },
                })?;
                let p = p.matrix();
                out.v1[cell] = [p[(0, 0)], p[(1, 0)]];
                out.v2[cell] = [p[(0, 1)], p[(1, 1)]];
            }
            FramePairVariant::Constrained => {
                let d = normalize_to([x[1] / r, x[2] / r], 1.0, cell)?;
                out.v1[cell] = d;
                out.v2[cell] = perp(d);
            }
        }
    }
    Ok(out)
}
