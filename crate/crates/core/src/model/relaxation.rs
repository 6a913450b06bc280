use super::{perp, FluidState, FramePairState, SohState};
use crate::algebra::SquareMatrix;
use crate::lin_analysis::Coefficients;

/// R(M) = (MMᵀ − I)M.
pub fn relaxation_source(m: &SquareMatrix) -> SquareMatrix {
    let mut q = m * &m.transpose();
    for i in 0..m.dim() {
        q[(i, i)] -= 1.0;
    }
    &q * m
}

/// Fluxes of (ρ, ρM) along `axis`, cell by cell.
pub fn relaxation_flux(state: &FluidState, c: &Coefficients, axis: usize) -> (Vec<f64>, Vec<SquareMatrix>) {
    state
        .rho
        .iter()
        .zip(&state.m)
        .map(|(&r, m)| matrix_flux(r, m, c, axis))
        .unzip()
}

/// Mass flux c1ρM_{a1} and matrix flux
/// −2c4ρM_{aj}M_{i1} + c2ρM_{a1}M_{ij} + 2(c3 − c4)ρδ_{ia}δ_{j1}.
pub(crate) fn matrix_flux(rho: f64, m: &SquareMatrix, c: &Coefficients, a: usize) -> (f64, SquareMatrix) {
    let n = m.dim();
    let ma0 = m[(a, 0)];
    let mut f = SquareMatrix::from_fn(n, |i, j| rho * (-2.0 * c.c4 * m[(a, j)] * m[(i, 0)] + c.c2 * ma0 * m[(i, j)]));
    f[(a, 0)] += 2.0 * (c.c3 - c.c4) * rho;
    (c.c1 * rho * ma0, f)
}

/// Flux of (ρ, ρv) for the one-parameter SOH relaxation family, along
/// `axis`. `c4_family = 0` gives the basic SOH relaxation system.
pub fn soh_relaxation_flux(state: &SohState, c: &Coefficients, c4_family: f64, axis: usize) -> Vec<[f64; 3]> {
    state
        .rho
        .iter()
        .zip(&state.v)
        .map(|(&r, &v)| soh_flux(r, v, c, c4_family, axis))
        .collect()
}

pub(crate) fn soh_flux(rho: f64, v: [f64; 2], c: &Coefficients, c4_family: f64, a: usize) -> [f64; 3] {
    let speed2 = v[0] * v[0] + v[1] * v[1];
    let iso = c.c1 * c.c3 * rho - (c4_family / c.c1) * (c.c1 * c.c1 - speed2) * rho;
    let mut out = [rho * v[a], (c.c2 / c.c1) * rho * v[0] * v[a], (c.c2 / c.c1) * rho * v[1] * v[a]];
    out[1 + a] += iso;
    out
}

/// Stiff source (1/α)ρv(c1² − |v|²) of the SOH relaxation systems.
pub fn soh_relaxation_source(rho: f64, v: [f64; 2], c1: f64, alpha: f64) -> [f64; 2] {
    let k = rho * (c1 * c1 - v[0] * v[0] - v[1] * v[1]) / alpha;
    [k * v[0], k * v[1]]
}

/// The two conservative relaxations of the 2D SOHB system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FramePairVariant {
    /// Independent v1, v2 with the matrix source; unknowns (ρ, ρv1, ρv2).
    TwoVector,
    /// v = c1 v1, with v2 = v1⊥ enforced; unknowns (ρ, ρv).
    Constrained,
}

impl FramePairVariant {
    pub fn num_vars(self) -> usize {
        match self {
            FramePairVariant::TwoVector => 5,
            FramePairVariant::Constrained => 3,
        }
    }
}

/// Per-cell flux along `axis` in the conserved layout of `variant`.
pub fn soh_frame_relaxation_flux(
    state: &FramePairState,
    c: &Coefficients,
    variant: FramePairVariant,
    axis: usize,
) -> Vec<Vec<f64>> {
    (0..state.rho.len())
        .map(|i| {
            let mut out = vec![0.0; variant.num_vars()];
            match variant {
                FramePairVariant::TwoVector => two_vector_flux(state.rho[i], state.v1[i], state.v2[i], c, axis, &mut out),
                FramePairVariant::Constrained => {
                    let v = [c.c1 * state.v1[i][0], c.c1 * state.v1[i][1]];
                    constrained_flux(state.rho[i], v, c, axis, &mut out)
                }
            }
            out
        })
        .collect()
}

pub(crate) fn two_vector_flux(rho: f64, v1: [f64; 2], v2: [f64; 2], c: &Coefficients, a: usize, out: &mut [f64]) {
    out[0] = c.c1 * rho * v1[a];
    for i in 0..2 {
        out[1 + i] = (c.c2 - 2.0 * c.c4) * rho * v1[i] * v1[a];
        out[3 + i] = -2.0 * c.c4 * rho * v2[a] * v1[i] + c.c2 * rho * v1[a] * v2[i];
    }
    out[1 + a] += 2.0 * (c.c3 - c.c4) * rho;
}

pub(crate) fn constrained_flux(rho: f64, v: [f64; 2], c: &Coefficients, a: usize, out: &mut [f64]) {
    let w = perp(v);
    out[0] = rho * v[a];
    for i in 0..2 {
        out[1 + i] = rho * ((c.c2 - c.c4) * v[i] * v[a] + c.c4 * w[i] * w[a]) / c.c1;
    }
    out[1 + a] += c.c1 * (c.c3 - c.c4) * rho;
}

/// Stiff source of the frame-pair relaxation at one cell, in the conserved
/// layout of `variant` (the ρ entry is zero).
pub fn soh_frame_relaxation_source(
    rho: f64,
    v1: [f64; 2],
    v2: [f64; 2],
    c: &Coefficients,
    alpha: f64,
    variant: FramePairVariant,
) -> Vec<f64> {
    match variant {
        FramePairVariant::TwoVector => {
            let m = SquareMatrix::from_row_slice(2, &[v1[0], v2[0], v1[1], v2[1]]).expect("2x2");
            let r = relaxation_source(&m);
            let k = -rho / alpha;
            vec![0.0, k * r[(0, 0)], k * r[(1, 0)], k * r[(0, 1)], k * r[(1, 1)]]
        }
        FramePairVariant::Constrained => {
            let s = soh_relaxation_source(rho, [c.c1 * v1[0], c.c1 * v1[1]], c.c1, alpha);
            vec![0.0, s[0], s[1]]
        }
    }
}
