//! Embedding of p-dimensional states into n dimensions with constant
//! columns Ωⱼ (j > p), and checks that the solvers keep that structure.

use std::io::{self, Write};

use thiserror::Error;

use crate::algebra::{Rotation, SquareMatrix};
use crate::grid::{GridError, GridSpec};
use crate::lin_analysis::Coefficients;
use crate::model::{FluidState, SohState, SohVariant};
use crate::solver::{advance, soh_direct_advance, stable_time_step, RunAbort, SchemeConfig, SolverError};

/// Number of cells along each suppressed axis.
pub const SUPPRESSED_THICKNESS: usize = 4;
/// Tolerance on the block structure of the setup.
pub const SETUP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReductionError {
    #[error("invalid reduction setup: {0}")]
    InvalidSetup(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Run(#[from] RunAbort),
}

/// Ambient dimension n, reduced dimension p, frame rotation R and the
/// (n−p)×(n−p) rotation C giving the constant columns.
///
/// Embedded states are Θ = diag(θ, C) Rᵀ, so θ = ΠΘRi.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionSetup {
    n: usize,
    p: usize,
    frame: SquareMatrix,
    constant_block: SquareMatrix,
}

impl ReductionSetup {
    pub fn new(n: usize, p: usize, frame: Rotation, constant_block: Rotation) -> Result<Self, ReductionError> {
        let s = Self::new_unchecked(n, p, frame.into_matrix(), constant_block.into_matrix())?;
        let defect = s.coupling();
        if defect > SETUP_TOL {
            return Err(ReductionError::InvalidSetup(format!(
                "frame mixes the first {p} axes with the suppressed ones (off-block entry {defect:e})"
            )));
        }
        Ok(s)
    }

    pub fn identity(n: usize, p: usize) -> Result<Self, ReductionError> {
        Self::new(n, p, Rotation::identity(n), Rotation::identity(n.saturating_sub(p).max(1)))
    }

    /// Skips the block-structure check; only dimensions are validated. Used
    /// for negative controls.
    pub fn new_unchecked(
        n: usize,
        p: usize,
        frame: SquareMatrix,
        constant_block: SquareMatrix,
    ) -> Result<Self, ReductionError> {
        if !(p >= 2 && p < n) {
            return Err(ReductionError::InvalidSetup(format!("need 2 <= p < n, got p = {p}, n = {n}")));
        }
        if frame.dim() != n || constant_block.dim() != n - p {
            return Err(ReductionError::InvalidSetup(format!(
                "frame must be {n}x{n} and the constant block {q}x{q}",
                q = n - p
            )));
        }
        Ok(Self {
            n,
            p,
            frame,
            constant_block,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn frame(&self) -> &SquareMatrix {
        &self.frame
    }

    /// Largest entry of R coupling the first p axes with the rest.
    pub fn coupling(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                if (i < self.p) != (j < self.p) {
                    worst = worst.max(self.frame[(i, j)].abs());
                }
            }
        }
        worst
    }

    /// Ωⱼ⁰ = diag(I, C) Rᵀ eⱼ for j ≥ p (0-based).
    pub fn constant_column(&self, j: usize) -> Vec<f64> {
        let rt = self.frame.transpose();
        let col = rt.column(j);
        let mut out = vec![0.0; self.n];
        out[..self.p].copy_from_slice(&col[..self.p]);
        for i in self.p..self.n {
            out[i] = (self.p..self.n)
                .map(|k| self.constant_block[(i - self.p, k - self.p)] * col[k])
                .sum();
        }
        out
    }

    /// First p components of Rᵀe₁: the reference vector of the reduced
    /// system.
    pub fn reduced_reference(&self) -> Vec<f64> {
        self.frame.transpose().column(0)[..self.p].to_vec()
    }

    fn lift(&self, theta: &SquareMatrix) -> SquareMatrix {
        let (n, p) = (self.n, self.p);
        let block = SquareMatrix::from_fn(n, |i, j| match (i < p, j < p) {
            (true, true) => theta[(i, j)],
            (false, false) => self.constant_block[(i - p, j - p)],
            _ => 0.0,
        });
        &block * &self.frame.transpose()
    }
}

/// The n-dimensional grid: the reduced axes followed by suppressed axes of
/// [`SUPPRESSED_THICKNESS`] cells with the spacing of axis 0.
pub fn embedded_grid(reduced: &GridSpec, n: usize) -> Result<GridSpec, ReductionError> {
    let p = reduced.dim();
    let mut cells = reduced.cells().to_vec();
    let mut spacing = reduced.spacing().to_vec();
    cells.resize(n, SUPPRESSED_THICKNESS);
    spacing.resize(n, reduced.spacing()[0]);
    if n <= p {
        return Err(ReductionError::InvalidSetup(format!("ambient dimension {n} <= reduced {p}")));
    }
    Ok(GridSpec::new(&cells, &spacing)?)
}

/// Θ(x) = diag(θ(Πx), C) Rᵀ and ρ(x) = ρ̄(Πx).
pub fn embed(p_state: &FluidState, setup: &ReductionSetup) -> Result<FluidState, ReductionError> {
    if setup.coupling() > SETUP_TOL {
        return Err(ReductionError::InvalidSetup("frame is not block diagonal".into()));
    }
    embed_unchecked(p_state, setup)
}

/// [`embed`] without the setup check.
pub fn embed_unchecked(p_state: &FluidState, setup: &ReductionSetup) -> Result<FluidState, ReductionError> {
    if p_state.dim() != setup.p {
        return Err(ReductionError::GridMismatch(format!(
            "state has dimension {}, setup expects {}",
            p_state.dim(),
            setup.p
        )));
    }
    let grid = embedded_grid(&p_state.grid, setup.n)?;
    let lifted: Vec<SquareMatrix> = p_state.m.iter().map(|t| setup.lift(t)).collect();
    let (rho, m) = (0..grid.num_cells())
        .map(|i| {
            let j = reduced_index(&grid, &p_state.grid, i);
            (p_state.rho[j], lifted[j].clone())
        })
        .unzip();
    Ok(FluidState { grid, rho, m })
}

/// θ = ΠΘRi on the slice where every suppressed index is 0.
pub fn extract(n_state: &FluidState, setup: &ReductionSetup) -> Result<FluidState, ReductionError> {
    let (n, p) = (setup.n, setup.p);
    if n_state.dim() != n {
        return Err(ReductionError::GridMismatch(format!("state has dimension {}, setup expects {n}", n_state.dim())));
    }
    let grid = GridSpec::new(&n_state.grid.cells()[..p], &n_state.grid.spacing()[..p])?;
    let (rho, m) = (0..grid.num_cells())
        .map(|j| {
            let mut multi = grid.multi_index(j).to_vec();
            multi.resize(n, 0);
            let i = n_state.grid.linear_index(&multi);
            let full = &n_state.m[i] * &setup.frame;
            (n_state.rho[i], SquareMatrix::from_fn(p, |a, b| full[(a, b)]))
        })
        .unzip();
    Ok(FluidState { grid, rho, m })
}

fn reduced_index(full: &GridSpec, reduced: &GridSpec, i: usize) -> usize {
    let multi = full.multi_index(i);
    reduced.linear_index(&multi[..reduced.dim()])
}

fn slice_index(grid: &GridSpec, p: usize, i: usize) -> usize {
    let mut multi = grid.multi_index(i);
    for m in multi.iter_mut().skip(p) {
        *m = 0;
    }
    grid.linear_index(&multi)
}

/// (max |Ωⱼ − Ωⱼ⁰| over j ≥ p, max variation of ρ and Θ along suppressed axes).
pub fn structure_drift(state: &FluidState, setup: &ReductionSetup) -> (f64, f64) {
    let (n, p) = (setup.n, setup.p);
    let constants: Vec<Vec<f64>> = (p..n).map(|j| setup.constant_column(j)).collect();
    let mut omega: f64 = 0.0;
    let mut axes: f64 = 0.0;
    for (i, theta) in state.m.iter().enumerate() {
        for (j, c0) in (p..n).zip(&constants) {
            for (r, c) in c0.iter().enumerate() {
                omega = omega.max((theta[(r, j)] - c).abs());
            }
        }
        let s = slice_index(&state.grid, p, i);
        axes = axes.max((state.rho[i] - state.rho[s]).abs());
        axes = axes.max((theta - &state.m[s]).max_abs());
    }
    (omega, axes)
}

/// One row of a reduction report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionRow {
    pub t: f64,
    pub drift_omega: f64,
    pub drift_axes: f64,
    /// NaN when no reduced run was compared.
    pub l1_diff: f64,
    pub linf_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReductionReport {
    pub rows: Vec<ReductionRow>,
}

impl ReductionReport {
    pub fn max_drift_omega(&self) -> f64 {
        self.rows.iter().map(|r| r.drift_omega).fold(0.0, f64::max)
    }

    pub fn max_drift_axes(&self) -> f64 {
        self.rows.iter().map(|r| r.drift_axes).fold(0.0, f64::max)
    }

    pub fn last(&self) -> Option<&ReductionRow> {
        self.rows.last()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,drift_omega,drift_axes,l1_diff,linf_diff")?;
        for r in &self.rows {
            writeln!(w, "{},{:e},{:e},{:e},{:e}", r.t, r.drift_omega, r.drift_axes, r.l1_diff, r.linf_diff)?;
        }
        Ok(())
    }
}

fn fixed_steps(dt: f64, t_end: f64) -> (usize, f64) {
    let steps = (t_end / dt).ceil().max(1.0) as usize;
    (steps, t_end / steps as f64)
}

/// Evolves `initial` with the configured scheme to `cfg.t_end` using a fixed
/// step and records the structure drift after every step.
pub fn check_invariance_propagation(
    initial: &FluidState,
    setup: &ReductionSetup,
    c: &Coefficients,
    cfg: &SchemeConfig,
) -> Result<ReductionReport, ReductionError> {
    let (steps, dt) = fixed_steps(stable_time_step(initial, c, cfg), cfg.t_end);
    let mut state = initial.clone();
    let mut report = ReductionReport::default();
    let record = |t: f64, s: &FluidState, report: &mut ReductionReport| {
        let (drift_omega, drift_axes) = structure_drift(s, setup);
        report.rows.push(ReductionRow {
            t,
            drift_omega,
            drift_axes,
            l1_diff: f64::NAN,
            linf_diff: f64::NAN,
        });
    };
    record(0.0, &state, &mut report);
    for k in 0..steps {
        let t = k as f64 * dt;
        state = advance(&state, c, cfg, dt).map_err(|error| RunAbort { time: t, error })?;
        record((k + 1) as f64 * dt, &state, &mut report);
    }
    Ok(report)
}

/// Runs the embedded n = 3 state with the configured scheme next to the
/// 2D SOH system with c2 replaced by c2 − 2c4, both with the same fixed
/// step, and records the L¹ and L∞ differences of (ρ, Ω) with
/// Ω = ΠΘe₁ on the slice of the 3D run.
pub fn compare_reduced(
    p_initial: &FluidState,
    setup: &ReductionSetup,
    c: &Coefficients,
    cfg: &SchemeConfig,
) -> Result<ReductionReport, ReductionError> {
    if setup.p != 2 || p_initial.dim() != 2 {
        return Err(ReductionError::GridMismatch(format!(
            "the SOH comparison needs a 2D initial state and p = 2 (got {} and {})",
            p_initial.dim(),
            setup.p
        )));
    }
    let mut full = embed(p_initial, setup)?;
    let e = setup.reduced_reference();
    let v = p_initial
        .m
        .iter()
        .map(|t| {
            let o = t.mul_vec(&e);
            [c.c1 * o[0], c.c1 * o[1]]
        })
        .collect();
    let mut soh = SohState {
        grid: p_initial.grid.clone(),
        rho: p_initial.rho.clone(),
        v,
    };
    let (steps, dt) = fixed_steps(stable_time_step(&full, c, cfg), cfg.t_end);
    let mut report = ReductionReport::default();
    let record = |t: f64, full: &FluidState, soh: &SohState, report: &mut ReductionReport| {
        let (drift_omega, drift_axes) = structure_drift(full, setup);
        let (l1_diff, linf_diff) = soh_difference(full, soh, c.c1);
        report.rows.push(ReductionRow {
            t,
            drift_omega,
            drift_axes,
            l1_diff,
            linf_diff,
        });
    };
    record(0.0, &full, &soh, &mut report);
    for k in 0..steps {
        let t = k as f64 * dt;
        let abort = |error: SolverError| RunAbort { time: t, error };
        full = advance(&full, c, cfg, dt).map_err(abort)?;
        soh = soh_direct_advance(&soh, c, SohVariant::C2Shifted, cfg, dt).map_err(abort)?;
        record((k + 1) as f64 * dt, &full, &soh, &mut report);
    }
    Ok(report)
}

/// L¹ (area-weighted) and L∞ differences of (ρ, Ωx, Ωy) between the slice
/// of the embedded run and a SOH state.
pub fn soh_difference(full: &FluidState, soh: &SohState, c1: f64) -> (f64, f64) {
    let reduced = &soh.grid;
    let mut l1 = 0.0;
    let mut linf: f64 = 0.0;
    for j in 0..reduced.num_cells() {
        let mut multi = reduced.multi_index(j).to_vec();
        multi.resize(full.dim(), 0);
        let i = full.grid.linear_index(&multi);
        let d = [
            full.rho[i] - soh.rho[j],
            full.m[i][(0, 0)] - soh.v[j][0] / c1,
            full.m[i][(1, 0)] - soh.v[j][1] / c1,
        ];
        for x in d {
            l1 += x.abs();
            linf = linf.max(x.abs());
        }
    }
    (l1 * reduced.cell_volume(), linf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sohb_rhs, sohb_rhs_in_frame};
    use crate::solver::Scheme;
    use std::f64::consts::PI;

    fn wave2(cells: usize) -> FluidState {
        let g = GridSpec::cube(2, cells, 1.0).unwrap();
        let k = 2.0 * PI;
        FluidState::from_angle(
            g,
            |x| 1.0 + 0.2 * (k * x[0]).sin() * (k * x[1]).cos(),
            |x| 0.6 * (k * x[1]).sin() + 0.3 * (k * x[0]).cos(),
        )
    }

    fn block_frame() -> ReductionSetup {
        let r2 = Rotation::planar(0.7).into_matrix();
        let frame = SquareMatrix::from_fn(3, |i, j| match (i, j) {
            (2, 2) => 1.0,
            (2, _) | (_, 2) => 0.0,
            _ => r2[(i, j)],
        });
        ReductionSetup::new(3, 2, Rotation::new(frame).unwrap(), Rotation::identity(1)).unwrap()
    }

    #[test]
    fn setup_validation() {
        assert!(ReductionSetup::identity(3, 3).is_err());
        assert!(ReductionSetup::identity(3, 1).is_err());
        let tilt = Rotation::from_axis_angle([0.3, 0.0, 0.0]);
        assert!(matches!(
            ReductionSetup::new(3, 2, tilt, Rotation::identity(1)),
            Err(ReductionError::InvalidSetup(_))
        ));
    }

    #[test]
    fn uniform_embeds_to_uniform() {
        let g = GridSpec::cube(2, 6, 1.0).unwrap();
        let s = FluidState::uniform(g, 1.3, &Rotation::identity(2));
        let e = embed(&s, &ReductionSetup::identity(3, 2).unwrap()).unwrap();
        assert_eq!(e.grid.cells(), &[6, 6, 4]);
        assert!(e.m.iter().all(|m| *m == SquareMatrix::identity(3)));
        assert!(e.rho.iter().all(|&r| r == 1.3));
    }

    #[test]
    fn block_structure_and_round_trip() {
        let s = wave2(8);
        let setup = ReductionSetup::identity(3, 2).unwrap();
        let e = embed(&s, &setup).unwrap();
        e.check_rotation_field().unwrap();
        for (i, m) in e.m.iter().enumerate() {
            let j = reduced_index(&e.grid, &s.grid, i);
            assert_eq!(m[(2, 2)], 1.0);
            for a in 0..2 {
                assert_eq!(m[(a, 2)], 0.0);
                assert_eq!(m[(2, a)], 0.0);
                for b in 0..2 {
                    assert_eq!(m[(a, b)], s.m[j][(a, b)]);
                }
            }
        }
        assert_eq!(structure_drift(&e, &setup), (0.0, 0.0));
        assert_eq!(extract(&e, &setup).unwrap(), s);

        let setup = block_frame();
        let e = embed(&s, &setup).unwrap();
        let back = extract(&e, &setup).unwrap();
        for (a, b) in back.m.iter().zip(&s.m) {
            assert!((a - b).max_abs() < 1e-15);
        }
    }

    #[test]
    fn rhs_block_matches_reduced_rhs() {
        let s = wave2(10);
        let c = Coefficients::new(1.0, 0.7, 1.2, 0.4);
        for setup in [ReductionSetup::identity(3, 2).unwrap(), block_frame()] {
            let e = embed(&s, &setup).unwrap();
            let full = sohb_rhs(&e, &c).unwrap();
            let reduced = sohb_rhs_in_frame(&s, &c, &setup.reduced_reference()).unwrap();
            for i in 0..e.grid.num_cells() {
                let j = reduced_index(&e.grid, &s.grid, i);
                let d = &full.dtheta[i] * setup.frame();
                assert!(d[(2, 2)].abs() < 1e-12 && d[(0, 2)].abs() < 1e-12 && d[(2, 1)].abs() < 1e-12);
                for a in 0..2 {
                    for b in 0..2 {
                        assert!((d[(a, b)] - reduced.dtheta[j][(a, b)]).abs() < 1e-12);
                    }
                }
                assert!((full.drho[i] - reduced.drho[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn invariance_under_both_schemes() {
        let s = wave2(8);
        let c = Coefficients::new(1.0, 0.7, 1.2, 0.4);
        for scheme in [Scheme::DirectSmooth, Scheme::SplittingRelaxation] {
            let cfg = SchemeConfig {
                scheme,
                t_end: 0.05,
                ..SchemeConfig::default()
            };
            for setup in [ReductionSetup::identity(3, 2).unwrap(), block_frame()] {
                let e = embed(&s, &setup).unwrap();
                let r = check_invariance_propagation(&e, &setup, &c, &cfg).unwrap();
                assert!(r.rows.len() > 2);
                assert!(r.max_drift_omega() <= 1e-10, "{scheme}: {}", r.max_drift_omega());
                assert!(r.max_drift_axes() <= 1e-10, "{scheme}: {}", r.max_drift_axes());
            }
        }
    }

    #[test]
    fn tilted_setup_is_flagged() {
        let s = wave2(8);
        let tilt = Rotation::from_axis_angle([0.3, 0.0, 0.0]).into_matrix();
        let setup = ReductionSetup::new_unchecked(3, 2, tilt, SquareMatrix::identity(1)).unwrap();
        assert!(embed(&s, &setup).is_err());
        let e = embed_unchecked(&s, &setup).unwrap();
        let c = Coefficients::new(1.0, 0.7, 1.2, 0.4);
        let cfg = SchemeConfig {
            scheme: Scheme::DirectSmooth,
            t_end: 0.02,
            ..SchemeConfig::default()
        };
        let r = check_invariance_propagation(&e, &setup, &c, &cfg).unwrap();
        assert!(r.max_drift_omega() > 1e-3);
    }

    #[test]
    fn c4_zero_matches_soh_closely() {
        let s = wave2(16);
        let c = Coefficients::new(1.0, 0.7, 1.2, 0.0);
        let cfg = SchemeConfig {
            scheme: Scheme::DirectSmooth,
            t_end: 0.05,
            ..SchemeConfig::default()
        };
        let r = compare_reduced(&s, &ReductionSetup::identity(3, 2).unwrap(), &c, &cfg).unwrap();
        assert_eq!(r.rows[0].linf_diff, 0.0);
        // the two schemes differ only in how Θ's derivatives are formed
        assert!(r.last().unwrap().linf_diff < 1e-3, "{:?}", r.last());

        let u = FluidState::uniform(GridSpec::cube(2, 8, 1.0).unwrap(), 1.0, &Rotation::planar(0.4));
        let r = compare_reduced(&u, &ReductionSetup::identity(3, 2).unwrap(), &c, &cfg).unwrap();
        assert!(r.rows.iter().all(|row| row.linf_diff < 1e-14));
    }

    #[test]
    fn report_csv() {
        let r = ReductionReport {
            rows: vec![ReductionRow {
                t: 0.5,
                drift_omega: 0.0,
                drift_axes: 0.0,
                l1_diff: 1e-3,
                linf_diff: 2e-3,
            }],
        };
        let mut out = Vec::new();
        r.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("t,drift_omega,drift_axes,l1_diff,linf_diff\n0.5,"));
    }
}
