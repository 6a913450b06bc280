use thiserror::Error;

use super::fv::cfl_limit;
use super::{
    diffusion_limit, direct_smooth_advance, direct_time_step, splitting_advance, viscous_advance, Scheme, SchemeConfig,
    SolverError,
};
use crate::lin_analysis::Coefficients;
use crate::model::FluidState;

/// A run stopped by a solver error at simulation time `time`.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("aborted at t = {time}: {error}")]
pub struct RunAbort {
    pub time: f64,
    pub error: SolverError,
}

/// One step of the configured scheme.
pub fn advance(state: &FluidState, c: &Coefficients, cfg: &SchemeConfig, dt: f64) -> Result<FluidState, SolverError> {
    match cfg.scheme {
        Scheme::SplittingRelaxation => splitting_advance(state, c, cfg, dt),
        Scheme::DirectSmooth => direct_smooth_advance(state, c, cfg, dt),
        Scheme::ViscousDirect => viscous_advance(state, c, cfg, dt),
    }
}

/// The step the driver takes: cfl times the scheme's stability limit.
pub fn stable_time_step(state: &FluidState, c: &Coefficients, cfg: &SchemeConfig) -> f64 {
    match cfg.scheme {
        Scheme::SplittingRelaxation => {
            let sys = super::splitting::matrix_system(c, state.dim());
            cfg.cfl * cfl_limit(&sys, &state.grid, &super::splitting::pack(state))
        }
        Scheme::DirectSmooth => direct_time_step(state, c, cfg.cfl),
        Scheme::ViscousDirect => direct_time_step(state, c, cfg.cfl).min(cfg.cfl * diffusion_limit(state, c.nu_visc)),
    }
}

/// Advance to `cfg.t_end`. `observe` sees the initial state, every multiple
/// of `cfg.snapshot_interval` (when positive) and the final state; steps are
/// shortened to land on those times exactly.
pub fn run<E, F>(initial: FluidState, c: &Coefficients, cfg: &SchemeConfig, mut observe: F) -> Result<FluidState, E>
where
    E: From<RunAbort>,
    F: FnMut(f64, &FluidState) -> Result<(), E>,
{
    let mut t = 0.0;
    let mut state = initial;
    let mut next_snapshot = if cfg.snapshot_interval > 0.0 { cfg.snapshot_interval } else { f64::INFINITY };
    let mut snapshots = 1usize;
    observe(t, &state)?;
    while t < cfg.t_end {
        let target = next_snapshot.min(cfg.t_end);
        let dt_stable = stable_time_step(&state, c, cfg);
        let abort = |error| RunAbort { time: t, error };
        if !(dt_stable > 0.0 && dt_stable.is_finite()) {
            return Err(abort(SolverError::InvalidParameter(format!("no stable time step ({dt_stable})"))).into());
        }
        let remaining = target - t;
        let dt = if dt_stable >= remaining * (1.0 - 1e-12) { remaining } else { dt_stable };
        state = advance(&state, c, cfg, dt).map_err(abort)?;
        t = if dt == remaining { target } else { t + dt };
        if t >= next_snapshot {
            snapshots += 1;
            next_snapshot = snapshots as f64 * cfg.snapshot_interval;
            if t < cfg.t_end {
                observe(t, &state)?;
            }
        }
    }
    observe(t, &state)?;
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use std::f64::consts::PI;

    #[test]
    fn snapshot_times() {
        let g = GridSpec::cube(2, 8, 1.0).unwrap();
        let s = FluidState::from_angle(g, |x| 1.0 + 0.1 * (2.0 * PI * x[0]).sin(), |_| 0.3);
        let c = Coefficients::new(1.0, 1.0, 1.0, 0.0);
        let cfg = SchemeConfig {
            t_end: 0.3,
            snapshot_interval: 0.1,
            ..SchemeConfig::default()
        };
        let mut times = Vec::new();
        run::<RunAbort, _>(s, &c, &cfg, |t, _| {
            times.push(t);
            Ok(())
        })
        .unwrap();
        assert_eq!(times.len(), 4);
        for (t, e) in times.iter().zip([0.0, 0.1, 0.2, 0.3]) {
            assert!((t - e).abs() < 1e-12, "{times:?}");
        }
    }

    #[test]
    fn abort_carries_time() {
        let g = GridSpec::cube(2, 8, 1.0).unwrap();
        let mut s = FluidState::from_angle(g, |_| 1.0, |_| 0.0);
        s.m[2] = s.m[2].scale(1e-3);
        s.m[2][(0, 0)] = -1.0;
        let c = Coefficients::new(1.0, 1.0, 1.0, 0.0);
        let cfg = SchemeConfig {
            t_end: 0.1,
            ..SchemeConfig::default()
        };
        let err = run::<RunAbort, _>(s, &c, &cfg, |_, _| Ok(())).unwrap_err();
        assert_eq!(err.time, 0.0);
        assert!(err.error.cell().is_some());
    }
}
