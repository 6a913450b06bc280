//! Browser bindings: a speed sweep, relaxation curves and a small 2D run.
//! Plain functions carry the logic so they can be tested natively; the
//! `#[wasm_bindgen]` wrappers only convert errors.

use sohb::grid::GridSpec;
use sohb::io::{InitialCondition, InitialKind};
use sohb::lin_analysis::{hyperbolicity_report, Coefficients};
use sohb::model::FluidState;
use sohb::solver::{advance, relax_ode_exact, stable_time_step, SchemeConfig};
use wasm_bindgen::prelude::*;

const SWEEP_COLUMNS: usize = 6;

fn coefficients(c1: f64, c2: f64, c3: f64, c4: f64) -> Result<Coefficients, String> {
    let c = Coefficients::new(c1, c2, c3, c4);
    let v = c.violations();
    if v.is_empty() {
        Ok(c)
    } else {
        Err(v.join("; "))
    }
}

/// Rows of `theta, lambda_plus, lambda_minus, mu_plus, mu_minus, beta`, flattened.
pub fn speed_rows(n: usize, c1: f64, c2: f64, c3: f64, c4: f64, samples: usize) -> Result<Vec<f64>, String> {
    let c = coefficients(c1, c2, c3, c4)?;
    let report = hyperbolicity_report(&c, n, samples).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(SWEEP_COLUMNS * report.samples.len());
    for s in &report.samples {
        let p = &s.speeds;
        out.extend([s.theta, p.lambda_plus, p.lambda_minus, p.mu_plus, p.mu_minus, p.beta]);
    }
    Ok(out)
}

/// Eigenvalues of MMᵀ at `points` times in [0, t_max], one row per time
/// starting with t.
pub fn relax_rows(d0: &[f64], alpha: f64, t_max: f64, points: usize) -> Result<Vec<f64>, String> {
    let points = points.max(2);
    let mut out = Vec::with_capacity(points * (d0.len() + 1));
    for k in 0..points {
        let t = t_max * k as f64 / (points - 1) as f64;
        out.push(t);
        out.extend(relax_ode_exact(d0, alpha, t).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn speed_sweep(n: usize, c1: f64, c2: f64, c3: f64, c4: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    speed_rows(n, c1, c2, c3, c4, samples).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn relax_curves(d0: Vec<f64>, alpha: f64, t_max: f64, points: usize) -> Result<Vec<f64>, JsError> {
    relax_rows(&d0, alpha, t_max, points).map_err(|e| JsError::new(&e))
}

/// A periodic 2D splitting-scheme run on the unit square.
#[wasm_bindgen]
pub struct Simulation {
    state: FluidState,
    coefficients: Coefficients,
    scheme: SchemeConfig,
    t: f64,
}

impl Simulation {
    pub fn create(cells: usize, kind: &str, c1: f64, c2: f64, c3: f64, c4: f64) -> Result<Self, String> {
        let coefficients = coefficients(c1, c2, c3, c4)?;
        let kind: InitialKind = kind.parse()?;
        if kind == InitialKind::EmbeddedReduction {
            return Err("embedded_reduction needs a 3D grid".into());
        }
        let grid = GridSpec::cube(2, cells, 1.0).map_err(|e| e.to_string())?;
        let state = InitialCondition::new(kind).build(&grid, 1);
        Ok(Self {
            state,
            coefficients,
            scheme: SchemeConfig::default(),
            t: 0.0,
        })
    }

    pub fn advance_steps(&mut self, steps: usize) -> Result<f64, String> {
        for _ in 0..steps {
            let dt = stable_time_step(&self.state, &self.coefficients, &self.scheme);
            self.state = advance(&self.state, &self.coefficients, &self.scheme, dt)
                .map_err(|e| format!("t = {}: {e}", self.t))?;
            self.t += dt;
        }
        Ok(self.t)
    }

    pub fn state(&self) -> &FluidState {
        &self.state
    }
}

#[wasm_bindgen]
impl Simulation {
    /// `kind` is one of uniform, density_pulse, angle_wave, manufactured.
    #[wasm_bindgen(constructor)]
    pub fn new(cells: usize, kind: &str, c1: f64, c2: f64, c3: f64, c4: f64) -> Result<Simulation, JsError> {
        Self::create(cells, kind, c1, c2, c3, c4).map_err(|e| JsError::new(&e))
    }

    /// Takes `steps` stable steps and returns the new time.
    pub fn step(&mut self, steps: usize) -> Result<f64, JsError> {
        self.advance_steps(steps).map_err(|e| JsError::new(&e))
    }

    pub fn cells(&self) -> usize {
        self.state.grid.cells()[0]
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn mass(&self) -> f64 {
        self.state.total_mass()
    }

    /// Density in storage order (axis 0 fastest).
    pub fn rho(&self) -> Vec<f64> {
        self.state.rho.clone()
    }

    /// Rotation angle of each body frame.
    pub fn angle(&self) -> Vec<f64> {
        self.state.m.iter().map(|m| m[(1, 0)].atan2(m[(0, 0)])).collect()
    }
}
