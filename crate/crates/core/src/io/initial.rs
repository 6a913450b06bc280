use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{exp_antisym, AntisymmetricMatrix, SquareMatrix};
use crate::grid::GridSpec;
use crate::model::FluidState;
use crate::reduction::{embed, ReductionSetup, SUPPRESSED_THICKNESS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialKind {
    Uniform,
    DensityPulse,
    AngleWave,
    Manufactured,
    EmbeddedReduction,
}

impl InitialKind {
    pub const ALL: &'static [InitialKind] = &[
        InitialKind::Uniform,
        InitialKind::DensityPulse,
        InitialKind::AngleWave,
        InitialKind::Manufactured,
        InitialKind::EmbeddedReduction,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            InitialKind::Uniform => "uniform",
            InitialKind::DensityPulse => "density_pulse",
            InitialKind::AngleWave => "angle_wave",
            InitialKind::Manufactured => "manufactured",
            InitialKind::EmbeddedReduction => "embedded_reduction",
        }
    }

    /// Parameter names with their defaults.
    pub fn params(self) -> &'static [(&'static str, f64)] {
        match self {
            InitialKind::Uniform => &[("rho0", 1.0), ("angle", 0.0)],
            InitialKind::DensityPulse => &[("rho0", 1.0), ("amplitude", 0.5), ("width", 0.1), ("angle", 0.0)],
            InitialKind::AngleWave => &[("rho0", 1.0), ("amplitude", 0.5), ("mode", 1.0), ("angle", 0.0)],
            InitialKind::Manufactured => &[("rho0", 1.0), ("amplitude", 0.1), ("modes", 3.0)],
            InitialKind::EmbeddedReduction => &[
                ("p", 2.0),
                ("rho0", 1.0),
                ("amplitude", 0.2),
                ("angle_amplitude", 0.5),
                ("mode", 1.0),
            ],
        }
    }
}

impl fmt::Display for InitialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InitialKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL.iter().copied().find(|k| k.as_str() == s).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|k| k.as_str()).collect();
            format!("unknown initial condition '{s}', expected one of: {}", names.join(", "))
        })
    }
}

/// A named generator with every parameter filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialCondition {
    pub kind: InitialKind,
    params: BTreeMap<&'static str, f64>,
}

impl InitialCondition {
    pub fn new(kind: InitialKind) -> Self {
        Self {
            kind,
            params: kind.params().iter().copied().collect(),
        }
    }

    pub fn set(&mut self, key: &str, value: f64) -> Result<(), String> {
        match self.kind.params().iter().find(|(k, _)| *k == key) {
            Some((k, _)) => {
                self.params.insert(k, value);
                Ok(())
            }
            None => Err(format!("'{key}' is not a parameter of {}", self.kind)),
        }
    }

    pub fn get(&self, key: &str) -> f64 {
        self.params[key]
    }

    /// Parameters in declaration order.
    pub fn params(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        self.kind.params().iter().map(|(k, _)| (*k, self.params[k]))
    }

    pub fn violations(&self, grid: &GridSpec) -> Vec<String> {
        let mut v = Vec::new();
        let kind = self.kind;
        let mut need = |ok: bool, what: String| {
            if !ok {
                v.push(format!("{kind}: {what}"));
            }
        };
        for (k, x) in self.params() {
            need(x.is_finite(), format!("{k} must be finite"));
        }
        let rho0 = self.get("rho0");
        need(rho0 > 0.0, format!("rho0 > 0 required (rho0 = {rho0})"));
        let is_count = |x: f64| x >= 1.0 && x.fract() == 0.0;
        match kind {
            InitialKind::Uniform => {}
            InitialKind::DensityPulse => {
                let (a, w) = (self.get("amplitude"), self.get("width"));
                need(rho0 + a.min(0.0) > 0.0, format!("rho0 + amplitude > 0 required (amplitude = {a})"));
                need(w > 0.0, format!("width > 0 required (width = {w})"));
            }
            InitialKind::AngleWave => {
                let m = self.get("mode");
                need(is_count(m), format!("mode must be a positive integer (mode = {m})"));
            }
            InitialKind::Manufactured => {
                let (a, m) = (self.get("amplitude"), self.get("modes"));
                need((0.0..1.0).contains(&a), format!("0 <= amplitude < 1 required (amplitude = {a})"));
                need(is_count(m) && m <= 8.0, format!("modes must be an integer in 1..=8 (modes = {m})"));
            }
            InitialKind::EmbeddedReduction => {
                let (p, a, m) = (self.get("p"), self.get("amplitude"), self.get("mode"));
                let n = grid.dim();
                need(
                    (p == 2.0 || p == 3.0) && (p as usize) < n,
                    format!("p must be 2 or 3 and below n = {n} (p = {p})"),
                );
                need((0.0..1.0).contains(&a), format!("0 <= amplitude < 1 required (amplitude = {a})"));
                need(is_count(m), format!("mode must be a positive integer (mode = {m})"));
                if p >= 2.0 {
                    for (axis, &c) in grid.cells().iter().enumerate().skip(p as usize) {
                        need(
                            c == SUPPRESSED_THICKNESS,
                            format!("suppressed axis {axis} must have {SUPPRESSED_THICKNESS} cells (has {c})"),
                        );
                    }
                }
            }
        }
        v
    }

    /// The generated state on `grid`. Assumes [`Self::violations`] is empty.
    pub fn build(&self, grid: &GridSpec, seed: u64) -> FluidState {
        let n = grid.dim();
        let rho0 = self.get("rho0");
        let lengths = grid.lengths();
        match self.kind {
            InitialKind::Uniform => {
                let theta = plane_rotation(n, self.get("angle"));
                FluidState::from_fn(grid.clone(), |_| rho0, |_| theta.clone())
            }
            InitialKind::DensityPulse => {
                let (a, w) = (self.get("amplitude"), self.get("width"));
                let theta = plane_rotation(n, self.get("angle"));
                FluidState::from_fn(
                    grid.clone(),
                    |x| {
                        let r2: f64 = x.iter().zip(&lengths).map(|(xi, l)| (xi - 0.5 * l).powi(2)).sum();
                        rho0 + a * (-r2 / (w * w)).exp()
                    },
                    |_| theta.clone(),
                )
            }
            InitialKind::AngleWave => {
                let (a, m, phi0) = (self.get("amplitude"), self.get("mode"), self.get("angle"));
                FluidState::from_fn(
                    grid.clone(),
                    |_| rho0,
                    |x| plane_rotation(n, phi0 + a * (2.0 * PI * m * x[0] / lengths[0]).sin()),
                )
            }
            InitialKind::Manufactured => manufactured(grid, rho0, self.get("amplitude"), self.get("modes") as usize, seed),
            InitialKind::EmbeddedReduction => {
                let (reduced, setup) = self.reduced(grid);
                embed(&reduced, &setup).expect("validated embedding")
            }
        }
    }

    /// For `embedded_reduction`: the p-dimensional state and the setup it
    /// is embedded with.
    pub fn reduced(&self, grid: &GridSpec) -> (FluidState, ReductionSetup) {
        let p = self.get("p") as usize;
        let n = grid.dim();
        let g = GridSpec::new(&grid.cells()[..p], &grid.spacing()[..p]).expect("sub-grid of a valid grid");
        let (rho0, a, b, m) = (self.get("rho0"), self.get("amplitude"), self.get("angle_amplitude"), self.get("mode"));
        let l = g.lengths();
        let wave = move |x: &[f64], axis: usize| 2.0 * PI * m * x[axis] / l[axis];
        let rho = |x: &[f64]| rho0 * (1.0 + a * wave(x, 0).sin() * wave(x, 1).cos());
        let state = if p == 2 {
            FluidState::from_angle(g, rho, |x| b * (wave(x, 1).sin() + 0.5 * wave(x, 0).cos()))
        } else {
            FluidState::from_axis_angle(g, rho, |x| [b * wave(x, 1).sin(), b * wave(x, 2).cos(), b * wave(x, 0).sin()])
        };
        (state, ReductionSetup::identity(n, p).expect("validated p"))
    }
}

/// Rotation by `angle` in the (e₁, e₂) plane.
fn plane_rotation(n: usize, angle: f64) -> SquareMatrix {
    let (s, c) = angle.sin_cos();
    let mut m = SquareMatrix::identity(n);
    m[(0, 0)] = c;
    m[(0, 1)] = -s;
    m[(1, 0)] = s;
    m[(1, 1)] = c;
    m
}

struct Mode {
    k: Vec<f64>,
    phase: f64,
    weight: f64,
    generator: SquareMatrix,
}

/// Smooth random data: ρ = ρ₀(1 + a Σ wₜ sin(kₜ·x + φₜ)/modes) and
/// Θ = exp(Σ sin(kₜ·x + φₜ) Bₜ) with random antisymmetric Bₜ.
fn manufactured(grid: &GridSpec, rho0: f64, amplitude: f64, modes: usize, seed: u64) -> FluidState {
    let n = grid.dim();
    let lengths = grid.lengths();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<Mode> = (0..modes)
        .map(|_| {
            let mut k: Vec<f64> = (0..n).map(|_| rng.gen_range(-2i32..=2) as f64).collect();
            if k.iter().all(|&x| x == 0.0) {
                k[0] = 1.0;
            }
            let k = k.iter().zip(&lengths).map(|(ki, l)| 2.0 * PI * ki / l).collect();
            let b = SquareMatrix::from_fn(n, |_, _| rng.gen_range(-0.5..0.5));
            Mode {
                k,
                phase: rng.gen_range(0.0..2.0 * PI),
                weight: rng.gen_range(-1.0..1.0),
                generator: b.skew(),
            }
        })
        .collect();
    let count = modes.len() as f64;
    let phase = |m: &Mode, x: &[f64]| (m.k.iter().zip(x).map(|(k, xi)| k * xi).sum::<f64>() + m.phase).sin();
    FluidState::from_fn(
        grid.clone(),
        |x| rho0 * (1.0 + amplitude * modes.iter().map(|m| m.weight * phase(m, x)).sum::<f64>() / count),
        |x| {
            let mut a = SquareMatrix::zeros(n);
            for m in &modes {
                a.axpy(phase(m, x), &m.generator);
            }
            exp_antisym(&AntisymmetricMatrix::skew_part(&a)).into_matrix()
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_generator_builds_rotations() {
        let g3 = GridSpec::new(&[6, 6, 4], &[0.1, 0.1, 0.1]).unwrap();
        for &kind in InitialKind::ALL {
            let ic = InitialCondition::new(kind);
            assert!(ic.violations(&g3).is_empty(), "{kind}: {:?}", ic.violations(&g3));
            let s = ic.build(&g3, 3);
            s.check_rotation_field().unwrap();
            assert_eq!(s.grid, g3);
        }
    }

    #[test]
    fn manufactured_is_seeded() {
        let g = GridSpec::cube(2, 8, 1.0).unwrap();
        let ic = InitialCondition::new(InitialKind::Manufactured);
        assert_eq!(ic.build(&g, 11), ic.build(&g, 11));
        assert_ne!(ic.build(&g, 11), ic.build(&g, 12));
    }

    #[test]
    fn parameter_checks() {
        let g = GridSpec::cube(3, 8, 1.0).unwrap();
        let mut ic = InitialCondition::new(InitialKind::EmbeddedReduction);
        assert!(ic.violations(&g)[0].contains("suppressed axis 2"));
        assert!(ic.set("wavelength", 1.0).is_err());
        ic.set("rho0", -1.0).unwrap();
        assert!(ic.violations(&g).iter().any(|m| m.contains("rho0 > 0")));
        let mut pulse = InitialCondition::new(InitialKind::DensityPulse);
        pulse.set("amplitude", -2.0).unwrap();
        assert_eq!(pulse.violations(&g).len(), 1);
    }
}
