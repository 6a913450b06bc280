//! Fourier symbol of the model linearised about a uniform state with Θ₀ = I,
//! closed-form characteristic speeds and hyperbolicity classification.

use std::fmt;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::algebra::SquareMatrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinError {
    #[error("angle {0} outside [0, π)")]
    InvalidAngle(f64),
    #[error("background density must be positive, got {0}")]
    InvalidDensity(f64),
    #[error("dimension must be at least 2, got {0}")]
    InvalidDimension(usize),
    #[error("invalid coefficients: {}", .0.join("; "))]
    InvalidCoefficients(Vec<String>),
    #[error("complex eigenvalue {re} ± {im}i")]
    ComplexSpectrum { re: f64, im: f64 },
}

/// Model constants. `eps_relax` is the relaxation time of the conservative
/// system, `nu_visc` the viscosity of the viscous correction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub eps_relax: f64,
    pub nu_visc: f64,
}

impl Coefficients {
    pub fn new(c1: f64, c2: f64, c3: f64, c4: f64) -> Self {
        Self {
            c1,
            c2,
            c3,
            c4,
            eps_relax: 1e-3,
            nu_visc: 0.0,
        }
    }

    /// Every violated constraint, as human-readable conditions.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let finite = [self.c1, self.c2, self.c3, self.c4, self.eps_relax, self.nu_visc];
        if finite.iter().any(|x| !x.is_finite()) {
            v.push("coefficients must be finite".to_string());
        }
        if !(self.c1 > 0.0) {
            v.push(format!("c1 > 0 required (c1 = {})", self.c1));
        }
        if !(self.c3 > 0.0) {
            v.push(format!("c3 > 0 required (c3 = {})", self.c3));
        }
        if !(self.eps_relax > 0.0) {
            v.push(format!("eps_relax > 0 required (eps_relax = {})", self.eps_relax));
        }
        if !(self.nu_visc >= 0.0) {
            v.push(format!("nu_visc >= 0 required (nu_visc = {})", self.nu_visc));
        }
        v
    }

    pub fn validate(&self) -> Result<(), LinError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(LinError::InvalidCoefficients(v))
        }
    }
}

/// Size 1 + n(n−1)/2 of the linearised unknown (σ̂, Â_kl for k < l).
pub fn symbol_size(n: usize) -> usize {
    1 + n * (n - 1) / 2
}

/// Position of Â_kl (0-based, k < l) in the unknown vector; σ̂ sits at 0.
pub fn pair_index(n: usize, k: usize, l: usize) -> usize {
    debug_assert!(k < l && l < n);
    1 + (0..k).map(|r| n - 1 - r).sum::<usize>() + (l - k - 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSymbol {
    pub n: usize,
    pub theta: f64,
    pub matrix: SquareMatrix,
}

impl SpectralSymbol {
    /// Largest entry outside the (σ̂, Â₁₂), (Â₁ₖ, Â₂ₖ) and Â_kl blocks.
    pub fn off_block_max(&self) -> f64 {
        let n = self.n;
        let size = symbol_size(n);
        let mut block = vec![usize::MAX; size];
        block[0] = 0;
        block[pair_index(n, 0, 1)] = 0;
        for k in 2..n {
            block[pair_index(n, 0, k)] = k;
            block[pair_index(n, 1, k)] = k;
        }
        let mut next = n;
        for k in 2..n {
            for l in k + 1..n {
                block[pair_index(n, k, l)] = next;
                next += 1;
            }
        }
        let mut worst = 0.0f64;
        for i in 0..size {
            for j in 0..size {
                if block[i] != block[j] {
                    worst = worst.max(self.matrix[(i, j)].abs());
                }
            }
        }
        worst
    }
}

pub fn assemble_symbol(c: &Coefficients, rho0: f64, n: usize, theta: f64) -> Result<SpectralSymbol, LinError> {
    if n < 2 {
        return Err(LinError::InvalidDimension(n));
    }
    if !(0.0..std::f64::consts::PI).contains(&theta) {
        return Err(LinError::InvalidAngle(theta));
    }
    if !(rho0 > 0.0 && rho0.is_finite()) {
        return Err(LinError::InvalidDensity(rho0));
    }
    c.validate()?;
    let (s, co) = theta.sin_cos();
    let mut m = SquareMatrix::zeros(symbol_size(n));
    let a12 = pair_index(n, 0, 1);
    m[(0, 0)] = c.c1 * co;
    m[(0, a12)] = -c.c1 * rho0 * s;
    m[(a12, 0)] = -(c.c3 / rho0) * s;
    m[(a12, a12)] = (c.c2 - 2.0 * c.c4) * co;
    for k in 2..n {
        let i1 = pair_index(n, 0, k);
        let i2 = pair_index(n, 1, k);
        m[(i1, i1)] = (c.c2 - 2.0 * c.c4) * co;
        m[(i1, i2)] = -c.c4 * s;
        m[(i2, i1)] = -c.c4 * s;
        m[(i2, i2)] = c.c2 * co;
    }
    for k in 2..n {
        for l in k + 1..n {
            let i = pair_index(n, k, l);
            m[(i, i)] = c.c2 * co;
        }
    }
    Ok(SpectralSymbol { n, theta, matrix: m })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    StrictlyHyperbolic,
    Hyperbolic,
    WeaklyHyperbolicOnly,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::StrictlyHyperbolic => "strictly_hyperbolic",
            Verdict::Hyperbolic => "hyperbolic",
            Verdict::WeaklyHyperbolicOnly => "weakly_hyperbolic_only",
        }
    }

    fn rank(self) -> u8 {
        match self {
            Verdict::StrictlyHyperbolic => 0,
            Verdict::Hyperbolic => 1,
            Verdict::WeaklyHyperbolicOnly => 2,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedSet {
    pub n: usize,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub mu_plus: f64,
    pub mu_minus: f64,
    pub beta: f64,
    pub verdict: Verdict,
}

impl SpeedSet {
    pub fn mu_multiplicity(&self) -> usize {
        self.n - 2
    }

    pub fn beta_multiplicity(&self) -> usize {
        (self.n - 2) * (self.n.saturating_sub(3)) / 2
    }

    /// All characteristic speeds with multiplicity, ascending.
    pub fn multiset(&self) -> Vec<f64> {
        let mut v = vec![self.lambda_plus, self.lambda_minus];
        for _ in 0..self.mu_multiplicity() {
            v.push(self.mu_plus);
            v.push(self.mu_minus);
        }
        v.extend(std::iter::repeat(self.beta).take(self.beta_multiplicity()));
        v.sort_by(f64::total_cmp);
        v
    }
}

/// Relative tolerance used to decide that two closed-form speeds coincide.
const COINCIDENCE_TOL: f64 = 1e-12;

/// Discriminant of the (σ̂, Â₁₂) block; nonnegative whenever c1 c3 > 0.
pub fn lambda_discriminant(c: &Coefficients, theta: f64) -> f64 {
    let (s, co) = theta.sin_cos();
    let d = c.c1 - (c.c2 - 2.0 * c.c4);
    d * d * co * co + 4.0 * c.c1 * c.c3 * s * s
}

pub fn closed_form_speeds(c: &Coefficients, n: usize, theta: f64) -> SpeedSet {
    let (s, co) = theta.sin_cos();
    let root = lambda_discriminant(c, theta).sqrt();
    let mean = (c.c1 + c.c2 - 2.0 * c.c4) * co;
    let lambda_plus = 0.5 * (mean + root);
    let lambda_minus = 0.5 * (mean - root);
    let mu_plus = (c.c2 - c.c4) * co + c.c4;
    let mu_minus = (c.c2 - c.c4) * co - c.c4;
    let beta = c.c2 * co;
    let mut set = SpeedSet {
        n,
        lambda_plus,
        lambda_minus,
        mu_plus,
        mu_minus,
        beta,
        verdict: Verdict::Hyperbolic,
    };

    let scale = 1.0 + c.c1.abs() + c.c2.abs() + c.c3.abs() + c.c4.abs();
    let close = |a: f64, b: f64| (a - b).abs() <= COINCIDENCE_TOL * scale;
    let degenerate_lambda = close(c.c1, c.c2 - 2.0 * c.c4) && s.abs() <= COINCIDENCE_TOL;
    set.verdict = if degenerate_lambda {
        Verdict::WeaklyHyperbolicOnly
    } else {
        let values = set.multiset();
        let simple = values.windows(2).all(|w| !close(w[0], w[1]));
        if simple {
            Verdict::StrictlyHyperbolic
        } else {
            Verdict::Hyperbolic
        }
    };
    set
}

/// Eigenvalues of the full assembled symbol, ascending.
pub fn numeric_speeds(sym: &SpectralSymbol) -> Result<Vec<f64>, LinError> {
    let (re, im) = numeric_spectrum(sym);
    if let Some((r, i)) = re.iter().zip(&im).find(|(_, i)| i.abs() > 1e-9) {
        return Err(LinError::ComplexSpectrum { re: *r, im: *i });
    }
    Ok(re)
}

/// Real and imaginary parts of the eigenvalues, sorted by real part.
pub fn numeric_spectrum(sym: &SpectralSymbol) -> (Vec<f64>, Vec<f64>) {
    let m = to_dmatrix(&sym.matrix);
    let mut ev: Vec<(f64, f64)> = m.complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect();
    ev.sort_by(|a, b| a.0.total_cmp(&b.0));
    ev.into_iter().unzip()
}

/// Outcome of the rank test on M − λI.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagonalizability {
    pub diagonalizable: bool,
    /// (eigenvalue, algebraic multiplicity, geometric multiplicity)
    pub clusters: Vec<(f64, usize, usize)>,
}

/// Eigenvalues closer than this (relative to the matrix norm) are treated as
/// one repeated eigenvalue.
const CLUSTER_TOL: f64 = 1e-7;
/// Singular values below this fraction of the largest are counted as zero.
const RANK_TOL: f64 = 1e-8;

/// Compares the geometric multiplicity dim ker(M − λI) with the algebraic
/// multiplicity for every distinct eigenvalue.
pub fn diagonalizability(sym: &SpectralSymbol) -> Result<Diagonalizability, LinError> {
    let speeds = numeric_speeds(sym)?;
    let size = sym.matrix.dim();
    let norm = sym.matrix.frobenius_norm().max(1.0);
    let mut clusters: Vec<(f64, usize)> = Vec::new();
    for &l in &speeds {
        match clusters.last_mut() {
            Some((mean, count)) if (l - *mean).abs() <= CLUSTER_TOL * norm => {
                *mean = (*mean * *count as f64 + l) / (*count + 1) as f64;
                *count += 1;
            }
            _ => clusters.push((l, 1)),
        }
    }
    let m = to_dmatrix(&sym.matrix);
    let mut out = Vec::with_capacity(clusters.len());
    let mut diagonalizable = true;
    for (lambda, alg) in clusters {
        let shifted = &m - DMatrix::identity(size, size) * lambda;
        let sv = shifted.singular_values();
        let smax = sv.max().max(norm);
        let nullity = sv.iter().filter(|&&s| s <= RANK_TOL * smax).count();
        if nullity < alg {
            diagonalizable = false;
        }
        out.push((lambda, alg, nullity));
    }
    Ok(Diagonalizability {
        diagonalizable,
        clusters: out,
    })
}

fn to_dmatrix(m: &SquareMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.dim(), m.dim(), m.as_slice())
}

#[derive(Debug, Clone)]
pub struct ThetaSample {
    pub theta: f64,
    pub speeds: SpeedSet,
    /// Largest gap between the sorted numeric and closed-form spectra.
    pub max_speed_error: f64,
    pub max_imag: f64,
    pub diagonalizable: bool,
}

#[derive(Debug, Clone)]
pub struct HyperbolicityReport {
    pub n: usize,
    pub coefficients: Coefficients,
    pub samples: Vec<ThetaSample>,
    /// Least favourable verdict over the sweep.
    pub worst: Verdict,
    pub strict_count: usize,
    /// The conservative intermediate system of the direction-only model is
    /// hyperbolic only when c2/c1 ≥ 1; set when that fails.
    pub intermediate_system_advisory: bool,
}

impl HyperbolicityReport {
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "theta,lambda_plus,lambda_minus,mu_plus,mu_minus,beta,verdict")?;
        for s in &self.samples {
            let p = &s.speeds;
            writeln!(
                w,
                "{:.12},{:.12},{:.12},{:.12},{:.12},{:.12},{}",
                s.theta, p.lambda_plus, p.lambda_minus, p.mu_plus, p.mu_minus, p.beta, p.verdict
            )?;
        }
        Ok(())
    }
}

/// Sweep θ over `samples` equally spaced angles kπ/samples in [0, π).
pub fn hyperbolicity_report(c: &Coefficients, n: usize, samples: usize) -> Result<HyperbolicityReport, LinError> {
    let samples = samples.max(1);
    let rows: Result<Vec<ThetaSample>, LinError> = crate::grid::map_cells(samples, |k| {
        let theta = std::f64::consts::PI * k as f64 / samples as f64;
        let sym = assemble_symbol(c, 1.0, n, theta)?;
        let speeds = closed_form_speeds(c, n, theta);
        let (re, im) = numeric_spectrum(&sym);
        let max_imag = im.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let max_speed_error = re
            .iter()
            .zip(speeds.multiset())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let diagonalizable = max_imag <= 1e-9 && diagonalizability(&sym)?.diagonalizable;
        Ok(ThetaSample {
            theta,
            speeds,
            max_speed_error,
            max_imag,
            diagonalizable,
        })
    })
    .into_iter()
    .collect();
    let samples = rows?;
    let worst = samples
        .iter()
        .map(|s| s.speeds.verdict)
        .max_by_key(|v| v.rank())
        .unwrap_or(Verdict::StrictlyHyperbolic);
    let strict_count = samples
        .iter()
        .filter(|s| s.speeds.verdict == Verdict::StrictlyHyperbolic)
        .count();
    Ok(HyperbolicityReport {
        n,
        coefficients: *c,
        samples,
        worst,
        strict_count,
        intermediate_system_advisory: c.c2 / c.c1 < 1.0,
    })
}
