//! Exact-in-law fractional Brownian motion.
//!
//! [`FbmCholesky`] factors the covariance of the increments (fractional
//! Gaussian noise) once and reuses the factor for every path; it is capped at
//! [`FBM_CHOLESKY_MAX_STEPS`] steps. [`DaviesHarte`] embeds the same Toeplitz
//! covariance in a circulant matrix and samples with two FFTs per path.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{cumulate, PathSeed, ProcessKind, SamplePath, TimeGrid};
use crate::constants::HurstBounds;
use crate::error::{Error, Result};

pub const FBM_CHOLESKY_MAX_STEPS: usize = 4096;

/// Autocovariance of unit-spaced fractional Gaussian noise at lag `k`.
fn fgn_autocov(h: f64, k: usize) -> f64 {
    let k = k as f64;
    let p = 2.0 * h;
    0.5 * ((k + 1.0).powf(p) - 2.0 * k.powf(p) + (k - 1.0).abs().powf(p))
}

pub struct FbmCholesky {
    grid: TimeGrid,
    h: f64,
    lower: DMatrix<f64>,
}

impl FbmCholesky {
    pub fn new(grid: &TimeGrid, h: f64) -> Result<Self> {
        Self::with_cap(grid, h, FBM_CHOLESKY_MAX_STEPS)
    }

    pub fn with_cap(grid: &TimeGrid, h: f64, cap: usize) -> Result<Self> {
        grid.require_origin()?;
        let h = HurstBounds::default().validate(h)?;
        let n = grid.n_steps();
        if n > cap {
            return Err(Error::ResourceCap { what: "fbm cholesky steps", requested: n, cap });
        }
        let scale = grid.dt().powf(2.0 * h);
        let acov: Vec<f64> = (0..n).map(|k| scale * fgn_autocov(h, k)).collect();
        let cov = DMatrix::from_fn(n, n, |i, j| acov[i.abs_diff(j)]);
        let chol = cov.cholesky().ok_or(Error::NotPositiveDefinite(n))?;
        Ok(Self { grid: *grid, h, lower: chol.unpack() })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn sample(&self, seed: impl Into<PathSeed>) -> SamplePath {
        let n = self.grid.n_steps();
        let mut rng = seed.into().rng();
        let z = DVector::from_iterator(n, (0..n).map(|_| StandardNormal.sample(&mut rng)));
        let inc = &self.lower * z;
        SamplePath { grid: self.grid, values: cumulate(inc.as_slice()), label: ProcessKind::Fbm }
    }
}

/// Circulant-embedding sampler for long fBm paths.
pub struct DaviesHarte {
    grid: TimeGrid,
    h: f64,
    sqrt_eig: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl DaviesHarte {
    pub fn new(grid: &TimeGrid, h: f64) -> Result<Self> {
        grid.require_origin()?;
        let h = HurstBounds::default().validate(h)?;
        let n = grid.n_steps();
        let m = 2 * n;
        let mut row: Vec<Complex<f64>> = (0..m)
            .map(|j| {
                let lag = if j <= n { j } else { m - j };
                Complex::new(fgn_autocov(h, lag), 0.0)
            })
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(m);
        fft.process(&mut row);
        let tol = 1e-10 * row[0].re.abs().max(1.0);
        let mut sqrt_eig = Vec::with_capacity(m);
        for c in &row {
            if c.re < -tol {
                return Err(Error::NotPositiveDefinite(n));
            }
            sqrt_eig.push((c.re.max(0.0) / m as f64).sqrt());
        }
        Ok(Self { grid: *grid, h, sqrt_eig, fft })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn sample(&self, seed: impl Into<PathSeed>) -> SamplePath {
        let n = self.grid.n_steps();
        let m = 2 * n;
        let mut rng = seed.into().rng();
        let mut draw = || -> f64 { StandardNormal.sample(&mut rng) };
        let mut w = vec![Complex::new(0.0, 0.0); m];
        w[0] = Complex::new(self.sqrt_eig[0] * draw(), 0.0);
        w[n] = Complex::new(self.sqrt_eig[n] * draw(), 0.0);
        let half = std::f64::consts::FRAC_1_SQRT_2;
        for k in 1..n {
            let (a, b) = (draw(), draw());
            let s = self.sqrt_eig[k] * half;
            w[k] = Complex::new(s * a, s * b);
            w[m - k] = w[k].conj();
        }
        self.fft.process(&mut w);
        let scale = self.grid.dt().powf(self.h);
        let inc: Vec<f64> = w[..n].iter().map(|c| c.re * scale).collect();
        SamplePath { grid: self.grid, values: cumulate(&inc), label: ProcessKind::Fbm }
    }
}

/// Exact fBm path via Cholesky of the increment covariance (at most 4096 steps).
pub fn simulate_fbm_path(grid: &TimeGrid, h: f64, seed: impl Into<PathSeed>) -> Result<SamplePath> {
    Ok(FbmCholesky::new(grid, h)?.sample(seed))
}

/// Exact fBm path via circulant embedding; no step cap.
pub fn simulate_fbm_path_fft(grid: &TimeGrid, h: f64, seed: impl Into<PathSeed>) -> Result<SamplePath> {
    Ok(DaviesHarte::new(grid, h)?.sample(seed))
}
