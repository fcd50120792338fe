//! Sample paths of `M_H`, `V_H`, the modified process `V^eps`, fBm, Brownian
//! motion and the geometric stock models on uniform grids.
//!
//! All paths start at `t = 0` with value 0 (the stock at `s0`). Every path is
//! a pure function of `(grid, parameters, seed, path index)`: randomness is
//! drawn from a ChaCha stream selected by the path index, so batches are
//! reproducible regardless of how they are scheduled.

mod fbm;
pub mod moments;

use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::constants::{derive_constants, HurstConstants};
use crate::error::{Error, Result};
use crate::fmt::f17;

pub use fbm::{simulate_fbm_path, simulate_fbm_path_fft, DaviesHarte, FbmCholesky, FBM_CHOLESKY_MAX_STEPS};

/// Uniform partition of `[t0, t_end]` into `n_steps` intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    t0: f64,
    t_end: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t_end: f64, n_steps: usize) -> Result<Self> {
        if !(t0 >= 0.0) || !t_end.is_finite() || t_end <= t0 {
            return Err(Error::InvalidGrid(format!("need 0 <= t0 < t_end, got [{t0}, {t_end}]")));
        }
        if n_steps == 0 {
            return Err(Error::InvalidGrid("n_steps must be at least 1".into()));
        }
        Ok(Self { t0, t_end, n_steps })
    }

    /// Grid on `[0, t_end]`.
    pub fn unit(t_end: f64, n_steps: usize) -> Result<Self> {
        Self::new(0.0, t_end, n_steps)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dt(&self) -> f64 {
        (self.t_end - self.t0) / self.n_steps as f64
    }

    /// The `i`-th grid point; the last one is exactly `t_end`.
    pub fn time(&self, i: usize) -> f64 {
        if i == self.n_steps {
            self.t_end
        } else {
            self.t0 + (self.t_end - self.t0) * (i as f64 / self.n_steps as f64)
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|i| self.time(i)).collect()
    }

    fn require_origin(&self) -> Result<()> {
        if self.t0 != 0.0 {
            return Err(Error::InvalidGrid(format!("process paths start at t = 0, got t0 = {}", self.t0)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProcessKind {
    /// The martingale `M_H`.
    M,
    /// The Dobrić-Ojeda process `V_H`.
    V,
    /// The modified process `V^eps`.
    VEps,
    Fbm,
    Bm,
    Stock,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
    pub label: ProcessKind,
}

impl SamplePath {
    pub fn value_at(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// Writes the path as `t,value` CSV.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{},{}", f17(self.grid.time(i)), f17(*v))?;
        }
        Ok(())
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// Discretisation of the martingale `M_H`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum MScheme {
    /// Independent Gaussian increments with variance `c_M (t_i^(2-2H) - t_{i-1}^(2-2H))`.
    #[default]
    Exact,
    /// First-order rule `sqrt(c_M (2-2H)) t*^(1/2-H) sqrt(dt) X_i`, with `t*` the
    /// left endpoint (right endpoint on the first step).
    PaperEuler,
}

/// A seed together with the index of the path inside a batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PathSeed {
    pub seed: u64,
    pub index: u64,
}

impl PathSeed {
    pub fn new(seed: u64, index: u64) -> Self {
        Self { seed, index }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.index);
        rng
    }
}

impl From<u64> for PathSeed {
    fn from(seed: u64) -> Self {
        Self { seed, index: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    BlackScholes,
    FractionalBm,
    DobricOjeda,
}

impl ModelKind {
    pub fn tag(&self) -> &'static str {
        match self {
            ModelKind::BlackScholes => "bs",
            ModelKind::FractionalBm => "fbm",
            ModelKind::DobricOjeda => "do",
        }
    }
}

/// Market and process parameters for the geometric models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    /// Drift per year.
    pub mu: f64,
    pub sigma: f64,
    pub h: f64,
    /// Drift cut-on time of `V^eps` in years; 0 means the unmodified process.
    pub eps: f64,
    pub s0: f64,
    pub r: f64,
    pub model: ModelKind,
}

impl ModelParams {
    pub fn validate(&self) -> Result<HurstConstants> {
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidParameter(format!("sigma must be > 0, got {}", self.sigma)));
        }
        if !(self.s0 > 0.0) || !self.s0.is_finite() {
            return Err(Error::InvalidParameter(format!("s0 must be > 0, got {}", self.s0)));
        }
        if !(self.eps >= 0.0) {
            return Err(Error::InvalidParameter(format!("eps must be >= 0, got {}", self.eps)));
        }
        if !self.mu.is_finite() || !self.r.is_finite() {
            return Err(Error::InvalidParameter("mu and r must be finite".into()));
        }
        derive_constants(self.h)
    }
}

fn normals(seed: PathSeed, n: usize) -> Vec<f64> {
    let mut rng = seed.rng();
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Increments of `M_H` over each grid step.
fn martingale_increments(grid: &TimeGrid, k: &HurstConstants, seed: PathSeed, scheme: MScheme) -> Vec<f64> {
    let z = normals(seed, grid.n_steps());
    let h = k.h;
    match scheme {
        MScheme::Exact => {
            let p = 2.0 - 2.0 * h;
            z.iter()
                .enumerate()
                .map(|(i, x)| {
                    let var = k.c_m * (grid.time(i + 1).powf(p) - grid.time(i).powf(p));
                    var.sqrt() * x
                })
                .collect()
        }
        MScheme::PaperEuler => {
            let scale = (k.c_m * (2.0 - 2.0 * h)).sqrt() * grid.dt().sqrt();
            z.iter().enumerate().map(|(i, x)| scale * anchor_time(grid, i).powf(0.5 - h) * x).collect()
        }
    }
}

// Left endpoint of step i, replaced by the right endpoint when it is the origin.
fn anchor_time(grid: &TimeGrid, i: usize) -> f64 {
    let left = grid.time(i);
    if left > 0.0 {
        left
    } else {
        grid.time(i + 1)
    }
}

fn cumulate(increments: &[f64]) -> Vec<f64> {
    let mut values = Vec::with_capacity(increments.len() + 1);
    let mut acc = 0.0;
    values.push(acc);
    for d in increments {
        acc += d;
        values.push(acc);
    }
    values
}

/// Simulates `M_H` with `M(0) = 0`.
pub fn simulate_martingale_path(
    grid: &TimeGrid,
    h: f64,
    seed: impl Into<PathSeed>,
    scheme: MScheme,
) -> Result<SamplePath> {
    grid.require_origin()?;
    let k = derive_constants(h)?;
    let inc = martingale_increments(grid, &k, seed.into(), scheme);
    Ok(SamplePath { grid: *grid, values: cumulate(&inc), label: ProcessKind::M })
}

fn do_from_martingale(grid: &TimeGrid, k: &HurstConstants, m: &[f64]) -> Vec<f64> {
    let p = 2.0 * k.h - 1.0;
    m.iter()
        .enumerate()
        .map(|(i, mi)| {
            let t = grid.time(i);
            if t == 0.0 {
                0.0
            } else {
                k.c_psi * t.powf(p) * mi
            }
        })
        .collect()
}

/// Simulates `V_H(t) = c_psi t^(2H-1) M_H(t)` from the `M_H` path with the same seed.
pub fn simulate_do_path(grid: &TimeGrid, h: f64, seed: impl Into<PathSeed>, scheme: MScheme) -> Result<SamplePath> {
    grid.require_origin()?;
    let k = derive_constants(h)?;
    let inc = martingale_increments(grid, &k, seed.into(), scheme);
    let m = cumulate(&inc);
    Ok(SamplePath { grid: *grid, values: do_from_martingale(grid, &k, &m), label: ProcessKind::V })
}

/// Coupled `(M, W, V^eps)` paths driven by one set of exact `M_H` increments.
#[derive(Debug, Clone)]
pub struct CoupledPaths {
    pub martingale: Vec<f64>,
    pub brownian: Vec<f64>,
    pub modified: Vec<f64>,
}

/// Builds `V^eps` by Euler-Maruyama with Brownian increments recovered from
/// the exact `M_H` increments, `dW = dM / (sqrt(c_M (2-2H)) t*^(1/2-H))`.
pub fn simulate_coupled(grid: &TimeGrid, h: f64, eps: f64, seed: impl Into<PathSeed>) -> Result<CoupledPaths> {
    grid.require_origin()?;
    if !(eps >= 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be >= 0, got {eps}")));
    }
    let k = derive_constants(h)?;
    let dm = martingale_increments(grid, &k, seed.into(), MScheme::Exact);
    let n = grid.n_steps();
    let root = (k.c_m * (2.0 - 2.0 * h)).sqrt();
    let drift_coef = k.c_psi * (2.0 * h - 1.0);

    let mut m = Vec::with_capacity(n + 1);
    let mut w = Vec::with_capacity(n + 1);
    let mut v = Vec::with_capacity(n + 1);
    m.push(0.0);
    w.push(0.0);
    v.push(0.0);
    for (i, dmi) in dm.iter().enumerate() {
        let t_star = anchor_time(grid, i);
        let dw = dmi / (root * t_star.powf(0.5 - h));
        let left = grid.time(i);
        let drift =
            if left >= eps && left > 0.0 { drift_coef * left.powf(2.0 * h - 2.0) * m[i] * grid.dt() } else { 0.0 };
        v.push(v[i] + k.big_c * t_star.powf(h - 0.5) * dw + drift);
        w.push(w[i] + dw);
        m.push(m[i] + dmi);
    }
    Ok(CoupledPaths { martingale: m, brownian: w, modified: v })
}

/// Simulates the modified process `V^eps` (drift switched on at `t >= eps`).
pub fn simulate_modified_do_path(grid: &TimeGrid, h: f64, eps: f64, seed: impl Into<PathSeed>) -> Result<SamplePath> {
    let c = simulate_coupled(grid, h, eps, seed)?;
    Ok(SamplePath { grid: *grid, values: c.modified, label: ProcessKind::VEps })
}

/// Standard Brownian motion; draws the same normals as `M_{1/2}`.
pub fn simulate_bm_path(grid: &TimeGrid, seed: impl Into<PathSeed>) -> Result<SamplePath> {
    let mut p = simulate_martingale_path(grid, 0.5, seed, MScheme::Exact)?;
    p.label = ProcessKind::Bm;
    Ok(p)
}

/// Log-variance function `v(t)` of each model: `S_t = s0 exp(mu t + sigma X_t - sigma^2 v(t) / 2)`.
pub fn model_variance_clock(model: ModelKind, k: &HurstConstants, t: f64) -> f64 {
    match model {
        ModelKind::BlackScholes => t,
        ModelKind::FractionalBm => t.powf(2.0 * k.h),
        ModelKind::DobricOjeda => k.big_c * k.big_c * t.powf(2.0 * k.h) / (2.0 * k.h),
    }
}

/// Geometric stock path under the physical measure.
///
/// The driving path is Brownian motion, fBm, or the Dobrić-Ojeda process
/// (`V_H` when `eps == 0`, `V^eps` otherwise).
pub fn simulate_stock_path(params: &ModelParams, grid: &TimeGrid, seed: impl Into<PathSeed>) -> Result<SamplePath> {
    let k = params.validate()?;
    let seed = seed.into();
    let driver = match params.model {
        ModelKind::BlackScholes => simulate_bm_path(grid, seed)?.values,
        ModelKind::FractionalBm => {
            if grid.n_steps() <= FBM_CHOLESKY_MAX_STEPS {
                simulate_fbm_path(grid, params.h, seed)?.values
            } else {
                simulate_fbm_path_fft(grid, params.h, seed)?.values
            }
        }
        ModelKind::DobricOjeda => {
            if params.eps > 0.0 {
                simulate_modified_do_path(grid, params.h, params.eps, seed)?.values
            } else {
                simulate_do_path(grid, params.h, seed, MScheme::Exact)?.values
            }
        }
    };
    let values = driver
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let t = grid.time(i);
            let clock = model_variance_clock(params.model, &k, t);
            params.s0 * (params.mu * t + params.sigma * x - 0.5 * params.sigma * params.sigma * clock).exp()
        })
        .collect();
    Ok(SamplePath { grid: *grid, values, label: ProcessKind::Stock })
}

#[cfg(test)]
mod tests;
