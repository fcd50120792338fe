//! Monte Carlo call prices from exact lognormal terminal draws under the
//! risk-neutral measure.
//!
//! Under `Q^eps` the modified Dobrić-Ojeda stock satisfies
//! `S_T = S_t exp(r tau + sigma C G - sigma^2 C^2 (T^(2H) - t^(2H)) / (4H))`
//! with `G` centered Gaussian of variance `(T^(2H) - t^(2H)) / (2H)`, so one
//! normal draw per path is exact.

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::path_sim::{ModelKind, ModelParams, PathSeed};

use super::closed_form::total_std;
use super::{OptionSpec, PriceQuote};

pub const MIN_PATHS: usize = 1000;
const CHUNK: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub n_paths: usize,
    pub seed: u64,
    pub exec: Exec,
}

impl McConfig {
    pub fn new(n_paths: usize, seed: u64) -> Self {
        Self { n_paths, seed, exec: Exec::Parallel }
    }
}

/// Discounted mean payoff with its standard error; `params.s0` is the spot at `t`.
///
/// For the Dobrić-Ojeda model with `H != 1/2` the measure change is only
/// established for `eps > delta(H) T`: below that bound Novikov's condition
/// is not available (it fails outright for the unmodified process), and the
/// call is rejected with [`Error::Inadmissible`].
pub fn mc_call(params: &ModelParams, spec: &OptionSpec, t: f64, cfg: &McConfig) -> Result<PriceQuote> {
    let consts = params.validate()?;
    if cfg.n_paths < MIN_PATHS {
        return Err(Error::InvalidParameter(format!("n_paths must be at least {MIN_PATHS}, got {}", cfg.n_paths)));
    }
    if !(t >= 0.0) || t >= spec.expiry {
        return Err(Error::InvalidParameter(format!("need 0 <= t < expiry, got t = {t}, expiry = {}", spec.expiry)));
    }
    if params.model == ModelKind::DobricOjeda && params.h != 0.5 {
        let bound = consts.admissible_eps_bound(spec.expiry);
        if !(params.eps > bound) {
            return Err(Error::Inadmissible { eps: params.eps, h: params.h, bound });
        }
    }

    let v = total_std(params.model, params.sigma, params.h, t, spec.expiry)?;
    let tau = spec.expiry - t;
    let drift = params.r * tau - 0.5 * v * v;
    let disc = (-params.r * tau).exp();
    let (s0, k, n) = (params.s0, spec.strike, cfg.n_paths);

    let n_chunks = n.div_ceil(CHUNK);
    let partial = cfg.exec.map(n_chunks, |c| {
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
            let mut rng = PathSeed::new(cfg.seed, i as u64).rng();
            let z: f64 = StandardNormal.sample(&mut rng);
            let payoff = (s0 * (drift + v * z).exp() - k).max(0.0);
            sum += payoff;
            sum_sq += payoff * payoff;
        }
        (sum, sum_sq)
    });
    let (sum, sum_sq) = partial.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let nf = n as f64;
    let mean = sum / nf;
    let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    Ok(PriceQuote { value: disc * mean, d1: None, model: params.model, stderr: Some(disc * (var / nf).sqrt()) })
}
