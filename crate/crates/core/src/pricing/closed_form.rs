use crate::constants::derive_constants;
use crate::error::Result;
use crate::path_sim::{model_variance_clock, ModelKind};
use crate::special::norm_cdf;

use super::{CallInputs, PriceQuote};

/// Lognormal call with total log-price standard deviation `v` over `tau`.
///
/// `tau == 0` gives the payoff; `v == 0` gives the discounted forward intrinsic value.
pub fn lognormal_call(s: f64, k: f64, r: f64, tau: f64, v: f64, model: ModelKind) -> PriceQuote {
    if tau == 0.0 {
        return PriceQuote { value: (s - k).max(0.0), d1: None, model, stderr: None };
    }
    let disc = (-r * tau).exp();
    if v == 0.0 {
        return PriceQuote { value: (s - k * disc).max(0.0), d1: None, model, stderr: None };
    }
    let d1 = ((k / s).ln() - r * tau + 0.5 * v * v) / v;
    let value = s * norm_cdf(v - d1) - k * disc * norm_cdf(-d1);
    PriceQuote {
        // Deep out of the money the difference can round to a tiny negative number.
        value: value.max(0.0),
        d1: Some(d1),
        model,
        stderr: None,
    }
}

/// Total log-price standard deviation between `t` and `t_exp`.
pub fn total_std(model: ModelKind, sigma: f64, h: f64, t: f64, t_exp: f64) -> Result<f64> {
    let h = if model == ModelKind::BlackScholes { 0.5 } else { h };
    let k = derive_constants(h)?;
    let var = model_variance_clock(model, &k, t_exp) - model_variance_clock(model, &k, t);
    Ok(sigma * var.max(0.0).sqrt())
}

pub fn model_call(model: ModelKind, inp: &CallInputs) -> Result<PriceQuote> {
    inp.validate()?;
    let v = total_std(model, inp.sigma, inp.h, inp.t, inp.t_exp)?;
    Ok(lognormal_call(inp.s, inp.k, inp.r, inp.tau(), v, model))
}

pub fn bs_call(s: f64, k: f64, r: f64, sigma: f64, t: f64, t_exp: f64) -> Result<PriceQuote> {
    let inp = CallInputs { s, k, r, sigma, h: 0.5, t, t_exp };
    model_call(ModelKind::BlackScholes, &inp)
}

/// Call on the modified Dobrić-Ojeda stock; the price does not depend on `eps`.
pub fn do_call(s_eps: f64, k: f64, r: f64, sigma: f64, h: f64, t: f64, t_exp: f64) -> Result<PriceQuote> {
    let inp = CallInputs { s: s_eps, k, r, sigma, h, t, t_exp };
    model_call(ModelKind::DobricOjeda, &inp)
}

pub fn fbm_call(s: f64, k: f64, r: f64, sigma: f64, h: f64, t: f64, t_exp: f64) -> Result<PriceQuote> {
    let inp = CallInputs { s, k, r, sigma, h, t, t_exp };
    model_call(ModelKind::FractionalBm, &inp)
}
