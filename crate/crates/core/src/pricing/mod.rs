//! European call prices under geometric Brownian motion, geometric fBm and
//! the geometric Dobrić-Ojeda model.
//!
//! All three closed forms are lognormal evaluations that differ only in the
//! total standard deviation `v` of the log price between `t` and `T`:
//!
//! | model | `v` |
//! |-------|-----|
//! | BS    | `sigma sqrt(T - t)` |
//! | fBm   | `sigma sqrt(T^(2H) - t^(2H))` |
//! | DO    | `sigma C sqrt((T^(2H) - t^(2H)) / (2H))` |
//!
//! At `H = 1/2` every row reduces to the first.

mod closed_form;
mod mc;
mod pde;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::path_sim::ModelKind;

pub use closed_form::{bs_call, do_call, fbm_call, lognormal_call, model_call, total_std};
pub use mc::{mc_call, McConfig};
pub use pde::{do_call_pde, PdeGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum OptionKind {
    #[default]
    EuropeanCall,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptionSpec {
    pub strike: f64,
    /// Expiry `T` in years on the model clock.
    pub expiry: f64,
    pub kind: OptionKind,
}

impl OptionSpec {
    pub fn call(strike: f64, expiry: f64) -> Result<Self> {
        if !(strike > 0.0) || !strike.is_finite() {
            return Err(Error::InvalidParameter(format!("strike must be > 0, got {strike}")));
        }
        if !(expiry > 0.0) || !expiry.is_finite() {
            return Err(Error::InvalidParameter(format!("expiry must be > 0, got {expiry}")));
        }
        Ok(Self { strike, expiry, kind: OptionKind::EuropeanCall })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PriceQuote {
    pub value: f64,
    /// `d1 = (ln(K/S) - r tau + v^2/2) / v`, so the price is `S Phi(v - d1) - K e^(-r tau) Phi(-d1)`.
    pub d1: Option<f64>,
    pub model: ModelKind,
    /// Monte Carlo standard error of `value`.
    pub stderr: Option<f64>,
}

/// Market inputs for a single call valuation at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CallInputs {
    pub s: f64,
    pub k: f64,
    pub r: f64,
    pub sigma: f64,
    /// Ignored by the Black-Scholes model.
    pub h: f64,
    pub t: f64,
    pub t_exp: f64,
}

impl CallInputs {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.s, self.k, self.r, self.sigma, self.h, self.t, self.t_exp].iter().all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("call inputs must be finite".into()));
        }
        if !(self.s > 0.0) || !(self.k > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "spot and strike must be > 0, got s = {}, k = {}",
                self.s, self.k
            )));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::InvalidParameter(format!("sigma must be > 0, got {}", self.sigma)));
        }
        if !(self.t >= 0.0) || self.t > self.t_exp {
            return Err(Error::InvalidParameter(format!(
                "need 0 <= t <= t_exp, got t = {}, t_exp = {}",
                self.t, self.t_exp
            )));
        }
        Ok(())
    }

    pub fn tau(&self) -> f64 {
        self.t_exp - self.t
    }
}

/// `max(0, s - k e^(-r tau))`, the model-free lower bound of a call.
pub fn call_lower_bound(s: f64, k: f64, r: f64, tau: f64) -> f64 {
    (s - k * (-r * tau).exp()).max(0.0)
}
