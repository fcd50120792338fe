//! Hurst-index and volatility estimators from equally spaced closes.
//!
//! The ergodic-ratio method assumes geometric fBm and compares second
//! moments of one-step and two-step log returns. The QV-ratio method assumes
//! the Dobrić-Ojeda model and compares the sample quadratic variation of the
//! first half of the window with that of the whole window.
//!
//! Both estimators default to the limit-consistent forms
//! `H = log4(SS2 / SS1)`, `H = log4(QV(T) / QV(T/2))` and
//! `sigma^2 = 2H QV(T) / (C(H)^2 T^(2H))`. [`Formula::Literal`] selects the
//! inverted ratio and the `2 / (C H T^(2H))` volatility coefficient instead.

use chrono::NaiveDate;
use serde::Serialize;

use crate::backtest::PriceSeries;
use crate::constants::{derive_constants, HurstBounds};
use crate::error::{Error, Result};
use crate::exec::Exec;

/// Daily sampling interval in years.
pub const DAILY_DT: f64 = 1.0 / 252.0;

/// Fewest closes an estimator accepts.
pub const MIN_PRICES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    ErgodicRatio,
    QvRatio,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::ErgodicRatio => "ergodic",
            Method::QvRatio => "qv_ratio",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Formula {
    #[default]
    Corrected,
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateResult {
    pub method: Method,
    pub formula: Formula,
    /// Drift per year; only the ergodic method estimates it.
    pub mu_hat: Option<f64>,
    pub h_hat: f64,
    pub sigma_hat: f64,
    /// The raw ratio estimate fell outside `[0.01, 0.99]` and was clamped.
    pub clamped: bool,
    /// Number of closes used.
    pub window_len: usize,
    pub dt: f64,
}

impl EstimateResult {
    /// `ergodic`, `qv_ratio`, with a `:literal` suffix for the printed formulas.
    pub fn method_label(&self) -> String {
        match self.formula {
            Formula::Corrected => self.method.tag().to_string(),
            Formula::Literal => format!("{}:literal", self.method.tag()),
        }
    }
}

pub fn log_returns(prices: &[f64]) -> Result<Vec<f64>> {
    if prices.len() < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 prices, got {}", prices.len())));
    }
    if let Some((i, p)) = prices.iter().enumerate().find(|(_, p)| !(**p > 0.0) || !p.is_finite()) {
        return Err(Error::InvalidParameter(format!("price {i} is not a positive finite number: {p}")));
    }
    Ok(prices.windows(2).map(|w| (w[1] / w[0]).ln()).collect())
}

fn check_inputs(prices: &[f64], dt: f64) -> Result<()> {
    if prices.len() < MIN_PRICES {
        return Err(Error::InvalidParameter(format!(
            "estimators need at least {MIN_PRICES} prices, got {}",
            prices.len()
        )));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
    }
    Ok(())
}

fn clamp_h(raw: f64) -> (f64, bool) {
    if raw.is_nan() {
        return (HurstBounds::default().min, true);
    }
    HurstBounds::default().clamp(raw)
}

pub fn estimate_ergodic(prices: &[f64], dt: f64) -> Result<EstimateResult> {
    estimate_ergodic_with(prices, dt, Formula::Corrected)
}

/// Ergodic second-moment ratio estimator.
///
/// `SS2` averages the squared demeaned two-step returns `ln(s_{2i} / s_{2i-2})`.
pub fn estimate_ergodic_with(prices: &[f64], dt: f64, formula: Formula) -> Result<EstimateResult> {
    check_inputs(prices, dt)?;
    let y = log_returns(prices)?;
    let n = y.len();
    let step_mean = y.iter().sum::<f64>() / n as f64;
    let mu_hat = step_mean / dt;
    let ss1 = y.iter().map(|v| (v - step_mean) * (v - step_mean)).sum::<f64>() / n as f64;
    let half = n / 2;
    let ss2 = (0..half)
        .map(|i| {
            let d = y[2 * i] + y[2 * i + 1] - 2.0 * step_mean;
            d * d
        })
        .sum::<f64>()
        / half as f64;
    if !(ss1 > 0.0) || !(ss2 > 0.0) {
        return Err(Error::DegenerateInput(format!(
            "second moments vanish (SS1 = {ss1}, SS2 = {ss2}); prices carry no variation"
        )));
    }
    let raw = match formula {
        Formula::Corrected => (ss2 / ss1).log(4.0),
        Formula::Literal => (ss1 / ss2).log(4.0),
    };
    let (h_hat, clamped) = clamp_h(raw);
    let sigma_hat = (ss1 / dt.powf(2.0 * h_hat)).sqrt();
    Ok(EstimateResult {
        method: Method::ErgodicRatio,
        formula,
        mu_hat: Some(mu_hat),
        h_hat,
        sigma_hat,
        clamped,
        window_len: prices.len(),
        dt,
    })
}

pub fn estimate_qv_ratio(prices: &[f64], dt: f64) -> Result<EstimateResult> {
    estimate_qv_ratio_with(prices, dt, Formula::Corrected)
}

/// Quadratic-variation ratio estimator; the window start is the time origin, `T = m dt`.
pub fn estimate_qv_ratio_with(prices: &[f64], dt: f64, formula: Formula) -> Result<EstimateResult> {
    check_inputs(prices, dt)?;
    let y = log_returns(prices)?;
    let m = y.len();
    let full: f64 = y.iter().map(|v| v * v).sum();
    let first_half: f64 = y[..m / 2].iter().map(|v| v * v).sum();
    if !(first_half > 0.0) || !(full > 0.0) {
        return Err(Error::DegenerateInput(format!(
            "sample quadratic variation vanishes (half = {first_half}, full = {full})"
        )));
    }
    let raw = match formula {
        Formula::Corrected => (full / first_half).log(4.0),
        Formula::Literal => (first_half / full).log(4.0),
    };
    let (h_hat, clamped) = clamp_h(raw);
    let big_c = derive_constants(h_hat)?.big_c;
    let t_span = m as f64 * dt;
    let scale = t_span.powf(2.0 * h_hat);
    let sigma_sq = match formula {
        Formula::Corrected => 2.0 * h_hat * full / (big_c * big_c * scale),
        Formula::Literal => 2.0 * full / (big_c * h_hat * scale),
    };
    Ok(EstimateResult {
        method: Method::QvRatio,
        formula,
        mu_hat: None,
        h_hat,
        sigma_hat: sigma_sq.sqrt(),
        clamped,
        window_len: prices.len(),
        dt,
    })
}

pub fn estimate(prices: &[f64], dt: f64, method: Method, formula: Formula) -> Result<EstimateResult> {
    match method {
        Method::ErgodicRatio => estimate_ergodic_with(prices, dt, formula),
        Method::QvRatio => estimate_qv_ratio_with(prices, dt, formula),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DatedEstimate {
    pub date: NaiveDate,
    pub estimate: EstimateResult,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RollingConfig {
    pub window: usize,
    pub method: Method,
    pub formula: Formula,
    pub dt: f64,
    pub exec: Exec,
}

impl RollingConfig {
    pub fn new(window: usize, method: Method) -> Self {
        Self { window, method, formula: Formula::Corrected, dt: DAILY_DT, exec: Exec::Parallel }
    }
}

/// One estimate per day `d >= window`, dated `d` and computed from closes
/// `d - window .. d` (the `window` closes strictly before `d`).
pub fn rolling_estimates(series: &PriceSeries, cfg: &RollingConfig) -> Result<Vec<DatedEstimate>> {
    if cfg.window < MIN_PRICES {
        return Err(Error::InvalidParameter(format!("window must be at least {MIN_PRICES}, got {}", cfg.window)));
    }
    let n = series.len();
    if n < cfg.window {
        return Err(Error::InvalidParameter(format!("series has {n} closes, fewer than the window {}", cfg.window)));
    }
    let closes = series.closes();
    let dates = series.dates();
    let out = cfg.exec.map(n - cfg.window, |j| {
        let d = j + cfg.window;
        estimate(&closes[j..d], cfg.dt, cfg.method, cfg.formula)
            .map(|estimate| DatedEstimate { date: dates[d], estimate })
    });
    out.into_iter().collect()
}
