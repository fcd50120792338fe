//! Rolling three-model valuation of a call over a history of daily closes.
//!
//! Each row dated `d` is estimated from the `window` closes ending at `d`
//! (inclusive) and priced at the close of `d`, so it never sees later data.

mod report;
mod series;

use std::collections::BTreeMap;

use chrono::{Datelike, NaiveDate, Weekday};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimate::{estimate_ergodic_with, estimate_qv_ratio_with, log_returns, Formula, DAILY_DT, MIN_PRICES};
use crate::exec::Exec;
use crate::path_sim::ModelKind;
use crate::pricing::{model_call, CallInputs};
use crate::stats::sample_std;

pub use report::{emit_report, render_svg, ReportFiles};
pub use series::{load_market_quotes, load_price_series, PriceSeries};

pub const DEFAULT_WINDOW: usize = 62;
pub const TRADING_DAYS_PER_YEAR: f64 = 252.0;

/// Where the fBm and Dobrić-Ojeda model clocks start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum ClockOrigin {
    /// `t = 0` at the first close of the estimation window, matching the
    /// origin the QV-ratio estimator assumes; valuation happens at `(window - 1) dt`.
    #[default]
    WindowStart,
    /// `t = 0` at the valuation date.
    Valuation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BacktestConfig {
    pub strike: f64,
    pub expiry: NaiveDate,
    pub r: f64,
    pub window: usize,
    pub dt: f64,
    pub formula: Formula,
    pub clock: ClockOrigin,
    pub exec: Exec,
}

impl BacktestConfig {
    pub fn new(strike: f64, expiry: NaiveDate, r: f64) -> Self {
        Self {
            strike,
            expiry,
            r,
            window: DEFAULT_WINDOW,
            dt: DAILY_DT,
            formula: Formula::Corrected,
            clock: ClockOrigin::WindowStart,
            exec: Exec::Parallel,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.strike > 0.0) || !self.strike.is_finite() {
            return Err(Error::InvalidParameter(format!("strike must be > 0, got {}", self.strike)));
        }
        if !self.r.is_finite() {
            return Err(Error::InvalidParameter("r must be finite".into()));
        }
        if self.window < MIN_PRICES {
            return Err(Error::InvalidParameter(format!("window must be at least {MIN_PRICES}, got {}", self.window)));
        }
        if !(self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {}", self.dt)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BacktestRow {
    pub date: NaiveDate,
    pub spot: f64,
    /// Trading-day year fraction to expiry.
    pub tau: f64,
    pub h_ergodic: f64,
    pub h_qv: f64,
    pub sigma_ergodic: f64,
    pub sigma_qv: f64,
    /// Annualized sample standard deviation of the window's log returns.
    pub sigma_bs: f64,
    pub clamped_ergodic: bool,
    pub clamped_qv: bool,
    pub price_bs: f64,
    pub price_fbm: f64,
    pub price_do: f64,
    pub price_market: Option<f64>,
}

/// Weekdays in `(from, to]`; zero when `to <= from`.
pub fn trading_days_between(from: NaiveDate, to: NaiveDate) -> i64 {
    if to <= from {
        return 0;
    }
    let days = (to - from).num_days();
    let full_weeks = days / 7;
    let mut count = full_weeks * 5;
    let mut d = from + chrono::Duration::days(full_weeks * 7);
    while d < to {
        d = d.succ_opt().expect("date overflow");
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            count += 1;
        }
    }
    count
}

pub fn year_fraction(from: NaiveDate, to: NaiveDate) -> f64 {
    trading_days_between(from, to) as f64 / TRADING_DAYS_PER_YEAR
}

/// One row per date from index `window - 1` on, each priced from the `window`
/// closes ending at that date.
pub fn run_backtest(
    series: &PriceSeries,
    cfg: &BacktestConfig,
    market_quotes: Option<&BTreeMap<NaiveDate, f64>>,
) -> Result<Vec<BacktestRow>> {
    cfg.validate()?;
    let n = series.len();
    if n < cfg.window {
        return Err(Error::InvalidParameter(format!("series has {n} closes, fewer than the window {}", cfg.window)));
    }
    let last = series.dates()[n - 1];
    if cfg.expiry <= last {
        return Err(Error::InvalidParameter(format!(
            "expiry {} is not after the last valuation date {last}",
            cfg.expiry
        )));
    }
    let closes = series.closes();
    let dates = series.dates();
    let rows = cfg.exec.map(n + 1 - cfg.window, |j| {
        let d = j + cfg.window - 1;
        let quote = market_quotes.and_then(|q| q.get(&dates[d]).copied());
        price_day(&closes[j..=d], dates[d], cfg, quote)
    });
    rows.into_iter().collect()
}

fn price_day(window: &[f64], date: NaiveDate, cfg: &BacktestConfig, price_market: Option<f64>) -> Result<BacktestRow> {
    let spot = *window.last().expect("window is non-empty");
    let ergodic = estimate_ergodic_with(window, cfg.dt, cfg.formula)?;
    let qv = estimate_qv_ratio_with(window, cfg.dt, cfg.formula)?;
    let sigma_bs = sample_std(&log_returns(window)?) / cfg.dt.sqrt();
    if !(sigma_bs > 0.0) {
        return Err(Error::DegenerateInput(format!("{date}: window has zero return variance")));
    }

    let tau = year_fraction(date, cfg.expiry);
    let t = match cfg.clock {
        ClockOrigin::WindowStart => (window.len() - 1) as f64 * cfg.dt,
        ClockOrigin::Valuation => 0.0,
    };
    let inputs = |sigma: f64, h: f64| CallInputs { s: spot, k: cfg.strike, r: cfg.r, sigma, h, t, t_exp: t + tau };
    let price_bs = model_call(ModelKind::BlackScholes, &inputs(sigma_bs, 0.5))?.value;
    let price_fbm = model_call(ModelKind::FractionalBm, &inputs(ergodic.sigma_hat, ergodic.h_hat))?.value;
    let price_do = model_call(ModelKind::DobricOjeda, &inputs(qv.sigma_hat, qv.h_hat))?.value;
    Ok(BacktestRow {
        date,
        spot,
        tau,
        h_ergodic: ergodic.h_hat,
        h_qv: qv.h_hat,
        sigma_ergodic: ergodic.sigma_hat,
        sigma_qv: qv.sigma_hat,
        sigma_bs,
        clamped_ergodic: ergodic.clamped,
        clamped_qv: qv.clamped,
        price_bs,
        price_fbm,
        price_do,
        price_market,
    })
}
