//! Deterministic constants of the Dobrić-Ojeda construction as functions of the Hurst index.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::gamma_fn;

/// Default lower clamp for the Hurst index at API boundaries.
pub const H_MIN: f64 = 0.01;
/// Default upper clamp for the Hurst index at API boundaries.
pub const H_MAX: f64 = 0.99;

/// Closed interval of Hurst values accepted by the library.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HurstBounds {
    pub min: f64,
    pub max: f64,
}

impl Default for HurstBounds {
    fn default() -> Self {
        Self { min: H_MIN, max: H_MAX }
    }
}

impl HurstBounds {
    pub fn validate(&self, h: f64) -> Result<f64> {
        if !h.is_finite() || h <= 0.0 || h >= 1.0 {
            return Err(Error::Domain(format!("hurst index must lie in (0, 1), got {h}")));
        }
        if h < self.min || h > self.max {
            return Err(Error::DegenerateHurst { h, min: self.min, max: self.max });
        }
        Ok(h)
    }

    /// Clamps `h` into the bounds, returning the clamped value and whether clamping happened.
    pub fn clamp(&self, h: f64) -> (f64, bool) {
        if h.is_nan() {
            return (0.5, true);
        }
        if h < self.min {
            (self.min, true)
        } else if h > self.max {
            (self.max, true)
        } else {
            (h, false)
        }
    }
}

/// Every H-dependent scalar used by the process, pricing and estimation code.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HurstConstants {
    pub h: f64,
    /// Field covariance constant `a_H` for the case H + H' = 1.
    pub a_h: f64,
    /// `E[M_H(t)^2] = c_m t^(2-2H)`.
    pub c_m: f64,
    /// `Psi_H(t) = c_psi t^(2H-1)`.
    pub c_psi: f64,
    /// Diffusion coefficient `C = c_psi sqrt(c_m (2 - 2H))`.
    pub big_c: f64,
    /// Relative L2 distance between the Dobrić-Ojeda process and fBm.
    pub d_h: f64,
    /// Admissibility factor: the measure change is valid for eps > delta_h * T.
    pub delta_h: f64,
}

/// Evaluates all constants at `h` (default clamp `[0.01, 0.99]`).
pub fn derive_constants(h: f64) -> Result<HurstConstants> {
    let h = HurstBounds::default().validate(h)?;
    if h == 0.5 {
        return Ok(HurstConstants { h, a_h: 1.0, c_m: 1.0, c_psi: 1.0, big_c: 1.0, d_h: 0.0, delta_h: 0.0 });
    }

    let g_2h1 = gamma_fn(2.0 * h + 1.0)?;
    let g_3m2h = gamma_fn(3.0 - 2.0 * h)?;
    let g_h_half = gamma_fn(h + 0.5)?;
    let g_3half_mh = gamma_fn(1.5 - h)?;

    let sin_pi_h = (std::f64::consts::PI * h).sin();
    let a_h = (g_2h1 * g_3m2h).sqrt() * sin_pi_h * sin_pi_h;
    let c_m = a_h * a_h * g_3half_mh / (2.0 * h * g_h_half * g_3m2h);
    let c_psi = 2.0 * h * g_3m2h * g_h_half / (a_h * g_3half_mh);
    let big_c = c_psi * (c_m * (2.0 - 2.0 * h)).sqrt();

    let d_sq = 1.0 - 2.0 * h * g_h_half * g_3m2h / g_3half_mh;
    // d_sq is a projection residual; tiny negatives are roundoff near h = 1/2
    let d_h = d_sq.max(0.0).sqrt();

    let b = c_psi * (2.0 * h - 1.0) / big_c;
    let delta_h = (-1.0 / (2.0 * b * b * c_m)).exp();

    Ok(HurstConstants { h, a_h, c_m, c_psi, big_c, d_h, delta_h })
}

impl HurstConstants {
    /// `B = c_psi (2H - 1) / C`, the coefficient of `M_t` in the Girsanov kernel.
    pub fn girsanov_b(&self) -> f64 {
        self.c_psi * (2.0 * self.h - 1.0) / self.big_c
    }

    /// `A = (mu - r) / (sigma C)`, the market-dependent part of the Girsanov kernel.
    pub fn girsanov_a(&self, mu: f64, r: f64, sigma: f64) -> f64 {
        (mu - r) / (sigma * self.big_c)
    }

    /// `C^2 / (2H)`: quadratic variation of `V_H` per unit of `t^(2H)`.
    pub fn qv_coefficient(&self) -> f64 {
        self.big_c * self.big_c / (2.0 * self.h)
    }

    /// Smallest admissible drift cut-on time for a horizon `t_end` (exclusive bound).
    pub fn admissible_eps_bound(&self, t_end: f64) -> f64 {
        self.delta_h * t_end
    }
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid() -> impl Iterator<Item = f64> {
        (1..=99).map(|i| i as f64 / 100.0)
    }

    #[test]
    fn half_is_brownian() {
        let c = derive_constants(0.5).unwrap();
        assert_eq!((c.a_h, c.c_m, c.c_psi, c.big_c, c.d_h, c.delta_h), (1.0, 1.0, 1.0, 1.0, 0.0, 0.0));
    }

    #[test]
    fn golden_constants_at_061() {
        // 40-digit evaluation of the closed forms
        let c = derive_constants(0.61).unwrap();
        assert_relative_eq!(c.a_h, 0.899_225_212_349_274_55, max_relative = 1e-12);
        assert_relative_eq!(c.c_m, 0.813_346_573_600_977_27, max_relative = 1e-12);
        assert_relative_eq!(c.c_psi, 1.105_586_771_415_390_3, max_relative = 1e-12);
        assert_relative_eq!(c.big_c, 0.880_598_529_098_993_83, max_relative = 1e-12);
        assert_relative_eq!(c.d_h, 0.076_344_618_038_515_47, max_relative = 1e-9);
        assert_relative_eq!(c.delta_h, 3.166_063_861_548_649_3e-4, max_relative = 1e-9);
    }

    #[test]
    fn golden_constants_at_07_and_075() {
        let c = derive_constants(0.7).unwrap();
        assert_relative_eq!(c.big_c, 0.769_365_245_480_176_9, max_relative = 1e-12);
        assert_relative_eq!(c.d_h, 0.116_025_277_757_529_6, max_relative = 1e-9);
        assert_relative_eq!(c.delta_h, 0.153_354_966_844_928_46, max_relative = 1e-9);
        // the "at most 12%" reading does not hold here
        let c = derive_constants(0.75).unwrap();
        assert_relative_eq!(c.d_h, 0.129_338_382_317_296_17, max_relative = 1e-9);
    }

    #[test]
    fn big_c_consistency_on_grid() {
        for h in grid() {
            let c = derive_constants(h).unwrap();
            let rhs = c.c_psi * c.c_psi * c.c_m * (2.0 - 2.0 * h);
            assert_relative_eq!(c.big_c * c.big_c, rhs, max_relative = 1e-12);
        }
    }

    #[test]
    fn d_h_is_projection_residual() {
        // E[Z_H M_H] = a_H t, so d^2 = 1 - c_psi^2 c_m = 1 - a_H^2 / c_m
        for h in grid() {
            let c = derive_constants(h).unwrap();
            let resid = 1.0 - c.c_psi * c.c_psi * c.c_m;
            assert!((c.d_h * c.d_h - resid).abs() < 1e-12, "h = {h}");
            assert_relative_eq!(c.c_psi * c.c_m, c.a_h, max_relative = 1e-12);
        }
    }

    #[test]
    fn delta_h_closed_form() {
        // B^2 c_m = (2H-1)^2 / (2-2H), so delta = exp(-(1-H)/(2H-1)^2)
        for h in grid().filter(|&h| h != 0.5) {
            let c = derive_constants(h).unwrap();
            let expect = (-(1.0 - h) / ((2.0 * h - 1.0) * (2.0 * h - 1.0))).exp();
            assert_relative_eq!(c.delta_h, expect, max_relative = 1e-10, epsilon = 1e-300);
            assert!((0.0..1.0).contains(&c.delta_h));
        }
    }

    #[test]
    fn d_h_vanishes_near_half() {
        for h in [0.5 - 1e-8, 0.5 + 1e-8] {
            assert!(derive_constants(h).unwrap().d_h < 1e-6);
        }
    }

    #[test]
    fn d_h_below_twelve_percent_up_to_071() {
        for i in 40..=71 {
            let h = i as f64 / 100.0;
            assert!(derive_constants(h).unwrap().d_h <= 0.12, "h = {h}");
        }
        // peak of the printed closed form on [0.4, 0.99]
        let peak = (40..=99).map(|i| derive_constants(i as f64 / 100.0).unwrap().d_h).fold(0.0, f64::max);
        assert_relative_eq!(peak, 0.136_495_980_040_845_37, max_relative = 1e-9);
    }

    #[test]
    fn domain_and_degenerate_errors() {
        assert!(matches!(derive_constants(0.0), Err(Error::Domain(_))));
        assert!(matches!(derive_constants(1.2), Err(Error::Domain(_))));
        assert!(matches!(derive_constants(0.005), Err(Error::DegenerateHurst { .. })));
        assert!(matches!(derive_constants(0.995), Err(Error::DegenerateHurst { .. })));
        assert!(derive_constants(0.01).is_ok());
        assert!(derive_constants(0.99).is_ok());
    }

    #[test]
    fn clamp_flags() {
        let b = HurstBounds::default();
        assert_eq!(b.clamp(-0.3), (0.01, true));
        assert_eq!(b.clamp(1.7), (0.99, true));
        assert_eq!(b.clamp(0.6), (0.6, false));
    }
}
