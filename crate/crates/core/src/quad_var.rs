//! Sample quadratic variation and its convergence to the closed form
//! `I = C^2 (T^(2H) - t0^(2H)) / (2H)` along refining partitions.

use std::io::Write;

use serde::Serialize;

use crate::constants::derive_constants;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fmt::f17;
use crate::path_sim::{simulate_do_path, MScheme, PathSeed, SamplePath, TimeGrid};
use crate::stats::{mean, ols_slope};

/// Sum of squared increments of a path.
pub fn sample_qv(path: &SamplePath) -> f64 {
    sample_qv_values(&path.values)
}

pub fn sample_qv_values(values: &[f64]) -> f64 {
    values.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0])).sum()
}

/// Closed-form quadratic variation of `V_H` (and `V^eps`) over `[t0, t_end]`.
pub fn theoretical_qv_do(h: f64, t0: f64, t_end: f64) -> Result<f64> {
    let k = derive_constants(h)?;
    if !(t0 >= 0.0) || !(t_end > t0) {
        return Err(Error::InvalidParameter(format!("need 0 <= t0 < t_end, got [{t0}, {t_end}]")));
    }
    Ok(k.qv_coefficient() * (t_end.powf(2.0 * h) - t0.powf(2.0 * h)))
}

/// Number of partition points `floor(n^(1+delta))` used for sampling level `n`.
pub fn partition_size(n: usize, delta: f64) -> usize {
    (n as f64).powf(1.0 + delta).floor() as usize
}

#[derive(Debug, Clone)]
pub struct QvHarnessConfig {
    pub h: f64,
    pub t0: f64,
    pub t_end: f64,
    pub n_list: Vec<usize>,
    pub delta: f64,
    pub n_seeds: usize,
    pub seed: u64,
    pub scheme: MScheme,
    /// Largest partition size the harness will simulate.
    pub max_steps: usize,
    pub exec: Exec,
}

impl Default for QvHarnessConfig {
    fn default() -> Self {
        Self {
            h: 0.5,
            t0: 0.0,
            t_end: 1.0,
            n_list: vec![64, 256, 1024],
            delta: 0.5,
            n_seeds: 50,
            seed: 42,
            scheme: MScheme::Exact,
            max_steps: 1 << 22,
            exec: Exec::Parallel,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QvReport {
    pub n_values: Vec<usize>,
    /// `floor(n^(1+delta))` for each `n`.
    pub partition_sizes: Vec<usize>,
    /// Seed-averaged sample quadratic variation.
    pub qv_estimates: Vec<f64>,
    pub target: f64,
    /// Root-mean-square deviation of the sample QV from the target, across seeds.
    pub l2_errors: Vec<f64>,
    /// Seed-averaged `|QV - I| / I`.
    pub mean_rel_errors: Vec<f64>,
    pub sampling_exponent: f64,
    /// Least-squares slope of `ln l2_error` against `ln n`; `None` with fewer than two levels.
    pub log_log_slope: Option<f64>,
}

impl QvReport {
    /// Writes `n,qv_mean,qv_target,l2_error` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "n,qv_mean,qv_target,l2_error")?;
        for i in 0..self.n_values.len() {
            writeln!(
                out,
                "{},{},{},{}",
                self.n_values[i],
                f17(self.qv_estimates[i]),
                f17(self.target),
                f17(self.l2_errors[i])
            )?;
        }
        Ok(())
    }
}

/// Simulates `V_H` on `[0, t_end]` with `floor(n^(1+delta))` steps for each
/// `n` and measures the sample QV over `[t0, t_end]` against its limit.
///
/// The window starts at grid index `ceil(t0 N / t_end)`.
pub fn qv_convergence_harness(cfg: &QvHarnessConfig) -> Result<QvReport> {
    if !(cfg.delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be > 0, got {}", cfg.delta)));
    }
    if cfg.n_list.is_empty() || cfg.n_list.windows(2).any(|w| w[1] <= w[0]) || cfg.n_list[0] == 0 {
        return Err(Error::InvalidParameter("n_list must be non-empty, positive and increasing".into()));
    }
    if cfg.n_seeds == 0 {
        return Err(Error::InvalidParameter("n_seeds must be at least 1".into()));
    }
    let target = theoretical_qv_do(cfg.h, cfg.t0, cfg.t_end)?;
    let sizes: Vec<usize> = cfg.n_list.iter().map(|&n| partition_size(n, cfg.delta)).collect();
    if let Some(&too_big) = sizes.iter().find(|&&s| s > cfg.max_steps) {
        return Err(Error::ResourceCap {
            what: "partition size floor(n^(1+delta))",
            requested: too_big,
            cap: cfg.max_steps,
        });
    }

    let mut qv_estimates = Vec::new();
    let mut l2_errors = Vec::new();
    let mut mean_rel_errors = Vec::new();
    for (level, &steps) in sizes.iter().enumerate() {
        let steps = steps.max(1);
        let grid = TimeGrid::unit(cfg.t_end, steps)?;
        let i0 = ((cfg.t0 * steps as f64 / cfg.t_end).ceil() as usize).min(steps - 1);
        let seed_base = cfg.seed.wrapping_add(level as u64);
        let qvs: Vec<Result<f64>> = cfg.exec.map(cfg.n_seeds, |s| {
            let path = simulate_do_path(&grid, cfg.h, PathSeed::new(seed_base, s as u64), cfg.scheme)?;
            Ok(sample_qv_values(&path.values[i0..]))
        });
        let qvs: Vec<f64> = qvs.into_iter().collect::<Result<_>>()?;
        let sq: Vec<f64> = qvs.iter().map(|q| (q - target) * (q - target)).collect();
        let rel: Vec<f64> = qvs.iter().map(|q| (q - target).abs() / target).collect();
        qv_estimates.push(mean(&qvs));
        l2_errors.push(mean(&sq).sqrt());
        mean_rel_errors.push(mean(&rel));
    }

    let log_log_slope = (cfg.n_list.len() >= 2).then(|| {
        let x: Vec<f64> = cfg.n_list.iter().map(|&n| (n as f64).ln()).collect();
        let y: Vec<f64> = l2_errors.iter().map(|e| e.ln()).collect();
        ols_slope(&x, &y)
    });

    Ok(QvReport {
        n_values: cfg.n_list.clone(),
        partition_sizes: sizes,
        qv_estimates,
        target,
        l2_errors,
        mean_rel_errors,
        sampling_exponent: 1.0 + cfg.delta,
        log_log_slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path_sim::{simulate_bm_path, simulate_stock_path, ModelKind, ModelParams, ProcessKind};

    fn path(values: Vec<f64>) -> SamplePath {
        SamplePath { grid: TimeGrid::unit(1.0, values.len() - 1).unwrap(), values, label: ProcessKind::Bm }
    }

    #[test]
    fn trivial_paths() {
        assert_eq!(sample_qv(&path(vec![2.0; 10])), 0.0);
        assert_eq!(sample_qv(&path(vec![0.0, 1.0, 0.0, 1.0])), 3.0);
    }

    #[test]
    fn brownian_qv_is_time() {
        let g = TimeGrid::unit(1.0, 10_000).unwrap();
        let qv = sample_qv(&simulate_bm_path(&g, 7).unwrap());
        assert!((qv - 1.0).abs() < 0.05, "{qv}");
    }

    #[test]
    fn theoretical_values() {
        assert!((theoretical_qv_do(0.5, 0.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((theoretical_qv_do(0.5, 0.25, 1.0).unwrap() - 0.75).abs() < 1e-15);
        let c = 0.769_365_245_480_176_9_f64;
        assert!((theoretical_qv_do(0.7, 0.0, 1.0).unwrap() - c * c / 1.4).abs() < 1e-12);
        assert!(theoretical_qv_do(0.7, 1.0, 1.0).is_err());
        assert!(theoretical_qv_do(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn do_qv_at_fine_resolution() {
        let g = TimeGrid::unit(1.0, 32_768).unwrap();
        for h in [0.4, 0.5, 0.6, 0.7] {
            let target = theoretical_qv_do(h, 0.0, 1.0).unwrap();
            let rel: Vec<f64> = (0..20)
                .map(|s| {
                    let p = simulate_do_path(&g, h, PathSeed::new(3, s), MScheme::Exact).unwrap();
                    (sample_qv(&p) - target).abs() / target
                })
                .collect();
            assert!(mean(&rel) < 0.05, "h = {h}");
        }
    }

    #[test]
    fn log_stock_qv_scales_with_sigma_squared() {
        let g = TimeGrid::unit(1.0, 32_768).unwrap();
        let p =
            ModelParams { mu: 0.1, sigma: 0.3, h: 0.7, eps: 0.05, s0: 50.0, r: 0.02, model: ModelKind::DobricOjeda };
        let target = p.sigma * p.sigma * theoretical_qv_do(p.h, 0.0, 1.0).unwrap();
        let s = simulate_stock_path(&p, &g, 12).unwrap();
        let logs: Vec<f64> = s.values.iter().map(|x| x.ln()).collect();
        assert!((sample_qv_values(&logs) - target).abs() < 0.05 * target);
    }

    #[test]
    fn linear_drift_barely_moves_qv() {
        let g = TimeGrid::unit(1.0, 32_768).unwrap();
        let p = simulate_bm_path(&g, 13).unwrap();
        let drifted: Vec<f64> = p.values.iter().enumerate().map(|(i, x)| x + 0.8 * g.time(i)).collect();
        let base = sample_qv(&p);
        assert!((sample_qv_values(&drifted) - base).abs() < 1e-3 * base);
    }

    #[test]
    fn harness_degenerate_single_level() {
        let cfg = QvHarnessConfig { n_list: vec![1], n_seeds: 1, ..Default::default() };
        let r = qv_convergence_harness(&cfg).unwrap();
        assert_eq!(r.n_values, vec![1]);
        assert_eq!(r.l2_errors.len(), 1);
        assert!(r.log_log_slope.is_none());
    }

    #[test]
    fn harness_windowed_start() {
        let cfg = QvHarnessConfig { h: 0.6, t0: 0.3, n_list: vec![256], n_seeds: 10, ..Default::default() };
        let r = qv_convergence_harness(&cfg).unwrap();
        assert!((r.qv_estimates[0] - r.target).abs() < 0.05 * r.target);
    }

    #[test]
    fn harness_rejects_bad_config() {
        let bad = |cfg: QvHarnessConfig| qv_convergence_harness(&cfg).is_err();
        assert!(bad(QvHarnessConfig { delta: 0.0, ..Default::default() }));
        assert!(bad(QvHarnessConfig { n_list: vec![256, 64], ..Default::default() }));
        assert!(matches!(
            qv_convergence_harness(&QvHarnessConfig { n_list: vec![10_000], max_steps: 1000, ..Default::default() }),
            Err(Error::ResourceCap { .. })
        ));
    }

    #[test]
    fn report_csv_shape() {
        let cfg = QvHarnessConfig { n_list: vec![4, 8], n_seeds: 3, ..Default::default() };
        let r = qv_convergence_harness(&cfg).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "n,qv_mean,qv_target,l2_error");
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().nth(1).unwrap().starts_with("4,"));
    }
}
