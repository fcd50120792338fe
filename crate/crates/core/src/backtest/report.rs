use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::fmt::{f17, f17_opt};

use super::BacktestRow;

/// Paths written by [`emit_report`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportFiles {
    pub backtest_csv: PathBuf,
    pub h_estimates_csv: PathBuf,
    pub svg: Option<PathBuf>,
}

/// Writes `backtest.csv`, `h_estimates.csv` and, if `svg`, `report.svg` into `out_dir`.
///
/// `variant` labels the estimator formulas in `h_estimates.csv`.
pub fn emit_report(rows: &[BacktestRow], out_dir: &Path, variant: &str, svg: bool) -> Result<ReportFiles> {
    if rows.is_empty() {
        return Err(Error::InvalidParameter("no backtest rows to report".into()));
    }
    fs::create_dir_all(out_dir)?;

    let backtest_csv = out_dir.join("backtest.csv");
    let mut w = csv::Writer::from_path(&backtest_csv)?;
    w.write_record([
        "date",
        "spot",
        "tau",
        "h_ergodic",
        "h_qv",
        "sigma_ergodic",
        "sigma_qv",
        "sigma_bs",
        "clamped_ergodic",
        "clamped_qv",
        "price_bs",
        "price_fbm",
        "price_do",
        "price_market",
    ])?;
    for r in rows {
        w.write_record([
            r.date.to_string(),
            f17(r.spot),
            f17(r.tau),
            f17(r.h_ergodic),
            f17(r.h_qv),
            f17(r.sigma_ergodic),
            f17(r.sigma_qv),
            f17(r.sigma_bs),
            r.clamped_ergodic.to_string(),
            r.clamped_qv.to_string(),
            f17(r.price_bs),
            f17(r.price_fbm),
            f17(r.price_do),
            f17_opt(r.price_market),
        ])?;
    }
    w.flush()?;

    let h_estimates_csv = out_dir.join("h_estimates.csv");
    let mut w = csv::Writer::from_path(&h_estimates_csv)?;
    w.write_record(["date", "h_ergodic", "h_qv", "sigma_ergodic", "sigma_qv", "variant"])?;
    for r in rows {
        w.write_record([
            r.date.to_string(),
            f17(r.h_ergodic),
            f17(r.h_qv),
            f17(r.sigma_ergodic),
            f17(r.sigma_qv),
            variant.to_string(),
        ])?;
    }
    w.flush()?;

    let svg = if svg {
        let path = out_dir.join("report.svg");
        fs::write(&path, render_svg(rows))?;
        Some(path)
    } else {
        None
    };
    Ok(ReportFiles { backtest_csv, h_estimates_csv, svg })
}

const WIDTH: f64 = 960.0;
const PANEL_H: f64 = 320.0;
const MARGIN: f64 = 60.0;

struct Trace<'a> {
    label: &'a str,
    color: &'a str,
    values: Vec<f64>,
}

/// Static two-panel SVG 1.1 chart: rolling H estimates above, model and market prices below.
pub fn render_svg(rows: &[BacktestRow]) -> String {
    let col = |f: fn(&BacktestRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    let h_traces = vec![
        Trace { label: "H ergodic (fBm)", color: "#1f77b4", values: col(|r| r.h_ergodic) },
        Trace { label: "H QV ratio (DO)", color: "#d62728", values: col(|r| r.h_qv) },
    ];
    let mut price_traces = vec![
        Trace { label: "Black-Scholes", color: "#2ca02c", values: col(|r| r.price_bs) },
        Trace { label: "fBm", color: "#1f77b4", values: col(|r| r.price_fbm) },
        Trace { label: "Dobric-Ojeda", color: "#d62728", values: col(|r| r.price_do) },
    ];
    if rows.iter().any(|r| r.price_market.is_some()) {
        price_traces.push(Trace {
            label: "market",
            color: "#000000",
            values: col(|r| r.price_market.unwrap_or(f64::NAN)),
        });
    }

    let height = 2.0 * PANEL_H + 2.0 * MARGIN;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{height}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>"#
    );
    panel(&mut s, MARGIN / 2.0, "Rolling Hurst estimates", &h_traces, rows);
    panel(&mut s, PANEL_H + 1.5 * MARGIN, "Call prices", &price_traces, rows);
    s.push_str("</svg>\n");
    s
}

fn panel(s: &mut String, top: f64, title: &str, traces: &[Trace], rows: &[BacktestRow]) {
    let (x0, x1) = (MARGIN, WIDTH - MARGIN);
    let (y0, y1) = (top + 20.0, top + PANEL_H - 20.0);
    let finite = traces.iter().flat_map(|t| t.values.iter().copied()).filter(|v| v.is_finite());
    let (mut lo, mut hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo, hi) = (lo - 0.5, hi + 0.5);
    }
    let n = rows.len();
    let px = |i: usize| if n > 1 { x0 + (x1 - x0) * i as f64 / (n - 1) as f64 } else { 0.5 * (x0 + x1) };
    let py = |v: f64| y1 - (y1 - y0) * (v - lo) / (hi - lo);

    let _ = writeln!(s, r#"<text x="{x0}" y="{}" font-weight="bold">{title}</text>"#, top + 10.0);
    let _ = writeln!(
        s,
        r##"<rect x="{x0}" y="{y0}" width="{}" height="{}" fill="none" stroke="#888888"/>"##,
        x1 - x0,
        y1 - y0
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{hi:.3}</text>"#, x0 - 4.0, y0 + 4.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{lo:.3}</text>"#, x0 - 4.0, y1);
    let _ = writeln!(s, r#"<text x="{x0}" y="{}">{}</text>"#, y1 + 16.0, rows[0].date);
    let _ = writeln!(s, r#"<text x="{x1}" y="{}" text-anchor="end">{}</text>"#, y1 + 16.0, rows[n - 1].date);

    for (k, t) in traces.iter().enumerate() {
        // Missing values split the line into separate runs.
        let mut runs: Vec<Vec<String>> = vec![Vec::new()];
        for (i, v) in t.values.iter().enumerate() {
            if v.is_finite() {
                runs.last_mut().expect("non-empty").push(format!("{:.2},{:.2}", px(i), py(*v)));
            } else if !runs.last().expect("non-empty").is_empty() {
                runs.push(Vec::new());
            }
        }
        for run in runs.iter().filter(|r| !r.is_empty()) {
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
                t.color,
                run.join(" ")
            );
        }
        let lx = x0 + 10.0 + 170.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 20.0,
            t.color,
            lx + 25.0,
            y0 + 16.0,
            t.label,
            ly = y0 + 12.0,
        );
    }
}
