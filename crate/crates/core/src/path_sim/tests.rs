use super::moments::{do_second_moment, fbm_cov, martingale_cov, modified_second_moment};
use super::*;
use crate::exec::Exec;
use crate::stats::{mean, mean_stderr};

fn within_3se(samples: &[f64], target: f64) -> bool {
    let (m, se) = mean_stderr(samples);
    (m - target).abs() < 3.0 * se
}

fn endpoints<F>(n_paths: usize, f: F) -> Vec<f64>
where
    F: Fn(u64) -> f64 + Sync + Send,
{
    Exec::Parallel.map(n_paths, |i| f(i as u64))
}

#[test]
fn grid_validation() {
    assert!(TimeGrid::new(0.0, 1.0, 0).is_err());
    assert!(TimeGrid::new(1.0, 1.0, 4).is_err());
    assert!(TimeGrid::new(-0.1, 1.0, 4).is_err());
    let g = TimeGrid::new(0.25, 1.0, 3).unwrap();
    assert_eq!(g.times(), vec![0.25, 0.5, 0.75, 1.0]);
    assert!(simulate_martingale_path(&g, 0.5, 1, MScheme::Exact).is_err());
}

#[test]
fn paths_are_deterministic_and_start_at_zero() {
    let g = TimeGrid::unit(1.0, 64).unwrap();
    for scheme in [MScheme::Exact, MScheme::PaperEuler] {
        let a = simulate_do_path(&g, 0.7, PathSeed::new(9, 3), scheme).unwrap();
        let b = simulate_do_path(&g, 0.7, PathSeed::new(9, 3), scheme).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.values.len(), 65);
        assert_eq!(a.values[0], 0.0);
    }
    let other = simulate_do_path(&g, 0.7, PathSeed::new(9, 4), MScheme::Exact).unwrap();
    let a = simulate_do_path(&g, 0.7, PathSeed::new(9, 3), MScheme::Exact).unwrap();
    assert_ne!(a.values, other.values);
}

#[test]
fn single_step_brownian_variance() {
    let g = TimeGrid::unit(1.0, 1).unwrap();
    let x = endpoints(100_000, |i| {
        let p = simulate_martingale_path(&g, 0.5, PathSeed::new(11, i), MScheme::Exact).unwrap();
        p.values[1] * p.values[1]
    });
    assert!(within_3se(&x, 1.0));
}

#[test]
fn martingale_second_moment_and_covariance() {
    let g = TimeGrid::unit(1.0, 256).unwrap();
    let k = derive_constants(0.7).unwrap();
    let paths: Vec<(f64, f64)> = Exec::Parallel.map(10_000, |i| {
        let p = simulate_martingale_path(&g, 0.7, PathSeed::new(5, i as u64), MScheme::Exact).unwrap();
        (p.values[128], p.values[256])
    });
    let sq: Vec<f64> = paths.iter().map(|(_, b)| b * b).collect();
    assert!(within_3se(&sq, k.c_m));
    let cross: Vec<f64> = paths.iter().map(|(a, b)| a * b).collect();
    assert!(within_3se(&cross, martingale_cov(&k, 0.5, 1.0)));
}

#[test]
fn euler_scheme_is_first_order_close() {
    // the left-point rule biases E[M(1)^2]; it must still approach c_M as n grows
    let k = derive_constants(0.7).unwrap();
    let bias = |n: usize| {
        let g = TimeGrid::unit(1.0, n).unwrap();
        // expected value of the scheme is deterministic: sum of step variances
        let dt = g.dt();
        let mut acc = 0.0;
        for i in 0..n {
            let t = if i == 0 { g.time(1) } else { g.time(i) };
            acc += k.c_m * (2.0 - 2.0 * 0.7) * t.powf(1.0 - 2.0 * 0.7) * dt;
        }
        (acc - k.c_m).abs()
    };
    assert!(bias(1024) < bias(64));
    let g = TimeGrid::unit(1.0, 256).unwrap();
    let x = endpoints(10_000, |i| {
        let p = simulate_martingale_path(&g, 0.7, PathSeed::new(6, i), MScheme::PaperEuler).unwrap();
        p.values[256] * p.values[256]
    });
    let (m, se) = mean_stderr(&x);
    assert!((m - k.c_m).abs() < 3.0 * se + bias(256));
}

#[test]
fn disjoint_martingale_increments_uncorrelated() {
    let g = TimeGrid::unit(1.0, 64).unwrap();
    let pairs: Vec<(f64, f64)> = Exec::Parallel.map(10_000, |i| {
        let p = simulate_martingale_path(&g, 0.3, PathSeed::new(8, i as u64), MScheme::Exact).unwrap();
        (p.values[20] - p.values[10], p.values[50] - p.values[30])
    });
    let prod: Vec<f64> = pairs.iter().map(|(a, b)| a * b).collect();
    assert!(within_3se(&prod, 0.0));
}

#[test]
fn do_path_at_half_is_martingale_path() {
    let g = TimeGrid::unit(2.0, 100).unwrap();
    let m = simulate_martingale_path(&g, 0.5, 17, MScheme::Exact).unwrap();
    let v = simulate_do_path(&g, 0.5, 17, MScheme::Exact).unwrap();
    assert_eq!(m.values, v.values);
}

#[test]
fn do_path_moments() {
    let g = TimeGrid::unit(1.0, 256).unwrap();
    let k = derive_constants(0.7).unwrap();
    let end =
        endpoints(10_000, |i| simulate_do_path(&g, 0.7, PathSeed::new(21, i), MScheme::Exact).unwrap().values[256]);
    assert!(within_3se(&end, 0.0));
    let sq: Vec<f64> = end.iter().map(|x| x * x).collect();
    assert!(within_3se(&sq, do_second_moment(&k, 1.0)));
    assert!((do_second_moment(&k, 1.0) - k.c_psi * k.c_psi * k.c_m).abs() < 1e-15);
}

#[test]
fn modified_path_without_drift_window() {
    let g = TimeGrid::unit(1.0, 256).unwrap();
    let k = derive_constants(0.7).unwrap();
    let sq = endpoints(10_000, |i| {
        let v = simulate_modified_do_path(&g, 0.7, 1.0, PathSeed::new(31, i)).unwrap().values[256];
        v * v
    });
    assert!(within_3se(&sq, k.big_c * k.big_c / 1.4));
}

#[test]
fn modified_path_after_cut_on() {
    let g = TimeGrid::unit(1.0, 256).unwrap();
    let k = derive_constants(0.7).unwrap();
    let sq = endpoints(10_000, |i| {
        let v = simulate_modified_do_path(&g, 0.7, 0.1, PathSeed::new(32, i)).unwrap().values[256];
        v * v
    });
    assert!(within_3se(&sq, modified_second_moment(&k, 0.1, 1.0)));
}

#[test]
fn modified_path_at_half_is_brownian() {
    let g = TimeGrid::unit(1.0, 128).unwrap();
    for eps in [0.0, 0.3] {
        let sq = endpoints(10_000, |i| {
            let v = simulate_modified_do_path(&g, 0.5, eps, PathSeed::new(33, i)).unwrap().values[128];
            v * v
        });
        assert!(within_3se(&sq, 1.0));
    }
    let bm = simulate_bm_path(&g, 4).unwrap();
    let v = simulate_modified_do_path(&g, 0.5, 0.3, 4).unwrap();
    assert_eq!(bm.values, v.values);
}

#[test]
fn coupled_brownian_has_unit_variance() {
    let g = TimeGrid::unit(1.0, 128).unwrap();
    let sq = endpoints(10_000, |i| {
        let c = simulate_coupled(&g, 0.3, 0.2, PathSeed::new(34, i)).unwrap();
        c.brownian[128] * c.brownian[128]
    });
    // first step uses the right endpoint, so W is exact only up to O(dt) in variance
    let (m, se) = mean_stderr(&sq);
    assert!((m - 1.0).abs() < 3.0 * se + 0.02, "{m}");
}

#[test]
fn modified_converges_to_unmodified_as_eps_shrinks() {
    let g = TimeGrid::unit(1.0, 1024).unwrap();
    let sup_gap = |eps: f64| {
        let gaps = endpoints(100, |i| {
            let seed = PathSeed::new(40, i);
            let v = simulate_do_path(&g, 0.7, seed, MScheme::Exact).unwrap();
            let ve = simulate_modified_do_path(&g, 0.7, eps, seed).unwrap();
            v.values.iter().zip(&ve.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        });
        mean(&gaps)
    };
    let gaps: Vec<f64> = [0.4, 0.2, 0.1, 0.05].iter().map(|&e| sup_gap(e)).collect();
    for w in gaps.windows(2) {
        assert!(w[1] < w[0], "{gaps:?}");
    }
}

#[test]
fn fbm_cap_and_errors() {
    let g = TimeGrid::unit(1.0, 8192).unwrap();
    assert!(matches!(simulate_fbm_path(&g, 0.7, 1), Err(Error::ResourceCap { .. })));
    let g = TimeGrid::unit(1.0, 16).unwrap();
    assert!(simulate_fbm_path(&g, 1.0, 1).is_err());
}

#[test]
fn fbm_half_has_uncorrelated_increments() {
    let g = TimeGrid::unit(1.0, 32).unwrap();
    let chol = FbmCholesky::new(&g, 0.5).unwrap();
    let dt = g.dt();
    let prod = endpoints(20_000, |i| {
        let p = chol.sample(PathSeed::new(50, i));
        (p.values[11] - p.values[10]) * (p.values[12] - p.values[11]) / dt
    });
    assert!(within_3se(&prod, 0.0));
}

#[test]
fn fbm_positive_increment_correlation_above_half() {
    let g = TimeGrid::unit(1.0, 32).unwrap();
    let chol = FbmCholesky::new(&g, 0.7).unwrap();
    let prod = endpoints(20_000, |i| {
        let p = chol.sample(PathSeed::new(51, i));
        (p.values[11] - p.values[10]) * (p.values[12] - p.values[11])
    });
    let (m, se) = mean_stderr(&prod);
    assert!(m > 3.0 * se);
}

#[test]
fn fbm_covariance_matrix_on_eight_points() {
    let g = TimeGrid::unit(1.0, 8).unwrap();
    let h = 0.7;
    let chol = FbmCholesky::new(&g, h).unwrap();
    let paths: Vec<Vec<f64>> = Exec::Parallel.map(100_000, |i| chol.sample(PathSeed::new(52, i as u64)).values);
    for a in 1..=8 {
        for b in a..=8 {
            let prod: Vec<f64> = paths.iter().map(|p| p[a] * p[b]).collect();
            let target = fbm_cov(h, g.time(a), g.time(b));
            assert!(within_3se(&prod, target), "({a},{b})");
        }
    }
}

#[test]
fn fbm_covariance_at_quarter_points() {
    let g = TimeGrid::unit(1.0, 4).unwrap();
    let chol = FbmCholesky::new(&g, 0.7).unwrap();
    let prod = endpoints(100_000, |i| {
        let p = chol.sample(PathSeed::new(53, i));
        p.values[1] * p.values[3]
    });
    let oracle = 0.5 * (0.25f64.powf(1.4) + 0.75f64.powf(1.4) - 0.5f64.powf(1.4));
    assert!(within_3se(&prod, oracle));
}

#[test]
fn davies_harte_matches_covariance() {
    let g = TimeGrid::unit(2.0, 64).unwrap();
    for h in [0.3, 0.7] {
        let dh = DaviesHarte::new(&g, h).unwrap();
        let paths: Vec<Vec<f64>> = Exec::Parallel.map(40_000, |i| dh.sample(PathSeed::new(54, i as u64)).values);
        for (a, b) in [(16, 64), (32, 48), (64, 64), (1, 2)] {
            let prod: Vec<f64> = paths.iter().map(|p| p[a] * p[b]).collect();
            assert!(within_3se(&prod, fbm_cov(h, g.time(a), g.time(b))), "h={h} ({a},{b})");
        }
    }
}

fn params(model: ModelKind, h: f64, eps: f64) -> ModelParams {
    ModelParams { mu: 0.05, sigma: 0.2, h, eps, s0: 100.0, r: 0.05, model }
}

#[test]
fn do_stock_at_half_equals_black_scholes() {
    let g = TimeGrid::unit(1.0, 252).unwrap();
    for eps in [0.0, 0.2] {
        for seed in 0..20u64 {
            let bs = simulate_stock_path(&params(ModelKind::BlackScholes, 0.5, eps), &g, seed).unwrap();
            let dobj = simulate_stock_path(&params(ModelKind::DobricOjeda, 0.5, eps), &g, seed).unwrap();
            assert_eq!(bs.values, dobj.values);
        }
    }
}

#[test]
fn discounted_do_stock_is_martingale_before_cut_on() {
    let g = TimeGrid::unit(1.0, 128).unwrap();
    let p = params(ModelKind::DobricOjeda, 0.7, 1.0);
    let disc = endpoints(10_000, |i| {
        let s = simulate_stock_path(&p, &g, PathSeed::new(60, i)).unwrap();
        (-p.r).exp() * s.values[128]
    });
    assert!(within_3se(&disc, p.s0));
}

#[test]
fn fbm_stock_log_mean() {
    let g = TimeGrid::unit(1.0, 64).unwrap();
    let p = params(ModelKind::FractionalBm, 0.7, 0.0);
    let logs = endpoints(20_000, |i| {
        let s = simulate_stock_path(&p, &g, PathSeed::new(61, i)).unwrap();
        (s.values[64] / p.s0).ln()
    });
    assert!(within_3se(&logs, p.mu - 0.5 * p.sigma * p.sigma));
}

#[test]
fn stock_parameter_validation() {
    let g = TimeGrid::unit(1.0, 8).unwrap();
    let mut p = params(ModelKind::BlackScholes, 0.5, 0.0);
    p.sigma = 0.0;
    assert!(simulate_stock_path(&p, &g, 1).is_err());
    p.sigma = 0.2;
    p.s0 = -1.0;
    assert!(simulate_stock_path(&p, &g, 1).is_err());
}

#[test]
fn csv_dump_format() {
    let g = TimeGrid::unit(1.0, 2).unwrap();
    let p = simulate_bm_path(&g, 3).unwrap();
    let mut buf = Vec::new();
    p.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,value");
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[1], "0.0000000000000000e0,0.0000000000000000e0");
    let last: Vec<f64> = lines[3].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(last, vec![1.0, p.values[2]]);
}
