//! Closed-form second moments of the simulated processes.

use crate::constants::HurstConstants;

/// `E[M_H(s) M_H(t)] = c_M (s ∧ t)^(2-2H)`.
pub fn martingale_cov(k: &HurstConstants, s: f64, t: f64) -> f64 {
    k.c_m * s.min(t).powf(2.0 - 2.0 * k.h)
}

/// `E[V_H(t)^2] = c_psi^2 c_M t^(2H)`.
pub fn do_second_moment(k: &HurstConstants, t: f64) -> f64 {
    k.c_psi * k.c_psi * k.c_m * t.powf(2.0 * k.h)
}

/// `E[(V^eps_t)^2]`, both before and after the drift cut-on time.
pub fn modified_second_moment(k: &HurstConstants, eps: f64, t: f64) -> f64 {
    let h = k.h;
    let two_h = 2.0 * h;
    let c2 = k.big_c * k.big_c;
    let base = c2 * t.powf(two_h) / two_h;
    if t <= eps {
        return base;
    }
    let g = two_h - 1.0;
    let span = (t.powf(two_h) - eps.powf(two_h)) / two_h;
    let cross = 2.0 * c2 * g * span;
    // (2H-1)^2 * eps/(2H-1) folded to (2H-1) * eps so H = 1/2 stays finite;
    // eps * eps^(2H-1) written as eps^(2H) so eps = 0 stays finite for H < 1/2
    let drift = 2.0 * k.c_m * k.c_psi * k.c_psi * (g * g * span - g * (eps * t.powf(g) - eps.powf(two_h)));
    base + cross + drift
}

/// fBm covariance `(t^(2H) + s^(2H) - |t-s|^(2H)) / 2`.
pub fn fbm_cov(h: f64, s: f64, t: f64) -> f64 {
    0.5 * (t.powf(2.0 * h) + s.powf(2.0 * h) - (t - s).abs().powf(2.0 * h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::derive_constants;

    // Itô isometry: V^eps_t = ∫_0^t g(u) dW_u with
    // g(u) = C u^(H-1/2) + sqrt(c_M(2-2H)) c_psi u^(1/2-H) (t^(2H-1) - max(u,eps)^(2H-1)).
    fn isometry_oracle(h: f64, eps: f64, t: f64) -> f64 {
        let k = derive_constants(h).unwrap();
        let a = (k.c_m * (2.0 - 2.0 * h)).sqrt();
        let g = |u: f64| {
            let tail = if u < t && t > eps { t.powf(2.0 * h - 1.0) - u.max(eps).powf(2.0 * h - 1.0) } else { 0.0 };
            k.big_c * u.powf(h - 0.5) + a * k.c_psi * u.powf(0.5 - h) * tail
        };
        // u = t y^4 removes the endpoint singularity; composite Simpson in y
        let n = 200_000;
        let f = |y: f64| {
            if y == 0.0 {
                return 0.0;
            }
            let u = t * y.powi(4);
            let gu = g(u);
            gu * gu * 4.0 * t * y.powi(3)
        };
        let dy = 1.0 / n as f64;
        let mut s = f(0.0) + f(1.0);
        for i in 1..n {
            s += f(i as f64 * dy) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * dy / 3.0
    }

    #[test]
    fn modified_moment_matches_isometry_quadrature() {
        for (h, eps, t) in [(0.7, 0.1, 1.0), (0.4, 0.2, 0.9), (0.6, 0.05, 2.0), (0.7, 1.5, 1.0), (0.5, 0.3, 1.0)] {
            let k = derive_constants(h).unwrap();
            let closed = modified_second_moment(&k, eps, t);
            let quad = isometry_oracle(h, eps, t);
            assert!((closed - quad).abs() < 1e-6 * quad, "h={h} eps={eps}: {closed} vs {quad}");
        }
    }

    #[test]
    fn eps_zero_recovers_unmodified_moment() {
        for h in [0.3, 0.45, 0.7, 0.9] {
            let k = derive_constants(h).unwrap();
            let a = modified_second_moment(&k, 0.0, 1.3);
            let b = do_second_moment(&k, 1.3);
            assert!((a - b).abs() < 1e-12 * b);
        }
    }
}
