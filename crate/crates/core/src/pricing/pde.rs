//! Crank-Nicolson solver for the Dobrić-Ojeda pricing equation
//! `r f = r x f_x + f_t + sigma^2 C^2 t^(2H-1) x^2 f_xx / 2`.
//!
//! In log price `y = ln x` the equation has constant spatial coefficients and
//! a time-dependent diffusion `a(t) = sigma^2 C^2 t^(2H-1)`. Each step uses
//! the exact average of `a` over the step, `sigma^2 C^2 (t1^(2H) - t0^(2H)) / (2H dt)`,
//! which stays finite when the step touches `t = 0` and `H < 1/2`.

use crate::constants::{derive_constants, HurstConstants};
use crate::error::{Error, Result};
use crate::path_sim::ModelKind;

use super::closed_form::total_std;
use super::{CallInputs, PriceQuote};

/// Half-width of the log-price domain in units of the total standard deviation.
const DOMAIN_STDS: f64 = 6.0;
/// Leading time steps replaced by two fully implicit half steps each.
const RANNACHER_STEPS: usize = 2;
pub const MIN_NODES: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdeGrid {
    pub x_nodes: usize,
    pub t_steps: usize,
    /// Largest relative change between this grid and one with half the nodes
    /// and steps before the result is rejected; `f64::INFINITY` skips the check.
    pub refine_tol: f64,
}

impl Default for PdeGrid {
    fn default() -> Self {
        Self { x_nodes: 400, t_steps: 400, refine_tol: 1e-2 }
    }
}

impl PdeGrid {
    pub fn new(x_nodes: usize, t_steps: usize) -> Self {
        Self { x_nodes, t_steps, ..Self::default() }
    }
}

/// Prices the call by backward time stepping from the payoff at `t_exp` to `t`.
pub fn do_call_pde(inp: &CallInputs, grid: PdeGrid) -> Result<PriceQuote> {
    inp.validate()?;
    if grid.x_nodes < MIN_NODES || grid.t_steps < MIN_NODES {
        return Err(Error::InvalidGrid(format!(
            "need at least {MIN_NODES} price nodes and time steps, got {} x {}",
            grid.x_nodes, grid.t_steps
        )));
    }
    if !(grid.refine_tol > 0.0) {
        return Err(Error::InvalidParameter(format!("refine_tol must be > 0, got {}", grid.refine_tol)));
    }
    let quote = |value| PriceQuote { value, d1: None, model: ModelKind::DobricOjeda, stderr: None };
    if inp.t == inp.t_exp {
        return Ok(quote((inp.s - inp.k).max(0.0)));
    }
    let consts = derive_constants(inp.h)?;
    let fine = solve(inp, &consts, grid.x_nodes, grid.t_steps)?;
    if grid.refine_tol.is_finite() {
        let coarse = solve(inp, &consts, grid.x_nodes / 2, grid.t_steps / 2)?;
        let scale = fine.abs().max(1e-8 * inp.s);
        let rel_change = (fine - coarse).abs() / scale;
        if rel_change > grid.refine_tol {
            return Err(Error::GridTooCoarse { rel_change, tol: grid.refine_tol });
        }
    }
    Ok(quote(fine.max(0.0)))
}

fn solve(inp: &CallInputs, consts: &HurstConstants, nx: usize, nt: usize) -> Result<f64> {
    let v = total_std(ModelKind::DobricOjeda, inp.sigma, inp.h, inp.t, inp.t_exp)?;
    if !(v > 0.0) {
        return Err(Error::DegenerateInput(format!("total volatility over [t, T] is {v}")));
    }
    let x0 = inp.s.ln();
    let lo = x0 - DOMAIN_STDS * v;
    let dy = 2.0 * DOMAIN_STDS * v / (nx - 1) as f64;
    let upper_x = (lo + dy * (nx - 1) as f64).exp();
    let mut f: Vec<f64> = (0..nx).map(|j| ((lo + dy * j as f64).exp() - inp.k).max(0.0)).collect();

    let ctx = Stepper {
        r: inp.r,
        dy,
        coeff: inp.sigma * inp.sigma * consts.qv_coefficient(),
        two_h: 2.0 * consts.h,
        k: inp.k,
        t_exp: inp.t_exp,
        upper_x,
    };
    let dt = (inp.t_exp - inp.t) / nt as f64;
    let time = |n: usize| if n == nt { inp.t_exp } else { inp.t + dt * n as f64 };
    let mut work = Workspace::new(nx);
    for n in (0..nt).rev() {
        let (t0, t1) = (time(n), time(n + 1));
        if nt - n <= RANNACHER_STEPS {
            let mid = 0.5 * (t0 + t1);
            ctx.step(&mut f, &mut work, mid, t1, 1.0);
            ctx.step(&mut f, &mut work, t0, mid, 1.0);
        } else {
            ctx.step(&mut f, &mut work, t0, t1, 0.5);
        }
    }
    Ok(interpolate(&f, (x0 - lo) / dy))
}

struct Stepper {
    r: f64,
    dy: f64,
    /// `sigma^2 C^2 / (2H)`.
    coeff: f64,
    two_h: f64,
    k: f64,
    t_exp: f64,
    upper_x: f64,
}

struct Workspace {
    rhs: Vec<f64>,
    c_prime: Vec<f64>,
}

impl Workspace {
    fn new(nx: usize) -> Self {
        Self { rhs: vec![0.0; nx], c_prime: vec![0.0; nx] }
    }
}

impl Stepper {
    /// One theta step from `t1` back to `t0`, in place.
    fn step(&self, f: &mut [f64], w: &mut Workspace, t0: f64, t1: f64, theta: f64) {
        let nx = f.len();
        let dt = t1 - t0;
        let a = self.coeff * (t1.powf(self.two_h) - t0.powf(self.two_h)) / dt;
        let diff = 0.5 * a / (self.dy * self.dy);
        let conv = (self.r - 0.5 * a) / (2.0 * self.dy);
        let (lower, diag, upper) = (diff - conv, -2.0 * diff - self.r, diff + conv);

        let explicit = (1.0 - theta) * dt;
        for j in 1..nx - 1 {
            w.rhs[j] = f[j] + explicit * (lower * f[j - 1] + diag * f[j] + upper * f[j + 1]);
        }
        let bc_lo = 0.0;
        let bc_hi = self.upper_x - self.k * (-self.r * (self.t_exp - t0)).exp();

        // Thomas algorithm on the interior rows of (I - theta dt L) f = rhs.
        let (al, ad, au) = (-theta * dt * lower, 1.0 - theta * dt * diag, -theta * dt * upper);
        w.rhs[1] -= al * bc_lo;
        w.rhs[nx - 2] -= au * bc_hi;
        w.c_prime[1] = au / ad;
        w.rhs[1] /= ad;
        for j in 2..nx - 1 {
            let m = ad - al * w.c_prime[j - 1];
            w.c_prime[j] = au / m;
            w.rhs[j] = (w.rhs[j] - al * w.rhs[j - 1]) / m;
        }
        f[nx - 2] = w.rhs[nx - 2];
        for j in (1..nx - 2).rev() {
            f[j] = w.rhs[j] - w.c_prime[j] * f[j + 1];
        }
        f[0] = bc_lo;
        f[nx - 1] = bc_hi;
    }
}

/// Quadratic Lagrange interpolation at fractional node position `p`.
fn interpolate(f: &[f64], p: f64) -> f64 {
    let i = (p.round() as usize).clamp(1, f.len() - 2);
    let u = p - i as f64;
    let (fm, f0, fp) = (f[i - 1], f[i], f[i + 1]);
    f0 + 0.5 * u * (fp - fm) + 0.5 * u * u * (fp - 2.0 * f0 + fm)
}
