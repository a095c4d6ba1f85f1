use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::integrate::{rk4_increment, step_count, State};
use super::{find_fixed_points, FixedPointReport, RhsFamily, DEFAULT_DT, DEFAULT_GRID_N};
use crate::{Error, Result};

/// A settled state must satisfy `|rate| <= SETTLE_TOL`.
pub const SETTLE_TOL: f64 = 1e-6;

/// Fold (saddle-node) locations `lambda = -+2 (theta/3)^{3/2}` of the cusp
/// family, or `None` when `theta <= 0` and the family is monostable.
pub fn cusp_folds(theta: f64) -> Option<(f64, f64)> {
    (theta > 0.0).then(|| {
        let l = 2.0 * (theta / 3.0).powf(1.5);
        (-l, l)
    })
}

/// `lo, lo + step, ...` up to `hi` (inclusive within rounding).
pub fn lambda_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::invalid("step", format!("must be finite and > 0, got {step}")));
    }
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::invalid("lambda_lo/lambda_hi", format!("need finite lo <= hi, got [{lo}, {hi}]")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| lo + i as f64 * step).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationPoint {
    pub lambda: f64,
    pub report: FixedPointReport,
}

/// Fixed-point reports along a `lambda` grid. Grid points are processed in
/// parallel; the result is ordered by `lambda`.
pub fn sweep_bifurcation(
    family: &impl RhsFamily,
    lambda_lo: f64,
    lambda_hi: f64,
    step: f64,
    grid_n: usize,
) -> Result<Vec<BifurcationPoint>> {
    if lambda_lo >= lambda_hi {
        return Err(Error::invalid("lambda_lo/lambda_hi", format!("need lo < hi, got [{lambda_lo}, {lambda_hi}]")));
    }
    lambda_grid(lambda_lo, lambda_hi, step)?
        .into_par_iter()
        .map(|lambda| {
            let (lo, hi) = family.state_bounds(lambda);
            let report = find_fixed_points(|s| family.rate(s, lambda), lo, hi, grid_n)?;
            Ok(BifurcationPoint { lambda, report })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HysteresisOptions {
    /// Minimum relaxation time at each `lambda`.
    pub relax_t: f64,
    pub dt: f64,
    /// Settled-state change between adjacent `lambda` counted as a jump.
    pub jump_tol: f64,
    /// Relaxation continues in `relax_t` chunks until settled, at most this
    /// many chunks in total.
    pub max_relax_chunks: usize,
    pub grid_n: usize,
}

impl Default for HysteresisOptions {
    fn default() -> Self {
        Self { relax_t: 50.0, dt: DEFAULT_DT, jump_tol: 0.5, max_relax_chunks: 40, grid_n: DEFAULT_GRID_N }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HysteresisReport {
    /// `(lambda, settled state)` in increasing `lambda`.
    pub up_branch: Vec<(f64, f64)>,
    /// `(lambda, settled state)` in decreasing `lambda`.
    pub down_branch: Vec<(f64, f64)>,
    pub jumps_up: Vec<f64>,
    pub jumps_down: Vec<f64>,
    pub loop_area: f64,
}

fn settle(family: &impl RhsFamily, lambda: f64, start: f64, opts: &HysteresisOptions) -> Result<f64> {
    let f = |s: f64| family.rate(s, lambda);
    let steps = step_count(opts.dt, opts.relax_t).max(1);
    let mut state = State::new(start);
    let mut rate = f(start);
    for _ in 0..opts.max_relax_chunks.max(1) {
        for _ in 0..steps {
            let x = state.get();
            state.add(rk4_increment(f, x, opts.dt));
        }
        let x = state.get();
        if !x.is_finite() {
            return Err(Error::NotEquilibrated { lambda, rate: f64::NAN });
        }
        rate = f(x);
        if rate.abs() <= SETTLE_TOL {
            return Ok(x);
        }
    }
    Err(Error::NotEquilibrated { lambda, rate: rate.abs() })
}

fn jumps(branch: &[(f64, f64)], tol: f64) -> Vec<f64> {
    branch.windows(2).filter(|w| (w[1].1 - w[0].1).abs() > tol).map(|w| w[1].0).collect()
}

/// Quasi-static hysteresis protocol.
///
/// Starting from the lowest stable equilibrium at `lambda_lo`, `lambda` is
/// stepped up to `lambda_hi` and back; at each value the state is relaxed
/// from the previous settled state. Jumps are settled-state changes larger
/// than `jump_tol` between neighbouring `lambda` values (reported at the
/// later value), and `loop_area` is the trapezoidal integral of
/// `|up - down|` over `lambda`.
pub fn hysteresis_loop(
    family: &impl RhsFamily,
    lambda_lo: f64,
    lambda_hi: f64,
    step: f64,
    opts: &HysteresisOptions,
) -> Result<HysteresisReport> {
    if !(opts.relax_t.is_finite() && opts.relax_t > 0.0) {
        return Err(Error::invalid("relax_t", "must be finite and > 0"));
    }
    if !(opts.dt.is_finite() && opts.dt > 0.0) {
        return Err(Error::invalid("dt", "must be finite and > 0"));
    }
    if !(opts.jump_tol.is_finite() && opts.jump_tol > 0.0) {
        return Err(Error::invalid("jump_tol", "must be finite and > 0"));
    }
    let lambdas = lambda_grid(lambda_lo, lambda_hi, step)?;
    if lambda_lo == lambda_hi {
        return Ok(HysteresisReport::default());
    }

    let (lo, hi) = family.state_bounds(lambda_lo);
    let start = find_fixed_points(|s| family.rate(s, lambda_lo), lo, hi, opts.grid_n)?.stable().next().unwrap_or(lo);

    let mut state = start;
    let mut up_branch = Vec::with_capacity(lambdas.len());
    for &lambda in &lambdas {
        state = settle(family, lambda, state, opts)?;
        up_branch.push((lambda, state));
    }
    let mut down_branch = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas.iter().rev() {
        state = settle(family, lambda, state, opts)?;
        down_branch.push((lambda, state));
    }

    let gap: Vec<f64> = up_branch.iter().zip(down_branch.iter().rev()).map(|(u, d)| (u.1 - d.1).abs()).collect();
    let loop_area = lambdas.windows(2).zip(gap.windows(2)).map(|(l, g)| 0.5 * (g[0] + g[1]) * (l[1] - l[0])).sum();

    Ok(HysteresisReport {
        jumps_up: jumps(&up_branch, opts.jump_tol),
        jumps_down: jumps(&down_branch, opts.jump_tol),
        up_branch,
        down_branch,
        loop_area,
    })
}
