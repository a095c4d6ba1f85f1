//! Continuous-time models: replicator and cusp right-hand sides, fixed-step
//! RK4 integration, fixed-point analysis, bifurcation sweeps and quasi-static
//! hysteresis loops.

mod bifurcation;
mod integrate;
mod rhs;
mod roots;

use serde::{Deserialize, Serialize};

use crate::abm::GameMatrix;

pub use bifurcation::{
    cusp_folds, hysteresis_loop, lambda_grid, sweep_bifurcation, BifurcationPoint, HysteresisOptions,
    HysteresisReport, SETTLE_TOL,
};
pub use integrate::{integrate, Trajectory, CLAMP_LIMIT, DEFAULT_DT};
pub use rhs::{closed_form_logistic, cusp_rhs, replicator_rhs, CuspFamily, RhsFamily, TabulatedFamily};
pub use roots::{
    find_fixed_points, FixedPoint, FixedPointReport, Stability, DEFAULT_GRID_N, FD_STEP, MARGINAL_BAND,
    ROOT_TOL,
};

/// Control parameter `lambda` and shape parameter `theta` of the cusp family
/// `lambda + theta * s - s^3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlParams {
    pub lambda: f64,
    pub theta: f64,
}

impl ControlParams {
    pub fn new(lambda: f64, theta: f64) -> Self {
        Self { lambda, theta }
    }

    /// The same family with `lambda` left free.
    pub fn family(&self) -> CuspFamily {
        CuspFamily { theta: self.theta }
    }
}

/// Payoffs entering the replicator equation.
///
/// `Constant` uses fixed `P_C`/`P_D`; `Matrix` makes both frequency dependent
/// through the two-strategy game `P_C(x) = R x + S (1 - x)`,
/// `P_D(x) = T x + P (1 - x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PayoffSpec {
    Constant { p_c: f64, p_d: f64 },
    Matrix { game: GameMatrix },
}

impl PayoffSpec {
    pub fn constant(p_c: f64, p_d: f64) -> Self {
        PayoffSpec::Constant { p_c, p_d }
    }

    /// `(P_C(x), P_D(x))`.
    pub fn payoffs(&self, x: f64) -> (f64, f64) {
        match *self {
            PayoffSpec::Constant { p_c, p_d } => (p_c, p_d),
            PayoffSpec::Matrix { game } => (game.cooperator_payoff(x), game.defector_payoff(x)),
        }
    }

    /// `P_C(x) - P_D(x)`.
    pub fn advantage(&self, x: f64) -> f64 {
        let (c, d) = self.payoffs(x);
        c - d
    }

    /// Replicator rate without the domain check; extends the polynomial
    /// outside `[0, 1]` so finite differences at the boundary are defined.
    pub fn rate_unchecked(&self, x: f64) -> f64 {
        x * (1.0 - x) * self.advantage(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OdeRhs {
    Replicator { payoffs: PayoffSpec },
    Cusp { params: ControlParams },
}

impl OdeRhs {
    pub fn rate(&self, x: f64) -> f64 {
        match self {
            OdeRhs::Replicator { payoffs } => payoffs.rate_unchecked(x),
            OdeRhs::Cusp { params } => cusp_rhs(x, *params),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeSpec {
    pub rhs: OdeRhs,
    pub x0: f64,
    pub dt: f64,
    pub t_end: f64,
}

impl OdeSpec {
    pub fn replicator(payoffs: PayoffSpec, x0: f64, dt: f64, t_end: f64) -> Self {
        Self { rhs: OdeRhs::Replicator { payoffs }, x0, dt, t_end }
    }

    pub fn cusp(params: ControlParams, x0: f64, dt: f64, t_end: f64) -> Self {
        Self { rhs: OdeRhs::Cusp { params }, x0, dt, t_end }
    }

    pub fn validate(&self) -> crate::Result<()> {
        use crate::Error;
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid("dt", format!("must be finite and > 0, got {}", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::invalid("t_end", format!("must be finite and >= 0, got {}", self.t_end)));
        }
        if !self.x0.is_finite() {
            return Err(Error::invalid("x0", "must be finite"));
        }
        match self.rhs {
            OdeRhs::Replicator { .. } if !(0.0..=1.0).contains(&self.x0) => {
                Err(Error::invalid("x0", format!("replicator state must lie in [0, 1], got {}", self.x0)))
            }
            OdeRhs::Cusp { params } if !(params.lambda.is_finite() && params.theta.is_finite()) => {
                Err(Error::invalid("params", "lambda and theta must be finite"))
            }
            _ => Ok(()),
        }
    }
}
