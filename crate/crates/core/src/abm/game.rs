use serde::{Deserialize, Serialize};

use super::Strategy;

/// Symmetric two-strategy game, row player's payoffs:
///
/// |       | C    | D    |
/// |-------|------|------|
/// | **C** | `r`  | `sg` |
/// | **D** | `t`  | `pu` |
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameMatrix {
    pub r: f64,
    pub sg: f64,
    pub t: f64,
    pub pu: f64,
}

impl GameMatrix {
    pub const fn new(r: f64, sg: f64, t: f64, pu: f64) -> Self {
        Self { r, sg, t, pu }
    }

    /// Pure coordination: matching strategies pay 1, mismatches 0.
    pub const fn coordination() -> Self {
        Self::new(1.0, 0.0, 0.0, 1.0)
    }

    /// Frequency-independent game with `P_C = p_c`, `P_D = p_d`.
    pub const fn constant(p_c: f64, p_d: f64) -> Self {
        Self::new(p_c, p_c, p_d, p_d)
    }

    pub fn is_finite(&self) -> bool {
        [self.r, self.sg, self.t, self.pu].iter().all(|v| v.is_finite())
    }

    pub fn payoff(&self, me: Strategy, other: Strategy) -> f64 {
        match (me, other) {
            (Strategy::Cooperate, Strategy::Cooperate) => self.r,
            (Strategy::Cooperate, Strategy::Defect) => self.sg,
            (Strategy::Defect, Strategy::Cooperate) => self.t,
            (Strategy::Defect, Strategy::Defect) => self.pu,
        }
    }

    /// Expected cooperator payoff against cooperator share `x`.
    pub fn cooperator_payoff(&self, x: f64) -> f64 {
        self.r * x + self.sg * (1.0 - x)
    }

    pub fn defector_payoff(&self, x: f64) -> f64 {
        self.t * x + self.pu * (1.0 - x)
    }

    /// Spread between the largest and smallest entry.
    pub fn payoff_range(&self) -> f64 {
        let v = [self.r, self.sg, self.t, self.pu];
        let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = v.iter().copied().fold(f64::INFINITY, f64::min);
        max - min
    }
}
