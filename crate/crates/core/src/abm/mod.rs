//! Two-strategy evolutionary game on an interaction topology.
//!
//! Cooperators are the DCI-aligned strategy and defectors the AGI-aligned
//! one. Agents imitate sampled neighbours (proportional imitation or the
//! Fermi rule), optionally mutate, and the final cooperator share is
//! classified into one of the two attractors.

mod game;
mod sim;
mod topology;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use game::GameMatrix;
pub use sim::{basin_experiment, basin_outcomes, payoff_of, run, step, AbmConfig, AbmTrace, BasinRow, Population, UpdateRule};
pub use topology::{Neighborhood, Topology};

pub const DEFAULT_S_C: f64 = 0.1;
pub const DEFAULT_S_D: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    Cooperate,
    Defect,
}

impl Strategy {
    pub fn flipped(self) -> Self {
        match self {
            Strategy::Cooperate => Strategy::Defect,
            Strategy::Defect => Strategy::Cooperate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    AgiFirst,
    DciFirst,
    Undecided,
}

impl Outcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::AgiFirst => "agi_first",
            Outcome::DciFirst => "dci_first",
            Outcome::Undecided => "undecided",
        }
    }
}

pub(crate) fn check_thresholds(s_c: f64, s_d: f64) -> Result<()> {
    if !(0.0 <= s_c && s_c < s_d && s_d <= 1.0) {
        return Err(Error::invalid("s_c/s_d", format!("need 0 <= s_c < s_d <= 1, got s_c={s_c}, s_d={s_d}")));
    }
    Ok(())
}

/// Classifies a final cooperator share: at or below `s_c` the defecting
/// (AGI-first) attractor, at or above `s_d` the cooperating (DCI-first) one.
pub fn attractor_classify(final_x: f64, s_c: f64, s_d: f64) -> Result<Outcome> {
    check_thresholds(s_c, s_d)?;
    Ok(if final_x <= s_c {
        Outcome::AgiFirst
    } else if final_x >= s_d {
        Outcome::DciFirst
    } else {
        Outcome::Undecided
    })
}
