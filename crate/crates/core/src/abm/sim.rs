use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{attractor_classify, check_thresholds, GameMatrix, Neighborhood, Outcome, Strategy, Topology};
use crate::cogmodel::{AgentMind, Operation};
use crate::rng::{derive_seed, stream, SimRng};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum UpdateRule {
    /// Adopt with probability `max(0, (pi_nbr - pi_self) / range)`, where
    /// `range` is the spread of the game matrix.
    ProportionalImitation,
    /// Adopt with probability `1 / (1 + exp(-beta (pi_nbr - pi_self)))`.
    Fermi { beta: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbmConfig {
    pub n: usize,
    /// Initial cooperator share.
    pub x0: f64,
    pub game: GameMatrix,
    pub topology: Topology,
    pub update: UpdateRule,
    /// Per-agent, per-round mutation probability.
    pub noise: f64,
    pub rounds: usize,
    /// Scales every adoption probability. With proportional imitation on a
    /// well-mixed population one round then advances the replicator flow by
    /// `revision_rate / range` time units.
    pub revision_rate: f64,
    pub s_c: f64,
    pub s_d: f64,
    pub rng_seed: u64,
}

impl AbmConfig {
    pub fn new(n: usize, x0: f64, game: GameMatrix, rounds: usize, rng_seed: u64) -> Self {
        Self {
            n,
            x0,
            game,
            topology: Topology::WellMixed,
            update: UpdateRule::ProportionalImitation,
            noise: 0.0,
            rounds,
            revision_rate: 1.0,
            s_c: super::DEFAULT_S_C,
            s_d: super::DEFAULT_S_D,
            rng_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::invalid("n", format!("need at least 2 agents, got {}", self.n)));
        }
        if !(0.0..=1.0).contains(&self.x0) {
            return Err(Error::invalid("x0", format!("must lie in [0, 1], got {}", self.x0)));
        }
        if !self.game.is_finite() {
            return Err(Error::invalid("game", "payoffs must be finite"));
        }
        if !(0.0..=1.0).contains(&self.noise) {
            return Err(Error::invalid("noise", format!("must lie in [0, 1], got {}", self.noise)));
        }
        if !(self.revision_rate > 0.0 && self.revision_rate <= 1.0) {
            return Err(Error::invalid("revision_rate", format!("must lie in (0, 1], got {}", self.revision_rate)));
        }
        if let UpdateRule::Fermi { beta } = self.update {
            if !(beta.is_finite() && beta >= 0.0) {
                return Err(Error::invalid("beta", format!("must be finite and >= 0, got {beta}")));
            }
        }
        check_thresholds(self.s_c, self.s_d)
    }

    /// Probability that an agent with payoff `own` copies a neighbour with
    /// payoff `other`.
    fn adoption_probability(&self, own: f64, other: f64) -> f64 {
        let p = match self.update {
            UpdateRule::ProportionalImitation => {
                let range = self.game.payoff_range();
                if range > 0.0 {
                    ((other - own) / range).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            }
            UpdateRule::Fermi { beta } => 1.0 / (1.0 + (-beta * (other - own)).exp()),
        };
        self.revision_rate * p
    }
}

/// Agent strategies on a fixed interaction structure, optionally carrying a
/// cognitive model per agent.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    strategies: Vec<Strategy>,
    neighborhood: Arc<Neighborhood>,
    minds: Option<Vec<AgentMind>>,
}

impl Population {
    pub fn new(strategies: Vec<Strategy>, topology: &Topology) -> Result<Self> {
        let neighborhood = Arc::new(topology.resolve(strategies.len())?);
        Ok(Self { strategies, neighborhood, minds: None })
    }

    /// `cooperators` cooperators followed by defectors, `n` agents in total.
    pub fn from_counts(n: usize, cooperators: usize, topology: &Topology) -> Result<Self> {
        if cooperators > n {
            return Err(Error::invalid("cooperators", format!("{cooperators} exceeds n = {n}")));
        }
        let mut s = vec![Strategy::Defect; n];
        s[..cooperators].fill(Strategy::Cooperate);
        Self::new(s, topology)
    }

    /// Attaches one mind per agent; strategy switches are appended to the
    /// switching agent's transform log.
    pub fn with_minds(mut self, minds: Vec<AgentMind>) -> Result<Self> {
        if minds.len() != self.strategies.len() {
            return Err(Error::invalid("minds", format!("need {} minds, got {}", self.strategies.len(), minds.len())));
        }
        self.minds = Some(minds);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.strategies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strategies.is_empty()
    }

    pub fn strategies(&self) -> &[Strategy] {
        &self.strategies
    }

    pub fn neighborhood(&self) -> &Neighborhood {
        &self.neighborhood
    }

    pub fn minds(&self) -> Option<&[AgentMind]> {
        self.minds.as_deref()
    }

    pub fn cooperators(&self) -> usize {
        self.strategies.iter().filter(|&&s| s == Strategy::Cooperate).count()
    }

    pub fn coop_fraction(&self) -> f64 {
        self.cooperators() as f64 / self.len() as f64
    }
}

/// Well-mixed payoffs `(pi_C, pi_D)` with `c` cooperators among `n`,
/// excluding self-interaction.
fn complete_payoffs(game: &GameMatrix, n: usize, c: usize) -> (f64, f64) {
    let (n, c) = (n as f64, c as f64);
    let others = n - 1.0;
    let pc = (game.r * (c - 1.0).max(0.0) + game.sg * (n - c)) / others;
    let pd = (game.t * c + game.pu * (n - c - 1.0).max(0.0)) / others;
    (pc, pd)
}

/// Mean payoff of `agent` over its interactions.
pub fn payoff_of(agent: usize, population: &Population, game: &GameMatrix) -> Result<f64> {
    let me = population.strategies[agent];
    match population.neighborhood.as_ref() {
        Neighborhood::Complete { n } => {
            let (pc, pd) = complete_payoffs(game, *n, population.cooperators());
            Ok(if me == Strategy::Cooperate { pc } else { pd })
        }
        Neighborhood::Lists(lists) => {
            let nb = &lists[agent];
            if nb.is_empty() {
                return Err(Error::IsolatedAgent(agent));
            }
            let total: f64 = nb.iter().map(|&j| game.payoff(me, population.strategies[j])).sum();
            Ok(total / nb.len() as f64)
        }
    }
}

fn all_payoffs(population: &Population, game: &GameMatrix) -> Result<Vec<f64>> {
    match population.neighborhood.as_ref() {
        Neighborhood::Complete { n } => {
            let (pc, pd) = complete_payoffs(game, *n, population.cooperators());
            Ok(population.strategies.iter().map(|&s| if s == Strategy::Cooperate { pc } else { pd }).collect())
        }
        Neighborhood::Lists(_) => (0..population.len()).map(|i| payoff_of(i, population, game)).collect(),
    }
}

/// One synchronous round: every agent samples a neighbour and may copy its
/// strategy (payoffs from the pre-round state), then mutates with
/// probability `noise`.
pub fn step(population: &Population, config: &AbmConfig, rng: &mut SimRng) -> Result<Population> {
    let payoffs = all_payoffs(population, &config.game)?;
    let old = &population.strategies;
    let n = old.len();
    let mut next = old.clone();
    for i in 0..n {
        let j = match population.neighborhood.as_ref() {
            Neighborhood::Complete { .. } => {
                let j = rng.gen_range(0..n - 1);
                if j >= i {
                    j + 1
                } else {
                    j
                }
            }
            Neighborhood::Lists(lists) => *lists[i].choose(rng).ok_or(Error::IsolatedAgent(i))?,
        };
        let u: f64 = rng.gen();
        if old[j] != old[i] && u < config.adoption_probability(payoffs[i], payoffs[j]) {
            next[i] = old[j];
        }
        if config.noise > 0.0 && rng.gen::<f64>() < config.noise {
            next[i] = next[i].flipped();
        }
    }

    let minds = population.minds.as_ref().map(|minds| {
        minds
            .iter()
            .zip(old.iter().zip(&next))
            .map(|(mind, (&before, &after))| {
                if before == after {
                    mind.clone()
                } else {
                    mind.with_logged(Operation::Note(format!("strategy {before:?} -> {after:?}")))
                }
            })
            .collect()
    });
    Ok(Population { strategies: next, neighborhood: Arc::clone(&population.neighborhood), minds })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbmTrace {
    /// Cooperator share before round 1 and after every round.
    pub coop_fraction: Vec<f64>,
    pub outcome: Outcome,
}

/// Places exactly `round(x0 * n)` cooperators by a seeded shuffle, then runs
/// `rounds` synchronous steps.
pub fn run(config: &AbmConfig) -> Result<AbmTrace> {
    config.validate()?;
    let mut rng = stream(config.rng_seed);
    let cooperators = (config.x0 * config.n as f64).round() as usize;
    let mut population = Population::from_counts(config.n, cooperators, &config.topology)?;
    population.strategies.shuffle(&mut rng);

    let mut coop_fraction = Vec::with_capacity(config.rounds + 1);
    coop_fraction.push(population.coop_fraction());
    for _ in 0..config.rounds {
        population = step(&population, config, &mut rng)?;
        coop_fraction.push(population.coop_fraction());
    }
    let outcome = attractor_classify(*coop_fraction.last().unwrap(), config.s_c, config.s_d)?;
    Ok(AbmTrace { coop_fraction, outcome })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasinRow {
    pub x0: f64,
    pub replicates: usize,
    pub agi_first: usize,
    pub dci_first: usize,
    pub undecided: usize,
}

impl BasinRow {
    pub fn tally(x0: f64, outcomes: &[Outcome]) -> Self {
        let count = |o: Outcome| outcomes.iter().filter(|&&x| x == o).count();
        BasinRow {
            x0,
            replicates: outcomes.len(),
            agi_first: count(Outcome::AgiFirst),
            dci_first: count(Outcome::DciFirst),
            undecided: count(Outcome::Undecided),
        }
    }

    pub fn frequency(&self, outcome: Outcome) -> f64 {
        let count = match outcome {
            Outcome::AgiFirst => self.agi_first,
            Outcome::DciFirst => self.dci_first,
            Outcome::Undecided => self.undecided,
        };
        count as f64 / self.replicates as f64
    }
}

/// Outcome of every run, indexed `[k][r]` for x0 index `k` and replicate
/// `r`. Cell `(k, r)` uses the stream seed
/// `derive_seed(template.rng_seed, k * replicates + r)`.
pub fn basin_outcomes(template: &AbmConfig, x0_list: &[f64], replicates: usize) -> Result<Vec<Vec<Outcome>>> {
    if x0_list.is_empty() {
        return Err(Error::invalid("x0_list", "must not be empty"));
    }
    if replicates == 0 {
        return Err(Error::invalid("replicates", "must be >= 1"));
    }
    template.validate()?;
    let cells: Vec<(usize, usize)> =
        (0..x0_list.len()).flat_map(|k| (0..replicates).map(move |r| (k, r))).collect();
    let outcomes: Vec<Outcome> = cells
        .par_iter()
        .map(|&(k, r)| {
            let cfg = AbmConfig {
                x0: x0_list[k],
                rng_seed: derive_seed(template.rng_seed, (k * replicates + r) as u64),
                ..template.clone()
            };
            run(&cfg).map(|t| t.outcome)
        })
        .collect::<Result<_>>()?;
    Ok(outcomes.chunks(replicates).map(<[Outcome]>::to_vec).collect())
}

/// Outcome tallies from [`basin_outcomes`].
pub fn basin_experiment(template: &AbmConfig, x0_list: &[f64], replicates: usize) -> Result<Vec<BasinRow>> {
    let outcomes = basin_outcomes(template, x0_list, replicates)?;
    Ok(x0_list.iter().zip(&outcomes).map(|(&x0, cell)| BasinRow::tally(x0, cell)).collect())
}
