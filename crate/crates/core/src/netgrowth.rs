//! Two-camp growing network.
//!
//! Each arrival joins the AGI camp with probability
//! `k_agi / (k_agi + boost * k_dci)` and the DCI camp otherwise. In
//! [`GrowthMode::Urn`] the camp totals are node counts; in
//! [`GrowthMode::DegreePa`] they are degree sums and the arrival wires `m`
//! edges to members of its camp, each endpoint drawn proportionally to
//! degree. Edges never cross camps. Seed nodes carry one self-loop each so
//! every camp starts with positive degree.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng::{derive_seed, stream, SimRng};
use crate::{Error, Result};

pub const DEFAULT_TAU: f64 = 0.9;
/// z-score of the two-sided 95% normal interval.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Camp {
    Agi,
    Dci,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthMode {
    #[default]
    Urn,
    DegreePa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampDegrees {
    pub k_agi: u64,
    pub k_dci: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthConfig {
    pub n_nodes: usize,
    pub m: usize,
    pub seed_agi: usize,
    pub seed_dci: usize,
    pub mode: GrowthMode,
    /// Multiplier on the DCI attachment weight; 1 leaves the plain
    /// preferential rule.
    pub dci_boost: f64,
    /// Lock-in threshold on the final AGI node share.
    pub tau: f64,
    pub rng_seed: u64,
}

impl GrowthConfig {
    pub fn urn(seed_agi: usize, seed_dci: usize, n_nodes: usize, rng_seed: u64) -> Self {
        Self { n_nodes, m: 1, seed_agi, seed_dci, mode: GrowthMode::Urn, dci_boost: 1.0, tau: DEFAULT_TAU, rng_seed }
    }

    pub fn degree_pa(seed_agi: usize, seed_dci: usize, m: usize, n_nodes: usize, rng_seed: u64) -> Self {
        Self { m, mode: GrowthMode::DegreePa, ..Self::urn(seed_agi, seed_dci, n_nodes, rng_seed) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_nodes < 1 {
            return Err(Error::invalid("n_nodes", "must be >= 1"));
        }
        if self.m < 1 {
            return Err(Error::invalid("m", "must be >= 1"));
        }
        if self.seed_agi < 1 || self.seed_dci < 1 {
            return Err(Error::invalid("seeds", format!("both camps need >= 1 seed, got ({}, {})", self.seed_agi, self.seed_dci)));
        }
        if !(self.dci_boost.is_finite() && self.dci_boost >= 0.0) {
            return Err(Error::invalid("dci_boost", format!("must be finite and >= 0, got {}", self.dci_boost)));
        }
        check_tau(self.tau)
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.5 && tau <= 1.0) {
        return Err(Error::invalid("tau", format!("must lie in (0.5, 1], got {tau}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthTrace {
    /// AGI node share after each arrival.
    pub shares: Vec<f64>,
    pub final_degrees: CampDegrees,
    pub node_count: usize,
    pub locked_in: Option<Camp>,
}

impl GrowthTrace {
    pub fn final_share(&self) -> f64 {
        *self.shares.last().expect("n_nodes >= 1")
    }
}

/// Explicit graph built in degree-proportional mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub camps: Vec<Camp>,
    pub degrees: Vec<u64>,
    /// Undirected edges; seed self-loops appear as `(i, i)`.
    pub edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LockInEstimate {
    pub tau: f64,
    pub p_agi_lockin: f64,
    pub p_dci_lockin: f64,
    /// Larger of the two 95% normal-approximation halfwidths.
    pub ci_halfwidth: f64,
    pub replicates: usize,
}

/// `k_agi / (k_agi + boost * k_dci)`.
pub fn attach_probability(k: CampDegrees, dci_boost: f64) -> Result<f64> {
    let agi = k.k_agi as f64;
    let denom = agi + dci_boost * k.k_dci as f64;
    if !(denom > 0.0) {
        return Err(Error::ZeroAttachment);
    }
    Ok(agi / denom)
}

fn lock_state(share: f64, tau: f64) -> Option<Camp> {
    if share >= tau {
        Some(Camp::Agi)
    } else if share <= 1.0 - tau {
        Some(Camp::Dci)
    } else {
        None
    }
}

struct Run {
    trace: GrowthTrace,
    network: Option<Network>,
}

/// `antithetic` replaces each uniform draw `u` by `1 - u`.
fn simulate(config: &GrowthConfig, arrivals: usize, antithetic: bool, record: bool, keep_network: bool) -> Result<Run> {
    let mut rng = stream(config.rng_seed);
    let draw = |rng: &mut SimRng| {
        let u: f64 = rng.gen();
        if antithetic {
            1.0 - u
        } else {
            u
        }
    };
    let mut shares = Vec::with_capacity(if record { arrivals } else { 1 });
    let mut nodes = [config.seed_agi as u64, config.seed_dci as u64];
    let share = |n: &[u64; 2]| n[0] as f64 / (n[0] + n[1]) as f64;

    let (final_degrees, network) = match config.mode {
        GrowthMode::Urn => {
            for _ in 0..arrivals {
                let p = attach_probability(CampDegrees { k_agi: nodes[0], k_dci: nodes[1] }, config.dci_boost)?;
                nodes[if draw(&mut rng) < p { 0 } else { 1 }] += 1;
                if record {
                    shares.push(share(&nodes));
                }
            }
            (CampDegrees { k_agi: nodes[0], k_dci: nodes[1] }, None)
        }
        GrowthMode::DegreePa => {
            let seeds = config.seed_agi + config.seed_dci;
            let total = seeds + arrivals;
            let mut camps = Vec::with_capacity(total);
            let mut degrees = Vec::with_capacity(total);
            let mut edges = Vec::new();
            // Endpoint multisets: node i appears degree(i) times in its camp's list.
            let mut endpoints: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
            for i in 0..seeds {
                let c = usize::from(i >= config.seed_agi);
                camps.push(if c == 0 { Camp::Agi } else { Camp::Dci });
                degrees.push(2);
                endpoints[c].extend([i, i]);
                if keep_network {
                    edges.push((i, i));
                }
            }
            for _ in 0..arrivals {
                let k = CampDegrees { k_agi: endpoints[0].len() as u64, k_dci: endpoints[1].len() as u64 };
                let c = if draw(&mut rng) < attach_probability(k, config.dci_boost)? { 0 } else { 1 };
                let new = camps.len();
                camps.push(if c == 0 { Camp::Agi } else { Camp::Dci });
                degrees.push(config.m as u64);
                let pool = endpoints[c].len();
                for _ in 0..config.m {
                    let target = endpoints[c][rng.gen_range(0..pool)];
                    degrees[target] += 1;
                    endpoints[c].extend([target, new]);
                    if keep_network {
                        edges.push((new, target));
                    }
                }
                nodes[c] += 1;
                if record {
                    shares.push(share(&nodes));
                }
            }
            let k = CampDegrees { k_agi: endpoints[0].len() as u64, k_dci: endpoints[1].len() as u64 };
            (k, keep_network.then_some(Network { camps, degrees, edges }))
        }
    };
    if !record {
        shares.push(share(&nodes));
    }
    let final_share = share(&nodes);
    Ok(Run {
        trace: GrowthTrace {
            shares,
            final_degrees,
            node_count: (nodes[0] + nodes[1]) as usize,
            locked_in: lock_state(final_share, config.tau),
        },
        network,
    })
}

/// Grows the network for `config.n_nodes` arrivals.
pub fn grow(config: &GrowthConfig) -> Result<GrowthTrace> {
    config.validate()?;
    Ok(simulate(config, config.n_nodes, false, true, false)?.trace)
}

/// [`grow`] that also returns the explicit graph in degree-proportional
/// mode (`None` in urn mode).
pub fn grow_network(config: &GrowthConfig) -> Result<(GrowthTrace, Option<Network>)> {
    config.validate()?;
    let run = simulate(config, config.n_nodes, false, true, true)?;
    Ok((run.trace, run.network))
}

/// Configuration of replicate `i`: stream seed `derive_seed(rng_seed, i)`.
pub fn replicate_config(config: &GrowthConfig, index: usize) -> GrowthConfig {
    GrowthConfig { rng_seed: derive_seed(config.rng_seed, index as u64), ..*config }
}

/// Final AGI node shares of `replicates` independent growths, in replicate
/// order.
pub fn final_shares(config: &GrowthConfig, replicates: usize) -> Result<Vec<f64>> {
    config.validate()?;
    (0..replicates)
        .into_par_iter()
        .map(|i| Ok(simulate(&replicate_config(config, i), config.n_nodes, false, false, false)?.trace.final_share()))
        .collect()
}

/// Frequencies with which the final AGI share reaches `tau` (AGI lock-in)
/// or falls to `1 - tau` (DCI lock-in).
pub fn estimate_lockin(config: &GrowthConfig, replicates: usize, tau: f64) -> Result<LockInEstimate> {
    check_tau(tau)?;
    if replicates == 0 {
        return Err(Error::invalid("replicates", "must be >= 1"));
    }
    let shares = final_shares(config, replicates)?;
    let n = replicates as f64;
    let count = |camp| shares.iter().filter(|&&s| lock_state(s, tau) == Some(camp)).count() as f64 / n;
    let (p_agi, p_dci) = (count(Camp::Agi), count(Camp::Dci));
    let half = |p: f64| Z95 * (p * (1.0 - p) / n).sqrt();
    Ok(LockInEstimate {
        tau,
        p_agi_lockin: p_agi,
        p_dci_lockin: p_dci,
        ci_halfwidth: half(p_agi).max(half(p_dci)),
        replicates,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterventionOptions {
    /// Replicates per probed boost; rounded up to an even number because
    /// replicates run as antithetic pairs.
    pub replicates: usize,
    pub boost_lo: f64,
    pub boost_hi: f64,
    /// Bisection stops once `hi / lo <= 1 + rel_tol`.
    pub rel_tol: f64,
}

impl Default for InterventionOptions {
    fn default() -> Self {
        Self { replicates: 200, boost_lo: 1.0, boost_hi: 1024.0, rel_tol: 1e-3 }
    }
}

/// Slack on the target comparison, absorbing rounding in the mean.
const TARGET_SLACK: f64 = 1e-9;

/// Mean final DCI node share after `horizon` arrivals at the given boost.
/// Pair `j` shares stream `derive_seed(rng_seed, j)`, its second member
/// using antithetic draws; the same streams are reused for every boost.
pub fn mean_dci_share(base: &GrowthConfig, horizon: usize, boost: f64, replicates: usize) -> Result<f64> {
    let pairs = replicates.div_ceil(2).max(1);
    let config = GrowthConfig { dci_boost: boost, ..*base };
    config.validate()?;
    let shares: Vec<f64> = (0..2 * pairs)
        .into_par_iter()
        .map(|i| {
            let cfg = replicate_config(&config, i / 2);
            Ok(1.0 - simulate(&cfg, horizon, i % 2 == 1, false, false)?.trace.final_share())
        })
        .collect::<Result<_>>()?;
    Ok(shares.iter().sum::<f64>() / shares.len() as f64)
}

/// Smallest DCI boost whose mean final DCI share reaches `target`, found by
/// geometric bisection over `[1, 1024]`. Returns `f64::INFINITY` when even
/// the largest boost falls short.
pub fn intervention_cost(base: &GrowthConfig, target_dci_share: f64, horizon: usize) -> Result<f64> {
    intervention_cost_with(base, target_dci_share, horizon, &InterventionOptions::default())
}

pub fn intervention_cost_with(
    base: &GrowthConfig,
    target_dci_share: f64,
    horizon: usize,
    opts: &InterventionOptions,
) -> Result<f64> {
    base.validate()?;
    if !(target_dci_share > 0.0 && target_dci_share < 1.0) {
        return Err(Error::invalid("target_dci_share", format!("must lie in (0, 1), got {target_dci_share}")));
    }
    if horizon == 0 || horizon > base.n_nodes {
        return Err(Error::invalid("horizon", format!("must lie in [1, n_nodes = {}], got {horizon}", base.n_nodes)));
    }
    if !(opts.boost_lo > 0.0 && opts.boost_lo < opts.boost_hi && opts.rel_tol > 0.0) {
        return Err(Error::invalid("boost range", "need 0 < boost_lo < boost_hi and rel_tol > 0"));
    }
    let reaches = |boost: f64| -> Result<bool> {
        Ok(mean_dci_share(base, horizon, boost, opts.replicates)? >= target_dci_share - TARGET_SLACK)
    };
    let (mut lo, mut hi) = (opts.boost_lo, opts.boost_hi);
    if reaches(lo)? {
        return Ok(lo);
    }
    if !reaches(hi)? {
        return Ok(f64::INFINITY);
    }
    while hi / lo > 1.0 + opts.rel_tol {
        let mid = (lo * hi).sqrt();
        if reaches(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
