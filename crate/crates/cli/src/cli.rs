use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

/// Seeded experiments on attractor dynamics, network lock-in and agent models.
#[derive(Debug, Parser)]
#[command(name = "attractorlab", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads for replicates (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,

    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario from a JSON config file.
    Run {
        #[arg(long, value_name = "FILE")]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Integrate the replicator equation.
    Replicator(ReplicatorArgs),
    /// Quasi-static hysteresis sweep of the cusp family.
    Hysteresis(HysteresisArgs),
    /// Fixed points of the cusp family along a lambda grid.
    Bifurcate(BifurcateArgs),
    /// Two-camp network growth.
    Netgrowth(NetgrowthArgs),
    /// Agent-based cooperation model.
    Abm(AbmArgs),
    /// Outcome frequencies over a list of initial cooperator shares.
    Basin(BasinArgs),
    /// Print a run's summary.csv as an aligned table.
    Report {
        /// Output directory of a finished run.
        dir: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// Master seed; overrides ATTRACTORLAB_SEED and the config file.
    #[arg(long = "seed", value_name = "U64")]
    pub master_seed: Option<u64>,
    #[arg(long = "output-dir", visible_alias = "out", value_name = "DIR")]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Replicates {
    #[arg(long, default_value_t = 1)]
    pub replicates: usize,
}

#[derive(Debug, Args)]
pub struct ReplicatorArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub pc: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub pd: Option<f64>,
    /// Payoff matrix as `r,sg,t,pu`.
    #[arg(long, value_name = "R,SG,T,PU", value_delimiter = ',', allow_negative_numbers = true)]
    pub game: Option<Vec<f64>>,
    #[arg(long)]
    pub x0: f64,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_end: f64,
    #[command(flatten)]
    pub replicates: Replicates,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct HysteresisArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub theta: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda_lo: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda_hi: f64,
    #[arg(long)]
    pub step: f64,
    #[arg(long)]
    pub relax_t: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub jump_tol: Option<f64>,
    #[arg(long)]
    pub max_relax_chunks: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct BifurcateArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub theta: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda_lo: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda_hi: f64,
    #[arg(long)]
    pub step: f64,
    #[arg(long)]
    pub grid_n: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct NetgrowthArgs {
    /// `urn` or `degree_pa`.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub nodes: usize,
    #[arg(long)]
    pub m: Option<usize>,
    /// Initial nodes as `agi,dci`.
    #[arg(long, value_name = "AGI,DCI", value_delimiter = ',', required = true)]
    pub seeds: Vec<usize>,
    #[arg(long)]
    pub dci_boost: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub trace_stride: Option<usize>,
    #[command(flatten)]
    pub replicates: Replicates,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct AgentArgs {
    #[arg(long)]
    pub n: usize,
    /// Payoff matrix as `r,sg,t,pu`.
    #[arg(long, value_name = "R,SG,T,PU", value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub game: Vec<f64>,
    /// `well_mixed`, `ring_lattice:K` or `imported:PATH`.
    #[arg(long)]
    pub topology: Option<String>,
    /// `proportional_imitation` or `fermi`.
    #[arg(long)]
    pub update: Option<String>,
    /// Selection intensity of the Fermi rule.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub rounds: usize,
    #[arg(long)]
    pub revision_rate: Option<f64>,
    #[arg(long)]
    pub s_c: Option<f64>,
    #[arg(long)]
    pub s_d: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AbmArgs {
    #[arg(long)]
    pub x0: f64,
    #[command(flatten)]
    pub agent: AgentArgs,
    #[command(flatten)]
    pub replicates: Replicates,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct BasinArgs {
    #[arg(long, value_name = "X0,...", value_delimiter = ',', required = true)]
    pub x0_list: Vec<f64>,
    #[command(flatten)]
    pub agent: AgentArgs,
    #[command(flatten)]
    pub replicates: Replicates,
    #[command(flatten)]
    pub common: Common,
}

/// Bad flag values caught while building the config document.
#[derive(Debug)]
pub struct UsageError(pub String);

fn put<T: Into<Value>>(obj: &mut Map<String, Value>, key: &str, value: Option<T>) {
    if let Some(v) = value {
        obj.insert(key.to_string(), v.into());
    }
}

fn game(values: &[f64]) -> Result<Value, UsageError> {
    match values {
        [r, sg, t, pu] => Ok(json!({"r": r, "sg": sg, "t": t, "pu": pu})),
        _ => Err(UsageError(format!("--game: expected 4 values r,sg,t,pu, got {}", values.len()))),
    }
}

fn topology(spec: &str) -> Result<Value, UsageError> {
    let bad = || UsageError(format!("--topology: expected well_mixed, ring_lattice:K or imported:PATH, got `{spec}`"));
    match spec.split_once(':') {
        None if spec == "well_mixed" => Ok(json!({"kind": "well_mixed"})),
        Some(("ring_lattice", k)) => Ok(json!({"kind": "ring_lattice", "k": k.parse::<usize>().map_err(|_| bad())?})),
        Some(("imported", path)) if !path.is_empty() => Ok(json!({"kind": "imported", "path": path})),
        _ => Err(bad()),
    }
}

fn update(rule: Option<&str>, beta: Option<f64>) -> Result<Option<Value>, UsageError> {
    match (rule, beta) {
        (None, None) => Ok(None),
        (Some("proportional_imitation"), None) => Ok(Some(json!({"rule": "proportional_imitation"}))),
        (Some("fermi") | None, Some(beta)) => Ok(Some(json!({"rule": "fermi", "beta": beta}))),
        (Some("fermi"), None) => Err(UsageError("--update fermi needs --beta".into())),
        (Some(other), _) => Err(UsageError(format!("--update: unknown rule `{other}`"))),
    }
}

impl AgentArgs {
    fn fill(&self, obj: &mut Map<String, Value>) -> Result<(), UsageError> {
        obj.insert("n".into(), self.n.into());
        obj.insert("game".into(), game(&self.game)?);
        obj.insert("rounds".into(), self.rounds.into());
        put(obj, "topology", self.topology.as_deref().map(topology).transpose()?);
        put(obj, "update", update(self.update.as_deref(), self.beta)?);
        put(obj, "noise", self.noise);
        put(obj, "revision_rate", self.revision_rate);
        put(obj, "s_c", self.s_c);
        put(obj, "s_d", self.s_d);
        Ok(())
    }
}

/// The config document a shortcut subcommand stands for, plus its
/// overrides. `None` for `run` and `report`.
pub fn synthesize(command: &Command) -> Result<Option<(Map<String, Value>, &Common)>, UsageError> {
    let mut obj = Map::new();
    let common = match command {
        Command::Run { .. } | Command::Report { .. } => return Ok(None),
        Command::Replicator(a) => {
            obj.insert("kind".into(), "replicator".into());
            obj.insert("replicates".into(), a.replicates.replicates.into());
            put(&mut obj, "pc", a.pc);
            put(&mut obj, "pd", a.pd);
            put(&mut obj, "game", a.game.as_deref().map(game).transpose()?);
            obj.insert("x0".into(), a.x0.into());
            put(&mut obj, "dt", a.dt);
            obj.insert("t_end".into(), a.t_end.into());
            &a.common
        }
        Command::Hysteresis(a) => {
            obj.insert("kind".into(), "hysteresis".into());
            obj.insert("replicates".into(), 1.into());
            obj.insert("theta".into(), a.theta.into());
            obj.insert("lambda_lo".into(), a.lambda_lo.into());
            obj.insert("lambda_hi".into(), a.lambda_hi.into());
            obj.insert("step".into(), a.step.into());
            put(&mut obj, "relax_t", a.relax_t);
            put(&mut obj, "dt", a.dt);
            put(&mut obj, "jump_tol", a.jump_tol);
            put(&mut obj, "max_relax_chunks", a.max_relax_chunks);
            &a.common
        }
        Command::Bifurcate(a) => {
            obj.insert("kind".into(), "bifurcation".into());
            obj.insert("replicates".into(), 1.into());
            obj.insert("theta".into(), a.theta.into());
            obj.insert("lambda_lo".into(), a.lambda_lo.into());
            obj.insert("lambda_hi".into(), a.lambda_hi.into());
            obj.insert("step".into(), a.step.into());
            put(&mut obj, "grid_n", a.grid_n);
            &a.common
        }
        Command::Netgrowth(a) => {
            obj.insert("kind".into(), "netgrowth".into());
            obj.insert("replicates".into(), a.replicates.replicates.into());
            put(&mut obj, "mode", a.mode.clone());
            obj.insert("nodes".into(), a.nodes.into());
            put(&mut obj, "m", a.m);
            if a.seeds.len() != 2 {
                return Err(UsageError(format!("--seeds: expected 2 values agi,dci, got {}", a.seeds.len())));
            }
            obj.insert("seeds".into(), json!(a.seeds));
            put(&mut obj, "dci_boost", a.dci_boost);
            put(&mut obj, "tau", a.tau);
            put(&mut obj, "trace_stride", a.trace_stride);
            &a.common
        }
        Command::Abm(a) => {
            obj.insert("kind".into(), "abm".into());
            obj.insert("replicates".into(), a.replicates.replicates.into());
            obj.insert("x0".into(), a.x0.into());
            a.agent.fill(&mut obj)?;
            &a.common
        }
        Command::Basin(a) => {
            obj.insert("kind".into(), "basin".into());
            obj.insert("replicates".into(), a.replicates.replicates.into());
            obj.insert("x0_list".into(), json!(a.x0_list));
            a.agent.fill(&mut obj)?;
            &a.common
        }
    };
    Ok(Some((obj, common)))
}
