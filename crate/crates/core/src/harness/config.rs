use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::abm::{AbmConfig, GameMatrix, Topology, UpdateRule, DEFAULT_S_C, DEFAULT_S_D};
use crate::dynamics::{HysteresisOptions, OdeSpec, PayoffSpec, DEFAULT_DT, DEFAULT_GRID_N};
use crate::netgrowth::{GrowthConfig, GrowthMode, DEFAULT_TAU};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Replicator,
    Bifurcation,
    Hysteresis,
    Netgrowth,
    Abm,
    Basin,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 6] = [
        ScenarioKind::Replicator,
        ScenarioKind::Bifurcation,
        ScenarioKind::Hysteresis,
        ScenarioKind::Netgrowth,
        ScenarioKind::Abm,
        ScenarioKind::Basin,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioKind::Replicator => "replicator",
            ScenarioKind::Bifurcation => "bifurcation",
            ScenarioKind::Hysteresis => "hysteresis",
            ScenarioKind::Netgrowth => "netgrowth",
            ScenarioKind::Abm => "abm",
            ScenarioKind::Basin => "basin",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

fn default_dt() -> f64 {
    DEFAULT_DT
}
fn default_grid_n() -> usize {
    DEFAULT_GRID_N
}
fn default_relax_t() -> f64 {
    HysteresisOptions::default().relax_t
}
fn default_jump_tol() -> f64 {
    HysteresisOptions::default().jump_tol
}
fn default_relax_chunks() -> usize {
    HysteresisOptions::default().max_relax_chunks
}
fn one_f64() -> f64 {
    1.0
}
fn one_usize() -> usize {
    1
}
fn default_tau() -> f64 {
    DEFAULT_TAU
}
fn default_s_c() -> f64 {
    DEFAULT_S_C
}
fn default_s_d() -> f64 {
    DEFAULT_S_D
}
fn default_update() -> UpdateRule {
    UpdateRule::ProportionalImitation
}

/// Constant payoffs via `pc`/`pd`, or a frequency-dependent `game`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplicatorParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pc: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pd: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub game: Option<GameMatrix>,
    pub x0: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub t_end: f64,
}

impl ReplicatorParams {
    pub fn payoffs(&self) -> Result<PayoffSpec> {
        match (self.pc, self.pd, self.game) {
            (Some(p_c), Some(p_d), None) => Ok(PayoffSpec::Constant { p_c, p_d }),
            (None, None, Some(game)) => Ok(PayoffSpec::Matrix { game }),
            _ => Err(Error::invalid("payoffs", "give either both `pc` and `pd`, or `game`")),
        }
    }

    pub fn ode_spec(&self) -> Result<OdeSpec> {
        let spec = OdeSpec::replicator(self.payoffs()?, self.x0, self.dt, self.t_end);
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BifurcationParams {
    pub theta: f64,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub step: f64,
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HysteresisParams {
    pub theta: f64,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub step: f64,
    #[serde(default = "default_relax_t")]
    pub relax_t: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_jump_tol")]
    pub jump_tol: f64,
    #[serde(default = "default_relax_chunks")]
    pub max_relax_chunks: usize,
}

impl HysteresisParams {
    pub fn options(&self) -> HysteresisOptions {
        HysteresisOptions {
            relax_t: self.relax_t,
            dt: self.dt,
            jump_tol: self.jump_tol,
            max_relax_chunks: self.max_relax_chunks,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetgrowthParams {
    #[serde(default)]
    pub mode: GrowthMode,
    pub nodes: usize,
    #[serde(default = "one_usize")]
    pub m: usize,
    /// Initial nodes `[agi, dci]`.
    pub seeds: [usize; 2],
    #[serde(default = "one_f64")]
    pub dci_boost: f64,
    #[serde(default = "default_tau")]
    pub tau: f64,
    /// Write every `trace_stride`-th step (and the last) to `shares_NNNN.csv`.
    /// Unset means about 1000 rows per file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_stride: Option<usize>,
}

impl NetgrowthParams {
    pub fn growth_config(&self, rng_seed: u64) -> GrowthConfig {
        GrowthConfig {
            n_nodes: self.nodes,
            m: self.m,
            seed_agi: self.seeds[0],
            seed_dci: self.seeds[1],
            mode: self.mode,
            dci_boost: self.dci_boost,
            tau: self.tau,
            rng_seed,
        }
    }

    pub fn stride(&self) -> usize {
        self.trace_stride.unwrap_or_else(|| self.nodes.div_ceil(1000).max(1))
    }
}

/// Interaction topology as written in a config; `imported` names an edge
/// list file resolved against the working directory.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TopologySpec {
    #[default]
    WellMixed,
    RingLattice {
        k: usize,
    },
    Imported {
        path: PathBuf,
    },
}

impl TopologySpec {
    pub fn load(&self) -> Result<Topology> {
        match self {
            TopologySpec::WellMixed => Ok(Topology::WellMixed),
            TopologySpec::RingLattice { k } => Ok(Topology::RingLattice { k: *k }),
            TopologySpec::Imported { path } => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                Topology::parse_edge_list(&text)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbmParams {
    pub n: usize,
    pub x0: f64,
    pub game: GameMatrix,
    #[serde(default)]
    pub topology: TopologySpec,
    #[serde(default = "default_update")]
    pub update: UpdateRule,
    #[serde(default)]
    pub noise: f64,
    pub rounds: usize,
    #[serde(default = "one_f64")]
    pub revision_rate: f64,
    #[serde(default = "default_s_c")]
    pub s_c: f64,
    #[serde(default = "default_s_d")]
    pub s_d: f64,
}

impl AbmParams {
    pub fn abm_config(&self, topology: Topology, rng_seed: u64) -> AbmConfig {
        AbmConfig {
            n: self.n,
            x0: self.x0,
            game: self.game,
            topology,
            update: self.update,
            noise: self.noise,
            rounds: self.rounds,
            revision_rate: self.revision_rate,
            s_c: self.s_c,
            s_d: self.s_d,
            rng_seed,
        }
    }
}

/// Basin scan; `replicates` of the scenario applies to every entry of
/// `x0_list`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasinParams {
    pub x0_list: Vec<f64>,
    pub n: usize,
    pub game: GameMatrix,
    #[serde(default)]
    pub topology: TopologySpec,
    #[serde(default = "default_update")]
    pub update: UpdateRule,
    #[serde(default)]
    pub noise: f64,
    pub rounds: usize,
    #[serde(default = "one_f64")]
    pub revision_rate: f64,
    #[serde(default = "default_s_c")]
    pub s_c: f64,
    #[serde(default = "default_s_d")]
    pub s_d: f64,
}

impl BasinParams {
    pub fn template(&self, topology: Topology, rng_seed: u64) -> AbmConfig {
        AbmConfig {
            n: self.n,
            x0: self.x0_list.first().copied().unwrap_or(0.0),
            game: self.game,
            topology,
            update: self.update,
            noise: self.noise,
            rounds: self.rounds,
            revision_rate: self.revision_rate,
            s_c: self.s_c,
            s_d: self.s_d,
            rng_seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioParams {
    Replicator(ReplicatorParams),
    Bifurcation(BifurcationParams),
    Hysteresis(HysteresisParams),
    Netgrowth(NetgrowthParams),
    Abm(AbmParams),
    Basin(BasinParams),
}

impl ScenarioParams {
    pub fn kind(&self) -> ScenarioKind {
        match self {
            ScenarioParams::Replicator(_) => ScenarioKind::Replicator,
            ScenarioParams::Bifurcation(_) => ScenarioKind::Bifurcation,
            ScenarioParams::Hysteresis(_) => ScenarioKind::Hysteresis,
            ScenarioParams::Netgrowth(_) => ScenarioKind::Netgrowth,
            ScenarioParams::Abm(_) => ScenarioKind::Abm,
            ScenarioParams::Basin(_) => ScenarioKind::Basin,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub master_seed: u64,
    pub replicates: usize,
    pub output_dir: PathBuf,
    pub params: ScenarioParams,
}

pub const DEFAULT_OUTPUT_DIR: &str = "out";

fn field_error(field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::ConfigField { field: field.into(), message: message.into() }
}

/// Field named in a serde message such as "unknown field `foo`, ...".
fn field_in(message: &str) -> Option<&str> {
    let start = message.find('`')? + 1;
    let len = message[start..].find('`')?;
    Some(&message[start..start + len])
}

fn typed<T: DeserializeOwned>(params: Map<String, Value>) -> Result<T> {
    serde_json::from_value(Value::Object(params)).map_err(|e| {
        let message = e.to_string();
        let field = field_in(&message).unwrap_or("params").to_string();
        field_error(field, message)
    })
}

/// Parses and validates a scenario document.
pub fn load_config(text: &str) -> Result<ScenarioConfig> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| Error::ConfigParse { line: e.line(), column: e.column(), message: e.to_string() })?;
    let Value::Object(mut obj) = value else {
        return Err(field_error("<root>", "config must be a JSON object"));
    };

    let kind = match obj.remove("kind") {
        Some(Value::String(s)) => {
            ScenarioKind::parse(&s).ok_or_else(|| field_error("kind", format!("unknown scenario kind `{s}`")))?
        }
        Some(_) => return Err(field_error("kind", "must be a string")),
        None => return Err(field_error("kind", "missing required key")),
    };
    let master_seed = match obj.remove("master_seed") {
        Some(v) => v.as_u64().ok_or_else(|| field_error("master_seed", "must be an unsigned 64-bit integer"))?,
        None => return Err(field_error("master_seed", "missing required key")),
    };
    let replicates = match obj.remove("replicates") {
        Some(v) => v.as_u64().ok_or_else(|| field_error("replicates", "must be a non-negative integer"))? as usize,
        None => return Err(field_error("replicates", "missing required key")),
    };
    let output_dir = match obj.remove("output_dir") {
        Some(Value::String(s)) => PathBuf::from(s),
        Some(_) => return Err(field_error("output_dir", "must be a string")),
        None => PathBuf::from(DEFAULT_OUTPUT_DIR),
    };

    let params = match kind {
        ScenarioKind::Replicator => ScenarioParams::Replicator(typed(obj)?),
        ScenarioKind::Bifurcation => ScenarioParams::Bifurcation(typed(obj)?),
        ScenarioKind::Hysteresis => ScenarioParams::Hysteresis(typed(obj)?),
        ScenarioKind::Netgrowth => ScenarioParams::Netgrowth(typed(obj)?),
        ScenarioKind::Abm => ScenarioParams::Abm(typed(obj)?),
        ScenarioKind::Basin => ScenarioParams::Basin(typed(obj)?),
    };
    let config = ScenarioConfig { master_seed, replicates, output_dir, params };
    config.validate()?;
    Ok(config)
}

fn as_field_error(e: Error) -> Error {
    match e {
        Error::InvalidParameter { name, reason } => field_error(name, reason),
        other => other,
    }
}

impl ScenarioConfig {
    pub fn kind(&self) -> ScenarioKind {
        self.params.kind()
    }

    /// Checks the parameter block against the target module's preconditions.
    /// Imported topology files are read at run time, not here.
    pub fn validate(&self) -> Result<()> {
        if self.replicates < 1 {
            return Err(field_error("replicates", "must be >= 1"));
        }
        let check_finite = |name: &'static str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(field_error(name, "must be finite"))
            }
        };
        match &self.params {
            ScenarioParams::Replicator(p) => {
                p.ode_spec().map_err(as_field_error)?;
            }
            ScenarioParams::Bifurcation(p) => {
                check_finite("theta", p.theta)?;
                if !(p.lambda_lo < p.lambda_hi) {
                    return Err(field_error("lambda_hi", "must exceed lambda_lo"));
                }
                if !(p.step > 0.0) {
                    return Err(field_error("step", "must be > 0"));
                }
                if p.grid_n < 2 {
                    return Err(field_error("grid_n", "must be >= 2"));
                }
                if self.replicates != 1 {
                    return Err(field_error("replicates", "deterministic sweeps take replicates = 1"));
                }
            }
            ScenarioParams::Hysteresis(p) => {
                check_finite("theta", p.theta)?;
                if !(p.lambda_lo <= p.lambda_hi) {
                    return Err(field_error("lambda_hi", "must be >= lambda_lo"));
                }
                for (name, v) in [("step", p.step), ("relax_t", p.relax_t), ("dt", p.dt), ("jump_tol", p.jump_tol)] {
                    if !(v.is_finite() && v > 0.0) {
                        return Err(field_error(name, "must be finite and > 0"));
                    }
                }
                if self.replicates != 1 {
                    return Err(field_error("replicates", "deterministic sweeps take replicates = 1"));
                }
            }
            ScenarioParams::Netgrowth(p) => {
                p.growth_config(self.master_seed).validate().map_err(as_field_error)?;
                if p.trace_stride == Some(0) {
                    return Err(field_error("trace_stride", "must be >= 1"));
                }
            }
            ScenarioParams::Abm(p) => {
                p.abm_config(Topology::WellMixed, self.master_seed).validate().map_err(as_field_error)?;
                if let TopologySpec::RingLattice { k } = p.topology {
                    Topology::RingLattice { k }.resolve(p.n).map_err(|e| field_error("topology", e.to_string()))?;
                }
            }
            ScenarioParams::Basin(p) => {
                if p.x0_list.is_empty() {
                    return Err(field_error("x0_list", "must not be empty"));
                }
                for &x0 in &p.x0_list {
                    let cfg = AbmConfig { x0, ..p.template(Topology::WellMixed, self.master_seed) };
                    cfg.validate().map_err(as_field_error)?;
                }
                if let TopologySpec::RingLattice { k } = p.topology {
                    Topology::RingLattice { k }.resolve(p.n).map_err(|e| field_error("topology", e.to_string()))?;
                }
            }
        }
        Ok(())
    }

    pub fn to_value(&self) -> Value {
        let params = match &self.params {
            ScenarioParams::Replicator(p) => serde_json::to_value(p),
            ScenarioParams::Bifurcation(p) => serde_json::to_value(p),
            ScenarioParams::Hysteresis(p) => serde_json::to_value(p),
            ScenarioParams::Netgrowth(p) => serde_json::to_value(p),
            ScenarioParams::Abm(p) => serde_json::to_value(p),
            ScenarioParams::Basin(p) => serde_json::to_value(p),
        }
        .expect("parameter blocks serialize");
        let mut obj = Map::new();
        obj.insert("kind".into(), Value::from(self.kind().as_str()));
        obj.insert("master_seed".into(), Value::from(self.master_seed));
        obj.insert("replicates".into(), Value::from(self.replicates));
        obj.insert("output_dir".into(), Value::from(self.output_dir.to_string_lossy().into_owned()));
        if let Value::Object(p) = params {
            obj.extend(p);
        }
        Value::Object(obj)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("config serializes")
    }
}
