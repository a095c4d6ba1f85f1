use std::fs;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::abm::{self, Outcome};
use crate::dynamics::{hysteresis_loop, integrate, sweep_bifurcation, CuspFamily};
use crate::netgrowth::{self, Camp};
use crate::rng::derive_seed;
use crate::{Error, Result};

use super::config::{ScenarioConfig, ScenarioParams};
use super::output::{summary_csv, write_file, write_outputs, Trace};
use super::stats::{aggregate, MetricSummary};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: serde_json::Value,
    pub version: String,
    pub started: String,
    pub finished: String,
    /// Stream seed of every replicate, in replicate order.
    pub seeds: Vec<u64>,
    pub files: Vec<FileDigest>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutput {
    pub traces: Vec<Trace>,
    pub summary: Vec<MetricSummary>,
    pub manifest: RunManifest,
}

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SUMMARY_FILE: &str = "summary.csv";

/// Per-metric values tagged with replicate index, in first-seen order.
#[derive(Default)]
struct Metrics(Vec<(String, Vec<(usize, f64)>)>);

impl Metrics {
    fn push(&mut self, metric: &str, replicate: usize, value: f64) {
        match self.0.iter_mut().find(|(m, _)| m == metric) {
            Some((_, values)) => values.push((replicate, value)),
            None => self.0.push((metric.to_string(), vec![(replicate, value)])),
        }
    }

    fn summarize(self) -> Result<Vec<MetricSummary>> {
        self.0
            .into_iter()
            .map(|(metric, values)| Ok(MetricSummary { metric, stats: aggregate(&values)? }))
            .collect()
    }
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn seeds(master: u64, count: usize) -> Vec<u64> {
    (0..count).map(|i| derive_seed(master, i as u64)).collect()
}

fn thin(shares: &[f64], initial: f64, stride: usize) -> Vec<(usize, f64)> {
    let last = shares.len();
    std::iter::once((0, initial))
        .chain(shares.iter().enumerate().map(|(i, &s)| (i + 1, s)))
        .filter(|&(step, _)| step % stride == 0 || step == last)
        .collect()
}

fn compute(config: &ScenarioConfig) -> Result<(Vec<Trace>, Metrics, Vec<u64>)> {
    let reps = config.replicates;
    let mut metrics = Metrics::default();
    match &config.params {
        ScenarioParams::Replicator(p) => {
            let spec = p.ode_spec()?;
            let trajectory = integrate(&spec)?;
            let final_x = trajectory.final_state();
            let traces = (0..reps).map(|replicate| Trace::Trajectory { replicate, trajectory: trajectory.clone() }).collect();
            for i in 0..reps {
                metrics.push("final_x", i, final_x);
            }
            Ok((traces, metrics, seeds(config.master_seed, reps)))
        }
        ScenarioParams::Bifurcation(p) => {
            let family = CuspFamily { theta: p.theta };
            let points = sweep_bifurcation(&family, p.lambda_lo, p.lambda_hi, p.step, p.grid_n)?;
            let max_stable = points.iter().map(|pt| pt.report.stable_count()).max().unwrap_or(0);
            metrics.push("max_stable_count", 0, max_stable as f64);
            let multistable: Vec<f64> =
                points.iter().filter(|pt| pt.report.stable_count() >= 2).map(|pt| pt.lambda).collect();
            if let (Some(&lo), Some(&hi)) = (multistable.first(), multistable.last()) {
                metrics.push("multistable_lambda_lo", 0, lo);
                metrics.push("multistable_lambda_hi", 0, hi);
            }
            Ok((vec![Trace::Bifurcation(points)], metrics, seeds(config.master_seed, 1)))
        }
        ScenarioParams::Hysteresis(p) => {
            let family = CuspFamily { theta: p.theta };
            let report = hysteresis_loop(&family, p.lambda_lo, p.lambda_hi, p.step, &p.options())?;
            metrics.push("loop_area", 0, report.loop_area);
            if let Some(&l) = report.jumps_up.first() {
                metrics.push("jump_up_lambda", 0, l);
            }
            if let Some(&l) = report.jumps_down.first() {
                metrics.push("jump_down_lambda", 0, l);
            }
            Ok((vec![Trace::Hysteresis(report)], metrics, seeds(config.master_seed, 1)))
        }
        ScenarioParams::Netgrowth(p) => {
            let seed_list = seeds(config.master_seed, reps);
            let stride = p.stride();
            let initial = p.seeds[0] as f64 / (p.seeds[0] + p.seeds[1]) as f64;
            type Replicate = (Vec<(usize, f64)>, f64, Option<Camp>);
            let runs: Vec<Replicate> = seed_list
                .par_iter()
                .map(|&seed| {
                    let trace = netgrowth::grow(&p.growth_config(seed))?;
                    Ok((thin(&trace.shares, initial, stride), trace.final_share(), trace.locked_in))
                })
                .collect::<Result<_>>()?;
            let mut traces = Vec::with_capacity(reps);
            for (i, (rows, share, lock)) in runs.into_iter().enumerate() {
                metrics.push("final_agi_share", i, share);
                metrics.push("agi_lockin", i, indicator(lock == Some(Camp::Agi)));
                metrics.push("dci_lockin", i, indicator(lock == Some(Camp::Dci)));
                traces.push(Trace::Shares { replicate: i, rows });
            }
            Ok((traces, metrics, seed_list))
        }
        ScenarioParams::Abm(p) => {
            let topology = p.topology.load()?;
            let seed_list = seeds(config.master_seed, reps);
            let runs: Vec<abm::AbmTrace> = seed_list
                .par_iter()
                .map(|&seed| abm::run(&p.abm_config(topology.clone(), seed)))
                .collect::<Result<_>>()?;
            let mut traces = Vec::with_capacity(reps);
            for (i, run) in runs.into_iter().enumerate() {
                metrics.push("final_coop_fraction", i, *run.coop_fraction.last().expect("round 0 recorded"));
                metrics.push("agi_first", i, indicator(run.outcome == Outcome::AgiFirst));
                metrics.push("dci_first", i, indicator(run.outcome == Outcome::DciFirst));
                traces.push(Trace::Abm { replicate: i, coop_fraction: run.coop_fraction });
            }
            Ok((traces, metrics, seed_list))
        }
        ScenarioParams::Basin(p) => {
            let template = p.template(p.topology.load()?, config.master_seed);
            let outcomes = abm::basin_outcomes(&template, &p.x0_list, reps)?;
            for (&x0, cell) in p.x0_list.iter().zip(&outcomes) {
                for (r, &o) in cell.iter().enumerate() {
                    metrics.push(&format!("agi_first@{x0:?}"), r, indicator(o == Outcome::AgiFirst));
                    metrics.push(&format!("dci_first@{x0:?}"), r, indicator(o == Outcome::DciFirst));
                }
            }
            let rows = p.x0_list.iter().zip(&outcomes).map(|(&x0, cell)| abm::BasinRow::tally(x0, cell)).collect();
            Ok((vec![Trace::Basin(rows)], metrics, seeds(config.master_seed, p.x0_list.len() * reps)))
        }
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn timestamp() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

fn persist(dir: &Path, traces: &[Trace], summary: &[MetricSummary], written: &mut Vec<PathBuf>) -> Result<Vec<FileDigest>> {
    let mut digests = Vec::with_capacity(traces.len() + 1);
    let mut files = Vec::with_capacity(traces.len() + 1);
    for trace in traces {
        let path = write_outputs(std::slice::from_ref(trace), dir)?.remove(0);
        written.push(path.clone());
        files.push((trace.file_name(), trace.to_csv()));
    }
    let summary_text = summary_csv(summary);
    let summary_path = dir.join(SUMMARY_FILE);
    write_file(&summary_path, &summary_text)?;
    written.push(summary_path);
    files.push((SUMMARY_FILE.to_string(), summary_text));
    for (file, text) in files {
        digests.push(FileDigest { file, sha256: sha256_hex(text.as_bytes()) });
    }
    Ok(digests)
}

/// Runs `config`, writes data files and `summary.csv` into
/// `config.output_dir`, then `manifest.json`. Replicate `i` uses the stream
/// seed `derive_seed(master_seed, i)` (for basin scans, `i = k * replicates
/// + r`). On failure every file written by this call is removed.
pub fn run_scenario(config: &ScenarioConfig, options: &RunOptions) -> Result<ScenarioOutput> {
    config.validate()?;
    let started = timestamp();
    let (traces, metrics, seeds) = match options.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| Error::invalid("jobs", e.to_string()))?
            .install(|| compute(config))?,
        None => compute(config)?,
    };
    let summary = metrics.summarize()?;

    let dir = &config.output_dir;
    let existed = dir.exists();
    let mut written = Vec::new();
    let result = persist(dir, &traces, &summary, &mut written).and_then(|files| {
        let manifest = RunManifest {
            config: config.to_value(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            started,
            finished: timestamp(),
            seeds,
            files,
        };
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        write_file(&path, &text)?;
        Ok(manifest)
    });
    match result {
        Ok(manifest) => Ok(ScenarioOutput { traces, summary, manifest }),
        Err(e) => {
            for path in &written {
                let _ = fs::remove_file(path);
            }
            if !existed {
                let _ = fs::remove_dir(dir);
            }
            Err(e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::load_config;

    fn config(doc: &str, dir: &Path) -> ScenarioConfig {
        let mut c = load_config(doc).unwrap();
        c.output_dir = dir.to_path_buf();
        c
    }

    #[test]
    fn thinning_keeps_ends() {
        let rows = thin(&[0.1, 0.2, 0.3, 0.4, 0.5], 0.0, 2);
        let steps: Vec<usize> = rows.iter().map(|r| r.0).collect();
        assert_eq!(steps, vec![0, 2, 4, 5]);
    }

    #[test]
    fn replicator_single_replicate() {
        let dir = tempfile::tempdir().unwrap();
        let c = config(
            r#"{"kind":"replicator","master_seed":3,"replicates":1,"pc":2,"pd":1,"x0":0.2,"t_end":1,"dt":0.01}"#,
            dir.path(),
        );
        let out = run_scenario(&c, &RunOptions::default()).unwrap();
        assert_eq!(out.summary.len(), 1);
        assert_eq!(out.summary[0].stats.std, 0.0);
        assert_eq!(out.summary[0].stats.n, 1);
        let csv = fs::read_to_string(dir.path().join("trajectory_0000.csv")).unwrap();
        assert!(csv.starts_with("t,x\n0.0,0.2\n"));
        assert_eq!(out.manifest.seeds, vec![derive_seed(3, 0)]);
    }

    #[test]
    fn digests_match_files() {
        let dir = tempfile::tempdir().unwrap();
        let c = config(
            r#"{"kind":"netgrowth","master_seed":5,"replicates":4,"nodes":30,"seeds":[1,1],"trace_stride":7}"#,
            dir.path(),
        );
        let out = run_scenario(&c, &RunOptions { jobs: Some(2) }).unwrap();
        assert_eq!(out.manifest.files.len(), 5);
        for f in &out.manifest.files {
            let bytes = fs::read(dir.path().join(&f.file)).unwrap();
            assert_eq!(sha256_hex(&bytes), f.sha256);
        }
        let manifest: RunManifest =
            serde_json::from_str(&fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap()).unwrap();
        assert_eq!(manifest, out.manifest);
        let shares = fs::read_to_string(dir.path().join("shares_0002.csv")).unwrap();
        let steps: Vec<&str> = shares.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
        assert_eq!(steps, ["0", "7", "14", "21", "28", "30"]);
    }

    #[test]
    fn failure_removes_partial_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let out_dir = dir.path().join("run");
        let mut c = config(
            r#"{"kind":"abm","master_seed":1,"replicates":2,"n":10,"x0":0.5,"game":{"r":1,"sg":0,"t":0,"pu":1},"rounds":3}"#,
            &out_dir,
        );
        fs::create_dir_all(out_dir.join(MANIFEST_FILE)).unwrap();
        assert!(run_scenario(&c, &RunOptions::default()).is_err());
        let left: Vec<_> = fs::read_dir(&out_dir).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(left, vec![std::ffi::OsString::from(MANIFEST_FILE)]);

        c.output_dir = dir.path().join("fresh");
        c.params = match c.params {
            ScenarioParams::Abm(mut p) => {
                p.topology = super::super::TopologySpec::Imported { path: dir.path().join("missing.txt") };
                ScenarioParams::Abm(p)
            }
            other => other,
        };
        assert!(matches!(run_scenario(&c, &RunOptions::default()), Err(Error::Io { .. })));
        assert!(!c.output_dir.exists());
    }

    #[test]
    fn basin_metrics_per_start() {
        let dir = tempfile::tempdir().unwrap();
        let c = config(
            r#"{"kind":"basin","master_seed":11,"replicates":6,"x0_list":[0.1,0.9],"n":40,
                "game":{"r":1,"sg":0,"t":0,"pu":1},"rounds":40}"#,
            dir.path(),
        );
        let out = run_scenario(&c, &RunOptions::default()).unwrap();
        let names: Vec<&str> = out.summary.iter().map(|m| m.metric.as_str()).collect();
        assert_eq!(names, ["agi_first@0.1", "dci_first@0.1", "agi_first@0.9", "dci_first@0.9"]);
        assert!(out.summary.iter().all(|m| m.stats.n == 6));
        assert_eq!(out.manifest.seeds.len(), 12);
        let Trace::Basin(rows) = &out.traces[0] else { panic!() };
        assert_eq!(rows[1].agi_first as f64 / 6.0, out.summary[2].stats.mean);
    }
}
