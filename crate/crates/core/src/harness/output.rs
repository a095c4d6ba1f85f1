use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::abm::BasinRow;
use crate::dynamics::{BifurcationPoint, HysteresisReport, Trajectory};
use crate::{Error, Result};

use super::stats::MetricSummary;

/// One serializable result. Per-replicate traces carry their replicate index,
/// which becomes the `NNNN` suffix of the file name.
#[derive(Debug, Clone, PartialEq)]
pub enum Trace {
    Trajectory { replicate: usize, trajectory: Trajectory },
    /// `(arrival step, AGI share)`; step 0 is the seed state.
    Shares { replicate: usize, rows: Vec<(usize, f64)> },
    /// Cooperator share before round 1 and after every round.
    Abm { replicate: usize, coop_fraction: Vec<f64> },
    Hysteresis(HysteresisReport),
    Bifurcation(Vec<BifurcationPoint>),
    Basin(Vec<BasinRow>),
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_real(x: f64) -> String {
    format!("{x:?}")
}

impl Trace {
    pub fn file_name(&self) -> String {
        match self {
            Trace::Trajectory { replicate, .. } => format!("trajectory_{replicate:04}.csv"),
            Trace::Shares { replicate, .. } => format!("shares_{replicate:04}.csv"),
            Trace::Abm { replicate, .. } => format!("abm_{replicate:04}.csv"),
            Trace::Hysteresis(_) => "hysteresis.csv".into(),
            Trace::Bifurcation(_) => "bifurcation.csv".into(),
            Trace::Basin(_) => "basin.csv".into(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match self {
            Trace::Trajectory { trajectory, .. } => {
                out.push_str("t,x\n");
                for (t, x) in trajectory.iter() {
                    let _ = writeln!(out, "{},{}", fmt_real(t), fmt_real(x));
                }
            }
            Trace::Shares { rows, .. } => {
                out.push_str("step,agi_share\n");
                for &(step, share) in rows {
                    let _ = writeln!(out, "{step},{}", fmt_real(share));
                }
            }
            Trace::Abm { coop_fraction, .. } => {
                out.push_str("round,coop_fraction\n");
                for (round, &x) in coop_fraction.iter().enumerate() {
                    let _ = writeln!(out, "{round},{}", fmt_real(x));
                }
            }
            Trace::Hysteresis(report) => {
                out.push_str("sweep,lambda,state\n");
                for (sweep, branch) in [("up", &report.up_branch), ("down", &report.down_branch)] {
                    for &(lambda, state) in branch {
                        let _ = writeln!(out, "{sweep},{},{}", fmt_real(lambda), fmt_real(state));
                    }
                }
            }
            Trace::Bifurcation(points) => {
                out.push_str("lambda,root,stability\n");
                for p in points {
                    for r in &p.report.roots {
                        let _ = writeln!(out, "{},{},{}", fmt_real(p.lambda), fmt_real(r.location), r.stability.as_str());
                    }
                }
            }
            Trace::Basin(rows) => {
                out.push_str("x0,replicates,agi_first,dci_first,undecided\n");
                for r in rows {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{}",
                        fmt_real(r.x0),
                        r.replicates,
                        r.agi_first,
                        r.dci_first,
                        r.undecided
                    );
                }
            }
        }
        out
    }
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes one CSV per trace into `dir` (created if missing) and returns the
/// paths in trace order.
pub fn write_outputs(traces: &[Trace], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::with_capacity(traces.len());
    for trace in traces {
        let path = dir.join(trace.file_name());
        write_file(&path, &trace.to_csv())?;
        written.push(path);
    }
    Ok(written)
}

pub fn summary_csv(summaries: &[MetricSummary]) -> String {
    let mut out = String::from("metric,mean,std,min,max,ci95,n\n");
    for m in summaries {
        let s = &m.stats;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            m.metric,
            fmt_real(s.mean),
            fmt_real(s.std),
            fmt_real(s.min),
            fmt_real(s.max),
            fmt_real(s.ci95),
            s.n
        );
    }
    out
}
