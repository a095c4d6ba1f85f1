use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Topology {
    WellMixed,
    /// Each agent interacts with the `k / 2` nearest agents on either side.
    RingLattice { k: usize },
    /// Simple undirected graph on agents `0..n`.
    Imported { edges: Vec<(usize, usize)> },
}

/// Resolved interaction structure for a population of fixed size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Neighborhood {
    /// Everyone interacts with everyone else.
    Complete { n: usize },
    Lists(Vec<Vec<usize>>),
}

impl Neighborhood {
    pub fn len(&self) -> usize {
        match self {
            Neighborhood::Complete { n } => *n,
            Neighborhood::Lists(l) => l.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn degree(&self, agent: usize) -> usize {
        match self {
            Neighborhood::Complete { n } => n - 1,
            Neighborhood::Lists(l) => l[agent].len(),
        }
    }
}

impl Topology {
    pub fn resolve(&self, n: usize) -> Result<Neighborhood> {
        if n < 2 {
            return Err(Error::invalid("n", format!("need at least 2 agents, got {n}")));
        }
        match self {
            Topology::WellMixed => Ok(Neighborhood::Complete { n }),
            Topology::RingLattice { k } => {
                let k = *k;
                if k < 2 || k % 2 != 0 || k >= n {
                    return Err(Error::Topology(format!("ring lattice needs even k with 2 <= k < n, got k={k}, n={n}")));
                }
                let half = k / 2;
                let lists = (0..n)
                    .map(|i| {
                        let mut nb: Vec<usize> =
                            (1..=half).flat_map(|d| [(i + n - d) % n, (i + d) % n]).collect();
                        nb.sort_unstable();
                        nb
                    })
                    .collect();
                Ok(Neighborhood::Lists(lists))
            }
            Topology::Imported { edges } => {
                validate_edges(edges)?;
                let mut lists = vec![Vec::new(); n];
                for &(u, v) in edges {
                    if u >= n || v >= n {
                        return Err(Error::Topology(format!("edge ({u}, {v}) references an agent >= n = {n}")));
                    }
                    lists[u].push(v);
                    lists[v].push(u);
                }
                lists.iter_mut().for_each(|l| l.sort_unstable());
                Ok(Neighborhood::Lists(lists))
            }
        }
    }

    /// Parses a whitespace-separated `u v` edge list, one pair per line.
    /// Blank lines and lines starting with `#` are skipped.
    pub fn parse_edge_list(text: &str) -> Result<Topology> {
        let mut edges = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parse = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| Error::Topology(format!("line {}: `{s}` is not a node id", lineno + 1)))
            };
            match fields.as_slice() {
                [u, v] => edges.push((parse(u)?, parse(v)?)),
                _ => return Err(Error::Topology(format!("line {}: expected `u v`, got `{line}`", lineno + 1))),
            }
        }
        validate_edges(&edges)?;
        Ok(Topology::Imported { edges })
    }
}

fn validate_edges(edges: &[(usize, usize)]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for &(u, v) in edges {
        if u == v {
            return Err(Error::Topology(format!("self-loop on node {u}")));
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(Error::Topology(format!("duplicate edge ({u}, {v})")));
        }
    }
    Ok(())
}
