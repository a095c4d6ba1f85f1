use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::{ConceptGraph, GraphError, GraphResult, Id};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub goal: Id,
    pub premises: BTreeSet<Id>,
    pub max_depth: usize,
}

impl ProblemSpec {
    pub fn new(goal: Id, premises: impl IntoIterator<Item = Id>, max_depth: usize) -> Self {
        Self { goal, premises: premises.into_iter().collect(), max_depth }
    }

    fn check(&self, graph: &ConceptGraph) -> GraphResult<()> {
        if self.max_depth == 0 {
            return Err(GraphError::InvalidArgument("max_depth must be >= 1".into()));
        }
        for &id in std::iter::once(&self.goal).chain(&self.premises) {
            if !graph.contains_node(id) {
                return Err(GraphError::UnknownNode(id));
            }
        }
        Ok(())
    }
}

struct Search<'a> {
    adj: &'a BTreeMap<Id, BTreeSet<Id>>,
    goal: Id,
    path: Vec<Id>,
    /// Largest remaining budget with which a node has been expanded in the
    /// current iteration.
    seen: BTreeMap<Id, usize>,
}

impl Search<'_> {
    fn dfs(&mut self, node: Id, remaining: usize) -> bool {
        if node == self.goal {
            return true;
        }
        if remaining == 0 || self.seen.get(&node).is_some_and(|&r| r >= remaining) {
            return false;
        }
        self.seen.insert(node, remaining);
        let adj = self.adj;
        for &next in &adj[&node] {
            if self.path.contains(&next) {
                continue;
            }
            self.path.push(next);
            if self.dfs(next, remaining - 1) {
                return true;
            }
            self.path.pop();
        }
        false
    }
}

impl ConceptGraph {
    /// Spreading activation from `cue` over order-1 edges: activation is
    /// `decay^d` for nodes at hop distance `d <= budget` (the best path when
    /// `decay <= 1`).
    pub fn reason_s1(&self, cue: Id, budget: usize, decay: f64) -> GraphResult<BTreeMap<Id, f64>> {
        if !self.contains_node(cue) {
            return Err(GraphError::UnknownNode(cue));
        }
        if !(decay > 0.0 && decay <= 1.0) {
            return Err(GraphError::InvalidArgument(format!("decay must lie in (0, 1], got {decay}")));
        }
        let adj = self.neighbors();
        let mut activation = BTreeMap::from([(cue, 1.0)]);
        let mut frontier = vec![cue];
        for _ in 0..budget {
            let mut next = Vec::new();
            for node in frontier {
                let a = activation[&node] * decay;
                for &nb in &adj[&node] {
                    if let std::collections::btree_map::Entry::Vacant(slot) = activation.entry(nb) {
                        slot.insert(a);
                        next.push(nb);
                    }
                }
            }
            frontier = next;
        }
        activation.retain(|_, a| *a > 0.0);
        Ok(activation)
    }

    /// Iterative-deepening search for a shortest order-1 path from any
    /// premise to the goal within `max_depth` edges. Among shortest paths the
    /// lexicographically smallest id sequence wins. A goal that is already a
    /// premise yields the empty path.
    pub fn reason_s2(&self, problem: &ProblemSpec) -> GraphResult<Option<Vec<Id>>> {
        problem.check(self)?;
        if problem.premises.contains(&problem.goal) {
            return Ok(Some(Vec::new()));
        }
        let adj = self.neighbors();
        for depth in 1..=problem.max_depth {
            let mut search = Search { adj: &adj, goal: problem.goal, path: Vec::new(), seen: BTreeMap::new() };
            for &start in &problem.premises {
                search.path.clear();
                search.path.push(start);
                if search.dfs(start, depth) {
                    return Ok(Some(search.path));
                }
            }
        }
        Ok(None)
    }

    /// Connected components of the order-1 graph, each sorted, ordered by
    /// smallest member.
    pub fn components(&self) -> Vec<BTreeSet<Id>> {
        let adj = self.neighbors();
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &start in adj.keys() {
            if !seen.insert(start) {
                continue;
            }
            let mut comp = BTreeSet::from([start]);
            let mut queue = VecDeque::from([start]);
            while let Some(n) = queue.pop_front() {
                for &m in &adj[&n] {
                    if seen.insert(m) {
                        comp.insert(m);
                        queue.push_back(m);
                    }
                }
            }
            out.push(comp);
        }
        out
    }

    /// Splits the premises by connected component; each component holding a
    /// premise becomes a sub-problem with the same goal and depth.
    pub fn decompose(&self, problem: &ProblemSpec) -> GraphResult<Vec<ProblemSpec>> {
        problem.check(self)?;
        Ok(self
            .components()
            .into_iter()
            .filter_map(|comp| {
                let premises: BTreeSet<Id> = problem.premises.intersection(&comp).copied().collect();
                (!premises.is_empty()).then(|| ProblemSpec { premises, ..problem.clone() })
            })
            .collect())
    }
}
