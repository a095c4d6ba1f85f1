use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{ConceptGraph, GraphError, GraphResult, Id, Item, ItemRef, ProblemSpec};

/// Default target fitness.
pub const DEFAULT_TARGET: f64 = 0.5;

/// Current, target and projected fitness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessTriple {
    pub f_c: f64,
    pub f_t: f64,
    pub f_p: f64,
}

impl FitnessTriple {
    pub fn new(f_c: f64, f_t: f64, f_p: f64) -> Self {
        Self { f_c, f_t, f_p }
    }
}

/// `|f_p - f_t| <= eps`.
pub fn sustainable(triple: &FitnessTriple, eps: f64) -> GraphResult<bool> {
    if !(eps > 0.0) {
        return Err(GraphError::InvalidArgument(format!("eps must be > 0, got {eps}")));
    }
    Ok((triple.f_p - triple.f_t).abs() <= eps)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvSignal {
    pub pressure: f64,
    pub affected: BTreeSet<Id>,
}

impl EnvSignal {
    pub fn new(pressure: f64, affected: impl IntoIterator<Item = Id>) -> Self {
        Self { pressure, affected: affected.into_iter().collect() }
    }
}

/// Descriptor of a transformation applied to a mind's graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Operation {
    NoOp,
    Store(Item),
    Remove(ItemRef),
    Lift(Vec<BTreeSet<Id>>),
    Project,
    Adapt(EnvSignal),
    Bridge { a: BTreeSet<Id>, b: BTreeSet<Id> },
    /// Free-form log entry; not replayable.
    Note(String),
}

/// Bounded functional of a graph used as current fitness.
pub trait FitnessFunctional {
    fn score(&self, graph: &ConceptGraph) -> f64;
}

/// Edge density of the order-1 layer, `2|E| / (|V| (|V| - 1))`; 0 below two
/// nodes.
#[derive(Debug, Clone, Copy, Default)]
pub struct ConnectivityRatio;

impl FitnessFunctional for ConnectivityRatio {
    fn score(&self, graph: &ConceptGraph) -> f64 {
        let n = graph.node_count() as f64;
        if n < 2.0 {
            0.0
        } else {
            2.0 * graph.edge_count(1) as f64 / (n * (n - 1.0))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentMind {
    graph: ConceptGraph,
    fitness: FitnessTriple,
    transform_log: Vec<Operation>,
}

impl AgentMind {
    /// Mind with empty log and fitness `(f_c, target, f_c)` under the
    /// connectivity ratio.
    pub fn new(graph: ConceptGraph, target: f64) -> Self {
        let f_c = ConnectivityRatio.score(&graph);
        Self { graph, fitness: FitnessTriple::new(f_c, target, f_c), transform_log: Vec::new() }
    }

    pub fn graph(&self) -> &ConceptGraph {
        &self.graph
    }

    pub fn fitness(&self) -> FitnessTriple {
        self.fitness
    }

    pub fn target(&self) -> f64 {
        self.fitness.f_t
    }

    pub fn transform_log(&self) -> &[Operation] {
        &self.transform_log
    }

    /// Copy with `op` appended to the log.
    pub fn with_logged(&self, op: Operation) -> Self {
        let mut m = self.clone();
        m.transform_log.push(op);
        m
    }

    fn evolved(&self, graph: ConceptGraph, op: Operation) -> Self {
        let f_c = ConnectivityRatio.score(&graph);
        let mut transform_log = self.transform_log.clone();
        transform_log.push(op);
        Self { graph, fitness: FitnessTriple::new(f_c, self.fitness.f_t, f_c), transform_log }
    }

    /// Applies a replayable operation through the reference regulator.
    pub fn apply(&self, op: &Operation) -> GraphResult<Self> {
        apply_with(&ReferenceRegulator, self, op)
    }
}

fn apply_with(reg: &impl Regulator, mind: &AgentMind, op: &Operation) -> GraphResult<AgentMind> {
    match op {
        Operation::NoOp => Ok(mind.evolved(mind.graph.clone(), Operation::NoOp)),
        Operation::Store(item) => Ok(mind.evolved(mind.graph.store(item.clone())?.0, op.clone())),
        Operation::Remove(r) => Ok(mind.evolved(mind.graph.remove(*r)?, op.clone())),
        Operation::Lift(g) => Ok(mind.evolved(mind.graph.lift(g)?, op.clone())),
        Operation::Project => Ok(mind.evolved(mind.graph.project()?, op.clone())),
        Operation::Adapt(env) => reg.adapt(mind, env),
        Operation::Bridge { a, b } => reg.bridge(mind, a, b),
        Operation::Note(text) => Err(GraphError::UnsupportedAction(text.clone())),
    }
}

/// `(f_c, f_t, f_p)` under the connectivity ratio.
pub fn fitness_eval(mind: &AgentMind, action: &Operation) -> GraphResult<FitnessTriple> {
    fitness_eval_with(mind, action, &ConnectivityRatio)
}

/// `f_c` scores the current graph, `f_t` is the mind's target and `f_p`
/// scores a scratch copy after hypothetically applying `action`.
pub fn fitness_eval_with(
    mind: &AgentMind,
    action: &Operation,
    functional: &impl FitnessFunctional,
) -> GraphResult<FitnessTriple> {
    let scratch = apply_with(&ReferenceRegulator, mind, action)?;
    Ok(FitnessTriple::new(functional.score(&mind.graph), mind.fitness.f_t, functional.score(&scratch.graph)))
}

/// The five internal regulatory functions. The provided methods are the
/// reference semantics; implementors may replace any of them.
pub trait Regulator {
    /// Negative pressure removes an order-1 edge touching the affected nodes
    /// (edges with both ends affected first, then lowest id); positive
    /// pressure joins the first pair of affected nodes, in id order, that
    /// lacks an edge. Anything else is logged as a no-op.
    fn adapt(&self, mind: &AgentMind, env: &EnvSignal) -> GraphResult<AgentMind> {
        adapt(mind, env)
    }

    fn stability(&self, mind: &AgentMind) -> f64 {
        stability_score(mind)
    }

    fn bridge(&self, mind: &AgentMind, a: &BTreeSet<Id>, b: &BTreeSet<Id>) -> GraphResult<AgentMind> {
        bridge(mind, a, b)
    }

    fn decompose(&self, graph: &ConceptGraph, problem: &ProblemSpec) -> GraphResult<Vec<ProblemSpec>> {
        graph.decompose(problem)
    }

    fn track(&self, history: &[FitnessTriple], window: usize) -> GraphResult<f64> {
        fitness_track(history, window)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ReferenceRegulator;

impl Regulator for ReferenceRegulator {}

pub fn adapt(mind: &AgentMind, env: &EnvSignal) -> GraphResult<AgentMind> {
    if !env.pressure.is_finite() {
        return Err(GraphError::InvalidArgument("pressure must be finite".into()));
    }
    if let Some(&id) = env.affected.iter().find(|&&id| !mind.graph.contains_node(id)) {
        return Err(GraphError::UnknownNode(id));
    }
    let graph = &mind.graph;
    let op = if env.pressure < 0.0 {
        let removable = |id: Id| graph.remove(ItemRef::Edge { order: 1, id }).is_ok();
        let edges: Vec<(Id, usize)> = graph
            .edges(1)?
            .map(|(id, m)| (id, m.iter().filter(|n| env.affected.contains(n)).count()))
            .filter(|&(id, touched)| touched > 0 && removable(id))
            .collect();
        let inside = edges.iter().find(|&&(_, t)| t == 2).or(edges.first());
        match inside {
            Some(&(id, _)) => Operation::Remove(ItemRef::Edge { order: 1, id }),
            None => Operation::NoOp,
        }
    } else if env.pressure > 0.0 {
        let ids: Vec<Id> = env.affected.iter().copied().collect();
        let pair = ids
            .iter()
            .enumerate()
            .flat_map(|(i, &a)| ids[i + 1..].iter().map(move |&b| (a, b)))
            .find(|&(a, b)| graph.edge_between(a, b).is_none());
        match pair {
            Some((a, b)) => Operation::Store(edge_item(graph, a, b)),
            None => Operation::NoOp,
        }
    } else {
        Operation::NoOp
    };
    apply_with(&ReferenceRegulator, mind, &op)
}

fn edge_item(graph: &ConceptGraph, a: Id, b: Id) -> Item {
    let id = graph.edges(1).ok().and_then(|mut e| e.next_back().map(|(id, _)| id + 1)).unwrap_or(0);
    Item::Edge { order: 1, id: Some(id), members: [a, b].into() }
}

/// `1 - (components - 1) / max(1, nodes - 1)`; 1 for connected graphs and
/// graphs with at most one node.
pub fn stability_score(mind: &AgentMind) -> f64 {
    let n = mind.graph.node_count();
    if n <= 1 {
        return 1.0;
    }
    let c = mind.graph.components().len();
    1.0 - (c as f64 - 1.0) / (n as f64 - 1.0)
}

/// Joins the lowest-id node of each domain unless they are already joined.
pub fn bridge(mind: &AgentMind, a: &BTreeSet<Id>, b: &BTreeSet<Id>) -> GraphResult<AgentMind> {
    let (Some(&x), Some(&y)) = (a.first(), b.first()) else {
        return Err(GraphError::EmptyDomain);
    };
    if let Some(&id) = a.intersection(b).next() {
        return Err(GraphError::Overlap(id));
    }
    if let Some(&id) = a.iter().chain(b).find(|&&id| !mind.graph.contains_node(id)) {
        return Err(GraphError::UnknownNode(id));
    }
    let op = match mind.graph.edge_between(x, y) {
        Some(_) => Operation::NoOp,
        None => Operation::Store(edge_item(&mind.graph, x, y)),
    };
    apply_with(&ReferenceRegulator, mind, &op)
}

/// Change in current fitness over the last `window` entries.
pub fn fitness_track(history: &[FitnessTriple], window: usize) -> GraphResult<f64> {
    if window < 2 {
        return Err(GraphError::InvalidArgument(format!("window must be >= 2, got {window}")));
    }
    if history.len() < window {
        return Err(GraphError::InsufficientHistory { len: history.len(), window });
    }
    let last = history.len() - 1;
    Ok(history[last].f_c - history[last + 1 - window].f_c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nodes(n: u64) -> ConceptGraph {
        let mut g = ConceptGraph::new();
        for i in 0..n {
            g = g.store(Item::Node { id: Some(i), payload: None }).unwrap().0;
        }
        g
    }

    fn with_edges(n: u64, edges: &[(u64, u64)]) -> ConceptGraph {
        edges.iter().fold(nodes(n), |g, &(a, b)| g.store(Item::edge([a, b])).unwrap().0)
    }

    #[test]
    fn fitness_eval_examples() {
        let mind = AgentMind::new(with_edges(3, &[(0, 1), (1, 2)]), 0.5);
        let t = fitness_eval(&mind, &Operation::NoOp).unwrap();
        assert_eq!(t.f_p, t.f_c);
        assert_eq!(t.f_t, 0.5);

        let empty = AgentMind::new(ConceptGraph::new(), 0.5);
        assert_eq!(fitness_eval(&empty, &Operation::NoOp).unwrap().f_c, 0.0);

        let before = mind.clone();
        let t = fitness_eval(&mind, &Operation::Store(Item::node("lonely"))).unwrap();
        // 2 edges over 3 nodes -> 2/3; over 4 nodes -> 1/3.
        assert!((t.f_c - 2.0 / 3.0).abs() < 1e-15);
        assert!((t.f_p - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(mind, before);

        assert!(matches!(
            fitness_eval(&mind, &Operation::Note("dance".into())),
            Err(GraphError::UnsupportedAction(_))
        ));
    }

    #[test]
    fn sustainability() {
        assert!(sustainable(&FitnessTriple::new(1.0, 1.0, 1.0), 0.01).unwrap());
        assert!(!sustainable(&FitnessTriple::new(1.0, 2.0, 1.0), 0.01).unwrap());
        assert!(sustainable(&FitnessTriple::new(0.0, 1.0, 1.5), 0.5).unwrap());
        assert!(sustainable(&FitnessTriple::new(0.0, 1.0, 1.0), 0.0).is_err());
    }

    #[test]
    fn adapt_examples() {
        let mind = AgentMind::new(nodes(3), 0.5);
        let grown = adapt(&mind, &EnvSignal::new(1.0, [0, 1])).unwrap();
        assert_eq!(grown.graph().edge_between(0, 1), Some(0));
        assert_eq!(grown.transform_log().len(), 1);

        let noop = adapt(&mind, &EnvSignal::new(-1.0, [2])).unwrap();
        assert!(noop.graph().structurally_eq(mind.graph()));
        assert_eq!(noop.transform_log(), &[Operation::NoOp]);

        let back = adapt(&grown, &EnvSignal::new(-1.0, [0, 1])).unwrap();
        assert_eq!(back.graph(), mind.graph());
        assert_eq!(back.transform_log().len(), 2);

        assert!(adapt(&mind, &EnvSignal::new(1.0, [9])).is_err());
    }

    #[test]
    fn adapt_removes_internal_edge_first() {
        // Edge 0 touches node 1 only; the new {1, 2} edge is internal.
        let mind = AgentMind::new(with_edges(4, &[(0, 1)]), 0.5);
        let grown = adapt(&mind, &EnvSignal::new(1.0, [1, 2])).unwrap();
        let back = adapt(&grown, &EnvSignal::new(-1.0, [1, 2])).unwrap();
        assert_eq!(back.graph(), mind.graph());
        let trimmed = adapt(&mind, &EnvSignal::new(-1.0, [1, 3])).unwrap();
        assert_eq!(trimmed.graph().edge_count(1), 0);
    }

    #[test]
    fn stability_examples() {
        let connected = AgentMind::new(with_edges(3, &[(0, 1), (1, 2)]), 0.5);
        assert_eq!(stability_score(&connected), 1.0);
        assert_eq!(stability_score(&AgentMind::new(nodes(4), 0.5)), 0.0);
        let two = AgentMind::new(with_edges(5, &[(0, 1), (1, 2), (3, 4)]), 0.5);
        assert_eq!(stability_score(&two), 0.75);
        assert_eq!(stability_score(&AgentMind::new(nodes(1), 0.5)), 1.0);
        assert_eq!(stability_score(&AgentMind::new(ConceptGraph::new(), 0.5)), 1.0);
    }

    #[test]
    fn bridge_examples() {
        let mind = AgentMind::new(nodes(3), 0.5);
        let a = BTreeSet::from([0]);
        let b = BTreeSet::from([1, 2]);
        let bridged = bridge(&mind, &a, &b).unwrap();
        assert!(bridged.graph().edge_between(0, 1).is_some());
        let again = bridge(&bridged, &a, &b).unwrap();
        assert!(again.graph().structurally_eq(bridged.graph()));
        assert_eq!(again.transform_log().last(), Some(&Operation::NoOp));
        assert_eq!(bridge(&mind, &a, &BTreeSet::from([0, 2])).unwrap_err(), GraphError::Overlap(0));
        assert_eq!(bridge(&mind, &a, &BTreeSet::new()).unwrap_err(), GraphError::EmptyDomain);
    }

    #[test]
    fn tracking() {
        let flat = vec![FitnessTriple::new(0.3, 0.5, 0.3); 4];
        assert_eq!(fitness_track(&flat, 3).unwrap(), 0.0);
        let rising: Vec<_> = [0.0, 0.5, 1.0].iter().map(|&f| FitnessTriple::new(f, 0.5, f)).collect();
        assert_eq!(fitness_track(&rising, 3).unwrap(), 1.0);
        assert_eq!(fitness_track(&rising, 4).unwrap_err(), GraphError::InsufficientHistory { len: 3, window: 4 });
        assert!(fitness_track(&rising, 1).is_err());
    }

    #[test]
    fn log_replays() {
        let start = AgentMind::new(nodes(4), 0.5);
        let m = adapt(&start, &EnvSignal::new(1.0, [0, 3])).unwrap();
        let m = bridge(&m, &BTreeSet::from([1]), &BTreeSet::from([2])).unwrap();
        let m = m.apply(&Operation::Lift(vec![BTreeSet::from([0, 1])])).unwrap();
        let replayed = m.transform_log().iter().try_fold(start.clone(), |acc, op| acc.apply(op)).unwrap();
        assert_eq!(replayed.graph(), m.graph());
    }

    #[test]
    fn custom_regulator_seam() {
        struct Frozen;
        impl Regulator for Frozen {
            fn adapt(&self, mind: &AgentMind, _env: &EnvSignal) -> GraphResult<AgentMind> {
                Ok(mind.with_logged(Operation::NoOp))
            }
        }
        let mind = AgentMind::new(nodes(2), 0.5);
        let out = Frozen.adapt(&mind, &EnvSignal::new(1.0, [0, 1])).unwrap();
        assert_eq!(out.graph(), mind.graph());
        assert_eq!(Frozen.stability(&mind), 0.0);
    }
}
