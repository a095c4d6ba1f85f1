use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{GraphError, GraphResult};

pub type Id = u64;

/// Something that can be stored. `id: None` takes the next free id of the
/// target layer (one past the current maximum, or 0).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Item {
    Node { id: Option<Id>, payload: Option<String> },
    Edge { order: usize, id: Option<Id>, members: BTreeSet<Id> },
}

impl Item {
    pub fn node(payload: impl Into<String>) -> Self {
        Item::Node { id: None, payload: Some(payload.into()) }
    }

    pub fn edge(members: impl IntoIterator<Item = Id>) -> Self {
        Item::Edge { order: 1, id: None, members: members.into_iter().collect() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ItemRef {
    Node(Id),
    Edge { order: usize, id: Id },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecallKey {
    Item(ItemRef),
    /// Glob over node payloads: `*` matches any run, `?` one character.
    Pattern(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Recalled {
    Node { id: Id, payload: Option<String> },
    Edge { order: usize, id: Id, members: BTreeSet<Id> },
}

/// Record of a projected-away edge: which edge it was, what it grouped and
/// the concept nodes underneath.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub source_order: usize,
    pub provenance: Id,
    pub members: BTreeSet<Id>,
    pub nodes: BTreeSet<Id>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptGraph {
    nodes: BTreeMap<Id, Option<String>>,
    /// `layers[k]` holds the order-`k + 1` edges.
    layers: Vec<BTreeMap<Id, BTreeSet<Id>>>,
    annotations: Vec<Annotation>,
}

impl Default for ConceptGraph {
    fn default() -> Self {
        Self::new()
    }
}

fn next_id<V>(map: &BTreeMap<Id, V>) -> Id {
    map.keys().next_back().map_or(0, |k| k + 1)
}

impl ConceptGraph {
    /// Empty order-1 graph.
    pub fn new() -> Self {
        Self { nodes: BTreeMap::new(), layers: vec![BTreeMap::new()], annotations: Vec::new() }
    }

    /// Empty graph with layers up to `order`.
    pub fn with_order(order: usize) -> Self {
        Self { layers: vec![BTreeMap::new(); order.max(1)], ..Self::new() }
    }

    pub fn order(&self) -> usize {
        self.layers.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (Id, Option<&str>)> + '_ {
        self.nodes.iter().map(|(&id, p)| (id, p.as_deref()))
    }

    pub fn contains_node(&self, id: Id) -> bool {
        self.nodes.contains_key(&id)
    }

    /// Edges of the given order in id order.
    pub fn edges(&self, order: usize) -> GraphResult<impl DoubleEndedIterator<Item = (Id, &BTreeSet<Id>)> + '_> {
        Ok(self.layer(order)?.iter().map(|(&id, m)| (id, m)))
    }

    pub fn edge_count(&self, order: usize) -> usize {
        self.layer(order).map_or(0, |l| l.len())
    }

    pub fn annotations(&self) -> &[Annotation] {
        &self.annotations
    }

    fn layer(&self, order: usize) -> GraphResult<&BTreeMap<Id, BTreeSet<Id>>> {
        order.checked_sub(1).and_then(|k| self.layers.get(k)).ok_or(GraphError::UnknownLayer(order))
    }

    /// Nodes joined to `id` by an order-1 edge.
    pub(crate) fn neighbors(&self) -> BTreeMap<Id, BTreeSet<Id>> {
        let mut adj: BTreeMap<Id, BTreeSet<Id>> = self.nodes.keys().map(|&k| (k, BTreeSet::new())).collect();
        for members in self.layers[0].values() {
            let mut it = members.iter();
            if let (Some(&a), Some(&b)) = (it.next(), it.next()) {
                adj.entry(a).or_default().insert(b);
                adj.entry(b).or_default().insert(a);
            }
        }
        adj
    }

    /// Id of an order-1 edge joining `a` and `b`, if any.
    pub fn edge_between(&self, a: Id, b: Id) -> Option<Id> {
        let key: BTreeSet<Id> = [a, b].into_iter().collect();
        self.layers[0].iter().find(|(_, m)| **m == key).map(|(&id, _)| id)
    }

    /// Layer content equality: nodes, payloads and every edge layer.
    /// Projection annotations are ignored.
    pub fn structurally_eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.layers == other.layers
    }

    pub fn store(&self, item: Item) -> GraphResult<(ConceptGraph, ItemRef)> {
        let mut g = self.clone();
        let r = g.store_in_place(item)?;
        Ok((g, r))
    }

    pub(crate) fn store_in_place(&mut self, item: Item) -> GraphResult<ItemRef> {
        match item {
            Item::Node { id, payload } => {
                if payload.as_deref().is_some_and(|p| p.contains(['\n', '\r'])) {
                    return Err(GraphError::InvalidArgument("payloads must be single-line".into()));
                }
                let id = id.unwrap_or_else(|| next_id(&self.nodes));
                if self.nodes.contains_key(&id) {
                    return Err(GraphError::DuplicateId { layer: 0, id });
                }
                self.nodes.insert(id, payload);
                Ok(ItemRef::Node(id))
            }
            Item::Edge { order, id, members } => {
                self.layer(order)?;
                if members.is_empty() {
                    return Err(GraphError::EmptyEdge);
                }
                if order == 1 && members.len() != 2 {
                    return Err(GraphError::BadArity);
                }
                for &m in &members {
                    let exists =
                        if order == 1 { self.nodes.contains_key(&m) } else { self.layers[order - 2].contains_key(&m) };
                    if !exists {
                        return Err(GraphError::DanglingMember { order, member: m });
                    }
                }
                let layer = &mut self.layers[order - 1];
                let id = id.unwrap_or_else(|| next_id(layer));
                if layer.contains_key(&id) {
                    return Err(GraphError::DuplicateId { layer: order, id });
                }
                layer.insert(id, members);
                Ok(ItemRef::Edge { order, id })
            }
        }
    }

    /// Removes an item that nothing above references.
    pub fn remove(&self, item: ItemRef) -> GraphResult<ConceptGraph> {
        let mut g = self.clone();
        g.remove_in_place(item)?;
        Ok(g)
    }

    pub(crate) fn remove_in_place(&mut self, item: ItemRef) -> GraphResult<()> {
        match item {
            ItemRef::Node(id) => {
                if !self.nodes.contains_key(&id) {
                    return Err(GraphError::UnknownNode(id));
                }
                if self.layers[0].values().any(|m| m.contains(&id)) {
                    return Err(GraphError::InUse);
                }
                self.nodes.remove(&id);
            }
            ItemRef::Edge { order, id } => {
                if !self.layer(order)?.contains_key(&id) {
                    return Err(GraphError::UnknownEdge { order, id });
                }
                if self.layers.get(order).is_some_and(|up| up.values().any(|m| m.contains(&id))) {
                    return Err(GraphError::InUse);
                }
                self.layers[order - 1].remove(&id);
            }
        }
        Ok(())
    }

    pub fn recall(&self, key: &RecallKey) -> Vec<Recalled> {
        match key {
            RecallKey::Item(ItemRef::Node(id)) => self
                .nodes
                .get(id)
                .map(|p| Recalled::Node { id: *id, payload: p.clone() })
                .into_iter()
                .collect(),
            RecallKey::Item(ItemRef::Edge { order, id }) => self
                .layer(*order)
                .ok()
                .and_then(|l| l.get(id))
                .map(|m| Recalled::Edge { order: *order, id: *id, members: m.clone() })
                .into_iter()
                .collect(),
            RecallKey::Pattern(pat) => self
                .nodes
                .iter()
                .filter(|(_, p)| p.as_deref().is_some_and(|p| glob_match(pat, p)))
                .map(|(&id, p)| Recalled::Node { id, payload: p.clone() })
                .collect(),
        }
    }

    /// Adds a layer of order `order() + 1` whose edges are exactly the given
    /// groups of current top-layer edge ids (ids assigned `0, 1, ...`).
    pub fn lift(&self, grouping: &[BTreeSet<Id>]) -> GraphResult<ConceptGraph> {
        let top_order = self.order();
        let top = &self.layers[top_order - 1];
        for group in grouping {
            if group.is_empty() {
                return Err(GraphError::EmptyGroup);
            }
            if let Some(&id) = group.iter().find(|id| !top.contains_key(id)) {
                return Err(GraphError::UnknownEdge { order: top_order, id });
            }
        }
        let mut g = self.clone();
        g.layers.push(grouping.iter().cloned().enumerate().map(|(i, m)| (i as Id, m)).collect());
        Ok(g)
    }

    /// Each top-layer edge as its own group.
    pub fn singleton_grouping(&self) -> Vec<BTreeSet<Id>> {
        self.layers[self.order() - 1].keys().map(|&id| BTreeSet::from([id])).collect()
    }

    /// Concept nodes underneath the given edges of `order`.
    pub fn underlying_nodes(&self, order: usize, ids: &BTreeSet<Id>) -> GraphResult<BTreeSet<Id>> {
        let layer = self.layer(order)?;
        let mut out = BTreeSet::new();
        for id in ids {
            let members = layer.get(id).ok_or(GraphError::UnknownEdge { order, id: *id })?;
            if order == 1 {
                out.extend(members.iter().copied());
            } else {
                out.extend(self.underlying_nodes(order - 1, members)?);
            }
        }
        Ok(out)
    }

    /// Drops the top layer, recording each of its edges as a clique
    /// annotation over the concept nodes it spans.
    pub fn project(&self) -> GraphResult<ConceptGraph> {
        let order = self.order();
        if order < 2 {
            return Err(GraphError::OrderTooLow);
        }
        let mut g = self.clone();
        let top = g.layers.pop().expect("order >= 2");
        for (id, members) in top {
            let nodes = self.underlying_nodes(order - 1, &members)?;
            g.annotations.push(Annotation { source_order: order, provenance: id, members, nodes });
        }
        Ok(g)
    }

    /// Full-graph soundness check.
    pub fn validate(&self) -> GraphResult<()> {
        if self.layers.is_empty() {
            return Err(GraphError::UnknownLayer(1));
        }
        for (k, layer) in self.layers.iter().enumerate() {
            let order = k + 1;
            for members in layer.values() {
                if members.is_empty() {
                    return Err(GraphError::EmptyEdge);
                }
                if order == 1 && members.len() != 2 {
                    return Err(GraphError::BadArity);
                }
                for m in members {
                    let ok = if order == 1 { self.nodes.contains_key(m) } else { self.layers[k - 1].contains_key(m) };
                    if !ok {
                        return Err(GraphError::DanglingMember { order, member: *m });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Glob match with `*` (any run) and `?` (any one character).
pub fn glob_match(pattern: &str, text: &str) -> bool {
    let p: Vec<char> = pattern.chars().collect();
    let t: Vec<char> = text.chars().collect();
    let (mut pi, mut ti) = (0, 0);
    let mut star: Option<(usize, usize)> = None;
    while ti < t.len() {
        if pi < p.len() && (p[pi] == '?' || p[pi] == t[ti]) {
            pi += 1;
            ti += 1;
        } else if pi < p.len() && p[pi] == '*' {
            star = Some((pi, ti));
            pi += 1;
        } else if let Some((sp, st)) = star {
            pi = sp + 1;
            ti = st + 1;
            star = Some((sp, st + 1));
        } else {
            return false;
        }
    }
    p[pi..].iter().all(|&c| c == '*')
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_abc() -> (ConceptGraph, [Id; 3], [Id; 2]) {
        let g = ConceptGraph::new();
        let (g, _) = g.store(Item::node("a")).unwrap();
        let (g, _) = g.store(Item::node("b")).unwrap();
        let (g, _) = g.store(Item::node("c")).unwrap();
        let (g, ab) = g.store(Item::edge([0, 1])).unwrap();
        let (g, bc) = g.store(Item::edge([1, 2])).unwrap();
        let ids = |r| match r {
            ItemRef::Edge { id, .. } => id,
            ItemRef::Node(id) => id,
        };
        (g, [0, 1, 2], [ids(ab), ids(bc)])
    }

    #[test]
    fn store_into_empty() {
        let (g, r) = ConceptGraph::new().store(Item::node("a")).unwrap();
        assert_eq!(r, ItemRef::Node(0));
        assert_eq!(g.nodes().collect::<Vec<_>>(), vec![(0, Some("a"))]);
    }

    #[test]
    fn dangling_and_duplicates() {
        let (g, _) = ConceptGraph::new().store(Item::node("a")).unwrap();
        assert_eq!(g.store(Item::edge([0, 1])).unwrap_err(), GraphError::DanglingMember { order: 1, member: 1 });
        assert_eq!(
            g.store(Item::Node { id: Some(0), payload: None }).unwrap_err(),
            GraphError::DuplicateId { layer: 0, id: 0 }
        );
        assert_eq!(g.store(Item::edge([0])).unwrap_err(), GraphError::BadArity);
        assert_eq!(g.store(Item::edge([])).unwrap_err(), GraphError::EmptyEdge);
        assert_eq!(
            g.store(Item::Edge { order: 2, id: None, members: [0].into() }).unwrap_err(),
            GraphError::UnknownLayer(2)
        );
        assert!(g.store(Item::node("x\ny")).is_err());
    }

    #[test]
    fn store_remove_round_trip() {
        let (g, ..) = path_abc();
        for item in [Item::node("d"), Item::edge([0, 2]), Item::Node { id: Some(40), payload: None }] {
            let (g2, r) = g.store(item).unwrap();
            assert_ne!(g2, g);
            assert_eq!(g2.remove(r).unwrap(), g);
        }
    }

    #[test]
    fn remove_guards() {
        let (g, ..) = path_abc();
        assert_eq!(g.remove(ItemRef::Node(1)).unwrap_err(), GraphError::InUse);
        assert_eq!(g.remove(ItemRef::Node(9)).unwrap_err(), GraphError::UnknownNode(9));
        let lifted = g.lift(&[BTreeSet::from([0, 1])]).unwrap();
        assert_eq!(lifted.remove(ItemRef::Edge { order: 1, id: 0 }).unwrap_err(), GraphError::InUse);
    }

    #[test]
    fn recall_lookup() {
        let (g, ..) = path_abc();
        let (g2, r) = g.store(Item::node("zeta")).unwrap();
        assert_eq!(g2.recall(&RecallKey::Item(r)), vec![Recalled::Node { id: 3, payload: Some("zeta".into()) }]);
        assert!(ConceptGraph::new().recall(&RecallKey::Item(ItemRef::Node(0))).is_empty());
        assert!(ConceptGraph::new().recall(&RecallKey::Pattern("*".into())).is_empty());
        assert_eq!(
            g.recall(&RecallKey::Item(ItemRef::Edge { order: 1, id: 1 })),
            vec![Recalled::Edge { order: 1, id: 1, members: [1, 2].into() }]
        );

        let mut h = ConceptGraph::new();
        for p in ["ant", "bat", "axe"] {
            h = h.store(Item::node(p)).unwrap().0;
        }
        let hits: Vec<_> = h
            .recall(&RecallKey::Pattern("a*".into()))
            .into_iter()
            .map(|r| match r {
                Recalled::Node { payload, .. } => payload.unwrap(),
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(hits, vec!["ant", "axe"]);
    }

    #[test]
    fn globbing() {
        assert!(glob_match("a*", "a"));
        assert!(glob_match("*t", "bat"));
        assert!(glob_match("b?t", "bat"));
        assert!(glob_match("a*e*", "axe"));
        assert!(!glob_match("a?", "a"));
        assert!(!glob_match("b*", "ant"));
        assert!(glob_match("", ""));
        assert!(!glob_match("", "x"));
    }

    #[test]
    fn lift_variants() {
        let (g, _, [ab, bc]) = path_abc();
        let single = g.lift(&g.singleton_grouping()).unwrap();
        assert_eq!(single.order(), 2);
        assert_eq!(single.edge_count(2), 2);
        let pair = g.lift(&[BTreeSet::from([ab, bc])]).unwrap();
        assert_eq!(pair.edges(2).unwrap().next().unwrap().1.len(), 2);
        let empty = g.lift(&[]).unwrap();
        assert_eq!(empty.order(), 2);
        assert_eq!(empty.edge_count(2), 0);
        assert_eq!(g.lift(&[BTreeSet::new()]).unwrap_err(), GraphError::EmptyGroup);
        assert_eq!(g.lift(&[BTreeSet::from([7])]).unwrap_err(), GraphError::UnknownEdge { order: 1, id: 7 });
    }

    #[test]
    fn project_records_cliques() {
        let (g, _, [ab, bc]) = path_abc();
        let lifted = g.lift(&[BTreeSet::from([ab, bc])]).unwrap();
        let back = lifted.project().unwrap();
        assert!(back.structurally_eq(&g));
        assert_eq!(
            back.annotations(),
            &[Annotation { source_order: 2, provenance: 0, members: [ab, bc].into(), nodes: [0, 1, 2].into() }]
        );
        assert_eq!(g.project().unwrap_err(), GraphError::OrderTooLow);
    }

    #[test]
    fn double_lift_double_project() {
        let (g, ..) = path_abc();
        let l2 = g.lift(&g.singleton_grouping()).unwrap();
        let l3 = l2.lift(&[BTreeSet::from([0, 1])]).unwrap();
        l3.validate().unwrap();
        let p = l3.project().unwrap().project().unwrap();
        assert!(p.structurally_eq(&g));
        assert_eq!(p.annotations()[0].nodes, BTreeSet::from([0, 1, 2]));
    }
}
