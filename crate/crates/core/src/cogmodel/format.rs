//! Line-oriented interchange format.
//!
//! ```text
//! order 2
//! node 0 alpha
//! node 1
//! edge 1 0 0 1
//! edge 2 0 0
//! ```
//!
//! `order` comes first so empty upper layers survive; then nodes in id
//! order, then edges by ascending order and id with members ascending.
//! Everything after `node <id> ` is the payload. Projection annotations are
//! not serialized.

use std::collections::BTreeSet;
use std::fmt::Write;

use super::{ConceptGraph, GraphError, GraphResult, Id, Item};

pub fn to_text(graph: &ConceptGraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "order {}", graph.order());
    for (id, payload) in graph.nodes() {
        match payload {
            Some(p) => {
                let _ = writeln!(out, "node {id} {p}");
            }
            None => {
                let _ = writeln!(out, "node {id}");
            }
        }
    }
    for order in 1..=graph.order() {
        for (id, members) in graph.edges(order).expect("order within range") {
            let _ = write!(out, "edge {order} {id}");
            for m in members {
                let _ = write!(out, " {m}");
            }
            out.push('\n');
        }
    }
    out
}

pub fn from_text(text: &str) -> GraphResult<ConceptGraph> {
    let mut graph: Option<ConceptGraph> = None;
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let err = |message: String| GraphError::Parse { line: lineno, message };
        if line.trim().is_empty() {
            continue;
        }
        let (keyword, rest) = line.split_once(' ').unwrap_or((line, ""));
        let num = |s: &str| s.parse::<u64>().map_err(|_| err(format!("`{s}` is not an integer")));
        match keyword {
            "order" => {
                if graph.is_some() {
                    return Err(err("`order` must appear once, first".into()));
                }
                let order = num(rest)? as usize;
                if order == 0 {
                    return Err(err("order must be >= 1".into()));
                }
                graph = Some(ConceptGraph::with_order(order));
            }
            "node" => {
                let g = graph.get_or_insert_with(ConceptGraph::new);
                let (id, payload) = match rest.split_once(' ') {
                    Some((id, p)) => (num(id)?, Some(p.to_string())),
                    None => (num(rest)?, None),
                };
                g.store_in_place(Item::Node { id: Some(id), payload }).map_err(|e| err(e.to_string()))?;
            }
            "edge" => {
                let g = graph.get_or_insert_with(ConceptGraph::new);
                let fields: Vec<u64> = rest.split(' ').map(num).collect::<GraphResult<_>>()?;
                let [order, id, members @ ..] = fields.as_slice() else {
                    return Err(err("expected `edge <order> <id> <member-id>+`".into()));
                };
                let members: BTreeSet<Id> = members.iter().copied().collect();
                g.store_in_place(Item::Edge { order: *order as usize, id: Some(*id), members })
                    .map_err(|e| err(e.to_string()))?;
            }
            other => return Err(err(format!("unknown record `{other}`"))),
        }
    }
    Ok(graph.unwrap_or_default())
}
