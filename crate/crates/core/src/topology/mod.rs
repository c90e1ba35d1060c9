//! Meaning from shape.
//!
//! Nothing in a [`Model`] says whether a node is a class or an activity. This
//! module reads it off the arcs: a node with only outgoing arcs starts a
//! process, one with only incoming arcs ends it, one with both is an
//! activity, and a node without arcs is an object (or a class, when one of its
//! circles takes part in an association). Processes are the weakly connected
//! components of the arc graph.

mod view;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

pub use view::{project, ViewFilter, ViewKind, ViewModel};

use crate::model::{ArcId, CircleId, IdentityId, Model, ModelError, NodeId, RelationId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Start,
    Final,
    Activity,
    Dot,
    Object,
    Class,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Start => "start",
            NodeKind::Final => "final",
            NodeKind::Activity => "activity",
            NodeKind::Dot => "dot",
            NodeKind::Object => "object",
            NodeKind::Class => "class",
        }
    }

    /// Kinds that belong to the process side of the model.
    pub fn is_process_side(self) -> bool {
        matches!(
            self,
            NodeKind::Start | NodeKind::Final | NodeKind::Activity | NodeKind::Dot
        )
    }
}

/// Identifier of a process: the smallest node id among its members.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct ProcessId(pub u64);

impl std::fmt::Display for ProcessId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub kinds: BTreeMap<NodeId, NodeKind>,
    pub in_process: BTreeMap<NodeId, ProcessId>,
}

impl Classification {
    pub fn kind(&self, node: NodeId) -> Option<NodeKind> {
        self.kinds.get(&node).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProcessGraph {
    pub id: ProcessId,
    pub members: BTreeSet<NodeId>,
    pub arcs: Vec<ArcId>,
    pub starts: Vec<NodeId>,
    pub finals: Vec<NodeId>,
    /// Container node the process is drawn in, if its members declare one.
    pub enclosing: Option<NodeId>,
    pub root_pilot: Option<IdentityId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("arc {arc} is bound to more than one circle ({})", .bindings.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(", "))]
pub struct FlowConflict {
    pub arc: ArcId,
    pub bindings: Vec<RelationId>,
}

fn owns_association(model: &Model, node: NodeId) -> bool {
    let Ok(n) = model.node(node) else {
        return false;
    };
    model
        .associations()
        .any(|(_, a, b)| n.circles.contains(&a) || n.circles.contains(&b))
}

/// Classify every node by the arcs around it.
pub fn classify(model: &Model) -> Classification {
    let mut has_in = BTreeSet::new();
    let mut has_out = BTreeSet::new();
    for arc in model.arcs() {
        has_out.insert(arc.from);
        has_in.insert(arc.to);
    }
    let mut kinds = BTreeMap::new();
    for node in model.nodes() {
        let kind = if node.is_dot() {
            NodeKind::Dot
        } else {
            match (has_in.contains(&node.id), has_out.contains(&node.id)) {
                (false, true) => NodeKind::Start,
                (true, false) => NodeKind::Final,
                (true, true) => NodeKind::Activity,
                (false, false) if owns_association(model, node.id) => NodeKind::Class,
                (false, false) => NodeKind::Object,
            }
        };
        kinds.insert(node.id, kind);
    }
    let mut in_process = BTreeMap::new();
    for process in processes(model) {
        for m in &process.members {
            in_process.insert(*m, process.id);
        }
        for a in &process.arcs {
            for d in &model.arc(*a).expect("process arc").dots {
                in_process.insert(*d, process.id);
            }
        }
    }
    Classification { kinds, in_process }
}

struct UnionFind {
    parent: BTreeMap<NodeId, NodeId>,
}

impl UnionFind {
    fn find(&mut self, x: NodeId) -> NodeId {
        let p = *self.parent.entry(x).or_insert(x);
        if p == x {
            return x;
        }
        let root = self.find(p);
        self.parent.insert(x, root);
        root
    }

    fn union(&mut self, a: NodeId, b: NodeId) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            // Keep the smaller id as representative.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent.insert(hi, lo);
        }
    }
}

/// Weakly connected components of the arc graph, ordered by id.
pub fn processes(model: &Model) -> Vec<ProcessGraph> {
    let mut uf = UnionFind {
        parent: BTreeMap::new(),
    };
    for arc in model.arcs() {
        uf.union(arc.from, arc.to);
    }
    let nodes: Vec<NodeId> = uf.parent.keys().copied().collect();
    let mut groups: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
    for n in nodes {
        let root = uf.find(n);
        groups.entry(root).or_default().insert(n);
    }
    let mut out = Vec::with_capacity(groups.len());
    for (root, members) in groups {
        let arcs: Vec<ArcId> = model
            .arcs()
            .filter(|a| members.contains(&a.from))
            .map(|a| a.id)
            .collect();
        let starts = members
            .iter()
            .copied()
            .filter(|n| model.arcs_into(*n).next().is_none())
            .collect();
        let finals = members
            .iter()
            .copied()
            .filter(|n| model.arcs_from(*n).next().is_none())
            .collect();
        let enclosing = members
            .iter()
            .find_map(|n| model.node(*n).ok().and_then(|node| node.frame));
        let root_pilot = root_pilot_of(model, enclosing, &members).map(|(p, _)| p);
        out.push(ProcessGraph {
            id: ProcessId(root.0),
            members,
            arcs,
            starts,
            finals,
            enclosing,
            root_pilot,
        });
    }
    out
}

fn root_pilot_of(
    model: &Model,
    enclosing: Option<NodeId>,
    members: &BTreeSet<NodeId>,
) -> Option<(IdentityId, NodeId)> {
    let roots: Vec<(IdentityId, NodeId)> = model
        .pilots()
        .filter(|&(_, _, _, root)| root)
        .map(|(_, p, t, _)| (p, t))
        .collect();
    if let Some(frame) = enclosing {
        if let Some(found) = roots.iter().find(|(_, t)| *t == frame) {
            return Some(*found);
        }
    }
    roots.into_iter().find(|(_, t)| members.contains(t))
}

/// The process containing `node`, if any.
pub fn process_of(model: &Model, node: NodeId) -> Option<ProcessGraph> {
    processes(model)
        .into_iter()
        .find(|p| p.members.contains(&node))
}

/// Root pilot of the process around `node`, with the node its relation targets.
pub fn process_root(model: &Model, node: NodeId) -> Option<(IdentityId, NodeId)> {
    let process = process_of(model, node)?;
    root_pilot_of(model, process.enclosing, &process.members)
}

/// Map each bound arc to the circle its tokens come from.
pub fn resolve_flows(model: &Model) -> Result<BTreeMap<ArcId, CircleId>, FlowConflict> {
    let mut by_arc: BTreeMap<ArcId, Vec<(RelationId, CircleId)>> = BTreeMap::new();
    for (rel, circle, arc) in model.flow_bindings() {
        by_arc.entry(arc).or_default().push((rel, circle));
    }
    let mut out = BTreeMap::new();
    for (arc, bindings) in by_arc {
        if bindings.len() > 1 {
            return Err(FlowConflict {
                arc,
                bindings: bindings.into_iter().map(|(r, _)| r).collect(),
            });
        }
        out.insert(arc, bindings[0].1);
    }
    Ok(out)
}

/// Who answers for `node`: its own pilot, else the root pilot of its process.
pub fn responsible_pilot(model: &Model, node: NodeId) -> Result<Option<IdentityId>, ModelError> {
    model.node(node)?;
    if let Some((_, pilot, ..)) = model.pilots().find(|&(_, _, t, _)| t == node) {
        return Ok(Some(pilot));
    }
    Ok(process_root(model, node).map(|(p, _)| p))
}

#[cfg(test)]
mod tests;
