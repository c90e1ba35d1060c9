//! Model checks that follow the object/process integration method.
//!
//! | rule     | severity | checks                                                   |
//! |----------|----------|----------------------------------------------------------|
//! | L1       | error    | every process has a start and a final node               |
//! | L2       | error    | every process has a token source; no arc bound twice     |
//! | L3       | warning  | bound circles belong to a class with static attributes   |
//! | L4       | warning  | shared memberships use a rounded dot, destruction a gate |
//! | L5       | warning  | every activity touches some data                         |
//! | L6       | warning  | every pilot has a service                                |
//! | W-branch | warning  | branching activities decide with `ROUTE`                 |
//!
//! A flow binding counts as a token source for L2 unless its circle belongs
//! to a node of another process: such circles carry that process's output in
//! as an input, the way published directives feed an evaluation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::model::{ArcId, CircleId, DotKind, Model, NodeId};
use crate::pilots::{effective_service, service_of, Instruction};
use crate::topology::{classify, processes, NodeKind, ProcessGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Rule {
    L1,
    L2,
    L3,
    L4,
    L5,
    L6,
    #[serde(rename = "W-branch")]
    WBranch,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::L1 => "L1",
            Rule::L2 => "L2",
            Rule::L3 => "L3",
            Rule::L4 => "L4",
            Rule::L5 => "L5",
            Rule::L6 => "L6",
            Rule::WBranch => "W-branch",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            Rule::L1 | Rule::L2 => Severity::Error,
            _ => Severity::Warning,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
    Info,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
            Severity::Info => "info",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub rule: Rule,
    pub severity: Severity,
    /// Ids of the elements concerned, the primary subject first.
    pub subjects: Vec<u64>,
    pub message: String,
}

impl Finding {
    fn new(rule: Rule, subjects: Vec<u64>, message: String) -> Self {
        Finding {
            rule,
            severity: rule.severity(),
            subjects,
            message,
        }
    }

    pub fn subject(&self) -> u64 {
        self.subjects.first().copied().unwrap_or(0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("findings always serialize")
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<8} {:<7} {:>5}  {}",
            self.rule.as_str(),
            self.severity.as_str(),
            self.subject(),
            self.message
        )
    }
}

pub fn has_errors(findings: &[Finding]) -> bool {
    findings.iter().any(|f| f.severity == Severity::Error)
}

/// Findings as a fixed-width table with a header line.
pub fn render_table(findings: &[Finding]) -> String {
    let mut out = format!("{:<8} {:<7} {:>5}  {}\n", "RULE", "LEVEL", "ID", "MESSAGE");
    for f in findings {
        out.push_str(&f.to_string());
        out.push('\n');
    }
    out
}

struct Ctx<'a> {
    model: &'a Model,
    procs: Vec<ProcessGraph>,
    member_of: BTreeMap<NodeId, usize>,
    kinds: BTreeMap<NodeId, NodeKind>,
}

impl Ctx<'_> {
    fn name(&self, node: NodeId) -> &str {
        self.model
            .node(node)
            .map(|n| n.name.as_str())
            .unwrap_or("?")
    }

    fn circle_name(&self, circle: CircleId) -> String {
        match self.model.circle(circle) {
            Ok(c) => format!("{}/{}", self.name(c.owner), c.name),
            Err(_) => "?".into(),
        }
    }

    fn owner(&self, circle: CircleId) -> NodeId {
        self.model.circle(circle).expect("circle").owner
    }

    fn process_of_arc(&self, arc: ArcId) -> Option<usize> {
        let a = self.model.arc(arc).ok()?;
        self.member_of.get(&a.from).copied()
    }

    fn has_dot(&self, arc: ArcId, kind: DotKind) -> bool {
        self.model.arc(arc).is_ok_and(|a| {
            a.dots
                .iter()
                .any(|d| self.model.node(*d).is_ok_and(|n| n.dot_kind == Some(kind)))
        })
    }

    /// Circles associated with `circle`.
    fn partners(&self, circle: CircleId) -> impl Iterator<Item = CircleId> + '_ {
        self.model.associations().filter_map(move |(_, a, b)| {
            if a == circle {
                Some(b)
            } else if b == circle {
                Some(a)
            } else {
                None
            }
        })
    }

    /// Memberships at `source` and `target` are meant to coexist: some
    /// association joins one of `source`'s circles to one of `target`'s.
    fn linked_owners(&self, source: NodeId, target: NodeId) -> bool {
        let (Ok(s), Ok(t)) = (self.model.node(source), self.model.node(target)) else {
            return false;
        };
        self.model.associations().any(|(_, a, b)| {
            (s.circles.contains(&a) && t.circles.contains(&b))
                || (s.circles.contains(&b) && t.circles.contains(&a))
        })
    }
}

/// Run every rule. Findings are ordered by rule, then subject id.
pub fn lint(model: &Model) -> Vec<Finding> {
    let procs = processes(model);
    let mut member_of = BTreeMap::new();
    for (i, p) in procs.iter().enumerate() {
        for m in &p.members {
            member_of.insert(*m, i);
        }
    }
    let cx = Ctx {
        model,
        procs,
        member_of,
        kinds: classify(model).kinds,
    };
    let mut out = Vec::new();
    l1(&cx, &mut out);
    l2(&cx, &mut out);
    l3(&cx, &mut out);
    l4(&cx, &mut out);
    l5(&cx, &mut out);
    l6(&cx, &mut out);
    w_branch(&cx, &mut out);
    out.sort_by(|a, b| (a.rule, &a.subjects).cmp(&(b.rule, &b.subjects)));
    out
}

fn l1(cx: &Ctx, out: &mut Vec<Finding>) {
    for p in &cx.procs {
        let first = cx.name(*p.members.first().expect("non-empty"));
        if p.starts.is_empty() {
            out.push(Finding::new(
                Rule::L1,
                vec![p.id.0],
                format!("process at {first:?} has no start node (every node has an incoming arc)"),
            ));
        }
        if p.finals.is_empty() {
            out.push(Finding::new(
                Rule::L1,
                vec![p.id.0],
                format!("process at {first:?} has no final node (every node has an outgoing arc)"),
            ));
        }
    }
}

fn l2(cx: &Ctx, out: &mut Vec<Finding>) {
    let mut per_arc: BTreeMap<ArcId, Vec<u64>> = BTreeMap::new();
    let mut sources: BTreeSet<usize> = BTreeSet::new();
    for (rel, circle, arc) in cx.model.flow_bindings() {
        per_arc.entry(arc).or_default().push(rel.0);
        let Some(p) = cx.process_of_arc(arc) else {
            continue;
        };
        let owner_process = cx.member_of.get(&cx.owner(circle)).copied();
        if owner_process.is_none_or(|o| o == p) {
            sources.insert(p);
        }
    }
    for (i, p) in cx.procs.iter().enumerate() {
        if !sources.contains(&i) {
            let first = cx.name(*p.members.first().expect("non-empty"));
            out.push(Finding::new(
                Rule::L2,
                vec![p.id.0],
                format!("process at {first:?} has no flow binding that supplies its tokens"),
            ));
        }
    }
    for (arc, rels) in per_arc {
        if rels.len() > 1 {
            let mut subjects = vec![arc.0];
            subjects.extend(&rels);
            out.push(Finding::new(
                Rule::L2,
                subjects,
                format!(
                    "arc {arc} is bound to {} circles; its token source is ambiguous",
                    rels.len()
                ),
            ));
        }
    }
}

fn l3(cx: &Ctx, out: &mut Vec<Finding>) {
    let mut seen = BTreeSet::new();
    for (rel, circle, _) in cx.model.flow_bindings() {
        if !seen.insert(circle) {
            continue;
        }
        let defines = |c: CircleId| {
            cx.model
                .node(cx.owner(c))
                .is_ok_and(|n| !n.attributes.is_empty())
        };
        if defines(circle) || cx.partners(circle).any(defines) {
            continue;
        }
        out.push(Finding::new(
            Rule::L3,
            vec![circle.0, rel.0],
            format!(
                "token source {} has no class defining static attributes",
                cx.circle_name(circle)
            ),
        ));
    }
}

fn l4(cx: &Ctx, out: &mut Vec<Finding>) {
    let mut bound_arcs: BTreeMap<CircleId, BTreeSet<ArcId>> = BTreeMap::new();
    for (_, circle, arc) in cx.model.flow_bindings() {
        bound_arcs.entry(circle).or_default().insert(arc);
    }
    let mut flagged = BTreeSet::new();
    for (rel, circle, arc) in cx.model.flow_bindings() {
        let a = cx.model.arc(arc).expect("bound arc");
        let owner = cx.owner(circle);
        let shared = bound_arcs[&circle].len() > 1 || cx.linked_owners(owner, a.to);
        if shared && !cx.has_dot(arc, DotKind::Duplicate) {
            flagged.insert(arc);
            out.push(Finding::new(
                Rule::L4,
                vec![arc.0, rel.0],
                format!(
                    "members of {} keep their place while entering {:?}; the entry arc needs a rounded dot",
                    cx.circle_name(circle),
                    cx.name(a.to)
                ),
            ));
        }
    }
    for a in cx.model.arcs() {
        if flagged.contains(&a.id) || cx.has_dot(a.id, DotKind::Duplicate) {
            continue;
        }
        if cx.linked_owners(a.from, a.to) {
            out.push(Finding::new(
                Rule::L4,
                vec![a.id.0],
                format!(
                    "{:?} and {:?} are not exclusive; the arc needs a rounded dot",
                    cx.name(a.from),
                    cx.name(a.to)
                ),
            ));
        }
    }
    for (node, kind) in &cx.kinds {
        if !kind.is_process_side() || *kind == NodeKind::Dot {
            continue;
        }
        let Some(service) = effective_service(cx.model, *node) else {
            continue;
        };
        if service.instructions.contains(&Instruction::Destroy) {
            out.push(Finding::new(
                Rule::L4,
                vec![node.0, service.id.0],
                format!(
                    "{:?} ends token identities with DESTROY; mark the loss of identity with a gate",
                    cx.name(*node)
                ),
            ));
        }
    }
}

fn l5(cx: &Ctx, out: &mut Vec<Finding>) {
    let bound: BTreeSet<ArcId> = cx.model.flow_bindings().map(|(_, _, a)| a).collect();
    for (node, kind) in &cx.kinds {
        if *kind != NodeKind::Activity {
            continue;
        }
        let n = cx.model.node(*node).expect("classified node");
        let owns_associated = n.circles.iter().any(|c| cx.partners(*c).next().is_some());
        let incident: Vec<ArcId> = cx
            .model
            .arcs_from(*node)
            .chain(cx.model.arcs_into(*node))
            .map(|a| a.id)
            .collect();
        let bound_flow = incident.iter().any(|a| bound.contains(a));
        let labelled = incident.iter().any(|a| {
            cx.model.arc(*a).is_ok_and(|arc| {
                arc.dots.iter().any(|d| {
                    cx.model
                        .node(*d)
                        .is_ok_and(|dn| dn.circles.iter().any(|c| cx.partners(*c).next().is_some()))
                })
            })
        });
        let uses_data = effective_service(cx.model, *node).is_some_and(|s| {
            s.instructions.iter().any(|i| {
                matches!(
                    i,
                    Instruction::Link { .. }
                        | Instruction::DuplicateTo { .. }
                        | Instruction::PlaceIn { .. }
                )
            })
        });
        if !(owns_associated || bound_flow || labelled || uses_data) {
            out.push(Finding::new(
                Rule::L5,
                vec![node.0],
                format!(
                    "activity {:?} has no input, intermediate or produced data",
                    n.name
                ),
            ));
        }
    }
}

fn l6(cx: &Ctx, out: &mut Vec<Finding>) {
    for (rel, pilot, target, root) in cx.model.pilots() {
        if service_of(cx.model, pilot, target).is_none() {
            let role = if root { "root pilot" } else { "pilot" };
            out.push(Finding::new(
                Rule::L6,
                vec![rel.0, pilot.0, target.0],
                format!(
                    "{role} {:?} of {:?} has no service",
                    cx.name(pilot.into()),
                    cx.name(target)
                ),
            ));
        }
    }
}

fn w_branch(cx: &Ctx, out: &mut Vec<Finding>) {
    for (node, kind) in &cx.kinds {
        if *kind != NodeKind::Activity {
            continue;
        }
        let outs = cx.model.arcs_from(*node).count();
        if outs < 2 {
            continue;
        }
        let routes = effective_service(cx.model, *node).is_some_and(|s| {
            s.instructions
                .iter()
                .any(|i| matches!(i, Instruction::Route { .. }))
        });
        if !routes {
            out.push(Finding::new(
                Rule::WBranch,
                vec![node.0],
                format!(
                    "{:?} has {outs} outgoing arcs but its service never routes; the lowest arc id wins",
                    cx.name(*node)
                ),
            ));
        }
    }
}

#[cfg(test)]
mod tests;
