//! Rendering of projected views: Graphviz DOT and the JSON view format.
//!
//! Neither output carries coordinates. DOT leaves layout to Graphviz; the
//! JSON view leaves it to whatever client draws it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::model::{ArcId, DotKind, Model, NodeId, RelationKind};
use crate::topology::{processes, Classification, NodeKind, ViewKind, ViewModel};

pub const VIEW_FORMAT: &str = "topoflow-view/1";

/// Graphviz attributes per element kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderStyle {
    pub shapes: BTreeMap<&'static str, &'static str>,
    /// Extra attributes for highlighted nodes.
    pub highlight: &'static str,
}

impl Default for RenderStyle {
    fn default() -> Self {
        let shapes = [
            ("start", r#"shape=box, style=rounded"#),
            ("final", r#"shape=box, style="rounded,bold""#),
            ("activity", r#"shape=box, style=rounded"#),
            ("object", r#"shape=box"#),
            ("class", r#"shape=box"#),
            (
                "dot:duplicate",
                r#"shape=circle, width=0.2, fixedsize=true"#,
            ),
            ("dot:label", r#"shape=square, width=0.2, fixedsize=true"#),
            (
                "dot:gate",
                r#"shape=square, style=filled, fillcolor=black, width=0.2, fixedsize=true"#,
            ),
            ("circle", r#"shape=ellipse"#),
            (
                "star",
                r#"shape=square, width=0.1, fixedsize=true, label="""#,
            ),
            ("stub", r#"shape=plaintext, fontcolor=gray40"#),
        ]
        .into_iter()
        .collect();
        RenderStyle {
            shapes,
            highlight: "penwidth=3",
        }
    }
}

impl RenderStyle {
    fn shape(&self, key: &str) -> &str {
        self.shapes.get(key).copied().unwrap_or("shape=box")
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn node_style_key(model: &Model, classes: &Classification, node: NodeId) -> String {
    let n = model.node(node).expect("visible node");
    match n.dot_kind {
        Some(k) => format!("dot:{}", k.as_str()),
        None => classes
            .kind(node)
            .unwrap_or(NodeKind::Object)
            .as_str()
            .to_owned(),
    }
}

/// First node a token meets on `arc`: its first dot, or the target.
fn arc_head(model: &Model, arc: ArcId) -> String {
    let a = model.arc(arc).expect("visible arc");
    match a.dots.first() {
        Some(d) => format!("n{d}"),
        None => format!("n{}", a.to),
    }
}

/// Render `view` as a directed graph with one cluster per process.
pub fn to_dot(
    model: &Model,
    view: &ViewModel,
    classes: &Classification,
    style: &RenderStyle,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph {} {{", quote(view.kind.as_str()));
    out.push_str("  graph [rankdir=LR, compound=true];\n");
    out.push_str("  node [fontname=\"Helvetica\"];\n");
    out.push_str("  edge [fontname=\"Helvetica\"];\n");

    let mut drawn: BTreeSet<NodeId> = BTreeSet::new();
    let node_line = |out: &mut String, indent: &str, id: NodeId| {
        let n = model.node(id).expect("visible node");
        let key = node_style_key(model, classes, id);
        let label = if n.dot_kind.is_some() && n.dot_kind != Some(DotKind::Label) {
            String::new()
        } else {
            n.name.clone()
        };
        let _ = write!(
            out,
            "{indent}n{id} [label={}, {}",
            quote(&label),
            style.shape(&key)
        );
        if n.dot_kind.is_some() {
            let _ = write!(out, ", xlabel={}", quote(&n.name));
        }
        if view.highlight.contains(&id) {
            let _ = write!(out, ", {}", style.highlight);
        }
        out.push_str("];\n");
    };

    for p in processes(model) {
        let mut members: BTreeSet<NodeId> = p
            .members
            .iter()
            .copied()
            .filter(|n| view.nodes.contains(n))
            .collect();
        for a in &p.arcs {
            if view.arcs.contains(a) {
                for d in &model.arc(*a).expect("process arc").dots {
                    if view.nodes.contains(d) {
                        members.insert(*d);
                    }
                }
            }
        }
        if members.is_empty() {
            continue;
        }
        let label = match p.enclosing {
            Some(f) => model.node(f).map(|n| n.name.clone()).unwrap_or_default(),
            None => format!("process {}", p.id),
        };
        let _ = writeln!(out, "  subgraph cluster_p{} {{", p.id);
        let _ = writeln!(out, "    label={};", quote(&label));
        out.push_str("    style=rounded;\n");
        for m in members {
            node_line(&mut out, "    ", m);
            drawn.insert(m);
        }
        out.push_str("  }\n");
    }
    for n in &view.nodes {
        if !drawn.contains(n) {
            node_line(&mut out, "  ", *n);
            drawn.insert(*n);
        }
    }
    for c in &view.circles {
        let circle = model.circle(*c).expect("visible circle");
        let _ = writeln!(
            out,
            "  c{c} [label={}, {}];",
            quote(&circle.name),
            style.shape("circle")
        );
        let _ = writeln!(
            out,
            "  n{} -> c{c} [arrowhead=none, style=dotted];",
            circle.owner
        );
    }
    for s in &view.stars {
        let star = model.star(*s).expect("visible star");
        let name = &model.identity_node(star.identity).expect("identity").name;
        let _ = writeln!(
            out,
            "  s{s} [tooltip={}, {}];",
            quote(name),
            style.shape("star")
        );
        let _ = writeln!(out, "  c{} -> s{s} [arrowhead=none];", star.circle);
    }

    // Endpoints of visible edges that the view itself hides.
    let mut stubs: BTreeSet<NodeId> = BTreeSet::new();
    let mut edges = String::new();
    for a in &view.arcs {
        let arc = model.arc(*a).expect("visible arc");
        let mut chain = vec![arc.from];
        chain.extend(&arc.dots);
        chain.push(arc.to);
        for w in chain.windows(2) {
            let last = w[1] == arc.to;
            let _ = writeln!(
                edges,
                "  n{} -> n{}{};",
                w[0],
                w[1],
                if last { "" } else { " [arrowhead=none]" }
            );
        }
        stubs.extend(chain);
    }
    for r in &view.relations {
        let rel = model.relation(*r).expect("visible relation");
        match rel.kind {
            RelationKind::Association { a, b } => {
                let label = rel
                    .multiplicity
                    .as_deref()
                    .map(|m| format!(", label={}", quote(m)))
                    .unwrap_or_default();
                let _ = writeln!(edges, "  c{a} -> c{b} [dir=none{label}];");
            }
            RelationKind::Pilot {
                pilot,
                target,
                root,
            } => {
                let name = &model.identity_node(pilot).expect("pilot").name;
                let label = if root {
                    format!("{name} (root)")
                } else {
                    name.clone()
                };
                let _ = writeln!(
                    edges,
                    "  n{pilot} -> n{target} [style=dashed, label={}];",
                    quote(&label)
                );
                stubs.insert(pilot.into());
                stubs.insert(target);
            }
            RelationKind::FlowBinding { circle, arc } => {
                let _ = writeln!(
                    edges,
                    "  c{circle} -> {} [style=bold];",
                    arc_head(model, arc)
                );
            }
            RelationKind::InstanceLink { a, b, .. } => {
                let _ = writeln!(edges, "  s{a} -> s{b} [dir=none, style=dotted];");
            }
        }
    }
    for s in stubs {
        if !drawn.contains(&s) {
            let name = &model.node(s).expect("endpoint").name;
            let _ = writeln!(
                out,
                "  n{s} [label={}, {}];",
                quote(name),
                style.shape("stub")
            );
            drawn.insert(s);
        }
    }
    out.push_str(&edges);
    out.push_str("}\n");
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ViewJson {
    pub version: &'static str,
    pub kind: ViewKind,
    pub elements: Vec<ElementJson>,
    pub edges: Vec<EdgeJson>,
    /// Star placements; empty unless the view shows stars.
    pub stars: Vec<StarJson>,
    pub highlight: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ElementJson {
    pub id: u64,
    pub kind: String,
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub owner: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub process: Option<u64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub attributes: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EdgeJson {
    pub id: u64,
    pub kind: &'static str,
    pub from: u64,
    pub to: u64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub dots: Vec<u64>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub root: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parent: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multiplicity: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StarJson {
    pub id: u64,
    pub identity: u64,
    pub name: String,
    pub circle: u64,
}

/// The view as plain data.
pub fn view_json(model: &Model, view: &ViewModel, classes: &Classification) -> ViewJson {
    let mut elements = Vec::new();
    for n in &view.nodes {
        let node = model.node(*n).expect("visible node");
        let kind = match node.dot_kind {
            Some(k) => format!("dot:{}", k.as_str()),
            None => classes
                .kind(*n)
                .unwrap_or(NodeKind::Object)
                .as_str()
                .to_owned(),
        };
        elements.push(ElementJson {
            id: n.0,
            kind,
            name: node.name.clone(),
            owner: None,
            process: classes.in_process.get(n).map(|p| p.0),
            attributes: node.attributes.clone(),
        });
    }
    for c in &view.circles {
        let circle = model.circle(*c).expect("visible circle");
        elements.push(ElementJson {
            id: c.0,
            kind: "circle".into(),
            name: circle.name.clone(),
            owner: Some(circle.owner.0),
            process: None,
            attributes: BTreeMap::new(),
        });
    }
    elements.sort_by_key(|e| e.id);

    let mut edges = Vec::new();
    for a in &view.arcs {
        let arc = model.arc(*a).expect("visible arc");
        edges.push(EdgeJson {
            id: a.0,
            kind: "arc",
            from: arc.from.0,
            to: arc.to.0,
            dots: arc.dots.iter().map(|d| d.0).collect(),
            root: false,
            parent: None,
            multiplicity: None,
        });
    }
    for r in &view.relations {
        let rel = model.relation(*r).expect("visible relation");
        let (from, to, root, parent) = match rel.kind {
            RelationKind::Association { a, b } => (a.0, b.0, false, None),
            RelationKind::Pilot {
                pilot,
                target,
                root,
            } => (pilot.0, target.0, root, None),
            RelationKind::FlowBinding { circle, arc } => (circle.0, arc.0, false, None),
            RelationKind::InstanceLink { a, b, parent } => (a.0, b.0, false, Some(parent.0)),
        };
        edges.push(EdgeJson {
            id: r.0,
            kind: rel.kind.name(),
            from,
            to,
            dots: Vec::new(),
            root,
            parent,
            multiplicity: rel.multiplicity.clone(),
        });
    }
    edges.sort_by_key(|e| e.id);

    let stars = view
        .stars
        .iter()
        .map(|s| {
            let star = model.star(*s).expect("visible star");
            StarJson {
                id: s.0,
                identity: star.identity.0,
                name: model
                    .identity_node(star.identity)
                    .map(|n| n.name.clone())
                    .unwrap_or_default(),
                circle: star.circle.0,
            }
        })
        .collect();

    ViewJson {
        version: VIEW_FORMAT,
        kind: view.kind,
        elements,
        edges,
        stars,
        highlight: view.highlight.iter().map(|n| n.0).collect(),
    }
}

/// Canonical JSON text of the view, LF terminated.
pub fn to_view_json(model: &Model, view: &ViewModel, classes: &Classification) -> String {
    let mut s = serde_json::to_string_pretty(&view_json(model, view, classes))
        .expect("views always serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests;
