use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{classify, Classification};
use crate::model::{ArcId, CircleId, Model, NodeId, RelationId, RelationKind, StarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViewKind {
    Object,
    Process,
    Merged,
}

impl ViewKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "object" => Some(ViewKind::Object),
            "process" => Some(ViewKind::Process),
            "merged" => Some(ViewKind::Merged),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ViewKind::Object => "object",
            ViewKind::Process => "process",
            ViewKind::Merged => "merged",
        }
    }
}

/// Hide/show settings for a projection.
///
/// `hide` holds globs matched against element names (nodes and circles) and
/// decimal ids (every element). A hidden element takes everything that
/// depends on it along.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewFilter {
    #[serde(default)]
    pub hide: Vec<String>,
    #[serde(default)]
    pub show_stars: bool,
    #[serde(default)]
    pub highlight: BTreeSet<NodeId>,
}

impl ViewFilter {
    pub fn with_stars(mut self) -> Self {
        self.show_stars = true;
        self
    }

    pub fn hiding(mut self, glob: &str) -> Self {
        self.hide.push(glob.to_owned());
        self
    }

    pub fn highlighting(mut self, node: NodeId) -> Self {
        self.highlight.insert(node);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ViewModel {
    pub kind: ViewKind,
    pub nodes: BTreeSet<NodeId>,
    pub circles: BTreeSet<CircleId>,
    pub stars: BTreeSet<StarId>,
    pub arcs: BTreeSet<ArcId>,
    pub relations: BTreeSet<RelationId>,
    pub show_stars: bool,
    pub highlight: BTreeSet<NodeId>,
}

impl ViewModel {
    /// All visible ids, regardless of element kind.
    pub fn elements(&self) -> BTreeSet<u64> {
        self.nodes
            .iter()
            .map(|i| i.0)
            .chain(self.circles.iter().map(|i| i.0))
            .chain(self.stars.iter().map(|i| i.0))
            .chain(self.arcs.iter().map(|i| i.0))
            .chain(self.relations.iter().map(|i| i.0))
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.elements().is_empty()
    }
}

struct Matcher(Vec<glob::Pattern>);

impl Matcher {
    fn new(globs: &[String]) -> Self {
        Matcher(
            globs
                .iter()
                .map(|g| {
                    glob::Pattern::new(g)
                        .unwrap_or_else(|_| glob::Pattern::new(&glob::Pattern::escape(g)).unwrap())
                })
                .collect(),
        )
    }

    fn hits(&self, id: u64, name: Option<&str>) -> bool {
        let id = id.to_string();
        self.0
            .iter()
            .any(|p| p.matches(&id) || name.is_some_and(|n| p.matches(n)))
    }
}

/// Elements that survive the filter, independent of the view kind.
struct Survivors {
    nodes: BTreeSet<NodeId>,
    circles: BTreeSet<CircleId>,
    stars: BTreeSet<StarId>,
    arcs: BTreeSet<ArcId>,
    relations: BTreeSet<RelationId>,
}

fn survivors(model: &Model, filter: &ViewFilter) -> Survivors {
    let m = Matcher::new(&filter.hide);
    let mut s = Survivors {
        nodes: model
            .nodes()
            .filter(|n| !m.hits(n.id.0, Some(&n.name)))
            .map(|n| n.id)
            .collect(),
        circles: model
            .circles()
            .filter(|c| !m.hits(c.id.0, Some(&c.name)))
            .map(|c| c.id)
            .collect(),
        stars: model
            .stars()
            .filter(|st| !m.hits(st.id.0, None))
            .map(|st| st.id)
            .collect(),
        arcs: model
            .arcs()
            .filter(|a| !m.hits(a.id.0, None))
            .map(|a| a.id)
            .collect(),
        relations: model
            .relations()
            .filter(|r| !m.hits(r.id.0, None))
            .map(|r| r.id)
            .collect(),
    };
    // Propagate removals to dependents until nothing changes.
    loop {
        let before = (
            s.nodes.len(),
            s.circles.len(),
            s.stars.len(),
            s.arcs.len(),
            s.relations.len(),
        );
        s.circles
            .retain(|c| s.nodes.contains(&model.circle(*c).unwrap().owner));
        s.stars.retain(|st| {
            let star = model.star(*st).unwrap();
            s.circles.contains(&star.circle) && s.nodes.contains(&star.identity.into())
        });
        s.arcs.retain(|a| {
            let arc = model.arc(*a).unwrap();
            s.nodes.contains(&arc.from) && s.nodes.contains(&arc.to)
        });
        let arcs = &s.arcs;
        s.nodes.retain(|n| match model.arc_of_dot(*n) {
            Some(a) => arcs.contains(&a),
            None => true,
        });
        let snapshot = s.relations.clone();
        s.relations
            .retain(|r| match model.relation(*r).unwrap().kind {
                RelationKind::Association { a, b } => {
                    s.circles.contains(&a) && s.circles.contains(&b)
                }
                RelationKind::Pilot { pilot, target, .. } => {
                    s.nodes.contains(&pilot.into()) && s.nodes.contains(&target)
                }
                RelationKind::FlowBinding { circle, arc } => {
                    s.circles.contains(&circle) && s.arcs.contains(&arc)
                }
                RelationKind::InstanceLink { a, b, parent } => {
                    s.stars.contains(&a) && s.stars.contains(&b) && snapshot.contains(&parent)
                }
            });
        let after = (
            s.nodes.len(),
            s.circles.len(),
            s.stars.len(),
            s.arcs.len(),
            s.relations.len(),
        );
        if before == after {
            break;
        }
    }
    s
}

struct Sides<'a> {
    model: &'a Model,
    classes: Classification,
}

impl Sides<'_> {
    fn node_is_process(&self, node: NodeId) -> bool {
        self.classes.kind(node).is_some_and(|k| k.is_process_side())
    }

    fn circle_is_process(&self, circle: CircleId) -> bool {
        self.node_is_process(self.model.circle(circle).unwrap().owner)
    }

    /// (in object view, in process view) for a relation.
    fn relation_sides(&self, id: RelationId) -> (bool, bool) {
        match self.model.relation(id).unwrap().kind {
            RelationKind::Association { a, b } => {
                let (pa, pb) = (self.circle_is_process(a), self.circle_is_process(b));
                (!pa || !pb, pa || pb)
            }
            RelationKind::Pilot { .. } | RelationKind::FlowBinding { .. } => (false, true),
            RelationKind::InstanceLink { parent, .. } => self.relation_sides(parent),
        }
    }
}

/// Project the model onto one of its views.
pub fn project(model: &Model, kind: ViewKind, filter: &ViewFilter) -> ViewModel {
    let s = survivors(model, filter);
    let sides = Sides {
        model,
        classes: classify(model),
    };
    let wants = |object: bool, process: bool| match kind {
        ViewKind::Object => object,
        ViewKind::Process => process,
        ViewKind::Merged => object || process,
    };

    let nodes: BTreeSet<NodeId> = s
        .nodes
        .iter()
        .copied()
        .filter(|n| {
            let p = sides.node_is_process(*n);
            wants(!p, p)
        })
        .collect();
    let circles: BTreeSet<CircleId> = s
        .circles
        .iter()
        .copied()
        .filter(|c| {
            let p = sides.circle_is_process(*c);
            wants(!p, p)
        })
        .collect();
    let stars: BTreeSet<StarId> = if filter.show_stars {
        s.stars
            .iter()
            .copied()
            .filter(|st| circles.contains(&model.star(*st).unwrap().circle))
            .collect()
    } else {
        BTreeSet::new()
    };
    let arcs: BTreeSet<ArcId> = if kind == ViewKind::Object {
        BTreeSet::new()
    } else {
        s.arcs.clone()
    };
    let relations: BTreeSet<RelationId> = s
        .relations
        .iter()
        .copied()
        .filter(|r| {
            let rel = model.relation(*r).unwrap();
            if matches!(rel.kind, RelationKind::InstanceLink { .. }) && !filter.show_stars {
                return false;
            }
            let (o, p) = sides.relation_sides(*r);
            wants(o, p)
        })
        .collect();
    let highlight = filter
        .highlight
        .iter()
        .copied()
        .filter(|n| nodes.contains(n))
        .collect();
    ViewModel {
        kind,
        nodes,
        circles,
        stars,
        arcs,
        relations,
        show_stars: filter.show_stars,
        highlight,
    }
}
