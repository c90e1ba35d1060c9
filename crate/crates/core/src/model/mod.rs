//! The element graph: nodes, circles, stars, arcs, dots, relations and the
//! services pilots run.
//!
//! A [`Node`] is the universal element. Whether it acts as an object, a class
//! or an activity is never stored; [`crate::topology::classify`] infers it from
//! the arcs around the node. A [`Circle`] is an ordered queue of [`Star`]s owned
//! by a node, and a star is one placement of a node's identity inside a
//! circle, which is how one object takes part in several sets or activities
//! at once.
//!
//! All mutation goes through [`Model`] methods so the invariants below hold
//! between any two calls:
//!
//! * at most one star per (identity, circle);
//! * circle names are unique per owner;
//! * the dots of an arc are dot nodes, a gate appears at most once and last;
//! * instance links sit in the circles of their parent association;
//! * at most one root pilot per node;
//! * every id field resolves ([`Model::check_integrity`]).

mod error;
mod ids;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

pub use error::{ModelError, Result};
pub use ids::{ArcId, CircleId, IdentityId, NodeId, RelationId, ServiceId, StarId};

use crate::pilots::Service;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DotKind {
    /// Rounded dot: the identity is duplicated across the transition.
    Duplicate,
    /// Square dot: labels an object flow, no runtime effect.
    Label,
    /// Solid square dot: the token's life ends here.
    Gate,
}

impl DotKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DotKind::Duplicate => "duplicate",
            DotKind::Label => "label",
            DotKind::Gate => "gate",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "duplicate" => Some(DotKind::Duplicate),
            "label" => Some(DotKind::Label),
            "gate" => Some(DotKind::Gate),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Node {
    pub id: NodeId,
    pub name: String,
    pub dot_kind: Option<DotKind>,
    pub circles: Vec<CircleId>,
    /// Static attributes, fixed when the object is created.
    pub attributes: BTreeMap<String, String>,
    /// Container node this node is drawn inside, e.g. the frame of a process.
    pub frame: Option<NodeId>,
}

impl Node {
    pub fn identity(&self) -> IdentityId {
        self.id.into()
    }

    pub fn is_dot(&self) -> bool {
        self.dot_kind.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Circle {
    pub id: CircleId,
    pub owner: NodeId,
    pub name: String,
    /// Queue order: oldest placement first.
    pub stars: Vec<StarId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Star {
    pub id: StarId,
    pub identity: IdentityId,
    pub circle: CircleId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Arc {
    pub id: ArcId,
    pub from: NodeId,
    pub to: NodeId,
    pub dots: Vec<NodeId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RelationKind {
    Association {
        a: CircleId,
        b: CircleId,
    },
    Pilot {
        pilot: IdentityId,
        target: NodeId,
        root: bool,
    },
    FlowBinding {
        circle: CircleId,
        arc: ArcId,
    },
    InstanceLink {
        a: StarId,
        b: StarId,
        parent: RelationId,
    },
}

impl RelationKind {
    pub fn name(&self) -> &'static str {
        match self {
            RelationKind::Association { .. } => "association",
            RelationKind::Pilot { .. } => "pilot",
            RelationKind::FlowBinding { .. } => "flow_binding",
            RelationKind::InstanceLink { .. } => "instance_link",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Relation {
    pub id: RelationId,
    #[serde(flatten)]
    pub kind: RelationKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multiplicity: Option<String>,
}

/// Which table an id lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    Node,
    Circle,
    Star,
    Arc,
    Relation,
    Service,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    next_id: u64,
    nodes: BTreeMap<NodeId, Node>,
    circles: BTreeMap<CircleId, Circle>,
    stars: BTreeMap<StarId, Star>,
    arcs: BTreeMap<ArcId, Arc>,
    relations: BTreeMap<RelationId, Relation>,
    services: BTreeMap<ServiceId, Service>,
}

/// JSON shape: every table as an id-ordered array.
impl Serialize for Model {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("Model", 7)?;
        s.serialize_field("next_id", &self.next_id)?;
        s.serialize_field("nodes", &self.nodes.values().collect::<Vec<_>>())?;
        s.serialize_field("circles", &self.circles.values().collect::<Vec<_>>())?;
        s.serialize_field("stars", &self.stars.values().collect::<Vec<_>>())?;
        s.serialize_field("arcs", &self.arcs.values().collect::<Vec<_>>())?;
        s.serialize_field("relations", &self.relations.values().collect::<Vec<_>>())?;
        s.serialize_field("services", &self.services.values().collect::<Vec<_>>())?;
        s.end()
    }
}

impl Default for Model {
    fn default() -> Self {
        Self::new()
    }
}

impl Model {
    pub fn new() -> Self {
        Model {
            next_id: 1,
            nodes: BTreeMap::new(),
            circles: BTreeMap::new(),
            stars: BTreeMap::new(),
            arcs: BTreeMap::new(),
            relations: BTreeMap::new(),
            services: BTreeMap::new(),
        }
    }

    /// Id the next created element will receive.
    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    fn alloc(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
            && self.circles.is_empty()
            && self.stars.is_empty()
            && self.arcs.is_empty()
            && self.relations.is_empty()
            && self.services.is_empty()
    }

    // ---- read access -------------------------------------------------------

    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.values()
    }
    pub fn circles(&self) -> impl Iterator<Item = &Circle> {
        self.circles.values()
    }
    pub fn stars(&self) -> impl Iterator<Item = &Star> {
        self.stars.values()
    }
    pub fn arcs(&self) -> impl Iterator<Item = &Arc> {
        self.arcs.values()
    }
    pub fn relations(&self) -> impl Iterator<Item = &Relation> {
        self.relations.values()
    }
    pub fn services(&self) -> impl Iterator<Item = &Service> {
        self.services.values()
    }

    pub fn node(&self, id: NodeId) -> Result<&Node> {
        self.nodes.get(&id).ok_or(ModelError::UnknownNode(id))
    }
    pub fn circle(&self, id: CircleId) -> Result<&Circle> {
        self.circles.get(&id).ok_or(ModelError::UnknownCircle(id))
    }
    pub fn star(&self, id: StarId) -> Result<&Star> {
        self.stars.get(&id).ok_or(ModelError::UnknownStar(id))
    }
    pub fn arc(&self, id: ArcId) -> Result<&Arc> {
        self.arcs.get(&id).ok_or(ModelError::UnknownArc(id))
    }
    pub fn relation(&self, id: RelationId) -> Result<&Relation> {
        self.relations
            .get(&id)
            .ok_or(ModelError::UnknownRelation(id))
    }
    pub fn service(&self, id: ServiceId) -> Result<&Service> {
        self.services.get(&id).ok_or(ModelError::UnknownService(id))
    }

    pub fn identity_node(&self, identity: IdentityId) -> Result<&Node> {
        self.nodes
            .get(&NodeId::from(identity))
            .ok_or(ModelError::UnknownIdentity(identity))
    }

    pub fn element_kind(&self, id: u64) -> Option<ElementKind> {
        if self.nodes.contains_key(&NodeId(id)) {
            Some(ElementKind::Node)
        } else if self.circles.contains_key(&CircleId(id)) {
            Some(ElementKind::Circle)
        } else if self.stars.contains_key(&StarId(id)) {
            Some(ElementKind::Star)
        } else if self.arcs.contains_key(&ArcId(id)) {
            Some(ElementKind::Arc)
        } else if self.relations.contains_key(&RelationId(id)) {
            Some(ElementKind::Relation)
        } else if self.services.contains_key(&ServiceId(id)) {
            Some(ElementKind::Service)
        } else {
            None
        }
    }

    /// First node (lowest id) with the given name.
    pub fn node_named(&self, name: &str) -> Option<NodeId> {
        self.nodes.values().find(|n| n.name == name).map(|n| n.id)
    }

    pub fn circle_named(&self, owner: NodeId, name: &str) -> Option<CircleId> {
        let node = self.nodes.get(&owner)?;
        node.circles
            .iter()
            .copied()
            .find(|c| self.circles[c].name == name)
    }

    /// Identities in a circle, oldest placement first.
    pub fn members(&self, circle: CircleId) -> Result<Vec<IdentityId>> {
        let circle = self.circle(circle)?;
        Ok(circle
            .stars
            .iter()
            .map(|s| self.stars[s].identity)
            .collect())
    }

    /// Circles holding a star of `identity`.
    pub fn placements(&self, identity: IdentityId) -> Result<BTreeSet<CircleId>> {
        self.identity_node(identity)?;
        Ok(self
            .stars
            .values()
            .filter(|s| s.identity == identity)
            .map(|s| s.circle)
            .collect())
    }

    pub fn stars_of(&self, identity: IdentityId) -> impl Iterator<Item = &Star> {
        self.stars.values().filter(move |s| s.identity == identity)
    }

    pub fn star_in(&self, identity: IdentityId, circle: CircleId) -> Option<StarId> {
        let circle = self.circles.get(&circle)?;
        circle
            .stars
            .iter()
            .copied()
            .find(|s| self.stars[s].identity == identity)
    }

    pub fn arcs_from(&self, node: NodeId) -> impl Iterator<Item = &Arc> {
        self.arcs.values().filter(move |a| a.from == node)
    }

    pub fn arcs_into(&self, node: NodeId) -> impl Iterator<Item = &Arc> {
        self.arcs.values().filter(move |a| a.to == node)
    }

    /// The arc a dot node sits on, if any.
    pub fn arc_of_dot(&self, dot: NodeId) -> Option<ArcId> {
        self.arcs
            .values()
            .find(|a| a.dots.contains(&dot))
            .map(|a| a.id)
    }

    pub fn associations(&self) -> impl Iterator<Item = (RelationId, CircleId, CircleId)> + '_ {
        self.relations.values().filter_map(|r| match r.kind {
            RelationKind::Association { a, b } => Some((r.id, a, b)),
            _ => None,
        })
    }

    pub fn flow_bindings(&self) -> impl Iterator<Item = (RelationId, CircleId, ArcId)> + '_ {
        self.relations.values().filter_map(|r| match r.kind {
            RelationKind::FlowBinding { circle, arc } => Some((r.id, circle, arc)),
            _ => None,
        })
    }

    /// Pilot relations as `(relation, pilot, target, root)`.
    pub fn pilots(&self) -> impl Iterator<Item = (RelationId, IdentityId, NodeId, bool)> + '_ {
        self.relations.values().filter_map(|r| match r.kind {
            RelationKind::Pilot {
                pilot,
                target,
                root,
            } => Some((r.id, pilot, target, root)),
            _ => None,
        })
    }

    /// Instance links as `(relation, a, b, parent)`.
    pub fn instance_links(
        &self,
    ) -> impl Iterator<Item = (RelationId, StarId, StarId, RelationId)> + '_ {
        self.relations.values().filter_map(|r| match r.kind {
            RelationKind::InstanceLink { a, b, parent } => Some((r.id, a, b, parent)),
            _ => None,
        })
    }

    /// Number of instance links of `parent` touching any star of `identity`.
    pub fn link_degree(&self, identity: IdentityId, parent: RelationId) -> usize {
        self.instance_links()
            .filter(|&(_, a, b, p)| {
                p == parent
                    && (self.stars[&a].identity == identity || self.stars[&b].identity == identity)
            })
            .count()
    }

    // ---- mutation ----------------------------------------------------------

    pub fn add_node(&mut self, name: &str, dot_kind: Option<DotKind>) -> Result<NodeId> {
        if name.is_empty() {
            return Err(ModelError::EmptyName);
        }
        let id = NodeId(self.alloc());
        self.nodes.insert(
            id,
            Node {
                id,
                name: name.to_owned(),
                dot_kind,
                circles: Vec::new(),
                attributes: BTreeMap::new(),
                frame: None,
            },
        );
        Ok(id)
    }

    pub fn set_attribute(&mut self, node: NodeId, name: &str, value: &str) -> Result<()> {
        if name.is_empty() {
            return Err(ModelError::EmptyName);
        }
        let node = self
            .nodes
            .get_mut(&node)
            .ok_or(ModelError::UnknownNode(node))?;
        node.attributes.insert(name.to_owned(), value.to_owned());
        Ok(())
    }

    /// Draw `node` inside `frame` (or detach it with `None`).
    pub fn set_frame(&mut self, node: NodeId, frame: Option<NodeId>) -> Result<()> {
        self.node(node)?;
        if let Some(f) = frame {
            self.node(f)?;
            if f == node {
                return Err(ModelError::SelfLoop(node));
            }
        }
        self.nodes.get_mut(&node).unwrap().frame = frame;
        Ok(())
    }

    pub fn add_circle(&mut self, owner: NodeId, name: &str) -> Result<CircleId> {
        if name.is_empty() {
            return Err(ModelError::EmptyName);
        }
        self.node(owner)?;
        if self.circle_named(owner, name).is_some() {
            return Err(ModelError::DuplicateCircleName {
                node: owner,
                name: name.to_owned(),
            });
        }
        let id = CircleId(self.alloc());
        self.circles.insert(
            id,
            Circle {
                id,
                owner,
                name: name.to_owned(),
                stars: Vec::new(),
            },
        );
        self.nodes.get_mut(&owner).unwrap().circles.push(id);
        Ok(id)
    }

    /// Append a placement of `identity` to the circle's queue.
    pub fn place_star(&mut self, identity: IdentityId, circle: CircleId) -> Result<StarId> {
        self.identity_node(identity)?;
        self.circle(circle)?;
        if self.star_in(identity, circle).is_some() {
            return Err(ModelError::DuplicatePlacement { identity, circle });
        }
        let id = StarId(self.alloc());
        self.stars.insert(
            id,
            Star {
                id,
                identity,
                circle,
            },
        );
        self.circles.get_mut(&circle).unwrap().stars.push(id);
        Ok(id)
    }

    pub fn connect_arc(&mut self, from: NodeId, to: NodeId) -> Result<ArcId> {
        if from == to {
            return Err(ModelError::SelfLoop(from));
        }
        for n in [from, to] {
            if self.node(n)?.is_dot() {
                return Err(ModelError::DotEndpoint(n));
            }
        }
        let id = ArcId(self.alloc());
        self.arcs.insert(
            id,
            Arc {
                id,
                from,
                to,
                dots: Vec::new(),
            },
        );
        Ok(id)
    }

    /// Insert a dot node into the arc's dot list at `position`.
    pub fn insert_dot(&mut self, arc: ArcId, dot: NodeId, position: usize) -> Result<()> {
        let kind = self.node(dot)?.dot_kind.ok_or(ModelError::NotADot(dot))?;
        let current = self.arc(arc)?;
        if let Some(on) = self.arc_of_dot(dot) {
            return Err(ModelError::DotAlreadyPlaced { dot, arc: on });
        }
        if position > current.dots.len() {
            return Err(ModelError::DotPosition { arc, position });
        }
        let gate_at = current
            .dots
            .iter()
            .position(|d| self.nodes[d].dot_kind == Some(DotKind::Gate));
        if let Some(g) = gate_at {
            if kind == DotKind::Gate {
                return Err(ModelError::SecondGate(arc));
            }
            if position > g {
                return Err(ModelError::AfterGate(arc));
            }
        } else if kind == DotKind::Gate && position != current.dots.len() {
            return Err(ModelError::AfterGate(arc));
        }
        self.arcs.get_mut(&arc).unwrap().dots.insert(position, dot);
        Ok(())
    }

    /// Append a dot at the end of the arc's dot list.
    pub fn push_dot(&mut self, arc: ArcId, dot: NodeId) -> Result<()> {
        let len = self.arc(arc)?.dots.len();
        self.insert_dot(arc, dot, len)
    }

    /// Remove a dot from whichever arc carries it. The dot node survives.
    pub fn remove_dot(&mut self, dot: NodeId) -> Result<Option<ArcId>> {
        self.node(dot)?;
        let arc = self.arc_of_dot(dot);
        if let Some(a) = arc {
            self.arcs.get_mut(&a).unwrap().dots.retain(|d| *d != dot);
        }
        Ok(arc)
    }

    pub fn add_relation(
        &mut self,
        kind: RelationKind,
        multiplicity: Option<&str>,
    ) -> Result<RelationId> {
        self.check_relation(&kind)?;
        let id = RelationId(self.alloc());
        self.relations.insert(
            id,
            Relation {
                id,
                kind,
                multiplicity: multiplicity.map(str::to_owned),
            },
        );
        Ok(id)
    }

    fn check_relation(&self, kind: &RelationKind) -> Result<()> {
        match *kind {
            RelationKind::Association { a, b } => {
                self.circle(a)?;
                self.circle(b)?;
            }
            RelationKind::Pilot {
                pilot,
                target,
                root,
            } => {
                self.identity_node(pilot)?;
                self.node(target)?;
                for (_, p, t, r) in self.pilots() {
                    if t != target {
                        continue;
                    }
                    if p == pilot {
                        return Err(ModelError::DuplicateRelation(format!(
                            "pilot {pilot} already declared on node {target}"
                        )));
                    }
                    if root && r {
                        return Err(ModelError::SecondRootPilot(target));
                    }
                }
            }
            RelationKind::FlowBinding { circle, arc } => {
                let owner = self.circle(circle)?.owner;
                self.arc(arc)?;
                if self.nodes[&owner].is_dot() {
                    return Err(ModelError::EndpointMismatch(format!(
                        "circle {circle} belongs to a dot and cannot source a flow"
                    )));
                }
                if self
                    .flow_bindings()
                    .any(|(_, c, a)| c == circle && a == arc)
                {
                    return Err(ModelError::DuplicateRelation(format!(
                        "circle {circle} is already bound to arc {arc}"
                    )));
                }
            }
            RelationKind::InstanceLink { a, b, parent } => {
                let (ca, cb) = match self.relation(parent)?.kind {
                    RelationKind::Association { a, b } => (a, b),
                    _ => return Err(ModelError::NotAnAssociation(parent)),
                };
                let sa = self.star(a)?.circle;
                let sb = self.star(b)?.circle;
                if !((sa == ca && sb == cb) || (sa == cb && sb == ca)) {
                    return Err(ModelError::CircleMismatch {
                        association: parent,
                        a,
                        b,
                    });
                }
                if self
                    .instance_links()
                    .any(|(_, x, y, p)| p == parent && ((x == a && y == b) || (x == b && y == a)))
                {
                    return Err(ModelError::DuplicateRelation(format!(
                        "stars {a} and {b} are already linked under {parent}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn add_association(&mut self, a: CircleId, b: CircleId) -> Result<RelationId> {
        self.add_relation(RelationKind::Association { a, b }, None)
    }

    pub fn add_pilot(
        &mut self,
        pilot: IdentityId,
        target: NodeId,
        root: bool,
    ) -> Result<RelationId> {
        self.add_relation(
            RelationKind::Pilot {
                pilot,
                target,
                root,
            },
            None,
        )
    }

    pub fn add_flow_binding(&mut self, circle: CircleId, arc: ArcId) -> Result<RelationId> {
        self.add_relation(RelationKind::FlowBinding { circle, arc }, None)
    }

    /// Instantiate a circle-level association between two stars.
    pub fn instantiate_association(
        &mut self,
        association: RelationId,
        a: StarId,
        b: StarId,
    ) -> Result<RelationId> {
        self.add_relation(
            RelationKind::InstanceLink {
                a,
                b,
                parent: association,
            },
            None,
        )
    }

    /// Attach a service. Callers go through [`crate::pilots::bind_service`],
    /// which checks the pilot relation and the instruction list.
    pub(crate) fn insert_service(
        &mut self,
        pilot: IdentityId,
        target: NodeId,
        instructions: Vec<crate::pilots::Instruction>,
    ) -> ServiceId {
        let id = ServiceId(self.alloc());
        self.services.insert(
            id,
            Service {
                id,
                pilot,
                target,
                instructions,
            },
        );
        id
    }

    /// Restores the id counter when loading a saved model.
    pub(crate) fn set_next_id(&mut self, next: u64) {
        self.next_id = self.next_id.max(next);
    }

    /// Insert elements under fixed ids while loading. The loader runs
    /// [`Model::check_integrity`] afterwards.
    pub(crate) fn raw_insert_node(&mut self, node: Node) {
        self.next_id = self.next_id.max(node.id.0 + 1);
        self.nodes.insert(node.id, node);
    }
    pub(crate) fn raw_insert_circle(&mut self, circle: Circle) {
        self.next_id = self.next_id.max(circle.id.0 + 1);
        if let Some(owner) = self.nodes.get_mut(&circle.owner) {
            owner.circles.push(circle.id);
        }
        self.circles.insert(circle.id, circle);
    }
    pub(crate) fn raw_insert_star(&mut self, star: Star) {
        self.next_id = self.next_id.max(star.id.0 + 1);
        if let Some(circle) = self.circles.get_mut(&star.circle) {
            circle.stars.push(star.id);
        }
        self.stars.insert(star.id, star);
    }
    pub(crate) fn raw_insert_arc(&mut self, arc: Arc) {
        self.next_id = self.next_id.max(arc.id.0 + 1);
        self.arcs.insert(arc.id, arc);
    }
    pub(crate) fn raw_insert_relation(&mut self, relation: Relation) {
        self.next_id = self.next_id.max(relation.id.0 + 1);
        self.relations.insert(relation.id, relation);
    }
    pub(crate) fn raw_insert_service(&mut self, service: Service) {
        self.next_id = self.next_id.max(service.id.0 + 1);
        self.services.insert(service.id, service);
    }
    pub(crate) fn arc_mut(&mut self, id: ArcId) -> Option<&mut Arc> {
        self.arcs.get_mut(&id)
    }
    pub(crate) fn remove_service(&mut self, id: ServiceId) -> Option<Service> {
        self.services.remove(&id)
    }

    // ---- deletion ----------------------------------------------------------

    /// Delete any element by id and everything that depends on it. Returns
    /// the ids removed, ascending.
    pub fn delete(&mut self, id: u64) -> Result<Vec<u64>> {
        let kind = self
            .element_kind(id)
            .ok_or(ModelError::UnknownElement(id))?;
        let mut removed = BTreeSet::new();
        match kind {
            ElementKind::Node => self.delete_node(NodeId(id), &mut removed),
            ElementKind::Circle => self.delete_circle(CircleId(id), &mut removed),
            ElementKind::Star => self.delete_star(StarId(id), &mut removed),
            ElementKind::Arc => self.delete_arc(ArcId(id), &mut removed),
            ElementKind::Relation => self.delete_relation(RelationId(id), &mut removed),
            ElementKind::Service => {
                self.services.remove(&ServiceId(id));
                removed.insert(id);
            }
        }
        self.drop_dangling_services(&mut removed);
        Ok(removed.into_iter().collect())
    }

    /// Remove a single star (and its instance links).
    pub fn remove_star(&mut self, star: StarId) -> Result<Vec<u64>> {
        self.star(star)?;
        self.delete(star.0)
    }

    fn delete_node(&mut self, id: NodeId, removed: &mut BTreeSet<u64>) {
        let Some(node) = self.nodes.get(&id) else {
            return;
        };
        let circles = node.circles.clone();
        for c in circles {
            self.delete_circle(c, removed);
        }
        let identity = IdentityId::from(id);
        let own_stars: Vec<StarId> = self.stars_of(identity).map(|s| s.id).collect();
        for s in own_stars {
            self.delete_star(s, removed);
        }
        let arcs: Vec<ArcId> = self
            .arcs
            .values()
            .filter(|a| a.from == id || a.to == id)
            .map(|a| a.id)
            .collect();
        for a in arcs {
            self.delete_arc(a, removed);
        }
        for arc in self.arcs.values_mut() {
            arc.dots.retain(|d| *d != id);
        }
        let pilots: Vec<RelationId> = self
            .pilots()
            .filter(|&(_, p, t, _)| p == identity || t == id)
            .map(|(r, ..)| r)
            .collect();
        for r in pilots {
            self.delete_relation(r, removed);
        }
        for node in self.nodes.values_mut() {
            if node.frame == Some(id) {
                node.frame = None;
            }
        }
        self.nodes.remove(&id);
        removed.insert(id.0);
    }

    fn delete_circle(&mut self, id: CircleId, removed: &mut BTreeSet<u64>) {
        let Some(circle) = self.circles.get(&id) else {
            return;
        };
        let stars = circle.stars.clone();
        let owner = circle.owner;
        for s in stars {
            self.delete_star(s, removed);
        }
        let rels: Vec<RelationId> = self
            .relations
            .values()
            .filter(|r| match r.kind {
                RelationKind::Association { a, b } => a == id || b == id,
                RelationKind::FlowBinding { circle, .. } => circle == id,
                _ => false,
            })
            .map(|r| r.id)
            .collect();
        for r in rels {
            self.delete_relation(r, removed);
        }
        if let Some(node) = self.nodes.get_mut(&owner) {
            node.circles.retain(|c| *c != id);
        }
        self.circles.remove(&id);
        removed.insert(id.0);
    }

    fn delete_star(&mut self, id: StarId, removed: &mut BTreeSet<u64>) {
        let Some(star) = self.stars.remove(&id) else {
            return;
        };
        if let Some(circle) = self.circles.get_mut(&star.circle) {
            circle.stars.retain(|s| *s != id);
        }
        let links: Vec<RelationId> = self
            .instance_links()
            .filter(|&(_, a, b, _)| a == id || b == id)
            .map(|(r, ..)| r)
            .collect();
        for r in links {
            self.relations.remove(&r);
            removed.insert(r.0);
        }
        removed.insert(id.0);
    }

    fn delete_arc(&mut self, id: ArcId, removed: &mut BTreeSet<u64>) {
        if self.arcs.remove(&id).is_none() {
            return;
        }
        let rels: Vec<RelationId> = self
            .flow_bindings()
            .filter(|&(_, _, a)| a == id)
            .map(|(r, ..)| r)
            .collect();
        for r in rels {
            self.delete_relation(r, removed);
        }
        removed.insert(id.0);
    }

    fn delete_relation(&mut self, id: RelationId, removed: &mut BTreeSet<u64>) {
        let Some(rel) = self.relations.remove(&id) else {
            return;
        };
        if let RelationKind::Association { .. } = rel.kind {
            let links: Vec<RelationId> = self
                .instance_links()
                .filter(|&(_, _, _, p)| p == id)
                .map(|(r, ..)| r)
                .collect();
            for r in links {
                self.relations.remove(&r);
                removed.insert(r.0);
            }
        }
        removed.insert(id.0);
    }

    /// Services whose pilot relation or referenced elements vanished.
    fn drop_dangling_services(&mut self, removed: &mut BTreeSet<u64>) {
        let dangling: Vec<ServiceId> = self
            .services
            .values()
            .filter(|s| {
                !self
                    .pilots()
                    .any(|(_, p, t, _)| p == s.pilot && t == s.target)
                    || s.instructions
                        .iter()
                        .filter_map(|i| i.references())
                        .any(|r| self.element_kind(r).is_none())
            })
            .map(|s| s.id)
            .collect();
        for s in dangling {
            self.services.remove(&s);
            removed.insert(s.0);
        }
    }

    // ---- integrity ---------------------------------------------------------

    /// Full referential-integrity and invariant scan.
    pub fn check_integrity(&self) -> Result<()> {
        let fail = |msg: String| Err(ModelError::Integrity(msg));
        let mut seen = BTreeSet::new();
        let ids = self
            .nodes
            .keys()
            .map(|i| i.0)
            .chain(self.circles.keys().map(|i| i.0))
            .chain(self.stars.keys().map(|i| i.0))
            .chain(self.arcs.keys().map(|i| i.0))
            .chain(self.relations.keys().map(|i| i.0))
            .chain(self.services.keys().map(|i| i.0));
        for id in ids {
            if !seen.insert(id) {
                return fail(format!("id {id} used by two elements"));
            }
            if id == 0 || id >= self.next_id {
                return fail(format!("id {id} outside allocated range"));
            }
        }

        for node in self.nodes.values() {
            if node.name.is_empty() {
                return fail(format!("node {} has an empty name", node.id));
            }
            if let Some(f) = node.frame {
                if !self.nodes.contains_key(&f) || f == node.id {
                    return fail(format!("node {} has invalid frame {f}", node.id));
                }
            }
            let mut names = BTreeSet::new();
            for c in &node.circles {
                let Some(circle) = self.circles.get(c) else {
                    return fail(format!("node {} lists missing circle {c}", node.id));
                };
                if circle.owner != node.id {
                    return fail(format!("circle {c} listed by non-owner {}", node.id));
                }
                if !names.insert(circle.name.as_str()) {
                    return fail(format!("node {} has duplicate circle names", node.id));
                }
            }
        }

        for circle in self.circles.values() {
            let Some(owner) = self.nodes.get(&circle.owner) else {
                return fail(format!("circle {} has missing owner", circle.id));
            };
            if !owner.circles.contains(&circle.id) {
                return fail(format!("circle {} not listed by its owner", circle.id));
            }
            let mut identities = BTreeSet::new();
            for s in &circle.stars {
                let Some(star) = self.stars.get(s) else {
                    return fail(format!("circle {} lists missing star {s}", circle.id));
                };
                if star.circle != circle.id {
                    return fail(format!("star {s} listed by foreign circle {}", circle.id));
                }
                if !identities.insert(star.identity) {
                    return fail(format!(
                        "identity {} placed twice in circle {}",
                        star.identity, circle.id
                    ));
                }
            }
        }

        for star in self.stars.values() {
            if !self.nodes.contains_key(&NodeId::from(star.identity)) {
                return fail(format!("star {} has missing identity", star.id));
            }
            match self.circles.get(&star.circle) {
                Some(c) if c.stars.contains(&star.id) => {}
                _ => return fail(format!("star {} has missing circle", star.id)),
            }
        }

        let mut dot_homes = BTreeSet::new();
        for arc in self.arcs.values() {
            if arc.from == arc.to {
                return fail(format!("arc {} is a self-loop", arc.id));
            }
            for n in [arc.from, arc.to] {
                match self.nodes.get(&n) {
                    Some(node) if !node.is_dot() => {}
                    _ => return fail(format!("arc {} has invalid endpoint {n}", arc.id)),
                }
            }
            for (i, d) in arc.dots.iter().enumerate() {
                let Some(kind) = self.nodes.get(d).and_then(|n| n.dot_kind) else {
                    return fail(format!("arc {} lists non-dot {d}", arc.id));
                };
                if kind == DotKind::Gate && i + 1 != arc.dots.len() {
                    return fail(format!("arc {} has a gate before other dots", arc.id));
                }
                if !dot_homes.insert(*d) {
                    return fail(format!("dot {d} sits on more than one arc"));
                }
            }
        }

        let mut roots = BTreeSet::new();
        for rel in self.relations.values() {
            match rel.kind {
                RelationKind::Association { a, b } => {
                    if !self.circles.contains_key(&a) || !self.circles.contains_key(&b) {
                        return fail(format!("association {} is dangling", rel.id));
                    }
                }
                RelationKind::Pilot {
                    pilot,
                    target,
                    root,
                } => {
                    if !self.nodes.contains_key(&NodeId::from(pilot))
                        || !self.nodes.contains_key(&target)
                    {
                        return fail(format!("pilot relation {} is dangling", rel.id));
                    }
                    if root && !roots.insert(target) {
                        return fail(format!("node {target} has two root pilots"));
                    }
                }
                RelationKind::FlowBinding { circle, arc } => {
                    if !self.circles.contains_key(&circle) || !self.arcs.contains_key(&arc) {
                        return fail(format!("flow binding {} is dangling", rel.id));
                    }
                }
                RelationKind::InstanceLink { a, b, parent } => {
                    let (Some(sa), Some(sb)) = (self.stars.get(&a), self.stars.get(&b)) else {
                        return fail(format!("instance link {} is dangling", rel.id));
                    };
                    let Some(RelationKind::Association { a: ca, b: cb }) =
                        self.relations.get(&parent).map(|p| p.kind)
                    else {
                        return fail(format!(
                            "instance link {} has no parent association",
                            rel.id
                        ));
                    };
                    let ok = (sa.circle == ca && sb.circle == cb)
                        || (sa.circle == cb && sb.circle == ca);
                    if !ok {
                        return fail(format!(
                            "instance link {} leaves the circles of association {parent}",
                            rel.id
                        ));
                    }
                }
            }
        }

        for service in self.services.values() {
            if !self
                .pilots()
                .any(|(_, p, t, _)| p == service.pilot && t == service.target)
            {
                return fail(format!("service {} has no pilot relation", service.id));
            }
            for r in service.instructions.iter().filter_map(|i| i.references()) {
                if self.element_kind(r).is_none() {
                    return fail(format!("service {} references missing {r}", service.id));
                }
            }
        }
        Ok(())
    }
}
