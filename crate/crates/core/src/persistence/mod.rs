//! Canonical XML files (`.topo.xml`).
//!
//! ```xml
//! <?xml version="1.0" encoding="UTF-8"?>
//! <model version="1.0" next-id="4">
//!   <node id="1" name="Balls"/>
//!   <circle id="2" owner="1" name="blue"/>
//!   <star id="3" identity="1" circle="2"/>
//! </model>
//! ```
//!
//! Elements are grouped by kind (nodes, circles, stars, arcs, dot references,
//! relations, services) and sorted by id inside each group, attributes come
//! in a fixed order and lines end with LF, so equal models give equal bytes.
//! Layout and colours are not part of the model and never written.

mod schema;

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

pub use schema::{validate_schema, SchemaError, SCHEMA_XSD};

use crate::model::{
    Arc, ArcId, Circle, CircleId, DotKind, IdentityId, Model, ModelError, Node, NodeId, Relation,
    RelationId, RelationKind, ServiceId, Star, StarId,
};
use crate::pilots::{Instruction, Service};

pub const FORMAT_VERSION: &str = "1.0";
pub const MAJOR_VERSION: u32 = 1;
pub const MINOR_VERSION: u32 = 0;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("malformed XML: {0}")]
    Xml(#[from] roxmltree::Error),
    #[error("root element must be <model>, found <{0}>")]
    Root(String),
    #[error("unsupported format version {0}")]
    Version(String),
    #[error("<{element}> is missing attribute {attr:?}")]
    Missing { element: String, attr: &'static str },
    #[error("<{element}> attribute {attr:?} has invalid value {value:?}")]
    Invalid {
        element: String,
        attr: &'static str,
        value: String,
    },
    #[error("<{element}> {attr}={id} refers to no element")]
    Dangling {
        element: String,
        attr: &'static str,
        id: u64,
    },
    #[error("id {0} is used twice")]
    DuplicateId(u64),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            '\t' => out.push_str("&#9;"),
            c => out.push(c),
        }
    }
    out
}

/// Serialize `model` into its canonical document.
pub fn save_xml(model: &Model) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = write!(
        out,
        "<model version=\"{FORMAT_VERSION}\" next-id=\"{}\"",
        model.next_id()
    );
    if model.is_empty() {
        out.push_str("/>\n");
        return out;
    }
    out.push_str(">\n");
    for n in model.nodes() {
        let _ = write!(out, "  <node id=\"{}\" name=\"{}\"", n.id, escape(&n.name));
        if let Some(k) = n.dot_kind {
            let _ = write!(out, " dot-kind=\"{}\"", k.as_str());
        }
        if let Some(f) = n.frame {
            let _ = write!(out, " frame=\"{f}\"");
        }
        if n.attributes.is_empty() {
            out.push_str("/>\n");
        } else {
            out.push_str(">\n");
            for (k, v) in &n.attributes {
                let _ = writeln!(
                    out,
                    "    <attr name=\"{}\" value=\"{}\"/>",
                    escape(k),
                    escape(v)
                );
            }
            out.push_str("  </node>\n");
        }
    }
    for c in model.circles() {
        let _ = writeln!(
            out,
            "  <circle id=\"{}\" owner=\"{}\" name=\"{}\"/>",
            c.id,
            c.owner,
            escape(&c.name)
        );
    }
    for s in model.stars() {
        let _ = writeln!(
            out,
            "  <star id=\"{}\" identity=\"{}\" circle=\"{}\"/>",
            s.id, s.identity, s.circle
        );
    }
    for a in model.arcs() {
        let _ = writeln!(
            out,
            "  <arc id=\"{}\" from=\"{}\" to=\"{}\"/>",
            a.id, a.from, a.to
        );
    }
    for a in model.arcs() {
        for (pos, d) in a.dots.iter().enumerate() {
            let _ = writeln!(
                out,
                "  <dot-ref arc=\"{}\" node=\"{d}\" pos=\"{pos}\"/>",
                a.id
            );
        }
    }
    for r in model.relations() {
        let _ = write!(
            out,
            "  <relation id=\"{}\" kind=\"{}\"",
            r.id,
            r.kind.name()
        );
        match r.kind {
            RelationKind::Association { a, b } => {
                let _ = write!(out, " a=\"{a}\" b=\"{b}\"");
            }
            RelationKind::Pilot {
                pilot,
                target,
                root,
            } => {
                let _ = write!(out, " a=\"{pilot}\" b=\"{target}\"");
                if root {
                    out.push_str(" root=\"true\"");
                }
            }
            RelationKind::FlowBinding { circle, arc } => {
                let _ = write!(out, " a=\"{circle}\" b=\"{arc}\"");
            }
            RelationKind::InstanceLink { a, b, parent } => {
                let _ = write!(out, " a=\"{a}\" b=\"{b}\" parent=\"{parent}\"");
            }
        }
        if let Some(m) = &r.multiplicity {
            let _ = write!(out, " multiplicity=\"{}\"", escape(m));
        }
        out.push_str("/>\n");
    }
    for s in model.services() {
        let _ = writeln!(
            out,
            "  <service id=\"{}\" pilot=\"{}\" target=\"{}\">",
            s.id, s.pilot, s.target
        );
        for i in &s.instructions {
            let _ = write!(out, "    <instr op=\"{}\"", i.op_name());
            match i {
                Instruction::Wait { ticks } => {
                    let _ = write!(out, " arg=\"{ticks}\"");
                }
                Instruction::Link {
                    association,
                    selector,
                } => {
                    let _ = write!(
                        out,
                        " arg=\"{association}\" selector=\"{}\"",
                        escape(selector)
                    );
                }
                Instruction::DuplicateTo { circle } | Instruction::PlaceIn { circle } => {
                    let _ = write!(out, " arg=\"{circle}\"");
                }
                Instruction::Emit { tag } => {
                    let _ = write!(out, " arg=\"{}\"", escape(tag));
                }
                Instruction::Route { arc } => {
                    let _ = write!(out, " arg=\"{arc}\"");
                }
                Instruction::Forward | Instruction::Destroy => {}
            }
            out.push_str("/>\n");
        }
        out.push_str("  </service>\n");
    }
    out.push_str("</model>\n");
    out
}

/// Parse a document, discarding warnings.
pub fn load_xml(text: &str) -> Result<Model, LoadError> {
    load_xml_with_warnings(text).map(|(m, _)| m)
}

/// Parse a document and report what was skipped.
///
/// Elements unknown to this version are skipped with a warning when the file
/// declares a newer minor version and rejected otherwise. A missing
/// `version` attribute reads as the current version.
pub fn load_xml_with_warnings(text: &str) -> Result<(Model, Vec<String>), LoadError> {
    let doc = roxmltree::Document::parse(text)?;
    let root = doc.root_element();
    if root.tag_name().name() != "model" {
        return Err(LoadError::Root(root.tag_name().name().to_owned()));
    }
    let version = root.attribute("version").unwrap_or(FORMAT_VERSION);
    let (major, minor) =
        parse_version(version).ok_or_else(|| LoadError::Version(version.into()))?;
    if major != MAJOR_VERSION {
        return Err(LoadError::Version(version.into()));
    }
    let newer = minor > MINOR_VERSION;

    let mut warnings = Vec::new();
    let mut l = Loader {
        model: Model::new(),
        warnings: &mut warnings,
        seen: std::collections::BTreeSet::new(),
    };
    let elements: Vec<roxmltree::Node> = root.children().filter(|c| c.is_element()).collect();
    // Dot references and children of services are resolved after every
    // element is known, so the passes follow the dependency order.
    for pass in 0..7 {
        for e in &elements {
            let name = e.tag_name().name();
            let wanted = match name {
                "node" => 0,
                "circle" => 1,
                "star" => 2,
                "arc" => 3,
                "dot-ref" => 4,
                "relation" => 5,
                "service" => 6,
                other => {
                    if pass == 0 {
                        if newer {
                            let msg = format!("skipped unknown element <{other}>");
                            log::warn!("{msg}");
                            l.warnings.push(msg);
                        } else {
                            return Err(LoadError::Invalid {
                                element: "model".into(),
                                attr: "child",
                                value: other.to_owned(),
                            });
                        }
                    }
                    continue;
                }
            };
            if wanted == pass {
                l.element(e, newer)?;
            }
        }
    }
    if let Some(next) = root.attribute("next-id") {
        let next = next.parse::<u64>().map_err(|_| LoadError::Invalid {
            element: "model".into(),
            attr: "next-id",
            value: next.to_owned(),
        })?;
        l.model.set_next_id(next);
    }
    let model = l.model;
    model.check_integrity()?;
    Ok((model, warnings))
}

fn parse_version(v: &str) -> Option<(u32, u32)> {
    let (major, minor) = v.split_once('.').unwrap_or((v, "0"));
    Some((major.parse().ok()?, minor.parse().ok()?))
}

struct Loader<'w> {
    model: Model,
    warnings: &'w mut Vec<String>,
    seen: std::collections::BTreeSet<u64>,
}

fn attr<'a>(e: &roxmltree::Node<'a, '_>, name: &'static str) -> Result<&'a str, LoadError> {
    e.attribute(name).ok_or_else(|| LoadError::Missing {
        element: e.tag_name().name().to_owned(),
        attr: name,
    })
}

fn num(e: &roxmltree::Node, name: &'static str) -> Result<u64, LoadError> {
    let v = attr(e, name)?;
    v.parse().map_err(|_| LoadError::Invalid {
        element: e.tag_name().name().to_owned(),
        attr: name,
        value: v.to_owned(),
    })
}

fn dangling(e: &roxmltree::Node, attr: &'static str, id: u64) -> LoadError {
    LoadError::Dangling {
        element: e.tag_name().name().to_owned(),
        attr,
        id,
    }
}

impl Loader<'_> {
    fn fresh(&mut self, id: u64) -> Result<u64, LoadError> {
        if id == 0 || !self.seen.insert(id) {
            return Err(LoadError::DuplicateId(id));
        }
        Ok(id)
    }

    fn node_ref(&self, e: &roxmltree::Node, a: &'static str) -> Result<NodeId, LoadError> {
        let id = num(e, a)?;
        self.model
            .node(NodeId(id))
            .map(|n| n.id)
            .map_err(|_| dangling(e, a, id))
    }

    fn circle_ref(&self, e: &roxmltree::Node, a: &'static str) -> Result<CircleId, LoadError> {
        let id = num(e, a)?;
        self.model
            .circle(CircleId(id))
            .map(|c| c.id)
            .map_err(|_| dangling(e, a, id))
    }

    fn star_ref(&self, e: &roxmltree::Node, a: &'static str) -> Result<StarId, LoadError> {
        let id = num(e, a)?;
        self.model
            .star(StarId(id))
            .map(|s| s.id)
            .map_err(|_| dangling(e, a, id))
    }

    fn arc_ref(&self, e: &roxmltree::Node, a: &'static str) -> Result<ArcId, LoadError> {
        let id = num(e, a)?;
        self.model
            .arc(ArcId(id))
            .map(|x| x.id)
            .map_err(|_| dangling(e, a, id))
    }

    fn relation_ref(&self, e: &roxmltree::Node, a: &'static str) -> Result<RelationId, LoadError> {
        let id = num(e, a)?;
        self.model
            .relation(RelationId(id))
            .map(|r| r.id)
            .map_err(|_| dangling(e, a, id))
    }

    fn unknown_child(&mut self, parent: &str, child: &str, newer: bool) -> Result<(), LoadError> {
        if newer {
            let msg = format!("skipped unknown element <{child}> in <{parent}>");
            log::warn!("{msg}");
            self.warnings.push(msg);
            Ok(())
        } else {
            Err(LoadError::Invalid {
                element: parent.to_owned(),
                attr: "child",
                value: child.to_owned(),
            })
        }
    }

    fn element(&mut self, e: &roxmltree::Node, newer: bool) -> Result<(), LoadError> {
        match e.tag_name().name() {
            "node" => {
                let id = self.fresh(num(e, "id")?)?;
                let dot_kind = match e.attribute("dot-kind") {
                    None => None,
                    Some(v) => Some(DotKind::parse(v).ok_or_else(|| LoadError::Invalid {
                        element: "node".into(),
                        attr: "dot-kind",
                        value: v.to_owned(),
                    })?),
                };
                let frame = match e.attribute("frame") {
                    None => None,
                    Some(_) => Some(NodeId(num(e, "frame")?)),
                };
                let mut attributes = std::collections::BTreeMap::new();
                for child in e.children().filter(|c| c.is_element()) {
                    if child.tag_name().name() == "attr" {
                        attributes.insert(
                            attr(&child, "name")?.to_owned(),
                            attr(&child, "value")?.to_owned(),
                        );
                    } else {
                        self.unknown_child("node", child.tag_name().name(), newer)?;
                    }
                }
                self.model.raw_insert_node(Node {
                    id: NodeId(id),
                    name: attr(e, "name")?.to_owned(),
                    dot_kind,
                    circles: Vec::new(),
                    attributes,
                    frame,
                });
            }
            "circle" => {
                let id = self.fresh(num(e, "id")?)?;
                let owner = self.node_ref(e, "owner")?;
                self.model.raw_insert_circle(Circle {
                    id: CircleId(id),
                    owner,
                    name: attr(e, "name")?.to_owned(),
                    stars: Vec::new(),
                });
            }
            "star" => {
                let id = self.fresh(num(e, "id")?)?;
                let identity: IdentityId = self.node_ref(e, "identity")?.into();
                let circle = self.circle_ref(e, "circle")?;
                self.model.raw_insert_star(Star {
                    id: StarId(id),
                    identity,
                    circle,
                });
            }
            "arc" => {
                let id = self.fresh(num(e, "id")?)?;
                let from = self.node_ref(e, "from")?;
                let to = self.node_ref(e, "to")?;
                self.model.raw_insert_arc(Arc {
                    id: ArcId(id),
                    from,
                    to,
                    dots: Vec::new(),
                });
            }
            "dot-ref" => {
                let arc = self.arc_ref(e, "arc")?;
                let node = self.node_ref(e, "node")?;
                let pos = num(e, "pos")? as usize;
                let dots = &mut self.model.arc_mut(arc).expect("checked").dots;
                if pos > dots.len() {
                    return Err(LoadError::Invalid {
                        element: "dot-ref".into(),
                        attr: "pos",
                        value: pos.to_string(),
                    });
                }
                dots.insert(pos, node);
            }
            "relation" => {
                let id = self.fresh(num(e, "id")?)?;
                let kind = match attr(e, "kind")? {
                    "association" => RelationKind::Association {
                        a: self.circle_ref(e, "a")?,
                        b: self.circle_ref(e, "b")?,
                    },
                    "pilot" => RelationKind::Pilot {
                        pilot: self.node_ref(e, "a")?.into(),
                        target: self.node_ref(e, "b")?,
                        root: match e.attribute("root") {
                            None | Some("false") => false,
                            Some("true") => true,
                            Some(v) => {
                                return Err(LoadError::Invalid {
                                    element: "relation".into(),
                                    attr: "root",
                                    value: v.to_owned(),
                                })
                            }
                        },
                    },
                    "flow_binding" => RelationKind::FlowBinding {
                        circle: self.circle_ref(e, "a")?,
                        arc: self.arc_ref(e, "b")?,
                    },
                    "instance_link" => RelationKind::InstanceLink {
                        a: self.star_ref(e, "a")?,
                        b: self.star_ref(e, "b")?,
                        parent: self.relation_ref(e, "parent")?,
                    },
                    other => {
                        return Err(LoadError::Invalid {
                            element: "relation".into(),
                            attr: "kind",
                            value: other.to_owned(),
                        })
                    }
                };
                self.model.raw_insert_relation(Relation {
                    id: RelationId(id),
                    kind,
                    multiplicity: e.attribute("multiplicity").map(str::to_owned),
                });
            }
            "service" => {
                let id = self.fresh(num(e, "id")?)?;
                let pilot: IdentityId = self.node_ref(e, "pilot")?.into();
                let target = self.node_ref(e, "target")?;
                let mut instructions = Vec::new();
                for child in e.children().filter(|c| c.is_element()) {
                    if child.tag_name().name() != "instr" {
                        self.unknown_child("service", child.tag_name().name(), newer)?;
                        continue;
                    }
                    instructions.push(self.instruction(&child)?);
                }
                self.model.raw_insert_service(Service {
                    id: ServiceId(id),
                    pilot,
                    target,
                    instructions,
                });
            }
            _ => unreachable!("filtered by caller"),
        }
        Ok(())
    }

    fn instruction(&self, e: &roxmltree::Node) -> Result<Instruction, LoadError> {
        Ok(match attr(e, "op")? {
            "WAIT" => Instruction::Wait {
                ticks: num(e, "arg")?,
            },
            "LINK" => Instruction::Link {
                association: self.relation_ref(e, "arg")?,
                selector: attr(e, "selector")?.to_owned(),
            },
            "DUPLICATE_TO" => Instruction::DuplicateTo {
                circle: self.circle_ref(e, "arg")?,
            },
            "PLACE_IN" => Instruction::PlaceIn {
                circle: self.circle_ref(e, "arg")?,
            },
            "EMIT" => Instruction::Emit {
                tag: attr(e, "arg")?.to_owned(),
            },
            "ROUTE" => Instruction::Route {
                arc: self.arc_ref(e, "arg")?,
            },
            "FORWARD" => Instruction::Forward,
            "DESTROY" => Instruction::Destroy,
            other => {
                return Err(LoadError::Invalid {
                    element: "instr".into(),
                    attr: "op",
                    value: other.to_owned(),
                })
            }
        })
    }
}

pub fn load_file(path: impl AsRef<Path>) -> Result<Model, LoadError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_xml(&text)
}

pub fn save_file(model: &Model, path: impl AsRef<Path>) -> Result<(), LoadError> {
    let path = path.as_ref();
    std::fs::write(path, save_xml(model)).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests;
