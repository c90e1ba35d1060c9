//! Structural validation of model documents.
//!
//! This checks the vocabulary on its own terms, without going through the
//! loader: element names, required and permitted attributes, value formats,
//! unique ids. `schema/topo.xsd` states the same rules for external tools.

use std::collections::BTreeSet;

use thiserror::Error;

/// The shipped XML Schema.
pub const SCHEMA_XSD: &str = include_str!("../../schema/topo.xsd");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct SchemaError {
    pub line: u32,
    pub message: String,
}

#[derive(Clone, Copy)]
enum Format {
    Id,
    Count,
    Text,
    Version,
    Enum(&'static [&'static str]),
}

struct Rule {
    element: &'static str,
    required: &'static [(&'static str, Format)],
    optional: &'static [(&'static str, Format)],
}

const DOT_KINDS: &[&str] = &["duplicate", "label", "gate"];
const RELATION_KINDS: &[&str] = &["association", "pilot", "flow_binding", "instance_link"];
const OPS: &[&str] = &[
    "WAIT",
    "LINK",
    "DUPLICATE_TO",
    "PLACE_IN",
    "EMIT",
    "ROUTE",
    "FORWARD",
    "DESTROY",
];

const TOP: &[Rule] = &[
    Rule {
        element: "node",
        required: &[("id", Format::Id), ("name", Format::Text)],
        optional: &[("dot-kind", Format::Enum(DOT_KINDS)), ("frame", Format::Id)],
    },
    Rule {
        element: "circle",
        required: &[
            ("id", Format::Id),
            ("owner", Format::Id),
            ("name", Format::Text),
        ],
        optional: &[],
    },
    Rule {
        element: "star",
        required: &[
            ("id", Format::Id),
            ("identity", Format::Id),
            ("circle", Format::Id),
        ],
        optional: &[],
    },
    Rule {
        element: "arc",
        required: &[("id", Format::Id), ("from", Format::Id), ("to", Format::Id)],
        optional: &[],
    },
    Rule {
        element: "dot-ref",
        required: &[
            ("arc", Format::Id),
            ("node", Format::Id),
            ("pos", Format::Count),
        ],
        optional: &[],
    },
    Rule {
        element: "relation",
        required: &[
            ("id", Format::Id),
            ("kind", Format::Enum(RELATION_KINDS)),
            ("a", Format::Id),
            ("b", Format::Id),
        ],
        optional: &[
            ("root", Format::Enum(&["true", "false"])),
            ("parent", Format::Id),
            ("multiplicity", Format::Text),
        ],
    },
    Rule {
        element: "service",
        required: &[
            ("id", Format::Id),
            ("pilot", Format::Id),
            ("target", Format::Id),
        ],
        optional: &[],
    },
];

const ATTR: Rule = Rule {
    element: "attr",
    required: &[("name", Format::Text), ("value", Format::Text)],
    optional: &[],
};

const INSTR: Rule = Rule {
    element: "instr",
    required: &[("op", Format::Enum(OPS))],
    optional: &[("arg", Format::Text), ("selector", Format::Text)],
};

const MODEL: Rule = Rule {
    element: "model",
    required: &[("version", Format::Version)],
    optional: &[("next-id", Format::Count)],
};

struct Checker<'a, 'i> {
    doc: &'a roxmltree::Document<'i>,
    errors: Vec<SchemaError>,
}

impl Checker<'_, '_> {
    fn fail(&mut self, node: &roxmltree::Node, message: String) {
        let line = self.doc.text_pos_at(node.range().start).row;
        self.errors.push(SchemaError { line, message });
    }

    fn attributes(&mut self, node: &roxmltree::Node, rule: &Rule) {
        for (name, format) in rule.required {
            match node.attribute(*name) {
                None => self.fail(node, format!("<{}> requires {name}", rule.element)),
                Some(v) => self.value(node, rule.element, name, v, *format),
            }
        }
        for (name, format) in rule.optional {
            if let Some(v) = node.attribute(*name) {
                self.value(node, rule.element, name, v, *format);
            }
        }
        for a in node.attributes() {
            let known = rule
                .required
                .iter()
                .chain(rule.optional)
                .any(|(n, _)| *n == a.name());
            if !known {
                self.fail(
                    node,
                    format!("<{}> does not allow attribute {}", rule.element, a.name()),
                );
            }
        }
    }

    fn value(&mut self, node: &roxmltree::Node, element: &str, name: &str, v: &str, f: Format) {
        let ok = match f {
            Format::Id => v.parse::<u64>().is_ok_and(|n| n > 0) && !v.starts_with('+'),
            Format::Count => v.parse::<u64>().is_ok() && !v.starts_with('+'),
            Format::Text => true,
            Format::Version => {
                let mut parts = v.split('.');
                let ok = parts.next().is_some_and(|p| p.parse::<u32>().is_ok())
                    && parts.next().is_some_and(|p| p.parse::<u32>().is_ok());
                ok && parts.next().is_none()
            }
            Format::Enum(options) => options.contains(&v),
        };
        if !ok {
            self.fail(node, format!("<{element}> {name}={v:?} is not valid"));
        }
        if name == "name" && element != "attr" && v.is_empty() {
            self.fail(node, format!("<{element}> name must not be empty"));
        }
    }

    fn leaf_children(&mut self, node: &roxmltree::Node, allowed: Option<&Rule>) {
        for child in node.children() {
            if child.is_text() && child.text().is_some_and(|t| !t.trim().is_empty()) {
                self.fail(
                    node,
                    format!("<{}> must not contain text", node.tag_name().name()),
                );
            }
            if !child.is_element() {
                continue;
            }
            match allowed {
                Some(rule) if child.tag_name().name() == rule.element => {
                    self.attributes(&child, rule);
                    self.leaf_children(&child, None);
                }
                _ => self.fail(
                    &child,
                    format!(
                        "<{}> is not allowed inside <{}>",
                        child.tag_name().name(),
                        node.tag_name().name()
                    ),
                ),
            }
        }
    }
}

/// Check `text` against the model vocabulary. Returns every violation found.
pub fn validate_schema(text: &str) -> Result<(), Vec<SchemaError>> {
    let doc = match roxmltree::Document::parse(text) {
        Ok(d) => d,
        Err(e) => {
            return Err(vec![SchemaError {
                line: e.pos().row,
                message: e.to_string(),
            }])
        }
    };
    let mut c = Checker {
        doc: &doc,
        errors: Vec::new(),
    };
    let root = doc.root_element();
    if root.tag_name().name() != "model" {
        c.fail(
            &root,
            format!("root must be <model>, found <{}>", root.tag_name().name()),
        );
        return Err(c.errors);
    }
    c.attributes(&root, &MODEL);
    let mut ids = BTreeSet::new();
    for child in root.children() {
        if child.is_text() && child.text().is_some_and(|t| !t.trim().is_empty()) {
            c.fail(&root, "<model> must not contain text".into());
        }
        if !child.is_element() {
            continue;
        }
        let name = child.tag_name().name();
        let Some(rule) = TOP.iter().find(|r| r.element == name) else {
            c.fail(&child, format!("unknown element <{name}>"));
            continue;
        };
        c.attributes(&child, rule);
        if let Some(id) = child.attribute("id").and_then(|v| v.parse::<u64>().ok()) {
            if !ids.insert(id) {
                c.fail(&child, format!("id {id} is used twice"));
            }
        }
        match name {
            "node" => c.leaf_children(&child, Some(&ATTR)),
            "service" => {
                if !child.children().any(|n| n.is_element()) {
                    c.fail(&child, "<service> needs at least one <instr>".into());
                }
                c.leaf_children(&child, Some(&INSTR));
            }
            _ => c.leaf_children(&child, None),
        }
        if name == "relation" {
            let kind = child.attribute("kind");
            if child.attribute("parent").is_some() != (kind == Some("instance_link")) {
                c.fail(&child, "parent is required exactly on instance_link".into());
            }
            if child.attribute("root").is_some() && kind != Some("pilot") {
                c.fail(&child, "root is only allowed on pilot relations".into());
            }
        }
    }
    if c.errors.is_empty() {
        Ok(())
    } else {
        Err(c.errors)
    }
}
