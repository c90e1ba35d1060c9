//! Merged object/process graph models.
//!
//! One graph holds both the static structure of a domain (nodes, the circles
//! that sort their instances, associations between circles) and the processes
//! those instances travel through (arcs between nodes, dots on arcs, pilots
//! responsible for activities). Which role a node plays is read off its arcs
//! by [`topology::classify`]; nothing is declared.
//!
//! ```
//! use topoflow::model::Model;
//! use topoflow::topology::{classify, NodeKind};
//!
//! let mut m = Model::new();
//! let a = m.add_node("Pre-registration", None).unwrap();
//! let b = m.add_node("Registration", None).unwrap();
//! m.connect_arc(a, b).unwrap();
//! let kinds = classify(&m);
//! assert_eq!(kinds.kind(a), Some(NodeKind::Start));
//! assert_eq!(kinds.kind(b), Some(NodeKind::Final));
//! ```

pub mod cli;
pub mod export;
pub mod fixtures;
pub mod kernel;
pub mod lint;
pub mod model;
pub mod persistence;
pub mod pilots;
pub mod server;
pub mod topology;
