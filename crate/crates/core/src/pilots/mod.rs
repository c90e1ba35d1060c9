//! Pilots and their services.
//!
//! A pilot is an identity declared responsible for a node through a pilot
//! relation. The service bound to `(pilot, node)` is the instruction list run
//! whenever a token enters that node. Activities without a pilot of their own
//! fall back to the service of their process's root pilot, and when nobody
//! is responsible at all the kernel uses a bare `FORWARD`.

mod exec;
mod service;

use thiserror::Error;

pub use service::{Instruction, Service};

pub(crate) use exec::{execute, Outcome};

use crate::model::{IdentityId, Model, ModelError, NodeId, RelationKind, ServiceId};
use crate::topology;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ServiceError {
    #[error("identity {pilot} is not a declared pilot of node {target}")]
    NoPilotRelation { pilot: IdentityId, target: NodeId },
    #[error("service has no instructions")]
    Empty,
    #[error("terminal instruction {op} at position {position} is not last")]
    TerminalNotLast { op: &'static str, position: usize },
    #[error("DUPLICATE_TO at position {0} has no preceding LINK selection")]
    NoSelection(usize),
    #[error("invalid selector {selector:?}: {reason}")]
    BadSelector { selector: String, reason: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Check an instruction list against the model without binding it.
pub fn validate(model: &Model, instructions: &[Instruction]) -> Result<(), ServiceError> {
    if instructions.is_empty() {
        return Err(ServiceError::Empty);
    }
    let mut linked = false;
    for (position, instr) in instructions.iter().enumerate() {
        if instr.is_terminal() && position + 1 != instructions.len() {
            return Err(ServiceError::TerminalNotLast {
                op: instr.op_name(),
                position,
            });
        }
        match instr {
            Instruction::Link {
                association,
                selector,
            } => {
                match model.relation(*association)?.kind {
                    RelationKind::Association { .. } => {}
                    _ => return Err(ModelError::NotAnAssociation(*association).into()),
                }
                glob::Pattern::new(selector).map_err(|e| ServiceError::BadSelector {
                    selector: selector.clone(),
                    reason: e.to_string(),
                })?;
                linked = true;
            }
            Instruction::DuplicateTo { circle } => {
                model.circle(*circle)?;
                if !linked {
                    return Err(ServiceError::NoSelection(position));
                }
            }
            Instruction::PlaceIn { circle } => {
                model.circle(*circle)?;
            }
            Instruction::Route { arc } => {
                model.arc(*arc)?;
            }
            Instruction::Wait { .. }
            | Instruction::Emit { .. }
            | Instruction::Forward
            | Instruction::Destroy => {}
        }
    }
    Ok(())
}

/// Attach `instructions` as the service `pilot` runs at `target`, replacing
/// any earlier service of that pilot there.
pub fn bind_service(
    model: &mut Model,
    pilot: IdentityId,
    target: NodeId,
    instructions: Vec<Instruction>,
) -> Result<ServiceId, ServiceError> {
    model.identity_node(pilot)?;
    model.node(target)?;
    if !model.pilots().any(|(_, p, t, _)| p == pilot && t == target) {
        return Err(ServiceError::NoPilotRelation { pilot, target });
    }
    validate(model, &instructions)?;
    if let Some(old) = service_of(model, pilot, target) {
        model.remove_service(old);
    }
    Ok(model.insert_service(pilot, target, instructions))
}

/// Detach the service of `pilot` at `target`; the pilot relation remains.
pub fn unbind_service(model: &mut Model, pilot: IdentityId, target: NodeId) -> Option<Service> {
    let id = service_of(model, pilot, target)?;
    model.remove_service(id)
}

pub fn service_of(model: &Model, pilot: IdentityId, target: NodeId) -> Option<ServiceId> {
    model
        .services()
        .find(|s| s.pilot == pilot && s.target == target)
        .map(|s| s.id)
}

/// The service that runs when a token enters `node`: the node's own pilot
/// service if one is bound, else the root pilot service of the enclosing
/// process. `None` means the built-in pass-through applies.
pub fn effective_service(model: &Model, node: NodeId) -> Option<&Service> {
    let own = model
        .pilots()
        .filter(|&(_, _, t, _)| t == node)
        .find_map(|(_, p, t, _)| service_of(model, p, t));
    if let Some(id) = own {
        return model.service(id).ok();
    }
    let (pilot, holder) = topology::process_root(model, node)?;
    service_of(model, pilot, holder).and_then(|id| model.service(id).ok())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Model;

    fn setup() -> (Model, IdentityId, NodeId) {
        let mut m = Model::new();
        let p = m.add_node("P", None).unwrap();
        let a = m.add_node("A", None).unwrap();
        let b = m.add_node("B", None).unwrap();
        m.connect_arc(a, b).unwrap();
        m.add_pilot(p.into(), a, false).unwrap();
        (m, p.into(), a)
    }

    #[test]
    fn bind_requires_pilot_relation() {
        let (mut m, p, _) = setup();
        let b = m.node_named("B").unwrap();
        let err = bind_service(&mut m, p, b, vec![Instruction::Forward]).unwrap_err();
        assert!(matches!(err, ServiceError::NoPilotRelation { .. }));
    }

    #[test]
    fn malformed_services_rejected() {
        let (mut m, p, a) = setup();
        assert_eq!(
            bind_service(&mut m, p, a, vec![]).unwrap_err(),
            ServiceError::Empty
        );
        let err = bind_service(
            &mut m,
            p,
            a,
            vec![Instruction::Forward, Instruction::Emit { tag: "x".into() }],
        )
        .unwrap_err();
        assert!(matches!(err, ServiceError::TerminalNotLast { .. }));
        let c = m.add_circle(a, "c").unwrap();
        let err =
            bind_service(&mut m, p, a, vec![Instruction::DuplicateTo { circle: c }]).unwrap_err();
        assert_eq!(err, ServiceError::NoSelection(0));
    }

    #[test]
    fn rebinding_replaces() {
        let (mut m, p, a) = setup();
        let first = bind_service(&mut m, p, a, vec![Instruction::Forward]).unwrap();
        let second = bind_service(&mut m, p, a, vec![Instruction::Destroy]).unwrap();
        assert_ne!(first, second);
        assert_eq!(m.services().count(), 1);
        assert_eq!(
            effective_service(&m, a).unwrap().instructions,
            vec![Instruction::Destroy]
        );
    }

    #[test]
    fn unbind_keeps_pilot() {
        let (mut m, p, a) = setup();
        bind_service(&mut m, p, a, vec![Instruction::Forward]).unwrap();
        assert!(unbind_service(&mut m, p, a).is_some());
        assert_eq!(m.pilots().count(), 1);
        assert!(effective_service(&m, a).is_none());
    }
}
