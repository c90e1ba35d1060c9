use crate::kernel::{EventKind, KernelError, SimState, StarCause, TokenId, TraceEvent};
use crate::model::{ArcId, CircleId, IdentityId, NodeId, RelationId, RelationKind, StarId};

use super::{effective_service, Instruction};

/// What the kernel does with a token after its service ran.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Outcome {
    /// Cross `arc` after the default dwell plus `dwell` extra ticks.
    Next {
        arc: ArcId,
        dwell: u64,
    },
    Finished,
    /// The service could not complete; the token stops where it is.
    Parked(String),
}

fn event(kind: EventKind, token: TokenId, identity: IdentityId, node: NodeId) -> TraceEvent {
    let mut ev = TraceEvent::new(kind);
    ev.token = Some(token);
    ev.identity = Some(identity);
    ev.node = Some(node);
    ev
}

/// Run the effective service of `node` for `token`.
pub(crate) fn execute(
    sim: &mut SimState,
    node: NodeId,
    token: TokenId,
) -> Result<Outcome, KernelError> {
    let identity = sim.token(token).expect("token exists").identity;
    let (instructions, service) = match effective_service(sim.model(), node) {
        Some(s) => (s.instructions.clone(), Some((s.id, s.pilot))),
        None => (vec![Instruction::Forward], None),
    };
    if let Some((id, pilot)) = service {
        let mut ev = event(EventKind::ServiceExecuted, token, identity, node);
        ev.service = Some(id);
        ev.pilot = Some(pilot);
        sim.emit(ev);
    }

    let mut dwell = 0u64;
    let mut selection: Vec<IdentityId> = Vec::new();
    for instr in &instructions {
        match instr {
            Instruction::Wait { ticks } => dwell += ticks,
            Instruction::Emit { tag } => {
                let mut ev = event(EventKind::Emitted, token, identity, node);
                ev.tag = Some(tag.clone());
                sim.emit(ev);
            }
            Instruction::Link {
                association,
                selector,
            } => match link(sim, token, identity, node, *association, selector)? {
                Ok(selected) => selection = selected,
                Err(reason) => return Ok(Outcome::Parked(reason)),
            },
            Instruction::DuplicateTo { circle } => {
                for member in selection.clone() {
                    place(sim, token, member, node, *circle, StarCause::DuplicateTo)?;
                }
            }
            Instruction::PlaceIn { circle } => {
                place(sim, token, identity, node, *circle, StarCause::Place)?;
            }
            Instruction::Route { arc } => {
                let from = sim.model().arc(*arc)?.from;
                if from != node {
                    return Ok(Outcome::Parked(format!(
                        "route arc {arc} does not leave node {node}"
                    )));
                }
                return Ok(Outcome::Next { arc: *arc, dwell });
            }
            Instruction::Forward => return forward(sim, token, identity, node, dwell),
            Instruction::Destroy => {
                if let Some(star) = sim.token(token).and_then(|t| t.current_star) {
                    let circle = sim.model().star(star)?.circle;
                    sim.model_mut().remove_star(star)?;
                    let mut ev = event(EventKind::StarDestroyed, token, identity, node);
                    ev.circle = Some(circle);
                    ev.star = Some(star);
                    ev.cause = Some(StarCause::Destroy);
                    sim.emit(ev);
                }
                if let Some(t) = sim.token_mut(token) {
                    t.current_star = None;
                }
                sim.emit(event(EventKind::TokenFinished, token, identity, node));
                return Ok(Outcome::Finished);
            }
        }
    }
    // Services without a terminal instruction pass the token on.
    forward(sim, token, identity, node, dwell)
}

fn forward(
    sim: &mut SimState,
    token: TokenId,
    identity: IdentityId,
    node: NodeId,
    dwell: u64,
) -> Result<Outcome, KernelError> {
    let out: Vec<ArcId> = sim.model().arcs_from(node).map(|a| a.id).collect();
    match out.as_slice() {
        [] => {
            sim.emit(event(EventKind::TokenFinished, token, identity, node));
            Ok(Outcome::Finished)
        }
        [only] => Ok(Outcome::Next { arc: *only, dwell }),
        [first, ..] => {
            let mut ev = event(EventKind::BranchWarning, token, identity, node);
            ev.arc = Some(*first);
            ev.tag = Some(format!("{} outgoing arcs, taking the lowest id", out.len()));
            sim.emit(ev);
            Ok(Outcome::Next { arc: *first, dwell })
        }
    }
}

/// Place `identity` in `circle` unless it is already there.
fn place(
    sim: &mut SimState,
    token: TokenId,
    identity: IdentityId,
    node: NodeId,
    circle: CircleId,
    cause: StarCause,
) -> Result<(), KernelError> {
    if sim.model().star_in(identity, circle).is_some() {
        return Ok(());
    }
    let star = sim.model_mut().place_star(identity, circle)?;
    let mut ev = event(EventKind::StarCreated, token, identity, node);
    ev.circle = Some(circle);
    ev.star = Some(star);
    ev.cause = Some(cause);
    sim.emit(ev);
    Ok(())
}

/// Link the token's star to matching members of the far circle. The inner
/// `Err` carries a fault reason.
fn link(
    sim: &mut SimState,
    token: TokenId,
    identity: IdentityId,
    node: NodeId,
    association: RelationId,
    selector: &str,
) -> Result<Result<Vec<IdentityId>, String>, KernelError> {
    let (ca, cb) = match sim.model().relation(association)?.kind {
        RelationKind::Association { a, b } => (a, b),
        _ => return Ok(Err(format!("relation {association} is not an association"))),
    };
    let current = sim.token(token).and_then(|t| t.current_star);
    let model = sim.model();
    let anchor: Option<(StarId, CircleId)> = current
        .and_then(|s| model.star(s).ok())
        .filter(|s| s.circle == ca || s.circle == cb)
        .map(|s| (s.id, s.circle))
        .or_else(|| model.star_in(identity, ca).map(|s| (s, ca)))
        .or_else(|| model.star_in(identity, cb).map(|s| (s, cb)));
    // Without a placement on either side there is nothing to link.
    let Some((anchor, side)) = anchor else {
        return Ok(Ok(Vec::new()));
    };
    let far = if side == ca { cb } else { ca };
    let pattern = match glob::Pattern::new(selector) {
        Ok(p) => p,
        Err(e) => return Ok(Err(format!("bad selector {selector:?}: {e}"))),
    };
    let candidates: Vec<(IdentityId, StarId)> = model
        .circle(far)?
        .stars
        .iter()
        .map(|s| model.star(*s).map(|st| (st.identity, st.id)))
        .collect::<Result<_, _>>()?;
    let mut selected = Vec::new();
    for (member, star) in candidates {
        if member == identity || star == anchor {
            continue;
        }
        let name = &sim.model().identity_node(member)?.name;
        if !pattern.matches(name) {
            continue;
        }
        selected.push(member);
        let exists = sim.model().instance_links().any(|(_, x, y, p)| {
            p == association && ((x == anchor && y == star) || (x == star && y == anchor))
        });
        if exists {
            continue;
        }
        let rel = sim
            .model_mut()
            .instantiate_association(association, anchor, star)?;
        let mut ev = event(EventKind::LinkCreated, token, identity, node);
        ev.star = Some(anchor);
        ev.peer = Some(star);
        ev.relation = Some(rel);
        sim.emit(ev);
    }
    if selected.is_empty() {
        return Ok(Err(format!(
            "selector {selector:?} matched nobody in circle {far}"
        )));
    }
    Ok(Ok(selected))
}
