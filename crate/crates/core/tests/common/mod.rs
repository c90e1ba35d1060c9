//! Random model generation shared by the integration tests.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use topoflow::model::{ArcId, CircleId, DotKind, Model, NodeId, RelationId, RelationKind};
use topoflow::pilots::{bind_service, Instruction};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const KINDS: [DotKind; 3] = [DotKind::Duplicate, DotKind::Label, DotKind::Gate];

/// A random valid model with at most `max_nodes` plain nodes, plus dots.
///
/// Everything the format can express shows up with some probability: circles,
/// stars in FIFO order that differs from id order, arcs with dot lists,
/// attributes, frames, all four relation kinds, multiplicities and services
/// using every instruction.
pub fn random_model(r: &mut ChaCha8Rng, max_nodes: usize) -> Model {
    let mut m = Model::new();
    let n = r.gen_range(1..=max_nodes);
    let nodes: Vec<NodeId> = (0..n)
        .map(|i| m.add_node(&format!("n{i}"), None).unwrap())
        .collect();

    for &node in &nodes {
        if r.gen_bool(0.3) {
            m.set_attribute(node, "k", &format!("v{}", r.gen_range(0..9)))
                .unwrap();
        }
    }

    let mut circles: Vec<CircleId> = Vec::new();
    for &node in &nodes {
        for c in 0..r.gen_range(0..3) {
            circles.push(m.add_circle(node, &format!("c{c}")).unwrap());
        }
    }

    // Placements in shuffled order so queue order and id order disagree.
    let mut pairs: Vec<(NodeId, CircleId)> = Vec::new();
    for &node in &nodes {
        for &c in &circles {
            if r.gen_bool(0.15) {
                pairs.push((node, c));
            }
        }
    }
    pairs.shuffle(r);
    for (node, c) in pairs {
        m.place_star(node.into(), c).unwrap();
    }

    let mut arcs: Vec<ArcId> = Vec::new();
    if n > 1 {
        for _ in 0..r.gen_range(0..=n + 2) {
            let a = *nodes.choose(r).unwrap();
            let b = *nodes.choose(r).unwrap();
            if a == b {
                continue;
            }
            let arc = m.connect_arc(a, b).unwrap();
            arcs.push(arc);
            let mut gate_done = false;
            for d in 0..r.gen_range(0..3) {
                let kind = *KINDS.choose(r).unwrap();
                if gate_done {
                    break;
                }
                let dot = m.add_node(&format!("d{}-{d}", arc.0), Some(kind)).unwrap();
                m.push_dot(arc, dot).unwrap();
                gate_done = kind == DotKind::Gate;
                if r.gen_bool(0.2) {
                    m.add_circle(dot, "contents").unwrap();
                }
            }
        }
    }

    if r.gen_bool(0.3) && n > 2 {
        let frame = nodes[0];
        for &node in &nodes[1..] {
            if r.gen_bool(0.5) {
                m.set_frame(node, Some(frame)).unwrap();
            }
        }
    }

    let mut assocs: Vec<RelationId> = Vec::new();
    if circles.len() > 1 {
        for _ in 0..r.gen_range(0..3) {
            let a = *circles.choose(r).unwrap();
            let b = *circles.choose(r).unwrap();
            let mult = r.gen_bool(0.3).then_some("0..*");
            if let Ok(rel) = m.add_relation(RelationKind::Association { a, b }, mult) {
                assocs.push(rel);
            }
        }
    }

    for &assoc in &assocs {
        let RelationKind::Association { a, b } = m.relation(assoc).unwrap().kind else {
            unreachable!()
        };
        let sa = m.circle(a).unwrap().stars.clone();
        let sb = m.circle(b).unwrap().stars.clone();
        for _ in 0..r.gen_range(0..3) {
            if let (Some(x), Some(y)) = (sa.choose(r), sb.choose(r)) {
                let _ = m.instantiate_association(assoc, *x, *y);
            }
        }
    }

    // At most one binding per arc so the model stays simulable.
    let bindable: Vec<CircleId> = m
        .circles()
        .filter(|c| !m.node(c.owner).unwrap().is_dot())
        .map(|c| c.id)
        .collect();
    for &arc in &arcs {
        if !bindable.is_empty() && r.gen_bool(0.4) {
            let c = *bindable.choose(r).unwrap();
            m.add_flow_binding(c, arc).unwrap();
        }
    }

    for _ in 0..r.gen_range(0..3) {
        let pilot = *nodes.choose(r).unwrap();
        let target = *nodes.choose(r).unwrap();
        let root = r.gen_bool(0.4);
        if m.add_pilot(pilot.into(), target, root).is_err() {
            continue;
        }
        if r.gen_bool(0.8) {
            let service = random_service(r, &m, target, &assocs, &circles);
            bind_service(&mut m, pilot.into(), target, service).unwrap();
        }
    }
    m.check_integrity().unwrap();
    m
}

fn random_service(
    r: &mut ChaCha8Rng,
    m: &Model,
    target: NodeId,
    assocs: &[RelationId],
    circles: &[CircleId],
) -> Vec<Instruction> {
    let mut out = Vec::new();
    let mut linked = false;
    for _ in 0..r.gen_range(0..4) {
        let ins = match r.gen_range(0..5) {
            0 => Instruction::Wait {
                ticks: r.gen_range(0..3),
            },
            1 if !assocs.is_empty() => {
                linked = true;
                Instruction::Link {
                    association: *assocs.choose(r).unwrap(),
                    selector: ["*", "n1*", "n?", "zz"].choose(r).unwrap().to_string(),
                }
            }
            2 if linked && !circles.is_empty() => Instruction::DuplicateTo {
                circle: *circles.choose(r).unwrap(),
            },
            3 if !circles.is_empty() => Instruction::PlaceIn {
                circle: *circles.choose(r).unwrap(),
            },
            _ => Instruction::Emit {
                tag: format!("t<{}>&\"", r.gen_range(0..5)),
            },
        };
        out.push(ins);
    }
    let outgoing: Vec<ArcId> = m.arcs_from(target).map(|a| a.id).collect();
    match r.gen_range(0..4) {
        0 => out.push(Instruction::Forward),
        1 if !outgoing.is_empty() => out.push(Instruction::Route {
            arc: *outgoing.choose(r).unwrap(),
        }),
        2 => out.push(Instruction::Destroy),
        _ => {}
    }
    if out.is_empty() {
        out.push(Instruction::Forward);
    }
    out
}

/// A random DAG over at most `max_nodes` nodes: arcs only go from lower to
/// higher index, some arcs carry dots, some isolated nodes own associated
/// circles.
pub fn random_dag(r: &mut ChaCha8Rng, max_nodes: usize) -> Model {
    let mut m = Model::new();
    let n = r.gen_range(0..=max_nodes);
    let nodes: Vec<NodeId> = (0..n)
        .map(|i| m.add_node(&format!("v{i}"), None).unwrap())
        .collect();
    for i in 0..n {
        for j in i + 1..n {
            if r.gen_bool(0.25) {
                let arc = m.connect_arc(nodes[i], nodes[j]).unwrap();
                if r.gen_bool(0.3) {
                    let kind = *KINDS.choose(r).unwrap();
                    let d = m.add_node(&format!("dot{i}-{j}"), Some(kind)).unwrap();
                    m.push_dot(arc, d).unwrap();
                }
            }
        }
    }
    let mut circles = Vec::new();
    for &node in &nodes {
        if r.gen_bool(0.4) {
            circles.push(m.add_circle(node, "set").unwrap());
        }
    }
    if circles.len() > 1 {
        for _ in 0..r.gen_range(0..3) {
            let a = *circles.choose(r).unwrap();
            let b = *circles.choose(r).unwrap();
            let _ = m.add_association(a, b);
        }
    }
    m
}

/// Random hide globs over the model's names and ids.
pub fn random_filter(r: &mut ChaCha8Rng, m: &Model) -> Vec<String> {
    let mut names: Vec<String> = m.nodes().map(|n| n.name.clone()).collect();
    names.extend(m.circles().map(|c| c.name.clone()));
    names.extend((1..m.next_id()).map(|i| i.to_string()));
    names.extend(["n1*".to_string(), "d*".into(), "c?".into(), "*".into()]);
    (0..r.gen_range(0..4))
        .map(|_| names.choose(r).unwrap().clone())
        .collect()
}
