//! Classification, processes and the three projections of one model.

use topoflow::fixtures;
use topoflow::topology::{classify, processes, project, responsible_pilot, ViewFilter, ViewKind};

fn main() {
    let m = fixtures::education_evaluation();
    let kinds = classify(&m);
    for n in m.nodes().filter(|n| !n.is_dot()) {
        println!("{:<32} {}", n.name, kinds.kind(n.id).unwrap().as_str());
    }

    for p in processes(&m) {
        let root = p
            .root_pilot
            .and_then(|r| m.identity_node(r).ok())
            .map_or("-", |n| n.name.as_str());
        println!(
            "process {}: {} members, root pilot {root}",
            p.id.0,
            p.members.len()
        );
    }

    let df = m.node_named("Distribution of forms").unwrap();
    let pilot = responsible_pilot(&m, df).unwrap().unwrap();
    println!(
        "Distribution of forms answers to {}",
        m.identity_node(pilot).unwrap().name
    );

    let filter = ViewFilter::default().hiding("Lesson");
    for kind in [ViewKind::Object, ViewKind::Process, ViewKind::Merged] {
        let v = project(&m, kind, &filter);
        println!(
            "{:<8} nodes={} circles={} arcs={} relations={}",
            kind.as_str(),
            v.nodes.len(),
            v.circles.len(),
            v.arcs.len(),
            v.relations.len()
        );
    }
}
