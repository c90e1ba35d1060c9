use super::*;
use crate::fixtures;
use crate::model::{DotKind, Model, RelationKind};

fn id(m: &Model, name: &str) -> NodeId {
    m.node_named(name)
        .unwrap_or_else(|| panic!("no node {name}"))
}

#[test]
fn meeting_chain_kinds() {
    let m = fixtures::meeting_chain();
    let c = classify(&m);
    let kinds: Vec<NodeKind> = fixtures::MEETING_STAGES
        .iter()
        .map(|s| c.kind(id(&m, s)).unwrap())
        .collect();
    use NodeKind::*;
    assert_eq!(kinds, [Start, Activity, Activity, Activity, Final]);
}

#[test]
fn empty_model_classifies_to_nothing() {
    assert!(classify(&Model::new()).is_empty());
    assert!(processes(&Model::new()).is_empty());
    assert!(resolve_flows(&Model::new()).unwrap().is_empty());
}

#[test]
fn isolated_nodes_are_objects_or_classes() {
    let m = fixtures::association_instances();
    let c = classify(&m);
    assert_eq!(c.kind(id(&m, "X")), Some(NodeKind::Class));
    assert_eq!(c.kind(id(&m, "x1")), Some(NodeKind::Object));
    let m = fixtures::balls();
    assert_eq!(classify(&m).kind(id(&m, "Balls")), Some(NodeKind::Object));
}

#[test]
fn dots_classify_as_dots() {
    let m = fixtures::gate_transition();
    let c = classify(&m);
    assert_eq!(c.kind(id(&m, "end-gate")), Some(NodeKind::Dot));
    assert!(c.in_process.contains_key(&id(&m, "end-gate")));
}

#[test]
fn classification_follows_current_topology() {
    let mut m = fixtures::association_instances();
    let x = id(&m, "X");
    let y = id(&m, "Y");
    m.connect_arc(x, y).unwrap();
    let c = classify(&m);
    assert_eq!(c.kind(x), Some(NodeKind::Start));
    assert_eq!(c.kind(y), Some(NodeKind::Final));
    assert_eq!(classify(&m), c);
}

#[test]
fn education_has_two_processes() {
    let m = fixtures::education_evaluation();
    let ps = processes(&m);
    assert_eq!(ps.len(), 2);
    let main = ps
        .iter()
        .find(|p| p.members.contains(&id(&m, "Start evaluation")))
        .unwrap();
    let external = ps
        .iter()
        .find(|p| p.members.contains(&id(&m, "Define directives")))
        .unwrap();
    assert!(main.members.is_disjoint(&external.members));
    assert_eq!(main.root_pilot, Some(id(&m, "FAC").into()));
    assert_eq!(external.root_pilot, Some(id(&m, "HQ").into()));
    assert_eq!(main.enclosing, Some(id(&m, "Education evaluation")));
}

#[test]
fn disjoint_chains_give_disjoint_processes() {
    let mut m = Model::new();
    let n: Vec<NodeId> = (0..6)
        .map(|i| m.add_node(&format!("n{i}"), None).unwrap())
        .collect();
    m.connect_arc(n[0], n[1]).unwrap();
    m.connect_arc(n[1], n[2]).unwrap();
    m.connect_arc(n[4], n[3]).unwrap();
    m.connect_arc(n[5], n[4]).unwrap();
    let ps = processes(&m);
    assert_eq!(ps.len(), 2);
    assert_eq!(ps[0].members, n[..3].iter().copied().collect());
    assert_eq!(ps[1].members, n[3..].iter().copied().collect());
    assert_eq!(ps[0].id, ProcessId(n[0].0));
    assert_eq!(ps[1].starts, vec![n[5]]);
    assert_eq!(ps[1].finals, vec![n[3]]);
}

#[test]
fn flows_resolve_per_arc() {
    let m = fixtures::education_evaluation();
    let flows = resolve_flows(&m).unwrap();
    let start = id(&m, "Start evaluation");
    let entry = m.arcs_from(start).next().unwrap().id;
    let ev = m.circle_named(id(&m, "Evaluation"), "Evaluation").unwrap();
    assert_eq!(flows[&entry], ev);

    let m = fixtures::studying();
    let flows = resolve_flows(&m).unwrap();
    let person = m.circle_named(id(&m, "Person"), "Person").unwrap();
    let entry = m.arcs_into(id(&m, "Studying")).next().unwrap().id;
    assert_eq!(flows[&entry], person);
}

#[test]
fn two_bindings_on_one_arc_conflict() {
    let mut m = fixtures::plain_transition();
    let arc = m.arcs().next().unwrap().id;
    let other = m.add_node("Other", None).unwrap();
    let c = m.add_circle(other, "Other").unwrap();
    m.add_flow_binding(c, arc).unwrap();
    let err = resolve_flows(&m).unwrap_err();
    assert_eq!(err.arc, arc);
    assert_eq!(err.bindings.len(), 2);
}

#[test]
fn responsible_pilot_delegation_and_default() {
    let m = fixtures::education_evaluation();
    assert_eq!(
        responsible_pilot(&m, id(&m, "Distribution of forms")).unwrap(),
        Some(id(&m, "Teacher").into())
    );
    assert_eq!(
        responsible_pilot(&m, id(&m, "Definition of evaluation form")).unwrap(),
        Some(id(&m, "FAC").into())
    );
    assert_eq!(responsible_pilot(&m, id(&m, "Person")).unwrap(), None);
    assert!(responsible_pilot(&m, NodeId(9999)).is_err());
}

#[test]
fn object_view_has_no_arcs() {
    let m = fixtures::education_evaluation();
    let v = project(&m, ViewKind::Object, &ViewFilter::default());
    assert!(v.arcs.is_empty());
    assert!(v.stars.is_empty());
    assert!(v.nodes.contains(&id(&m, "Person")));
    assert!(!v.nodes.contains(&id(&m, "Distribution of forms")));
}

#[test]
fn process_view_drops_object_association_web() {
    let m = fixtures::education_evaluation();
    let lesson = m.circle_named(id(&m, "Lesson"), "Lesson").unwrap();
    let person = m.circle_named(id(&m, "Person"), "Person").unwrap();
    let web = m
        .associations()
        .find(|&(_, a, b)| (a, b) == (lesson, person) || (a, b) == (person, lesson))
        .map(|(r, ..)| r)
        .unwrap();
    let process = project(&m, ViewKind::Process, &ViewFilter::default());
    let merged = project(&m, ViewKind::Merged, &ViewFilter::default());
    assert!(!process.relations.contains(&web));
    assert!(merged.relations.contains(&web));
    assert!(process.nodes.contains(&id(&m, "directives-dot")));
    let pilots: Vec<_> = m
        .relations()
        .filter(|r| matches!(r.kind, RelationKind::Pilot { .. }))
        .map(|r| r.id)
        .collect();
    assert!(pilots.iter().all(|p| process.relations.contains(p)));
}

#[test]
fn merged_is_union_on_fixtures() {
    for (stem, m) in fixtures::all() {
        for filter in [ViewFilter::default(), ViewFilter::default().with_stars()] {
            let o = project(&m, ViewKind::Object, &filter).elements();
            let p = project(&m, ViewKind::Process, &filter).elements();
            let g = project(&m, ViewKind::Merged, &filter).elements();
            assert_eq!(g, &o | &p, "{stem}");
        }
    }
}

#[test]
fn empty_projection() {
    assert!(project(&Model::new(), ViewKind::Merged, &ViewFilter::default()).is_empty());
}

#[test]
fn highlight_marks_one_stage() {
    let m = fixtures::meeting();
    let stage4 = id(&m, fixtures::MEETING_STAGES[3]);
    let f = ViewFilter::default().with_stars().highlighting(stage4);
    let v = project(&m, ViewKind::Merged, &f);
    assert_eq!(v.highlight, [stage4].into_iter().collect());
    let hidden = project(&m, ViewKind::Object, &f);
    assert!(hidden.highlight.is_empty());
}

#[test]
fn filter_hides_dependents() {
    let m = fixtures::meeting();
    let person = id(&m, "Person");
    let v = project(
        &m,
        ViewKind::Merged,
        &ViewFilter::default().with_stars().hiding("Person"),
    );
    assert!(!v.nodes.contains(&person));
    for c in &m.node(person).unwrap().circles {
        assert!(!v.circles.contains(c));
    }
    let shown = project(&m, ViewKind::Merged, &ViewFilter::default().with_stars());
    assert!(v.elements().is_subset(&shown.elements()));
    assert!(v.relations.len() < shown.relations.len());
}

#[test]
fn hidden_arc_takes_its_dots() {
    let m = fixtures::duplicate_transition();
    let arc = m.arcs().next().unwrap().id;
    let dot = id(&m, "member-dot");
    let v = project(
        &m,
        ViewKind::Process,
        &ViewFilter::default().hiding(&arc.0.to_string()),
    );
    assert!(!v.nodes.contains(&dot));
    assert_eq!(m.node(dot).unwrap().dot_kind, Some(DotKind::Duplicate));
}
