use super::*;
use crate::fixtures;
use crate::topology::{classify, project, ViewFilter};

fn dot_of(model: &Model, kind: ViewKind, filter: &ViewFilter) -> String {
    let view = project(model, kind, filter);
    to_dot(model, &view, &classify(model), &RenderStyle::default())
}

fn json_of(model: &Model, kind: ViewKind, filter: &ViewFilter) -> ViewJson {
    let view = project(model, kind, filter);
    view_json(model, &view, &classify(model))
}

#[test]
fn empty_view_is_header_only() {
    let dot = dot_of(&Model::new(), ViewKind::Merged, &ViewFilter::default());
    assert!(dot.starts_with("digraph \"merged\" {\n"));
    assert!(dot.ends_with("}\n"));
    assert!(!dot.contains("->"));
    assert!(!dot.contains("subgraph"));
}

#[test]
fn education_merged_dot_inventory() {
    let m = fixtures::education_evaluation();
    let dot = dot_of(&m, ViewKind::Merged, &ViewFilter::default());
    assert_eq!(dot.matches("subgraph cluster_").count(), 2);
    assert!(dot.contains("label=\"Education evaluation\""));
    assert!(dot.contains("label=\"Definition of directives\""));
    let fac = m.node_named("FAC").unwrap();
    let teacher = m.node_named("Teacher").unwrap();
    let frame = m.node_named("Education evaluation").unwrap();
    let df = m.node_named("Distribution of forms").unwrap();
    assert!(dot.contains(&format!(
        "n{} -> n{} [style=dashed, label=\"FAC (root)\"];",
        fac.0, frame.0
    )));
    assert!(dot.contains(&format!(
        "n{} -> n{} [style=dashed, label=\"Teacher\"];",
        teacher.0, df.0
    )));
    assert_eq!(dot.matches("style=bold];").count(), 3);
}

#[test]
fn dots_sit_between_arc_ends() {
    let m = fixtures::duplicate_transition();
    let dot = dot_of(&m, ViewKind::Process, &ViewFilter::default());
    let from = m.node_named("Studying").unwrap().0;
    let to = m.node_named("Student association").unwrap().0;
    let d = m.node_named("member-dot").unwrap().0;
    assert!(dot.contains(&format!("n{from} -> n{d} [arrowhead=none];")));
    assert!(dot.contains(&format!("n{d} -> n{to};")));
    assert!(dot.contains(&format!("n{d} [label=\"\", shape=circle")));
}

#[test]
fn gate_is_solid_square() {
    let m = fixtures::gate_transition();
    let dot = dot_of(&m, ViewKind::Process, &ViewFilter::default());
    assert!(dot.contains("style=filled, fillcolor=black"));
}

#[test]
fn activities_are_rounded_objects_square() {
    let m = fixtures::meeting();
    let dot = dot_of(&m, ViewKind::Merged, &ViewFilter::default());
    let sp = m.node_named("Select participants").unwrap().0;
    let person = m.node_named("Person").unwrap().0;
    assert!(dot.contains(&format!(
        "n{sp} [label=\"Select participants\", shape=box, style=rounded]"
    )));
    assert!(dot.contains(&format!("n{person} [label=\"Person\", shape=box]")));
}

#[test]
fn highlight_marks_exactly_one_stage() {
    let m = fixtures::meeting();
    let stage = m.node_named(fixtures::MEETING_STAGES[3]).unwrap();
    let filter = ViewFilter::default().with_stars().highlighting(stage);
    let dot = dot_of(&m, ViewKind::Merged, &filter);
    assert_eq!(dot.matches("penwidth=3").count(), 1);
    let line = dot.lines().find(|l| l.contains("penwidth=3")).unwrap();
    assert!(line.trim_start().starts_with(&format!("n{} ", stage.0)));
    assert_eq!(
        json_of(&m, ViewKind::Merged, &filter).highlight,
        vec![stage.0]
    );
}

#[test]
fn hidden_endpoint_becomes_stub() {
    let m = fixtures::education_evaluation();
    let dot = dot_of(
        &m,
        ViewKind::Merged,
        &ViewFilter::default().hiding("Teacher"),
    );
    assert!(!dot.contains("label=\"Teacher\""));
    let dot = dot_of(&m, ViewKind::Process, &ViewFilter::default());
    assert!(dot.contains("shape=plaintext"));
}

#[test]
fn names_are_escaped() {
    let mut m = Model::new();
    m.add_node("say \"hi\" \\ now", None).unwrap();
    let dot = dot_of(&m, ViewKind::Object, &ViewFilter::default());
    assert!(dot.contains(r#"label="say \"hi\" \\ now""#));
}

#[test]
fn balls_object_view_with_stars() {
    let m = fixtures::balls();
    let v = json_of(&m, ViewKind::Object, &ViewFilter::default().with_stars());
    assert_eq!(v.stars.len(), 3);
    let circles: std::collections::BTreeSet<u64> = v.stars.iter().map(|s| s.circle).collect();
    assert_eq!(circles.len(), 2);
    let names: Vec<&str> = v.stars.iter().map(|s| s.name.as_str()).collect();
    assert_eq!(names, ["blue-ball-1", "blue-ball-2", "green-ball-1"]);
    let hidden = json_of(&m, ViewKind::Object, &ViewFilter::default());
    assert!(hidden.stars.is_empty());
}

#[test]
fn empty_json_view() {
    let v = json_of(&Model::new(), ViewKind::Merged, &ViewFilter::default());
    assert!(v.elements.is_empty() && v.edges.is_empty() && v.stars.is_empty());
    let text = to_view_json(
        &Model::new(),
        &project(&Model::new(), ViewKind::Merged, &ViewFilter::default()),
        &Classification::default(),
    );
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed["version"], VIEW_FORMAT);
    assert_eq!(parsed["elements"], serde_json::json!([]));
    assert_eq!(parsed["edges"], serde_json::json!([]));
}

#[test]
fn json_lists_every_visible_element_once() {
    for (stem, m) in fixtures::all() {
        let filter = ViewFilter::default().with_stars();
        let view = project(&m, ViewKind::Merged, &filter);
        let v = view_json(&m, &view, &classify(&m));
        let mut seen = std::collections::BTreeSet::new();
        for id in v
            .elements
            .iter()
            .map(|e| e.id)
            .chain(v.edges.iter().map(|e| e.id))
            .chain(v.stars.iter().map(|s| s.id))
        {
            assert!(seen.insert(id), "{stem}: {id} twice");
        }
        assert_eq!(seen, view.elements(), "{stem}");
    }
}

#[test]
fn outputs_are_byte_stable() {
    let m = fixtures::education_evaluation();
    let f = ViewFilter::default().with_stars();
    let view = project(&m, ViewKind::Merged, &f);
    let c = classify(&m);
    assert_eq!(to_view_json(&m, &view, &c), to_view_json(&m, &view, &c));
    assert_eq!(
        dot_of(&m, ViewKind::Merged, &f),
        dot_of(&m, ViewKind::Merged, &f)
    );
}

#[test]
fn style_is_total_over_kinds() {
    let style = RenderStyle::default();
    for k in [
        "start", "final", "activity", "object", "class", "circle", "star",
    ] {
        assert!(style.shapes.contains_key(k), "{k}");
    }
    for d in [DotKind::Duplicate, DotKind::Label, DotKind::Gate] {
        assert!(style
            .shapes
            .contains_key(format!("dot:{}", d.as_str()).as_str()));
    }
}

#[test]
fn education_dot_matches_golden() {
    let m = fixtures::education_evaluation();
    let golden = std::fs::read_to_string(
        std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("fixtures/education_evaluation.merged.dot"),
    )
    .unwrap();
    assert_eq!(dot_of(&m, ViewKind::Merged, &ViewFilter::default()), golden);
}
