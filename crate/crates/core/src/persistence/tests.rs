use super::*;
use crate::fixtures;
use crate::pilots::{bind_service, Instruction};

#[test]
fn empty_model_document() {
    let text = save_xml(&Model::new());
    assert_eq!(
        text,
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<model version=\"1.0\" next-id=\"1\"/>\n"
    );
    assert!(validate_schema(&text).is_ok());
    assert_eq!(load_xml(&text).unwrap(), Model::new());
}

#[test]
fn bare_model_element_loads_empty() {
    assert!(load_xml("<model/>").unwrap().is_empty());
}

#[test]
fn fixtures_roundtrip_and_validate() {
    for (stem, m) in fixtures::all() {
        let text = save_xml(&m);
        assert_eq!(text, save_xml(&m), "{stem}");
        assert!(!text.contains('\r'));
        validate_schema(&text).unwrap_or_else(|e| panic!("{stem}: {e:?}"));
        let back = load_xml(&text).unwrap();
        assert_eq!(back, m, "{stem}");
        assert_eq!(save_xml(&back), text, "{stem}");
    }
}

#[test]
fn balls_keep_fifo_order() {
    let m = fixtures::balls();
    let back = load_xml(&save_xml(&m)).unwrap();
    let balls = back.node_named("Balls").unwrap();
    let blue = back.circle_named(balls, "blue").unwrap();
    let names: Vec<String> = back
        .members(blue)
        .unwrap()
        .into_iter()
        .map(|i| back.identity_node(i).unwrap().name.clone())
        .collect();
    assert_eq!(names, ["blue-ball-1", "blue-ball-2"]);
}

#[test]
fn fifo_order_differs_from_id_order() {
    let mut m = Model::new();
    let set = m.add_node("Set", None).unwrap();
    let a = m.add_circle(set, "A").unwrap();
    let b = m.add_circle(set, "B").unwrap();
    let x = m.add_node("x", None).unwrap();
    let y = m.add_node("y", None).unwrap();
    m.place_star(y.into(), b).unwrap();
    m.place_star(x.into(), b).unwrap();
    m.place_star(x.into(), a).unwrap();
    let back = load_xml(&save_xml(&m)).unwrap();
    assert_eq!(back.members(b).unwrap(), vec![y.into(), x.into()]);
    assert_eq!(back, m);
}

#[test]
fn dangling_star_names_the_id() {
    let text = r#"<model version="1.0">
  <node id="1" name="x"/>
  <star id="2" identity="1" circle="7"/>
</model>"#;
    match load_xml(text) {
        Err(LoadError::Dangling { element, attr, id }) => {
            assert_eq!(element, "star");
            assert_eq!(attr, "circle");
            assert_eq!(id, 7);
        }
        other => panic!("expected dangling reference, got {other:?}"),
    }
    assert!(load_xml(text).unwrap_err().to_string().contains('7'));
}

#[test]
fn malformed_and_foreign_documents() {
    assert!(matches!(load_xml("<model"), Err(LoadError::Xml(_))));
    assert!(matches!(load_xml("<graph/>"), Err(LoadError::Root(_))));
    assert!(matches!(
        load_xml(r#"<model version="2.0"/>"#),
        Err(LoadError::Version(_))
    ));
    assert!(matches!(
        load_xml(r#"<model version="1.0"><node id="1"/></model>"#),
        Err(LoadError::Missing { .. })
    ));
    assert!(matches!(
        load_xml(r#"<model version="1.0"><node id="x" name="a"/></model>"#),
        Err(LoadError::Invalid { .. })
    ));
    assert!(matches!(
        load_xml(r#"<model version="1.0"><node id="1" name="a"/><node id="1" name="b"/></model>"#),
        Err(LoadError::DuplicateId(1))
    ));
}

#[test]
fn newer_minor_version_skips_unknown_elements() {
    let text = r#"<model version="1.3"><node id="1" name="a"/><layout x="3"/></model>"#;
    let (m, warnings) = load_xml_with_warnings(text).unwrap();
    assert_eq!(m.nodes().count(), 1);
    assert_eq!(warnings.len(), 1);
    assert!(warnings[0].contains("layout"));
    let same = r#"<model version="1.0"><node id="1" name="a"/><layout x="3"/></model>"#;
    assert!(load_xml(same).is_err());
}

#[test]
fn invariant_violations_are_rejected() {
    let text = r#"<model version="1.0">
  <node id="1" name="a"/>
  <arc id="2" from="1" to="1"/>
</model>"#;
    assert!(matches!(load_xml(text), Err(LoadError::Model(_))));
}

#[test]
fn services_and_multiplicity_survive() {
    let mut m = fixtures::meeting();
    let organizer = m.node_named("Organizer").unwrap();
    let stage = m.node_named("Select date").unwrap();
    m.add_pilot(organizer.into(), stage, false).unwrap();
    bind_service(
        &mut m,
        organizer.into(),
        stage,
        vec![
            Instruction::Wait { ticks: 3 },
            Instruction::Emit {
                tag: "a \"quoted\" <tag> & more".into(),
            },
            Instruction::Forward,
        ],
    )
    .unwrap();
    let person = m.node_named("Person").unwrap();
    let c = m.node(person).unwrap().circles[0];
    let extra = m.add_node("Extra", None).unwrap();
    let ec = m.add_circle(extra, "Extra").unwrap();
    m.add_relation(
        crate::model::RelationKind::Association { a: c, b: ec },
        Some("1..*"),
    )
    .unwrap();
    let text = save_xml(&m);
    assert!(text.contains(r#"multiplicity="1..*""#));
    assert_eq!(load_xml(&text).unwrap(), m);
}

#[test]
fn file_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.topo.xml");
    let m = fixtures::education_evaluation();
    save_file(&m, &path).unwrap();
    assert_eq!(load_file(&path).unwrap(), m);
    assert!(matches!(
        load_file(dir.path().join("missing.topo.xml")),
        Err(LoadError::Io { .. })
    ));
}

#[test]
fn schema_rejects_structural_errors() {
    let bad = r#"<model version="1.0"><node id="0" name=""/><bogus/></model>"#;
    let errors = validate_schema(bad).unwrap_err();
    assert!(errors.len() >= 2, "{errors:?}");
    assert!(validate_schema("<model/>").is_err());
    assert!(SCHEMA_XSD.contains("xs:schema"));
}

#[test]
fn shipped_fixture_files_match_builders() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    for (stem, m) in fixtures::all() {
        let text = std::fs::read_to_string(dir.join(format!("{stem}.topo.xml"))).unwrap();
        assert_eq!(
            text,
            save_xml(&m),
            "{stem} is stale; run the write_fixtures example"
        );
    }
}
