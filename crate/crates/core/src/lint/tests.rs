use super::*;
use crate::fixtures;
use crate::model::{DotKind, Model, NodeId};
use crate::pilots::{bind_service, unbind_service, Instruction};

fn rules(findings: &[Finding]) -> Vec<Rule> {
    findings.iter().map(|f| f.rule).collect()
}

fn id(m: &Model, name: &str) -> NodeId {
    m.node_named(name).unwrap()
}

fn evaluation_binding(m: &Model) -> crate::model::RelationId {
    let c = m.circle_named(id(m, "Evaluation"), "Evaluation").unwrap();
    m.flow_bindings().find(|(_, x, _)| *x == c).unwrap().0
}

#[test]
fn education_is_clean() {
    let findings = lint(&fixtures::education_evaluation());
    assert!(findings.is_empty(), "{findings:?}");
}

#[test]
fn meeting_only_warns_on_select_date() {
    let m = fixtures::meeting();
    let findings = lint(&m);
    assert_eq!(rules(&findings), [Rule::L5]);
    assert_eq!(findings[0].subjects, vec![id(&m, "Select date").0]);
    assert!(!has_errors(&findings));
}

#[test]
fn missing_binding_is_l2() {
    let mut m = fixtures::education_evaluation();
    let binding = evaluation_binding(&m);
    m.delete(binding.0).unwrap();
    let findings = lint(&m);
    let l2: Vec<&Finding> = findings.iter().filter(|f| f.rule == Rule::L2).collect();
    assert_eq!(l2.len(), 1);
    assert_eq!(l2[0].severity, Severity::Error);
    assert!(l2[0].subjects.contains(&id(&m, "Start evaluation").0));
    assert!(has_errors(&findings));
}

#[test]
fn removing_directives_dot_is_l4() {
    let mut m = fixtures::education_evaluation();
    let dot = id(&m, "directives-dot");
    m.remove_dot(dot).unwrap();
    let findings = lint(&m);
    assert_eq!(rules(&findings), [Rule::L4]);
    assert_eq!(findings[0].severity, Severity::Warning);
}

#[test]
fn unbinding_fac_service_is_l6() {
    let mut m = fixtures::education_evaluation();
    let (fac, frame) = (id(&m, "FAC"), id(&m, "Education evaluation"));
    unbind_service(&mut m, fac.into(), frame).unwrap();
    let findings = lint(&m);
    assert_eq!(rules(&findings), [Rule::L6]);
    assert_eq!(findings[0].severity, Severity::Warning);
}

#[test]
fn process_without_final_is_l1() {
    let mut m = Model::new();
    let a = m.add_node("a", None).unwrap();
    let b = m.add_node("b", None).unwrap();
    m.connect_arc(a, b).unwrap();
    m.connect_arc(b, a).unwrap();
    let findings = lint(&m);
    assert!(rules(&findings).contains(&Rule::L1));
    assert!(has_errors(&findings));
}

#[test]
fn two_bindings_on_one_arc_is_l2() {
    let mut m = fixtures::plain_transition();
    let arc = m.arcs().next().unwrap().id;
    let other = m.add_node("Other", None).unwrap();
    let c = m.add_circle(other, "Other").unwrap();
    m.add_flow_binding(c, arc).unwrap();
    assert!(rules(&lint(&m)).contains(&Rule::L2));
}

#[test]
fn token_class_without_attributes_is_l3() {
    let mut m = fixtures::studying();
    let person = id(&m, "Person");
    assert!(!rules(&lint(&m)).contains(&Rule::L3));
    m.delete(person.0).unwrap();
    let bob = m.add_node("Bob", None).unwrap();
    let owner = m.add_node("Nobody", None).unwrap();
    let c = m.add_circle(owner, "Anyone").unwrap();
    m.place_star(bob.into(), c).unwrap();
    let entry = m.arcs_into(id(&m, "Studying")).next().unwrap().id;
    let binding = m.add_flow_binding(c, entry).unwrap();
    let findings = lint(&m);
    let l3: Vec<&Finding> = findings.iter().filter(|f| f.rule == Rule::L3).collect();
    assert_eq!(l3.len(), 1);
    assert_eq!(l3[0].subjects, vec![c.0, binding.0]);
}

#[test]
fn destroy_instruction_is_l4() {
    let mut m = fixtures::studying();
    let studying = id(&m, "Studying");
    let boss = m.add_node("Registrar", None).unwrap();
    m.add_pilot(boss.into(), studying, false).unwrap();
    bind_service(&mut m, boss.into(), studying, vec![Instruction::Destroy]).unwrap();
    assert!(rules(&lint(&m)).contains(&Rule::L4));
}

#[test]
fn plain_arc_between_associated_circles_is_l4() {
    let mut m = fixtures::plain_transition();
    let pre = id(&m, "Pre-registration");
    let reg = id(&m, "Registration");
    let pc = m.circle_named(pre, "place").unwrap();
    let rc = m.add_circle(reg, "place").unwrap();
    assert!(!rules(&lint(&m)).contains(&Rule::L4));
    m.add_association(pc, rc).unwrap();
    assert!(rules(&lint(&m)).contains(&Rule::L4));
    let dot = m.add_node("keep", Some(DotKind::Duplicate)).unwrap();
    let arc = m.arcs().next().unwrap().id;
    m.push_dot(arc, dot).unwrap();
    assert!(!rules(&lint(&m)).contains(&Rule::L4));
}

#[test]
fn activity_without_data_is_l5() {
    let mut m = fixtures::meeting_chain();
    let first = m.arcs().next().unwrap().id;
    let class = m.add_node("Meeting", None).unwrap();
    m.set_attribute(class, "title", "text").unwrap();
    let c = m.add_circle(class, "Meeting").unwrap();
    m.add_flow_binding(c, first).unwrap();
    let findings = lint(&m);
    let l5: Vec<u64> = findings
        .iter()
        .filter(|f| f.rule == Rule::L5)
        .flat_map(|f| f.subjects.clone())
        .collect();
    // Select participants receives the bound flow; the other two have no data.
    let middle: Vec<u64> = fixtures::MEETING_STAGES[2..4]
        .iter()
        .map(|s| id(&m, s).0)
        .collect();
    assert_eq!(l5, middle);
}

#[test]
fn branch_without_route_is_w_branch() {
    let mut m = fixtures::education_evaluation();
    let df = id(&m, "Distribution of forms");
    let teacher = id(&m, "Teacher");
    assert!(!rules(&lint(&m)).contains(&Rule::WBranch));
    bind_service(&mut m, teacher.into(), df, vec![Instruction::Forward]).unwrap();
    let findings = lint(&m);
    assert_eq!(rules(&findings), [Rule::WBranch]);
    assert_eq!(findings[0].subjects, vec![df.0]);
}

#[test]
fn findings_are_sorted_and_deterministic() {
    let mut m = fixtures::education_evaluation();
    let binding = evaluation_binding(&m);
    m.delete(binding.0).unwrap();
    let dot = id(&m, "directives-dot");
    m.remove_dot(dot).unwrap();
    let (fac, frame) = (id(&m, "FAC"), id(&m, "Education evaluation"));
    unbind_service(&mut m, fac.into(), frame).unwrap();
    let findings = lint(&m);
    assert_eq!(findings, lint(&m));
    let keys: Vec<_> = findings
        .iter()
        .map(|f| (f.rule, f.subjects.clone()))
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    for f in &findings {
        for s in &f.subjects {
            assert!(m.element_kind(*s).is_some());
        }
    }
}

#[test]
fn json_and_table_output() {
    let m = fixtures::meeting();
    let findings = lint(&m);
    let line = findings[0].to_json();
    let v: serde_json::Value = serde_json::from_str(&line).unwrap();
    assert_eq!(v["rule"], "L5");
    assert_eq!(v["severity"], "warning");
    let table = render_table(&findings);
    assert!(table.starts_with("RULE"));
    assert!(table.contains("Select date"));
    assert_eq!(Rule::WBranch.as_str(), "W-branch");
    assert_eq!(
        serde_json::to_string(&Rule::WBranch).unwrap(),
        "\"W-branch\""
    );
}

#[test]
fn zero_errors_means_init_succeeds() {
    for (stem, m) in fixtures::all() {
        if !has_errors(&lint(&m)) {
            crate::kernel::init_sim(m, Default::default())
                .unwrap_or_else(|e| panic!("{stem}: {e}"));
        }
    }
}
