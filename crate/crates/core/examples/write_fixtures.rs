//! Regenerate the shipped `.topo.xml` fixtures and the golden outputs.
//!
//!     cargo run --example write_fixtures [DIR]
//!
//! DIR defaults to `crates/core/fixtures`. Golden traces should be audited by
//! hand after regeneration; the acceptance tests also compare them against
//! independently written expectations.

use std::path::PathBuf;

use topoflow::export::{to_dot, RenderStyle};
use topoflow::fixtures;
use topoflow::kernel::{init_sim, SimConfig};
use topoflow::persistence::save_xml;
use topoflow::topology::{classify, project, ViewFilter, ViewKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
    std::fs::create_dir_all(&dir)?;

    for (stem, model) in fixtures::all() {
        std::fs::write(dir.join(format!("{stem}.topo.xml")), save_xml(&model))?;
    }
    std::fs::write(
        dir.join("empty.topo.xml"),
        save_xml(&topoflow::model::Model::new()),
    )?;

    // The evaluation case without the binding that sources its tokens.
    let mut missing = fixtures::education_evaluation();
    let evaluation = missing.node_named("Evaluation").expect("Evaluation node");
    let circle = missing
        .circle_named(evaluation, "Evaluation")
        .expect("Evaluation circle");
    let binding = missing
        .flow_bindings()
        .find(|(_, c, _)| *c == circle)
        .map(|(r, _, _)| r)
        .expect("Evaluation binding");
    missing.delete(binding.0)?;
    std::fs::write(
        dir.join("education_evaluation_missing_binding.topo.xml"),
        save_xml(&missing),
    )?;

    for stem in ["meeting", "education_evaluation"] {
        let model = fixtures::all()
            .into_iter()
            .find(|(s, _)| *s == stem)
            .map(|(_, m)| m)
            .unwrap();
        let mut sim = init_sim(model, SimConfig::default())?;
        let trace = sim.run(None)?.to_jsonl();
        std::fs::write(dir.join(format!("{stem}.trace.jsonl")), trace)?;
    }

    let model = fixtures::education_evaluation();
    let view = project(&model, ViewKind::Merged, &ViewFilter::default());
    let dot = to_dot(&model, &view, &classify(&model), &RenderStyle::default());
    std::fs::write(dir.join("education_evaluation.merged.dot"), dot)?;

    println!("fixtures written to {}", dir.display());
    Ok(())
}
