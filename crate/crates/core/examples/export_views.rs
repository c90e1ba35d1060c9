//! Render views to Graphviz DOT and to the JSON view format.
//!
//! ```text
//! cargo run --example export_views | dot -Tsvg > meeting.svg
//! ```

use topoflow::export::{to_dot, to_view_json, RenderStyle};
use topoflow::fixtures;
use topoflow::topology::{classify, project, ViewFilter, ViewKind};

fn main() {
    let m = fixtures::meeting();
    let stage = m.node_named("Propose date").unwrap();
    let filter = ViewFilter::default().with_stars().highlighting(stage);
    let view = project(&m, ViewKind::Merged, &filter);
    let classes = classify(&m);
    print!("{}", to_dot(&m, &view, &classes, &RenderStyle::default()));

    let process = project(&m, ViewKind::Process, &ViewFilter::default());
    eprintln!("{}", to_view_json(&m, &process, &classes));
}
