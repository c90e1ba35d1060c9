//! What plain arcs, rounded dots and gates do to a placement.

use topoflow::fixtures;
use topoflow::kernel::{init_sim, SimConfig};
use topoflow::model::{IdentityId, Model};

fn show(label: &str, m: Model) -> Result<(), Box<dyn std::error::Error>> {
    let anna = IdentityId::from(m.node_named("Anna").unwrap());
    let before = m.placements(anna)?.len();
    let mut sim = init_sim(m, SimConfig::default())?;
    sim.run(None)?;
    let end = sim.model();
    let circles: Vec<String> = end
        .placements(anna)?
        .into_iter()
        .map(|c| {
            let c = end.circle(c).unwrap();
            format!("{}/{}", end.node(c.owner).unwrap().name, c.name)
        })
        .collect();
    println!(
        "{label:<8} stars {before} -> {}  {circles:?}",
        circles.len()
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    show("plain", fixtures::plain_transition())?;
    show("rounded", fixtures::duplicate_transition())?;
    show("gate", fixtures::gate_transition())?;
    Ok(())
}
