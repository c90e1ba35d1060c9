//! The education evaluation case: lint, who is responsible, and the run.

use topoflow::fixtures::{self, EVALUATION_CHAIN};
use topoflow::kernel::{init_sim, SimConfig};
use topoflow::lint::{lint, render_table};
use topoflow::topology::responsible_pilot;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = fixtures::education_evaluation();
    let findings = lint(&m);
    println!("{} lint findings", findings.len());
    print!("{}", render_table(&findings));

    for stage in EVALUATION_CHAIN {
        let node = m.node_named(stage).unwrap();
        let pilot = responsible_pilot(&m, node)?
            .map(|p| m.identity_node(p).unwrap().name.clone())
            .unwrap_or_default();
        println!("{stage:<32} {pilot}");
    }

    let mut sim = init_sim(m, SimConfig::default())?;
    sim.run(None)?;
    let end = sim.model();
    let eval = end.node_named("eval-1").unwrap();
    for (_, a, b, _) in end.instance_links() {
        let (sa, sb) = (end.star(a)?, end.star(b)?);
        if sa.identity == eval.into() {
            let peer = end.identity_node(sb.identity)?;
            let circle = end.circle(sb.circle)?;
            println!("eval-1 -> {} in {}", peer.name, circle.name);
        }
    }
    Ok(())
}
