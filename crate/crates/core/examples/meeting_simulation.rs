//! Run the meeting organization process and print the trace.

use topoflow::fixtures;
use topoflow::kernel::{init_sim, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = fixtures::meeting();
    let mut sim = init_sim(m, SimConfig::default())?;

    // Pause after the participants have been chosen.
    sim.run(Some(0))?;
    let person = sim.model().node_named("Person").unwrap();
    let participants = sim.model().circle_named(person, "Participant").unwrap();
    println!(
        "participants at t=0: {}",
        sim.model().members(participants)?.len()
    );

    sim.run(None)?;
    print!("{}", sim.trace().render(sim.model()));
    println!("finished at t={}", sim.clock());
    Ok(())
}
