//! Monitored drive: tokens move only when events are injected, and a
//! recorded run can be replayed from its own trace.

use std::sync::{Arc, Mutex};

use topoflow::fixtures;
use topoflow::kernel::{init_sim, replay_script, ExternalAction, ExternalEvent, SimConfig};
use topoflow::model::IdentityId;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = fixtures::studying();
    let binding = m.flow_bindings().next().unwrap().0;
    let bob = IdentityId::from(m.node_named("Bob").unwrap());
    let graduated = m.node_named("Graduated").unwrap();

    let mut sim = init_sim(m.clone(), SimConfig::default().monitored())?;
    let seen = Arc::new(Mutex::new(Vec::new()));
    let sink = seen.clone();
    sim.subscribe(move |e| sink.lock().unwrap().push(e.kind.as_str()));

    sim.inject(ExternalEvent::at(
        2,
        ExternalAction::Create {
            binding,
            identity: bob,
        },
    ))?;
    sim.run(None)?;
    let token = sim.tokens().next().unwrap().id;
    sim.inject(ExternalEvent::at(
        5,
        ExternalAction::Enter {
            token,
            node: graduated,
        },
    ))?;
    sim.run(None)?;
    println!("observed: {}", seen.lock().unwrap().join(" "));

    // Record an autonomous run, then drive a monitored one from it.
    let mut auto = init_sim(m.clone(), SimConfig::default())?;
    let trace = auto.run(None)?.clone();
    let mut replay = init_sim(m, SimConfig::default().monitored())?;
    for e in replay_script(&trace) {
        replay.inject(e)?;
    }
    replay.run(None)?;
    println!(
        "replayed {} events, identical: {}",
        replay.trace().len(),
        replay.trace().without_time() == trace.without_time()
    );
    Ok(())
}
