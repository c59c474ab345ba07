//! Steps a five-node network by hand and prints each event with the ages it
//! leaves behind.

use asuman::engine::Event;
use asuman::prelude::*;

fn main() -> asuman::Result<()> {
    let n = 5;
    let spec = NetworkSpec {
        topology: build_complete(n)?,
        rates: Rates::with_default_capacity(1.0, 1.0, n),
        profile: rate_profile_uniform(1.0, n)?,
        policy: PolicyKind::Asuman { c_coeff: 0.2 },
    };
    let mut sim = Simulation::new(SimConfig::new(spec, 6, 2024).with_warmup(1))?;
    while let Some(ev) = sim.step()? {
        let s = sim.state();
        let note = match ev {
            Event::SelfUpdate => format!(
                "epoch {} starts, active {:?}",
                s.epoch,
                s.active_set().unwrap_or(&[])
            ),
            Event::GossipStart { .. } => format!(
                "sensing over, gossip rate {}",
                sim.event_rates().gossip_total()
            ),
            _ => String::new(),
        };
        println!(
            "t = {:>8.4}  {:<32} ages {:?}  {note}",
            s.t,
            format!("{ev:?}"),
            s.age.ages()
        );
    }
    Ok(())
}
