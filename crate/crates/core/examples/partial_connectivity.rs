//! Age-sensing gossip when each active node reaches only a random fraction
//! `q` of the network per epoch.

use asuman::prelude::*;

fn main() -> asuman::Result<()> {
    let n = 100;
    println!("{:>6} {:>10} {:>10}", "q", "mean age", "bound");
    for q in [1.0, 0.5, 1.0 / 3.0, 0.2] {
        let spec = NetworkSpec {
            topology: build_partial(n, q)?,
            rates: Rates::with_default_capacity(1.0, 1.0, n),
            profile: rate_profile_uniform(1.0, n)?,
            policy: PolicyKind::Asuman {
                c_coeff: 1.0 / n as f64,
            },
        };
        let stats = Experiment::new(spec, 3_000, 8, 3).run(0)?;
        println!(
            "{q:>6.3} {:>10.3} {:>10.3}",
            stats.network().mean,
            bounds::partial_ub(q, 1.0, 1.0)?
        );
    }
    Ok(())
}
