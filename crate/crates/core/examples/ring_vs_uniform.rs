//! On a ring, age-sensing gossip loses to plain uniform gossip: only the
//! freshest nodes talk, and a fresh version must cross the ring one hop at
//! a time.

use asuman::prelude::*;

fn main() -> asuman::Result<()> {
    println!(
        "{:>5} {:>10} {:>10} {:>12}",
        "n", "asuman", "uniform", "n·λe/(3λ)"
    );
    for n in [30, 60, 120] {
        let spec = |policy| -> asuman::Result<NetworkSpec> {
            Ok(NetworkSpec {
                topology: build_ring(n)?,
                rates: Rates::with_default_capacity(1.0, 1.0, n),
                profile: rate_profile_uniform(1.0, n)?,
                policy,
            })
        };
        let exps = [
            Experiment::new(
                spec(PolicyKind::Asuman {
                    c_coeff: 1.0 / n as f64,
                })?,
                3_000,
                8,
                5,
            ),
            Experiment::new(spec(PolicyKind::UniformGossip)?, 3_000, 8, 5),
        ];
        let stats = run_all(&exps)?;
        println!(
            "{n:>5} {:>10.3} {:>10.3} {:>12.3}",
            stats[0].network().mean,
            stats[1].network().mean,
            bounds::ring_lb(n, 1.0, 1.0)?
        );
    }
    Ok(())
}
