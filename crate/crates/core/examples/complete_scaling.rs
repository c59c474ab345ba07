//! Age-sensing versus uniform gossip on fully connected networks.
//!
//! Prints the network mean age per size and the best one-parameter scaling
//! law for each policy. Pass an epoch count to trade accuracy for speed:
//! `cargo run --release --example complete_scaling -- 2000`.

use asuman::prelude::*;

fn main() -> asuman::Result<()> {
    let epochs: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(3_000);
    let sizes = [50, 100, 200, 400];
    let spec = |n: usize, policy| -> asuman::Result<NetworkSpec> {
        Ok(NetworkSpec {
            topology: build_complete(n)?,
            rates: Rates::with_default_capacity(1.0, 1.0, n),
            profile: rate_profile_uniform(1.0, n)?,
            policy,
        })
    };

    for (label, policy_for) in [
        (
            "asuman",
            (|n: usize| PolicyKind::Asuman {
                c_coeff: 1.0 / n as f64,
            }) as fn(usize) -> PolicyKind,
        ),
        ("uniform", |_| PolicyKind::UniformGossip),
    ] {
        let exps = sizes
            .iter()
            .map(|&n| Ok(Experiment::new(spec(n, policy_for(n))?, epochs, 10, 7)))
            .collect::<asuman::Result<Vec<_>>>()?;
        let stats = run_all(&exps)?;
        println!("{label}");
        let mut points = Vec::new();
        for (n, s) in sizes.iter().zip(&stats) {
            let e = s.network();
            println!(
                "  n = {n:>4}  mean age {:.3} ± {:.3}",
                e.mean,
                e.stderr.unwrap_or(0.0)
            );
            points.push((*n as f64, e.mean));
        }
        let best = best_proportional_fit(&points, &ScalingModel::ALL)?;
        println!(
            "  best fit: {:.3} · {}(n)",
            best.coefficient,
            best.model.name()
        );
    }
    println!("age-sensing limit: {}", bounds::asuman_ub_limit(1.0, 1.0)?);
    Ok(())
}
