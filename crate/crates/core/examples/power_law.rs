//! Unequal source rates: node `i` hears the source at a rate proportional
//! to `ν^i`. Compares each node's mean age with its own bound.

use asuman::prelude::*;

fn main() -> asuman::Result<()> {
    let n = 100;
    let nu = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0.75);
    let spec = NetworkSpec {
        topology: build_complete(n)?,
        rates: Rates::with_default_capacity(1.0, 1.0, n),
        profile: rate_profile_power_law(1.0, nu, n)?,
        policy: PolicyKind::Asuman {
            c_coeff: 1.0 / n as f64,
        },
    };
    let stats = Experiment::new(spec.clone(), 3_000, 8, 2).run(0)?;
    println!("ν = {nu}");
    println!(
        "{:>4} {:>10} {:>10} {:>10}",
        "node", "λ_i", "mean age", "bound"
    );
    for (j, e) in stats
        .per_node()
        .iter()
        .enumerate()
        .filter(|(j, _)| *j < 8 || j % 20 == 19)
    {
        println!(
            "{:>4} {:>10.4} {:>10.3} {:>10.3}",
            j + 1,
            spec.profile.rates()[j],
            e.mean,
            bounds::power_law_ub(j + 1, nu, n, 1.0, 1.0)?
        );
    }
    let (upper, best) = bounds::asym_limits(1.0, 1.0)?;
    println!("all nodes lie between the limits {best} and {upper}");
    Ok(())
}
