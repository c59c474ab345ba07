//! Two-layer networks of `c` clusters with `m` leaves each and one head per
//! cluster, for the three ways heads can talk to each other.

use asuman::prelude::*;

fn spec(root: usize, links: HeadLinks) -> asuman::Result<NetworkSpec> {
    let topology = build_clustered(root, root, links)?;
    let leaves = root * root;
    Ok(NetworkSpec {
        rates: Rates {
            lambda_e: 1.0,
            lambda: 1.0,
            gossip_capacity: leaves as f64,
        },
        profile: rate_profile_heads(1.0, &topology)?,
        policy: PolicyKind::Hierarchical {
            p_split: 0.5,
            head_policy: HeadPolicy::for_links(links),
            c_coeff: 1.0 / leaves as f64,
        },
        topology,
    })
}

fn main() -> asuman::Result<()> {
    let roots = [8, 12, 16];
    for links in [HeadLinks::Complete, HeadLinks::Ring, HeadLinks::None] {
        let exps = roots
            .iter()
            .map(|&r| Ok(Experiment::new(spec(r, links)?, 3_000, 8, 11)))
            .collect::<asuman::Result<Vec<_>>>()?;
        let stats = run_all(&exps)?;
        println!("heads linked {links:?}");
        let mut points = Vec::new();
        for (e, s) in exps.iter().zip(&stats) {
            let t = &e.spec.topology;
            let (leaf, head) = (s.subset(&t.leaves()), s.subset(&t.heads()));
            let n = t.leaves().len();
            println!(
                "  leaves {n:>4}  leaf age {:.3}  head age {:.3}",
                leaf.mean, head.mean
            );
            points.push((n as f64, leaf.mean));
        }
        let best = best_proportional_fit(&points, &ScalingModel::ALL)?;
        println!("  leaf ages scale like {}", best.model.name());
    }
    let (p, value) = bounds::cluster_optimum(1.0, 1.0)?;
    println!("best relay share p = {p}, leaf limit {value}");
    Ok(())
}
