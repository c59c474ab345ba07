//! Monte-Carlo evaluation of the bounding recurrences next to their closed
//! forms.

use asuman::bounds::{self, mc_recurrence, Recurrence};

fn main() -> asuman::Result<()> {
    let min_age = mc_recurrence(
        &Recurrence::from_kind("min_age", 1.0, 1.0, 0, 1.0, true)?,
        20,
        50_000,
        1,
    )?;
    println!("{:>3} {:>10} {:>10}", "k", "simulated", "exact");
    for k in [1, 2, 3, 5, 10, 20] {
        let e = min_age.at(k).expect("k in range");
        println!(
            "{k:>3} {:>10.4} {:>10.4}",
            e.mean,
            bounds::min_age_mean(k as u64, 1.0, 1.0)?
        );
    }

    let cases = [
        (
            "sensing",
            100,
            1.0,
            bounds::sensing_bound_b_limit(1.0, 1.0)?,
        ),
        ("partial", 100, 0.5, bounds::partial_ub(0.5, 1.0, 1.0)?),
        ("ring", 60, 1.0, bounds::ring_lb(60, 1.0, 1.0)?),
    ];
    for (kind, n, q, closed) in cases {
        let rec = Recurrence::from_kind(kind, 1.0, 1.0, n, q, true)?;
        let series = mc_recurrence(&rec, 1_000, 2_000, 1)?;
        println!(
            "{kind:>8}: late mean {:.3} (closed form {closed:.3})",
            series.tail.mean
        );
    }
    Ok(())
}
