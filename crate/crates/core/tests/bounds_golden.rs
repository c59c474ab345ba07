use asuman::bounds::{self, mc_recurrence, BoundParams, Recurrence};

const RTOL: f64 = 1e-9;

fn close(got: f64, want: f64) -> bool {
    (got - want).abs() <= RTOL * want.abs().max(1.0)
}

macro_rules! golden {
    ($got:expr, $want:expr) => {{
        let (g, w): (f64, f64) = ($got, $want);
        assert!(close(g, w), "{} = {g}, want {w}", stringify!($got));
    }};
}

/// Mean of the minimum age after `k` epochs, from its exact distribution:
/// each epoch either some node hears the source directly (age resets to 1)
/// or the minimum grows by one.
fn min_age_dp(k: usize, lambda_e: f64, lambda: f64) -> f64 {
    let hit = lambda / (lambda + lambda_e);
    let mut dist = vec![1.0]; // P(age = j), starting from age 0
    for _ in 0..k {
        let mut next = vec![0.0; dist.len() + 1];
        next[1] += hit;
        for (j, p) in dist.iter().enumerate() {
            next[j + 1] += (1.0 - hit) * p;
        }
        dist = next;
    }
    dist.iter().enumerate().map(|(j, p)| j as f64 * p).sum()
}

#[test]
fn min_age_matches_exact_distribution() {
    for &(le, l) in &[(1.0, 1.0), (2.0, 1.0), (0.5, 3.0)] {
        for k in [0usize, 1, 2, 5, 17, 60] {
            let dp = min_age_dp(k, le, l);
            golden!(bounds::min_age_mean(k as u64, le, l).unwrap(), dp);
            golden!(bounds::min_age_mean_recursive(k as u64, le, l).unwrap(), dp);
        }
        golden!(
            bounds::min_age_limit(le, l).unwrap(),
            min_age_dp(2_000, le, l)
        );
    }
    golden!(bounds::min_age_mean(2, 1.0, 1.0).unwrap(), 1.5);
}

#[test]
fn complete_network_bounds() {
    golden!(bounds::asuman_ub(2, 2.0, 1.0, 1.0).unwrap(), 2.0);
    golden!(bounds::asuman_ub_limit(1.0, 1.0).unwrap(), 3.0);
    golden!(bounds::asuman_ub_limit(2.0, 1.0).unwrap(), 5.0);
    let mut prev = 0.0;
    for n in [2, 10, 100, 1_000, 100_000] {
        let ub = bounds::asuman_ub(n, n as f64, 1.0, 1.0).unwrap();
        assert!(ub >= prev && ub <= 3.0 + 1e-12, "n={n}: {ub}");
        prev = ub;
    }
    assert!(bounds::asuman_ub(1, 1.0, 1.0, 1.0).is_err());
    assert!(bounds::min_age_limit(1.0, 0.0).is_err());
}

#[test]
fn sensing_and_partial() {
    golden!(bounds::sensing_bound_b(1, 1.0, 1.0).unwrap(), 1.0);
    golden!(bounds::partial_pi_tilde(1.0, 1.0, 1.0).unwrap(), 1.0 / 6.0);
    golden!(bounds::partial_ub(1.0, 1.0, 1.0).unwrap(), 8.0);
    golden!(bounds::partial_pi_tilde(0.5, 1.0, 1.0).unwrap(), 1.0 / 9.0);
    golden!(bounds::partial_ub(0.5, 1.0, 1.0).unwrap(), 11.0);
    let qs = [1.0, 0.5, 0.25, 0.1, 0.01];
    let ubs: Vec<f64> = qs
        .iter()
        .map(|&q| bounds::partial_ub(q, 1.0, 1.0).unwrap())
        .collect();
    assert!(ubs.windows(2).all(|w| w[1] > w[0]), "{ubs:?}");
    assert!(bounds::partial_ub(0.0, 1.0, 1.0).is_err());
    assert!(bounds::partial_ub(1.5, 1.0, 1.0).is_err());
}

#[test]
fn not_min_probability_and_ring() {
    golden!(bounds::not_min_prob_limit(1.0, 1.0).unwrap(), 1.0 / 3.0);
    golden!(bounds::not_min_prob_lb(2, 1.0, 1.0).unwrap(), 1.0 / 7.0);
    golden!(bounds::not_min_prob_lb(50, 0.0, 1.0).unwrap(), 0.0);
    golden!(bounds::ring_lb(60, 1.0, 1.0).unwrap(), 20.0);
    golden!(bounds::ring_lb(30, 1.0, 1.0).unwrap(), 10.0);
    golden!(bounds::ring_lb(30, 0.0, 1.0).unwrap(), 0.0);
}

#[test]
fn clustered_bounds() {
    let (p_star, best) = bounds::cluster_optimum(1.0, 1.0).unwrap();
    golden!(p_star, 0.5);
    golden!(best, 8.0);
    golden!(bounds::cluster_head_ub_limit(0.5, 1.0, 1.0).unwrap(), 4.0);
    golden!(bounds::cluster_leaf_ub_limit(0.5, 1.0, 1.0).unwrap(), 8.0);
    // The leaf limit is convex in p and blows up at both ends.
    let leaf = |p| bounds::cluster_leaf_ub_limit(p, 1.0, 1.0).unwrap();
    assert!(leaf(0.01) > 100.0 && leaf(0.99) > 100.0);
    assert!(leaf(0.4) > 8.0 && leaf(0.6) > 8.0);
    golden!(bounds::disconnected_cluster_ub(10, 1.0, 1.0).unwrap(), 13.0);
    golden!(
        bounds::ring_cluster_ub(8, 0.5, 1.0, 1.0).unwrap(),
        4.0 + (8.0 * std::f64::consts::PI).sqrt()
    );
    golden!(bounds::disconnected_cluster_ub(10, 0.0, 1.0).unwrap(), 1.0);
    golden!(bounds::ring_cluster_ub(8, 0.5, 0.0, 1.0).unwrap(), 1.0);
    assert!(bounds::cluster_head_ub_limit(1.0, 1.0, 1.0).is_err());
}

#[test]
fn asymmetric_bounds() {
    let (upper, best) = bounds::asym_limits(1.0, 1.0).unwrap();
    golden!(upper, 3.0);
    golden!(best, 1.5);
    golden!(
        bounds::power_law_ub_limit(1, 0.35, 1.0, 1.0).unwrap(),
        3.0 / 1.65
    );
    // Far down the power law the node barely hears the source directly.
    let deep = bounds::power_law_ub_limit(200, 0.75, 1.0, 1.0).unwrap();
    assert!((deep - 3.0).abs() < 1e-9, "{deep}");
    assert!(bounds::asym_ub(2.0, 10, 10.0, 1.0, 1.0).is_err());
    // Shares of a power-law profile sum to one.
    let total: f64 = (1..=100)
        .map(|i| bounds::power_law_share(i, 0.75, 100).unwrap())
        .sum();
    golden!(total, 1.0);
}

#[test]
fn named_reports() {
    let params = BoundParams {
        lambda_e: Some(1.0),
        lambda: Some(1.0),
        n: Some(100),
        q: Some(0.5),
        c: Some(10),
        p: Some(0.5),
        ..Default::default()
    };
    let all = bounds::all_reports(&params).unwrap();
    let value = |name: &str| {
        all.iter()
            .find(|r| r.name == name)
            .map(|r| r.value)
            .unwrap()
    };
    golden!(value("asuman-limit"), 3.0);
    golden!(value("partial-ub"), 11.0);
    golden!(value("cluster-optimum"), 8.0);
    golden!(value("disconnected-cluster-ub"), 13.0);
    let err = bounds::named_report(
        "ring-lb",
        &BoundParams {
            lambda_e: Some(1.0),
            lambda: Some(1.0),
            ..Default::default()
        },
    )
    .unwrap_err()
    .to_string();
    assert!(err.contains("needs parameter n"), "{err}");
    assert!(bounds::named_report("no-such-bound", &params).is_err());
}

#[test]
fn recurrence_estimates() {
    let min_age = Recurrence::from_kind("min_age", 1.0, 1.0, 0, 1.0, true).unwrap();
    let mc = mc_recurrence(&min_age, 2, 100_000, 3).unwrap();
    assert!((mc.at(2).unwrap().mean - 1.5).abs() < 0.01);
    let sensing = Recurrence::from_kind("sensing", 1.0, 1.0, 50, 1.0, true).unwrap();
    let mc = mc_recurrence(&sensing, 1, 1_000, 3).unwrap();
    assert_eq!(mc.at(1).unwrap().mean, 1.0);
    assert!(Recurrence::from_kind("spiral", 1.0, 1.0, 10, 1.0, true).is_err());
    let a = mc_recurrence(&min_age, 30, 500, 9).unwrap();
    let b = mc_recurrence(&min_age, 30, 500, 9).unwrap();
    assert_eq!(a.means, b.means);
}
