use asuman::engine::{Event, Phase};
use asuman::prelude::*;
use asuman::validation::{check_run_properties, random_property_config};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn flat(n: usize, lambda_e: f64, policy: PolicyKind) -> NetworkSpec {
    NetworkSpec {
        topology: build_complete(n).unwrap(),
        rates: Rates::with_default_capacity(lambda_e, 1.0, n),
        profile: rate_profile_uniform(1.0, n).unwrap(),
        policy,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_event_respects_engine_invariants(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let config = random_property_config(&mut rng).unwrap();
        let problem = check_run_properties(&config, 4_000).unwrap();
        prop_assert!(problem.is_none(), "{}: {:?}", config.spec.policy.name(), problem);
    }

    #[test]
    fn min_age_set_is_the_argmin(ages in prop::collection::vec(0u64..6, 1..20)) {
        let v = AgeVector::from_ages(&ages);
        let all: Vec<usize> = (0..ages.len()).collect();
        let (set, min) = min_age_set(&v, &all).unwrap();
        let want_min = *ages.iter().min().unwrap();
        prop_assert_eq!(min, want_min);
        let want: Vec<usize> = all.iter().copied().filter(|&i| ages[i] == want_min).collect();
        prop_assert_eq!(set, want);
    }

    #[test]
    fn ages_are_version_gaps(versions in prop::collection::vec(0u64..50, 1..10), extra in 0u64..20) {
        let source = versions.iter().copied().max().unwrap() + extra;
        let v = AgeVector::from_versions(source, versions.clone()).unwrap();
        for (i, &ver) in versions.iter().enumerate() {
            prop_assert_eq!(v.age(i), source - ver);
        }
        prop_assert!(AgeVector::from_versions(0, vec![1]).is_err());
    }

    #[test]
    fn proportional_fit_recovers_exact_laws(alpha in 0.1f64..10.0, which in 0usize..5) {
        let model = ScalingModel::ALL[which];
        let pts: Vec<(f64, f64)> = [30.0, 90.0, 270.0, 810.0].iter().map(|&n| (n, alpha * model.basis(n))).collect();
        let fit = fit_proportional(&pts, model).unwrap();
        prop_assert!((fit.coefficient - alpha).abs() < 1e-9 * alpha);
        prop_assert!(fit.residual < 1e-12 * alpha * alpha * 1e6);
    }

    #[test]
    fn merge_ignores_order(seeds in prop::collection::vec(any::<u64>(), 2..5)) {
        let runs: Vec<RunStatistics> = seeds
            .iter()
            .enumerate()
            .map(|(r, &s)| {
                simulate(SimConfig::new(flat(3, 1.0, PolicyKind::Asuman { c_coeff: 0.3 }), 40, 0).with_replication(r as u64, s)).unwrap()
            })
            .collect();
        let forward = merge(runs.clone()).unwrap();
        let backward = merge(runs.into_iter().rev()).unwrap();
        prop_assert_eq!(forward, backward);
    }
}

#[test]
fn no_source_updates_means_zero_age() {
    for policy in [
        PolicyKind::UniformGossip,
        PolicyKind::Asuman { c_coeff: 0.1 },
    ] {
        let stats = simulate(SimConfig::new(flat(10, 0.0, policy), 100, 1)).unwrap();
        assert_eq!(stats.network_mean, 0.0);
    }
}

#[test]
fn complete_gossip_link_rate_example() {
    // n = 5, B = 5λ: two active nodes each reach each of 4 peers at 5λ/8.
    let mut sim = Simulation::new(SimConfig::new(
        flat(5, 1.0, PolicyKind::Asuman { c_coeff: 0.2 }),
        100_000,
        4,
    ))
    .unwrap();
    let mut seen = false;
    for _ in 0..200_000 {
        let s = sim.state();
        if s.phase() == Some(Phase::Gossiping) && s.active_set().map(<[usize]>::len) == Some(2) {
            let active = s.active_set().unwrap().to_vec();
            for &j in &active {
                for l in (0..5).filter(|&l| l != j) {
                    assert!((sim.link_rate(j, l) - 5.0 / 8.0).abs() < 1e-12);
                }
            }
            assert!((sim.event_rates().gossip_total() - 5.0).abs() < 1e-12);
            seen = true;
            break;
        }
        sim.step().unwrap();
    }
    assert!(seen, "never saw two active nodes");
}

#[test]
fn sensing_phase_has_no_gossip() {
    let mut sim = Simulation::new(SimConfig::new(
        flat(20, 1.0, PolicyKind::Asuman { c_coeff: 0.5 }),
        1_000,
        8,
    ))
    .unwrap();
    let mut checked = 0;
    while let Some(ev) = sim.step().unwrap() {
        if sim.state().phase() == Some(Phase::Sensing) && !sim.is_finished() {
            assert_eq!(sim.event_rates().gossip_total(), 0.0, "after {ev:?}");
            checked += 1;
        }
    }
    assert!(checked > 100);
}

#[test]
fn ring_head_link_rate_example() {
    let topology = build_clustered(4, 3, HeadLinks::Ring).unwrap();
    let spec = NetworkSpec {
        rates: Rates {
            lambda_e: 1.0,
            lambda: 1.0,
            gossip_capacity: 12.0,
        },
        profile: rate_profile_heads(1.0, &topology).unwrap(),
        policy: PolicyKind::Hierarchical {
            p_split: 0.5,
            head_policy: HeadPolicy::Ring,
            c_coeff: 1.0 / 12.0,
        },
        topology: topology.clone(),
    };
    let sim = Simulation::new(SimConfig::new(spec, 100, 1)).unwrap();
    let heads = topology.heads();
    for (i, &h) in heads.iter().enumerate() {
        let next = heads[(i + 1) % heads.len()];
        assert!((sim.link_rate(h, next) - 0.25).abs() < 1e-12);
        assert!((sim.link_rate(next, h) - 0.25).abs() < 1e-12);
        // Relay to each of the m = 3 leaves at pλ/m.
        for leaf in topology.leaves_of(i).unwrap() {
            assert!((sim.link_rate(h, leaf) - 0.5 / 3.0).abs() < 1e-12);
        }
    }
}

#[test]
fn replays_are_deterministic() {
    let cfg = SimConfig::new(
        flat(12, 1.0, PolicyKind::AsumanFrozen { c_coeff: 0.1 }),
        300,
        77,
    );
    let trace = |cfg: SimConfig| {
        let mut sim = Simulation::new(cfg).unwrap();
        let mut evs: Vec<(Event, f64)> = Vec::new();
        while let Some(ev) = sim.step().unwrap() {
            evs.push((ev, sim.state().t));
        }
        evs
    };
    assert_eq!(trace(cfg.clone()), trace(cfg.clone()));
    let other = SimConfig::new(cfg.spec.clone(), 300, 78);
    assert_ne!(trace(cfg), trace(other));
}

#[test]
fn sensing_delay_barely_matters_on_large_networks() {
    let n = 200;
    let run = |c_coeff| {
        Experiment::new(flat(n, 1.0, PolicyKind::Asuman { c_coeff }), 2_000, 4, 5)
            .run(0)
            .unwrap()
            .network()
            .mean
    };
    let (silent, sensing) = (run(0.0), run(1.0 / n as f64));
    assert!(
        (silent - sensing).abs() < 0.1,
        "C=0 {silent} vs C=1/n {sensing}"
    );
}

#[test]
fn stale_gossip_breaks_the_complete_network_bound() {
    // Uniform gossip lets nodes of any age transmit; at n = 400 its age sits
    // well above the age-sensing limit.
    let stats = Experiment::new(flat(400, 1.0, PolicyKind::UniformGossip), 2_000, 4, 5)
        .run(0)
        .unwrap();
    assert!(stats.network().lower(1.96) > bounds::asuman_ub_limit(1.0, 1.0).unwrap());
}
