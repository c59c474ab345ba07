//! End-to-end acceptance checks. Each criterion runs its own experiments and
//! reports the measured values next to the thresholds it was held to.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds::{self, mc_recurrence, Recurrence};
use crate::engine::{Event, Phase, SimConfig, Simulation};
use crate::error::Result;
use crate::experiment::{run_all, Experiment};
use crate::metrics::{best_proportional_fit, spearman, EnsembleStatistics, Estimate, ScalingModel};
use crate::topology::{
    build_clustered, build_complete, build_grid, build_partial, build_ring, rate_profile_heads,
    rate_profile_power_law, rate_profile_uniform, HeadLinks, Topology,
};
use crate::types::{HeadPolicy, NetworkSpec, PolicyKind, Rates};

/// Two-sided 95% normal quantile used for "within CI" comparisons.
pub const CI_Z: f64 = 1.96;
/// Relative tolerance for closed-form golden values.
pub const GOLDEN_RTOL: f64 = 1e-9;
/// Relative tolerance on the late-epoch minimum-age mean.
pub const MIN_AGE_RTOL: f64 = 0.03;
/// Allowed relative deviation of the uniform-gossip growth ratio from the log ratio.
pub const LOG_RATIO_TOL: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    /// Fewer epochs and replications, smaller sweeps.
    Quick,
    /// Parameters as stated, plus `n = 600` in the complete-network sweeps.
    Full,
}

impl Level {
    fn epochs(self) -> u64 {
        match self {
            Level::Quick => 2_000,
            Level::Full => 5_000,
        }
    }

    fn replications(self) -> u64 {
        match self {
            Level::Quick => 8,
            Level::Full => 20,
        }
    }

    fn complete_sweep(self) -> Vec<usize> {
        match self {
            Level::Quick => vec![50, 100, 200],
            Level::Full => vec![50, 100, 200, 400, 600],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(
            f,
            "criterion {:>2} {verdict} {}: {}",
            self.id, self.name, self.detail
        )
    }
}

pub const CRITERIA: [(u8, &str); 10] = [
    (1, "single-node oracle"),
    (2, "minimum-age steady state"),
    (3, "asuman bounded age on complete networks"),
    (4, "uniform gossip log growth"),
    (5, "partial connectivity"),
    (6, "ring lower bound"),
    (7, "clustered scalings"),
    (8, "power-law per-node bounds"),
    (9, "engine property suite"),
    (10, "bounds golden values"),
];

/// Runs one criterion. Engine errors become a failed outcome.
pub fn run_criterion(id: u8, level: Level, seed: u64) -> Outcome {
    let name = CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .map(|c| c.1)
        .unwrap_or("unknown criterion");
    let result = match id {
        1 => single_node(level, seed),
        2 => min_age_steady_state(level, seed),
        3 => asuman_bounded(level, seed),
        4 => uniform_log_growth(level, seed),
        5 => partial_connectivity(level, seed),
        6 => ring_lower_bound(level, seed),
        7 => clustered_scalings(level, seed),
        8 => power_law(level, seed),
        9 => property_suite(level, seed),
        10 => golden_values(level, seed),
        _ => Ok((false, format!("no criterion {id}"))),
    };
    let (passed, detail) = result.unwrap_or_else(|e| (false, format!("error: {e}")));
    Outcome {
        id,
        name,
        passed,
        detail,
    }
}

pub fn run_suite(level: Level, seed: u64) -> Vec<Outcome> {
    CRITERIA
        .iter()
        .map(|&(id, _)| run_criterion(id, level, seed))
        .collect()
}

type Verdict = Result<(bool, String)>;

fn flat(topology: Topology, lambda_e: f64, policy: PolicyKind) -> Result<NetworkSpec> {
    let n = topology.n();
    Ok(NetworkSpec {
        rates: Rates::with_default_capacity(lambda_e, 1.0, n),
        profile: rate_profile_uniform(1.0, n)?,
        topology,
        policy,
    })
}

fn asuman(n: usize) -> PolicyKind {
    PolicyKind::Asuman {
        c_coeff: 1.0 / n as f64,
    }
}

fn experiment(spec: NetworkSpec, level: Level, seed: u64) -> Experiment {
    Experiment::new(spec, level.epochs(), level.replications(), seed)
}

fn fmt_est(e: &Estimate) -> String {
    match e.stderr {
        Some(se) => format!("{:.3}±{:.3}", e.mean, se),
        None => format!("{:.3}", e.mean),
    }
}

/// Stationary mean of a single node's age chain (+1 at `λe`, reset to 0 at
/// `λ`) from its truncated balance equations.
fn single_node_ctmc_mean(lambda_e: f64, lambda: f64) -> f64 {
    // Balance: π_k (λe + λ) = π_{k-1} λe for k ≥ 1, so π_k ∝ ρ^k.
    let rho = lambda_e / (lambda_e + lambda);
    let mut weight = 1.0;
    let (mut mass, mut first_moment) = (0.0, 0.0);
    for k in 0..100_000u32 {
        mass += weight;
        first_moment += f64::from(k) * weight;
        weight *= rho;
        if weight < 1e-300 {
            break;
        }
    }
    first_moment / mass
}

fn single_node(level: Level, seed: u64) -> Verdict {
    let oracle = single_node_ctmc_mean(1.0, 1.0);
    let policies = [
        PolicyKind::UniformGossip,
        PolicyKind::Asuman { c_coeff: 1.0 },
        PolicyKind::AsumanFrozen { c_coeff: 0.0 },
    ];
    let exps = policies
        .iter()
        .map(|p| Ok(experiment(flat(build_complete(1)?, 1.0, *p)?, level, seed)))
        .collect::<Result<Vec<_>>>()?;
    let stats = run_all(&exps)?;
    let mut ok = true;
    let mut parts = vec![format!("oracle {oracle:.6}")];
    for (p, s) in policies.iter().zip(&stats) {
        let e = s.network();
        ok &= (e.mean - oracle).abs() <= 3.0 * e.stderr.unwrap_or(0.0);
        parts.push(format!("{} {}", p.name(), fmt_est(&e)));
    }
    Ok((ok, parts.join(", ")))
}

fn min_age_steady_state(level: Level, seed: u64) -> Verdict {
    let n = 100;
    let exp = experiment(flat(build_complete(n)?, 1.0, asuman(n))?, level, seed);
    let tail = exp.run(0)?.min_age_tail().expect("epochs were recorded");
    let target = bounds::min_age_limit(1.0, 1.0)?;
    let rel = (tail.mean - target).abs() / target;
    Ok((
        rel <= MIN_AGE_RTOL,
        format!(
            "late-epoch mean {} vs {target} (rel. dev. {rel:.4}, tol {MIN_AGE_RTOL})",
            fmt_est(&tail)
        ),
    ))
}

fn points(ns: &[usize], stats: &[EnsembleStatistics]) -> Vec<(f64, f64)> {
    ns.iter()
        .zip(stats)
        .map(|(&n, s)| (n as f64, s.network().mean))
        .collect()
}

fn residual(points: &[(f64, f64)], model: ScalingModel) -> Result<f64> {
    Ok(crate::metrics::fit_proportional(points, model)?.residual)
}

fn asuman_bounded(level: Level, seed: u64) -> Verdict {
    let ns = level.complete_sweep();
    let mut ok = true;
    let mut parts = Vec::new();
    for lambda_e in [1.0, 2.0] {
        let bound = bounds::asuman_ub_limit(lambda_e, 1.0)?;
        let exps = ns
            .iter()
            .map(|&n| {
                Ok(experiment(
                    flat(build_complete(n)?, lambda_e, asuman(n))?,
                    level,
                    seed,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let stats = run_all(&exps)?;
        let mut line = format!("λe={lambda_e} bound {bound}:");
        for (n, s) in ns.iter().zip(&stats) {
            let e = s.network();
            let within = e.lower(CI_Z) <= bound;
            ok &= within;
            line.push_str(&format!(
                " n={n} {}{}",
                fmt_est(&e),
                if within { "" } else { "!" }
            ));
        }
        let pts = points(&ns, &stats);
        let (rc, rl) = (
            residual(&pts, ScalingModel::Constant)?,
            residual(&pts, ScalingModel::Log)?,
        );
        ok &= rc < rl;
        line.push_str(&format!("; residual const {rc:.4} vs log {rl:.4}"));
        parts.push(line);
    }
    Ok((ok, parts.join(" | ")))
}

fn uniform_log_growth(level: Level, seed: u64) -> Verdict {
    let ns = level.complete_sweep();
    let exps = ns
        .iter()
        .map(|&n| {
            Ok(experiment(
                flat(build_complete(n)?, 1.0, PolicyKind::UniformGossip)?,
                level,
                seed,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let stats = run_all(&exps)?;
    let pts = points(&ns, &stats);
    let rl = residual(&pts, ScalingModel::Log)?;
    let rc = residual(&pts, ScalingModel::Constant)?;
    let rs = residual(&pts, ScalingModel::Sqrt)?;
    // Ratio between the sizes four times apart: 400/100 at full level.
    let (hi, lo) = match level {
        Level::Quick => (200.0, 50.0),
        Level::Full => (400.0, 100.0),
    };
    let at = |n: f64| {
        pts.iter()
            .find(|p| p.0 == n)
            .map(|p| p.1)
            .expect("size in sweep")
    };
    let ratio = at(hi) / at(lo);
    let log_ratio = hi.ln() / lo.ln();
    let ratio_ok = (ratio - log_ratio).abs() <= LOG_RATIO_TOL * log_ratio;
    let means: Vec<String> = pts.iter().map(|(n, a)| format!("n={n} {a:.3}")).collect();
    Ok((
        rl < rc && rl < rs && ratio_ok,
        format!(
            "{}; residual log {rl:.4}, const {rc:.4}, sqrt {rs:.4}; a({hi})/a({lo}) = {ratio:.4} vs {log_ratio:.4}±{:.0}%",
            means.join(" "),
            LOG_RATIO_TOL * 100.0
        ),
    ))
}

fn partial_connectivity(level: Level, seed: u64) -> Verdict {
    // Two sizes suffice for the bound and ordering; the fit needs a third.
    let ns = [50, 100, 200];
    let qs = [0.5, 1.0 / 3.0];
    let mut exps = Vec::new();
    for &q in &qs {
        for &n in &ns {
            exps.push(experiment(
                flat(build_partial(n, q)?, 1.0, asuman(n))?,
                level,
                seed,
            ));
        }
    }
    let stats = run_all(&exps)?;
    let mut ok = true;
    let mut parts = Vec::new();
    let mean_at = |qi: usize, ni: usize| stats[qi * ns.len() + ni].network();
    for (qi, &q) in qs.iter().enumerate() {
        let bound = bounds::partial_ub(q, 1.0, 1.0)?;
        let mut line = format!("q={q:.3} bound {bound:.3}:");
        for (ni, &n) in ns.iter().enumerate() {
            let e = mean_at(qi, ni);
            let within = e.lower(CI_Z) <= bound;
            ok &= within;
            line.push_str(&format!(" n={n} {}", fmt_est(&e)));
        }
        let pts = points(&ns, &stats[qi * ns.len()..(qi + 1) * ns.len()]);
        let (rc, rl) = (
            residual(&pts, ScalingModel::Constant)?,
            residual(&pts, ScalingModel::Log)?,
        );
        ok &= rc < rl;
        line.push_str(&format!("; residual const {rc:.4} vs log {rl:.4}"));
        parts.push(line);
    }
    for (ni, n) in ns.iter().enumerate() {
        let increasing = mean_at(1, ni).mean > mean_at(0, ni).mean;
        ok &= increasing;
        if !increasing {
            parts.push(format!("n={n} age does not increase as q decreases"));
        }
    }
    Ok((ok, parts.join(" | ")))
}

fn ring_lower_bound(level: Level, seed: u64) -> Verdict {
    let ns = [30, 60];
    let mut exps = ns
        .iter()
        .map(|&n| {
            Ok(experiment(
                flat(build_ring(n)?, 1.0, asuman(n))?,
                level,
                seed,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    exps.push(experiment(
        flat(build_ring(60)?, 1.0, PolicyKind::UniformGossip)?,
        level,
        seed,
    ));
    let stats = run_all(&exps)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, &n) in ns.iter().enumerate() {
        let lb = bounds::ring_lb(n, 1.0, 1.0)?;
        let e = stats[i].network();
        let within = e.upper(CI_Z) >= lb;
        ok &= within;
        parts.push(format!(
            "asuman n={n} {} vs lower bound {lb}{}",
            fmt_est(&e),
            if within { "" } else { " (below)" }
        ));
    }
    let uniform = stats[2].network();
    let asuman60 = stats[1].network();
    let better = uniform.mean < asuman60.mean;
    ok &= better;
    parts.push(format!(
        "uniform n=60 {} vs asuman {}",
        fmt_est(&uniform),
        fmt_est(&asuman60)
    ));
    Ok((ok, parts.join(", ")))
}

fn clustered_spec(root: usize, links: HeadLinks) -> Result<NetworkSpec> {
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

fn clustered_scalings(level: Level, seed: u64) -> Verdict {
    let roots = [8, 12, 16];
    let cases = [
        (HeadLinks::Complete, ScalingModel::Constant),
        (HeadLinks::None, ScalingModel::Sqrt),
        (HeadLinks::Ring, ScalingModel::QuarterPower),
    ];
    let mut exps = Vec::new();
    for &(links, _) in &cases {
        for &r in &roots {
            exps.push(experiment(clustered_spec(r, links)?, level, seed));
        }
    }
    let stats = run_all(&exps)?;
    let mut ok = true;
    let mut parts = Vec::new();
    let optimum = bounds::cluster_optimum(1.0, 1.0)?.1;
    for (ci, &(links, expected)) in cases.iter().enumerate() {
        let block = &stats[ci * roots.len()..(ci + 1) * roots.len()];
        let leaf: Vec<Estimate> = block
            .iter()
            .zip(&roots)
            .map(|(s, &r)| {
                s.subset(
                    &build_clustered(r, r, links)
                        .map(|t| t.leaves())
                        .unwrap_or_default(),
                )
            })
            .collect();
        let pts: Vec<(f64, f64)> = roots
            .iter()
            .zip(&leaf)
            .map(|(&r, e)| ((r * r) as f64, e.mean))
            .collect();
        let best = best_proportional_fit(&pts, &ScalingModel::ALL)?;
        let mut case_ok = best.model == expected;
        let mut line = format!("{:?} heads leaf means", HeadPolicy::for_links(links));
        for (r, e) in roots.iter().zip(&leaf) {
            line.push_str(&format!(" n={} {}", r * r, fmt_est(e)));
        }
        if links == HeadLinks::Complete {
            let under = leaf.iter().all(|e| e.lower(CI_Z) <= optimum);
            case_ok &= under;
            line.push_str(&format!(" (limit {optimum})"));
        }
        line.push_str(&format!(
            "; best fit {} (expected {})",
            best.model.name(),
            expected.name()
        ));
        ok &= case_ok;
        parts.push(line);
    }
    Ok((ok, parts.join(" | ")))
}

fn power_law(level: Level, seed: u64) -> Verdict {
    let n = 100;
    let nus = [0.35, 0.75, 0.95];
    let (upper_limit, _) = bounds::asym_limits(1.0, 1.0)?;
    let exps = nus
        .iter()
        .map(|&nu| {
            let topology = build_complete(n)?;
            Ok(experiment(
                NetworkSpec {
                    rates: Rates::with_default_capacity(1.0, 1.0, n),
                    profile: rate_profile_power_law(1.0, nu, n)?,
                    policy: asuman(n),
                    topology,
                },
                level,
                seed,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let stats = run_all(&exps)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for ((&nu, s), e) in nus.iter().zip(&stats).zip(&exps) {
        let per_node = s.per_node();
        let mut over_bound = 0;
        let mut worst_margin = f64::INFINITY;
        for (j, est) in per_node.iter().enumerate() {
            let ub = bounds::power_law_ub(j + 1, nu, n, 1.0, 1.0)?;
            worst_margin = worst_margin.min(ub - est.lower(CI_Z));
            if est.lower(CI_Z) > ub {
                over_bound += 1;
            }
        }
        let max_mean = per_node.iter().map(|x| x.mean).fold(f64::MIN, f64::max);
        let means: Vec<f64> = per_node.iter().map(|x| x.mean).collect();
        let rho = spearman(e.spec.profile.rates(), &means);
        let case_ok = over_bound == 0 && max_mean <= upper_limit && rho < 0.0;
        ok &= case_ok;
        parts.push(format!(
            "ν={nu}: {over_bound} nodes above bound (min margin {worst_margin:.3}), max mean {max_mean:.3} (≤ {upper_limit}), rank corr {rho:.3}"
        ));
    }
    Ok((ok, parts.join(" | ")))
}

/// Checks the engine invariants along one run; returns a description of the
/// first violation.
pub fn check_run_properties(config: &SimConfig, max_events: usize) -> Result<Option<String>> {
    let spec = &config.spec;
    let n = spec.n();
    let complete = matches!(
        spec.topology.kind(),
        crate::topology::TopologyKind::Complete
    );
    let mut sim = Simulation::new(config.clone())?;
    let mut twin = Simulation::new(config.clone())?;

    // Shadow versions rebuilt from the event stream alone.
    let mut source = 0u64;
    let mut versions = vec![0u64; n];
    let mut snapshot: Vec<u64> = versions.clone();
    let scope_of = |sim: &Simulation, j: usize| {
        sim.state()
            .scopes
            .iter()
            .position(|s| s.members.contains(&j))
    };

    for step in 0..max_events {
        let before = sim.state().clone();
        let ev = match sim.step()? {
            Some(ev) => ev,
            None => break,
        };
        let replay = twin.step()?;
        if replay != Some(ev) || twin.state().t != sim.state().t {
            return Ok(Some(format!(
                "replay diverged at event {step}: {ev:?} vs {replay:?}"
            )));
        }
        match ev {
            Event::SelfUpdate => {
                source += 1;
                snapshot.clone_from(&versions);
            }
            Event::Direct { node } => versions[node] = source,
            Event::Relay { head, leaf } => versions[leaf] = versions[leaf].max(versions[head]),
            Event::Gossip { from, to } => {
                if let Some(s) = scope_of(&sim, from) {
                    let scope = &before.scopes[s];
                    if scope.phase != Phase::Gossiping {
                        return Ok(Some(format!(
                            "gossip from {from} during sensing at t={}",
                            sim.state().t
                        )));
                    }
                    if !scope.active.contains(&from) {
                        return Ok(Some(format!("node {from} gossiped without minimum age")));
                    }
                }
                // Frozen senders forward what they held at the epoch start;
                // the identity check below then catches any newer delivery.
                let sent = match &before.frozen_versions {
                    Some(_) => snapshot[from],
                    None => versions[from],
                };
                versions[to] = versions[to].max(sent);
            }
            Event::GossipStart { .. } | Event::WindowStart | Event::WindowEnd => {}
        }
        let state = sim.state();
        if state.age.source_version() != source {
            return Ok(Some(format!(
                "source version {} != shadow {source}",
                state.age.source_version()
            )));
        }
        for (i, &v) in versions.iter().enumerate() {
            let expected = source - v;
            if state.age.age(i) != expected || state.age.version(i) != v {
                return Ok(Some(format!(
                    "node {i}: age {} but N_s - N_i = {expected} after {ev:?}",
                    state.age.age(i)
                )));
            }
        }
        if ev == Event::SelfUpdate && !sim.is_finished() {
            for scope in &state.scopes {
                let min = scope
                    .members
                    .iter()
                    .map(|&j| state.age.age(j))
                    .min()
                    .unwrap_or(0);
                let argmin: Vec<usize> = scope
                    .members
                    .iter()
                    .copied()
                    .filter(|&j| state.age.age(j) == min)
                    .collect();
                if scope.active != argmin {
                    return Ok(Some(format!(
                        "active set {:?} != argmin {argmin:?}",
                        scope.active
                    )));
                }
            }
        }
        for (idx, scope) in state.scopes.iter().enumerate() {
            let total: f64 = sim
                .event_rates()
                .groups
                .iter()
                .filter(|g| g.scope == Some(idx))
                .map(|g| g.total())
                .sum();
            if scope.phase == Phase::Sensing && total != 0.0 {
                return Ok(Some(format!(
                    "scope {idx} has gossip rate {total} while sensing"
                )));
            }
            if complete && n > 1 && scope.phase == Phase::Gossiping {
                let b = spec.rates.gossip_capacity;
                if (total - b).abs() > 1e-9 * b {
                    return Ok(Some(format!("gossip total {total} != B = {b}")));
                }
            }
        }
    }
    Ok(None)
}

/// Random small network for the property checks.
pub fn random_property_config<R: Rng>(rng: &mut R) -> Result<SimConfig> {
    let n = rng.gen_range(1..=12);
    let lambda_e = [0.5, 1.0, 2.0][rng.gen_range(0..3)];
    let c_coeff = [0.0, 1.0 / n as f64, 0.5][rng.gen_range(0..3)];
    let kind = rng.gen_range(0..6);
    let spec = match kind {
        0 => flat(build_complete(n)?, lambda_e, PolicyKind::Asuman { c_coeff })?,
        1 => flat(
            build_complete(n)?,
            lambda_e,
            PolicyKind::AsumanFrozen { c_coeff },
        )?,
        2 if n >= 3 => flat(build_ring(n)?, lambda_e, PolicyKind::Asuman { c_coeff })?,
        3 if n >= 4 => flat(
            build_partial(n, 0.5)?,
            lambda_e,
            PolicyKind::Asuman { c_coeff },
        )?,
        4 => flat(
            build_grid(3, 3, true)?,
            lambda_e,
            PolicyKind::Asuman { c_coeff },
        )?,
        5 => {
            let links =
                [HeadLinks::None, HeadLinks::Ring, HeadLinks::Complete][rng.gen_range(0..3)];
            let topology = build_clustered(3, 3, links)?;
            NetworkSpec {
                rates: Rates {
                    lambda_e,
                    lambda: 1.0,
                    gossip_capacity: 9.0,
                },
                profile: rate_profile_heads(1.0, &topology)?,
                policy: PolicyKind::Hierarchical {
                    p_split: 0.5,
                    head_policy: HeadPolicy::for_links(links),
                    c_coeff,
                },
                topology,
            }
        }
        _ => flat(build_complete(n)?, lambda_e, PolicyKind::UniformGossip)?,
    };
    Ok(SimConfig::new(spec, 60, rng.gen()))
}

fn property_suite(level: Level, seed: u64) -> Verdict {
    let cases = match level {
        Level::Quick => 40,
        Level::Full => 200,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..cases {
        let config = random_property_config(&mut rng)?;
        if let Some(problem) = check_run_properties(&config, 20_000)? {
            return Ok((
                false,
                format!("case {case} ({}): {problem}", config.spec.policy.name()),
            ));
        }
    }
    Ok((
        true,
        format!("{cases} randomized runs, every event checked"),
    ))
}

fn golden_values(level: Level, seed: u64) -> Verdict {
    let pi = std::f64::consts::PI;
    let golden: Vec<(&str, f64, f64)> = vec![
        ("min-age k=0", bounds::min_age_mean(0, 1.0, 1.0)?, 0.0),
        ("min-age k=1", bounds::min_age_mean(1, 1.0, 1.0)?, 1.0),
        ("min-age k=2", bounds::min_age_mean(2, 1.0, 1.0)?, 1.5),
        ("min-age limit", bounds::min_age_limit(1.0, 1.0)?, 2.0),
        (
            "asuman-ub n=2 B=2",
            bounds::asuman_ub(2, 2.0, 1.0, 1.0)?,
            2.0,
        ),
        ("asuman limit λe=λ", bounds::asuman_ub_limit(1.0, 1.0)?, 3.0),
        (
            "asuman limit λe=2λ",
            bounds::asuman_ub_limit(2.0, 1.0)?,
            5.0,
        ),
        ("b[1]", bounds::sensing_bound_b(1, 1.0, 1.0)?, 1.0),
        ("b[2]", bounds::sensing_bound_b(2, 1.0, 1.0)?, 2.5),
        ("b limit", bounds::sensing_bound_b_limit(1.0, 1.0)?, 4.0),
        (
            "pi q=1",
            bounds::partial_pi_tilde(1.0, 1.0, 1.0)?,
            1.0 / 6.0,
        ),
        ("partial-ub q=1", bounds::partial_ub(1.0, 1.0, 1.0)?, 8.0),
        (
            "pi q=1/2",
            bounds::partial_pi_tilde(0.5, 1.0, 1.0)?,
            1.0 / 9.0,
        ),
        ("partial-ub q=1/2", bounds::partial_ub(0.5, 1.0, 1.0)?, 11.0),
        (
            "not-min limit",
            bounds::not_min_prob_limit(1.0, 1.0)?,
            1.0 / 3.0,
        ),
        (
            "not-min n=2",
            bounds::not_min_prob_lb(2, 1.0, 1.0)?,
            1.0 / 7.0,
        ),
        ("not-min λe=0", bounds::not_min_prob_lb(10, 0.0, 1.0)?, 0.0),
        ("ring-lb n=60", bounds::ring_lb(60, 1.0, 1.0)?, 20.0),
        ("ring-lb n=30", bounds::ring_lb(30, 1.0, 1.0)?, 10.0),
        ("cluster optimum", bounds::cluster_optimum(1.0, 1.0)?.1, 8.0),
        (
            "cluster head limit",
            bounds::cluster_head_ub_limit(0.5, 1.0, 1.0)?,
            4.0,
        ),
        (
            "disconnected c=10",
            bounds::disconnected_cluster_ub(10, 1.0, 1.0)?,
            13.0,
        ),
        (
            "ring cluster c=8",
            bounds::ring_cluster_ub(8, 0.5, 1.0, 1.0)?,
            4.0 + (8.0 * pi).sqrt(),
        ),
        (
            "disconnected λe=0",
            bounds::disconnected_cluster_ub(5, 0.0, 1.0)?,
            1.0,
        ),
        (
            "ring cluster λe=0",
            bounds::ring_cluster_ub(5, 0.5, 0.0, 1.0)?,
            1.0,
        ),
        ("asym upper limit", bounds::asym_limits(1.0, 1.0)?.0, 3.0),
        ("asym best limit", bounds::asym_limits(1.0, 1.0)?.1, 1.5),
        (
            "power-law ν=0.35 i=1",
            bounds::power_law_ub_limit(1, 0.35, 1.0, 1.0)?,
            3.0 / 1.65,
        ),
    ];
    let mut failures: Vec<String> = golden
        .iter()
        .filter(|(_, got, want)| (got - want).abs() > GOLDEN_RTOL * want.abs().max(1.0))
        .map(|(name, got, want)| format!("{name}: {got} != {want}"))
        .collect();

    let reps = match level {
        Level::Quick => 20_000,
        Level::Full => 100_000,
    };
    let min_age = mc_recurrence(
        &Recurrence::from_kind("min_age", 1.0, 1.0, 0, 1.0, true)?,
        50,
        reps,
        seed,
    )?;
    let mut worst_z: f64 = 0.0;
    for k in 1..=50 {
        let e = min_age.at(k).expect("k within range");
        let exact = bounds::min_age_mean(k as u64, 1.0, 1.0)?;
        let se = e.stderr.unwrap_or(0.0);
        let z = if se > 0.0 {
            (e.mean - exact).abs() / se
        } else if e.mean == exact {
            0.0
        } else {
            f64::INFINITY
        };
        worst_z = worst_z.max(z);
    }
    if worst_z > 3.0 {
        failures.push(format!("min-age recurrence off by {worst_z:.2} SE"));
    }
    let ring_reps = reps / 20;
    let ring = mc_recurrence(
        &Recurrence::from_kind("ring", 1.0, 1.0, 60, 1.0, true)?,
        2_000,
        ring_reps,
        seed,
    )?;
    let lb = bounds::ring_lb(60, 1.0, 1.0)?;
    let ring_ok = (ring.tail.mean - lb).abs() <= 3.0 * ring.tail.stderr.unwrap_or(0.0);
    if !ring_ok {
        failures.push(format!(
            "ring recurrence limit {} vs {lb}",
            fmt_est(&ring.tail)
        ));
    }
    let detail = format!(
        "{} closed forms; min-age recurrence worst |z| {worst_z:.2} over k≤50; ring recurrence tail {} vs {lb}{}",
        golden.len(),
        fmt_est(&ring.tail),
        if failures.is_empty() { String::new() } else { format!("; failures: {}", failures.join("; ")) }
    );
    Ok((failures.is_empty(), detail))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ctmc_oracle() {
        assert!((single_node_ctmc_mean(1.0, 1.0) - 1.0).abs() < 1e-12);
        assert!((single_node_ctmc_mean(2.0, 1.0) - 2.0).abs() < 1e-12);
        assert_eq!(single_node_ctmc_mean(0.0, 1.0), 0.0);
    }

    #[test]
    fn outcome_line() {
        let o = Outcome {
            id: 3,
            name: "x",
            passed: false,
            detail: "d".into(),
        };
        assert_eq!(o.to_string(), "criterion  3 FAIL x: d");
    }

    #[test]
    fn property_checker_accepts_engine() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let cfg = random_property_config(&mut rng).unwrap();
            assert_eq!(check_run_properties(&cfg, 5_000).unwrap(), None);
        }
    }
}
