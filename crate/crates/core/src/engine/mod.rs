//! Exact continuous-time simulation of source updates and gossip.
//!
//! Every event class is a Poisson clock with the rate given by the current
//! [`RateTable`]. Rates only change at epoch starts (source self-updates) and
//! at the end of a sensing interval, so the table is rebuilt there and
//! nowhere else. Ages are integrated lazily from versions.

mod rates;
mod trace;

use std::io::Write;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use rates::{
    next_event, pick_class, sample_exp, EventClass, GossipGroup, GroupKind, NextEvent, RateTable,
};
pub use trace::TraceRecord;

use crate::error::{Error, Result};
use crate::metrics::{AgeAccumulator, EventCounts, RunStatistics, VersionIntegrator};
use crate::topology::TopologyKind;
use crate::types::{min_age_set, validate_spec, AgeVector, HeadPolicy, NetworkSpec, PolicyKind};

/// Time budget used when the source never self-updates: `10^4 / λ`.
pub const FROZEN_SOURCE_BUDGET: f64 = 1e4;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub spec: NetworkSpec,
    /// Number of source self-updates `K` to simulate.
    pub horizon_epochs: u64,
    /// Epochs discarded before measurement starts.
    pub warmup_epochs: u64,
    pub seed: u64,
    /// Replication index, carried into the statistics.
    pub replication: u64,
}

impl SimConfig {
    /// Warm-up defaults to 20% of the horizon.
    pub fn new(spec: NetworkSpec, horizon_epochs: u64, seed: u64) -> Self {
        SimConfig {
            spec,
            horizon_epochs,
            warmup_epochs: horizon_epochs / 5,
            seed,
            replication: 0,
        }
    }

    pub fn with_warmup(mut self, warmup_epochs: u64) -> Self {
        self.warmup_epochs = warmup_epochs;
        self
    }

    pub fn with_replication(mut self, replication: u64, seed: u64) -> Self {
        self.replication = replication;
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Sensing,
    Gossiping,
}

/// A set of nodes that compare ages at each epoch start and share one budget.
#[derive(Debug, Clone, PartialEq)]
pub struct Scope {
    pub members: Vec<usize>,
    pub capacity: f64,
    pub phase: Phase,
    /// Minimum-age members at the last epoch start.
    pub active: Vec<usize>,
    /// `Δ̃[k]` over the members.
    pub min_age: u64,
    pub gossip_start: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub age: AgeVector,
    pub epoch: u64,
    pub epoch_start: f64,
    pub scopes: Vec<Scope>,
    /// Versions transmitted by active nodes in frozen mode.
    pub frozen_versions: Option<Vec<Option<u64>>>,
    /// Per-epoch gossip targets of active nodes on a partial topology.
    pub interval_targets: Option<Vec<Vec<usize>>>,
}

impl SimState {
    /// Phase of the first sensing scope (the only one for flat networks).
    pub fn phase(&self) -> Option<Phase> {
        self.scopes.first().map(|s| s.phase)
    }

    pub fn active_set(&self) -> Option<&[usize]> {
        self.scopes.first().map(|s| s.active.as_slice())
    }

    /// Version node `j` sends when it gossips.
    pub fn transmitted_version(&self, j: usize) -> u64 {
        match &self.frozen_versions {
            Some(snap) => snap[j].unwrap_or_else(|| self.age.version(j)),
            None => self.age.version(j),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Event {
    SelfUpdate,
    Direct { node: usize },
    Relay { head: usize, leaf: usize },
    Gossip { from: usize, to: usize },
    GossipStart { scope: usize },
    WindowStart,
    WindowEnd,
}

enum DirectSampler {
    None,
    Uniform(Vec<usize>),
    Weighted(WeightedIndex<f64>),
}

/// Static, spec-derived wiring of the run.
struct Layout {
    gossip_targets: Vec<Vec<usize>>,
    relay_targets: Vec<Vec<usize>>,
    always_on: Vec<GossipGroup>,
    scope_templates: Vec<(Vec<usize>, f64)>,
    partial_fanout: Option<usize>,
    frozen: bool,
    c_coeff: f64,
    direct: DirectSampler,
    direct_total: f64,
    lambda_e: f64,
}

impl Layout {
    fn new(spec: &NetworkSpec) -> Result<Self> {
        let topo = &spec.topology;
        let n = topo.n();
        let rates = &spec.rates;

        let clustered = topo.cluster_shape().is_some();
        let gossip_targets: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                topo.neighbors(i)
                    .iter()
                    .copied()
                    .filter(|&j| !clustered || topo.is_head(j) == topo.is_head(i))
                    .collect()
            })
            .collect();
        let mut relay_targets = vec![Vec::new(); n];

        let with_targets = |nodes: Vec<usize>| -> Vec<usize> {
            nodes
                .into_iter()
                .filter(|&i| !gossip_targets[i].is_empty())
                .collect()
        };

        let mut always_on = Vec::new();
        let mut scope_templates = Vec::new();
        let mut c_coeff = 0.0;
        let mut frozen = false;

        match spec.policy {
            PolicyKind::UniformGossip => {
                let senders = with_targets((0..n).collect());
                always_on.push(GossipGroup {
                    kind: GroupKind::Gossip,
                    senders,
                    rate_per_sender: rates.gossip_capacity / n as f64,
                    scope: None,
                });
            }
            PolicyKind::Asuman { c_coeff: c } | PolicyKind::AsumanFrozen { c_coeff: c } => {
                c_coeff = c;
                frozen = matches!(spec.policy, PolicyKind::AsumanFrozen { .. });
                scope_templates.push(((0..n).collect(), rates.gossip_capacity));
            }
            PolicyKind::Hierarchical {
                head_policy,
                c_coeff: c,
                ..
            } => {
                c_coeff = c;
                let (clusters, _) = topo
                    .cluster_shape()
                    .ok_or_else(|| Error::invalid("hierarchical policy needs clusters"))?;
                let p = spec.policy.effective_p().unwrap_or(1.0);
                let lambda = rates.lambda;
                let heads = topo.heads();
                for k in 0..clusters {
                    let leaves: Vec<usize> = topo.leaves_of(k).into_iter().flatten().collect();
                    let h = topo.head_of(k).expect("cluster index in range");
                    relay_targets[h] = leaves.clone();
                    scope_templates.push((leaves, rates.gossip_capacity / clusters as f64));
                }
                if p > 0.0 {
                    always_on.push(GossipGroup {
                        kind: GroupKind::Relay,
                        senders: heads.clone(),
                        rate_per_sender: p * lambda,
                        scope: None,
                    });
                }
                match head_policy {
                    HeadPolicy::Disconnected => {}
                    HeadPolicy::Ring => always_on.push(GossipGroup {
                        kind: GroupKind::Gossip,
                        senders: with_targets(heads),
                        rate_per_sender: (1.0 - p) * lambda,
                        scope: None,
                    }),
                    HeadPolicy::FullAsuman => {
                        scope_templates.push((heads, clusters as f64 * (1.0 - p) * lambda));
                    }
                }
            }
        }

        let partial_fanout = match topo.kind() {
            TopologyKind::Partial { q } if !scope_templates.is_empty() => {
                Some((q * n.saturating_sub(1) as f64).floor() as usize)
            }
            _ => None,
        };

        let profile = spec.profile.rates();
        let positive: Vec<usize> = (0..n).filter(|&i| profile[i] > 0.0).collect();
        let direct = if positive.is_empty() {
            DirectSampler::None
        } else if positive.iter().all(|&i| profile[i] == profile[positive[0]]) {
            DirectSampler::Uniform(positive)
        } else {
            DirectSampler::Weighted(
                WeightedIndex::new(profile).map_err(|e| Error::invalid(e.to_string()))?,
            )
        };

        Ok(Layout {
            gossip_targets,
            relay_targets,
            always_on,
            scope_templates,
            partial_fanout,
            frozen,
            c_coeff,
            direct,
            direct_total: spec.profile.total(),
            lambda_e: rates.lambda_e,
        })
    }
}

/// A single run. Step it manually to observe every event, or call [`Simulation::run`].
pub struct Simulation {
    config: SimConfig,
    layout: Layout,
    state: SimState,
    table: RateTable,
    rng: ChaCha8Rng,
    acc: AgeAccumulator,
    integrator: Option<VersionIntegrator>,
    counts: EventCounts,
    /// `(start, end)` of the measurement window when the source never updates.
    budget: Option<(f64, f64)>,
    finished: bool,
}

impl Simulation {
    pub fn new(config: SimConfig) -> Result<Self> {
        validate_spec(&config.spec).map_err(Error::Config)?;
        if config.horizon_epochs <= config.warmup_epochs {
            return Err(Error::invalid(format!(
                "horizon ({}) must exceed warm-up ({})",
                config.horizon_epochs, config.warmup_epochs
            )));
        }
        let layout = Layout::new(&config.spec)?;
        let n = config.spec.n();
        let budget = (layout.lambda_e == 0.0).then(|| {
            let end = FROZEN_SOURCE_BUDGET / config.spec.rates.lambda;
            (0.2 * end, end)
        });
        let state = SimState {
            t: 0.0,
            age: AgeVector::new(n),
            epoch: 0,
            epoch_start: 0.0,
            scopes: layout
                .scope_templates
                .iter()
                .map(|(members, capacity)| Scope {
                    members: members.clone(),
                    capacity: *capacity,
                    phase: Phase::Sensing,
                    active: Vec::new(),
                    min_age: 0,
                    gossip_start: 0.0,
                })
                .collect(),
            frozen_versions: layout.frozen.then(|| vec![None; n]),
            interval_targets: layout.partial_fanout.map(|_| vec![Vec::new(); n]),
        };
        let mut sim = Simulation {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            layout,
            state,
            table: RateTable::default(),
            acc: AgeAccumulator::new(n),
            integrator: None,
            counts: EventCounts::default(),
            budget,
            finished: false,
        };
        if sim.budget.is_none() && sim.config.warmup_epochs == 0 {
            sim.start_window();
        }
        sim.begin_epoch()?;
        Ok(sim)
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    /// Current instantaneous rates of every enabled event class.
    pub fn event_rates(&self) -> &RateTable {
        &self.table
    }

    pub fn counts(&self) -> EventCounts {
        self.counts
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    /// Gossip targets of node `j` for the current epoch.
    pub fn targets(&self, j: usize, kind: GroupKind) -> &[usize] {
        match kind {
            GroupKind::Relay => &self.layout.relay_targets[j],
            GroupKind::Gossip => match &self.state.interval_targets {
                Some(sampled) => &sampled[j],
                None => &self.layout.gossip_targets[j],
            },
        }
    }

    /// Instantaneous rate at which `j` pushes its version to `l`.
    pub fn link_rate(&self, j: usize, l: usize) -> f64 {
        self.table
            .groups
            .iter()
            .filter(|g| g.senders.contains(&j))
            .map(|g| {
                let targets = self.targets(j, g.kind);
                if targets.contains(&l) {
                    g.rate_per_sender / targets.len() as f64
                } else {
                    0.0
                }
            })
            .sum()
    }

    fn start_window(&mut self) {
        self.integrator = Some(VersionIntegrator::start(
            self.state.t,
            self.state.age.source_version(),
            self.state.age.node_versions(),
        ));
    }

    fn next_control(&self) -> Option<(f64, Event)> {
        let mut best: Option<(f64, Event)> = None;
        let mut consider = |at: f64, ev: Event| {
            if best.is_none_or(|(b, _)| at < b) {
                best = Some((at, ev));
            }
        };
        for (idx, s) in self.state.scopes.iter().enumerate() {
            if s.phase == Phase::Sensing {
                consider(s.gossip_start, Event::GossipStart { scope: idx });
            }
        }
        if let Some((start, end)) = self.budget {
            if self.integrator.is_none() {
                consider(start, Event::WindowStart);
            } else {
                consider(end, Event::WindowEnd);
            }
        }
        best
    }

    /// Source self-update bookkeeping at `T_k`: new active sets, sensing
    /// timers, frozen snapshots, fresh rate table.
    fn begin_epoch(&mut self) -> Result<()> {
        let t = self.state.t;
        self.state.epoch_start = t;
        let all: Vec<usize> = (0..self.state.age.n()).collect();
        let (_, global_min) = min_age_set(&self.state.age, &all)?;
        self.acc.record_epoch_min(global_min);

        if let Some(snap) = self.state.frozen_versions.as_mut() {
            snap.iter_mut().for_each(|v| *v = None);
        }
        if let Some(targets) = self.state.interval_targets.as_mut() {
            targets.iter_mut().for_each(Vec::clear);
        }
        for idx in 0..self.state.scopes.len() {
            let (active, min_age) = min_age_set(&self.state.age, &self.state.scopes[idx].members)?;
            let silence = self.layout.c_coeff * min_age as f64;
            if let Some(snap) = self.state.frozen_versions.as_mut() {
                for &j in &active {
                    snap[j] = Some(self.state.age.version(j));
                }
            }
            let scope = &mut self.state.scopes[idx];
            scope.active = active;
            scope.min_age = min_age;
            scope.gossip_start = t + silence;
            scope.phase = Phase::Sensing;
            if silence <= 0.0 {
                self.open_gossip(idx);
            }
        }
        self.rebuild_rates();
        Ok(())
    }

    fn open_gossip(&mut self, idx: usize) {
        self.state.scopes[idx].phase = Phase::Gossiping;
        if let (Some(fanout), Some(targets)) = (
            self.layout.partial_fanout,
            self.state.interval_targets.as_mut(),
        ) {
            let n = self.state.age.n();
            for &j in &self.state.scopes[idx].active {
                targets[j] = index::sample(&mut self.rng, n - 1, fanout.min(n - 1))
                    .into_iter()
                    .map(|x| if x >= j { x + 1 } else { x })
                    .collect();
            }
        }
    }

    fn rebuild_rates(&mut self) {
        let mut groups = self.layout.always_on.clone();
        for (idx, s) in self.state.scopes.iter().enumerate() {
            if s.phase != Phase::Gossiping {
                continue;
            }
            let senders: Vec<usize> = s
                .active
                .iter()
                .copied()
                .filter(|&j| !self.targets(j, GroupKind::Gossip).is_empty())
                .collect();
            if senders.is_empty() {
                continue;
            }
            groups.push(GossipGroup {
                kind: GroupKind::Gossip,
                rate_per_sender: s.capacity / s.active.len() as f64,
                senders,
                scope: Some(idx),
            });
        }
        self.table = RateTable {
            self_update: self.layout.lambda_e,
            direct: self.layout.direct_total,
            groups,
        };
    }

    fn version_changed(&mut self, i: usize) {
        if let Some(integ) = self.integrator.as_mut() {
            integ.node_changed(i, self.state.t, self.state.age.version(i));
        }
    }

    fn finish(&mut self) {
        if let Some(integ) = self.integrator.take() {
            integ.finish_into(self.state.t, &mut self.acc);
        }
        self.finished = true;
    }

    /// Advances to and applies the next event. Returns `None` once the run is over.
    pub fn step(&mut self) -> Result<Option<Event>> {
        if self.finished {
            return Ok(None);
        }
        let control = self.next_control();
        let next = next_event(
            self.state.t,
            &self.table,
            control.map(|c| c.0),
            &mut self.rng,
        )?;
        let event = match next {
            NextEvent::Control { at } => {
                self.state.t = at;
                let (_, ev) = control.expect("control event present");
                match ev {
                    Event::GossipStart { scope } => {
                        self.counts.phase_changes += 1;
                        self.open_gossip(scope);
                        self.rebuild_rates();
                    }
                    Event::WindowStart => self.start_window(),
                    Event::WindowEnd => self.finish(),
                    _ => unreachable!("only control events are scheduled"),
                }
                ev
            }
            NextEvent::Sampled { dt, class } => {
                self.state.t += dt;
                self.apply_sampled(class)?
            }
        };
        Ok(Some(event))
    }

    fn apply_sampled(&mut self, class: EventClass) -> Result<Event> {
        match class {
            EventClass::SelfUpdate => {
                self.on_source_self_update()?;
                Ok(Event::SelfUpdate)
            }
            EventClass::Direct => {
                let node = match &self.layout.direct {
                    DirectSampler::Uniform(nodes) => nodes[self.rng.gen_range(0..nodes.len())],
                    DirectSampler::Weighted(w) => w.sample(&mut self.rng),
                    DirectSampler::None => {
                        return Err(Error::Internal("direct update drawn with zero rate".into()))
                    }
                };
                self.on_direct_update(node);
                Ok(Event::Direct { node })
            }
            EventClass::Group(g) => {
                let group = &self.table.groups[g];
                let kind = group.kind;
                let from = group.senders[self.rng.gen_range(0..group.senders.len())];
                let scope = group.scope;
                let pick = self.rng.gen_range(0..self.targets(from, kind).len());
                let to = self.targets(from, kind)[pick];
                match kind {
                    GroupKind::Relay => {
                        self.on_relay(from, to);
                        Ok(Event::Relay {
                            head: from,
                            leaf: to,
                        })
                    }
                    GroupKind::Gossip => {
                        self.on_gossip(from, to, scope)?;
                        Ok(Event::Gossip { from, to })
                    }
                }
            }
        }
    }

    fn on_source_self_update(&mut self) -> Result<()> {
        self.counts.self_updates += 1;
        self.state.age.bump_source();
        if let Some(integ) = self.integrator.as_mut() {
            integ.source_changed(self.state.t, self.state.age.source_version());
        }
        self.state.epoch += 1;
        if self.counts.self_updates >= self.config.horizon_epochs {
            self.finish();
            return Ok(());
        }
        if self.counts.self_updates == self.config.warmup_epochs {
            self.start_window();
        }
        self.begin_epoch()
    }

    /// Source refreshes node `i` directly.
    fn on_direct_update(&mut self, i: usize) {
        self.counts.direct += 1;
        self.acc.record_reception(i);
        if self.state.age.version(i) != self.state.age.source_version() {
            self.state.age.refresh(i);
            self.version_changed(i);
        }
    }

    fn on_relay(&mut self, head: usize, leaf: usize) {
        self.counts.relay += 1;
        self.acc.record_reception(leaf);
        if self.state.age.offer(leaf, self.state.age.version(head)) {
            self.version_changed(leaf);
        }
    }

    fn on_gossip(&mut self, from: usize, to: usize, scope: Option<usize>) -> Result<()> {
        if let Some(s) = scope {
            if self.state.scopes[s].phase != Phase::Gossiping {
                return Err(Error::Internal(format!(
                    "gossip {from}->{to} drawn while scope {s} is sensing"
                )));
            }
        }
        self.counts.gossip += 1;
        self.acc.record_reception(to);
        let offered = self.state.transmitted_version(from);
        if self.state.age.offer(to, offered) {
            self.version_changed(to);
        }
        Ok(())
    }

    /// Runs to the end of the horizon.
    pub fn run(mut self) -> Result<RunStatistics> {
        while self.step()?.is_some() {}
        self.into_statistics()
    }

    /// Runs to the end, writing one trace line per event.
    pub fn run_traced<W: Write>(mut self, out: &mut W) -> Result<RunStatistics> {
        while let Some(ev) = self.step()? {
            let rec = TraceRecord::new(self.state.t, ev, self.state.epoch);
            writeln!(out, "{rec}")
                .map_err(|e| Error::invalid(format!("trace write failed: {e}")))?;
        }
        self.into_statistics()
    }

    fn into_statistics(self) -> Result<RunStatistics> {
        if !self.finished {
            return Err(Error::Internal(
                "statistics requested before the run finished".into(),
            ));
        }
        let fingerprint = self.config.spec.fingerprint();
        RunStatistics::from_accumulator(
            self.acc,
            self.counts,
            self.config.replication,
            self.config.seed,
            fingerprint,
        )
    }
}

pub fn simulate(config: SimConfig) -> Result<RunStatistics> {
    Simulation::new(config)?.run()
}
