//! Domain types shared by the simulator, the bounds and the CLI.

use crate::error::{Error, Result, Violation};
use crate::topology::{HeadLinks, Topology, TopologyKind};

/// Source and gossip rates, in events per unit time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    /// Source self-update rate `λe`.
    pub lambda_e: f64,
    /// Total source-to-network update rate `λ`.
    pub lambda: f64,
    /// Total gossip budget `B` shared by the nodes allowed to gossip.
    pub gossip_capacity: f64,
}

impl Rates {
    /// `B = nλ`, the budget uniform gossip would spend on `n` nodes.
    pub fn with_default_capacity(lambda_e: f64, lambda: f64, n: usize) -> Self {
        Rates {
            lambda_e,
            lambda,
            gossip_capacity: n as f64 * lambda,
        }
    }
}

/// Per-node direct update rates `λ_i` from the source.
#[derive(Debug, Clone, PartialEq)]
pub struct RateProfile {
    per_node_rates: Vec<f64>,
}

impl RateProfile {
    pub fn new(per_node_rates: Vec<f64>) -> Self {
        RateProfile { per_node_rates }
    }

    pub fn rates(&self) -> &[f64] {
        &self.per_node_rates
    }

    pub fn len(&self) -> usize {
        self.per_node_rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_node_rates.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.per_node_rates.iter().sum()
    }
}

/// Source version and node versions; ages are derived as `N_s - N_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AgeVector {
    source_version: u64,
    node_versions: Vec<u64>,
}

impl AgeVector {
    /// All nodes synchronised with the source at version 0.
    pub fn new(n: usize) -> Self {
        AgeVector {
            source_version: 0,
            node_versions: vec![0; n],
        }
    }

    pub fn from_versions(source_version: u64, node_versions: Vec<u64>) -> Result<Self> {
        if let Some(i) = node_versions.iter().position(|&v| v > source_version) {
            return Err(Error::invalid(format!(
                "node {i} holds version {} ahead of the source ({source_version})",
                node_versions[i]
            )));
        }
        Ok(AgeVector {
            source_version,
            node_versions,
        })
    }

    /// Builds the state `N_s = max(ages)`, `N_i = N_s - Δ_i`.
    pub fn from_ages(ages: &[u64]) -> Self {
        let source_version = ages.iter().copied().max().unwrap_or(0);
        AgeVector {
            source_version,
            node_versions: ages.iter().map(|&a| source_version - a).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.node_versions.len()
    }

    pub fn source_version(&self) -> u64 {
        self.source_version
    }

    pub fn node_versions(&self) -> &[u64] {
        &self.node_versions
    }

    pub fn version(&self, i: usize) -> u64 {
        self.node_versions[i]
    }

    pub fn age(&self, i: usize) -> u64 {
        self.source_version - self.node_versions[i]
    }

    pub fn ages(&self) -> Vec<u64> {
        (0..self.n()).map(|i| self.age(i)).collect()
    }

    /// Source self-update: every age grows by one.
    pub fn bump_source(&mut self) {
        self.source_version += 1;
    }

    /// Node `i` synchronises with the source.
    pub fn refresh(&mut self, i: usize) {
        self.node_versions[i] = self.source_version;
    }

    /// Node `i` keeps the fresher of its own version and `offered`.
    /// Returns whether the version changed.
    pub fn offer(&mut self, i: usize, offered: u64) -> bool {
        debug_assert!(offered <= self.source_version);
        if offered > self.node_versions[i] {
            self.node_versions[i] = offered;
            true
        } else {
            false
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeadPolicy {
    /// Heads never gossip; their whole budget relays to leaves (`p = 1`).
    Disconnected,
    /// Heads gossip uniformly to their two ring neighbours at `(1-p)λ/2` each.
    Ring,
    /// Heads run age-sensing gossip among themselves with budget `c(1-p)λ`.
    FullAsuman,
}

impl HeadPolicy {
    pub fn required_links(self) -> HeadLinks {
        match self {
            HeadPolicy::Disconnected => HeadLinks::None,
            HeadPolicy::Ring => HeadLinks::Ring,
            HeadPolicy::FullAsuman => HeadLinks::Complete,
        }
    }

    pub fn for_links(links: HeadLinks) -> Self {
        match links {
            HeadLinks::None => HeadPolicy::Disconnected,
            HeadLinks::Ring => HeadPolicy::Ring,
            HeadLinks::Complete => HeadPolicy::FullAsuman,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicyKind {
    /// Every node always gossips at its share `B/n`, split over its neighbours.
    UniformGossip,
    /// Age-sensing opportunistic gossip: after each source update the nodes
    /// stay silent for `C·Δ̃[k]`, then only the minimum-age nodes gossip.
    Asuman { c_coeff: f64 },
    /// As [`PolicyKind::Asuman`], but active nodes transmit only the version
    /// they held when the epoch began.
    AsumanFrozen { c_coeff: f64 },
    /// Two-layer clusters: leaves run age-sensing gossip inside each cluster,
    /// heads relay to their leaves at `pλ/m` per leaf.
    Hierarchical {
        p_split: f64,
        head_policy: HeadPolicy,
        c_coeff: f64,
    },
}

impl PolicyKind {
    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::UniformGossip => "uniform",
            PolicyKind::Asuman { .. } => "asuman",
            PolicyKind::AsumanFrozen { .. } => "asuman_frozen",
            PolicyKind::Hierarchical {
                head_policy: HeadPolicy::Disconnected,
                ..
            } => "hierarchical_disconnected",
            PolicyKind::Hierarchical {
                head_policy: HeadPolicy::Ring,
                ..
            } => "hierarchical_ring",
            PolicyKind::Hierarchical {
                head_policy: HeadPolicy::FullAsuman,
                ..
            } => "hierarchical_full",
        }
    }

    pub fn c_coeff(&self) -> Option<f64> {
        match *self {
            PolicyKind::UniformGossip => None,
            PolicyKind::Asuman { c_coeff }
            | PolicyKind::AsumanFrozen { c_coeff }
            | PolicyKind::Hierarchical { c_coeff, .. } => Some(c_coeff),
        }
    }

    /// Relay share actually used by the heads; disconnected heads spend all of it.
    pub fn effective_p(&self) -> Option<f64> {
        match *self {
            PolicyKind::Hierarchical {
                head_policy: HeadPolicy::Disconnected,
                ..
            } => Some(1.0),
            PolicyKind::Hierarchical { p_split, .. } => Some(p_split),
            _ => None,
        }
    }
}

/// Everything that defines a network run except horizon and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    pub topology: Topology,
    pub rates: Rates,
    pub profile: RateProfile,
    pub policy: PolicyKind,
}

impl NetworkSpec {
    pub fn n(&self) -> usize {
        self.topology.n()
    }

    /// Stable 64-bit fingerprint used to refuse merging runs of different specs.
    pub fn fingerprint(&self) -> u64 {
        let key = format!(
            "{:?}|{}|{:?}|{:?}|{:?}",
            self.topology.kind(),
            self.n(),
            self.rates,
            self.profile,
            self.policy
        );
        fnv1a(key.as_bytes())
    }
}

pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Nodes of `subset` attaining the minimum age over `subset`, with that minimum.
pub fn min_age_set(ages: &AgeVector, subset: &[usize]) -> Result<(Vec<usize>, u64)> {
    if subset.is_empty() {
        return Err(Error::invalid("minimum-age set over an empty subset"));
    }
    if let Some(&bad) = subset.iter().find(|&&i| i >= ages.n()) {
        return Err(Error::invalid(format!(
            "node index {bad} out of range (n = {})",
            ages.n()
        )));
    }
    // Minimum age is maximum version.
    let best = subset.iter().map(|&i| ages.version(i)).max().unwrap_or(0);
    let members = subset
        .iter()
        .copied()
        .filter(|&i| ages.version(i) == best)
        .collect();
    Ok((members, ages.source_version() - best))
}

const RATE_SUM_RTOL: f64 = 1e-9;

/// Checks a spec for every problem at once; never stops at the first.
pub fn validate_spec(spec: &NetworkSpec) -> Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    let r = &spec.rates;
    for (name, v) in [
        ("lambda_e", r.lambda_e),
        ("lambda", r.lambda),
        ("B", r.gossip_capacity),
    ] {
        if !v.is_finite() {
            out.push(Violation::NonFiniteRate(name));
        } else if v < 0.0 {
            out.push(Violation::NegativeRate(name));
        }
    }
    if r.lambda == 0.0 {
        out.push(Violation::ZeroTotalRate);
    }

    let n = spec.n();
    if spec.profile.len() != n {
        out.push(Violation::ProfileLength {
            expected: n,
            actual: spec.profile.len(),
        });
    }
    let rates = spec.profile.rates();
    if rates.iter().any(|v| !v.is_finite()) {
        out.push(Violation::NonFiniteRate("lambda_i"));
    } else if rates.iter().any(|&v| v < 0.0) {
        out.push(Violation::NegativeRate("lambda_i"));
    } else if r.lambda.is_finite() && r.lambda > 0.0 {
        let total = spec.profile.total();
        if ((total - r.lambda) / r.lambda).abs() > RATE_SUM_RTOL {
            out.push(Violation::RateSumMismatch {
                expected: r.lambda,
                actual: total,
            });
        }
    }

    if let Some(c) = spec.policy.c_coeff() {
        if !(c.is_finite() && c >= 0.0) {
            out.push(Violation::NegativeSensingCoefficient(c));
        }
    }

    match (spec.topology.kind(), &spec.policy) {
        (
            TopologyKind::Clustered { head_links, .. },
            PolicyKind::Hierarchical {
                p_split,
                head_policy,
                ..
            },
        ) => {
            if head_policy.required_links() != *head_links {
                out.push(Violation::PolicyTopologyMismatch(format!(
                    "head policy {head_policy:?} needs head links {:?}, topology has {head_links:?}",
                    head_policy.required_links()
                )));
            }
            if !(0.0..=1.0).contains(p_split) {
                out.push(Violation::FractionOutOfRange {
                    name: "p",
                    value: *p_split,
                });
            }
            for (i, &v) in rates.iter().enumerate() {
                if v > 0.0 && !spec.topology.is_head(i) {
                    out.push(Violation::LeafDirectRate(i));
                }
            }
        }
        (TopologyKind::Clustered { .. }, other) => {
            out.push(Violation::PolicyTopologyMismatch(format!(
                "{} policy on a clustered topology; use the hierarchical policy",
                other.name()
            )))
        }
        (kind, PolicyKind::Hierarchical { .. }) => out.push(Violation::PolicyTopologyMismatch(
            format!("hierarchical policy requires a clustered topology, got {kind:?}"),
        )),
        (TopologyKind::Partial { q }, _) => {
            if !(*q > 0.0 && *q <= 1.0) {
                out.push(Violation::FractionOutOfRange {
                    name: "q",
                    value: *q,
                });
            } else if n >= 2 && (q * (n - 1) as f64).floor() < 1.0 {
                out.push(Violation::EmptyPartialFanout { n, q: *q });
            }
        }
        _ => {}
    }

    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}
