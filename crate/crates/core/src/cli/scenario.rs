use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::Experiment;
use crate::topology::{
    build_clustered, build_complete, build_grid, build_partial, build_ring, rate_profile_heads,
    rate_profile_power_law, rate_profile_uniform, HeadLinks, Topology,
};
use crate::types::{validate_spec, HeadPolicy, NetworkSpec, PolicyKind, Rates};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyName {
    Complete,
    Partial,
    Ring,
    Grid,
    Clustered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadLinksName {
    None,
    Ring,
    Complete,
}

impl From<HeadLinksName> for HeadLinks {
    fn from(h: HeadLinksName) -> Self {
        match h {
            HeadLinksName::None => HeadLinks::None,
            HeadLinksName::Ring => HeadLinks::Ring,
            HeadLinksName::Complete => HeadLinks::Complete,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySection {
    pub kind: TopologyName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cols: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wrap: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub head_links: Option<HeadLinksName>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesSection {
    #[serde(default = "one")]
    pub lambda_e: f64,
    #[serde(default = "one")]
    pub lambda: f64,
    /// Total gossip capacity; `n·lambda` when absent.
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
}

impl Default for RatesSection {
    fn default() -> Self {
        RatesSection {
            lambda_e: 1.0,
            lambda: 1.0,
            b: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSection {
    #[default]
    Uniform,
    PowerLaw {
        nu: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyName {
    Asuman,
    Uniform,
    Hierarchical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySection {
    pub kind: PolicyName,
    /// Sensing coefficient; `1/n` when absent.
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c_coeff: Option<f64>,
    /// Head relay share; 1/2 when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default)]
    pub frozen: bool,
}

fn default_epochs() -> u64 {
    5_000
}

fn default_replications() -> u64 {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "default_epochs")]
    pub epochs: u64,
    /// 20% of `epochs` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warmup_epochs: Option<u64>,
    #[serde(default = "default_replications")]
    pub replications: u64,
    #[serde(default)]
    pub seed: u64,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            epochs: default_epochs(),
            warmup_epochs: None,
            replications: 20,
            seed: 0,
        }
    }
}

/// JSON experiment description.
///
/// ```json
/// {
///   "topology": { "kind": "complete", "n": 100 },
///   "rates": { "lambda_e": 1, "lambda": 1 },
///   "profile": "uniform",
///   "policy": { "kind": "asuman" },
///   "run": { "epochs": 5000, "replications": 20, "seed": 1 }
/// }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub topology: TopologySection,
    #[serde(default)]
    pub rates: RatesSection,
    #[serde(default)]
    pub profile: ProfileSection,
    pub policy: PolicySection,
    #[serde(default)]
    pub run: RunSection,
}

/// Sweepable scenario parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    N,
    Q,
    Nu,
    P,
    C,
}

impl SweepParam {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "n" => SweepParam::N,
            "q" => SweepParam::Q,
            "nu" => SweepParam::Nu,
            "p" => SweepParam::P,
            "c" => SweepParam::C,
            other => {
                return Err(Error::invalid(format!(
                    "unknown sweep parameter {other:?}; expected one of n, q, nu, p, c"
                )))
            }
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::N => "n",
            SweepParam::Q => "q",
            SweepParam::Nu => "nu",
            SweepParam::P => "p",
            SweepParam::C => "c",
        }
    }
}

/// Parses `param=v1,v2,...`.
pub fn parse_sweep(spec: &str) -> Result<(SweepParam, Vec<f64>)> {
    let (name, values) = spec.split_once('=').ok_or_else(|| {
        Error::invalid(format!("sweep {spec:?} is not of the form param=v1,v2,..."))
    })?;
    let param = SweepParam::parse(name.trim())?;
    let values = values
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::invalid(format!("sweep value {v:?} is not a number")))
        })
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        return Err(Error::invalid("sweep has no values"));
    }
    Ok((param, values))
}

fn as_count(name: &str, v: f64) -> Result<usize> {
    if v >= 1.0 && v.fract() == 0.0 {
        Ok(v as usize)
    } else {
        Err(Error::invalid(format!(
            "{name} = {v} must be a positive integer"
        )))
    }
}

fn exact_sqrt(n: usize) -> Option<usize> {
    let r = (n as f64).sqrt().round() as usize;
    (r * r == n).then_some(r)
}

impl ScenarioFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("scenario: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Copy with one parameter replaced; `n` on a clustered topology sets
    /// `c = m = √n`.
    pub fn with_param(&self, param: SweepParam, value: f64) -> Result<Self> {
        let mut s = self.clone();
        match param {
            SweepParam::N => {
                let n = as_count("n", value)?;
                if s.topology.kind == TopologyName::Clustered {
                    let root = exact_sqrt(n).ok_or_else(|| {
                        Error::invalid(format!("clustered sweep needs square n, got {n}"))
                    })?;
                    s.topology.c = Some(root);
                    s.topology.m = Some(root);
                } else if s.topology.kind == TopologyName::Grid {
                    return Err(Error::invalid(
                        "sweep over n is not defined for grids; set rows/cols",
                    ));
                } else {
                    s.topology.n = Some(n);
                }
            }
            SweepParam::Q => s.topology.q = Some(value),
            SweepParam::Nu => s.profile = ProfileSection::PowerLaw { nu: value },
            SweepParam::P => s.policy.p = Some(value),
            SweepParam::C => s.topology.c = Some(as_count("c", value)?),
        }
        Ok(s)
    }

    fn build_topology(&self) -> Result<Topology> {
        let t = &self.topology;
        let need = |v: Option<usize>, name: &str| {
            v.ok_or_else(|| Error::invalid(format!("topology {:?} needs {name}", t.kind)))
        };
        match t.kind {
            TopologyName::Complete => build_complete(need(t.n, "n")?),
            TopologyName::Partial => {
                let q =
                    t.q.ok_or_else(|| Error::invalid("partial topology needs q"))?;
                build_partial(need(t.n, "n")?, q)
            }
            TopologyName::Ring => build_ring(need(t.n, "n")?),
            TopologyName::Grid => build_grid(
                need(t.rows, "rows")?,
                need(t.cols, "cols")?,
                t.wrap.unwrap_or(true),
            ),
            TopologyName::Clustered => {
                let (c, m) = match (t.c, t.m, t.n) {
                    (Some(c), Some(m), _) => (c, m),
                    (None, None, Some(n)) => {
                        let r = exact_sqrt(n).ok_or_else(|| {
                            Error::invalid(format!(
                                "clustered n = {n} is not a square; give c and m"
                            ))
                        })?;
                        (r, r)
                    }
                    _ => {
                        return Err(Error::invalid(
                            "clustered topology needs c and m (or square n)",
                        ))
                    }
                };
                build_clustered(c, m, t.head_links.unwrap_or(HeadLinksName::Complete).into())
            }
        }
    }

    /// Number of nodes that gossip as peers: leaves for clustered
    /// topologies, every node otherwise. Drives the `C = 1/n` and `B = nλ`
    /// defaults.
    fn peer_count(topo: &Topology) -> usize {
        match topo.cluster_shape() {
            Some((c, m)) => c * m,
            None => topo.n(),
        }
    }

    /// Builds and validates the network.
    pub fn spec(&self) -> Result<NetworkSpec> {
        let topology = self.build_topology()?;
        let peers = Self::peer_count(&topology);
        let r = &self.rates;
        let rates = Rates {
            lambda_e: r.lambda_e,
            lambda: r.lambda,
            gossip_capacity: r.b.unwrap_or(peers as f64 * r.lambda),
        };
        let profile = match (&self.profile, topology.cluster_shape()) {
            (ProfileSection::Uniform, None) => rate_profile_uniform(r.lambda, topology.n())?,
            (ProfileSection::Uniform, Some(_)) => rate_profile_heads(r.lambda, &topology)?,
            (ProfileSection::PowerLaw { nu }, None) => {
                rate_profile_power_law(r.lambda, *nu, topology.n())?
            }
            (ProfileSection::PowerLaw { .. }, Some(_)) => {
                return Err(Error::invalid(
                    "power-law profile is not defined for clustered topologies",
                ))
            }
        };
        let c_coeff = self.policy.c_coeff.unwrap_or(1.0 / peers as f64);
        let policy = match self.policy.kind {
            PolicyName::Uniform => PolicyKind::UniformGossip,
            PolicyName::Asuman if self.policy.frozen => PolicyKind::AsumanFrozen { c_coeff },
            PolicyName::Asuman => PolicyKind::Asuman { c_coeff },
            PolicyName::Hierarchical => {
                let links = match topology.kind() {
                    crate::topology::TopologyKind::Clustered { head_links, .. } => *head_links,
                    _ => HeadLinks::Complete,
                };
                PolicyKind::Hierarchical {
                    p_split: self.policy.p.unwrap_or(0.5),
                    head_policy: HeadPolicy::for_links(links),
                    c_coeff,
                }
            }
        };
        let spec = NetworkSpec {
            topology,
            rates,
            profile,
            policy,
        };
        validate_spec(&spec).map_err(Error::Config)?;
        Ok(spec)
    }

    pub fn experiment(&self) -> Result<Experiment> {
        let spec = self.spec()?;
        let run = &self.run;
        if run.replications == 0 {
            return Err(Error::invalid("run.replications must be >= 1"));
        }
        let warmup = run.warmup_epochs.unwrap_or(run.epochs / 5);
        if run.epochs <= warmup {
            return Err(Error::invalid(format!(
                "run.epochs ({}) must exceed run.warmup_epochs ({warmup})",
                run.epochs
            )));
        }
        Ok(Experiment {
            spec,
            epochs: run.epochs,
            warmup_epochs: warmup,
            replications: run.replications,
            seed: run.seed,
        })
    }
}
