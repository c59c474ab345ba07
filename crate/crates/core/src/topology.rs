//! Network structures and source-rate profiles.
//!
//! Every builder returns an immutable [`Topology`] whose adjacency lists are
//! symmetric and irreflexive. Clustered networks lay out cluster `k` as a
//! contiguous block of `m + 1` indices: the `m` leaves first, then the head.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::types::RateProfile;

/// How cluster heads are linked to each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeadLinks {
    None,
    Ring,
    Complete,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TopologyKind {
    Complete,
    /// Each gossiping node reaches a fresh random `floor(q(n-1))` subset every
    /// epoch; the static adjacency is the complete graph.
    Partial {
        q: f64,
    },
    Ring,
    Grid {
        rows: usize,
        cols: usize,
        wrap: bool,
    },
    Clustered {
        clusters: usize,
        leaves: usize,
        head_links: HeadLinks,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    kind: TopologyKind,
    adjacency: Vec<Vec<usize>>,
}

impl Topology {
    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn kind(&self) -> &TopologyKind {
        &self.kind
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Undirected edges `(i, j)` with `i < j`, in index order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (i, adj) in self.adjacency.iter().enumerate() {
            out.extend(adj.iter().filter(|&&j| j > i).map(|&j| (i, j)));
        }
        out.sort_unstable();
        out
    }

    /// `j ∈ adj(i) ⇔ i ∈ adj(j)` and no self-loops or duplicate entries.
    pub fn is_symmetric(&self) -> bool {
        self.adjacency.iter().enumerate().all(|(i, adj)| {
            let mut seen = adj.clone();
            seen.sort_unstable();
            seen.dedup();
            seen.len() == adj.len()
                && adj
                    .iter()
                    .all(|&j| j != i && self.adjacency[j].contains(&i))
        })
    }

    pub fn is_connected(&self) -> bool {
        let n = self.n();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for &j in &self.adjacency[i] {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Debug export, one line per node: `i: j k l`.
    pub fn to_adjacency_text(&self) -> String {
        let mut out = String::new();
        for (i, adj) in self.adjacency.iter().enumerate() {
            let _ = write!(out, "{i}:");
            for j in adj {
                let _ = write!(out, " {j}");
            }
            out.push('\n');
        }
        out
    }

    /// `(clusters, leaves per cluster)` for clustered networks.
    pub fn cluster_shape(&self) -> Option<(usize, usize)> {
        match self.kind {
            TopologyKind::Clustered {
                clusters, leaves, ..
            } => Some((clusters, leaves)),
            _ => None,
        }
    }

    pub fn head_of(&self, cluster: usize) -> Option<usize> {
        self.cluster_shape()
            .filter(|&(c, _)| cluster < c)
            .map(|(_, m)| cluster * (m + 1) + m)
    }

    pub fn leaves_of(&self, cluster: usize) -> Option<std::ops::Range<usize>> {
        self.cluster_shape()
            .filter(|&(c, _)| cluster < c)
            .map(|(_, m)| cluster * (m + 1)..cluster * (m + 1) + m)
    }

    pub fn is_head(&self, i: usize) -> bool {
        match self.cluster_shape() {
            Some((_, m)) => i < self.n() && i % (m + 1) == m,
            None => false,
        }
    }

    /// All head indices in cluster order; empty for flat topologies.
    pub fn heads(&self) -> Vec<usize> {
        match self.cluster_shape() {
            Some((c, _)) => (0..c).filter_map(|k| self.head_of(k)).collect(),
            None => Vec::new(),
        }
    }

    /// All leaf indices; every node for flat topologies.
    pub fn leaves(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| !self.is_head(i)).collect()
    }
}

fn complete_adjacency(n: usize) -> Vec<Vec<usize>> {
    (0..n)
        .map(|i| (0..n).filter(|&j| j != i).collect())
        .collect()
}

pub fn build_complete(n: usize) -> Result<Topology> {
    if n == 0 {
        return Err(Error::invalid("complete graph needs n >= 1"));
    }
    Ok(Topology {
        kind: TopologyKind::Complete,
        adjacency: complete_adjacency(n),
    })
}

pub fn build_partial(n: usize, q: f64) -> Result<Topology> {
    if n == 0 {
        return Err(Error::invalid("partial topology needs n >= 1"));
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::invalid(format!(
            "partial fraction q = {q} must lie in (0, 1]"
        )));
    }
    Ok(Topology {
        kind: TopologyKind::Partial { q },
        adjacency: complete_adjacency(n),
    })
}

pub fn build_ring(n: usize) -> Result<Topology> {
    if n < 3 {
        return Err(Error::invalid(format!("ring needs n >= 3, got {n}")));
    }
    let adjacency = (0..n).map(|i| vec![(i + n - 1) % n, (i + 1) % n]).collect();
    Ok(Topology {
        kind: TopologyKind::Ring,
        adjacency,
    })
}

pub fn build_grid(rows: usize, cols: usize, wrap: bool) -> Result<Topology> {
    if wrap && (rows < 3 || cols < 3) {
        return Err(Error::invalid(format!(
            "wrapped grid needs rows, cols >= 3, got {rows}x{cols}"
        )));
    }
    if rows == 0 || cols == 0 {
        return Err(Error::invalid("grid dimensions must be positive"));
    }
    let idx = |r: usize, c: usize| r * cols + c;
    let mut adjacency = vec![Vec::with_capacity(4); rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            let adj = &mut adjacency[idx(r, c)];
            if wrap {
                adj.push(idx((r + rows - 1) % rows, c));
                adj.push(idx((r + 1) % rows, c));
                adj.push(idx(r, (c + cols - 1) % cols));
                adj.push(idx(r, (c + 1) % cols));
            } else {
                if r > 0 {
                    adj.push(idx(r - 1, c));
                }
                if r + 1 < rows {
                    adj.push(idx(r + 1, c));
                }
                if c > 0 {
                    adj.push(idx(r, c - 1));
                }
                if c + 1 < cols {
                    adj.push(idx(r, c + 1));
                }
            }
        }
    }
    Ok(Topology {
        kind: TopologyKind::Grid { rows, cols, wrap },
        adjacency,
    })
}

/// `clusters` clusters of `leaves` fully-connected leaves plus one head each.
/// Each leaf also links to its own head; heads link to each other per `head_links`.
pub fn build_clustered(clusters: usize, leaves: usize, head_links: HeadLinks) -> Result<Topology> {
    if clusters == 0 {
        return Err(Error::invalid("clustered topology needs c >= 1"));
    }
    if leaves < 2 {
        return Err(Error::invalid(format!(
            "clusters need m >= 2 leaves, got {leaves}"
        )));
    }
    if head_links == HeadLinks::Ring && clusters < 3 {
        return Err(Error::invalid(format!(
            "ring of heads needs c >= 3, got {clusters}"
        )));
    }
    let block = leaves + 1;
    let head = |k: usize| k * block + leaves;
    let mut adjacency = vec![Vec::new(); clusters * block];
    for k in 0..clusters {
        let base = k * block;
        for (l, adj) in adjacency.iter_mut().enumerate().skip(base).take(leaves) {
            *adj = (base..base + leaves).filter(|&j| j != l).collect();
            adj.push(head(k));
        }
        let h = head(k);
        adjacency[h] = (base..base + leaves).collect();
        match head_links {
            HeadLinks::None => {}
            HeadLinks::Ring => {
                adjacency[h].push(head((k + clusters - 1) % clusters));
                adjacency[h].push(head((k + 1) % clusters));
            }
            HeadLinks::Complete => {
                adjacency[h].extend((0..clusters).filter(|&o| o != k).map(head));
            }
        }
    }
    Ok(Topology {
        kind: TopologyKind::Clustered {
            clusters,
            leaves,
            head_links,
        },
        adjacency,
    })
}

pub fn rate_profile_uniform(lambda: f64, n: usize) -> Result<RateProfile> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!(
            "lambda = {lambda} must be finite and > 0"
        )));
    }
    if n == 0 {
        return Err(Error::invalid("rate profile needs n >= 1"));
    }
    Ok(RateProfile::new(vec![lambda / n as f64; n]))
}

/// `λ_i = θ ν^i`, `i = 1..n`, normalised so the rates sum to `λ`.
/// `ν = 1` is the uniform profile.
pub fn rate_profile_power_law(lambda: f64, nu: f64, n: usize) -> Result<RateProfile> {
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(Error::invalid(format!(
            "power-law base nu = {nu} must lie in (0, 1]"
        )));
    }
    if nu == 1.0 {
        return rate_profile_uniform(lambda, n);
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!(
            "lambda = {lambda} must be finite and > 0"
        )));
    }
    if n == 0 {
        return Err(Error::invalid("rate profile needs n >= 1"));
    }
    let scale = lambda * (1.0 - nu) / (nu * (1.0 - nu.powi(n as i32)));
    let rates = (1..=n).map(|i| scale * nu.powi(i as i32)).collect();
    Ok(RateProfile::new(rates))
}

/// Source feeds every cluster head at `λ/c`; leaves get nothing directly.
pub fn rate_profile_heads(lambda: f64, topology: &Topology) -> Result<RateProfile> {
    let heads = topology.heads();
    if heads.is_empty() {
        return Err(Error::invalid(
            "head rate profile needs a clustered topology",
        ));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!(
            "lambda = {lambda} must be finite and > 0"
        )));
    }
    let mut rates = vec![0.0; topology.n()];
    let share = lambda / heads.len() as f64;
    for h in heads {
        rates[h] = share;
    }
    Ok(RateProfile::new(rates))
}
