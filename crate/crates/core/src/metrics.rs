//! Time-averaged ages, epoch statistics, replication ensembles and scaling fits.

use serde::Serialize;

use crate::error::{Error, Result};

/// Integrals `∫Δ_i dt` over a measurement window, built from piecewise-constant
/// age trajectories.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AgeAccumulator {
    integrals: Vec<f64>,
    window: f64,
    receptions: Vec<u64>,
    epoch_min_ages: Vec<u64>,
}

impl AgeAccumulator {
    pub fn new(n: usize) -> Self {
        AgeAccumulator {
            integrals: vec![0.0; n],
            window: 0.0,
            receptions: vec![0; n],
            epoch_min_ages: Vec::new(),
        }
    }

    /// Adds `ages[i]·dt` to every node: `ages` held constant for `dt`.
    pub fn accumulate(&mut self, ages: &[u64], dt: f64) -> Result<()> {
        if !(dt >= 0.0) {
            return Err(Error::invalid(format!(
                "segment length dt = {dt} must be >= 0"
            )));
        }
        if ages.len() != self.integrals.len() {
            return Err(Error::invalid(format!(
                "age snapshot has {} entries, accumulator tracks {}",
                ages.len(),
                self.integrals.len()
            )));
        }
        for (acc, &a) in self.integrals.iter_mut().zip(ages) {
            *acc += a as f64 * dt;
        }
        self.window += dt;
        Ok(())
    }

    pub fn record_reception(&mut self, i: usize) {
        self.receptions[i] += 1;
    }

    pub fn record_epoch_min(&mut self, min_age: u64) {
        self.epoch_min_ages.push(min_age);
    }

    pub fn integrals(&self) -> &[f64] {
        &self.integrals
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    pub fn receptions(&self) -> &[u64] {
        &self.receptions
    }

    pub fn epoch_min_ages(&self) -> &[u64] {
        &self.epoch_min_ages
    }

    /// Time-averaged age of each node over the window.
    pub fn means(&self) -> Result<Vec<f64>> {
        if !(self.window > 0.0) {
            return Err(Error::invalid("measurement window has zero length"));
        }
        Ok(self.integrals.iter().map(|x| x / self.window).collect())
    }
}

/// Integrates ages lazily from versions: `∫Δ_i = ∫N_s - ∫N_i`, so a source
/// update costs O(1) instead of touching every node.
#[derive(Debug, Clone)]
pub struct VersionIntegrator {
    start: f64,
    base: u64,
    source: Track,
    nodes: Vec<Track>,
}

#[derive(Debug, Clone, Copy)]
struct Track {
    area: f64,
    last: f64,
    level: f64,
}

impl Track {
    fn advance(&mut self, t: f64) {
        self.area += self.level * (t - self.last);
        self.last = t;
    }
}

impl VersionIntegrator {
    /// Starts a window at `t` with the given versions.
    pub fn start(t: f64, source_version: u64, node_versions: &[u64]) -> Self {
        let base = source_version;
        let level = |v: u64| v as f64 - base as f64;
        VersionIntegrator {
            start: t,
            base,
            source: Track {
                area: 0.0,
                last: t,
                level: 0.0,
            },
            nodes: node_versions
                .iter()
                .map(|&v| Track {
                    area: 0.0,
                    last: t,
                    level: level(v),
                })
                .collect(),
        }
    }

    pub fn source_changed(&mut self, t: f64, version: u64) {
        self.source.advance(t);
        self.source.level = version as f64 - self.base as f64;
    }

    pub fn node_changed(&mut self, i: usize, t: f64, version: u64) {
        let track = &mut self.nodes[i];
        track.advance(t);
        track.level = version as f64 - self.base as f64;
    }

    /// Closes the window at `t` and writes the integrals into `acc`.
    pub fn finish_into(mut self, t: f64, acc: &mut AgeAccumulator) {
        self.source.advance(t);
        for (out, track) in acc.integrals.iter_mut().zip(self.nodes.iter_mut()) {
            track.advance(t);
            *out = (self.source.area - track.area).max(0.0);
        }
        acc.window = t - self.start;
    }
}

/// Mean of `Δ̃[k]` for `k >= from`.
pub fn epoch_min_age_mean(samples: &[u64], from: usize) -> Result<f64> {
    if from >= samples.len() {
        return Err(Error::invalid(format!(
            "tail starting at epoch {from} is empty ({} samples)",
            samples.len()
        )));
    }
    let tail = &samples[from..];
    Ok(tail.iter().map(|&x| x as f64).sum::<f64>() / tail.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct EventCounts {
    pub self_updates: u64,
    pub direct: u64,
    pub relay: u64,
    pub gossip: u64,
    pub phase_changes: u64,
}

/// Outcome of one simulated run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunStatistics {
    pub per_node_mean: Vec<f64>,
    pub network_mean: f64,
    /// Mean of `Δ̃[k]` over the second half of the epochs, if any epoch began.
    pub min_age_tail_mean: Option<f64>,
    #[serde(skip)]
    pub epoch_min_ages: Vec<u64>,
    pub window: f64,
    pub events: EventCounts,
    pub receptions: Vec<u64>,
    pub replication: u64,
    pub seed: u64,
    pub spec_fingerprint: u64,
}

impl RunStatistics {
    pub fn from_accumulator(
        acc: AgeAccumulator,
        events: EventCounts,
        replication: u64,
        seed: u64,
        spec_fingerprint: u64,
    ) -> Result<Self> {
        let per_node_mean = acc.means()?;
        let network_mean = mean(&per_node_mean);
        let min_age_tail_mean =
            epoch_min_age_mean(&acc.epoch_min_ages, acc.epoch_min_ages.len() / 2).ok();
        Ok(RunStatistics {
            per_node_mean,
            network_mean,
            min_age_tail_mean,
            epoch_min_ages: acc.epoch_min_ages,
            window: acc.window,
            events,
            receptions: acc.receptions,
            replication,
            seed,
            spec_fingerprint,
        })
    }

    /// Mean age over a subset of nodes, e.g. the leaves of a clustered network.
    pub fn mean_over(&self, nodes: &[usize]) -> f64 {
        mean(
            &nodes
                .iter()
                .map(|&i| self.per_node_mean[i])
                .collect::<Vec<_>>(),
        )
    }
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Mean and standard error of a sample; the error is absent for a single value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: Option<f64>,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let m = mean(xs);
        let stderr = (xs.len() > 1).then(|| {
            let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
            (var / xs.len() as f64).sqrt()
        });
        Estimate { mean: m, stderr }
    }

    /// `mean + z·stderr`, or the mean alone when there is no error estimate.
    pub fn upper(&self, z: f64) -> f64 {
        self.mean + z * self.stderr.unwrap_or(0.0)
    }

    pub fn lower(&self, z: f64) -> f64 {
        self.mean - z * self.stderr.unwrap_or(0.0)
    }
}

/// Replications of one spec. Runs are kept in canonical order so that
/// merging is exactly order-independent.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStatistics {
    runs: Vec<RunStatistics>,
}

impl EnsembleStatistics {
    pub fn replications(&self) -> usize {
        self.runs.len()
    }

    pub fn runs(&self) -> &[RunStatistics] {
        &self.runs
    }

    pub fn n(&self) -> usize {
        self.runs[0].per_node_mean.len()
    }

    pub fn spec_fingerprint(&self) -> u64 {
        self.runs[0].spec_fingerprint
    }

    pub fn network(&self) -> Estimate {
        Estimate::from_samples(&self.runs.iter().map(|r| r.network_mean).collect::<Vec<_>>())
    }

    pub fn node(&self, i: usize) -> Estimate {
        Estimate::from_samples(
            &self
                .runs
                .iter()
                .map(|r| r.per_node_mean[i])
                .collect::<Vec<_>>(),
        )
    }

    pub fn per_node(&self) -> Vec<Estimate> {
        (0..self.n()).map(|i| self.node(i)).collect()
    }

    /// Mean age over `nodes`, estimated across replications.
    pub fn subset(&self, nodes: &[usize]) -> Estimate {
        Estimate::from_samples(
            &self
                .runs
                .iter()
                .map(|r| r.mean_over(nodes))
                .collect::<Vec<_>>(),
        )
    }

    pub fn min_age_tail(&self) -> Option<Estimate> {
        let xs: Option<Vec<f64>> = self.runs.iter().map(|r| r.min_age_tail_mean).collect();
        xs.map(|xs| Estimate::from_samples(&xs))
    }
}

/// Combines runs (and previously merged ensembles) of the same spec.
pub fn merge<I>(parts: I) -> Result<EnsembleStatistics>
where
    I: IntoIterator<Item = RunStatistics>,
{
    let mut runs: Vec<RunStatistics> = parts.into_iter().collect();
    let Some(first) = runs.first() else {
        return Err(Error::invalid("cannot merge zero runs"));
    };
    let (fp, n) = (first.spec_fingerprint, first.per_node_mean.len());
    if let Some(bad) = runs
        .iter()
        .find(|r| r.spec_fingerprint != fp || r.per_node_mean.len() != n)
    {
        return Err(Error::invalid(format!(
            "run {} (spec {:016x}) does not match spec {fp:016x}",
            bad.replication, bad.spec_fingerprint
        )));
    }
    runs.sort_by(|a, b| {
        (a.replication, a.seed)
            .cmp(&(b.replication, b.seed))
            .then(a.network_mean.total_cmp(&b.network_mean))
    });
    Ok(EnsembleStatistics { runs })
}

impl EnsembleStatistics {
    pub fn merge_with(self, other: EnsembleStatistics) -> Result<EnsembleStatistics> {
        merge(self.runs.into_iter().chain(other.runs))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingModel {
    Constant,
    Log,
    Sqrt,
    Linear,
    QuarterPower,
}

impl ScalingModel {
    pub const ALL: [ScalingModel; 5] = [
        ScalingModel::Constant,
        ScalingModel::Log,
        ScalingModel::Sqrt,
        ScalingModel::Linear,
        ScalingModel::QuarterPower,
    ];

    pub fn basis(self, n: f64) -> f64 {
        match self {
            ScalingModel::Constant => 1.0,
            ScalingModel::Log => n.ln(),
            ScalingModel::Sqrt => n.sqrt(),
            ScalingModel::Linear => n,
            ScalingModel::QuarterPower => n.powf(0.25),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScalingModel::Constant => "constant",
            ScalingModel::Log => "log",
            ScalingModel::Sqrt => "sqrt",
            ScalingModel::Linear => "linear",
            ScalingModel::QuarterPower => "quarter_power",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingFit {
    pub model: ScalingModel,
    pub coefficient: f64,
    pub offset: f64,
    /// Sum of squared residuals.
    pub residual: f64,
}

impl ScalingFit {
    pub fn predict(&self, n: f64) -> f64 {
        self.coefficient * self.model.basis(n) + self.offset
    }
}

fn check_points(points: &[(f64, f64)]) -> Result<()> {
    if points.len() < 3 {
        return Err(Error::invalid(format!(
            "scaling fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if points
        .iter()
        .any(|&(n, a)| !(n > 0.0) || !n.is_finite() || !a.is_finite())
    {
        return Err(Error::invalid("scaling fit needs finite points with n > 0"));
    }
    let mut ns: Vec<f64> = points.iter().map(|p| p.0).collect();
    ns.sort_by(f64::total_cmp);
    if ns.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::invalid("scaling fit needs distinct n values"));
    }
    Ok(())
}

/// Least-squares fit of `a ≈ α·g(n) + β`. For the constant model `α = 0`.
pub fn fit_scaling(points: &[(f64, f64)], model: ScalingModel) -> Result<ScalingFit> {
    check_points(points)?;
    let k = points.len() as f64;
    let mean_a = points.iter().map(|p| p.1).sum::<f64>() / k;
    let (coefficient, offset) = if model == ScalingModel::Constant {
        (0.0, mean_a)
    } else {
        let g: Vec<f64> = points.iter().map(|p| model.basis(p.0)).collect();
        let mean_g = g.iter().sum::<f64>() / k;
        let sxx: f64 = g.iter().map(|x| (x - mean_g).powi(2)).sum();
        let sxy: f64 = g
            .iter()
            .zip(points)
            .map(|(x, p)| (x - mean_g) * (p.1 - mean_a))
            .sum();
        let alpha = sxy / sxx;
        (alpha, mean_a - alpha * mean_g)
    };
    let residual = points
        .iter()
        .map(|&(n, a)| (a - coefficient * model.basis(n) - offset).powi(2))
        .sum();
    Ok(ScalingFit {
        model,
        coefficient,
        offset,
        residual,
    })
}

/// Least-squares fit of the pure scaling law `a ≈ α·g(n)` (no offset);
/// every candidate then has one free parameter, so residuals compare directly.
pub fn fit_proportional(points: &[(f64, f64)], model: ScalingModel) -> Result<ScalingFit> {
    check_points(points)?;
    let sgg: f64 = points.iter().map(|p| model.basis(p.0).powi(2)).sum();
    let sga: f64 = points.iter().map(|p| model.basis(p.0) * p.1).sum();
    let coefficient = sga / sgg;
    let residual = points
        .iter()
        .map(|&(n, a)| (a - coefficient * model.basis(n)).powi(2))
        .sum();
    Ok(ScalingFit {
        model,
        coefficient,
        offset: 0.0,
        residual,
    })
}

/// Proportional fit with the smallest residual among `models`.
pub fn best_proportional_fit(points: &[(f64, f64)], models: &[ScalingModel]) -> Result<ScalingFit> {
    let mut best: Option<ScalingFit> = None;
    for &m in models {
        let fit = fit_proportional(points, m)?;
        if best.is_none_or(|b| fit.residual < b.residual) {
            best = Some(fit);
        }
    }
    best.ok_or_else(|| Error::invalid("no scaling models given"))
}

/// Average ranks, ties sharing the mean of their positions.
fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0;
        for &k in &idx[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation; 0 when either side is constant.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len(), "spearman needs paired samples");
    let (rx, ry) = (ranks(xs), ranks(ys));
    let k = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / k, ry.iter().sum::<f64>() / k);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        0.0
    } else {
        cov / (vx * vy).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(network: f64, replication: u64) -> RunStatistics {
        RunStatistics {
            per_node_mean: vec![network, network],
            network_mean: network,
            min_age_tail_mean: Some(2.0),
            epoch_min_ages: vec![],
            window: 1.0,
            events: EventCounts::default(),
            receptions: vec![0, 0],
            replication,
            seed: replication,
            spec_fingerprint: 7,
        }
    }

    #[test]
    fn accumulate_examples() {
        let mut acc = AgeAccumulator::new(1);
        acc.accumulate(&[0], 1.0).unwrap();
        acc.accumulate(&[1], 2.0).unwrap();
        acc.accumulate(&[0], 1.0).unwrap();
        assert_eq!(acc.means().unwrap(), vec![0.5]);

        let before = acc.clone();
        acc.accumulate(&[9], 0.0).unwrap();
        assert_eq!(acc.integrals(), before.integrals());

        let mut acc = AgeAccumulator::new(2);
        acc.accumulate(&[4, 4], 3.5).unwrap();
        assert_eq!(acc.means().unwrap(), vec![4.0, 4.0]);

        assert!(acc.accumulate(&[1, 1], -1.0).is_err());
        assert!(AgeAccumulator::new(1).means().is_err());
    }

    #[test]
    fn epoch_mean_tail() {
        assert_eq!(epoch_min_age_mean(&[0, 1, 2, 3], 2).unwrap(), 2.5);
        assert!(epoch_min_age_mean(&[0, 1], 2).is_err());
    }

    #[test]
    fn merge_examples() {
        let e = merge(vec![run(2.0, 0), run(3.0, 1)]).unwrap();
        assert_eq!(e.network().mean, 2.5);
        assert!(e.network().stderr.is_some());

        let single = merge(vec![run(2.0, 0)]).unwrap();
        assert_eq!(
            single.network(),
            Estimate {
                mean: 2.0,
                stderr: None
            }
        );

        let a = merge(vec![run(1.1, 0), run(2.3, 1), run(0.7, 2)]).unwrap();
        let b = merge(vec![run(0.7, 2), run(1.1, 0), run(2.3, 1)]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.network(), b.network());

        let mut other = run(1.0, 3);
        other.spec_fingerprint = 8;
        assert!(merge(vec![run(1.0, 0), other]).is_err());
        assert!(merge(Vec::new()).is_err());
    }

    #[test]
    fn fit_examples() {
        let pts: Vec<(f64, f64)> = [10.0, 50.0, 200.0, 600.0]
            .iter()
            .map(|&n: &f64| (n, 2.0 * n.ln() + 1.0))
            .collect();
        let f = fit_scaling(&pts, ScalingModel::Log).unwrap();
        assert!((f.coefficient - 2.0).abs() < 1e-12);
        assert!((f.offset - 1.0).abs() < 1e-12);
        assert!(f.residual < 1e-20);

        let pts = [(10.0, 3.0), (20.0, 3.0), (40.0, 3.0)];
        let f = fit_scaling(&pts, ScalingModel::Constant).unwrap();
        assert_eq!((f.coefficient, f.offset, f.residual), (0.0, 3.0, 0.0));

        // Three exact points, closed-form least squares: slope 1/3, intercept 0.
        let pts = [(60.0, 20.0), (120.0, 40.0), (180.0, 60.0)];
        let f = fit_scaling(&pts, ScalingModel::Linear).unwrap();
        assert!((f.coefficient - 1.0 / 3.0).abs() < 1e-12);
        assert!(f.offset.abs() < 1e-12);

        assert!(fit_scaling(&pts[..2], ScalingModel::Linear).is_err());
        assert!(fit_scaling(&[(1.0, 1.0), (1.0, 2.0), (2.0, 3.0)], ScalingModel::Log).is_err());
    }

    #[test]
    fn proportional_fit_prefers_true_law() {
        let pts: Vec<(f64, f64)> = [64.0, 144.0, 256.0]
            .iter()
            .map(|&n: &f64| (n, 1.5 * n.sqrt()))
            .collect();
        let best = ScalingModel::ALL
            .iter()
            .map(|&m| fit_proportional(&pts, m).unwrap())
            .min_by(|a, b| a.residual.total_cmp(&b.residual))
            .unwrap();
        assert_eq!(best.model, ScalingModel::Sqrt);
        assert!((best.coefficient - 1.5).abs() < 1e-12);
    }

    #[test]
    fn spearman_basics() {
        assert!((spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]) - 1.0).abs() < 1e-12);
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 1.0, 0.5]) + 1.0).abs() < 1e-12);
        assert_eq!(spearman(&[1.0, 1.0], &[2.0, 3.0]), 0.0);
        assert_eq!(ranks(&[5.0, 1.0, 5.0]), vec![1.5, 0.0, 1.5]);
    }

    #[test]
    fn best_fit_picks_generating_model() {
        let pts: Vec<(f64, f64)> = [50.0, 100.0, 200.0, 400.0]
            .iter()
            .map(|&n: &f64| (n, 2.0 * n.ln()))
            .collect();
        assert_eq!(
            best_proportional_fit(&pts, &ScalingModel::ALL)
                .unwrap()
                .model,
            ScalingModel::Log
        );
        assert!(best_proportional_fit(&pts, &[]).is_err());
    }
}
