use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{not_min_prob_lb, not_min_prob_limit};
use crate::error::{Error, Result};
use crate::metrics::Estimate;

/// A bounding recurrence driven by i.i.d. epoch lengths `τ_k ~ Exp(λe)`.
///
/// `Sensing` and `Partial` co-simulate the minimum-age sequence from its own
/// recurrence with the same `τ_k`. With `limit` set they use the large-`n`
/// branch probabilities; otherwise `n`, `b` and `c_coeff` enter explicitly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Recurrence {
    MinAge {
        lambda_e: f64,
        lambda: f64,
    },
    Sensing {
        lambda_e: f64,
        lambda: f64,
        n: usize,
        b: f64,
        c_coeff: f64,
        limit: bool,
    },
    Partial {
        lambda_e: f64,
        lambda: f64,
        n: usize,
        b: f64,
        q: f64,
        c_coeff: f64,
        limit: bool,
    },
    Ring {
        lambda_e: f64,
        lambda: f64,
        n: usize,
    },
}

impl Recurrence {
    pub const KINDS: [&'static str; 4] = ["min_age", "sensing", "partial", "ring"];

    /// Builds a recurrence by kind name with `B = nλ`, `C = 1/n`.
    pub fn from_kind(
        kind: &str,
        lambda_e: f64,
        lambda: f64,
        n: usize,
        q: f64,
        limit: bool,
    ) -> Result<Self> {
        let b = n as f64 * lambda;
        let c_coeff = 1.0 / n.max(1) as f64;
        let r = match kind {
            "min_age" => Recurrence::MinAge { lambda_e, lambda },
            "sensing" => Recurrence::Sensing {
                lambda_e,
                lambda,
                n,
                b,
                c_coeff,
                limit,
            },
            "partial" => Recurrence::Partial {
                lambda_e,
                lambda,
                n,
                b,
                q,
                c_coeff,
                limit,
            },
            "ring" => Recurrence::Ring {
                lambda_e,
                lambda,
                n,
            },
            other => {
                return Err(Error::invalid(format!(
                    "unknown recurrence kind {other:?}; expected one of {:?}",
                    Self::KINDS
                )))
            }
        };
        r.check()?;
        Ok(r)
    }

    fn rates(&self) -> (f64, f64) {
        match *self {
            Recurrence::MinAge { lambda_e, lambda }
            | Recurrence::Sensing {
                lambda_e, lambda, ..
            }
            | Recurrence::Partial {
                lambda_e, lambda, ..
            }
            | Recurrence::Ring {
                lambda_e, lambda, ..
            } => (lambda_e, lambda),
        }
    }

    fn check(&self) -> Result<()> {
        let (lambda_e, lambda) = self.rates();
        if !(lambda_e.is_finite() && lambda_e > 0.0) {
            return Err(Error::invalid(
                "recurrences need lambda_e > 0 (epochs must end)",
            ));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::invalid("recurrences need lambda > 0"));
        }
        match *self {
            Recurrence::MinAge { .. } => Ok(()),
            Recurrence::Sensing {
                n,
                b,
                c_coeff,
                limit,
                ..
            } => {
                if !limit && (n < 2 || !(b > 0.0) || !(c_coeff >= 0.0)) {
                    return Err(Error::invalid(
                        "sensing recurrence needs n >= 2, B > 0, C >= 0",
                    ));
                }
                Ok(())
            }
            Recurrence::Partial {
                n,
                b,
                q,
                c_coeff,
                limit,
                ..
            } => {
                if !(q > 0.0 && q <= 1.0) {
                    return Err(Error::invalid(format!("q = {q} must lie in (0, 1]")));
                }
                if !limit {
                    if n < 2 || !(b > 0.0) || !(c_coeff >= 0.0) {
                        return Err(Error::invalid(
                            "partial recurrence needs n >= 2, B > 0, C >= 0",
                        ));
                    }
                    if (q * (n - 1) as f64).floor() < 1.0 {
                        return Err(Error::invalid("partial fan-out floor(q(n-1)) is zero"));
                    }
                }
                Ok(())
            }
            Recurrence::Ring { n, .. } => {
                if n < 3 {
                    return Err(Error::invalid("ring recurrence needs n >= 3"));
                }
                Ok(())
            }
        }
    }

    /// One trajectory `x[1..=k_max]` written into `out`.
    fn trajectory<R: Rng>(&self, rng: &mut R, out: &mut [f64]) {
        let (lambda_e, lambda) = self.rates();
        let mut x = 1.0_f64;
        let mut min_age = 1.0_f64;
        if let Some(first) = out.first_mut() {
            *first = 1.0;
        }
        for slot in out.iter_mut().skip(1) {
            let t = -(1.0 - rng.gen::<f64>()).ln() / lambda_e;
            let u_branch: f64 = rng.gen();
            let u_min: f64 = rng.gen();
            let prev_min = min_age;
            x = match *self {
                Recurrence::MinAge { .. } => {
                    if u_branch < 1.0 - (-lambda * t).exp() {
                        1.0
                    } else {
                        x + 1.0
                    }
                }
                Recurrence::Sensing {
                    n,
                    b,
                    c_coeff,
                    limit,
                    ..
                } => {
                    let hit = if limit {
                        1.0 - (-lambda * t).exp()
                    } else {
                        let silence = c_coeff * prev_min;
                        if t <= silence {
                            0.0
                        } else {
                            1.0 - (-(b / (n - 1) as f64) * (t - silence)).exp()
                        }
                    };
                    if u_branch < hit {
                        prev_min + 1.0
                    } else {
                        x + 1.0
                    }
                }
                Recurrence::Partial {
                    lambda_e,
                    n,
                    b,
                    q,
                    c_coeff,
                    limit,
                    ..
                } => {
                    let pi = if limit {
                        let not_min = not_min_prob_limit(lambda_e, lambda).unwrap_or(0.0);
                        not_min * q * (1.0 - (-lambda * t / q).exp())
                    } else {
                        let silence = c_coeff * prev_min;
                        if t <= silence {
                            0.0
                        } else {
                            let fanout = (q * (n - 1) as f64).floor();
                            let not_min = not_min_prob_lb(n, lambda_e, lambda).unwrap_or(0.0);
                            not_min * q * (1.0 - (-b * (t - silence) / fanout).exp())
                        }
                    };
                    if u_branch < pi {
                        prev_min + 1.0
                    } else {
                        x + 1.0
                    }
                }
                Recurrence::Ring { n, .. } => {
                    if u_branch < (-3.0 * lambda * t / n as f64).exp() {
                        x + 1.0
                    } else {
                        0.0
                    }
                }
            };
            min_age = if u_min < 1.0 - (-lambda * t).exp() {
                1.0
            } else {
                prev_min + 1.0
            };
            *slot = x;
        }
    }
}

/// Per-epoch Monte-Carlo estimates; index `k - 1` holds epoch `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct McSeries {
    pub means: Vec<f64>,
    pub stderrs: Vec<Option<f64>>,
    /// Mean over epochs `k > k_max/2` of each trajectory, across replications.
    pub tail: Estimate,
    pub replications: usize,
}

impl McSeries {
    pub fn k_max(&self) -> usize {
        self.means.len()
    }

    /// Estimate at epoch `k` (1-based).
    pub fn at(&self, k: usize) -> Option<Estimate> {
        let idx = k.checked_sub(1)?;
        Some(Estimate {
            mean: *self.means.get(idx)?,
            stderr: self.stderrs[idx],
        })
    }
}

const CHUNK: usize = 64;

/// Monte-Carlo estimate of the recurrence mean for `k = 1..=k_max`.
/// Replication `r` uses stream `r` of a ChaCha generator keyed by `seed`,
/// so the result is independent of thread scheduling.
pub fn mc_recurrence(
    recurrence: &Recurrence,
    k_max: usize,
    replications: usize,
    seed: u64,
) -> Result<McSeries> {
    recurrence.check()?;
    if replications == 0 {
        return Err(Error::invalid("need at least one replication"));
    }
    if k_max == 0 {
        return Err(Error::invalid("k_max must be >= 1"));
    }
    let tail_from = k_max / 2;
    let chunks: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = (0..replications.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut sum = vec![0.0; k_max];
            let mut sum_sq = vec![0.0; k_max];
            let mut tails = Vec::with_capacity(CHUNK);
            let mut path = vec![0.0; k_max];
            for r in c * CHUNK..((c + 1) * CHUNK).min(replications) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(r as u64);
                recurrence.trajectory(&mut rng, &mut path);
                for (k, &x) in path.iter().enumerate() {
                    sum[k] += x;
                    sum_sq[k] += x * x;
                }
                let tail = &path[tail_from..];
                tails.push(tail.iter().sum::<f64>() / tail.len() as f64);
            }
            (sum, sum_sq, tails)
        })
        .collect();

    let mut sum = vec![0.0; k_max];
    let mut sum_sq = vec![0.0; k_max];
    let mut tails = Vec::with_capacity(replications);
    for (s, sq, t) in chunks {
        for k in 0..k_max {
            sum[k] += s[k];
            sum_sq[k] += sq[k];
        }
        tails.extend(t);
    }
    let r = replications as f64;
    let means: Vec<f64> = sum.iter().map(|s| s / r).collect();
    let stderrs = means
        .iter()
        .zip(&sum_sq)
        .map(|(m, sq)| {
            (replications > 1).then(|| {
                let var = ((sq - r * m * m) / (r - 1.0)).max(0.0);
                (var / r).sqrt()
            })
        })
        .collect();
    Ok(McSeries {
        means,
        stderrs,
        tail: Estimate::from_samples(&tails),
        replications,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{min_age_mean, partial_ub, ring_lb, sensing_bound_b};

    #[test]
    fn min_age_matches_closed_form() {
        let rec = Recurrence::from_kind("min_age", 1.0, 1.0, 0, 1.0, true).unwrap();
        let s = mc_recurrence(&rec, 50, 100_000, 7).unwrap();
        assert_eq!(s.at(1).unwrap().mean, 1.0);
        let k2 = s.at(2).unwrap();
        assert!((k2.mean - 1.5).abs() < 0.01, "{k2:?}");
        for k in 1..=50 {
            let e = s.at(k).unwrap();
            let exact = min_age_mean(k as u64, 1.0, 1.0).unwrap();
            assert!(
                (e.mean - exact).abs() <= 3.0 * e.stderr.unwrap().max(1e-12),
                "k={k}"
            );
        }
    }

    #[test]
    fn sensing_starts_at_one_and_is_dominated() {
        let rec = Recurrence::from_kind("sensing", 1.0, 1.0, 0, 1.0, true).unwrap();
        let s = mc_recurrence(&rec, 40, 20_000, 3).unwrap();
        assert_eq!(s.at(1).unwrap().mean, 1.0);
        assert_eq!(s.at(1).unwrap().stderr, Some(0.0));
        for k in 1..=40 {
            let e = s.at(k).unwrap();
            let b = sensing_bound_b(k as u64, 1.0, 1.0).unwrap();
            assert!(e.mean <= b + 3.0 * e.stderr.unwrap(), "k={k} {e:?} b={b}");
        }
    }

    #[test]
    fn partial_limit_reaches_closed_form() {
        let rec = Recurrence::from_kind("partial", 1.0, 1.0, 0, 0.5, true).unwrap();
        let s = mc_recurrence(&rec, 600, 4_000, 5).unwrap();
        let ub = partial_ub(0.5, 1.0, 1.0).unwrap();
        assert!(
            (s.tail.mean - ub).abs() <= 3.0 * s.tail.stderr.unwrap(),
            "{:?} vs {ub}",
            s.tail
        );
    }

    #[test]
    fn ring_limit() {
        let rec = Recurrence::from_kind("ring", 1.0, 1.0, 60, 1.0, true).unwrap();
        let s = mc_recurrence(&rec, 2_000, 2_000, 9).unwrap();
        let lb = ring_lb(60, 1.0, 1.0).unwrap();
        assert!(
            (s.tail.mean - lb).abs() <= 3.0 * s.tail.stderr.unwrap(),
            "{:?}",
            s.tail
        );
    }

    #[test]
    fn deterministic_and_validated() {
        let rec = Recurrence::from_kind("sensing", 1.0, 1.0, 50, 1.0, false).unwrap();
        let a = mc_recurrence(&rec, 30, 300, 1).unwrap();
        let b = mc_recurrence(&rec, 30, 300, 1).unwrap();
        assert_eq!(a, b);
        assert!(Recurrence::from_kind("spiral", 1.0, 1.0, 10, 1.0, true).is_err());
        assert!(mc_recurrence(&rec, 30, 0, 1).is_err());
        assert!(Recurrence::from_kind("partial", 1.0, 1.0, 10, 0.0, true).is_err());
    }
}
