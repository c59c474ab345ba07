//! Closed-form age bounds and limits, and Monte-Carlo evaluators of the
//! recurrences they are derived from.
//!
//! Every evaluator is a pure function of its parameters. Rates are `lambda_e`
//! (source self-update), `lambda` (total source-to-network) and `b` (total
//! gossip capacity).

mod recurrence;
mod report;

pub use recurrence::{mc_recurrence, McSeries, Recurrence};
pub use report::{
    all_reports, named_report, render_csv, render_text, BoundKind, BoundParams, BoundReport,
    BOUND_NAMES,
};

use std::f64::consts::PI;

use crate::error::{Error, Result};

fn check_rates(lambda_e: f64, lambda: f64) -> Result<()> {
    if !(lambda_e.is_finite() && lambda_e >= 0.0) {
        return Err(Error::invalid(format!(
            "lambda_e = {lambda_e} must be finite and >= 0"
        )));
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::invalid(format!(
            "lambda = {lambda} must be finite and > 0"
        )));
    }
    Ok(())
}

fn check_open_fraction(name: &str, p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} = {p} must lie in (0, 1)")))
    }
}

/// Ratio `λe/(λe+λ)`: probability that no node hears the source during an
/// epoch.
fn no_update_ratio(lambda_e: f64, lambda: f64) -> f64 {
    lambda_e / (lambda_e + lambda)
}

/// Mean minimum age at the start of epoch `k`, `Σ_{ℓ<k} r^ℓ`.
pub fn min_age_mean(k: u64, lambda_e: f64, lambda: f64) -> Result<f64> {
    check_rates(lambda_e, lambda)?;
    let r = no_update_ratio(lambda_e, lambda);
    if k == 0 {
        return Ok(0.0);
    }
    if r == 0.0 {
        return Ok(1.0);
    }
    Ok((1.0 - r.powf(k as f64)) / (1.0 - r))
}

/// Same quantity by iterating `ã[k+1] = 1 + r·ã[k]` from `ã[0] = 0`.
pub fn min_age_mean_recursive(k: u64, lambda_e: f64, lambda: f64) -> Result<f64> {
    check_rates(lambda_e, lambda)?;
    let r = no_update_ratio(lambda_e, lambda);
    Ok((0..k).fold(0.0, |a, _| 1.0 + r * a))
}

pub fn min_age_limit(lambda_e: f64, lambda: f64) -> Result<f64> {
    check_rates(lambda_e, lambda)?;
    Ok((lambda_e + lambda) / lambda)
}

/// Upper bound on the average age in a complete network with no sensing
/// delay.
pub fn asuman_ub(n: usize, b: f64, lambda_e: f64, lambda: f64) -> Result<f64> {
    check_rates(lambda_e, lambda)?;
    if n < 2 {
        return Err(Error::invalid(format!(
            "asuman bound needs n >= 2, got {n}"
        )));
    }
    if !(b > 0.0) {
        return Err(Error::invalid(format!(
            "gossip capacity B = {b} must be > 0"
        )));
    }
    let per_link = b / (n - 1) as f64;
    let nf = n as f64;
    Ok((lambda_e + per_link * (lambda_e + lambda) / lambda) / (lambda / nf + per_link))
}

/// Large-`n` limit of [`asuman_ub`] with `B = nλ`: `2λe/λ + 1`.
pub fn asuman_ub_limit(lambda_e: f64, lambda: f64) -> Result<f64> {
    check_rates(lambda_e, lambda)?;
    Ok(2.0 * lambda_e / lambda + 1.0)
}

/// Dominating sequence for the sensing-phase age, `b[k] = 2Σ_{ℓ≤k-2} r^ℓ + r^{k-1}`.
pub fn sensing_bound_b(k: u64, lambda_e: f64, lambda: f64) -> Result<f64> {
    check_rates(lambda_e, lambda)?;
    if k == 0 {
        return Err(Error::invalid("sensing bound b[k] is defined for k >= 1"));
    }
    let r = no_update_ratio(lambda_e, lambda);
    let head = 2.0 * min_age_mean(k - 1, lambda_e, lambda)?;
    Ok(head + r.powf((k - 1) as f64))
}

pub fn sensing_bound_b_limit(lambda_e: f64, lambda: f64) -> Result<f64> {
    check_rates(lambda_e, lambda)?;
    Ok(2.0 * (lambda_e / lambda + 1.0))
}

fn check_q(q: f64) -> Result<()> {
    if q > 0.0 && q <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("q = {q} must lie in (0, 1]")))
    }
}

/// Lower bound on the per-epoch probability that a partially connected
/// node is refreshed by gossip, in the large-`n` limit.
pub fn partial_pi_tilde(q: f64, lambda_e: f64, lambda: f64) -> Result<f64> {
    check_rates(lambda_e, lambda)?;
    check_q(q)?;
    Ok(q * lambda * lambda / ((lambda_e + 2.0 * lambda) * (lambda + q * lambda_e)))
}

pub fn partial_ub(q: f64, lambda_e: f64, lambda: f64) -> Result<f64> {
    let pi = partial_pi_tilde(q, lambda_e, lambda)?;
    Ok(1.0 + lambda_e / lambda + 1.0 / pi)
}

/// Lower bound on the stationary probability that a node is not in the
/// minimum-age set when active nodes transmit their epoch-start snapshot.
pub fn not_min_prob_lb(n: usize, lambda_e: f64, lambda: f64) -> Result<f64> {
    check_rates(lambda_e, lambda)?;
    if n < 2 {
        return Err(Error::invalid(format!("needs n >= 2, got {n}")));
    }
    let per_node = lambda / n as f64;
    Ok(lambda_e * (lambda - per_node)
        / (lambda_e * lambda_e + 2.0 * lambda_e * lambda + lambda * per_node))
}

/// Large-`n` limit of [`not_min_prob_lb`]: `λ/(λe+2λ)`.
pub fn not_min_prob_limit(lambda_e: f64, lambda: f64) -> Result<f64> {
    check_rates(lambda_e, lambda)?;
    if lambda_e == 0.0 {
        return Ok(0.0);
    }
    Ok(lambda / (lambda_e + 2.0 * lambda))
}

/// Lower bound for ASUMAN on a ring: `nλe/(3λ)`.
pub fn ring_lb(n: usize, lambda_e: f64, lambda: f64) -> Result<f64> {
    check_rates(lambda_e, lambda)?;
    if n < 3 {
        return Err(Error::invalid(format!("ring needs n >= 3, got {n}")));
    }
    Ok(n as f64 * lambda_e / (3.0 * lambda))
}

/// `(λe/λ)(1 + g(1/λ + 1/λe))` expanded so that `λe = 0` is finite.
fn gossip_numerator(g: f64, lambda_e: f64, lambda: f64) -> f64 {
    lambda_e / lambda + g * lambda_e / (lambda * lambda) + g / lambda
}

/// Upper bound on a cluster head's age when `c` heads run ASUMAN among
/// themselves with the `(1-p)λ` share of their rate.
pub fn cluster_head_ub(c: usize, p: f64, lambda_e: f64, lambda: f64) -> Result<f64> {
    check_rates(lambda_e, lambda)?;
    check_open_fraction("p", p)?;
    if c < 2 {
        return Err(Error::invalid(format!("head bound needs c >= 2, got {c}")));
    }
    let cf = c as f64;
    let head_link = cf * (1.0 - p) / (cf - 1.0);
    Ok(gossip_numerator(head_link * lambda, lambda_e, lambda) / (1.0 / cf + head_link))
}

/// Large-`c` limit of [`cluster_head_ub`]: `(1 + 1/(1-p))λe/λ + 1`.
pub fn cluster_head_ub_limit(p: f64, lambda_e: f64, lambda: f64) -> Result<f64> {
    check_rates(lambda_e, lambda)?;
    check_open_fraction("p", p)?;
    Ok((1.0 + 1.0 / (1.0 - p)) * lambda_e / lambda + 1.0)
}

/// Leaf bound for a cluster of `m` leaves whose head has average age `a1`.
pub fn cluster_leaf_ub(m: usize, p: f64, lambda_e: f64, lambda: f64, a1: f64) -> Result<f64> {
    check_rates(lambda_e, lambda)?;
    check_open_fraction("p", p)?;
    if m < 2 {
        return Err(Error::invalid(format!("leaf bound needs m >= 2, got {m}")));
    }
    if !(a1.is_finite() && a1 >= 0.0) {
        return Err(Error::invalid(format!(
            "head age a1 = {a1} must be finite and >= 0"
        )));
    }
    let mf = m as f64;
    let relay = p * lambda / mf;
    let local = mf * lambda / (mf - 1.0);
    let cluster_min = lambda_e / (p * lambda) + a1 + 1.0;
    Ok((lambda_e + relay * a1 + local * cluster_min) / (relay + local))
}

pub fn cluster_leaf_ub_limit(p: f64, lambda_e: f64, lambda: f64) -> Result<f64> {
    check_rates(lambda_e, lambda)?;
    check_open_fraction("p", p)?;
    Ok((2.0 + 1.0 / p + 1.0 / (1.0 - p)) * lambda_e / lambda + 2.0)
}

/// Split minimising the leaf limit and the resulting value, `(1/2, 6λe/λ + 2)`.
pub fn cluster_optimum(lambda_e: f64, lambda: f64) -> Result<(f64, f64)> {
    let p = 0.5;
    Ok((p, cluster_leaf_ub_limit(p, lambda_e, lambda)?))
}

/// Leaf bound when heads never gossip (the relay takes the whole rate).
pub fn disconnected_cluster_ub(c: usize, lambda_e: f64, lambda: f64) -> Result<f64> {
    check_rates(lambda_e, lambda)?;
    if c < 1 {
        return Err(Error::invalid("needs at least one cluster"));
    }
    Ok((2.0 + c as f64) * lambda_e / lambda + 1.0)
}

/// Leaf bound when heads gossip uniformly on a ring.
pub fn ring_cluster_ub(c: usize, p: f64, lambda_e: f64, lambda: f64) -> Result<f64> {
    check_rates(lambda_e, lambda)?;
    check_open_fraction("p", p)?;
    if c < 1 {
        return Err(Error::invalid("needs at least one cluster"));
    }
    let ring_term = (PI * c as f64 / (2.0 * (1.0 - p))).sqrt();
    Ok((1.0 + 1.0 / p + ring_term) * lambda_e / lambda + 1.0)
}

/// Bound for node `i` of a complete network whose direct source rate is
/// `lambda_i`.
pub fn asym_ub(lambda_i: f64, n: usize, b: f64, lambda_e: f64, lambda: f64) -> Result<f64> {
    check_rates(lambda_e, lambda)?;
    if !(lambda_i >= 0.0 && lambda_i <= lambda) {
        return Err(Error::invalid(format!(
            "node rate {lambda_i} must lie in [0, lambda = {lambda}]"
        )));
    }
    if n < 2 {
        return Err(Error::invalid(format!("needs n >= 2, got {n}")));
    }
    let nf = n as f64;
    let per_link = b / (nf - 1.0);
    Ok(gossip_numerator(per_link, lambda_e, lambda) / (lambda_i / lambda + nf / (nf - 1.0)))
}

/// Large-`n` limits of [`asym_ub`]: `(2λe/λ + 1, λe/λ + 1/2)` for
/// `λ_i/λ → 0` and `λ_i/λ → 1` respectively.
pub fn asym_limits(lambda_e: f64, lambda: f64) -> Result<(f64, f64)> {
    check_rates(lambda_e, lambda)?;
    let x = lambda_e / lambda;
    Ok((2.0 * x + 1.0, x + 0.5))
}

fn check_nu(nu: f64) -> Result<()> {
    check_open_fraction("nu", nu)
}

/// `λ_i/λ` for the power-law profile `λ_i = θν^i`, `i` counted from 1.
pub fn power_law_share(i: usize, nu: f64, n: usize) -> Result<f64> {
    check_nu(nu)?;
    if i < 1 || i > n {
        return Err(Error::invalid(format!("node index {i} outside 1..={n}")));
    }
    Ok(nu.powi(i as i32) / (1.0 - nu.powi(n as i32)) * ((1.0 - nu) / nu))
}

/// [`asym_ub`] for power-law arrivals with `B = nλ`; `i` is 1-based.
pub fn power_law_ub(i: usize, nu: f64, n: usize, lambda_e: f64, lambda: f64) -> Result<f64> {
    let share = power_law_share(i, nu, n)?;
    asym_ub(share * lambda, n, n as f64 * lambda, lambda_e, lambda)
}

pub fn power_law_ub_limit(i: usize, nu: f64, lambda_e: f64, lambda: f64) -> Result<f64> {
    check_rates(lambda_e, lambda)?;
    check_nu(nu)?;
    if i < 1 {
        return Err(Error::invalid("node index is 1-based"));
    }
    if lambda_e == 0.0 {
        return Ok(0.0);
    }
    Ok((lambda_e / lambda) * (2.0 + lambda / lambda_e)
        / (1.0 + nu.powi(i as i32) * (1.0 - nu) / nu))
}
