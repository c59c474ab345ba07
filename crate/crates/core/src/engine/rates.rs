use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    /// Node-to-node gossip.
    Gossip,
    /// Cluster head pushing its version to its own leaves.
    Relay,
}

/// Nodes that each emit at `rate_per_sender`, spread uniformly over their
/// own target list.
#[derive(Debug, Clone, PartialEq)]
pub struct GossipGroup {
    pub kind: GroupKind,
    pub senders: Vec<usize>,
    pub rate_per_sender: f64,
    /// Sensing scope the senders were selected from, if any.
    pub scope: Option<usize>,
}

impl GossipGroup {
    pub fn total(&self) -> f64 {
        self.rate_per_sender * self.senders.len() as f64
    }
}

/// Instantaneous rates of every enabled event class.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RateTable {
    pub self_update: f64,
    /// Sum of all source-to-node rates.
    pub direct: f64,
    pub groups: Vec<GossipGroup>,
}

impl RateTable {
    pub fn total(&self) -> f64 {
        self.self_update + self.direct + self.groups.iter().map(GossipGroup::total).sum::<f64>()
    }

    /// Total node-to-node gossip rate, relays excluded.
    pub fn gossip_total(&self) -> f64 {
        self.groups
            .iter()
            .filter(|g| g.kind == GroupKind::Gossip)
            .map(GossipGroup::total)
            .sum()
    }

    /// Nodes currently allowed to gossip.
    pub fn gossip_senders(&self) -> impl Iterator<Item = usize> + '_ {
        self.groups
            .iter()
            .filter(|g| g.kind == GroupKind::Gossip)
            .flat_map(|g| g.senders.iter().copied())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventClass {
    SelfUpdate,
    Direct,
    Group(usize),
}

/// Maps `u ∈ [0, total)` onto an event class proportionally to its rate.
pub fn pick_class(table: &RateTable, mut u: f64) -> EventClass {
    if u < table.self_update {
        return EventClass::SelfUpdate;
    }
    u -= table.self_update;
    if u < table.direct {
        return EventClass::Direct;
    }
    u -= table.direct;
    let mut last = None;
    for (idx, g) in table.groups.iter().enumerate() {
        let r = g.total();
        if r > 0.0 {
            if u < r {
                return EventClass::Group(idx);
            }
            u -= r;
            last = Some(idx);
        }
    }
    // Rounding at the top end of the interval.
    match last {
        Some(idx) => EventClass::Group(idx),
        None if table.direct > 0.0 => EventClass::Direct,
        None => EventClass::SelfUpdate,
    }
}

/// Exponential variate by inverse transform.
pub fn sample_exp<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    let u: f64 = rng.gen();
    -(1.0 - u).ln() / rate
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NextEvent {
    /// A deterministic control point fires at this absolute time.
    Control {
        at: f64,
    },
    Sampled {
        dt: f64,
        class: EventClass,
    },
}

/// Competing exponential clocks with an optional deterministic control point.
/// A control point that falls before the sampled advance preempts it; the
/// caller re-draws afterwards, which memorylessness makes exact.
pub fn next_event<R: Rng + ?Sized>(
    t: f64,
    table: &RateTable,
    control: Option<f64>,
    rng: &mut R,
) -> Result<NextEvent> {
    let total = table.total();
    if !(total > 0.0) {
        return match control {
            Some(at) => Ok(NextEvent::Control { at }),
            None => Err(Error::Stalled(t)),
        };
    }
    let dt = sample_exp(rng, total);
    if let Some(at) = control {
        if t + dt >= at {
            return Ok(NextEvent::Control { at });
        }
    }
    let class = pick_class(table, rng.gen::<f64>() * total);
    Ok(NextEvent::Sampled { dt, class })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_classes() -> RateTable {
        RateTable {
            self_update: 1.0,
            direct: 0.0,
            groups: vec![GossipGroup {
                kind: GroupKind::Gossip,
                senders: vec![0, 1, 2],
                rate_per_sender: 1.0,
                scope: None,
            }],
        }
    }

    #[test]
    fn class_probabilities_follow_rates() {
        let table = two_classes();
        // Exact partition of [0, 4): first quarter is the self-update.
        assert_eq!(pick_class(&table, 0.99), EventClass::SelfUpdate);
        assert_eq!(pick_class(&table, 1.0), EventClass::Group(0));
        assert_eq!(pick_class(&table, 3.999), EventClass::Group(0));

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let hits = (0..100_000)
            .filter(|_| {
                matches!(
                    next_event(0.0, &table, None, &mut rng).unwrap(),
                    NextEvent::Sampled {
                        class: EventClass::Group(0),
                        ..
                    }
                )
            })
            .count();
        let p = hits as f64 / 100_000.0;
        assert!((p - 0.75).abs() < 0.005, "{p}");
    }

    #[test]
    fn control_point_preempts() {
        let table = RateTable {
            self_update: 1e-9,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        // Advance of a rate-1e-9 clock is astronomically larger than 0.1.
        assert_eq!(
            next_event(0.0, &table, Some(0.1), &mut rng).unwrap(),
            NextEvent::Control { at: 0.1 }
        );
        let empty = RateTable::default();
        assert_eq!(
            next_event(2.0, &empty, Some(3.0), &mut rng).unwrap(),
            NextEvent::Control { at: 3.0 }
        );
        assert_eq!(
            next_event(2.0, &empty, None, &mut rng),
            Err(Error::Stalled(2.0))
        );
    }

    #[test]
    fn exponential_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rate = 2.5;
        let n = 100_000;
        let mean = (0..n).map(|_| sample_exp(&mut rng, rate)).sum::<f64>() / n as f64;
        assert!((mean * rate - 1.0).abs() < 0.01, "{mean}");
    }
}
