use std::fmt;

use super::Event;

/// One line of the optional event trace: `t kind src dst k`.
///
/// `src` is `s` for the source and `-` where the field does not apply;
/// phase changes put the scope index in `dst`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    pub event: Event,
    pub epoch: u64,
}

impl TraceRecord {
    pub fn new(t: f64, event: Event, epoch: u64) -> Self {
        TraceRecord { t, event, epoch }
    }

    pub fn kind(&self) -> &'static str {
        match self.event {
            Event::SelfUpdate => "self",
            Event::Direct { .. } => "direct",
            Event::Relay { .. } => "relay",
            Event::Gossip { .. } => "gossip",
            Event::GossipStart { .. } => "phase",
            Event::WindowStart => "window_start",
            Event::WindowEnd => "window_end",
        }
    }
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (src, dst) = match self.event {
            Event::SelfUpdate => ("s".to_string(), "-".to_string()),
            Event::Direct { node } => ("s".to_string(), node.to_string()),
            Event::Relay { head, leaf } => (head.to_string(), leaf.to_string()),
            Event::Gossip { from, to } => (from.to_string(), to.to_string()),
            Event::GossipStart { scope } => ("-".to_string(), scope.to_string()),
            Event::WindowStart | Event::WindowEnd => ("-".to_string(), "-".to_string()),
        };
        write!(
            f,
            "{:.9} {} {} {} {}",
            self.t,
            self.kind(),
            src,
            dst,
            self.epoch
        )
    }
}
