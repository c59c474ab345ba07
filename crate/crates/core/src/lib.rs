//! Version-age gossip networks: an exact event-driven simulator for
//! opportunistic (age-sensing) and uniform gossip over complete, partial,
//! ring, grid and clustered topologies, together with closed-form age bounds
//! and Monte-Carlo evaluators of their bounding recurrences.
//!
//! ```no_run
//! use asuman::prelude::*;
//!
//! let n = 100;
//! let spec = NetworkSpec {
//!     topology: build_complete(n).unwrap(),
//!     rates: Rates::with_default_capacity(1.0, 1.0, n),
//!     profile: rate_profile_uniform(1.0, n).unwrap(),
//!     policy: PolicyKind::Asuman { c_coeff: 1.0 / n as f64 },
//! };
//! let stats = simulate(SimConfig::new(spec, 5_000, 42)).unwrap();
//! println!("network mean age {:.3}", stats.network_mean);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod topology;
pub mod types;
pub mod validation;

pub use error::{Error, Result, Violation};
pub use types::{
    min_age_set, validate_spec, AgeVector, HeadPolicy, NetworkSpec, PolicyKind, RateProfile, Rates,
};

pub mod prelude {
    pub use crate::bounds;
    pub use crate::engine::{simulate, SimConfig, Simulation};
    pub use crate::experiment::{run_all, Experiment};
    pub use crate::metrics::{
        best_proportional_fit, fit_proportional, fit_scaling, merge, EnsembleStatistics, Estimate,
        RunStatistics, ScalingModel,
    };
    pub use crate::topology::{
        build_clustered, build_complete, build_grid, build_partial, build_ring, rate_profile_heads,
        rate_profile_power_law, rate_profile_uniform, HeadLinks, Topology,
    };
    pub use crate::types::{
        min_age_set, validate_spec, AgeVector, HeadPolicy, NetworkSpec, PolicyKind, RateProfile,
        Rates,
    };
}
