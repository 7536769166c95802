//! Power-distortion interference classifier for GNSS correlation observables.
//!
//! A receiver that tracks a spread-spectrum satellite signal can watch two
//! cheap statistics: the total received band power `P` and the symmetric
//! difference `D` of its complex correlation function. Multipath, spoofing,
//! and jamming each leave a different footprint in the `(D, P)` plane, which
//! makes a four-way Bayesian classification possible without extra hardware.
//!
//! The crate provides the full pipeline at desk scale:
//!
//! * [`correlator`] — deterministic and stochastic models of the complex
//!   correlation function `ξ_k(τ)`, AGC gain, tap noise, and code-phase
//!   estimation;
//! * [`priors`] — the four hypothesis parameter sets, their prior densities,
//!   and seeded samplers;
//! * [`observables`] — simulation of the `(D, P)` observation pair under any
//!   interference parameter vector;
//! * [`cost`] — uniform and parameter-dependent misclassification costs;
//! * [`regions`] — Monte-Carlo construction of Bayes-optimal decision regions
//!   on a rectangular grid;
//! * [`detector`] — runtime classification, gating, vote aggregation, and
//!   evaluation statistics;
//! * [`ingest`] — the offline pre-processing pipeline from correlator
//!   accumulation logs and power telemetry to observation streams;
//! * [`scenario`] — synthetic log generation for end-to-end exercises.
//!
//! All stochastic operations take an explicit random stream and are
//! reproducible bit-for-bit under a fixed seed.

// Validation guards use `!(x > 0.0)` so NaN inputs fail them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod correlator;
pub mod cost;
pub mod detector;
pub mod error;
pub mod ingest;
pub mod observables;
pub mod priors;
pub mod regions;
pub mod scenario;

pub use correlator::{ChannelConfig, CorrelationSnapshot, InterferenceParams, PowerCase};
pub use cost::{uniform_cost, CostMatrix, CostModel};
pub use detector::{Alarm, DecisionRecord};
pub use error::{Error, Result};
pub use observables::{Observation, Simulator};
pub use priors::{Hypothesis, PriorConfig};
pub use regions::{Grid, GridSpec, SampleSet};
