//! Regenerative simulation of multiclass open queueing networks.
//!
//! Steady-state estimation by regenerative simulation needs identifiable
//! regeneration times, which multiclass networks with general interarrival
//! laws do not provide out of the box. This crate makes them implementable by
//! splitting each interarrival time into an exponential component and a
//! residual component, so that every exogenous class periodically enters an
//! "exponential phase" during which its remaining interarrival clock is
//! memoryless. Arrivals that find the network empty while every other class
//! sits in its exponential phase are then genuine regeneration points.
//!
//! The crate is organized around the pipeline:
//!
//! * [`dist`] — distribution families, densities, samplers, and the
//!   `lambda_f` functional `sup(-f'/f)` that decides how large an exponential
//!   rate can be extracted from a density.
//! * [`decomp`] — the splitting itself: `xi = (1-q) xi_tilde + q (E + Z)`
//!   with `E ~ Exp(lambda)` and `Z` drawn from the complementary law
//!   `G(x) = F(x) + f(x)/lambda`.
//! * [`network`] — topology, routing, traffic equations, stability and
//!   modeling-assumption checks.
//! * [`engine`] — the discrete-event core evolving queues, split arrival
//!   clocks, and residual services.
//! * [`regen`] — online regeneration detection (primary and alternative
//!   variants) and cycle segmentation.
//! * [`stats`] — regenerative point estimates, confidence intervals, the
//!   time-average variance constant, and the asymptotic variance of the
//!   standard-deviation estimator (AVSDE) used to compare regeneration
//!   designs.
//! * [`oracles`] — independent analytic references (M/M/1, M/G/1,
//!   Kolmogorov–Smirnov law checks) used by tests and the `verify`
//!   subcommand.
//! * [`run`] — orchestration: config loading, seeded replications, sweeps,
//!   mode comparisons, and JSON reports. The `regenq` binary is a thin CLI
//!   over this module.
//!
//! Every sampler draws from an explicitly derived substream, so a `(config,
//! seed)` pair fully determines every emitted number, across thread counts.
//!
//! See the crate `examples/` directory for one runnable walkthrough per major
//! capability.

pub mod decomp;
pub mod dist;
pub mod engine;
pub mod network;
pub mod oracles;
pub mod regen;
pub mod run;
pub mod stats;
pub mod streams;

pub use decomp::{build_decomposition, Decomposition, LambdaChoice, SplitDraw};
pub use dist::{DensityFamily, LambdaF};
pub use engine::{RunOptions, RunResult, SimState, StateFunctional};
pub use network::{InterarrivalSpec, NetworkConfig, TrafficSolution};
pub use regen::{CycleRecord, RegenMode};
pub use run::{Report, RunSpec};
pub use stats::EstimatorAccumulator;
