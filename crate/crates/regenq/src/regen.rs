//! Regeneration structure: when the process provably restarts afresh.
//!
//! A regeneration instant splits the path into i.i.d. cycles. Two designs
//! are supported:
//!
//! * **Primary** — an exogenous first-class arrival that finds the network
//!   empty while every other exogenous class sits in its exponential
//!   arrival phase. The arriving customer's own clock restarts by
//!   construction, the others by memorylessness, so the post-arrival state
//!   has a fixed law.
//! * **Alternative** — a departure that leaves the network empty while
//!   *all* exogenous classes (the first included) sit in their exponential
//!   phase arms a detector; the regeneration instant is the next exogenous
//!   arrival. This needs the first class to be decomposable too, and is
//!   available exactly when it is.
//!
//! Neither design is a subsequence of the other in general: primary
//! instants are arrivals into emptiness, alternative instants are arrivals
//! after an emptying departure with a stronger phase condition.

use serde::{Deserialize, Serialize};

/// Which regeneration design drives cycle extraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegenMode {
    Primary,
    Alternative,
}

impl std::fmt::Display for RegenMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RegenMode::Primary => write!(f, "primary"),
            RegenMode::Alternative => write!(f, "alternative"),
        }
    }
}

impl std::str::FromStr for RegenMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "primary" => Ok(RegenMode::Primary),
            "alternative" => Ok(RegenMode::Alternative),
            other => Err(format!(
                "unknown mode {other:?}; expected primary or alternative"
            )),
        }
    }
}

/// One completed cycle: length `tau = T_i - T_{i-1}` and reward
/// `r = integral of h over the cycle`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    /// Zero-based completion order within its run.
    pub index: u64,
    pub tau: f64,
    pub r: f64,
}

/// State-part test for a regeneration: the network holds no customers and
/// the required exogenous classes are in their exponential arrival phase.
///
/// `exp_phase[k]` refers to exogenous class `k` (class 0 is the
/// distinguished first class). The event part — class-0 arrival for
/// primary, emptying departure then next arrival for alternative — is the
/// caller's to check.
pub fn in_regeneration_set(total_in_system: usize, exp_phase: &[bool], mode: RegenMode) -> bool {
    if total_in_system != 0 {
        return false;
    }
    match mode {
        RegenMode::Primary => exp_phase.iter().skip(1).all(|&b| b),
        RegenMode::Alternative => exp_phase.iter().all(|&b| b),
    }
}

/// Turns a stream of regeneration instants into completed cycles.
///
/// Feed it every regeneration time together with the running value of the
/// h-integral at that instant; it drops the delay prefix before the first
/// instant and emits one record per completed cycle.
#[derive(Clone, Debug, Default)]
pub struct CycleCollector {
    first: Option<f64>,
    prev_time: f64,
    prev_integral: f64,
    records: Vec<CycleRecord>,
}

impl CycleCollector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record a regeneration at time `t` with h-integral `integral_h`.
    /// Instants must be fed in nondecreasing time order.
    pub fn mark(&mut self, t: f64, integral_h: f64) {
        debug_assert!(self.first.is_none() || t >= self.prev_time);
        if self.first.is_none() {
            self.first = Some(t);
        } else {
            let index = self.records.len() as u64;
            self.records.push(CycleRecord {
                index,
                tau: t - self.prev_time,
                r: integral_h - self.prev_integral,
            });
        }
        self.prev_time = t;
        self.prev_integral = integral_h;
    }

    /// Time of the first regeneration — the end of the discarded delay
    /// prefix — if any instant has been seen.
    pub fn delay_end(&self) -> Option<f64> {
        self.first
    }

    pub fn completed(&self) -> u64 {
        self.records.len() as u64
    }

    pub fn records(&self) -> &[CycleRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<CycleRecord> {
        self.records
    }
}
