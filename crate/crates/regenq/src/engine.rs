//! Discrete-event core: split arrival clocks, FIFO single-server stations,
//! Markovian routing, exact piecewise-constant reward integration, and
//! online regeneration detection.
//!
//! Every pending arrival is one calendar entry at an absolute time
//! `draw_t + non_exp_part + exp_part`, carrying its phase-entry timestamp
//! `draw_t + non_exp_part`. Residual clocks are derived views of these
//! timestamps, never decremented counters, so phase queries are exact: a
//! class is in its exponential phase at `t` exactly when its draw took the
//! split branch and `t` has passed the phase-entry time.
//!
//! Events are selected by a minimum scan over at most one pending departure
//! per station and one pending arrival per exogenous class. At equal times
//! departures are processed before arrivals, lower indices first — ties
//! have probability zero in continuous time but the order must be
//! deterministic for reproducibility.

use std::collections::VecDeque;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decomp::{Decomposition, SplitStreams};
use crate::dist::DensityFamily;
use crate::network::{InterarrivalSpec, NetworkConfig};
use crate::regen::{in_regeneration_set, CycleCollector, CycleRecord, RegenMode};
use crate::streams::{substream, Purpose};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("class {class} cannot reach an exponential arrival phase: {reason}")]
    SplitUnavailable { class: usize, reason: String },
    #[error("invalid state functional: {0}")]
    BadFunctional(String),
}

/// The reward function `h` integrated along the path. All built-in choices
/// depend on the state only through queue counts, so `h` is piecewise
/// constant between events and the reward integral is exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateFunctional {
    /// `h = ` total number in system.
    TotalQueue,
    /// `h = ` number of the given class in system.
    PerClassQueue(usize),
    /// `h = 1` when the total number in system exceeds the threshold.
    Indicator(u64),
}

impl StateFunctional {
    pub fn value(&self, total: usize, class_counts: &[usize]) -> f64 {
        match self {
            StateFunctional::TotalQueue => total as f64,
            StateFunctional::PerClassQueue(k) => class_counts[*k] as f64,
            StateFunctional::Indicator(c) => {
                if total as u64 > *c {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

impl std::str::FromStr for StateFunctional {
    type Err = String;

    /// `total` | `class:<k>` | `indicator:<c>`.
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "total" {
            return Ok(StateFunctional::TotalQueue);
        }
        if let Some(k) = s.strip_prefix("class:") {
            return k
                .parse::<usize>()
                .map(StateFunctional::PerClassQueue)
                .map_err(|e| format!("bad class index in {s:?}: {e}"));
        }
        if let Some(c) = s.strip_prefix("indicator:") {
            return c
                .parse::<u64>()
                .map(StateFunctional::Indicator)
                .map_err(|e| format!("bad threshold in {s:?}: {e}"));
        }
        Err(format!(
            "unknown functional {s:?}; expected total, class:<k>, or indicator:<c>"
        ))
    }
}

impl std::fmt::Display for StateFunctional {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StateFunctional::TotalQueue => write!(f, "total"),
            StateFunctional::PerClassQueue(k) => write!(f, "class:{k}"),
            StateFunctional::Indicator(c) => write!(f, "indicator:{c}"),
        }
    }
}

/// One pending exogenous arrival, stored as absolute timestamps.
#[derive(Clone, Copy, Debug)]
pub struct ArrivalClock {
    pub draw_t: f64,
    /// `draw_t + non_exp_part`; the non-exponential clock runs first.
    pub phase_entry_t: f64,
    /// `phase_entry_t + exp_part`; the next arrival instant.
    pub arrival_t: f64,
    /// Whether this draw took the split branch (so the time past
    /// `phase_entry_t` is genuinely exponential).
    pub splittable: bool,
}

impl ArrivalClock {
    /// Remaining non-exponential part at time `t`.
    pub fn remaining_non_exp(&self, t: f64) -> f64 {
        if self.splittable {
            (self.phase_entry_t - t).max(0.0)
        } else {
            (self.arrival_t - t).max(0.0)
        }
    }

    /// Remaining exponential part at time `t` (zero until phase entry and
    /// for unsplit draws).
    pub fn remaining_exp(&self, t: f64) -> f64 {
        if self.splittable {
            self.arrival_t - self.phase_entry_t.max(t)
        } else {
            0.0
        }
    }

    /// Exponential-phase predicate: the non-exponential clock is exhausted.
    pub fn in_exp_phase(&self, t: f64) -> bool {
        self.splittable && t >= self.phase_entry_t
    }

    fn check_views(&self, t: f64) {
        // The two representations — decomposed residuals and the absolute
        // arrival timestamp — must agree.
        let total = self.remaining_non_exp(t) + self.remaining_exp(t);
        let direct = self.arrival_t - t;
        debug_assert!(
            (total - direct).abs() <= 1e-9 * direct.abs().max(1.0),
            "clock views disagree: {total} vs {direct}"
        );
    }
}

/// How a class's interarrival times are produced.
enum ArrivalSource {
    /// Split into non-exponential and exponential parts.
    Split(Decomposition),
    /// Drawn whole; the class never reports an exponential phase.
    Direct(DensityFamily),
}

struct ClassStreams {
    split: SplitStreams<ChaCha8Rng>,
    service: ChaCha8Rng,
}

#[derive(Clone, Copy, Debug)]
struct Customer {
    class: usize,
    /// First entry into the network, for sojourn accounting.
    network_entry_t: f64,
}

#[derive(Clone, Copy, Debug)]
struct ServiceSlot {
    customer: Customer,
    completion_t: f64,
}

/// What happened at one event instant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    /// Service completion at a station (routed onward or out).
    Departure { station: usize },
    /// Exogenous arrival of a class.
    Arrival { class: usize },
}

/// One row of the optional event trace.
#[derive(Clone, Debug, Serialize)]
pub struct TraceRow {
    pub t: f64,
    pub kind: &'static str,
    pub class: usize,
    pub station: usize,
    pub total_in_system: usize,
}

/// Per-run knobs.
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub horizon: f64,
    pub functional: StateFunctional,
    /// Collect cycles for the primary design (first-class arrival into an
    /// empty network with later classes in exponential phase).
    pub collect_primary: bool,
    /// Collect cycles for the alternative design (emptying departure with
    /// all exogenous classes in phase; regeneration at the next arrival).
    pub collect_alternative: bool,
    /// Record an event trace (debug scale only).
    pub record_trace: bool,
}

impl RunOptions {
    pub fn new(horizon: f64, functional: StateFunctional) -> Self {
        RunOptions {
            horizon,
            functional,
            collect_primary: true,
            collect_alternative: false,
            record_trace: false,
        }
    }
}

/// Everything a finished run reports back.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub horizon: f64,
    /// Reward integral of the chosen functional over the whole horizon,
    /// delay and trailing fragment included.
    pub integral_h: f64,
    pub primary_cycles: Option<Vec<CycleRecord>>,
    pub alternative_cycles: Option<Vec<CycleRecord>>,
    /// Time of the first regeneration per design (`0` for primary, which
    /// starts non-delayed; the dropped delay-prefix length for the
    /// alternative design).
    pub primary_delay_end: Option<f64>,
    pub alternative_delay_end: Option<f64>,
    pub events: u64,
    pub exogenous_arrivals: u64,
    pub exits: u64,
    /// Time-integral of the total count (for time-average number in
    /// system) and per-class counts.
    pub area_total: f64,
    pub area_per_class: Vec<f64>,
    /// Per-station busy time (for utilization cross-checks).
    pub busy_time: Vec<f64>,
    /// Summed network sojourn of exited customers.
    pub sojourn_sum: f64,
    pub trace: Option<Vec<TraceRow>>,
}

/// The live simulation state. Construct with [`SimState::init`], drive with
/// [`SimState::step`] or [`run`].
pub struct SimState {
    cfg: NetworkConfig,
    sources: Vec<Option<ArrivalSource>>,
    streams: Vec<ClassStreams>,
    routing_rng: ChaCha8Rng,

    pub t_now: f64,
    queues: Vec<VecDeque<Customer>>,
    in_service: Vec<Option<ServiceSlot>>,
    clocks: Vec<Option<ArrivalClock>>,
    class_counts: Vec<usize>,
    total_count: usize,

    functional: StateFunctional,
    integral_h: f64,
    area_total: f64,
    area_per_class: Vec<f64>,
    busy_time: Vec<f64>,
    sojourn_sum: f64,
    events: u64,
    exogenous_arrivals: u64,
    exits: u64,

    primary: Option<CycleCollector>,
    alternative: Option<CycleCollector>,
    alt_armed: bool,
    trace: Option<Vec<TraceRow>>,
}

impl SimState {
    /// Build the initial state: one first-class customer in service with a
    /// freshly drawn requirement, that class's next interarrival drawn
    /// whole-law, every other exogenous class resting in its exponential
    /// phase, and all other queues empty. This is exactly the
    /// post-regeneration law of the primary design, so primary cycles start
    /// non-delayed at `t = 0`; alternative cycles treat everything before
    /// their first detection as delay.
    pub fn init(
        cfg: &NetworkConfig,
        master_seed: u64,
        replication: u64,
        opts: &RunOptions,
    ) -> Result<Self, EngineError> {
        let k = cfg.num_classes();
        let l = cfg.exogenous_count();
        match opts.functional {
            StateFunctional::PerClassQueue(c) if c >= k => {
                return Err(EngineError::BadFunctional(format!(
                    "class {c} out of range for {k} classes"
                )));
            }
            _ => {}
        }

        let mut sources: Vec<Option<ArrivalSource>> = Vec::with_capacity(k);
        for (idx, class) in cfg.classes.iter().enumerate() {
            let Some(ia) = &class.interarrival else {
                sources.push(None);
                continue;
            };
            match ia.decompose(class.decompose.lambda) {
                Ok(dec) => sources.push(Some(ArrivalSource::Split(dec))),
                Err(err) => {
                    let needed_for_primary = idx > 0;
                    if needed_for_primary || opts.collect_alternative {
                        return Err(EngineError::SplitUnavailable {
                            class: idx,
                            reason: err.to_string(),
                        });
                    }
                    let InterarrivalSpec::Plain(fam) = ia else {
                        unreachable!("pre-split laws always decompose at their own rate")
                    };
                    sources.push(Some(ArrivalSource::Direct(fam.clone())));
                }
            }
        }

        let streams: Vec<ClassStreams> = (0..k as u64)
            .map(|class| ClassStreams {
                split: SplitStreams {
                    mixture: substream(master_seed, replication, class, Purpose::Mixture),
                    exp_component: substream(
                        master_seed,
                        replication,
                        class,
                        Purpose::ExpComponent,
                    ),
                    z_component: substream(master_seed, replication, class, Purpose::ZComponent),
                    residual: substream(master_seed, replication, class, Purpose::Residual),
                },
                service: substream(master_seed, replication, class, Purpose::Service),
            })
            .collect();
        let routing_rng = substream(master_seed, replication, 0, Purpose::Routing);

        let mut state = SimState {
            cfg: cfg.clone(),
            sources,
            streams,
            routing_rng,
            t_now: 0.0,
            queues: (0..cfg.stations).map(|_| VecDeque::new()).collect(),
            in_service: vec![None; cfg.stations],
            clocks: vec![None; k],
            class_counts: vec![0; k],
            total_count: 0,
            functional: opts.functional,
            integral_h: 0.0,
            area_total: 0.0,
            area_per_class: vec![0.0; k],
            busy_time: vec![0.0; cfg.stations],
            sojourn_sum: 0.0,
            events: 0,
            exogenous_arrivals: 0,
            exits: 0,
            primary: opts.collect_primary.then(CycleCollector::new),
            alternative: opts.collect_alternative.then(CycleCollector::new),
            alt_armed: false,
            trace: opts.record_trace.then(Vec::new),
        };

        // The distinguished first-class customer, already in service.
        let first = Customer { class: 0, network_entry_t: 0.0 };
        let station0 = cfg.classes[0].station;
        let duration = state.draw_service(0);
        state.in_service[station0] =
            Some(ServiceSlot { customer: first, completion_t: duration });
        state.class_counts[0] = 1;
        state.total_count = 1;

        // First-class next arrival: a fresh full interarrival.
        state.clocks[0] = Some(state.draw_arrival_clock(0));
        // Other exogenous classes rest mid-flight in their exponential
        // phase: the remaining time is exponential at the extracted rate.
        for class in 1..l {
            let Some(ArrivalSource::Split(dec)) = &state.sources[class] else {
                unreachable!("exogenous classes past the first are always split")
            };
            let lambda = dec.lambda;
            let u: f64 = state.streams[class].split.exp_component.random();
            let e = -(1.0 - u).ln() / lambda;
            state.clocks[class] = Some(ArrivalClock {
                draw_t: 0.0,
                phase_entry_t: 0.0,
                arrival_t: e,
                splittable: true,
            });
        }

        // Primary cycles are non-delayed: the path starts at a
        // regeneration.
        if let Some(c) = &mut state.primary {
            c.mark(0.0, 0.0);
        }
        Ok(state)
    }

    fn draw_service(&mut self, class: usize) -> f64 {
        self.cfg.classes[class].service.sample(&mut self.streams[class].service)
    }

    /// Draw the next interarrival for `class` starting at `t_now` and
    /// return its clock.
    fn draw_arrival_clock(&mut self, class: usize) -> ArrivalClock {
        let t = self.t_now;
        match &self.sources[class] {
            Some(ArrivalSource::Split(dec)) => {
                let draw = dec.sample_interarrival(&mut self.streams[class].split);
                ArrivalClock {
                    draw_t: t,
                    phase_entry_t: t + draw.non_exp_part,
                    arrival_t: t + draw.non_exp_part + draw.exp_part,
                    splittable: draw.is_exp_phase_reachable,
                }
            }
            Some(ArrivalSource::Direct(fam)) => {
                let xi = fam.sample(&mut self.streams[class].split.z_component);
                ArrivalClock {
                    draw_t: t,
                    phase_entry_t: t + xi,
                    arrival_t: t + xi,
                    splittable: false,
                }
            }
            None => unreachable!("only exogenous classes draw arrivals"),
        }
    }

    pub fn total_in_system(&self) -> usize {
        self.total_count
    }

    pub fn class_counts(&self) -> &[usize] {
        &self.class_counts
    }

    pub fn current_h(&self) -> f64 {
        self.functional.value(self.total_count, &self.class_counts)
    }

    /// Exponential-phase flags for the exogenous classes at the current
    /// time.
    pub fn exp_phase_flags(&self) -> Vec<bool> {
        (0..self.cfg.exogenous_count())
            .map(|k| {
                self.clocks[k]
                    .as_ref()
                    .is_some_and(|c| c.in_exp_phase(self.t_now))
            })
            .collect()
    }

    /// The next pending event and its absolute time. Departures win ties,
    /// then lower indices.
    pub fn peek_next_event(&self) -> (f64, EventKind) {
        let mut best: Option<(f64, EventKind)> = None;
        for (station, slot) in self.in_service.iter().enumerate() {
            if let Some(s) = slot {
                if best.is_none_or(|(t, _)| s.completion_t < t) {
                    best = Some((s.completion_t, EventKind::Departure { station }));
                }
            }
        }
        for (class, clock) in self.clocks.iter().enumerate() {
            if let Some(c) = clock {
                if best.is_none_or(|(t, _)| c.arrival_t < t) {
                    best = Some((c.arrival_t, EventKind::Arrival { class }));
                }
            }
        }
        best.expect("an exogenous arrival is always pending")
    }

    /// The state-part test of the primary regeneration set at the current
    /// instant: network empty, all exogenous classes past the first in
    /// exponential phase, and the next event is a first-class arrival.
    pub fn in_primary_regen_set(&self) -> bool {
        in_regeneration_set(self.total_count, &self.exp_phase_flags(), RegenMode::Primary)
            && matches!(self.peek_next_event().1, EventKind::Arrival { class: 0 })
    }

    /// Advance the integrals from `t_now` to `t` (no event may lie strictly
    /// between; `h` is piecewise constant there).
    fn integrate_to(&mut self, t: f64) {
        let dt = t - self.t_now;
        debug_assert!(dt >= 0.0);
        if dt == 0.0 {
            return;
        }
        self.integral_h += self.current_h() * dt;
        self.area_total += self.total_count as f64 * dt;
        for (k, area) in self.area_per_class.iter_mut().enumerate() {
            *area += self.class_counts[k] as f64 * dt;
        }
        for (i, busy) in self.busy_time.iter_mut().enumerate() {
            if self.in_service[i].is_some() {
                *busy += dt;
            }
        }
        self.t_now = t;
    }

    /// If the server at `station` is idle and customers wait, start the
    /// head of the queue (service requirement drawn at service start).
    fn try_start_service(&mut self, station: usize) {
        if self.in_service[station].is_some() {
            return;
        }
        let Some(customer) = self.queues[station].pop_front() else {
            return;
        };
        let duration = self.draw_service(customer.class);
        self.in_service[station] =
            Some(ServiceSlot { customer, completion_t: self.t_now + duration });
    }

    fn enqueue(&mut self, customer: Customer) {
        let station = self.cfg.classes[customer.class].station;
        self.class_counts[customer.class] += 1;
        self.total_count += 1;
        self.queues[station].push_back(customer);
        self.try_start_service(station);
    }

    fn push_trace(&mut self, kind: &'static str, class: usize, station: usize) {
        let total_in_system = self.total_count;
        let t = self.t_now;
        if let Some(rows) = &mut self.trace {
            rows.push(TraceRow { t, kind, class, station, total_in_system });
        }
    }

    /// Process exactly one event: integrate up to it, run the regeneration
    /// detectors against the pre-event state, then apply it.
    pub fn step(&mut self) -> (f64, EventKind) {
        let (t_event, kind) = self.peek_next_event();
        self.integrate_to(t_event);
        self.events += 1;

        // Detection happens at the event's left limit: the set membership
        // can only change at events, so the pre-event state is the limit
        // from the left.
        if self.alt_armed {
            // Armed means the network is empty with every exogenous class
            // in its exponential phase, so the next event can only be an
            // arrival — the regeneration instant of the alternative design.
            debug_assert!(matches!(kind, EventKind::Arrival { .. }));
            debug_assert_eq!(self.total_count, 0);
            let integral = self.integral_h;
            if let Some(c) = &mut self.alternative {
                c.mark(t_event, integral);
            }
            self.alt_armed = false;
        }
        if let EventKind::Arrival { class: 0 } = kind {
            if self.primary.is_some()
                && in_regeneration_set(
                    self.total_count,
                    &self.exp_phase_flags(),
                    RegenMode::Primary,
                )
            {
                let integral = self.integral_h;
                if let Some(c) = &mut self.primary {
                    c.mark(t_event, integral);
                }
                self.apply_event(kind);
                self.assert_post_regeneration_state();
                return (t_event, kind);
            }
        }

        self.apply_event(kind);
        (t_event, kind)
    }

    fn apply_event(&mut self, kind: EventKind) {
        match kind {
            EventKind::Arrival { class } => {
                if let Some(clock) = &self.clocks[class] {
                    clock.check_views(self.t_now);
                }
                self.exogenous_arrivals += 1;
                let customer = Customer { class, network_entry_t: self.t_now };
                let station = self.cfg.classes[class].station;
                self.enqueue(customer);
                self.clocks[class] = Some(self.draw_arrival_clock(class));
                self.push_trace("arrival", class, station);
            }
            EventKind::Departure { station } => {
                let slot = self.in_service[station]
                    .take()
                    .expect("departure events come from occupied servers");
                let done = slot.customer;
                self.class_counts[done.class] -= 1;
                self.total_count -= 1;

                // Route: walk the cumulative row; the deficit is the exit
                // probability.
                let u: f64 = self.routing_rng.random();
                let mut acc = 0.0;
                let mut next_class = None;
                for (l, p) in self.cfg.routing[done.class].iter().enumerate() {
                    acc += p;
                    if u < acc {
                        next_class = Some(l);
                        break;
                    }
                }
                match next_class {
                    Some(l) => {
                        let moved = Customer { class: l, ..done };
                        self.enqueue(moved);
                        self.push_trace("route", l, self.cfg.classes[l].station);
                    }
                    None => {
                        self.exits += 1;
                        self.sojourn_sum += self.t_now - done.network_entry_t;
                        self.push_trace("exit", done.class, station);
                    }
                }
                self.try_start_service(station);

                // An emptying departure with every exogenous class in its
                // exponential phase arms the alternative detector; the
                // regeneration instant is the upcoming arrival.
                if self.alternative.is_some()
                    && in_regeneration_set(
                        self.total_count,
                        &self.exp_phase_flags(),
                        RegenMode::Alternative,
                    )
                {
                    self.alt_armed = true;
                }
            }
        }
        self.assert_conservation();
    }

    fn assert_conservation(&self) {
        #[cfg(debug_assertions)]
        {
            let queued: usize = self.queues.iter().map(|q| q.len()).sum();
            let serving: usize = self.in_service.iter().filter(|s| s.is_some()).count();
            assert_eq!(queued + serving, self.total_count, "count conservation broke");
            let by_class: usize = self.class_counts.iter().sum();
            assert_eq!(by_class, self.total_count, "per-class counts inconsistent");
            for (i, q) in self.queues.iter().enumerate() {
                assert!(
                    q.is_empty() || self.in_service[i].is_some(),
                    "work conservation broke: station {i} queues customers while idle"
                );
            }
        }
    }

    fn assert_post_regeneration_state(&self) {
        #[cfg(debug_assertions)]
        {
            // Right after a primary regeneration: exactly the arriving
            // first-class customer in the network, later exogenous classes
            // still in their exponential phase.
            assert_eq!(self.total_count, 1);
            assert_eq!(self.class_counts[0], 1);
            for flag in self.exp_phase_flags().iter().skip(1) {
                assert!(*flag, "an exogenous class left its phase during a regeneration");
            }
        }
    }

    /// Drive until the first event past `horizon`, integrate the final
    /// partial interval, and emit the results.
    pub fn run_to_horizon(mut self, horizon: f64) -> RunResult {
        assert!(horizon > 0.0);
        loop {
            let (t, _) = self.peek_next_event();
            if t > horizon {
                break;
            }
            self.step();
        }
        self.integrate_to(horizon);

        RunResult {
            horizon,
            integral_h: self.integral_h,
            primary_delay_end: self.primary.as_ref().and_then(|c| c.delay_end()),
            alternative_delay_end: self.alternative.as_ref().and_then(|c| c.delay_end()),
            primary_cycles: self.primary.map(|c| c.into_records()),
            alternative_cycles: self.alternative.map(|c| c.into_records()),
            events: self.events,
            exogenous_arrivals: self.exogenous_arrivals,
            exits: self.exits,
            area_total: self.area_total,
            area_per_class: self.area_per_class,
            busy_time: self.busy_time,
            sojourn_sum: self.sojourn_sum,
            trace: self.trace,
        }
    }
}

/// Initialize and run one replication.
pub fn run(
    cfg: &NetworkConfig,
    master_seed: u64,
    replication: u64,
    opts: &RunOptions,
) -> Result<RunResult, EngineError> {
    let state = SimState::init(cfg, master_seed, replication, opts)?;
    Ok(state.run_to_horizon(opts.horizon))
}
