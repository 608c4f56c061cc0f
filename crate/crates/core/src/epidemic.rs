//! Event-driven simulation of the general stochastic epidemic and its
//! variants (fixed infectious period, SEIR latency, Reed-Frost chains).
//!
//! The simulator is an exact competing-risks CTMC: exponential clocks for
//! infection, latency-end and (exponential-period) recovery compete, while
//! fixed infectious periods are handled by a scheduled-recovery queue. Each
//! infection records the infector, chosen uniformly among current infectives,
//! so the full transmission tree is available downstream.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::indexed::IndexedSet;
use crate::rng::stream_rng;

/// Infectious-period law: exponential with rate `gamma`, or fixed at
/// `1/gamma` (the continuous-time Reed-Frost case).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeriodKind {
    Exponential,
    Fixed,
}

/// Parameters of the general stochastic epidemic.
#[derive(Debug, Clone, PartialEq)]
pub struct GseParams {
    /// Close-contact rate per infective per unit time.
    pub lambda: f64,
    /// Recovery rate; mean infectious period is `1/gamma` for both kinds.
    pub gamma: f64,
    /// Population size.
    pub n: u32,
    pub infectious_period: PeriodKind,
    /// Present => SEIR with exponential latency at this rate; absent => SIR.
    pub latent_rate: Option<f64>,
}

impl GseParams {
    pub fn new(lambda: f64, gamma: f64, n: u32) -> Result<Self> {
        let p = GseParams {
            lambda,
            gamma,
            n,
            infectious_period: PeriodKind::Exponential,
            latent_rate: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_fixed_period(mut self) -> Self {
        self.infectious_period = PeriodKind::Fixed;
        self
    }

    pub fn with_latent_rate(mut self, rate: f64) -> Result<Self> {
        self.latent_rate = Some(rate);
        self.validate()?;
        Ok(self)
    }

    pub fn r0(&self) -> f64 {
        self.lambda / self.gamma
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::invalid("lambda must be >= 0 and finite"));
        }
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::invalid("gamma must be > 0 and finite"));
        }
        if self.n < 2 {
            return Err(Error::invalid("population size n must be >= 2"));
        }
        if let Some(rate) = self.latent_rate {
            if !(rate > 0.0) || !rate.is_finite() {
                return Err(Error::invalid("latent_rate must be > 0 and finite"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Infection,
    EndLatency,
    Recovery,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::Infection => "infection",
            EventKind::EndLatency => "end-latency",
            EventKind::Recovery => "recovery",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "infection" => Ok(EventKind::Infection),
            "end-latency" => Ok(EventKind::EndLatency),
            "recovery" => Ok(EventKind::Recovery),
            other => Err(Error::invalid(format!("unknown event kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
    pub subject: u32,
    /// `None` only for the index case.
    pub infector: Option<u32>,
}

/// Time-ordered outbreak record with infector attribution.
#[derive(Debug, Clone, PartialEq)]
pub struct EventLog {
    pub events: Vec<Event>,
    pub n: u32,
    pub end_time: f64,
}

/// Counts reconstructed from a log at one time point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Compartments {
    pub s: u32,
    pub e: u32,
    pub i: u32,
    pub r: u32,
}

impl EventLog {
    pub fn infection_count(&self) -> u32 {
        self.events
            .iter()
            .filter(|e| e.kind == EventKind::Infection)
            .count() as u32
    }

    /// True when every infected individual also has a recovery event.
    pub fn is_complete(&self) -> bool {
        let recoveries = self
            .events
            .iter()
            .filter(|e| e.kind == EventKind::Recovery)
            .count() as u32;
        recoveries == self.infection_count()
    }

    /// Compartment counts at each requested time (events at exactly `t`
    /// are included). One pass over the log regardless of grid size.
    pub fn compartments_at(&self, times: &[f64]) -> Vec<Compartments> {
        let mut order: Vec<usize> = (0..times.len()).collect();
        order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
        let latency = self_has_latency(self);
        let mut out = vec![
            Compartments {
                s: self.n,
                e: 0,
                i: 0,
                r: 0
            };
            times.len()
        ];
        let mut state = Compartments {
            s: self.n,
            e: 0,
            i: 0,
            r: 0,
        };
        let mut ev_idx = 0usize;
        for &slot in &order {
            let t = times[slot];
            while ev_idx < self.events.len() && self.events[ev_idx].time <= t {
                match self.events[ev_idx].kind {
                    EventKind::Infection => {
                        state.s -= 1;
                        if latency && ev_idx != 0 {
                            state.e += 1;
                        } else {
                            state.i += 1;
                        }
                    }
                    EventKind::EndLatency => {
                        state.e -= 1;
                        state.i += 1;
                    }
                    EventKind::Recovery => {
                        state.i -= 1;
                        state.r += 1;
                    }
                }
                ev_idx += 1;
            }
            out[slot] = state;
        }
        out
    }

    /// Replays the log, checking time ordering, compartment consistency and
    /// that each recorded infector was infectious at the infection time.
    pub fn verify(&self) -> Result<()> {
        let n = self.n as usize;
        #[derive(Clone, Copy, PartialEq)]
        enum St {
            S,
            E,
            I,
            R,
        }
        let mut state = vec![St::S; n];
        let mut last_t = 0.0f64;
        for (idx, ev) in self.events.iter().enumerate() {
            if ev.time < last_t {
                return Err(Error::invalid(format!("event {idx} out of time order")));
            }
            last_t = ev.time;
            let subj = ev.subject as usize;
            if subj >= n {
                return Err(Error::invalid(format!(
                    "subject {} out of range",
                    ev.subject
                )));
            }
            match ev.kind {
                EventKind::Infection => {
                    if state[subj] != St::S {
                        return Err(Error::invalid(format!("subject {subj} infected twice")));
                    }
                    match ev.infector {
                        None => {
                            if idx != 0 {
                                return Err(Error::invalid(
                                    "missing infector on non-index infection".to_string(),
                                ));
                            }
                            state[subj] = St::I;
                        }
                        Some(src) => {
                            if state[src as usize] != St::I {
                                return Err(Error::invalid(format!(
                                    "infector {src} not infectious at t={}",
                                    ev.time
                                )));
                            }
                            state[subj] = if self_has_latency(self) { St::E } else { St::I };
                        }
                    }
                }
                EventKind::EndLatency => {
                    if state[subj] != St::E {
                        return Err(Error::invalid(format!("subject {subj} not latent")));
                    }
                    state[subj] = St::I;
                }
                EventKind::Recovery => {
                    if state[subj] != St::I {
                        return Err(Error::invalid(format!("subject {subj} not infectious")));
                    }
                    state[subj] = St::R;
                }
            }
        }
        Ok(())
    }
}

fn self_has_latency(log: &EventLog) -> bool {
    log.events.iter().any(|e| e.kind == EventKind::EndLatency)
}

/// Final size `Z`: the number of ever-infected individuals, index included.
pub fn final_size(log: &EventLog) -> Result<u32> {
    if !log.is_complete() {
        return Err(Error::IncompleteLog(
            "some infected individual has no recovery event".into(),
        ));
    }
    Ok(log.infection_count())
}

/// `Z > cutoff_fraction * n`, strictly.
pub fn classify_major(z: u32, n: u32, cutoff_fraction: f64) -> bool {
    (z as f64) > cutoff_fraction * n as f64
}

/// Full outbreak from `(n-1, 1, 0)` until no infectives (or latents) remain.
pub fn simulate_gse(params: &GseParams, seed: u64) -> Result<EventLog> {
    params.validate()?;
    let mut rng = stream_rng(seed, 0);
    Ok(run_gse(params, &mut rng, None))
}

/// Early-stopping variant: halts once `max_infections` individuals have been
/// infected. The returned log is truncated (not accepted by [`final_size`]).
pub fn simulate_gse_capped(params: &GseParams, seed: u64, max_infections: u32) -> Result<EventLog> {
    params.validate()?;
    let mut rng = stream_rng(seed, 0);
    Ok(run_gse(params, &mut rng, Some(max_infections)))
}

pub(crate) fn run_gse(params: &GseParams, rng: &mut ChaCha12Rng, cap: Option<u32>) -> EventLog {
    let n = params.n;
    let nf = n as f64;
    let seir = params.latent_rate.is_some();
    let fixed = params.infectious_period == PeriodKind::Fixed;
    let period = 1.0 / params.gamma;

    let mut s_count = n - 1;
    let mut infectious = IndexedSet::with_capacity(n);
    let mut latent = IndexedSet::with_capacity(n);
    let mut scheduled: BinaryHeap<Reverse<Scheduled>> = BinaryHeap::new();
    let mut events = Vec::new();
    let mut next_id = 1u32;
    let mut infections = 1u32;
    let mut t = 0.0f64;

    // index case: id 0, infectious at t = 0
    events.push(Event {
        time: 0.0,
        kind: EventKind::Infection,
        subject: 0,
        infector: None,
    });
    infectious.insert(0);
    if fixed {
        scheduled.push(Reverse(Scheduled {
            time: period,
            id: 0,
        }));
    }

    loop {
        let i_count = infectious.len() as f64;
        let e_count = latent.len() as f64;
        if infectious.len() == 0 && latent.len() == 0 {
            break;
        }
        if let Some(cap) = cap {
            if infections >= cap {
                break;
            }
        }
        let inf_rate = params.lambda * i_count * s_count as f64 / nf;
        let lat_rate = params.latent_rate.unwrap_or(0.0) * e_count;
        let rec_rate = if fixed { 0.0 } else { params.gamma * i_count };
        let total = inf_rate + lat_rate + rec_rate;

        let next_scheduled = scheduled.peek().map(|Reverse(s)| s.time);
        let t_clock = if total > 0.0 {
            let u: f64 = 1.0 - rng.random::<f64>();
            t - u.ln() / total
        } else {
            f64::INFINITY
        };

        if let Some(ts) = next_scheduled {
            if ts <= t_clock {
                let Reverse(sch) = scheduled.pop().expect("peeked");
                t = sch.time;
                infectious.remove(sch.id);
                events.push(Event {
                    time: t,
                    kind: EventKind::Recovery,
                    subject: sch.id,
                    infector: None,
                });
                continue;
            }
        }
        if !t_clock.is_finite() {
            break;
        }
        t = t_clock;
        let pick = rng.random::<f64>() * total;
        if pick < inf_rate {
            let subject = next_id;
            next_id += 1;
            s_count -= 1;
            infections += 1;
            let infector = infectious.get(rng.random_range(0..infectious.len()));
            events.push(Event {
                time: t,
                kind: EventKind::Infection,
                subject,
                infector: Some(infector),
            });
            if seir {
                latent.insert(subject);
            } else {
                infectious.insert(subject);
                if fixed {
                    scheduled.push(Reverse(Scheduled {
                        time: t + period,
                        id: subject,
                    }));
                }
            }
        } else if pick < inf_rate + lat_rate {
            let id = latent.get(rng.random_range(0..latent.len()));
            latent.remove(id);
            infectious.insert(id);
            events.push(Event {
                time: t,
                kind: EventKind::EndLatency,
                subject: id,
                infector: None,
            });
            if fixed {
                scheduled.push(Reverse(Scheduled {
                    time: t + period,
                    id,
                }));
            }
        } else {
            let id = infectious.get(rng.random_range(0..infectious.len()));
            infectious.remove(id);
            events.push(Event {
                time: t,
                kind: EventKind::Recovery,
                subject: id,
                infector: None,
            });
        }
    }
    let end_time = events.last().map(|e| e.time).unwrap_or(0.0);
    EventLog {
        events,
        n,
        end_time,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Scheduled {
    time: f64,
    id: u32,
}

impl Eq for Scheduled {}

impl Ord for Scheduled {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.id.cmp(&other.id))
    }
}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Scalar summaries of one outbreak, used by ABC and the CLI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutbreakSummary {
    pub final_size: u32,
    pub duration: f64,
    pub peak_prevalence: u32,
    pub peak_time: f64,
}

pub fn outbreak_summary(log: &EventLog) -> OutbreakSummary {
    // peak prevalence counts infectious individuals; latent ones do not
    // become infectious until their end-latency event
    let mut i = 0i64;
    let latency = self_has_latency(log);
    let mut peak = 0i64;
    let mut peak_time = 0.0;
    for (idx, ev) in log.events.iter().enumerate() {
        match ev.kind {
            EventKind::Infection => {
                if !(latency && idx != 0) {
                    i += 1;
                }
            }
            EventKind::EndLatency => i += 1,
            EventKind::Recovery => i -= 1,
        }
        if i > peak {
            peak = i;
            peak_time = ev.time;
        }
    }
    OutbreakSummary {
        final_size: log.infection_count(),
        duration: log.end_time,
        peak_prevalence: peak as u32,
        peak_time,
    }
}

/// Mean compartment trajectory over replicates, sampled on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanTrajectory {
    pub times: Vec<f64>,
    pub s: Vec<f64>,
    pub i: Vec<f64>,
    pub r: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateSummary {
    pub final_sizes: Vec<u32>,
    pub major_fraction: f64,
    pub cutoff_fraction: f64,
    pub mean_trajectory: MeanTrajectory,
}

const TRAJECTORY_POINTS: usize = 101;

/// `r` independent runs on streams `(master_seed, 0..r)`; the summary is
/// identical whether replicates execute serially or in parallel.
pub fn replicate(
    params: &GseParams,
    r: usize,
    master_seed: u64,
    cutoff_fraction: f64,
) -> Result<ReplicateSummary> {
    params.validate()?;
    if r < 1 {
        return Err(Error::invalid("replicate count must be >= 1"));
    }
    if !(cutoff_fraction > 0.0 && cutoff_fraction < 1.0) {
        return Err(Error::invalid("cutoff_fraction must be in (0,1)"));
    }
    // pass 1: final sizes and end times
    let firsts: Vec<(u32, f64)> = (0..r)
        .into_par_iter()
        .map(|idx| {
            let mut rng = stream_rng(master_seed, idx as u64);
            let log = run_gse(params, &mut rng, None);
            (log.infection_count(), log.end_time)
        })
        .collect();
    let t_max = firsts.iter().map(|x| x.1).fold(0.0f64, f64::max).max(1e-9);
    let times: Vec<f64> = (0..TRAJECTORY_POINTS)
        .map(|k| t_max * k as f64 / (TRAJECTORY_POINTS - 1) as f64)
        .collect();
    // pass 2: deterministic re-simulation sampled on the shared grid
    let sampled: Vec<Vec<Compartments>> = (0..r)
        .into_par_iter()
        .map(|idx| {
            let mut rng = stream_rng(master_seed, idx as u64);
            let log = run_gse(params, &mut rng, None);
            log.compartments_at(&times)
        })
        .collect();
    let mut s = vec![0.0; TRAJECTORY_POINTS];
    let mut i = vec![0.0; TRAJECTORY_POINTS];
    let mut rr = vec![0.0; TRAJECTORY_POINTS];
    for row in &sampled {
        for (k, c) in row.iter().enumerate() {
            s[k] += c.s as f64;
            i[k] += (c.i + c.e) as f64;
            rr[k] += c.r as f64;
        }
    }
    let rf = r as f64;
    for k in 0..TRAJECTORY_POINTS {
        s[k] /= rf;
        i[k] /= rf;
        rr[k] /= rf;
    }
    let final_sizes: Vec<u32> = firsts.iter().map(|x| x.0).collect();
    let majors = final_sizes
        .iter()
        .filter(|&&z| classify_major(z, params.n, cutoff_fraction))
        .count();
    Ok(ReplicateSummary {
        major_fraction: majors as f64 / rf,
        final_sizes,
        cutoff_fraction,
        mean_trajectory: MeanTrajectory { times, s, i, r: rr },
    })
}

/// Discrete-generation Reed-Frost chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReedFrostParams {
    pub n: u32,
    /// Per-pair transmission probability.
    pub p: f64,
    /// Initial infectives.
    pub i0: u32,
}

impl ReedFrostParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::invalid("p must be in [0,1]"));
        }
        if self.i0 < 1 || self.i0 >= self.n {
            return Err(Error::invalid("need 1 <= i0 < n"));
        }
        Ok(())
    }
}

/// Per-generation infective counts, starting at `[i0]`, until extinction.
/// Each susceptible escapes a generation with probability `(1-p)^I`.
pub fn simulate_reed_frost(params: &ReedFrostParams, seed: u64) -> Result<Vec<u32>> {
    params.validate()?;
    let mut rng = stream_rng(seed, 0);
    let mut s = params.n - params.i0;
    let mut i = params.i0;
    let mut generations = vec![i];
    while i > 0 && s > 0 {
        let infect_prob = 1.0 - (1.0 - params.p).powi(i as i32);
        let next = if infect_prob <= 0.0 {
            0
        } else if infect_prob >= 1.0 {
            s
        } else {
            Binomial::new(s as u64, infect_prob)
                .expect("valid binomial")
                .sample(&mut rng) as u32
        };
        if next == 0 {
            break;
        }
        generations.push(next);
        s -= next;
        i = next;
    }
    Ok(generations)
}
