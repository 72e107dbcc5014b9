//! Discrete-event simulation of the two-channel system, used to check the
//! analytical M/D/1 waits.
//!
//! Poisson arrivals pick the chatbot with a fixed probability. Chatbot
//! customers spend `t_serve1_B` with the bot and, on failure, join the
//! single live-agent queue, whose service time is the constant `1 / mu`.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, VecDeque};
use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::design::{mix_seed, stream_rng};
use crate::equilibrium::SystemConfig;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::queueing::channel_demands;
use crate::report::format_num;

pub const N_BATCHES: usize = 32;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Discipline {
    #[default]
    PooledFifo,
    /// Chatbot failures are served before direct customers; service is
    /// never interrupted.
    NonpreemptivePriorityBotFailures,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesConfig {
    pub system: SystemConfig,
    /// Probability that an arrival chooses the chatbot.
    pub rho_b: f64,
    pub mu: f64,
    pub discipline: Discipline,
    pub n_arrivals: usize,
    pub warmup_fraction: f64,
    pub seed: u64,
    pub record_trace: bool,
}

impl Default for DesConfig {
    fn default() -> Self {
        DesConfig {
            system: SystemConfig::default(),
            rho_b: 0.0,
            mu: 0.2,
            discipline: Discipline::PooledFifo,
            n_arrivals: 1_000_000,
            warmup_fraction: 0.1,
            seed: 0,
            record_trace: false,
        }
    }
}

impl DesConfig {
    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        if !(0.0..=1.0).contains(&self.rho_b) {
            return Err(Error::InvalidParameter(format!("rho_B = {}", self.rho_b)));
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::InvalidParameter(format!("mu = {}", self.mu)));
        }
        if self.n_arrivals == 0 {
            return Err(Error::InvalidParameter(
                "n_arrivals must be at least 1".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return Err(Error::InvalidParameter(format!(
                "warmup_fraction = {}",
                self.warmup_fraction
            )));
        }
        Ok(())
    }

    /// Analytical live-agent arrival rate for this routing split.
    pub fn lambda_a(&self) -> f64 {
        channel_demands(self.system.lambda_total, self.rho_b, self.system.p_b).0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesStats {
    pub mean_queue_wait_direct: f64,
    pub mean_queue_wait_bot_failures: f64,
    pub mean_queue_wait_overall: f64,
    pub utilization_observed: f64,
    /// Batch-means 95% half-width of the observed utilization.
    pub utilization_half_width_95: f64,
    pub utilization_expected: f64,
    pub n_served: usize,
    pub n_served_direct: usize,
    pub n_served_bot_failures: usize,
    pub n_served_bot_successes: usize,
    /// Batch-means 95% half-width of the overall mean queue wait; NaN with
    /// fewer than two batches of data.
    pub half_width_95: f64,
    pub stability_warning: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub customer: u64,
    pub arrival_time: f64,
    pub to_bot: bool,
    pub bot_failed: bool,
    pub queue_entry: f64,
    pub service_start: f64,
    pub service_end: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DesRun {
    pub stats: DesStats,
    pub trace: Vec<TraceRow>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Time(f64);

impl Eq for Time {}

impl PartialOrd for Time {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Time {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Event {
    Arrival,
    BotDone { customer: u64, failed: bool },
    ServiceEnd,
}

#[derive(Clone, Copy, Debug)]
struct Waiting {
    customer: u64,
    failure: bool,
    entry: f64,
}

fn t_quantile_975(batches: usize) -> f64 {
    StudentsT::new(0.0, 1.0, (batches - 1) as f64)
        .map(|t| t.inverse_cdf(0.975))
        .unwrap_or(f64::NAN)
}

/// Mean and 95% half-width from consecutive batch means.
fn batch_means(values: &[f64]) -> f64 {
    let batches = N_BATCHES.min(values.len());
    if batches < 2 {
        return f64::NAN;
    }
    let size = values.len() / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| values[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    half_width(&means)
}

fn half_width(means: &[f64]) -> f64 {
    let k = means.len() as f64;
    let m = means.iter().sum::<f64>() / k;
    let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (k - 1.0);
    t_quantile_975(means.len()) * (var / k).sqrt()
}

pub fn run_des(config: &DesConfig) -> Result<DesStats> {
    Ok(simulate(config)?.stats)
}

pub fn simulate(config: &DesConfig) -> Result<DesRun> {
    config.validate()?;
    let sys = &config.system;
    let service = 1.0 / config.mu;
    let interarrival =
        Exp::new(sys.lambda_total).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut rng = stream_rng(config.seed, 0);
    let warmup = (config.warmup_fraction * config.n_arrivals as f64).floor() as u64;

    let mut heap: BinaryHeap<Reverse<(Time, u64, Event)>> = BinaryHeap::new();
    let mut seq = 0u64;
    let mut push = |heap: &mut BinaryHeap<Reverse<(Time, u64, Event)>>, t: f64, e: Event| {
        heap.push(Reverse((Time(t), seq, e)));
        seq += 1;
    };

    let mut direct_q: VecDeque<Waiting> = VecDeque::new();
    let mut failure_q: VecDeque<Waiting> = VecDeque::new();
    let mut in_service: Option<Waiting> = None;
    let mut next_id = 0u64;
    let mut arrival_times: Vec<f64> = Vec::new();

    let mut waits: Vec<f64> = Vec::new();
    let (mut sum_direct, mut n_direct) = (0.0, 0usize);
    let (mut sum_fail, mut n_fail) = (0.0, 0usize);
    let mut n_success = 0usize;
    let mut service_starts: Vec<f64> = Vec::new();
    let mut window_start = f64::NAN;
    let mut now = 0.0;
    let mut trace = Vec::new();

    push(&mut heap, interarrival.sample(&mut rng), Event::Arrival);

    while let Some(Reverse((Time(t), _, event))) = heap.pop() {
        now = t;
        match event {
            Event::Arrival => {
                let id = next_id;
                next_id += 1;
                if id == warmup {
                    window_start = t;
                }
                if config.record_trace {
                    arrival_times.push(t);
                }
                let to_bot = rng.random_bool(config.rho_b);
                let failed = to_bot && !rng.random_bool(sys.p_b);
                if (next_id as usize) < config.n_arrivals {
                    push(&mut heap, t + interarrival.sample(&mut rng), Event::Arrival);
                }
                if to_bot {
                    push(
                        &mut heap,
                        t + sys.t_serve1_b,
                        Event::BotDone {
                            customer: id,
                            failed,
                        },
                    );
                } else {
                    direct_q.push_back(Waiting {
                        customer: id,
                        failure: false,
                        entry: t,
                    });
                }
            }
            Event::BotDone { customer, failed } => {
                if failed {
                    let w = Waiting {
                        customer,
                        failure: true,
                        entry: t,
                    };
                    match config.discipline {
                        Discipline::PooledFifo => direct_q.push_back(w),
                        Discipline::NonpreemptivePriorityBotFailures => failure_q.push_back(w),
                    }
                } else {
                    if customer >= warmup {
                        n_success += 1;
                    }
                    if config.record_trace {
                        trace.push(TraceRow {
                            customer,
                            arrival_time: arrival_times[customer as usize],
                            to_bot: true,
                            bot_failed: false,
                            queue_entry: f64::NAN,
                            service_start: f64::NAN,
                            service_end: f64::NAN,
                        });
                    }
                }
            }
            Event::ServiceEnd => {
                let done = in_service.take().expect("service end without customer");
                if config.record_trace {
                    let start = t - service;
                    trace.push(TraceRow {
                        customer: done.customer,
                        arrival_time: arrival_times[done.customer as usize],
                        to_bot: done.failure,
                        bot_failed: done.failure,
                        queue_entry: done.entry,
                        service_start: start,
                        service_end: t,
                    });
                }
            }
        }
        if in_service.is_none() {
            if let Some(next) = failure_q.pop_front().or_else(|| direct_q.pop_front()) {
                if next.customer >= warmup {
                    let wait = t - next.entry;
                    waits.push(wait);
                    if next.failure {
                        sum_fail += wait;
                        n_fail += 1;
                    } else {
                        sum_direct += wait;
                        n_direct += 1;
                    }
                }
                if t >= window_start {
                    service_starts.push(t);
                }
                in_service = Some(next);
                push(&mut heap, t + service, Event::ServiceEnd);
            }
        }
    }

    let (utilization, util_hw) = utilization(&service_starts, service, window_start, now);
    let mean = |s: f64, n: usize| if n > 0 { s / n as f64 } else { 0.0 };
    let lambda_a = config.lambda_a();
    let stats = DesStats {
        mean_queue_wait_direct: mean(sum_direct, n_direct),
        mean_queue_wait_bot_failures: mean(sum_fail, n_fail),
        mean_queue_wait_overall: mean(sum_direct + sum_fail, n_direct + n_fail),
        utilization_observed: utilization,
        utilization_half_width_95: util_hw,
        utilization_expected: lambda_a / config.mu,
        n_served: n_direct + n_fail + n_success,
        n_served_direct: n_direct,
        n_served_bot_failures: n_fail,
        n_served_bot_successes: n_success,
        half_width_95: batch_means(&waits),
        stability_warning: lambda_a >= config.mu,
    };
    if stats.stability_warning {
        log::warn!(
            "live-agent demand {lambda_a} is not below service rate {}",
            config.mu
        );
    }
    trace.sort_by_key(|r| r.customer);
    Ok(DesRun { stats, trace })
}

/// Busy fraction over `[start, end]` and its batch-means half-width over
/// equal time slices.
fn utilization(service_starts: &[f64], service: f64, start: f64, end: f64) -> (f64, f64) {
    let span = end - start;
    if !(span > 0.0) {
        return (0.0, f64::NAN);
    }
    let width = span / N_BATCHES as f64;
    let mut busy = vec![0.0; N_BATCHES];
    for &s in service_starts {
        let (a, b) = (s.max(start), (s + service).min(end));
        if !(a < b) {
            continue;
        }
        let first = (((a - start) / width) as usize).min(N_BATCHES - 1);
        let last = (((b - start) / width) as usize).min(N_BATCHES - 1);
        for (slot, acc) in busy.iter_mut().enumerate().take(last + 1).skip(first) {
            let lo = start + slot as f64 * width;
            let hi = if slot == N_BATCHES - 1 {
                end
            } else {
                lo + width
            };
            *acc += (b.min(hi) - a.max(lo)).max(0.0);
        }
    }
    let total = busy.iter().sum::<f64>() / span;
    let fractions: Vec<f64> = busy.iter().map(|b| b / width).collect();
    (total, half_width(&fractions))
}

/// Seed of replication `r` under run seed `seed`.
pub fn replication_seed(seed: u64, r: usize) -> u64 {
    mix_seed(seed, r as u64)
}

/// Independent replications with seeds derived from `config.seed`.
pub fn run_replications(config: &DesConfig, n: usize, exec: Execution) -> Result<Vec<DesStats>> {
    exec.map_range(n, |r| {
        run_des(&DesConfig {
            seed: replication_seed(config.seed, r),
            record_trace: false,
            ..*config
        })
    })
    .into_iter()
    .collect()
}

pub const TRACE_COLUMNS: [&str; 7] = [
    "customer",
    "arrival_time",
    "route",
    "bot_failed",
    "queue_entry",
    "service_start",
    "service_end",
];

pub fn write_trace_csv<W: Write>(w: W, rows: &[TraceRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(TRACE_COLUMNS)?;
    let opt = |x: f64| {
        if x.is_nan() {
            String::new()
        } else {
            format_num(x)
        }
    };
    for r in rows {
        out.write_record([
            r.customer.to_string(),
            format_num(r.arrival_time),
            if r.to_bot {
                "bot".into()
            } else {
                "direct".into()
            },
            if r.bot_failed { "1".into() } else { "0".into() },
            opt(r.queue_entry),
            opt(r.service_start),
            opt(r.service_end),
        ])?;
    }
    out.flush().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(())
}
