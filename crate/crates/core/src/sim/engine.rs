use std::collections::{BTreeMap, VecDeque};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link::{ChannelReport, LinkAdaptation};
use crate::metrics::{update_avg_rate, MetricKind, QosProfile, UeSchedulingState, DEFAULT_TIME_CONSTANT_SLOTS};
use crate::resource::{BwpConfig, UeId};
use crate::schedulers::{schedule, Algorithm, OpCounters, Outcome, SchedulerInput, UeSlotInput};
use crate::traffic::{generate_arrivals, threshold_slots, ArrivalProcess, TrafficType, UeQueue};

use super::channel::{ChannelConfig, ChannelProcess};
use super::kpi::{KpiReport, RunMeta, SeedReport, TypeCounts};

const GEOMETRY_STREAM: u64 = 0;
const CHANNEL_STREAM: u64 = 1;
const TRAFFIC_STREAM: u64 = 2;

/// What a UE asks for in one slot.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PayloadMode {
    /// Every queued bit, so one grant may cover several packets.
    #[default]
    AllQueued,
    /// Only what is left of the head-of-line packet.
    HolOnly,
}

/// Parameters of a single (algorithm, UE count) simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub algorithm: Algorithm,
    pub bwp: BwpConfig,
    pub num_ues: usize,
    /// Traffic types assigned round-robin to UEs.
    pub traffic_mix: Vec<TrafficType>,
    /// Per-type overrides of the built-in profiles.
    pub qos_overrides: BTreeMap<TrafficType, QosProfile>,
    pub channel: ChannelConfig,
    pub slots: u64,
    pub seeds: Vec<u64>,
    pub feedback_delay: u32,
    pub metric: MetricKind,
    pub avg_rate_time_constant: u32,
    pub link: LinkAdaptation,
    pub payload: PayloadMode,
    pub arrivals: ArrivalProcess,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Jade,
            bwp: BwpConfig::default(),
            num_ues: 10,
            traffic_mix: TrafficType::ALL.to_vec(),
            qos_overrides: BTreeMap::new(),
            channel: ChannelConfig::default(),
            slots: 1200,
            seeds: (0..10).collect(),
            feedback_delay: 1,
            metric: MetricKind::Mlwdf,
            avg_rate_time_constant: DEFAULT_TIME_CONSTANT_SLOTS,
            link: LinkAdaptation::default(),
            payload: PayloadMode::AllQueued,
            arrivals: ArrivalProcess::Poisson,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.bwp.validate().map_err(|e| Error::Config(format!("bwp: {e}")))?;
        if self.seeds.is_empty() {
            return Err(Error::Config("seeds: at least one seed is required".into()));
        }
        if self.traffic_mix.is_empty() {
            return Err(Error::Config("traffic_mix: at least one traffic type is required".into()));
        }
        if self.avg_rate_time_constant == 0 {
            return Err(Error::Config("avg_rate_time_constant must be >= 1".into()));
        }
        for (t, q) in &self.qos_overrides {
            q.validate().map_err(|e| Error::Config(format!("traffic.{t}: {e}")))?;
        }
        self.channel.validate()
    }

    pub fn qos_of(&self, t: TrafficType) -> QosProfile {
        self.qos_overrides.get(&t).copied().unwrap_or_else(|| t.profile())
    }

    pub fn traffic_of(&self, ue: usize) -> TrafficType {
        self.traffic_mix[ue % self.traffic_mix.len()]
    }
}

#[derive(Debug, Clone)]
struct UeRuntime {
    traffic: TrafficType,
    qos: QosProfile,
    drop_after_slots: u64,
    queue: UeQueue,
    avg_rate: f64,
    hol_delay_sum_sec: f64,
    hol_delay_samples: u64,
}

/// Observations from one slot, for tests and tracing.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotTrace {
    pub slot: u64,
    /// `generated_at_slot` of every report handed to the scheduler.
    pub csi_slots: Vec<i64>,
    /// Payload of every UE handed to the scheduler.
    pub payloads: Vec<(UeId, u64)>,
    pub outcome: Option<Outcome>,
    pub counters: OpCounters,
    pub dropped: u64,
    pub delivered_bits: u64,
}

/// State of one seeded run.
pub struct World {
    cfg: SimConfig,
    seed: u64,
    ues: Vec<UeRuntime>,
    channel: ChannelProcess,
    /// Reports for slots `t - feedback_delay ..= t`, oldest first.
    csi: VecDeque<Vec<ChannelReport>>,
    channel_rng: ChaCha8Rng,
    traffic_rng: ChaCha8Rng,
    counters: OpCounters,
    scheduler_calls: u64,
    next_slot: u64,
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Per-slot tie-break seed (splitmix64 finalizer over seed and slot).
fn slot_seed(seed: u64, slot: u64) -> u64 {
    let mut z = seed ^ slot.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl World {
    pub fn new(cfg: SimConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let mut geometry = stream_rng(seed, GEOMETRY_STREAM);
        let mut channel_rng = stream_rng(seed, CHANNEL_STREAM);
        let mut channel = ChannelProcess::new(cfg.channel, cfg.num_ues, cfg.bwp.num_rbgs(), &mut geometry);

        // Reports that exist before slot 0 so the first slots see delayed CSI.
        let delay = i64::from(cfg.feedback_delay);
        let mut csi = VecDeque::new();
        csi.push_back(channel.reports(-delay));
        for s in (-delay + 1)..0 {
            csi.push_back(channel.step_channel(&mut channel_rng, s));
        }

        let ues = (0..cfg.num_ues)
            .map(|k| {
                let traffic = cfg.traffic_of(k);
                let qos = cfg.qos_of(traffic);
                UeRuntime {
                    traffic,
                    qos,
                    drop_after_slots: threshold_slots(&qos, cfg.bwp.slot_duration_sec),
                    queue: UeQueue::new(),
                    avg_rate: UeSchedulingState::default().avg_rate,
                    hol_delay_sum_sec: 0.0,
                    hol_delay_samples: 0,
                }
            })
            .collect();

        Ok(Self {
            seed,
            ues,
            channel,
            csi,
            channel_rng,
            traffic_rng: stream_rng(seed, TRAFFIC_STREAM),
            counters: OpCounters::default(),
            scheduler_calls: 0,
            next_slot: 0,
            cfg,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn queue(&self, ue: usize) -> &UeQueue {
        &self.ues[ue].queue
    }

    pub fn avg_rate(&self, ue: usize) -> f64 {
        self.ues[ue].avg_rate
    }

    /// Runs the next slot: CSI, arrivals, drops, scheduling, validation,
    /// grant application and average-rate update.
    pub fn run_slot(&mut self) -> Result<SlotTrace> {
        let slot = self.next_slot;
        let dt = self.cfg.bwp.slot_duration_sec;

        let fresh = if slot == 0 && self.cfg.feedback_delay == 0 {
            self.channel.reports(0)
        } else {
            self.channel.step_channel(&mut self.channel_rng, slot as i64)
        };
        self.csi.push_back(fresh);
        while self.csi.len() > self.cfg.feedback_delay as usize + 1 {
            self.csi.pop_front();
        }

        for ue in &mut self.ues {
            let arrivals = generate_arrivals(&ue.qos, self.cfg.arrivals, slot, dt, &mut self.traffic_rng);
            ue.queue.extend(arrivals);
        }
        let mut dropped = 0;
        for ue in &mut self.ues {
            dropped += ue.queue.drop_expired(ue.drop_after_slots, slot);
        }

        let delayed = &self.csi[0];
        let mut slot_inputs = Vec::new();
        for (k, ue) in self.ues.iter_mut().enumerate() {
            let pending = match self.cfg.payload {
                PayloadMode::AllQueued => ue.queue.pending_bits(),
                PayloadMode::HolOnly => ue.queue.hol_remaining_bits(),
            };
            if pending == 0 {
                continue;
            }
            let hol = ue.queue.hol_delay_sec(slot, dt);
            ue.hol_delay_sum_sec += hol;
            ue.hol_delay_samples += 1;
            slot_inputs.push(UeSlotInput {
                ue_id: UeId(k as u32),
                qos: ue.qos,
                state: UeSchedulingState { hol_delay_sec: hol, avg_rate: ue.avg_rate, pending_bits: pending },
                report: delayed[k].clone(),
            });
        }
        let csi_slots: Vec<i64> = slot_inputs.iter().map(|u| u.report.generated_at_slot).collect();
        let payloads: Vec<(UeId, u64)> = slot_inputs.iter().map(|u| (u.ue_id, u.payload())).collect();

        let mut served = vec![0u64; self.ues.len()];
        let mut delivered_bits = 0;
        let mut counters = OpCounters::default();
        let outcome = if slot_inputs.is_empty() {
            None
        } else {
            let input = SchedulerInput {
                bwp: self.cfg.bwp,
                ues: slot_inputs,
                metric: &self.cfg.metric,
                link: &self.cfg.link,
                rng_seed: slot_seed(self.seed, slot),
            };
            let (outcome, c) = schedule(self.cfg.algorithm, &input)?;
            let verdict = outcome.validate(&self.cfg.bwp);
            if !verdict.is_valid() {
                return Err(Error::InvalidDecision {
                    slot,
                    algorithm: self.cfg.algorithm.to_string(),
                    details: verdict.describe(),
                });
            }
            counters = c;
            self.scheduler_calls += 1;
            for (ue, bits) in outcome.grants() {
                let k = ue.0 as usize;
                served[k] = bits;
                delivered_bits += self.ues[k].queue.apply_grant(bits);
            }
            Some(outcome)
        };
        self.counters += counters;

        for (ue, &bits) in self.ues.iter_mut().zip(&served) {
            let st = UeSchedulingState { avg_rate: ue.avg_rate, ..Default::default() };
            ue.avg_rate = update_avg_rate(&st, bits, self.cfg.avg_rate_time_constant).avg_rate;
        }

        self.next_slot += 1;
        Ok(SlotTrace { slot, csi_slots, payloads, outcome, counters, dropped, delivered_bits })
    }

    pub fn report(&self) -> SeedReport {
        let mut per_type: BTreeMap<TrafficType, TypeCounts> = BTreeMap::new();
        for ue in &self.ues {
            let s = ue.queue.stats;
            let c = TypeCounts {
                num_ues: 1,
                arrived: s.arrived,
                delivered: s.delivered,
                dropped: s.dropped,
                queued: ue.queue.len() as u64,
                delivered_bits: s.delivered_bits,
                hol_delay_sum_sec: ue.hol_delay_sum_sec,
                hol_delay_samples: ue.hol_delay_samples,
            };
            per_type.entry(ue.traffic).or_default().add(&c);
        }
        let mut aggregate = TypeCounts::default();
        for c in per_type.values() {
            aggregate.add(c);
        }
        SeedReport {
            seed: self.seed,
            slots: self.next_slot,
            duration_sec: self.next_slot as f64 * self.cfg.bwp.slot_duration_sec,
            per_type,
            aggregate,
            counters: self.counters,
            scheduler_calls: self.scheduler_calls,
        }
    }
}

pub fn run_seed(cfg: &SimConfig, seed: u64) -> Result<SeedReport> {
    let mut world = World::new(cfg.clone(), seed)?;
    for _ in 0..cfg.slots {
        world.run_slot()?;
    }
    Ok(world.report())
}

/// Runs every seed (concurrently when a rayon pool is available) and
/// aggregates the per-seed reports in seed-list order.
pub fn run_simulation(cfg: &SimConfig) -> Result<KpiReport> {
    cfg.validate()?;
    let per_seed = cfg.seeds.par_iter().map(|&s| run_seed(cfg, s)).collect::<Result<Vec<_>>>()?;
    let meta = RunMeta {
        algorithm: cfg.algorithm,
        num_ues: cfg.num_ues,
        num_rbs: cfg.bwp.num_rbs,
        slots: cfg.slots,
        seeds: cfg.seeds.clone(),
    };
    Ok(KpiReport::from_seeds(meta, per_seed))
}
