use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::schedulers::{Algorithm, OpCounters};
use crate::traffic::TrafficType;

/// Raw per-seed tallies for one traffic class (or all UEs).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TypeCounts {
    pub num_ues: u64,
    pub arrived: u64,
    pub delivered: u64,
    pub dropped: u64,
    pub queued: u64,
    pub delivered_bits: u64,
    pub hol_delay_sum_sec: f64,
    pub hol_delay_samples: u64,
}

impl TypeCounts {
    pub fn add(&mut self, o: &TypeCounts) {
        self.num_ues += o.num_ues;
        self.arrived += o.arrived;
        self.delivered += o.delivered;
        self.dropped += o.dropped;
        self.queued += o.queued;
        self.delivered_bits += o.delivered_bits;
        self.hol_delay_sum_sec += o.hol_delay_sum_sec;
        self.hol_delay_samples += o.hol_delay_samples;
    }

    pub fn loss_rate(&self) -> f64 {
        if self.arrived == 0 {
            0.0
        } else {
            self.dropped as f64 / self.arrived as f64
        }
    }

    pub fn mean_hol_delay_sec(&self) -> f64 {
        if self.hol_delay_samples == 0 {
            0.0
        } else {
            self.hol_delay_sum_sec / self.hol_delay_samples as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedReport {
    pub seed: u64,
    pub slots: u64,
    pub duration_sec: f64,
    pub per_type: BTreeMap<TrafficType, TypeCounts>,
    pub aggregate: TypeCounts,
    pub counters: OpCounters,
    pub scheduler_calls: u64,
}

impl SeedReport {
    pub fn throughput_bps(c: &TypeCounts, duration_sec: f64) -> f64 {
        if duration_sec > 0.0 {
            c.delivered_bits as f64 / duration_sec
        } else {
            0.0
        }
    }

    pub fn packet_rate(c: &TypeCounts, duration_sec: f64) -> f64 {
        if duration_sec > 0.0 {
            c.delivered as f64 / duration_sec
        } else {
            0.0
        }
    }
}

/// Mean and sample standard deviation across seeds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self::default();
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, std }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TypeKpi {
    pub num_ues: u64,
    pub throughput_bps: Stat,
    pub throughput_pkt_per_sec: Stat,
    pub loss_rate: Stat,
    pub mean_hol_delay_sec: Stat,
}

impl TypeKpi {
    fn from_seeds<'a>(items: impl Iterator<Item = (&'a TypeCounts, f64)> + Clone) -> Self {
        let col = |f: &dyn Fn(&TypeCounts, f64) -> f64| Stat::of(&items.clone().map(|(c, d)| f(c, d)).collect::<Vec<_>>());
        Self {
            num_ues: items.clone().next().map_or(0, |(c, _)| c.num_ues),
            throughput_bps: col(&|c, d| SeedReport::throughput_bps(c, d)),
            throughput_pkt_per_sec: col(&|c, d| SeedReport::packet_rate(c, d)),
            loss_rate: col(&|c, _| c.loss_rate()),
            mean_hol_delay_sec: col(&|c, _| c.mean_hol_delay_sec()),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CounterKpi {
    pub tbs_calcs: Stat,
    pub metric_calcs: Stat,
    pub rb_amount_calcs: Stat,
    /// Per slot in which the scheduler ran.
    pub tbs_calcs_per_call: Stat,
    pub metric_calcs_per_call: Stat,
    pub rb_amount_calcs_per_call: Stat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub algorithm: Algorithm,
    pub num_ues: usize,
    pub num_rbs: usize,
    pub slots: u64,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpiReport {
    pub meta: RunMeta,
    pub per_type: BTreeMap<TrafficType, TypeKpi>,
    pub aggregate: TypeKpi,
    pub counters: CounterKpi,
    pub per_seed: Vec<SeedReport>,
}

impl KpiReport {
    pub fn from_seeds(meta: RunMeta, per_seed: Vec<SeedReport>) -> Self {
        let mut types: Vec<TrafficType> = per_seed.iter().flat_map(|s| s.per_type.keys().copied()).collect();
        types.sort();
        types.dedup();
        let empty = &TypeCounts::default();
        let per_type = types
            .into_iter()
            .map(|t| {
                let items = per_seed.iter().map(move |s| (s.per_type.get(&t).unwrap_or(empty), s.duration_sec));
                (t, TypeKpi::from_seeds(items))
            })
            .collect();
        let aggregate = TypeKpi::from_seeds(per_seed.iter().map(|s| (&s.aggregate, s.duration_sec)));

        let col = |f: &dyn Fn(&SeedReport) -> f64| Stat::of(&per_seed.iter().map(f).collect::<Vec<_>>());
        let per_call = |v: u64, s: &SeedReport| if s.scheduler_calls == 0 { 0.0 } else { v as f64 / s.scheduler_calls as f64 };
        let counters = CounterKpi {
            tbs_calcs: col(&|s| s.counters.tbs_calcs as f64),
            metric_calcs: col(&|s| s.counters.metric_calcs as f64),
            rb_amount_calcs: col(&|s| s.counters.rb_amount_calcs as f64),
            tbs_calcs_per_call: col(&|s| per_call(s.counters.tbs_calcs, s)),
            metric_calcs_per_call: col(&|s| per_call(s.counters.metric_calcs, s)),
            rb_amount_calcs_per_call: col(&|s| per_call(s.counters.rb_amount_calcs, s)),
        };
        Self { meta, per_type, aggregate, counters, per_seed }
    }

    pub fn total_counters(&self) -> OpCounters {
        let mut c = OpCounters::default();
        for s in &self.per_seed {
            c += s.counters;
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stat_uses_sample_std() {
        let s = Stat::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.std - 1.290_994_448_7).abs() < 1e-9);
        assert_eq!(Stat::of(&[5.0]), Stat { mean: 5.0, std: 0.0 });
        assert_eq!(Stat::of(&[]), Stat::default());
    }

    #[test]
    fn loss_rate_of_nothing_is_zero() {
        assert_eq!(TypeCounts::default().loss_rate(), 0.0);
        let c = TypeCounts { arrived: 4, dropped: 1, ..Default::default() };
        assert_eq!(c.loss_rate(), 0.25);
    }
}
