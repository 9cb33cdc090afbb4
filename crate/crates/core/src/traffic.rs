//! Traffic models, per-UE FIFO queues and delay-threshold drops.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::QosProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrafficType {
    Embb,
    Arvr2,
    Its,
    Powerdist2,
}

impl TrafficType {
    pub const ALL: [TrafficType; 4] = [TrafficType::Embb, TrafficType::Arvr2, TrafficType::Its, TrafficType::Powerdist2];

    pub fn name(&self) -> &'static str {
        match self {
            TrafficType::Embb => "embb",
            TrafficType::Arvr2 => "arvr2",
            TrafficType::Its => "its",
            TrafficType::Powerdist2 => "powerdist2",
        }
    }

    /// Built-in QoS and load parameters of each model.
    pub fn profile(&self) -> QosProfile {
        let (tau_ms, delta, size, rate) = match self {
            TrafficType::Embb => (100.0, 0.1, 12_000, 1000.0),
            TrafficType::Arvr2 => (7.0, 1e-3, 32_768, 60.0),
            TrafficType::Its => (7.0, 1e-5, 10_960, 100.0),
            TrafficType::Powerdist2 => (6.0, 1e-5, 2_000, 1200.0),
        };
        QosProfile {
            delay_threshold_sec: tau_ms / 1000.0,
            acceptable_drop_prob: delta,
            packet_size_bits: size,
            arrival_rate_pkt_per_sec: rate,
        }
    }
}

impl fmt::Display for TrafficType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TrafficType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TrafficType::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown traffic type '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArrivalProcess {
    #[default]
    Poisson,
    /// Evenly spaced arrivals at exactly the mean rate.
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Packet {
    pub size_bits: u64,
    pub remaining_bits: u64,
    pub arrival_slot: u64,
}

impl Packet {
    pub fn new(size_bits: u64, arrival_slot: u64) -> Self {
        Self { size_bits, remaining_bits: size_bits, arrival_slot }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueueStats {
    pub arrived: u64,
    pub delivered: u64,
    pub dropped: u64,
    /// Bits of fully delivered packets.
    pub delivered_bits: u64,
    pub arrived_bits: u64,
}

#[derive(Debug, Clone, Default)]
pub struct UeQueue {
    fifo: VecDeque<Packet>,
    pub stats: QueueStats,
}

impl UeQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, p: Packet) {
        debug_assert!(self.fifo.back().is_none_or(|b| b.arrival_slot <= p.arrival_slot));
        self.stats.arrived += 1;
        self.stats.arrived_bits += p.size_bits;
        self.fifo.push_back(p);
    }

    pub fn extend(&mut self, packets: impl IntoIterator<Item = Packet>) {
        for p in packets {
            self.push(p);
        }
    }

    pub fn len(&self) -> usize {
        self.fifo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fifo.is_empty()
    }

    pub fn packets(&self) -> impl Iterator<Item = &Packet> {
        self.fifo.iter()
    }

    pub fn front(&self) -> Option<&Packet> {
        self.fifo.front()
    }

    pub fn hol_delay_slots(&self, slot: u64) -> u64 {
        self.fifo.front().map_or(0, |p| slot.saturating_sub(p.arrival_slot))
    }

    pub fn hol_delay_sec(&self, slot: u64, slot_duration_sec: f64) -> f64 {
        self.hol_delay_slots(slot) as f64 * slot_duration_sec
    }

    pub fn pending_bits(&self) -> u64 {
        self.fifo.iter().map(|p| p.remaining_bits).sum()
    }

    pub fn hol_remaining_bits(&self) -> u64 {
        self.fifo.front().map_or(0, |p| p.remaining_bits)
    }

    /// Drains `granted_bits` front to back. Returns the bits of packets
    /// completed by this grant (full packet sizes).
    pub fn apply_grant(&mut self, granted_bits: u64) -> u64 {
        let mut budget = granted_bits;
        let mut delivered_bits = 0;
        while budget > 0 {
            let Some(front) = self.fifo.front_mut() else { break };
            let used = front.remaining_bits.min(budget);
            front.remaining_bits -= used;
            budget -= used;
            if front.remaining_bits == 0 {
                let p = self.fifo.pop_front().expect("front exists");
                delivered_bits += p.size_bits;
                self.stats.delivered += 1;
                self.stats.delivered_bits += p.size_bits;
            }
        }
        delivered_bits
    }

    /// Removes every packet aged `>= threshold_slots` that still has bits
    /// left, and returns how many were dropped.
    pub fn drop_expired(&mut self, threshold_slots: u64, slot: u64) -> u64 {
        let before = self.fifo.len();
        self.fifo
            .retain(|p| p.remaining_bits == 0 || slot.saturating_sub(p.arrival_slot) < threshold_slots);
        let dropped = (before - self.fifo.len()) as u64;
        self.stats.dropped += dropped;
        dropped
    }
}

/// Delay threshold in whole slots, tolerant of float representation error.
pub fn threshold_slots(qos: &QosProfile, slot_duration_sec: f64) -> u64 {
    (qos.delay_threshold_sec / slot_duration_sec - 1e-9).ceil().max(0.0) as u64
}

pub fn drop_expired(queue: &mut UeQueue, qos: &QosProfile, slot: u64, slot_duration_sec: f64) -> u64 {
    queue.drop_expired(threshold_slots(qos, slot_duration_sec), slot)
}

/// New packets for one slot: Poisson with mean `rate * slot_duration`, or
/// evenly spaced for [`ArrivalProcess::Periodic`].
pub fn generate_arrivals<R: Rng + ?Sized>(
    qos: &QosProfile,
    process: ArrivalProcess,
    slot: u64,
    slot_duration_sec: f64,
    rng: &mut R,
) -> Vec<Packet> {
    let mean = qos.arrival_rate_pkt_per_sec * slot_duration_sec;
    if !(mean > 0.0) {
        return Vec::new();
    }
    let count = match process {
        ArrivalProcess::Poisson => Poisson::new(mean).map(|d| d.sample(rng) as u64).unwrap_or(0),
        ArrivalProcess::Periodic => {
            let upto = |s: u64| (s as f64 * mean + 1e-9).floor() as u64;
            upto(slot + 1) - upto(slot)
        }
    };
    (0..count).map(|_| Packet::new(qos.packet_size_bits, slot)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_rate_never_arrives() {
        let mut q = TrafficType::Embb.profile();
        q.arrival_rate_pkt_per_sec = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for s in 0..1000 {
            assert!(generate_arrivals(&q, ArrivalProcess::Poisson, s, 0.0005, &mut rng).is_empty());
            assert!(generate_arrivals(&q, ArrivalProcess::Periodic, s, 0.0005, &mut rng).is_empty());
        }
    }

    #[test]
    fn embb_poisson_mean() {
        let q = TrafficType::Embb.profile();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 100_000u64;
        let total: usize = (0..n).map(|s| generate_arrivals(&q, ArrivalProcess::Poisson, s, 0.0005, &mut rng).len()).sum();
        let mean = total as f64 / n as f64;
        assert!((mean - 0.5).abs() < 0.02, "{mean}");
    }

    #[test]
    fn powerdist2_profile_and_periodic_rate() {
        let q = TrafficType::Powerdist2.profile();
        assert_eq!(q.packet_size_bits, 2000);
        assert_eq!(q.arrival_rate_pkt_per_sec, 1200.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let total: usize = (0..1000).map(|s| generate_arrivals(&q, ArrivalProcess::Periodic, s, 0.0005, &mut rng).len()).sum();
        assert_eq!(total, 600);
        let p = generate_arrivals(&q, ArrivalProcess::Periodic, 1, 0.0005, &mut rng);
        assert!(p.iter().all(|p| p.size_bits == 2000 && p.arrival_slot == 1));
    }

    #[test]
    fn drop_boundaries() {
        let qos = TrafficType::Its.profile(); // 7 ms = 14 slots
        assert_eq!(threshold_slots(&qos, 0.0005), 14);
        let mut q = UeQueue::new();
        assert_eq!(drop_expired(&mut q, &qos, 100, 0.0005), 0);

        q.push(Packet::new(100, 0));
        assert_eq!(drop_expired(&mut q, &qos, 13, 0.0005), 0);
        assert_eq!(drop_expired(&mut q, &qos, 14, 0.0005), 1);

        let mut q = UeQueue::new();
        q.push(Packet::new(100, 0));
        q.apply_grant(40);
        assert_eq!(drop_expired(&mut q, &qos, 14, 0.0005), 1, "partially sent packets count as lost");
        assert_eq!(q.stats.dropped, 1);
        assert_eq!(q.stats.delivered, 0);
    }

    #[test]
    fn grant_drains_fifo() {
        let mut q = UeQueue::new();
        q.push(Packet::new(2000, 0));
        assert_eq!(q.apply_grant(0), 0);
        assert_eq!(q.pending_bits(), 2000);
        assert_eq!(q.apply_grant(2130), 2000);
        assert!(q.is_empty());

        let mut q = UeQueue::new();
        q.extend([Packet::new(2000, 0), Packet::new(2000, 1)]);
        assert_eq!(q.apply_grant(3000), 2000);
        assert_eq!(q.len(), 1);
        assert_eq!(q.front().unwrap().remaining_bits, 1000);
        assert_eq!(q.hol_delay_slots(5), 4);
        assert_eq!(q.hol_remaining_bits(), 1000);
    }

    proptest::proptest! {
        #[test]
        fn accounting_identity(ops in proptest::collection::vec((0u8..3, 0u64..5000), 1..200)) {
            let mut q = UeQueue::new();
            let mut slot = 0;
            for (op, x) in ops {
                match op {
                    0 => q.push(Packet::new(x.max(1), slot)),
                    1 => { q.apply_grant(x); }
                    _ => { q.drop_expired(3, slot); }
                }
                slot += 1;
                let s = q.stats;
                proptest::prop_assert_eq!(s.arrived, s.delivered + s.dropped + q.len() as u64);
            }
        }
    }
}
