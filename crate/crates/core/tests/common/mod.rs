#![allow(dead_code)]

use fdra::link::ChannelReport;
use fdra::metrics::{QosProfile, UeSchedulingState};
use fdra::resource::{BwpConfig, UeId};
use fdra::schedulers::UeSlotInput;
use fdra::traffic::TrafficType;
use rand::Rng;

/// Random per-subband CQIs with some frequency correlation.
pub fn random_cqi<R: Rng>(rng: &mut R, subbands: usize) -> Vec<u8> {
    let mean: i32 = rng.random_range(2..=14);
    let mut x: i32 = 0;
    (0..subbands)
        .map(|_| {
            x = (x + rng.random_range(-2..=2)).clamp(-4, 4);
            (mean + x).clamp(0, 15) as u8
        })
        .collect()
}

pub fn random_qos<R: Rng>(rng: &mut R) -> QosProfile {
    TrafficType::ALL[rng.random_range(0..4)].profile()
}

/// One UE with pending data, random QoS class, delay, average rate and CSI.
pub fn random_ue<R: Rng>(rng: &mut R, id: u32, bwp: &BwpConfig, max_payload: u64) -> UeSlotInput {
    let qos = random_qos(rng);
    UeSlotInput {
        ue_id: UeId(id),
        qos,
        state: UeSchedulingState {
            hol_delay_sec: rng.random_range(0.0..qos.delay_threshold_sec),
            avg_rate: rng.random_range(1.0..20_000.0),
            pending_bits: rng.random_range(1..=max_payload),
        },
        report: ChannelReport {
            sb_cqi: random_cqi(rng, bwp.num_rbgs()),
            wb_rank: rng.random_range(1..=4),
            generated_at_slot: 0,
        },
    }
}

pub fn random_ues<R: Rng>(rng: &mut R, k: usize, bwp: &BwpConfig, max_payload: u64) -> Vec<UeSlotInput> {
    // Shuffled, non-contiguous ids so nothing depends on id == index.
    let mut ids: Vec<u32> = (0..k as u32 * 3).step_by(3).collect();
    for i in (1..ids.len()).rev() {
        ids.swap(i, rng.random_range(0..=i));
    }
    ids.into_iter().map(|id| random_ue(rng, id, bwp, max_payload)).collect()
}

/// Small instance for oracle comparisons: K UEs on B RBs, one RB per subband.
pub fn small_instance<R: Rng>(rng: &mut R, k: usize, b: usize) -> (BwpConfig, Vec<UeSlotInput>) {
    let bwp = BwpConfig::new(b, 1, 0.0005).unwrap();
    let ues = (0..k as u32)
        .map(|id| {
            let mut ue = random_ue(rng, id, &bwp, 1);
            ue.report.wb_rank = 1;
            // Payload between one and all RBs' worth of bits.
            ue.state.pending_bits = rng.random_range(100..=3 * 500 * b as u64 / k as u64);
            ue
        })
        .collect();
    (bwp, ues)
}
