//! Per-slot UE and RB schedulers.
//!
//! Every scheduler consumes the same [`SchedulerInput`] (UEs with pending
//! data, their QoS, state and CSI, the BWP and a metric) and returns an
//! [`Outcome`] together with [`OpCounters`] describing the work it did.
//!
//! The type-1 schedulers only ever remove a prefix or a suffix of the
//! remaining RBs, so the remaining set is tracked as one interval
//! ([`RbRange`]). LEAP grows windows mid-band and keeps a free-RB bitmap.

mod disjoint;
mod expand;
mod jade;
mod leap;
mod oracle;
mod type0;

use std::collections::BTreeSet;
use std::fmt;
use std::ops::AddAssign;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use disjoint::{dase_schedule, date_schedule};
pub use expand::{expand_from_end, expand_from_start, Expansion, RbRange};
pub use jade::jade_schedule;
pub use leap::leap_schedule;
pub use oracle::{brute_force_type1, DEFAULT_ORACLE_MAX_RBS, DEFAULT_ORACLE_MAX_UES};
pub use type0::type0_schedule;

use crate::error::{Error, Result};
use crate::link::{ChannelReport, LinkAdaptation};
use crate::metrics::{Metric, QosProfile, UeSchedulingState};
use crate::resource::{
    riv_encode, validate_decision, validate_rbg_decision, BwpConfig, ContiguousAllocation, DecisionEntry,
    RbgDecision, SlotDecision, UeId, Verdict,
};

#[derive(Debug, Clone, PartialEq)]
pub struct UeSlotInput {
    pub ue_id: UeId,
    pub qos: QosProfile,
    pub state: UeSchedulingState,
    pub report: ChannelReport,
}

impl UeSlotInput {
    pub fn payload(&self) -> u64 {
        self.state.pending_bits
    }
}

/// Everything a scheduler sees for one slot.
#[derive(Clone)]
pub struct SchedulerInput<'a> {
    pub bwp: BwpConfig,
    pub ues: Vec<UeSlotInput>,
    pub metric: &'a dyn Metric,
    pub link: &'a LinkAdaptation,
    /// Seed for the random last-resort tie-break of DASE/DATE.
    pub rng_seed: u64,
}

impl fmt::Debug for SchedulerInput<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SchedulerInput")
            .field("bwp", &self.bwp)
            .field("ues", &self.ues)
            .field("rng_seed", &self.rng_seed)
            .finish_non_exhaustive()
    }
}

impl SchedulerInput<'_> {
    pub fn validate(&self) -> Result<()> {
        self.bwp.validate()?;
        let mut ids = BTreeSet::new();
        for ue in &self.ues {
            if !ids.insert(ue.ue_id) {
                return Err(Error::InvalidInput(format!("duplicate {}", ue.ue_id)));
            }
            if ue.state.pending_bits == 0 {
                return Err(Error::InvalidInput(format!("{} has no pending bits", ue.ue_id)));
            }
            if !(ue.state.avg_rate > 0.0) {
                return Err(Error::NonPositiveAvgRate(ue.state.avg_rate));
            }
            if !(ue.state.hol_delay_sec >= 0.0) {
                return Err(Error::InvalidInput(format!("{} has negative HOL delay", ue.ue_id)));
            }
            ue.qos.validate()?;
            ue.report.validate(&self.bwp)?;
        }
        Ok(())
    }

    pub(crate) fn mu(&self, ue: &UeSlotInput, rate: u64) -> f64 {
        self.metric.per_rb(&ue.qos, &ue.state, rate)
    }
}

/// Per-UE per-RB quantities derived once per call from the CSI reports.
pub(crate) struct Prepared {
    pub rates: Vec<Vec<u64>>,
}

impl Prepared {
    pub fn new(input: &SchedulerInput<'_>) -> Result<Self> {
        let bwp = &input.bwp;
        let rates = input
            .ues
            .iter()
            .map(|ue| (0..bwp.num_rbs).map(|rb| input.link.per_rb_rate(&ue.report, rb, bwp)).collect())
            .collect::<Result<Vec<Vec<u64>>>>()?;
        Ok(Self { rates })
    }
}

/// Builds a decision entry: final MCS over the allocation, RIV, and bits
/// granted capped at the UE's payload.
pub(crate) fn make_entry(input: &SchedulerInput<'_>, ue: &UeSlotInput, alloc: ContiguousAllocation) -> Result<DecisionEntry> {
    let mcs = input.link.effective_mcs_over(&ue.report, &input.bwp, alloc.rbs())?;
    let tbs = input.link.tbs(mcs, ue.report.wb_rank, alloc.len);
    Ok(DecisionEntry {
        ue_id: ue.ue_id,
        allocation: alloc,
        riv: riv_encode(&input.bwp, alloc)?,
        mcs,
        rank: ue.report.wb_rank,
        scheduled_bits: tbs.min(ue.payload()),
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounters {
    pub tbs_calcs: u64,
    pub metric_calcs: u64,
    pub rb_amount_calcs: u64,
}

impl OpCounters {
    pub fn total(&self) -> u64 {
        self.tbs_calcs + self.metric_calcs + self.rb_amount_calcs
    }
}

impl AddAssign for OpCounters {
    fn add_assign(&mut self, o: Self) {
        self.tbs_calcs += o.tbs_calcs;
        self.metric_calcs += o.metric_calcs;
        self.rb_amount_calcs += o.rb_amount_calcs;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Jade,
    JadeSingleEnd,
    Dase,
    Date,
    Leap,
    Type0,
    Oracle,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::Jade,
        Algorithm::JadeSingleEnd,
        Algorithm::Dase,
        Algorithm::Date,
        Algorithm::Leap,
        Algorithm::Type0,
        Algorithm::Oracle,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Jade => "jade",
            Algorithm::JadeSingleEnd => "jade-single-end",
            Algorithm::Dase => "dase",
            Algorithm::Date => "date",
            Algorithm::Leap => "leap",
            Algorithm::Type0 => "type0",
            Algorithm::Oracle => "oracle",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            Algorithm::Jade => "joint UE and RB selection, expanding from both BWP ends",
            Algorithm::JadeSingleEnd => "joint UE and RB selection, expanding from the low BWP end only",
            Algorithm::Dase => "QoS-ordered UE selection, RBs from the low BWP end",
            Algorithm::Date => "QoS-ordered UE selection, RBs from whichever BWP end needs fewer",
            Algorithm::Leap => "localized expansion around each UE's best RB",
            Algorithm::Type0 => "greedy UE/RBG selection, non-contiguous RBG bitmap",
            Algorithm::Oracle => "exhaustive search over contiguous allocations (small instances only)",
        }
    }

    pub fn is_contiguous(&self) -> bool {
        !matches!(self, Algorithm::Type0)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Contiguous(SlotDecision),
    Rbg(RbgDecision),
}

impl Outcome {
    pub fn validate(&self, bwp: &BwpConfig) -> Verdict {
        match self {
            Outcome::Contiguous(d) => validate_decision(bwp, d),
            Outcome::Rbg(d) => validate_rbg_decision(bwp, d),
        }
    }

    /// `(ue, granted bits)` for every UE that received resources.
    pub fn grants(&self) -> Vec<(UeId, u64)> {
        match self {
            Outcome::Contiguous(d) => d.entries.iter().map(|e| (e.ue_id, e.scheduled_bits)).collect(),
            Outcome::Rbg(d) => d.grants.iter().map(|g| (g.ue_id, g.scheduled_bits)).collect(),
        }
    }

    pub fn selected_ues(&self) -> Vec<UeId> {
        self.grants().into_iter().map(|(u, _)| u).collect()
    }

    pub fn as_contiguous(&self) -> Option<&SlotDecision> {
        match self {
            Outcome::Contiguous(d) => Some(d),
            Outcome::Rbg(_) => None,
        }
    }
}

pub fn schedule(algorithm: Algorithm, input: &SchedulerInput<'_>) -> Result<(Outcome, OpCounters)> {
    Ok(match algorithm {
        Algorithm::Jade => wrap(jade_schedule(input, true)?),
        Algorithm::JadeSingleEnd => wrap(jade_schedule(input, false)?),
        Algorithm::Dase => wrap(dase_schedule(input)?),
        Algorithm::Date => wrap(date_schedule(input)?),
        Algorithm::Leap => wrap(leap_schedule(input)?),
        Algorithm::Type0 => {
            let (d, c) = type0_schedule(input)?;
            (Outcome::Rbg(d), c)
        }
        Algorithm::Oracle => {
            let d = brute_force_type1(input, DEFAULT_ORACLE_MAX_UES, DEFAULT_ORACLE_MAX_RBS)?;
            (Outcome::Contiguous(d), OpCounters::default())
        }
    })
}

fn wrap((d, c): (SlotDecision, OpCounters)) -> (Outcome, OpCounters) {
    (Outcome::Contiguous(d), c)
}

/// Metric value of the bits a UE can actually use: the metric evaluated at
/// `min(sum of per-RB rates, payload)`. All provided metrics are linear in
/// the rate, so for an allocation that does not overshoot the payload this
/// equals the sum of per-RB metrics.
pub fn capped_value(input: &SchedulerInput<'_>, ue: &UeSlotInput, rate: u64) -> f64 {
    input.mu(ue, rate.min(ue.payload()))
}

/// Objective used to compare type-1 decisions: sum of [`capped_value`] over
/// the scheduled UEs.
pub fn objective(input: &SchedulerInput<'_>, decision: &SlotDecision) -> Result<f64> {
    let mut total = 0.0;
    for ue in &input.ues {
        if let Some(e) = decision.entry(ue.ue_id) {
            let rate = e
                .allocation
                .rbs()
                .map(|rb| input.link.per_rb_rate(&ue.report, rb, &input.bwp))
                .sum::<Result<u64>>()?;
            total += capped_value(input, ue, rate);
        }
    }
    Ok(total)
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;
    use crate::metrics::MetricKind;

    pub fn qos(delta: f64, tau: f64) -> QosProfile {
        QosProfile { delay_threshold_sec: tau, acceptable_drop_prob: delta, packet_size_bits: 1000, arrival_rate_pkt_per_sec: 100.0 }
    }

    pub fn ue(id: u32, payload: u64, d: f64, cqi: Vec<u8>) -> UeSlotInput {
        UeSlotInput {
            ue_id: UeId(id),
            qos: qos(0.01, 0.01),
            state: UeSchedulingState { hol_delay_sec: d, avg_rate: 100.0, pending_bits: payload },
            report: ChannelReport { sb_cqi: cqi, wb_rank: 1, generated_at_slot: 0 },
        }
    }

    pub static MLWDF: MetricKind = MetricKind::Mlwdf;

    pub fn input<'a>(bwp: BwpConfig, ues: Vec<UeSlotInput>, link: &'a LinkAdaptation) -> SchedulerInput<'a> {
        SchedulerInput { bwp, ues, metric: &MLWDF, link, rng_seed: 7 }
    }

    /// BWP with one RB per subband so per-RB CQIs can be written directly.
    pub fn per_rb_bwp(n: usize) -> BwpConfig {
        BwpConfig::new(n, 1, 0.0005).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("foo".parse::<Algorithm>().is_err());
    }

    #[test]
    fn input_validation() {
        let la = LinkAdaptation::default();
        let bwp = per_rb_bwp(4);
        let mut i = input(bwp, vec![ue(0, 10, 0.001, vec![7; 4]), ue(0, 10, 0.001, vec![7; 4])], &la);
        assert!(i.validate().is_err());
        i.ues.pop();
        assert!(i.validate().is_ok());
        i.ues[0].state.pending_bits = 0;
        assert!(i.validate().is_err());
        i.ues[0].state.pending_bits = 1;
        i.ues[0].report.sb_cqi.push(3);
        assert!(i.validate().is_err());
    }

    #[test]
    fn entry_caps_granted_bits_at_payload() {
        let la = LinkAdaptation::default();
        let bwp = per_rb_bwp(10);
        let i = input(bwp, vec![ue(0, 300, 0.001, vec![4, 7, 9, 9, 9, 9, 9, 9, 9, 9])], &la);
        let e = make_entry(&i, &i.ues[0], ContiguousAllocation::new(0, 3)).unwrap();
        assert_eq!(e.mcs, 7);
        assert_eq!(e.riv, 20);
        assert_eq!(e.scheduled_bits, 300);
    }
}
