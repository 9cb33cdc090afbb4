//! Disjoint UE-then-RB selection (DASE and DATE).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::resource::SlotDecision;

use super::{expand_from_end, expand_from_start, make_entry, OpCounters, Prepared, RbRange, SchedulerInput};

#[derive(Debug, Clone, Copy)]
struct Priority {
    /// `tau - d`, remaining delay budget.
    slack: f64,
    drop_prob: f64,
    /// RBs needed at the wideband CQI; `usize::MAX` if it carries nothing.
    rbs_needed: usize,
}

pub fn dase_schedule(input: &SchedulerInput<'_>) -> Result<(SlotDecision, OpCounters)> {
    disjoint_schedule(input, false)
}

pub fn date_schedule(input: &SchedulerInput<'_>) -> Result<(SlotDecision, OpCounters)> {
    disjoint_schedule(input, true)
}

fn disjoint_schedule(input: &SchedulerInput<'_>, dual_end: bool) -> Result<(SlotDecision, OpCounters)> {
    input.validate()?;
    let prep = Prepared::new(input)?;
    let mut counters = OpCounters::default();
    let mut rng = ChaCha8Rng::seed_from_u64(input.rng_seed);

    // Neither the delay budget nor the wideband RB estimate changes within a
    // slot, so both are computed once per UE.
    let mut prio = Vec::with_capacity(input.ues.len());
    for ue in &input.ues {
        let wb = input.link.wideband_cqi(&ue.report)?;
        counters.rb_amount_calcs += 1;
        prio.push(Priority {
            slack: ue.qos.delay_threshold_sec - ue.state.hol_delay_sec,
            drop_prob: ue.qos.acceptable_drop_prob,
            rbs_needed: input.link.rbs_needed(wb, ue.report.wb_rank, ue.payload()).unwrap_or(usize::MAX),
        });
    }

    // Sorted by id so the random pick depends only on the seed and the UE set.
    let mut remaining: Vec<usize> = (0..input.ues.len()).collect();
    remaining.sort_by_key(|&k| input.ues[k].ue_id);
    let mut range = RbRange::full(input.bwp.num_rbs);
    let mut decision = SlotDecision::default();

    while !remaining.is_empty() && !range.is_empty() {
        let pos = select_ue(&remaining, &prio, &mut rng);
        let k = remaining.remove(pos);
        let ue = &input.ues[k];
        let rates = &prep.rates[k];

        let from_start = expand_from_start(rates, range, ue.payload(), &mut counters);
        let chosen = if dual_end {
            let from_end = expand_from_end(rates, range, ue.payload(), &mut counters);
            if from_start.len <= from_end.len {
                from_start
            } else {
                from_end
            }
        } else {
            from_start
        };
        if chosen.rate == 0 {
            continue;
        }
        let alloc = chosen.allocation().expect("non-empty range yields a non-empty expansion");
        decision.entries.push(make_entry(input, ue, alloc)?);
        range.remove(&chosen);
    }
    Ok((decision, counters))
}

/// Cascade: least delay slack, then smallest drop probability, then fewest
/// RBs needed, then a seeded random pick. Returns a position in `remaining`.
fn select_ue(remaining: &[usize], prio: &[Priority], rng: &mut ChaCha8Rng) -> usize {
    let mut tied: Vec<usize> = (0..remaining.len()).collect();
    narrow(&mut tied, |p| prio[remaining[p]].slack);
    if tied.len() > 1 {
        narrow(&mut tied, |p| prio[remaining[p]].drop_prob);
    }
    if tied.len() > 1 {
        narrow(&mut tied, |p| prio[remaining[p]].rbs_needed as f64);
    }
    if tied.len() == 1 {
        tied[0]
    } else {
        tied[rng.random_range(0..tied.len())]
    }
}

/// Keeps only the positions attaining the minimum key.
fn narrow(tied: &mut Vec<usize>, key: impl Fn(usize) -> f64) {
    let min = tied.iter().map(|&p| key(p)).fold(f64::INFINITY, f64::min);
    tied.retain(|&p| key(p) == min);
}
