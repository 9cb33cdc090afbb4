//! Localized expansion of adjacent positions.
//!
//! Every UE owns at most one window of contiguous RBs. A UE without a window
//! bids with its metric-best free RB; a UE with a window bids with the free
//! RBs immediately left and right of it. Each iteration grants the single
//! highest bid (ties: lowest UE id, then lowest RB). A UE stops once its
//! window rate covers its payload or it has nothing left to bid on. Only
//! RBs with a non-zero rate for the bidding UE are eligible.

use crate::error::Result;
use crate::resource::{ContiguousAllocation, SlotDecision};

use super::{make_entry, OpCounters, Prepared, SchedulerInput};

#[derive(Debug, Clone, Copy)]
struct Window {
    start: usize,
    end: usize,
}

#[derive(Debug, Clone)]
struct UeProgress {
    window: Option<Window>,
    rate: u64,
    done: bool,
    /// Cached best free RB for a UE that has no window yet.
    seed: Option<(usize, f64)>,
}

pub fn leap_schedule(input: &SchedulerInput<'_>) -> Result<(SlotDecision, OpCounters)> {
    input.validate()?;
    let prep = Prepared::new(input)?;
    let num_rbs = input.bwp.num_rbs;
    let mut counters = OpCounters::default();
    let mut free = vec![true; num_rbs];
    let mut progress = vec![UeProgress { window: None, rate: 0, done: false, seed: None }; input.ues.len()];
    let mut seeding_order = Vec::new();

    let best_free_rb = |k: usize, free: &[bool], counters: &mut OpCounters| -> Option<(usize, f64)> {
        let ue = &input.ues[k];
        let mut best: Option<(usize, f64)> = None;
        for rb in (0..num_rbs).filter(|&rb| free[rb] && prep.rates[k][rb] > 0) {
            let mu = input.mu(ue, prep.rates[k][rb]);
            counters.metric_calcs += 1;
            if best.is_none_or(|(_, m)| mu > m) {
                best = Some((rb, mu));
            }
        }
        best
    };

    for k in 0..input.ues.len() {
        progress[k].seed = best_free_rb(k, &free, &mut counters);
        progress[k].done = progress[k].seed.is_none();
    }

    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        let mut consider = |k: usize, rb: usize, mu: f64| {
            let better = match best {
                None => true,
                Some((bk, brb, bmu)) => {
                    mu > bmu
                        || (mu == bmu
                            && (input.ues[k].ue_id, rb) < (input.ues[bk].ue_id, brb))
                }
            };
            if better {
                best = Some((k, rb, mu));
            }
        };

        for k in 0..input.ues.len() {
            if progress[k].done {
                continue;
            }
            match progress[k].window {
                None => {
                    if let Some((rb, mu)) = progress[k].seed {
                        consider(k, rb, mu);
                    }
                }
                Some(w) => {
                    let mut any = false;
                    let neighbours = [w.start.checked_sub(1), (w.end < num_rbs).then_some(w.end)];
                    for rb in neighbours.into_iter().flatten() {
                        if free[rb] && prep.rates[k][rb] > 0 {
                            let mu = input.mu(&input.ues[k], prep.rates[k][rb]);
                            counters.metric_calcs += 1;
                            consider(k, rb, mu);
                            any = true;
                        }
                    }
                    if !any {
                        progress[k].done = true;
                    }
                }
            }
        }

        let Some((k, rb, _)) = best else { break };
        free[rb] = false;
        counters.tbs_calcs += 1;
        let p = &mut progress[k];
        p.rate += prep.rates[k][rb];
        p.window = Some(match p.window {
            None => {
                seeding_order.push(k);
                p.seed = None;
                Window { start: rb, end: rb + 1 }
            }
            Some(w) => Window { start: w.start.min(rb), end: w.end.max(rb + 1) },
        });
        if p.rate >= input.ues[k].payload() {
            p.done = true;
        }

        // Seeds that pointed at the RB just taken are stale.
        for j in 0..input.ues.len() {
            if progress[j].window.is_none() && !progress[j].done && progress[j].seed.is_some_and(|(s, _)| s == rb) {
                progress[j].seed = best_free_rb(j, &free, &mut counters);
                progress[j].done = progress[j].seed.is_none();
            }
        }
    }

    let mut decision = SlotDecision::default();
    for k in seeding_order {
        let w = progress[k].window.expect("seeded UEs have a window");
        let alloc = ContiguousAllocation::new(w.start, w.end - w.start);
        decision.entries.push(make_entry(input, &input.ues[k], alloc)?);
    }
    Ok((decision, counters))
}
