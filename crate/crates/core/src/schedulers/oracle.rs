//! Exhaustive search over type-1 allocations for small instances.

use crate::error::{Error, Result};
use crate::resource::{ContiguousAllocation, SlotDecision};

use super::{capped_value, make_entry, SchedulerInput};

pub const DEFAULT_ORACLE_MAX_UES: usize = 4;
pub const DEFAULT_ORACLE_MAX_RBS: usize = 12;

/// Maximizes the sum of [`capped_value`] over all assignments of disjoint
/// contiguous ranges (or nothing) to the UEs.
///
/// Among maximizers the one with the fewest RBs wins, then the
/// lexicographically smallest assignment, comparing UEs in input order with
/// "nothing" ordered before any range and ranges ordered by (start, length).
pub fn brute_force_type1(input: &SchedulerInput<'_>, max_ues: usize, max_rbs: usize) -> Result<SlotDecision> {
    input.validate()?;
    let k = input.ues.len();
    let b = input.bwp.num_rbs;
    if k > max_ues || b > max_rbs || b > 63 {
        return Err(Error::OracleTooLarge { ues: k, rbs: b, max_ues, max_rbs });
    }

    // Options per UE in tie-break order: None, then (start, len) ascending.
    let mut options: Vec<Vec<(Option<ContiguousAllocation>, u64, f64)>> = Vec::with_capacity(k);
    for ue in &input.ues {
        let rates = (0..b)
            .map(|rb| input.link.per_rb_rate(&ue.report, rb, &input.bwp))
            .collect::<Result<Vec<u64>>>()?;
        let mut opts = vec![(None, 0u64, 0.0)];
        for s in 0..b {
            let mut rate = 0;
            for l in 1..=b - s {
                rate += rates[s + l - 1];
                let mask = ((1u64 << l) - 1) << s;
                opts.push((Some(ContiguousAllocation::new(s, l)), mask, capped_value(input, ue, rate)));
            }
        }
        options.push(opts);
    }

    let mut search = Search { options: &options, current: vec![0; k], best: None };
    search.descend(0, 0, 0.0, 0);
    let (_, _, choice) = search.best.expect("the empty assignment is always feasible");

    let mut decision = SlotDecision::default();
    for (ue, (opts, &c)) in input.ues.iter().zip(options.iter().zip(&choice)) {
        if let Some(alloc) = opts[c].0 {
            decision.entries.push(make_entry(input, ue, alloc)?);
        }
    }
    Ok(decision)
}

type Options = Vec<Vec<(Option<ContiguousAllocation>, u64, f64)>>;

struct Search<'o> {
    options: &'o Options,
    current: Vec<usize>,
    /// (value, RB count, option index per UE)
    best: Option<(f64, u32, Vec<usize>)>,
}

impl Search<'_> {
    fn descend(&mut self, depth: usize, used: u64, value: f64, rbs: u32) {
        if depth == self.options.len() {
            // Enumeration is in lexicographic order, so only strict
            // improvements replace the incumbent.
            let better = match &self.best {
                None => true,
                Some((bv, brbs, _)) => value > *bv || (value == *bv && rbs < *brbs),
            };
            if better {
                self.best = Some((value, rbs, self.current.clone()));
            }
            return;
        }
        for i in 0..self.options[depth].len() {
            let (_, mask, v) = self.options[depth][i];
            if mask & used != 0 {
                continue;
            }
            self.current[depth] = i;
            self.descend(depth + 1, used | mask, value + v, rbs + mask.count_ones());
        }
    }
}
