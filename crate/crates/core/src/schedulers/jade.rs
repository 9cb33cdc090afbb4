use crate::error::Result;
use crate::resource::SlotDecision;

use super::{expand_from_end, expand_from_start, make_entry, Expansion, OpCounters, Prepared, RbRange, SchedulerInput};

/// Joint allocation with dual ends.
///
/// Each round every remaining UE expands from the low end (and, when
/// `dual_end`, from the high end), keeps the end needing fewer RBs (ties go
/// to the low end), and is scored by the summed per-RB metric over that set.
/// The best-scoring UE (ties to the lowest id) is granted its set and both
/// the UE and the RBs are removed. Rounds continue until UEs or RBs run out.
///
/// A UE whose best set carries no bits at all is dropped without a grant.
pub fn jade_schedule(input: &SchedulerInput<'_>, dual_end: bool) -> Result<(SlotDecision, OpCounters)> {
    input.validate()?;
    let prep = Prepared::new(input)?;
    let mut counters = OpCounters::default();
    let mut decision = SlotDecision::default();
    let mut remaining: Vec<usize> = (0..input.ues.len()).collect();
    let mut range = RbRange::full(input.bwp.num_rbs);

    while !remaining.is_empty() && !range.is_empty() {
        let mut best: Option<(usize, Expansion, f64)> = None;
        for (pos, &k) in remaining.iter().enumerate() {
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
            let score: f64 = chosen.rbs().map(|rb| input.mu(ue, rates[rb])).sum();
            counters.metric_calcs += chosen.len as u64;

            let better = match &best {
                None => true,
                Some((bpos, _, bscore)) => {
                    score > *bscore || (score == *bscore && ue.ue_id < input.ues[remaining[*bpos]].ue_id)
                }
            };
            if better {
                best = Some((pos, chosen, score));
            }
        }

        let (pos, chosen, _) = best.expect("at least one remaining UE");
        let k = remaining.remove(pos);
        if chosen.rate == 0 {
            continue;
        }
        let alloc = chosen.allocation().expect("non-empty range yields a non-empty expansion");
        decision.entries.push(make_entry(input, &input.ues[k], alloc)?);
        range.remove(&chosen);
    }
    Ok((decision, counters))
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::*;
    use crate::link::LinkAdaptation;
    use crate::resource::{BwpConfig, ContiguousAllocation, UeId};

    #[test]
    fn single_ue_flat_channel() {
        let la = LinkAdaptation::default();
        let bwp = per_rb_bwp(20);
        let i = input(bwp, vec![ue(3, 2000, 0.002, vec![7; 20])], &la);
        let (d, c) = jade_schedule(&i, true).unwrap();
        assert_eq!(d.entries.len(), 1);
        assert_eq!(d.entries[0].allocation, ContiguousAllocation::new(0, 10));
        assert_eq!(d.entries[0].scheduled_bits, 2000);
        assert_eq!(c.tbs_calcs, 20);
        assert_eq!(c.metric_calcs, 10);
    }

    #[test]
    fn larger_hol_delay_goes_first() {
        let la = LinkAdaptation::default();
        let bwp = per_rb_bwp(20);
        let i = input(bwp, vec![ue(0, 1000, 0.001, vec![7; 20]), ue(1, 1000, 0.004, vec![7; 20])], &la);
        let (d, _) = jade_schedule(&i, true).unwrap();
        assert_eq!(d.selected_ues(), vec![UeId(1), UeId(0)]);
    }

    #[test]
    fn picks_high_end_when_cheaper() {
        let la = LinkAdaptation::default();
        let bwp = per_rb_bwp(20);
        let mut cqi = vec![3u8; 10];
        cqi.extend([12u8; 10]);
        let i = input(bwp, vec![ue(0, 1500, 0.001, cqi.clone())], &la);
        let (dual, _) = jade_schedule(&i, true).unwrap();
        let (single, _) = jade_schedule(&i, false).unwrap();
        assert_eq!(dual.entries[0].allocation.end(), 20);
        assert_eq!(single.entries[0].allocation.start, 0);
        assert!(dual.entries[0].allocation.len < single.entries[0].allocation.len);
    }

    #[test]
    fn zero_rate_ue_gets_nothing() {
        let la = LinkAdaptation::default();
        let bwp = BwpConfig::new(8, 4, 0.0005).unwrap();
        let i = input(bwp, vec![ue(0, 100, 0.001, vec![0, 0]), ue(1, 100, 0.0, vec![5, 5])], &la);
        let (d, _) = jade_schedule(&i, true).unwrap();
        assert_eq!(d.selected_ues(), vec![UeId(1)]);
    }

    #[test]
    fn stops_when_rbs_run_out() {
        let la = LinkAdaptation::default();
        let bwp = per_rb_bwp(6);
        let ues = (0..4).map(|k| ue(k, 10_000, 0.001 * f64::from(k + 1), vec![9; 6])).collect();
        let (d, _) = jade_schedule(&input(bwp, ues, &la), true).unwrap();
        assert_eq!(d.entries.len(), 1);
        assert_eq!(d.entries[0].ue_id, UeId(3));
        assert_eq!(d.entries[0].allocation, ContiguousAllocation::new(0, 6));
    }
}
