use crate::error::Result;
use crate::link::effective_mcs;
use crate::resource::{RbgDecision, RbgGrant};

use super::{OpCounters, SchedulerInput};

/// RBG-level greedy allocation (type-0 FDRA benchmark).
///
/// Each iteration re-evaluates the metric for every remaining (UE, RBG)
/// pair, grants the best pair (ties: lowest UE id, then lowest RBG) and
/// removes the RBG. A UE leaves once its granted rate covers its payload.
/// Pairs carrying no bits are never granted.
pub fn type0_schedule(input: &SchedulerInput<'_>) -> Result<(RbgDecision, OpCounters)> {
    input.validate()?;
    let bwp = &input.bwp;
    let num_rbgs = bwp.num_rbgs();
    let mut counters = OpCounters::default();

    let rbg_rates: Vec<Vec<u64>> = input
        .ues
        .iter()
        .map(|ue| {
            (0..num_rbgs)
                .map(|g| input.link.tbs(ue.report.sb_cqi[g], ue.report.wb_rank, bwp.rbg_rbs(g).len()))
                .collect()
        })
        .collect();

    let mut rbg_free = vec![true; num_rbgs];
    let mut active = vec![true; input.ues.len()];
    let mut granted: Vec<Vec<usize>> = vec![Vec::new(); input.ues.len()];
    let mut rate = vec![0u64; input.ues.len()];
    let mut order = Vec::new();

    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for (k, ue) in input.ues.iter().enumerate().filter(|(k, _)| active[*k]) {
            for g in (0..num_rbgs).filter(|&g| rbg_free[g]) {
                let r = rbg_rates[k][g];
                let mu = input.mu(ue, r);
                counters.metric_calcs += 1;
                if r == 0 {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((bk, bg, bmu)) => mu > bmu || (mu == bmu && (ue.ue_id, g) < (input.ues[bk].ue_id, bg)),
                };
                if better {
                    best = Some((k, g, mu));
                }
            }
        }
        let Some((k, g, _)) = best else { break };
        rbg_free[g] = false;
        if granted[k].is_empty() {
            order.push(k);
        }
        granted[k].push(g);
        rate[k] += rbg_rates[k][g];
        if rate[k] >= input.ues[k].payload() {
            active[k] = false;
        }
    }

    let mut decision = RbgDecision::default();
    for k in order {
        let ue = &input.ues[k];
        let mcs_list: Vec<u8> = granted[k].iter().map(|&g| ue.report.sb_cqi[g]).collect();
        let mcs = effective_mcs(input.link.rule, &mcs_list)?;
        let n_rb: usize = granted[k].iter().map(|&g| bwp.rbg_rbs(g).len()).sum();
        let tbs = input.link.tbs(mcs, ue.report.wb_rank, n_rb);
        decision.grants.push(RbgGrant {
            ue_id: ue.ue_id,
            rbgs: std::mem::take(&mut granted[k]),
            mcs,
            rank: ue.report.wb_rank,
            scheduled_bits: tbs.min(ue.payload()),
        });
    }
    Ok((decision, counters))
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::*;
    use crate::link::LinkAdaptation;
    use crate::resource::{validate_rbg_decision, BwpConfig, UeId};

    #[test]
    fn single_ue_takes_best_rbgs_in_order() {
        let la = LinkAdaptation::default();
        let bwp = BwpConfig::new(16, 4, 0.0005).unwrap();
        // RBG rates at 4 RBs: CQI 5 -> 506, 9 -> 1388, 12 -> 2246, 7 -> 852.
        let i = input(bwp, vec![ue(0, 3000, 0.002, vec![5, 9, 12, 7])], &la);
        let (d, _) = type0_schedule(&i).unwrap();
        assert_eq!(d.grants[0].rbgs, vec![2, 1]);
    }

    #[test]
    fn disjoint_peaks_each_get_their_peak_first() {
        let la = LinkAdaptation::default();
        let bwp = BwpConfig::new(16, 4, 0.0005).unwrap();
        let i = input(
            bwp,
            vec![ue(0, 500, 0.002, vec![14, 3, 3, 3]), ue(1, 500, 0.002, vec![3, 3, 3, 14])],
            &la,
        );
        let (d, _) = type0_schedule(&i).unwrap();
        assert_eq!(d.grants[0].rbgs, vec![0]);
        assert_eq!(d.grants[1].rbgs, vec![3]);
    }

    #[test]
    fn matches_hand_trace() {
        // K=2, 4 RBGs of 4 RBs, identical QoS and avg rate.
        //   UE0: d=2ms, CQI [10, 6, 12, 3] -> RBG rates [1572, 679, 2246, 218]
        //   UE1: d=3ms, CQI [11, 9,  2, 8] -> RBG rates [1912, 1388, 132, 1100]
        // weights are proportional to d * rate:
        //   UE0: [3144, 1358, 4492, 436]   UE1: [5736, 4164, 396, 3300]
        // payloads: UE0 3000, UE1 3200.
        // step 1: UE1/RBG0 (5736), UE1 rate 1912
        // step 2: UE0/RBG2 (4492), UE0 rate 2246
        // step 3: UE1/RBG1 (4164), UE1 rate 3300 >= 3200, leaves
        // step 4: UE0/RBG3 (436),  UE0 rate 2464
        // no RBG left.
        let la = LinkAdaptation::default();
        let bwp = BwpConfig::new(16, 4, 0.0005).unwrap();
        let i = input(
            bwp,
            vec![ue(0, 3000, 0.002, vec![10, 6, 12, 3]), ue(1, 3200, 0.003, vec![11, 9, 2, 8])],
            &la,
        );
        let (d, c) = type0_schedule(&i).unwrap();
        assert_eq!(d.grants[0].ue_id, UeId(1));
        assert_eq!(d.grants[0].rbgs, vec![0, 1]);
        assert_eq!(d.grants[1].rbgs, vec![2, 3]);
        // 2x4 + 2x3 + 2x2 + 1x1 evaluations.
        assert_eq!(c.metric_calcs, 8 + 6 + 4 + 1);
        assert!(validate_rbg_decision(&bwp, &d).is_valid());
        assert_eq!(d.grants[1].scheduled_bits, 2464.min(la.tbs(d.grants[1].mcs, 1, 8)));
    }
}
