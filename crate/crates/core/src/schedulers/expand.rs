use crate::resource::ContiguousAllocation;

use super::OpCounters;

/// Remaining RBs as a half-open interval `[low, high)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RbRange {
    pub low: usize,
    pub high: usize,
}

impl RbRange {
    pub fn full(num_rbs: usize) -> Self {
        Self { low: 0, high: num_rbs }
    }

    pub fn is_empty(&self) -> bool {
        self.low >= self.high
    }

    pub fn len(&self) -> usize {
        self.high.saturating_sub(self.low)
    }

    /// Removes an expansion, which is always a prefix or a suffix.
    pub fn remove(&mut self, e: &Expansion) {
        if e.len == 0 {
            return;
        }
        if e.start == self.low {
            self.low += e.len;
        } else {
            debug_assert_eq!(e.start + e.len, self.high, "expansion is neither prefix nor suffix");
            self.high -= e.len;
        }
    }
}

/// Result of growing an allocation from one end of the remaining range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Expansion {
    pub start: usize,
    pub len: usize,
    /// Sum of the per-RB rates over the selected RBs.
    pub rate: u64,
}

impl Expansion {
    pub fn allocation(&self) -> Option<ContiguousAllocation> {
        (self.len > 0).then(|| ContiguousAllocation::new(self.start, self.len))
    }

    pub fn rbs(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

/// Accumulates RBs upward from the first remaining RB until the summed rate
/// covers `payload` or the range is exhausted.
pub fn expand_from_start(rates: &[u64], remaining: RbRange, payload: u64, counters: &mut OpCounters) -> Expansion {
    let mut rate = 0u64;
    let mut len = 0;
    for r in &rates[remaining.low..remaining.high] {
        rate += r;
        len += 1;
        counters.tbs_calcs += 1;
        if rate >= payload {
            break;
        }
    }
    Expansion { start: remaining.low, len, rate }
}

/// Mirror of [`expand_from_start`] from the last remaining RB downward.
pub fn expand_from_end(rates: &[u64], remaining: RbRange, payload: u64, counters: &mut OpCounters) -> Expansion {
    let mut rate = 0u64;
    let mut len = 0;
    for rb in (remaining.low..remaining.high).rev() {
        rate += rates[rb];
        len += 1;
        counters.tbs_calcs += 1;
        if rate >= payload {
            break;
        }
    }
    Expansion { start: remaining.high - len, len, rate }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn start_examples() {
        let mut c = OpCounters::default();
        let flat = vec![213u64; 20];
        let e = expand_from_start(&flat, RbRange::full(20), 2000, &mut c);
        assert_eq!((e.start, e.len, e.rate), (0, 10, 2130));
        assert_eq!(c.tbs_calcs, 10);

        let e = expand_from_start(&flat, RbRange { low: 17, high: 20 }, 2000, &mut c);
        assert_eq!((e.start, e.len, e.rate), (17, 3, 639));

        let e = expand_from_start(&flat, RbRange::full(20), 1, &mut c);
        assert_eq!(e.len, 1);
    }

    #[test]
    fn end_examples() {
        let mut c = OpCounters::default();
        let flat = vec![213u64; 20];
        let s = expand_from_start(&flat, RbRange::full(20), 2000, &mut c);
        let e = expand_from_end(&flat, RbRange::full(20), 2000, &mut c);
        assert_eq!(s.len, e.len);
        assert_eq!((e.start, e.len), (10, 10));

        let mut rates = vec![100u64; 10];
        rates.extend(std::iter::repeat_n(300, 10));
        let e = expand_from_end(&rates, RbRange::full(20), 900, &mut c);
        let s = expand_from_start(&rates, RbRange::full(20), 900, &mut c);
        assert_eq!((e.start, e.len, e.rate), (17, 3, 900));
        assert_eq!((s.start, s.len, s.rate), (0, 9, 900));

        let empty = RbRange { low: 5, high: 5 };
        let e = expand_from_end(&rates, empty, 900, &mut c);
        assert_eq!((e.len, e.rate), (0, 0));
        assert_eq!(expand_from_start(&rates, empty, 900, &mut c).len, 0);
        assert!(e.allocation().is_none());
    }

    #[test]
    fn range_removal() {
        let mut r = RbRange::full(10);
        r.remove(&Expansion { start: 0, len: 3, rate: 0 });
        r.remove(&Expansion { start: 8, len: 2, rate: 0 });
        assert_eq!(r, RbRange { low: 3, high: 8 });
        assert_eq!(r.len(), 5);
        r.remove(&Expansion { start: 3, len: 5, rate: 0 });
        assert!(r.is_empty());
    }
}
