//! Bandwidth parts, contiguous RB allocations and per-slot decisions.
//!
//! RB and UE indices are 0-based. A type-1 allocation is a `(start, length)`
//! pair and is signalled as a resource indication value (RIV):
//!
//! ```text
//! RIV = B*(L-1) + S              if (L-1) <= floor(B/2)
//! RIV = B*(B-L+1) + (B-1-S)      otherwise
//! ```

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of RBs in the active BWP.
pub const DEFAULT_NUM_RBS: usize = 270;
/// Default RBG (and CQI subband) size.
pub const DEFAULT_RBG_SIZE: usize = 4;
/// Slot duration at 30 kHz sub-carrier spacing.
pub const DEFAULT_SLOT_DURATION_SEC: f64 = 0.0005;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UeId(pub u32);

impl fmt::Display for UeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ue{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BwpConfig {
    pub num_rbs: usize,
    pub rbg_size: usize,
    pub slot_duration_sec: f64,
}

impl Default for BwpConfig {
    fn default() -> Self {
        Self {
            num_rbs: DEFAULT_NUM_RBS,
            rbg_size: DEFAULT_RBG_SIZE,
            slot_duration_sec: DEFAULT_SLOT_DURATION_SEC,
        }
    }
}

impl BwpConfig {
    pub fn new(num_rbs: usize, rbg_size: usize, slot_duration_sec: f64) -> Result<Self> {
        let bwp = Self { num_rbs, rbg_size, slot_duration_sec };
        bwp.validate()?;
        Ok(bwp)
    }

    /// Shorthand for tests and examples: default RBG size and numerology.
    pub fn with_rbs(num_rbs: usize) -> Self {
        Self { num_rbs, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_rbs == 0 {
            return Err(Error::InvalidBwp("num_rbs must be >= 1".into()));
        }
        if self.rbg_size == 0 {
            return Err(Error::InvalidBwp("rbg_size must be >= 1".into()));
        }
        if !(self.slot_duration_sec > 0.0) || !self.slot_duration_sec.is_finite() {
            return Err(Error::InvalidBwp("slot_duration_sec must be > 0".into()));
        }
        Ok(())
    }

    pub fn num_rbgs(&self) -> usize {
        self.num_rbs.div_ceil(self.rbg_size)
    }

    pub fn rbg_of(&self, rb: usize) -> usize {
        rb / self.rbg_size
    }

    /// RB range covered by an RBG; the last RBG may be short.
    pub fn rbg_rbs(&self, rbg: usize) -> std::ops::Range<usize> {
        let start = rbg * self.rbg_size;
        start..(start + self.rbg_size).min(self.num_rbs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ContiguousAllocation {
    pub start: usize,
    pub len: usize,
}

impl ContiguousAllocation {
    pub const fn new(start: usize, len: usize) -> Self {
        Self { start, len }
    }

    /// One past the last RB.
    pub fn end(&self) -> usize {
        self.start + self.len
    }

    pub fn rbs(&self) -> std::ops::Range<usize> {
        self.start..self.end()
    }

    pub fn is_valid_for(&self, bwp: &BwpConfig) -> bool {
        self.len >= 1 && self.end() <= bwp.num_rbs
    }

    pub fn overlap(&self, other: &ContiguousAllocation) -> Option<usize> {
        let lo = self.start.max(other.start);
        let hi = self.end().min(other.end());
        (lo < hi).then_some(lo)
    }
}

pub fn riv_encode(bwp: &BwpConfig, alloc: ContiguousAllocation) -> Result<u32> {
    if !alloc.is_valid_for(bwp) {
        return Err(Error::RangeViolation { start: alloc.start, len: alloc.len, num_rbs: bwp.num_rbs });
    }
    let b = bwp.num_rbs as u64;
    let s = alloc.start as u64;
    let l = alloc.len as u64;
    let riv = if l - 1 <= b / 2 { b * (l - 1) + s } else { b * (b - l + 1) + (b - 1 - s) };
    Ok(riv as u32)
}

pub fn riv_decode(bwp: &BwpConfig, riv: u32) -> Result<ContiguousAllocation> {
    let b = bwp.num_rbs as u64;
    let invalid = || Error::InvalidRiv { riv, num_rbs: bwp.num_rbs };
    if b == 0 {
        return Err(invalid());
    }
    let q = riv as u64 / b;
    let r = riv as u64 % b;

    // Short branch: L-1 = q, S = r.
    let l = q + 1;
    if q <= b / 2 && r + l <= b {
        return Ok(ContiguousAllocation::new(r as usize, l as usize));
    }
    // Long branch: q = B-L+1, S = B-1-r.
    if q >= 1 && q <= b {
        let l = b + 1 - q;
        let s = b - 1 - r;
        if l - 1 > b / 2 && s + l <= b {
            return Ok(ContiguousAllocation::new(s as usize, l as usize));
        }
    }
    Err(invalid())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionEntry {
    pub ue_id: UeId,
    pub allocation: ContiguousAllocation,
    pub riv: u32,
    pub mcs: u8,
    pub rank: u8,
    pub scheduled_bits: u64,
}

/// Type-1 output for one slot. Entry order is the order in which UEs were
/// selected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SlotDecision {
    pub entries: Vec<DecisionEntry>,
}

impl SlotDecision {
    pub fn selected_ues(&self) -> Vec<UeId> {
        self.entries.iter().map(|e| e.ue_id).collect()
    }

    pub fn total_rbs(&self) -> usize {
        self.entries.iter().map(|e| e.allocation.len).sum()
    }

    pub fn entry(&self, ue: UeId) -> Option<&DecisionEntry> {
        self.entries.iter().find(|e| e.ue_id == ue)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Overlap { first: UeId, second: UeId, rb: usize },
    OutOfRange { ue: UeId, start: usize, len: usize },
    RivMismatch { ue: UeId, riv: u32, expected: Option<u32> },
    DuplicateUe(UeId),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Overlap { first, second, rb } => write!(f, "{first} and {second} overlap on RB {rb}"),
            Violation::OutOfRange { ue, start, len } => write!(f, "{ue}: range start={start} len={len} out of bounds"),
            Violation::RivMismatch { ue, riv, expected } => match expected {
                Some(e) => write!(f, "{ue}: RIV {riv} does not match allocation (expected {e})"),
                None => write!(f, "{ue}: RIV {riv} given for an unencodable allocation"),
            },
            Violation::DuplicateUe(ue) => write!(f, "{ue} appears more than once"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Verdict {
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn describe(&self) -> String {
        self.violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
    }
}

/// Checks exclusivity, range, RIV consistency and UE uniqueness and reports
/// every violation found.
pub fn validate_decision(bwp: &BwpConfig, decision: &SlotDecision) -> Verdict {
    let mut violations = Vec::new();
    let mut seen = BTreeSet::new();
    for entry in &decision.entries {
        if !seen.insert(entry.ue_id) {
            violations.push(Violation::DuplicateUe(entry.ue_id));
        }
        let a = entry.allocation;
        match riv_encode(bwp, a) {
            Ok(expected) if expected == entry.riv => {}
            Ok(expected) => violations.push(Violation::RivMismatch { ue: entry.ue_id, riv: entry.riv, expected: Some(expected) }),
            Err(_) => {
                violations.push(Violation::OutOfRange { ue: entry.ue_id, start: a.start, len: a.len });
                violations.push(Violation::RivMismatch { ue: entry.ue_id, riv: entry.riv, expected: None });
            }
        }
    }
    for (i, x) in decision.entries.iter().enumerate() {
        for y in &decision.entries[i + 1..] {
            if let Some(rb) = x.allocation.overlap(&y.allocation) {
                violations.push(Violation::Overlap { first: x.ue_id, second: y.ue_id, rb });
            }
        }
    }
    Verdict { violations }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbgGrant {
    pub ue_id: UeId,
    /// RBG indices in the order they were granted.
    pub rbgs: Vec<usize>,
    pub mcs: u8,
    pub rank: u8,
    pub scheduled_bits: u64,
}

/// Type-0 output: a possibly non-contiguous RBG bitmap per UE.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RbgDecision {
    pub grants: Vec<RbgGrant>,
}

pub fn validate_rbg_decision(bwp: &BwpConfig, decision: &RbgDecision) -> Verdict {
    let mut violations = Vec::new();
    let mut seen = BTreeSet::new();
    let mut owner: Vec<Option<UeId>> = vec![None; bwp.num_rbgs()];
    for g in &decision.grants {
        if !seen.insert(g.ue_id) {
            violations.push(Violation::DuplicateUe(g.ue_id));
        }
        for &rbg in &g.rbgs {
            match owner.get_mut(rbg) {
                None => violations.push(Violation::OutOfRange { ue: g.ue_id, start: rbg * bwp.rbg_size, len: bwp.rbg_size }),
                Some(slot @ None) => *slot = Some(g.ue_id),
                Some(Some(prev)) => violations.push(Violation::Overlap {
                    first: *prev,
                    second: g.ue_id,
                    rb: rbg * bwp.rbg_size,
                }),
            }
        }
    }
    Verdict { violations }
}
