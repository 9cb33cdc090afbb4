//! Link adaptation: CQI to MCS, effective MCS over an RB set, and TBS.
//!
//! Spectral efficiencies are held in units of 1e-4 bits per resource element
//! so that TBS arithmetic is exact integer math.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resource::BwpConfig;

pub const MAX_CQI: u8 = 15;
pub const MAX_RANK: u8 = 4;
/// Resource elements per RB per slot available for data (12 x 14 minus 24).
pub const RE_PER_RB: u64 = 144;

const SE_SCALE: u64 = 10_000;

const DEFAULT_EFFICIENCIES: [f64; 15] = [
    0.15, 0.23, 0.38, 0.60, 0.88, 1.18, 1.48, 1.91, 2.41, 2.73, 3.32, 3.90, 4.52, 5.12, 5.55,
];

/// Spectral efficiency per CQI/MCS index 1..=15. Index 0 means no
/// transmission.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct CqiTable {
    se_e4: [u64; 15],
}

impl Default for CqiTable {
    fn default() -> Self {
        Self::from_efficiencies(&DEFAULT_EFFICIENCIES).expect("built-in table is valid")
    }
}

impl CqiTable {
    pub fn from_efficiencies(values: &[f64]) -> Result<Self> {
        if values.len() != 15 {
            return Err(Error::InvalidCqiTable(format!("expected 15 efficiencies, got {}", values.len())));
        }
        let mut se_e4 = [0u64; 15];
        for (i, &v) in values.iter().enumerate() {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidCqiTable(format!("efficiency for index {} must be > 0", i + 1)));
            }
            se_e4[i] = (v * SE_SCALE as f64).round() as u64;
            if se_e4[i] == 0 {
                return Err(Error::InvalidCqiTable(format!("efficiency for index {} below 1e-4 resolution", i + 1)));
            }
            if i > 0 && se_e4[i] <= se_e4[i - 1] {
                return Err(Error::InvalidCqiTable(format!("efficiencies must be strictly increasing at index {}", i + 1)));
            }
        }
        Ok(Self { se_e4 })
    }

    pub fn efficiency(&self, mcs: u8) -> f64 {
        match mcs {
            0 => 0.0,
            m => self.se_e4[usize::from(m.min(MAX_CQI)) - 1] as f64 / SE_SCALE as f64,
        }
    }

    pub fn efficiencies(&self) -> Vec<f64> {
        self.se_e4.iter().map(|&v| v as f64 / SE_SCALE as f64).collect()
    }

    /// `floor(SE(mcs) * 144 * n_rb) * rank`, zero for MCS 0 or no RBs.
    pub fn tbs(&self, mcs: u8, rank: u8, n_rb: usize) -> u64 {
        if mcs == 0 || n_rb == 0 {
            return 0;
        }
        let se = self.se_e4[usize::from(mcs.min(MAX_CQI)) - 1];
        se * RE_PER_RB * n_rb as u64 / SE_SCALE * u64::from(rank)
    }
}

impl TryFrom<Vec<f64>> for CqiTable {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::from_efficiencies(&v)
    }
}

impl From<CqiTable> for Vec<f64> {
    fn from(t: CqiTable) -> Self {
        t.efficiencies()
    }
}

/// Identity mapping on 0..=15.
pub fn cqi_to_mcs(cqi: u8) -> Result<u8> {
    if cqi > MAX_CQI {
        return Err(Error::CqiOutOfRange(cqi));
    }
    Ok(cqi)
}

pub fn mcs_to_cqi(mcs: u8) -> Result<u8> {
    if mcs > MAX_CQI {
        return Err(Error::McsOutOfRange(mcs));
    }
    Ok(mcs)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EffectiveMcsRule {
    /// Lower median for even-length lists.
    #[default]
    Median,
    /// Arithmetic mean rounded down.
    Mean,
    Max,
    Min,
}

pub fn effective_mcs(rule: EffectiveMcsRule, mcs: &[u8]) -> Result<u8> {
    if mcs.is_empty() {
        return Err(Error::EmptyMcsList);
    }
    Ok(match rule {
        EffectiveMcsRule::Median => {
            // Counting select over 0..=15; values are tiny so this beats sorting.
            let mut hist = [0usize; 256];
            for &m in mcs {
                hist[usize::from(m)] += 1;
            }
            let target = (mcs.len() - 1) / 2;
            let mut seen = 0;
            let mut out = 0u8;
            for (v, &c) in hist.iter().enumerate() {
                seen += c;
                if seen > target {
                    out = v as u8;
                    break;
                }
            }
            out
        }
        EffectiveMcsRule::Mean => (mcs.iter().map(|&m| u64::from(m)).sum::<u64>() / mcs.len() as u64) as u8,
        EffectiveMcsRule::Max => *mcs.iter().max().unwrap(),
        EffectiveMcsRule::Min => *mcs.iter().min().unwrap(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelReport {
    /// One CQI per RBG (subband).
    pub sb_cqi: Vec<u8>,
    pub wb_rank: u8,
    pub generated_at_slot: i64,
}

impl ChannelReport {
    pub fn flat(cqi: u8, rank: u8, bwp: &BwpConfig) -> Self {
        Self { sb_cqi: vec![cqi; bwp.num_rbgs()], wb_rank: rank, generated_at_slot: 0 }
    }

    pub fn validate(&self, bwp: &BwpConfig) -> Result<()> {
        if self.sb_cqi.len() != bwp.num_rbgs() {
            return Err(Error::InvalidInput(format!(
                "report carries {} subbands, BWP has {} RBGs",
                self.sb_cqi.len(),
                bwp.num_rbgs()
            )));
        }
        if let Some(&c) = self.sb_cqi.iter().find(|&&c| c > MAX_CQI) {
            return Err(Error::CqiOutOfRange(c));
        }
        if !(1..=MAX_RANK).contains(&self.wb_rank) {
            return Err(Error::InvalidInput(format!("rank {} outside 1..=4", self.wb_rank)));
        }
        Ok(())
    }

    pub fn mcs_of_rb(&self, bwp: &BwpConfig, rb: usize) -> Result<u8> {
        if rb >= bwp.num_rbs {
            return Err(Error::RbOutOfRange { rb, num_rbs: bwp.num_rbs });
        }
        let cqi = *self
            .sb_cqi
            .get(bwp.rbg_of(rb))
            .ok_or(Error::RbOutOfRange { rb, num_rbs: bwp.num_rbs })?;
        cqi_to_mcs(cqi)
    }
}

/// Link adaptation settings shared by every scheduler in a run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinkAdaptation {
    pub table: CqiTable,
    pub rule: EffectiveMcsRule,
}

impl LinkAdaptation {
    pub fn new(table: CqiTable, rule: EffectiveMcsRule) -> Self {
        Self { table, rule }
    }

    pub fn tbs(&self, mcs: u8, rank: u8, n_rb: usize) -> u64 {
        self.table.tbs(mcs, rank, n_rb)
    }

    /// Achievable bits of one RB in one slot.
    pub fn per_rb_rate(&self, report: &ChannelReport, rb: usize, bwp: &BwpConfig) -> Result<u64> {
        let mcs = report.mcs_of_rb(bwp, rb)?;
        Ok(self.tbs(mcs, report.wb_rank, 1))
    }

    /// Effective MCS over the whole BWP, converted back to CQI.
    pub fn wideband_cqi(&self, report: &ChannelReport) -> Result<u8> {
        let mcs = report.sb_cqi.iter().map(|&c| cqi_to_mcs(c)).collect::<Result<Vec<_>>>()?;
        mcs_to_cqi(effective_mcs(self.rule, &mcs)?)
    }

    /// Final MCS over a set of RBs, using the MCS of each RB's subband.
    pub fn effective_mcs_over<I>(&self, report: &ChannelReport, bwp: &BwpConfig, rbs: I) -> Result<u8>
    where
        I: IntoIterator<Item = usize>,
    {
        let mcs = rbs.into_iter().map(|rb| report.mcs_of_rb(bwp, rb)).collect::<Result<Vec<_>>>()?;
        effective_mcs(self.rule, &mcs)
    }

    /// Smallest RB count whose TBS at `mcs` covers `payload`, or `None` if
    /// `mcs` carries nothing.
    pub fn rbs_needed(&self, mcs: u8, rank: u8, payload: u64) -> Option<usize> {
        if payload == 0 {
            return Some(0);
        }
        if mcs == 0 || rank == 0 {
            return None;
        }
        // floor(se * 144 * n / S) * rank >= payload  <=>  se * 144 * n >= ceil(payload / rank) * S
        let se = self.table.se_e4[usize::from(mcs.min(MAX_CQI)) - 1];
        let q = payload.div_ceil(u64::from(rank));
        let n = (q * SE_SCALE).div_ceil(se * RE_PER_RB) as usize;
        debug_assert!(self.tbs(mcs, rank, n) >= payload);
        Some(n)
    }
}
