//! Synthetic frequency-selective CQI process.
//!
//! Each UE carries one latent Gaussian value per subband. Over time it
//! follows a first-order Gauss-Markov recursion
//!
//! ```text
//! x[t+1] = rho_t * x[t] + sqrt(1 - rho_t^2) * w[t]
//! ```
//!
//! where the innovation `w` is itself AR(1) across subbands with coefficient
//! `rho_f`, so both `x` and `w` have unit variance per subband. Reported CQI is
//! `clamp(round(mean_cqi + scale * x), 0, 15)`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link::{ChannelReport, MAX_CQI, MAX_RANK};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case")]
pub enum RankPolicy {
    Fixed { rank: u8 },
    /// Each slot, with probability `change_prob`, the rank moves one step up
    /// or down within `1..=max_rank`.
    Varying { max_rank: u8, change_prob: f64 },
}

impl Default for RankPolicy {
    fn default() -> Self {
        RankPolicy::Fixed { rank: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    pub rho_t: f64,
    pub rho_f: f64,
    pub cqi_scale: f64,
    /// Per-UE mean CQI is drawn uniformly from `[mean_cqi_min, mean_cqi_max]`.
    pub mean_cqi_min: f64,
    pub mean_cqi_max: f64,
    pub rank: RankPolicy,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self { rho_t: 0.98, rho_f: 0.5, cqi_scale: 2.0, mean_cqi_min: 5.0, mean_cqi_max: 13.0, rank: RankPolicy::default() }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::Config(format!("channel.{name} must lie in [0, 1], got {v}")))
            }
        };
        unit("rho_t", self.rho_t)?;
        unit("rho_f", self.rho_f)?;
        if !(self.cqi_scale >= 0.0) {
            return Err(Error::Config("channel.cqi_scale must be >= 0".into()));
        }
        if !(self.mean_cqi_min <= self.mean_cqi_max) {
            return Err(Error::Config("channel.mean_cqi_min must not exceed channel.mean_cqi_max".into()));
        }
        match self.rank {
            RankPolicy::Fixed { rank } if !(1..=MAX_RANK).contains(&rank) => {
                Err(Error::Config(format!("channel.rank.rank must lie in 1..=4, got {rank}")))
            }
            RankPolicy::Varying { max_rank, change_prob } if !(1..=MAX_RANK).contains(&max_rank) || !(0.0..=1.0).contains(&change_prob) => {
                Err(Error::Config("channel.rank: max_rank in 1..=4 and change_prob in [0, 1] required".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone)]
struct UeChannel {
    latent: Vec<f64>,
    mean_cqi: f64,
    rank: u8,
}

#[derive(Debug, Clone)]
pub struct ChannelProcess {
    cfg: ChannelConfig,
    ues: Vec<UeChannel>,
}

impl ChannelProcess {
    /// Draws per-UE geometry (mean CQI) and a stationary initial state.
    pub fn new<R: Rng + ?Sized>(cfg: ChannelConfig, num_ues: usize, num_subbands: usize, rng: &mut R) -> Self {
        let ues = (0..num_ues)
            .map(|_| {
                let mean_cqi = if cfg.mean_cqi_max > cfg.mean_cqi_min {
                    rng.random_range(cfg.mean_cqi_min..=cfg.mean_cqi_max)
                } else {
                    cfg.mean_cqi_min
                };
                let rank = match cfg.rank {
                    RankPolicy::Fixed { rank } => rank,
                    RankPolicy::Varying { max_rank, .. } => rng.random_range(1..=max_rank),
                };
                UeChannel { latent: correlated_normals(num_subbands, cfg.rho_f, rng), mean_cqi, rank }
            })
            .collect();
        Self { cfg, ues }
    }

    /// Same as [`ChannelProcess::new`] but with explicit per-UE mean CQIs.
    pub fn with_means<R: Rng + ?Sized>(cfg: ChannelConfig, means: &[f64], num_subbands: usize, rng: &mut R) -> Self {
        let mut p = Self::new(ChannelConfig { mean_cqi_min: 0.0, mean_cqi_max: 0.0, ..cfg }, means.len(), num_subbands, rng);
        p.cfg = cfg;
        for (ue, &m) in p.ues.iter_mut().zip(means) {
            ue.mean_cqi = m;
        }
        p
    }

    pub fn num_ues(&self) -> usize {
        self.ues.len()
    }

    pub fn latent(&self, ue: usize) -> &[f64] {
        &self.ues[ue].latent
    }

    pub fn mean_cqi(&self, ue: usize) -> f64 {
        self.ues[ue].mean_cqi
    }

    /// Advances every UE by one slot.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let rho_t = self.cfg.rho_t;
        let gain = (1.0 - rho_t * rho_t).max(0.0).sqrt();
        for ue in &mut self.ues {
            if gain > 0.0 {
                let w = correlated_normals(ue.latent.len(), self.cfg.rho_f, rng);
                for (x, w) in ue.latent.iter_mut().zip(w) {
                    *x = rho_t * *x + gain * w;
                }
            }
            if let RankPolicy::Varying { max_rank, change_prob } = self.cfg.rank {
                if change_prob > 0.0 && rng.random_bool(change_prob) {
                    ue.rank = if rng.random_bool(0.5) { ue.rank.saturating_add(1) } else { ue.rank.saturating_sub(1) }
                        .clamp(1, max_rank);
                }
            }
        }
    }

    pub fn report(&self, ue: usize, slot: i64) -> ChannelReport {
        let u = &self.ues[ue];
        let sb_cqi = u
            .latent
            .iter()
            .map(|x| (u.mean_cqi + self.cfg.cqi_scale * x).round().clamp(0.0, f64::from(MAX_CQI)) as u8)
            .collect();
        ChannelReport { sb_cqi, wb_rank: u.rank, generated_at_slot: slot }
    }

    pub fn reports(&self, slot: i64) -> Vec<ChannelReport> {
        (0..self.ues.len()).map(|k| self.report(k, slot)).collect()
    }

    /// Advances one slot and returns every UE's report for it.
    pub fn step_channel<R: Rng + ?Sized>(&mut self, rng: &mut R, slot: i64) -> Vec<ChannelReport> {
        self.step(rng);
        self.reports(slot)
    }
}

/// Unit-variance normals, AR(1)-correlated along the vector with `rho`.
fn correlated_normals<R: Rng + ?Sized>(n: usize, rho: f64, rng: &mut R) -> Vec<f64> {
    let gain = (1.0 - rho * rho).max(0.0).sqrt();
    let mut out = Vec::with_capacity(n);
    let mut prev = 0.0;
    for j in 0..n {
        let z: f64 = rng.sample(StandardNormal);
        prev = if j == 0 { z } else { rho * prev + gain * z };
        out.push(prev);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn frozen_when_rho_t_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cfg = ChannelConfig { rho_t: 1.0, ..Default::default() };
        let mut p = ChannelProcess::new(cfg, 3, 68, &mut rng);
        let first = p.reports(0);
        for s in 1..50 {
            let r = p.step_channel(&mut rng, s);
            for (a, b) in first.iter().zip(&r) {
                assert_eq!(a.sb_cqi, b.sb_cqi);
            }
        }
    }

    #[test]
    fn flat_when_rho_f_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cfg = ChannelConfig { rho_f: 1.0, ..Default::default() };
        let mut p = ChannelProcess::new(cfg, 4, 68, &mut rng);
        for s in 0..20 {
            for r in p.step_channel(&mut rng, s) {
                assert!(r.sb_cqi.iter().all(|&c| c == r.sb_cqi[0]));
            }
        }
    }

    #[test]
    fn lag_one_autocorrelation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cfg = ChannelConfig { rho_t: 0.99, ..Default::default() };
        let mut p = ChannelProcess::new(cfg, 1, 1, &mut rng);
        let n = 10_000;
        let mut xs = Vec::with_capacity(n);
        for _ in 0..n {
            p.step(&mut rng);
            xs.push(p.latent(0)[0]);
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
        let cov: f64 = xs.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum();
        let rho = cov / var;
        assert!((rho - 0.99).abs() <= 0.01, "{rho}");
    }

    #[test]
    fn cqi_is_clamped_and_rank_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cfg = ChannelConfig {
            cqi_scale: 20.0,
            rank: RankPolicy::Varying { max_rank: 4, change_prob: 0.5 },
            ..Default::default()
        };
        let mut p = ChannelProcess::new(cfg, 5, 10, &mut rng);
        let mut ranks = std::collections::BTreeSet::new();
        for s in 0..500 {
            for r in p.step_channel(&mut rng, s) {
                assert!(r.sb_cqi.iter().all(|&c| c <= 15));
                assert!((1..=4).contains(&r.wb_rank));
                ranks.insert(r.wb_rank);
            }
        }
        assert_eq!(ranks.len(), 4);
    }

    #[test]
    fn config_validation() {
        assert!(ChannelConfig::default().validate().is_ok());
        assert!(ChannelConfig { rho_t: 1.5, ..Default::default() }.validate().is_err());
        assert!(ChannelConfig { rank: RankPolicy::Fixed { rank: 0 }, ..Default::default() }.validate().is_err());
        assert!(ChannelConfig { mean_cqi_min: 9.0, mean_cqi_max: 3.0, ..Default::default() }.validate().is_err());
    }
}
