//! Per-RB scheduling metrics and the historical average rate filter.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Floor (and initial value) of the historical average rate, bits per slot.
pub const AVG_RATE_FLOOR: f64 = 1.0;
pub const DEFAULT_TIME_CONSTANT_SLOTS: u32 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QosProfile {
    pub delay_threshold_sec: f64,
    pub acceptable_drop_prob: f64,
    pub packet_size_bits: u64,
    pub arrival_rate_pkt_per_sec: f64,
}

impl QosProfile {
    pub fn validate(&self) -> Result<()> {
        if !(self.acceptable_drop_prob > 0.0 && self.acceptable_drop_prob < 1.0) {
            return Err(Error::InvalidQos(format!("drop probability {} outside (0,1)", self.acceptable_drop_prob)));
        }
        if !(self.delay_threshold_sec > 0.0) || !self.delay_threshold_sec.is_finite() {
            return Err(Error::InvalidQos(format!("delay threshold {} must be > 0", self.delay_threshold_sec)));
        }
        if self.packet_size_bits == 0 {
            return Err(Error::InvalidQos("packet size must be >= 1 bit".into()));
        }
        if !(self.arrival_rate_pkt_per_sec >= 0.0) || !self.arrival_rate_pkt_per_sec.is_finite() {
            return Err(Error::InvalidQos(format!("arrival rate {} must be >= 0", self.arrival_rate_pkt_per_sec)));
        }
        Ok(())
    }

    /// `-ln(delta) / tau`, the delay-urgency factor of M-LWDF.
    pub fn urgency(&self) -> f64 {
        -self.acceptable_drop_prob.ln() / self.delay_threshold_sec
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UeSchedulingState {
    pub hol_delay_sec: f64,
    /// Historical average rate in bits per slot.
    pub avg_rate: f64,
    pub pending_bits: u64,
}

impl Default for UeSchedulingState {
    fn default() -> Self {
        Self { hol_delay_sec: 0.0, avg_rate: AVG_RATE_FLOOR, pending_bits: 0 }
    }
}

fn check_avg_rate(state: &UeSchedulingState) -> Result<()> {
    if state.avg_rate > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveAvgRate(state.avg_rate))
    }
}

pub fn mlwdf_weight(qos: &QosProfile, state: &UeSchedulingState, rate_per_rb: u64) -> Result<f64> {
    check_avg_rate(state)?;
    Ok(qos.urgency() * state.hol_delay_sec * rate_per_rb as f64 / state.avg_rate)
}

pub fn pf_weight(state: &UeSchedulingState, rate_per_rb: u64) -> Result<f64> {
    check_avg_rate(state)?;
    Ok(rate_per_rb as f64 / state.avg_rate)
}

pub fn sum_rate_weight(rate_per_rb: u64) -> f64 {
    rate_per_rb as f64
}

/// Exponential filter applied to every UE once per slot, served or not.
pub fn update_avg_rate(state: &UeSchedulingState, served_bits: u64, time_constant_slots: u32) -> UeSchedulingState {
    let t = f64::from(time_constant_slots.max(1));
    let r = (1.0 - 1.0 / t) * state.avg_rate + served_bits as f64 / t;
    UeSchedulingState { avg_rate: r.max(AVG_RATE_FLOOR), ..*state }
}

/// A per-RB scheduling metric `mu(k, b)`.
///
/// Callers guarantee `state.avg_rate > 0`; scheduler inputs are validated
/// before any metric is evaluated.
pub trait Metric: Send + Sync {
    fn per_rb(&self, qos: &QosProfile, state: &UeSchedulingState, rate_per_rb: u64) -> f64;
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    #[default]
    Mlwdf,
    Pf,
    SumRate,
}

impl MetricKind {
    pub const ALL: [MetricKind; 3] = [MetricKind::Mlwdf, MetricKind::Pf, MetricKind::SumRate];

    pub fn name(&self) -> &'static str {
        match self {
            MetricKind::Mlwdf => "mlwdf",
            MetricKind::Pf => "pf",
            MetricKind::SumRate => "sum-rate",
        }
    }
}

impl Metric for MetricKind {
    fn per_rb(&self, qos: &QosProfile, state: &UeSchedulingState, rate_per_rb: u64) -> f64 {
        let avg = state.avg_rate.max(f64::MIN_POSITIVE);
        match self {
            MetricKind::Mlwdf => qos.urgency() * state.hol_delay_sec * rate_per_rb as f64 / avg,
            MetricKind::Pf => rate_per_rb as f64 / avg,
            MetricKind::SumRate => sum_rate_weight(rate_per_rb),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qos(delta: f64, tau: f64) -> QosProfile {
        QosProfile { delay_threshold_sec: tau, acceptable_drop_prob: delta, packet_size_bits: 100, arrival_rate_pkt_per_sec: 1.0 }
    }

    fn st(d: f64, r: f64) -> UeSchedulingState {
        UeSchedulingState { hol_delay_sec: d, avg_rate: r, pending_bits: 1 }
    }

    #[test]
    fn mlwdf_examples() {
        let q = qos(0.1, 0.1);
        assert_eq!(mlwdf_weight(&q, &st(0.0, 50.0), 999).unwrap(), 0.0);
        assert_eq!(mlwdf_weight(&q, &st(0.3, 50.0), 0).unwrap(), 0.0);
        // (ln 10 / 0.1) * 0.01 * 213 / 100
        let w = mlwdf_weight(&q, &st(0.01, 100.0), 213).unwrap();
        assert!((w - 0.490_450_7).abs() < 1e-6, "{w}");
        assert_eq!(mlwdf_weight(&q, &st(0.01, 0.0), 1), Err(Error::NonPositiveAvgRate(0.0)));
    }

    #[test]
    fn pf_and_sum_rate_examples() {
        assert_eq!(pf_weight(&st(0.0, 100.0), 0).unwrap(), 0.0);
        assert_eq!(pf_weight(&st(0.0, 100.0), 300).unwrap(), 3.0);
        assert_eq!(pf_weight(&st(0.0, 100.0), 100).unwrap(), 1.0);
        assert!(pf_weight(&st(0.0, -1.0), 1).is_err());
        for r in [0u64, 213, 4262] {
            assert_eq!(sum_rate_weight(r), r as f64);
        }
    }

    #[test]
    fn trait_agrees_with_free_functions() {
        let q = qos(0.001, 0.007);
        let s = st(0.003, 420.0);
        assert_eq!(MetricKind::Mlwdf.per_rb(&q, &s, 500), mlwdf_weight(&q, &s, 500).unwrap());
        assert_eq!(MetricKind::Pf.per_rb(&q, &s, 500), pf_weight(&s, 500).unwrap());
        assert_eq!(MetricKind::SumRate.per_rb(&q, &s, 500), 500.0);
    }

    #[test]
    fn mlwdf_linear_in_rate_and_decreasing_in_delta() {
        let s = st(0.004, 77.0);
        for r in [1u64, 17, 213, 5000] {
            let a = mlwdf_weight(&qos(0.01, 0.05), &s, r).unwrap();
            let b = mlwdf_weight(&qos(0.01, 0.05), &s, 2 * r).unwrap();
            assert!((b - 2.0 * a).abs() <= 1e-12 * b.abs());
        }
        let mut prev = f64::INFINITY;
        for delta in [1e-5, 1e-3, 0.01, 0.1, 0.5, 0.9, 0.999] {
            let w = mlwdf_weight(&qos(delta, 0.05), &s, 100).unwrap();
            assert!(w < prev);
            prev = w;
        }
    }

    #[test]
    fn avg_rate_examples() {
        let s = st(0.0, 100.0);
        assert!((update_avg_rate(&s, 100, 37).avg_rate - 100.0).abs() < 1e-9);
        assert!((update_avg_rate(&s, 300, 100).avg_rate - 102.0).abs() < 1e-9);
        assert!((update_avg_rate(&s, 0, 100).avg_rate - 99.0).abs() < 1e-9);
        assert_eq!(update_avg_rate(&st(0.0, 1.0), 0, 10).avg_rate, AVG_RATE_FLOOR);
    }

    proptest::proptest! {
        #[test]
        fn avg_rate_stays_between_old_and_served(r in 1.0f64..1e6, served in 0u64..1_000_000, t in 1u32..1000) {
            let next = update_avg_rate(&st(0.0, r), served, t).avg_rate;
            let lo = r.min(served as f64);
            let hi = r.max(served as f64);
            proptest::prop_assert!(next == AVG_RATE_FLOOR || (next >= lo - 1e-9 * hi && next <= hi + 1e-9 * hi));
        }
    }
}
