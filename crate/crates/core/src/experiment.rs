//! Run configuration, sweep planning and result files.
//!
//! `results.csv` columns, in order:
//!
//! ```text
//! algorithm,num_ues,traffic_type,seeds,slots,config_hash,status,type_ues,
//! throughput_bps_mean,throughput_bps_std,throughput_pkt_per_sec_mean,throughput_pkt_per_sec_std,
//! loss_rate_mean,loss_rate_std,mean_hol_delay_sec_mean,mean_hol_delay_sec_std,
//! tbs_calcs_mean,tbs_calcs_std,metric_calcs_mean,metric_calcs_std,rb_amount_calcs_mean,rb_amount_calcs_std,
//! tbs_calcs_per_call_mean,metric_calcs_per_call_mean,rb_amount_calcs_per_call_mean
//! ```
//!
//! One row per algorithm, UE count and traffic type, plus an `all` row. Rows
//! of an aborted run have `status = aborted` and empty numeric fields.
//! Counter columns are per seed (whole run) and repeat across traffic rows.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::link::{CqiTable, EffectiveMcsRule, LinkAdaptation};
use crate::metrics::{MetricKind, QosProfile, DEFAULT_TIME_CONSTANT_SLOTS};
use crate::resource::BwpConfig;
use crate::schedulers::Algorithm;
use crate::sim::{run_simulation, ChannelConfig, KpiReport, PayloadMode, SimConfig, Stat, TypeKpi};
use crate::traffic::{ArrivalProcess, TrafficType};

pub const RESULTS_FILE: &str = "results.csv";
pub const SUMMARY_FILE: &str = "summary.json";

pub const CSV_COLUMNS: [&str; 25] = [
    "algorithm",
    "num_ues",
    "traffic_type",
    "seeds",
    "slots",
    "config_hash",
    "status",
    "type_ues",
    "throughput_bps_mean",
    "throughput_bps_std",
    "throughput_pkt_per_sec_mean",
    "throughput_pkt_per_sec_std",
    "loss_rate_mean",
    "loss_rate_std",
    "mean_hol_delay_sec_mean",
    "mean_hol_delay_sec_std",
    "tbs_calcs_mean",
    "tbs_calcs_std",
    "metric_calcs_mean",
    "metric_calcs_std",
    "rb_amount_calcs_mean",
    "rb_amount_calcs_std",
    "tbs_calcs_per_call_mean",
    "metric_calcs_per_call_mean",
    "rb_amount_calcs_per_call_mean",
];

/// Partial override of a built-in traffic profile.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QosOverride {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delay_threshold_sec: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub acceptable_drop_prob: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub packet_size_bits: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arrival_rate_pkt_per_sec: Option<f64>,
}

impl QosOverride {
    pub fn apply(&self, base: QosProfile) -> QosProfile {
        QosProfile {
            delay_threshold_sec: self.delay_threshold_sec.unwrap_or(base.delay_threshold_sec),
            acceptable_drop_prob: self.acceptable_drop_prob.unwrap_or(base.acceptable_drop_prob),
            packet_size_bits: self.packet_size_bits.unwrap_or(base.packet_size_bits),
            arrival_rate_pkt_per_sec: self.arrival_rate_pkt_per_sec.unwrap_or(base.arrival_rate_pkt_per_sec),
        }
    }
}

/// Everything an experiment needs. Missing keys take the default values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub algorithms: Vec<Algorithm>,
    pub ues: Vec<usize>,
    pub seeds: Vec<u64>,
    pub slots: u64,
    pub metric: MetricKind,
    pub effective_mcs: EffectiveMcsRule,
    pub payload: PayloadMode,
    pub arrivals: ArrivalProcess,
    pub feedback_delay: u32,
    pub avg_rate_time_constant: u32,
    pub traffic_mix: Vec<TrafficType>,
    /// Worker threads; 0 uses every available core.
    pub parallel: usize,
    pub out_dir: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cqi_table: Option<CqiTable>,
    pub bwp: BwpConfig,
    pub channel: ChannelConfig,
    pub traffic: BTreeMap<TrafficType, QosOverride>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            algorithms: vec![Algorithm::Jade, Algorithm::Dase, Algorithm::Date, Algorithm::Leap, Algorithm::Type0],
            ues: vec![10, 20, 30, 40, 50],
            seeds: (0..10).collect(),
            slots: 1200,
            metric: MetricKind::Mlwdf,
            effective_mcs: EffectiveMcsRule::Median,
            payload: PayloadMode::AllQueued,
            arrivals: ArrivalProcess::Poisson,
            feedback_delay: 1,
            avg_rate_time_constant: DEFAULT_TIME_CONSTANT_SLOTS,
            traffic_mix: TrafficType::ALL.to_vec(),
            parallel: 0,
            out_dir: PathBuf::from("results"),
            cqi_table: None,
            bwp: BwpConfig::default(),
            channel: ChannelConfig::default(),
            traffic: BTreeMap::new(),
        }
    }
}

/// Command-line or environment values that replace config-file values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub algorithms: Option<Vec<Algorithm>>,
    pub ues: Option<Vec<usize>>,
    pub seeds: Option<Vec<u64>>,
    pub slots: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub parallel: Option<usize>,
}

impl RunConfig {
    pub fn from_toml(src: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(src).map_err(|e| Error::Config(toml_message(src, &e)))?;
        cfg.validate().map_err(|e| match e {
            Error::Config(msg) => Error::Config(locate(src, &msg)),
            other => other,
        })?;
        Ok(cfg)
    }

    /// Checks every invariant. Messages start with the offending field name.
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.algorithms.is_empty() {
            return fail("algorithms: at least one algorithm is required".into());
        }
        if self.ues.is_empty() || self.ues.contains(&0) {
            return fail("ues: a non-empty list of positive UE counts is required".into());
        }
        if self.seeds.is_empty() {
            return fail("seeds: at least one seed is required".into());
        }
        let mut uniq = self.seeds.clone();
        uniq.sort_unstable();
        uniq.dedup();
        if uniq.len() != self.seeds.len() {
            return fail("seeds: duplicate seeds".into());
        }
        if self.traffic_mix.is_empty() {
            return fail("traffic_mix: at least one traffic type is required".into());
        }
        if self.avg_rate_time_constant == 0 {
            return fail("avg_rate_time_constant: must be >= 1".into());
        }
        self.bwp.validate().or_else(|e| fail(format!("bwp: {e}")))?;
        self.channel.validate()?;
        for (t, o) in &self.traffic {
            o.apply(t.profile()).validate().or_else(|e| fail(format!("traffic.{t}: {e}")))?;
        }
        Ok(())
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = &o.algorithms {
            self.algorithms = v.clone();
        }
        if let Some(v) = &o.ues {
            self.ues = v.clone();
        }
        if let Some(v) = &o.seeds {
            self.seeds = v.clone();
        }
        if let Some(v) = o.slots {
            self.slots = v;
        }
        if let Some(v) = &o.out_dir {
            self.out_dir = v.clone();
        }
        if let Some(v) = o.parallel {
            self.parallel = v;
        }
    }

    pub fn sim_config(&self, algorithm: Algorithm, num_ues: usize) -> SimConfig {
        SimConfig {
            algorithm,
            bwp: self.bwp,
            num_ues,
            traffic_mix: self.traffic_mix.clone(),
            qos_overrides: self.traffic.iter().map(|(t, o)| (*t, o.apply(t.profile()))).collect(),
            channel: self.channel,
            slots: self.slots,
            seeds: self.seeds.clone(),
            feedback_delay: self.feedback_delay,
            metric: self.metric,
            avg_rate_time_constant: self.avg_rate_time_constant,
            link: LinkAdaptation::new(self.cqi_table.clone().unwrap_or_default(), self.effective_mcs),
            payload: self.payload,
            arrivals: self.arrivals,
        }
    }

    /// SHA-256 over the settings that affect results (output path and
    /// thread count excluded), first 16 hex digits.
    pub fn hash(&self) -> String {
        let canonical = RunConfig { out_dir: PathBuf::new(), parallel: 0, ..self.clone() };
        let json = serde_json::to_string(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))[..16].to_string()
    }

    pub fn plan(&self) -> Vec<PlanEntry> {
        self.algorithms
            .iter()
            .flat_map(|&algorithm| self.ues.iter().map(move |&num_ues| PlanEntry { algorithm, num_ues }))
            .collect()
    }

    /// Human-readable sweep plan, one line per (algorithm, UE count).
    pub fn describe_plan(&self) -> String {
        let plan = self.plan();
        let mut s = String::new();
        let _ = writeln!(
            s,
            "config {}: {} runs x {} seeds x {} slots = {} simulations",
            self.hash(),
            plan.len(),
            self.seeds.len(),
            self.slots,
            plan.len() * self.seeds.len()
        );
        for p in &plan {
            let _ = writeln!(s, "  {:<16} ues={}", p.algorithm.name(), p.num_ues);
        }
        let _ = writeln!(s, "output: {}", self.out_dir.display());
        s
    }
}

fn toml_message(src: &str, e: &toml::de::Error) -> String {
    let msg = e.message().trim();
    match e.span() {
        Some(span) => {
            let line = src[..span.start.min(src.len())].matches('\n').count() + 1;
            let text = src.lines().nth(line - 1).unwrap_or("").trim();
            format!("line {line} `{text}`: {msg}")
        }
        None => msg.to_string(),
    }
}

/// Prefixes a validation message with the line of the field it names.
fn locate(src: &str, msg: &str) -> String {
    let field = msg.split([':', ' ']).next().unwrap_or("");
    let key = field.rsplit('.').next().unwrap_or(field);
    let section = field.split('.').next().unwrap_or(field);
    let find = |k: &str| {
        src.lines().position(|l| {
            let l = l.trim_start();
            l.strip_prefix(k).is_some_and(|rest| rest.trim_start().starts_with('='))
                || l.trim_start_matches('[').starts_with(k) && l.starts_with('[')
        })
    };
    match find(key).or_else(|| find(section)) {
        Some(i) if !key.is_empty() => format!("line {}: {msg}", i + 1),
        _ => msg.to_string(),
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let src = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    RunConfig::from_toml(&src).map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Parses `1,2,5` or `0..10` (end exclusive) or a mix of both.
pub fn parse_list<T>(s: &str) -> std::result::Result<Vec<T>, String>
where
    T: std::str::FromStr + TryFrom<u64>,
{
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: u64 = a.trim().parse().map_err(|_| format!("bad range start in '{part}'"))?;
            let b: u64 = b.trim().parse().map_err(|_| format!("bad range end in '{part}'"))?;
            for v in a..b {
                out.push(T::try_from(v).map_err(|_| format!("value {v} out of range"))?);
            }
        } else {
            out.push(part.parse().map_err(|_| format!("bad value '{part}'"))?);
        }
    }
    if out.is_empty() {
        return Err(format!("empty list '{s}'"));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub algorithm: Algorithm,
    pub num_ues: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    Aborted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub algorithm: Algorithm,
    pub num_ues: usize,
    pub status: RunStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<KpiReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub config_hash: String,
    pub config: RunConfig,
    pub columns: Vec<String>,
    pub runs: Vec<RunResult>,
}

impl Summary {
    pub fn aborted(&self) -> usize {
        self.runs.iter().filter(|r| r.status == RunStatus::Aborted).count()
    }
}

/// Runs the whole sweep. Individual run failures are recorded, not returned.
pub fn execute(cfg: &RunConfig) -> Result<Summary> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallel)
        .build()
        .map_err(|e| Error::Config(format!("parallel: {e}")))?;
    let runs = pool.install(|| {
        cfg.plan()
            .par_iter()
            .map(|p| match run_simulation(&cfg.sim_config(p.algorithm, p.num_ues)) {
                Ok(report) => RunResult {
                    algorithm: p.algorithm,
                    num_ues: p.num_ues,
                    status: RunStatus::Ok,
                    error: None,
                    report: Some(report),
                },
                Err(e) => RunResult {
                    algorithm: p.algorithm,
                    num_ues: p.num_ues,
                    status: RunStatus::Aborted,
                    error: Some(e.to_string()),
                    report: None,
                },
            })
            .collect::<Vec<_>>()
    });
    Ok(Summary {
        config_hash: cfg.hash(),
        config: cfg.clone(),
        columns: CSV_COLUMNS.iter().map(|c| c.to_string()).collect(),
        runs,
    })
}

fn push_stat(row: &mut Vec<String>, s: Stat) {
    row.push(s.mean.to_string());
    row.push(s.std.to_string());
}

pub fn results_csv(summary: &Summary) -> String {
    let cfg = &summary.config;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).expect("in-memory write");
    let mut types: Vec<TrafficType> = cfg.traffic_mix.clone();
    types.sort();
    types.dedup();
    for run in &summary.runs {
        let rows: Vec<(String, Option<&TypeKpi>)> = types
            .iter()
            .map(|t| (t.name().to_string(), run.report.as_ref().and_then(|r| r.per_type.get(t))))
            .chain(std::iter::once(("all".to_string(), run.report.as_ref().map(|r| &r.aggregate))))
            .collect();
        for (name, kpi) in rows {
            let mut row = vec![
                run.algorithm.name().to_string(),
                run.num_ues.to_string(),
                name,
                cfg.seeds.len().to_string(),
                cfg.slots.to_string(),
                summary.config_hash.clone(),
                match run.status {
                    RunStatus::Ok => "ok".into(),
                    RunStatus::Aborted => "aborted".into(),
                },
            ];
            match (kpi, &run.report) {
                (Some(k), Some(r)) => {
                    row.push(k.num_ues.to_string());
                    push_stat(&mut row, k.throughput_bps);
                    push_stat(&mut row, k.throughput_pkt_per_sec);
                    push_stat(&mut row, k.loss_rate);
                    push_stat(&mut row, k.mean_hol_delay_sec);
                    let c = &r.counters;
                    push_stat(&mut row, c.tbs_calcs);
                    push_stat(&mut row, c.metric_calcs);
                    push_stat(&mut row, c.rb_amount_calcs);
                    row.push(c.tbs_calcs_per_call.mean.to_string());
                    row.push(c.metric_calcs_per_call.mean.to_string());
                    row.push(c.rb_amount_calcs_per_call.mean.to_string());
                }
                (None, Some(_)) => {
                    // Traffic type with no UEs at this K.
                    row.push("0".into());
                    row.resize(CSV_COLUMNS.len(), String::new());
                }
                _ => row.resize(CSV_COLUMNS.len(), String::new()),
            }
            w.write_record(&row).expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

/// Writes `results.csv` and `summary.json` into `dir`.
pub fn write_results(summary: &Summary, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let csv = dir.join(RESULTS_FILE);
    let json = dir.join(SUMMARY_FILE);
    fs::write(&csv, results_csv(summary))?;
    let mut text = serde_json::to_string_pretty(summary).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    fs::write(&json, text)?;
    Ok((csv, json))
}

/// Runs the sweep and writes both result files to `cfg.out_dir`.
pub fn run_experiment(cfg: &RunConfig) -> Result<Summary> {
    let summary = execute(cfg)?;
    write_results(&summary, &cfg.out_dir)?;
    Ok(summary)
}
