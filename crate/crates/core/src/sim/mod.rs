//! Slot-level downlink simulation.

mod channel;
mod engine;
mod kpi;

pub use channel::{ChannelConfig, ChannelProcess, RankPolicy};
pub use engine::{run_seed, run_simulation, PayloadMode, SimConfig, SlotTrace, World};
pub use kpi::{CounterKpi, KpiReport, RunMeta, SeedReport, Stat, TypeCounts, TypeKpi};
