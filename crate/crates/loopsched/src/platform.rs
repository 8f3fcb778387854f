//! Platform descriptions: PE counts, relative speeds, coordination costs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative speed of the fast PE class in the heterogeneous presets
/// (2.4 GHz vs 1.3 GHz core clocks).
pub const FAST_SLOW_SPEED_RATIO: f64 = 2.4 / 1.3;

/// How concurrent accesses to a shared counter are ordered when they arrive
/// at the same instant. `Random` models lock polling, where retrying
/// processes win with equal probability; `Rank` always favors the lowest PE
/// index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TieBreak {
    #[default]
    Random,
    Rank,
}

/// An execution platform. Iteration costs are divided by a PE's speed, so
/// speed 2 finishes the same work in half the time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlatformSpec {
    pub pe_count: usize,
    pub speeds: Vec<f64>,
    /// PE hosting the shared counters (one-sided) or acting as the master
    /// (two-sided).
    pub coordinator_pe: usize,
    /// Seconds per message hop between distinct PEs.
    pub comm_latency: f64,
    /// Seconds a shared counter is held per atomic read-modify-write.
    pub lock_overhead: f64,
    /// Seconds of master time per served work request (at speed 1).
    pub serve_overhead: f64,
    #[serde(default)]
    pub tie_break: TieBreak,
}

impl PlatformSpec {
    /// Homogeneous platform with unit speeds and zero coordination costs.
    pub fn homogeneous(pe_count: usize) -> Self {
        PlatformSpec {
            pe_count,
            speeds: vec![1.0; pe_count],
            coordinator_pe: 0,
            comm_latency: 0.0,
            lock_overhead: 0.0,
            serve_overhead: 0.0,
            tie_break: TieBreak::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.pe_count == 0 {
            return Err(Error::InvalidPlatform("platform needs at least one PE".into()));
        }
        if self.speeds.len() != self.pe_count {
            return Err(Error::InvalidPlatform(format!(
                "{} speeds for {} PEs",
                self.speeds.len(),
                self.pe_count
            )));
        }
        if self.speeds.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidPlatform("speeds must be positive".into()));
        }
        if self.coordinator_pe >= self.pe_count {
            return Err(Error::InvalidPlatform(format!(
                "coordinator PE {} out of range",
                self.coordinator_pe
            )));
        }
        for (value, name) in [
            (self.comm_latency, "comm latency"),
            (self.lock_overhead, "lock overhead"),
            (self.serve_overhead, "serve overhead"),
        ] {
            if value < 0.0 || !value.is_finite() {
                return Err(Error::InvalidPlatform(format!("{name} must be non-negative")));
            }
        }
        Ok(())
    }

    /// Index of the slowest PE (first occurrence).
    pub fn slowest_pe(&self) -> usize {
        argmin(&self.speeds)
    }

    /// Index of the fastest PE (first occurrence).
    pub fn fastest_pe(&self) -> usize {
        argmax(&self.speeds)
    }

    pub fn with_coordinator(mut self, pe: usize) -> Self {
        self.coordinator_pe = pe;
        self
    }

    pub fn total_speed(&self) -> f64 {
        self.speeds.iter().sum()
    }
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Where to place the coordinator (or master) PE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    Slowest,
    Fastest,
    #[serde(untagged)]
    Index(usize),
}

impl Default for Placement {
    fn default() -> Self {
        Placement::Index(0)
    }
}

impl Placement {
    pub fn resolve(self, platform: &PlatformSpec) -> Result<usize> {
        let pe = match self {
            Placement::Slowest => platform.slowest_pe(),
            Placement::Fastest => platform.fastest_pe(),
            Placement::Index(i) => i,
        };
        if pe >= platform.pe_count {
            return Err(Error::InvalidPlatform(format!("placement index {pe} out of range")));
        }
        Ok(pe)
    }
}

impl std::str::FromStr for Placement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "slowest" => Ok(Placement::Slowest),
            "fastest" => Ok(Placement::Fastest),
            other => other.parse::<usize>().map(Placement::Index).map_err(|_| {
                Error::InvalidPlatform(format!(
                    "placement must be slowest, fastest, or a PE index, got `{other}`"
                ))
            }),
        }
    }
}

/// Named desk-scale platform presets.
///
/// The heterogeneous presets model a cluster mixing slow manycore nodes with
/// fast server cores, scaled down 16x from the 288-core original: `2:1`
/// gives 12 slow + 6 fast PEs (slow cores dominate), `1:2` gives 6 slow +
/// 12 fast. Slow PEs come first, so PE 0 is always a slow one. Defaults:
/// 100 ns message hops, 1 us per counter RMW and per served request.
pub fn preset(name: &str) -> Result<PlatformSpec> {
    let (slow, fast) = match name {
        "knl-xeon-2:1" => (12, 6),
        "knl-xeon-1:2" => (6, 12),
        other => {
            return Err(Error::InvalidPlatform(format!(
                "unknown preset `{other}` (expected knl-xeon-2:1 or knl-xeon-1:2)"
            )))
        }
    };
    let mut speeds = vec![1.0; slow];
    speeds.extend(std::iter::repeat(FAST_SLOW_SPEED_RATIO).take(fast));
    Ok(PlatformSpec {
        pe_count: slow + fast,
        speeds,
        coordinator_pe: 0,
        comm_latency: 1e-7,
        lock_overhead: 1e-6,
        serve_overhead: 1e-6,
        tie_break: TieBreak::default(),
    })
}

pub const PRESET_NAMES: [&str; 2] = ["knl-xeon-2:1", "knl-xeon-1:2"];
