//! Simulation scenario description and the manifest written next to a run.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A baseline flow, identified by its `(upstream, destination)` pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    pub upstream: String,
    pub destination: String,
    pub mean_packets: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackSpec {
    pub start_tick: u64,
    /// Inclusive.
    pub end_tick: u64,
    /// Index into `baseline_flows` of the flow that carries the attack.
    pub target_flow: usize,
    /// Packet multiplier for the target flow; `1` is a null attack.
    pub factor: f64,
    /// Total session requests at the repeater on attack ticks.
    pub attack_requests: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    /// Entropy drop, in bits, that raises the classical alarm.
    #[serde(default = "default_drop")]
    pub classical_drop_bits: f64,
    /// The quantum alarm fires when the detector exceeds this value.
    #[serde(default)]
    pub quantum: f64,
}

fn default_drop() -> f64 {
    0.5
}

fn default_jitter() -> f64 {
    0.05
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { classical_drop_bits: default_drop(), quantum: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub ticks: u64,
    /// Bell pairs the repeater regenerates each tick.
    pub capacity: u64,
    pub baseline_flows: Vec<FlowSpec>,
    pub baseline_requests: u64,
    pub attack: AttackSpec,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub mitigation: bool,
    pub seed: u64,
    /// Relative per-flow packet jitter, drawn uniformly from `[-jitter, jitter]`.
    #[serde(default = "default_jitter")]
    pub jitter: f64,
}

impl ScenarioConfig {
    /// The stock 20-tick scenario: four equal flows, capacity 5, a factor-10
    /// attack with 50 requests over ticks 10 to 14.
    pub fn example() -> Self {
        let flow = |u: &str, d: &str| FlowSpec {
            upstream: u.into(),
            destination: d.into(),
            mean_packets: 100,
        };
        Self {
            ticks: 20,
            capacity: 5,
            baseline_flows: vec![
                flow("r1", "h1"),
                flow("r1", "h2"),
                flow("r2", "h1"),
                flow("r2", "h2"),
            ],
            baseline_requests: 3,
            attack: AttackSpec {
                start_tick: 10,
                end_tick: 14,
                target_flow: 0,
                factor: 10.0,
                attack_requests: 50,
            },
            thresholds: Thresholds::default(),
            mitigation: false,
            seed: 1,
            jitter: default_jitter(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config always serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.ticks == 0 {
            return fail("ticks must be positive".into());
        }
        if self.capacity == 0 {
            return fail("capacity must be positive".into());
        }
        if self.baseline_flows.iter().all(|f| f.mean_packets == 0) {
            return fail("at least one baseline flow must carry packets".into());
        }
        let a = &self.attack;
        if a.start_tick > a.end_tick || a.end_tick >= self.ticks {
            return fail(format!(
                "attack window {}..={} must satisfy start <= end < ticks ({})",
                a.start_tick, a.end_tick, self.ticks
            ));
        }
        if a.target_flow >= self.baseline_flows.len() {
            return fail(format!(
                "target_flow {} out of range for {} flows",
                a.target_flow,
                self.baseline_flows.len()
            ));
        }
        if !(a.factor.is_finite() && a.factor >= 1.0) {
            return fail(format!("attack factor {} must be >= 1", a.factor));
        }
        let t = &self.thresholds;
        if !(t.classical_drop_bits.is_finite() && t.classical_drop_bits > 0.0) {
            return fail(format!("classical_drop_bits {} must be > 0", t.classical_drop_bits));
        }
        if !t.quantum.is_finite() {
            return fail("quantum threshold must be finite".into());
        }
        if !(self.jitter.is_finite() && (0.0..1.0).contains(&self.jitter)) {
            return fail(format!("jitter {} must lie in [0, 1)", self.jitter));
        }
        Ok(())
    }
}

/// Everything needed to reproduce a simulation run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: ScenarioConfig,
    pub version: String,
    pub seed: u64,
    pub output: String,
}

impl RunManifest {
    pub fn new(config: &ScenarioConfig, output: impl Into<String>) -> Self {
        Self {
            config: config.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.seed,
            output: output.into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest always serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}
