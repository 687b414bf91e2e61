//! Scenario JSON schema (version 1).
//!
//! Times are seconds, data volumes bits, noise power dBm (converted to
//! watts at the file boundary; the solver works in watts only).

use std::path::Path;

use serde::{Deserialize, Serialize};
use taut_core::model::{BusyInterval, PhysicalParams, Scenario, ScenarioError, Task};

use crate::CliError;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema: u32,
    pub tasks: Vec<TaskFile>,
    pub busy: Option<BusyFile>,
    #[serde(default)]
    pub buffer_bits: Option<f64>,
    pub params: ParamsFile,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskFile {
    pub deadline_s: f64,
    pub data_bits: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BusyFile {
    pub start_s: f64,
    pub end_s: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub alpha: f64,
    pub cycles_per_bit: f64,
    pub noise_dbm: f64,
    pub mean_gain: f64,
    pub bandwidth_hz: f64,
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

impl ScenarioFile {
    pub fn load(path: &Path) -> Result<ScenarioFile, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display())))?;
        let file: ScenarioFile = serde_json::from_str(&text)
            .map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
        if file.schema != 1 {
            return Err(CliError::parse(format!(
                "unsupported scenario schema {} (expected 1)",
                file.schema
            )));
        }
        Ok(file)
    }

    /// Builds the solver scenario, using the configured mean channel gain as
    /// the effective gain (the bench command redraws it per realization).
    pub fn to_scenario(&self) -> Result<Scenario, CliError> {
        self.to_scenario_with_gain(self.params.mean_gain)
    }

    pub fn to_scenario_with_gain(&self, gain: f64) -> Result<Scenario, CliError> {
        let tasks: Vec<Task> = self
            .tasks
            .iter()
            .map(|t| Task {
                deadline: t.deadline_s,
                data: t.data_bits,
            })
            .collect();
        let busy = self.busy.map(|b| BusyInterval {
            start: b.start_s,
            end: b.end_s,
        });
        let params = PhysicalParams {
            alpha: self.params.alpha,
            cycles_per_bit: self.params.cycles_per_bit,
            noise_power: dbm_to_watts(self.params.noise_dbm),
            channel_gain: gain,
            bandwidth: self.params.bandwidth_hz,
        };
        Scenario::new(tasks, busy, params, self.buffer_bits).map_err(|e| match e {
            // An undersized buffer is a well-formed but unschedulable
            // instance; everything else is a schema-level defect.
            ScenarioError::BufferTooSmall { .. } => CliError::infeasible(e.to_string()),
            other => CliError::parse(other.to_string()),
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}
