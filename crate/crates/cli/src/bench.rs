//! Randomized-channel benchmark: per realization the channel power gain is
//! drawn from an exponential distribution (Rayleigh amplitude fading), the
//! base scenario is scaled along the configured axis, and every scheme is
//! solved. One CSV row per (axis value, scheme) with mean and sample
//! standard deviation. Fixed seed means byte-identical output.

use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};
use taut_core::model::Scenario;
use taut_core::solve::{baseline, optimize, optimize_buffered, BaselineScheme};

use crate::format::g9;
use crate::scenario_file::ScenarioFile;
use crate::CliError;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub schema: u32,
    /// Base scenario, resolved relative to the config file's directory.
    pub scenario_path: String,
    #[serde(default = "default_realizations")]
    pub realizations: usize,
    pub axis: Axis,
    pub values: Vec<f64>,
    #[serde(default = "default_baselines")]
    pub baselines: Vec<String>,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_realizations() -> usize {
    100
}

fn default_baselines() -> Vec<String> {
    vec!["UB".into(), "LB".into(), "RH".into()]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// Values are total data volumes in bits; task data scales
    /// proportionally.
    TotalData,
    /// Values are multiplicative factors on every task deadline; the busy
    /// interval stays put.
    Horizon,
    /// Values are buffer capacities in bits.
    Buffer,
}

impl BenchConfig {
    pub fn load(path: &Path) -> Result<(BenchConfig, ScenarioFile), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display())))?;
        let config: BenchConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
        if config.schema != 1 {
            return Err(CliError::parse(format!(
                "unsupported bench schema {} (expected 1)",
                config.schema
            )));
        }
        if config.realizations == 0 {
            return Err(CliError::parse("realizations must be at least 1"));
        }
        if config.values.is_empty()
            || config.values.windows(2).any(|w| w[1] <= w[0])
            || config.values[0] <= 0.0
        {
            return Err(CliError::parse("axis values must be positive and increasing"));
        }
        for b in &config.baselines {
            if !matches!(b.as_str(), "UB" | "LB" | "RH") {
                return Err(CliError::parse(format!("unknown baseline {b:?}")));
            }
        }
        let base = path.parent().unwrap_or(Path::new("."));
        let scenario = ScenarioFile::load(&base.join(&config.scenario_path))?;
        Ok((config, scenario))
    }
}

/// Rescales the base scenario along the axis and applies a channel gain.
fn realize(
    base: &ScenarioFile,
    axis: Axis,
    value: f64,
    gain: f64,
) -> Result<Scenario, CliError> {
    let mut file = base.clone();
    match axis {
        Axis::TotalData => {
            let total: f64 = file.tasks.iter().map(|t| t.data_bits).sum();
            let factor = value / total;
            for t in &mut file.tasks {
                t.data_bits *= factor;
            }
            if let Some(b) = &mut file.buffer_bits {
                *b *= factor;
            }
        }
        Axis::Horizon => {
            for t in &mut file.tasks {
                t.deadline_s *= value;
            }
        }
        Axis::Buffer => {
            file.buffer_bits = Some(value);
        }
    }
    file.to_scenario_with_gain(gain)
}

struct Accumulator {
    sum: f64,
    sum_sq: f64,
    n: usize,
}

impl Accumulator {
    fn new() -> Self {
        Accumulator {
            sum: 0.0,
            sum_sq: 0.0,
            n: 0,
        }
    }

    fn add(&mut self, x: f64) {
        self.sum += x;
        self.sum_sq += x * x;
        self.n += 1;
    }

    fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    fn std(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0).sqrt()
    }
}

pub fn run(config: &BenchConfig, base: &ScenarioFile) -> Result<String, CliError> {
    let seed = config.seed.unwrap_or_else(|| base.seed());
    let mean_gain = base.params.mean_gain;
    let gain_dist = Exp::new(1.0 / mean_gain)
        .map_err(|_| CliError::parse("mean_gain must be positive"))?;
    let mut schemes: Vec<&str> = vec!["JSTRC"];
    schemes.extend(config.baselines.iter().map(String::as_str));

    let mut out = String::from("axis,scheme,mean_energy_j,std_energy_j,n\n");
    let mut infeasible = 0usize;
    for (ai, &value) in config.values.iter().enumerate() {
        let mut acc: Vec<Accumulator> = schemes.iter().map(|_| Accumulator::new()).collect();
        for r in 0..config.realizations {
            // Common random numbers: the gain depends only on the
            // realization index, so axis points see the same channel draws
            // and scheme/axis comparisons are paired.
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let gain: f64 = gain_dist.sample(&mut rng);
            let scenario = realize(base, config.axis, value, gain)?;
            let rh_seed = seed
                .wrapping_mul(0x9E3779B97F4A7C15)
                .wrapping_add(((ai as u64) << 32) | r as u64);
            for (scheme, acc) in schemes.iter().zip(acc.iter_mut()) {
                let solved = match *scheme {
                    "JSTRC" => {
                        if scenario.buffer().is_some() {
                            optimize_buffered(&scenario).map(|s| s.total_energy)
                        } else {
                            optimize(&scenario).map(|s| s.total_energy)
                        }
                    }
                    "UB" => baseline(&scenario, BaselineScheme::Ub, 0).map(|s| s.total_energy),
                    "LB" => baseline(&scenario, BaselineScheme::Lb, 0).map(|s| s.total_energy),
                    "RH" => {
                        baseline(&scenario, BaselineScheme::Rh, rh_seed).map(|s| s.total_energy)
                    }
                    _ => unreachable!(),
                };
                match solved {
                    Ok(e) => acc.add(e),
                    Err(_) => infeasible += 1,
                }
            }
        }
        for (scheme, acc) in schemes.iter().zip(&acc) {
            out.push_str(&format!(
                "{},{scheme},{},{},{}\n",
                g9(value),
                g9(acc.mean()),
                g9(acc.std()),
                acc.n
            ));
        }
    }
    if infeasible > 0 {
        eprintln!("warning: {infeasible} infeasible realizations were skipped");
    }
    Ok(out)
}

pub fn cmd_bench(
    config_path: &Path,
    seed_override: Option<u64>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let (mut config, base) = BenchConfig::load(config_path)?;
    if let Some(seed) = seed_override {
        config.seed = Some(seed);
    }
    let csv = run(&config, &base)?;
    match out {
        Some(path) => std::fs::write(path, csv)?,
        None => std::io::stdout().write_all(csv.as_bytes())?,
    }
    Ok(())
}
