//! Result files: per-trial and aggregate CSVs, the run manifest, policies
//! and optional step logs. Output is a pure function of the result, so
//! identical runs produce identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::run::ExperimentResult;
use crate::error::{Error, Result};

pub const TRIALS_CSV: &str = "trials.csv";
pub const AGGREGATE_CSV: &str = "aggregate.csv";
pub const MANIFEST: &str = "manifest.toml";
pub const EVAL_CSV: &str = "evaluation.csv";
pub const STEPS_CSV: &str = "steps.csv";

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format: u32,
    pub package_version: String,
    /// Trial seeds as hexadecimal strings.
    pub trial_seeds: Vec<String>,
    pub config: ExperimentConfig,
}

impl Manifest {
    pub fn new(config: &ExperimentConfig, seeds: &[u64]) -> Self {
        Self {
            format: 1,
            package_version: env!("CARGO_PKG_VERSION").to_string(),
            trial_seeds: seeds.iter().map(|s| format!("{s:#018x}")).collect(),
            config: config.clone(),
        }
    }

    pub fn seeds(&self) -> Result<Vec<u64>> {
        self.trial_seeds
            .iter()
            .map(|s| {
                u64::from_str_radix(s.trim_start_matches("0x"), 16)
                    .map_err(|_| Error::Config(format!("bad trial seed {s:?}")))
            })
            .collect()
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("cannot serialize manifest: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("bad manifest: {e}")))
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn trials_csv(result: &ExperimentResult) -> String {
    let mut out = String::from(
        "episode,trial,return,loss_q,loss_model_state,loss_model_reward,gate_open_fraction,greedy_return\n",
    );
    let episodes = result.curve.mean.len();
    for e in 0..episodes {
        for (t, trial) in result.trials.iter().enumerate() {
            let r = &trial.episodes[e];
            let _ = writeln!(
                out,
                "{e},{t},{},{},{},{},{},{}",
                r.total_reward,
                opt(r.loss_q),
                opt(r.loss_model_state),
                opt(r.loss_model_reward),
                opt(r.gate_open_fraction),
                opt(r.greedy_return)
            );
        }
    }
    out
}

pub fn aggregate_csv(result: &ExperimentResult) -> String {
    let mut out = String::from("episode,mean_return,std_return\n");
    for (e, (m, s)) in result.curve.mean.iter().zip(&result.curve.std).enumerate() {
        let _ = writeln!(out, "{e},{m},{s}");
    }
    out
}

fn evaluation_csv(result: &ExperimentResult) -> Option<String> {
    if result.trials.iter().all(|t| t.evaluation.is_none()) {
        return None;
    }
    let mut out = String::from("trial,episode,return\n");
    for (t, trial) in result.trials.iter().enumerate() {
        for (e, r) in trial.evaluation.iter().flat_map(|ev| ev.returns.iter().enumerate()) {
            let _ = writeln!(out, "{t},{e},{r}");
        }
    }
    Some(out)
}

fn steps_csv(result: &ExperimentResult) -> Option<String> {
    if result.trials.iter().all(|t| t.step_log.is_empty()) {
        return None;
    }
    let mut out = String::from(
        "trial,episode,step,return,loss_q,loss_model_state,loss_model_reward,loss_model_combined,gate_open\n",
    );
    for (t, trial) in result.trials.iter().enumerate() {
        for r in &trial.step_log {
            let gate = r.gate_open.map(|g| (g as u8).to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{t},{},{},{},{},{},{},{},{gate}",
                r.episode,
                r.step,
                r.episode_return,
                opt(r.loss_q),
                opt(r.loss_model_state),
                opt(r.loss_model_reward),
                opt(r.loss_model_combined)
            );
        }
    }
    Some(out)
}

fn write(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Writes all result files into `dir`, creating it if needed, and returns
/// the paths written.
pub fn emit_results(result: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let seeds: Vec<u64> = result.trials.iter().map(|t| t.seed).collect();
    let mut written = vec![
        write(dir, TRIALS_CSV, &trials_csv(result))?,
        write(dir, AGGREGATE_CSV, &aggregate_csv(result))?,
        write(dir, MANIFEST, &Manifest::new(&result.config, &seeds).to_toml()?)?,
    ];
    if let Some(text) = evaluation_csv(result) {
        written.push(write(dir, EVAL_CSV, &text)?);
    }
    if let Some(text) = steps_csv(result) {
        written.push(write(dir, STEPS_CSV, &text)?);
    }
    for (i, trial) in result.trials.iter().enumerate() {
        let path = dir.join(format!("policy_trial{i}.txt"));
        trial.policy.save(&path)?;
        written.push(path);
    }
    Ok(written)
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Manifest::from_toml(&text)
}
