//! Experiment configuration, presets and `key=value` overrides.

use serde::{Deserialize, Serialize};

use crate::agents::{AgentConfig, BranchRows, ModelKind};
use crate::envs::{CartPoleParams, PendulumParams, UavParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AgentId {
    Q,
    Ntd,
    DynaQ,
    DynaMpc,
    Dqn,
    DqnMpc,
    Ddpg,
    DdpgMpc,
}

impl AgentId {
    pub fn is_tabular(self) -> bool {
        matches!(self, AgentId::Q | AgentId::Ntd | AgentId::DynaQ | AgentId::DynaMpc)
    }

    pub fn uses_model(self) -> bool {
        matches!(self, AgentId::DqnMpc | AgentId::DdpgMpc)
    }
}

/// Environment selection with its parameters. Step caps are taken from
/// the agent's `steps_per_episode`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "lowercase")]
pub enum EnvConfig {
    Cw,
    Cp(CartPoleParams),
    Pd(PendulumParams),
    Uav(UavParams),
}

impl EnvConfig {
    pub fn id(&self) -> &'static str {
        match self {
            EnvConfig::Cw => "cw",
            EnvConfig::Cp(_) => "cp",
            EnvConfig::Pd(_) => "pd",
            EnvConfig::Uav(_) => "uav",
        }
    }

    /// Default parameters for an environment id.
    pub fn from_id(id: &str) -> Result<Self> {
        Ok(match id {
            "cw" => EnvConfig::Cw,
            "cp" => EnvConfig::Cp(CartPoleParams::default()),
            "pd" => EnvConfig::Pd(PendulumParams::default()),
            "uav" => EnvConfig::Uav(UavParams::default()),
            other => return Err(Error::Config(format!("unknown environment {other:?}"))),
        })
    }

    pub fn set_step_cap(&mut self, cap: usize) {
        match self {
            EnvConfig::Cw => {}
            EnvConfig::Cp(p) => p.step_cap = cap,
            EnvConfig::Pd(p) => p.step_cap = cap,
            EnvConfig::Uav(p) => p.step_cap = cap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub agent_id: AgentId,
    pub trials: usize,
    /// Master seed; trial seeds are derived from it.
    pub seed: u64,
    pub output: String,
    /// Greedy evaluation episodes run after training.
    pub eval_episodes: usize,
    /// Write one log line per environment step.
    pub log_steps: bool,
    pub env: EnvConfig,
    pub agent: AgentConfig,
}

impl ExperimentConfig {
    /// Checks ranges and pairings, and aligns derived fields (environment
    /// step cap, model kind of model-free agents).
    pub fn resolve(mut self) -> Result<Self> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.seed > i64::MAX as u64 {
            return Err(Error::Config("master seed must be below 2^63".into()));
        }
        let ok = match (self.agent_id, &self.env) {
            (a, EnvConfig::Cw) => a.is_tabular(),
            (AgentId::Dqn | AgentId::DqnMpc, EnvConfig::Cp(_)) => true,
            (AgentId::Ddpg | AgentId::DdpgMpc, EnvConfig::Pd(_) | EnvConfig::Uav(_)) => true,
            _ => false,
        };
        if !ok {
            return Err(Error::Config(format!(
                "agent {:?} cannot run on environment {}",
                self.agent_id,
                self.env.id()
            )));
        }
        if self.agent_id.uses_model() {
            if self.agent.model == ModelKind::None {
                return Err(Error::Config("model-based agents need a model kind".into()));
            }
        } else if !self.agent_id.is_tabular() {
            self.agent.model = ModelKind::None;
        }
        self.agent.validate()?;
        if self.agent_id.is_tabular() {
            if self.agent.epsilon.is_none() {
                return Err(Error::Config("tabular agents need epsilon".into()));
            }
            if self.agent_id == AgentId::DynaQ && self.agent.planning_steps.is_none() {
                return Err(Error::Config("dyna-q needs planning_steps".into()));
            }
        } else if self.agent.buffer_size.is_none() {
            return Err(Error::Config("replay agents need buffer_size".into()));
        }
        self.env.set_step_cap(self.agent.steps_per_episode);
        Ok(self)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("cannot serialize config: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("bad config: {e}")))
    }

    /// Sets the value at a dotted path, e.g. `agent.horizon=3`. The value is
    /// read as a TOML literal, falling back to a bare string.
    pub fn apply_override(self, assignment: &str) -> Result<Self> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override {assignment:?} is not key=value")))?;
        let mut table = toml::Table::try_from(&self)
            .map_err(|e| Error::Config(format!("cannot serialize config: {e}")))?;
        set_path(&mut table, key.trim(), parse_value(value.trim()))?;
        table
            .try_into()
            .map_err(|e| Error::Config(format!("override {assignment:?}: {e}")))
    }
}

fn parse_value(text: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {text}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(text.to_string()))
}

fn set_path(table: &mut toml::Table, path: &str, value: toml::Value) -> Result<()> {
    let mut parts: Vec<&str> = path.split('.').collect();
    let last = parts.pop().filter(|k| !k.is_empty()).ok_or_else(|| Error::Config("empty override key".into()))?;
    let mut cur = table;
    for p in parts {
        cur = cur
            .entry(p)
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("{p} in {path:?} is not a table")))?;
    }
    if path == "env.id" {
        // switching environment resets its parameters to that environment's defaults
        let fresh = toml::Table::try_from(EnvConfig::from_id(value.as_str().unwrap_or(""))?)
            .map_err(|e| Error::Config(e.to_string()))?;
        *cur = fresh;
        return Ok(());
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

fn base_agent() -> AgentConfig {
    AgentConfig {
        horizon: 2,
        gamma: 0.98,
        epsilon: None,
        noise: None,
        batch_size: 64,
        lr_critic: 0.001,
        lr_actor: None,
        lr_model: None,
        buffer_size: None,
        model: ModelKind::None,
        epsilon_m: 0.01,
        gate_smoothing: 0.9,
        zeta: 0.01,
        hidden: vec![64, 64],
        model_hidden: vec![64, 64],
        lambda: 1.0,
        residual_model: true,
        planning_steps: None,
        branch_rows: BranchRows::Start,
        episodes: 300,
        steps_per_episode: 200,
    }
}

pub const PRESETS: [&str; 4] = ["cw", "cp", "pd", "uav"];

/// Named experiment presets.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let (agent_id, env, agent) = match name {
        "cw" => (
            AgentId::DynaMpc,
            EnvConfig::Cw,
            AgentConfig {
                gamma: 0.9,
                epsilon: Some(0.01),
                lr_critic: 0.1,
                batch_size: 1,
                planning_steps: Some(5),
                hidden: vec![],
                model_hidden: vec![],
                steps_per_episode: 1000,
                ..base_agent()
            },
        ),
        "cp" => (
            AgentId::DqnMpc,
            EnvConfig::Cp(CartPoleParams::default()),
            AgentConfig {
                epsilon: Some(0.01),
                lr_critic: 0.002,
                lr_model: Some(0.002),
                buffer_size: Some(10_000),
                model: ModelKind::Separate,
                ..base_agent()
            },
        ),
        "pd" => (
            AgentId::DdpgMpc,
            EnvConfig::Pd(PendulumParams::default()),
            AgentConfig {
                noise: Some(0.1),
                lr_critic: 0.003,
                lr_actor: Some(0.0003),
                lr_model: Some(0.003),
                buffer_size: Some(10_000),
                model: ModelKind::Combined,
                episodes: 150,
                ..base_agent()
            },
        ),
        "uav" => (
            AgentId::DdpgMpc,
            EnvConfig::Uav(UavParams::default()),
            AgentConfig {
                gamma: 0.99,
                noise: Some(0.1),
                lr_critic: 0.001,
                lr_actor: Some(0.001),
                lr_model: Some(0.001),
                buffer_size: Some(1_000_000),
                model: ModelKind::Separate,
                hidden: vec![128, 128],
                model_hidden: vec![128, 128],
                ..base_agent()
            },
        ),
        other => {
            return Err(Error::Config(format!(
                "unknown preset {other:?}; available: {}",
                PRESETS.join(", ")
            )))
        }
    };
    ExperimentConfig {
        agent_id,
        trials: 4,
        seed: 0,
        output: format!("runs/{name}"),
        eval_episodes: if name == "uav" { 10 } else { 0 },
        log_steps: false,
        env,
        agent,
    }
    .resolve()
}

/// A preset name, or a TOML file. A file may name a `preset` to start from
/// and list only the keys it changes.
pub fn load_config(source: &str) -> Result<ExperimentConfig> {
    if PRESETS.contains(&source) {
        return preset(source);
    }
    let text = std::fs::read_to_string(source).map_err(|e| Error::io(source, e))?;
    let mut table: toml::Table =
        toml::from_str(&text).map_err(|e| Error::Config(format!("{source}: {e}")))?;
    let cfg = match table.remove("preset") {
        Some(toml::Value::String(name)) => {
            let mut base = toml::Table::try_from(preset(&name)?)
                .map_err(|e| Error::Config(e.to_string()))?;
            if let Some(toml::Value::Table(env)) = table.get("env") {
                if let Some(toml::Value::String(id)) = env.get("id") {
                    set_path(&mut base, "env.id", toml::Value::String(id.clone()))?;
                }
            }
            merge(&mut base, table);
            base.try_into()
                .map_err(|e| Error::Config(format!("{source}: {e}")))?
        }
        Some(_) => return Err(Error::Config("`preset` must be a string".into())),
        None => toml::Value::Table(table)
            .try_into()
            .map_err(|e| Error::Config(format!("{source}: {e}")))?,
    };
    ExperimentConfig::resolve(cfg)
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_resolve_and_round_trip() {
        for name in PRESETS {
            let cfg = preset(name).unwrap();
            let back = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
            assert_eq!(back, cfg, "{name}");
        }
        assert!(preset("ho").is_err());
    }

    #[test]
    fn table_values_in_presets() {
        let cw = preset("cw").unwrap();
        assert_eq!((cw.agent.lr_critic, cw.agent.gamma, cw.agent.epsilon), (0.1, 0.9, Some(0.01)));
        assert_eq!(cw.agent.buffer_size, None);
        let cp = preset("cp").unwrap();
        assert_eq!((cp.agent.lr_critic, cp.agent.gamma, cp.agent.buffer_size), (0.002, 0.98, Some(10_000)));
        let pd = preset("pd").unwrap();
        assert_eq!((pd.agent.lr_critic, pd.agent.lr_actor, pd.agent.epsilon), (0.003, Some(0.0003), None));
        let uav = preset("uav").unwrap();
        assert_eq!((uav.agent.gamma, uav.agent.buffer_size), (0.99, Some(1_000_000)));
    }

    #[test]
    fn overrides() {
        let cfg = preset("cp").unwrap();
        let cfg = cfg.apply_override("agent.horizon=3").unwrap();
        assert_eq!(cfg.agent.horizon, 3);
        let cfg = cfg.apply_override("agent_id=dqn").unwrap();
        assert_eq!(cfg.agent_id, AgentId::Dqn);
        let cfg = cfg.apply_override("env.force=5.0").unwrap();
        let EnvConfig::Cp(p) = &cfg.env else { panic!() };
        assert_eq!(p.force, 5.0);
        let cfg = cfg.apply_override("output = out/x").unwrap();
        assert_eq!(cfg.output, "out/x");
        assert!(cfg.clone().apply_override("agent.horizon").is_err());
        assert!(cfg.clone().apply_override("agent.no_such_key=1").is_err());
        let pd = cfg.apply_override("env.id=pd").unwrap();
        assert!(matches!(pd.env, EnvConfig::Pd(_)));
        assert!(pd.resolve().is_err());
    }

    #[test]
    fn pairing_and_ranges_are_checked() {
        let mut cfg = preset("cp").unwrap();
        cfg.agent_id = AgentId::Ddpg;
        assert!(cfg.clone().resolve().is_err());
        cfg.agent_id = AgentId::Q;
        assert!(cfg.clone().resolve().is_err());
        cfg.agent_id = AgentId::Dqn;
        let base = cfg.clone().resolve().unwrap();
        assert_eq!(base.agent.model, ModelKind::None);
        cfg.agent_id = AgentId::DqnMpc;
        cfg.agent.model = ModelKind::None;
        assert!(cfg.clone().resolve().is_err());
        let mut zero = preset("cw").unwrap();
        zero.trials = 0;
        assert!(zero.resolve().is_err());
    }

    #[test]
    fn files_may_start_from_a_preset() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.toml");
        std::fs::write(&path, "preset = \"pd\"\ntrials = 2\n[agent]\nhorizon = 3\n").unwrap();
        let cfg = load_config(path.to_str().unwrap()).unwrap();
        assert_eq!((cfg.trials, cfg.agent.horizon), (2, 3));
        assert_eq!(cfg.agent.lr_actor, Some(0.0003));
        let full = dir.path().join("full.toml");
        std::fs::write(&full, preset("cw").unwrap().to_toml().unwrap()).unwrap();
        assert_eq!(load_config(full.to_str().unwrap()).unwrap(), preset("cw").unwrap());
        assert!(load_config("/no/such/file.toml").is_err());
    }
}
