//! Python bindings: environments, experiments, saved policies and the
//! analysis helpers.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use ::mpcrl::agents::{self, GreedyPolicy, PolicyCheckpoint, PolicyKind};
use ::mpcrl::analysis::{self, BoundParams};
use ::mpcrl::envs::{Action, ActionSpace, CliffWalking, Environment, TabularEnv};
use ::mpcrl::harness::{self, EnvConfig};
use ::mpcrl::rng::streams;
use ::mpcrl::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

#[derive(FromPyObject, IntoPyObject)]
enum PyAction {
    Discrete(usize),
    Continuous(Vec<f64>),
}

impl From<PyAction> for Action {
    fn from(a: PyAction) -> Self {
        match a {
            PyAction::Discrete(i) => Action::Discrete(i),
            PyAction::Continuous(v) => Action::Continuous(v),
        }
    }
}

impl From<Action> for PyAction {
    fn from(a: Action) -> Self {
        match a {
            Action::Discrete(i) => PyAction::Discrete(i),
            Action::Continuous(v) => PyAction::Continuous(v),
        }
    }
}

fn env_config(id: &str, step_cap: Option<usize>) -> PyResult<EnvConfig> {
    let mut cfg = EnvConfig::from_id(id).map_err(py_err)?;
    if let Some(cap) = step_cap {
        cfg.set_step_cap(cap);
    }
    Ok(cfg)
}

/// A seeded vector-observation environment: "cp", "pd" or "uav".
#[pyclass(unsendable)]
struct Env {
    inner: Box<dyn Environment>,
}

#[pymethods]
impl Env {
    #[new]
    #[pyo3(signature = (id, seed = 0, step_cap = None))]
    fn new(id: &str, seed: u64, step_cap: Option<usize>) -> PyResult<Self> {
        let cfg = env_config(id, step_cap)?;
        let inner = harness::make_env(&cfg, seed, streams::ENV).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn name(&self) -> &'static str {
        self.inner.name()
    }

    #[getter]
    fn observation_dim(&self) -> usize {
        self.inner.observation_dim()
    }

    /// `("discrete", n)` or `("box", bounds)`.
    #[getter]
    fn action_space(&self) -> (&'static str, Vec<f64>) {
        match self.inner.action_space() {
            ActionSpace::Discrete(n) => ("discrete", vec![n as f64]),
            ActionSpace::Box { bounds } => ("box", bounds),
        }
    }

    fn reset(&mut self) -> Vec<f64> {
        self.inner.reset()
    }

    /// Returns `(observation, reward, terminal, truncated)`.
    fn step(&mut self, action: PyAction) -> PyResult<(Vec<f64>, f64, bool, bool)> {
        let s = self.inner.step(&action.into()).map_err(py_err)?;
        Ok((s.observation, s.reward, s.terminal, s.truncated))
    }
}

/// A trained greedy policy.
#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct Policy {
    inner: PolicyCheckpoint,
}

#[pymethods]
impl Policy {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self { inner: PolicyCheckpoint::load(&path).map_err(py_err)? })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save(&path).map_err(py_err)
    }

    #[getter]
    fn kind(&self) -> &'static str {
        match self.inner.kind {
            PolicyKind::Dqn => "dqn",
            PolicyKind::Ddpg => "ddpg",
            PolicyKind::Tabular => "tabular",
        }
    }

    #[getter]
    fn env(&self) -> String {
        self.inner.env.clone()
    }

    /// Greedy action for an observation vector, or for a state index when
    /// the policy is tabular.
    fn greedy_action(&self, observation: PyAction) -> PyResult<PyAction> {
        match observation {
            PyAction::Discrete(s) => Ok(PyAction::Discrete(self.inner.greedy_index(s).map_err(py_err)?)),
            PyAction::Continuous(obs) => Ok(self.inner.greedy_action(&obs).map_err(py_err)?.into()),
        }
    }

    /// Undiscounted returns of greedy episodes.
    #[pyo3(signature = (env, episodes = 10, seed = 0, step_cap = 200))]
    fn evaluate(&self, env: &str, episodes: usize, seed: u64, step_cap: usize) -> PyResult<Vec<f64>> {
        if self.inner.kind == PolicyKind::Tabular {
            if env != "cw" {
                return Err(PyValueError::new_err("tabular policies run on cw only"));
            }
            let mut cw = CliffWalking::new();
            return (0..episodes)
                .map(|_| {
                    let mut s = cw.reset();
                    let mut total = 0.0;
                    for _ in 0..step_cap {
                        let (ns, r, done) = cw.step(self.inner.greedy_index(s).map_err(py_err)?);
                        total += r;
                        if done {
                            break;
                        }
                        s = ns;
                    }
                    Ok(total)
                })
                .collect();
        }
        let cfg = env_config(env, Some(step_cap))?;
        let mut e = harness::make_env(&cfg, seed, streams::EVAL).map_err(py_err)?;
        Ok(agents::evaluate(&self.inner, e.as_mut(), episodes).map_err(py_err)?.returns)
    }
}

/// Learning curves, evaluations and policies of a finished experiment.
#[pyclass]
struct ExperimentResult {
    inner: harness::ExperimentResult,
}

#[pymethods]
impl ExperimentResult {
    /// Per-trial training returns, one list per trial.
    #[getter]
    fn returns(&self) -> Vec<Vec<f64>> {
        self.inner.curve.returns.clone()
    }

    #[getter]
    fn mean(&self) -> Vec<f64> {
        self.inner.curve.mean.clone()
    }

    #[getter]
    fn std(&self) -> Vec<f64> {
        self.inner.curve.std.clone()
    }

    #[getter]
    fn seeds(&self) -> Vec<u64> {
        self.inner.trials.iter().map(|t| t.seed).collect()
    }

    /// Evaluation returns per trial (empty lists when evaluation was off).
    #[getter]
    fn evaluation(&self) -> Vec<Vec<f64>> {
        self.inner
            .trials
            .iter()
            .map(|t| t.evaluation.as_ref().map(|e| e.returns.clone()).unwrap_or_default())
            .collect()
    }

    /// Greedy returns after each episode, for tabular runs.
    #[getter]
    fn greedy_returns(&self) -> Vec<Vec<Option<f64>>> {
        self.inner
            .trials
            .iter()
            .map(|t| t.episodes.iter().map(|e| e.greedy_return).collect())
            .collect()
    }

    fn policy(&self, trial: usize) -> PyResult<Policy> {
        let t = self
            .inner
            .trials
            .get(trial)
            .ok_or_else(|| PyValueError::new_err(format!("no trial {trial}")))?;
        Ok(Policy { inner: t.policy.clone() })
    }

    fn config_toml(&self) -> PyResult<String> {
        self.inner.config.to_toml().map_err(py_err)
    }

    /// Writes the result files and returns their paths.
    fn emit(&self, dir: PathBuf) -> PyResult<Vec<PathBuf>> {
        harness::emit_results(&self.inner, &dir).map_err(py_err)
    }
}

/// Trains a preset or TOML config. Overrides use `key=value` syntax.
#[pyfunction]
#[pyo3(signature = (config, overrides = Vec::new(), seed = None, trials = None))]
fn train(
    py: Python<'_>,
    config: &str,
    overrides: Vec<String>,
    seed: Option<u64>,
    trials: Option<usize>,
) -> PyResult<ExperimentResult> {
    let mut cfg = harness::load_config(config).map_err(py_err)?;
    for o in &overrides {
        cfg = cfg.apply_override(o).map_err(py_err)?;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(t) = trials {
        cfg.trials = t;
    }
    let inner = py.detach(|| harness::run_experiment(&cfg)).map_err(py_err)?;
    Ok(ExperimentResult { inner })
}

#[pyfunction]
fn presets() -> Vec<&'static str> {
    harness::PRESETS.to_vec()
}

#[pyfunction]
fn preset_toml(name: &str) -> PyResult<String> {
    harness::preset(name).and_then(|p| p.to_toml()).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (r_max, gamma, k, eps_pi, eps_m, horizon))]
fn improvement_bound(r_max: f64, gamma: f64, k: u32, eps_pi: f64, eps_m: f64, horizon: u32) -> PyResult<f64> {
    analysis::improvement_bound(&BoundParams { r_max, gamma, k, eps_pi, eps_m, horizon }).map_err(py_err)
}

/// Returns `(best_horizon, [(horizon, objective), ...])` over `1..=n_max`.
#[pyfunction]
#[pyo3(signature = (r_max, gamma, k, eps_pi, eps_m, n_max))]
fn optimal_horizon(
    r_max: f64,
    gamma: f64,
    k: u32,
    eps_pi: f64,
    eps_m: f64,
    n_max: u32,
) -> PyResult<(u32, Vec<(u32, f64)>)> {
    let p = BoundParams { r_max, gamma, k, eps_pi, eps_m, horizon: 1 };
    let candidates: Vec<u32> = (1..=n_max).collect();
    let r = analysis::optimal_horizon(&p, &candidates).map_err(py_err)?;
    Ok((r.best, r.curve))
}

#[pyfunction]
fn td_target(reward: f64, done: bool, gamma: f64, next_value: f64) -> f64 {
    agents::td_target(reward, done, gamma, next_value)
}

#[pyfunction]
fn mpc_q_targets(rewards: Vec<f64>, tip_value: f64, terminal: bool, horizon: usize, gamma: f64) -> PyResult<Vec<f64>> {
    agents::mpc_q_targets(&rewards, tip_value, terminal, horizon, gamma).map_err(py_err)
}

#[pyfunction]
fn mpc_critic_loss(q: Vec<f64>, targets: Vec<f64>, gamma: f64) -> PyResult<f64> {
    agents::mpc_critic_loss(&q, &targets, gamma).map_err(py_err)
}

#[pyfunction]
fn episodes_to_threshold(returns: Vec<f64>, window: usize, threshold: f64) -> Option<usize> {
    harness::episodes_to_threshold(&returns, window, threshold)
}

#[pymodule(name = "mpcrl")]
fn mpcrl_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Env>()?;
    m.add_class::<Policy>()?;
    m.add_class::<ExperimentResult>()?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(presets, m)?)?;
    m.add_function(wrap_pyfunction!(preset_toml, m)?)?;
    m.add_function(wrap_pyfunction!(improvement_bound, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_horizon, m)?)?;
    m.add_function(wrap_pyfunction!(td_target, m)?)?;
    m.add_function(wrap_pyfunction!(mpc_q_targets, m)?)?;
    m.add_function(wrap_pyfunction!(mpc_critic_loss, m)?)?;
    m.add_function(wrap_pyfunction!(episodes_to_threshold, m)?)?;
    Ok(())
}
