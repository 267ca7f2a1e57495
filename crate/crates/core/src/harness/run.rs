//! Seeded multi-trial runs and learning-curve aggregation.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use super::config::{AgentId, EnvConfig, ExperimentConfig};
use crate::agents::{evaluate, DeepAgent, DeepKind, EpisodeRecord, Evaluation, PolicyCheckpoint};
use crate::envs::{CartPole, CliffWalking, Environment, Pendulum, TabularEnv, Uav};
use crate::error::{Error, Result};
use crate::mdp::Discount;
use crate::rng::{streams, substream, trial_seed};
use crate::tabular::{greedy_return, TabularAgent, TabularAlgorithm};

/// One line of the optional per-step log.
#[derive(Debug, Clone, PartialEq)]
pub struct StepLogRow {
    pub episode: usize,
    pub step: usize,
    pub episode_return: f64,
    pub loss_q: Option<f64>,
    pub loss_model_state: Option<f64>,
    pub loss_model_reward: Option<f64>,
    pub loss_model_combined: Option<f64>,
    pub gate_open: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub seed: u64,
    pub episodes: Vec<EpisodeRecord>,
    pub evaluation: Option<Evaluation>,
    pub policy: PolicyCheckpoint,
    pub step_log: Vec<StepLogRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearningCurve {
    /// Per-trial episode returns.
    pub returns: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub trials: Vec<TrialResult>,
    pub curve: LearningCurve,
}

/// Elementwise mean and population standard deviation across trials.
pub fn aggregate_trials(curves: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>)> {
    let first = curves.first().ok_or(Error::InsufficientSamples {
        requested: 1,
        available: 0,
    })?;
    let len = first.len();
    if let Some(bad) = curves.iter().find(|c| c.len() != len) {
        return Err(Error::shape(format!("{len} episodes per trial"), bad.len()));
    }
    let n = curves.len() as f64;
    let mut mean = vec![0.0; len];
    let mut std = vec![0.0; len];
    for e in 0..len {
        let m = curves.iter().map(|c| c[e]).sum::<f64>() / n;
        let var = curves.iter().map(|c| (c[e] - m) * (c[e] - m)).sum::<f64>() / n;
        mean[e] = m;
        std[e] = var.sqrt();
    }
    Ok((mean, std))
}

/// Builds a vector-observation environment seeded from `seed`.
/// Number of episodes after which the trailing `window`-episode average of
/// `returns` first reaches `threshold`. Averages over fewer than `window`
/// episodes do not count.
pub fn episodes_to_threshold(returns: &[f64], window: usize, threshold: f64) -> Option<usize> {
    if window == 0 || returns.len() < window {
        return None;
    }
    let mut sum: f64 = returns[..window].iter().sum();
    if sum / window as f64 >= threshold {
        return Some(window);
    }
    for i in window..returns.len() {
        sum += returns[i] - returns[i - window];
        if sum / window as f64 >= threshold {
            return Some(i + 1);
        }
    }
    None
}

pub fn make_env(env: &EnvConfig, seed: u64, stream: u64) -> Result<Box<dyn Environment>> {
    let rng = substream(seed, stream);
    Ok(match env {
        EnvConfig::Cp(p) => Box::new(CartPole::new(p.clone(), rng)),
        EnvConfig::Pd(p) => Box::new(Pendulum::new(p.clone(), rng)),
        EnvConfig::Uav(p) => Box::new(Uav::new(p.clone(), rng)),
        EnvConfig::Cw => {
            return Err(Error::Config("cliff walking is a tabular environment".into()))
        }
    })
}

fn tabular_trial(cfg: &ExperimentConfig, seed: u64) -> Result<TrialResult> {
    let a = &cfg.agent;
    let algorithm = match cfg.agent_id {
        AgentId::Q => TabularAlgorithm::QLearning,
        AgentId::Ntd => TabularAlgorithm::NStepTd { n: a.horizon },
        AgentId::DynaQ => TabularAlgorithm::DynaQ {
            planning_steps: a.planning_steps.unwrap_or(0),
        },
        AgentId::DynaMpc => TabularAlgorithm::DynaMpc { horizon: a.horizon },
        other => return Err(Error::Config(format!("{other:?} is not a tabular agent"))),
    };
    let mut env = CliffWalking::new();
    let mut agent = TabularAgent::new(
        env.num_states(),
        env.num_actions(),
        algorithm,
        a.lr_critic,
        a.epsilon.unwrap_or(0.0),
        Discount::new(a.gamma)?,
    )?;
    let mut rng = substream(seed, streams::AGENT);
    let episodes = (0..a.episodes)
        .map(|_| {
            let ep = agent.run_episode(&mut env, &mut rng, a.steps_per_episode);
            EpisodeRecord {
                total_reward: ep.total_reward,
                steps: ep.steps,
                greedy_return: Some(greedy_return(&mut env, &agent.q, a.steps_per_episode)),
                ..EpisodeRecord::default()
            }
        })
        .collect();
    let evaluation = (cfg.eval_episodes > 0).then(|| Evaluation {
        returns: (0..cfg.eval_episodes)
            .map(|_| greedy_return(&mut env, &agent.q, a.steps_per_episode))
            .collect(),
    });
    Ok(TrialResult {
        seed,
        episodes,
        evaluation,
        policy: PolicyCheckpoint::from_table(&agent.q, cfg.env.id())?,
        step_log: Vec::new(),
    })
}

fn deep_trial(cfg: &ExperimentConfig, seed: u64) -> Result<TrialResult> {
    let kind = match cfg.agent_id {
        AgentId::Dqn | AgentId::DqnMpc => DeepKind::Dqn,
        AgentId::Ddpg | AgentId::DdpgMpc => DeepKind::Ddpg,
        other => return Err(Error::Config(format!("{other:?} is not a replay agent"))),
    };
    let mut env = make_env(&cfg.env, seed, streams::ENV)?;
    let mut agent = DeepAgent::new(kind, cfg.agent.clone(), env.as_ref(), seed)?;
    let mut episodes = Vec::with_capacity(cfg.agent.episodes);
    let mut step_log = Vec::new();
    for e in 0..cfg.agent.episodes {
        let mut step = 0;
        let mut ret = 0.0;
        let mut log = |r: &crate::agents::StepReport| {
            if !cfg.log_steps {
                return;
            }
            step += 1;
            ret += r.transition.reward;
            let m = r.update.and_then(|u| u.model);
            step_log.push(StepLogRow {
                episode: e,
                step,
                episode_return: ret,
                loss_q: r.update.map(|u| u.loss_q),
                loss_model_state: m.map(|m| m.state),
                loss_model_reward: m.map(|m| m.reward),
                loss_model_combined: m.and_then(|m| m.combined),
                gate_open: r.update.filter(|u| u.model.is_some()).map(|u| u.gate_open),
            });
        };
        episodes.push(agent.run_episode_with(env.as_mut(), &mut log)?);
    }
    let evaluation = if cfg.eval_episodes > 0 {
        let mut eval_env = make_env(&cfg.env, seed, streams::EVAL)?;
        Some(evaluate(&agent, eval_env.as_mut(), cfg.eval_episodes)?)
    } else {
        None
    };
    Ok(TrialResult {
        seed,
        episodes,
        evaluation,
        policy: PolicyCheckpoint::from_agent(&agent, cfg.env.id()),
        step_log,
    })
}

/// Runs one trial with an explicit seed.
pub fn run_trial(cfg: &ExperimentConfig, seed: u64) -> Result<TrialResult> {
    if cfg.agent_id.is_tabular() {
        tabular_trial(cfg, seed)
    } else {
        deep_trial(cfg, seed)
    }
}

/// Seeds of every trial of `cfg`.
pub fn trial_seeds(cfg: &ExperimentConfig) -> Vec<u64> {
    (0..cfg.trials as u64).map(|i| trial_seed(cfg.seed, i)).collect()
}

/// Runs all trials, in parallel when the machine allows, and aggregates
/// their learning curves. Results do not depend on scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let cfg = cfg.clone().resolve()?;
    let seeds = trial_seeds(&cfg);
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(seeds.len());
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<TrialResult>>>> =
        Mutex::new((0..seeds.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= seeds.len() {
                    break;
                }
                let r = run_trial(&cfg, seeds[i]);
                slots.lock().unwrap()[i] = Some(r);
            });
        }
    });
    let trials = slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every trial slot is filled"))
        .collect::<Result<Vec<_>>>()?;
    let returns: Vec<Vec<f64>> = trials
        .iter()
        .map(|t| t.episodes.iter().map(|e| e.total_reward).collect())
        .collect();
    let (mean, std) = aggregate_trials(&returns)?;
    Ok(ExperimentResult {
        config: cfg,
        trials,
        curve: LearningCurve { returns, mean, std },
    })
}
