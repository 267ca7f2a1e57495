//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Run a subset by passing criterion numbers:
//! `cargo test --test acceptance -- 1 2 9`.

use std::fs;
use std::time::{Duration, Instant};

use mpcrl::agents::{mpc_critic_loss, mpc_q_targets, td_target, Actor, Critic, CriticRow};
use mpcrl::analysis::{improvement_bound, optimal_horizon, BoundParams};
use mpcrl::approx::gradcheck::{central_difference, max_relative_error};
use mpcrl::envmodel::{EnvModel, ModelCodec, ModelGate, ModelLosses, ModelNets, VecTransition};
use mpcrl::envs::{uav_observe, uav_reward, uav_threat, Action, ActionSpace, UavParams, UavWorld};
use mpcrl::harness::{
    emit_results, episodes_to_threshold, preset, run_experiment, run_trial, trial_seeds,
    ExperimentConfig, TrialResult, AGGREGATE_CSV, EVAL_CSV, STEPS_CSV, TRIALS_CSV,
};
use mpcrl::rng::seeded;
use mpcrl::Transition;
use rand::Rng;

const CW_OPTIMUM: f64 = -13.0;
const CW_EPISODES: usize = 300;
const CW_MIN_SUCCESSES: usize = 3;
const CW_TIME_LIMIT: Duration = Duration::from_secs(30);
const CW_N6_SLACK: f64 = 1.1;

const MA_WINDOW: usize = 20;
const CP_THRESHOLD: f64 = 195.0;
const CP_MPC_BUFFER: usize = 5_000;
const CP_BASE_BUFFER: usize = 10_000;
const CP_RUN_LIMIT: Duration = Duration::from_secs(600);
const PD_THRESHOLD: f64 = -300.0;
const PD_RUN_LIMIT: Duration = Duration::from_secs(900);

const MODEL_EPS: f64 = 0.01;
const MODEL_SMOOTHING: f64 = 0.9;
const MODEL_STEP_FRACTION: f64 = 0.2;

const REDUCTION_BATCHES: usize = 1_000;
const REDUCTION_TOL: f64 = 1e-6;

const GRAD_INSTANCES: usize = 120;
const GRAD_TOL: f64 = 1e-4;

// relative; 1 - 0.9 is not exactly 0.1 in binary
const BOUND_TOL: f64 = 1e-12;
const BOUND_DRAWS: usize = 1_000;

const UAV_EPISODES: usize = 300;
const UAV_BASE_BUFFER: usize = 1_000_000;
const UAV_EVAL_EPISODES: usize = 10;
const UAV_FORMULA_TOL: f64 = 1e-9;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn configured(name: &str, overrides: &[&str]) -> ExperimentConfig {
    overrides
        .iter()
        .fold(preset(name).unwrap(), |c, o| c.apply_override(o).unwrap())
        .resolve()
        .unwrap()
}

/// Runs every trial of `cfg` one at a time, returning results and the
/// slowest single-run time.
fn timed_trials(cfg: &ExperimentConfig) -> (Vec<TrialResult>, Duration) {
    let mut slowest = Duration::ZERO;
    let trials = trial_seeds(cfg)
        .into_iter()
        .map(|seed| {
            let t0 = Instant::now();
            let r = run_trial(cfg, seed).unwrap();
            slowest = slowest.max(t0.elapsed());
            r
        })
        .collect();
    (trials, slowest)
}

/// Episodes until the moving average reaches `threshold`; runs that never
/// get there count as one past the budget.
fn episodes_needed(trials: &[TrialResult], threshold: f64) -> (Vec<Option<usize>>, f64) {
    let needed: Vec<Option<usize>> = trials
        .iter()
        .map(|t| {
            let r: Vec<f64> = t.episodes.iter().map(|e| e.total_reward).collect();
            episodes_to_threshold(&r, MA_WINDOW, threshold)
        })
        .collect();
    let mean = needed
        .iter()
        .zip(trials)
        .map(|(n, t)| n.unwrap_or(t.episodes.len() + 1) as f64)
        .sum::<f64>()
        / needed.len() as f64;
    (needed, mean)
}

fn cw_episodes_to_optimal(agent: &str, horizon: usize) -> (Vec<Option<usize>>, f64, Duration) {
    let cfg = configured(
        "cw",
        &[
            &format!("agent_id={agent}"),
            &format!("agent.horizon={horizon}"),
            &format!("agent.episodes={CW_EPISODES}"),
        ],
    );
    let t0 = Instant::now();
    let result = run_experiment(&cfg).unwrap();
    let elapsed = t0.elapsed();
    let firsts: Vec<Option<usize>> = result
        .trials
        .iter()
        .map(|t| {
            t.episodes
                .iter()
                .position(|e| e.greedy_return == Some(CW_OPTIMUM))
                .map(|i| i + 1)
        })
        .collect();
    let mean = firsts
        .iter()
        .map(|f| f.unwrap_or(CW_EPISODES + 1) as f64)
        .sum::<f64>()
        / firsts.len() as f64;
    (firsts, mean, elapsed)
}

fn criterion_1() -> Outcome {
    let (firsts, _, elapsed) = cw_episodes_to_optimal("dyna-mpc", 2);
    let hits = firsts.iter().filter(|f| f.is_some()).count();
    outcome(
        hits >= CW_MIN_SUCCESSES && elapsed < CW_TIME_LIMIT,
        format!("optimal greedy return in {hits}/4 trials {firsts:?}, {elapsed:.2?}"),
    )
}

fn criterion_2() -> Outcome {
    let (_, q, _) = cw_episodes_to_optimal("q", 1);
    let (_, mpc2, _) = cw_episodes_to_optimal("dyna-mpc", 2);
    let (_, mpc6, _) = cw_episodes_to_optimal("dyna-mpc", 6);
    outcome(
        mpc2 < q && mpc6 <= mpc2 * CW_N6_SLACK,
        format!("mean episodes to optimal: q {q}, dyna-mpc N=2 {mpc2}, N=6 {mpc6}"),
    )
}

struct Comparison {
    base: Vec<TrialResult>,
    mpc: Vec<TrialResult>,
    slowest: Duration,
}

fn compare(env: &str, base: &str, mpc: &str, base_buffer: usize, mpc_buffer: usize) -> Comparison {
    let run = |agent: &str, buffer: usize| {
        timed_trials(&configured(
            env,
            &[
                &format!("agent_id={agent}"),
                &format!("agent.buffer_size={buffer}"),
                "log_steps=true",
            ],
        ))
    };
    let (b, tb) = run(base, base_buffer);
    let (m, tm) = run(mpc, mpc_buffer);
    Comparison {
        base: b,
        mpc: m,
        slowest: tb.max(tm),
    }
}

fn efficiency(c: &Comparison, threshold: f64, limit: Duration) -> Outcome {
    let (nb, mb) = episodes_needed(&c.base, threshold);
    let (nm, mm) = episodes_needed(&c.mpc, threshold);
    outcome(
        mm < mb && c.slowest < limit,
        format!(
            "mean episodes to MA>={threshold}: mpc {mm} {nm:?} vs baseline {mb} {nb:?}; slowest run {:.0?}",
            c.slowest
        ),
    )
}

/// First logged step at which the smoothed gate losses fall below the
/// threshold, and the total number of steps.
fn model_convergence_step(trial: &TrialResult) -> (Option<usize>, usize) {
    let mut gate = ModelGate::new(MODEL_EPS, MODEL_SMOOTHING);
    let mut first = None;
    for (i, row) in trial.step_log.iter().enumerate() {
        if let (Some(state), Some(reward)) = (row.loss_model_state, row.loss_model_reward) {
            gate.observe(ModelLosses {
                state,
                reward,
                combined: row.loss_model_combined,
            });
            if gate.enabled() {
                first = Some(i + 1);
                break;
            }
        }
    }
    (first, trial.step_log.len())
}

fn criterion_5(cp: &Comparison, pd: &Comparison) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, c) in [("cp", cp), ("pd", pd)] {
        let fractions: Vec<String> = c
            .mpc
            .iter()
            .map(|t| {
                let (first, total) = model_convergence_step(t);
                match first {
                    Some(s) if (s as f64) <= MODEL_STEP_FRACTION * total as f64 => {
                        format!("{:.3}", s as f64 / total as f64)
                    }
                    Some(s) => {
                        pass = false;
                        format!("{:.3}!", s as f64 / total as f64)
                    }
                    None => {
                        pass = false;
                        "never".to_string()
                    }
                }
            })
            .collect();
        parts.push(format!("{name} step fractions [{}]", fractions.join(", ")));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_6() -> Outcome {
    let mut rng = seeded(6001);
    let mut worst = 0.0f64;
    for _ in 0..REDUCTION_BATCHES {
        let gamma: f64 = rng.random_range(0.0..0.999);
        let b = rng.random_range(1..=32);
        let mut mpc_loss = 0.0;
        let mut td_loss = 0.0;
        for _ in 0..b {
            let r: f64 = rng.random_range(-10.0..10.0);
            let done = rng.random_bool(0.2);
            let next_max: f64 = rng.random_range(-50.0..50.0);
            let q: f64 = rng.random_range(-50.0..50.0);
            let y_td = td_target(r, done, gamma, next_max);
            let y = mpc_q_targets(&[r], next_max, done, 1, gamma).unwrap();
            worst = worst.max((y[0] - y_td).abs());
            mpc_loss += mpc_critic_loss(&[q], &y, gamma).unwrap();
            td_loss += (q - y_td).powi(2);
        }
        let diff = (mpc_loss / b as f64 - td_loss / b as f64).abs();
        worst = worst.max(diff / td_loss.max(1.0));
    }
    outcome(
        worst <= REDUCTION_TOL,
        format!("{REDUCTION_BATCHES} batches, worst deviation {worst:.2e}"),
    )
}

fn criterion_7() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for (env, base, mpc, episodes) in [("cp", "dqn", "dqn-mpc", 30), ("pd", "ddpg", "ddpg-mpc", 15)] {
        let run = |agent: &str| {
            run_experiment(&configured(
                env,
                &[
                    &format!("agent_id={agent}"),
                    &format!("agent.episodes={episodes}"),
                    "agent.epsilon_m=0",
                    "trials=2",
                ],
            ))
            .unwrap()
        };
        let b = run(base);
        let m = run(mpc);
        let same = b.trials.len() == m.trials.len()
            && b.trials.iter().zip(&m.trials).all(|(x, y)| {
                x.episodes.len() == y.episodes.len()
                    && x.episodes.iter().zip(&y.episodes).all(|(p, q)| {
                        p.total_reward.to_bits() == q.total_reward.to_bits()
                            && p.steps == q.steps
                            && p.loss_q.map(f64::to_bits) == q.loss_q.map(f64::to_bits)
                    })
            })
            && m.trials
                .iter()
                .flat_map(|t| &t.episodes)
                .all(|e| e.gate_open_fraction.unwrap_or(0.0) == 0.0);
        pass &= same;
        parts.push(format!("{env}: {}", if same { "identical" } else { "differs" }));
    }
    outcome(pass, parts.join(", "))
}

fn random_state(rng: &mut impl Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-2.0..2.0)).collect()
}

fn critic_instance(seed: u64) -> f64 {
    let mut rng = seeded(seed);
    let discrete = seed % 2 == 0;
    let sd = rng.random_range(1..=4);
    let space = if discrete {
        ActionSpace::Discrete(rng.random_range(2..=4))
    } else {
        ActionSpace::Box {
            bounds: (0..rng.random_range(1..=3)).map(|_| rng.random_range(0.5..3.0)).collect(),
        }
    };
    let scale: Vec<f64> = (0..sd).map(|_| rng.random_range(0.5..2.0)).collect();
    let hidden = [rng.random_range(3..=7), rng.random_range(3..=7)];
    let critic = Critic::new(scale, space.clone(), &hidden, 0.01, 0.01, &mut rng).unwrap();
    let horizon = rng.random_range(1..=3);
    let gamma: f64 = rng.random_range(0.5..0.99);
    let rows: Vec<CriticRow> = (0..rng.random_range(2..=6) * horizon)
        .map(|i| CriticRow {
            state: random_state(&mut rng, sd),
            action: match &space {
                ActionSpace::Discrete(n) => Action::Discrete(rng.random_range(0..*n)),
                ActionSpace::Box { bounds } => {
                    Action::Continuous(bounds.iter().map(|b| rng.random_range(-b..*b)).collect())
                }
            },
            target: rng.random_range(-3.0..3.0),
            weight: gamma.powi((i % horizon) as i32),
        })
        .collect();
    let batch = rows.len() / horizon;
    let (_, grad) = critic.loss_and_grad(&rows, batch).unwrap();
    let numeric = central_difference(critic.online.params(), 1e-6, |p| {
        let mut c = critic.clone();
        c.online.params_mut().copy_from_slice(p);
        c.loss_and_grad(&rows, batch).unwrap().0
    });
    max_relative_error(&grad, &numeric, 1e-7)
}

fn actor_instance(seed: u64) -> f64 {
    let mut rng = seeded(seed);
    let sd = rng.random_range(1..=4);
    let bounds: Vec<f64> = (0..rng.random_range(1..=3)).map(|_| rng.random_range(0.5..3.0)).collect();
    let scale: Vec<f64> = (0..sd).map(|_| rng.random_range(0.5..2.0)).collect();
    let space = ActionSpace::Box { bounds: bounds.clone() };
    let critic = Critic::new(scale.clone(), space, &[rng.random_range(3..=8)], 0.01, 0.01, &mut rng).unwrap();
    let mut actor = Actor::new(scale, bounds, &[rng.random_range(3..=8)], 0.01, 0.01, &mut rng).unwrap();
    actor.online.scale_last_layer(10.0);
    let states: Vec<Vec<f64>> = (0..rng.random_range(2..=6)).map(|_| random_state(&mut rng, sd)).collect();
    let refs: Vec<&[f64]> = states.iter().map(|s| s.as_slice()).collect();
    let (_, grad) = actor.loss_and_grad(&critic, &refs).unwrap();
    let numeric = central_difference(actor.online.params(), 1e-6, |p| {
        let mut a = actor.clone();
        a.online.params_mut().copy_from_slice(p);
        a.loss_and_grad(&critic, &refs).unwrap().0
    });
    max_relative_error(&grad, &numeric, 1e-7)
}

fn model_instance(seed: u64) -> f64 {
    let mut rng = seeded(seed);
    let sd = rng.random_range(1..=3);
    let combined = seed % 2 == 0;
    let space = if seed % 3 == 0 {
        ActionSpace::Discrete(rng.random_range(2..=3))
    } else {
        ActionSpace::Box {
            bounds: vec![rng.random_range(0.5..2.0)],
        }
    };
    let mut codec = ModelCodec::identity(sd, space.clone());
    codec.state_scale = (0..sd).map(|_| rng.random_range(0.5..2.0)).collect();
    codec.reward_scale = rng.random_range(0.5..4.0);
    codec.residual = rng.random_bool(0.5);
    let hidden = [rng.random_range(3..=6)];
    let model = if combined {
        EnvModel::combined(codec, &hidden, rng.random_range(0.1..3.0), &mut rng).unwrap()
    } else {
        EnvModel::separate(codec, &hidden, &mut rng).unwrap()
    };
    let batch: Vec<VecTransition> = (0..rng.random_range(2..=6))
        .map(|_| {
            let a = match &space {
                ActionSpace::Discrete(n) => Action::Discrete(rng.random_range(0..*n)),
                ActionSpace::Box { bounds } => Action::Continuous(vec![rng.random_range(-bounds[0]..bounds[0])]),
            };
            Transition::new(
                random_state(&mut rng, sd),
                a,
                rng.random_range(-2.0..2.0),
                random_state(&mut rng, sd),
                false,
            )
            .unwrap()
        })
        .collect();
    let refs: Vec<&VecTransition> = batch.iter().collect();
    let (_, grads) = model.loss_gradients(&refs).unwrap();
    let params: Vec<Vec<f64>> = match &model.nets {
        ModelNets::Separate(m) => vec![m.dynamics.params().to_vec(), m.reward.params().to_vec()],
        ModelNets::Combined(m) => vec![m.net.params().to_vec()],
    };
    let mut worst = 0.0f64;
    for (k, p0) in params.iter().enumerate() {
        let numeric = central_difference(p0, 1e-5, |p| {
            let mut m = model.clone();
            match &mut m.nets {
                ModelNets::Separate(s) if k == 0 => s.dynamics.params_mut().copy_from_slice(p),
                ModelNets::Separate(s) => s.reward.params_mut().copy_from_slice(p),
                ModelNets::Combined(c) => c.net.params_mut().copy_from_slice(p),
            }
            let l = m.losses(&refs).unwrap();
            match (l.combined, k) {
                (Some(c), _) => c,
                (None, 0) => l.state,
                (None, _) => l.reward,
            }
        });
        worst = worst.max(max_relative_error(&grads[k], &numeric, 1e-7));
    }
    worst
}

fn criterion_8() -> Outcome {
    let per = GRAD_INSTANCES / 3;
    let worst = |f: fn(u64) -> f64, base: u64| (0..per as u64).map(|i| f(base + i)).fold(0.0, f64::max);
    let c = worst(critic_instance, 8000);
    let a = worst(actor_instance, 8100);
    let m = worst(model_instance, 8200);
    outcome(
        c.max(a).max(m) < GRAD_TOL,
        format!("{GRAD_INSTANCES} instances, worst rel. err critic {c:.1e}, actor {a:.1e}, model {m:.1e}"),
    )
}

fn criterion_9() -> Outcome {
    let example = BoundParams {
        r_max: 1.0,
        gamma: 0.9,
        k: 1,
        eps_pi: 0.1,
        eps_m: 0.05,
        horizon: 2,
    };
    let c = improvement_bound(&example).unwrap();
    let exact = (c - 32.0).abs() <= BOUND_TOL * 32.0;
    let mut rng = seeded(9001);
    let mut violations = 0;
    for _ in 0..BOUND_DRAWS {
        let p = BoundParams {
            r_max: rng.random_range(0.0..10.0),
            gamma: rng.random_range(0.0..0.99),
            k: rng.random_range(0..5),
            eps_pi: rng.random_range(0.0..1.0),
            eps_m: rng.random_range(0.0..1.0),
            horizon: rng.random_range(1..10),
        };
        let base = improvement_bound(&p).unwrap();
        let bumped = [
            BoundParams { r_max: p.r_max + 0.5, ..p },
            BoundParams { eps_pi: p.eps_pi + 0.05, ..p },
            BoundParams { eps_m: p.eps_m + 0.05, ..p },
            BoundParams { horizon: p.horizon + 1, ..p },
        ];
        if bumped.iter().any(|q| improvement_bound(q).unwrap() < base) {
            violations += 1;
        }
        let candidates: Vec<u32> = (1..=6).collect();
        let report = optimal_horizon(&p, &candidates).unwrap();
        if report.curve.windows(2).any(|w| w[1].1 < w[0].1) {
            violations += 1;
        }
    }
    outcome(
        exact && violations == 0,
        format!("C = {c}, {violations} monotonicity violations over {BOUND_DRAWS} draws"),
    )
}

fn world(p_u: [f64; 3], p_o: [f64; 3], p_e: [f64; 3], p_s: [f64; 3]) -> UavWorld {
    UavWorld {
        p_u,
        p_o,
        p_e,
        p_s,
        v_o: [0.0; 3],
        heading: [1.0, 0.0, 0.0],
        steps: 0,
        params: UavParams::default(),
    }
}

fn uav_formula_errors() -> f64 {
    let obs = uav_observe(&world([0.0; 3], [3.2, 0.0, 0.0], [5.0, 5.0, 0.0], [0.0; 3])).unwrap();
    let e_obs = (obs[0] - 1.6).abs() + obs[1].abs() + obs[2].abs();
    let collision = uav_reward(&world([0.0; 3], [0.8, 0.0, 0.0], [5.0, 0.0, 0.0], [0.0; 3]));
    let e_col = (collision - (-1.5)).abs();
    let open = uav_reward(&world([0.0; 3], [0.0, 8.0, 0.0], [5.0, 0.0, 0.0], [-5.0, 0.0, 0.0]));
    let e_open = (open - (-0.5)).abs();
    let threat = uav_threat(&UavParams::default(), 1.9);
    let e_thr = (threat - (-0.35)).abs();
    e_obs.max(e_col).max(e_open).max(e_thr)
}

fn criterion_10() -> Outcome {
    let formula_err = uav_formula_errors();
    let run = |agent: &str, buffer: usize| {
        run_experiment(&configured(
            "uav",
            &[
                &format!("agent_id={agent}"),
                &format!("agent.buffer_size={buffer}"),
                &format!("agent.episodes={UAV_EPISODES}"),
                &format!("eval_episodes={UAV_EVAL_EPISODES}"),
            ],
        ))
        .unwrap()
    };
    let mean_eval = |r: &mpcrl::harness::ExperimentResult| {
        let all: Vec<f64> = r
            .trials
            .iter()
            .flat_map(|t| t.evaluation.as_ref().unwrap().returns.clone())
            .collect();
        all.iter().sum::<f64>() / all.len() as f64
    };
    let base = mean_eval(&run("ddpg", UAV_BASE_BUFFER));
    let mpc = mean_eval(&run("ddpg-mpc", UAV_BASE_BUFFER / 10));
    outcome(
        mpc >= base && formula_err <= UAV_FORMULA_TOL,
        format!("mean evaluation return mpc {mpc:.3} vs ddpg {base:.3}; formula error {formula_err:.1e}"),
    )
}

fn criterion_11() -> Outcome {
    let mut mismatched = Vec::new();
    for name in ["cw", "cp", "pd", "uav"] {
        let cfg = configured(
            name,
            &[
                "agent.episodes=3",
                "agent.steps_per_episode=40",
                "trials=2",
                "eval_episodes=2",
                "log_steps=true",
            ],
        );
        let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
        for d in &dirs {
            emit_results(&run_experiment(&cfg).unwrap(), d.path()).unwrap();
        }
        for file in [TRIALS_CSV, AGGREGATE_CSV, EVAL_CSV, STEPS_CSV] {
            let read = |i: usize| fs::read(dirs[i].path().join(file)).ok();
            if read(0) != read(1) {
                mismatched.push(format!("{name}/{file}"));
            }
        }
    }
    outcome(
        mismatched.is_empty(),
        if mismatched.is_empty() {
            "repeated runs wrote byte-identical CSVs for every preset".to_string()
        } else {
            format!("differing files: {}", mismatched.join(", "))
        },
    )
}

fn main() {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wanted = |n: u32| selected.is_empty() || selected.contains(&n);
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut record = |n: u32, name: &'static str, o: Outcome| {
        println!(
            "criterion {n:>2} {name:<28} {} {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        results.push((n, name, o));
    };

    for (n, name, f) in [
        (6, "n=1 reduction", criterion_6 as fn() -> Outcome),
        (8, "gradient suite", criterion_8),
        (9, "bound checks", criterion_9),
        (1, "cw optimality", criterion_1),
        (2, "cw ordering", criterion_2),
        (7, "gate-closed ablation", criterion_7),
        (11, "reproducibility", criterion_11),
    ] {
        if wanted(n) {
            record(n, name, f());
        }
    }
    let cp = (wanted(3) || wanted(5)).then(|| compare("cp", "dqn", "dqn-mpc", CP_BASE_BUFFER, CP_MPC_BUFFER));
    if let (true, Some(c)) = (wanted(3), &cp) {
        record(3, "cp efficiency", efficiency(c, CP_THRESHOLD, CP_RUN_LIMIT));
    }
    let pd = (wanted(4) || wanted(5)).then(|| {
        let buffer = preset("pd").unwrap().agent.buffer_size.unwrap();
        compare("pd", "ddpg", "ddpg-mpc", buffer, buffer)
    });
    if let (true, Some(c)) = (wanted(4), &pd) {
        record(4, "pd efficiency", efficiency(c, PD_THRESHOLD, PD_RUN_LIMIT));
    }
    if let (true, Some(c), Some(p)) = (wanted(5), &cp, &pd) {
        record(5, "model convergence", criterion_5(c, p));
    }
    if wanted(10) {
        record(10, "uav directional claim", criterion_10());
    }

    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {} of {} criteria passed",
        results.len() - failed.len(),
        results.len()
    );
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
