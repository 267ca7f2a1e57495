use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mpcrl::agents::{evaluate, PolicyCheckpoint, PolicyKind};
use mpcrl::analysis::{improvement_bound, optimal_horizon, BoundParams};
use mpcrl::envs::{CliffWalking, TabularEnv};
use mpcrl::harness::{self, EnvConfig, PRESETS};
use mpcrl::rng::streams;

#[derive(Parser)]
#[command(name = "mpcrl", version, about = "Model-based value estimation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train an agent over several seeded trials and write result files.
    Train(TrainArgs),
    /// Run a saved policy greedily on an environment.
    Eval(EvalArgs),
    /// Print the improvement bound and the horizon objective table.
    Bound(BoundArgs),
    /// List the built-in presets, or print one as TOML.
    Presets {
        /// Preset to print in full.
        name: Option<String>,
    },
}

#[derive(Args)]
struct TrainArgs {
    /// Preset name or path to a TOML config.
    config: String,
    /// Set a config value, e.g. `agent.horizon=3` (repeatable).
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Output directory (defaults to the config's `output`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    checkpoint: PathBuf,
    /// Environment id: cw, cp, pd or uav.
    env: String,
    #[arg(long, default_value_t = 10)]
    episodes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Step cap per episode.
    #[arg(long, default_value_t = 200)]
    steps: usize,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    rmax: f64,
    #[arg(long)]
    gamma: f64,
    #[arg(long)]
    k: u32,
    #[arg(long = "eps-pi")]
    eps_pi: f64,
    #[arg(long = "eps-m")]
    eps_m: f64,
    /// Largest horizon in the table.
    #[arg(long = "n-max")]
    n_max: u32,
}

fn train(args: TrainArgs) -> mpcrl::Result<()> {
    let mut cfg = harness::load_config(&args.config)?;
    for o in &args.overrides {
        cfg = cfg.apply_override(o)?;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    let out = args.out.unwrap_or_else(|| PathBuf::from(&cfg.output));
    cfg.output = out.display().to_string();
    let cfg = cfg.resolve()?;
    eprintln!(
        "training {:?} on {} for {} episodes x {} trials (seed {})",
        cfg.agent_id,
        cfg.env.id(),
        cfg.agent.episodes,
        cfg.trials,
        cfg.seed
    );
    let result = harness::run_experiment(&cfg)?;
    let files = harness::emit_results(&result, &out)?;
    let tail = result.curve.mean.len().min(20);
    let last: f64 = result.curve.mean[result.curve.mean.len() - tail..].iter().sum::<f64>() / tail as f64;
    println!("mean return over the last {tail} episodes: {last}");
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn eval(args: EvalArgs) -> mpcrl::Result<()> {
    let policy = PolicyCheckpoint::load(&args.checkpoint)?;
    if policy.env != args.env {
        eprintln!("note: policy was trained on {}, evaluating on {}", policy.env, args.env);
    }
    let returns = if policy.kind == PolicyKind::Tabular {
        if args.env != "cw" {
            return Err(mpcrl::Error::Config("tabular policies run on cw only".into()));
        }
        let mut env = CliffWalking::new();
        (0..args.episodes)
            .map(|_| {
                let mut s = env.reset();
                let mut total = 0.0;
                for _ in 0..args.steps {
                    let (ns, r, done) = env.step(policy.greedy_index(s)?);
                    total += r;
                    if done {
                        break;
                    }
                    s = ns;
                }
                Ok(total)
            })
            .collect::<mpcrl::Result<Vec<f64>>>()?
    } else {
        let mut cfg = EnvConfig::from_id(&args.env)?;
        if matches!(cfg, EnvConfig::Cw) {
            return Err(mpcrl::Error::Config("cw needs a tabular policy".into()));
        }
        cfg.set_step_cap(args.steps);
        let mut env = harness::make_env(&cfg, args.seed, streams::EVAL)?;
        evaluate(&policy, env.as_mut(), args.episodes)?.returns
    };
    for (i, r) in returns.iter().enumerate() {
        println!("episode {i}: {r}");
    }
    if returns.is_empty() {
        println!("no episodes requested");
    } else {
        println!("mean return: {}", returns.iter().sum::<f64>() / returns.len() as f64);
    }
    Ok(())
}

fn bound(args: BoundArgs) -> mpcrl::Result<()> {
    if args.n_max == 0 {
        return Err(mpcrl::Error::Domain("--n-max must be at least 1".into()));
    }
    let base = BoundParams {
        r_max: args.rmax,
        gamma: args.gamma,
        k: args.k,
        eps_pi: args.eps_pi,
        eps_m: args.eps_m,
        horizon: 1,
    };
    let candidates: Vec<u32> = (1..=args.n_max).collect();
    let report = optimal_horizon(&base, &candidates)?;
    println!("{:>4} {:>16} {:>16}", "N", "C", "f(N)");
    for &(n, f) in &report.curve {
        let c = improvement_bound(&BoundParams { horizon: n, ..base })?;
        println!("{n:>4} {c:>16.6} {f:>16.6}");
    }
    println!("minimizing horizon: {}", report.best);
    Ok(())
}

fn presets(name: Option<String>) -> mpcrl::Result<()> {
    match name {
        Some(n) => print!("{}", harness::preset(&n)?.to_toml()?),
        None => {
            for n in PRESETS {
                let p = harness::preset(n)?;
                println!(
                    "{n:<5} {:?} on {}, {} episodes, {} trials",
                    p.agent_id,
                    p.env.id(),
                    p.agent.episodes,
                    p.trials
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => train(a),
        Command::Eval(a) => eval(a),
        Command::Bound(a) => bound(a),
        Command::Presets { name } => presets(name),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
