use std::path::Path;
use std::process::{Command, Output};

fn mpcrl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mpcrl")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn bound_prints_the_reference_value() {
    let o = mpcrl(&[
        "bound", "--rmax", "1", "--gamma", "0.9", "--k", "1", "--eps-pi", "0.1", "--eps-m", "0.05",
        "--n-max", "4",
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    let row = out.lines().find(|l| l.split_whitespace().next() == Some("2")).unwrap();
    let c: f64 = row.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((c - 32.0).abs() < 1e-9, "{out}");
    assert!(out.contains("minimizing horizon: 1"), "{out}");
}

#[test]
fn bound_rejects_bad_discount() {
    let o = mpcrl(&[
        "bound", "--rmax", "1", "--gamma", "1", "--k", "1", "--eps-pi", "0.1", "--eps-m", "0.05",
        "--n-max", "3",
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn presets_list_and_show() {
    let o = mpcrl(&["presets"]);
    assert!(o.status.success());
    let out = stdout(&o);
    for name in ["cw", "cp", "pd", "uav"] {
        assert!(out.lines().any(|l| l.starts_with(name)), "{out}");
    }
    let o = mpcrl(&["presets", "pd"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("agent_id = \"ddpg-mpc\""));
    assert!(!mpcrl(&["presets", "nope"]).status.success());
}

fn train_small(dir: &Path, preset: &str, extra: &[&str]) -> Output {
    let out = dir.to_str().unwrap();
    let mut args = vec!["train", preset, "--trials", "2", "--seed", "3", "--out", out];
    args.extend_from_slice(extra);
    mpcrl(&args)
}

#[test]
fn train_then_eval_cartpole() {
    let dir = tempfile::tempdir().unwrap();
    let o = train_small(
        dir.path(),
        "cp",
        &[
            "--override", "agent.episodes=3",
            "--override", "agent.steps_per_episode=30",
            "--override", "agent.batch_size=8",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["trials.csv", "aggregate.csv", "manifest.toml", "policy_trial0.txt"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let manifest = std::fs::read_to_string(dir.path().join("manifest.toml")).unwrap();
    assert!(manifest.contains("seed = 3"));
    assert!(manifest.contains("episodes = 3"));

    let ckpt = dir.path().join("policy_trial0.txt");
    let o = mpcrl(&["eval", ckpt.to_str().unwrap(), "cp", "--episodes", "2", "--steps", "20"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.starts_with("episode")).count(), 2);
    assert!(out.contains("mean return"));
    let again = mpcrl(&["eval", ckpt.to_str().unwrap(), "cp", "--episodes", "2", "--steps", "20"]);
    assert_eq!(stdout(&again), out);
}

#[test]
fn train_then_eval_cliff() {
    let dir = tempfile::tempdir().unwrap();
    let o = train_small(dir.path(), "cw", &["--override", "agent.episodes=5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let ckpt = dir.path().join("policy_trial1.txt");
    let o = mpcrl(&["eval", ckpt.to_str().unwrap(), "cw", "--episodes", "1", "--steps", "50"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!mpcrl(&["eval", ckpt.to_str().unwrap(), "cp"]).status.success());
}

#[test]
fn bad_override_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = train_small(dir.path(), "cp", &["--override", "agent.no_such_key=1"]);
    assert!(!o.status.success());
    let o = train_small(dir.path(), "cp", &["--override", "missing-equals"]);
    assert!(!o.status.success());
}

#[test]
fn repeated_train_writes_identical_csvs() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let o = train_small(
            d.path(),
            "pd",
            &[
                "--override", "agent.episodes=2",
                "--override", "agent.steps_per_episode=40",
                "--override", "log_steps=true",
                "--override", "eval_episodes=1",
            ],
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["trials.csv", "aggregate.csv", "steps.csv", "evaluation.csv", "policy_trial1.txt"] {
        let a = std::fs::read(dirs[0].path().join(f)).unwrap();
        let b = std::fs::read(dirs[1].path().join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
}
