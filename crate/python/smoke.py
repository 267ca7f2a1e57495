"""Smoke test for the mpcrl Python extension.

Build and install first, e.g. `maturin develop -m crates/py/Cargo.toml`,
then run `python python/smoke.py`.
"""

import math
import os
import tempfile

import mpcrl


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol


def main():
    assert close(mpcrl.improvement_bound(1.0, 0.9, 1, 0.1, 0.05, 2), 32.0)
    best, curve = mpcrl.optimal_horizon(1.0, 0.9, 1, 0.1, 0.05, 5)
    assert best == curve[0][0] and len(curve) == 5

    ys = mpcrl.mpc_q_targets([1.0, 2.0], 10.0, False, 2, 0.5)
    assert close(ys[0], 1.0 + 0.5 * 2.0 + 0.25 * 10.0)
    assert close(ys[1], 2.0 + 0.5 * 10.0)
    assert close(mpcrl.td_target(1.0, False, 0.5, 4.0), 3.0)
    assert close(mpcrl.mpc_critic_loss(ys, ys, 0.5), 0.0)
    try:
        mpcrl.mpc_q_targets([], 0.0, False, 2, 0.5)
    except ValueError:
        pass
    else:
        raise AssertionError("empty branch accepted")

    env = mpcrl.Env("pd", seed=1, step_cap=5)
    kind, bounds = env.action_space
    assert kind == "box" and bounds == [2.0]
    obs = env.reset()
    assert len(obs) == env.observation_dim
    steps = 0
    while True:
        obs, reward, terminal, truncated = env.step([0.5])
        steps += 1
        assert math.isfinite(reward)
        if terminal or truncated:
            break
    assert steps == 5

    assert set(mpcrl.presets()) == {"cw", "cp", "pd", "uav"}
    assert 'agent_id = "dqn-mpc"' in mpcrl.preset_toml("cp")

    result = mpcrl.train("cw", ["agent.episodes=40"], seed=7, trials=2)
    assert len(result.returns) == 2 and len(result.mean) == 40
    assert all(g is not None for g in result.greedy_returns[0])
    again = mpcrl.train("cw", ["agent.episodes=40"], seed=7, trials=2)
    assert again.returns == result.returns

    cp = mpcrl.train(
        "cp",
        ["agent.episodes=2", "agent.steps_per_episode=20", "agent.batch_size=8", "eval_episodes=2"],
        trials=1,
    )
    policy = cp.policy(0)
    assert policy.kind == "dqn" and policy.env == "cp"
    assert policy.greedy_action(mpcrl.Env("cp").reset()) in (0, 1)
    with tempfile.TemporaryDirectory() as d:
        paths = cp.emit(d)
        assert any(p.endswith("manifest.toml") for p in map(str, paths))
        path = os.path.join(d, "policy_trial0.txt")
        loaded = mpcrl.Policy.load(path)
        assert loaded.evaluate("cp", episodes=2, step_cap=20) == policy.evaluate("cp", episodes=2, step_cap=20)
    print("python smoke test passed")


if __name__ == "__main__":
    main()
