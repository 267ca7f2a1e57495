//! Regression targets and weighted losses for value learning.

use crate::error::{Error, Result};

/// One-step target `r + gamma * next_value`, without bootstrap on `done`.
pub fn td_target(reward: f64, done: bool, gamma: f64, next_value: f64) -> f64 {
    if done {
        reward
    } else {
        reward + gamma * next_value
    }
}

/// Targets `y_{k+n}` for every step of a predicted branch.
///
/// `rewards` holds the predicted rewards along the branch and `tip_value`
/// the target-network value at the branch tip. A branch ending in a
/// termination state may be shorter than `horizon` and does not bootstrap;
/// any other short branch is rejected.
pub fn mpc_q_targets(
    rewards: &[f64],
    tip_value: f64,
    terminal: bool,
    horizon: usize,
    gamma: f64,
) -> Result<Vec<f64>> {
    let len = rewards.len();
    if len > horizon {
        return Err(Error::shape(format!("at most {horizon} predicted steps"), len));
    }
    if len == 0 || (len < horizon && !terminal) {
        return Err(Error::TruncatedBranch {
            expected: horizon,
            got: len,
        });
    }
    let mut targets = vec![0.0; len];
    let mut next = if terminal { 0.0 } else { tip_value };
    for n in (0..len).rev() {
        next = rewards[n] + gamma * next;
        targets[n] = next;
    }
    Ok(targets)
}

/// `sum_n gamma^n (q_n - y_n)^2` for one branch.
pub fn mpc_critic_loss(q: &[f64], targets: &[f64], gamma: f64) -> Result<f64> {
    if q.len() != targets.len() {
        return Err(Error::shape(targets.len(), q.len()));
    }
    let mut w = 1.0;
    let mut total = 0.0;
    for (qi, yi) in q.iter().zip(targets) {
        total += w * (qi - yi) * (qi - yi);
        w *= gamma;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn td_examples() {
        assert_eq!(td_target(1.0, true, 0.9, 100.0), 1.0);
        assert_eq!(td_target(1.0, false, 0.0, 100.0), 1.0);
        assert!((td_target(1.0, false, 0.9, 5.0) - 5.5).abs() < 1e-12);
    }

    #[test]
    fn branch_target_examples() {
        let y = mpc_q_targets(&[1.0, 2.0], 5.0, false, 2, 0.9).unwrap();
        assert!((y[0] - 6.85).abs() < 1e-12);
        assert!((y[1] - 6.5).abs() < 1e-12);
        assert_eq!(
            mpc_q_targets(&[0.7], 3.0, false, 1, 0.9).unwrap(),
            vec![td_target(0.7, false, 0.9, 3.0)]
        );
        assert_eq!(mpc_q_targets(&[1.0, -2.0, 3.0], 9.0, false, 3, 0.0).unwrap(), vec![1.0, -2.0, 3.0]);
        assert!(matches!(
            mpc_q_targets(&[1.0], 5.0, false, 2, 0.9),
            Err(Error::TruncatedBranch { expected: 2, got: 1 })
        ));
        assert!(mpc_q_targets(&[], 5.0, true, 2, 0.9).is_err());
        assert_eq!(mpc_q_targets(&[1.0], 5.0, true, 3, 0.9).unwrap(), vec![1.0]);
    }

    #[test]
    fn loss_examples() {
        // squared errors 1.0 and 0.5
        let l = mpc_critic_loss(&[1.0, 0.5f64.sqrt()], &[0.0, 0.0], 0.9).unwrap();
        assert!((l - 1.45).abs() < 1e-12);
        assert_eq!(mpc_critic_loss(&[2.0, 3.0], &[2.0, 3.0], 0.9).unwrap(), 0.0);
        assert_eq!(mpc_critic_loss(&[2.0], &[0.5], 0.9).unwrap(), 2.25);
        assert!(mpc_critic_loss(&[1.0], &[1.0, 2.0], 0.9).is_err());
    }

    proptest! {
        #[test]
        fn targets_telescope(rs in prop::collection::vec(-10.0f64..10.0, 1..8),
                             tip in -50.0f64..50.0, g in 0.0f64..0.999) {
            let y = mpc_q_targets(&rs, tip, false, rs.len(), g).unwrap();
            for n in 0..rs.len() - 1 {
                prop_assert_eq!(y[n], rs[n] + g * y[n + 1]);
            }
            prop_assert_eq!(y[rs.len() - 1], rs[rs.len() - 1] + g * tip);
        }

        #[test]
        fn step_weight_is_gamma_power(q in prop::collection::vec(-5.0f64..5.0, 1..6),
                                      g in 0.0f64..0.999, pick in 0usize..6) {
            let n = pick % q.len();
            let targets = vec![0.0; q.len()];
            let base = mpc_critic_loss(&q, &targets, g).unwrap();
            // doubling the squared error at step n
            let mut q2 = q.clone();
            q2[n] *= 2f64.sqrt();
            let raised = mpc_critic_loss(&q2, &targets, g).unwrap();
            let delta = q[n] * q[n];
            let expect = g.powi(n as i32) * delta;
            prop_assert!((raised - base - expect).abs() <= 1e-9 * (1.0 + base.abs()));
        }
    }
}
