//! Saved greedy policies.
//!
//! ```text
//! mpcrl-policy 1
//! kind dqn | ddpg | tabular
//! env <environment id>
//! scale <state scale per dimension>
//! <network in the checkpoint format>
//! ```
//!
//! Tabular policies store the Q-table as a bias-free linear layer over
//! one-hot states, so row `s` of the table is column `s` of the weights.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::deep::{DeepAgent, DeepKind, GreedyPolicy};
use super::networks::{argmax, normalized_states};
use crate::approx::{read_mlp, write_mlp, Mlp, OutputActivation};
use crate::envs::Action;
use crate::error::{Error, Result};
use crate::tabular::QTable;

const MAGIC: &str = "mpcrl-policy";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyKind {
    Dqn,
    Ddpg,
    Tabular,
}

impl PolicyKind {
    fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Dqn => "dqn",
            PolicyKind::Ddpg => "ddpg",
            PolicyKind::Tabular => "tabular",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyCheckpoint {
    pub kind: PolicyKind,
    pub env: String,
    pub state_scale: Vec<f64>,
    pub net: Mlp,
}

impl PolicyCheckpoint {
    pub fn from_agent(agent: &DeepAgent, env: &str) -> Self {
        let (kind, net, scale) = match (&agent.kind, &agent.actor) {
            (DeepKind::Ddpg, Some(actor)) => (PolicyKind::Ddpg, actor.online.clone(), actor.state_scale.clone()),
            _ => (PolicyKind::Dqn, agent.critic.online.clone(), agent.critic.state_scale.clone()),
        };
        Self {
            kind,
            env: env.to_string(),
            state_scale: scale,
            net,
        }
    }

    pub fn from_table(q: &QTable, env: &str) -> Result<Self> {
        let (ns, na) = (q.num_states(), q.num_actions());
        let mut params = Vec::with_capacity(ns * na + na);
        for a in 0..na {
            params.extend((0..ns).map(|s| q.get(s, a)));
        }
        params.extend(std::iter::repeat_n(0.0, na));
        Ok(Self {
            kind: PolicyKind::Tabular,
            env: env.to_string(),
            state_scale: vec![1.0],
            net: Mlp::from_params(&[ns, na], OutputActivation::Identity, params)?,
        })
    }

    /// Greedy action in state `s` of a tabular policy.
    pub fn greedy_index(&self, s: usize) -> Result<usize> {
        if self.kind != PolicyKind::Tabular {
            return Err(Error::Config("not a tabular policy".into()));
        }
        let ns = self.net.input_dim();
        if s >= ns {
            return Err(Error::shape(format!("state below {ns}"), s));
        }
        let mut x = vec![0.0; ns];
        x[s] = 1.0;
        Ok(argmax(&self.net.forward(&x)?))
    }

    pub fn write<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "{MAGIC} 1")?;
        writeln!(out, "kind {}", self.kind.as_str())?;
        writeln!(out, "env {}", self.env)?;
        let scale: Vec<String> = self.state_scale.iter().map(|v| v.to_string()).collect();
        writeln!(out, "scale {}", scale.join(" "))?;
        write_mlp(out, &self.net)
    }

    pub fn read<R: BufRead>(input: &mut R) -> Result<Self> {
        let mut lines = Vec::with_capacity(4);
        for _ in 0..4 {
            let mut line = String::new();
            input
                .read_line(&mut line)
                .map_err(|e| Error::Checkpoint(format!("read failed: {e}")))?;
            lines.push(line.trim().to_string());
        }
        if lines[0] != format!("{MAGIC} 1") {
            return Err(Error::Checkpoint(format!("bad policy header {:?}", lines[0])));
        }
        let field = |line: &str, key: &str| -> Result<String> {
            line.strip_prefix(key)
                .and_then(|r| r.strip_prefix(' ').or((r.is_empty()).then_some("")))
                .map(str::to_string)
                .ok_or_else(|| Error::Checkpoint(format!("expected `{key}`, found {line:?}")))
        };
        let kind = match field(&lines[1], "kind")?.as_str() {
            "dqn" => PolicyKind::Dqn,
            "ddpg" => PolicyKind::Ddpg,
            "tabular" => PolicyKind::Tabular,
            other => return Err(Error::Checkpoint(format!("unknown policy kind {other:?}"))),
        };
        let env = field(&lines[2], "env")?;
        let state_scale = field(&lines[3], "scale")?
            .split_whitespace()
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::Checkpoint(format!("bad scale {v:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let net = read_mlp(input)?;
        if kind != PolicyKind::Tabular && net.input_dim() != state_scale.len() {
            return Err(Error::Checkpoint("scale does not match network input".into()));
        }
        Ok(Self {
            kind,
            env,
            state_scale,
            net,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        self.write(&mut out)
            .and_then(|_| out.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(&mut BufReader::new(file))
    }
}

impl GreedyPolicy for PolicyCheckpoint {
    fn greedy_action(&self, s: &[f64]) -> Result<Action> {
        match self.kind {
            PolicyKind::Tabular => {
                Err(Error::Config("tabular policies act on state indices".into()))
            }
            PolicyKind::Dqn => {
                let q = self.net.forward_batch(&normalized_states(&[s], &self.state_scale)?)?;
                Ok(Action::Discrete(argmax(q.row(0))))
            }
            PolicyKind::Ddpg => {
                let a = self.net.forward_batch(&normalized_states(&[s], &self.state_scale)?)?;
                Ok(Action::Continuous(a.row(0).to_vec()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn table_round_trip_keeps_greedy_actions() {
        let mut q = QTable::new(5, 3, 0.1, 0.0).unwrap();
        q.set(0, 2, 1.0);
        q.set(3, 1, -0.5);
        q.set(3, 0, -1.0);
        q.set(3, 2, -2.0);
        let ck = PolicyCheckpoint::from_table(&q, "cw").unwrap();
        let mut buf = Vec::new();
        ck.write(&mut buf).unwrap();
        let back = PolicyCheckpoint::read(&mut buf.as_slice()).unwrap();
        assert_eq!(back, ck);
        for s in 0..5 {
            assert_eq!(back.greedy_index(s).unwrap(), q.greedy(s));
        }
    }

    #[test]
    fn network_round_trip_is_exact() {
        let net = Mlp::new(
            &[3, 4, 2],
            OutputActivation::Tanh { scale: vec![2.0, 0.5] },
            &mut seeded(3),
        )
        .unwrap();
        let ck = PolicyCheckpoint {
            kind: PolicyKind::Ddpg,
            env: "pd".into(),
            state_scale: vec![1.0, 1.0, 8.0],
            net,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("policy.txt");
        ck.save(&path).unwrap();
        let back = PolicyCheckpoint::load(&path).unwrap();
        assert_eq!(back, ck);
        let s = [0.1, -0.3, 2.0];
        assert_eq!(back.greedy_action(&s).unwrap(), ck.greedy_action(&s).unwrap());
        assert!(PolicyCheckpoint::read(&mut "nonsense\n".as_bytes()).is_err());
        assert!(PolicyCheckpoint::load(&dir.path().join("missing")).is_err());
    }
}
