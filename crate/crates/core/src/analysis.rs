//! Improvement bound for model-branched value estimation and the horizon
//! diagnostic derived from it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    /// Largest per-step reward magnitude.
    pub r_max: f64,
    pub gamma: f64,
    /// Index at which branches start.
    pub k: u32,
    /// Policy distribution shift.
    pub eps_pi: f64,
    /// Model generalization error.
    pub eps_m: f64,
    /// Prediction horizon.
    pub horizon: u32,
}

impl BoundParams {
    fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::Domain(format!("gamma must lie in [0, 1), got {}", self.gamma)));
        }
        for (name, v) in [("r_max", self.r_max), ("eps_pi", self.eps_pi), ("eps_m", self.eps_m)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be finite and non-negative, got {v}")));
            }
        }
        Ok(())
    }
}

/// The gap `C` between the true and branched returns:
///
/// `C = 2 r_max [ g^(k+1) e_pi / (1-g)^2 + ((g^k + 2) e_pi + N (e_m + 2 e_pi)) / (1-g) ]`
pub fn improvement_bound(p: &BoundParams) -> Result<f64> {
    p.validate()?;
    if p.horizon == 0 {
        return Err(Error::Domain("horizon must be at least 1".into()));
    }
    let g = p.gamma;
    let gk = g.powi(p.k as i32);
    let n = p.horizon as f64;
    let shift = g * gk * p.eps_pi / ((1.0 - g) * (1.0 - g));
    let branch = ((gk + 2.0) * p.eps_pi + n * (p.eps_m + 2.0 * p.eps_pi)) / (1.0 - g);
    Ok(2.0 * p.r_max * (shift + branch))
}

/// Horizon objective `f(N) = g^(k+1) e_pi / (1-g)^2 + (g^k + 2N + 2) e_pi / (1-g)`.
pub fn horizon_objective(p: &BoundParams, horizon: u32) -> Result<f64> {
    p.validate()?;
    let g = p.gamma;
    let gk = g.powi(p.k as i32);
    Ok(g * gk * p.eps_pi / ((1.0 - g) * (1.0 - g))
        + (gk + 2.0 * horizon as f64 + 2.0) * p.eps_pi / (1.0 - g))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HorizonReport {
    pub best: u32,
    /// `(N, f(N))` for every candidate, in the given order.
    pub curve: Vec<(u32, f64)>,
}

/// Candidate minimizing [`horizon_objective`], ties to the smaller horizon.
/// `p.horizon` is ignored.
pub fn optimal_horizon(p: &BoundParams, candidates: &[u32]) -> Result<HorizonReport> {
    if candidates.is_empty() || candidates.contains(&0) {
        return Err(Error::Domain("candidate horizons must be a non-empty list of values >= 1".into()));
    }
    let curve = candidates
        .iter()
        .map(|&n| Ok((n, horizon_objective(p, n)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut best = curve[0];
    for &(n, f) in &curve[1..] {
        if f < best.1 || (f == best.1 && n < best.0) {
            best = (n, f);
        }
    }
    Ok(HorizonReport { best: best.0, curve })
}
