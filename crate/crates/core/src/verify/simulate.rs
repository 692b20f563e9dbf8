use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::VerifyError;
use crate::lts_model::AugmentedLts;

pub const DEFAULT_SEED: u64 = 0xC0FFEE;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbEstimate {
    pub runs: usize,
    pub horizon: usize,
    pub reached: usize,
    pub estimate: f64,
    pub seed: u64,
}

/// Reads `{"<transition id>": weight, ...}`; unlisted transitions weigh 1.
pub fn load_weights(lts: &AugmentedLts, document: &str) -> Result<HashMap<usize, f64>, VerifyError> {
    let raw: HashMap<String, f64> = serde_json::from_str(document).map_err(|e| VerifyError::Weights(e.to_string()))?;
    let mut out = HashMap::new();
    for (id, w) in raw {
        let t = lts.transition_by_id(&id)?;
        if !(w > 0.0 && w.is_finite()) {
            return Err(VerifyError::NonPositiveWeight(id));
        }
        out.insert(t, w);
    }
    Ok(out)
}

/// Monte-Carlo estimate of reaching the goal within `horizon` steps. Each state picks an outgoing
/// transition with probability proportional to its weight; several initial states are entered
/// uniformly from a fresh pre-initial state. Run `i` draws from stream `i` of the seeded generator.
pub fn simulate(
    lts: &AugmentedLts,
    goal: &BTreeSet<usize>,
    weights: &HashMap<usize, f64>,
    horizon: usize,
    runs: usize,
    seed: u64,
) -> Result<ProbEstimate, VerifyError> {
    for (&t, &w) in weights {
        if !(w > 0.0 && w.is_finite()) {
            return Err(VerifyError::NonPositiveWeight(lts.transitions[t].id.clone()));
        }
    }
    let weight = |t: usize| weights.get(&t).copied().unwrap_or(1.0);
    let reached = (0..runs)
        .into_par_iter()
        .filter(|&run| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(run as u64);
            let mut s = lts.initial[rng.gen_range(0..lts.initial.len())];
            for _ in 0..horizon {
                if goal.contains(&s) {
                    return true;
                }
                let out = lts.outgoing(s);
                if out.is_empty() {
                    return false;
                }
                let total: f64 = out.iter().map(|&t| weight(t)).sum();
                let mut x = rng.gen::<f64>() * total;
                let mut pick = *out.last().expect("nonempty");
                for &t in out {
                    x -= weight(t);
                    if x < 0.0 {
                        pick = t;
                        break;
                    }
                }
                s = lts.transitions[pick].target;
            }
            goal.contains(&s)
        })
        .count();
    Ok(ProbEstimate { runs, horizon, reached, estimate: if runs == 0 { 0.0 } else { reached as f64 / runs as f64 }, seed })
}
