//! Liveness under assumptions, fair scheduling, AGEF, LTL cross-checks, hierarchy arrows and
//! Monte-Carlo estimation of probabilistic fairness.

mod extend;
mod hierarchy;
mod liveness;
mod ltl;
mod simulate;

pub use extend::{fair_extend, fair_lasso};
pub use hierarchy::{arrow_conditions, enumerate_lassos, hierarchy_check, HierarchyBounds, HierarchyReport};
pub use liveness::{agef, liveness, loopfree_witness, Bounds, Holds, Verdict, Witness};
pub use ltl::{eval_ltl, ltl_convert, strong_fairness_formula, weak_fairness_formula, ConvertedLts, CState, Formula};
pub use simulate::{load_weights, simulate, ProbEstimate, DEFAULT_SEED};

use crate::lts_model::LtsError;
use crate::paths::PathError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Lts(#[from] LtsError),
    #[error("weight of {0} must be positive")]
    NonPositiveWeight(String),
    #[error("bad weights document: {0}")]
    Weights(String),
    #[error("unknown proposition {0}")]
    UnknownProposition(String),
    #[error("formula syntax: {0}")]
    Formula(String),
    #[error("witness failed re-verification: {0}")]
    Internal(String),
}

