//! Liveness checking of CCS-fragment transition systems under progress, justness and
//! fairness assumptions.

pub mod ccs_lang;
pub mod cli;
pub mod lts_model;
pub mod paths;
pub mod semantics;
pub mod tasks;
pub mod verify;
