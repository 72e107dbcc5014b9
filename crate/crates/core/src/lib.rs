//! Channel choice between a live agent and a gatekeeper chatbot: decision
//! grids, a linear random-utility logit model and its maximum-likelihood
//! fit, M/D/1 staffing under endogenous demand, counterfactual sweeps, a
//! discrete-event validator, and the hypothesis tests used on uptake data.
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod choice;
pub mod des;
pub mod design;
pub mod equilibrium;
pub mod error;
pub mod estimation;
pub mod exec;
pub mod optim;
pub mod queueing;
pub mod report;
pub mod stats;

pub use choice::{ChannelA, ChannelB, DecisionProblem, Scale, TreatmentConfig, UtilityParams};
pub use design::{ChoiceRecord, PolicySpec};
pub use error::{Error, Result};
pub use exec::Execution;
