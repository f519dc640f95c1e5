//! Systematic random linear network coding (sRLNC) over GF(2^s) for links
//! made of `N` high-rate main lanes, each paired with a lower-rate auxiliary
//! lane that carries the redundancy.
//!
//! * [`gf`]: field arithmetic.
//! * [`srlnc`]: systematic encoder and Gauss-Jordan decoder.
//! * [`fec_model`]: abstract per-lane FEC thresholds and residual error rates.
//! * [`planner`]: redundancy, code rate, auxiliary rates and delay balance.
//! * [`ber_table`]: expected-BER curves loaded from CSV.
//! * [`pipeline`]: stream parallelization and frame format.
//! * [`channel_sim`]: Monte-Carlo simulation of the whole link.
//! * [`cli`]: sweeps and codec commands behind the `thz-srlnc` binary.
//!
//! The analytic types are generic over the real scalar; the aliases below fix
//! it to `f64` (the default everywhere in the CLI) or `f32`.

// NaN must fail range checks, which `!(x > 0)` does and `x <= 0` does not.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ber_table;
pub mod channel_sim;
pub mod cli;
pub mod error;
pub mod fec_model;
pub mod gf;
pub mod pipeline;
pub mod planner;
pub mod scalar;
pub mod srlnc;

pub use error::ModelError;
pub use gf::{Field, FieldElement, FieldSpec};
pub use scalar::Scalar;
pub use srlnc::{CodedSymbol, CoefficientSeed, EncodedGeneration, Generation};

pub type FecSpec = fec_model::FecSpec<f64>;
pub type FecSpecF32 = fec_model::FecSpec<f32>;
pub type ResidualError = fec_model::ResidualError<f64>;
pub type ResidualErrorF32 = fec_model::ResidualError<f32>;
pub type ChannelSpec = planner::ChannelSpec<f64>;
pub type ChannelSpecF32 = planner::ChannelSpec<f32>;
pub type ChannelPlan = planner::ChannelPlan<f64>;
pub type ChannelPlanF32 = planner::ChannelPlan<f32>;
pub type LinkPlan = planner::LinkPlan<f64>;
pub type LinkPlanF32 = planner::LinkPlan<f32>;
pub type BerTable = ber_table::BerTable<f64>;
pub type BerTableF32 = ber_table::BerTable<f32>;
pub type SessionConfig = channel_sim::SessionConfig<f64>;
pub type ArrivalTrace = channel_sim::ArrivalTrace<f64>;
