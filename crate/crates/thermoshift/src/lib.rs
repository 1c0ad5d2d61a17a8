//! Thermodynamic formalism and ergodic optimization on finite and truncated
//! countable Markov shifts.
//!
//! The crate pairs a positive-temperature engine (Ruelle transfer operator in
//! log domain, Ruelle-Perron-Frobenius eigendata, Gibbs cylinder measures)
//! with a zero-temperature engine (max-plus eigenproblem, calibrated
//! sub-actions, Mane kernel, Aubry set) and cross-validates them along beta
//! sweeps: the central check is the large-deviation limit
//! `(1/beta) log mu_beta(C) -> -inf_C I` with the rate function built from a
//! calibrated sub-action.
//!
//! Start with the runnable examples (`cargo run --example beta_sweep`) or the
//! `instances` module for ready-made golden cases.

pub mod commands;
pub mod config;
pub mod context;
pub mod deviation;
pub mod error;
pub mod instances;
pub mod logsum;
pub mod maxplus;
pub mod potential;
pub mod transfer;
pub mod shift;
pub mod sweep;

pub use context::ContextGraph;
pub use error::{Result, ShiftError};
pub use deviation::{Deviation, DeviationResult, RPlusWeights};
pub use maxplus::MaxPlusSolution;
pub use potential::{CountableModel, Potential, TailEnvelope};
pub use transfer::{GibbsChain, RpfBackend, RpfOptions, RpfSolution};
pub use shift::{MarkovShift, PrimitivityWitness, Word};
pub use sweep::{SweepConfig, SweepOutput, SweepRecord};
