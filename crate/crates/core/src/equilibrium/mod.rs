//! Multi-country general equilibrium with two-stage global supply chains.
//!
//! Countries differ in labour, stage-specific Fréchet technologies and
//! bilateral iceberg costs. Every destination buys from the cheapest chain
//! `(l1, l2)`; wages clear labour markets with world GDP normalised to one.

mod accounts;
mod calibrate;
mod chains;
mod economy;
mod solver;

use thiserror::Error;

use crate::iotable::IoTableError;

pub use accounts::{
    final_demand_shares, gains_from_trade, model_wiot, GainsFromTrade, MODEL_SECTOR,
};
pub use calibrate::{calibrate, CalibrationResult, TargetMoments, DEFAULT_BUDGET};
pub use chains::{
    chain_potential, chain_shares, destination_shares, ln_chain_potential, price_index, ChainPath,
    ChainShares,
};
pub use economy::WorldEconomy;
pub use solver::{
    labor_demand, prices_given_wages, solve_equilibrium, EquilibriumSolution, SolverSettings,
};

#[derive(Debug, Error)]
pub enum EquilibriumError {
    #[error("invalid economy: {0}")]
    InvalidEconomy(String),
    #[error("invalid solver settings: {0}")]
    InvalidSettings(String),
    #[error("destination {0} cannot be reached by any supply chain")]
    Disconnected(usize),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("country {0} has no purely domestic supply chain")]
    NoDomesticChain(usize),
    #[error("invalid calibration target: {0}")]
    InvalidTarget(String),
    #[error(transparent)]
    Table(#[from] IoTableError),
}
