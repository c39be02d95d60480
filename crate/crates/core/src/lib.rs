//! Global supply-chain exposure, supplier survival and multi-stage trade
//! equilibrium.

pub mod equilibrium;
pub mod exposure;
pub mod iotable;
pub mod policy;
pub mod survival;
