//! National accounts implied by a solved equilibrium.

use nalgebra::{DMatrix, DVector};

use super::{EquilibriumError, EquilibriumSolution, WorldEconomy};
use crate::iotable::WiotTable;

/// Sector label used by model-generated tables.
pub const MODEL_SECTOR: &str = "TOT";

/// Final-demand shares `π^F[i][j]` (stage-2 country `i` serving `j`) and the
/// implied final flows `π^F[i][j] · w_j L_j`.
pub fn final_demand_shares(
    econ: &WorldEconomy,
    sol: &EquilibriumSolution,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let j = econ.countries;
    let incomes = sol.incomes(econ);
    let shares = DMatrix::from_fn(j, j, |i, d| sol.shares.stage_share(2, i, d));
    let flows = DMatrix::from_fn(j, j, |i, d| shares[(i, d)] * incomes[d]);
    (shares, flows)
}

/// One-sector-per-country input-output table generated by the model.
///
/// Each destination absorbs `w_j L_j / γ`. Chains deliver that value from
/// their stage-2 country, which buys `(1 - α2)` of it from the stage-1
/// country. The composite-input part of absorption, `(1 - γ)`, is sourced in
/// proportion to the buyer's final-demand shares. Value added is labour
/// income and gross output is the row total, so the table balances exactly
/// at the fixed point.
pub fn model_wiot(
    econ: &WorldEconomy,
    sol: &EquilibriumSolution,
) -> Result<WiotTable, EquilibriumError> {
    let j = econ.countries;
    let incomes = sol.incomes(econ);
    let absorption: Vec<f64> = incomes.iter().map(|y| y / econ.gamma).collect();
    let [upstream, _] = econ.stage_weights();
    let (pi_f, final_flows) = final_demand_shares(econ, sol);

    let mut intermediate = DMatrix::from_fn(j, j, |i, d| {
        pi_f[(i, d)] * (1.0 - econ.gamma) * absorption[d]
    });
    for l1 in 0..j {
        for l2 in 0..j {
            intermediate[(l1, l2)] += upstream
                * (0..j)
                    .map(|d| sol.shares.get(l1, l2, d) * absorption[d])
                    .sum::<f64>();
        }
    }
    let value_added = DVector::from_vec(incomes);
    let gross_output = DVector::from_fn(j, |i, _| {
        intermediate.row(i).sum() + final_flows.row(i).sum()
    });
    Ok(WiotTable::new(
        econ.country_names(),
        vec![MODEL_SECTOR.to_string()],
        intermediate,
        final_flows,
        value_added,
        gross_output,
    )?)
}

/// Real wage of country `j` computed directly and from the share of
/// spending on its purely domestic chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainsFromTrade {
    pub direct: f64,
    pub via_domestic_share: f64,
    pub domestic_share: f64,
}

impl GainsFromTrade {
    pub fn relative_gap(&self) -> f64 {
        (self.direct - self.via_domestic_share).abs() / self.direct
    }
}

/// The domestic-share formula pins down `c_j / P_j = (w_j / P_j)^γ`; the
/// real wage is recovered by the `1/γ` power.
pub fn gains_from_trade(
    econ: &WorldEconomy,
    sol: &EquilibriumSolution,
    j: usize,
) -> Result<GainsFromTrade, EquilibriumError> {
    if j >= econ.countries {
        return Err(EquilibriumError::InvalidEconomy(format!(
            "country index {j} out of range 0..{}",
            econ.countries
        )));
    }
    let domestic_share = sol.shares.get(j, j, j);
    if domestic_share.is_nan() || domestic_share <= 0.0 {
        return Err(EquilibriumError::NoDomesticChain(j));
    }
    let a2 = econ.effective_alpha2();
    let beta_sum = (1.0 - a2) + 1.0;
    let tech = econ.t1[j].powf(1.0 - a2) * econ.t2[j].powf(a2);
    let cost_over_price = (econ.kappa() * econ.tau[j][j].powf(beta_sum)).recip()
        * (tech / domestic_share).powf(1.0 / econ.theta);
    Ok(GainsFromTrade {
        direct: sol.wages[j] / sol.prices[j],
        via_domestic_share: cost_over_price.powf(1.0 / econ.gamma),
        domestic_share,
    })
}
