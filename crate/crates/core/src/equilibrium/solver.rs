//! Wage fixed point.
//!
//! For given wages, composite costs `c = w^γ P^(1-γ)` and price indices are
//! solved jointly by iterating on `ln P`. Wages are then moved towards the
//! labour income implied by chain shares, in log space, with world GDP
//! normalised to one.

use super::chains::ChainShares;
use super::{EquilibriumError, WorldEconomy};

const INNER_TOL: f64 = 1e-12;
const INNER_MAX_ITER: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tol: 1e-10,
            max_iter: 20_000,
            damping: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumSolution {
    /// Wages with `Σ w_i L_i = 1`.
    pub wages: Vec<f64>,
    pub prices: Vec<f64>,
    pub costs: Vec<f64>,
    pub shares: ChainShares,
    pub iterations: usize,
    /// Largest absolute gap between labour income and its demand.
    pub residual: f64,
}

impl EquilibriumSolution {
    pub fn incomes(&self, econ: &WorldEconomy) -> Vec<f64> {
        self.wages
            .iter()
            .zip(&econ.labor)
            .map(|(w, l)| w * l)
            .collect()
    }
}

/// Costs, prices and chain shares consistent with wages `w`.
pub fn prices_given_wages(
    econ: &WorldEconomy,
    wages: &[f64],
) -> Result<(Vec<f64>, Vec<f64>, ChainShares), EquilibriumError> {
    let ln_kappa = econ.kappa().ln();
    let g = econ.gamma;
    let ln_w: Vec<f64> = wages.iter().map(|w| w.ln()).collect();
    let mut ln_p = vec![0.0; econ.countries];
    for _ in 0..INNER_MAX_ITER {
        let costs: Vec<f64> = ln_w
            .iter()
            .zip(&ln_p)
            .map(|(lw, lp)| (g * lw + (1.0 - g) * lp).exp())
            .collect();
        let (shares, ln_totals) = ChainShares::with_log_totals(econ, &costs)?;
        let next: Vec<f64> = ln_totals
            .iter()
            .map(|t| ln_kappa - t / econ.theta)
            .collect();
        let change = next
            .iter()
            .zip(&ln_p)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        ln_p = next;
        if change < INNER_TOL {
            let costs: Vec<f64> = ln_w
                .iter()
                .zip(&ln_p)
                .map(|(lw, lp)| (g * lw + (1.0 - g) * lp).exp())
                .collect();
            let (shares, _) = if g < 1.0 {
                ChainShares::with_log_totals(econ, &costs)?
            } else {
                (shares, ln_totals)
            };
            return Ok((costs, ln_p.iter().map(|l| l.exp()).collect(), shares));
        }
    }
    Err(EquilibriumError::NoConvergence {
        iterations: INNER_MAX_ITER,
        residual: f64::NAN,
    })
}

/// Labour income demanded from each country given chain shares and incomes.
pub fn labor_demand(econ: &WorldEconomy, shares: &ChainShares, incomes: &[f64]) -> Vec<f64> {
    let [w1, w2] = econ.stage_weights();
    (0..econ.countries)
        .map(|i| {
            (0..econ.countries)
                .map(|j| {
                    (w1 * shares.stage_share(1, i, j) + w2 * shares.stage_share(2, i, j))
                        * incomes[j]
                })
                .sum()
        })
        .collect()
}

pub fn solve_equilibrium(
    econ: &WorldEconomy,
    settings: &SolverSettings,
) -> Result<EquilibriumSolution, EquilibriumError> {
    econ.validate()?;
    if settings.tol.is_nan() || settings.tol <= 0.0 {
        return Err(EquilibriumError::InvalidSettings(format!(
            "tol must be positive, got {}",
            settings.tol
        )));
    }
    if !(settings.damping > 0.0 && settings.damping <= 1.0) {
        return Err(EquilibriumError::InvalidSettings(format!(
            "damping must lie in (0, 1], got {}",
            settings.damping
        )));
    }
    let j = econ.countries;
    let gdp: f64 = econ.labor.iter().sum();
    let mut wages = vec![1.0 / gdp; j];
    let exponent = settings.damping / (1.0 + econ.theta);
    let mut residual = f64::INFINITY;
    for iteration in 0..=settings.max_iter {
        let (costs, prices, shares) = prices_given_wages(econ, &wages)?;
        let incomes: Vec<f64> = wages.iter().zip(&econ.labor).map(|(w, l)| w * l).collect();
        let demand = labor_demand(econ, &shares, &incomes);
        residual = incomes
            .iter()
            .zip(&demand)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        log::trace!("iteration {iteration}: residual {residual:e}");
        if residual < settings.tol {
            return Ok(EquilibriumSolution {
                wages,
                prices,
                costs,
                shares,
                iterations: iteration,
                residual,
            });
        }
        if iteration == settings.max_iter {
            break;
        }
        for i in 0..j {
            wages[i] *= (demand[i] / incomes[i]).powf(exponent);
        }
        let world: f64 = wages.iter().zip(&econ.labor).map(|(w, l)| w * l).sum();
        wages.iter_mut().for_each(|w| *w /= world);
    }
    Err(EquilibriumError::NoConvergence {
        iterations: settings.max_iter,
        residual,
    })
}
