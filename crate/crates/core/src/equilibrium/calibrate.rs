//! Moment-distance calibration of technologies and symmetric trade costs.

use std::cell::RefCell;

use argmin::core::{CostFunction, Error as ArgminError, Executor};
use argmin::solver::neldermead::NelderMead;
use nalgebra::DMatrix;

use super::{model_wiot, solve_equilibrium, EquilibriumError, SolverSettings, WorldEconomy};
use crate::iotable::WiotTable;

pub const DEFAULT_BUDGET: usize = 2000;

/// Objective assigned to parameter vectors whose equilibrium cannot be solved.
const PENALTY: f64 = 1e6;

/// Column shares of final demand and intermediate purchases by source country.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetMoments {
    pub final_shares: DMatrix<f64>,
    pub intermediate_shares: DMatrix<f64>,
}

fn column_shares(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for mut col in out.column_iter_mut() {
        let total = col.sum();
        if total > 0.0 {
            col /= total;
        }
    }
    out
}

impl TargetMoments {
    pub fn new(
        final_shares: DMatrix<f64>,
        intermediate_shares: DMatrix<f64>,
    ) -> Result<Self, EquilibriumError> {
        let j = final_shares.nrows();
        for (name, m) in [
            ("final", &final_shares),
            ("intermediate", &intermediate_shares),
        ] {
            if m.shape() != (j, j) {
                return Err(EquilibriumError::InvalidTarget(format!(
                    "{name} shares are {}x{}, expected {j}x{j}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if m.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(EquilibriumError::InvalidTarget(format!(
                    "{name} shares must be finite and >= 0"
                )));
            }
            for (c, col) in m.column_iter().enumerate() {
                let s = col.sum();
                if (s - 1.0).abs() > 1e-8 {
                    return Err(EquilibriumError::InvalidTarget(format!(
                        "{name} shares of column {c} sum to {s}, expected 1"
                    )));
                }
            }
        }
        Ok(TargetMoments {
            final_shares,
            intermediate_shares,
        })
    }

    /// Nation-level moments of a table, summing over sectors.
    pub fn from_wiot(w: &WiotTable) -> Result<Self, EquilibriumError> {
        let n = w.num_nations();
        let k = w.num_sectors();
        let mut fin = DMatrix::zeros(n, n);
        let mut inter = DMatrix::zeros(n, n);
        for r in 0..n {
            for a in 0..k {
                let row = w.index(r, a);
                for c in 0..n {
                    fin[(r, c)] += w.final_demand()[(row, c)];
                    for b in 0..k {
                        inter[(r, c)] += w.intermediate()[(row, w.index(c, b))];
                    }
                }
            }
        }
        Self::new(column_shares(&fin), column_shares(&inter))
    }

    pub fn of_economy(
        econ: &WorldEconomy,
        settings: &SolverSettings,
    ) -> Result<Self, EquilibriumError> {
        let sol = solve_equilibrium(econ, settings)?;
        Self::from_wiot(&model_wiot(econ, &sol)?)
    }

    pub fn countries(&self) -> usize {
        self.final_shares.nrows()
    }

    pub fn distance(&self, other: &TargetMoments) -> f64 {
        (&self.final_shares - &other.final_shares).norm_squared()
            + (&self.intermediate_shares - &other.intermediate_shares).norm_squared()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationResult {
    pub economy: WorldEconomy,
    pub objective: f64,
    pub initial_objective: f64,
    pub evaluations: usize,
    /// False when no parameter vector beat the starting economy.
    pub improved: bool,
}

/// Free parameters: `ln T1`, `ln T2` and `ln τ` of each unordered pair, the
/// last taken in absolute value so that `τ ≥ 1`.
fn pack(econ: &WorldEconomy) -> Vec<f64> {
    let j = econ.countries;
    let mut x: Vec<f64> = econ.t1.iter().chain(&econ.t2).map(|t| t.ln()).collect();
    for a in 0..j {
        for b in a + 1..j {
            x.push(0.5 * (econ.tau[a][b].ln() + econ.tau[b][a].ln()));
        }
    }
    x
}

fn unpack(base: &WorldEconomy, x: &[f64]) -> WorldEconomy {
    let j = base.countries;
    let mut econ = base.clone();
    econ.t1 = x[..j].iter().map(|v| v.exp()).collect();
    econ.t2 = x[j..2 * j].iter().map(|v| v.exp()).collect();
    let mut k = 2 * j;
    for a in 0..j {
        for b in a + 1..j {
            let t = x[k].abs().exp();
            econ.tau[a][b] = t;
            econ.tau[b][a] = t;
            k += 1;
        }
    }
    econ
}

struct Problem<'a> {
    base: &'a WorldEconomy,
    target: &'a TargetMoments,
    settings: SolverSettings,
    budget: usize,
    evaluations: &'a RefCell<usize>,
    best: &'a RefCell<Option<(Vec<f64>, f64)>>,
}

impl Problem<'_> {
    fn objective(&self, econ: &WorldEconomy) -> f64 {
        match TargetMoments::of_economy(econ, &self.settings) {
            Ok(m) => m.distance(self.target),
            Err(_) => PENALTY,
        }
    }
}

impl CostFunction for Problem<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Vec<f64>) -> Result<f64, ArgminError> {
        if *self.evaluations.borrow() >= self.budget {
            return Err(ArgminError::msg("evaluation budget exhausted"));
        }
        *self.evaluations.borrow_mut() += 1;
        let value = self.objective(&unpack(self.base, x));
        let mut best = self.best.borrow_mut();
        if best.as_ref().is_none_or(|(_, b)| value < *b) {
            *best = Some((x.clone(), value));
        }
        Ok(value)
    }
}

/// Fits technologies and symmetric trade costs to `target` by Nelder–Mead
/// over log-parameters, within `budget` equilibrium evaluations.
pub fn calibrate(
    target: &TargetMoments,
    econ0: &WorldEconomy,
    budget: usize,
) -> Result<CalibrationResult, EquilibriumError> {
    econ0.validate()?;
    if target.countries() != econ0.countries {
        return Err(EquilibriumError::InvalidTarget(format!(
            "target has {} countries, economy has {}",
            target.countries(),
            econ0.countries
        )));
    }
    let settings = SolverSettings::default();
    let initial_objective = TargetMoments::of_economy(econ0, &settings)?.distance(target);
    let unchanged = |evaluations| CalibrationResult {
        economy: econ0.clone(),
        objective: initial_objective,
        initial_objective,
        evaluations,
        improved: false,
    };
    if initial_objective <= 1e-12 || budget <= 1 {
        return Ok(unchanged(1));
    }

    let evaluations = RefCell::new(0);
    let best = RefCell::new(None);
    let problem = Problem {
        base: econ0,
        target,
        settings,
        budget: budget - 1,
        evaluations: &evaluations,
        best: &best,
    };
    let x0 = pack(econ0);
    let mut simplex = vec![x0.clone()];
    for i in 0..x0.len() {
        let mut v = x0.clone();
        v[i] += 0.1;
        simplex.push(v);
    }
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(1e-15)
        .map_err(|e| EquilibriumError::InvalidSettings(e.to_string()))?;
    // Running out of budget surfaces as an error; the best point seen is kept
    // either way.
    let outcome = Executor::new(problem, solver)
        .configure(|state| state.max_iters(budget as u64).target_cost(1e-14))
        .run();
    if let Err(e) = outcome {
        log::debug!("calibration stopped: {e}");
    }
    let evaluations = 1 + evaluations.into_inner();
    match best.into_inner() {
        Some((x, objective)) if objective < initial_objective => Ok(CalibrationResult {
            economy: unpack(econ0, &x),
            objective,
            initial_objective,
            evaluations,
            improved: true,
        }),
        _ => Ok(unchanged(evaluations)),
    }
}
