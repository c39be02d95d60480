//! Chain-level cost potentials, spending shares and price indices.

use super::{EquilibriumError, WorldEconomy};

/// Stage-1 country, stage-2 country and destination of one supply chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChainPath {
    pub l1: usize,
    pub l2: usize,
    pub dest: usize,
}

/// Whether the economy admits a chain through `(l1, l2)`.
fn admissible(econ: &WorldEconomy, l1: usize, l2: usize) -> bool {
    econ.stages == 2 || l1 == l2
}

/// `ln Φ` of a chain, or `-inf` when the chain is inadmissible or priced out.
pub fn ln_chain_potential(econ: &WorldEconomy, path: ChainPath, costs: &[f64]) -> f64 {
    let ChainPath { l1, l2, dest } = path;
    if !admissible(econ, l1, l2) {
        return f64::NEG_INFINITY;
    }
    let a2 = econ.effective_alpha2();
    let theta = econ.theta;
    let upstream = if a2 < 1.0 {
        (1.0 - a2) * (econ.t1[l1].ln() - theta * (costs[l1].ln() + econ.tau[l1][l2].ln()))
    } else {
        0.0
    };
    upstream + a2 * econ.t2[l2].ln() - theta * (a2 * costs[l2].ln() + econ.tau[l2][dest].ln())
}

pub fn chain_potential(econ: &WorldEconomy, path: ChainPath, costs: &[f64]) -> f64 {
    ln_chain_potential(econ, path, costs).exp()
}

/// Spending shares of one destination over all `J²` chains, indexed
/// `[l1 * J + l2]`, together with `ln Σ Φ`.
pub fn destination_shares(
    dest: usize,
    econ: &WorldEconomy,
    costs: &[f64],
) -> Result<(Vec<f64>, f64), EquilibriumError> {
    let j = econ.countries;
    let logs: Vec<f64> = (0..j * j)
        .map(|k| {
            ln_chain_potential(
                econ,
                ChainPath {
                    l1: k / j,
                    l2: k % j,
                    dest,
                },
                costs,
            )
        })
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(EquilibriumError::Disconnected(dest));
    }
    let mut shares: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = shares.iter().sum();
    shares.iter_mut().for_each(|s| *s /= sum);
    Ok((shares, max + sum.ln()))
}

/// Share tensor `π[l1][l2][dest]`; each destination's slice sums to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainShares {
    countries: usize,
    data: Vec<f64>,
}

impl ChainShares {
    pub fn compute(econ: &WorldEconomy, costs: &[f64]) -> Result<Self, EquilibriumError> {
        Ok(Self::with_log_totals(econ, costs)?.0)
    }

    /// Shares together with `ln Σ Φ` per destination.
    pub(crate) fn with_log_totals(
        econ: &WorldEconomy,
        costs: &[f64],
    ) -> Result<(Self, Vec<f64>), EquilibriumError> {
        let j = econ.countries;
        let mut data = vec![0.0; j * j * j];
        let mut totals = Vec::with_capacity(j);
        for dest in 0..j {
            let (shares, ln_total) = destination_shares(dest, econ, costs)?;
            for (k, s) in shares.into_iter().enumerate() {
                data[k * j + dest] = s;
            }
            totals.push(ln_total);
        }
        Ok((ChainShares { countries: j, data }, totals))
    }

    pub fn countries(&self) -> usize {
        self.countries
    }

    pub fn get(&self, l1: usize, l2: usize, dest: usize) -> f64 {
        let j = self.countries;
        self.data[(l1 * j + l2) * j + dest]
    }

    /// Share of `dest`'s spending on chains whose stage `stage` (1 or 2)
    /// is located in `country`.
    pub fn stage_share(&self, stage: usize, country: usize, dest: usize) -> f64 {
        let j = self.countries;
        (0..j)
            .map(|other| match stage {
                1 => self.get(country, other, dest),
                _ => self.get(other, country, dest),
            })
            .sum()
    }

    pub fn destination_total(&self, dest: usize) -> f64 {
        let j = self.countries;
        (0..j * j).map(|k| self.data[k * j + dest]).sum()
    }
}

/// All shares of destination `dest`, as a map from chain to share.
pub fn chain_shares(
    dest: usize,
    econ: &WorldEconomy,
    costs: &[f64],
) -> Result<Vec<(ChainPath, f64)>, EquilibriumError> {
    let j = econ.countries;
    let (shares, _) = destination_shares(dest, econ, costs)?;
    Ok(shares
        .into_iter()
        .enumerate()
        .map(|(k, s)| {
            (
                ChainPath {
                    l1: k / j,
                    l2: k % j,
                    dest,
                },
                s,
            )
        })
        .collect())
}

/// Exact CES price index of `dest`.
pub fn price_index(
    dest: usize,
    econ: &WorldEconomy,
    costs: &[f64],
) -> Result<f64, EquilibriumError> {
    let (_, ln_total) = destination_shares(dest, econ, costs)?;
    Ok(econ.kappa() * (-ln_total / econ.theta).exp())
}
