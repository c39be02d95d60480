//! Diversification subsidies under a resilience floor and a resource cap.
//!
//! A planner pays an ex-post subsidy to every surviving supplier located in
//! the region atomistic suppliers would otherwise avoid. The subsidy level is
//! chosen on a grid to maximise discounted downstream welfare net of outlays,
//! subject to the supplier total staying within `[floor, cap] · M0` under
//! every scripted single-shock history.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::survival::{
    decentralized_hit_probabilities, simulate_allocation, step, supplier_payoff, EconParams,
    PopulationState, Realization, ShockEvent, ShockProcess, SurvivalError, Trajectory, Uncertainty,
    ZetaBelief,
};

#[derive(Debug, Error, PartialEq)]
pub enum PolicyError {
    #[error(transparent)]
    Survival(#[from] SurvivalError),
    #[error("invalid policy configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyConfig {
    /// Minimum supplier total as a fraction of the initial mass.
    pub floor: f64,
    /// Maximum supplier total as a fraction of the initial mass.
    pub cap: f64,
    /// Candidate per-supplier subsidy levels.
    pub subsidy_grid: Vec<f64>,
    pub replications: usize,
    pub seed: u64,
    /// Two-sided confidence levels in percent.
    pub band_levels: Vec<f64>,
    /// East share the subsidy aims for once it fully offsets the payoff gap.
    pub target_share: f64,
    /// Number of policy periods, including period 0.
    pub horizon: usize,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig {
            floor: 0.5,
            cap: 2.0,
            subsidy_grid: (0..=40).map(|k| k as f64 * 0.005).collect(),
            replications: 10_000,
            seed: 42,
            band_levels: vec![90.0, 95.0, 99.0],
            target_share: 0.5,
            horizon: 5,
        }
    }
}

impl PolicyConfig {
    pub fn validate(&self) -> Result<(), PolicyError> {
        let bad = |m: String| Err(PolicyError::InvalidConfig(m));
        if !(self.floor > 0.0 && self.floor < 1.0) {
            return bad(format!("floor must lie in (0, 1), got {}", self.floor));
        }
        if !(self.cap.is_finite() && self.cap > self.floor) {
            return bad(format!("cap must exceed the floor, got {}", self.cap));
        }
        if self.subsidy_grid.is_empty() {
            return bad("subsidy grid is empty".into());
        }
        if let Some(x) = self
            .subsidy_grid
            .iter()
            .find(|x| !(x.is_finite() && **x >= 0.0))
        {
            return bad(format!("subsidy levels must be finite and >= 0, got {x}"));
        }
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        if let Some(l) = self
            .band_levels
            .iter()
            .find(|l| !(**l > 0.0 && **l < 100.0))
        {
            return bad(format!("band levels must lie in (0, 100), got {l}"));
        }
        if !(self.target_share > 0.0 && self.target_share <= 1.0) {
            return bad(format!(
                "target_share must lie in (0, 1], got {}",
                self.target_share
            ));
        }
        if self.horizon < 2 {
            return bad("policy horizon needs at least two periods".into());
        }
        Ok(())
    }
}

/// Which location the unsubsidised decentralised equilibrium abandons.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Disadvantaged {
    East,
    South,
}

fn point_zeta(shocks: &ShockProcess) -> ZetaBelief {
    ZetaBelief::Point(shocks.zeta_point)
}

/// Under-chosen location and the per-supplier subsidy that makes a supplier
/// there exactly as well off as in the favoured location.
///
/// The subsidy is paid ex post to survivors, so it is scaled by the survival
/// probability of the subsidised location.
pub fn indifference_subsidy(params: &EconParams, shocks: &ShockProcess) -> (Disadvantaged, f64) {
    let (h_east, h_south) = decentralized_hit_probabilities(point_zeta(shocks));
    let eps = shocks.epsilon;
    let east = supplier_payoff(eps, h_east, params.price, params.cost_east);
    let south = supplier_payoff(eps, h_south, params.price, params.cost_south);
    if east > south {
        let keep = 1.0 - eps * h_south;
        let gap = if keep > 0.0 {
            east / keep - (params.price - params.cost_south)
        } else {
            f64::INFINITY
        };
        (Disadvantaged::South, gap)
    } else {
        let keep = 1.0 - eps * h_east;
        let gap = if keep > 0.0 {
            south / keep - (params.price - params.cost_east)
        } else {
            f64::INFINITY
        };
        (Disadvantaged::East, gap)
    }
}

/// East share reached by atomistic suppliers when each supplier in the
/// under-chosen location receives `subsidy`.
///
/// The share in the under-chosen location rises linearly from zero and reaches
/// `target_share` exactly when the subsidy closes the payoff gap; larger
/// subsidies do not push it further.
pub fn decentralized_allocation_with_subsidy(
    params: &EconParams,
    shocks: &ShockProcess,
    subsidy: f64,
    target_share: f64,
) -> f64 {
    let (side, gap) = indifference_subsidy(params, shocks);
    let moved = if gap <= 0.0 {
        if subsidy > 0.0 {
            target_share
        } else {
            0.0
        }
    } else {
        target_share * (subsidy / gap).min(1.0)
    };
    match side {
        Disadvantaged::East => moved,
        Disadvantaged::South => 1.0 - moved,
    }
}

/// Discounted flow payoffs net of subsidy outlays. Missing outlays count as 0.
pub fn welfare(trajectory: &Trajectory, outlays: &[f64], params: &EconParams) -> f64 {
    let mut disc = 1.0;
    let mut total = 0.0;
    for (t, r) in trajectory.records.iter().enumerate() {
        total += disc * (r.flow_payoff - outlays.get(t).copied().unwrap_or(0.0));
        disc *= params.discount;
    }
    total
}

/// Scripted single-shock histories that have positive probability under the
/// belief of `mode`, plus the shock-free history.
pub fn scripted_realizations(
    mode: Uncertainty,
    shocks: &ShockProcess,
    horizon: usize,
) -> Vec<Realization> {
    let mut out = vec![Realization::NoShock];
    if shocks.epsilon == 0.0 {
        return out;
    }
    let support = shocks.belief(mode).support();
    let east = support.hi > 0.0;
    let south = support.lo < 1.0;
    for t in 1..horizon {
        if east {
            out.push(Realization::ShockEast(t));
        }
        if south {
            out.push(Realization::ShockSouth(t));
        }
    }
    out
}

/// Fraction-of-M0 violation of the floor and the cap along one path.
fn violations(traj: &Trajectory, config: &PolicyConfig, m0: f64) -> (f64, f64) {
    let slack = 1e-12 * m0;
    let floor = (config.floor * m0 - traj.min_total() - slack).max(0.0) / m0;
    let cap = (traj.max_total() - config.cap * m0 - slack).max(0.0) / m0;
    (floor, cap)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandLevel {
    pub level: f64,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantileBands {
    pub levels: Vec<BandLevel>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyOutcome {
    pub uncertainty: Uncertainty,
    pub subsidy: f64,
    /// East share induced by the subsidy.
    pub allocation: f64,
    /// Worst scripted history, used as the deterministic point path.
    pub realization: Realization,
    pub trajectory: Trajectory,
    /// Percentage change of the supplier total relative to M0.
    pub pct_change: Vec<f64>,
    pub outlays: Vec<f64>,
    pub total_outlay: f64,
    pub welfare: f64,
    pub floor_ok: bool,
    pub cap_ok: bool,
    pub bands: QuantileBands,
}

impl PolicyOutcome {
    pub fn feasible(&self) -> bool {
        self.floor_ok && self.cap_ok
    }

    pub fn steady_state_pct(&self) -> f64 {
        self.pct_change.last().copied().unwrap_or(0.0)
    }
}

fn pct_path(traj: &Trajectory, m0: f64) -> Vec<f64> {
    traj.records
        .iter()
        .map(|r| 100.0 * (r.total / m0 - 1.0))
        .collect()
}

struct Candidate {
    subsidy: f64,
    allocation: f64,
    realization: Realization,
    trajectory: Trajectory,
    outlays: Vec<f64>,
    welfare: f64,
    floor_violation: f64,
    cap_violation: f64,
}

impl Candidate {
    fn feasible(&self) -> bool {
        self.floor_violation == 0.0 && self.cap_violation == 0.0
    }

    fn violation(&self) -> f64 {
        self.floor_violation + self.cap_violation
    }
}

fn evaluate(
    mode: Uncertainty,
    subsidy: f64,
    shocks: &ShockProcess,
    params: &EconParams,
    config: &PolicyConfig,
) -> Result<Candidate, PolicyError> {
    let s = decentralized_allocation_with_subsidy(params, shocks, subsidy, config.target_share);
    let (side, _) = indifference_subsidy(params, shocks);
    let m0 = params.initial_mass;
    let mut floor_violation: f64 = 0.0;
    let mut cap_violation: f64 = 0.0;
    let mut worst: Option<(Realization, Trajectory)> = None;
    for realization in scripted_realizations(mode, shocks, params.horizon) {
        let traj = simulate_allocation(mode.label(), s, realization, params)?;
        let (f, c) = violations(&traj, config, m0);
        floor_violation = floor_violation.max(f);
        cap_violation = cap_violation.max(c);
        let worse = match &worst {
            None => true,
            Some((_, w)) => {
                let key = (
                    traj.min_total(),
                    traj.totals().last().copied().unwrap_or(0.0),
                );
                let best = (w.min_total(), w.totals().last().copied().unwrap_or(0.0));
                key < best
            }
        };
        if worse {
            worst = Some((realization, traj));
        }
    }
    let (realization, trajectory) = worst.expect("the shock-free history is always scripted");
    let outlays: Vec<f64> = trajectory
        .records
        .iter()
        .map(|r| {
            subsidy
                * match side {
                    Disadvantaged::East => r.m_east,
                    Disadvantaged::South => r.m_south,
                }
        })
        .collect();
    let welfare = welfare(&trajectory, &outlays, params);
    Ok(Candidate {
        subsidy,
        allocation: s,
        realization,
        trajectory,
        outlays,
        welfare,
        floor_violation,
        cap_violation,
    })
}

/// Picks the welfare-maximising feasible subsidy for `mode`.
///
/// The risk-free baseline runs no programme, so its only candidate is zero.
/// When no candidate is feasible, the least-infeasible one is returned with
/// its flags cleared accordingly.
pub fn optimize_subsidy(
    mode: Uncertainty,
    shocks: &ShockProcess,
    params: &EconParams,
    config: &PolicyConfig,
) -> Result<PolicyOutcome, PolicyError> {
    config.validate()?;
    shocks.validate()?;
    let params = EconParams {
        horizon: config.horizon,
        ..*params
    };
    params.validate()?;

    let grid: Vec<f64> = match mode {
        Uncertainty::RiskFree => vec![0.0],
        _ => config.subsidy_grid.clone(),
    };
    let mut candidates = Vec::with_capacity(grid.len());
    for &subsidy in &grid {
        candidates.push(evaluate(mode, subsidy, shocks, &params, config)?);
    }

    let any_feasible = candidates.iter().any(Candidate::feasible);
    let better = |a: &Candidate, b: &Candidate| -> bool {
        if any_feasible {
            a.welfare > b.welfare + 1e-12 * b.welfare.abs()
                || (a.welfare >= b.welfare - 1e-12 * b.welfare.abs() && a.subsidy < b.subsidy)
        } else if (a.violation() - b.violation()).abs() > 1e-15 {
            a.violation() < b.violation()
        } else {
            a.welfare > b.welfare || (a.welfare == b.welfare && a.subsidy < b.subsidy)
        }
    };
    let mut chosen: Option<Candidate> = None;
    for c in candidates {
        if any_feasible && !c.feasible() {
            continue;
        }
        if chosen.as_ref().is_none_or(|b| better(&c, b)) {
            chosen = Some(c);
        }
    }
    let c = chosen.expect("subsidy grid is non-empty");
    let bands = monte_carlo_bands(mode, shocks, &params, config, c.allocation)?;
    Ok(PolicyOutcome {
        uncertainty: mode,
        subsidy: c.subsidy,
        allocation: c.allocation,
        realization: c.realization,
        pct_change: pct_path(&c.trajectory, params.initial_mass),
        total_outlay: c.outlays.iter().sum(),
        floor_ok: c.floor_violation == 0.0,
        cap_ok: c.cap_violation == 0.0,
        trajectory: c.trajectory,
        outlays: c.outlays,
        welfare: c.welfare,
        bands,
    })
}

/// One Monte Carlo draw of the shock history.
#[derive(Debug, Clone, PartialEq)]
pub struct Replication {
    pub zeta: f64,
    /// Event per period; period 0 never has a shock.
    pub events: Vec<ShockEvent>,
    pub totals: Vec<f64>,
}

/// Simulates replication `rep` on its own ChaCha stream of `seed`.
pub fn simulate_replication(
    mode: Uncertainty,
    shocks: &ShockProcess,
    params: &EconParams,
    allocation: f64,
    seed: u64,
    rep: u64,
) -> Replication {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    let support = shocks.belief(mode).support();
    let zeta = match mode {
        Uncertainty::RiskFree => shocks.zeta_point,
        _ => support.lo + (support.hi - support.lo) * rng.random::<f64>(),
    };
    let mut state = PopulationState::allocated(params.initial_mass, allocation);
    let mut events = vec![ShockEvent::None];
    let mut totals = vec![state.total()];
    for _ in 1..params.horizon {
        let arrival: f64 = rng.random();
        let region: f64 = rng.random();
        let event = if arrival < shocks.epsilon {
            if region < zeta {
                ShockEvent::East
            } else {
                ShockEvent::South
            }
        } else {
            ShockEvent::None
        };
        state = step(state, allocation, event, params);
        events.push(event);
        totals.push(state.total());
    }
    Replication {
        zeta,
        events,
        totals,
    }
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Per-period two-sided quantile bands of the percentage change in the
/// supplier total, over `config.replications` independent histories.
pub fn monte_carlo_bands(
    mode: Uncertainty,
    shocks: &ShockProcess,
    params: &EconParams,
    config: &PolicyConfig,
    allocation: f64,
) -> Result<QuantileBands, PolicyError> {
    config.validate()?;
    let params = EconParams {
        horizon: config.horizon,
        ..*params
    };
    let m0 = params.initial_mass;
    let paths: Vec<Vec<f64>> = (0..config.replications as u64)
        .into_par_iter()
        .map(|rep| {
            simulate_replication(mode, shocks, &params, allocation, config.seed, rep)
                .totals
                .into_iter()
                .map(|x| 100.0 * (x / m0 - 1.0))
                .collect()
        })
        .collect();

    let mut by_period: Vec<Vec<f64>> = (0..params.horizon)
        .map(|t| paths.iter().map(|p| p[t]).collect())
        .collect();
    for column in &mut by_period {
        column.sort_by(f64::total_cmp);
    }
    let levels = config
        .band_levels
        .iter()
        .map(|&level| {
            let tail = (1.0 - level / 100.0) / 2.0;
            BandLevel {
                level,
                lo: by_period.iter().map(|c| quantile(c, tail)).collect(),
                hi: by_period.iter().map(|c| quantile(c, 1.0 - tail)).collect(),
            }
        })
        .collect();
    Ok(QuantileBands { levels })
}

fn level_tag(level: f64) -> String {
    if level.fract() == 0.0 {
        format!("{}", level as i64)
    } else {
        level.to_string()
    }
}

/// Writes one row per scenario and period.
pub fn write_band_csv<W: Write>(outcomes: &[PolicyOutcome], out: W) -> std::io::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    let mut header = vec![
        "period".to_string(),
        "scenario".to_string(),
        "pct_change_point".to_string(),
    ];
    if let Some(first) = outcomes.first() {
        for b in &first.bands.levels {
            header.push(format!("lo{}", level_tag(b.level)));
            header.push(format!("hi{}", level_tag(b.level)));
        }
    }
    header.push("subsidy_outlay".to_string());
    writer
        .write_record(&header)
        .map_err(std::io::Error::other)?;
    for o in outcomes {
        for (t, pct) in o.pct_change.iter().enumerate() {
            let mut row = vec![
                t.to_string(),
                o.uncertainty.label().to_string(),
                pct.to_string(),
            ];
            for b in &o.bands.levels {
                row.push(b.lo[t].to_string());
                row.push(b.hi[t].to_string());
            }
            row.push(o.outlays[t].to_string());
            writer.write_record(&row).map_err(std::io::Error::other)?;
        }
    }
    writer.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn default_gap() -> f64 {
        // (1 - 0.1*0.2) * 0.8 / (1 - 0.1*0.8) - 0.8
        0.98 * 0.8 / 0.92 - 0.8
    }

    #[test]
    fn gap_matches_hand_value() {
        let (side, gap) = indifference_subsidy(&EconParams::default(), &ShockProcess::default());
        assert_eq!(side, Disadvantaged::East);
        assert_abs_diff_eq!(gap, default_gap(), epsilon = 1e-15);
    }

    #[test]
    fn subsidy_ramp() {
        let p = EconParams::default();
        let sh = ShockProcess::default();
        assert_eq!(
            decentralized_allocation_with_subsidy(&p, &sh, 0.0, 0.5),
            0.0
        );
        let at_gap = decentralized_allocation_with_subsidy(&p, &sh, default_gap(), 0.5);
        assert_abs_diff_eq!(at_gap, 0.5, epsilon = 1e-12);
        assert_eq!(
            decentralized_allocation_with_subsidy(&p, &sh, 10.0, 0.5),
            0.5
        );
        let half = decentralized_allocation_with_subsidy(&p, &sh, default_gap() / 2.0, 0.5);
        assert_abs_diff_eq!(half, 0.25, epsilon = 1e-12);
    }

    #[test]
    fn subsidy_at_gap_equalises_payoffs() {
        let p = EconParams::default();
        let sh = ShockProcess::default();
        let gap = indifference_subsidy(&p, &sh).1;
        let east = (1.0 - 0.1 * 0.8) * (p.price - p.cost_east + gap);
        let south = (1.0 - 0.1 * 0.2) * (p.price - p.cost_south);
        assert_abs_diff_eq!(east, south, epsilon = 1e-12);
    }

    #[test]
    fn ramp_targets_the_south_when_east_is_favoured() {
        let p = EconParams::default();
        let sh = ShockProcess {
            zeta_point: 0.2,
            ..ShockProcess::default()
        };
        assert_eq!(
            decentralized_allocation_with_subsidy(&p, &sh, 0.0, 0.5),
            1.0
        );
        assert_eq!(
            decentralized_allocation_with_subsidy(&p, &sh, 5.0, 0.5),
            0.5
        );
    }

    proptest! {
        #[test]
        fn ramp_is_monotone_and_clamped(a in 0.0f64..0.3, b in 0.0f64..0.3, target in 0.05f64..1.0) {
            let p = EconParams::default();
            let sh = ShockProcess::default();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let s_lo = decentralized_allocation_with_subsidy(&p, &sh, lo, target);
            let s_hi = decentralized_allocation_with_subsidy(&p, &sh, hi, target);
            prop_assert!(s_lo <= s_hi);
            prop_assert!(s_hi <= target + 1e-15);
        }
    }

    #[test]
    fn welfare_accounting() {
        let p = EconParams {
            horizon: 3,
            growth: 0.0,
            ..EconParams::default()
        };
        let t = simulate_allocation("x", 0.5, Realization::NoShock, &p).unwrap();
        // Flows of 80 each period, discounted at 0.9.
        assert_abs_diff_eq!(
            welfare(&t, &[], &p),
            80.0 * (1.0 + 0.9 + 0.81),
            epsilon = 1e-9
        );
        let outlays = [1.0, 2.0, 3.0];
        assert_abs_diff_eq!(
            welfare(&t, &outlays, &p),
            79.0 + 0.9 * 78.0 + 0.81 * 77.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn welfare_of_an_empty_population_is_zero() {
        let p = EconParams {
            horizon: 4,
            ..EconParams::default()
        };
        let mut t = simulate_allocation("x", 0.0, Realization::ShockSouth(1), &p).unwrap();
        for r in &mut t.records {
            r.total = 0.0;
            r.m_east = 0.0;
            r.m_south = 0.0;
            r.flow_payoff = 0.0;
        }
        assert_eq!(welfare(&t, &[0.0; 4], &p), 0.0);
    }

    fn quick_config() -> PolicyConfig {
        PolicyConfig {
            replications: 500,
            ..PolicyConfig::default()
        }
    }

    #[test]
    fn risk_free_has_no_programme() {
        let o = optimize_subsidy(
            Uncertainty::RiskFree,
            &ShockProcess::default(),
            &EconParams::default(),
            &quick_config(),
        )
        .unwrap();
        assert_eq!(o.subsidy, 0.0);
        assert_eq!(o.total_outlay, 0.0);
    }

    #[test]
    fn risk_and_ambiguity_disburse_the_same() {
        let cfg = quick_config();
        let sh = ShockProcess::default();
        let p = EconParams::default();
        let r = optimize_subsidy(Uncertainty::Risk, &sh, &p, &cfg).unwrap();
        let a = optimize_subsidy(Uncertainty::Ambiguity, &sh, &p, &cfg).unwrap();
        assert!(r.feasible() && a.feasible());
        assert!(r.subsidy > 0.0);
        assert_eq!(r.total_outlay, a.total_outlay);
    }

    #[test]
    fn cap_below_initial_mass_is_infeasible() {
        let cfg = PolicyConfig {
            cap: 0.9,
            ..quick_config()
        };
        for mode in Uncertainty::ALL {
            let o = optimize_subsidy(mode, &ShockProcess::default(), &EconParams::default(), &cfg)
                .unwrap();
            assert!(!o.cap_ok, "{mode:?}");
            assert!(!o.feasible());
        }
    }

    #[test]
    fn invalid_configs() {
        let base = PolicyConfig::default();
        for cfg in [
            PolicyConfig {
                floor: 0.0,
                ..base.clone()
            },
            PolicyConfig {
                cap: 0.4,
                ..base.clone()
            },
            PolicyConfig {
                subsidy_grid: vec![],
                ..base.clone()
            },
            PolicyConfig {
                subsidy_grid: vec![-0.1],
                ..base.clone()
            },
            PolicyConfig {
                replications: 0,
                ..base.clone()
            },
        ] {
            assert!(matches!(cfg.validate(), Err(PolicyError::InvalidConfig(_))));
        }
    }

    #[test]
    fn no_shocks_collapse_the_bands() {
        let sh = ShockProcess {
            epsilon: 0.0,
            ..ShockProcess::default()
        };
        let cfg = quick_config();
        let o = optimize_subsidy(Uncertainty::Risk, &sh, &EconParams::default(), &cfg).unwrap();
        assert_eq!(o.realization, Realization::NoShock);
        for b in &o.bands.levels {
            for t in 0..cfg.horizon {
                assert_abs_diff_eq!(b.lo[t], o.pct_change[t], epsilon = 1e-9);
                assert_abs_diff_eq!(b.hi[t], o.pct_change[t], epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn single_replication_gives_identical_bands() {
        let cfg = PolicyConfig {
            replications: 1,
            ..PolicyConfig::default()
        };
        let bands = monte_carlo_bands(
            Uncertainty::Ambiguity,
            &ShockProcess::default(),
            &EconParams::default(),
            &cfg,
            0.5,
        )
        .unwrap();
        for b in &bands.levels[1..] {
            assert_eq!(b.lo, bands.levels[0].lo);
            assert_eq!(b.hi, bands.levels[0].hi);
            assert_eq!(b.lo, b.hi);
        }
    }

    #[test]
    fn quantile_interpolates() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&x, 0.0), 1.0);
        assert_eq!(quantile(&x, 1.0), 4.0);
        assert_abs_diff_eq!(quantile(&x, 0.5), 2.5);
        assert_abs_diff_eq!(quantile(&x, 0.25), 1.75);
    }

    #[test]
    fn risk_free_replications_use_the_point_zeta() {
        let sh = ShockProcess::default();
        let p = EconParams {
            horizon: 5,
            ..EconParams::default()
        };
        let r = simulate_replication(Uncertainty::RiskFree, &sh, &p, 0.5, 1, 3);
        assert_eq!(r.zeta, 0.8);
        assert_eq!(r.events.len(), 5);
        let r2 = simulate_replication(Uncertainty::Risk, &sh, &p, 0.5, 1, 3);
        assert!((0.5..=1.0).contains(&r2.zeta));
    }

    #[test]
    fn band_csv_header() {
        let cfg = quick_config();
        let o = optimize_subsidy(
            Uncertainty::Risk,
            &ShockProcess::default(),
            &EconParams::default(),
            &cfg,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_band_csv(&[o], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "period,scenario,pct_change_point,lo90,hi90,lo95,hi95,lo99,hi99,subsidy_outlay"
        );
        assert_eq!(text.lines().count(), 1 + cfg.horizon);
    }
}
