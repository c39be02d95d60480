//! Two-location supplier survival model.
//!
//! A downstream firm buys from a continuum of small upstream suppliers located
//! in the East or the South. Each period an aggregate shock arrives with
//! probability `ε`; given a shock, it strikes the East with probability `ζ`
//! and the South otherwise, and every supplier in the struck region perishes.
//! Survivors attract proportional entry at rate `g` and relocate costlessly at
//! the start of every period, so the population is summarised by its total
//! mass and the East share `s` chosen each period.
//!
//! Because revenue, cost and entry are all linear in mass, the downstream
//! value of a stationary share is proportional to the current mass. The
//! allocation problem therefore reduces to choosing `s` on a grid.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default resolution of the allocation grid.
pub const DEFAULT_GRID_STEP: f64 = 0.01;

/// Nodes used to integrate over a uniformly distributed `ζ`.
pub const RISK_QUADRATURE_NODES: usize = 65;

#[derive(Debug, Error, PartialEq)]
pub enum SurvivalError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("allocation grid step {0} does not divide [0, 1]")]
    InvalidGrid(f64),
    #[error("no feasible allocation on the grid with step {0}")]
    EmptyGrid(f64),
    #[error("stationary value diverges: discount * (1 + growth) * survival = {product} >= 1")]
    Divergent { product: f64 },
    #[error("risk-averse utility needs a positive value, got {0}")]
    NonPositiveValue(f64),
    #[error("shock period {period} outside horizon 1..{horizon}")]
    ShockOutsideHorizon { period: usize, horizon: usize },
}

/// Economic primitives of the survival model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EconParams {
    /// Price per intermediate unit received by a supplier.
    pub price: f64,
    /// Downstream revenue per surviving supplier and period.
    pub revenue: f64,
    pub cost_east: f64,
    pub cost_south: f64,
    /// Proportional entry rate per period.
    pub growth: f64,
    /// Discount factor in (0, 1).
    pub discount: f64,
    /// Downstream relative risk aversion.
    pub risk_aversion: f64,
    /// Initial supplier mass.
    pub initial_mass: f64,
    /// Number of periods, including period 0.
    pub horizon: usize,
}

impl Default for EconParams {
    fn default() -> Self {
        EconParams {
            price: 1.0,
            revenue: 1.0,
            cost_east: 0.2,
            cost_south: 0.2,
            growth: 0.1,
            discount: 0.9,
            risk_aversion: 2.0,
            initial_mass: 100.0,
            horizon: 20,
        }
    }
}

impl EconParams {
    pub fn validate(&self) -> Result<(), SurvivalError> {
        let bad = |msg: String| Err(SurvivalError::InvalidParameter(msg));
        for (name, v) in [
            ("price", self.price),
            ("revenue", self.revenue),
            ("cost_east", self.cost_east),
            ("cost_south", self.cost_south),
            ("growth", self.growth),
            ("risk_aversion", self.risk_aversion),
        ] {
            if !v.is_finite() || v < 0.0 {
                return bad(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        if !(self.discount > 0.0 && self.discount < 1.0) {
            return bad(format!(
                "discount must lie in (0, 1), got {}",
                self.discount
            ));
        }
        if !(self.initial_mass.is_finite() && self.initial_mass > 0.0) {
            return bad(format!(
                "initial_mass must be positive, got {}",
                self.initial_mass
            ));
        }
        if self.horizon == 0 {
            return bad("horizon must be at least one period".into());
        }
        Ok(())
    }

    /// Per-unit-mass cost when a share `s` of suppliers sits in the East.
    pub fn unit_cost(&self, s: f64) -> f64 {
        s * self.cost_east + (1.0 - s) * self.cost_south
    }
}

/// A closed interval of shock-location probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZetaInterval {
    pub lo: f64,
    pub hi: f64,
}

impl ZetaInterval {
    pub fn new(lo: f64, hi: f64) -> Self {
        ZetaInterval { lo, hi }
    }

    pub fn mean(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    fn validate(&self, name: &str) -> Result<(), SurvivalError> {
        if !(0.0..=1.0).contains(&self.lo) || !(0.0..=1.0).contains(&self.hi) || self.lo > self.hi {
            return Err(SurvivalError::InvalidParameter(format!(
                "{name} must satisfy 0 <= lo <= hi <= 1, got [{}, {}]",
                self.lo, self.hi
            )));
        }
        Ok(())
    }
}

/// Aggregate shock process together with the three descriptions of `ζ`
/// used by the uncertainty modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShockProcess {
    /// Per-period arrival probability.
    pub epsilon: f64,
    /// Known probability that a shock strikes the East (risk-free mode).
    pub zeta_point: f64,
    /// Support of the uniform distribution of `ζ` (risk mode).
    pub zeta_risk: ZetaInterval,
    /// Set of `ζ` values with unknown distribution (ambiguity mode).
    pub zeta_ambiguity: ZetaInterval,
    /// Period at which scripted shocks of the scenario grid strike.
    pub shock_period: usize,
}

impl Default for ShockProcess {
    fn default() -> Self {
        ShockProcess {
            epsilon: 0.1,
            zeta_point: 0.8,
            zeta_risk: ZetaInterval::new(0.5, 1.0),
            zeta_ambiguity: ZetaInterval::new(0.0, 1.0),
            shock_period: 10,
        }
    }
}

impl ShockProcess {
    pub fn validate(&self) -> Result<(), SurvivalError> {
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(SurvivalError::InvalidParameter(format!(
                "epsilon must lie in [0, 1], got {}",
                self.epsilon
            )));
        }
        if !(0.0..=1.0).contains(&self.zeta_point) {
            return Err(SurvivalError::InvalidParameter(format!(
                "zeta_point must lie in [0, 1], got {}",
                self.zeta_point
            )));
        }
        self.zeta_risk.validate("zeta_risk")?;
        self.zeta_ambiguity.validate("zeta_ambiguity")
    }

    pub fn belief(&self, mode: Uncertainty) -> ZetaBelief {
        match mode {
            Uncertainty::RiskFree => ZetaBelief::Point(self.zeta_point),
            Uncertainty::Risk => ZetaBelief::Uniform(self.zeta_risk),
            Uncertainty::Ambiguity => ZetaBelief::Ambiguous(self.zeta_ambiguity),
        }
    }
}

/// What decision makers know about `ζ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZetaBelief {
    Point(f64),
    Uniform(ZetaInterval),
    Ambiguous(ZetaInterval),
}

impl ZetaBelief {
    /// Smallest and largest `ζ` the belief admits.
    pub fn support(&self) -> ZetaInterval {
        match *self {
            ZetaBelief::Point(z) => ZetaInterval::new(z, z),
            ZetaBelief::Uniform(i) | ZetaBelief::Ambiguous(i) => i,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Uncertainty {
    RiskFree,
    Risk,
    Ambiguity,
}

impl Uncertainty {
    pub const ALL: [Uncertainty; 3] = [
        Uncertainty::RiskFree,
        Uncertainty::Risk,
        Uncertainty::Ambiguity,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Uncertainty::RiskFree => "Risk-free",
            Uncertainty::Risk => "GSC risk",
            Uncertainty::Ambiguity => "Ambiguity",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Organization {
    /// Atomistic suppliers choose their own location.
    Outsourcing,
    /// The downstream firm chooses every supplier's location.
    Integrated,
}

impl Organization {
    pub const ALL: [Organization; 2] = [Organization::Outsourcing, Organization::Integrated];

    pub fn label(&self) -> &'static str {
        match self {
            Organization::Outsourcing => "outsourcing",
            Organization::Integrated => "vertical integration",
        }
    }
}

/// Scripted shock history of a single run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Realization {
    NoShock,
    ShockEast(usize),
    ShockSouth(usize),
}

impl Realization {
    pub fn event_at(&self, period: usize) -> ShockEvent {
        match *self {
            Realization::ShockEast(p) if p == period => ShockEvent::East,
            Realization::ShockSouth(p) if p == period => ShockEvent::South,
            _ => ShockEvent::None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Realization::NoShock => "No aggregate shock",
            Realization::ShockEast(_) => "Aggregate shock in East",
            Realization::ShockSouth(_) => "Aggregate shock in South",
        }
    }

    fn check(&self, horizon: usize) -> Result<(), SurvivalError> {
        match *self {
            Realization::ShockEast(p) | Realization::ShockSouth(p) if p == 0 || p >= horizon => {
                Err(SurvivalError::ShockOutsideHorizon { period: p, horizon })
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShockEvent {
    None,
    East,
    South,
}

impl fmt::Display for ShockEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ShockEvent::None => "none",
            ShockEvent::East => "east",
            ShockEvent::South => "south",
        })
    }
}

/// One cell of the scenario grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub uncertainty: Uncertainty,
    pub organization: Organization,
    pub realization: Realization,
}

impl ScenarioSpec {
    pub fn label(&self) -> String {
        format!(
            "{}, {} / {}",
            self.uncertainty.label(),
            self.organization.label(),
            self.realization.label()
        )
    }
}

/// Supplier masses by location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationState {
    pub m_east: f64,
    pub m_south: f64,
}

impl PopulationState {
    pub fn new(m_east: f64, m_south: f64) -> Self {
        PopulationState { m_east, m_south }
    }

    /// Total mass split at East share `s`.
    pub fn allocated(total: f64, s: f64) -> Self {
        PopulationState {
            m_east: s * total,
            m_south: (1.0 - s) * total,
        }
    }

    pub fn total(&self) -> f64 {
        self.m_east + self.m_south
    }

    pub fn is_alive(&self) -> bool {
        self.total() > 0.0
    }
}

/// Expected fraction of suppliers surviving one period at East share `s`.
pub fn survival_factor(s: f64, zeta: f64, eps: f64) -> f64 {
    (1.0 - eps) + eps * (zeta * (1.0 - s) + (1.0 - zeta) * s)
}

/// Discounted downstream value per unit of supplier mass when the East share
/// is held at `s` forever.
pub fn stationary_value(
    s: f64,
    zeta: f64,
    eps: f64,
    params: &EconParams,
) -> Result<f64, SurvivalError> {
    let product = params.discount * (1.0 + params.growth) * survival_factor(s, zeta, eps);
    if product >= 1.0 {
        return Err(SurvivalError::Divergent { product });
    }
    Ok((params.revenue - params.unit_cost(s)) / (1.0 - product))
}

/// Constant-relative-risk-aversion utility, logarithmic at `rho = 1`.
pub fn crra(value: f64, rho: f64) -> Result<f64, SurvivalError> {
    if rho == 0.0 {
        return Ok(value);
    }
    if value <= 0.0 {
        return Err(SurvivalError::NonPositiveValue(value));
    }
    if (rho - 1.0).abs() < 1e-12 {
        Ok(value.ln())
    } else {
        Ok(value.powf(1.0 - rho) / (1.0 - rho))
    }
}

/// Probability that a shock strikes `east` (or the South) under a point `ζ`.
fn hit_probability(east: bool, zeta: f64) -> f64 {
    if east {
        zeta
    } else {
        1.0 - zeta
    }
}

/// One-period expected payoff of an atomistic supplier, where `hit` is the
/// probability that a shock strikes its location.
pub fn supplier_payoff(eps: f64, hit: f64, price: f64, cost: f64) -> f64 {
    (1.0 - eps * hit) * (price - cost)
}

/// Hit probabilities `(east, south)` an atomistic supplier uses under `belief`:
/// the point value, the mean, or the worst case for each location.
pub fn decentralized_hit_probabilities(belief: ZetaBelief) -> (f64, f64) {
    match belief {
        ZetaBelief::Point(z) => (hit_probability(true, z), hit_probability(false, z)),
        ZetaBelief::Uniform(i) => {
            let z = i.mean();
            (hit_probability(true, z), hit_probability(false, z))
        }
        ZetaBelief::Ambiguous(i) => (i.hi, 1.0 - i.lo),
    }
}

fn grid_points(step: f64) -> Result<Vec<f64>, SurvivalError> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(SurvivalError::InvalidGrid(step));
    }
    let n = (1.0 / step).round();
    if (n * step - 1.0).abs() > 1e-9 {
        return Err(SurvivalError::InvalidGrid(step));
    }
    let n = n as usize;
    Ok((0..=n).map(|k| k as f64 / n as f64).collect())
}

fn quadrature(interval: ZetaInterval) -> Vec<(f64, f64)> {
    if interval.hi - interval.lo <= 0.0 {
        return vec![(interval.lo, 1.0)];
    }
    let n = RISK_QUADRATURE_NODES;
    let h = (interval.hi - interval.lo) / (n - 1) as f64;
    (0..n)
        .map(|k| {
            let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
            (interval.lo + k as f64 * h, w / (n - 1) as f64)
        })
        .collect()
}

/// Objective of the integrated firm at share `s`.
pub fn integrated_objective(
    s: f64,
    belief: ZetaBelief,
    eps: f64,
    params: &EconParams,
) -> Result<f64, SurvivalError> {
    match belief {
        ZetaBelief::Point(z) => stationary_value(s, z, eps, params),
        ZetaBelief::Uniform(i) => {
            let mut total = 0.0;
            for (z, w) in quadrature(i) {
                total += w * crra(stationary_value(s, z, eps, params)?, params.risk_aversion)?;
            }
            Ok(total)
        }
        ZetaBelief::Ambiguous(i) => {
            // The value is monotone in ζ, so the adversary picks an endpoint.
            let lo = stationary_value(s, i.lo, eps, params)?;
            let hi = stationary_value(s, i.hi, eps, params)?;
            Ok(lo.min(hi))
        }
    }
}

/// East share chosen under `scenario`.
///
/// Atomistic suppliers compare one-period expected payoffs and all move to
/// the weakly better location, ties going to the South. The integrated firm
/// maximises its objective over interior grid points, which keeps some
/// suppliers in each location.
pub fn allocate(
    scenario: &ScenarioSpec,
    shocks: &ShockProcess,
    params: &EconParams,
    grid_step: f64,
) -> Result<f64, SurvivalError> {
    let grid = grid_points(grid_step)?;
    let belief = shocks.belief(scenario.uncertainty);
    match scenario.organization {
        Organization::Outsourcing => {
            let (hit_east, hit_south) = decentralized_hit_probabilities(belief);
            let east = supplier_payoff(shocks.epsilon, hit_east, params.price, params.cost_east);
            let south = supplier_payoff(shocks.epsilon, hit_south, params.price, params.cost_south);
            Ok(if east > south { 1.0 } else { 0.0 })
        }
        Organization::Integrated => {
            let interior = &grid[1..grid.len().saturating_sub(1).max(1)];
            let mut best: Option<(f64, f64)> = None;
            for &s in interior {
                let value = integrated_objective(s, belief, shocks.epsilon, params)?;
                if best.is_none_or(|(_, v)| value > v) {
                    best = Some((s, value));
                }
            }
            best.map(|(s, _)| s)
                .ok_or(SurvivalError::EmptyGrid(grid_step))
        }
    }
}

/// Advances the population one period: relocation to share `s`, the shock,
/// then proportional entry. A population wiped out stays extinct.
pub fn step(
    state: PopulationState,
    s: f64,
    event: ShockEvent,
    params: &EconParams,
) -> PopulationState {
    let relocated = PopulationState::allocated(state.total(), s);
    let survivors = match event {
        ShockEvent::None => relocated,
        ShockEvent::East => PopulationState::new(0.0, relocated.m_south),
        ShockEvent::South => PopulationState::new(relocated.m_east, 0.0),
    };
    if !survivors.is_alive() {
        return PopulationState::new(0.0, 0.0);
    }
    let factor = 1.0 + params.growth;
    PopulationState::new(survivors.m_east * factor, survivors.m_south * factor)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodRecord {
    pub period: usize,
    pub m_east: f64,
    pub m_south: f64,
    pub total: f64,
    /// East share chosen for the period.
    pub share_east: f64,
    pub event: ShockEvent,
    /// Revenue on the operating suppliers minus their location costs.
    pub flow_payoff: f64,
    /// Downstream revenue handed to suppliers; the downstream firm keeps nothing.
    pub transfer: f64,
}

impl PeriodRecord {
    fn new(
        period: usize,
        state: PopulationState,
        s: f64,
        event: ShockEvent,
        p: &EconParams,
    ) -> Self {
        let total = state.total();
        let revenue = p.revenue * total;
        PeriodRecord {
            period,
            m_east: state.m_east,
            m_south: state.m_south,
            total,
            share_east: s,
            event,
            flow_payoff: revenue - p.cost_east * state.m_east - p.cost_south * state.m_south,
            transfer: revenue,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub label: String,
    pub allocation: f64,
    pub records: Vec<PeriodRecord>,
}

impl Trajectory {
    pub fn extinct(&self) -> bool {
        self.records.last().is_some_and(|r| r.total <= 0.0)
    }

    pub fn totals(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.total).collect()
    }

    pub fn min_total(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.total)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_total(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.total)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Runs a constant East share `s` through a scripted realization.
pub fn simulate_allocation(
    label: impl Into<String>,
    s: f64,
    realization: Realization,
    params: &EconParams,
) -> Result<Trajectory, SurvivalError> {
    params.validate()?;
    realization.check(params.horizon)?;
    let mut state = PopulationState::allocated(params.initial_mass, s);
    let mut records = Vec::with_capacity(params.horizon);
    records.push(PeriodRecord::new(0, state, s, ShockEvent::None, params));
    for t in 1..params.horizon {
        let event = realization.event_at(t);
        state = step(state, s, event, params);
        records.push(PeriodRecord::new(t, state, s, event, params));
    }
    Ok(Trajectory {
        label: label.into(),
        allocation: s,
        records,
    })
}

/// Simulates one scenario cell. The allocation rule is stationary, so the
/// share is chosen once and applied every period.
pub fn simulate(
    scenario: &ScenarioSpec,
    shocks: &ShockProcess,
    params: &EconParams,
) -> Result<Trajectory, SurvivalError> {
    params.validate()?;
    shocks.validate()?;
    let s = allocate(scenario, shocks, params, DEFAULT_GRID_STEP)?;
    simulate_allocation(scenario.label(), s, scenario.realization, params)
}

/// The 18 cells of the scenario grid, uncertainty-major, then organization,
/// then realization. Scripted shocks strike at `shocks.shock_period`.
pub fn grid_scenarios(shocks: &ShockProcess) -> Vec<ScenarioSpec> {
    let t = shocks.shock_period;
    let mut cells = Vec::with_capacity(18);
    for organization in Organization::ALL {
        for uncertainty in Uncertainty::ALL {
            for realization in [
                Realization::NoShock,
                Realization::ShockEast(t),
                Realization::ShockSouth(t),
            ] {
                cells.push(ScenarioSpec {
                    uncertainty,
                    organization,
                    realization,
                });
            }
        }
    }
    cells
}

pub fn run_grid(
    shocks: &ShockProcess,
    params: &EconParams,
) -> Result<Vec<Trajectory>, SurvivalError> {
    grid_scenarios(shocks)
        .par_iter()
        .map(|cell| simulate(cell, shocks, params))
        .collect()
}

pub const TRAJECTORY_HEADER: [&str; 9] = [
    "period",
    "cell_label",
    "m_east",
    "m_south",
    "total",
    "share_east",
    "shock_event",
    "flow_payoff",
    "transfer",
];

pub fn write_trajectories_csv<W: Write>(
    trajectories: &[Trajectory],
    out: W,
) -> std::io::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer
        .write_record(TRAJECTORY_HEADER)
        .map_err(std::io::Error::other)?;
    for traj in trajectories {
        for r in &traj.records {
            writer
                .write_record([
                    r.period.to_string(),
                    traj.label.clone(),
                    r.m_east.to_string(),
                    r.m_south.to_string(),
                    r.total.to_string(),
                    r.share_east.to_string(),
                    r.event.to_string(),
                    r.flow_payoff.to_string(),
                    r.transfer.to_string(),
                ])
                .map_err(std::io::Error::other)?;
        }
    }
    writer.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scenario(u: Uncertainty, o: Organization, r: Realization) -> ScenarioSpec {
        ScenarioSpec {
            uncertainty: u,
            organization: o,
            realization: r,
        }
    }

    #[test]
    fn survival_factor_corners() {
        assert_eq!(survival_factor(0.3, 0.9, 0.0), 1.0);
        assert_eq!(survival_factor(0.0, 1.0, 1.0), 1.0);
        for zeta in [0.0, 0.2, 0.8, 1.0] {
            assert_abs_diff_eq!(survival_factor(0.5, zeta, 0.3), 1.0 - 0.15, epsilon = 1e-15);
        }
    }

    proptest! {
        #[test]
        fn survival_factor_slope(s in 0.01f64..0.99, zeta in 0.0f64..1.0, eps in 0.0f64..1.0) {
            let h = 1e-6;
            let fd = (survival_factor(s + h, zeta, eps) - survival_factor(s - h, zeta, eps)) / (2.0 * h);
            prop_assert!((fd - eps * (1.0 - 2.0 * zeta)).abs() < 1e-6);
            let mu = survival_factor(s, zeta, eps);
            prop_assert!(mu >= 1.0 - eps - 1e-15 && mu <= 1.0 + 1e-15);
        }

        #[test]
        fn extinction_is_absorbing(s in 0.0f64..1.0, events in proptest::collection::vec(0u8..3, 1..30)) {
            let params = EconParams::default();
            let mut state = PopulationState::new(0.0, 0.0);
            for e in events {
                let event = [ShockEvent::None, ShockEvent::East, ShockEvent::South][e as usize];
                state = step(state, s, event, &params);
                prop_assert_eq!(state, PopulationState::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn stationary_value_limits() {
        let mut p = EconParams {
            growth: 0.0,
            ..EconParams::default()
        };
        let v = stationary_value(0.3, 0.8, 0.0, &p).unwrap();
        assert_abs_diff_eq!(v, 0.8 / (1.0 - 0.9), epsilon = 1e-12);
        p.discount = 1e-12;
        let v = stationary_value(0.3, 0.8, 0.1, &p).unwrap();
        assert_abs_diff_eq!(v, 0.8, epsilon = 1e-9);
    }

    #[test]
    fn stationary_value_rejects_divergence() {
        let p = EconParams {
            growth: 0.2,
            ..EconParams::default()
        };
        match stationary_value(0.5, 0.8, 0.0, &p) {
            Err(SurvivalError::Divergent { product }) => assert_abs_diff_eq!(product, 1.08),
            other => panic!("unexpected {other:?}"),
        }
    }

    /// Discounted flow payoffs per unit of initial mass, averaged over random
    /// shock paths. Independent of the closed form.
    fn monte_carlo_value(s: f64, zeta: f64, eps: f64, p: &EconParams, paths: usize) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let periods = 400;
        let mut sum = 0.0;
        for _ in 0..paths {
            let mut mass = 1.0;
            let mut disc = 1.0;
            let mut value = 0.0;
            for _ in 0..periods {
                if mass == 0.0 {
                    break;
                }
                value += disc * mass * (p.revenue - p.unit_cost(s));
                disc *= p.discount;
                if rng.random::<f64>() < eps {
                    mass *= if rng.random::<f64>() < zeta {
                        1.0 - s
                    } else {
                        s
                    };
                }
                mass *= 1.0 + p.growth;
            }
            sum += value;
        }
        sum / paths as f64
    }

    #[test]
    fn stationary_value_agrees_with_monte_carlo() {
        let p = EconParams {
            revenue: 1.0,
            cost_east: 0.2,
            cost_south: 0.2,
            growth: 0.0,
            discount: 0.9,
            ..EconParams::default()
        };
        for s in [0.0, 0.5] {
            let exact = stationary_value(s, 0.8, 0.1, &p).unwrap();
            let mc = monte_carlo_value(s, 0.8, 0.1, &p, 20_000);
            assert!(
                (mc - exact).abs() / exact < 0.01,
                "s={s}: closed form {exact}, monte carlo {mc}"
            );
        }
    }

    #[test]
    fn outsourcing_corners_in_the_south() {
        let shocks = ShockProcess::default();
        let p = EconParams::default();
        for u in Uncertainty::ALL {
            let s = allocate(
                &scenario(u, Organization::Outsourcing, Realization::NoShock),
                &shocks,
                &p,
                DEFAULT_GRID_STEP,
            )
            .unwrap();
            assert_eq!(s, 0.0, "{u:?}");
        }
        // A cheap enough East overturns the corner.
        let cheap_east = EconParams {
            cost_east: 0.0,
            ..p
        };
        let s = allocate(
            &scenario(
                Uncertainty::RiskFree,
                Organization::Outsourcing,
                Realization::NoShock,
            ),
            &shocks,
            &cheap_east,
            DEFAULT_GRID_STEP,
        )
        .unwrap();
        assert_eq!(s, 1.0);
    }

    #[test]
    fn integrated_ambiguity_splits_evenly() {
        let s = allocate(
            &scenario(
                Uncertainty::Ambiguity,
                Organization::Integrated,
                Realization::NoShock,
            ),
            &ShockProcess::default(),
            &EconParams::default(),
            DEFAULT_GRID_STEP,
        )
        .unwrap();
        assert_eq!(s, 0.5);
    }

    #[test]
    fn integrated_risk_free_is_interior() {
        let s = allocate(
            &scenario(
                Uncertainty::RiskFree,
                Organization::Integrated,
                Realization::NoShock,
            ),
            &ShockProcess::default(),
            &EconParams::default(),
            DEFAULT_GRID_STEP,
        )
        .unwrap();
        assert_eq!(s, DEFAULT_GRID_STEP);
    }

    /// Expected CRRA utility by a fine midpoint rule, written independently of
    /// the production quadrature.
    fn brute_force_risk_objective(s: f64, lo: f64, hi: f64, eps: f64, p: &EconParams) -> f64 {
        let n = 4000;
        let rho = p.risk_aversion;
        (0..n)
            .map(|k| {
                let zeta = lo + (hi - lo) * (k as f64 + 0.5) / n as f64;
                let mu = (1.0 - eps) + eps * (zeta * (1.0 - s) + (1.0 - zeta) * s);
                let v = (p.revenue - p.unit_cost(s)) / (1.0 - p.discount * (1.0 + p.growth) * mu);
                if rho == 0.0 {
                    v
                } else if rho == 1.0 {
                    v.ln()
                } else {
                    v.powf(1.0 - rho) / (1.0 - rho)
                }
            })
            .sum::<f64>()
            / n as f64
    }

    #[test]
    fn risk_aversion_raises_diversification() {
        let shocks = ShockProcess {
            epsilon: 0.2,
            zeta_risk: ZetaInterval::new(0.2, 1.0),
            ..ShockProcess::default()
        };
        let mut previous = 0.0;
        for rho in [0.0, 2.0, 8.0] {
            let p = EconParams {
                risk_aversion: rho,
                ..EconParams::default()
            };
            let s = allocate(
                &scenario(
                    Uncertainty::Risk,
                    Organization::Integrated,
                    Realization::NoShock,
                ),
                &shocks,
                &p,
                DEFAULT_GRID_STEP,
            )
            .unwrap();
            let objective = |x: f64| brute_force_risk_objective(x, 0.2, 1.0, 0.2, &p);
            let best = (1..100)
                .map(|k| objective(k as f64 / 100.0))
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(
                (objective(s) - best).abs() <= 1e-6 * best.abs(),
                "rho={rho}: s={s} is not the exhaustive argmax"
            );
            assert!(s >= previous, "rho={rho}: {s} < {previous}");
            previous = s;
        }
        assert!(previous > 0.01);
    }

    #[test]
    fn grid_step_must_divide_unit_interval() {
        let r = allocate(
            &scenario(
                Uncertainty::Risk,
                Organization::Integrated,
                Realization::NoShock,
            ),
            &ShockProcess::default(),
            &EconParams::default(),
            0.3,
        );
        assert_eq!(r, Err(SurvivalError::InvalidGrid(0.3)));
    }

    #[test]
    fn step_arithmetic() {
        let p = EconParams {
            growth: 0.1,
            ..EconParams::default()
        };
        let s0 = PopulationState::new(0.0, 100.0);
        let after = step(s0, 0.0, ShockEvent::East, &p);
        assert_abs_diff_eq!(after.total(), 110.0, epsilon = 1e-12);
        assert_eq!(
            step(s0, 0.0, ShockEvent::South, &p),
            PopulationState::new(0.0, 0.0)
        );
        let half = step(PopulationState::new(30.0, 70.0), 0.5, ShockEvent::East, &p);
        assert_eq!(half.m_east, 0.0);
        assert_abs_diff_eq!(half.m_south, 55.0, epsilon = 1e-12);
    }

    #[test]
    fn no_shock_without_growth_is_flat() {
        let p = EconParams {
            growth: 0.0,
            ..EconParams::default()
        };
        let t = simulate(
            &scenario(
                Uncertainty::Risk,
                Organization::Integrated,
                Realization::NoShock,
            ),
            &ShockProcess::default(),
            &p,
        )
        .unwrap();
        assert!(t
            .records
            .iter()
            .all(|r| (r.total - p.initial_mass).abs() < 1e-9));
    }

    #[test]
    fn outsourcing_dies_when_the_south_is_hit() {
        let p = EconParams::default();
        let t = simulate(
            &scenario(
                Uncertainty::RiskFree,
                Organization::Outsourcing,
                Realization::ShockSouth(10),
            ),
            &ShockProcess::default(),
            &p,
        )
        .unwrap();
        assert!(t.records[9].total > 0.0);
        assert!(t.records[10..].iter().all(|r| r.total == 0.0));
        assert!(t.extinct());
    }

    #[test]
    fn ambiguity_halves_then_regrows() {
        let p = EconParams::default();
        let t = simulate(
            &scenario(
                Uncertainty::Ambiguity,
                Organization::Integrated,
                Realization::ShockEast(10),
            ),
            &ShockProcess::default(),
            &p,
        )
        .unwrap();
        let before = t.records[9].total;
        assert_abs_diff_eq!(t.records[10].total, 0.5 * before * 1.1, epsilon = 1e-9);
        for w in t.records[10..].windows(2) {
            assert_abs_diff_eq!(w[1].total / w[0].total, 1.1, epsilon = 1e-12);
        }
    }

    #[test]
    fn transfers_exhaust_downstream_revenue() {
        let t = simulate(
            &scenario(
                Uncertainty::Risk,
                Organization::Integrated,
                Realization::ShockSouth(3),
            ),
            &ShockProcess::default(),
            &EconParams::default(),
        )
        .unwrap();
        for r in &t.records {
            assert_eq!(r.transfer, EconParams::default().revenue * r.total);
        }
    }

    #[test]
    fn shock_period_outside_horizon_is_rejected() {
        let r = simulate(
            &scenario(
                Uncertainty::Risk,
                Organization::Integrated,
                Realization::ShockSouth(25),
            ),
            &ShockProcess::default(),
            &EconParams::default(),
        );
        assert_eq!(
            r,
            Err(SurvivalError::ShockOutsideHorizon {
                period: 25,
                horizon: 20
            })
        );
    }

    #[test]
    fn grid_has_eighteen_distinct_cells() {
        let grid = run_grid(&ShockProcess::default(), &EconParams::default()).unwrap();
        assert_eq!(grid.len(), 18);
        let mut labels: Vec<_> = grid.iter().map(|t| t.label.clone()).collect();
        labels.sort();
        labels.dedup();
        assert_eq!(labels.len(), 18);
    }

    #[test]
    fn trajectory_csv_header() {
        let t =
            simulate_allocation("x", 0.5, Realization::NoShock, &EconParams::default()).unwrap();
        let mut buf = Vec::new();
        write_trajectories_csv(&[t], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(
            "period,cell_label,m_east,m_south,total,share_east,shock_event,flow_payoff,transfer\n0,x,50,50,100,0.5,none,80,100\n"
        ));
    }
}
