use std::io::Write;
use std::path::{Path, PathBuf};

use gsc_core::equilibrium::{
    calibrate, gains_from_trade, model_wiot, solve_equilibrium, SolverSettings, TargetMoments,
    WorldEconomy,
};
use gsc_core::exposure::{delta_exposure, fir, fmr, ExposureMatrix, SectorFilter};
use gsc_core::iotable::{
    load_wiot_dir, write_wiot_file, WiotTable, FINAL_FILE, GROSS_OUTPUT_FILE, INTERMEDIATE_FILE,
    VALUE_ADDED_FILE,
};
use gsc_core::policy::{optimize_subsidy, write_band_csv, PolicyConfig};
use gsc_core::survival::{
    run_grid, simulate, write_trajectories_csv, EconParams, ScenarioSpec, ShockProcess, Uncertainty,
};
use serde::Deserialize;

use crate::error::CliError;
use crate::output::{emit, write_atomic};
use crate::{
    CalibrateArgs, Command, DeltaArgs, EconArgs, EquilibriumCommand, ExposureArgs, ExposureCommand,
    Metric, PolicyArgs, SimArgs,
};

/// Configuration shared by `simulate`, `grid` and `policy`.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SimConfig {
    params: EconParams,
    shocks: ShockProcess,
    scenario: Option<ScenarioSpec>,
    policy: PolicyConfig,
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn load_sim_config(path: Option<&PathBuf>) -> Result<SimConfig, CliError> {
    let Some(path) = path else {
        return Ok(SimConfig::default());
    };
    serde_json::from_str(&read_text(path)?)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn load_economy(path: &Path) -> Result<WorldEconomy, CliError> {
    WorldEconomy::from_json(&read_text(path)?).map_err(|e| match e {
        gsc_core::equilibrium::EquilibriumError::InvalidEconomy(m) => {
            CliError::Validation(format!("{}: {m}", path.display()))
        }
        other => other.into(),
    })
}

fn scope(w: &WiotTable, sectors: &str) -> Result<SectorFilter, CliError> {
    if sectors == "all" {
        return Ok(SectorFilter::all(w));
    }
    let list: Vec<String> = sectors
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    Ok(SectorFilter::new(w, &list)?)
}

fn exposure_of(metric: Metric, w: &WiotTable, sectors: &str) -> Result<ExposureMatrix, CliError> {
    let scope = scope(w, sectors)?;
    Ok(match metric {
        Metric::Fir => fir(w, &scope)?,
        Metric::Fmr => fmr(w, &scope)?,
    })
}

fn exposure(metric: Metric, args: ExposureArgs) -> Result<(), CliError> {
    let w = load_wiot_dir(&args.wiot)?;
    let m = exposure_of(metric, &w, &args.sectors)?;
    emit(args.out.as_deref(), |buf| m.write_csv(args.digits, buf))
}

fn delta(args: DeltaArgs) -> Result<(), CliError> {
    let [earlier, later] = args.wiot.as_slice() else {
        return Err(CliError::Validation(format!(
            "delta needs exactly two --wiot directories, got {}",
            args.wiot.len()
        )));
    };
    let a = exposure_of(args.metric, &load_wiot_dir(earlier)?, &args.sectors)?;
    let b = exposure_of(args.metric, &load_wiot_dir(later)?, &args.sectors)?;
    let change = delta_exposure(&a, &b)?;
    emit(args.out.as_deref(), |buf| {
        change.write_csv(args.digits, buf)
    })
}

fn simulate_cmd(args: SimArgs) -> Result<(), CliError> {
    let cfg = load_sim_config(args.config.as_ref())?;
    let scenario = cfg.scenario.ok_or_else(|| {
        CliError::Validation("simulate needs a `scenario` entry in the config".into())
    })?;
    let traj = simulate(&scenario, &cfg.shocks, &cfg.params)?;
    emit(args.out.as_deref(), |buf| {
        write_trajectories_csv(&[traj], buf)
    })
}

fn grid_cmd(args: SimArgs) -> Result<(), CliError> {
    let cfg = load_sim_config(args.config.as_ref())?;
    let trajectories = run_grid(&cfg.shocks, &cfg.params)?;
    emit(args.out.as_deref(), |buf| {
        write_trajectories_csv(&trajectories, buf)
    })
}

fn policy_cmd(args: PolicyArgs) -> Result<(), CliError> {
    let mut cfg = load_sim_config(args.config.as_ref())?;
    if let Some(seed) = args.seed {
        cfg.policy.seed = seed;
    }
    if let Some(reps) = args.reps {
        cfg.policy.replications = reps;
    }
    let mut outcomes = Vec::new();
    for mode in Uncertainty::ALL {
        let o = optimize_subsidy(mode, &cfg.shocks, &cfg.params, &cfg.policy)?;
        if !o.feasible() {
            log::warn!(
                "{}: no subsidy satisfies the floor and cap; reporting the least infeasible",
                mode.label()
            );
        }
        log::info!(
            "{}: subsidy {} share {} outlay {} welfare {}",
            mode.label(),
            o.subsidy,
            o.allocation,
            o.total_outlay,
            o.welfare
        );
        outcomes.push(o);
    }
    emit(args.out.as_deref(), |buf| write_band_csv(&outcomes, buf))
}

fn equilibrium_cmd(cmd: EquilibriumCommand) -> Result<(), CliError> {
    let settings = SolverSettings::default();
    match cmd {
        EquilibriumCommand::Solve(EconArgs { config, out }) => {
            let econ = load_economy(&config)?;
            let sol = solve_equilibrium(&econ, &settings)?;
            log::info!(
                "converged in {} iterations, residual {:e}",
                sol.iterations,
                sol.residual
            );
            let names = econ.country_names();
            emit(out.as_deref(), |buf| {
                writeln!(buf, "country,wage,price_index,composite_cost,labor_income")?;
                for (i, name) in names.iter().enumerate() {
                    writeln!(
                        buf,
                        "{name},{},{},{},{}",
                        sol.wages[i],
                        sol.prices[i],
                        sol.costs[i],
                        sol.wages[i] * econ.labor[i]
                    )?;
                }
                Ok(())
            })
        }
        EquilibriumCommand::Wiot(EconArgs { config, out }) => {
            let econ = load_economy(&config)?;
            let sol = solve_equilibrium(&econ, &settings)?;
            let table = model_wiot(&econ, &sol)?;
            let dir = out.ok_or_else(|| {
                CliError::Validation("equilibrium wiot needs --out <directory>".into())
            })?;
            std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
            for file in [
                INTERMEDIATE_FILE,
                FINAL_FILE,
                VALUE_ADDED_FILE,
                GROSS_OUTPUT_FILE,
            ] {
                let mut buf = Vec::new();
                write_wiot_file(&table, file, &mut buf).map_err(|e| CliError::io(file, e))?;
                write_atomic(&dir.join(file), &buf)?;
            }
            Ok(())
        }
        EquilibriumCommand::Gains(EconArgs { config, out }) => {
            let econ = load_economy(&config)?;
            let sol = solve_equilibrium(&econ, &settings)?;
            let names = econ.country_names();
            let mut rows = Vec::new();
            for j in 0..econ.countries {
                rows.push(gains_from_trade(&econ, &sol, j)?);
            }
            emit(out.as_deref(), |buf| {
                writeln!(buf, "country,direct,via_domestic_share,domestic_share")?;
                for (name, g) in names.iter().zip(&rows) {
                    writeln!(
                        buf,
                        "{name},{:.12e},{:.12e},{:.12e}",
                        g.direct, g.via_domestic_share, g.domestic_share
                    )?;
                }
                Ok(())
            })
        }
    }
}

fn calibrate_cmd(args: CalibrateArgs) -> Result<(), CliError> {
    let econ0 = load_economy(&args.config)?;
    let target = TargetMoments::from_wiot(&load_wiot_dir(&args.wiot)?)?;
    let fit = calibrate(&target, &econ0, args.budget)?;
    if !fit.improved {
        log::warn!("calibration did not improve on the starting economy");
    }
    log::info!(
        "objective {:e} -> {:e} in {} evaluations",
        fit.initial_objective,
        fit.objective,
        fit.evaluations
    );
    let json = serde_json::to_string_pretty(&fit.economy)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    emit(args.out.as_deref(), |buf| writeln!(buf, "{json}"))
}

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Exposure(ExposureCommand::Fir(a)) => exposure(Metric::Fir, a),
        Command::Exposure(ExposureCommand::Fmr(a)) => exposure(Metric::Fmr, a),
        Command::Exposure(ExposureCommand::Delta(a)) => delta(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Grid(a) => grid_cmd(a),
        Command::Policy(a) => policy_cmd(a),
        Command::Equilibrium(c) => equilibrium_cmd(c),
        Command::Calibrate(a) => calibrate_cmd(a),
    }
}
