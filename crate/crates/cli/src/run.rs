//! Mode runners. Each takes the resolved configuration, performs one of
//! the five run modes, and returns the complete CSV text. File/stdout
//! handling stays in the binary so every runner is a pure function of the
//! configuration — that is what makes byte-identical reruns testable.

use rayon::prelude::*;

use repint::master::{ensemble_liouvillian, evolve_with, steady_state, Propagation};
use repint::montecarlo::{compare_kinds, simulate};
use repint::thermo::{
    coherence_plus, cumulative_work, effective_beta, mean_spin_z, work_power, EffectiveBeta,
};
use repint::{JumpKind, RepeatedInteractionModel};

use crate::config::{ExperimentConfig, Mode, ModelConfig};
use crate::output::{Cell, CsvBuilder, fnum};
use crate::Failure;

/// Run one mode and return the CSV document.
///
/// `cfg` must already carry the effective seed/out/mode (CLI overrides
/// applied), so the metadata echo describes exactly what ran.
pub fn execute(mode: Mode, cfg: &ExperimentConfig, reproducible: bool) -> Result<String, Failure> {
    let mut csv = CsvBuilder::new();
    csv.comment(&format!(
        "repint-cli {} — repeated-interaction simulator",
        env!("CARGO_PKG_VERSION")
    ));
    if !reproducible {
        let now = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        csv.key_value("timestamp", now);
    }
    csv.key_value("mode", mode.name());
    csv.key_value("seed", cfg.run.seed);
    csv.config_echo(&cfg.echo()?);

    cfg.run.check_axes(mode)?;
    match mode {
        Mode::Steady => run_steady(cfg, &mut csv)?,
        Mode::Sweep => run_sweep(cfg, &mut csv)?,
        Mode::Evolve => run_evolve(cfg, &mut csv)?,
        Mode::Montecarlo => run_montecarlo(cfg, &mut csv)?,
        Mode::Compare => run_compare(cfg, &mut csv)?,
    }
    Ok(csv.finish())
}

/// Steady-state summary of one operating point.
struct SteadyRow {
    jz: f64,
    chi: f64,
    class: &'static str,
    beta_eff: f64,
    degeneracy: usize,
    wdot: f64,
}

const STEADY_COLS: [&str; 6] = [
    "mean_jz",
    "chi",
    "beta_class",
    "beta_eff",
    "kernel_degeneracy",
    "steady_work_power",
];

/// Solve one operating point: stationary state, spin polarisation, the
/// excitation ratio χ of the two highest levels, a fitted effective
/// temperature with its classification, kernel degeneracy, and the
/// stationary work flow.
fn steady_point(model_cfg: &ModelConfig, kind: JumpKind) -> Result<SteadyRow, Failure> {
    let model = model_cfg.build()?;
    let l = ensemble_liouvillian(&model, kind).map_err(Failure::from_lib)?;
    let (rho, degeneracy) = steady_state(&l).map_err(Failure::from_lib)?;
    let jz = mean_spin_z(&rho).map_err(Failure::from_lib)?;
    let chi = rho.population(0) / rho.population(1);
    let (class, beta_eff) = match effective_beta(&rho, &model.h_s) {
        Ok(EffectiveBeta::Gibbs { beta }) => ("gibbs", beta),
        Ok(EffectiveBeta::Inverted { beta }) => ("inverted", beta),
        Ok(EffectiveBeta::MaximallyMixed) => ("mixed", f64::NAN),
        Ok(EffectiveBeta::NonGibbsian { .. }) => ("non-gibbsian", f64::NAN),
        // Off-diagonal weight in the energy basis: no temperature exists.
        Err(repint::Error::InvalidState(_)) => ("coherent", f64::NAN),
        Err(e) => return Err(Failure::from_lib(e)),
    };
    let wdot = work_power(&model, &rho, kind).map_err(Failure::from_lib)?;
    Ok(SteadyRow {
        jz,
        chi,
        class,
        beta_eff,
        degeneracy,
        wdot,
    })
}

fn steady_cells(row: &SteadyRow) -> Vec<Cell> {
    vec![
        Cell::Num(row.jz),
        Cell::Num(row.chi),
        Cell::Text(row.class.to_string()),
        Cell::Num(row.beta_eff),
        Cell::Int(row.degeneracy),
        Cell::Num(row.wdot),
    ]
}

fn run_steady(cfg: &ExperimentConfig, csv: &mut CsvBuilder) -> Result<(), Failure> {
    let kind = cfg.run.jump_kind()?;
    let row = steady_point(&cfg.model, kind)?;
    csv.header(&STEADY_COLS);
    csv.mixed_row(&steady_cells(&row));
    Ok(())
}

fn run_sweep(cfg: &ExperimentConfig, csv: &mut CsvBuilder) -> Result<(), Failure> {
    let kind = cfg.run.jump_kind()?;
    let axes = &cfg.run.sweep;
    let grids: Vec<Vec<f64>> = axes
        .iter()
        .map(|a| a.grid())
        .collect::<Result<_, Failure>>()?;

    // Cartesian product, first axis outermost, so rows group by axis one.
    let mut cells_to_run: Vec<Vec<f64>> = vec![vec![]];
    for grid in &grids {
        let mut next = Vec::with_capacity(cells_to_run.len() * grid.len());
        for prefix in &cells_to_run {
            for &v in grid {
                let mut cell = prefix.clone();
                cell.push(v);
                next.push(cell);
            }
        }
        cells_to_run = next;
    }

    let rows: Vec<(Vec<f64>, SteadyRow)> = cells_to_run
        .into_par_iter()
        .map(|values| {
            let mut model_cfg = cfg.model.clone();
            for (axis, &v) in axes.iter().zip(values.iter()) {
                model_cfg = model_cfg.with_param(&axis.param, v)?;
            }
            steady_point(&model_cfg, kind).map(|row| (values, row))
        })
        .collect::<Result<_, Failure>>()?;

    let mut cols: Vec<&str> = axes.iter().map(|a| a.param.as_str()).collect();
    cols.extend_from_slice(&STEADY_COLS);
    csv.header(&cols);
    for (values, row) in rows {
        let mut cells: Vec<Cell> = values.into_iter().map(Cell::from).collect();
        cells.extend(steady_cells(&row));
        csv.mixed_row(&cells);
    }
    Ok(())
}

/// Parse the propagation method name.
fn method(cfg: &ExperimentConfig) -> Result<Propagation, Failure> {
    match cfg.run.method.as_str() {
        "exact" => Ok(Propagation::Exact),
        "rk4" => Ok(Propagation::Rk4),
        other => Err(Failure::Config(format!(
            "run.method \"{other}\" is not one of exact, rk4"
        ))),
    }
}

/// Emit one evolution block: series annotations as `# note:` lines, then
/// the data rows.
fn evolve_block(
    model: &RepeatedInteractionModel,
    cfg: &ExperimentConfig,
    grid: &[f64],
    kind: JumpKind,
    prop: Propagation,
    csv: &mut CsvBuilder,
    write_header: bool,
) -> Result<(), Failure> {
    let rho0 = cfg
        .model
        .initial_state(&cfg.run.initial, model.system_dim())?;
    let series = cumulative_work(model, &rho0, grid, kind, prop).map_err(Failure::from_lib)?;
    for (key, value) in &series.metadata {
        csv.comment(&format!("note: {key} = {value}"));
    }
    if write_header {
        let mut cols = vec!["t"];
        cols.extend(series.columns().iter().map(|(name, _)| name.as_str()));
        csv.header(&cols);
    }
    for (i, &t) in series.times().iter().enumerate() {
        let mut row = vec![t];
        row.extend(series.columns().iter().map(|(_, values)| values[i]));
        csv.row(&row);
    }
    Ok(())
}

fn run_evolve(cfg: &ExperimentConfig, csv: &mut CsvBuilder) -> Result<(), Failure> {
    let kind = cfg.run.jump_kind()?;
    let prop = method(cfg)?;
    let grid = cfg.run.time_grid_from_zero()?;
    match cfg.run.sweep.first() {
        None => {
            let model = cfg.model.build()?;
            warn_if_nonmarkovian(&model, csv);
            evolve_block(&model, cfg, &grid, kind, prop, csv, true)?;
        }
        Some(axis) => {
            // One block of rows per axis value, separated by block markers.
            for (i, v) in axis.grid()?.into_iter().enumerate() {
                let model_cfg = cfg.model.with_param(&axis.param, v)?;
                let model = model_cfg.build()?;
                csv.comment(&format!("block: {} = {}", axis.param, fnum(v)));
                if i == 0 {
                    warn_if_nonmarkovian(&model, csv);
                }
                evolve_block(&model, cfg, &grid, kind, prop, csv, i == 0)?;
            }
        }
    }
    Ok(())
}

/// Surface the model's coarse-graining flag: outside γτ ≪ 1 the generator
/// is still well defined but no longer guaranteed to track the process.
fn warn_if_nonmarkovian(model: &RepeatedInteractionModel, csv: &mut CsvBuilder) {
    if !model.markovian {
        csv.comment("warning: gamma*tau >= 0.1 — generator outside its coarse-graining regime");
    }
}

fn run_montecarlo(cfg: &ExperimentConfig, csv: &mut CsvBuilder) -> Result<(), Failure> {
    let kind = cfg.run.jump_kind()?;
    let n = cfg.run.trajectory_count()?;
    let grid = cfg.run.time_grid_after_zero()?;
    let model = cfg.model.build()?;
    let rho0 = cfg
        .model
        .initial_state(&cfg.run.initial, model.system_dim())?;

    let ens = simulate(&model, &rho0, &grid, n, cfg.run.seed, kind).map_err(Failure::from_lib)?;
    let l = ensemble_liouvillian(&model, kind).map_err(Failure::from_lib)?;
    let me = evolve_with(&l, &rho0, &grid, Propagation::Exact).map_err(Failure::from_lib)?;

    warn_if_nonmarkovian(&model, csv);
    csv.key_value("montecarlo: trajectories", n);
    csv.key_value("montecarlo: window_fraction", fnum(ens.window_fraction));
    csv.key_value("montecarlo: clipped_waits", ens.clipped);
    csv.header(&[
        "t",
        "mc_mean_jz",
        "mc_stderr_jz",
        "mc_coherence_plus",
        "mc_stderr_coherence",
        "me_mean_jz",
        "me_coherence_plus",
    ]);
    for (i, &t) in grid.iter().enumerate() {
        let me_jz = mean_spin_z(&me[i]).map_err(Failure::from_lib)?;
        let me_coh = coherence_plus(&me[i]).map_err(Failure::from_lib)?;
        csv.row(&[
            t,
            ens.mean_jz[i],
            ens.stderr_jz[i],
            ens.mean_jplus_abs[i],
            ens.stderr_jplus[i],
            me_jz,
            me_coh,
        ]);
    }
    Ok(())
}

fn run_compare(cfg: &ExperimentConfig, csv: &mut CsvBuilder) -> Result<(), Failure> {
    if cfg.model.gamma <= 0.0 {
        return Err(Failure::Config(
            "compare needs gamma > 0: without collisions the stochastic oracle has zero variance"
                .into(),
        ));
    }
    let n = cfg.run.trajectory_count()?;
    let grid = cfg.run.time_grid_after_zero()?;
    let model = cfg.model.build()?;
    let rho0 = cfg
        .model
        .initial_state(&cfg.run.initial, model.system_dim())?;

    let report =
        compare_kinds(&model, &rho0, &grid, n, cfg.run.seed).map_err(Failure::from_lib)?;

    warn_if_nonmarkovian(&model, csv);
    csv.key_value("compare: trajectories", n);
    csv.key_value(
        "compare: oracle_coherence_rate",
        fnum(report.oracle_coherence_rate),
    );
    csv.key_value("compare: fit_points", report.fit_window.len());
    for comparison in &report.kinds {
        csv.comment(&format!(
            "compare: kind = {}, max_z_jz = {}, max_z_coherence = {}, coherence_rate = {}",
            comparison.kind.label(),
            fnum(comparison.max_z_jz),
            fnum(comparison.max_z_jplus),
            fnum(comparison.coherence_rate),
        ));
    }

    csv.header(&[
        "t",
        "mean_jz",
        "stderr_jz",
        "coherence_plus",
        "stderr_coherence",
    ]);
    csv.comment("block: stochastic-oracle (scattering kicks)");
    for (i, &t) in grid.iter().enumerate() {
        csv.row(&[
            t,
            report.oracle.mean_jz[i],
            report.oracle.stderr_jz[i],
            report.oracle.mean_jplus_abs[i],
            report.oracle.stderr_jplus[i],
        ]);
    }
    for kind in JumpKind::ALL {
        let l = ensemble_liouvillian(&model, kind).map_err(Failure::from_lib)?;
        let me = evolve_with(&l, &rho0, &grid, Propagation::Exact).map_err(Failure::from_lib)?;
        csv.comment(&format!("block: generator-{}", kind.label()));
        for (i, &t) in grid.iter().enumerate() {
            let jz = mean_spin_z(&me[i]).map_err(Failure::from_lib)?;
            let coh = coherence_plus(&me[i]).map_err(Failure::from_lib)?;
            csv.row(&[t, jz, 0.0, coh, 0.0]);
        }
    }
    Ok(())
}
