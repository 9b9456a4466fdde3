use std::io;

use pinning_core::bh_ed::{check_estimate_inputs, critical_from_curves, solve_unit_filling, EdError, EdResult, ScaledGapCurve};
use pinning_core::many_body::{bh_params, ManyBodyPoint, BH_CRITICAL_U_OVER_J};
use pinning_core::nlse::{
    evolve, ground_state, interaction_from_gamma, release_profile, EvolveOptions, FieldState, NlseError, NlseParams,
    ReleaseScales,
};
use pinning_core::optics_map::{effective_params, lattice_depth_ratio, lieb_liniger_gamma, validate_config, OpticsError};
use pinning_core::sweep::{
    boundaries_from_records, evaluate_node, find_mott_crossing, find_pinning_crossing, SweepError, SweepRecord,
};
use pinning_core::ErrorClass;
use rayon::prelude::*;
use serde_json::json;
use thiserror::Error;

use crate::config::{ConfigError, CrossingModel, Format, InitialState, RunConfig};
use crate::output::{encode_field, Cell, OutputDir, Table};
use crate::plot;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Domain(String),
    #[error("{0}")]
    Convergence(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(ConfigError::Read { .. }) | RunError::Io(_) => 1,
            RunError::Config(_) | RunError::Domain(_) => 2,
            RunError::Convergence(_) => 3,
        }
    }

    pub fn class(&self) -> &'static str {
        match self.exit_code() {
            2 => "domain",
            3 => "convergence",
            _ => "io",
        }
    }

    fn classed(class: ErrorClass, message: String) -> Self {
        match class {
            ErrorClass::Domain => RunError::Domain(message),
            ErrorClass::Convergence => RunError::Convergence(message),
        }
    }
}

impl From<OpticsError> for RunError {
    fn from(e: OpticsError) -> Self {
        RunError::classed(e.class(), e.to_string())
    }
}

impl From<SweepError> for RunError {
    fn from(e: SweepError) -> Self {
        RunError::classed(e.class(), e.to_string())
    }
}

impl From<NlseError> for RunError {
    fn from(e: NlseError) -> Self {
        RunError::classed(e.class(), e.to_string())
    }
}

impl From<EdError> for RunError {
    fn from(e: EdError) -> Self {
        RunError::classed(e.class(), e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::Subcommand)]
pub enum Command {
    /// Effective parameters and many-body point at the configured controls.
    Map,
    /// Grid of (Δp, Ω) with all derived quantities.
    Sweep,
    /// Labeled grid and transition lines.
    Phase,
    /// J, U and U/J along Ω with the located transition.
    Crossing,
    /// Mean-field lattice dynamics and release profile.
    Nlse,
    /// Exact diagonalization of the Bose-Hubbard ring.
    Ed,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Map => "map",
            Command::Sweep => "sweep",
            Command::Phase => "phase",
            Command::Crossing => "crossing",
            Command::Nlse => "nlse",
            Command::Ed => "ed",
        }
    }
}

/// Runs one subcommand; `notes` collects derived values for the provenance file.
pub fn dispatch(cmd: Command, cfg: &RunConfig, out: &mut OutputDir, notes: &mut Vec<String>) -> Result<(), RunError> {
    let json = cfg.output.format == Format::Json;
    let result = match cmd {
        Command::Map => map(cfg, out),
        Command::Sweep => sweep(cfg, out, json),
        Command::Phase => phase(cfg, out, json),
        Command::Crossing => crossing(cfg, out, json),
        Command::Nlse => nlse(cfg, out, json, notes),
        Command::Ed => ed(cfg, out, json),
    };
    if cfg.output.emit_plot_script && !json {
        out.write_bytes(&format!("{}.gp", cmd.name()), plot::script(cmd, cfg).as_bytes())?;
    }
    result
}

fn map(cfg: &RunConfig, out: &mut OutputDir) -> Result<(), RunError> {
    let valid = validate_config(&cfg.optics)?;
    let eff = effective_params(&valid)?;
    let gamma = lieb_liniger_gamma(&valid);
    let depth = lattice_depth_ratio(&valid);
    let point = ManyBodyPoint::new(gamma.signed, depth);
    let payload = json!({
        "optics": cfg.optics,
        "warning": valid.warning(),
        "effective_params": eff,
        "lieb_liniger_gamma": gamma,
        "v1_over_er": depth,
        "many_body": point.as_ref().ok(),
        "many_body_error": point.as_ref().err().map(|e| e.to_string()),
    });
    out.write_json("map.json", "map", &payload)?;
    point.map(|_| ()).map_err(|e| RunError::Domain(e.to_string()))
}

fn evaluate_grid(cfg: &RunConfig) -> Result<Vec<SweepRecord>, RunError> {
    let grid = cfg.grid();
    grid.validate()?;
    Ok((0..grid.node_count())
        .into_par_iter()
        .map(|k| {
            let (dp, om) = grid.node(k);
            evaluate_node(&grid.base, dp, om)
        })
        .collect())
}

const SWEEP_COLUMNS: [&str; 13] = [
    "delta_p_over_gamma",
    "omega_over_gamma",
    "gamma_signed",
    "gamma_abs",
    "v1_over_er",
    "k_luttinger",
    "j_over_er",
    "u_over_er",
    "u_over_j",
    "v_g_m_per_s",
    "kappa_per_s",
    "phase",
    "flags",
];

fn sweep_row(r: &SweepRecord) -> Vec<Cell> {
    let mut row: Vec<Cell> = vec![r.delta_p.into(), r.omega.into()];
    match &r.outcome {
        Ok(n) => {
            let p = &n.point;
            row.extend([
                n.gamma_signed.into(),
                p.gamma_abs.into(),
                p.v1_over_er.into(),
                p.k_luttinger.into(),
                p.j_over_er.into(),
                p.u_over_er.into(),
                p.u_over_j.into(),
                n.v_g.into(),
                n.kappa.into(),
                p.phase.label().into(),
                p.flags.describe().into(),
            ]);
        }
        Err(fault) => {
            row.extend(std::iter::repeat_n(Cell::Empty, 9));
            row.push(fault.label().into());
            row.push(Cell::Empty);
        }
    }
    row
}

fn sweep(cfg: &RunConfig, out: &mut OutputDir, json: bool) -> Result<(), RunError> {
    let records = evaluate_grid(cfg)?;
    let mut table = Table::new(&SWEEP_COLUMNS);
    records.iter().for_each(|r| table.push(sweep_row(r)));
    out.write_table("sweep", &table, json)?;
    Ok(())
}

fn phase(cfg: &RunConfig, out: &mut OutputDir, json: bool) -> Result<(), RunError> {
    let records = evaluate_grid(cfg)?;
    let mut table =
        Table::new(&["delta_p_over_gamma", "omega_over_gamma", "gamma_abs", "v1_over_er", "u_over_j", "phase", "flags"]);
    for r in &records {
        let row = match &r.outcome {
            Ok(n) => vec![
                r.delta_p.into(),
                r.omega.into(),
                n.point.gamma_abs.into(),
                n.point.v1_over_er.into(),
                n.point.u_over_j.into(),
                n.point.phase.label().into(),
                n.point.flags.describe().into(),
            ],
            Err(f) => vec![r.delta_p.into(), r.omega.into(), Cell::Empty, Cell::Empty, Cell::Empty, f.label().into(), Cell::Empty],
        };
        table.push(row);
    }
    out.write_table("phase_grid", &table, json)?;
    let boundaries = boundaries_from_records(&cfg.grid(), &records);
    let lines = boundaries.as_ref().map(Vec::as_slice).unwrap_or(&[]);
    out.write_json("phase_boundaries.json", "boundaries", &lines)?;
    boundaries.map(|_| ()).map_err(RunError::from)
}

fn crossing(cfg: &RunConfig, out: &mut OutputDir, json: bool) -> Result<(), RunError> {
    let c = &cfg.sweep.crossing;
    let dp = cfg.optics.delta_p;
    let mut table = Table::new(&["omega_over_gamma", "j_over_er", "u_over_er", "u_over_j"]);
    for om in c.curve.values() {
        let bh = validate_config(&cfg.optics.with_control(dp, om))
            .ok()
            .and_then(|v| bh_params(lattice_depth_ratio(&v), lieb_liniger_gamma(&v).abs).ok());
        table.push(vec![
            om.into(),
            bh.map(|b| b.j_over_er).into(),
            bh.map(|b| b.u_over_er).into(),
            bh.map(|b| b.u_over_j).into(),
        ]);
    }
    out.write_table("crossing_curves", &table, json)?;

    let root = match c.model {
        CrossingModel::BoseHubbard => find_mott_crossing(&cfg.optics, dp, c.bracket)?,
        CrossingModel::SineGordon => find_pinning_crossing(&cfg.optics, dp, c.bracket)?,
    };
    let mut payload = json!({
        "model": c.model,
        "delta_p_over_gamma": root.delta_p,
        "omega_over_gamma": root.omega,
        "gamma_abs": root.gamma_abs,
        "v1_over_er": root.v1_over_er,
        "residual": root.residual,
    });
    let extra = match c.model {
        CrossingModel::BoseHubbard => {
            json!({"u_over_j": root.critical_value, "critical_u_over_j": BH_CRITICAL_U_OVER_J})
        }
        CrossingModel::SineGordon => json!({"critical_v1_over_er": root.critical_value}),
    };
    payload.as_object_mut().unwrap().extend(extra.as_object().unwrap().clone());
    out.write_json("crossing_root.json", "root", &payload)?;
    Ok(())
}

fn nlse(cfg: &RunConfig, out: &mut OutputDir, json: bool, notes: &mut Vec<String>) -> Result<(), RunError> {
    let section = &cfg.nlse;
    let valid = validate_config(&cfg.optics)?;
    let eff = effective_params(&valid)?;
    let e_r = eff.e_recoil_per_s(cfg.optics.gamma_total);
    let mut derive = |name: &str, given: Option<f64>, value: f64| {
        given.unwrap_or_else(|| {
            notes.push(format!("nlse.{name} = {value} (derived from optics)"));
            value
        })
    };
    let params = NlseParams {
        v1_over_er: derive("v1_over_er", section.v1_over_er, lattice_depth_ratio(&valid)),
        g_int: derive("g_int", section.g_int, interaction_from_gamma(lieb_liniger_gamma(&valid).abs)),
        kappa_dimless: derive("kappa_dimless", section.kappa_dimless, eff.kappa / e_r),
        n_periods: section.n_periods,
        grid_points: section.grid_points,
        schedule: section.schedule.clone(),
    };
    params.validate()?;

    let start = match section.initial {
        InitialState::Uniform => FieldState::uniform(params.n_periods, params.grid_points),
        InitialState::GroundState => {
            let mut lossless = params.clone();
            lossless.kappa_dimless = 0.0;
            lossless.schedule.iter_mut().for_each(|p| p.kappa = 0.0);
            let gs = ground_state(&lossless, &section.ground_state)?;
            notes.push(format!("nlse: ground state converged after {} steps, energy {}", gs.iterations, gs.energy));
            gs.state
        }
    };
    let opts = EvolveOptions { dt: section.dt, steps: section.steps, record_every: section.record_every };
    let traj = evolve(&start, &params, &opts)?;

    let mut table = Table::new(&["tau", "norm", "energy", "contrast"]);
    for o in &traj.series {
        table.push(vec![o.tau.into(), o.norm.into(), o.energy.into(), o.contrast.into()]);
    }
    out.write_table("nlse_trajectory", &table, json)?;

    out.write_bytes("nlse_state.bin", &encode_field(&traj.state.psi))?;
    let sidecar = json!({
        "grid_points": traj.state.grid_points(),
        "n_periods": traj.state.n_periods,
        "time": traj.state.time,
        "encoding": "little-endian f64 pairs (re, im)",
    });
    out.write_json("nlse_state.json", "state", &sidecar)?;

    let scales = ReleaseScales { n_ph: cfg.optics.n_ph, v_g: eff.v_g, e_recoil_per_s: e_r };
    let profile = release_profile(&traj.state, &scales)?;
    let mut table = Table::new(&["time_s", "intensity", "photon_flux_per_s"]);
    for (t, i) in profile.time_s.iter().zip(&profile.intensity) {
        table.push(vec![(*t).into(), (*i).into(), (i * profile.flux_scale).into()]);
    }
    out.write_table("nlse_release", &table, json)?;
    notes.push(format!(
        "nlse: release at {} s, {} photons in the pulse",
        profile.release_time_s,
        profile.total_photons()
    ));
    Ok(())
}

fn ed(cfg: &RunConfig, out: &mut OutputDir, json: bool) -> Result<(), RunError> {
    let e = &cfg.ed;
    let mut sizes = e.sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();
    let jobs: Vec<(usize, f64)> = sizes.iter().flat_map(|&l| e.ratios.iter().map(move |&r| (l, r))).collect();
    let results: Vec<EdResult> = jobs
        .par_iter()
        .map(|&(l, r)| solve_unit_filling(l, e.n_max, 1.0, r, e.periodic))
        .collect::<Result<_, _>>()?;

    let mut table = Table::new(&["L", "N", "n_max", "u_over_j", "e0_over_j", "gap_over_j", "var_n"]);
    for r in &results {
        table.push(vec![r.sites.into(), r.bosons.into(), r.n_max.into(), r.u.into(), r.e0.into(), r.gap.into(), r.var_n.into()]);
    }
    out.write_table("ed_results", &table, json)?;

    check_estimate_inputs(&sizes, &e.ratios)?;
    let curves = sizes
        .iter()
        .map(|&l| {
            let gaps = results.iter().filter(|r| r.sites == l).map(|r| l as f64 * r.gap).collect();
            ScaledGapCurve { sites: l, ratios: e.ratios.clone(), scaled_gaps: gaps }
        })
        .collect();
    let estimate = critical_from_curves(curves)?;
    let payload = json!({
        "crossings": estimate.crossings,
        "mean": estimate.mean,
        "spread": estimate.spread,
        "analytic_u_over_j": BH_CRITICAL_U_OVER_J,
    });
    out.write_json("ed_estimate.json", "estimate", &payload)?;
    Ok(())
}
