//! Grid scans over the control plane `(Δ_p/Γ, Ω/Γ)`, transition
//! root-finding along `Ω`, and phase-boundary polylines.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contour::zero_contours;
use crate::many_body::{
    bh_params, sg_critical_depth, ManyBodyError, ManyBodyPoint, RegimeFlags, BH_CRITICAL_U_OVER_J,
};
use crate::optics_map::{
    effective_params, lambda_pole, lattice_depth_ratio, lieb_liniger_gamma, validate_config, OpticalConfig,
    OpticsError, EPS_POLE,
};
use crate::roots::bisect;
use crate::ErrorClass;

/// Bracket width at which crossings are returned, in units of `Γ`.
pub const ROOT_TOL: f64 = 1e-6;
/// Samples used to probe a bracket for regime coverage.
const REGIME_PROBES: usize = 400;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("invalid base config: {0}")]
    Config(OpticsError),
    #[error("invalid grid: {0}")]
    Grid(&'static str),
    #[error("{0}")]
    Optics(OpticsError),
    #[error("{0}")]
    ManyBody(ManyBodyError),
    #[error("no sign change of the crossing function over [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },
    #[error("bracket [{lo}, {hi}] touches the Lambda pole at Omega/Gamma = {pole}")]
    Pole { lo: f64, hi: f64, pole: f64 },
    #[error("bracket lies entirely outside the sine-Gordon window")]
    Regime,
    #[error("no phase boundary on the grid")]
    EmptyBoundary,
}

impl SweepError {
    pub fn class(&self) -> ErrorClass {
        ErrorClass::Domain
    }
}

impl From<ManyBodyError> for SweepError {
    fn from(e: ManyBodyError) -> Self {
        SweepError::ManyBody(e)
    }
}

impl From<OpticsError> for SweepError {
    fn from(e: OpticsError) -> Self {
        SweepError::Optics(e)
    }
}

/// Evenly spaced samples `min, …, max` (inclusive).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AxisRange {
    pub const fn new(min: f64, max: f64, count: usize) -> Self {
        Self { min, max, count }
    }

    pub fn value(&self, k: usize) -> f64 {
        if k + 1 == self.count {
            return self.max;
        }
        self.min + (self.max - self.min) * k as f64 / (self.count - 1) as f64
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|k| self.value(k))
    }

    fn check(&self) -> Result<(), SweepError> {
        if self.count < 2 {
            return Err(SweepError::Grid("each axis needs at least 2 samples"));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.max > self.min) {
            return Err(SweepError::Grid("axis range must satisfy min < max"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub delta_p_range: AxisRange,
    pub omega_range: AxisRange,
    pub base: OpticalConfig,
}

impl GridSpec {
    /// Default scan window `Δ_p ∈ [2, 100]Γ`, `Ω ∈ [0.5, 3]Γ`, 50×50.
    pub fn default_for(base: OpticalConfig) -> Self {
        Self {
            delta_p_range: AxisRange::new(2.0, 100.0, 50),
            omega_range: AxisRange::new(0.5, 3.0, 50),
            base,
        }
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        self.delta_p_range.check()?;
        self.omega_range.check()?;
        validate_config(&self.base).map_err(SweepError::Config)?;
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.delta_p_range.count * self.omega_range.count
    }

    /// Control coordinates of node `index` in row-major `(Δ_p, Ω)` order.
    pub fn node(&self, index: usize) -> (f64, f64) {
        let ny = self.omega_range.count;
        (self.delta_p_range.value(index / ny), self.omega_range.value(index % ny))
    }
}

/// Many-body data at one grid node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeData {
    pub gamma_signed: f64,
    pub point: ManyBodyPoint,
    pub v_g: f64,
    pub kappa: f64,
}

/// Reason a node could not be evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NodeFault {
    Pole,
    Domain,
}

impl NodeFault {
    pub fn label(&self) -> &'static str {
        match self {
            NodeFault::Pole => "ERROR_POLE",
            NodeFault::Domain => "ERROR_DOMAIN",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub delta_p: f64,
    pub omega: f64,
    pub outcome: Result<NodeData, NodeFault>,
}

/// Evaluates the mapping chain at one control point.
pub fn evaluate_node(base: &OpticalConfig, delta_p: f64, omega: f64) -> SweepRecord {
    let outcome = evaluate(base, delta_p, omega).map_err(|e| match e {
        SweepError::Optics(OpticsError::Pole { .. }) | SweepError::Config(OpticsError::Pole { .. }) => {
            NodeFault::Pole
        }
        _ => NodeFault::Domain,
    });
    SweepRecord { delta_p, omega, outcome }
}

fn evaluate(base: &OpticalConfig, delta_p: f64, omega: f64) -> Result<NodeData, SweepError> {
    let cfg = validate_config(&base.with_control(delta_p, omega))?;
    let eff = effective_params(&cfg)?;
    let gamma = lieb_liniger_gamma(&cfg);
    let point = ManyBodyPoint::new(gamma.signed, lattice_depth_ratio(&cfg))?;
    Ok(NodeData { gamma_signed: gamma.signed, point, v_g: eff.v_g, kappa: eff.kappa })
}

/// One record per node, row-major by `(Δ_p, Ω)`.
pub fn sweep_grid(spec: &GridSpec) -> Result<Vec<SweepRecord>, SweepError> {
    spec.validate()?;
    Ok((0..spec.node_count())
        .map(|k| {
            let (dp, om) = spec.node(k);
            evaluate_node(&spec.base, dp, om)
        })
        .collect())
}

/// `(|γ|, V₁/E_R)` along the control line at fixed `Δ_p`.
fn plane_point(base: &OpticalConfig, delta_p: f64, omega: f64) -> Result<(f64, f64), SweepError> {
    let cfg = validate_config(&base.with_control(delta_p, omega))?;
    Ok((lieb_liniger_gamma(&cfg).abs, lattice_depth_ratio(&cfg)))
}

/// A located transition along `Ω` at fixed `Δ_p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub delta_p: f64,
    pub omega: f64,
    pub gamma_abs: f64,
    pub v1_over_er: f64,
    /// Value of the defining function at the root (`U/J − (U/J)_c` or
    /// `V₁/E_R − V₁c/E_R`).
    pub residual: f64,
    /// `U/J` at the root (Mott crossing) or the critical depth (pinning).
    pub critical_value: f64,
}

fn check_bracket(base: &OpticalConfig, lo: f64, hi: f64) -> Result<(), SweepError> {
    if !(lo.is_finite() && hi.is_finite()) || !(hi > lo) {
        return Err(SweepError::NoBracket { lo, hi });
    }
    if let Some(pole) = lambda_pole(base.delta_small, base.delta0) {
        if pole >= lo - EPS_POLE && pole <= hi + EPS_POLE {
            return Err(SweepError::Pole { lo, hi, pole });
        }
    }
    Ok(())
}

/// `U/J` along the control line.
pub fn u_over_j_at(base: &OpticalConfig, delta_p: f64, omega: f64) -> Result<f64, SweepError> {
    let (gamma_abs, depth) = plane_point(base, delta_p, omega)?;
    Ok(bh_params(depth, gamma_abs)?.u_over_j)
}

/// Control Rabi frequency where `U/J` crosses `(U/J)_c = 3.85`.
pub fn find_mott_crossing(base: &OpticalConfig, delta_p: f64, bracket: (f64, f64)) -> Result<Crossing, SweepError> {
    let (lo, hi) = bracket;
    check_bracket(base, lo, hi)?;
    validate_config(base).map_err(SweepError::Config)?;
    let f = |om: f64| u_over_j_at(base, delta_p, om).map(|r| r - BH_CRITICAL_U_OVER_J);
    let root = bisect(f, lo, hi, ROOT_TOL)?.ok_or(SweepError::NoBracket { lo, hi })?;
    let (gamma_abs, v1_over_er) = plane_point(base, delta_p, root.x)?;
    Ok(Crossing {
        delta_p,
        omega: root.x,
        gamma_abs,
        v1_over_er,
        residual: root.fx,
        critical_value: root.fx + BH_CRITICAL_U_OVER_J,
    })
}

/// `V₁/E_R − V₁c(|γ|)/E_R` along the control line, `None` where `K(γ)` is undefined.
fn pinning_function(base: &OpticalConfig, delta_p: f64, omega: f64) -> Result<Option<(f64, f64, f64)>, SweepError> {
    let (gamma_abs, depth) = plane_point(base, delta_p, omega)?;
    Ok(sg_critical_depth(gamma_abs).ok().map(|vc| (depth - vc, gamma_abs, depth)))
}

/// Control Rabi frequency where the lattice depth crosses the pinning line.
///
/// The bracket must contain at least one point of the sine-Gordon window.
pub fn find_pinning_crossing(base: &OpticalConfig, delta_p: f64, bracket: (f64, f64)) -> Result<Crossing, SweepError> {
    let (lo, hi) = bracket;
    check_bracket(base, lo, hi)?;
    validate_config(base).map_err(SweepError::Config)?;

    let mut any_sg = false;
    for k in 0..=REGIME_PROBES {
        let om = lo + (hi - lo) * k as f64 / REGIME_PROBES as f64;
        let (g, d) = plane_point(base, delta_p, om)?;
        if RegimeFlags::new(g, d, false).sg_valid {
            any_sg = true;
            break;
        }
    }
    if !any_sg {
        return Err(SweepError::Regime);
    }

    let f = |om: f64| -> Result<f64, SweepError> {
        pinning_function(base, delta_p, om)?
            .map(|(v, _, _)| v)
            .ok_or(SweepError::NoBracket { lo, hi })
    };
    let root = bisect(f, lo, hi, ROOT_TOL)?.ok_or(SweepError::NoBracket { lo, hi })?;
    let (residual, gamma_abs, v1_over_er) =
        pinning_function(base, delta_p, root.x)?.ok_or(SweepError::NoBracket { lo, hi })?;
    Ok(Crossing {
        delta_p,
        omega: root.x,
        gamma_abs,
        v1_over_er,
        residual,
        critical_value: v1_over_er - residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryModel {
    #[serde(rename = "BH")]
    BoseHubbard,
    #[serde(rename = "SG")]
    SineGordon,
}

/// A transition line in the `(Δ_p/Γ, Ω/Γ)` plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPolyline {
    pub model: BoundaryModel,
    pub vertices: Vec<(f64, f64)>,
}

/// Decision functions on the grid: `U/J − (U/J)_c` inside the Bose-Hubbard
/// window and `V₁/E_R − V₁c/E_R` inside the sine-Gordon window, NaN elsewhere.
pub fn decision_fields(spec: &GridSpec, records: &[SweepRecord]) -> (Vec<f64>, Vec<f64>) {
    debug_assert_eq!(records.len(), spec.node_count());
    let mut bh = Vec::with_capacity(records.len());
    let mut sg = Vec::with_capacity(records.len());
    for r in records {
        let (b, s) = match &r.outcome {
            Ok(n) => {
                let p = &n.point;
                let b = match (p.flags.bh_valid, p.u_over_j) {
                    (true, Some(uj)) => uj - BH_CRITICAL_U_OVER_J,
                    _ => f64::NAN,
                };
                let s = if p.flags.sg_valid {
                    sg_critical_depth(p.gamma_abs).map(|vc| p.v1_over_er - vc).unwrap_or(f64::NAN)
                } else {
                    f64::NAN
                };
                (b, s)
            }
            Err(_) => (f64::NAN, f64::NAN),
        };
        bh.push(b);
        sg.push(s);
    }
    (bh, sg)
}

/// Marching-squares transition lines, tagged with the model they come from.
pub fn phase_boundaries(spec: &GridSpec) -> Result<Vec<BoundaryPolyline>, SweepError> {
    let records = sweep_grid(spec)?;
    boundaries_from_records(spec, &records)
}

/// As [`phase_boundaries`] for an already evaluated grid.
pub fn boundaries_from_records(spec: &GridSpec, records: &[SweepRecord]) -> Result<Vec<BoundaryPolyline>, SweepError> {
    let (bh, sg) = decision_fields(spec, records);
    let nx = spec.delta_p_range.count;
    let ny = spec.omega_range.count;
    let (dx, dy) = (spec.delta_p_range.step(), spec.omega_range.step());
    let (x0, y0) = (spec.delta_p_range.min, spec.omega_range.min);
    let mut out = Vec::new();
    for (model, field) in [(BoundaryModel::BoseHubbard, &bh), (BoundaryModel::SineGordon, &sg)] {
        for chain in zero_contours(field, nx, ny) {
            let vertices = chain.into_iter().map(|(i, j)| (x0 + i * dx, y0 + j * dy)).collect();
            out.push(BoundaryPolyline { model, vertices });
        }
    }
    if out.is_empty() {
        return Err(SweepError::EmptyBoundary);
    }
    Ok(out)
}
