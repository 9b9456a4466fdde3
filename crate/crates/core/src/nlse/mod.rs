//! Mean-field dynamics of the trapped polariton field on the lattice.
//!
//! Lengths are measured in `ξ = πn_ph z` and times in `τ = E_R t/ħ`, which
//! turns the lattice NLSE into
//!
//! ```text
//! i∂_τψ = [−∂_ξ² + s·cos²ξ + g|ψ|²]ψ − (iκ/2)ψ
//! ```
//!
//! with `s = V₁/E_R`, `g = 4|γ|/π²` for `|ψ|²` normalized to unit spatial
//! mean, and `κ` the loss rate in units of `E_R/ħ`. The box `[0, πn)` holds
//! `n` lattice periods with periodic boundaries.

mod fft;

use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{cos, exp, fabs};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fft::Fft;

use crate::ErrorClass;

/// Growth of `max|ψ|` over its initial value that counts as a blow-up.
pub const BLOW_UP_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NlseError {
    #[error("invalid parameters: {0}")]
    InvalidParams(&'static str),
    #[error("invalid state: {0}")]
    InvalidState(&'static str),
    #[error("field blew up at tau = {time}")]
    BlowUp { time: f64 },
    #[error("non-finite field at tau = {time}")]
    NonFinite { time: f64 },
    #[error("imaginary-time relaxation did not converge in {iterations} steps")]
    NoConvergence { iterations: usize },
}

impl NlseError {
    pub fn class(&self) -> ErrorClass {
        match self {
            NlseError::InvalidParams(_) | NlseError::InvalidState(_) => ErrorClass::Domain,
            _ => ErrorClass::Convergence,
        }
    }
}

/// Dimensionless interaction `g = 4|γ|/π²`.
pub fn interaction_from_gamma(gamma_abs: f64) -> f64 {
    4.0 * gamma_abs / (PI * PI)
}

/// A control point of a time-dependent ramp.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlPoint {
    pub time: f64,
    pub v1_over_er: f64,
    pub g_int: f64,
    pub kappa: f64,
}

/// Instantaneous lattice depth, interaction and loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Controls {
    pub depth: f64,
    pub g_int: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NlseParams {
    /// Lattice depth `s = V₁/E_R`.
    pub v1_over_er: f64,
    /// Interaction `g`.
    pub g_int: f64,
    /// Loss rate `κħ/E_R`.
    pub kappa_dimless: f64,
    pub n_periods: usize,
    pub grid_points: usize,
    /// Piecewise-linear ramp; when non-empty it overrides the constant
    /// values, held flat outside its time range.
    #[serde(default)]
    pub schedule: Vec<ControlPoint>,
}

impl NlseParams {
    pub fn constant(v1_over_er: f64, g_int: f64, kappa_dimless: f64, n_periods: usize, grid_points: usize) -> Self {
        Self { v1_over_er, g_int, kappa_dimless, n_periods, grid_points, schedule: Vec::new() }
    }

    pub fn validate(&self) -> Result<(), NlseError> {
        if self.grid_points < 16 || !self.grid_points.is_power_of_two() {
            return Err(NlseError::InvalidParams("grid_points must be a power of two >= 16"));
        }
        if self.n_periods < 1 {
            return Err(NlseError::InvalidParams("n_periods must be >= 1"));
        }
        let ok = |c: Controls| {
            c.depth.is_finite() && c.depth >= 0.0 && c.g_int.is_finite() && c.g_int >= 0.0 && c.kappa.is_finite() && c.kappa >= 0.0
        };
        if !ok(Controls { depth: self.v1_over_er, g_int: self.g_int, kappa: self.kappa_dimless }) {
            return Err(NlseError::InvalidParams("depth, interaction and loss must be finite and non-negative"));
        }
        for w in self.schedule.windows(2) {
            if !(w[1].time > w[0].time) {
                return Err(NlseError::InvalidParams("schedule times must be strictly increasing"));
            }
        }
        for p in &self.schedule {
            if !p.time.is_finite() || !ok(Controls { depth: p.v1_over_er, g_int: p.g_int, kappa: p.kappa }) {
                return Err(NlseError::InvalidParams("schedule values must be finite and non-negative"));
            }
        }
        Ok(())
    }

    /// Controls at time `t`, linearly interpolated along the schedule.
    pub fn controls_at(&self, t: f64) -> Controls {
        let sched = &self.schedule;
        let Some(first) = sched.first() else {
            return Controls { depth: self.v1_over_er, g_int: self.g_int, kappa: self.kappa_dimless };
        };
        let at = |p: &ControlPoint| Controls { depth: p.v1_over_er, g_int: p.g_int, kappa: p.kappa };
        if t <= first.time {
            return at(first);
        }
        for w in sched.windows(2) {
            if t <= w[1].time {
                let f = (t - w[0].time) / (w[1].time - w[0].time);
                let lerp = |a: f64, b: f64| a + (b - a) * f;
                return Controls {
                    depth: lerp(w[0].v1_over_er, w[1].v1_over_er),
                    g_int: lerp(w[0].g_int, w[1].g_int),
                    kappa: lerp(w[0].kappa, w[1].kappa),
                };
            }
        }
        at(sched.last().unwrap())
    }
}

/// Field on the uniform periodic grid `ξ_j = jπn/N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldState {
    pub psi: Vec<Complex64>,
    pub n_periods: usize,
    pub time: f64,
}

impl FieldState {
    /// Unit-density uniform field.
    pub fn uniform(n_periods: usize, grid_points: usize) -> Self {
        Self { psi: alloc::vec![Complex64::new(1.0, 0.0); grid_points], n_periods, time: 0.0 }
    }

    /// Samples `f(ξ)` on the grid.
    pub fn from_fn(n_periods: usize, grid_points: usize, f: impl Fn(f64) -> Complex64) -> Self {
        let dx = box_length(n_periods) / grid_points as f64;
        Self { psi: (0..grid_points).map(|j| f(j as f64 * dx)).collect(), n_periods, time: 0.0 }
    }

    pub fn grid_points(&self) -> usize {
        self.psi.len()
    }

    pub fn spacing(&self) -> f64 {
        box_length(self.n_periods) / self.psi.len() as f64
    }

    pub fn density(&self) -> Vec<f64> {
        self.psi.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Spatial mean of `|ψ|²`.
    pub fn norm(&self) -> f64 {
        mean(self.psi.iter().map(|z| z.norm_sqr()))
    }

    /// Rescales to unit mean density.
    pub fn normalize(&mut self) {
        let s = 1.0 / libm::sqrt(self.norm());
        for z in &mut self.psi {
            *z *= s;
        }
    }

    fn max_amplitude(&self) -> f64 {
        self.psi.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn check(&self) -> Result<(), NlseError> {
        if !self.psi.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(NlseError::InvalidState("non-finite amplitudes"));
        }
        if !(self.norm() > 0.0) {
            return Err(NlseError::InvalidState("state norm must be positive"));
        }
        Ok(())
    }
}

/// Box length `πn` in `ξ` units.
pub fn box_length(n_periods: usize) -> f64 {
    PI * n_periods as f64
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let mut n = 0usize;
    let mut s = 0.0;
    for v in values {
        s += v;
        n += 1;
    }
    s / n as f64
}

/// Snapshot diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub tau: f64,
    pub norm: f64,
    pub energy: f64,
    pub contrast: f64,
}

/// Grid-dependent tables shared by all steps.
#[derive(Debug, Clone)]
pub struct Lattice {
    fft: Fft,
    n_periods: usize,
    k2: Vec<f64>,
    cos2: Vec<f64>,
}

impl Lattice {
    pub fn new(n_periods: usize, grid_points: usize) -> Self {
        let n = grid_points;
        let length = box_length(n_periods);
        let k2 = (0..n)
            .map(|m| {
                let f = if m < n / 2 { m as f64 } else { m as f64 - n as f64 };
                let k = 2.0 * PI * f / length;
                k * k
            })
            .collect();
        let dx = length / n as f64;
        let cos2 = (0..n)
            .map(|j| {
                let c = cos(j as f64 * dx);
                c * c
            })
            .collect();
        Self { fft: Fft::new(n), n_periods, k2, cos2 }
    }

    pub fn grid_points(&self) -> usize {
        self.k2.len()
    }

    /// `mean |∂_ξψ|²` via the spectrum.
    pub fn kinetic_energy(&self, psi: &[Complex64]) -> f64 {
        let mut buf = psi.to_vec();
        self.fft.forward(&mut buf);
        let n = buf.len() as f64;
        buf.iter().zip(&self.k2).map(|(z, k2)| k2 * z.norm_sqr()).sum::<f64>() / (n * n)
    }

    /// `mean[|∂ψ|² + s cos²ξ |ψ|² + (g/2)|ψ|⁴]`.
    pub fn energy(&self, psi: &[Complex64], c: Controls) -> f64 {
        let potential = mean(
            psi.iter()
                .zip(&self.cos2)
                .map(|(z, c2)| {
                    let rho = z.norm_sqr();
                    c.depth * c2 * rho + 0.5 * c.g_int * rho * rho
                }),
        );
        self.kinetic_energy(psi) + potential
    }

    /// Density averaged over the `n` lattice periods (keeps only the
    /// Fourier harmonics of the lattice period).
    pub fn period_averaged_density(&self, psi: &[Complex64]) -> Vec<f64> {
        let n = psi.len();
        let mut buf: Vec<Complex64> = psi.iter().map(|z| Complex64::new(z.norm_sqr(), 0.0)).collect();
        self.fft.forward(&mut buf);
        let periods = self.n_periods as i64;
        for (m, z) in buf.iter_mut().enumerate() {
            let f = if m < n / 2 { m as i64 } else { m as i64 - n as i64 };
            if f % periods != 0 {
                *z = Complex64::new(0.0, 0.0);
            }
        }
        self.fft.inverse(&mut buf);
        buf.iter().map(|z| z.re).collect()
    }

    /// `(max − min)/(max + min)` of the period-averaged density.
    pub fn contrast(&self, psi: &[Complex64]) -> f64 {
        let rho = self.period_averaged_density(psi);
        let max = rho.iter().copied().fold(f64::MIN, f64::max);
        let min = rho.iter().copied().fold(f64::MAX, f64::min).max(0.0);
        if !(max > 0.0) {
            return 0.0;
        }
        ((max - min) / (max + min)).clamp(0.0, 1.0)
    }

    pub fn observables(&self, state: &FieldState, c: Controls) -> Observables {
        Observables {
            tau: state.time,
            norm: state.norm(),
            energy: self.energy(&state.psi, c),
            contrast: self.contrast(&state.psi),
        }
    }

    fn kinetic_phase(&self, psi: &mut [Complex64], dt: f64) {
        self.fft.forward(psi);
        for (z, k2) in psi.iter_mut().zip(&self.k2) {
            let a = -k2 * dt;
            *z *= Complex64::new(cos(a), libm::sin(a));
        }
        self.fft.inverse(psi);
    }

    fn kinetic_decay(&self, psi: &mut [Complex64], dt: f64) {
        self.fft.forward(psi);
        for (z, k2) in psi.iter_mut().zip(&self.k2) {
            *z *= exp(-k2 * dt);
        }
        self.fft.inverse(psi);
    }

    /// Exact flow of `i∂ψ = (s cos² + g|ψ|²)ψ − (iκ/2)ψ` over `dt`.
    fn potential_phase(&self, psi: &mut [Complex64], c: Controls, dt: f64) {
        let damping = exp(-0.5 * c.kappa * dt);
        // ∫₀^dt e^{−κt'} dt'
        let effective_dt = if c.kappa > 0.0 { -libm::expm1(-c.kappa * dt) / c.kappa } else { dt };
        for (z, c2) in psi.iter_mut().zip(&self.cos2) {
            let a = -(c.depth * c2 * dt + c.g_int * z.norm_sqr() * effective_dt);
            *z *= Complex64::new(cos(a), libm::sin(a)) * damping;
        }
    }

    /// Exact flow of `∂ψ = −(s cos² + g|ψ|² − μ)ψ` over `dt`: the density
    /// obeys `ρ' = −2(V − μ)ρ − 2gρ²`, solved in closed form.
    fn potential_decay(&self, psi: &mut [Complex64], c: Controls, mu: f64, dt: f64) {
        for (z, c2) in psi.iter_mut().zip(&self.cos2) {
            let a = 2.0 * (c.depth * c2 - mu);
            let integral = if a != 0.0 { -libm::expm1(-a * dt) / a } else { dt };
            let ratio = exp(-a * dt) / (1.0 + 2.0 * c.g_int * z.norm_sqr() * integral);
            *z *= libm::sqrt(ratio);
        }
    }

    /// Chemical potential `mean[|∂ψ|² + s cos²|ψ|² + g|ψ|⁴] / mean|ψ|²`.
    pub fn chemical_potential(&self, psi: &[Complex64], c: Controls) -> f64 {
        let potential = mean(psi.iter().zip(&self.cos2).map(|(z, c2)| {
            let rho = z.norm_sqr();
            c.depth * c2 * rho + c.g_int * rho * rho
        }));
        (self.kinetic_energy(psi) + potential) / mean(psi.iter().map(|z| z.norm_sqr()))
    }

    /// One Strang step in real time.
    pub fn step(&self, psi: &mut [Complex64], c: Controls, dt: f64) {
        self.kinetic_phase(psi, 0.5 * dt);
        self.potential_phase(psi, c, dt);
        self.kinetic_phase(psi, 0.5 * dt);
    }

    /// One Strang step of the normalized gradient flow
    /// `∂ψ = −(H[ψ] − μ)ψ`. With `μ` the chemical potential of the ground
    /// state this flow fixes the ground state, which keeps the splitting
    /// bias at second order.
    pub fn imaginary_step(&self, psi: &mut [Complex64], c: Controls, mu: f64, dt: f64) {
        self.kinetic_decay(psi, 0.5 * dt);
        self.potential_decay(psi, c, mu, dt);
        self.kinetic_decay(psi, 0.5 * dt);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveOptions {
    pub dt: f64,
    pub steps: usize,
    /// Record observables every this many steps (the initial and final
    /// states are always recorded). Zero records only those two.
    pub record_every: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub state: FieldState,
    pub series: Vec<Observables>,
}

/// Real-time Strang-split evolution.
///
/// Half kinetic step (exact, spectral), full pointwise potential +
/// nonlinear + loss step evaluated with the controls at the step midpoint,
/// half kinetic step.
pub fn evolve(state: &FieldState, params: &NlseParams, opts: &EvolveOptions) -> Result<Trajectory, NlseError> {
    params.validate()?;
    state.check()?;
    if state.grid_points() != params.grid_points || state.n_periods != params.n_periods {
        return Err(NlseError::InvalidState("state grid does not match params"));
    }
    if !(opts.dt > 0.0 && opts.dt.is_finite()) {
        return Err(NlseError::InvalidParams("dt must be positive"));
    }
    let lattice = Lattice::new(params.n_periods, params.grid_points);
    let mut current = state.clone();
    let limit = BLOW_UP_FACTOR * current.max_amplitude();
    let t0 = current.time;
    let mut series = alloc::vec![lattice.observables(&current, params.controls_at(t0))];

    for k in 0..opts.steps {
        let t = t0 + k as f64 * opts.dt;
        let c = params.controls_at(t + 0.5 * opts.dt);
        lattice.step(&mut current.psi, c, opts.dt);
        current.time = t0 + (k + 1) as f64 * opts.dt;
        if !current.psi.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(NlseError::NonFinite { time: current.time });
        }
        if current.max_amplitude() > limit {
            return Err(NlseError::BlowUp { time: current.time });
        }
        let last = k + 1 == opts.steps;
        if last || (opts.record_every > 0 && (k + 1) % opts.record_every == 0) {
            series.push(lattice.observables(&current, params.controls_at(current.time)));
        }
    }
    Ok(Trajectory { state: current, series })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GroundStateOptions {
    /// Imaginary time step.
    pub dt: f64,
    /// Relative energy change between checks that counts as converged.
    pub tol: f64,
    pub max_iter: usize,
    /// Steps between energy checks.
    pub check_every: usize,
}

impl Default for GroundStateOptions {
    fn default() -> Self {
        Self { dt: 5e-3, tol: 1e-12, max_iter: 200_000, check_every: 20 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundState {
    pub state: FieldState,
    pub energy: f64,
    pub iterations: usize,
}

/// Imaginary-time relaxation from the uniform field with unit-density
/// renormalization after every step. Uses the controls at `τ = 0`; the
/// chemical potential in the flow is refreshed at every energy check.
pub fn ground_state(params: &NlseParams, opts: &GroundStateOptions) -> Result<GroundState, NlseError> {
    params.validate()?;
    let c = params.controls_at(0.0);
    if c.kappa != 0.0 {
        return Err(NlseError::InvalidParams("ground state requires zero loss"));
    }
    if !(opts.dt > 0.0 && opts.tol > 0.0 && opts.check_every > 0) {
        return Err(NlseError::InvalidParams("ground-state options must be positive"));
    }
    let lattice = Lattice::new(params.n_periods, params.grid_points);
    let mut state = FieldState::uniform(params.n_periods, params.grid_points);
    let mut energy = lattice.energy(&state.psi, c);
    let mut iterations = 0;
    while iterations < opts.max_iter {
        let mu = lattice.chemical_potential(&state.psi, c);
        for _ in 0..opts.check_every {
            lattice.imaginary_step(&mut state.psi, c, mu, opts.dt);
            state.normalize();
        }
        iterations += opts.check_every;
        if !state.psi.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(NlseError::NonFinite { time: 0.0 });
        }
        let next = lattice.energy(&state.psi, c);
        let change = fabs(next - energy);
        energy = next;
        if change == 0.0 || change <= opts.tol * fabs(energy) {
            return Ok(GroundState { state, energy, iterations });
        }
    }
    Err(NlseError::NoConvergence { iterations })
}

/// Physical scales for the release mapping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReleaseScales {
    /// Photon density, m⁻¹.
    pub n_ph: f64,
    /// Group velocity of the released pulse, m/s.
    pub v_g: f64,
    /// Recoil energy in s⁻¹ (ħ = 1), converts `τ` to seconds.
    pub e_recoil_per_s: f64,
}

/// Output intensity of the released field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReleaseProfile {
    /// Release instant `τ/E_R`, s.
    pub release_time_s: f64,
    /// Arrival delay `z/v_g` of each grid sample, s.
    pub time_s: Vec<f64>,
    /// Relative intensity `|ψ|²` (unit mean for a normalized field).
    pub intensity: Vec<f64>,
    /// Photon flux `n_ph v_g` of unit relative intensity, s⁻¹.
    pub flux_scale: f64,
    /// Grid spacing in `ξ`.
    pub spacing: f64,
}

impl ReleaseProfile {
    /// `Σ I Δξ`, which equals the state norm times the box length `πn`.
    pub fn integrated_intensity(&self) -> f64 {
        self.intensity.iter().sum::<f64>() * self.spacing
    }

    /// Number of photons in the pulse, `Σ n_ph v_g I Δt`.
    pub fn total_photons(&self) -> f64 {
        if self.time_s.len() < 2 {
            return 0.0;
        }
        let dt = self.time_s[1] - self.time_s[0];
        self.flux_scale * self.intensity.iter().sum::<f64>() * dt
    }
}

/// Zeroth-order release model: the sample at `z` leaves the fiber after
/// `z/v_g`, so the spatial density becomes an intensity time series.
pub fn release_profile(state: &FieldState, scales: &ReleaseScales) -> Result<ReleaseProfile, NlseError> {
    state.check()?;
    if !(scales.n_ph > 0.0 && scales.v_g > 0.0 && scales.e_recoil_per_s > 0.0) {
        return Err(NlseError::InvalidParams("release scales must be positive"));
    }
    let spacing = state.spacing();
    let dz = spacing / (PI * scales.n_ph);
    Ok(ReleaseProfile {
        release_time_s: state.time / scales.e_recoil_per_s,
        time_s: (0..state.grid_points()).map(|j| j as f64 * dz / scales.v_g).collect(),
        intensity: state.density(),
        flux_scale: scales.n_ph * scales.v_g,
        spacing,
    })
}
