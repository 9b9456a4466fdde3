//! Control parameters of the fiber to effective polariton parameters.
//!
//! Conventions: `ħ = 1`. Detunings and the control Rabi frequency are given
//! in units of the total decay rate `Γ`; `Γ` itself, `Δω` and all derived
//! rates are in s⁻¹ (angular). Derived energies (`V₀`, `V₁`, `E_R`) are
//! reported in units of `ħΓ`, the interaction `χ` in `ħΓ·m` and the mass in
//! the matching units (m⁻²) such that `E/ħΓ = k²/(2m)` for `k` in m⁻¹.

use core::f64::consts::PI;

use libm::{fabs, sqrt};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ErrorClass;

/// Exclusion radius around the poles of `Λ` and `Ξ`, in `Γ²` (resp. `Γ`) units.
pub const EPS_POLE: f64 = 1e-9;
/// Smallest admissible `|m|` (internal units).
pub const EPS_MASS: f64 = 1e-30;
/// Above this modulation fraction a warning is attached to the config.
pub const MODULATION_WARN_FRACTION: f64 = 0.5;
/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OpticsError {
    #[error("pole of {factor}: denominator {distance:e} is within {EPS_POLE:e} of zero")]
    Pole { factor: &'static str, distance: f64 },
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("effective mass |m| = {0:e} is singular")]
    SingularMass(f64),
}

impl OpticsError {
    pub fn class(&self) -> ErrorClass {
        ErrorClass::Domain
    }
}

/// Experimental knobs of the fiber + atomic ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpticalConfig {
    /// Total decay rate `Γ` of the upper levels, s⁻¹.
    pub gamma_total: f64,
    /// `Γ_1D/Γ`.
    pub gamma_1d_ratio: f64,
    /// `Δ₀/Γ`, one-photon detuning of `|b⟩`.
    pub delta0: f64,
    /// `δ/Γ`, two-photon detuning of `|c⟩`.
    pub delta_small: f64,
    /// `Δ_p/Γ`, detuning of `|d⟩`.
    pub delta_p: f64,
    /// `Ω/Γ`, control Rabi frequency (same for both control beams).
    pub omega: f64,
    /// Mean atomic density `n₀`, m⁻¹.
    pub n0: f64,
    /// `n₁/n₀`.
    pub n1_fraction: f64,
    /// Photon density `n_ph`, m⁻¹.
    pub n_ph: f64,
    /// Carrier mismatch `Δω`, s⁻¹.
    pub delta_omega: f64,
    /// Light speed in the empty waveguide, m/s.
    pub v: f64,
    /// Fiber length, m.
    pub fiber_length: f64,
}

impl OpticalConfig {
    /// Baseline parameter set: Γ = 2×10⁷ s⁻¹, Γ_1D = 0.2Γ, Δ₀ = 5Γ,
    /// δ = 0.01Γ, n₀ = 10⁷ m⁻¹, n₁ = 0.1n₀, n_ph = 10³ m⁻¹ in a 1 cm fiber,
    /// with Δ_p = 50Γ and Ω = Γ as the operating point.
    pub const fn baseline() -> Self {
        Self {
            gamma_total: 2.0e7,
            gamma_1d_ratio: 0.2,
            delta0: 5.0,
            delta_small: 0.01,
            delta_p: 50.0,
            omega: 1.0,
            n0: 1.0e7,
            n1_fraction: 0.1,
            n_ph: 1.0e3,
            delta_omega: 0.0,
            v: SPEED_OF_LIGHT,
            fiber_length: 0.01,
        }
    }

    pub fn with_control(mut self, delta_p: f64, omega: f64) -> Self {
        self.delta_p = delta_p;
        self.omega = omega;
        self
    }

    /// Group velocity `v_g = 4Ω²/(Γ_1D n₀)` in m/s.
    pub fn group_velocity(&self) -> f64 {
        let omega = self.omega * self.gamma_total;
        let gamma_1d = self.gamma_1d_ratio * self.gamma_total;
        4.0 * omega * omega / (gamma_1d * self.n0)
    }
}

impl Default for OpticalConfig {
    fn default() -> Self {
        Self::baseline()
    }
}

/// Non-fatal remarks attached to a validated config.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConfigWarning {
    /// `n₁/n₀` above [`MODULATION_WARN_FRACTION`]: the modulation is no
    /// longer a small perturbation of the density.
    StrongModulation,
}

/// A config whose invariants have been checked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidatedConfig {
    cfg: OpticalConfig,
    warning: Option<ConfigWarning>,
}

impl ValidatedConfig {
    pub fn config(&self) -> &OpticalConfig {
        &self.cfg
    }

    pub fn warning(&self) -> Option<ConfigWarning> {
        self.warning
    }
}

fn positive_finite(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

/// Checks every invariant of [`OpticalConfig`].
pub fn validate_config(cfg: &OpticalConfig) -> Result<ValidatedConfig, OpticsError> {
    let all_finite = [
        cfg.gamma_total,
        cfg.gamma_1d_ratio,
        cfg.delta0,
        cfg.delta_small,
        cfg.delta_p,
        cfg.omega,
        cfg.n0,
        cfg.n1_fraction,
        cfg.n_ph,
        cfg.delta_omega,
        cfg.v,
        cfg.fiber_length,
    ]
    .iter()
    .all(|x| x.is_finite());
    if !all_finite {
        return Err(OpticsError::Domain("all parameters must be finite"));
    }
    if !positive_finite(cfg.gamma_total) {
        return Err(OpticsError::Domain("gamma_total must be positive"));
    }
    if !(cfg.gamma_1d_ratio > 0.0 && cfg.gamma_1d_ratio <= 1.0) {
        return Err(OpticsError::Domain("gamma_1d_ratio must lie in (0, 1]"));
    }
    if !positive_finite(cfg.n0) {
        return Err(OpticsError::Domain("n0 must be positive"));
    }
    if !positive_finite(cfg.n_ph) {
        return Err(OpticsError::Domain("n_ph must be positive"));
    }
    if !positive_finite(cfg.v) {
        return Err(OpticsError::Domain("v must be positive"));
    }
    if !positive_finite(cfg.fiber_length) {
        return Err(OpticsError::Domain("fiber_length must be positive"));
    }
    if !(cfg.n1_fraction >= 0.0 && cfg.n1_fraction < 1.0) {
        return Err(OpticsError::Domain("n1_fraction must lie in [0, 1)"));
    }
    if !(cfg.omega > 0.0) {
        return Err(OpticsError::Domain("omega must be positive"));
    }
    if fabs(cfg.delta0) <= EPS_POLE {
        return Err(OpticsError::Domain("delta0 must be nonzero"));
    }
    if fabs(cfg.delta_p) <= EPS_POLE {
        return Err(OpticsError::Domain("delta_p must be nonzero"));
    }
    lambda_denominator(cfg)?;
    xi_denominator(cfg)?;
    if !(cfg.group_velocity() < cfg.v) {
        return Err(OpticsError::Domain("group velocity must be below the waveguide light speed"));
    }
    let warning = (cfg.n1_fraction > MODULATION_WARN_FRACTION).then_some(ConfigWarning::StrongModulation);
    Ok(ValidatedConfig { cfg: *cfg, warning })
}

fn lambda_denominator(cfg: &OpticalConfig) -> Result<f64, OpticsError> {
    let d = cfg.omega * cfg.omega - cfg.delta_small * cfg.delta0 / 2.0;
    if fabs(d) <= EPS_POLE {
        return Err(OpticsError::Pole { factor: "Lambda", distance: d });
    }
    Ok(d)
}

fn xi_denominator(cfg: &OpticalConfig) -> Result<f64, OpticsError> {
    let d = cfg.delta_p - cfg.delta_small;
    if fabs(d) <= EPS_POLE {
        return Err(OpticsError::Pole { factor: "Xi", distance: d });
    }
    Ok(d)
}

/// Location `Ω/Γ = √(δΔ₀/2)` of the `Λ` pole, if it is on the positive axis.
pub fn lambda_pole(delta_small: f64, delta0: f64) -> Option<f64> {
    let p = delta_small * delta0 / 2.0;
    (p > 0.0).then(|| sqrt(p))
}

/// `Λ = Ω²/(Ω² − δΔ₀/2)`.
pub fn lambda_factor(cfg: &ValidatedConfig) -> f64 {
    let c = &cfg.cfg;
    c.omega * c.omega / (c.omega * c.omega - c.delta_small * c.delta0 / 2.0)
}

/// `Ξ = (Δ_p − δ/2)/(Δ_p − δ)`.
pub fn xi_factor(cfg: &ValidatedConfig) -> f64 {
    let c = &cfg.cfg;
    (c.delta_p - c.delta_small / 2.0) / (c.delta_p - c.delta_small)
}

/// Effective single-particle and interaction parameters of the trapped gas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams {
    pub lambda_factor: f64,
    pub xi_factor: f64,
    /// Group velocity, m/s.
    pub v_g: f64,
    /// `[re, im]`: `re` is the lossless mass, `im` the imaginary part of the
    /// loss-corrected mass. Units m⁻² (see module docs).
    pub mass: Complex64,
    /// Trapping potential `V₀`, units of ħΓ.
    pub v0: f64,
    /// Lattice depth `V₁`, units of ħΓ.
    pub v1: f64,
    /// Interaction `χ`, units of ħΓ·m.
    pub chi: f64,
    /// Recoil energy `(πn_ph)²/(2|m|)`, units of ħΓ.
    pub e_recoil: f64,
    /// Loss rate, s⁻¹.
    pub kappa: f64,
    /// Optical depth.
    pub od: f64,
}

impl EffectiveParams {
    /// Lattice wavevector `k_L = πn_ph` of the `cos²(πn_ph z)` lattice.
    pub fn lattice_wavevector(n_ph: f64) -> f64 {
        PI * n_ph
    }

    /// Recoil energy carrying the sign of the mass, `k_L²/(2m)`.
    pub fn signed_recoil(&self) -> f64 {
        if self.mass.re < 0.0 {
            -self.e_recoil
        } else {
            self.e_recoil
        }
    }

    /// `V₁/E_R` assembled from the stored fields.
    pub fn assembled_depth_ratio(&self) -> f64 {
        self.v1 / self.signed_recoil()
    }

    /// `γ = mχ/n_ph` assembled from the stored fields.
    pub fn assembled_gamma(&self, n_ph: f64) -> f64 {
        self.mass.re * self.chi / n_ph
    }

    /// Recoil energy in s⁻¹ (angular, ħ = 1).
    pub fn e_recoil_per_s(&self, gamma_total: f64) -> f64 {
        self.e_recoil * gamma_total
    }
}

/// Derived parameters for a validated config.
pub fn effective_params(cfg: &ValidatedConfig) -> Result<EffectiveParams, OpticsError> {
    let c = &cfg.cfg;
    let gamma = c.gamma_total;
    let gamma_1d = c.gamma_1d_ratio * gamma;
    let delta0 = c.delta0 * gamma;
    let delta = c.delta_small * gamma;
    let delta_p = c.delta_p * gamma;
    let omega = c.omega * gamma;

    let lambda = lambda_factor(cfg);
    let xi = xi_factor(cfg);
    let v_g = c.group_velocity();

    // SI, ħ = 1: mass in s/m², energies in s⁻¹.
    let kinetic_mismatch = -c.delta_omega / (2.0 * c.v * v_g);
    let mass_re = kinetic_mismatch - gamma_1d * c.n0 / (4.0 * delta0 * v_g);
    let lossy = Complex64::new(kinetic_mismatch, 0.0)
        - Complex64::new(gamma_1d * c.n0, 0.0) / Complex64::new(4.0 * delta0 * v_g, 2.0 * gamma * v_g);
    if !(fabs(mass_re) >= EPS_MASS) {
        return Err(OpticsError::SingularMass(mass_re));
    }

    let n1 = c.n1_fraction * c.n0;
    let light_shift = lambda * gamma_1d * delta * v_g / (4.0 * omega * omega);
    let v0 = c.delta_omega * v_g / c.v - light_shift * c.n0;
    let v1 = -light_shift * n1;
    let chi = lambda * lambda * xi * gamma_1d * v_g / (2.0 * delta_p);
    let k_l = EffectiveParams::lattice_wavevector(c.n_ph);
    let e_recoil = k_l * k_l / (2.0 * fabs(mass_re));
    let kappa = c.n_ph * c.n_ph * v_g * gamma / (c.n0 * gamma_1d);
    let od = c.n0 * c.fiber_length * gamma_1d / gamma;

    Ok(EffectiveParams {
        lambda_factor: lambda,
        xi_factor: xi,
        v_g,
        mass: Complex64::new(mass_re * gamma, lossy.im * gamma),
        v0: v0 / gamma,
        v1: v1 / gamma,
        chi: chi / gamma,
        e_recoil: e_recoil / gamma,
        kappa,
        od,
    })
}

/// Loss-corrected complex mass (same units as [`EffectiveParams::mass`]).
pub fn loss_corrected_mass(cfg: &ValidatedConfig) -> Complex64 {
    let c = &cfg.cfg;
    let gamma = c.gamma_total;
    let v_g = c.group_velocity();
    let m = Complex64::new(-c.delta_omega / (2.0 * c.v * v_g), 0.0)
        - Complex64::new(c.gamma_1d_ratio * gamma * c.n0, 0.0)
            / Complex64::new(4.0 * c.delta0 * gamma * v_g, 2.0 * gamma * v_g);
    m * gamma
}

/// Signed Lieb-Liniger parameter with its magnitude and sign flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiebLinigerGamma {
    pub signed: f64,
    pub abs: f64,
    /// Set when the raw value is negative.
    pub negative: bool,
}

impl LiebLinigerGamma {
    pub fn from_signed(signed: f64) -> Self {
        Self { signed, abs: fabs(signed), negative: signed < 0.0 }
    }
}

/// Closed form `γ = −(Λ²Ξ/8)(Γ_1D²/(Δ₀Δ_p))(n₀/n_ph)` on raw ratios.
///
/// Does not validate; poles give non-finite results.
pub fn gamma_closed_form(
    gamma_1d_ratio: f64,
    delta0: f64,
    delta_small: f64,
    delta_p: f64,
    omega: f64,
    n0: f64,
    n_ph: f64,
) -> f64 {
    let lambda = omega * omega / (omega * omega - delta_small * delta0 / 2.0);
    let xi = (delta_p - delta_small / 2.0) / (delta_p - delta_small);
    -(lambda * lambda * xi / 8.0) * (gamma_1d_ratio * gamma_1d_ratio / (delta0 * delta_p)) * (n0 / n_ph)
}

/// Lieb-Liniger parameter of the polariton gas.
pub fn lieb_liniger_gamma(cfg: &ValidatedConfig) -> LiebLinigerGamma {
    let c = &cfg.cfg;
    LiebLinigerGamma::from_signed(gamma_closed_form(
        c.gamma_1d_ratio,
        c.delta0,
        c.delta_small,
        c.delta_p,
        c.omega,
        c.n0,
        c.n_ph,
    ))
}

/// Lattice depth in recoil units,
/// `V₁/E_R = (Λ/(8π²))(Γ_1D²/Ω²)(δ/Δ₀)(n₀n₁/n_ph²)`.
pub fn lattice_depth_ratio(cfg: &ValidatedConfig) -> f64 {
    let c = &cfg.cfg;
    let lambda = lambda_factor(cfg);
    let n1 = c.n1_fraction * c.n0;
    lambda / (8.0 * PI * PI)
        * (c.gamma_1d_ratio * c.gamma_1d_ratio / (c.omega * c.omega))
        * (c.delta_small / c.delta0)
        * (c.n0 * n1 / (c.n_ph * c.n_ph))
}
