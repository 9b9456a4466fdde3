//! Sine-Gordon and Bose-Hubbard parameters, transition lines and the phase
//! classifier on the dimensionless plane `(|γ|, V₁/E_R)`.

use core::f64::consts::PI;

use libm::{exp, pow, sqrt};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ErrorClass;

/// Critical `(U/J)_c` of the Bose-Hubbard Mott transition used by the classifier.
pub const BH_CRITICAL_U_OVER_J: f64 = 3.85;
/// Upper end of the range where the `K(γ)` relation holds.
pub const K_FORMULA_MAX_GAMMA: f64 = 10.0;
/// Sine-Gordon window `1 ≤ |γ| ≤ 5`, `V₁/E_R ≤ 3`.
pub const SG_GAMMA_MIN: f64 = 1.0;
pub const SG_GAMMA_MAX: f64 = 5.0;
pub const SG_DEPTH_MAX: f64 = 3.0;
/// Bose-Hubbard window `|γ| ≤ 1`, `V₁/E_R ≥ 3`.
pub const BH_GAMMA_MAX: f64 = 1.0;
pub const BH_DEPTH_MIN: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ManyBodyError {
    #[error("domain error: {0}")]
    Domain(&'static str),
}

impl ManyBodyError {
    pub fn class(&self) -> ErrorClass {
        ErrorClass::Domain
    }
}

fn k_radicand(gamma_abs: f64) -> Result<f64, ManyBodyError> {
    if !(gamma_abs > 0.0) {
        return Err(ManyBodyError::Domain("gamma must be positive"));
    }
    if gamma_abs > K_FORMULA_MAX_GAMMA {
        return Err(ManyBodyError::Domain("K(gamma) relation only holds for gamma <= 10"));
    }
    let r = gamma_abs - pow(gamma_abs, 1.5) / (2.0 * PI);
    if !(r > 0.0) {
        return Err(ManyBodyError::Domain("non-positive radicand in K(gamma)"));
    }
    Ok(r)
}

/// Luttinger parameter `K ≃ π/√(γ − γ^{3/2}/(2π))`, valid for `0 < γ ≤ 10`.
pub fn luttinger_k(gamma_abs: f64) -> Result<f64, ManyBodyError> {
    Ok(PI / sqrt(k_radicand(gamma_abs)?))
}

/// Critical lattice depth of the commensurate pinning transition,
/// `max(0, 2π/√(γ − γ^{3/2}/(2π)) − 4)`.
pub fn sg_critical_depth(gamma_abs: f64) -> Result<f64, ManyBodyError> {
    let raw = 2.0 * PI / sqrt(k_radicand(gamma_abs)?) - 4.0;
    Ok(if raw > 0.0 { raw } else { 0.0 })
}

/// Bose-Hubbard hopping and on-site interaction in recoil units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BhParams {
    pub j_over_er: f64,
    pub u_over_er: f64,
    pub u_over_j: f64,
}

/// `J/E_R = 4x^{3/4}e^{−2√x}/√π`, `U/E_R = √(2/π³)x^{1/4}γ` with `x = V₁/E_R`.
pub fn bh_params(v1_over_er: f64, gamma_abs: f64) -> Result<BhParams, ManyBodyError> {
    if !(v1_over_er > 0.0) || !v1_over_er.is_finite() {
        return Err(ManyBodyError::Domain("lattice depth must be positive"));
    }
    if !(gamma_abs >= 0.0) || !gamma_abs.is_finite() {
        return Err(ManyBodyError::Domain("gamma must be non-negative"));
    }
    let x = v1_over_er;
    let j_over_er = 4.0 * pow(x, 0.75) * exp(-2.0 * sqrt(x)) / sqrt(PI);
    let u_over_er = sqrt(2.0 / (PI * PI * PI)) * pow(x, 0.25) * gamma_abs;
    Ok(BhParams { j_over_er, u_over_er, u_over_j: u_over_er / j_over_er })
}

/// Closed form `U/J = √2·e^{2√x}γ/(4π√x)`, algebraically equal to
/// [`bh_params`]`.u_over_j`.
pub fn bh_u_over_j_closed_form(v1_over_er: f64, gamma_abs: f64) -> f64 {
    let x = v1_over_er;
    sqrt(2.0) * exp(2.0 * sqrt(x)) * gamma_abs / (4.0 * PI * sqrt(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    #[serde(rename = "SF")]
    Superfluid,
    #[serde(rename = "MOTT_SG")]
    MottPinnedSG,
    #[serde(rename = "MOTT_BH")]
    MottBH,
    #[serde(rename = "INDETERMINATE")]
    Indeterminate,
}

impl Phase {
    pub fn label(self) -> &'static str {
        match self {
            Phase::Superfluid => "SF",
            Phase::MottPinnedSG => "MOTT_SG",
            Phase::MottBH => "MOTT_BH",
            Phase::Indeterminate => "INDETERMINATE",
        }
    }

    pub fn is_mott(self) -> bool {
        matches!(self, Phase::MottPinnedSG | Phase::MottBH)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RegimeFlags {
    pub sg_valid: bool,
    pub bh_valid: bool,
    pub k_formula_valid: bool,
    pub sign_warning: bool,
}

impl RegimeFlags {
    /// The single corner `(|γ|, V₁/E_R) = (1, 3)` belongs to both windows as
    /// written; it is assigned to the sine-Gordon side.
    pub fn new(gamma_abs: f64, v1_over_er: f64, sign_warning: bool) -> Self {
        let sg_valid = (SG_GAMMA_MIN..=SG_GAMMA_MAX).contains(&gamma_abs) && v1_over_er <= SG_DEPTH_MAX;
        let bh_valid = !sg_valid && gamma_abs <= BH_GAMMA_MAX && v1_over_er >= BH_DEPTH_MIN;
        let k_formula_valid = gamma_abs > 0.0 && gamma_abs <= K_FORMULA_MAX_GAMMA;
        Self { sg_valid, bh_valid, k_formula_valid, sign_warning }
    }

    /// `;`-joined names of the set flags.
    pub fn describe(&self) -> alloc::string::String {
        let names = [
            (self.sg_valid, "sg_valid"),
            (self.bh_valid, "bh_valid"),
            (self.k_formula_valid, "k_formula_valid"),
            (self.sign_warning, "sign_warning"),
        ];
        let set: alloc::vec::Vec<&str> = names.iter().filter(|(on, _)| *on).map(|(_, n)| *n).collect();
        set.join(";")
    }
}

/// A point of the many-body phase plane with all derived model parameters.
///
/// Quantities outside their formula's domain are `None` (`K` for `γ` outside
/// `(0, 10]`, the Bose-Hubbard triple when `V₁/E_R = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManyBodyPoint {
    pub gamma_abs: f64,
    pub v1_over_er: f64,
    pub k_luttinger: Option<f64>,
    pub j_over_er: Option<f64>,
    pub u_over_er: Option<f64>,
    pub u_over_j: Option<f64>,
    pub phase: Phase,
    pub flags: RegimeFlags,
}

impl ManyBodyPoint {
    /// Builds and classifies the point for a signed `γ`; negative values
    /// enter through their magnitude with `sign_warning` raised.
    pub fn new(gamma_signed: f64, v1_over_er: f64) -> Result<Self, ManyBodyError> {
        if !gamma_signed.is_finite() || !v1_over_er.is_finite() {
            return Err(ManyBodyError::Domain("non-finite input"));
        }
        if v1_over_er < 0.0 {
            return Err(ManyBodyError::Domain("lattice depth must be non-negative"));
        }
        let gamma_abs = libm::fabs(gamma_signed);
        let flags = RegimeFlags::new(gamma_abs, v1_over_er, gamma_signed < 0.0);
        let k_luttinger = luttinger_k(gamma_abs).ok();
        let bh = if v1_over_er > 0.0 { Some(bh_params(v1_over_er, gamma_abs)?) } else { None };
        let mut point = Self {
            gamma_abs,
            v1_over_er,
            k_luttinger,
            j_over_er: bh.map(|b| b.j_over_er),
            u_over_er: bh.map(|b| b.u_over_er),
            u_over_j: bh.map(|b| b.u_over_j),
            phase: Phase::Indeterminate,
            flags,
        };
        point.phase = classify(&point);
        Ok(point)
    }
}

/// Phase label from the regime windows; points exactly on a line are Mott.
pub fn classify(point: &ManyBodyPoint) -> Phase {
    if point.flags.bh_valid {
        return match point.u_over_j {
            Some(r) if r >= BH_CRITICAL_U_OVER_J => Phase::MottBH,
            _ => Phase::Superfluid,
        };
    }
    if point.flags.sg_valid {
        return match sg_critical_depth(point.gamma_abs) {
            Ok(vc) if point.v1_over_er > 0.0 && point.v1_over_er >= vc => Phase::MottPinnedSG,
            _ => Phase::Superfluid,
        };
    }
    Phase::Indeterminate
}
