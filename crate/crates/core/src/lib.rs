//! Polariton lattice toolkit.
//!
//! Maps the control parameters of a cold-atom-filled hollow-core fiber
//! (detunings, control Rabi frequency, atomic and photonic densities) onto
//! the effective many-body parameters of the trapped polariton gas, and
//! provides the numerical machinery used to study the resulting
//! sine-Gordon and Bose-Hubbard regimes:
//!
//! - [`optics_map`]: control parameters to effective mass, potential,
//!   interaction, Lieb-Liniger `γ` and lattice depth `V₁/E_R`.
//! - [`many_body`]: Luttinger `K`, Bose-Hubbard `J`, `U`, both transition
//!   lines and the phase classifier.
//! - [`sweep`]: grid scans, transition root-finding and boundary contours.
//! - [`nlse`]: split-step spectral solver for the lattice NLSE.
//! - [`bh_ed`]: exact diagonalization of small Bose-Hubbard rings.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod bh_ed;
pub mod contour;
pub mod linalg;
pub mod many_body;
pub mod nlse;
pub mod optics_map;
pub mod roots;
pub mod sweep;

/// Coarse classification of failures, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Invalid input or a point outside a formula's domain.
    Domain,
    /// An iterative method failed to converge or diverged.
    Convergence,
}
