//! Exact diagonalization of the 1D Bose-Hubbard chain
//! `H = −J Σ(b†ᵢbᵢ₊₁ + h.c.) + (U/2) Σ nᵢ(nᵢ − 1)`
//! in a fixed particle-number sector with a per-site occupation cap.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use libm::sqrt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{ground_dense, ground_lanczos, CsrMatrix, GroundEigen, LanczosOptions, LinalgError};
use crate::ErrorClass;

/// Largest basis built unless overridden.
pub const DEFAULT_DIMENSION_CAP: usize = 2_000_000;
/// Above this dimension the ground state is found by Lanczos.
pub const DENSE_LIMIT: usize = 300;
/// Required relative residual of a returned ground state.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EdError {
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
    #[error("basis dimension {dimension} exceeds the cap {cap}")]
    DimensionOverflow { dimension: u128, cap: usize },
    #[error("eigensolver failed: {0}")]
    Solver(LinalgError),
    #[error("ground state residual {0:e} above tolerance")]
    NoConvergence(f64),
    #[error("scaled gaps do not cross: {0}")]
    NoCrossing(&'static str),
}

impl EdError {
    pub fn class(&self) -> ErrorClass {
        match self {
            EdError::Solver(_) | EdError::NoConvergence(_) => ErrorClass::Convergence,
            _ => ErrorClass::Domain,
        }
    }
}

impl From<LinalgError> for EdError {
    fn from(e: LinalgError) -> Self {
        EdError::Solver(e)
    }
}

/// Number of ways to place `bosons` on `sites` with at most `n_max` each.
pub fn bounded_compositions(bosons: usize, sites: usize, n_max: usize) -> u128 {
    let mut ways = vec![0u128; bosons + 1];
    ways[0] = 1;
    for _ in 0..sites {
        let mut next = vec![0u128; bosons + 1];
        for (total, &w) in ways.iter().enumerate() {
            if w == 0 {
                continue;
            }
            for add in 0..=n_max.min(bosons - total) {
                next[total + add] += w;
            }
        }
        ways = next;
    }
    ways[bosons]
}

/// Occupation-number basis in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct FockBasis {
    sites: usize,
    bosons: usize,
    n_max: usize,
    /// Flattened occupation vectors, `sites` entries per state.
    states: Vec<u8>,
}

impl FockBasis {
    pub fn new(sites: usize, bosons: usize, n_max: usize) -> Result<Self, EdError> {
        Self::with_cap(sites, bosons, n_max, DEFAULT_DIMENSION_CAP)
    }

    pub fn with_cap(sites: usize, bosons: usize, n_max: usize, cap: usize) -> Result<Self, EdError> {
        if sites == 0 {
            return Err(EdError::InvalidInput("need at least one site"));
        }
        if n_max == 0 || n_max > u8::MAX as usize {
            return Err(EdError::InvalidInput("n_max must be in 1..=255"));
        }
        if bosons > sites * n_max {
            return Err(EdError::InvalidInput("more bosons than the occupation cap allows"));
        }
        let dimension = bounded_compositions(bosons, sites, n_max);
        if dimension > cap as u128 {
            return Err(EdError::DimensionOverflow { dimension, cap });
        }
        let mut states = Vec::with_capacity(dimension as usize * sites);
        let mut current = vec![0u8; sites];
        fill(&mut states, &mut current, 0, bosons, n_max);
        Ok(Self { sites, bosons, n_max, states })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn bosons(&self) -> usize {
        self.bosons
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.states.len() / self.sites
    }

    pub fn state(&self, index: usize) -> &[u8] {
        &self.states[index * self.sites..(index + 1) * self.sites]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u8]> {
        self.states.chunks_exact(self.sites)
    }

    /// Position of `occupations` in the basis.
    pub fn index_of(&self, occupations: &[u8]) -> Option<usize> {
        let (mut lo, mut hi) = (0, self.dim());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.state(mid).cmp(occupations) {
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
                Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    /// Nearest-neighbour bonds; a periodic ring adds `(L−1, 0)` when that
    /// pair is not already a bond.
    pub fn bonds(&self, periodic: bool) -> Vec<(usize, usize)> {
        let mut bonds: Vec<(usize, usize)> = (0..self.sites.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        if periodic && self.sites > 2 {
            bonds.push((self.sites - 1, 0));
        }
        bonds
    }
}

fn fill(out: &mut Vec<u8>, current: &mut [u8], site: usize, remaining: usize, n_max: usize) {
    let sites = current.len();
    if site + 1 == sites {
        if remaining <= n_max {
            current[site] = remaining as u8;
            out.extend_from_slice(current);
        }
        return;
    }
    let capacity_after = (sites - site - 1) * n_max;
    let lo = remaining.saturating_sub(capacity_after);
    for n in lo..=remaining.min(n_max) {
        current[site] = n as u8;
        fill(out, current, site + 1, remaining - n, n_max);
    }
}

/// Hamiltonian in the basis' particle-number sector.
pub fn build_hamiltonian(basis: &FockBasis, j: f64, u: f64, periodic: bool) -> Result<CsrMatrix, EdError> {
    if !(j >= 0.0 && j.is_finite() && u >= 0.0 && u.is_finite()) {
        return Err(EdError::InvalidInput("J and U must be finite and non-negative"));
    }
    let bonds = basis.bonds(periodic);
    let n_max = basis.n_max() as u8;
    let mut triplets = Vec::with_capacity(basis.dim() * (1 + 2 * bonds.len()));
    let mut scratch = vec![0u8; basis.sites()];
    for (a, occ) in basis.iter().enumerate() {
        let interaction: u64 = occ.iter().map(|&n| n as u64 * (n as u64).saturating_sub(1)).sum();
        triplets.push((a, a, 0.5 * u * interaction as f64));
        if j == 0.0 {
            continue;
        }
        for &(p, q) in &bonds {
            for (to, from) in [(p, q), (q, p)] {
                if occ[from] == 0 || occ[to] == n_max {
                    continue;
                }
                scratch.copy_from_slice(occ);
                scratch[from] -= 1;
                scratch[to] += 1;
                let b = basis.index_of(&scratch).expect("hop stays inside the sector");
                let amplitude = sqrt((occ[from] as u64 * (occ[to] as u64 + 1)) as f64);
                triplets.push((b, a, -j * amplitude));
            }
        }
    }
    Ok(CsrMatrix::from_triplets(basis.dim(), triplets))
}

/// Lowest eigenpair: dense for dimension ≤ [`DENSE_LIMIT`], Lanczos above.
/// A diagonal matrix (the atomic limit `J = 0`) is solved exactly.
pub fn ground_energy(h: &CsrMatrix) -> Result<GroundEigen, EdError> {
    if h.n > 0 && h.nnz() == h.n && (0..h.n).all(|i| h.row(i).all(|(c, _)| c == i)) {
        let (k, energy) = (0..h.n).map(|i| (i, h.get(i, i))).fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        let mut vector = vec![0.0; h.n];
        vector[k] = 1.0;
        return Ok(GroundEigen { energy, vector, residual: 0.0 });
    }
    let g = if h.n <= DENSE_LIMIT { ground_dense(h)? } else { ground_lanczos(h, &LanczosOptions::default())? };
    if !(g.residual <= RESIDUAL_TOL) {
        return Err(EdError::NoConvergence(g.residual));
    }
    Ok(g)
}

/// Ground energy of `L` sites with `N` bosons.
pub fn sector_energy(sites: usize, bosons: usize, n_max: usize, j: f64, u: f64, periodic: bool) -> Result<f64, EdError> {
    let basis = FockBasis::new(sites, bosons, n_max)?;
    Ok(ground_energy(&build_hamiltonian(&basis, j, u, periodic)?)?.energy)
}

/// Charge gap `E₀(N+1) + E₀(N−1) − 2E₀(N)` at unit filling `N = L`.
pub fn charge_gap(sites: usize, n_max: usize, j: f64, u: f64, periodic: bool) -> Result<f64, EdError> {
    let n = sites;
    let plus = sector_energy(sites, n + 1, n_max, j, u, periodic)?;
    let minus = sector_energy(sites, n - 1, n_max, j, u, periodic)?;
    let mid = sector_energy(sites, n, n_max, j, u, periodic)?;
    Ok(plus + minus - 2.0 * mid)
}

/// Ground-state diagnostics at unit filling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdResult {
    pub sites: usize,
    pub bosons: usize,
    pub n_max: usize,
    pub j: f64,
    pub u: f64,
    pub e0: f64,
    pub gap: f64,
    /// Site-averaged `⟨n²⟩ − ⟨n⟩²`.
    pub var_n: f64,
    /// `⟨b†ᵢbᵢ₊d⟩` averaged over `i`, for `d = 0, 1, …`.
    pub corr: Vec<f64>,
}

/// Site-averaged number variance of a state.
pub fn number_variance(basis: &FockBasis, psi: &[f64]) -> f64 {
    let l = basis.sites();
    let mut n1 = vec![0.0; l];
    let mut n2 = vec![0.0; l];
    for (occ, &a) in basis.iter().zip(psi) {
        let w = a * a;
        for (i, &n) in occ.iter().enumerate() {
            n1[i] += w * n as f64;
            n2[i] += w * (n as f64) * (n as f64);
        }
    }
    (0..l).map(|i| n2[i] - n1[i] * n1[i]).sum::<f64>() / l as f64
}

/// `⟨b†ᵢ b_k⟩` for a real state.
pub fn one_body(basis: &FockBasis, psi: &[f64], i: usize, k: usize) -> f64 {
    if i == k {
        return basis.iter().zip(psi).map(|(occ, &a)| a * a * occ[i] as f64).sum();
    }
    let n_max = basis.n_max() as u8;
    let mut scratch = vec![0u8; basis.sites()];
    let mut total = 0.0;
    for (occ, &a) in basis.iter().zip(psi) {
        if occ[k] == 0 || occ[i] == n_max || a == 0.0 {
            continue;
        }
        scratch.copy_from_slice(occ);
        scratch[k] -= 1;
        scratch[i] += 1;
        if let Some(b) = basis.index_of(&scratch) {
            total += psi[b] * a * sqrt((occ[k] as u64 * (occ[i] as u64 + 1)) as f64);
        }
    }
    total
}

/// Distance-resolved one-body correlations, `d = 0..=L/2` on a ring and
/// `d = 0..L` on an open chain.
pub fn correlations(basis: &FockBasis, psi: &[f64], periodic: bool) -> Vec<f64> {
    let l = basis.sites();
    let max_d = if periodic { l / 2 } else { l - 1 };
    (0..=max_d)
        .map(|d| {
            let pairs: Vec<(usize, usize)> = if periodic {
                (0..l).map(|i| (i, (i + d) % l)).collect()
            } else {
                (0..l - d).map(|i| (i, i + d)).collect()
            };
            pairs.iter().map(|&(i, k)| one_body(basis, psi, i, k)).sum::<f64>() / pairs.len() as f64
        })
        .collect()
}

/// Full diagnostics at unit filling.
pub fn solve_unit_filling(sites: usize, n_max: usize, j: f64, u: f64, periodic: bool) -> Result<EdResult, EdError> {
    let basis = FockBasis::new(sites, sites, n_max)?;
    let ground = ground_energy(&build_hamiltonian(&basis, j, u, periodic)?)?;
    let plus = sector_energy(sites, sites + 1, n_max, j, u, periodic)?;
    let minus = sector_energy(sites, sites - 1, n_max, j, u, periodic)?;
    Ok(EdResult {
        sites,
        bosons: sites,
        n_max,
        j,
        u,
        e0: ground.energy,
        gap: plus + minus - 2.0 * ground.energy,
        var_n: number_variance(&basis, &ground.vector),
        corr: correlations(&basis, &ground.vector, periodic),
    })
}

/// `L·Δ(L)` as a function of `U/J` (with `J = 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledGapCurve {
    pub sites: usize,
    pub ratios: Vec<f64>,
    pub scaled_gaps: Vec<f64>,
}

pub fn scaled_gap_curve(sites: usize, ratios: &[f64], n_max: usize, periodic: bool) -> Result<ScaledGapCurve, EdError> {
    let scaled_gaps = ratios
        .iter()
        .map(|&r| charge_gap(sites, n_max, 1.0, r, periodic).map(|g| sites as f64 * g))
        .collect::<Result<_, _>>()?;
    Ok(ScaledGapCurve { sites, ratios: ratios.to_vec(), scaled_gaps })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairCrossing {
    pub small: usize,
    pub large: usize,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalEstimate {
    pub curves: Vec<ScaledGapCurve>,
    pub crossings: Vec<PairCrossing>,
    pub mean: f64,
    /// `max − min` of the pairwise crossings.
    pub spread: f64,
}

/// Crossing of two scaled-gap curves: the largest `U/J` at which
/// `L_large·Δ_large − L_small·Δ_small` turns from non-positive to positive,
/// located by linear interpolation. Beyond it the larger system has the
/// larger scaled gap (Mott side).
pub fn pair_crossing(small: &ScaledGapCurve, large: &ScaledGapCurve) -> Option<PairCrossing> {
    let diff: Vec<f64> = large.scaled_gaps.iter().zip(&small.scaled_gaps).map(|(a, b)| a - b).collect();
    let r = &small.ratios;
    (0..diff.len().saturating_sub(1)).rev().find(|&k| diff[k] <= 0.0 && diff[k + 1] > 0.0).map(|k| {
        let t = diff[k] / (diff[k] - diff[k + 1]);
        PairCrossing { small: small.sites, large: large.sites, ratio: r[k] + t * (r[k + 1] - r[k]) }
    })
}

/// Combines already computed curves (sorted by size) into an estimate.
pub fn critical_from_curves(mut curves: Vec<ScaledGapCurve>) -> Result<CriticalEstimate, EdError> {
    curves.sort_by_key(|c| c.sites);
    let mut crossings = Vec::new();
    for a in 0..curves.len() {
        for b in a + 1..curves.len() {
            if curves[a].ratios != curves[b].ratios {
                return Err(EdError::InvalidInput("curves must share the U/J grid"));
            }
            if let Some(c) = pair_crossing(&curves[a], &curves[b]) {
                crossings.push(c);
            }
        }
    }
    if crossings.is_empty() {
        return Err(EdError::NoCrossing("no pair of sizes crosses on the U/J grid"));
    }
    let mean = crossings.iter().map(|c| c.ratio).sum::<f64>() / crossings.len() as f64;
    let lo = crossings.iter().map(|c| c.ratio).fold(f64::INFINITY, f64::min);
    let hi = crossings.iter().map(|c| c.ratio).fold(f64::NEG_INFINITY, f64::max);
    Ok(CriticalEstimate { curves, crossings, mean, spread: hi - lo })
}

/// Checks the preconditions of [`estimate_critical_ratio`].
pub fn check_estimate_inputs(sizes: &[usize], ratios: &[f64]) -> Result<(), EdError> {
    let mut distinct = sizes.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(EdError::NoCrossing("at least two distinct sizes are required"));
    }
    if ratios.len() < 5 {
        return Err(EdError::NoCrossing("at least five U/J values are required"));
    }
    if !ratios.windows(2).all(|w| w[1] > w[0]) || !ratios.iter().all(|r| r.is_finite() && *r >= 0.0) {
        return Err(EdError::InvalidInput("U/J values must be non-negative and increasing"));
    }
    Ok(())
}

/// Finite-size estimate of `(U/J)_c` from crossings of `L·Δ(L)`.
pub fn estimate_critical_ratio(sizes: &[usize], ratios: &[f64], n_max: usize, periodic: bool) -> Result<CriticalEstimate, EdError> {
    check_estimate_inputs(sizes, ratios)?;
    let mut distinct = sizes.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let curves = distinct
        .iter()
        .map(|&l| scaled_gap_curve(l, ratios, n_max, periodic))
        .collect::<Result<Vec<_>, _>>()?;
    critical_from_curves(curves)
}

#[cfg(test)]
mod tests {
    use super::*;
    use libm::fabs;

    #[test]
    fn basis_is_lexicographic_and_complete() {
        let b = FockBasis::new(4, 4, 2).unwrap();
        assert_eq!(b.dim() as u128, bounded_compositions(4, 4, 2));
        assert!(b.iter().zip(b.iter().skip(1)).all(|(x, y)| x < y));
        for (k, s) in b.iter().enumerate() {
            assert_eq!(s.iter().map(|&n| n as usize).sum::<usize>(), 4);
            assert!(s.iter().all(|&n| n <= 2));
            assert_eq!(b.index_of(s), Some(k));
        }
        assert_eq!(b.index_of(&[4, 0, 0, 0]), None);
    }

    #[test]
    fn composition_counts() {
        // Stars and bars without a cap: C(N+L−1, L−1).
        assert_eq!(bounded_compositions(8, 8, 8), 6435);
        // Inclusion-exclusion: C(15,7) − 8·C(10,7) = 5475.
        assert_eq!(bounded_compositions(8, 8, 4), 5475);
        assert_eq!(bounded_compositions(0, 5, 3), 1);
    }

    #[test]
    fn dimension_cap() {
        assert!(matches!(FockBasis::with_cap(8, 8, 4, 1000), Err(EdError::DimensionOverflow { .. })));
    }

    #[test]
    fn two_site_matrix() {
        let b = FockBasis::new(2, 2, 2).unwrap();
        let h = build_hamiltonian(&b, 1.0, 4.0, false).unwrap();
        assert_eq!(h.n, 3);
        // States (0,2), (1,1), (2,0).
        assert_eq!(h.get(0, 0), 4.0);
        assert_eq!(h.get(1, 1), 0.0);
        assert_eq!(h.get(0, 1), -libm::sqrt(2.0));
        assert_eq!(h.get(0, 2), 0.0);
        assert!(h.is_symmetric());
    }

    #[test]
    fn atomic_limit() {
        let b = FockBasis::new(3, 3, 3).unwrap();
        let h = build_hamiltonian(&b, 0.0, 2.0, true).unwrap();
        assert_eq!(h.nnz(), b.dim());
        assert_eq!(ground_energy(&h).unwrap().energy, 0.0);
        assert_eq!(charge_gap(4, 4, 0.0, 3.0, true).unwrap(), 3.0);
    }

    #[test]
    fn negative_couplings_rejected() {
        let b = FockBasis::new(2, 2, 2).unwrap();
        assert!(build_hamiltonian(&b, -1.0, 1.0, false).is_err());
    }

    #[test]
    fn correlations_start_at_density() {
        let r = solve_unit_filling(4, 4, 1.0, 3.0, true).unwrap();
        assert!(fabs(r.corr[0] - 1.0) < 1e-12);
        assert!(r.var_n > 0.0);
        assert!(r.gap > 0.0);
    }

    #[test]
    fn estimate_preconditions() {
        let ratios = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert!(matches!(estimate_critical_ratio(&[4], &ratios, 4, true), Err(EdError::NoCrossing(_))));
        assert!(matches!(estimate_critical_ratio(&[4, 4], &ratios, 4, true), Err(EdError::NoCrossing(_))));
        assert!(matches!(estimate_critical_ratio(&[2, 4], &ratios[..3], 4, true), Err(EdError::NoCrossing(_))));
    }

    #[test]
    fn crossing_interpolation() {
        let small = ScaledGapCurve { sites: 4, ratios: vec![1.0, 2.0, 3.0], scaled_gaps: vec![1.0, 2.0, 3.0] };
        let large = ScaledGapCurve { sites: 6, ratios: vec![1.0, 2.0, 3.0], scaled_gaps: vec![1.5, 1.5, 4.0] };
        // diff = [0.5, −0.5, 1.0]; last upward crossing between 2 and 3.
        let c = pair_crossing(&small, &large).unwrap();
        assert!(fabs(c.ratio - (2.0 + 0.5 / 1.5)) < 1e-15);
    }
}
