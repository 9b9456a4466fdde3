use nalgebra::{DMatrix, SymmetricEigen};
use pinning_core::bh_ed::{
    bounded_compositions, build_hamiltonian, charge_gap, estimate_critical_ratio, sector_energy, solve_unit_filling,
    EdError, FockBasis,
};
use pinning_core::linalg::{ground_dense, ground_lanczos, LanczosOptions};
use proptest::prelude::*;

fn nalgebra_ground(sites: usize, bosons: usize, n_max: usize, j: f64, u: f64, periodic: bool) -> f64 {
    let basis = FockBasis::new(sites, bosons, n_max).unwrap();
    let h = build_hamiltonian(&basis, j, u, periodic).unwrap();
    let dense = DMatrix::from_fn(h.n, h.n, |r, c| h.get(r, c));
    SymmetricEigen::new(dense).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

#[test]
fn two_site_ground_energy_is_analytic() {
    for (j, u) in [(1.0, 4.0), (1.0, 0.0), (0.3, 7.5), (2.0, 0.1)] {
        let exact = (u - f64::sqrt(u * u + 16.0 * j * j)) / 2.0;
        let e = sector_energy(2, 2, 2, j, u, false).unwrap();
        assert!((e - exact).abs() < 1e-12, "J={j} U={u}: {e} vs {exact}");
    }
}

#[test]
fn energies_match_independent_values() {
    // Frozen from an independent sparse-matrix evaluation.
    let cases = [
        (4, 4, 4, 1.0, 2.5, true, -5.147956647531104),
        (6, 6, 4, 1.0, 3.0, true, -6.840112078282209),
        (5, 5, 3, 0.7, 1.9, false, -3.1910274080327437),
    ];
    for (l, n, n_max, j, u, periodic, expected) in cases {
        let e = sector_energy(l, n, n_max, j, u, periodic).unwrap();
        assert!((e - expected).abs() < 1e-10, "L={l}: {e} vs {expected}");
    }
}

#[test]
fn dense_and_lanczos_agree() {
    for (l, u) in [(4, 1.0), (4, 3.85), (4, 10.0), (6, 2.0)] {
        let basis = FockBasis::new(l, l, 4).unwrap();
        let h = build_hamiltonian(&basis, 1.0, u, true).unwrap();
        let dense = ground_dense(&h).unwrap();
        let lanczos = ground_lanczos(&h, &LanczosOptions::default()).unwrap();
        assert!((dense.energy - lanczos.energy).abs() < 1e-10, "L={l} U={u}");
        let overlap: f64 = dense.vector.iter().zip(&lanczos.vector).map(|(a, b)| a * b).sum();
        assert!((overlap.abs() - 1.0).abs() < 1e-8);
    }
}

#[test]
fn hamiltonian_is_symmetric_and_conserves_number() {
    for (l, n, periodic) in [(4, 4, true), (5, 6, false), (6, 5, true)] {
        let basis = FockBasis::new(l, n, 4).unwrap();
        let h = build_hamiltonian(&basis, 0.8, 2.3, periodic).unwrap();
        assert!(h.is_symmetric());
        for r in 0..h.n {
            for (c, _) in h.row(r) {
                let (a, b) = (basis.state(r), basis.state(c));
                assert_eq!(a.iter().map(|&x| x as usize).sum::<usize>(), b.iter().map(|&x| x as usize).sum::<usize>());
                // Hopping moves exactly one boson.
                let moved: usize = a.iter().zip(b).map(|(&x, &y)| (x as i32 - y as i32).unsigned_abs() as usize).sum();
                assert!(moved == 0 || moved == 2);
            }
        }
    }
}

#[test]
fn dimension_matches_enumeration() {
    for (l, n, n_max) in [(3usize, 3usize, 1usize), (4, 4, 2), (5, 7, 3), (6, 6, 4)] {
        let count = (0..(n_max + 1).pow(l as u32))
            .filter(|&code| {
                let digits: Vec<usize> = (0..l).map(|i| code / (n_max + 1).pow(i as u32) % (n_max + 1)).collect();
                digits.iter().sum::<usize>() == n
            })
            .count();
        assert_eq!(bounded_compositions(n, l, n_max), count as u128);
        assert_eq!(FockBasis::new(l, n, n_max).unwrap().dim(), count);
    }
}

#[test]
fn atomic_limit_gap_is_u() {
    for l in [2, 3, 4, 6] {
        for u in [0.5, 1.0, 3.85, 20.0] {
            assert_eq!(charge_gap(l, 4, 0.0, u, true).unwrap(), u);
        }
    }
}

#[test]
fn n_max_convergence() {
    for l in [4, 6] {
        let e = |n_max, u| sector_energy(l, l, n_max, 1.0, u, true).unwrap();
        // Deep enough in the Mott regime the truncation is invisible.
        for u in [10.0, 20.0] {
            assert!((e(4, u) - e(5, u)).abs() < 1e-8, "L={l} U/J={u}");
        }
        // Closer to the transition it is variational only.
        for u in [1.0, 2.0, 4.0] {
            assert!(e(5, u) <= e(4, u) + 1e-12);
        }
    }
}

#[test]
fn periodic_is_lower_than_open_without_interaction() {
    for l in 3..=7 {
        let open = sector_energy(l, l, 4, 1.0, 0.0, false).unwrap();
        let ring = sector_energy(l, l, 4, 1.0, 0.0, true).unwrap();
        assert!(ring <= open + 1e-12, "L={l}: {ring} > {open}");
    }
}

#[test]
fn deep_mott_gap_band() {
    let gap = charge_gap(6, 4, 1.0, 20.0, true).unwrap();
    assert!((gap / 20.0 - 0.7135476195112918).abs() < 1e-9, "{}", gap / 20.0);
}

#[test]
fn superfluid_gap_closes_with_size() {
    let expected = [0.23770180243867856, 0.15919840218779058, 0.11950900138939957];
    let gaps: Vec<f64> = [4, 6, 8].iter().map(|&l| charge_gap(l, 4, 1.0, 1.0, true).unwrap()).collect();
    for (g, e) in gaps.iter().zip(expected) {
        assert!((g - e).abs() < 1e-9, "{g} vs {e}");
    }
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2]);
}

#[test]
fn unit_filling_diagnostics() {
    let sf = solve_unit_filling(6, 4, 1.0, 1.0, true).unwrap();
    let mott = solve_unit_filling(6, 4, 1.0, 20.0, true).unwrap();
    assert!(sf.gap >= -1e-10 && mott.gap >= -1e-10);
    assert!(sf.var_n > mott.var_n && mott.var_n > 0.0);
    assert!((sf.corr[0] - 1.0).abs() < 1e-12 && (mott.corr[0] - 1.0).abs() < 1e-12);
    // Phase coherence decays faster in the Mott phase.
    assert!(sf.corr[3] > mott.corr[3]);
}

#[test]
fn critical_ratio_estimate_lies_in_band() {
    let ratios: Vec<f64> = (1..=8).map(f64::from).collect();
    let est = estimate_critical_ratio(&[4, 6], &ratios, 4, true).unwrap();
    assert_eq!(est.crossings.len(), 1);
    assert!((2.5..=5.5).contains(&est.mean), "{}", est.mean);
    assert_eq!(est.spread, 0.0);
}

#[test]
fn deep_mott_ratios_do_not_cross() {
    let ratios: Vec<f64> = (15..=20).map(f64::from).collect();
    assert!(matches!(estimate_critical_ratio(&[4, 6], &ratios, 4, true), Err(EdError::NoCrossing(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn ground_energy_matches_nalgebra(l in 2usize..=5, extra in 0usize..=2, n_max in 1usize..=3,
                                      j in 0.0f64..2.0, u in 0.0f64..10.0, periodic: bool) {
        let n = (l + extra).min(l * n_max);
        let e = sector_energy(l, n, n_max, j, u, periodic).unwrap();
        let oracle = nalgebra_ground(l, n, n_max, j, u, periodic);
        prop_assert!((e - oracle).abs() < 1e-10 * oracle.abs().max(1.0), "{e} vs {oracle}");
    }
}
