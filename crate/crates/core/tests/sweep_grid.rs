use pinning_core::many_body::{Phase, BH_CRITICAL_U_OVER_J};
use pinning_core::optics_map::OpticalConfig;
use pinning_core::sweep::{
    boundaries_from_records, evaluate_node, find_mott_crossing, find_pinning_crossing, sweep_grid, u_over_j_at,
    AxisRange, BoundaryModel, BoundaryPolyline, GridSpec,
};

fn default_spec() -> GridSpec {
    GridSpec::default_for(OpticalConfig::baseline())
}

fn refined(spec: &GridSpec) -> GridSpec {
    let r = |a: AxisRange| AxisRange::new(a.min, a.max, 2 * a.count - 1);
    GridSpec { delta_p_range: r(spec.delta_p_range), omega_range: r(spec.omega_range), ..*spec }
}

#[test]
fn default_grid_spans_the_quoted_ranges() {
    let records = sweep_grid(&default_spec()).unwrap();
    assert_eq!(records.len(), 2500);
    let nodes: Vec<_> = records.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
    assert_eq!(nodes.len(), 2500);
    let max_gamma = nodes.iter().map(|n| n.point.gamma_abs).fold(0.0, f64::max);
    let max_depth = nodes.iter().map(|n| n.point.v1_over_er).fold(0.0, f64::max);
    assert!(max_gamma >= 5.0, "{max_gamma}");
    assert!(max_depth >= 20.0, "{max_depth}");
    assert!(nodes.iter().all(|n| n.gamma_signed < 0.0 && n.point.flags.sign_warning));
    assert!(nodes.iter().any(|n| n.point.phase == Phase::MottBH));
    assert!(nodes.iter().any(|n| n.point.phase == Phase::Superfluid));
}

#[test]
fn parallel_style_evaluation_matches_row_major_sweep() {
    let spec = default_spec();
    let records = sweep_grid(&spec).unwrap();
    for k in (0..spec.node_count()).rev().step_by(37) {
        let (dp, om) = spec.node(k);
        assert_eq!(evaluate_node(&spec.base, dp, om), records[k]);
    }
    assert_eq!(sweep_grid(&spec).unwrap(), records);
}

#[test]
fn u_over_j_falls_with_control_strength() {
    let base = OpticalConfig::baseline();
    let values: Vec<f64> = (0..=50).map(|k| u_over_j_at(&base, 50.0, 0.5 + 0.05 * k as f64).unwrap()).collect();
    assert!(values.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn mott_crossing_residual_and_anchor() {
    let c = find_mott_crossing(&OpticalConfig::baseline(), 50.0, (0.9, 1.2)).unwrap();
    assert!((c.omega - 1.033875474998695).abs() < 2e-6);
    assert!(c.residual.abs() / BH_CRITICAL_U_OVER_J < 1e-4);
    assert!((c.critical_value - BH_CRITICAL_U_OVER_J).abs() < 1e-4);
    assert!((c.gamma_abs - 0.20971515697).abs() < 1e-6);
}

#[test]
fn pinning_crossing_residual() {
    let c = find_pinning_crossing(&OpticalConfig::baseline(), 10.0, (1.5, 2.5)).unwrap();
    assert!((c.omega - 1.90617286767247).abs() < 2e-6);
    assert!(c.residual.abs() <= 1e-4 * c.critical_value.abs());
}

fn boundary_at(lines: &[BoundaryPolyline], model: BoundaryModel, delta_p: f64) -> Vec<f64> {
    let mut hits = Vec::new();
    for line in lines.iter().filter(|l| l.model == model) {
        for w in line.vertices.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if (x0 - delta_p) * (x1 - delta_p) <= 0.0 && x0 != x1 {
                hits.push(y0 + (delta_p - x0) / (x1 - x0) * (y1 - y0));
            }
        }
    }
    hits
}

#[test]
fn bose_hubbard_boundary_passes_the_anchor() {
    let spec = GridSpec {
        delta_p_range: AxisRange::new(10.0, 90.0, 41),
        omega_range: AxisRange::new(0.5, 3.0, 51),
        base: OpticalConfig::baseline(),
    };
    let lines = boundaries_from_records(&spec, &sweep_grid(&spec).unwrap()).unwrap();
    let hits = boundary_at(&lines, BoundaryModel::BoseHubbard, 50.0);
    assert!(hits.iter().any(|&om| (om - 1.0339).abs() < spec.omega_range.step()), "{hits:?}");
}

/// Distance in units of the coarse cell from `p` to the nearest segment.
fn distance_to(p: (f64, f64), lines: &[&BoundaryPolyline], cell: (f64, f64)) -> f64 {
    let scale = |q: (f64, f64)| (q.0 / cell.0, q.1 / cell.1);
    let p = scale(p);
    let mut best = f64::INFINITY;
    for line in lines {
        for w in line.vertices.windows(2) {
            let (a, b) = (scale(w[0]), scale(w[1]));
            let (dx, dy) = (b.0 - a.0, b.1 - a.1);
            let len2 = dx * dx + dy * dy;
            let t = if len2 > 0.0 { (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
            let (qx, qy) = (a.0 + t * dx, a.1 + t * dy);
            best = best.min(((p.0 - qx).powi(2) + (p.1 - qy).powi(2)).sqrt());
        }
    }
    best
}

#[test]
fn boundaries_converge_under_refinement() {
    let coarse = default_spec();
    let fine = refined(&coarse);
    let lc = boundaries_from_records(&coarse, &sweep_grid(&coarse).unwrap()).unwrap();
    let lf = boundaries_from_records(&fine, &sweep_grid(&fine).unwrap()).unwrap();
    let cell = (coarse.delta_p_range.step(), coarse.omega_range.step());
    for model in [BoundaryModel::BoseHubbard, BoundaryModel::SineGordon] {
        let a: Vec<&BoundaryPolyline> = lc.iter().filter(|l| l.model == model).collect();
        let b: Vec<&BoundaryPolyline> = lf.iter().filter(|l| l.model == model).collect();
        assert_eq!(a.is_empty(), b.is_empty(), "{model:?}");
        let forward = a.iter().flat_map(|l| &l.vertices).map(|&p| distance_to(p, &b, cell)).fold(0.0, f64::max);
        let backward = b.iter().flat_map(|l| &l.vertices).map(|&p| distance_to(p, &a, cell)).fold(0.0, f64::max);
        assert!(forward.max(backward) <= 1.0, "{model:?}: {forward} / {backward}");
    }
}
