mod common;

use common::*;
use rho_soliton::product::{
    assemble_doubly_warped, assemble_warped, dwp_christoffel_closed, dwp_hessian_closed, dwp_ricci_closed,
    dwp_scalar_closed, wp_scalar_closed, DwpEvaluator, WarpedSpec,
};
use rho_soliton::{geometry, parse_expr, ChartMetric, Scope, TensorValue};

const SPECS: u64 = 10;
const POINTS: usize = 50;

fn rel(a: &TensorValue, b: &TensorValue) -> f64 {
    a.max_abs_diff(b) / b.max_abs().max(1.0)
}

#[test]
fn closed_forms_match_generic_engine() {
    for seed in 0..SPECS {
        let spec = random_dwp(seed);
        let m = assemble_doubly_warped(&spec).unwrap();
        let phi = parse_expr(&random_potential(seed, m.coords()), &m.scope()).unwrap();
        let boxes = vec![(0.3, 1.2); spec.dim()];
        for p in points(seed, POINTS, &boxes) {
            let g = geometry::christoffel(&m, &p).unwrap();
            assert!(rel(&dwp_christoffel_closed(&spec, &p).unwrap(), &g) < 1e-8, "seed {seed}");
            let ric = geometry::ricci(&m, &p).unwrap();
            assert!(rel(&dwp_ricci_closed(&spec, &p).unwrap(), &ric) < 1e-8, "seed {seed}");
            let tau = geometry::scalar_curvature(&m, &p).unwrap();
            let closed = dwp_scalar_closed(&spec, &p).unwrap();
            assert!((closed - tau).abs() / tau.abs().max(1.0) < 1e-8, "seed {seed}: {closed} vs {tau}");
            let h = geometry::hessian(&m, &phi, &p).unwrap();
            assert!(rel(&dwp_hessian_closed(&spec, &phi, &p).unwrap(), &h) < 1e-8, "seed {seed}");
        }
    }
}

#[test]
fn log_warping_hessian_blocks_match_generic_engine() {
    for seed in 0..SPECS {
        let spec = random_dwp(seed);
        let m = assemble_doubly_warped(&spec).unwrap();
        let ev = DwpEvaluator::new(&spec).unwrap();
        let m1 = spec.m1();
        for p in points(seed + 100, 10, &vec![(0.3, 1.2); spec.dim()]) {
            let (hk, hl) = ev.log_warping_hessians(&ev.at(&p).unwrap());
            for (closed, f) in [(hk, spec.k()), (hl, spec.l())] {
                let generic = geometry::hessian(&m, &f, &p).unwrap();
                for i in 0..spec.dim() {
                    for j in 0..spec.dim() {
                        if (i < m1) == (j < m1) {
                            let (a, b) = (closed.get(&[i, j]), generic.get(&[i, j]));
                            assert!((a - b).abs() < 1e-8 * b.abs().max(1.0), "seed {seed} [{i},{j}]: {a} vs {b}");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn trivial_fiber_warping_reduces_to_singly_warped() {
    for seed in 0..SPECS {
        let dw = random_dwp(seed);
        let ws = WarpedSpec::new(dw.base.clone(), dw.fiber.clone(), dw.f1.clone()).unwrap();
        let reduced = ws.to_doubly_warped();
        for p in points(seed, 20, &vec![(0.3, 1.2); dw.dim()]) {
            let a = wp_scalar_closed(&ws, &p).unwrap();
            let b = dwp_scalar_closed(&reduced, &p).unwrap();
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "seed {seed}: {a} vs {b}");
        }
    }
}

#[test]
fn half_line_warped_over_flat_plane() {
    let base = ChartMetric::flat(&["t"], false);
    let fiber = ChartMetric::flat(&["u", "v"], false);
    let ws = WarpedSpec::new(base, fiber, parse_expr("t", &Scope::new(&["t"], &[])).unwrap()).unwrap();
    let m = assemble_warped(&ws).unwrap();
    for p in points(4, 10, &[(0.5, 2.0), (-1.0, 1.0), (-1.0, 1.0)]) {
        let tau = geometry::scalar_curvature(&m, &p).unwrap();
        // τ = τ_F/b² − 2s b''/b − s(s−1)|b'|²/b² = −2/t²
        assert!((tau + 2.0 / (p[0] * p[0])).abs() < 1e-12, "{tau}");
        assert!((wp_scalar_closed(&ws, &p).unwrap() - tau).abs() < 1e-12);
    }
}
