use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rho_soliton::exec::Exec;
use rho_soliton::geometry::{Geometry, ScalarField};
use rho_soliton::product::{assemble_doubly_warped, DoublyWarpedSpec};
use rho_soliton::soliton::residual_at;
use rho_soliton::walker::{box_points, search, sweep, Case, EcsConfig, EcsFamily, SearchAnsatz, SweepConfig};
use rho_soliton::{parse_expr, ChartMetric, ParamBinding};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn product_points(c: &mut Criterion) {
    let base = ChartMetric::parse(&["t", "s"], &[&["-1"], &["0", "1 + t^2"]], ParamBinding::new()).unwrap();
    let fiber = ChartMetric::parse(&["u", "v"], &[&["1"], &["0", "sin(u)^2"]], ParamBinding::new()).unwrap();
    let f1 = parse_expr("2 + sin(t*s)", &base.scope()).unwrap();
    let f2 = parse_expr("exp(v/3)", &fiber.scope()).unwrap();
    let m = assemble_doubly_warped(&DoublyWarpedSpec::new(base, fiber, f1, f2).unwrap()).unwrap();
    let phi = ScalarField::new(&m, &parse_expr("t^2*u + cos(s*v)", &m.scope()).unwrap()).unwrap();
    let pts: Vec<Vec<f64>> = box_points(1, 2000, 1.0)
        .into_iter()
        .map(|p| vec![p[0], p[1], 1.5 + p[2] / 2.0, p[0] * 3.0])
        .collect();
    let mut g = c.benchmark_group("soliton residual, 4D product");
    for n in [100, 2000] {
        for (name, mode) in MODES {
            g.bench_with_input(BenchmarkId::new(name, n), &pts[..n], |b, pts| {
                b.iter(|| {
                    mode.map(pts, |p| {
                        let geo = Geometry::at(&m, p, false).unwrap();
                        residual_at(&geo, &phi.jet(p).unwrap(), 0.25, 1.0).max_abs()
                    })
                })
            });
        }
    }
    g.finish();
}

fn walker_sweep(c: &mut Criterion) {
    let mut cfg = SweepConfig::new(Case::II, 42);
    cfg.lattice = vec![-2.0, -1.0, 0.0, 1.0, 2.0];
    let mut g = c.benchmark_group("family sweep, 200 rows");
    g.sample_size(10);
    for (name, mode) in MODES {
        g.bench_function(name, |b| {
            Exec::set(mode);
            b.iter(|| sweep(&cfg).unwrap().constraints.rows_passing);
        });
    }
    Exec::set(Exec::Parallel);
    g.finish();
}

fn ecs_search(c: &mut Criterion) {
    let fam = EcsFamily::parse("sin(y)").unwrap();
    let cfg = EcsConfig::new(1.0, 9);
    let mut g = c.benchmark_group("ECS search, 200 restarts");
    g.sample_size(10);
    for (name, mode) in MODES {
        g.bench_function(name, |b| {
            Exec::set(mode);
            b.iter(|| search(&fam, &cfg, SearchAnsatz::Polynomial).unwrap().floor);
        });
    }
    Exec::set(Exec::Parallel);
    g.finish();
}

criterion_group!(benches, product_points, walker_sweep, ecs_search);
criterion_main!(benches);
