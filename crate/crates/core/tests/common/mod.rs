#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rho_soliton::{ChartMetric, ParamBinding};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn points(seed: u64, count: usize, boxes: &[(f64, f64)]) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| boxes.iter().map(|&(lo, hi)| r.random_range(lo..hi)).collect())
        .collect()
}

/// Metric matrix by direct tree evaluation, bypassing the compiled tapes.
pub fn metric_numeric(m: &ChartMetric, p: &[f64]) -> Vec<Vec<f64>> {
    let n = m.dim();
    let coords: Vec<(&str, f64)> = m.coords().iter().map(|s| s.as_str()).zip(p.iter().copied()).collect();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| m.component(i, j).eval(&coords, m.params()).unwrap())
                .collect()
        })
        .collect()
}

fn inverse(g: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = g.len();
    let mut a: Vec<Vec<f64>> = g
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for c in 0..n {
        let piv = (c..n).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs())).unwrap();
        a.swap(c, piv);
        let d = a[c][c];
        for v in a[c].iter_mut() {
            *v /= d;
        }
        for r in 0..n {
            if r != c {
                let f = a[r][c];
                let pivot_row = a[c].clone();
                for (v, pv) in a[r].iter_mut().zip(pivot_row) {
                    *v -= f * pv;
                }
            }
        }
    }
    a.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Christoffel symbols from central differences of the metric.
pub fn fd_christoffel(m: &ChartMetric, p: &[f64], h: f64) -> Vec<Vec<Vec<f64>>> {
    let n = m.dim();
    let g = metric_numeric(m, p);
    let gi = inverse(&g);
    let dg: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|k| {
            let mut pp = p.to_vec();
            let mut pm = p.to_vec();
            pp[k] += h;
            pm[k] -= h;
            let a = metric_numeric(m, &pp);
            let b = metric_numeric(m, &pm);
            (0..n)
                .map(|i| (0..n).map(|j| (a[i][j] - b[i][j]) / (2.0 * h)).collect())
                .collect()
        })
        .collect();
    (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    (0..n)
                        .map(|c| {
                            (0..n)
                                .map(|d| 0.5 * gi[a][d] * (dg[b][c][d] + dg[c][b][d] - dg[d][b][c]))
                                .sum()
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Scalar curvature with every derivative taken by central differences:
/// Christoffels from the metric, then their partials from nested stencils.
pub fn fd_scalar_curvature(m: &ChartMetric, p: &[f64]) -> f64 {
    let n = m.dim();
    let h_outer = 1e-4;
    let h_inner = 1e-5;
    let gam = fd_christoffel(m, p, h_inner);
    let dgam: Vec<Vec<Vec<Vec<f64>>>> = (0..n)
        .map(|k| {
            let mut pp = p.to_vec();
            let mut pm = p.to_vec();
            pp[k] += h_outer;
            pm[k] -= h_outer;
            let a = fd_christoffel(m, &pp, h_inner);
            let b = fd_christoffel(m, &pm, h_inner);
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| (0..n).map(|l| (a[i][j][l] - b[i][j][l]) / (2.0 * h_outer)).collect())
                        .collect()
                })
                .collect()
        })
        .collect();
    let g = metric_numeric(m, p);
    let gi = inverse(&g);
    let mut tau = 0.0;
    for b in 0..n {
        for d in 0..n {
            let mut ric = 0.0;
            for a in 0..n {
                ric += dgam[a][a][d][b] - dgam[d][a][a][b];
                for e in 0..n {
                    ric += gam[a][a][e] * gam[e][d][b] - gam[a][d][e] * gam[e][a][b];
                }
            }
            tau += gi[b][d] * ric;
        }
    }
    tau
}

pub fn round_sphere(radius: f64) -> ChartMetric {
    let params = ParamBinding::from([("R".to_string(), radius)]);
    ChartMetric::parse(&["th", "ph"], &[&["R^2"], &["0", "R^2*sin(th)^2"]], params).unwrap()
}

pub fn walker(phi: &str) -> ChartMetric {
    ChartMetric::parse(
        &["t", "x", "y"],
        &[&["0"], &["0", "1"], &["1", "0", phi]],
        ParamBinding::new(),
    )
    .unwrap()
}

/// Metric functions and potentials in `t, x, y` used across the suites.
pub const CORPUS: &[&str] = &[
    "0",
    "x^3 + y*x",
    "x^3 + y^2*x",
    "x^3 + sin(y)*x",
    "t^2*x + sin(y)*t^3 + x^2*y",
    "exp(t*x) - y^2",
    "cos(x + 2*y)*t",
    "sqrt(2 + x^2)*ln(3 + y)",
    "t*y + x^2",
    "0.35*x^2 + 0.7*t*y + 3*x",
    "(t - x)^4/(1 + y^2)",
    "exp(-(t^2 + x^2 + y^2)/2)",
    "sin(t)*cos(x)*exp(y/3)",
    "x^2*t^2 - 3*x*y + y^4/12",
    "ln(2 + sin(t*x*y))",
];

/// Five-point central difference of `e` in `var` at `p` (coords t, x, y).
pub fn fd5(e: &rho_soliton::Expr, var: usize, p: &[f64], h: f64) -> f64 {
    let at = |d: f64| {
        let mut q = p.to_vec();
        q[var] += d;
        e.eval(&[("t", q[0]), ("x", q[1]), ("y", q[2])], &ParamBinding::new()).unwrap()
    };
    (-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h)) / (12.0 * h)
}

pub fn eval3(e: &rho_soliton::Expr, p: &[f64]) -> f64 {
    e.eval(&[("t", p[0]), ("x", p[1]), ("y", p[2])], &ParamBinding::new()).unwrap()
}

const BASE_METRICS: &[&[&[&str]]] = &[
    &[&["1"]],
    &[&["-1"]],
    &[&["exp(x1)"]],
    &[&["1"], &["0", "1"]],
    &[&["1"], &["0", "1 + x1^2"]],
    &[&["-1"], &["0", "exp(x1)"]],
];
const FIBER_METRICS: &[&[&[&str]]] = &[
    &[&["1"]],
    &[&["1 + u1^2"]],
    &[&["1"], &["0", "sin(u1)^2"]],
    &[&["1"], &["0", "1"]],
    &[&["exp(u2)"], &["0.2", "1"]],
];
/// Positive on the sampling boxes `[0.3, 1.2]`.
const WARPINGS: &[&str] = &["1", "2 + sin(3*V)", "exp(V)", "1 + V^2", "V"];

fn warping(r: &mut ChaCha8Rng, var: &str) -> String {
    let w = WARPINGS[r.random_range(0..WARPINGS.len())];
    w.replace('V', var)
}

/// Seeded doubly warped spec with both factors of dimension 1 or 2 and
/// positive warping functions on `[0.3, 1.2]^n`.
pub fn random_dwp(seed: u64) -> rho_soliton::product::DoublyWarpedSpec {
    use rho_soliton::parse_expr;
    let mut r = rng(seed);
    let b = BASE_METRICS[r.random_range(0..BASE_METRICS.len())];
    let f = FIBER_METRICS[r.random_range(0..FIBER_METRICS.len())];
    let bn: Vec<String> = (1..=b.len()).map(|i| format!("x{i}")).collect();
    let fn_: Vec<String> = (1..=f.len()).map(|i| format!("u{i}")).collect();
    let bnr: Vec<&str> = bn.iter().map(|s| s.as_str()).collect();
    let fnr: Vec<&str> = fn_.iter().map(|s| s.as_str()).collect();
    let base = ChartMetric::parse(&bnr, b, ParamBinding::new()).unwrap();
    let fiber = ChartMetric::parse(&fnr, f, ParamBinding::new()).unwrap();
    let (i, j) = (r.random_range(0..bn.len()), r.random_range(0..fn_.len()));
    let w1 = warping(&mut r, &bn[i]);
    let w2 = warping(&mut r, &fn_[j]);
    let f1 = parse_expr(&w1, &base.scope()).unwrap();
    let f2 = parse_expr(&w2, &fiber.scope()).unwrap();
    rho_soliton::product::DoublyWarpedSpec::new(base, fiber, f1, f2).unwrap()
}

/// Random potential on the assembled coordinates.
pub fn random_potential(seed: u64, coords: &[String]) -> String {
    let mut r = rng(seed ^ 0xf1);
    let terms: Vec<String> = coords
        .iter()
        .map(|c| {
            let a = r.random_range(-2.0..2.0f64);
            match r.random_range(0..3) {
                0 => format!("{a}*{c}^2"),
                1 => format!("{a}*sin({c})"),
                _ => format!("{a}*exp({c}/2)"),
            }
        })
        .collect();
    let cross = format!("{}*{}", coords[0], coords[coords.len() - 1]);
    format!("{} + {cross}", terms.join(" + "))
}

pub struct Constructed {
    pub name: &'static str,
    pub spec: rho_soliton::product::DoublyWarpedSpec,
    pub soliton: rho_soliton::soliton::SolitonSpec,
    pub boxes: Vec<(f64, f64)>,
}

/// Doubly warped gradient ρ-Einstein solitons known in closed form, most
/// with nonconstant warping.
pub fn constructed_solitons() -> Vec<Constructed> {
    use rho_soliton::product::DoublyWarpedSpec;
    use rho_soliton::soliton::SolitonSpec;
    let chart = |c: &[&str], rows: &[&[&str]]| ChartMetric::parse(c, rows, ParamBinding::new()).unwrap();
    let e = |src: &str, m: &ChartMetric| rho_soliton::parse_expr(src, &m.scope()).unwrap();
    let mut out = Vec::new();

    // flat plane in polar coordinates, Gaussian potential
    let (base, fiber) = (chart(&["r"], &[&["1"]]), chart(&["th"], &[&["1"]]));
    let (f1, f2) = (e("r", &base), e("1", &fiber));
    out.push(Constructed {
        name: "polar plane, φ = λr²/2",
        spec: DoublyWarpedSpec::new(base, fiber, f1, f2).unwrap(),
        soliton: SolitonSpec::new(rho_soliton::Expr::sym("r").powi(2) * 0.35, 0.3, 0.7).unwrap(),
        boxes: vec![(0.3, 2.0), (-3.0, 3.0)],
    });

    // flat ℝ³ in spherical coordinates
    let (base, fiber) = (chart(&["r"], &[&["1"]]), chart(&["th", "ph"], &[&["1"], &["0", "sin(th)^2"]]));
    let (f1, f2) = (e("r", &base), e("1", &fiber));
    out.push(Constructed {
        name: "spherical ℝ³, φ = λr²/2",
        spec: DoublyWarpedSpec::new(base, fiber, f1, f2).unwrap(),
        soliton: SolitonSpec::new(rho_soliton::Expr::sym("r").powi(2) * -0.25, -0.4, -0.5).unwrap(),
        boxes: vec![(0.3, 2.0), (0.3, 2.8), (-3.0, 3.0)],
    });

    // hyperbolic plane dr² + sinh²r dθ²: Ric = −g, τ = −2, φ = 0, λ = 2ρ − 1
    let (base, fiber) = (chart(&["r"], &[&["1"]]), chart(&["th"], &[&["1"]]));
    let f1 = e("(exp(r) - exp(-r))/2", &base);
    let f2 = e("1", &fiber);
    out.push(Constructed {
        name: "hyperbolic plane, φ = 0",
        spec: DoublyWarpedSpec::new(base, fiber, f1, f2).unwrap(),
        soliton: SolitonSpec::new(rho_soliton::Expr::zero(), 0.2, -0.6).unwrap(),
        boxes: vec![(0.3, 2.0), (-3.0, 3.0)],
    });

    // line × unit sphere, trivial warping: φ = t²/2, λ = 1 − 2ρ
    let (base, fiber) = (chart(&["t"], &[&["1"]]), chart(&["th", "ph"], &[&["1"], &["0", "sin(th)^2"]]));
    let (f1, f2) = (e("1", &base), e("1", &fiber));
    out.push(Constructed {
        name: "line × sphere, φ = t²/2",
        spec: DoublyWarpedSpec::new(base, fiber, f1, f2).unwrap(),
        soliton: SolitonSpec::new(rho_soliton::Expr::sym("t").powi(2) * 0.5, 0.1, 0.8).unwrap(),
        boxes: vec![(-2.0, 2.0), (0.3, 2.8), (-3.0, 3.0)],
    });
    out
}
