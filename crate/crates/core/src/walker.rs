//! Three-dimensional Lorentzian Walker metrics `g = 2dt dy + dx² + ϕ dy²`.
//!
//! Naming: `ϕ` (here `phi` on [`WalkerSpec`]) is the metric function and `φ`
//! is the soliton potential, written `f` in the polynomial families below.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::expr::{parse_expr, Expr, ParamBinding, Program, Scope};
use crate::geometry::{FieldJet, Geometry, ScalarField};
use crate::soliton::{residual_at, SolitonSpec};
use crate::tensor::TensorValue;
use crate::ChartMetric;

pub const COORDS: [&str; 3] = ["t", "x", "y"];
const T: usize = 0;
const X: usize = 1;
const Y: usize = 2;

/// Symbols reserved by [`walker_pde_exprs`].
pub const RHO: &str = "rho";
pub const LAMBDA: &str = "lambda";

/// Residual component order used throughout: tt, tx, ty, xx, xy, yy.
pub const PDE_LABELS: [&str; 6] = ["tt", "tx", "ty", "xx", "xy", "yy"];
const PDE_INDEX: [(usize, usize); 6] = [(T, T), (T, X), (T, Y), (X, X), (X, Y), (Y, Y)];

#[derive(Clone, Debug)]
pub struct WalkerSpec {
    pub phi: Expr,
    pub params: ParamBinding,
}

impl WalkerSpec {
    pub fn new(phi: Expr, params: ParamBinding) -> Result<WalkerSpec> {
        for s in phi.symbols() {
            if !COORDS.contains(&s.as_str()) && !params.contains_key(&s) {
                return Err(Error::UnboundSymbol(s));
            }
        }
        for c in COORDS {
            if params.contains_key(c) {
                return Err(Error::InvalidInput(format!("parameter `{c}` shadows a Walker coordinate")));
            }
        }
        Ok(WalkerSpec { phi, params })
    }

    pub fn parse(phi: &str, params: ParamBinding) -> Result<WalkerSpec> {
        let e = parse_expr(phi, &scope(&params))?;
        WalkerSpec::new(e, params)
    }

    pub fn scope(&self) -> Scope {
        scope(&self.params)
    }
}

fn scope(params: &ParamBinding) -> Scope {
    let p: Vec<&str> = params.keys().map(|s| s.as_str()).collect();
    Scope::new(&COORDS, &p)
}

pub fn walker_metric(w: &WalkerSpec) -> ChartMetric {
    let rows = vec![
        vec![Expr::zero()],
        vec![Expr::zero(), Expr::one()],
        vec![Expr::one(), Expr::zero(), w.phi.clone()],
    ];
    ChartMetric::new(COORDS.iter().map(|s| s.to_string()).collect(), rows, w.params.clone())
        .expect("Walker metric components are bound by construction")
}

/// Compiled metric together with the jet of `ϕ`, for repeated closed-form
/// evaluation.
#[derive(Clone, Debug)]
pub struct WalkerEvaluator {
    spec: WalkerSpec,
    metric: ChartMetric,
    phi: ScalarField,
}

impl WalkerEvaluator {
    pub fn new(w: &WalkerSpec) -> Result<WalkerEvaluator> {
        let metric = walker_metric(w);
        let phi = ScalarField::new(&metric, &w.phi)?;
        Ok(WalkerEvaluator {
            spec: w.clone(),
            metric,
            phi,
        })
    }

    pub fn spec(&self) -> &WalkerSpec {
        &self.spec
    }

    pub fn metric(&self) -> &ChartMetric {
        &self.metric
    }

    pub fn phi_jet(&self, p: &[f64]) -> Result<FieldJet> {
        self.phi.jet(p)
    }
}

fn h(j: &FieldJet, a: usize, b: usize) -> f64 {
    j.hessian[a * 3 + b]
}

fn sym3(p: &[f64], entries: [(usize, usize, f64); 6]) -> TensorValue {
    let mut data = vec![0.0; 9];
    for (a, b, v) in entries {
        data[a * 3 + b] = v;
        data[b * 3 + a] = v;
    }
    TensorValue::covariant2(p, 3, data)
}

/// Hessian of `φ` from the closed Walker expressions.
pub fn hessian_from_jets(p: &[f64], m: &FieldJet, f: &FieldJet) -> TensorValue {
    let (v, mt, mx, my) = (m.value, m.gradient[T], m.gradient[X], m.gradient[Y]);
    let (ft, fx, fy) = (f.gradient[T], f.gradient[X], f.gradient[Y]);
    sym3(
        p,
        [
            (T, T, h(f, T, T)),
            (T, X, h(f, T, X)),
            (T, Y, h(f, T, Y) - 0.5 * mt * ft),
            (X, X, h(f, X, X)),
            (X, Y, h(f, X, Y) - 0.5 * mx * ft),
            (Y, Y, h(f, Y, Y) - 0.5 * (v * mt + my) * ft + 0.5 * mx * fx + 0.5 * mt * fy),
        ],
    )
}

pub fn ricci_from_jet(p: &[f64], m: &FieldJet) -> TensorValue {
    sym3(
        p,
        [
            (T, T, 0.0),
            (T, X, 0.0),
            (T, Y, 0.5 * h(m, T, T)),
            (X, X, 0.0),
            (X, Y, 0.5 * h(m, T, X)),
            (Y, Y, 0.5 * (m.value * h(m, T, T) - h(m, X, X))),
        ],
    )
}

pub fn walker_hessian_closed(w: &WalkerSpec, phi: &Expr, p: &[f64]) -> Result<TensorValue> {
    let ev = WalkerEvaluator::new(w)?;
    let f = ScalarField::new(&ev.metric, phi)?.jet(p)?;
    Ok(hessian_from_jets(p, &ev.phi_jet(p)?, &f))
}

pub fn walker_ricci_closed(w: &WalkerSpec, p: &[f64]) -> Result<TensorValue> {
    let ev = WalkerEvaluator::new(w)?;
    Ok(ricci_from_jet(p, &ev.phi_jet(p)?))
}

/// The six left-minus-right soliton equations of a Walker background as
/// symbolic expressions in `t, x, y`, the Walker parameters and the reserved
/// symbols `rho`, `lambda`.
pub fn walker_pde_exprs(w: &WalkerSpec, potential: &Expr) -> Result<[Expr; 6]> {
    for r in [RHO, LAMBDA] {
        if w.params.contains_key(r) {
            return Err(Error::InvalidInput(format!("`{r}` is reserved in Walker equations")));
        }
    }
    let m = &w.phi;
    let f = potential;
    let d = |e: &Expr, v: &[&str]| e.derivative(v);
    let half = |e: Expr| e * 0.5;
    let tau = d(m, &["t", "t"]);
    let c = Expr::sym(RHO) * tau.clone() + Expr::sym(LAMBDA);
    let (mt, mx, my) = (d(m, &["t"]), d(m, &["x"]), d(m, &["y"]));
    let (ft, fx, fy) = (d(f, &["t"]), d(f, &["x"]), d(f, &["y"]));
    let eqs = [
        d(f, &["t", "t"]),
        d(f, &["t", "x"]),
        half(tau.clone()) + d(f, &["t", "y"]) - half(mt.clone() * ft.clone()) - c.clone(),
        d(f, &["x", "x"]) - c.clone(),
        half(d(m, &["t", "x"])) + d(f, &["x", "y"]) - half(mx.clone() * ft.clone()),
        half(m.clone() * tau - d(m, &["x", "x"])) + d(f, &["y", "y"])
            - half((m.clone() * mt.clone() + my) * ft)
            + half(mx * fx)
            + half(mt * fy)
            - c * m.clone(),
    ];
    Ok(eqs.map(|e| e.simplify()))
}

/// Compiled form of [`walker_pde_exprs`] for one soliton.
#[derive(Clone, Debug)]
pub struct WalkerPde {
    program: Program,
}

impl WalkerPde {
    pub fn new(w: &WalkerSpec, s: &SolitonSpec) -> Result<WalkerPde> {
        let eqs = walker_pde_exprs(w, &s.phi)?;
        let mut params = w.params.clone();
        params.insert(RHO.into(), s.rho);
        params.insert(LAMBDA.into(), s.lambda);
        let inputs: Vec<String> = COORDS.iter().map(|c| c.to_string()).collect();
        Ok(WalkerPde {
            program: Program::compile(&eqs, &inputs, &params)?,
        })
    }

    pub fn eval(&self, p: &[f64]) -> Result<[f64; 6]> {
        let v = self.program.eval(p)?;
        Ok([v[0], v[1], v[2], v[3], v[4], v[5]])
    }
}

pub fn walker_pde_residual(w: &WalkerSpec, s: &SolitonSpec, p: &[f64]) -> Result<[f64; 6]> {
    WalkerPde::new(w, s)?.eval(p)
}

/// Components of a covariant 2-tensor in [`PDE_LABELS`] order.
pub fn pde_components(t: &TensorValue) -> [f64; 6] {
    PDE_INDEX.map(|(a, b)| t.get(&[a, b]))
}

/// Per-point comparison of the system residual with the generic residual.
#[derive(Clone, Debug, Serialize)]
pub struct PdeComparison {
    pub pde_max: f64,
    pub generic_max: f64,
    /// Largest componentwise difference between the two formulations.
    pub gap: f64,
    pub tau_gap: f64,
}

pub fn compare_pde(w: &WalkerSpec, s: &SolitonSpec, points: &[Vec<f64>]) -> Result<PdeComparison> {
    let ev = WalkerEvaluator::new(w)?;
    let pde = WalkerPde::new(w, s)?;
    let field = ScalarField::new(&ev.metric, &s.phi)?;
    let per = exec::try_map(points, |p| -> Result<[f64; 4]> {
        let geo = Geometry::at(&ev.metric, p, false)?;
        let generic = pde_components(&residual_at(&geo, &field.jet(p)?, s.rho, s.lambda));
        let sys = pde.eval(p)?;
        let gap = generic.iter().zip(&sys).map(|(a, b)| (a - b).abs()).fold(0.0_f64, f64::max);
        let tau = h(&ev.phi_jet(p)?, T, T);
        Ok([max_abs(&sys), max_abs(&generic), gap, (geo.scalar - tau).abs()])
    })?;
    let col = |k: usize| per.iter().map(|r| r[k]).fold(0.0_f64, f64::max);
    Ok(PdeComparison {
        pde_max: col(0),
        generic_max: col(1),
        gap: col(2),
        tau_gap: col(3),
    })
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Largest Ricci and Riemann components over the points.
pub fn einstein_flat_probe(m: &ChartMetric, points: &[Vec<f64>]) -> Result<(f64, f64)> {
    let per = exec::try_map(points, |p| -> Result<(f64, f64)> {
        let geo = Geometry::at(m, p, false)?;
        Ok((max_abs(&geo.ricci), max_abs(&geo.riemann)))
    })?;
    Ok(per.iter().fold((0.0_f64, 0.0_f64), |(a, b), &(r, q)| (a.max(r), b.max(q))))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnsatzPattern {
    /// `tB + x²/2·D + xE + F`.
    Separated,
    /// `tB + x²/2·B' + xD + E`; `F` is unused.
    Forced,
}

/// Potential assembled from functions of `y`.
#[derive(Clone, Debug)]
pub struct WalkerAnsatz {
    pub b: Expr,
    pub d: Expr,
    pub e: Expr,
    pub f: Expr,
    pub pattern: AnsatzPattern,
}

impl WalkerAnsatz {
    pub fn potential(&self) -> Result<Expr> {
        for part in [&self.b, &self.d, &self.e, &self.f] {
            if part.mentions("t") || part.mentions("x") {
                return Err(Error::InvalidInput(format!("ansatz function `{part}` must depend on y only")));
            }
        }
        let t = Expr::sym("t");
        let x = Expr::sym("x");
        let half_x2 = x.powi(2) * 0.5;
        let e = match self.pattern {
            AnsatzPattern::Separated => {
                t * self.b.clone() + half_x2 * self.d.clone() + x * self.e.clone() + self.f.clone()
            }
            AnsatzPattern::Forced => {
                t * self.b.clone() + half_x2 * self.b.differentiate("y") + x * self.d.clone() + self.e.clone()
            }
        };
        Ok(e.simplify())
    }
}

// Polynomial soliton families and the parameter sweep.

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Case {
    I,
    II,
}

impl Case {
    /// Parameters in the order they are drawn. Case I instantiates the free
    /// function `F(y)` as `F0 + F1·y + F2·y²`.
    pub fn params(self) -> &'static [&'static str] {
        match self {
            Case::I => &["a", "b", "alpha", "beta", "gamma", "F0", "F1", "F2"],
            Case::II => &["k", "l", "m", "n", "p", "r", "s"],
        }
    }

    fn phi_src(self) -> &'static str {
        match self {
            Case::I => "a*x + b",
            Case::II => "(k/m^2)*exp(m*x) + l*x + s",
        }
    }

    fn potential_src(self) -> &'static str {
        match self {
            Case::I => "gamma*t + (alpha*x + beta)*x + F0 + F1*y + F2*y^2",
            Case::II => "m*x + n*y^2/2 + p*y + r",
        }
    }
}

/// Walker metric and soliton candidate for one parameter point. λ is solved
/// from the `xx` equation, `λ = φ_xx − ρτ`, evaluated at the origin (both
/// terms are constant on these families).
pub fn walker_family(case: Case, params: &ParamBinding, rho: f64) -> Result<(WalkerSpec, SolitonSpec)> {
    for name in case.params() {
        if !params.contains_key(*name) {
            return Err(Error::InvalidInput(format!("case {case:?} needs parameter `{name}`")));
        }
    }
    if case == Case::II && params["m"] == 0.0 {
        return Err(Error::InvalidInput("case II requires m ≠ 0".into()));
    }
    let w = WalkerSpec::parse(case.phi_src(), params.clone())?;
    let f = parse_expr(case.potential_src(), &w.scope())?;
    let origin = [("t", 0.0), ("x", 0.0), ("y", 0.0)];
    let fxx = f.derivative(&["x", "x"]).eval(&origin, params)?;
    let tau = w.phi.derivative(&["t", "t"]).eval(&origin, params)?;
    let s = SolitonSpec::new(f, rho, fxx - rho * tau)?;
    Ok((w, s))
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub case: Case,
    pub rows: usize,
    pub lattice: Vec<f64>,
    pub rho_values: Vec<f64>,
    pub seed: u64,
    pub points: Vec<Vec<f64>>,
    pub tolerance: f64,
}

impl SweepConfig {
    pub fn new(case: Case, seed: u64) -> SweepConfig {
        SweepConfig {
            case,
            rows: 200,
            lattice: vec![-1.0, 0.0, 1.0],
            rho_values: vec![0.0, 0.5, 1.0 / 3.0, 0.25],
            seed,
            points: box_points(seed ^ 0x5eed, 50, 1.0),
            tolerance: 1e-8,
        }
    }
}

/// Uniform points in `[-half, half]³`.
pub fn box_points(seed: u64, count: usize, half: f64) -> Vec<Vec<f64>> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..3).map(|_| r.random_range(-half..half)).collect())
        .collect()
}

fn row_rng(seed: u64, row: usize) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(row as u64);
    r
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub params: ParamBinding,
    pub rho: f64,
    pub lambda: f64,
    /// Largest generic residual component over the sample points.
    pub max_residual: f64,
    /// Same, from the compiled six-equation system.
    pub pde_max: f64,
    pub pass: bool,
}

pub fn draw_params(cfg: &SweepConfig, row: usize) -> (ParamBinding, f64) {
    let mut r = row_rng(cfg.seed, row);
    let mut params = ParamBinding::new();
    for name in cfg.case.params() {
        let v = if cfg.case == Case::II && *name == "m" {
            let nonzero: Vec<f64> = cfg.lattice.iter().copied().filter(|v| *v != 0.0).collect();
            nonzero[r.random_range(0..nonzero.len())]
        } else {
            cfg.lattice[r.random_range(0..cfg.lattice.len())]
        };
        params.insert(name.to_string(), v);
    }
    let rho = cfg.rho_values[r.random_range(0..cfg.rho_values.len())];
    (params, rho)
}

pub fn evaluate_row(cfg: &SweepConfig, index: usize) -> Result<SweepRow> {
    let (params, rho) = draw_params(cfg, index);
    let (w, s) = walker_family(cfg.case, &params, rho)?;
    let ev = WalkerEvaluator::new(&w)?;
    let field = ScalarField::new(&ev.metric, &s.phi)?;
    let pde = WalkerPde::new(&w, &s)?;
    let mut max_residual = 0.0_f64;
    let mut pde_max = 0.0_f64;
    for p in &cfg.points {
        let geo = Geometry::at(&ev.metric, p, false)?;
        max_residual = max_residual.max(residual_at(&geo, &field.jet(p)?, s.rho, s.lambda).max_abs());
        pde_max = pde_max.max(max_abs(&pde.eval(p)?));
    }
    Ok(SweepRow {
        index,
        params,
        rho,
        lambda: s.lambda,
        max_residual,
        pde_max,
        pass: max_residual < cfg.tolerance,
    })
}

/// A candidate parameter relation tested against the sweep.
#[derive(Clone, Debug, Serialize)]
pub struct HypothesisStat {
    pub relation: &'static str,
    /// Every passing row satisfies it.
    pub necessary: bool,
    pub rows_satisfying: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstraintReport {
    pub case: Case,
    pub rows: usize,
    pub rows_passing: usize,
    pub tolerance: f64,
    /// True only when every sampled parameter point passes.
    pub family_valid_as_stated: bool,
    pub hypotheses: Vec<HypothesisStat>,
    /// Conjunction of all hypotheses: every row satisfying it passes.
    pub conjunction_sufficient: bool,
    pub conjunction_necessary: bool,
    /// Values each parameter takes among passing rows.
    pub values_on_passing: BTreeMap<String, Vec<f64>>,
    pub lambda_on_passing: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub constraints: ConstraintReport,
}

type Relation = (&'static str, fn(&ParamBinding) -> bool);

fn relations(case: Case) -> Vec<Relation> {
    match case {
        Case::I => vec![
            ("alpha = 0", |p| p["alpha"] == 0.0),
            ("a*gamma = 0", |p| p["a"] * p["gamma"] == 0.0),
            ("4*F2 + a*beta = 0", |p| 4.0 * p["F2"] + p["a"] * p["beta"] == 0.0),
        ],
        Case::II => vec![("2*n + l*m = 0", |p| 2.0 * p["n"] + p["l"] * p["m"] == 0.0)],
    }
}

pub fn sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    let idx: Vec<usize> = (0..cfg.rows).collect();
    let rows = exec::try_map(&idx, |&i| evaluate_row(cfg, i))?;
    let rels = relations(cfg.case);
    let passing: Vec<&SweepRow> = rows.iter().filter(|r| r.pass).collect();
    let hypotheses = rels
        .iter()
        .map(|(relation, holds)| HypothesisStat {
            relation,
            necessary: passing.iter().all(|r| holds(&r.params)),
            rows_satisfying: rows.iter().filter(|r| holds(&r.params)).count(),
        })
        .collect();
    let conj = |p: &ParamBinding| rels.iter().all(|(_, holds)| holds(p));
    let mut values_on_passing: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in &passing {
        for (k, v) in &r.params {
            let e = values_on_passing.entry(k.clone()).or_default();
            if !e.contains(v) {
                e.push(*v);
            }
        }
    }
    for v in values_on_passing.values_mut() {
        v.sort_by(f64::total_cmp);
    }
    let mut lambda_on_passing: Vec<f64> = Vec::new();
    for r in &passing {
        if !lambda_on_passing.contains(&r.lambda) {
            lambda_on_passing.push(r.lambda);
        }
    }
    lambda_on_passing.sort_by(f64::total_cmp);
    let constraints = ConstraintReport {
        case: cfg.case,
        rows: rows.len(),
        rows_passing: passing.len(),
        tolerance: cfg.tolerance,
        family_valid_as_stated: passing.len() == rows.len(),
        hypotheses,
        conjunction_sufficient: rows.iter().filter(|r| conj(&r.params)).all(|r| r.pass),
        conjunction_necessary: passing.iter().all(|r| conj(&r.params)),
        values_on_passing,
        lambda_on_passing,
    };
    Ok(SweepReport { rows, constraints })
}

// Essentially conformally symmetric family and the nonexistence search.

#[derive(Clone, Debug)]
pub struct EcsFamily {
    /// Function of `y` only.
    pub a: Expr,
}

impl EcsFamily {
    pub fn new(a: Expr) -> Result<EcsFamily> {
        for s in a.symbols() {
            if s != "y" {
                return Err(Error::InvalidInput(format!("a(y) may only mention y, found `{s}`")));
            }
        }
        Ok(EcsFamily { a })
    }

    pub fn parse(src: &str) -> Result<EcsFamily> {
        EcsFamily::new(parse_expr(src, &Scope::new(&["y"], &[]))?)
    }

    pub fn walker(&self) -> WalkerSpec {
        let x = Expr::sym("x");
        WalkerSpec::new(x.powi(3) + self.a.clone() * x, ParamBinding::new()).expect("a(y) is checked")
    }

    fn a_at(&self, y: f64) -> Result<f64> {
        self.a.eval(&[("y", y)], &ParamBinding::new())
    }
}

/// `3x²/2·B' + 3xD − 1/3 − a/2·B'`, the combined `x`-derivative equation
/// used in the nonexistence argument, evaluated verbatim.
pub fn eq_combined_residual(a: f64, b_prime: f64, d: f64, x: f64) -> f64 {
    1.5 * x * x * b_prime + 3.0 * x * d - 1.0 / 3.0 - 0.5 * a * b_prime
}

/// `[3x² + a(y)]·B(y)`.
pub fn eq_obstruction_residual(a: f64, b: f64, x: f64) -> f64 {
    (3.0 * x * x + a) * b
}

#[derive(Clone, Debug)]
pub struct EcsConfig {
    pub lambda: f64,
    pub seed: u64,
    pub grid: usize,
    pub members: usize,
    pub restarts: usize,
    pub irls_iterations: usize,
    pub degree: u32,
    pub structured_degree: u32,
    pub points: Vec<Vec<f64>>,
    pub tolerance: f64,
}

impl EcsConfig {
    pub fn new(lambda: f64, seed: u64) -> EcsConfig {
        EcsConfig {
            lambda,
            seed,
            grid: 9,
            members: 200,
            restarts: 200,
            irls_iterations: 15,
            degree: 4,
            structured_degree: 3,
            points: box_points(seed, 24, 1.0),
            tolerance: 1e-3,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StructuralReport {
    pub grid_points: usize,
    /// Grid rows `y_j` where some `x_i` has `3x_i² + a(y_j) ≠ 0`, so the
    /// obstruction forces `B(y_j) = 0`.
    pub forced_rows: usize,
    pub grid_rows: usize,
    /// `B` vanishes at two or more distinct `y`, and `B = λy + b₀` then
    /// gives `λ = 0`.
    pub b_forced_zero: bool,
    pub implied_lambda: f64,
    pub members: usize,
    /// Minimum over the randomized `(B, D)` family of the worst residual
    /// of each equation on the grid.
    pub combined_floor: f64,
    pub obstruction_floor: f64,
    pub joint_floor: f64,
}

/// Structural check on `B = λy + b₀` and quadratic `D`, with `λ` fixed.
pub fn structural_check(fam: &EcsFamily, cfg: &EcsConfig) -> Result<StructuralReport> {
    let n = cfg.grid.max(2);
    let axis: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect();
    let a_vals: Vec<f64> = axis.iter().map(|&y| fam.a_at(y)).collect::<Result<_>>()?;
    let forced: Vec<f64> = axis
        .iter()
        .zip(&a_vals)
        .filter(|(_, &a)| axis.iter().any(|&x| (3.0 * x * x + a).abs() > 1e-12))
        .map(|(&y, _)| y)
        .collect();
    // λ = (B(y₁) − B(y₀))/(y₁ − y₀) with both values forced to zero
    let implied_lambda = if forced.len() >= 2 { 0.0 } else { f64::NAN };
    let idx: Vec<usize> = (0..cfg.members).collect();
    let lambda = cfg.lambda;
    let floors = exec::map(&idx, |&k| {
        let mut r = row_rng(cfg.seed, k);
        let b0: f64 = r.random_range(-1.0..1.0);
        let dc: [f64; 3] = [r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)];
        let (mut c, mut o) = (0.0_f64, 0.0_f64);
        for (j, &y) in axis.iter().enumerate() {
            let b = lambda * y + b0;
            let d = dc[0] + dc[1] * y + dc[2] * y * y;
            for &x in &axis {
                c = c.max(eq_combined_residual(a_vals[j], lambda, d, x).abs());
                o = o.max(eq_obstruction_residual(a_vals[j], b, x).abs());
            }
        }
        (c, o)
    });
    let min = |f: fn(&(f64, f64)) -> f64| floors.iter().map(f).fold(f64::INFINITY, f64::min);
    Ok(StructuralReport {
        grid_points: n * n,
        forced_rows: forced.len(),
        grid_rows: n,
        b_forced_zero: forced.len() >= 2,
        implied_lambda,
        members: cfg.members,
        combined_floor: min(|p| p.0),
        obstruction_floor: min(|p| p.1),
        joint_floor: min(|p| p.0.max(p.1)),
    })
}

/// Polynomial in `(t, x, y)` as `(coefficient, [i, j, k])` terms.
#[derive(Clone, Debug, Default)]
pub struct Poly(pub Vec<(f64, [u32; 3])>);

impl Poly {
    pub fn jet(&self, p: &[f64]) -> FieldJet {
        let mut j = FieldJet {
            value: 0.0,
            gradient: vec![0.0; 3],
            hessian: vec![0.0; 9],
        };
        // d^k/dz^k of z^e
        let pw = |z: f64, e: u32, k: u32| -> f64 {
            if k > e {
                return 0.0;
            }
            let c: f64 = (0..k).map(|i| (e - i) as f64).product();
            c * z.powi((e - k) as i32)
        };
        for &(c, e) in &self.0 {
            let d = |o: [u32; 3]| c * (0..3).map(|v| pw(p[v], e[v], o[v])).product::<f64>();
            j.value += d([0, 0, 0]);
            for a in 0..3 {
                let mut o = [0; 3];
                o[a] += 1;
                j.gradient[a] += d(o);
                for b in 0..3 {
                    let mut o2 = o;
                    o2[b] += 1;
                    j.hessian[a * 3 + b] += d(o2);
                }
            }
        }
        j
    }
}

/// Monomials of total degree `1..=degree`; constants have zero Hessian.
pub fn monomial_basis(degree: u32) -> Vec<Poly> {
    let mut out = Vec::new();
    for total in 1..=degree {
        for i in 0..=total {
            for j in 0..=total - i {
                out.push(Poly(vec![(1.0, [i, j, total - i - j])]));
            }
        }
    }
    out
}

/// Basis of `tB + x²/2·B' + xD + E` with `B, D, E` polynomials in `y`.
pub fn structured_basis(degree: u32) -> Vec<Poly> {
    let mut out = Vec::new();
    for k in 0..=degree {
        let mut b = vec![(1.0, [1, 0, k])];
        if k > 0 {
            b.push((0.5 * k as f64, [0, 2, k - 1]));
        }
        out.push(Poly(b));
        out.push(Poly(vec![(1.0, [0, 1, k])]));
        if k > 0 {
            out.push(Poly(vec![(1.0, [0, 0, k])]));
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchAnsatz {
    Polynomial,
    Structured,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchReport {
    pub ansatz: SearchAnsatz,
    pub unknowns: usize,
    pub equations: usize,
    pub restarts: usize,
    /// Best max-abs residual reached by any restart.
    pub floor: f64,
    pub median_restart: f64,
    /// Least-squares RMS minimum; no coefficient choice has a smaller
    /// max-abs residual on these points.
    pub rms_lower_bound: f64,
    pub verdict: &'static str,
}

/// Linear system `A c ≈ b` of the soliton equations for `φ = Σ c_k basis_k`.
fn linear_system(fam: &EcsFamily, lambda: f64, basis: &[Poly], points: &[Vec<f64>]) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let metric = walker_metric(&fam.walker());
    let blocks = exec::try_map(points, |p| -> Result<(Vec<[f64; 6]>, [f64; 6])> {
        let geo = Geometry::at(&metric, p, false)?;
        let cols = basis.iter().map(|q| pde_components(&geo.hessian(&q.jet(p)))).collect();
        let zero = FieldJet {
            value: 0.0,
            gradient: vec![0.0; 3],
            hessian: vec![0.0; 9],
        };
        let r0 = pde_components(&residual_at(&geo, &zero, 0.0, lambda));
        Ok((cols, r0))
    })?;
    let rows = points.len() * 6;
    let mut a = DMatrix::zeros(rows, basis.len());
    let mut b = DVector::zeros(rows);
    for (pi, (cols, r0)) in blocks.iter().enumerate() {
        for comp in 0..6 {
            let row = pi * 6 + comp;
            b[row] = -r0[comp];
            for (k, col) in cols.iter().enumerate() {
                a[(row, k)] = col[comp];
            }
        }
    }
    Ok((a, b))
}

/// Lawson iteration towards the minimax fit, started from random weights.
fn lawson(a: &DMatrix<f64>, b: &DVector<f64>, w0: Vec<f64>, iters: usize) -> f64 {
    let mut w = w0;
    let n = a.ncols();
    let mut best = f64::INFINITY;
    for _ in 0..iters {
        let mut ata = DMatrix::<f64>::zeros(n, n);
        let mut atb = DVector::<f64>::zeros(n);
        for (i, &wi) in w.iter().enumerate() {
            let row = a.row(i);
            ata += wi * row.transpose() * row;
            atb += wi * b[i] * row.transpose();
        }
        let ridge = 1e-13 * (0..n).map(|k| ata[(k, k)]).fold(0.0_f64, f64::max).max(1e-300);
        for k in 0..n {
            ata[(k, k)] += ridge;
        }
        let Some(ch) = ata.cholesky() else { break };
        let c = ch.solve(&atb);
        let r = a * c - b;
        let m = r.amax();
        best = best.min(m);
        let total: f64 = w.iter().zip(r.iter()).map(|(wi, ri)| wi * ri.abs()).sum();
        if total <= 0.0 {
            break;
        }
        for (wi, ri) in w.iter_mut().zip(r.iter()) {
            *wi *= ri.abs() / total;
        }
    }
    best
}

pub fn search(fam: &EcsFamily, cfg: &EcsConfig, ansatz: SearchAnsatz) -> Result<SearchReport> {
    let basis = match ansatz {
        SearchAnsatz::Polynomial => monomial_basis(cfg.degree),
        SearchAnsatz::Structured => structured_basis(cfg.structured_degree),
    };
    let (a, b) = linear_system(fam, cfg.lambda, &basis, &cfg.points)?;
    let ls = a.clone().svd(true, true).solve(&b, 1e-12).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let rms_lower_bound = (&a * ls - &b).norm() / (b.len() as f64).sqrt();
    let idx: Vec<usize> = (0..cfg.restarts).collect();
    let mut results = exec::map(&idx, |&k| {
        let mut r = row_rng(cfg.seed ^ 0xec5, k);
        let w0: Vec<f64> = (0..b.len()).map(|_| r.random_range(0.01..1.0)).collect();
        lawson(&a, &b, w0, cfg.irls_iterations)
    });
    results.sort_by(f64::total_cmp);
    let floor = results.first().copied().unwrap_or(f64::NAN);
    let median_restart = results.get(results.len() / 2).copied().unwrap_or(f64::NAN);
    Ok(SearchReport {
        ansatz,
        unknowns: basis.len(),
        equations: b.len(),
        restarts: cfg.restarts,
        floor,
        median_restart,
        rms_lower_bound,
        verdict: if rms_lower_bound > cfg.tolerance {
            "no solution found above tolerance"
        } else {
            "residual floor within tolerance"
        },
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EcsReport {
    pub a: String,
    pub lambda: f64,
    /// Largest Cotton component at the search points; nonzero means the
    /// metric is not conformally flat.
    pub cotton_max: f64,
    pub structural: StructuralReport,
    pub searches: Vec<SearchReport>,
}

pub fn falsify_ecs(fam: &EcsFamily, cfg: &EcsConfig) -> Result<EcsReport> {
    let metric = walker_metric(&fam.walker());
    let cotton = exec::try_map(&cfg.points, |p| Geometry::at(&metric, p, true)?.cotton().map(|c| c.max_abs()))?;
    Ok(EcsReport {
        a: fam.a.to_string(),
        lambda: cfg.lambda,
        cotton_max: cotton.into_iter().fold(0.0, f64::max),
        structural: structural_check(fam, cfg)?,
        searches: vec![search(fam, cfg, SearchAnsatz::Polynomial)?, search(fam, cfg, SearchAnsatz::Structured)?],
    })
}
