//! TOML manifests describing one verification run.
//!
//! See `docs/manifest.md` for the accepted keys.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::checks::{self, Kind};
use crate::error::{Error, Result};
use crate::expr::{parse_expr, Expr, ParamBinding};
use crate::product::{grw_spec, sss_spec, DoublyWarpedSpec, WarpedSpec, TIME};
use crate::walker::{Case, EcsFamily, WalkerSpec};
use crate::ChartMetric;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct Raw {
    kind: Option<String>,
    seed: Option<u64>,
    samples: Option<usize>,
    #[serde(default)]
    checks: Vec<String>,
    #[serde(default)]
    params: BTreeMap<String, f64>,
    #[serde(default)]
    coords: Vec<RawCoord>,
    metric: Option<Vec<Vec<String>>>,
    potential: Option<String>,
    soliton: Option<RawSoliton>,
    #[serde(default)]
    tolerances: BTreeMap<String, f64>,
    base: Option<RawFactor>,
    fiber: Option<RawFactor>,
    f1: Option<String>,
    f2: Option<String>,
    b: Option<String>,
    f: Option<String>,
    interval: Option<[f64; 2]>,
    metric_function: Option<String>,
    case: Option<String>,
    sweep: Option<usize>,
    lattice: Option<Vec<f64>>,
    rho_values: Option<Vec<f64>>,
    a_list: Option<Vec<String>>,
    lambdas: Option<Vec<f64>>,
    restarts: Option<usize>,
    degree: Option<u32>,
    floor_threshold: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoord {
    name: String,
    range: [f64; 2],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSoliton {
    rho: f64,
    lambda: RawLambda,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawLambda {
    Value(f64),
    Word(String),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawFactor {
    Preset(String),
    Table(FactorTable),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FactorTable {
    preset: Option<String>,
    #[serde(default)]
    coords: Vec<RawCoord>,
    metric: Option<Vec<Vec<String>>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Lambda {
    Value(f64),
    /// Solved at the first sample so the residual is trace-free there.
    Solve,
}

#[derive(Clone, Debug)]
pub struct SolitonSetup {
    pub phi: Expr,
    pub rho: f64,
    pub lambda: Lambda,
}

#[derive(Clone, Debug)]
pub enum Model {
    Chart(ChartMetric),
    DoublyWarped(DoublyWarpedSpec),
    Warped(WarpedSpec),
    Grw(WarpedSpec),
    Sss(DoublyWarpedSpec),
    Walker(WalkerSpec),
    FamilySweep {
        case: Case,
        rows: usize,
        lattice: Vec<f64>,
        rho_values: Vec<f64>,
    },
    Ecs {
        families: Vec<EcsFamily>,
        lambdas: Vec<f64>,
        restarts: usize,
        degree: u32,
        floor_threshold: f64,
    },
}

#[derive(Clone, Debug)]
pub struct Manifest {
    pub kind: Kind,
    pub seed: u64,
    pub samples: usize,
    pub checks: Vec<String>,
    pub tolerances: BTreeMap<String, f64>,
    pub model: Model,
    /// Sampling box per coordinate of the assembled metric.
    pub boxes: Vec<(f64, f64)>,
    /// A potential without a soliton block is used by Hessian checks.
    pub potential: Option<Expr>,
    pub soliton: Option<SolitonSetup>,
    pub digest: String,
}

pub const DEFAULT_SAMPLES: usize = 50;

pub fn load_manifest(path: &Path) -> Result<Manifest> {
    let text = std::fs::read_to_string(path)?;
    parse_manifest(&text)
}

pub fn parse_manifest(text: &str) -> Result<Manifest> {
    let raw: Raw = toml::from_str(text).map_err(|e| Error::Manifest(e.to_string()))?;
    let missing: Vec<&str> = [("kind", raw.kind.is_none()), ("seed", raw.seed.is_none())]
        .into_iter()
        .filter_map(|(k, m)| m.then_some(k))
        .collect();
    if !missing.is_empty() {
        return Err(Error::Manifest(format!("missing required field(s): {}", missing.join(", "))));
    }
    let kind_name = raw.kind.clone().unwrap_or_default();
    let kind = Kind::from_name(&kind_name)
        .ok_or_else(|| Error::Manifest(format!("unknown kind `{kind_name}`; expected one of {}", Kind::names())))?;
    let params: ParamBinding = raw.params.clone();
    for (k, v) in &params {
        if !v.is_finite() {
            return Err(Error::Manifest(format!("parameter `{k}` = {v} is not finite")));
        }
    }
    check_unused(&raw, kind)?;

    let (model, boxes) = build_model(&raw, kind, &params)?;
    let metric = model_metric(&model)?;
    let potential = match (&raw.potential, &metric) {
        (Some(src), Some(m)) => Some(parse_in(src, m, "potential")?),
        (Some(_), None) => return Err(Error::Manifest(format!("kind `{kind_name}` takes no potential"))),
        (None, _) => None,
    };
    let soliton = match raw.soliton {
        None => None,
        Some(s) => {
            let phi = potential
                .clone()
                .ok_or_else(|| Error::Manifest("a [soliton] block needs a `potential`".into()))?;
            let lambda = match s.lambda {
                RawLambda::Value(v) => Lambda::Value(v),
                RawLambda::Word(w) if w == "solve" || w == "solve-lambda" => Lambda::Solve,
                RawLambda::Word(w) => {
                    return Err(Error::Manifest(format!("soliton.lambda must be a number or \"solve\", got \"{w}\"")))
                }
            };
            if !s.rho.is_finite() || matches!(lambda, Lambda::Value(v) if !v.is_finite()) {
                return Err(Error::Manifest("soliton.rho and soliton.lambda must be finite".into()));
            }
            Some(SolitonSetup { phi, rho: s.rho, lambda })
        }
    };

    let checks = if raw.checks.is_empty() {
        checks::defaults_for(kind, potential.is_some(), soliton.is_some())
    } else {
        raw.checks.clone()
    };
    for c in &checks {
        checks::validate(c, kind, potential.is_some(), soliton.is_some())?;
    }
    for (name, tol) in &raw.tolerances {
        if checks::info(name).is_none() {
            return Err(Error::Manifest(format!("tolerance given for unknown check `{name}`")));
        }
        if !(*tol > 0.0) {
            return Err(Error::Manifest(format!("tolerance for `{name}` must be positive")));
        }
    }

    Ok(Manifest {
        kind,
        seed: raw.seed.unwrap_or_default(),
        samples: raw.samples.unwrap_or(DEFAULT_SAMPLES),
        checks,
        tolerances: raw.tolerances,
        model,
        boxes,
        potential,
        soliton,
        digest: hex::encode(Sha256::digest(text.as_bytes())),
    })
}

impl Manifest {
    /// Replaces the check list, validating every name.
    pub fn select_checks(&mut self, names: &[String]) -> Result<()> {
        for c in names {
            checks::validate(c, self.kind, self.potential.is_some(), self.soliton.is_some())?;
        }
        self.checks = names.to_vec();
        Ok(())
    }

    pub fn tolerance(&self, check: &str) -> f64 {
        self.tolerances
            .get(check)
            .copied()
            .or_else(|| checks::info(check).map(|i| i.tolerance))
            .unwrap_or(1e-8)
    }

    /// Assembled metric for kinds that have one.
    pub fn metric(&self) -> Option<ChartMetric> {
        model_metric(&self.model).ok().flatten()
    }
}

pub fn model_metric(model: &Model) -> Result<Option<ChartMetric>> {
    use crate::product::{assemble_doubly_warped, assemble_warped};
    Ok(match model {
        Model::Chart(m) => Some(m.clone()),
        Model::DoublyWarped(s) | Model::Sss(s) => Some(assemble_doubly_warped(s)?),
        Model::Warped(s) | Model::Grw(s) => Some(assemble_warped(s)?),
        Model::Walker(w) => Some(crate::walker::walker_metric(w)),
        Model::FamilySweep { .. } | Model::Ecs { .. } => None,
    })
}

fn parse_in(src: &str, m: &ChartMetric, what: &str) -> Result<Expr> {
    parse_expr(src, &m.scope()).map_err(|e| Error::Manifest(format!("{what} `{src}`: {e}")))
}

fn check_unused(raw: &Raw, kind: Kind) -> Result<()> {
    let present: Vec<(&str, bool)> = vec![
        ("metric", raw.metric.is_some()),
        ("coords", !raw.coords.is_empty()),
        ("base", raw.base.is_some()),
        ("fiber", raw.fiber.is_some()),
        ("f1", raw.f1.is_some()),
        ("f2", raw.f2.is_some()),
        ("b", raw.b.is_some()),
        ("f", raw.f.is_some()),
        ("interval", raw.interval.is_some()),
        ("metric-function", raw.metric_function.is_some()),
        ("case", raw.case.is_some()),
        ("sweep", raw.sweep.is_some()),
        ("lattice", raw.lattice.is_some()),
        ("rho-values", raw.rho_values.is_some()),
        ("a-list", raw.a_list.is_some()),
        ("lambdas", raw.lambdas.is_some()),
        ("restarts", raw.restarts.is_some()),
        ("degree", raw.degree.is_some()),
        ("floor-threshold", raw.floor_threshold.is_some()),
    ];
    let allowed: &[&str] = match kind {
        Kind::Chart => &["metric", "coords"],
        Kind::DoublyWarped => &["base", "fiber", "f1", "f2"],
        Kind::Warped => &["base", "fiber", "b"],
        Kind::Grw => &["fiber", "b", "interval"],
        Kind::Sss => &["fiber", "f", "interval"],
        Kind::Walker => &["metric-function", "coords"],
        Kind::WalkerFamilies => &["case", "sweep", "lattice", "rho-values", "coords"],
        Kind::WalkerEcs => &["a-list", "lambdas", "restarts", "degree", "floor-threshold"],
    };
    for (key, set) in present {
        if set && !allowed.contains(&key) {
            return Err(Error::Manifest(format!("key `{key}` does not apply to kind `{}`", kind.name())));
        }
    }
    Ok(())
}

fn need<'a, T>(v: &'a Option<T>, key: &str, kind: Kind) -> Result<&'a T> {
    v.as_ref()
        .ok_or_else(|| Error::Manifest(format!("kind `{}` requires `{key}`", kind.name())))
}

fn check_box(name: &str, r: [f64; 2]) -> Result<(f64, f64)> {
    if !(r[0].is_finite() && r[1].is_finite() && r[0] < r[1]) {
        return Err(Error::Manifest(format!("malformed box for `{name}`: [{}, {}]", r[0], r[1])));
    }
    Ok((r[0], r[1]))
}

fn chart_from(coords: &[RawCoord], rows: &[Vec<String>], params: &ParamBinding) -> Result<(ChartMetric, Vec<(f64, f64)>)> {
    if coords.is_empty() {
        return Err(Error::Manifest("a chart needs at least one [[coords]] entry".into()));
    }
    let names: Vec<&str> = coords.iter().map(|c| c.name.as_str()).collect();
    let boxes = coords.iter().map(|c| check_box(&c.name, c.range)).collect::<Result<Vec<_>>>()?;
    let rows: Vec<Vec<&str>> = rows.iter().map(|r| r.iter().map(|s| s.as_str()).collect()).collect();
    let slices: Vec<&[&str]> = rows.iter().map(|r| r.as_slice()).collect();
    let m = ChartMetric::parse(&names, &slices, params.clone()).map_err(|e| Error::Manifest(format!("metric: {e}")))?;
    Ok((m, boxes))
}

/// Built-in factor metrics. Default coordinates are `x1..xN` on the base and
/// `u1..uN` on the fiber.
fn preset(name: &str, prefix: &str, coords: &[RawCoord], params: &ParamBinding) -> Result<(ChartMetric, Vec<(f64, f64)>)> {
    let (family, n) = name
        .rsplit_once('-')
        .and_then(|(f, n)| n.parse::<usize>().ok().map(|n| (f, n)))
        .filter(|(_, n)| *n >= 1)
        .ok_or_else(|| Error::Manifest(format!("unknown preset `{name}`; expected flat-N, sphere-N or hyperbolic-N")))?;
    let default_names: Vec<String> = (1..=n).map(|i| format!("{prefix}{i}")).collect();
    let names: Vec<String> = if coords.is_empty() {
        default_names
    } else if coords.len() == n {
        coords.iter().map(|c| c.name.clone()).collect()
    } else {
        return Err(Error::Manifest(format!("preset `{name}` has {n} coordinates, {} given", coords.len())));
    };
    let sym = |i: usize| Expr::sym(&names[i]);
    let (diag, default_boxes): (Vec<Expr>, Vec<(f64, f64)>) = match family {
        "flat" => (vec![Expr::one(); n], vec![(-1.0, 1.0); n]),
        "sphere" => {
            // dθ₁² + sin²θ₁ dθ₂² + sin²θ₁ sin²θ₂ dθ₃² + ...
            let mut diag = vec![Expr::one()];
            let mut acc = Expr::one();
            for i in 1..n {
                acc = (acc * sym(i - 1).sin().powi(2)).simplify();
                diag.push(acc.clone());
            }
            let mut boxes = vec![(0.3, 2.8); n];
            if n > 1 {
                boxes[n - 1] = (-3.0, 3.0);
            }
            (diag, boxes)
        }
        "hyperbolic" => {
            // upper half space, last coordinate positive
            let w = Expr::one() / sym(n - 1).powi(2);
            let mut boxes = vec![(-1.0, 1.0); n];
            boxes[n - 1] = (0.5, 2.0);
            (vec![w; n], boxes)
        }
        _ => return Err(Error::Manifest(format!("unknown preset family `{family}`"))),
    };
    let boxes = if coords.is_empty() {
        default_boxes
    } else {
        coords.iter().map(|c| check_box(&c.name, c.range)).collect::<Result<Vec<_>>>()?
    };
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let m = ChartMetric::diagonal(&refs, diag, params.clone()).map_err(|e| Error::Manifest(e.to_string()))?;
    Ok((m, boxes))
}

fn factor(raw: &RawFactor, prefix: &str, params: &ParamBinding) -> Result<(ChartMetric, Vec<(f64, f64)>)> {
    match raw {
        RawFactor::Preset(name) => preset(name, prefix, &[], params),
        RawFactor::Table(t) => match (&t.preset, &t.metric) {
            (Some(p), None) => preset(p, prefix, &t.coords, params),
            (None, Some(rows)) => chart_from(&t.coords, rows, params),
            _ => Err(Error::Manifest("a factor table needs exactly one of `preset` or `metric`".into())),
        },
    }
}

fn warping(src: &str, m: &ChartMetric, key: &str) -> Result<Expr> {
    parse_expr(src, &m.scope()).map_err(|e| Error::Manifest(format!("{key} `{src}`: {e}")))
}

fn interval(raw: &Raw, kind: Kind) -> Result<(f64, f64)> {
    check_box(TIME, *need(&raw.interval, "interval", kind)?)
}

fn build_model(raw: &Raw, kind: Kind, params: &ParamBinding) -> Result<(Model, Vec<(f64, f64)>)> {
    let wrap = |e: Error| match e {
        Error::Manifest(_) => e,
        other => Error::Manifest(other.to_string()),
    };
    match kind {
        Kind::Chart => {
            let (m, boxes) = chart_from(&raw.coords, need(&raw.metric, "metric", kind)?, params)?;
            Ok((Model::Chart(m), boxes))
        }
        Kind::DoublyWarped | Kind::Warped => {
            let (base, bb) = factor(need(&raw.base, "base", kind)?, "x", params)?;
            let (fiber, fb) = factor(need(&raw.fiber, "fiber", kind)?, "u", params)?;
            let boxes = bb.into_iter().chain(fb).collect();
            if kind == Kind::DoublyWarped {
                let f1 = warping(need(&raw.f1, "f1", kind)?, &base, "f1")?;
                let f2 = warping(need(&raw.f2, "f2", kind)?, &fiber, "f2")?;
                Ok((Model::DoublyWarped(DoublyWarpedSpec::new(base, fiber, f1, f2).map_err(wrap)?), boxes))
            } else {
                let b = warping(need(&raw.b, "b", kind)?, &base, "b")?;
                Ok((Model::Warped(WarpedSpec::new(base, fiber, b).map_err(wrap)?), boxes))
            }
        }
        Kind::Grw | Kind::Sss => {
            let (fiber, fb) = factor(need(&raw.fiber, "fiber", kind)?, "u", params)?;
            if fiber.coords().iter().any(|c| c == TIME) {
                return Err(Error::Manifest(format!("fiber coordinate `{TIME}` collides with the time coordinate")));
            }
            let boxes = std::iter::once(interval(raw, kind)?).chain(fb).collect();
            let time = ChartMetric::flat(&[TIME], false);
            if kind == Kind::Grw {
                let b = warping(need(&raw.b, "b", kind)?, &time.with_params(params)?, "b")?;
                Ok((Model::Grw(grw_spec(b, fiber).map_err(wrap)?), boxes))
            } else {
                let f = warping(need(&raw.f, "f", kind)?, &fiber, "f")?;
                Ok((Model::Sss(sss_spec(f, fiber).map_err(wrap)?), boxes))
            }
        }
        Kind::Walker => {
            let src = need(&raw.metric_function, "metric-function", kind)?;
            let w = WalkerSpec::parse(src, params.clone()).map_err(|e| Error::Manifest(format!("metric-function `{src}`: {e}")))?;
            Ok((Model::Walker(w), walker_boxes(&raw.coords)?))
        }
        Kind::WalkerFamilies => {
            let case = match need(&raw.case, "case", kind)?.as_str() {
                "I" | "1" => Case::I,
                "II" | "2" => Case::II,
                other => return Err(Error::Manifest(format!("case must be \"I\" or \"II\", got \"{other}\""))),
            };
            let lattice = raw.lattice.clone().unwrap_or_else(|| default_lattice(case));
            if lattice.is_empty() || lattice.iter().any(|v| !v.is_finite()) {
                return Err(Error::Manifest("lattice must be a nonempty list of finite numbers".into()));
            }
            if case == Case::II && lattice.iter().all(|v| *v == 0.0) {
                return Err(Error::Manifest("case II needs a nonzero lattice value for m".into()));
            }
            let rho_values = raw.rho_values.clone().unwrap_or_else(|| vec![0.0, 0.5, 1.0 / 3.0, 0.25]);
            if rho_values.is_empty() {
                return Err(Error::Manifest("rho-values must be nonempty".into()));
            }
            Ok((
                Model::FamilySweep {
                    case,
                    rows: raw.sweep.unwrap_or(200),
                    lattice,
                    rho_values,
                },
                walker_boxes(&raw.coords)?,
            ))
        }
        Kind::WalkerEcs => {
            let a_list = raw
                .a_list
                .clone()
                .unwrap_or_else(|| vec!["y".into(), "y^2".into(), "sin(y)".into()]);
            let families = a_list
                .iter()
                .map(|a| EcsFamily::parse(a).map_err(|e| Error::Manifest(format!("a-list entry `{a}`: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            let lambdas = raw.lambdas.clone().unwrap_or_else(|| vec![1.0, -1.0, 0.1, -0.1]);
            if lambdas.iter().any(|l| *l == 0.0 || !l.is_finite()) {
                return Err(Error::Manifest("lambdas must be finite and nonzero".into()));
            }
            Ok((
                Model::Ecs {
                    families,
                    lambdas,
                    restarts: raw.restarts.unwrap_or(200),
                    degree: raw.degree.unwrap_or(4),
                    floor_threshold: raw.floor_threshold.unwrap_or(1e-3),
                },
                walker_boxes(&[])?,
            ))
        }
    }
}

/// Case I keeps `{-1, 0, 1}`; case II gets `±2` as well, so that
/// `2n + lm = 0` has solutions with `n ≠ 0`.
pub fn default_lattice(case: Case) -> Vec<f64> {
    match case {
        Case::I => vec![-1.0, 0.0, 1.0],
        Case::II => vec![-2.0, -1.0, 0.0, 1.0, 2.0],
    }
}

fn walker_boxes(coords: &[RawCoord]) -> Result<Vec<(f64, f64)>> {
    if coords.is_empty() {
        return Ok(vec![(-1.0, 1.0); 3]);
    }
    let names: Vec<&str> = coords.iter().map(|c| c.name.as_str()).collect();
    if names != crate::walker::COORDS {
        return Err(Error::Manifest(format!("Walker coords must be t, x, y in that order, got {names:?}")));
    }
    coords.iter().map(|c| check_box(&c.name, c.range)).collect()
}
