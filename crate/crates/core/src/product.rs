//! Doubly warped, singly warped, GRW and standard static products, with
//! closed-form curvature assembled from factor quantities alone.
//!
//! Coordinates of an assembled product are the base coordinates followed by
//! the fiber coordinates. `k = ln f₁` lives on the base, `l = ln f₂` on the
//! fiber.

use crate::chart::{tri, ChartMetric};
use crate::error::{Error, Result};
use crate::expr::{Expr, ParamBinding};
use crate::geometry::{FieldJet, Geometry, ScalarField};
use crate::tensor::{TensorValue, Variance};

/// Name of the time coordinate used by the GRW and standard static builders.
pub const TIME: &str = "t";

fn merge_params(a: &ParamBinding, b: &ParamBinding) -> Result<ParamBinding> {
    let mut out = a.clone();
    for (k, v) in b {
        match out.get(k) {
            Some(w) if w != v => {
                return Err(Error::InvalidInput(format!(
                    "parameter `{k}` bound to {w} and {v} by the two factors"
                )))
            }
            _ => {
                out.insert(k.clone(), *v);
            }
        }
    }
    Ok(out)
}

fn check_support(what: &str, e: &Expr, coords: &[String], params: &ParamBinding) -> Result<()> {
    for s in e.symbols() {
        if !coords.contains(&s) && !params.contains_key(&s) {
            return Err(Error::InvalidInput(format!(
                "{what} `{e}` mentions `{s}`, which is not a coordinate of its factor"
            )));
        }
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct DoublyWarpedSpec {
    pub base: ChartMetric,
    pub fiber: ChartMetric,
    /// Positive function on the base; warps the fiber.
    pub f1: Expr,
    /// Positive function on the fiber; warps the base.
    pub f2: Expr,
}

impl DoublyWarpedSpec {
    pub fn new(base: ChartMetric, fiber: ChartMetric, f1: Expr, f2: Expr) -> Result<DoublyWarpedSpec> {
        for c in base.coords() {
            if fiber.coords().contains(c) {
                return Err(Error::NameCollision(c.clone()));
            }
        }
        let params = merge_params(base.params(), fiber.params())?;
        for c in base.coords().iter().chain(fiber.coords()) {
            if params.contains_key(c) {
                return Err(Error::InvalidInput(format!("`{c}` is both a coordinate and a parameter")));
            }
        }
        check_support("f1", &f1, base.coords(), &params)?;
        check_support("f2", &f2, fiber.coords(), &params)?;
        let base = if base.params() == &params { base } else { base.with_params(&params)? };
        let fiber = if fiber.params() == &params { fiber } else { fiber.with_params(&params)? };
        Ok(DoublyWarpedSpec { base, fiber, f1, f2 })
    }

    pub fn m1(&self) -> usize {
        self.base.dim()
    }

    pub fn m2(&self) -> usize {
        self.fiber.dim()
    }

    pub fn dim(&self) -> usize {
        self.m1() + self.m2()
    }

    pub fn params(&self) -> &ParamBinding {
        self.base.params()
    }

    pub fn coords(&self) -> Vec<String> {
        self.base.coords().iter().chain(self.fiber.coords()).cloned().collect()
    }

    pub fn k(&self) -> Expr {
        self.f1.ln()
    }

    pub fn l(&self) -> Expr {
        self.f2.ln()
    }

    pub fn split<'a>(&self, p: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        p.split_at(self.m1())
    }

    /// Checks `f₁ > 0` and `f₂ > 0` at `p`.
    pub fn validate_at(&self, p: &[f64]) -> Result<()> {
        let (x, u) = self.split(p);
        let eval = |e: &Expr, coords: &[String], at: &[f64]| {
            let pts: Vec<(&str, f64)> = coords.iter().map(|s| s.as_str()).zip(at.iter().copied()).collect();
            e.eval(&pts, self.params())
        };
        for (name, e, coords, at) in [
            ("f1", &self.f1, self.base.coords(), x),
            ("f2", &self.f2, self.fiber.coords(), u),
        ] {
            let v = eval(e, coords, at)?;
            if !(v > 0.0) {
                return Err(Error::NonPositiveWarping {
                    name: name.into(),
                    value: v,
                    point: p.to_vec(),
                });
            }
        }
        Ok(())
    }
}

/// `f₂² g₁ ⊕ f₁² g₂`.
pub fn assemble_doubly_warped(spec: &DoublyWarpedSpec) -> Result<ChartMetric> {
    let (m1, n) = (spec.m1(), spec.dim());
    let f1sq = spec.f1.powi(2);
    let f2sq = spec.f2.powi(2);
    let mut packed = vec![Expr::zero(); n * (n + 1) / 2];
    for i in 0..n {
        for j in 0..=i {
            packed[tri(i, j)] = if i < m1 {
                &f2sq * spec.base.component(i, j)
            } else if j >= m1 {
                &f1sq * spec.fiber.component(i - m1, j - m1)
            } else {
                Expr::zero()
            };
        }
    }
    ChartMetric::from_packed(spec.coords(), packed, spec.params().clone())
}

/// Factor quantities at one point of a doubly warped product.
#[derive(Clone, Debug)]
pub struct FactorPoint {
    pub base: Geometry,
    pub fiber: Geometry,
    pub f1: FieldJet,
    pub f2: FieldJet,
    pub dk: Vec<f64>,
    pub dl: Vec<f64>,
    pub hess1_f1: TensorValue,
    pub hess2_f2: TensorValue,
    pub lap1_f1: f64,
    pub lap2_f2: f64,
    /// `g₁(∇k, ∇k)` and `g₂(∇l, ∇l)`.
    pub dk_sq1: f64,
    pub dl_sq2: f64,
    /// Laplacians of `k` and `l` on the assembled metric.
    pub lap_k: f64,
    pub lap_l: f64,
}

impl FactorPoint {
    pub fn hess1_k(&self) -> Vec<f64> {
        log_hessian(&self.hess1_f1.data, &self.f1.value, &self.dk)
    }

    pub fn hess2_l(&self) -> Vec<f64> {
        log_hessian(&self.hess2_f2.data, &self.f2.value, &self.dl)
    }
}

/// `Hess(ln f) = Hess f / f − d ln f ⊗ d ln f`.
fn log_hessian(hess_f: &[f64], f: &f64, dlog: &[f64]) -> Vec<f64> {
    let n = dlog.len();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = hess_f[i * n + j] / f - dlog[i] * dlog[j];
        }
    }
    out
}

/// Compiled closed-form evaluator for one doubly warped spec.
#[derive(Clone, Debug)]
pub struct DwpEvaluator {
    spec: DoublyWarpedSpec,
    metric: ChartMetric,
    f1: ScalarField,
    f2: ScalarField,
}

impl DwpEvaluator {
    pub fn new(spec: &DoublyWarpedSpec) -> Result<DwpEvaluator> {
        Ok(DwpEvaluator {
            metric: assemble_doubly_warped(spec)?,
            f1: ScalarField::new(&spec.base, &spec.f1)?,
            f2: ScalarField::new(&spec.fiber, &spec.f2)?,
            spec: spec.clone(),
        })
    }

    pub fn spec(&self) -> &DoublyWarpedSpec {
        &self.spec
    }

    pub fn metric(&self) -> &ChartMetric {
        &self.metric
    }

    pub fn at(&self, p: &[f64]) -> Result<FactorPoint> {
        if p.len() != self.spec.dim() {
            return Err(Error::Dimension(format!(
                "point has {} coordinates, product has {}",
                p.len(),
                self.spec.dim()
            )));
        }
        self.spec.validate_at(p)?;
        let (x, u) = self.spec.split(p);
        let (m1, m2) = (self.spec.m1() as f64, self.spec.m2() as f64);
        let base = Geometry::at(&self.spec.base, x, false)?;
        let fiber = Geometry::at(&self.spec.fiber, u, false)?;
        let f1 = self.f1.jet(x)?;
        let f2 = self.f2.jet(u)?;
        let dk: Vec<f64> = f1.gradient.iter().map(|d| d / f1.value).collect();
        let dl: Vec<f64> = f2.gradient.iter().map(|d| d / f2.value).collect();
        let hess1_f1 = base.hessian(&f1);
        let hess2_f2 = fiber.hessian(&f2);
        let lap1_f1 = base.trace(&hess1_f1);
        let lap2_f2 = fiber.trace(&hess2_f2);
        let dk_sq1 = base.inner(&dk, &dk);
        let dl_sq2 = fiber.inner(&dl, &dl);
        let lap1_k = lap1_f1 / f1.value - dk_sq1;
        let lap2_l = lap2_f2 / f2.value - dl_sq2;
        let (a, b) = (f1.value, f2.value);
        let lap_k = (m2 * dk_sq1 + lap1_k) / (b * b);
        let lap_l = (m1 * dl_sq2 + lap2_l) / (a * a);
        Ok(FactorPoint {
            base,
            fiber,
            f1,
            f2,
            dk,
            dl,
            hess1_f1,
            hess2_f2,
            lap1_f1,
            lap2_f2,
            dk_sq1,
            dl_sq2,
            lap_k,
            lap_l,
        })
    }

    fn point(&self, fp: &FactorPoint) -> Vec<f64> {
        fp.base.point.iter().chain(&fp.fiber.point).copied().collect()
    }

    /// Levi-Civita connection of the product from the factor connections.
    pub fn christoffel(&self, fp: &FactorPoint) -> TensorValue {
        let (m1, m2, n) = (self.spec.m1(), self.spec.m2(), self.spec.dim());
        let (a, b) = (fp.f1.value, fp.f2.value);
        let mut t = TensorValue::zeros(&self.point(fp), n, &[Variance::Up, Variance::Down, Variance::Down]);
        let g1 = |i: usize, j: usize| fp.base.g[i * m1 + j];
        let g2 = |u: usize, v: usize| fp.fiber.g[u * m2 + v];
        // ∇l and ∇k raised with the factor metrics
        let up_l: Vec<f64> = (0..m2)
            .map(|u| (0..m2).map(|v| fp.fiber.ginv[u * m2 + v] * fp.dl[v]).sum())
            .collect();
        let up_k: Vec<f64> = (0..m1)
            .map(|h| (0..m1).map(|j| fp.base.ginv[h * m1 + j] * fp.dk[j]).sum())
            .collect();
        for h in 0..m1 {
            for i in 0..m1 {
                for j in 0..m1 {
                    t.set(&[h, i, j], fp.base.gamma[(h * m1 + i) * m1 + j]);
                }
            }
        }
        for w in 0..m2 {
            for u in 0..m2 {
                for v in 0..m2 {
                    t.set(&[m1 + w, m1 + u, m1 + v], fp.fiber.gamma[(w * m2 + u) * m2 + v]);
                }
            }
        }
        for u in 0..m2 {
            for i in 0..m1 {
                for j in 0..m1 {
                    t.set(&[m1 + u, i, j], -b * b * g1(i, j) * up_l[u] / (a * a));
                }
            }
        }
        for h in 0..m1 {
            for u in 0..m2 {
                for v in 0..m2 {
                    t.set(&[h, m1 + u, m1 + v], -a * a * g2(u, v) * up_k[h] / (b * b));
                }
            }
        }
        for i in 0..m1 {
            for u in 0..m2 {
                t.set(&[i, i, m1 + u], fp.dl[u]);
                t.set(&[i, m1 + u, i], fp.dl[u]);
                t.set(&[m1 + u, i, m1 + u], fp.dk[i]);
                t.set(&[m1 + u, m1 + u, i], fp.dk[i]);
            }
        }
        t
    }

    /// Ricci tensor from the factor Ricci tensors and warping Hessians.
    pub fn ricci(&self, fp: &FactorPoint) -> TensorValue {
        let (m1, m2, n) = (self.spec.m1(), self.spec.m2(), self.spec.dim());
        let (a, b) = (fp.f1.value, fp.f2.value);
        let mut t = TensorValue::zeros(&self.point(fp), n, &[Variance::Down, Variance::Down]);
        for i in 0..m1 {
            for j in 0..m1 {
                let v = fp.base.ricci[i * m1 + j]
                    - m2 as f64 / a * fp.hess1_f1.data[i * m1 + j]
                    - fp.lap_l * b * b * fp.base.g[i * m1 + j];
                t.set(&[i, j], v);
            }
        }
        for u in 0..m2 {
            for v in 0..m2 {
                let val = fp.fiber.ricci[u * m2 + v]
                    - m1 as f64 / b * fp.hess2_f2.data[u * m2 + v]
                    - fp.lap_k * a * a * fp.fiber.g[u * m2 + v];
                t.set(&[m1 + u, m1 + v], val);
            }
        }
        let c = (m1 + m2) as f64 - 2.0;
        for i in 0..m1 {
            for u in 0..m2 {
                let v = c * fp.dk[i] * fp.dl[u];
                t.set(&[i, m1 + u], v);
                t.set(&[m1 + u, i], v);
            }
        }
        t
    }

    /// Hessian of `φ` given its jet in the product coordinates.
    ///
    /// The mixed block is `∂_i∂_u φ − ∂_i k ∂_u φ − ∂_i φ ∂_u l`.
    pub fn hessian(&self, fp: &FactorPoint, phi: &FieldJet) -> TensorValue {
        let (m1, m2, n) = (self.spec.m1(), self.spec.m2(), self.spec.dim());
        let (a, b) = (fp.f1.value, fp.f2.value);
        let d = &phi.gradient;
        let dd = |i: usize, j: usize| phi.hessian[i * n + j];
        let l_phi = fp.fiber.inner(&fp.dl, &d[m1..]) / (a * a);
        let k_phi = fp.base.inner(&fp.dk, &d[..m1]) / (b * b);
        let mut t = TensorValue::zeros(&self.point(fp), n, &[Variance::Down, Variance::Down]);
        for i in 0..m1 {
            for j in 0..m1 {
                let gam: f64 = (0..m1).map(|h| fp.base.gamma[(h * m1 + i) * m1 + j] * d[h]).sum();
                t.set(&[i, j], dd(i, j) - gam + l_phi * b * b * fp.base.g[i * m1 + j]);
            }
        }
        for u in 0..m2 {
            for v in 0..m2 {
                let gam: f64 = (0..m2).map(|w| fp.fiber.gamma[(w * m2 + u) * m2 + v] * d[m1 + w]).sum();
                t.set(&[m1 + u, m1 + v], dd(m1 + u, m1 + v) - gam + k_phi * a * a * fp.fiber.g[u * m2 + v]);
            }
        }
        for i in 0..m1 {
            for u in 0..m2 {
                let v = dd(i, m1 + u) - fp.dk[i] * d[m1 + u] - d[i] * fp.dl[u];
                t.set(&[i, m1 + u], v);
                t.set(&[m1 + u, i], v);
            }
        }
        t
    }

    /// The mixed Hessian block as printed, `−X(k)U(φ) − X(φ)U(l)`, without
    /// the second partial `∂_i∂_u φ`. Kept for comparison only.
    pub fn hessian_mixed_as_printed(&self, fp: &FactorPoint, phi: &FieldJet) -> Vec<f64> {
        let (m1, m2) = (self.spec.m1(), self.spec.m2());
        let d = &phi.gradient;
        let mut out = Vec::with_capacity(m1 * m2);
        for i in 0..m1 {
            for u in 0..m2 {
                out.push(-fp.dk[i] * d[m1 + u] - d[i] * fp.dl[u]);
            }
        }
        out
    }

    pub fn scalar(&self, fp: &FactorPoint) -> f64 {
        let (m1, m2) = (self.spec.m1() as f64, self.spec.m2() as f64);
        let (a, b) = (fp.f1.value, fp.f2.value);
        fp.base.scalar / (b * b) + fp.fiber.scalar / (a * a)
            - m2 / (a * b * b) * fp.lap1_f1
            - m1 / (b * a * a) * fp.lap2_f2
            - m1 * fp.lap_l
            - m2 * fp.lap_k
    }

    /// Closed blocks of `Hess k` and `Hess l`:
    /// `(Hess₁k, g(∇k,∇k) g on the fiber)` and `(g(∇l,∇l) g on the base, Hess₂l)`.
    pub fn log_warping_hessians(&self, fp: &FactorPoint) -> (TensorValue, TensorValue) {
        let (m1, m2, n) = (self.spec.m1(), self.spec.m2(), self.spec.dim());
        let (a, b) = (fp.f1.value, fp.f2.value);
        let p = self.point(fp);
        let mut hk = TensorValue::zeros(&p, n, &[Variance::Down, Variance::Down]);
        let mut hl = hk.clone();
        let h1k = fp.hess1_k();
        let h2l = fp.hess2_l();
        let grad_k_sq = fp.dk_sq1 / (b * b);
        let grad_l_sq = fp.dl_sq2 / (a * a);
        for i in 0..m1 {
            for j in 0..m1 {
                hk.set(&[i, j], h1k[i * m1 + j]);
                hl.set(&[i, j], grad_l_sq * b * b * fp.base.g[i * m1 + j]);
            }
        }
        for u in 0..m2 {
            for v in 0..m2 {
                hk.set(&[m1 + u, m1 + v], grad_k_sq * a * a * fp.fiber.g[u * m2 + v]);
                hl.set(&[m1 + u, m1 + v], h2l[u * m2 + v]);
            }
        }
        (hk, hl)
    }
}

/// Largest relative difference over the base-base and fiber-fiber blocks.
pub(crate) fn diagonal_block_defect(a: &TensorValue, b: &TensorValue, m1: usize) -> f64 {
    let n = a.dim;
    let scale = 1.0 + b.max_abs();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if (i < m1) == (j < m1) {
                worst = worst.max((a.get(&[i, j]) - b.get(&[i, j])).abs() / scale);
            }
        }
    }
    worst
}

pub fn dwp_christoffel_closed(spec: &DoublyWarpedSpec, p: &[f64]) -> Result<TensorValue> {
    let ev = DwpEvaluator::new(spec)?;
    Ok(ev.christoffel(&ev.at(p)?))
}

pub fn dwp_ricci_closed(spec: &DoublyWarpedSpec, p: &[f64]) -> Result<TensorValue> {
    let ev = DwpEvaluator::new(spec)?;
    Ok(ev.ricci(&ev.at(p)?))
}

pub fn dwp_hessian_closed(spec: &DoublyWarpedSpec, phi: &Expr, p: &[f64]) -> Result<TensorValue> {
    let ev = DwpEvaluator::new(spec)?;
    let jet = ScalarField::new(ev.metric(), phi)?.jet(p)?;
    Ok(ev.hessian(&ev.at(p)?, &jet))
}

pub fn dwp_scalar_closed(spec: &DoublyWarpedSpec, p: &[f64]) -> Result<f64> {
    let ev = DwpEvaluator::new(spec)?;
    Ok(ev.scalar(&ev.at(p)?))
}

/// Largest relative defect between the closed `Hess k`, `Hess l` blocks and
/// the generic Hessians on the assembled metric.
pub fn log_hessian_defect(spec: &DoublyWarpedSpec, p: &[f64]) -> Result<f64> {
    let ev = DwpEvaluator::new(spec)?;
    let fp = ev.at(p)?;
    let (hk, hl) = ev.log_warping_hessians(&fp);
    let geo = Geometry::at(ev.metric(), p, false)?;
    let gk = geo.hessian(&ScalarField::new(ev.metric(), &spec.k())?.jet(p)?);
    let gl = geo.hessian(&ScalarField::new(ev.metric(), &spec.l())?.jet(p)?);
    Ok(diagonal_block_defect(&hk, &gk, spec.m1()).max(diagonal_block_defect(&hl, &gl, spec.m1())))
}

#[derive(Clone, Debug)]
pub struct WarpedSpec {
    pub base: ChartMetric,
    pub fiber: ChartMetric,
    pub b: Expr,
}

impl WarpedSpec {
    pub fn new(base: ChartMetric, fiber: ChartMetric, b: Expr) -> Result<WarpedSpec> {
        let dw = DoublyWarpedSpec::new(base, fiber, b, Expr::one())?;
        Ok(WarpedSpec {
            base: dw.base,
            fiber: dw.fiber,
            b: dw.f1,
        })
    }

    pub fn r(&self) -> usize {
        self.base.dim()
    }

    pub fn s(&self) -> usize {
        self.fiber.dim()
    }

    pub fn to_doubly_warped(&self) -> DoublyWarpedSpec {
        DoublyWarpedSpec {
            base: self.base.clone(),
            fiber: self.fiber.clone(),
            f1: self.b.clone(),
            f2: Expr::one(),
        }
    }
}

/// `g_B ⊕ b² g_F`.
pub fn assemble_warped(spec: &WarpedSpec) -> Result<ChartMetric> {
    assemble_doubly_warped(&spec.to_doubly_warped())
}

/// Base and fiber quantities at one point of a singly warped product.
#[derive(Clone, Debug)]
pub struct WarpedPoint {
    pub base: Geometry,
    pub fiber: Geometry,
    pub b: FieldJet,
    pub hess_b: TensorValue,
    pub lap_b: f64,
    /// `g_B(∇b, ∇b)`.
    pub grad_b_sq: f64,
}

#[derive(Clone, Debug)]
pub struct WarpedEvaluator {
    spec: WarpedSpec,
    b: ScalarField,
}

impl WarpedEvaluator {
    pub fn new(spec: &WarpedSpec) -> Result<WarpedEvaluator> {
        Ok(WarpedEvaluator {
            b: ScalarField::new(&spec.base, &spec.b)?,
            spec: spec.clone(),
        })
    }

    pub fn spec(&self) -> &WarpedSpec {
        &self.spec
    }

    pub fn at(&self, p: &[f64]) -> Result<WarpedPoint> {
        let (x, u) = p.split_at(self.spec.r());
        let base = Geometry::at(&self.spec.base, x, false)?;
        let fiber = Geometry::at(&self.spec.fiber, u, false)?;
        let b = self.b.jet(x)?;
        if !(b.value > 0.0) {
            return Err(Error::NonPositiveWarping {
                name: "b".into(),
                value: b.value,
                point: p.to_vec(),
            });
        }
        let hess_b = base.hessian(&b);
        let lap_b = base.trace(&hess_b);
        let grad_b_sq = base.inner(&b.gradient, &b.gradient);
        Ok(WarpedPoint {
            base,
            fiber,
            b,
            hess_b,
            lap_b,
            grad_b_sq,
        })
    }

    pub fn scalar(&self, wp: &WarpedPoint) -> f64 {
        let s = self.spec.s() as f64;
        let b = wp.b.value;
        wp.base.scalar + wp.fiber.scalar / (b * b) - 2.0 * s * wp.lap_b / b - s * (s - 1.0) * wp.grad_b_sq / (b * b)
    }

    /// `b♯ = b Δ_B b + (s − 1) g_B(∇b, ∇b)`.
    pub fn b_sharp(&self, wp: &WarpedPoint) -> f64 {
        wp.b.value * wp.lap_b + (self.spec.s() as f64 - 1.0) * wp.grad_b_sq
    }
}

pub fn wp_scalar_closed(spec: &WarpedSpec, p: &[f64]) -> Result<f64> {
    let ev = WarpedEvaluator::new(spec)?;
    Ok(ev.scalar(&ev.at(p)?))
}

pub fn b_sharp(spec: &WarpedSpec, p: &[f64]) -> Result<f64> {
    let ev = WarpedEvaluator::new(spec)?;
    Ok(ev.b_sharp(&ev.at(p)?))
}

fn time_line(params: &ParamBinding) -> Result<ChartMetric> {
    ChartMetric::diagonal(&[TIME], vec![Expr::constant(-1.0)], params.clone())
}

/// `I ×_b F` with `g = −dt² ⊕ b(t)² g_F`.
pub fn grw_spec(b: Expr, fiber: ChartMetric) -> Result<WarpedSpec> {
    WarpedSpec::new(time_line(fiber.params())?, fiber, b)
}

pub fn assemble_grw(b: Expr, fiber: ChartMetric) -> Result<ChartMetric> {
    assemble_warped(&grw_spec(b, fiber)?)
}

/// `_f I × F` with `g = −f² dt² ⊕ g_F`: a doubly warped product with
/// base `(I, −dt²)`, `f₁ = 1` and `f₂ = f`.
pub fn sss_spec(f: Expr, fiber: ChartMetric) -> Result<DoublyWarpedSpec> {
    DoublyWarpedSpec::new(time_line(fiber.params())?, fiber, Expr::one(), f)
}

pub fn assemble_sss(f: Expr, fiber: ChartMetric) -> Result<ChartMetric> {
    assemble_doubly_warped(&sss_spec(f, fiber)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use crate::geometry;

    fn line(name: &str) -> ChartMetric {
        ChartMetric::flat(&[name], false)
    }

    fn example() -> DoublyWarpedSpec {
        let base = ChartMetric::parse(&["t", "s"], &[&["1"], &["0", "1 + t^2"]], ParamBinding::new()).unwrap();
        let fiber = ChartMetric::parse(&["x", "y"], &[&["exp(y)"], &["0", "1"]], ParamBinding::new()).unwrap();
        let f1 = parse_expr("t + s^2", &base.scope()).unwrap();
        let f2 = parse_expr("1 + x^2 + y", &fiber.scope()).unwrap();
        DoublyWarpedSpec::new(base, fiber, f1, f2).unwrap()
    }

    #[test]
    fn block_metric_by_substitution() {
        let spec = DoublyWarpedSpec::new(line("t"), line("x"), Expr::sym("t"), parse_expr("1+x^2", &line("x").scope()).unwrap())
            .unwrap();
        let m = assemble_doubly_warped(&spec).unwrap();
        let g = geometry::metric_at(&m, &[2.0, 0.5]).unwrap();
        assert_eq!(g.get(&[0, 0]), 1.25f64.powi(2));
        assert_eq!(g.get(&[1, 1]), 4.0);
        assert_eq!(g.get(&[0, 1]), 0.0);
    }

    #[test]
    fn name_collision_and_support() {
        assert!(matches!(
            DoublyWarpedSpec::new(line("t"), line("t"), Expr::one(), Expr::one()),
            Err(Error::NameCollision(_))
        ));
        assert!(DoublyWarpedSpec::new(line("t"), line("x"), Expr::sym("x"), Expr::one()).is_err());
    }

    #[test]
    fn nonpositive_warping_is_reported() {
        let spec = DoublyWarpedSpec::new(line("t"), line("x"), Expr::sym("t"), Expr::one()).unwrap();
        assert!(matches!(spec.validate_at(&[-1.0, 0.0]), Err(Error::NonPositiveWarping { .. })));
        assert!(spec.validate_at(&[1.0, 0.0]).is_ok());
    }

    #[test]
    fn closed_forms_match_generic_engine() {
        let spec = example();
        let ev = DwpEvaluator::new(&spec).unwrap();
        let phi = parse_expr("t*x + s*y^2 + sin(t*y)", &ev.metric().scope()).unwrap();
        let field = ScalarField::new(ev.metric(), &phi).unwrap();
        for p in [[0.7, 0.3, 0.2, -0.4], [1.3, -0.5, -0.6, 0.9]] {
            let fp = ev.at(&p).unwrap();
            let geo = Geometry::at(ev.metric(), &p, false).unwrap();
            assert!(ev.christoffel(&fp).relative_diff(&geo.christoffel_tensor()) < 1e-12);
            assert!(ev.ricci(&fp).relative_diff(&geo.ricci_tensor()) < 1e-10);
            assert!((ev.scalar(&fp) - geo.scalar).abs() < 1e-10);
            let jet = field.jet(&p).unwrap();
            assert!(ev.hessian(&fp, &jet).relative_diff(&geo.hessian(&jet)) < 1e-12);
        }
        assert!(log_hessian_defect(&spec, &[0.7, 0.3, 0.2, -0.4]).unwrap() < 1e-12);
    }

    #[test]
    fn b_sharp_values() {
        let spec = WarpedSpec::new(line("t"), ChartMetric::flat(&["x", "y"], false), Expr::sym("t")).unwrap();
        assert!((b_sharp(&spec, &[0.7, 0.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
        let spec = WarpedSpec::new(line("t"), ChartMetric::flat(&["x", "y", "z"], false), Expr::sym("t").exp()).unwrap();
        let v = b_sharp(&spec, &[0.4, 0.0, 0.0, 0.0]).unwrap();
        assert!((v - 3.0 * 0.8f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn minkowski_from_trivial_warpings() {
        let grw = assemble_grw(Expr::one(), ChartMetric::flat(&["x", "y", "z"], false)).unwrap();
        let sss = assemble_sss(Expr::one(), ChartMetric::flat(&["x", "y", "z"], false)).unwrap();
        for m in [grw, sss] {
            let g = geometry::metric_at(&m, &[0.1, 0.2, 0.3, 0.4]).unwrap();
            assert_eq!(g.data, ChartMetric::flat(&["t", "x", "y", "z"], true).matrix_at(&[0.0; 4]).unwrap().as_slice());
            assert_eq!(geometry::riemann(&m, &[0.1, 0.2, 0.3, 0.4]).unwrap().max_abs(), 0.0);
        }
    }
}
