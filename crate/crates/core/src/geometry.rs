//! Pointwise connection and curvature of an arbitrary chart metric.
//!
//! Conventions, pinned by the calibration tests:
//!
//! * `Γ^a_bc = ½ g^ad (∂_b g_cd + ∂_c g_bd − ∂_d g_bc)`
//! * `R^a_bcd = ∂_c Γ^a_db − ∂_d Γ^a_cb + Γ^a_ce Γ^e_db − Γ^a_de Γ^e_cb`
//! * `Ric_bd = R^a_bad`, `τ = g^bd Ric_bd` (the round sphere has `τ > 0`)
//! * `Hess(φ)_ij = ∂_i ∂_j φ − Γ^k_ij ∂_k φ`, `Δφ = g^ij Hess(φ)_ij`
//!
//! Everything here is a pure function of the metric jet at one point.

use nalgebra::DMatrix;

use crate::chart::{tri, ChartMetric, MetricJet};
use crate::error::{Error, Result};
use crate::expr::{Expr, Program};
use crate::tensor::{TensorValue, Variance::*};

/// Metrics with `|det g|` at or below this are rejected.
pub const DEGENERACY_THRESHOLD: f64 = 1e-10;

/// Third-order data: derivatives of curvature.
#[derive(Clone, Debug)]
pub struct CurvatureDerivatives {
    /// `∇_m R_abcd`, index `[m][a][b][c][d]`.
    pub nabla_riemann: Vec<f64>,
    /// `∇_m Ric_ab`, index `[m][a][b]`.
    pub nabla_ricci: Vec<f64>,
    /// `∂_m τ`.
    pub dscalar: Vec<f64>,
}

/// Connection and curvature at a single point.
#[derive(Clone, Debug)]
pub struct Geometry {
    pub n: usize,
    pub point: Vec<f64>,
    pub g: Vec<f64>,
    pub ginv: Vec<f64>,
    pub det: f64,
    /// `Γ^a_bc`, index `[a][b][c]`.
    pub gamma: Vec<f64>,
    /// `R^a_bcd`, index `[a][b][c][d]`.
    pub riemann: Vec<f64>,
    pub ricci: Vec<f64>,
    pub scalar: f64,
    pub derivatives: Option<CurvatureDerivatives>,
}

fn invert(n: usize, g: &[f64], point: &[f64]) -> Result<(Vec<f64>, f64)> {
    let m = DMatrix::from_row_slice(n, n, g);
    let lu = m.clone().lu();
    let det = lu.determinant();
    if !det.is_finite() || det.abs() <= DEGENERACY_THRESHOLD {
        return Err(Error::SingularMetric {
            point: point.to_vec(),
            det,
        });
    }
    let mut inv = lu.try_inverse().ok_or_else(|| Error::SingularMetric {
        point: point.to_vec(),
        det,
    })?;
    // one step of refinement: X ← X(2I − gX)
    let two_minus = DMatrix::identity(n, n) * 2.0 - &m * &inv;
    inv = &inv * two_minus;
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = 0.5 * (inv[(i, j)] + inv[(j, i)]);
        }
    }
    Ok((out, det))
}

impl Geometry {
    /// Computes curvature at `p`; with `derivatives` also the covariant
    /// derivatives of Riemann and Ricci (needs third metric partials).
    pub fn at(metric: &ChartMetric, p: &[f64], derivatives: bool) -> Result<Geometry> {
        let jet = metric.jet(p, derivatives)?;
        Geometry::from_jet(&jet, p)
    }

    pub fn from_jet(jet: &MetricJet, p: &[f64]) -> Result<Geometry> {
        let n = jet.n;
        let (ginv, det) = invert(n, &jet.g, p)?;
        let n2 = n * n;
        let n3 = n2 * n;
        let n4 = n3 * n;
        let g = &jet.g;
        let dg = |k: usize, i: usize, j: usize| jet.dg[(k * n + i) * n + j];
        let ddg = |a: usize, b: usize, i: usize, j: usize| jet.ddg[((a * n + b) * n + i) * n + j];
        let gi = |i: usize, j: usize| ginv[i * n + j];

        // ∂_k g^ij = −g^ia ∂_k g_ab g^bj
        let mut dginv = vec![0.0; n3];
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut s = 0.0;
                    for a in 0..n {
                        for b in 0..n {
                            s += gi(i, a) * dg(k, a, b) * gi(b, j);
                        }
                    }
                    dginv[(k * n + i) * n + j] = -s;
                }
            }
        }

        // Christoffel symbols of the first kind Γ_lij and their partials
        let mut gf = vec![0.0; n3];
        let mut dgf = vec![0.0; n4];
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    gf[(l * n + i) * n + j] = 0.5 * (dg(i, j, l) + dg(j, i, l) - dg(l, i, j));
                    for m in 0..n {
                        dgf[((m * n + l) * n + i) * n + j] =
                            0.5 * (ddg(m, i, j, l) + ddg(m, j, i, l) - ddg(m, l, i, j));
                    }
                }
            }
        }

        let mut gamma = vec![0.0; n3];
        let mut dgamma = vec![0.0; n4]; // [m][a][i][j]
        for a in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut s = 0.0;
                    for l in 0..n {
                        s += gi(a, l) * gf[(l * n + i) * n + j];
                    }
                    gamma[(a * n + i) * n + j] = s;
                    for m in 0..n {
                        let mut d = 0.0;
                        for l in 0..n {
                            d += dginv[(m * n + a) * n + l] * gf[(l * n + i) * n + j]
                                + gi(a, l) * dgf[((m * n + l) * n + i) * n + j];
                        }
                        dgamma[((m * n + a) * n + i) * n + j] = d;
                    }
                }
            }
        }
        let gam = |a: usize, b: usize, c: usize| gamma[(a * n + b) * n + c];
        let dgam = |m: usize, a: usize, b: usize, c: usize| dgamma[((m * n + a) * n + b) * n + c];

        let mut riemann = vec![0.0; n4];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let mut s = dgam(c, a, d, b) - dgam(d, a, c, b);
                        for e in 0..n {
                            s += gam(a, c, e) * gam(e, d, b) - gam(a, d, e) * gam(e, c, b);
                        }
                        riemann[((a * n + b) * n + c) * n + d] = s;
                    }
                }
            }
        }
        let riem = |a: usize, b: usize, c: usize, d: usize| riemann[((a * n + b) * n + c) * n + d];

        let mut ricci = vec![0.0; n2];
        for b in 0..n {
            for d in 0..n {
                ricci[b * n + d] = (0..n).map(|a| riem(a, b, a, d)).sum();
            }
        }
        let mut scalar = 0.0;
        for b in 0..n {
            for d in 0..n {
                scalar += gi(b, d) * ricci[b * n + d];
            }
        }

        let derivatives = match &jet.dddg {
            None => None,
            Some(dddg) => {
                let d3 = |m: usize, a: usize, b: usize, i: usize, j: usize| {
                    dddg[(((m * n + a) * n + b) * n + i) * n + j]
                };
                // ∂_m ∂_k g^ij
                let mut ddginv = vec![0.0; n4];
                for m in 0..n {
                    for k in 0..n {
                        for i in 0..n {
                            for j in 0..n {
                                let mut s = 0.0;
                                for a in 0..n {
                                    for b in 0..n {
                                        s += dginv[(m * n + i) * n + a] * dg(k, a, b) * gi(b, j)
                                            + gi(i, a) * ddg(m, k, a, b) * gi(b, j)
                                            + gi(i, a) * dg(k, a, b) * dginv[(m * n + b) * n + j];
                                    }
                                }
                                ddginv[((m * n + k) * n + i) * n + j] = -s;
                            }
                        }
                    }
                }
                // ∂_m ∂_k Γ^a_ij, index [m][k][a][i][j]
                let n5 = n4 * n;
                let mut ddgamma = vec![0.0; n5];
                for m in 0..n {
                    for k in 0..n {
                        for a in 0..n {
                            for i in 0..n {
                                for j in 0..n {
                                    let mut s = 0.0;
                                    for l in 0..n {
                                        let ddf = 0.5 * (d3(m, k, i, j, l) + d3(m, k, j, i, l) - d3(m, k, l, i, j));
                                        s += ddginv[((m * n + k) * n + a) * n + l] * gf[(l * n + i) * n + j]
                                            + dginv[(k * n + a) * n + l] * dgf[((m * n + l) * n + i) * n + j]
                                            + dginv[(m * n + a) * n + l] * dgf[((k * n + l) * n + i) * n + j]
                                            + gi(a, l) * ddf;
                                    }
                                    ddgamma[(((m * n + k) * n + a) * n + i) * n + j] = s;
                                }
                            }
                        }
                    }
                }
                let ddgam = |m: usize, k: usize, a: usize, i: usize, j: usize| {
                    ddgamma[(((m * n + k) * n + a) * n + i) * n + j]
                };
                // ∂_m R^a_bcd
                let mut driem = vec![0.0; n5];
                for m in 0..n {
                    for a in 0..n {
                        for b in 0..n {
                            for c in 0..n {
                                for d in 0..n {
                                    let mut s = ddgam(m, c, a, d, b) - ddgam(m, d, a, c, b);
                                    for e in 0..n {
                                        s += dgam(m, a, c, e) * gam(e, d, b) + gam(a, c, e) * dgam(m, e, d, b)
                                            - dgam(m, a, d, e) * gam(e, c, b)
                                            - gam(a, d, e) * dgam(m, e, c, b);
                                    }
                                    driem[((((m * n + a) * n + b) * n + c) * n) + d] = s;
                                }
                            }
                        }
                    }
                }
                let dr = |m: usize, a: usize, b: usize, c: usize, d: usize| driem[(((m * n + a) * n + b) * n + c) * n + d];

                // all-lower Riemann and its partials
                let mut rl = vec![0.0; n4];
                let mut drl = vec![0.0; n5];
                for a in 0..n {
                    for b in 0..n {
                        for c in 0..n {
                            for d in 0..n {
                                let o = ((a * n + b) * n + c) * n + d;
                                rl[o] = (0..n).map(|e| g[a * n + e] * riem(e, b, c, d)).sum();
                                for m in 0..n {
                                    drl[m * n4 + o] = (0..n)
                                        .map(|e| dg(m, a, e) * riem(e, b, c, d) + g[a * n + e] * dr(m, e, b, c, d))
                                        .sum();
                                }
                            }
                        }
                    }
                }
                let rlo = |a: usize, b: usize, c: usize, d: usize| rl[((a * n + b) * n + c) * n + d];
                let mut nabla_riemann = vec![0.0; n5];
                for m in 0..n {
                    for a in 0..n {
                        for b in 0..n {
                            for c in 0..n {
                                for d in 0..n {
                                    let o = ((a * n + b) * n + c) * n + d;
                                    let mut s = drl[m * n4 + o];
                                    for e in 0..n {
                                        s -= gam(e, m, a) * rlo(e, b, c, d)
                                            + gam(e, m, b) * rlo(a, e, c, d)
                                            + gam(e, m, c) * rlo(a, b, e, d)
                                            + gam(e, m, d) * rlo(a, b, c, e);
                                    }
                                    nabla_riemann[m * n4 + o] = s;
                                }
                            }
                        }
                    }
                }

                let mut dric = vec![0.0; n3];
                for m in 0..n {
                    for b in 0..n {
                        for d in 0..n {
                            dric[(m * n + b) * n + d] = (0..n).map(|a| dr(m, a, b, a, d)).sum();
                        }
                    }
                }
                let mut nabla_ricci = vec![0.0; n3];
                for m in 0..n {
                    for a in 0..n {
                        for b in 0..n {
                            let mut s = dric[(m * n + a) * n + b];
                            for e in 0..n {
                                s -= gam(e, m, a) * ricci[e * n + b] + gam(e, m, b) * ricci[a * n + e];
                            }
                            nabla_ricci[(m * n + a) * n + b] = s;
                        }
                    }
                }
                let mut dscalar = vec![0.0; n];
                for (m, ds) in dscalar.iter_mut().enumerate() {
                    let mut s = 0.0;
                    for b in 0..n {
                        for d in 0..n {
                            s += dginv[(m * n + b) * n + d] * ricci[b * n + d]
                                + gi(b, d) * dric[(m * n + b) * n + d];
                        }
                    }
                    *ds = s;
                }
                Some(CurvatureDerivatives {
                    nabla_riemann,
                    nabla_ricci,
                    dscalar,
                })
            }
        };

        Ok(Geometry {
            n,
            point: p.to_vec(),
            g: jet.g.clone(),
            ginv,
            det,
            gamma,
            riemann,
            ricci,
            scalar,
            derivatives,
        })
    }

    fn derivs(&self) -> Result<&CurvatureDerivatives> {
        self.derivatives.as_ref().ok_or_else(|| {
            Error::InvalidInput("curvature derivatives were not requested for this point".into())
        })
    }

    pub fn metric_tensor(&self) -> TensorValue {
        TensorValue::covariant2(&self.point, self.n, self.g.clone())
    }

    pub fn inverse_metric_tensor(&self) -> TensorValue {
        TensorValue::from_data(&self.point, self.n, &[Up, Up], self.ginv.clone())
    }

    pub fn christoffel_tensor(&self) -> TensorValue {
        TensorValue::from_data(&self.point, self.n, &[Up, Down, Down], self.gamma.clone())
    }

    pub fn riemann_tensor(&self) -> TensorValue {
        TensorValue::from_data(&self.point, self.n, &[Up, Down, Down, Down], self.riemann.clone())
    }

    /// `R_abcd = g_ae R^e_bcd`.
    pub fn riemann_lower(&self) -> TensorValue {
        let n = self.n;
        let n3 = n * n * n;
        let mut data = vec![0.0; n3 * n];
        for a in 0..n {
            for rest in 0..n3 {
                data[a * n3 + rest] = (0..n).map(|e| self.g[a * n + e] * self.riemann[e * n3 + rest]).sum();
            }
        }
        TensorValue::from_data(&self.point, n, &[Down; 4], data)
    }

    pub fn ricci_tensor(&self) -> TensorValue {
        TensorValue::covariant2(&self.point, self.n, self.ricci.clone())
    }

    pub fn scalar_tensor(&self) -> TensorValue {
        TensorValue::scalar(&self.point, self.n, self.scalar)
    }

    /// Covariant Hessian of a scalar from its coordinate jet.
    pub fn hessian(&self, f: &FieldJet) -> TensorValue {
        let n = self.n;
        let mut data = f.hessian.clone();
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] -= (0..n).map(|k| self.gamma[(k * n + i) * n + j] * f.gradient[k]).sum::<f64>();
            }
        }
        TensorValue::covariant2(&self.point, n, data)
    }

    pub fn gradient(&self, f: &FieldJet) -> TensorValue {
        let n = self.n;
        let data = (0..n)
            .map(|i| (0..n).map(|j| self.ginv[i * n + j] * f.gradient[j]).sum())
            .collect();
        TensorValue::from_data(&self.point, n, &[Up], data)
    }

    /// Metric trace of the Hessian (no sign flip in Lorentzian signature).
    pub fn laplacian(&self, f: &FieldJet) -> f64 {
        self.trace(&self.hessian(f))
    }

    /// `g(∇φ, ∇ψ)`.
    pub fn inner(&self, dphi: &[f64], dpsi: &[f64]) -> f64 {
        let n = self.n;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += self.ginv[i * n + j] * dphi[i] * dpsi[j];
            }
        }
        s
    }

    /// `g^ij T_ij`.
    pub fn trace(&self, t: &TensorValue) -> f64 {
        assert_eq!(t.rank(), 2);
        self.ginv.iter().zip(&t.data).map(|(a, b)| a * b).sum()
    }

    fn require_dim(&self, ok: bool, what: &str) -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(Error::Dimension(format!("{what} is not defined in dimension {}", self.n)))
        }
    }

    /// Weyl tensor, all indices lowered (`n ≥ 4`).
    pub fn weyl(&self) -> Result<TensorValue> {
        self.require_dim(self.n >= 4, "the Weyl tensor")?;
        let n = self.n;
        let r = self.riemann_lower();
        let mut w = r.clone();
        let g = |i: usize, j: usize| self.g[i * n + j];
        let ric = |i: usize, j: usize| self.ricci[i * n + j];
        let c1 = 1.0 / (n as f64 - 2.0);
        let c2 = self.scalar / ((n as f64 - 1.0) * (n as f64 - 2.0));
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let v = r.get(&[a, b, c, d])
                            - c1 * (g(a, c) * ric(b, d) - g(a, d) * ric(b, c) - g(b, c) * ric(a, d)
                                + g(b, d) * ric(a, c))
                            + c2 * (g(a, c) * g(b, d) - g(a, d) * g(b, c));
                        w.set(&[a, b, c, d], v);
                    }
                }
            }
        }
        Ok(w)
    }

    /// `∇_m W_abcd`, computed from `∇R`, `∇Ric` and `∂τ` (`n ≥ 4`).
    pub fn nabla_weyl(&self) -> Result<TensorValue> {
        self.require_dim(self.n >= 4, "the Weyl tensor")?;
        let d = self.derivs()?;
        let n = self.n;
        let n4 = n * n * n * n;
        let g = |i: usize, j: usize| self.g[i * n + j];
        let c1 = 1.0 / (n as f64 - 2.0);
        let c2 = 1.0 / ((n as f64 - 1.0) * (n as f64 - 2.0));
        let mut out = TensorValue::zeros(&self.point, n, &[Down; 5]);
        for m in 0..n {
            let nric = |i: usize, j: usize| d.nabla_ricci[(m * n + i) * n + j];
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        for e in 0..n {
                            let o = ((a * n + b) * n + c) * n + e;
                            let v = d.nabla_riemann[m * n4 + o]
                                - c1 * (g(a, c) * nric(b, e) - g(a, e) * nric(b, c) - g(b, c) * nric(a, e)
                                    + g(b, e) * nric(a, c))
                                + c2 * d.dscalar[m] * (g(a, c) * g(b, e) - g(a, e) * g(b, c));
                            out.data[m * n4 + o] = v;
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Cotton tensor `C_abc = ∇_c P_ab − ∇_b P_ac` of the Schouten tensor
    /// `P = (Ric − τ g / (2(n−1))) / (n−2)` (`n = 3`).
    pub fn cotton(&self) -> Result<TensorValue> {
        self.require_dim(self.n == 3, "the Cotton tensor")?;
        let d = self.derivs()?;
        let n = self.n;
        let nf = n as f64;
        let nabla_p = |c: usize, a: usize, b: usize| {
            (d.nabla_ricci[(c * n + a) * n + b] - d.dscalar[c] * self.g[a * n + b] / (2.0 * (nf - 1.0)))
                / (nf - 2.0)
        };
        let mut out = TensorValue::zeros(&self.point, n, &[Down; 3]);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    out.set(&[a, b, c], nabla_p(c, a, b) - nabla_p(b, a, c));
                }
            }
        }
        Ok(out)
    }

    /// `∂_j τ − 2 g^ik ∇_i Ric_kj` for each `j`.
    pub fn contracted_bianchi(&self) -> Result<Vec<f64>> {
        let d = self.derivs()?;
        let n = self.n;
        Ok((0..n)
            .map(|j| {
                let mut div = 0.0;
                for i in 0..n {
                    for k in 0..n {
                        div += self.ginv[i * n + k] * d.nabla_ricci[(i * n + k) * n + j];
                    }
                }
                d.dscalar[j] - 2.0 * div
            })
            .collect())
    }

    /// Largest `|R_a[bcd]|` cyclic sum.
    pub fn first_bianchi_defect(&self) -> f64 {
        let n = self.n;
        let r = self.riemann_lower();
        let mut m: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let s = r.get(&[a, b, c, d]) + r.get(&[a, c, d, b]) + r.get(&[a, d, b, c]);
                        m = m.max(s.abs());
                    }
                }
            }
        }
        m
    }

    /// Largest violation of the Riemann pair symmetries, relative to `1 + max|R|`.
    pub fn riemann_symmetry_defect(&self) -> f64 {
        let n = self.n;
        let r = self.riemann_lower();
        let scale = 1.0 + r.max_abs();
        let mut m: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let v = r.get(&[a, b, c, d]);
                        m = m
                            .max((v + r.get(&[b, a, c, d])).abs())
                            .max((v + r.get(&[a, b, d, c])).abs())
                            .max((v - r.get(&[c, d, a, b])).abs());
                    }
                }
            }
        }
        m / scale
    }
}

/// Value, gradient and Hessian of a scalar in chart coordinates.
#[derive(Clone, Debug)]
pub struct FieldJet {
    pub value: f64,
    pub gradient: Vec<f64>,
    /// Row-major `∂_i ∂_j f`.
    pub hessian: Vec<f64>,
}

/// A scalar expression compiled together with its first and second partials
/// with respect to the chart coordinates.
///
/// Symbols that are neither chart coordinates nor chart parameters can be
/// supplied as `frozen` inputs: they take values per call but are not
/// differentiated. This is how a potential on a product is restricted to one
/// factor.
#[derive(Clone, Debug)]
pub struct ScalarField {
    expr: Expr,
    n: usize,
    program: Program,
}

impl ScalarField {
    pub fn new(metric: &ChartMetric, expr: &Expr) -> Result<ScalarField> {
        ScalarField::with_frozen(metric, expr, &[])
    }

    pub fn with_frozen(metric: &ChartMetric, expr: &Expr, frozen: &[String]) -> Result<ScalarField> {
        let coords = metric.coords();
        let n = coords.len();
        let mut exprs = vec![expr.clone()];
        let first: Vec<Expr> = coords.iter().map(|c| expr.differentiate(c)).collect();
        exprs.extend(first.iter().cloned());
        for i in 0..n {
            for j in 0..=i {
                exprs.push(first[i].differentiate(&coords[j]));
            }
        }
        let mut inputs = coords.to_vec();
        inputs.extend(frozen.iter().cloned());
        let program = Program::compile(&exprs, &inputs, metric.params())?;
        Ok(ScalarField {
            expr: expr.clone(),
            n,
            program,
        })
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn jet(&self, p: &[f64]) -> Result<FieldJet> {
        self.jet_frozen(p, &[])
    }

    pub fn jet_frozen(&self, p: &[f64], frozen: &[f64]) -> Result<FieldJet> {
        let n = self.n;
        let vals = if frozen.is_empty() {
            self.program.eval(p)?
        } else {
            let mut x = p.to_vec();
            x.extend_from_slice(frozen);
            self.program.eval(&x)?
        };
        let mut hessian = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = vals[1 + n + tri(i, j)];
                hessian[i * n + j] = v;
                hessian[j * n + i] = v;
            }
        }
        Ok(FieldJet {
            value: vals[0],
            gradient: vals[1..=n].to_vec(),
            hessian,
        })
    }
}

// Spec-level conveniences: one point, one quantity.

pub fn metric_at(m: &ChartMetric, p: &[f64]) -> Result<TensorValue> {
    Ok(Geometry::at(m, p, false)?.metric_tensor())
}

pub fn inverse_metric_at(m: &ChartMetric, p: &[f64]) -> Result<TensorValue> {
    Ok(Geometry::at(m, p, false)?.inverse_metric_tensor())
}

pub fn christoffel(m: &ChartMetric, p: &[f64]) -> Result<TensorValue> {
    Ok(Geometry::at(m, p, false)?.christoffel_tensor())
}

pub fn riemann(m: &ChartMetric, p: &[f64]) -> Result<TensorValue> {
    Ok(Geometry::at(m, p, false)?.riemann_tensor())
}

pub fn ricci(m: &ChartMetric, p: &[f64]) -> Result<TensorValue> {
    Ok(Geometry::at(m, p, false)?.ricci_tensor())
}

pub fn scalar_curvature(m: &ChartMetric, p: &[f64]) -> Result<f64> {
    Ok(Geometry::at(m, p, false)?.scalar)
}

pub fn hessian(m: &ChartMetric, phi: &Expr, p: &[f64]) -> Result<TensorValue> {
    let f = ScalarField::new(m, phi)?.jet(p)?;
    Ok(Geometry::at(m, p, false)?.hessian(&f))
}

pub fn gradient(m: &ChartMetric, phi: &Expr, p: &[f64]) -> Result<TensorValue> {
    let f = ScalarField::new(m, phi)?.jet(p)?;
    Ok(Geometry::at(m, p, false)?.gradient(&f))
}

pub fn laplacian(m: &ChartMetric, phi: &Expr, p: &[f64]) -> Result<f64> {
    let f = ScalarField::new(m, phi)?.jet(p)?;
    Ok(Geometry::at(m, p, false)?.laplacian(&f))
}

pub fn inner(m: &ChartMetric, phi: &Expr, psi: &Expr, p: &[f64]) -> Result<f64> {
    let a = ScalarField::new(m, phi)?.jet(p)?;
    let b = ScalarField::new(m, psi)?.jet(p)?;
    Ok(Geometry::at(m, p, false)?.inner(&a.gradient, &b.gradient))
}

pub fn weyl(m: &ChartMetric, p: &[f64]) -> Result<TensorValue> {
    Geometry::at(m, p, false)?.weyl()
}

pub fn cotton(m: &ChartMetric, p: &[f64]) -> Result<TensorValue> {
    Geometry::at(m, p, true)?.cotton()
}

/// Frobenius norm of the coordinate components of `∇W`.
pub fn nabla_weyl_norm(m: &ChartMetric, p: &[f64]) -> Result<f64> {
    Ok(Geometry::at(m, p, true)?.nabla_weyl()?.frobenius_norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ParamBinding;

    fn polar() -> ChartMetric {
        ChartMetric::parse(&["r", "th"], &[&["1"], &["0", "r^2"]], ParamBinding::new()).unwrap()
    }

    #[test]
    fn euclidean_connection_vanishes() {
        let m = ChartMetric::flat(&["x", "y", "z"], false);
        let g = Geometry::at(&m, &[0.3, -1.0, 2.0], true).unwrap();
        assert!(g.gamma.iter().all(|&v| v == 0.0));
        assert_eq!(g.scalar, 0.0);
    }

    #[test]
    fn minkowski_inverse() {
        let m = ChartMetric::flat(&["t", "x", "y", "z"], true);
        let inv = inverse_metric_at(&m, &[0.0; 4]).unwrap();
        for i in 0..4 {
            assert_eq!(inv.get(&[i, i]), if i == 0 { -1.0 } else { 1.0 });
        }
    }

    #[test]
    fn degenerate_metric_rejected() {
        let m = ChartMetric::parse(&["x", "y"], &[&["0"], &["0", "1"]], ParamBinding::new()).unwrap();
        assert!(matches!(metric_at(&m, &[0.0, 0.0]), Err(Error::SingularMetric { .. })));
    }

    #[test]
    fn polar_christoffels() {
        let c = christoffel(&polar(), &[2.0, 0.5]).unwrap();
        assert!((c.get(&[0, 1, 1]) + 2.0).abs() < 1e-15);
        assert!((c.get(&[1, 0, 1]) - 0.5).abs() < 1e-15);
        assert!((c.get(&[1, 1, 0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn dimension_guards() {
        let m = ChartMetric::flat(&["x", "y", "z"], false);
        let g = Geometry::at(&m, &[0.0; 3], true).unwrap();
        assert!(matches!(g.weyl(), Err(Error::Dimension(_))));
        let m4 = ChartMetric::flat(&["t", "x", "y", "z"], true);
        assert!(matches!(cotton(&m4, &[0.0; 4]), Err(Error::Dimension(_))));
    }

    #[test]
    fn frozen_inputs_are_not_differentiated() {
        let m = ChartMetric::flat(&["x"], false);
        let e = Expr::sym("x") * Expr::sym("u").powi(2);
        let f = ScalarField::with_frozen(&m, &e, &["u".to_string()]).unwrap();
        let j = f.jet_frozen(&[2.0], &[3.0]).unwrap();
        assert_eq!(j.value, 18.0);
        assert_eq!(j.gradient, vec![9.0]);
        assert_eq!(j.hessian, vec![0.0]);
    }
}
