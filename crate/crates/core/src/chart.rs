//! Coordinate charts carrying a symmetric metric of symbolic components.

use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::expr::{parse_expr, Expr, ParamBinding, Program, Scope};

/// Packed index of `(i, j)` in lower-triangular storage.
#[inline]
pub fn tri(i: usize, j: usize) -> usize {
    let (i, j) = if i >= j { (i, j) } else { (j, i) };
    i * (i + 1) / 2 + j
}

/// Metric components with their symbolic partial derivatives, flattened.
#[derive(Debug)]
struct Tables {
    /// Second partials `d2[pair(a,b)][tri]`, kept for building third order.
    second: Vec<Vec<Expr>>,
    low: Program,
    third: OnceLock<Program>,
}

#[derive(Clone, Debug)]
pub struct ChartMetric {
    coords: Vec<String>,
    components: Vec<Expr>,
    params: ParamBinding,
    tables: Arc<Tables>,
}

/// Metric value and coordinate partials at a point, full (unpacked) storage.
///
/// `dg[(k*n + i)*n + j] = ∂_k g_ij`, `ddg[((a*n + b)*n + i)*n + j] = ∂_a ∂_b g_ij`,
/// and likewise one more leading index for `dddg`.
#[derive(Clone, Debug)]
pub struct MetricJet {
    pub n: usize,
    pub g: Vec<f64>,
    pub dg: Vec<f64>,
    pub ddg: Vec<f64>,
    pub dddg: Option<Vec<f64>>,
}

fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|a| (a..n).map(move |b| (a, b))).collect()
}

fn triples(n: usize) -> Vec<(usize, usize, usize)> {
    (0..n)
        .flat_map(|a| (a..n).flat_map(move |b| (b..n).map(move |c| (a, b, c))))
        .collect()
}

impl ChartMetric {
    /// Builds a chart from packed lower-triangular components
    /// (`components[tri(i, j)]`).
    pub fn from_packed(coords: Vec<String>, components: Vec<Expr>, params: ParamBinding) -> Result<ChartMetric> {
        let n = coords.len();
        if n == 0 {
            return Err(Error::Dimension("a chart needs at least one coordinate".into()));
        }
        if components.len() != n * (n + 1) / 2 {
            return Err(Error::Dimension(format!(
                "{} packed components for dimension {n}",
                components.len()
            )));
        }
        for (i, c) in coords.iter().enumerate() {
            if coords[..i].contains(c) {
                return Err(Error::InvalidInput(format!("duplicate coordinate `{c}`")));
            }
        }
        let first: Vec<Vec<Expr>> = coords
            .iter()
            .map(|c| components.iter().map(|g| g.differentiate(c)).collect())
            .collect();
        let second: Vec<Vec<Expr>> = pairs(n)
            .into_iter()
            .map(|(a, b)| first[a].iter().map(|d| d.differentiate(&coords[b])).collect())
            .collect();
        let mut all = components.clone();
        all.extend(first.into_iter().flatten());
        all.extend(second.iter().flatten().cloned());
        let low = Program::compile(&all, &coords, &params)?;
        Ok(ChartMetric {
            coords,
            components,
            params,
            tables: Arc::new(Tables {
                second,
                low,
                third: OnceLock::new(),
            }),
        })
    }

    /// Builds a chart from a full or lower-triangular matrix of components.
    /// A full matrix must be symmetric as written.
    pub fn new(coords: Vec<String>, rows: Vec<Vec<Expr>>, params: ParamBinding) -> Result<ChartMetric> {
        let n = coords.len();
        if rows.len() != n {
            return Err(Error::Dimension(format!("{} rows for {n} coordinates", rows.len())));
        }
        let lower = rows.iter().enumerate().all(|(i, r)| r.len() == i + 1);
        let full = rows.iter().all(|r| r.len() == n);
        if !lower && !full {
            return Err(Error::Dimension(
                "metric rows must form a full n×n matrix or a lower triangle".into(),
            ));
        }
        let mut packed = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in 0..=i {
                if full && !lower && rows[i][j].to_string() != rows[j][i].to_string() {
                    return Err(Error::InvalidInput(format!(
                        "metric is not symmetric: g[{i}][{j}] = `{}` but g[{j}][{i}] = `{}`",
                        rows[i][j], rows[j][i]
                    )));
                }
                packed.push(rows[i][j].clone());
            }
        }
        ChartMetric::from_packed(coords, packed, params)
    }

    pub fn diagonal(coords: &[&str], diag: Vec<Expr>, params: ParamBinding) -> Result<ChartMetric> {
        let n = coords.len();
        if diag.len() != n {
            return Err(Error::Dimension(format!("{} diagonal entries for {n} coordinates", diag.len())));
        }
        let mut packed = vec![Expr::zero(); n * (n + 1) / 2];
        for (i, d) in diag.into_iter().enumerate() {
            packed[tri(i, i)] = d;
        }
        ChartMetric::from_packed(coords.iter().map(|s| s.to_string()).collect(), packed, params)
    }

    /// Parses component strings; `rows` may be full or lower-triangular.
    pub fn parse(coords: &[&str], rows: &[&[&str]], params: ParamBinding) -> Result<ChartMetric> {
        let scope = Scope {
            coords: coords.iter().map(|s| s.to_string()).collect(),
            params: params.keys().cloned().collect(),
        };
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|s| parse_expr(s, &scope)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        ChartMetric::new(scope.coords, rows, params)
    }

    /// Flat `dx_1^2 + ... + dx_n^2`, optionally with the first coordinate timelike.
    pub fn flat(coords: &[&str], lorentzian: bool) -> ChartMetric {
        let diag = (0..coords.len())
            .map(|i| Expr::constant(if lorentzian && i == 0 { -1.0 } else { 1.0 }))
            .collect();
        ChartMetric::diagonal(coords, diag, ParamBinding::new()).expect("flat metric")
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn params(&self) -> &ParamBinding {
        &self.params
    }

    pub fn component(&self, i: usize, j: usize) -> &Expr {
        &self.components[tri(i, j)]
    }

    pub fn packed_components(&self) -> &[Expr] {
        &self.components
    }

    pub fn scope(&self) -> Scope {
        Scope {
            coords: self.coords.clone(),
            params: self.params.keys().cloned().collect(),
        }
    }

    fn third_program(&self) -> &Program {
        self.tables.third.get_or_init(|| {
            let n = self.dim();
            let idx: std::collections::HashMap<(usize, usize), usize> =
                pairs(n).into_iter().enumerate().map(|(k, p)| (p, k)).collect();
            let exprs: Vec<Expr> = triples(n)
                .into_iter()
                .flat_map(|(a, b, c)| {
                    self.tables.second[idx[&(a, b)]]
                        .iter()
                        .map(|d| d.differentiate(&self.coords[c]))
                        .collect::<Vec<_>>()
                })
                .collect();
            // Symbols were already resolved for the lower orders.
            Program::compile(&exprs, &self.coords, &self.params).expect("third-order metric tables")
        })
    }

    /// Evaluates the metric and its partials up to second order, or third when
    /// `third` is set.
    pub fn jet(&self, p: &[f64], third: bool) -> Result<MetricJet> {
        let n = self.dim();
        if p.len() != n {
            return Err(Error::Dimension(format!("point has {} coordinates, chart has {n}", p.len())));
        }
        let t = n * (n + 1) / 2;
        let low = self.tables.low.eval(p)?;
        let unpack = |packed: &[f64], out: &mut [f64]| {
            for i in 0..n {
                for j in 0..n {
                    out[i * n + j] = packed[tri(i, j)];
                }
            }
        };
        let nn = n * n;
        let mut g = vec![0.0; nn];
        unpack(&low[..t], &mut g);
        let mut dg = vec![0.0; n * nn];
        for k in 0..n {
            unpack(&low[t * (1 + k)..t * (2 + k)], &mut dg[k * nn..(k + 1) * nn]);
        }
        let mut ddg = vec![0.0; n * n * nn];
        let base = t * (1 + n);
        for (pi, (a, b)) in pairs(n).into_iter().enumerate() {
            let src = &low[base + pi * t..base + (pi + 1) * t];
            unpack(src, &mut ddg[(a * n + b) * nn..(a * n + b + 1) * nn]);
            if a != b {
                unpack(src, &mut ddg[(b * n + a) * nn..(b * n + a + 1) * nn]);
            }
        }
        let dddg = if third {
            let vals = self.third_program().eval(p)?;
            let mut out = vec![0.0; n * n * n * nn];
            for (ti, (a, b, c)) in triples(n).into_iter().enumerate() {
                let src = &vals[ti * t..(ti + 1) * t];
                for (x, y, z) in [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)] {
                    let o = ((x * n + y) * n + z) * nn;
                    unpack(src, &mut out[o..o + nn]);
                }
            }
            Some(out)
        } else {
            None
        };
        Ok(MetricJet { n, g, dg, ddg, dddg })
    }

    /// Metric matrix at `p`.
    pub fn matrix_at(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let jet = self.jet(p, false)?;
        Ok(DMatrix::from_row_slice(self.dim(), self.dim(), &jet.g))
    }

    /// `(positive, negative)` eigenvalue counts at `p`.
    pub fn signature_at(&self, p: &[f64]) -> Result<(usize, usize)> {
        let m = self.matrix_at(p)?;
        Ok(signature(&m))
    }

    /// Same components with additional parameter values bound.
    pub fn with_params(&self, extra: &ParamBinding) -> Result<ChartMetric> {
        let mut params = self.params.clone();
        params.extend(extra.iter().map(|(k, v)| (k.clone(), *v)));
        ChartMetric::from_packed(self.coords.clone(), self.components.clone(), params)
    }
}

pub fn signature(m: &DMatrix<f64>) -> (usize, usize) {
    let eig = SymmetricEigen::new(m.clone());
    let pos = eig.eigenvalues.iter().filter(|&&v| v > 0.0).count();
    let neg = eig.eigenvalues.iter().filter(|&&v| v < 0.0).count();
    (pos, neg)
}
