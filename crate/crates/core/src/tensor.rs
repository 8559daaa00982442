use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variance {
    Up,
    Down,
}

/// Dense tensor components at one point, row-major over the indices.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorValue {
    pub point: Vec<f64>,
    pub dim: usize,
    pub variance: Vec<Variance>,
    pub data: Vec<f64>,
}

impl TensorValue {
    pub fn zeros(point: &[f64], dim: usize, variance: &[Variance]) -> TensorValue {
        TensorValue {
            point: point.to_vec(),
            dim,
            variance: variance.to_vec(),
            data: vec![0.0; dim.pow(variance.len() as u32)],
        }
    }

    pub fn from_data(point: &[f64], dim: usize, variance: &[Variance], data: Vec<f64>) -> TensorValue {
        assert_eq!(data.len(), dim.pow(variance.len() as u32), "component count");
        TensorValue {
            point: point.to_vec(),
            dim,
            variance: variance.to_vec(),
            data,
        }
    }

    pub fn scalar(point: &[f64], dim: usize, v: f64) -> TensorValue {
        TensorValue::from_data(point, dim, &[], vec![v])
    }

    /// All-lower rank-2 tensor.
    pub fn covariant2(point: &[f64], dim: usize, data: Vec<f64>) -> TensorValue {
        TensorValue::from_data(point, dim, &[Variance::Down, Variance::Down], data)
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        idx.iter().fold(0, |acc, &i| {
            debug_assert!(i < self.dim);
            acc * self.dim + i
        })
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    pub fn value(&self) -> f64 {
        assert_eq!(self.rank(), 0, "value() on a non-scalar tensor");
        self.data[0]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &TensorValue) -> f64 {
        assert_eq!(self.data.len(), other.data.len(), "shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Componentwise difference scaled by `1 + max|other|`.
    pub fn relative_diff(&self, other: &TensorValue) -> f64 {
        self.max_abs_diff(other) / (1.0 + other.max_abs())
    }

    /// Largest `|T_ij - T_ji|` of a rank-2 tensor.
    pub fn asymmetry(&self) -> f64 {
        assert_eq!(self.rank(), 2);
        let n = self.dim;
        let mut m: f64 = 0.0;
        for i in 0..n {
            for j in 0..i {
                m = m.max((self.data[i * n + j] - self.data[j * n + i]).abs());
            }
        }
        m
    }

    pub fn sub(&self, other: &TensorValue) -> TensorValue {
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_are_row_major() {
        let mut t = TensorValue::zeros(&[0.0; 3], 3, &[Variance::Up, Variance::Down, Variance::Down]);
        t.set(&[1, 2, 0], 4.0);
        assert_eq!(t.data[9 + 6], 4.0);
        assert_eq!(t.get(&[1, 2, 0]), 4.0);
        assert_eq!(t.rank(), 3);
    }

    #[test]
    fn asymmetry_and_norms() {
        let t = TensorValue::covariant2(&[0.0, 0.0], 2, vec![1.0, 2.0, 2.5, -3.0]);
        assert_eq!(t.asymmetry(), 0.5);
        assert_eq!(t.max_abs(), 3.0);
        let z = TensorValue::covariant2(&[0.0, 0.0], 2, vec![0.0; 4]);
        assert_eq!(t.relative_diff(&z), 3.0);
    }
}
