use serde::{Deserialize, Serialize};

use super::EncodingError;

/// Quadratic binary objective `xᵀQx + offset` with `Q` upper triangular.
/// The diagonal holds the linear terms (`x² = x` on binary inputs).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "QuboRecord", into = "QuboRecord")]
pub struct QuboModel {
    num_vars: usize,
    q: Vec<f64>,
    offset: f64,
}

#[derive(Serialize, Deserialize)]
struct QuboRecord {
    num_vars: usize,
    q: Vec<Vec<f64>>,
    offset: f64,
}

impl From<QuboModel> for QuboRecord {
    fn from(m: QuboModel) -> Self {
        Self {
            num_vars: m.num_vars,
            q: m.dense(),
            offset: m.offset,
        }
    }
}

impl TryFrom<QuboRecord> for QuboModel {
    type Error = EncodingError;

    fn try_from(r: QuboRecord) -> Result<Self, Self::Error> {
        Self::from_dense(&r.q, r.offset)
    }
}

impl QuboModel {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            q: vec![0.0; num_vars * num_vars],
            offset: 0.0,
        }
    }

    /// Builds from a square matrix; lower-triangle entries are folded onto
    /// their mirrored upper-triangle position.
    pub fn from_dense(matrix: &[Vec<f64>], offset: f64) -> Result<Self, EncodingError> {
        let n = matrix.len();
        if matrix.iter().any(|r| r.len() != n) {
            return Err(EncodingError::LengthMismatch {
                expected: n,
                got: matrix.iter().map(Vec::len).find(|&l| l != n).unwrap_or(0),
            });
        }
        let mut m = Self::new(n);
        for (i, row) in matrix.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                if i == j {
                    m.add_linear(i, c);
                } else if c != 0.0 {
                    m.add_quadratic(i, j, c);
                }
            }
        }
        m.offset = offset;
        Ok(m)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// `Q[i][j]` for `i <= j`; zero below the diagonal.
    pub fn coefficient(&self, i: usize, j: usize) -> f64 {
        if i <= j {
            self.q[i * self.num_vars + j]
        } else {
            0.0
        }
    }

    pub fn add_linear(&mut self, i: usize, c: f64) {
        self.q[i * self.num_vars + i] += c;
    }

    /// Adds `c · x_i x_j`; `i == j` lands on the diagonal.
    pub fn add_quadratic(&mut self, i: usize, j: usize, c: f64) {
        let (a, b) = (i.min(j), i.max(j));
        self.q[a * self.num_vars + b] += c;
    }

    pub fn add_offset(&mut self, c: f64) {
        self.offset += c;
    }

    /// Adds `penalty · (Σ_{b∈group} x_b − 1)²`, expanded with `x² = x`.
    pub fn add_exactly_one_penalty(&mut self, group: &[usize], penalty: f64) {
        for (k, &a) in group.iter().enumerate() {
            self.add_linear(a, -penalty);
            for &b in &group[k + 1..] {
                self.add_quadratic(a, b, 2.0 * penalty);
            }
        }
        self.add_offset(penalty);
    }

    pub fn dense(&self) -> Vec<Vec<f64>> {
        self.q.chunks(self.num_vars.max(1)).take(self.num_vars).map(<[f64]>::to_vec).collect()
    }

    /// Symmetric coupling matrix `W` with `W_ij = W_ji = Q_ij` off the
    /// diagonal and the linear terms on the diagonal.
    pub fn symmetric(&self) -> Vec<Vec<f64>> {
        let n = self.num_vars;
        let mut w = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let c = self.q[i * n + j];
                w[i][j] = c;
                w[j][i] = c;
            }
        }
        w
    }

    pub fn energy(&self, x: &[u8]) -> Result<f64, EncodingError> {
        if x.len() != self.num_vars {
            return Err(EncodingError::LengthMismatch {
                expected: self.num_vars,
                got: x.len(),
            });
        }
        let n = self.num_vars;
        let mut e = self.offset;
        for i in (0..n).filter(|&i| x[i] != 0) {
            let row = &self.q[i * n..(i + 1) * n];
            e += row[i..].iter().zip(&x[i..]).filter(|(_, &xj)| xj != 0).map(|(c, _)| c).sum::<f64>();
        }
        Ok(e)
    }

    pub fn is_zero(&self) -> bool {
        self.offset == 0.0 && self.q.iter().all(|&c| c == 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_model_is_zero_everywhere() {
        let q = QuboModel::new(3);
        assert_eq!(q.energy(&[1, 0, 1]).unwrap(), 0.0);
        assert!(q.is_zero());
    }

    #[test]
    fn lower_triangle_folds_into_upper() {
        let q = QuboModel::from_dense(&[vec![1.0, 0.0], vec![3.0, -2.0]], 0.5).unwrap();
        assert_eq!(q.coefficient(0, 1), 3.0);
        assert_eq!(q.coefficient(1, 0), 0.0);
        assert_eq!(q.energy(&[1, 1]).unwrap(), 1.0 + 3.0 - 2.0 + 0.5);
    }

    #[test]
    fn exactly_one_penalty_values() {
        let mut q = QuboModel::new(3);
        q.add_exactly_one_penalty(&[0, 1, 2], 4.0);
        assert_eq!(q.energy(&[0, 0, 0]).unwrap(), 4.0);
        assert_eq!(q.energy(&[0, 1, 0]).unwrap(), 0.0);
        assert_eq!(q.energy(&[1, 1, 0]).unwrap(), 4.0);
        assert_eq!(q.energy(&[1, 1, 1]).unwrap(), 16.0);
    }

    #[test]
    fn length_mismatch_is_reported() {
        let q = QuboModel::new(2);
        assert_eq!(
            q.energy(&[1]).unwrap_err(),
            EncodingError::LengthMismatch { expected: 2, got: 1 }
        );
    }

    #[test]
    fn serializes_as_dense_matrix() {
        let q = QuboModel::from_dense(&[vec![-1.0, 2.0], vec![0.0, -1.0]], 0.0).unwrap();
        let json = serde_json::to_value(&q).unwrap();
        assert_eq!(json["q"], serde_json::json!([[-1.0, 2.0], [0.0, -1.0]]));
        let back: QuboModel = serde_json::from_value(json).unwrap();
        assert_eq!(back, q);
    }
}
