use super::StatsError;

const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// Labelled square distance matrix: symmetric, non-negative, zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    labels: Vec<String>,
    values: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(labels: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self, StatsError> {
        let n = labels.len();
        if rows.len() != n {
            return Err(StatsError::NotSquare(format!(
                "{n} labels but {} rows",
                rows.len()
            )));
        }
        let mut values = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(StatsError::NotSquare(format!(
                    "row {i} has {} values, expected {n}",
                    row.len()
                )));
            }
            values.extend(row);
        }
        let matrix = Self { labels, values };
        matrix.validate()?;
        Ok(matrix)
    }

    /// Builds a matrix from a distance function evaluated on the upper
    /// triangle.
    pub fn from_fn<E>(
        labels: Vec<String>,
        mut distance: impl FnMut(usize, usize) -> Result<f64, E>,
    ) -> Result<Self, E>
    where
        E: From<StatsError>,
    {
        let n = labels.len();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = distance(i, j)?;
                values[i * n + j] = d;
                values[j * n + i] = d;
            }
        }
        let matrix = Self { labels, values };
        matrix.validate()?;
        Ok(matrix)
    }

    fn validate(&self) -> Result<(), StatsError> {
        let n = self.len();
        for i in 0..n {
            if self.get(i, i) != 0.0 {
                return Err(StatsError::NonZeroDiagonal(i));
            }
            for j in 0..n {
                let v = self.get(i, j);
                if !v.is_finite() || v < 0.0 {
                    return Err(StatsError::InvalidEntry(i, j));
                }
                if j > i {
                    let w = self.get(j, i);
                    if (v - w).abs() > SYMMETRY_TOLERANCE * v.abs().max(w.abs()).max(1.0) {
                        return Err(StatsError::NotSymmetric(i, j));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.len() + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.len().max(1))
    }

    /// Entries above the diagonal, row by row.
    pub fn upper_triangle(&self) -> Vec<f64> {
        let n = self.len();
        let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                out.push(self.get(i, j));
            }
        }
        out
    }

    /// The sub-matrix for `labels`, in that order.
    pub fn select(&self, labels: &[String]) -> Result<Self, StatsError> {
        let idx = labels
            .iter()
            .map(|l| {
                self.labels
                    .iter()
                    .position(|x| x == l)
                    .ok_or_else(|| StatsError::LabelMismatch(format!("no label `{l}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let rows = idx
            .iter()
            .map(|&i| idx.iter().map(|&j| self.get(i, j)).collect())
            .collect();
        Self::new(labels.to_vec(), rows)
    }
}
