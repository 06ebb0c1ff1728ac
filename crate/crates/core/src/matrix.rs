use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::{Error, Result};

/// Dense `n x d` node feature table; row `i` is the feature vector of node `i`.
///
/// Always non-empty and finite.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    values: Array2<f64>,
}

impl FeatureMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        let (n, d) = values.dim();
        if n == 0 || d == 0 {
            return Err(Error::InvalidInput(format!(
                "feature matrix must be non-empty, got {n}x{d}"
            )));
        }
        check_finite(values.view())?;
        Ok(Self { values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        let mut flat = Vec::with_capacity(n * d);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::InvalidInput(format!(
                    "ragged feature rows: row 0 has {d} columns, row {i} has {}",
                    row.len()
                )));
            }
            flat.extend_from_slice(row);
        }
        let values =
            Array2::from_shape_vec((n, d), flat).map_err(|e| Error::InvalidInput(e.to_string()))?;
        Self::new(values)
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn d(&self) -> usize {
        self.values.ncols()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.values.row(i)
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_array(self) -> Array2<f64> {
        self.values
    }

    /// Rows gathered in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<FeatureMatrix> {
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.n()) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                n: self.n(),
            });
        }
        Self::new(self.values.select(ndarray::Axis(0), rows))
    }

    /// Z-score every column in place (population variance). Constant columns
    /// are set to zero and their indices returned.
    pub fn standardize(&mut self) -> Vec<usize> {
        let n = self.n() as f64;
        let mut constant = Vec::new();
        for (j, mut col) in self.values.columns_mut().into_iter().enumerate() {
            let mean = col.sum() / n;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            if var <= f64::EPSILON * mean.abs().max(1.0) {
                col.fill(0.0);
                constant.push(j);
            } else {
                let sd = var.sqrt();
                col.mapv_inplace(|v| (v - mean) / sd);
            }
        }
        if !constant.is_empty() {
            log::warn!("standardize: constant feature columns left at zero: {constant:?}");
        }
        constant
    }
}

pub(crate) fn check_finite(values: ArrayView2<'_, f64>) -> Result<()> {
    for ((row, col), v) in values.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFinite { row, col });
        }
    }
    Ok(())
}

pub(crate) fn squared_distance(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn euclidean(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    squared_distance(a, b).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(FeatureMatrix::new(Array2::zeros((0, 3))).is_err());
        assert!(FeatureMatrix::new(Array2::zeros((3, 0))).is_err());
        let err = FeatureMatrix::new(array![[1.0, f64::NAN]]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { row: 0, col: 1 }));
        assert!(FeatureMatrix::new(array![[f64::INFINITY]]).is_err());
    }

    #[test]
    fn from_rows_rejects_ragged() {
        assert!(FeatureMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
        let m = FeatureMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!((m.n(), m.d()), (2, 2));
        assert_eq!(m.row(1).to_vec(), vec![3.0, 4.0]);
    }

    #[test]
    fn standardize_zero_mean_unit_variance() {
        let mut m = FeatureMatrix::new(array![
            [1.0, 5.0, 2.0],
            [2.0, 5.0, -1.0],
            [4.0, 5.0, 7.0],
            [9.0, 5.0, 0.5]
        ])
        .unwrap();
        let constant = m.standardize();
        assert_eq!(constant, vec![1]);
        for j in [0, 2] {
            let col = m.as_array().column(j);
            let mean = col.sum() / 4.0;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 4.0;
            assert!(mean.abs() <= 1e-10);
            assert!((var - 1.0).abs() <= 1e-10);
        }
        assert!(m.as_array().column(1).iter().all(|&v| v == 0.0));
    }
}
