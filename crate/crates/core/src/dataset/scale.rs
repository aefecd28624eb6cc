use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-column z-score parameters fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationParams {
    pub mean: Vec<f64>,
    /// Population standard deviation; zero-variance columns store 1.
    pub sd: Vec<f64>,
}

impl StandardizationParams {
    pub fn fit(rows: ArrayView2<'_, f64>) -> Result<Self> {
        let n = rows.nrows();
        if n < 2 {
            return Err(Error::validation(format!(
                "standardization needs at least 2 rows, got {n}"
            )));
        }
        let mut mean = Vec::with_capacity(rows.ncols());
        let mut sd = Vec::with_capacity(rows.ncols());
        for col in rows.axis_iter(Axis(1)) {
            let m = col.sum() / n as f64;
            let var = col.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n as f64;
            let s = var.sqrt();
            mean.push(m);
            // Degenerate column: map to all-zeros instead of dividing by ~0.
            sd.push(if s.is_finite() && s > 1e-12 * m.abs().max(1.0) { s } else { 1.0 });
        }
        Ok(StandardizationParams { mean, sd })
    }

    pub fn n_columns(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, rows: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if rows.ncols() != self.n_columns() {
            return Err(Error::Dimension {
                expected: self.n_columns(),
                got: rows.ncols(),
            });
        }
        let mut out = rows.to_owned();
        for mut row in out.axis_iter_mut(Axis(0)) {
            self.apply_in_place(row.as_slice_mut().expect("owned rows are contiguous"));
        }
        Ok(out)
    }

    pub fn apply_row(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_columns() {
            return Err(Error::Dimension {
                expected: self.n_columns(),
                got: x.len(),
            });
        }
        let mut v = x.to_vec();
        self.apply_in_place(&mut v);
        Ok(v)
    }

    fn apply_in_place(&self, x: &mut [f64]) {
        for ((v, m), s) in x.iter_mut().zip(&self.mean).zip(&self.sd) {
            *v = (*v - m) / s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn hand_values() {
        let p = StandardizationParams::fit(array![[1.0], [3.0]].view()).unwrap();
        assert_eq!(p.mean, vec![2.0]);
        assert_eq!(p.sd, vec![1.0]);
        assert_eq!(p.apply_row(&[3.0]).unwrap(), vec![1.0]);
        assert_eq!(p.apply_row(&[2.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn constant_column_maps_to_zero() {
        let p = StandardizationParams::fit(array![[5.0, 0.1], [5.0, 0.1], [5.0, 0.1]].view())
            .unwrap();
        assert_eq!(p.sd, vec![1.0, 1.0]);
        let z = p.apply(array![[5.0, 0.1]].view()).unwrap();
        assert!(z.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn errors() {
        assert!(StandardizationParams::fit(array![[1.0, 2.0]].view()).is_err());
        let p = StandardizationParams::fit(array![[1.0, 2.0], [2.0, 3.0]].view()).unwrap();
        assert!(matches!(
            p.apply(array![[1.0]].view()),
            Err(Error::Dimension { expected: 2, got: 1 })
        ));
    }

    fn matrix() -> impl Strategy<Value = Array2<f64>> {
        (2usize..60).prop_flat_map(|n| {
            proptest::collection::vec(-1e4f64..1e4, n * 13)
                .prop_map(move |v| Array2::from_shape_vec((n, 13), v).unwrap())
        })
    }

    proptest! {
        #[test]
        fn round_trip_is_zscore(x in matrix()) {
            let p = StandardizationParams::fit(x.view()).unwrap();
            let z = p.apply(x.view()).unwrap();
            let refit = StandardizationParams::fit(z.view()).unwrap();
            for j in 0..13 {
                prop_assert!(refit.mean[j].abs() < 1e-9);
                prop_assert!((refit.sd[j] - 1.0).abs() < 1e-9);
            }
        }

        #[test]
        fn preserves_column_order(x in matrix()) {
            let p = StandardizationParams::fit(x.view()).unwrap();
            let z = p.apply(x.view()).unwrap();
            for j in 0..13 {
                for a in 0..x.nrows() {
                    for b in 0..x.nrows() {
                        if x[[a, j]] < x[[b, j]] {
                            prop_assert!(z[[a, j]] <= z[[b, j]]);
                        }
                    }
                }
            }
        }
    }
}
