//! Dense direct solves for the collocation systems.

use nalgebra::{DMatrix, DVector, LU, Dyn};

use crate::error::{Error, Result};

/// An LU factorization with partial pivoting plus a cheap conditioning estimate.
#[derive(Debug, Clone)]
pub struct DenseLu {
    lu: LU<f64, Dyn, Dyn>,
    /// Ratio of the largest to the smallest pivot magnitude.
    pub condition_estimate: f64,
}

impl DenseLu {
    pub fn factor(matrix: DMatrix<f64>, what: &'static str) -> Result<Self> {
        let lu = matrix.lu();
        let u = lu.u();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..u.nrows() {
            let p = u[(i, i)].abs();
            lo = lo.min(p);
            hi = hi.max(p);
        }
        let condition_estimate = hi / lo;
        if !(lo > 0.0) || !condition_estimate.is_finite() || condition_estimate > 1e15 {
            return Err(Error::Singular {
                what,
                condition: condition_estimate,
            });
        }
        log::debug!("{what}: pivot ratio {condition_estimate:.3e}");
        Ok(Self {
            lu,
            condition_estimate,
        })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let b = DVector::from_column_slice(rhs);
        self.lu
            .solve(&b)
            .expect("factorization checked for singular pivots")
            .as_slice()
            .to_vec()
    }
}
