//! Closed-form simple linear regression on the observed cases.

use serde::Serialize;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::numeric::{sum, CompensatedSum};

/// Least-squares fit of `y = intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OlsFit {
    pub intercept: f64,
    pub slope: f64,
    /// Unbiased residual variance, `RSS / (n_obs − 2)`.
    pub residual_variance: f64,
    /// `(XᵀX)⁻¹` for the design `[1, x]`, row-major.
    pub xtx_inverse: [[f64; 2]; 2],
    pub n_obs: usize,
    pub dof: usize,
}

impl OlsFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }

    /// Classical standard error of the slope.
    pub fn slope_se(&self) -> f64 {
        (self.residual_variance * self.xtx_inverse[1][1]).sqrt()
    }

    pub fn intercept_se(&self) -> f64 {
        (self.residual_variance * self.xtx_inverse[0][0]).sqrt()
    }
}

/// Fit on the cases whose `y` is observed.
pub fn ols_observed(data: &Dataset) -> Result<OlsFit> {
    let (x, y): (Vec<f64>, Vec<f64>) = data.observed().map(|(_, x, y)| (x, y)).unzip();
    ols_fit(&x, &y)
}

/// Fit on paired slices. Centered sums keep the 2×2 normal equations well
/// conditioned; every sum is compensated and taken in slice order.
pub fn ols_fit(x: &[f64], y: &[f64]) -> Result<OlsFit> {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 3 {
        return Err(Error::DegenerateDesign(format!(
            "{n} observed cases; at least 3 are needed for a residual variance"
        )));
    }
    let nf = n as f64;
    let x_mean = sum(x.iter().copied()) / nf;
    let y_mean = sum(y.iter().copied()) / nf;

    let mut sxx = CompensatedSum::new();
    let mut sxy = CompensatedSum::new();
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - x_mean;
        sxx.add(dx * dx);
        sxy.add(dx * (yi - y_mean));
    }
    let sxx = sxx.total();
    let sxy = sxy.total();
    if sxx.is_nan() || sxx <= 0.0 {
        return Err(Error::DegenerateDesign(
            "observed x values are constant".into(),
        ));
    }

    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let rss = sum(x.iter().zip(y).map(|(&xi, &yi)| {
        let r = yi - intercept - slope * xi;
        r * r
    }));
    let dof = n - 2;
    let off_diagonal = -x_mean / sxx;
    Ok(OlsFit {
        intercept,
        slope,
        residual_variance: rss / dof as f64,
        xtx_inverse: [
            [1.0 / nf + x_mean * x_mean / sxx, off_diagonal],
            [off_diagonal, 1.0 / sxx],
        ],
        n_obs: n,
        dof,
    })
}
