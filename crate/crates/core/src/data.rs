//! Paired predictor/outcome data with missing outcomes, and the bivariate
//! normal generator.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::rng::RngStream;

/// A complete predictor column `x` and an outcome column `y` where `None`
/// marks a missing value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    x: Vec<f64>,
    y: Vec<Option<f64>>,
}

impl Dataset {
    pub fn new(x: Vec<f64>, y: Vec<Option<f64>>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(invalid(format!(
                "x has {} rows but y has {}",
                x.len(),
                y.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(invalid("x must be finite and complete"));
        }
        if y.iter().flatten().any(|v| !v.is_finite()) {
            return Err(invalid("observed y values must be finite"));
        }
        Ok(Self { x, y })
    }

    /// Dataset with every outcome observed.
    pub fn complete(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        Self::new(x, y.into_iter().map(Some).collect())
    }

    pub fn from_points(points: &[(f64, f64)]) -> Result<Self> {
        Self::complete(
            points.iter().map(|p| p.0).collect(),
            points.iter().map(|p| p.1).collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[Option<f64>] {
        &self.y
    }

    pub fn is_missing(&self, i: usize) -> bool {
        self.y[i].is_none()
    }

    pub fn missing_count(&self) -> usize {
        self.y.iter().filter(|v| v.is_none()).count()
    }

    pub fn observed_count(&self) -> usize {
        self.n() - self.missing_count()
    }

    /// `(index, x, y)` for every case with `y` observed, in row order.
    pub fn observed(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        self.x
            .iter()
            .zip(&self.y)
            .enumerate()
            .filter_map(|(i, (&x, y))| y.map(|y| (i, x, y)))
    }

    /// Indices of the missing cases, ascending.
    pub fn missing_indices(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.y[i].is_none()).collect()
    }

    pub(crate) fn with_mask(&self, missing: &[bool]) -> Dataset {
        let y = self
            .y
            .iter()
            .zip(missing)
            .map(|(&v, &m)| if m { None } else { v })
            .collect();
        Dataset {
            x: self.x.clone(),
            y,
        }
    }
}

/// `n` draws of standardized `(X, Y)` with correlation `rho`:
/// `X ~ N(0,1)`, `Y = rho·X + sqrt(1 − rho²)·Z`.
pub fn gen_bivariate_normal(stream: &mut RngStream, n: usize, rho: f64) -> Result<Dataset> {
    if n == 0 {
        return Err(invalid("sample size must be at least 1"));
    }
    if !(-1.0..=1.0).contains(&rho) {
        return Err(invalid(format!("correlation {rho} outside [-1, 1]")));
    }
    let noise_scale = (1.0 - rho * rho).sqrt();
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let xi = stream.standard_normal();
        let zi = stream.standard_normal();
        x.push(xi);
        y.push(Some(rho * xi + noise_scale * zi));
    }
    Ok(Dataset { x, y })
}
