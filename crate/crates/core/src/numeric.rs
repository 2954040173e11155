//! Small numeric helpers shared across modules: compensated summation and
//! Student-t quantiles for real-valued degrees of freedom.

use statrs::distribution::{Continuous, ContinuousCDF, StudentsT};

/// Neumaier (improved Kahan–Babuška) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

pub fn sum(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().collect::<CompensatedSum>().total()
}

/// Arithmetic mean; `NaN` for an empty input.
pub fn mean(values: &[f64]) -> f64 {
    sum(values.iter().copied()) / values.len() as f64
}

/// Sample variance with divisor `len - 1`; `NaN` when fewer than two values.
pub fn sample_variance(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return f64::NAN;
    }
    let m = mean(values);
    sum(values.iter().map(|v| (v - m) * (v - m))) / (values.len() - 1) as f64
}

/// Upper quantile `t` with `P(T <= t) = p` for a central t distribution with
/// `dof` degrees of freedom (any positive real).
///
/// The beta-inversion estimate from `statrs` is refined with Newton steps on
/// the CDF so the result is accurate to roughly 1e-12 relative.
pub fn student_t_quantile(p: f64, dof: f64) -> f64 {
    assert!(
        p > 0.0 && p < 1.0,
        "quantile probability must lie in (0, 1)"
    );
    assert!(dof > 0.0, "degrees of freedom must be positive");
    if p == 0.5 {
        return 0.0;
    }
    if !dof.is_finite() || dof > 1e10 {
        return normal_quantile(p);
    }
    let dist = StudentsT::new(0.0, 1.0, dof).expect("valid t parameters");
    let mut t = dist.inverse_cdf(p);
    if !t.is_finite() {
        t = normal_quantile(p);
    }
    for _ in 0..8 {
        let density = dist.pdf(t);
        if density <= 0.0 || !density.is_finite() {
            break;
        }
        let step = (dist.cdf(t) - p) / density;
        t -= step;
        if step.abs() <= 1e-15 * t.abs().max(1.0) {
            break;
        }
    }
    t
}

fn normal_quantile(p: f64) -> f64 {
    use statrs::distribution::Normal;
    Normal::new(0.0, 1.0)
        .expect("standard normal")
        .inverse_cdf(p)
}
