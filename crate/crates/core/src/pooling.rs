//! Combining per-imputation estimates with Rubin's rules.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::impute::ImputedDataset;
use crate::numeric::{mean, sample_variance, student_t_quantile};
use crate::ols::ols_fit;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerImputationEstimate {
    pub estimate: f64,
    /// Complete-data standard error.
    pub se: f64,
    /// Degrees of freedom the estimate would have without missing data.
    pub dof_complete: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PooledEstimate {
    pub point: f64,
    /// W: mean squared complete-data standard error.
    pub within_var: f64,
    /// B: sample variance (divisor M − 1) of the point estimates.
    pub between_var: f64,
    /// T = W + (1 + 1/M)·B.
    pub total_var: f64,
    pub se: f64,
    pub dof: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
    pub m: usize,
}

impl PooledEstimate {
    pub fn ci_width(&self) -> f64 {
        self.ci_high - self.ci_low
    }

    pub fn covers(&self, truth: f64) -> bool {
        self.ci_low <= truth && truth <= self.ci_high
    }
}

pub fn pool(estimates: &[PerImputationEstimate], level: f64) -> Result<PooledEstimate> {
    let m = estimates.len();
    if m < 2 {
        return Err(invalid("pooling needs at least 2 imputations"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(invalid(format!("confidence level {level} outside (0, 1)")));
    }
    let dof_complete = estimates[0].dof_complete;
    if estimates.iter().any(|e| e.dof_complete != dof_complete) {
        return Err(invalid(
            "complete-data degrees of freedom differ across imputations",
        ));
    }
    if estimates.iter().any(|e| e.se.is_nan() || e.se < 0.0) {
        return Err(invalid("standard errors must be non-negative"));
    }

    let points: Vec<f64> = estimates.iter().map(|e| e.estimate).collect();
    let squared_se: Vec<f64> = estimates.iter().map(|e| e.se * e.se).collect();
    let point = mean(&points);
    let within_var = mean(&squared_se);
    let between_var = sample_variance(&points);
    let total_var = within_var + (1.0 + 1.0 / m as f64) * between_var;
    let dof = barnard_rubin_dof(within_var, between_var, m, dof_complete)?;

    let se = total_var.sqrt();
    let half_width = if dof > 0.0 {
        student_t_quantile(0.5 * (1.0 + level), dof) * se
    } else {
        f64::INFINITY
    };
    Ok(PooledEstimate {
        point,
        within_var,
        between_var,
        total_var,
        se,
        dof,
        ci_low: point - half_width,
        ci_high: point + half_width,
        level,
        m,
    })
}

/// Small-sample degrees of freedom for the pooled t interval (Barnard & Rubin,
/// 1999). Never exceeds `dof_complete` and grows with `m`.
pub fn barnard_rubin_dof(within: f64, between: f64, m: usize, dof_complete: usize) -> Result<f64> {
    if m < 2 {
        return Err(invalid("at least 2 imputations required"));
    }
    if dof_complete < 1 {
        return Err(invalid(
            "complete-data degrees of freedom must be at least 1",
        ));
    }
    if !(within >= 0.0 && between >= 0.0) {
        return Err(invalid("variance components must be non-negative"));
    }
    let inflation = 1.0 + 1.0 / m as f64;
    let total = within + inflation * between;
    if total == 0.0 {
        return Err(Error::UndefinedVariance);
    }
    let r = inflation * between / total;
    let com = dof_complete as f64;
    let observed = com * (com + 1.0) / (com + 3.0) * (1.0 - r);
    if between == 0.0 {
        return Ok(observed);
    }
    if observed <= 0.0 {
        return Ok(0.0);
    }
    let large = (m as f64 - 1.0) / (r * r);
    Ok(1.0 / (1.0 / large + 1.0 / observed))
}

/// Complete-data analyses of one imputed dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompletedAnalysis {
    pub slope: PerImputationEstimate,
    pub intercept: PerImputationEstimate,
    pub y_mean: PerImputationEstimate,
    /// Sample SD of `y` (divisor n − 1); descriptive only, no standard error.
    pub y_sd: f64,
}

/// Regress `y` on `x` and summarize `y` in a completed dataset.
pub fn analyze_completed(imputed: &ImputedDataset) -> Result<CompletedAnalysis> {
    if imputed.y.iter().any(|v| !v.is_finite()) {
        return Err(invalid("completed dataset still has missing outcomes"));
    }
    let fit = ols_fit(&imputed.x, &imputed.y)?;
    let n = imputed.n();
    let y_sd = sample_variance(&imputed.y).sqrt();
    Ok(CompletedAnalysis {
        slope: PerImputationEstimate {
            estimate: fit.slope,
            se: fit.slope_se(),
            dof_complete: fit.dof,
        },
        intercept: PerImputationEstimate {
            estimate: fit.intercept,
            se: fit.intercept_se(),
            dof_complete: fit.dof,
        },
        y_mean: PerImputationEstimate {
            estimate: mean(&imputed.y),
            se: y_sd / (n as f64).sqrt(),
            dof_complete: n - 1,
        },
        y_sd,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn est(estimate: f64, se: f64, dof_complete: usize) -> PerImputationEstimate {
        PerImputationEstimate {
            estimate,
            se,
            dof_complete,
        }
    }

    #[test]
    fn zero_between_variance() {
        let p = pool(&[est(1.0, 0.5, 100); 3], 0.95).unwrap();
        assert_eq!(p.point, 1.0);
        assert_eq!(p.within_var, 0.25);
        assert_eq!(p.between_var, 0.0);
        assert_eq!(p.total_var, 0.25);
        assert_eq!(p.se, 0.5);
        assert_eq!(p.m, 3);
    }

    #[test]
    fn two_imputations_by_hand() {
        let p = pool(&[est(0.0, 1.0, 50), est(2.0, 1.0, 50)], 0.95).unwrap();
        assert_eq!(p.point, 1.0);
        assert_eq!(p.within_var, 1.0);
        assert_eq!(p.between_var, 2.0);
        assert_eq!(p.total_var, 4.0);
        assert_eq!(p.se, 2.0);
    }

    #[test]
    fn rejects_single_imputation_and_mixed_dof() {
        assert!(pool(&[est(1.0, 1.0, 10)], 0.95).is_err());
        assert!(pool(&[est(1.0, 1.0, 10), est(1.0, 1.0, 11)], 0.95).is_err());
        assert!(pool(&[est(1.0, 1.0, 10), est(1.0, 1.0, 10)], 1.0).is_err());
    }

    #[test]
    fn dof_without_between_variance() {
        let nu = barnard_rubin_dof(1.0, 0.0, 10, 198).unwrap();
        assert!((nu - 198.0 * 199.0 / 201.0).abs() < 1e-12);
        assert!((nu - 196.029_850_746_268_66).abs() < 1e-9);
    }

    #[test]
    fn dof_undefined_without_variance() {
        assert_eq!(
            barnard_rubin_dof(0.0, 0.0, 5, 10),
            Err(Error::UndefinedVariance)
        );
    }

    #[test]
    fn dof_all_between_variance_is_zero() {
        assert_eq!(barnard_rubin_dof(0.0, 1.0, 5, 10).unwrap(), 0.0);
        let p = pool(&[est(0.0, 0.0, 10), est(1.0, 0.0, 10)], 0.95).unwrap();
        assert_eq!(p.dof, 0.0);
        assert!(p.ci_low == f64::NEG_INFINITY && p.ci_high == f64::INFINITY);
    }

    #[test]
    fn analyze_exact_line() {
        let imp = ImputedDataset {
            x: vec![1.0, 2.0, 3.0],
            y: vec![2.0, 3.0, 4.0],
            was_imputed: vec![false; 3],
        };
        let a = analyze_completed(&imp).unwrap();
        assert!((a.slope.estimate - 1.0).abs() < 1e-15);
        assert_eq!(a.slope.se, 0.0);
        assert_eq!(a.slope.dof_complete, 1);
        assert_eq!(a.y_mean.estimate, 3.0);
        assert_eq!(a.y_sd, 1.0);
    }

    #[test]
    fn analyze_constant_y() {
        let imp = ImputedDataset {
            x: vec![1.0, 2.0, 3.0, 4.0],
            y: vec![7.0; 4],
            was_imputed: vec![false; 4],
        };
        let a = analyze_completed(&imp).unwrap();
        assert_eq!(a.slope.estimate, 0.0);
        assert_eq!(a.y_sd, 0.0);
    }

    #[test]
    fn analyze_rejects_constant_x() {
        let imp = ImputedDataset {
            x: vec![1.0; 3],
            y: vec![1.0, 2.0, 3.0],
            was_imputed: vec![false; 3],
        };
        assert!(matches!(
            analyze_completed(&imp),
            Err(Error::DegenerateDesign(_))
        ));
    }
}
