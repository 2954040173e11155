//! Single-imputation point sets for the four scatter panels: complete data,
//! observed after deletion, regression-imputed, and PMM-imputed.

use serde::Serialize;

use crate::error::Result;
use crate::impute::StreamFamily;
use crate::impute::{impute_once, ImputedDataset, ImputerConfig, MatchType, Method};
use crate::ols::ols_observed;
use crate::pooling::analyze_completed;
use crate::rng::stream_id;
use crate::simulator::{replicate_data, Condition, ReplicateData};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    Observed,
    DeletedTruth,
    ImputedRegression,
    ImputedPmm,
}

impl PointStatus {
    pub fn label(&self) -> &'static str {
        match self {
            PointStatus::Observed => "observed",
            PointStatus::DeletedTruth => "deleted_truth",
            PointStatus::ImputedRegression => "imputed_regression",
            PointStatus::ImputedPmm => "imputed_pmm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatterPoint {
    pub x: f64,
    pub y: f64,
    pub status: PointStatus,
}

#[derive(Debug, Clone)]
pub struct ScatterData {
    pub data: ReplicateData,
    pub regression: ImputedDataset,
    pub pmm: ImputedDataset,
}

/// Slope, mean and SD of `y` in one completed dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompletedSummary {
    pub slope: f64,
    pub y_mean: f64,
    pub y_sd: f64,
}

impl ScatterData {
    pub fn points(&self) -> Vec<ScatterPoint> {
        let mut points =
            Vec::with_capacity(self.data.complete.n() + 2 * self.data.incomplete.missing_count());
        let truth = self.data.complete.y();
        for (i, (&x, y)) in self
            .data
            .incomplete
            .x()
            .iter()
            .zip(self.data.incomplete.y())
            .enumerate()
        {
            let (y, status) = match y {
                Some(v) => (*v, PointStatus::Observed),
                None => (truth[i].expect("complete data"), PointStatus::DeletedTruth),
            };
            points.push(ScatterPoint { x, y, status });
        }
        for (imputed, status) in [
            (&self.regression, PointStatus::ImputedRegression),
            (&self.pmm, PointStatus::ImputedPmm),
        ] {
            for i in (0..imputed.n()).filter(|&i| imputed.was_imputed[i]) {
                points.push(ScatterPoint {
                    x: imputed.x[i],
                    y: imputed.y[i],
                    status,
                });
            }
        }
        points
    }

    pub fn summary(&self, method: Method) -> Result<CompletedSummary> {
        let imputed = match method {
            Method::Regression => &self.regression,
            Method::Pmm => &self.pmm,
        };
        let a = analyze_completed(imputed)?;
        Ok(CompletedSummary {
            slope: a.slope.estimate,
            y_mean: a.y_mean.estimate,
            y_sd: a.y_sd,
        })
    }
}

/// Draw one dataset for `condition` (replicate 0 of `seed`) and impute it
/// once with each method. Both methods start from the same substream.
pub fn scatter(
    condition: &Condition,
    seed: u64,
    donor_k: usize,
    match_type: MatchType,
) -> Result<ScatterData> {
    condition.validate()?;
    let pmm_cfg = ImputerConfig::pmm(donor_k).with_match_type(match_type);
    let data = replicate_data(condition, seed, 0, &pmm_cfg)?;
    let fit = ols_observed(&data.incomplete)?;
    let family = StreamFamily::new(seed, stream_id(&[seed, data.attempt as u64, 0x5CA7]));
    let regression = impute_once(
        &data.incomplete,
        &fit,
        &ImputerConfig::regression(),
        &mut family.member(0),
    )?;
    let pmm = impute_once(&data.incomplete, &fit, &pmm_cfg, &mut family.member(0))?;
    Ok(ScatterData {
        data,
        regression,
        pmm,
    })
}
