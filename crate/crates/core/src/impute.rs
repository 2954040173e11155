//! Proper regression imputation and predictive mean matching.
//!
//! Each imputation draws `(a_m, b_m, s_m²)` from the noninformative-prior
//! posterior of the observed-case regression, then either adds normal noise
//! to `a_m + b_m·x` or borrows the outcome of an observed donor whose
//! predicted mean is among the `k` closest to the recipient's.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::data::Dataset;
use crate::error::{invalid, Error, Result};
use crate::ols::{ols_observed, OlsFit};
use crate::rng::{make_stream, stream_id, RngStream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PosteriorDraw {
    pub intercept: f64,
    pub slope: f64,
    pub sigma2: f64,
}

impl PosteriorDraw {
    pub fn predict(&self, x: f64) -> f64 {
        predict(self, x)
    }

    /// True when the draw collapsed onto the OLS point estimates because the
    /// observed cases lie exactly on a line.
    pub fn is_point_mass(&self) -> bool {
        self.sigma2 == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Regression,
    Pmm,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Regression, Method::Pmm];

    pub fn label(&self) -> &'static str {
        match self {
            Method::Regression => "regression",
            Method::Pmm => "pmm",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "regression" => Ok(Method::Regression),
            "pmm" => Ok(Method::Pmm),
            other => Err(invalid(format!("unknown imputation method `{other}`"))),
        }
    }
}

/// Which coefficients score donors and recipients when computing predicted
/// means for matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
pub enum MatchType {
    /// Both scored with the OLS estimates.
    Type0,
    /// Donors with OLS, recipients with the posterior draw.
    Type1,
    /// Both scored with the posterior draw. With a single predictor and a
    /// nonzero drawn slope this ranks donors by distance in `x`.
    #[default]
    Type2,
}

impl MatchType {
    pub const ALL: [MatchType; 3] = [MatchType::Type0, MatchType::Type1, MatchType::Type2];

    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            0 => Ok(MatchType::Type0),
            1 => Ok(MatchType::Type1),
            2 => Ok(MatchType::Type2),
            _ => Err(invalid(format!("match type must be 0, 1 or 2, got {i}"))),
        }
    }

    pub fn index(&self) -> u8 {
        match self {
            MatchType::Type0 => 0,
            MatchType::Type1 => 1,
            MatchType::Type2 => 2,
        }
    }
}

pub const DEFAULT_DONORS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImputerConfig {
    pub method: Method,
    pub donor_k: usize,
    pub match_type: MatchType,
}

impl ImputerConfig {
    pub fn regression() -> Self {
        Self {
            method: Method::Regression,
            donor_k: DEFAULT_DONORS,
            match_type: MatchType::default(),
        }
    }

    pub fn pmm(donor_k: usize) -> Self {
        Self {
            method: Method::Pmm,
            donor_k,
            match_type: MatchType::default(),
        }
    }

    pub fn with_match_type(mut self, match_type: MatchType) -> Self {
        self.match_type = match_type;
        self
    }

    pub fn validate(&self, n_observed: usize) -> Result<()> {
        if self.donor_k == 0 {
            return Err(invalid("donor pool size must be at least 1"));
        }
        if self.method == Method::Pmm && self.donor_k > n_observed {
            return Err(invalid(format!(
                "donor pool size {} exceeds the {} observed cases",
                self.donor_k, n_observed
            )));
        }
        Ok(())
    }
}

/// A completed copy of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImputedDataset {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub was_imputed: Vec<bool>,
}

impl ImputedDataset {
    fn start(data: &Dataset) -> Self {
        Self {
            x: data.x().to_vec(),
            y: data.y().iter().map(|v| v.unwrap_or(f64::NAN)).collect(),
            was_imputed: data.y().iter().map(Option::is_none).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn imputed_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.y
            .iter()
            .zip(&self.was_imputed)
            .filter(|(_, &w)| w)
            .map(|(&y, _)| y)
    }
}

/// Draw regression parameters from their posterior under a flat prior on the
/// coefficients and `p(σ²) ∝ 1/σ²`:
/// `σ²_m = s²·dof / g` with `g ~ χ²(dof)`, then
/// `(a_m, b_m) ~ N((â, b̂), σ²_m (XᵀX)⁻¹)`.
pub fn draw_posterior(fit: &OlsFit, stream: &mut RngStream) -> Result<PosteriorDraw> {
    if fit.dof < 1 {
        return Err(Error::DegenerateDesign(
            "posterior needs at least one residual degree of freedom".into(),
        ));
    }
    if fit.residual_variance == 0.0 {
        return Ok(PosteriorDraw {
            intercept: fit.intercept,
            slope: fit.slope,
            sigma2: 0.0,
        });
    }
    let g = stream.chi_squared(fit.dof as u64)?;
    let sigma2 = fit.residual_variance * fit.dof as f64 / g;

    let v = fit.xtx_inverse;
    let l11 = v[0][0].sqrt();
    let l21 = v[1][0] / l11;
    let l22 = (v[1][1] - l21 * l21).max(0.0).sqrt();
    let sigma = sigma2.sqrt();
    let z1 = stream.standard_normal();
    let z2 = stream.standard_normal();
    Ok(PosteriorDraw {
        intercept: fit.intercept + sigma * l11 * z1,
        slope: fit.slope + sigma * (l21 * z1 + l22 * z2),
        sigma2,
    })
}

pub fn predict(draw: &PosteriorDraw, x: f64) -> f64 {
    draw.intercept + draw.slope * x
}

/// Replace each missing `y` with `a_m + b_m·x + e`, `e ~ N(0, σ²_m)`.
pub fn impute_regression(
    data: &Dataset,
    draw: &PosteriorDraw,
    stream: &mut RngStream,
) -> ImputedDataset {
    let mut out = ImputedDataset::start(data);
    let sigma = draw.sigma2.sqrt();
    for i in data.missing_indices() {
        let noise = if sigma > 0.0 {
            sigma * stream.standard_normal()
        } else {
            0.0
        };
        out.y[i] = predict(draw, out.x[i]) + noise;
    }
    out
}

/// Observed predicted means sorted once so each recipient's donor pool is
/// found by binary search plus a `k`-step merge outward.
#[derive(Debug, Clone)]
pub struct DonorIndex {
    /// Sorted predicted means.
    values: Vec<f64>,
    /// Position of each sorted value in the caller's original slice.
    origin: Vec<usize>,
}

impl DonorIndex {
    pub fn new(predicted_observed: &[f64]) -> Result<Self> {
        if predicted_observed.is_empty() {
            return Err(invalid("no observed cases to draw donors from"));
        }
        if predicted_observed.iter().any(|v| v.is_nan()) {
            return Err(invalid("predicted means must not be NaN"));
        }
        let mut origin: Vec<usize> = (0..predicted_observed.len()).collect();
        origin.sort_by(|&a, &b| {
            predicted_observed[a]
                .total_cmp(&predicted_observed[b])
                .then(a.cmp(&b))
        });
        let values = origin.iter().map(|&i| predicted_observed[i]).collect();
        Ok(Self { values, origin })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Indices (into the slice the index was built from, ascending) of the
    /// `k` cases nearest `target`, plus every case tied with the farthest
    /// selected one.
    pub fn donors(&self, target: f64, k: usize) -> Result<Vec<usize>> {
        if k == 0 || k > self.len() {
            return Err(invalid(format!(
                "donor pool size {k} must lie in 1..={}",
                self.len()
            )));
        }
        let n = self.len();
        let split = self.values.partition_point(|&v| v < target);
        // Selected range is values[lo..hi].
        let (mut lo, mut hi) = (split, split);
        let mut radius = 0.0;
        for _ in 0..k {
            let left = (lo > 0).then(|| target - self.values[lo - 1]);
            let right = (hi < n).then(|| self.values[hi] - target);
            match (left, right) {
                (Some(l), Some(r)) if l <= r => {
                    lo -= 1;
                    radius = l;
                }
                (_, Some(r)) => {
                    hi += 1;
                    radius = r;
                }
                (Some(l), None) => {
                    lo -= 1;
                    radius = l;
                }
                (None, None) => unreachable!("k <= len"),
            }
        }
        while lo > 0 && target - self.values[lo - 1] <= radius {
            lo -= 1;
        }
        while hi < n && self.values[hi] - target <= radius {
            hi += 1;
        }
        let mut pool: Vec<usize> = self.origin[lo..hi].to_vec();
        pool.sort_unstable();
        Ok(pool)
    }
}

/// Donor pool for one recipient: the `k` observed cases whose predicted means
/// are closest to `predicted_missing`, widened to include boundary ties.
pub fn pmm_donors(
    predicted_missing: f64,
    predicted_observed: &[f64],
    k: usize,
) -> Result<Vec<usize>> {
    DonorIndex::new(predicted_observed)?.donors(predicted_missing, k)
}

/// Impute each missing `y` with the observed outcome of one donor chosen
/// uniformly from its pool. Donors may be reused across recipients.
pub fn impute_pmm(
    data: &Dataset,
    fit: &OlsFit,
    draw: &PosteriorDraw,
    cfg: &ImputerConfig,
    stream: &mut RngStream,
) -> Result<ImputedDataset> {
    let (observed_x, observed_y): (Vec<f64>, Vec<f64>) =
        data.observed().map(|(_, x, y)| (x, y)).unzip();
    cfg.validate(observed_x.len())?;

    let ols_line = PosteriorDraw {
        intercept: fit.intercept,
        slope: fit.slope,
        sigma2: fit.residual_variance,
    };
    let (donor_line, recipient_line) = match cfg.match_type {
        MatchType::Type0 => (&ols_line, &ols_line),
        MatchType::Type1 => (&ols_line, draw),
        MatchType::Type2 => (draw, draw),
    };
    let donor_scores: Vec<f64> = observed_x.iter().map(|&x| predict(donor_line, x)).collect();
    let index = DonorIndex::new(&donor_scores)?;

    let mut out = ImputedDataset::start(data);
    for i in data.missing_indices() {
        let pool = index.donors(predict(recipient_line, out.x[i]), cfg.donor_k)?;
        let donor = pool[stream.index(pool.len())];
        out.y[i] = observed_y[donor];
    }
    Ok(out)
}

/// One posterior draw followed by one completion with the configured method.
pub fn impute_once(
    data: &Dataset,
    fit: &OlsFit,
    cfg: &ImputerConfig,
    stream: &mut RngStream,
) -> Result<ImputedDataset> {
    let draw = draw_posterior(fit, stream)?;
    match cfg.method {
        Method::Regression => Ok(impute_regression(data, &draw, stream)),
        Method::Pmm => impute_pmm(data, fit, &draw, cfg, stream),
    }
}

/// Seed plus a base key; member `m` gets stream id `stream_id([key, m])`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamFamily {
    pub seed: u64,
    pub key: u64,
}

impl StreamFamily {
    pub fn new(seed: u64, key: u64) -> Self {
        Self { seed, key }
    }

    pub fn member(&self, m: u64) -> RngStream {
        make_stream(self.seed, stream_id(&[self.key, m]))
    }
}

/// `m` completed datasets. The OLS fit on the observed cases is computed once
/// and shared; each copy gets its own posterior draw and substream.
pub fn multiply_impute(
    data: &Dataset,
    cfg: &ImputerConfig,
    m: usize,
    family: StreamFamily,
) -> Result<Vec<ImputedDataset>> {
    if m < 2 {
        return Err(invalid("multiple imputation needs at least 2 imputations"));
    }
    let fit = ols_observed(data)?;
    cfg.validate(fit.n_obs)?;
    (0..m)
        .map(|j| impute_once(data, &fit, cfg, &mut family.member(j as u64)))
        .collect()
}
