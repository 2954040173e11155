//! Factorial Monte Carlo experiment: generate, ampute, multiply impute,
//! analyze, pool, and score each replicate, then aggregate per cell.
//!
//! Every random quantity comes from a substream keyed by the condition
//! (rho, mechanism, n), the replicate index, a purpose tag, and the redraw
//! attempt. Method and match type are not part of the key, so the two
//! methods see identical datasets, masks and posterior-draw streams.

use rayon::prelude::*;
use serde::Serialize;

use crate::data::{gen_bivariate_normal, Dataset};
use crate::error::{invalid, Error, Result};
use crate::impute::{
    multiply_impute, ImputerConfig, MatchType, Method, StreamFamily, DEFAULT_DONORS,
};
use crate::missingness::{ampute, missing_fraction, Mechanism};
use crate::numeric::{mean, sample_variance};
use crate::ols::ols_observed;
use crate::pooling::{analyze_completed, pool};
use crate::rng::{make_stream, stream_id};

pub const DEFAULT_REPS: usize = 500;
pub const DEFAULT_IMPUTATIONS: usize = 10;
pub const DEFAULT_LEVEL: f64 = 0.95;
pub const MAX_REDRAWS: u32 = 10;

pub const GRID_RHOS: [f64; 3] = [0.8, 0.4, 0.0];
pub const GRID_NS: [usize; 2] = [200, 1000];

const TAG_DATA: u64 = 1;
const TAG_MASK: u64 = 2;
const TAG_IMPUTE: u64 = 3;

/// One data-generating condition; shared by both methods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Condition {
    pub rho: f64,
    pub mechanism: Mechanism,
    pub n: usize,
}

impl Condition {
    pub fn validate(&self) -> Result<()> {
        if !(-1.0..=1.0).contains(&self.rho) {
            return Err(invalid(format!("correlation {} outside [-1, 1]", self.rho)));
        }
        if self.n < 3 {
            return Err(invalid("sample size must be at least 3"));
        }
        self.mechanism.validate()
    }

    fn key(&self) -> u64 {
        let (kind, param) = match self.mechanism {
            Mechanism::MarThreshold { threshold } => (0, threshold),
            Mechanism::Mcar { miss_prob } => (1, miss_prob),
        };
        stream_id(&[self.rho.to_bits(), kind, param.to_bits(), self.n as u64])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExperimentCell {
    pub condition: Condition,
    pub method: Method,
    pub match_type: MatchType,
    pub reps: usize,
    pub m_imputations: usize,
    pub donor_k: usize,
    pub seed: u64,
}

impl ExperimentCell {
    pub fn new(condition: Condition, method: Method, seed: u64) -> Self {
        Self {
            condition,
            method,
            match_type: MatchType::default(),
            reps: DEFAULT_REPS,
            m_imputations: DEFAULT_IMPUTATIONS,
            donor_k: DEFAULT_DONORS,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.condition.validate()?;
        if self.reps < 1 {
            return Err(invalid("at least one replicate is required"));
        }
        if self.m_imputations < 2 {
            return Err(invalid("at least 2 imputations are required"));
        }
        if self.donor_k < 1 {
            return Err(invalid("donor pool size must be at least 1"));
        }
        Ok(())
    }

    pub fn imputer(&self) -> ImputerConfig {
        ImputerConfig {
            method: self.method,
            donor_k: self.donor_k,
            match_type: self.match_type,
        }
    }

    /// `<method>_<mechanism>_rho<val>_n<val>`
    pub fn id(&self) -> String {
        format!(
            "{}_{}_rho{}_n{}",
            self.method, self.condition.mechanism, self.condition.rho, self.condition.n
        )
    }
}

/// Pooled slope and descriptive summaries for one replicate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReplicateRecord {
    pub rep: usize,
    pub estimate: f64,
    pub se: f64,
    pub dof: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub covered: bool,
    pub y_mean: f64,
    pub y_sd: f64,
    pub missing_fraction: f64,
    pub redraws: u32,
}

/// Complete data and its amputed copy for one replicate, after any redraws.
#[derive(Debug, Clone)]
pub struct ReplicateData {
    pub complete: Dataset,
    pub incomplete: Dataset,
    pub attempt: u32,
}

fn usable(incomplete: &Dataset, imputer: &ImputerConfig) -> bool {
    match ols_observed(incomplete) {
        Ok(fit) => imputer.validate(fit.n_obs).is_ok(),
        Err(_) => false,
    }
}

/// Generate and ampute the data for `(condition, rep)`, redrawing both when
/// the observed cases cannot support the imputation model.
pub fn replicate_data(
    condition: &Condition,
    seed: u64,
    rep: usize,
    imputer: &ImputerConfig,
) -> Result<ReplicateData> {
    let key = condition.key();
    for attempt in 0..=MAX_REDRAWS {
        let ids = |tag| stream_id(&[key, tag, rep as u64, attempt as u64]);
        let complete = gen_bivariate_normal(
            &mut make_stream(seed, ids(TAG_DATA)),
            condition.n,
            condition.rho,
        )?;
        let incomplete = ampute(
            &complete,
            &condition.mechanism,
            &mut make_stream(seed, ids(TAG_MASK)),
        )?;
        if usable(&incomplete, imputer) {
            return Ok(ReplicateData {
                complete,
                incomplete,
                attempt,
            });
        }
    }
    Err(Error::RedrawLimit {
        rep: rep as u64,
        attempts: MAX_REDRAWS,
    })
}

pub fn run_replicate(cell: &ExperimentCell, rep: usize) -> Result<ReplicateRecord> {
    let imputer = cell.imputer();
    let data = replicate_data(&cell.condition, cell.seed, rep, &imputer)?;
    let family = StreamFamily::new(
        cell.seed,
        stream_id(&[
            cell.condition.key(),
            TAG_IMPUTE,
            rep as u64,
            data.attempt as u64,
        ]),
    );
    let completed = multiply_impute(&data.incomplete, &imputer, cell.m_imputations, family)?;

    let mut slopes = Vec::with_capacity(completed.len());
    let mut y_means = Vec::with_capacity(completed.len());
    let mut y_sds = Vec::with_capacity(completed.len());
    for imputed in &completed {
        let analysis = analyze_completed(imputed)?;
        slopes.push(analysis.slope);
        y_means.push(analysis.y_mean.estimate);
        y_sds.push(analysis.y_sd);
    }
    let pooled = pool(&slopes, DEFAULT_LEVEL)?;
    Ok(ReplicateRecord {
        rep,
        estimate: pooled.point,
        se: pooled.se,
        dof: pooled.dof,
        ci_low: pooled.ci_low,
        ci_high: pooled.ci_high,
        covered: pooled.covers(cell.condition.rho),
        y_mean: mean(&y_means),
        y_sd: mean(&y_sds),
        missing_fraction: missing_fraction(&data.incomplete),
        redraws: data.attempt,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellResult {
    pub cell: ExperimentCell,
    pub avg_estimate: f64,
    pub true_slope: f64,
    /// Absent when the true slope is zero.
    pub relative_bias_pct: Option<f64>,
    pub coverage_pct: f64,
    pub avg_ci_width: f64,
    pub avg_y_mean: f64,
    pub avg_y_sd: f64,
    /// Monte Carlo standard error of `avg_estimate`.
    pub estimate_mc_se: f64,
    pub avg_missing_fraction: f64,
    pub redraw_count: u64,
    pub reps_completed: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellRun {
    pub result: CellResult,
    pub records: Vec<ReplicateRecord>,
}

pub fn relative_bias(avg: f64, truth: f64) -> Option<f64> {
    (truth != 0.0).then(|| 100.0 * (avg - truth) / truth)
}

/// Percentage of `(low, high)` intervals containing `truth`.
pub fn coverage(intervals: &[(f64, f64)], truth: f64) -> Result<f64> {
    if intervals.is_empty() {
        return Err(invalid("coverage of an empty set of intervals"));
    }
    if intervals
        .iter()
        .any(|(lo, hi)| lo.is_nan() || hi.is_nan() || lo > hi)
    {
        return Err(invalid("interval with low > high"));
    }
    let hits = intervals
        .iter()
        .filter(|(lo, hi)| *lo <= truth && truth <= *hi)
        .count();
    Ok(100.0 * hits as f64 / intervals.len() as f64)
}

/// Aggregate replicate records (already in replicate order).
pub fn summarize(cell: &ExperimentCell, records: &[ReplicateRecord]) -> Result<CellResult> {
    let truth = cell.condition.rho;
    let estimates: Vec<f64> = records.iter().map(|r| r.estimate).collect();
    let intervals: Vec<(f64, f64)> = records.iter().map(|r| (r.ci_low, r.ci_high)).collect();
    let widths: Vec<f64> = intervals.iter().map(|(lo, hi)| hi - lo).collect();
    let avg_estimate = mean(&estimates);
    let reps = records.len();
    let estimate_mc_se = if reps > 1 {
        (sample_variance(&estimates) / reps as f64).sqrt()
    } else {
        f64::NAN
    };
    Ok(CellResult {
        cell: *cell,
        avg_estimate,
        true_slope: truth,
        relative_bias_pct: relative_bias(avg_estimate, truth),
        coverage_pct: coverage(&intervals, truth)?,
        avg_ci_width: mean(&widths),
        avg_y_mean: mean(&records.iter().map(|r| r.y_mean).collect::<Vec<_>>()),
        avg_y_sd: mean(&records.iter().map(|r| r.y_sd).collect::<Vec<_>>()),
        estimate_mc_se,
        avg_missing_fraction: mean(
            &records
                .iter()
                .map(|r| r.missing_fraction)
                .collect::<Vec<_>>(),
        ),
        redraw_count: records.iter().map(|r| r.redraws as u64).sum(),
        reps_completed: reps,
    })
}

/// Run every replicate of a cell (in parallel) and aggregate in replicate
/// order, so the result does not depend on the worker count.
pub fn run_cell(cell: &ExperimentCell) -> Result<CellRun> {
    cell.validate()?;
    let records = (0..cell.reps)
        .into_par_iter()
        .map(|rep| run_replicate(cell, rep))
        .collect::<Result<Vec<_>>>()?;
    let result = summarize(cell, &records)?;
    Ok(CellRun { result, records })
}

/// Settings shared by every cell of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub reps: usize,
    pub m_imputations: usize,
    pub donor_k: usize,
    pub match_type: MatchType,
    pub mechanisms: Vec<Mechanism>,
    pub rhos: Vec<f64>,
    pub ns: Vec<usize>,
    pub methods: Vec<Method>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            reps: DEFAULT_REPS,
            m_imputations: DEFAULT_IMPUTATIONS,
            donor_k: DEFAULT_DONORS,
            match_type: MatchType::default(),
            mechanisms: vec![Mechanism::default_mar(), Mechanism::default_mcar()],
            rhos: GRID_RHOS.to_vec(),
            ns: GRID_NS.to_vec(),
            methods: Method::ALL.to_vec(),
        }
    }
}

impl GridConfig {
    /// Cells in table order: method, mechanism, rho, n.
    pub fn cells(&self, master_seed: u64) -> Result<Vec<ExperimentCell>> {
        let mut cells = Vec::new();
        for &method in &self.methods {
            for &mechanism in &self.mechanisms {
                for &rho in &self.rhos {
                    for &n in &self.ns {
                        let cell = ExperimentCell {
                            condition: Condition { rho, mechanism, n },
                            method,
                            match_type: self.match_type,
                            reps: self.reps,
                            m_imputations: self.m_imputations,
                            donor_k: self.donor_k,
                            seed: master_seed,
                        };
                        cell.validate()?;
                        cells.push(cell);
                    }
                }
            }
        }
        Ok(cells)
    }
}

pub fn run_grid(master_seed: u64, config: &GridConfig) -> Result<Vec<CellRun>> {
    let cells = config.cells(master_seed)?;
    cells.par_iter().map(run_cell).collect()
}
