//! Command-line front end: `grid`, `cell` and `scatter`.

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::impute::{MatchType, Method};
use crate::missingness::{Mechanism, DEFAULT_MISS_PROB, DEFAULT_THRESHOLD};
use crate::report::{self, Format};
use crate::scatter::scatter;
use crate::simulator::{run_cell, run_grid, Condition, ExperimentCell, GridConfig};

pub const OUTPUT_DIR_ENV: &str = "PMMLAB_OUT";

/// Exit status for a rejected configuration (also used by argument parsing).
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for failures after validation (I/O, numerical).
pub const EXIT_RUNTIME: i32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "pmmlab",
    version,
    about = "Regression vs predictive-mean-matching imputation under MAR and MCAR"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the full method × correlation × mechanism × n grid.
    Grid(RunArgs),
    /// Run one experimental cell.
    Cell(RunArgs),
    /// Emit plot-ready points for one singly-imputed dataset.
    Scatter(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MechanismArg {
    Mar,
    Mcar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Regression,
    Pmm,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Regression => Method::Regression,
            MethodArg::Pmm => Method::Pmm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long, default_value_t = 20240601)]
    pub seed: u64,
    /// Replicates per cell.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Imputations per replicate.
    #[arg(long)]
    pub m: Option<usize>,
    /// PMM donor pool size.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub rho: Option<f64>,
    #[arg(long, value_enum)]
    pub mechanism: Option<MechanismArg>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// 0: donors and recipients scored by OLS; 1: recipients by the
    /// posterior draw; 2: both by the draw.
    #[arg(long = "match-type", default_value_t = 2)]
    pub match_type: u8,
    /// MAR deletes y whenever x exceeds this value.
    #[arg(long = "mar-threshold", default_value_t = DEFAULT_THRESHOLD, allow_negative_numbers = true)]
    pub mar_threshold: f64,
    /// MCAR deletion probability.
    #[arg(long = "mcar-prob", default_value_t = DEFAULT_MISS_PROB)]
    pub mcar_prob: f64,
    #[arg(long, env = OUTPUT_DIR_ENV, default_value = "pmmlab-out")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug)]
pub enum CliError {
    Config(Error),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "invalid configuration: {e}"),
            CliError::Runtime(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

fn runtime(e: impl fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

impl RunArgs {
    fn format(&self) -> Format {
        match self.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }

    fn mechanism(&self, kind: MechanismArg) -> Result<Mechanism, Error> {
        match kind {
            MechanismArg::Mar => Mechanism::mar(self.mar_threshold),
            MechanismArg::Mcar => Mechanism::mcar(self.mcar_prob),
        }
    }

    fn grid_config(&self) -> Result<GridConfig, Error> {
        let mut config = GridConfig {
            match_type: MatchType::from_index(self.match_type)?,
            mechanisms: vec![
                Mechanism::mar(self.mar_threshold)?,
                Mechanism::mcar(self.mcar_prob)?,
            ],
            ..GridConfig::default()
        };
        if let Some(kind) = self.mechanism {
            config.mechanisms = vec![self.mechanism(kind)?];
        }
        if let Some(reps) = self.reps {
            config.reps = reps;
        }
        if let Some(m) = self.m {
            config.m_imputations = m;
        }
        if let Some(k) = self.k {
            config.donor_k = k;
        }
        if let Some(rho) = self.rho {
            config.rhos = vec![rho];
        }
        if let Some(n) = self.n {
            config.ns = vec![n];
        }
        if let Some(method) = self.method {
            config.methods = vec![method.into()];
        }
        Ok(config)
    }

    fn condition(&self) -> Result<Condition, Error> {
        let condition = Condition {
            rho: self.rho.unwrap_or(0.8),
            mechanism: self.mechanism(self.mechanism.unwrap_or(MechanismArg::Mar))?,
            n: self.n.unwrap_or(200),
        };
        condition.validate()?;
        Ok(condition)
    }

    fn cell(&self) -> Result<ExperimentCell, Error> {
        let grid = self.grid_config()?;
        let cell = ExperimentCell {
            condition: self.condition()?,
            method: self.method.map(Method::from).unwrap_or(Method::Pmm),
            match_type: grid.match_type,
            reps: grid.reps,
            m_imputations: grid.m_imputations,
            donor_k: grid.donor_k,
            seed: self.seed,
        };
        cell.validate()?;
        Ok(cell)
    }
}

enum Plan {
    Grid(GridConfig),
    Cell(ExperimentCell),
    Scatter {
        condition: Condition,
        donor_k: usize,
        match_type: MatchType,
    },
}

fn plan(command: &Command) -> Result<(Plan, &RunArgs), CliError> {
    let plan = match command {
        Command::Grid(args) => {
            let config = args.grid_config().map_err(CliError::Config)?;
            config.cells(args.seed).map_err(CliError::Config)?;
            (Plan::Grid(config), args)
        }
        Command::Cell(args) => (Plan::Cell(args.cell().map_err(CliError::Config)?), args),
        Command::Scatter(args) => {
            let condition = args.condition().map_err(CliError::Config)?;
            let donor_k = args.k.unwrap_or(crate::impute::DEFAULT_DONORS);
            if donor_k == 0 {
                return Err(CliError::Config(crate::error::invalid(
                    "donor pool size must be at least 1",
                )));
            }
            let match_type = MatchType::from_index(args.match_type).map_err(CliError::Config)?;
            (
                Plan::Scatter {
                    condition,
                    donor_k,
                    match_type,
                },
                args,
            )
        }
    };
    if plan.1.threads == Some(0) {
        return Err(CliError::Config(crate::error::invalid(
            "--threads must be at least 1",
        )));
    }
    Ok(plan)
}

/// Validate, then run. Nothing is written unless validation passes.
pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let (plan, args) = plan(&cli.command)?;
    report::ensure_writable(&args.out)
        .map_err(|e| runtime(format!("output directory {}: {e}", args.out.display())))?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(threads) = args.threads {
        pool = pool.num_threads(threads);
    }
    let pool = pool.build().map_err(runtime)?;
    let format = args.format();

    pool.install(|| match plan {
        Plan::Grid(config) => {
            let runs = run_grid(args.seed, &config).map_err(runtime)?;
            report::write_runs(&args.out, "summary", &runs, format).map_err(runtime)
        }
        Plan::Cell(cell) => {
            let run = run_cell(&cell).map_err(runtime)?;
            report::write_runs(&args.out, "cell", std::slice::from_ref(&run), format)
                .map_err(runtime)
        }
        Plan::Scatter {
            condition,
            donor_k,
            match_type,
        } => {
            let data = scatter(&condition, args.seed, donor_k, match_type).map_err(runtime)?;
            report::write_scatter(&args.out, &data.points(), format).map_err(runtime)
        }
    })
}
