//! `sisx`: batch twin of the analysis service.
//!
//! Every JSON-emitting subcommand prints the same canonical body the
//! corresponding endpoint returns for the same input. Exit status is 0 on
//! success, 1 for usage and validation errors, 2 for I/O errors.

mod commands;

use std::io::IsTerminal;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ColorChoice, CommandFactory, FromArgMatches, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "sisx", version, about = "Explore SIS affiliate exports from the command line")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Input file and optional output file shared by the data subcommands.
#[derive(Debug, clap::Args)]
pub struct Io {
    /// Semicolon- or comma-separated export
    #[arg(short, long)]
    pub input: PathBuf,
    /// Write here instead of standard output
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Finite-population sample size for estimating a proportion
    SampleSize {
        #[arg(long)]
        population: u64,
        #[arg(long, default_value_t = 0.95)]
        confidence: f64,
        #[arg(long, default_value_t = 0.05)]
        margin: f64,
        #[arg(long, default_value_t = 0.5)]
        proportion: f64,
        /// Print the JSON body instead of the two-line summary
        #[arg(long)]
        json: bool,
    },
    /// Ingest a file and report kept and rejected rows
    Ingest {
        #[command(flatten)]
        io: Io,
    },
    /// Column kinds and levels of the cleaned dataset
    Info {
        #[command(flatten)]
        io: Io,
    },
    /// A page of cleaned rows
    Rows {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 0)]
        offset: usize,
        #[arg(long, default_value_t = 100)]
        limit: usize,
    },
    /// Seeded simple random sample without replacement, written as CSV
    Sample {
        #[command(flatten)]
        io: Io,
        #[arg(short, long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Column summaries, or one column's level distribution
    Summary {
        #[command(flatten)]
        io: Io,
        /// Report the distribution of this column instead
        #[arg(long, value_name = "COLUMN")]
        distribution: Option<String>,
    },
    /// Keep the rows matching every clause
    Filter {
        #[command(flatten)]
        io: Io,
        /// Filter spec as JSON, or @path to a JSON file
        #[arg(long)]
        spec: Option<String>,
        /// Clause COLUMN=VALUE; repeatable
        #[arg(long = "equals", value_name = "COLUMN=VALUE")]
        equals: Vec<String>,
        /// Inclusive integer range COLUMN=MIN..MAX; either end may be empty
        #[arg(long = "range", value_name = "COLUMN=MIN..MAX")]
        range: Vec<String>,
        /// Also write the filtered rows as CSV
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
    },
    /// Fit the linear model and print the coefficient table
    Fit {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        response: Option<String>,
        /// Comma-separated predictor columns
        #[arg(long, value_delimiter = ',')]
        predictors: Option<Vec<String>>,
        #[arg(long)]
        no_intercept: bool,
        /// Include residuals and fitted values in the JSON
        #[arg(long)]
        verbose: bool,
    },
    /// Gaussian kernel density of a numeric column
    Density {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        variable: String,
        /// Weight each row by its affiliate count
        #[arg(long)]
        weighted: bool,
        #[arg(long)]
        bandwidth: Option<f64>,
    },
    /// Affiliate totals per department with map coordinates
    Regions {
        #[command(flatten)]
        io: Io,
        /// JSON array of {region, lat, lon}; the built-in table otherwise
        #[arg(long)]
        centroids: Option<PathBuf>,
    },
    /// Pearson correlations between columns
    Correlation {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_delimiter = ',', default_values_t = ["AGE".to_string(), "TOTAL_AFFILIATES".to_string()])]
        variables: Vec<String>,
    },
    /// Subsampled 3-D scatter with a fitted plane
    Scatter3d {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value = "AGE")]
        x: String,
        #[arg(long, default_value = "INSURANCE_PLAN")]
        y: String,
        #[arg(long, default_value = "TOTAL_AFFILIATES")]
        z: String,
        #[arg(long, default_value_t = sisx_service::handlers::DEFAULT_SCATTER_POINTS)]
        max_points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the HTTP service; SISX_* variables configure it, flags override
    Serve {
        #[arg(long)]
        bind: Option<std::net::IpAddr>,
        #[arg(long)]
        port: Option<u16>,
        #[arg(long)]
        ui_dir: Option<PathBuf>,
    },
}

/// Failure kinds mapped to exit codes.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Engine(sisx_core::Error),
    Io(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Engine(_) => 1,
            Failure::Io(_) => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Io(m) => f.write_str(m),
            Failure::Engine(e) => write!(f, "{e}"),
        }
    }
}

impl From<sisx_core::Error> for Failure {
    fn from(e: sisx_core::Error) -> Self {
        Failure::Engine(e)
    }
}

fn no_color() -> bool {
    std::env::var_os("NO_COLOR").is_some_and(|v| !v.is_empty())
}

fn main() -> ExitCode {
    let color = if no_color() { ColorChoice::Never } else { ColorChoice::Auto };
    let matches = Cli::command().color(color).try_get_matches();
    let cli = match matches.map(|m| Cli::from_arg_matches(&m)) {
        Ok(Ok(cli)) => cli,
        Ok(Err(e)) | Err(e) => {
            let _ = e.print();
            // help and version are not failures
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let color = !no_color() && std::io::stderr().is_terminal();
            let label = if color { "\x1b[31merror\x1b[0m" } else { "error" };
            eprintln!("{label}: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
