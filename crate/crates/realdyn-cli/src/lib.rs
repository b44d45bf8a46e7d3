//! Front end for `realdyn`: argument handling, map parsing and output.

pub mod commands;
pub mod config;
pub mod expr;
pub mod output;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use realdyn::ErrorKind;

pub use config::RunConfig;
pub use expr::{parse_expr, parse_map, ParseError};

#[derive(Debug, Parser)]
#[command(name = "realdyn", version, about = "Real entropy of real rational maps")]
pub struct Cli {
    #[command(flatten)]
    pub opts: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalOpts {
    /// Tree depth for lap, preimage and sampling estimates.
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long = "max-iter", global = true)]
    pub max_iter: Option<usize>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, global = true)]
    pub method: Option<MethodArg>,
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Config file; `./realdyn.conf` is read when present.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Lap,
    Preimage,
    Kneading,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CertKind {
    Cantor,
    Circle,
    Parabolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QuotientArg {
    Joukowsky,
    Square,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Real entropy estimate.
    Entropy {
        #[arg(allow_hyphen_values = true)]
        map: String,
        /// Base point for the preimage method.
        #[arg(long, allow_hyphen_values = true)]
        point: Option<f64>,
    },
    /// Algebraic degree d and circle degree s.
    Degree {
        #[arg(allow_hyphen_values = true)]
        map: String,
    },
    /// Kneading coordinates and determinant.
    Kneading {
        #[arg(allow_hyphen_values = true)]
        map: String,
    },
    /// Circle, interval or Cantor real Julia set, for maps of entropy log d.
    Classify {
        #[arg(allow_hyphen_values = true)]
        map: String,
    },
    /// Backward orbit of a repelling point, as CSV.
    JuliaSample {
        #[arg(allow_hyphen_values = true)]
        map: String,
    },
    /// Rotation number of a circle homeomorphism.
    Rotation {
        #[arg(allow_hyphen_values = true)]
        map: String,
    },
    /// Build a maximal-entropy certificate.
    BlaschkeCert {
        #[arg(long, value_enum, default_value = "cantor")]
        kind: CertKind,
        /// Zeros as `re` or `re:im`, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        zeros: Option<String>,
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        theta0: f64,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        orientation: i8,
        /// Numerator of the parabolic form `eps*(z + p/q)`.
        #[arg(long, allow_hyphen_values = true)]
        p: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        q: Option<String>,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        eps: i8,
    },
    /// Quotient of a symmetric map.
    Quotient {
        #[arg(allow_hyphen_values = true)]
        map: String,
        #[arg(long, value_enum, default_value = "joukowsky")]
        mode: QuotientArg,
    },
    /// Entropy over a parameter grid; ranges are `lo:hi:n`, `a,b,c` or a single value.
    FamilySweep {
        family: String,
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        c: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        order: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        degree: Option<String>,
        #[arg(long = "circle-degree", allow_hyphen_values = true)]
        circle_degree: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        delta: Option<String>,
        /// `name=range` for any parameter.
        #[arg(long = "param", allow_hyphen_values = true)]
        params: Vec<String>,
        /// Fail unless max − min of the entropies is below this.
        #[arg(long = "check-constant")]
        check_constant: Option<f64>,
    },
    /// Built-in closed-form checks.
    Verify,
}

/// A failure with its exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_PRECONDITION: i32 = 4;

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    pub fn precondition(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_PRECONDITION,
            message: message.into(),
        }
    }
}

impl From<realdyn::Error> for CliError {
    fn from(e: realdyn::Error) -> Self {
        let code = match e.kind() {
            ErrorKind::Input => EXIT_INPUT,
            ErrorKind::Budget | ErrorKind::Internal => EXIT_BUDGET,
            ErrorKind::Precondition => EXIT_PRECONDITION,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        match e {
            ParseError::Map(inner) => inner.into(),
            e => CliError::input(e.to_string()),
        }
    }
}

impl From<config::ConfigError> for CliError {
    fn from(e: config::ConfigError) -> Self {
        CliError::input(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError {
            code: 1,
            message: e.to_string(),
        }
    }
}

/// File, then environment, then flags.
pub fn resolve_config(opts: &GlobalOpts, threads_env: Option<&str>) -> Result<RunConfig, CliError> {
    let mut c = RunConfig::load(opts.config.as_deref(), threads_env)?;
    if let Some(v) = opts.depth {
        c.depth = v;
    }
    if let Some(v) = opts.tol {
        c.tolerance = v;
    }
    if let Some(v) = opts.max_iter {
        c.max_iter = v;
    }
    if let Some(v) = opts.threads {
        c.threads = v;
    }
    if let Some(v) = opts.seed {
        c.seed = v;
    }
    c.validate()?;
    Ok(c)
}

/// Runs one command; the payload goes to `out`, diagnostics and summaries to `err`.
pub fn run(cli: &Cli, cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    commands::dispatch(cli, cfg, out, err)
}

/// Parses `args`, runs, and returns the exit code.
pub fn main_with<I, T>(args: I, threads_env: Option<&str>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = if code == 0 {
                write!(out, "{e}")
            } else {
                write!(err, "{e}")
            };
            return code;
        }
    };
    let result = resolve_config(&cli.opts, threads_env).and_then(|cfg| {
        // a second pool request in one process is refused; the first one stays
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global();
        run(&cli, &cfg, out, err)
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "realdyn: {}", e.message);
            e.code
        }
    }
}
