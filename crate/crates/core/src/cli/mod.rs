//! Command-line front end: the verification suite, the three demos and
//! report serialization. Nothing else in the crate touches the filesystem.

mod demos;
mod suite;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

pub use suite::run_verify;

/// Exit code for a run whose checks all pass.
pub const EXIT_PASS: i32 = 0;
/// Exit code for a failed check or a runtime error.
pub const EXIT_FAIL: i32 = 1;
/// Exit code for an invalid configuration.
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Run(#[from] crate::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            _ => EXIT_FAIL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "dressing-chain", version, about = "Lattice Darboux transformations, dressing chains, Hirota and Nahm reductions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the full property suite and report every check.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        hirota: HirotaArgs,
        #[command(flatten)]
        nahm: NahmArgs,
        #[command(flatten)]
        chain: ChainArgs,
    },
    /// Periodic closure and a dressed Hirota background, with tau output.
    HirotaDemo {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        hirota: HirotaArgs,
    },
    /// Integrate and dress a Nahm trajectory.
    NahmDemo {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        nahm: NahmArgs,
    },
    /// Build a Zakharov-Shabat dressing chain by successive transforms.
    ChainDemo {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        chain: ChainArgs,
    },
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Lattice sites of the ring.
    #[arg(long, default_value_t = 8)]
    pub sites: usize,
    /// Matrix size of ring values.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Replaces every check's own tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Report file for verify, output directory for the demos.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Add wall time per check (makes output nondeterministic).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Clone, Args)]
pub struct HirotaArgs {
    #[arg(long, default_value_t = 6)]
    pub ln: usize,
    #[arg(long, default_value_t = 6)]
    pub lj: usize,
    #[arg(long, default_value_t = 6)]
    pub lr: usize,
    /// Closure period.
    #[arg(long, default_value_t = 0)]
    pub p: usize,
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    /// Constant boundary value for the closure instead of a random one.
    #[arg(long)]
    pub sigma0_const: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct NahmArgs {
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    #[arg(long, default_value_t = 0.5)]
    pub span: f64,
    /// Use diagonal (commuting) initial data.
    #[arg(long)]
    pub commuting: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ChainArgs {
    #[arg(long, default_value_t = 3)]
    pub chain_length: usize,
}

/// Everything a run depends on. The output path and the timing switch are
/// not echoed so reports stay byte-identical across runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub sites: usize,
    pub dim: usize,
    pub seed: u64,
    pub tol: Option<f64>,
    pub ln: usize,
    pub lj: usize,
    pub lr: usize,
    pub p: usize,
    pub delta: f64,
    pub sigma0_const: Option<f64>,
    pub chain_length: usize,
    pub step: f64,
    pub span: f64,
    pub commuting: bool,
    pub format: Format,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub timings: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            sites: 8,
            dim: 2,
            seed: 1,
            tol: None,
            ln: 6,
            lj: 6,
            lr: 6,
            p: 0,
            delta: 1.0,
            sigma0_const: None,
            chain_length: 3,
            step: 1e-3,
            span: 0.5,
            commuting: false,
            format: Format::Json,
            out: None,
            timings: false,
        }
    }
}

fn config_err<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Config(msg.into()))
}

impl RunConfig {
    fn apply_common(&mut self, a: &CommonArgs) {
        self.sites = a.sites;
        self.dim = a.dim;
        self.seed = a.seed;
        self.tol = a.tol;
        self.out = a.out.clone();
        self.format = a.format;
        self.timings = a.timings;
    }

    fn apply_hirota(&mut self, a: &HirotaArgs) {
        (self.ln, self.lj, self.lr, self.p, self.delta, self.sigma0_const) = (a.ln, a.lj, a.lr, a.p, a.delta, a.sigma0_const);
    }

    fn apply_nahm(&mut self, a: &NahmArgs) {
        (self.step, self.span, self.commuting) = (a.step, a.span, a.commuting);
    }

    /// Checks every field against its documented bounds.
    pub fn validate(&self) -> Result<(), CliError> {
        if !(2..=64).contains(&self.sites) {
            return config_err(format!("sites must be in 2..=64, got {}", self.sites));
        }
        if !(1..=4).contains(&self.dim) {
            return config_err(format!("dim must be in 1..=4, got {}", self.dim));
        }
        if let Some(t) = self.tol {
            if !(t >= 0.0 && t.is_finite()) {
                return config_err(format!("tol must be finite and nonnegative, got {t}"));
            }
        }
        for (name, v) in [("ln", self.ln), ("lj", self.lj), ("lr", self.lr)] {
            if !(2..=24).contains(&v) {
                return config_err(format!("{name} must be in 2..=24, got {v}"));
            }
        }
        if !self.ln.is_multiple_of(3) || !self.lj.is_multiple_of(6) || !self.lr.is_multiple_of(6) {
            return config_err("grid needs ln % 3 == 0 and lj, lr % 6 == 0 for periodic backgrounds");
        }
        if self.p > 64 {
            return config_err(format!("p must be at most 64, got {}", self.p));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return config_err(format!("delta must be positive, got {}", self.delta));
        }
        if let Some(s) = self.sigma0_const {
            if !(s != 0.0 && s.is_finite()) {
                return config_err("sigma0-const must be finite and nonzero");
            }
        }
        if !(1..=8).contains(&self.chain_length) || self.chain_length > self.sites {
            return config_err(format!("chain-length must be in 1..=min(8, sites), got {}", self.chain_length));
        }
        if !(self.step > 0.0 && self.step.is_finite()) || !(0.0..=100.0).contains(&self.span) {
            return config_err("need step > 0 and span in [0, 100]");
        }
        let ratio = self.span / self.step;
        if ratio > 1e6 || (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
            return config_err("span must be a multiple of step with at most 1e6 steps");
        }
        Ok(())
    }
}

/// One named residual compared against its tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ms: Option<f64>,
}

/// Per-check results plus the echoed configuration. `pass` is the
/// conjunction of the check flags.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub config: RunConfig,
    pub pass: bool,
    pub checks: Vec<Check>,
    /// Reported quantities that are not pass/fail.
    #[serde(skip_serializing_if = "serde_json::Map::is_empty")]
    pub values: serde_json::Map<String, Value>,
}

impl VerificationReport {
    pub fn new(config: RunConfig) -> Self {
        Self { config, pass: true, checks: Vec::new(), values: serde_json::Map::new() }
    }

    /// Runs `f`, compares its residual with `tol` (or the configured
    /// override) and records the outcome. Errors count as failures.
    pub fn check(&mut self, name: &str, tol: f64, f: impl FnOnce() -> crate::Result<f64>) {
        let tol = self.config.tol.unwrap_or(tol);
        let start = Instant::now();
        let outcome = f();
        let ms = self.config.timings.then(|| start.elapsed().as_secs_f64() * 1e3);
        let (residual, error) = match outcome {
            Ok(r) => (r, None),
            Err(e) => (f64::INFINITY, Some(e.to_string())),
        };
        let pass = residual <= tol;
        log::info!("{name}: residual {residual:.3e} tol {tol:.1e} {}", if pass { "pass" } else { "FAIL" });
        self.pass &= pass;
        self.checks.push(Check { name: name.to_string(), residual, tol, pass, error, ms });
    }

    pub fn value(&mut self, name: &str, v: impl Serialize) {
        self.values.insert(name.to_string(), serde_json::to_value(v).expect("plain data serializes"));
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// `name,residual,tol,pass[,ms]` with full-precision numbers.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(if self.config.timings { "name,residual,tol,pass,ms\n" } else { "name,residual,tol,pass\n" });
        for c in &self.checks {
            write!(out, "{},{:e},{:e},{}", c.name, c.residual, c.tol, c.pass).expect("write to string");
            if let Some(ms) = c.ms {
                write!(out, ",{ms:.3}").expect("write to string");
            }
            out.push('\n');
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass {
            EXIT_PASS
        } else {
            EXIT_FAIL
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// Writes `name.<ext>` into the output directory when one is configured.
pub(crate) struct Output<'a> {
    dir: Option<&'a Path>,
    format: Format,
}

impl<'a> Output<'a> {
    fn new(config: &'a RunConfig) -> Result<Self, CliError> {
        if let Some(dir) = config.out.as_deref() {
            std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
        }
        Ok(Self { dir: config.out.as_deref(), format: config.format })
    }

    /// `csv` and `json` renderings of one artifact; only the configured one
    /// is written.
    fn artifact(&self, name: &str, csv: impl FnOnce() -> String, json: impl FnOnce() -> Value) -> Result<(), CliError> {
        let Some(dir) = self.dir else { return Ok(()) };
        let body = match self.format {
            Format::Csv => csv(),
            Format::Json => {
                let mut s = serde_json::to_string(&json()).expect("artifact serializes");
                s.push('\n');
                s
            }
        };
        write_file(&dir.join(format!("{name}.{}", self.format.extension())), &body)
    }

    fn report(&self, report: &VerificationReport) -> Result<(), CliError> {
        match self.dir {
            Some(dir) => write_file(&dir.join(format!("report.{}", self.format.extension())), &report.render(self.format)),
            None => Ok(()),
        }
    }
}

fn execute(command: &Command) -> Result<VerificationReport, CliError> {
    let mut config = RunConfig::default();
    match command {
        Command::Verify { common, hirota, nahm, chain } => {
            config.apply_common(common);
            config.apply_hirota(hirota);
            config.apply_nahm(nahm);
            config.chain_length = chain.chain_length;
            config.validate()?;
            let report = run_verify(&config);
            if let Some(path) = &config.out {
                write_file(path, &report.render(config.format))?;
            }
            Ok(report)
        }
        Command::HirotaDemo { common, hirota } => {
            config.apply_common(common);
            config.apply_hirota(hirota);
            config.validate()?;
            demos::hirota_demo(&config)
        }
        Command::NahmDemo { common, nahm } => {
            config.apply_common(common);
            config.apply_nahm(nahm);
            config.validate()?;
            demos::nahm_demo(&config)
        }
        Command::ChainDemo { common, chain } => {
            config.apply_common(common);
            config.chain_length = chain.chain_length;
            config.validate()?;
            demos::chain_demo(&config)
        }
    }
}

/// Parses `args`, runs the command, prints the report to stdout and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
        }
    };
    match execute(&cli.command) {
        Ok(report) => {
            let format = report.config.format;
            print!("{}", report.render(format));
            report.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        assert!(RunConfig::default().validate().is_ok());
    }

    #[test]
    fn bounds_are_enforced() {
        let bad = [
            RunConfig { sites: 1, ..Default::default() },
            RunConfig { dim: 0, ..Default::default() },
            RunConfig { tol: Some(-1.0), ..Default::default() },
            RunConfig { lj: 4, ..Default::default() },
            RunConfig { delta: 0.0, ..Default::default() },
            RunConfig { step: 0.3, ..Default::default() },
            RunConfig { chain_length: 9, ..Default::default() },
            RunConfig { sigma0_const: Some(0.0), ..Default::default() },
        ];
        for c in bad {
            assert!(matches!(c.validate(), Err(CliError::Config(_))), "{c:?}");
        }
    }

    #[test]
    fn report_pass_is_conjunction() {
        let mut r = VerificationReport::new(RunConfig::default());
        r.check("a", 1.0, || Ok(0.5));
        assert!(r.pass);
        r.check("b", 1.0, || Err(crate::Error::SingularElement(0)));
        assert!(!r.pass);
        assert_eq!(r.exit_code(), EXIT_FAIL);
        assert!(r.checks[1].error.is_some());
        let csv = r.to_csv();
        assert_eq!(csv.lines().next(), Some("name,residual,tol,pass"));
        assert_eq!(csv.lines().nth(1), Some("a,5e-1,1e0,true"));
    }

    #[test]
    fn tol_override_applies() {
        let mut r = VerificationReport::new(RunConfig { tol: Some(0.0), ..Default::default() });
        r.check("a", 1.0, || Ok(1e-300));
        assert!(!r.pass);
        assert_eq!(r.checks[0].tol, 0.0);
    }

    #[test]
    fn config_errors_exit_two() {
        assert_eq!(run(["dressing-chain", "verify", "--sites", "1"]), EXIT_CONFIG);
        assert_eq!(run(["dressing-chain", "verify", "--format", "xml"]), EXIT_CONFIG);
    }
}
