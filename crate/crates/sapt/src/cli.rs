//! Command-line front end: one command per run, flags or a JSON config file.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SaptError};
use crate::fixtures::{adjudicate_u3, compare_fixture, fixture, DiffReport, U3Verdict};
use crate::grid::{
    composition_oracle, error_scaling_experiment, spectral_residual_experiment, ExperimentConfig, ExperimentReport, GridSpec, Preset,
    WavePacket, DEFAULT_C_LIST,
};
use crate::matrix::{MatrixSymbol, PowerSeries, Scaling};
use crate::recursion::{check_order, expand, max_order, verify_defects, DefectReport};
use crate::scalar::ScalarExpr;

/// Directory for emitted files; without it results go to stdout only.
pub const OUTPUT_DIR_VAR: &str = "SAPT_OUTPUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_UNSUPPORTED_ORDER: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;
pub const EXIT_OTHER: i32 = 5;

pub fn exit_code(e: &SaptError) -> i32 {
    match e {
        SaptError::UnsupportedOrder(_) => EXIT_UNSUPPORTED_ORDER,
        SaptError::Numeric(_) | SaptError::NonPolynomialSymbol(_) => EXIT_NUMERIC,
        SaptError::Config(_) | SaptError::UnknownFixture(_) => EXIT_USAGE,
        _ => EXIT_OTHER,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Expand,
    Verify,
    Simulate,
    Residual,
    Oracle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Latex,
    Csv,
}

/// Everything one run needs. The JSON config file has exactly this shape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: CommandKind,
    #[serde(default = "default_scaling")]
    pub scaling: Scaling,
    /// defaults per command: the recursion limit for expand and verify, 2 for
    /// the dynamics experiments, 0 for the composition oracle
    #[serde(default)]
    pub order: Option<usize>,
    #[serde(default)]
    pub format: Option<Format>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default = "default_c_list")]
    pub c_list: Vec<f64>,
    #[serde(default = "default_time")]
    pub time: f64,
    #[serde(default)]
    pub seed: u64,
    /// the two symbols composed by the oracle, by name
    #[serde(default = "default_oracle_symbols")]
    pub symbols: [String; 2],
}

fn default_scaling() -> Scaling {
    Scaling::Sr
}

fn default_c_list() -> Vec<f64> {
    DEFAULT_C_LIST.to_vec()
}

fn default_time() -> f64 {
    1.0
}

fn default_oracle_symbols() -> [String; 2] {
    ["xi_alpha".into(), "xi_alpha".into()]
}

impl RunConfig {
    pub fn new(command: CommandKind) -> Self {
        RunConfig {
            command,
            scaling: default_scaling(),
            order: None,
            format: None,
            grid: GridSpec::default(),
            c_list: default_c_list(),
            time: default_time(),
            seed: 0,
            symbols: default_oracle_symbols(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| SaptError::Config(e.to_string()))
    }

    pub fn order(&self) -> usize {
        self.order.unwrap_or(match self.command {
            CommandKind::Expand | CommandKind::Verify => max_order(self.scaling),
            CommandKind::Simulate | CommandKind::Residual => 2,
            CommandKind::Oracle => 0,
        })
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or(match self.command {
            CommandKind::Expand | CommandKind::Verify => Format::Json,
            _ => Format::Csv,
        })
    }

    /// Rejects bad combinations before any work is done.
    pub fn validate(&self) -> Result<()> {
        let fmt = self.format();
        let ok = match self.command {
            CommandKind::Expand => fmt != Format::Csv,
            CommandKind::Verify => fmt == Format::Json,
            _ => fmt != Format::Latex,
        };
        if !ok {
            return Err(SaptError::Config(format!("format {fmt:?} is not available for {:?}", self.command)));
        }
        if self.command != CommandKind::Oracle {
            check_order(self.scaling, self.order())?;
        }
        if matches!(self.command, CommandKind::Simulate | CommandKind::Residual | CommandKind::Oracle) {
            self.grid.validate()?;
            if self.c_list.is_empty() || self.c_list.iter().any(|c| c.is_nan() || *c <= 0.0) {
                return Err(SaptError::Config("c_list must be non-empty and positive".into()));
            }
        }
        if self.command == CommandKind::Oracle {
            for s in &self.symbols {
                named_symbol(s)?;
            }
        }
        Ok(())
    }

    fn grid(&self) -> GridSpec {
        GridSpec { seed: self.seed, ..self.grid.clone() }
    }

    fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            scaling: self.scaling,
            order: self.order(),
            c_list: self.c_list.clone(),
            t: self.time,
            grid: self.grid(),
            packet: WavePacket::default(),
        }
    }
}

/// Symbols the oracle accepts by name.
pub const SYMBOL_NAMES: [&str; 6] = ["xi_alpha", "beta", "xi1", "xi2", "h0", "energy"];

pub fn named_symbol(name: &str) -> Result<MatrixSymbol> {
    Ok(match name {
        "xi_alpha" => MatrixSymbol::xi_alpha(),
        "beta" => MatrixSymbol::beta(),
        "xi1" => MatrixSymbol::scalar(ScalarExpr::xi(0)),
        "xi2" => MatrixSymbol::scalar(ScalarExpr::xi(1)),
        "h0" => MatrixSymbol::h0_sr(),
        "energy" => MatrixSymbol::scalar(ScalarExpr::energy()),
        _ => return Err(SaptError::Config(format!("unknown symbol `{name}`; known: {}", SYMBOL_NAMES.join(", ")))),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    Pi,
    U,
    H,
    HEff,
}

/// Fixtures with the series they check and the order they need.
pub const FIXTURE_TABLE: [(&str, Scaling, SeriesKind, usize); 6] = [
    ("nr_pi3", Scaling::Nr, SeriesKind::Pi, 3),
    ("nr_h3", Scaling::Nr, SeriesKind::H, 3),
    ("nr_heff4", Scaling::Nr, SeriesKind::HEff, 4),
    ("sr_pi2", Scaling::Sr, SeriesKind::Pi, 2),
    ("sr_u2", Scaling::Sr, SeriesKind::U, 2),
    ("sr_heff3", Scaling::Sr, SeriesKind::HEff, 3),
];

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub scaling: Scaling,
    pub order: usize,
    pub fixtures: Vec<DiffReport>,
    pub defects: Vec<DefectReport>,
    /// which stored third-order unitary the construction reproduces; informative
    /// only, the defect reports are the bar
    pub u3: Option<U3Verdict>,
    pub passed: bool,
}

/// Fixture diffs for every fixture within reach of `order`, plus the defect suite.
pub fn verify(scaling: Scaling, order: usize) -> Result<VerifyReport> {
    let exp = expand(scaling, order)?;
    let mut fixtures = Vec::new();
    for (name, sc, kind, need) in FIXTURE_TABLE {
        if sc != scaling || need > order {
            continue;
        }
        let series: &PowerSeries = match kind {
            SeriesKind::Pi => &exp.pi,
            SeriesKind::U => &exp.u,
            SeriesKind::H => &exp.h,
            SeriesKind::HEff => &exp.h_eff,
        };
        debug_assert_eq!(fixture(name)?.series.truncation, need);
        fixtures.push(compare_fixture(name, series)?);
    }
    let defects = verify_defects(&exp.cfg, &exp.pi, &exp.u, order)?;
    let u3 = if scaling == Scaling::Nr && order >= 3 { Some(adjudicate_u3(&exp.cfg, &exp.pi.with_truncation(3), &exp.u)?) } else { None };
    let passed = fixtures.iter().all(|f| f.passed) && defects.iter().all(|d| d.passed);
    Ok(VerifyReport { scaling, order, fixtures, defects, u3, passed })
}

#[derive(Clone, Debug, Serialize)]
struct ExpandOutput<'a> {
    scaling: Scaling,
    order: usize,
    pi: &'a PowerSeries,
    u: &'a PowerSeries,
    h: &'a PowerSeries,
    h_eff: &'a PowerSeries,
}

fn latex_series(name: &str, s: &PowerSeries) -> String {
    let mut out = String::new();
    for (n, m) in s.orders() {
        out.push_str(&format!("{name}_{{{n}}} &= {} \\\\\n", m.to_latex_dirac()));
    }
    out
}

/// What a run produced: text for stdout, files for the output directory.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub files: Vec<(String, String)>,
    pub passed: bool,
}

fn report_outcome(cfg: &RunConfig, rep: &ExperimentReport) -> Outcome {
    let stem = format!("{}_{}_order{}", rep.experiment, cfg.scaling.name(), cfg.order());
    let (csv, json) = (rep.to_csv(), rep.to_json());
    let stdout = if cfg.format() == Format::Json { json.clone() } else { csv.clone() };
    Outcome { stdout, files: vec![(format!("{stem}.csv"), csv), (format!("{stem}.json"), json)], passed: true }
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let order = cfg.order();
    let tag = format!("{}_order{order}", cfg.scaling.name());
    match cfg.command {
        CommandKind::Expand => {
            let exp = expand(cfg.scaling, order)?;
            let (text, ext) = match cfg.format() {
                Format::Latex => {
                    let body = [("\\pi", &exp.pi), ("u", &exp.u), ("h", &exp.h), ("h^{\\mathrm{eff}}", &exp.h_eff)]
                        .iter()
                        .map(|(n, s)| latex_series(n, s))
                        .collect::<Vec<_>>()
                        .join("\n");
                    (format!("\\begin{{align*}}\n{body}\\end{{align*}}\n"), "tex")
                }
                _ => {
                    let out = ExpandOutput { scaling: cfg.scaling, order, pi: &exp.pi, u: &exp.u, h: &exp.h, h_eff: &exp.h_eff };
                    (serde_json::to_string_pretty(&out)? + "\n", "json")
                }
            };
            Ok(Outcome { stdout: text.clone(), files: vec![(format!("expand_{tag}.{ext}"), text)], passed: true })
        }
        CommandKind::Verify => {
            let rep = verify(cfg.scaling, order)?;
            let text = serde_json::to_string_pretty(&rep)? + "\n";
            Ok(Outcome { stdout: text.clone(), files: vec![(format!("verify_{tag}.json"), text)], passed: rep.passed })
        }
        CommandKind::Simulate => Ok(report_outcome(cfg, &error_scaling_experiment(&cfg.experiment())?)),
        CommandKind::Residual => Ok(report_outcome(cfg, &spectral_residual_experiment(&cfg.experiment())?)),
        CommandKind::Oracle => {
            let f = named_symbol(&cfg.symbols[0])?;
            let g = named_symbol(&cfg.symbols[1])?;
            let rep = composition_oracle(&f, &g, order, cfg.scaling, &cfg.c_list, &cfg.grid())?;
            Ok(report_outcome(cfg, &rep))
        }
    }
}

pub fn write_files(dir: &Path, files: &[(String, String)]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, text) in files {
        std::fs::write(dir.join(name), text)?;
    }
    Ok(())
}

#[derive(Debug, Parser)]
#[command(name = "sapt", version, about = "Adiabatic decoupling of the Dirac equation: symbolic series and grid checks")]
pub struct Cli {
    /// JSON run configuration; replaces the subcommand
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Emit π, u, h and h_eff through an order
    Expand(Common),
    /// Compare against the stored fixtures and run the defect suite
    Verify(Common),
    /// Error scaling of the effective dynamics
    Simulate(Numeric),
    /// Spectral residuals of the effective hamiltonian
    Residual(Numeric),
    /// Composition oracle for two named symbols
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long, value_parser = parse_scaling, default_value = "sr")]
    pub scaling: Scaling,
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct Numeric {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "mixed")]
    pub preset: Preset,
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    #[arg(long, default_value_t = 32.0)]
    pub length: f64,
    /// comma separated
    #[arg(long, value_delimiter = ',')]
    pub c_list: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1.0)]
    pub time: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub numeric: Numeric,
    #[arg(long, default_value = "xi_alpha")]
    pub f: String,
    #[arg(long, default_value = "xi_alpha")]
    pub g: String,
}

fn parse_scaling(s: &str) -> std::result::Result<Scaling, String> {
    match s {
        "sr" => Ok(Scaling::Sr),
        "nr" => Ok(Scaling::Nr),
        _ => Err(format!("scaling must be sr or nr, got `{s}`")),
    }
}

impl Numeric {
    fn apply(&self, cfg: &mut RunConfig) {
        cfg.scaling = self.common.scaling;
        cfg.order = self.common.order;
        cfg.format = self.common.format;
        cfg.grid = GridSpec { n: self.n, length: self.length, ..GridSpec::with_preset(self.preset) };
        if let Some(c) = &self.c_list {
            cfg.c_list = c.clone();
        }
        cfg.time = self.time;
        cfg.seed = self.seed;
    }
}

impl Cli {
    pub fn into_config(self) -> Result<RunConfig> {
        match (self.config, self.command) {
            (Some(path), None) => RunConfig::from_json(&std::fs::read_to_string(path)?),
            (Some(_), Some(_)) => Err(SaptError::Config("give either --config or a subcommand, not both".into())),
            (None, None) => Err(SaptError::Config("no command given".into())),
            (None, Some(cmd)) => {
                let mut cfg;
                match cmd {
                    Command::Expand(ref c) | Command::Verify(ref c) => {
                        let kind = if matches!(cmd, Command::Expand(_)) { CommandKind::Expand } else { CommandKind::Verify };
                        cfg = RunConfig::new(kind);
                        cfg.scaling = c.scaling;
                        cfg.order = c.order;
                        cfg.format = c.format;
                    }
                    Command::Simulate(n) => {
                        cfg = RunConfig::new(CommandKind::Simulate);
                        n.apply(&mut cfg);
                    }
                    Command::Residual(n) => {
                        cfg = RunConfig::new(CommandKind::Residual);
                        n.apply(&mut cfg);
                    }
                    Command::Oracle(o) => {
                        cfg = RunConfig::new(CommandKind::Oracle);
                        o.numeric.apply(&mut cfg);
                        cfg.symbols = [o.f, o.g];
                    }
                }
                Ok(cfg)
            }
        }
    }
}

/// Parses, runs and emits; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = cli.into_config().and_then(|cfg| {
        let out = run(&cfg)?;
        if let Some(dir) = std::env::var_os(OUTPUT_DIR_VAR) {
            write_files(Path::new(&dir), &out.files)?;
        }
        Ok(out)
    });
    match result {
        Ok(out) => {
            print!("{}", out.stdout);
            if out.passed {
                EXIT_OK
            } else {
                EXIT_MISMATCH
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
