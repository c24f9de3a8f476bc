//! Command-line front end: surgery verdicts, slope scans, verification suites
//! and orbit traces.
//!
//! Standard output carries only the machine-readable payload (JSON or CSV);
//! diagnostics go to standard error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plane::{ModelParams, ProngPoint};
use crate::surgery::{admissible, scan_box, sigma0, surgery_verdict, HomologyClass};
use crate::suspension::{flow, TorusPoint};
use crate::verify::{run_suite, SampleConfig, Suite, SuiteReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MALFORMED: i32 = 1;
pub const EXIT_INADMISSIBLE: i32 = 2;
pub const EXIT_ONE_PRONG: i32 = 3;
pub const EXIT_SUITE_FAILED: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "prongflow",
    version,
    about = "Prong-singularity local models and surgery arithmetic"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Prong count and expansivity verdict of a surgery along the singular orbit.
    Surgery(CommonArgs),
    /// Verdicts for every admissible slope in a box, as CSV.
    Scan(CommonArgs),
    /// Run a verification suite; JSON summary on stdout, CSV tables to --out.
    Verify(CommonArgs),
    /// Trace an orbit of the suspension flow, as CSV.
    Orbit(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    #[arg(long)]
    p: Option<u32>,
    #[arg(long)]
    k: Option<u32>,
    /// Surgery class `a,b` in the (meridian, fiber) basis.
    #[arg(long, allow_hyphen_values = true)]
    sigma: Option<String>,
    /// Scan bound: all classes with |a|, |b| ≤ N.
    #[arg(long = "box")]
    scan_box: Option<i64>,
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    horizon: Option<f64>,
    #[arg(long)]
    pairs: Option<usize>,
    /// Initial radius of the orbit.
    #[arg(long)]
    r: Option<f64>,
    /// Initial angle of the orbit.
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    /// Initial fiber coordinate of the orbit.
    #[arg(long)]
    s: Option<f64>,
    /// Time step of the orbit trace.
    #[arg(long)]
    dt: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub p: u32,
    pub k: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrbitStart {
    pub r: f64,
    pub theta: f64,
    pub s: f64,
    pub dt: f64,
}

impl Default for OrbitStart {
    fn default() -> Self {
        Self {
            r: 1.0,
            theta: 0.0,
            s: 0.0,
            dt: 0.25,
        }
    }
}

/// Run configuration. Every field is optional in the JSON document; missing
/// values take the defaults of [`RunConfig::default`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub sigma: Option<HomologyClass>,
    pub scan_box: i64,
    pub suite: String,
    pub seed: u64,
    pub pairs: usize,
    pub horizon: f64,
    pub eps_grid: Vec<f64>,
    pub c: f64,
    pub out: Option<PathBuf>,
    pub orbit: OrbitStart,
}

impl Default for RunConfig {
    fn default() -> Self {
        let sample = SampleConfig::for_model(2);
        Self {
            model: ModelSpec { p: 2, k: 0 },
            sigma: None,
            scan_box: 10,
            suite: "all".into(),
            seed: sample.seed,
            pairs: sample.n_pairs,
            horizon: sample.horizon,
            eps_grid: sample.eps_grid,
            c: sample.c,
            out: None,
            orbit: OrbitStart::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn apply(&mut self, args: &CommonArgs) -> Result<()> {
        if let Some(p) = args.p {
            self.model.p = p;
        }
        if let Some(k) = args.k {
            self.model.k = k;
        }
        if let Some(sigma) = &args.sigma {
            self.sigma = Some(
                sigma
                    .parse()
                    .map_err(|e| Error::Config(format!("--sigma: {e}")))?,
            );
        }
        if let Some(b) = args.scan_box {
            self.scan_box = b;
        }
        if let Some(suite) = &args.suite {
            self.suite = suite.clone();
        }
        if let Some(seed) = args.seed {
            self.seed = seed;
        }
        if let Some(out) = &args.out {
            self.out = Some(out.clone());
        }
        if let Some(h) = args.horizon {
            self.horizon = h;
        }
        if let Some(n) = args.pairs {
            self.pairs = n;
        }
        if let Some(r) = args.r {
            self.orbit.r = r;
        }
        if let Some(theta) = args.theta {
            self.orbit.theta = theta;
        }
        if let Some(s) = args.s {
            self.orbit.s = s;
        }
        if let Some(dt) = args.dt {
            self.orbit.dt = dt;
        }
        Ok(())
    }

    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.model.p, self.model.k)
    }

    /// Sampling configuration for the verification suites.
    pub fn sample_config(&self) -> SampleConfig {
        let mut cfg = SampleConfig::for_model(self.model.p.max(1));
        cfg.seed = self.seed;
        cfg.n_pairs = self.pairs;
        cfg.horizon = self.horizon;
        cfg.eps_grid = self.eps_grid.clone();
        if self.c != cfg.c {
            let e = 2.0 / self.model.p.max(1) as f64;
            let seg = [(self.c / 16.0).powf(e), (self.c / 2.0).powf(e)];
            cfg.c = self.c;
            cfg.i_s = seg;
            cfg.i_u = seg;
        }
        cfg
    }
}

/// Format a float with 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn csv_err(e: impl std::fmt::Display) -> Error {
    Error::Config(format!("csv output: {e}"))
}

/// Rows of `scan_box` as CSV text.
pub fn scan_csv(params: &ModelParams, bound: i64) -> Result<String> {
    if params.p() < 2 {
        return Err(Error::Config(
            "surgery scans need a model with p >= 2".into(),
        ));
    }
    if bound < 0 {
        return Err(Error::Config(format!("scan bound {bound} must be >= 0")));
    }
    let mut w = csv_writer(Vec::new());
    w.write_record(["a", "b", "K", "p_new", "expansive"])
        .map_err(csv_err)?;
    for row in scan_box(params, bound) {
        w.write_record([
            row.a.to_string(),
            row.b.to_string(),
            row.k_count.to_string(),
            row.p_new.to_string(),
            row.expansive.to_string(),
        ])
        .map_err(csv_err)?;
    }
    String::from_utf8(w.into_inner().map_err(csv_err)?).map_err(csv_err)
}

/// Orbit trace rows `(t, r, theta, s, u, v, quadrant)` for `t = 0, dt, …, T`.
pub fn orbit_csv(params: &ModelParams, start: &OrbitStart, horizon: f64) -> Result<String> {
    if !(start.dt.is_finite() && start.dt > 0.0) {
        return Err(Error::Config(format!(
            "time step {} must be positive",
            start.dt
        )));
    }
    if !(horizon.is_finite() && horizon >= 0.0) {
        return Err(Error::Config(format!("horizon {horizon} must be >= 0")));
    }
    let steps = (horizon / start.dt + 1e-9).floor() as u64;
    if steps > 1_000_000 {
        return Err(Error::Config("orbit trace longer than 10^6 rows".into()));
    }
    let plane = ProngPoint::new(params.p(), start.r, start.theta)?;
    let x = TorusPoint::new(plane, start.s)?;
    let mut w = csv_writer(Vec::new());
    w.write_record(["t", "r", "theta", "s", "u", "v", "quadrant"])
        .map_err(csv_err)?;
    for j in 0..=steps {
        let t = j as f64 * start.dt;
        let y = flow(&x, t, params)?;
        let (q, u, v) = y.plane.quadrant_chart();
        w.write_record([
            fmt_float(t),
            fmt_float(y.plane.r()),
            fmt_float(y.plane.theta()),
            fmt_float(y.s()),
            fmt_float(u),
            fmt_float(v),
            q.n().to_string(),
        ])
        .map_err(csv_err)?;
    }
    String::from_utf8(w.into_inner().map_err(csv_err)?).map_err(csv_err)
}

fn opt_float(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

/// Per-ε rows and per-witness rows of the tables in a suite report.
pub fn suite_csv(report: &SuiteReport) -> Result<String> {
    let mut w = csv_writer(Vec::new());
    w.write_record([
        "table",
        "row_type",
        "eps",
        "eta_hat",
        "bound",
        "passing",
        "violations",
        "pair",
        "pair_kind",
        "hypothesis",
        "conclusion",
    ])
    .map_err(csv_err)?;
    for table in &report.tables {
        for row in &table.rows {
            w.write_record([
                table.name.clone(),
                "row".into(),
                fmt_float(row.eps),
                opt_float(row.eta_hat),
                opt_float(row.bound),
                row.passing.to_string(),
                row.violations.to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ])
            .map_err(csv_err)?;
            for wit in &row.witnesses {
                let kind = serde_json::to_value(wit.kind)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_string))
                    .unwrap_or_default();
                w.write_record([
                    table.name.clone(),
                    "witness".into(),
                    fmt_float(row.eps),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    wit.pair.to_string(),
                    kind,
                    fmt_float(wit.hypothesis),
                    fmt_float(wit.conclusion),
                ])
                .map_err(csv_err)?;
            }
        }
    }
    String::from_utf8(w.into_inner().map_err(csv_err)?).map_err(csv_err)
}

#[derive(Debug, Serialize)]
struct InadmissibleReport {
    p: u32,
    k: u32,
    sigma: HomologyClass,
    sigma0: HomologyClass,
    admissible: bool,
    reason: String,
}

#[derive(Debug, Serialize)]
struct SuiteSummary<'a> {
    suite: Suite,
    p: u32,
    k: u32,
    seed: u64,
    pairs: usize,
    horizon: f64,
    pass: bool,
    checks: &'a [crate::verify::CheckOutcome],
}

fn write_out(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
}

fn emit(stdout: &mut dyn Write, cfg: &RunConfig, text: &str, to_file: bool) -> Result<()> {
    match (&cfg.out, to_file) {
        (Some(path), true) => write_out(path, text),
        _ => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Error::Config(format!("stdout: {e}"))),
    }
}

fn cmd_surgery(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<i32> {
    let params = cfg.params()?;
    let sigma = cfg
        .sigma
        .ok_or_else(|| Error::Config("surgery needs --sigma a,b".into()))?;
    if params.p() < 2 {
        return Err(Error::Config("surgery needs a model with p >= 2".into()));
    }
    match surgery_verdict(&sigma, &params) {
        Ok(v) => {
            let text = serde_json::to_string(&v).map_err(|e| Error::Config(e.to_string()))?;
            emit(stdout, cfg, &format!("{text}\n"), true)?;
            Ok(if v.expansive { EXIT_OK } else { EXIT_ONE_PRONG })
        }
        Err(Error::Inadmissible { reason, .. }) => {
            debug_assert!(!admissible(&sigma, &params));
            let report = InadmissibleReport {
                p: params.p(),
                k: params.k(),
                sigma,
                sigma0: sigma0(&params),
                admissible: false,
                reason: reason.to_string(),
            };
            let text = serde_json::to_string(&report).map_err(|e| Error::Config(e.to_string()))?;
            emit(stdout, cfg, &format!("{text}\n"), true)?;
            Ok(EXIT_INADMISSIBLE)
        }
        Err(e) => Err(e),
    }
}

fn cmd_verify(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<i32> {
    let params = cfg.params()?;
    let suite: Suite = cfg.suite.parse()?;
    let sample = cfg.sample_config();
    let report = run_suite(&params, suite, &sample)?;
    let summary = SuiteSummary {
        suite,
        p: report.p,
        k: report.k,
        seed: report.seed,
        pairs: sample.n_pairs,
        horizon: sample.horizon,
        pass: report.pass,
        checks: &report.checks,
    };
    let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Config(e.to_string()))?;
    stdout
        .write_all(format!("{json}\n").as_bytes())
        .map_err(|e| Error::Config(format!("stdout: {e}")))?;
    if let Some(path) = &cfg.out {
        write_out(path, &suite_csv(&report)?)?;
    }
    Ok(if report.pass {
        EXIT_OK
    } else {
        EXIT_SUITE_FAILED
    })
}

fn dispatch(command: &Command, stdout: &mut dyn Write) -> Result<i32> {
    let (Command::Surgery(args)
    | Command::Scan(args)
    | Command::Verify(args)
    | Command::Orbit(args)) = command;
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.apply(args)?;
    match command {
        Command::Surgery(_) => cmd_surgery(&cfg, stdout),
        Command::Scan(_) => {
            let text = scan_csv(&cfg.params()?, cfg.scan_box)?;
            emit(stdout, &cfg, &text, true)?;
            Ok(EXIT_OK)
        }
        Command::Verify(_) => cmd_verify(&cfg, stdout),
        Command::Orbit(_) => {
            let text = orbit_csv(&cfg.params()?, &cfg.orbit, cfg.horizon)?;
            emit(stdout, &cfg, &text, true)?;
            Ok(EXIT_OK)
        }
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    EXIT_MALFORMED
                }
            };
        }
    };
    match dispatch(&cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_MALFORMED
        }
    }
}
