//! `dnls`: generation, verification, evolution and reporting.
//!
//! Exit codes: 0 success, 1 a check or computation failed, 2 usage error.

mod config;

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use dnls::evolve::{self, EvolutionConfig, Monitor, MonitorSeries};
use dnls::scattering::{self, SpectralParameter, TransmissionRow};
use dnls::sobolev::{self, PhiSample};
use dnls::{hierarchy, profiles, verify, GridFunction, C64};

use config::{Parameter, Resolver};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(String),
}

impl From<dnls::Error> for CliError {
    fn from(e: dnls::Error) -> Self {
        use dnls::Error as E;
        match e {
            E::InvalidParameter(_) | E::InvalidGrid(_) | E::Index { .. } | E::LevelCap { .. } | E::Format(_) | E::Io(_) | E::Csv(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Failure(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failure(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Failure(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(name = "dnls", version, about = "Conservation laws, scattering data and evolution for the derivative NLS equation")]
struct Cli {
    #[command(flatten)]
    flags: Flags,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by all commands; each may also come from `--config`.
#[derive(Args, Default)]
struct Flags {
    /// Grid size N
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Domain length L
    #[arg(long, global = true)]
    domain: Option<f64>,
    /// Spectral parameter lambda^2 as `re,im` (repeatable)
    #[arg(long = "lambda-sq", global = true, allow_hyphen_values = true)]
    lambda_sq: Vec<String>,
    /// Point on the ray lambda^2 = i rho (repeatable)
    #[arg(long, global = true)]
    rho: Vec<f64>,
    /// Sobolev exponent
    #[arg(long, global = true)]
    s: Option<f64>,
    /// Lower limit of the comparison integral: a number or `R0`
    #[arg(long = "R", global = true)]
    r: Option<String>,
    #[arg(long, global = true)]
    dt: Option<f64>,
    #[arg(long = "t-final", global = true)]
    t_final: Option<f64>,
    /// Fraction of N/2 retained in the nonlinear term
    #[arg(long, global = true)]
    dealias: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (directory for `evolve`)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// json or csv
    #[arg(long, global = true)]
    format: Option<String>,
    /// File of key=value lines; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct Input {
    /// GridFunction file (binary, or CSV of re,im rows with --domain)
    #[arg(long)]
    input: Option<PathBuf>,
    /// Built-in profile instead of a file
    #[arg(long)]
    profile: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate E_0..E_j and write energies.json
    GenerateEnergies {
        #[arg(long = "j-max")]
        j_max: usize,
    },
    /// Run a property suite: symbolic, scattering, evolution, sobolev or all
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        /// Print the identity each check validates
        #[arg(long = "paper-anchor")]
        paper_anchor: bool,
    },
    /// Evolve a profile and record monitors
    Evolve {
        #[command(flatten)]
        input: Input,
        /// M, P, E, E_j, a_u, phi_L, hdot_s, h_s (repeatable)
        #[arg(long)]
        monitor: Vec<String>,
        /// Steps between monitor samples
        #[arg(long)]
        stride: Option<usize>,
        /// Steps between binary snapshots
        #[arg(long = "snapshot-every")]
        snapshot_every: Option<usize>,
    },
    /// Compare the rho-integral of phi_{[s],0} with the H^s seminorm
    CompareHs {
        #[command(flatten)]
        input: Input,
    },
    /// Transmission coefficient at the given lambda^2
    Scatter {
        #[command(flatten)]
        input: Input,
        /// Comma-separated subset of jost, determinant, series
        #[arg(long)]
        method: Option<String>,
    },
    /// phi_L and phi_{L,0} along the ray lambda^2 = i rho
    Phi {
        #[command(flatten)]
        input: Input,
        #[arg(long = "L")]
        l: Option<u32>,
    },
    /// Write a built-in profile as a GridFunction file
    Profile {
        #[arg(long)]
        name: String,
    },
    /// JSON dump of the resolvent symbols at level k
    Symbols {
        #[arg(long)]
        k: usize,
    },
}

#[derive(Serialize)]
struct Header {
    command: String,
    version: &'static str,
    parameters: Vec<Parameter>,
}

#[derive(Serialize)]
struct Report<T: Serialize> {
    header: Header,
    #[serde(flatten)]
    body: T,
}

struct Ctx {
    command: &'static str,
    flags: Flags,
    res: Resolver,
}

impl Ctx {
    fn header(&self) -> Header {
        Header {
            command: self.command.into(),
            version: env!("CARGO_PKG_VERSION"),
            parameters: self.res.log.clone(),
        }
    }

    fn format(&mut self, default: &str) -> CliResult<String> {
        let f = self.res.value("format", self.flags.format.clone(), default.to_string())?;
        match f.as_str() {
            "json" | "csv" => Ok(f),
            other => Err(CliError::Usage(format!("unknown format '{other}' (json, csv)"))),
        }
    }

    fn out(&mut self) -> CliResult<Option<PathBuf>> {
        let flag = self.flags.out.as_ref().map(|p| p.display().to_string());
        Ok(self.res.optional::<String>("out", flag)?.map(PathBuf::from))
    }

    fn load(&mut self, input: &Input) -> CliResult<GridFunction> {
        let grid = self.res.optional("grid", self.flags.grid)?;
        let domain = self.res.optional("domain", self.flags.domain)?;
        let input_path = self
            .res
            .optional::<String>("input", input.input.as_ref().map(|p| p.display().to_string()))?;
        let profile = self.res.optional::<String>("profile", input.profile.clone())?;
        match (input_path, profile) {
            (Some(path), _) => {
                let path = PathBuf::from(path);
                if !path.exists() {
                    return Err(CliError::Usage(format!("input {} not found", path.display())));
                }
                let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
                let u = if is_csv {
                    let l = domain.ok_or_else(|| CliError::Usage("CSV input needs --domain".into()))?;
                    GridFunction::read_csv(&path, l)?
                } else {
                    GridFunction::read_binary(&path)?
                };
                if let Some(n) = grid {
                    if n != u.len() {
                        return Err(CliError::Usage(format!("--grid {n} but the input has {} samples", u.len())));
                    }
                }
                Ok(u)
            }
            (None, Some(name)) => {
                let (n0, l0) = profile_defaults(&name);
                Ok(profiles::named(&name, grid.unwrap_or(n0), domain.unwrap_or(l0))?)
            }
            (None, None) => Err(CliError::Usage("no input: pass --input <file> or --profile <name>".into())),
        }
    }

    fn lambdas(&mut self) -> CliResult<Vec<C64>> {
        let raw = self.res.list("lambda-sq", &self.flags.lambda_sq.clone());
        raw.iter().map(|s| parse_complex(s)).collect()
    }

    fn rhos(&mut self) -> CliResult<Vec<f64>> {
        let flags: Vec<String> = self.flags.rho.iter().map(|r| r.to_string()).collect();
        self.res
            .list("rho", &flags)
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| CliError::Usage(format!("bad rho '{s}'"))))
            .collect()
    }
}

fn profile_defaults(name: &str) -> (usize, f64) {
    match name {
        "evolution-gaussian" => (1024, 300.0),
        "two-bump" => (2048, 40.0),
        "plane-wave" => (64, 2.0 * PI),
        _ => (256, 24.0),
    }
}

fn parse_complex(s: &str) -> CliResult<C64> {
    let bad = || CliError::Usage(format!("expected re,im but got '{s}'"));
    let (re, im) = s.split_once(',').ok_or_else(bad)?;
    Ok(C64::new(
        re.trim().parse().map_err(|_| bad())?,
        im.trim().parse().map_err(|_| bad())?,
    ))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(p, text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn to_json<T: Serialize>(ctx: &Ctx, body: T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(&Report {
        header: ctx.header(),
        body,
    })?;
    s.push('\n');
    Ok(s)
}

fn csv_table<T: Serialize>(rows: &[T]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Failure(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Failure(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Failure(msg)) => {
            eprintln!("failed: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    let res = Resolver::new(cli.flags.config.as_deref())?;
    let name = match &cli.command {
        Command::GenerateEnergies { .. } => "generate-energies",
        Command::Verify { .. } => "verify",
        Command::Evolve { .. } => "evolve",
        Command::CompareHs { .. } => "compare-hs",
        Command::Scatter { .. } => "scatter",
        Command::Phi { .. } => "phi",
        Command::Profile { .. } => "profile",
        Command::Symbols { .. } => "symbols",
    };
    let mut ctx = Ctx {
        command: name,
        flags: cli.flags,
        res,
    };
    match cli.command {
        Command::GenerateEnergies { j_max } => generate_energies(&mut ctx, j_max),
        Command::Verify { suite, paper_anchor } => cmd_verify(&mut ctx, &suite, paper_anchor),
        Command::Evolve {
            input,
            monitor,
            stride,
            snapshot_every,
        } => cmd_evolve(&mut ctx, &input, &monitor, stride, snapshot_every),
        Command::CompareHs { input } => compare_hs(&mut ctx, &input),
        Command::Scatter { input, method } => scatter(&mut ctx, &input, method),
        Command::Phi { input, l } => phi(&mut ctx, &input, l),
        Command::Profile { name } => profile(&mut ctx, &name),
        Command::Symbols { k } => symbols(&mut ctx, k),
    }
}

fn generate_energies(ctx: &mut Ctx, j_max: usize) -> CliResult<ExitCode> {
    let cap = hierarchy::shared().cap();
    if j_max > cap {
        return Err(CliError::Usage(format!("j-max {j_max} exceeds the cap {cap}")));
    }
    let energies = hierarchy::energies(j_max)?;
    let path = match ctx.out()? {
        Some(p) if p.is_dir() => p.join("energies.json"),
        Some(p) => p,
        None => PathBuf::from("energies.json"),
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    hierarchy::write_energies(&path, &energies)?;
    for e in &energies {
        println!("E_{}: {} monomials", e.j, e.density.len());
    }
    eprintln!("wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(ctx: &mut Ctx, suite: &str, paper_anchor: bool) -> CliResult<ExitCode> {
    let suites = verify::Suite::parse(suite)?;
    let seed = ctx.res.value("seed", ctx.flags.seed, 0u64)?;
    let out = ctx.out()?;
    let verdict = verify::run(&suites, seed);
    for c in &verdict.checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        if paper_anchor {
            eprintln!("[{tag}] {}/{}: {}", c.suite.name(), c.name, c.anchor);
        } else {
            eprintln!("[{tag}] {}/{}", c.suite.name(), c.name);
        }
    }
    emit(out.as_deref(), &to_json(ctx, &verdict)?)?;
    if verdict.passed {
        Ok(ExitCode::SUCCESS)
    } else {
        let names: Vec<String> = verdict.failures().map(|c| format!("{}/{}", c.suite.name(), c.name)).collect();
        eprintln!("failed checks: {}", names.join(", "));
        Ok(ExitCode::from(1))
    }
}

fn cmd_evolve(
    ctx: &mut Ctx,
    input: &Input,
    monitor: &[String],
    stride: Option<usize>,
    snapshot_every: Option<usize>,
) -> CliResult<ExitCode> {
    let u = ctx.load(input)?;
    let defaults = EvolutionConfig::default();
    let dt = ctx.res.value("dt", ctx.flags.dt, defaults.dt)?;
    let t_final = ctx.res.value("t-final", ctx.flags.t_final, defaults.t_final)?;
    let dealias = ctx.res.value("dealias", ctx.flags.dealias, defaults.dealias)?;
    let stride = ctx.res.value("stride", stride, defaults.monitor_stride)?;
    let snapshot_stride = ctx.res.optional("snapshot-every", snapshot_every)?;
    let lambdas = ctx.lambdas()?;
    let rhos = ctx.rhos()?;
    let mut names = ctx.res.list("monitor", monitor);
    if names.is_empty() {
        names = vec!["M".into(), "P".into(), "E".into()];
    }
    let mut monitors = Vec::new();
    for n in &names {
        monitors.extend(Monitor::parse(n, &lambdas, &rhos)?);
    }
    let format = ctx.res.optional::<String>("format", ctx.flags.format.clone())?;
    if format.as_deref().is_some_and(|f| f != "json" && f != "csv") {
        return Err(CliError::Usage("unknown format (json, csv)".into()));
    }
    let dir = ctx.out()?.unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    let cfg = EvolutionConfig {
        dt,
        t_final,
        dealias,
        monitor_stride: stride,
        snapshot_stride,
        snapshot_dir: snapshot_stride.map(|_| dir.join("snapshots")),
    };
    let series = evolve::evolve(&u, &cfg, &monitors)?;
    for c in &series.monitors {
        eprintln!("{}: relative drift {:.3e}", c.name, c.relative_drift());
    }
    if !series.edge_warnings.is_empty() {
        eprintln!(
            "warning: profile reached the domain edge at {} monitor times",
            series.edge_warnings.len()
        );
    }
    let want = |f: &str| format.as_deref().is_none_or(|x| x == f);
    if want("json") {
        emit(Some(&dir.join("monitors.json")), &to_json(ctx, &series)?)?;
    }
    if want("csv") {
        write_series_csv(&series, &dir.join("monitors.csv"))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn write_series_csv(series: &MonitorSeries, path: &Path) -> CliResult<()> {
    let f = std::fs::File::create(path)?;
    series.write_csv(f)?;
    Ok(())
}

#[derive(Serialize)]
struct IntegerReport {
    s: f64,
    hs_sq: f64,
    hs: f64,
}

#[derive(Serialize)]
struct ComparisonBody {
    #[serde(flatten)]
    report: sobolev::ComparisonReport,
    pass: bool,
}

fn compare_hs(ctx: &mut Ctx, input: &Input) -> CliResult<ExitCode> {
    let u = ctx.load(input)?;
    let s = ctx
        .res
        .optional("s", ctx.flags.s)?
        .ok_or_else(|| CliError::Usage("compare-hs needs --s".into()))?;
    if !(s >= 0.0) {
        return Err(CliError::Usage(format!("s = {s} must be nonnegative")));
    }
    let r_raw = ctx.res.value("R", ctx.flags.r.clone(), "0".to_string())?;
    let out = ctx.out()?;
    if s.fract() == 0.0 {
        let hs_sq = sobolev::hs_seminorm_sq(&u, s);
        let body = IntegerReport {
            s,
            hs_sq,
            hs: hs_sq.sqrt(),
        };
        emit(out.as_deref(), &to_json(ctx, body)?)?;
        return Ok(ExitCode::SUCCESS);
    }
    let r = if r_raw.eq_ignore_ascii_case("r0") {
        scattering::estimate_r0(&u)?
    } else {
        r_raw
            .parse::<f64>()
            .map_err(|_| CliError::Usage(format!("--R expects a number or R0, got '{r_raw}'")))?
    };
    let report = sobolev::compare(&u, s, r)?;
    let pass = report.passed();
    emit(out.as_deref(), &to_json(ctx, ComparisonBody { report, pass })?)?;
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

/// The square root of `d` nearest to `target`.
fn nearest_root(d: C64, target: C64) -> C64 {
    let r = d.sqrt();
    if (r - target).norm() <= (-r - target).norm() {
        r
    } else {
        -r
    }
}

fn scatter(ctx: &mut Ctx, input: &Input, method: Option<String>) -> CliResult<ExitCode> {
    let u = ctx.load(input)?;
    let lambdas = ctx.lambdas()?;
    if lambdas.is_empty() {
        return Err(CliError::Usage("scatter needs at least one --lambda-sq".into()));
    }
    let method = ctx.res.value("method", method, "jost,determinant".to_string())?;
    let methods: Vec<&str> = method.split(',').map(str::trim).collect();
    if let Some(m) = methods.iter().find(|m| !matches!(**m, "jost" | "determinant" | "series")) {
        return Err(CliError::Usage(format!("unknown method '{m}' (jost, determinant, series)")));
    }
    let format = ctx.format("json")?;
    let out = ctx.out()?;
    let mut rows = Vec::new();
    for l in lambdas {
        let p = SpectralParameter::from_lambda_sq(l)?;
        let det = scattering::perturbation_determinant(&u, &p)?;
        let jost = if methods.contains(&"jost") {
            Some(scattering::jost_transmission(&u, &p)?)
        } else {
            None
        };
        let residual = |a: C64| (a * a - det).norm() / det.norm();
        for m in &methods {
            let a = match *m {
                "jost" => jost.expect("computed"),
                "determinant" => nearest_root(det, jost.unwrap_or(C64::new(1.0, 0.0))),
                _ => (scattering::log_a_series(&u, &p, 12)?).exp(),
            };
            rows.push(TransmissionRow::new(&p, a, m, residual(a)));
        }
    }
    let text = if format == "csv" {
        csv_table(&rows)?
    } else {
        to_json(ctx, RowsBody { rows: &rows })?
    };
    emit(out.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct RowsBody<'a, T: Serialize> {
    rows: &'a [T],
}

fn phi(ctx: &mut Ctx, input: &Input, l: Option<u32>) -> CliResult<ExitCode> {
    let u = ctx.load(input)?;
    let rhos = ctx.rhos()?;
    if rhos.is_empty() {
        return Err(CliError::Usage("phi needs at least one --rho".into()));
    }
    let l = ctx.res.value("L", l, 1u32)?;
    let format = ctx.format("csv")?;
    let out = ctx.out()?;
    let r0 = scattering::estimate_r0(&u)?;
    let mut rows: Vec<PhiSample> = Vec::new();
    for rho in rhos {
        if rho < r0 {
            log::warn!("rho = {rho} is below the estimated R_0 = {r0:.4}");
        }
        rows.push(sobolev::phi_sample(&u, rho, l)?);
    }
    let text = if format == "csv" {
        csv_table(&rows)?
    } else {
        to_json(ctx, PhiBody { r0, rows: &rows })?
    };
    emit(out.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct PhiBody<'a> {
    r0: f64,
    rows: &'a [PhiSample],
}

fn profile(ctx: &mut Ctx, name: &str) -> CliResult<ExitCode> {
    let (n0, l0) = profile_defaults(name);
    let n = ctx.res.value("grid", ctx.flags.grid, n0)?;
    let l = ctx.res.value("domain", ctx.flags.domain, l0)?;
    let u = profiles::named(name, n, l)?;
    let out = ctx
        .out()?
        .ok_or_else(|| CliError::Usage("profile needs --out".into()))?;
    let by_ext = if out.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) { "csv" } else { "bin" };
    let format = ctx.res.value("format", ctx.flags.format.clone(), by_ext.to_string())?;
    if !matches!(format.as_str(), "bin" | "csv") {
        return Err(CliError::Usage(format!("unknown profile format '{format}' (bin, csv)")));
    }
    if format == "csv" {
        let mut text = String::from("re,im\n");
        for z in u.values() {
            text += &format!("{:e},{:e}\n", z.re, z.im);
        }
        emit(Some(&out), &text)?;
    } else {
        u.write_binary(&out)?;
    }
    eprintln!("wrote {} (N = {n}, L = {l})", out.display());
    Ok(ExitCode::SUCCESS)
}

fn symbols(ctx: &mut Ctx, k: usize) -> CliResult<ExitCode> {
    let (d, a) = hierarchy::shared().table().level(k)?;
    #[derive(Serialize)]
    struct Body {
        k: usize,
        denominator_power: usize,
        diagonal: dnls::resolvent::SymbolDump,
        antidiagonal: dnls::resolvent::SymbolDump,
    }
    let out = ctx.out()?;
    let body = Body {
        k,
        denominator_power: k + 1,
        diagonal: d.to_json(),
        antidiagonal: a.to_json(),
    };
    emit(out.as_deref(), &to_json(ctx, body)?)?;
    Ok(ExitCode::SUCCESS)
}
