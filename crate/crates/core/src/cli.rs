//! Command-line driver: configuration, subcommands, report files and exit codes.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::bounds;
use crate::error::Error;
use crate::fit::{decay_fit, DecayFit};
use crate::ladder::{derived_beta_bound, exponent_ladder, LadderParams};
use crate::nondegeneracy::{check_with_polyhedron, NondegeneracyParams, NondegeneracyVerdict, Status};
use crate::phase::{CutoffSpec, Multidegree, Phase};
use crate::polytope::NewtonPolyhedron;
use crate::quadrature::{geometric_grid, lambda_sweep};
use crate::rational::{format_rational, parse_rational, to_f64, Q};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: u8 = 0;
pub const EXIT_PARSE: u8 = 1;
pub const EXIT_DEGENERATE: u8 = 2;
pub const EXIT_INCONCLUSIVE: u8 = 3;
pub const EXIT_SWEEP: u8 = 4;
/// verify-decay ran but the fit disagrees with the predicted pair.
pub const EXIT_MISMATCH: u8 = 5;

#[derive(Parser, Debug)]
#[command(
    name = "newtonosc",
    version,
    about = "Newton polyhedra and oscillatory integral decay for polynomial phases"
)]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed recorded in every output header.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Polyhedron, ladder and nondegeneracy reports.
    Analyze(PhaseArgs),
    /// Face-by-face nondegeneracy verdict; exits 2 when a witness is found.
    Nondegeneracy(PhaseArgs),
    /// Exponent ladder of the asymptotic expansion.
    Ladder(PhaseArgs),
    /// λ-sweep and decay fit against the predicted exponent.
    VerifyDecay(PhaseArgs),
    /// Constant ladder, gradient ratio table and dyadic bound sum.
    Bounds(PhaseArgs),
    /// Per-box oscillatory integrals against their dyadic bound.
    BoxCheck(PhaseArgs),
}

#[derive(Args, Debug, Default)]
pub struct PhaseArgs {
    /// Phase JSON file (overrides the config).
    pub phase: Option<PathBuf>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub refine: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub p_max: Option<String>,
    #[arg(long)]
    pub n_max: Option<u32>,
    #[arg(long)]
    pub filter: Option<bool>,
    /// Run even when the stored verdict is not Nondegenerate.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub phase: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
    pub cutoff: CutoffSpec,
    pub sweep: SweepConfig,
    pub nondegeneracy: NondegeneracyConfig,
    pub ladder: LadderConfig,
    pub bounds: BoundsConfig,
    pub box_check: BoxCheckConfig,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            phase: None,
            out: PathBuf::from("out"),
            seed: 0,
            cutoff: CutoffSpec::default(),
            sweep: SweepConfig::default(),
            nondegeneracy: NondegeneracyConfig::default(),
            ladder: LadderConfig::default(),
            bounds: BoundsConfig::default(),
            box_check: BoxCheckConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub points: usize,
    pub quality: u32,
    pub beta: Option<Vec<u32>>,
    /// Allowed |p̂ − p₀|.
    pub p_tolerance: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            lambda_min: 1e2,
            lambda_max: 1e5,
            points: 25,
            quality: 1,
            beta: None,
            p_tolerance: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NondegeneracyConfig {
    pub grid: usize,
    pub refine: usize,
    pub tol: f64,
}

impl Default for NondegeneracyConfig {
    fn default() -> Self {
        let p = NondegeneracyParams::default();
        NondegeneracyConfig {
            grid: p.grid_per_axis,
            refine: p.refine_depth,
            tol: p.degeneracy_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct LadderConfig {
    /// Rational string; defaults to 1/t + 1.
    pub p_max: Option<String>,
    /// Defaults to d + 1.
    pub n_max: Option<u32>,
    pub filter: bool,
    pub beta_bound: Option<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsConfig {
    pub j_max: u32,
    pub grid: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub points: usize,
    pub beta: Option<Vec<u32>>,
    pub n_max: Option<u32>,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        BoundsConfig {
            j_max: 20,
            grid: 64,
            lambda_min: 1e2,
            lambda_max: 1e6,
            points: 17,
            beta: None,
            n_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoxCheckConfig {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub points: usize,
    pub j_min: u32,
    pub j_max: u32,
    pub n_max: u32,
    pub beta: Option<Vec<u32>>,
    pub panel_budget: u64,
}

impl Default for BoxCheckConfig {
    fn default() -> Self {
        BoxCheckConfig {
            lambda_min: 1e2,
            lambda_max: 1e4,
            points: 9,
            j_min: 0,
            j_max: 10,
            n_max: 1,
            beta: None,
            panel_budget: 2_000_000,
        }
    }
}

/// A CLI failure carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Failure {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match e {
            Error::DegeneratePhase { .. } => EXIT_DEGENERATE,
            Error::SweepFailure | Error::PanelBudget { .. } => EXIT_SWEEP,
            _ => EXIT_PARSE,
        };
        Failure::new(code, e.to_string())
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::new(EXIT_PARSE, format!("{}: {e}", path.display()))
}

/// Everything a subcommand needs after configuration is resolved.
pub struct Session {
    pub config: AnalysisConfig,
    pub phase: Phase,
    pub poly: NewtonPolyhedron,
    pub hash: String,
    pub out: PathBuf,
}

impl Session {
    fn header(&self) -> serde_json::Map<String, Value> {
        let mut m = serde_json::Map::new();
        m.insert("tool".into(), json!("newtonosc"));
        m.insert("version".into(), json!(VERSION));
        m.insert("config_hash".into(), json!(self.hash));
        m.insert("seed".into(), json!(self.config.seed));
        m
    }

    fn write_json(&self, name: &str, payload: Value) -> Result<(), Failure> {
        let mut m = self.header();
        match payload {
            Value::Object(p) => m.extend(p),
            other => {
                m.insert("data".into(), other);
            }
        }
        let mut text = serde_json::to_string_pretty(&Value::Object(m)).expect("JSON values serialize");
        text.push('\n');
        self.write(name, &text)
    }

    fn write_csv(&self, name: &str, body: &str) -> Result<(), Failure> {
        let text = format!(
            "# newtonosc {VERSION} config_hash={} seed={}\n{body}",
            self.hash, self.config.seed
        );
        self.write(name, &text)
    }

    fn write(&self, name: &str, text: &str) -> Result<(), Failure> {
        fs::create_dir_all(&self.out).map_err(|e| io_failure(&self.out, e))?;
        let path = self.out.join(name);
        fs::write(&path, text).map_err(|e| io_failure(&path, e))
    }

    fn nondegeneracy_params(&self) -> NondegeneracyParams {
        NondegeneracyParams {
            grid_per_axis: self.config.nondegeneracy.grid,
            refine_depth: self.config.nondegeneracy.refine,
            degeneracy_tol: self.config.nondegeneracy.tol,
        }
    }

    fn beta(&self, field: &str, b: &Option<Vec<u32>>) -> Result<Multidegree, Failure> {
        let d = self.phase.dimension();
        match b {
            None => Ok(Multidegree::zeros(d)),
            Some(v) if v.len() == d => Ok(Multidegree(v.clone())),
            Some(v) => Err(Failure::new(
                EXIT_PARSE,
                format!("{field}: expected {d} entries, got {}", v.len()),
            )),
        }
    }
}

fn parse_failure(field: &str, message: impl std::fmt::Display) -> Failure {
    Failure::new(EXIT_PARSE, format!("invalid {field}: {message}"))
}

/// Loads the config, applies flag overrides, reads the phase and hashes the result.
pub fn open_session(cli: &Cli, args: &PhaseArgs) -> Result<Session, Failure> {
    let (mut config, base) = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
            let cfg: AnalysisConfig = toml::from_str(&text).map_err(|e| parse_failure("config", e.message()))?;
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            (cfg, base)
        }
        None => (AnalysisConfig::default(), PathBuf::new()),
    };
    if let Some(p) = &args.phase {
        config.phase = Some(p.clone());
    } else if let Some(p) = &config.phase {
        config.phase = Some(base.join(p));
    }
    if let Some(o) = &cli.out {
        config.out = o.clone();
    } else if cli.config.is_some() && config.out.is_relative() {
        config.out = base.join(&config.out);
    }
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    if let Some(g) = args.grid {
        config.nondegeneracy.grid = g;
    }
    if let Some(r) = args.refine {
        config.nondegeneracy.refine = r;
    }
    if let Some(t) = args.tol {
        config.nondegeneracy.tol = t;
    }
    if let Some(p) = &args.p_max {
        config.ladder.p_max = Some(p.clone());
    }
    if let Some(n) = args.n_max {
        config.ladder.n_max = Some(n);
    }
    if let Some(f) = args.filter {
        config.ladder.filter = f;
    }
    config.cutoff.validate().map_err(|e| parse_failure("cutoff", e))?;
    if !(config.nondegeneracy.tol > 0.0) {
        return Err(parse_failure("nondegeneracy.tol", "must be positive"));
    }
    if config.nondegeneracy.grid < 2 {
        return Err(parse_failure("nondegeneracy.grid", "must be at least 2"));
    }
    let phase_path = config
        .phase
        .clone()
        .ok_or_else(|| parse_failure("phase", "no phase file given"))?;
    let text = fs::read_to_string(&phase_path).map_err(|e| io_failure(&phase_path, e))?;
    let phase = Phase::from_json(&text)?;
    let poly = NewtonPolyhedron::build(&phase)?;

    let mut hashed = serde_json::to_value(&config).expect("config serializes");
    hashed["phase"] = phase.to_value();
    hashed["out"] = Value::Null;
    let digest = Sha256::digest(serde_json::to_vec(&hashed).expect("JSON values serialize"));
    let hash = digest.iter().map(|b| format!("{b:02x}")).collect::<String>();
    let out = config.out.clone();
    Ok(Session {
        config,
        phase,
        poly,
        hash,
        out,
    })
}

fn status_code(status: Status) -> u8 {
    match status {
        Status::Nondegenerate => EXIT_OK,
        Status::Degenerate => EXIT_DEGENERATE,
        Status::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn write_nondegeneracy(s: &Session) -> Result<NondegeneracyVerdict, Failure> {
    let v = check_with_polyhedron(&s.phase, &s.poly, s.nondegeneracy_params());
    s.write_json("nondegeneracy.json", json!({ "verdict": v }))?;
    Ok(v)
}

fn write_ladder(s: &Session) -> Result<(), Failure> {
    let t = s.poly.newton_distance()?;
    let p_max = match &s.config.ladder.p_max {
        Some(text) => parse_rational(text).map_err(|e| parse_failure("ladder.p_max", e))?,
        None => t.recip() + Q::from_integer(1.into()),
    };
    let n_max = s.config.ladder.n_max.unwrap_or(s.phase.dimension() as u32 + 1);
    let mut params = LadderParams::new(p_max.clone(), n_max, s.config.ladder.filter);
    params.beta_bound = match &s.config.ladder.beta_bound {
        Some(b) => Some(b.clone()),
        None if !s.poly.is_convenient() => Some(derived_beta_bound(&s.poly, &p_max, n_max)),
        None => None,
    };
    let ladder = exponent_ladder(&s.poly, &params)?;
    s.write_json("ladder.json", json!({ "ladder": ladder }))
}

fn write_polyhedron(s: &Session) -> Result<(), Failure> {
    s.write_json(
        "polyhedron.json",
        json!({ "phase": s.phase.to_value(), "polyhedron": s.poly.report() }),
    )
}

/// Reads the verdict stored by a previous run, or computes and stores one.
fn current_status(s: &Session) -> Result<Status, Failure> {
    let stored = fs::read_to_string(s.out.join("nondegeneracy.json"))
        .ok()
        .and_then(|t| serde_json::from_str::<Value>(&t).ok())
        .filter(|v| v["config_hash"] == json!(s.hash))
        .and_then(|v| v["verdict"]["status"].as_str().map(str::to_owned));
    Ok(match stored.as_deref() {
        Some("Nondegenerate") => Status::Nondegenerate,
        Some("Degenerate") => Status::Degenerate,
        Some("Inconclusive") => Status::Inconclusive,
        _ => write_nondegeneracy(s)?.status,
    })
}

fn require_nondegenerate(s: &Session, force: bool) -> Result<(), Failure> {
    let status = current_status(s)?;
    if status != Status::Nondegenerate && !force {
        return Err(Failure::new(
            status_code(status),
            format!("phase is {status:?}; rerun with --force to proceed"),
        ));
    }
    Ok(())
}

fn warn_radius(s: &Session) {
    if let Ok(c) = bounds::constants_report(&s.phase, &s.poly, 16) {
        if s.config.cutoff.radius > c.s() {
            eprintln!(
                "warning: cutoff radius {} exceeds the sufficient radius s = {:e}",
                s.config.cutoff.radius,
                c.s()
            );
        }
    }
}

fn fit_report(fit: &DecayFit, p0: &Q, q0: usize, pass: bool) -> String {
    format!(
        "p_theory = {}\nq_theory = {q0}\np_hat = {}\nq_hat = {}\nC_hat = {}\nresidual = {}\nwindow = [{}, {}]\npoints = {}\nresult = {}\n",
        format_rational(p0),
        fit.p_hat,
        fit.q_hat,
        fit.c_hat,
        fit.residual,
        fit.window[0],
        fit.window[1],
        fit.points,
        if pass { "pass" } else { "fail" }
    )
}

fn verify_decay(s: &Session, force: bool) -> Result<u8, Failure> {
    require_nondegenerate(s, force)?;
    warn_radius(s);
    let c = &s.config.sweep;
    let beta = s.beta("sweep.beta", &c.beta)?;
    let (p0, logp) = bounds::theoretical_bound(&s.poly, &beta)?;
    let sweep = lambda_sweep(
        &s.phase,
        &s.config.cutoff,
        &beta,
        c.lambda_min,
        c.lambda_max,
        c.points,
        c.quality,
    )?;
    s.write_csv("sweep.csv", &sweep.to_csv())?;
    let fit = decay_fit(&sweep, s.phase.dimension())?;
    let pass = (fit.p_hat - to_f64(&p0)).abs() <= c.p_tolerance && fit.q_hat as usize == logp;
    let report = fit_report(&fit, &p0, logp, pass);
    s.write_csv("fit.txt", &report)?;
    print!("{report}");
    Ok(if pass { EXIT_OK } else { EXIT_MISMATCH })
}

fn run_bounds(s: &Session, force: bool) -> Result<u8, Failure> {
    require_nondegenerate(s, force)?;
    let c = &s.config.bounds;
    let constants = bounds::constants_report(&s.phase, &s.poly, c.grid)?;
    if s.config.cutoff.radius > constants.s() {
        eprintln!(
            "warning: cutoff radius {} exceeds the sufficient radius s = {:e}",
            s.config.cutoff.radius,
            constants.s()
        );
    }
    s.write_json("constants.json", json!({ "constants": constants.to_value() }))?;
    let table = bounds::gradient_ratio_table(&s.phase, &s.poly, c.j_max, c.grid)?;
    s.write_csv("lemma1.csv", &table.to_csv())?;
    let beta = s.beta("bounds.beta", &c.beta)?;
    let lambdas = geometric_grid(c.lambda_min, c.lambda_max, c.points);
    let rows = bounds::bound_sum_table(&s.poly, &beta, &lambdas, c.n_max)?;
    s.write_csv("boundsum.csv", &bounds::bound_sum_csv(&rows))?;
    let norm: Vec<f64> = rows.iter().map(|r| r.normalized).collect();
    println!("s = {:e}", constants.s());
    println!("lemma1 min ratio = {:e}", table.min_ratio(0..=c.j_max));
    println!("boundsum max/median = {}", bounds::max_over_median(&norm));
    Ok(EXIT_OK)
}

fn box_check(s: &Session, force: bool) -> Result<u8, Failure> {
    require_nondegenerate(s, force)?;
    let c = &s.config.box_check;
    let beta = s.beta("box_check.beta", &c.beta)?;
    let lambdas = geometric_grid(c.lambda_min, c.lambda_max, c.points);
    let rows = bounds::box_bound_check(
        &s.phase,
        &s.poly,
        &beta,
        &lambdas,
        c.j_min..=c.j_max,
        c.n_max,
        c.panel_budget,
    )?;
    s.write_csv("boxcheck.csv", &bounds::box_bound_csv(&rows))?;
    let unreliable = rows.iter().filter(|r| !r.reliable).count();
    println!("max J/B = {:e}", bounds::box_bound_constant(&rows));
    println!("unreliable rows = {unreliable} of {}", rows.len());
    Ok(EXIT_OK)
}

fn dispatch(cli: &Cli) -> Result<u8, Failure> {
    let args = match &cli.command {
        Command::Analyze(a)
        | Command::Nondegeneracy(a)
        | Command::Ladder(a)
        | Command::VerifyDecay(a)
        | Command::Bounds(a)
        | Command::BoxCheck(a) => a,
    };
    let s = open_session(cli, args)?;
    match &cli.command {
        Command::Analyze(_) => {
            write_polyhedron(&s)?;
            write_ladder(&s)?;
            let v = write_nondegeneracy(&s)?;
            println!("{:?}", v.status);
            Ok(status_code(v.status))
        }
        Command::Nondegeneracy(_) => {
            let v = write_nondegeneracy(&s)?;
            println!("{:?}", v.status);
            Ok(status_code(v.status))
        }
        Command::Ladder(_) => write_ladder(&s).map(|_| EXIT_OK),
        Command::VerifyDecay(a) => verify_decay(&s, a.force),
        Command::Bounds(a) => run_bounds(&s, a.force),
        Command::BoxCheck(a) => box_check(&s, a.force),
    }
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_phase(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, body).unwrap();
        p
    }

    const FIG3: &str = r#"{"dimension": 2, "terms": [
        {"exponents": [5, 0], "coefficient": 1},
        {"exponents": [0, 4], "coefficient": 1},
        {"exponents": [4, 1], "coefficient": 1}]}"#;

    fn run_in(dir: &Path, args: &[&str]) -> u8 {
        let out = dir.join("out");
        let mut v = vec!["newtonosc".to_string()];
        v.extend(args.iter().map(|s| s.to_string()));
        v.push("--out".into());
        v.push(out.display().to_string());
        run(v)
    }

    #[test]
    fn analyze_fig3_writes_ladder() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_phase(dir.path(), "fig3.json", FIG3);
        assert_eq!(
            run_in(dir.path(), &["analyze", p.to_str().unwrap(), "--filter", "true"]),
            0
        );
        let l: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/ladder.json")).unwrap()).unwrap();
        assert_eq!(l["ladder"]["terms"][0]["p"], "9/20");
        assert_eq!(l["ladder"]["terms"][0]["d"], 1);
        assert_eq!(l["version"], VERSION);
    }

    #[test]
    fn degenerate_exit_code() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_phase(
            dir.path(),
            "d.json",
            r#"{"dimension": 2, "terms": [
                {"exponents": [2, 0], "coefficient": 1},
                {"exponents": [1, 1], "coefficient": -2},
                {"exponents": [0, 2], "coefficient": 1}]}"#,
        );
        assert_eq!(run_in(dir.path(), &["analyze", p.to_str().unwrap()]), EXIT_DEGENERATE);
        let v: Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("out/nondegeneracy.json")).unwrap()).unwrap();
        assert!(v["verdict"]["faces"]
            .as_array()
            .unwrap()
            .iter()
            .any(|f| !f["witness"].is_null()));
        assert_eq!(run_in(dir.path(), &["bounds", p.to_str().unwrap()]), EXIT_DEGENERATE);
    }

    #[test]
    fn constant_term_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_phase(
            dir.path(),
            "c.json",
            r#"{"dimension": 1, "terms": [{"exponents": [0], "coefficient": 1}, {"exponents": [2], "coefficient": 1}]}"#,
        );
        assert_eq!(run_in(dir.path(), &["analyze", p.to_str().unwrap()]), EXIT_PARSE);
    }

    #[test]
    fn unknown_config_field_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.toml");
        fs::write(&cfg, "phase = \"x.json\"\n[sweep]\nlambda_mn = 3.0\n").unwrap();
        assert_eq!(
            run(["newtonosc", "--config", cfg.to_str().unwrap(), "analyze"]),
            EXIT_PARSE
        );
    }

    #[test]
    fn reruns_are_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_phase(dir.path(), "fig3.json", FIG3);
        let read_all = || {
            ["polyhedron.json", "ladder.json", "nondegeneracy.json"]
                .map(|n| fs::read(dir.path().join("out").join(n)).unwrap())
        };
        run_in(dir.path(), &["analyze", p.to_str().unwrap(), "--seed", "7"]);
        let first = read_all();
        run_in(dir.path(), &["analyze", p.to_str().unwrap(), "--seed", "7"]);
        assert_eq!(first, read_all());
    }
}
