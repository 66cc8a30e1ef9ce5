//! The `curved2body` command line.
//!
//! Exit codes: 0 success (including "no equilibrium exists"), 1 failed
//! verification, 2 domain or I/O error, 64 usage error.

use std::ffi::OsString;
use std::fmt;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::continuation_scan::{detect_q_transitions, detect_transitions, family_sweep, q_sweep, region_raster};
use crate::equilibria::{classify_re, select, ABranch, Family, RERecord, RelEquilibrium};
use crate::export;
use crate::reduced_system::{integrate_with, reconstruct, IntegrateOptions, ModelParams, PotentialFamily, ReducedState};
use crate::stability::{hessian_on_leaf, jacobian_at, spectrum, Tolerances};
use crate::symmetry::GroupElement;
use crate::verify;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialArg {
    /// −G cot_κ q
    AttractingCot,
    /// G cot_κ q
    RepellingCot,
    /// G κ cot_κ q
    CurvatureCot,
}

impl PotentialArg {
    fn family(self, g: f64) -> PotentialFamily {
        match self {
            PotentialArg::AttractingCot => PotentialFamily::AttractingCot { g },
            PotentialArg::RepellingCot => PotentialFamily::RepellingCot { g },
            PotentialArg::CurvatureCot => PotentialFamily::CurvatureCot { g },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyArg {
    Attracting,
    AttractingRepelling,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::Attracting => Family::Attracting,
            FamilyArg::AttractingRepelling => Family::AttractingRepelling,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchArg {
    Plus,
    Minus,
}

impl From<BranchArg> for ABranch {
    fn from(b: BranchArg) -> ABranch {
        match b {
            BranchArg::Plus => ABranch::Plus,
            BranchArg::Minus => ABranch::Minus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
    Text,
}

/// A closed interval written `lo:hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Span(pub f64, pub f64);

impl FromStr for Span {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got {s:?}"))?;
        let lo = a.trim().parse::<f64>().map_err(|e| format!("{a:?}: {e}"))?;
        let hi = b.trim().parse::<f64>().map_err(|e| format!("{b:?}: {e}"))?;
        if !(lo <= hi) {
            return Err(format!("empty interval {s:?}"));
        }
        Ok(Span(lo, hi))
    }
}

/// Grid size written `NKxNQ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid(pub usize, pub usize);

impl FromStr for Grid {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once('x').ok_or_else(|| format!("expected NKxNQ, got {s:?}"))?;
        Ok(Grid(a.parse().map_err(|e| format!("{a:?}: {e}"))?, b.parse().map_err(|e| format!("{b:?}: {e}"))?))
    }
}

/// A reduced state written `q,p,m1,m2,m3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateArg(pub [f64; 5]);

impl FromStr for StateArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let v: Vec<f64> = s.split(',').map(|x| x.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
        let arr: [f64; 5] = v.try_into().map_err(|_| "expected five comma-separated numbers q,p,m1,m2,m3".to_string())?;
        Ok(StateArg(arr))
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct PointArgs {
    #[arg(long)]
    pub kappa: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    #[arg(long)]
    pub q: f64,
    #[arg(long, value_enum, default_value_t = PotentialArg::AttractingCot)]
    pub potential: PotentialArg,
    /// Coupling constant G.
    #[arg(long, default_value_t = 1.0)]
    pub g: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct EigsArgs {
    #[arg(long)]
    pub kappa: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    #[arg(long)]
    pub q: f64,
    /// Follow a continuing family; overrides --potential and --branch.
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    #[arg(long, value_enum, default_value_t = PotentialArg::AttractingCot)]
    pub potential: PotentialArg,
    /// Restrict to one A-root; all equilibria at q otherwise.
    #[arg(long, value_enum)]
    pub branch: Option<BranchArg>,
    #[arg(long, default_value_t = 1.0)]
    pub g: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct SignatureArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub point: PointArgs,
    /// Member of the equal-mass right-angled family, by axis angle.
    #[arg(long)]
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct ScanArgs {
    /// κ-sweep of a continuing family at fixed q (needs --q, --kappa-range).
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    /// Raster (needs --kappa-range, --q-range, --resolution) or q-sweep
    /// (needs --kappa, --q-range, --branch).
    #[arg(long, value_enum)]
    pub potential: Option<PotentialArg>,
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub kappa_range: Option<Span>,
    #[arg(long, allow_hyphen_values = true)]
    pub q_range: Option<Span>,
    #[arg(long)]
    pub resolution: Option<Grid>,
    #[arg(long, value_enum)]
    pub branch: Option<BranchArg>,
    /// Samples for κ- and q-sweeps.
    #[arg(long, default_value_t = 81)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub g: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct DynamicsArgs {
    #[arg(long)]
    pub kappa: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    #[arg(long, value_enum, default_value_t = PotentialArg::AttractingCot)]
    pub potential: PotentialArg,
    #[arg(long, default_value_t = 1.0)]
    pub g: f64,
    /// Initial state q,p,m1,m2,m3.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["q", "branch"])]
    pub state: Option<StateArg>,
    /// Start at the equilibrium with this separation (with --branch).
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, value_enum)]
    pub branch: Option<BranchArg>,
    #[arg(long)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Uniform output intervals; 0 reports every accepted step.
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct VerifyArgs {
    /// Run only these criteria (1 to 11).
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<u8>,
}

const CLASSIFY_HELP: &str = "Output (json): array of records {kappa, mu, q, branch, state{q,p,m1,m2,m3}, residual, casimir, sphere_data}.";
const EIGS_HELP: &str = "Output (json): array of {kappa, mu, q, branch, state, eigenvalues[{re,im}], classification, zero_count, thresholds, leaf_signature?, note?}.";
const SIGNATURE_HELP: &str = "Output (json): array of {branch, q, signs, eigenvalues_on_leaf}.";
const SCAN_HELP: &str = "Output:
  family table (csv): kappa,q,p,m1,m2,m3,casimir,re1,im1,re2,im2,re3,im3,re4,im4,re5,im5,class
  raster (csv): kappa,q,label  plus a sidecar <out>.json {potential, mu, kappa_range, q_range, resolution, curves}
  q-sweep (json): {rows, transitions[{parameter, kind}]}
Environment: CURVED2BODY_THREADS caps worker threads.";
const INTEGRATE_HELP: &str = "Output (csv): t,q,p,m1,m2,m3,H,C";
const RECONSTRUCT_HELP: &str = "Output (csv): t,x1,y1,z1,x2,y2,z2";
const VERIFY_HELP: &str = "Output (text or json): one line per criterion; exit 1 if any fails.";

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// List the relative equilibria at one separation.
    #[command(after_help = CLASSIFY_HELP)]
    Classify(PointArgs),
    /// Spectrum of the linearization at relative equilibria.
    #[command(after_help = EIGS_HELP)]
    Eigs(EigsArgs),
    /// Sign pattern of the Hessian on the symplectic leaf.
    #[command(after_help = SIGNATURE_HELP)]
    Signature(SignatureArgs),
    /// Family tables, q-sweeps with transitions, and stability rasters.
    #[command(after_help = SCAN_HELP)]
    Scan(ScanArgs),
    /// Integrate the reduced equations.
    #[command(after_help = INTEGRATE_HELP)]
    Integrate(DynamicsArgs),
    /// Integrate and place both particles on the surface.
    #[command(after_help = RECONSTRUCT_HELP)]
    Reconstruct(DynamicsArgs),
    /// Run the invariant suite.
    #[command(after_help = VERIFY_HELP)]
    Verify(VerifyArgs),
    /// Run a configuration saved with --save-config.
    #[serde(skip)]
    Replay { config: PathBuf },
}

#[derive(Debug, Parser)]
#[command(name = "curved2body", version, about = "Two-body dynamics on surfaces of constant curvature")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the artifact here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Save the fully resolved configuration as JSON.
    #[arg(long, global = true)]
    pub save_config: Option<PathBuf>,
    /// Real parts above this multiple of the Jacobian norm count as unstable.
    #[arg(long, global = true)]
    pub tol_re: Option<f64>,
    /// Moduli below this multiple of the Jacobian norm count as zero.
    #[arg(long, global = true)]
    pub tol_zero: Option<f64>,
}

/// Everything a run depends on, with defaults filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub tolerances: Tolerances,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(crate::Error),
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Domain(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "io: {m}"),
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Domain(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Domain(_) | CliError::Io(_) => EXIT_DOMAIN,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

pub fn command() -> clap::Command {
    Cli::command()
}

fn default_format(cmd: &Command) -> Format {
    match cmd {
        Command::Classify(_) | Command::Eigs(_) | Command::Signature(_) => Format::Json,
        Command::Scan(s) if s.family.is_none() && s.resolution.is_none() => Format::Json,
        Command::Scan(_) | Command::Integrate(_) | Command::Reconstruct(_) => Format::Csv,
        Command::Verify(_) | Command::Replay { .. } => Format::Text,
    }
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> CliResult<RunConfig> {
        if let Command::Replay { config } = &cli.command {
            let text = std::fs::read_to_string(config)?;
            return serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("bad config {}: {e}", config.display())));
        }
        let mut tolerances = Tolerances::default();
        if let Some(t) = cli.tol_re {
            tolerances.re_rel = t;
        }
        if let Some(t) = cli.tol_zero {
            tolerances.zero_rel = t;
        }
        let format = cli.format.unwrap_or_else(|| default_format(&cli.command));
        Ok(RunConfig { command: cli.command, out: cli.out, format, tolerances })
    }
}

/// Parses arguments, runs, and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let save = cli.save_config.clone();
    let result = RunConfig::from_cli(cli).and_then(|cfg| {
        if let Some(path) = &save {
            std::fs::write(path, export::to_json_pretty(&cfg)? + "\n")?;
        }
        execute(&cfg, stdout, stderr)
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn emit(cfg: &RunConfig, stdout: &mut dyn Write, text: &str) -> CliResult<()> {
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn json_line<T: Serialize + ?Sized>(v: &T) -> CliResult<String> {
    Ok(export::to_json(v)? + "\n")
}

fn require_json(cfg: &RunConfig, what: &str) -> CliResult<()> {
    if cfg.format != Format::Json {
        return usage(format!("{what} output is json only"));
    }
    Ok(())
}

/// Runs a resolved configuration; the returned code is 0 or 1 (verify).
pub fn execute(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<i32> {
    match &cfg.command {
        Command::Classify(a) => {
            require_json(cfg, "classify")?;
            let params = ModelParams::normalized(a.kappa, a.mu, a.potential.family(a.g))?;
            let found = classify_re(&params, a.q)?;
            if found.right_angled.is_some() {
                writeln!(stderr, "note: a one-parameter right-angled family exists at this q; see `signature --theta`")?;
            }
            let records: Vec<RERecord> = found.equilibria.iter().map(|r| r.record()).collect();
            emit(cfg, stdout, &json_line(&records)?)?;
        }
        Command::Eigs(a) => {
            require_json(cfg, "eigs")?;
            let res = eigs_targets(a)?;
            let mut out = Vec::new();
            for re in &res {
                let j = jacobian_at(re)?;
                let rep = spectrum(&j, &cfg.tolerances);
                let note = (rep.classification == crate::stability::StabilityClass::DegenerateNilpotent).then(|| {
                    let sv = j.singular_values();
                    let rank = sv.iter().filter(|&&s| s > 1e-7 * sv.max()).count();
                    format!("nilpotent linearization: |J^2|/|J|^2 = {:.1e}, rank {rank}", (j * j).norm() / j.norm().powi(2))
                });
                let mut v = serde_json::json!({
                    "kappa": re.params.k(),
                    "mu": re.params.mu(),
                    "q": re.state.q,
                    "branch": re.branch,
                    "state": re.state,
                    "eigenvalues": rep.eigenvalues,
                    "classification": rep.classification,
                    "zero_count": rep.zero_count,
                    "thresholds": rep.thresholds,
                });
                // the leaf Hessian is undefined where the Poisson tensor loses rank
                if let Ok(sig) = hessian_on_leaf(re) {
                    v["leaf_signature"] = serde_json::json!(sig.signs);
                }
                if let Some(n) = note {
                    v["note"] = serde_json::json!(n);
                }
                out.push(v);
            }
            emit(cfg, stdout, &json_line(&out)?)?;
        }
        Command::Signature(a) => {
            require_json(cfg, "signature")?;
            let p = &a.point;
            let params = ModelParams::normalized(p.kappa, p.mu, p.potential.family(p.g))?;
            let found = classify_re(&params, p.q)?;
            let res: Vec<RelEquilibrium> = match (a.theta, &found.right_angled) {
                (Some(theta), Some(fam)) => vec![fam.member(theta)?],
                (Some(_), None) => return usage("--theta needs equal masses at the right angle"),
                (None, _) => found.equilibria,
            };
            let mut out = Vec::new();
            for re in &res {
                let sig = hessian_on_leaf(re)?;
                out.push(serde_json::json!({
                    "branch": re.branch, "q": re.state.q, "signs": sig.signs, "eigenvalues_on_leaf": sig.eigenvalues_on_leaf,
                }));
            }
            emit(cfg, stdout, &json_line(&out)?)?;
        }
        Command::Scan(a) => scan(cfg, a, stdout, stderr)?,
        Command::Integrate(a) | Command::Reconstruct(a) => {
            if cfg.format != Format::Csv {
                return usage("trajectories are written as csv");
            }
            let params = ModelParams::normalized(a.kappa, a.mu, a.potential.family(a.g))?;
            let s0 = match (a.state, a.q, a.branch) {
                (Some(StateArg(v)), _, _) => ReducedState::new(v[0], v[1], v[2], v[3], v[4]),
                (None, Some(q), Some(b)) => select(&params, q, b.into())?.state,
                _ => return usage("give --state, or --q with --branch"),
            };
            let mut opts = IntegrateOptions::new(a.t_end, a.tol);
            if a.samples > 0 {
                opts = opts.sampled(a.samples);
            }
            let traj = integrate_with(&params, &s0, &opts)?;
            let text = if matches!(cfg.command, Command::Integrate(_)) {
                export::trajectory_csv(&traj)
            } else {
                export::reconstruction_csv(&reconstruct(&params, &traj, &GroupElement::identity())?)
            };
            emit(cfg, stdout, &text)?;
        }
        Command::Verify(a) => return run_verify(cfg, a, stdout),
        Command::Replay { .. } => return usage("replay configurations cannot be nested"),
    }
    Ok(EXIT_OK)
}

fn eigs_targets(a: &EigsArgs) -> CliResult<Vec<RelEquilibrium>> {
    if let Some(f) = a.family {
        return Ok(vec![Family::from(f).member(a.kappa, a.q, a.mu)?]);
    }
    let params = ModelParams::normalized(a.kappa, a.mu, a.potential.family(a.g))?;
    Ok(match a.branch {
        Some(b) => vec![select(&params, a.q, b.into())?],
        None => classify_re(&params, a.q)?.equilibria,
    })
}

fn scan(cfg: &RunConfig, a: &ScanArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    match (a.family, a.potential) {
        (Some(f), None) => {
            let (Some(q), Some(Span(k0, k1))) = (a.q, a.kappa_range) else {
                return usage("family scans need --q and --kappa-range");
            };
            let table = family_sweep(f.into(), q, a.mu, (k0, k1), a.n)?;
            let transitions = detect_transitions(&table);
            match cfg.format {
                Format::Csv => {
                    for t in &transitions {
                        writeln!(stderr, "transition: {:?} at kappa = {}", t.kind, export::fmt_f64(t.parameter))?;
                    }
                    emit(cfg, stdout, &export::family_table_csv(&table))
                }
                Format::Json => emit(cfg, stdout, &json_line(&serde_json::json!({"table": table, "transitions": transitions}))?),
                Format::Text => usage("family tables are csv or json"),
            }
        }
        (None, Some(p)) => {
            let pot = p.family(a.g);
            if let Some(Grid(nk, nq)) = a.resolution {
                let (Some(Span(k0, k1)), Some(Span(q0, q1))) = (a.kappa_range, a.q_range) else {
                    return usage("rasters need --kappa-range and --q-range");
                };
                let raster = region_raster(&pot, a.mu, (k0, k1), (q0, q1), (nk, nq))?;
                return match cfg.format {
                    Format::Csv => {
                        emit(cfg, stdout, &export::raster_csv(&raster))?;
                        let sidecar = json_line(&export::raster_sidecar(&raster))?;
                        match &cfg.out {
                            Some(path) => std::fs::write(sidecar_path(path), sidecar)?,
                            None => writeln!(stderr, "note: sidecar curves are written only with --out")?,
                        }
                        Ok(())
                    }
                    Format::Json => emit(cfg, stdout, &json_line(&raster)?),
                    Format::Text => usage("rasters are csv or json"),
                };
            }
            let (Some(k), Some(Span(q0, q1)), Some(b)) = (a.kappa, a.q_range, a.branch) else {
                return usage("q-sweeps need --kappa, --q-range and --branch (or --resolution for a raster)");
            };
            require_json(cfg, "q-sweep")?;
            let params = ModelParams::normalized(k, a.mu, pot)?;
            let sweep = q_sweep(&params, b.into(), (q0, q1), a.n)?;
            let transitions = detect_q_transitions(&sweep);
            emit(cfg, stdout, &json_line(&serde_json::json!({"rows": sweep.rows, "transitions": transitions}))?)
        }
        _ => usage("scan needs exactly one of --family or --potential"),
    }
}

/// `out.csv` → `out.json`; other names get `.json` appended.
pub fn sidecar_path(out: &Path) -> PathBuf {
    match out.extension() {
        Some(e) if e == "csv" => out.with_extension("json"),
        _ => PathBuf::from(format!("{}.json", out.display())),
    }
}

fn run_verify(cfg: &RunConfig, a: &VerifyArgs, stdout: &mut dyn Write) -> CliResult<i32> {
    let ids: Vec<u8> = if a.only.is_empty() { verify::CRITERIA.iter().map(|c| c.0).collect() } else { a.only.clone() };
    let mut results = Vec::new();
    for id in ids {
        match verify::run_criterion(id) {
            Some(r) => results.push(r),
            None => return usage(format!("no criterion {id}")),
        }
    }
    let text = match cfg.format {
        Format::Json => json_line(&results)?,
        Format::Text => {
            let mut s = String::new();
            for r in &results {
                s += &format!("{:>2} {} {}: {}\n", r.id, if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
            }
            s
        }
        Format::Csv => return usage("verify output is text or json"),
    };
    emit(cfg, stdout, &text)?;
    Ok(if results.iter().all(|r| r.passed) { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let mut full = vec!["curved2body"];
        full.extend_from_slice(args);
        let code = run(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn repelling_hyperbolic_is_empty() {
        let (code, out, _) = run_str(&["classify", "--kappa", "-1", "--mu", "0.5", "--q", "1.5", "--potential", "repelling-cot"]);
        assert_eq!((code, out.as_str()), (0, "[]\n"));
    }

    #[test]
    fn flat_kepler_record() {
        let (code, out, _) = run_str(&["classify", "--kappa", "0", "--mu", "0.5", "--q", "2.5", "--potential", "attracting-cot"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 1);
        assert_eq!(v[0]["branch"], "Keplerian");
    }

    #[test]
    fn out_of_interval_is_a_domain_error() {
        let (code, _, err) = run_str(&["classify", "--kappa", "0.2", "--mu", "0.5", "--q", "10"]);
        assert_eq!(code, 2);
        assert!(err.contains("OutOfInterval"));
    }

    #[test]
    fn usage_errors_exit_64() {
        assert_eq!(run_str(&["classify", "--kappa", "0"]).0, 64);
        assert_eq!(run_str(&["frobnicate"]).0, 64);
        assert_eq!(run_str(&["scan", "--mu", "0.5"]).0, 64);
        assert_eq!(run_str(&["--help"]).0, 0);
    }

    #[test]
    fn ranges_accept_negative_ends() {
        assert_eq!("-0.2:0.2".parse::<Span>().unwrap(), Span(-0.2, 0.2));
        assert!("0.2:-0.2".parse::<Span>().is_err());
        assert_eq!("64x32".parse::<Grid>().unwrap(), Grid(64, 32));
    }

    #[test]
    fn sidecar_names() {
        assert_eq!(sidecar_path(Path::new("a/r.csv")), PathBuf::from("a/r.json"));
        assert_eq!(sidecar_path(Path::new("r")), PathBuf::from("r.json"));
    }
}
