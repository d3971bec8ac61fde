use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Rational64;
use serde::Serialize;

use radwave::harness::{
    bound_expr, make_profile, parse_rational, verify_decay, Case, DecayBound, ProfileKind, SweepReport, SweepSpec,
};
use radwave::riemann::{RadialProfile, Riemann};
use radwave::suites::{descent_comparison, fd_comparison, run_suite, OracleRow, Suite, SuiteOptions};
use radwave::{dim_params, DimParams, Error, Tolerances};

#[derive(Parser)]
#[command(name = "radwave", version, about = "Radial wave solutions and decay-estimate verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate u0 and D^β u0 at one point.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        t: f64,
    },
    /// Sample D^β u0 against its majorant on rays, tubes and fixed radii.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Majorant to test; `theorem` picks the case from k.
        #[arg(long, value_enum, default_value_t = CaseArg::Theorem)]
        case: CaseArg,
    },
    /// Run a named verification suite.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        suite: SuiteArg,
    },
    /// Compare the Riemann solution with an independent oracle.
    OracleCompare {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        oracle: OracleArg,
    },
}

#[derive(Args)]
struct Common {
    /// Space dimension.
    #[arg(long)]
    n: Option<u32>,
    /// Smoothness index of the data envelope.
    #[arg(long, default_value_t = 1)]
    l: u32,
    /// Decay rate of the data envelope, e.g. `3/2`.
    #[arg(long, default_value = "1")]
    k: String,
    #[arg(long, default_value_t = 1.0)]
    eps: f64,
    /// Multi-index `β_r,β_t`.
    #[arg(long, default_value = "0,0")]
    beta: String,
    #[arg(long, value_enum, default_value_t = ProfileArg::Power)]
    profile: ProfileArg,
    /// Points per sweep line, samples per suite check, or oracle grid
    /// nodes per axis (cells per unit length for `fd`).
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Power,
    Compact,
    Zero,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum CaseArg {
    Theorem,
    Improved,
    A,
    B,
    C,
    D,
    E,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Params,
    Polynomials,
    Jets,
    Kernels,
    Representation,
    Pde,
    Huygens,
    Oracle,
    Decay,
    Lemmas,
    Majorants,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Params => Suite::Params,
            SuiteArg::Polynomials => Suite::Polynomials,
            SuiteArg::Jets => Suite::Jets,
            SuiteArg::Kernels => Suite::Kernels,
            SuiteArg::Representation => Suite::Representation,
            SuiteArg::Pde => Suite::Pde,
            SuiteArg::Huygens => Suite::Huygens,
            SuiteArg::Oracle => Suite::Oracle,
            SuiteArg::Decay => Suite::Decay,
            SuiteArg::Lemmas => Suite::Lemmas,
            SuiteArg::Majorants => Suite::Majorants,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleArg {
    Descent,
    Fd,
}

/// A run that completed but whose checks did not all pass.
struct Failed;

enum Failure {
    Config(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Numerical(format!("write failed: {e}"))
    }
}

fn config(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Failed)) => ExitCode::from(1),
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

type Outcome = Result<Result<(), Failed>, Failure>;

fn verdict(pass: bool) -> Result<(), Failed> {
    if pass {
        Ok(())
    } else {
        Err(Failed)
    }
}

/// Validated parameters shared by the subcommands.
struct Setup {
    dims: DimParams,
    l: u32,
    k: Rational64,
    eps: f64,
    beta: [usize; 2],
}

impl Common {
    fn dims(&self) -> Result<DimParams, Failure> {
        let n = self.n.ok_or_else(|| config("--n is required"))?;
        Ok(dim_params(n)?)
    }

    fn setup(&self) -> Result<Setup, Failure> {
        let dims = self.dims()?;
        let k = parse_rational(&self.k)?;
        let beta = parse_beta(&self.beta)?;
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(config(format!("--eps must be positive, got {}", self.eps)));
        }
        // Checks 1 ≤ l ≤ m, k ≥ 0 and |β| ≤ l.
        DecayBound::theorem(dims, k, self.l, (beta[0] + beta[1]) as u32)?;
        Ok(Setup {
            dims,
            l: self.l,
            k,
            eps: self.eps,
            beta,
        })
    }

    fn profiles(&self, s: &Setup) -> Result<(RadialProfile, RadialProfile), Failure> {
        let kind = match self.profile {
            ProfileArg::Zero => return Ok((RadialProfile::zero(), RadialProfile::zero())),
            ProfileArg::Power => ProfileKind::PowerEnvelope,
            ProfileArg::Compact => ProfileKind::CompactBump,
        };
        Ok(make_profile(kind, s.eps, s.k, s.l, s.dims)?)
    }

    fn format(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    fn sink(&self) -> Result<Box<dyn Write>, Failure> {
        Ok(match &self.out {
            Some(path) => Box::new(
                File::create(path).map_err(|e| config(format!("cannot create {}: {e}", path.display())))?,
            ),
            None => Box::new(io::stdout().lock()),
        })
    }
}

fn parse_beta(s: &str) -> Result<[usize; 2], Failure> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let parse = |p: &str| p.parse::<usize>().map_err(|_| config(format!("bad multi-index component {p:?}")));
    match parts.as_slice() {
        [a, b] => Ok([parse(a)?, parse(b)?]),
        _ => Err(config(format!("multi-index must be `β_r,β_t`, got {s:?}"))),
    }
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), Failure> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| Failure::Numerical(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

const POINT_HEADER: [&str; 8] = ["r", "t", "beta_r", "beta_t", "value", "bound", "ratio", "err_est"];

#[derive(Serialize)]
struct PointRow {
    r: f64,
    t: f64,
    beta_r: usize,
    beta_t: usize,
    value: f64,
    bound: f64,
    ratio: f64,
    err_est: f64,
}

fn write_points(out: &mut dyn Write, rows: &[PointRow]) -> Result<(), Failure> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    let csv_err = |e: csv::Error| Failure::Numerical(e.to_string());
    w.write_record(POINT_HEADER).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Nominal error of a successful evaluation: the quadrature meets
/// `quad_rel · max(|value|, 1)` or reports failure.
fn nominal_err(tol: &Tolerances, value: f64) -> f64 {
    tol.quad_rel * value.abs().max(1.0)
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Eval { common, r, t } => eval(&common, r, t),
        Command::Sweep { common, case } => sweep(&common, case),
        Command::Verify { common, suite } => verify(&common, suite.into()),
        Command::OracleCompare { common, oracle } => oracle_compare(&common, oracle),
    }
}

fn eval(common: &Common, r: f64, t: f64) -> Outcome {
    let s = common.setup()?;
    if !(r > 0.0 && r.is_finite() && t.is_finite()) {
        return Err(config(format!("need r > 0 and finite t, got r = {r}, t = {t}")));
    }
    let (phi, psi) = common.profiles(&s)?;
    let tol = Tolerances::default();
    let op = Riemann::new(s.dims, tol)?;
    let mut betas = vec![[0, 0]];
    if s.beta != [0, 0] {
        betas.push(s.beta);
    }
    let mut rows = Vec::new();
    for beta in betas {
        let value = op.derivative(&phi, &psi, beta, r, t)?.value;
        let bd = DecayBound::theorem(s.dims, s.k, s.l, (beta[0] + beta[1]) as u32)?;
        let bound = bound_expr(&bd, s.eps, r, t);
        rows.push(PointRow {
            r,
            t,
            beta_r: beta[0],
            beta_t: beta[1],
            value,
            bound,
            ratio: value.abs() / bound,
            err_est: nominal_err(&tol, value),
        });
    }
    let mut out = common.sink()?;
    match common.format(Format::Csv) {
        Format::Csv => write_points(&mut *out, &rows)?,
        Format::Json => write_json(&mut *out, &rows)?,
    }
    Ok(Ok(()))
}

fn sweep(common: &Common, case: CaseArg) -> Outcome {
    let s = common.setup()?;
    let b = (s.beta[0] + s.beta[1]) as u32;
    let bd = match case {
        CaseArg::Theorem => DecayBound::theorem(s.dims, s.k, s.l, b)?,
        CaseArg::Improved => DecayBound::improved(s.dims, s.k, s.l, b)?
            .ok_or_else(|| config("no improved bound applies to these parameters"))?,
        CaseArg::A => DecayBound::for_case(Case::A, s.dims, s.k, s.l, b, None)?,
        CaseArg::B => DecayBound::for_case(Case::B, s.dims, s.k, s.l, b, None)?,
        CaseArg::C => DecayBound::for_case(Case::C, s.dims, s.k, s.l, b, None)?,
        CaseArg::D => DecayBound::for_case(Case::D, s.dims, s.k, s.l, b, None)?,
        CaseArg::E => DecayBound::for_case(Case::E, s.dims, s.k, s.l, b, None)?,
    };
    let (phi, psi) = common.profiles(&s)?;
    let tol = Tolerances::default();
    let op = Riemann::new(s.dims, tol)?;
    let mut spec = SweepSpec::default();
    if let Some(g) = common.grid {
        if g < 2 {
            return Err(config("--grid needs at least 2 points per line"));
        }
        spec.points_per_line = g;
    }
    let rep: SweepReport = verify_decay(&op, &phi, &psi, &bd, s.beta, &spec)?;
    let mut out = common.sink()?;
    match common.format(Format::Csv) {
        Format::Csv => {
            let rows: Vec<PointRow> = rep
                .points
                .iter()
                .map(|p| PointRow {
                    r: p.r,
                    t: p.t,
                    beta_r: p.beta[0],
                    beta_t: p.beta[1],
                    value: p.value,
                    bound: p.bound,
                    ratio: p.ratio,
                    err_est: if p.error.is_some() { f64::NAN } else { nominal_err(&tol, p.value) },
                })
                .collect();
            write_points(&mut *out, &rows)?;
        }
        Format::Json => write_json(&mut *out, &rep)?,
    }
    Ok(verdict(rep.pass))
}

fn verify(common: &Common, suite: Suite) -> Outcome {
    if common.format(Format::Json) != Format::Json {
        return Err(config("verify reports are JSON only"));
    }
    let opts = SuiteOptions {
        n: common.n,
        seed: common.seed,
        points: common.grid,
    };
    let report = run_suite(suite, &opts)?;
    let mut out = common.sink()?;
    write_json(&mut *out, &report)?;
    Ok(verdict(report.pass))
}

const ORACLE_HEADER: [&str; 9] = ["r", "t", "beta_r", "beta_t", "riemann", "oracle", "abs_err", "rel_err", "err_est"];

#[derive(Serialize)]
struct Row {
    r: f64,
    t: f64,
    beta_r: usize,
    beta_t: usize,
    riemann: f64,
    oracle: f64,
    abs_err: f64,
    rel_err: f64,
    /// Error band of the oracle itself: zero for the exact descent
    /// formula, the coarse-fine difference for finite differences.
    err_est: f64,
}

#[derive(Serialize)]
struct OracleSummary<'a> {
    oracle: &'static str,
    n: u32,
    measured: f64,
    threshold: f64,
    pass: bool,
    rows: &'a [Row],
}

fn oracle_compare(common: &Common, oracle: OracleArg) -> Outcome {
    let dims = common.dims()?;
    let row = |v: &OracleRow, floor: f64| Row {
        r: v.r,
        t: v.t,
        beta_r: 0,
        beta_t: 0,
        riemann: v.riemann,
        oracle: v.oracle,
        abs_err: (v.riemann - v.oracle).abs(),
        rel_err: (v.riemann - v.oracle).abs() / v.oracle.abs().max(floor),
        err_est: v.band(),
    };
    let (rows, measured, threshold, pass, name) = match oracle {
        OracleArg::Descent => {
            if !dims.is_odd() {
                return Err(config("the descent oracle needs odd n"));
            }
            let vals = descent_comparison(dims, common.grid.unwrap_or(20))?;
            let floor = 1e-3 * vals.iter().map(|v| v.oracle.abs()).fold(0.0, f64::max);
            let rows: Vec<Row> = vals.iter().map(|v| row(v, floor)).collect();
            let worst = rows.iter().map(|r| r.rel_err).fold(0.0, f64::max);
            (rows, worst, 1e-6, worst <= 1e-6, "descent")
        }
        OracleArg::Fd => {
            let cells = common.grid.unwrap_or(50);
            if cells < 10 {
                return Err(config("--grid for fd needs at least 10 cells per unit"));
            }
            let vals = fd_comparison(dims, 1.0 / cells as f64)?;
            let floor = 1e-3 * vals.iter().map(|v| v.oracle.abs()).fold(0.0, f64::max);
            let rows: Vec<Row> = vals.iter().map(|v| row(v, floor)).collect();
            // The fine-grid error must lie inside the coarse-fine band.
            let err = rows.iter().map(|r| r.abs_err).fold(0.0, f64::max);
            let band = rows.iter().map(|r| r.err_est).fold(0.0, f64::max);
            let ratio = err / band;
            (rows, ratio, 1.0, ratio <= 1.0, "fd")
        }
    };
    let mut out = common.sink()?;
    match common.format(Format::Csv) {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(&mut *out);
            let csv_err = |e: csv::Error| Failure::Numerical(e.to_string());
            w.write_record(ORACLE_HEADER).map_err(csv_err)?;
            for r in &rows {
                w.serialize(r).map_err(csv_err)?;
            }
            w.flush()?;
        }
        Format::Json => write_json(
            &mut *out,
            &OracleSummary {
                oracle: name,
                n: dims.n(),
                measured,
                threshold,
                pass,
                rows: &rows,
            },
        )?,
    }
    Ok(verdict(pass))
}
