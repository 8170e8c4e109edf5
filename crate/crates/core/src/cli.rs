//! Command-line front end.
//!
//! Every command writes CSV: one `# seed=... ` comment line, a header, then
//! rows. Exit codes are 0 on success, 2 for usage or configuration errors and
//! 3 when a mathematical precondition fails.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::bounds::{lower_bound_l, rogers_p, upper_bound};
use crate::config::Config;
use crate::copula::{ordered_joint_cdf, validate_diagonal, DiagonalProperty};
use crate::dependence::{min_kendall_tau, min_spearman_rho};
use crate::distcore::{Cdf, OrderedMarginalPair};
use crate::error::{Error, Result};
use crate::exec::{configure_threads, Execution};
use crate::maxent::{entropy_condition, maxent_joint_density};
use crate::numeric::linspace;
use crate::sampling::{sample_comonotone, sample_l_unimodal, sample_maxent, RngStream};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;

pub const THREADS_ENV: &str = "ORDERED_COPULAS_THREADS";

// Lattice end points are pulled inside by this fraction of the width.
const NUDGE: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "ordered-copulas", version, about = "Joint laws of stochastically ordered pairs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lower bound L, upper bound min(F1, F2) and Rogers' P on a grid×grid lattice.
    Bounds {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        grid: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimal Kendall's tau and Spearman's rho along a parametric family.
    TauRhoCurve {
        family: Family,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        points: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw pairs from the comonotone law, L, or the maximum-entropy law.
    Sample {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        law: Law,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Maximum-entropy density on a grid×grid lattice.
    MaxentDensity {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        grid: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check dominance, compatibility of the configured copula, and the
    /// configured diagonal section.
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// F1(x) = x, F2(x) = x^α on [0, 1], α ∈ (0, 1].
    Power,
    /// F1 = Φ(· − Δ), F2 = Φ, Δ ∈ [0, 4].
    NormalShift,
    /// Exponentials with rates λ1 ≤ λ2 = 1, λ1/λ2 ∈ (0, 1].
    ExpRatio,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Law {
    Comonotone,
    #[value(name = "L", alias = "l")]
    L,
    Maxent,
}

impl Law {
    fn name(self) -> &'static str {
        match self {
            Law::Comonotone => "comonotone",
            Law::L => "L",
            Law::Maxent => "maxent",
        }
    }
}

impl Family {
    fn name(self) -> &'static str {
        match self {
            Family::Power => "power",
            Family::NormalShift => "normal-shift",
            Family::ExpRatio => "exp-ratio",
        }
    }

    /// Parameter values of the sweep, ending at identical marginals for the
    /// ratio families and starting there for the shift.
    pub fn parameters(self, points: usize) -> Vec<f64> {
        match self {
            Family::Power | Family::ExpRatio => (1..=points).map(|k| k as f64 / points as f64).collect(),
            Family::NormalShift => linspace(0.0, 4.0, points),
        }
    }

    pub fn is_identical(self, p: f64) -> bool {
        match self {
            Family::Power | Family::ExpRatio => p == 1.0,
            Family::NormalShift => p == 0.0,
        }
    }

    pub fn pair(self, p: f64) -> Result<OrderedMarginalPair> {
        let (f1, f2) = match self {
            Family::Power => (Cdf::uniform(0.0, 1.0)?, Cdf::power(p)?),
            Family::NormalShift => (Cdf::normal(p, 1.0)?, Cdf::normal(0.0, 1.0)?),
            Family::ExpRatio => (Cdf::exponential(p)?, Cdf::exponential(1.0)?),
        };
        OrderedMarginalPair::new(f1, f2)
    }
}

/// Format with 12 significant digits; plain notation for moderate
/// magnitudes, scientific otherwise.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let a = x.abs();
    if (1e-4..1e12).contains(&a) {
        let decimals = (11 - a.log10().floor() as i32).max(0) as usize;
        let s = format!("{x:.decimals$}");
        // rounding can carry into a new leading digit; the extra digit is a zero
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.11e}")
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Lattice over `[lo, hi]` with both ends pulled inside by `NUDGE` of the
/// width.
fn nudged_lattice(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let w = hi - lo;
    let mut xs = linspace(lo, hi, n);
    if let Some(first) = xs.first_mut() {
        *first = lo + NUDGE * w;
    }
    if n > 1 {
        xs[n - 1] = hi - NUDGE * w;
    }
    xs
}

enum Failure {
    Usage(String),
    Math(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_precondition() {
            Failure::Math(e)
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

/// Output of a command: the CSV text and the exit code to report after
/// writing it.
struct Report {
    text: String,
    code: i32,
}

impl Report {
    fn ok(text: String) -> Self {
        Report { text, code: EXIT_OK }
    }
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => configure_threads(Some(n)),
            _ => {
                eprintln!("error: {THREADS_ENV} must be a positive integer, got {v:?}");
                return EXIT_USAGE;
            }
        },
        Err(_) => configure_threads(None),
    }
    let out = match &cli.command {
        Command::Bounds { out, .. }
        | Command::TauRhoCurve { out, .. }
        | Command::Sample { out, .. }
        | Command::MaxentDensity { out, .. }
        | Command::Validate { out, .. } => out.clone(),
    };
    match execute(&cli.command) {
        Ok(report) => match write_output(out.as_deref(), &report.text) {
            Ok(()) => report.code,
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_USAGE
            }
        },
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Math(e)) => {
            eprintln!("error: {e}");
            EXIT_PRECONDITION
        }
    }
}

fn write_output(path: Option<&Path>, text: &str) -> std::io::Result<()> {
    use std::io::Write;
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())?;
            lock.flush()
        }
    }
}

fn load(path: &Path) -> std::result::Result<Config, Failure> {
    Config::from_path(path).map_err(|e| Failure::Usage(e.to_string()))
}

fn execute(cmd: &Command) -> std::result::Result<Report, Failure> {
    match cmd {
        Command::Bounds { config, grid, .. } => cmd_bounds(config, *grid as usize),
        Command::TauRhoCurve { family, points, .. } => cmd_tau_rho_curve(*family, *points as usize),
        Command::Sample { config, law, n, seed, .. } => cmd_sample(config, *law, *n, *seed),
        Command::MaxentDensity { config, grid, .. } => cmd_maxent_density(config, *grid as usize),
        Command::Validate { config, .. } => cmd_validate(config),
    }
}

fn cmd_bounds(config: &Path, grid: usize) -> std::result::Result<Report, Failure> {
    let pair = load(config)?.pair()?;
    let (lo, hi) = pair.grid_bounds();
    let xs = linspace(lo, hi, grid);
    let (l, u, p) = (lower_bound_l(&pair), upper_bound(&pair), rogers_p(&pair));
    let rows = Execution::default().map_indexed(grid * grid, |k| {
        let (x1, x2) = (xs[k / grid], xs[k % grid]);
        [x1, x2, l.eval(x1, x2), u.eval(x1, x2), p.eval(x1, x2)]
    });
    let mut s = format!("# seed=none command=bounds config={} grid={grid}\nx1,x2,L,upper,P\n", config.display());
    push_rows(&mut s, &rows);
    Ok(Report::ok(s))
}

fn push_rows<const N: usize>(s: &mut String, rows: &[[f64; N]]) {
    for row in rows {
        let line: Vec<String> = row.iter().map(|&v| fmt_num(v)).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
}

/// `(tau_min, rho_min)` at one parameter value.
pub fn curve_point(family: Family, p: f64) -> Result<(f64, f64)> {
    if family.is_identical(p) {
        // identical marginals force X1 = X2
        return Ok((1.0, 1.0));
    }
    let pair = family.pair(p)?;
    Ok((min_kendall_tau(&pair)?, min_spearman_rho(&pair)?))
}

fn cmd_tau_rho_curve(family: Family, points: usize) -> std::result::Result<Report, Failure> {
    let params = family.parameters(points);
    let values = Execution::default().map_slice(&params, |&p| curve_point(family, p));
    let mut rows = Vec::with_capacity(points);
    for (&p, v) in params.iter().zip(values) {
        let (tau, rho) = v?;
        rows.push([p, tau, rho]);
    }
    let mut s = format!(
        "# seed=none command=tau-rho-curve family={} points={points}\nparameter,tau_min,rho_min\n",
        family.name()
    );
    push_rows(&mut s, &rows);
    Ok(Report::ok(s))
}

fn cmd_sample(config: &Path, law: Law, n: usize, seed: u64) -> std::result::Result<Report, Failure> {
    let pair = load(config)?.pair()?;
    let rng = RngStream::new(seed);
    let samples = match law {
        Law::Comonotone => sample_comonotone(&pair, rng, n),
        Law::L => sample_l_unimodal(&pair, rng, n)?,
        Law::Maxent => sample_maxent(&pair, rng, n)?,
    };
    let mut s = format!(
        "# seed={seed} command=sample law={} n={n} config={}\nx1,x2\n",
        law.name(),
        config.display()
    );
    for (x1, x2) in samples.iter() {
        let _ = writeln!(s, "{},{}", fmt_num(x1), fmt_num(x2));
    }
    Ok(Report::ok(s))
}

fn cmd_maxent_density(config: &Path, grid: usize) -> std::result::Result<Report, Failure> {
    let pair = load(config)?.pair()?;
    let density = maxent_joint_density(&pair)?;
    let (lo, hi) = pair.grid_bounds();
    let xs = nudged_lattice(lo, hi, grid);
    let rows = Execution::default().map_indexed(grid * grid, |k| {
        let (x1, x2) = (xs[k / grid], xs[k % grid]);
        [x1, x2, density.eval(x1, x2)]
    });
    let mut s = format!(
        "# seed=none command=maxent-density config={} grid={grid}\nx1,x2,f\n",
        config.display()
    );
    push_rows(&mut s, &rows);
    Ok(Report::ok(s))
}

fn cmd_validate(config: &Path) -> std::result::Result<Report, Failure> {
    let cfg = load(config)?;
    let (f1, f2) = cfg.marginals().map_err(|e| Failure::Usage(e.to_string()))?;
    let mut rows: Vec<[String; 3]> = Vec::new();
    let mut failed = false;
    let mut row = |check: &str, result: &str, detail: String| {
        rows.push([check.to_string(), result.to_string(), detail]);
    };

    match OrderedMarginalPair::new(f1, f2) {
        Err(e) => {
            failed = true;
            row("dominance", "fail", e.to_string());
        }
        Ok(pair) => {
            row("dominance", "pass", "F1 <= F2 on the grid and at every atom".into());
            let profile = pair.profile();
            match profile.r {
                Some(r) if profile.is_unimodal => row("unimodal", "pass", format!("H peaks at r={}", fmt_num(r))),
                _ => row("unimodal", "fail", "H = F2 - F1 is not unimodal".into()),
            }
            match entropy_condition(&pair) {
                Ok(true) => row("entropy_condition", "pass", "maximum-entropy law exists".into()),
                Ok(false) => row("entropy_condition", "fail", Error::NoMaxent.to_string()),
                Err(e) => row("entropy_condition", "n/a", e.to_string()),
            }
            if let Some(spec) = &cfg.ctilde {
                let ctilde = spec.build(&pair).map_err(|e| Failure::Usage(e.to_string()))?;
                match ordered_joint_cdf(&pair, ctilde) {
                    Ok(_) => row("ctilde", "pass", "compatible with delta_G".into()),
                    Err(e) => {
                        failed = true;
                        row("ctilde", "fail", e.to_string());
                    }
                }
            }
        }
    }

    if let Some(spec) = &cfg.diagonal {
        let f = spec.raw().map_err(|e| Failure::Usage(e.to_string()))?;
        let report = validate_diagonal(|t| f(t), 4097);
        for (name, prop) in [
            ("diagonal_D1", DiagonalProperty::D1),
            ("diagonal_D2", DiagonalProperty::D2),
            ("diagonal_D3", DiagonalProperty::D3),
            ("diagonal_D4", DiagonalProperty::D4),
            ("diagonal_range", DiagonalProperty::Range),
        ] {
            match report.violation(prop) {
                None => row(name, "pass", String::new()),
                Some(v) => {
                    failed = true;
                    let witness = match v.s {
                        Some(s) => format!("witness t={} s={} excess={}", fmt_num(v.t), fmt_num(s), fmt_num(v.excess)),
                        None => format!("witness t={} excess={}", fmt_num(v.t), fmt_num(v.excess)),
                    };
                    row(name, "fail", witness);
                }
            }
        }
    }

    let mut s = format!("# seed=none command=validate config={}\ncheck,result,detail\n", config.display());
    for [c, r, d] in &rows {
        let _ = writeln!(s, "{},{},{}", csv_field(c), csv_field(r), csv_field(d));
    }
    Ok(Report { text: s, code: if failed { EXIT_PRECONDITION } else { EXIT_OK } })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(1.0), "1");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(16.0 / 9.0), "1.77777777778");
        assert_eq!(fmt_num(-2.5e-7), "-2.50000000000e-7");
        assert_eq!(fmt_num(123456.0), "123456");
        assert_eq!(fmt_num(0.00012345), "0.00012345");
        assert_eq!(fmt_num(f64::NAN), "nan");
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("plain"), "plain");
    }

    #[test]
    fn sweeps() {
        assert_eq!(Family::Power.parameters(4), vec![0.25, 0.5, 0.75, 1.0]);
        assert_eq!(Family::NormalShift.parameters(3), vec![0.0, 2.0, 4.0]);
        assert_eq!(curve_point(Family::ExpRatio, 1.0).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn nudged_ends() {
        let xs = nudged_lattice(0.0, 1.0, 5);
        assert_eq!(xs[0], 1e-9);
        assert_eq!(xs[2], 0.5);
        assert_eq!(xs[4], 1.0 - 1e-9);
    }
}
