//! `dif` command-line front end.
//!
//! Exit codes: 0 proven/accepted, 1 generation failure or rejection, 2 usage,
//! parse, or evaluation error.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::decimal::{Decimal, Rounding};
use crate::dif::{
    check_certificate_at, generate_tau, verify_tau, verify_tau_interval, Certificate, DifOptions, DifProblem,
    GenerateError, IntervalVerification, Mode, TauSequence, Verification,
};
use crate::expr::{eval_point, parse, PrecisionContext};
use crate::proofs::{check_proof_document, ProofDocument};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECTED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "dif", version, about = "Prove g1 > g2 on an interval with a checkable point sequence")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a certificate for a problem file.
    Prove(ProveArgs),
    /// Check a given point sequence against a problem file.
    Verify(VerifyArgs),
    /// Write g1 and g2 sampled on a uniform grid as CSV.
    PlotData(PlotArgs),
    /// Re-check certificates or proof documents.
    Check(CheckArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Float,
    Interval,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Float => Mode::Float,
            ModeArg::Interval => Mode::Interval,
        }
    }
}

#[derive(Args, Debug, Default)]
struct Overrides {
    /// Maximal number of steps.
    #[arg(long)]
    steps: Option<u32>,
    /// Decimal places for the points (escalated when needed).
    #[arg(long)]
    digits: Option<u32>,
    /// Pull-back weight toward the previous point.
    #[arg(long)]
    relax: Option<Decimal>,
    /// Significant digits for evaluation.
    #[arg(long)]
    precision: Option<u32>,
    /// Smallest difference counted as rigorous.
    #[arg(long)]
    margin: Option<Decimal>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
}

#[derive(Args, Debug)]
struct ProveArgs {
    problem: PathBuf,
    /// Also print the check matrix and write plot data.
    #[arg(long)]
    long: bool,
    #[command(flatten)]
    overrides: Overrides,
    /// Certificate path (default: <problem stem>.cert.json).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Plot data path used with --long (default: <problem stem>.plot.csv).
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    problem: PathBuf,
    /// Comma-separated points.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "cert", required_unless_present = "cert")]
    tau: Vec<Decimal>,
    /// Take the points from a certificate.
    #[arg(long)]
    cert: Option<PathBuf>,
    /// Also print the acceptance summary and write plot data.
    #[arg(long)]
    long: bool,
    #[command(flatten)]
    overrides: Overrides,
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PlotArgs {
    problem: PathBuf,
    #[arg(long, default_value_t = 512)]
    samples: u32,
    #[arg(long)]
    precision: Option<u32>,
    /// CSV path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(required = true)]
    documents: Vec<PathBuf>,
    /// Re-check at this many significant digits.
    #[arg(long)]
    precision: Option<u32>,
    /// Require certificates to be about this problem.
    #[arg(long)]
    problem: Option<PathBuf>,
    /// Documents checked in parallel.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

/// Options block of a problem file; every field is optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digits: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relax: Option<Decimal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<Decimal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub g1: String,
    pub g2: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub var: Option<String>,
    pub interval: [Decimal; 2],
    #[serde(default)]
    pub options: ProblemOptions,
}

impl ProblemFile {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn to_problem(&self) -> Result<DifProblem, String> {
        self.to_problem_with(&ProblemOptions::default())
    }

    /// Builds the problem, with `flags` taking precedence over the file.
    pub fn to_problem_with(&self, flags: &ProblemOptions) -> Result<DifProblem, String> {
        let g1 = parse(&self.g1).map_err(|e| format!("g1: {e}"))?;
        let g2 = parse(&self.g2).map_err(|e| format!("g2: {e}"))?;
        let o = &self.options;
        let mut options = DifOptions::default();
        if let Some(s) = flags.steps.or(o.steps) {
            options.steps = s;
        }
        options.digits_override = flags.digits.or(o.digits);
        if let Some(r) = flags.relax.clone().or_else(|| o.relax.clone()) {
            options.relax = r;
        }
        if let Some(p) = flags.precision.or(o.precision) {
            options.precision = PrecisionContext::new(p)?;
        }
        options.margin = flags.margin.clone().or_else(|| o.margin.clone());
        options.mode = flags.mode.or(o.mode).unwrap_or_default();
        let [alpha, beta] = self.interval.clone();
        let p = match &self.var {
            Some(v) => DifProblem::with_var(g1, g2, v, alpha, beta, options),
            None => DifProblem::new(g1, g2, alpha, beta, options),
        };
        p.map_err(|e| e.to_string())
    }
}

impl Overrides {
    fn to_options(&self) -> ProblemOptions {
        ProblemOptions {
            steps: self.steps,
            digits: self.digits,
            relax: self.relax.clone(),
            precision: self.precision,
            margin: self.margin.clone(),
            mode: self.mode.map(Mode::from),
        }
    }
}

fn load_problem(path: &Path, overrides: &Overrides) -> Result<DifProblem, String> {
    ProblemFile::load(path)?.to_problem_with(&overrides.to_options())
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("problem");
    path.with_file_name(format!("{stem}{suffix}"))
}

fn render_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let mut s = String::new();
    let line = |cells: Vec<&str>, s: &mut String| {
        let parts: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
        let _ = writeln!(s, "{}", parts.join("  ").trim_end());
    };
    line(header.to_vec(), &mut s);
    for r in rows {
        line(r.iter().map(String::as_str).collect(), &mut s);
    }
    s
}

/// The five-column table for a float verification.
pub fn format_matrix(v: &Verification) -> String {
    let rows: Vec<Vec<String>> = v
        .rows
        .iter()
        .map(|r| vec![r.k.to_string(), r.tau.to_string(), r.larger.to_string(), r.smaller.to_string(), r.diff.to_string()])
        .collect();
    render_table(&["k", "tau", "larger", "smaller", "diff"], &rows)
}

/// The five-column table for an enclosure verification.
pub fn format_interval_matrix(v: &IntervalVerification) -> String {
    let rows: Vec<Vec<String>> = v
        .rows
        .iter()
        .map(|r| vec![r.k.to_string(), r.tau.to_string(), r.larger.to_string(), r.smaller.to_string(), r.diff.to_string()])
        .collect();
    render_table(&["k", "tau", "larger", "smaller", "diff"], &rows)
}

/// `x,g1,g2` rows on `samples + 1` uniform points.
pub fn plot_csv(p: &DifProblem, samples: u32) -> Result<String, String> {
    if samples == 0 {
        return Err("--samples must be at least 1".into());
    }
    let ctx = p.ctx();
    let width = &p.beta - &p.alpha;
    let n = Decimal::from(samples as i64);
    let mut out = String::from("x,g1,g2\n");
    for i in 0..=samples {
        let x = if i == samples {
            p.beta.clone()
        } else {
            let step = (&width * &Decimal::from(i as i64)).div_round(&n, ctx.digits() + 2, Rounding::HalfEven).expect("n > 0");
            &p.alpha + &step
        };
        let g1 = eval_point(&p.g1, &p.var, &x, ctx).map_err(|e| format!("row {i} (x = {x}): {e}"))?;
        let g2 = eval_point(&p.g2, &p.var, &x, ctx).map_err(|e| format!("row {i} (x = {x}): {e}"))?;
        let _ = writeln!(out, "{x},{g1},{g2}");
    }
    Ok(out)
}

fn write_file(path: &Path, text: &str) -> Result<(), String> {
    fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

/// Runs the CLI with `args` (program name first) and returns the exit code.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let mut io = Io { out, err };
    let result = match &cli.command {
        Command::Prove(a) => prove(a, &mut io),
        Command::Verify(a) => verify(a, &mut io),
        Command::PlotData(a) => plot_data(a, &mut io),
        Command::Check(a) => check(a, &mut io),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(io.err, "error: {msg}");
            EXIT_ERROR
        }
    }
}

fn prove(a: &ProveArgs, io: &mut Io) -> Result<i32, String> {
    let p = load_problem(&a.problem, &a.overrides)?;
    let cert = match generate_tau(&p) {
        Ok(c) => c,
        Err(GenerateError::Failed(f)) => {
            let _ = writeln!(io.out, "    {f}");
            return Ok(EXIT_REJECTED);
        }
        Err(GenerateError::Problem(e)) => return Err(e.to_string()),
    };
    let tau = cert.tau_sequence().map_err(|e| e.to_string())?;
    let _ = writeln!(io.out, "{tau}");
    if a.long {
        let v = verify_tau(&p, &tau).map_err(|e| e.to_string())?;
        let _ = write!(io.out, "{}", format_matrix(&v));
        let plot = a.plot.clone().unwrap_or_else(|| sibling(a.out.as_deref().unwrap_or(&a.problem), ".plot.csv"));
        write_file(&plot, &plot_csv(&p, 512)?)?;
        let _ = writeln!(io.out, "plot data written to {}", plot.display());
    }
    let path = a.out.clone().unwrap_or_else(|| sibling(&a.problem, ".cert.json"));
    write_file(&path, &cert.to_json())?;
    let _ = writeln!(io.out, "certificate written to {}", path.display());
    Ok(EXIT_OK)
}

fn verify(a: &VerifyArgs, io: &mut Io) -> Result<i32, String> {
    let mut p = load_problem(&a.problem, &a.overrides)?;
    let points = match &a.cert {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            let cert = Certificate::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))?;
            cert.matches(&p).map_err(|e| e.to_string())?;
            if a.overrides.mode.is_none() {
                p.options.mode = cert.mode;
            }
            cert.tau
        }
        None => a.tau.clone(),
    };
    let tau = TauSequence::new(points).map_err(|e| e.to_string())?;
    tau.check_endpoints(&p.alpha, &p.beta).map_err(|e| e.to_string())?;

    let (accepted, summary) = match p.options.mode {
        Mode::Float => {
            let v = verify_tau(&p, &tau).map_err(|e| e.to_string())?;
            let _ = write!(io.out, "{}", format_matrix(&v));
            let summary = format!(
                "min margin {} (rigorous: {}, margin {})",
                v.min_margin,
                if v.rigorous_accepted { "yes" } else { "no" },
                p.options.margin()
            );
            (v.accepted, summary)
        }
        Mode::Interval => {
            let v = verify_tau_interval(&p, &tau).map_err(|e| e.to_string())?;
            let _ = write!(io.out, "{}", format_interval_matrix(&v));
            (v.accepted, format!("min enclosure gap {}", v.min_margin))
        }
    };
    if a.long {
        let _ = writeln!(io.out, "{summary}");
        if let Some(plot) = &a.plot {
            write_file(plot, &plot_csv(&p, 512)?)?;
            let _ = writeln!(io.out, "plot data written to {}", plot.display());
        }
    }
    let _ = writeln!(io.out, "{accepted}");
    Ok(if accepted { EXIT_OK } else { EXIT_REJECTED })
}

fn plot_data(a: &PlotArgs, io: &mut Io) -> Result<i32, String> {
    let overrides = Overrides { precision: a.precision, ..Overrides::default() };
    let p = load_problem(&a.problem, &overrides)?;
    let csv = plot_csv(&p, a.samples)?;
    match &a.out {
        Some(path) => {
            write_file(path, &csv)?;
            let _ = writeln!(io.out, "{} rows written to {}", a.samples + 1, path.display());
        }
        None => {
            let _ = io.out.write_all(csv.as_bytes());
        }
    }
    Ok(EXIT_OK)
}

/// Checks one document; returns the exit code and the text to print.
fn check_one(path: &Path, precision: Option<PrecisionContext>, problem: Option<&DifProblem>) -> (i32, String) {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return (EXIT_ERROR, format!("error: cannot read {}: {e}\n", path.display())),
    };
    let value: serde_json::Value = match serde_json::from_str(&text) {
        Ok(v) => v,
        Err(e) => return (EXIT_ERROR, format!("error: {}: {e}\n", path.display())),
    };
    let name = path.display();
    if value.get("main").is_some() {
        let doc: ProofDocument = match serde_json::from_value(value) {
            Ok(d) => d,
            Err(e) => return (EXIT_ERROR, format!("error: {name}: {e}\n")),
        };
        if let Some(p) = problem {
            if let Err(e) = doc.main.matches(p) {
                return (EXIT_ERROR, format!("error: {name}: {e}\n"));
            }
        }
        return match check_proof_document(&doc, precision) {
            Ok(report) => (EXIT_OK, format!("{name}: proof checked\n{report}")),
            Err(e) => (EXIT_REJECTED, format!("{name}: proof fails at {}\n  {e}\n", e.path().unwrap_or("document"))),
        };
    }
    let cert: Certificate = match serde_json::from_value(value) {
        Ok(c) => c,
        Err(e) => return (EXIT_ERROR, format!("error: {name}: {e}\n")),
    };
    if let Some(p) = problem {
        if let Err(e) = cert.matches(p) {
            return (EXIT_ERROR, format!("error: {name}: {e}\n"));
        }
    }
    match check_certificate_at(&cert, precision) {
        Ok(r) if r.accepted => (
            EXIT_OK,
            format!(
                "{name}: certificate accepted at {} digits ({} mode), min margin {}\nrigor level: {}\n",
                r.precision_digits,
                r.mode,
                r.min_margin,
                if r.mode == Mode::Interval { "rigorous" } else { "float-verified" }
            ),
        ),
        Ok(r) => (EXIT_REJECTED, format!("{name}: certificate rejected: {}\n", r.detail)),
        Err(e) => (EXIT_ERROR, format!("error: {name}: {e}\n")),
    }
}

fn check(a: &CheckArgs, io: &mut Io) -> Result<i32, String> {
    let precision = a.precision.map(PrecisionContext::new).transpose()?;
    let problem = match &a.problem {
        Some(path) => Some(ProblemFile::load(path)?.to_problem()?),
        None => None,
    };
    let jobs = a.jobs.max(1);
    let mut results: Vec<(i32, String)> = Vec::with_capacity(a.documents.len());
    for chunk in a.documents.chunks(jobs) {
        let batch: Vec<(i32, String)> = std::thread::scope(|s| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|path| s.spawn(|| check_one(path, precision, problem.as_ref())))
                .collect();
            handles.into_iter().map(|h| h.join().expect("check thread")).collect()
        });
        results.extend(batch);
    }
    let mut code = EXIT_OK;
    for (c, text) in results {
        let sink: &mut dyn Write = if c == EXIT_ERROR { &mut *io.err } else { &mut *io.out };
        let _ = sink.write_all(text.as_bytes());
        code = code.max(c);
    }
    Ok(code)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_is_right_aligned() {
        let t = render_table(&["k", "value"], &[vec!["1".into(), "-0.5".into()], vec!["10".into(), "2".into()]]);
        assert_eq!(t, " k  value\n 1   -0.5\n10      2\n");
    }

    #[test]
    fn problem_file_defaults() {
        let f: ProblemFile = serde_json::from_str(r#"{"g1": "x+1", "g2": "x", "interval": ["0", "1"]}"#).unwrap();
        let p = f.to_problem().unwrap();
        assert_eq!(p.var, "x");
        assert_eq!(p.options.steps, 100);
        assert_eq!(p.options.margin(), "0.0001".parse().unwrap());
        let bad = serde_json::from_str::<ProblemFile>(r#"{"g1": "x", "g2": "x", "interval": ["0", "1"], "extra": 1}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run(["dif", "frobnicate"], &mut o, &mut e), EXIT_ERROR);
        assert_eq!(run(["dif", "--help"], &mut o, &mut e), EXIT_OK);
    }
}
