//! `qtsallis` command line: entropy queries, threshold sweeps and oracle runs.
//!
//! [`run`] takes the argument list and returns everything the process would
//! print together with its exit code: 0 on success, 1 for domain errors and
//! failed verification, 2 for malformed flags.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::classical::{tsallis_entropy, EntropicIndex, ProbDist};
use crate::error::{validation, Error};
use crate::format::{format_sig, round_sig};
use crate::oracle::{default_family_grid, verify_family, verify_separable_witness};
use crate::quantum::ORACLE_MAX_DIM;
use crate::separability::{
    asymptotic_threshold_block, threshold_block_for_q, ThresholdCurve, MONOTONE_TOL,
};
use crate::werner::{conditional_entropy_block, WernerParams};

#[derive(Debug, Parser)]
#[command(name = "qtsallis", version, about = "Nonadditive conditional entropies and Werner-state separability thresholds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classical Tsallis entropy, or the conditional entropy of a Werner state.
    Entropy(EntropyArgs),
    /// Boundary x* where the conditional entropy vanishes.
    Threshold(ThresholdArgs),
    /// Boundary x*(q) over a grid of q values.
    Sweep(SweepArgs),
    /// Check closed forms against dense matrices and separable states against nonnegativity.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["dist", "werner"])))]
struct EntropyArgs {
    /// Probabilities, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1.., allow_negative_numbers = true)]
    dist: Option<Vec<f64>>,
    /// Werner state as N,n,x.
    #[arg(long, value_parser = parse_werner)]
    werner: Option<(u32, u32, f64)>,
    #[arg(long, allow_negative_numbers = true)]
    q: f64,
    /// Number of parties conditioned on (default n-1).
    #[arg(long, requires = "werner")]
    condition_on: Option<u32>,
    /// Scientific notation.
    #[arg(long)]
    sci: bool,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("mode").required(true).args(["q", "asymptotic"])))]
struct ThresholdArgs {
    #[arg(long = "N")]
    levels: u32,
    #[arg(long = "n")]
    parties: u32,
    #[arg(long)]
    q: Option<f64>,
    /// Print the q → ∞ limit 1/(1 + N^(n-1)).
    #[arg(long)]
    asymptotic: bool,
    /// Number of parties conditioned on (default n-1).
    #[arg(long)]
    condition_on: Option<u32>,
    #[arg(long)]
    sci: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long = "N")]
    levels: u32,
    #[arg(long = "n")]
    parties: u32,
    #[arg(long, default_value_t = 0.1)]
    q_min: f64,
    #[arg(long, default_value_t = 1e4)]
    q_max: f64,
    #[arg(long, default_value_t = 50)]
    q_points: usize,
    /// Space q logarithmically instead of linearly.
    #[arg(long)]
    log_scale: bool,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Write rows here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    sci: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Skip oracle cases whose total dimension exceeds this.
    #[arg(long, default_value_t = ORACLE_MAX_DIM as u64)]
    max_dim: u64,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    json: Option<PathBuf>,
}

fn parse_werner(s: &str) -> std::result::Result<(u32, u32, f64), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected N,n,x but got '{s}'"));
    }
    let n_lev = parts[0].parse().map_err(|e| format!("N: {e}"))?;
    let n_par = parts[1].parse().map_err(|e| format!("n: {e}"))?;
    let x = parts[2].parse().map_err(|e| format!("x: {e}"))?;
    Ok((n_lev, n_par, x))
}

/// Captured result of one CLI invocation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self { code: 0, stdout, stderr: String::new() }
    }

    fn failure(err: impl std::fmt::Display) -> Self {
        Self { code: 1, stdout: String::new(), stderr: format!("error: {err}\n") }
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code: 2, stdout: String::new(), stderr: text }
            } else {
                Outcome::ok(text)
            };
        }
    };
    let result = match cli.command {
        Command::Entropy(a) => cmd_entropy(&a),
        Command::Threshold(a) => cmd_threshold(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Verify(a) => cmd_verify(&a),
    };
    result.unwrap_or_else(Outcome::failure)
}

fn cmd_entropy(a: &EntropyArgs) -> Result<Outcome, Error> {
    let q = EntropicIndex::new(a.q)?;
    let value = match (&a.dist, a.werner) {
        (Some(p), _) => tsallis_entropy(&ProbDist::new(p.clone())?, q),
        (None, Some((n_lev, n_par, x))) => {
            let p = WernerParams::new(n_lev, n_par, x)?;
            let k = a.condition_on.unwrap_or(n_par - 1);
            conditional_entropy_block(&p, k, q)?
        }
        (None, None) => return Err(validation("one of --dist or --werner is required")),
    };
    Ok(Outcome::ok(format!("{}\n", format_sig(value, a.sci))))
}

fn cmd_threshold(a: &ThresholdArgs) -> Result<Outcome, Error> {
    let k = a.condition_on.unwrap_or(a.parties.saturating_sub(1));
    if a.asymptotic {
        let x = asymptotic_threshold_block(a.levels, a.parties, k)?;
        return Ok(Outcome::ok(format!("{}\n", format_sig(x, a.sci))));
    }
    let q = EntropicIndex::new(a.q.expect("clap enforces --q or --asymptotic"))?;
    let family = WernerParams::new(a.levels, a.parties, 0.0)?;
    let point = threshold_block_for_q(&family, k, q)?;
    let text = match point.x_star {
        Some(x) => format_sig(x, a.sci),
        None => "none".to_string(),
    };
    let mut out = Outcome::ok(format!("{text}\n"));
    if point.sign_changes > 1 {
        out.stderr = format!(
            "warning: {} sign changes on the scan grid; reporting the first\n",
            point.sign_changes
        );
    }
    Ok(out)
}

fn q_grid(a: &SweepArgs) -> Result<Vec<EntropicIndex>, Error> {
    if !(a.q_min > 0.0 && a.q_min < a.q_max && a.q_max.is_finite()) {
        return Err(validation(format!(
            "need 0 < q-min < q-max, got q-min = {}, q-max = {}",
            a.q_min, a.q_max
        )));
    }
    if a.q_points < 2 {
        return Err(validation(format!("q-points must be at least 2, got {}", a.q_points)));
    }
    let last = a.q_points - 1;
    (0..a.q_points)
        .map(|i| {
            let t = i as f64 / last as f64;
            let q = if i == 0 {
                a.q_min
            } else if i == last {
                a.q_max
            } else if a.log_scale {
                (a.q_min.ln() + t * (a.q_max.ln() - a.q_min.ln())).exp()
            } else {
                a.q_min + t * (a.q_max - a.q_min)
            };
            EntropicIndex::new(q)
        })
        .collect()
}

#[derive(Serialize)]
struct SweepRow {
    q: f64,
    x_star: Option<f64>,
    converged: bool,
}

fn cmd_sweep(a: &SweepArgs) -> Result<Outcome, Error> {
    let grid = q_grid(a)?;
    let curve = ThresholdCurve::scan(a.levels, a.parties, &grid)?;

    let body = match a.format {
        OutputFormat::Csv => {
            let mut s = String::from("q,x_star,converged\n");
            for p in &curve.points {
                let x = p.x_star.map_or_else(|| "none".to_string(), |x| format_sig(x, a.sci));
                s.push_str(&format!("{},{},{}\n", format_sig(p.q, a.sci), x, p.converged()));
            }
            s
        }
        OutputFormat::Json => {
            let rows: Vec<SweepRow> = curve
                .points
                .iter()
                .map(|p| SweepRow { q: round_sig(p.q), x_star: p.x_star.map(round_sig), converged: p.converged() })
                .collect();
            let mut s = serde_json::to_string_pretty(&rows).map_err(|e| Error::Numerical(e.to_string()))?;
            s.push('\n');
            s
        }
    };

    let mut out = Outcome::default();
    match &a.out {
        Some(path) => fs::write(path, &body)
            .map_err(|e| validation(format!("cannot write {}: {e}", path.display())))?,
        None => out.stdout = body,
    }

    for p in curve.points.iter().filter(|p| p.sign_changes > 1) {
        out.stderr.push_str(&format!(
            "warning: q = {}: {} sign changes on the scan grid\n",
            format_sig(p.q, false),
            p.sign_changes
        ));
    }
    match curve.monotonicity_violation() {
        None => out.stderr.push_str(&format!(
            "monotonicity: ok ({} points, x* non-increasing in q within {MONOTONE_TOL:e})\n",
            curve.points.len()
        )),
        Some(e) => {
            out.stderr.push_str(&format!("monotonicity: FAILED: {e}\n"));
            out.code = 1;
        }
    }
    Ok(out)
}

fn cmd_verify(a: &VerifyArgs) -> Result<Outcome, Error> {
    let (params, qs) = default_family_grid(a.max_dim);
    let family = verify_family(&params, &qs)?;
    let witness = verify_separable_witness(a.trials, a.seed)?;
    let summary = format!(
        "family: {} comparisons, max deviation {:e} (relative to max(1, |value|): {:e}); \
         separable witness: {} comparisons, {} trials, seed {}\n",
        family.entries().len(),
        family.max_deviation(""),
        family.max_scaled_deviation(""),
        witness.entries().len(),
        a.trials,
        a.seed
    );
    let report = family.merge(witness);
    let failures = report.failures().count();

    let mut out = Outcome::default();
    let json = report.to_json() + "\n";
    match &a.json {
        Some(path) => {
            fs::write(path, json).map_err(|e| validation(format!("cannot write {}: {e}", path.display())))?;
            out.stdout = summary;
        }
        None => {
            out.stdout = json;
            out.stderr = summary;
        }
    }
    if failures > 0 {
        out.code = 1;
        for c in report.failures().take(20) {
            out.stderr.push_str(&format!(
                "FAIL {} {}: closed form {} vs oracle {} (|dev| = {:e})\n",
                c.case, c.quantity, c.closed_form, c.oracle, c.abs_dev
            ));
        }
        out.stderr.push_str(&format!("{failures} comparisons failed\n"));
    }
    Ok(out)
}
