//! Command-line front end. Exit codes: 0 success, 2 invalid parameters,
//! 3 check failure, 4 I/O.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codes::CodeError;
use crate::protocol::{
    derive_params, qpir_rate, random_files, run_protocol, ProtocolError, RunOptions, Scheme,
    SchemeParams, StorageSystem, Transcript,
};
use crate::verify::{decomposition_check, lemma5_checks, run_suite, Suite, SuiteReport};

#[derive(Debug, Parser)]
#[command(name = "qpir", version, about = "Quantum PIR over GRS-coded storage with t-collusion")]
pub struct Cli {
    /// Print per-round details.
    #[arg(long, short, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// The [6,3] example over GF(7) with t = 2 and random files.
    Demo(DemoArgs),
    /// Run the protocol on given or random files.
    Run(RunArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Tabulate min(1, 2(n-k-t+1)/n) over a parameter grid.
    Rate(RateArgs),
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Transcript destination (JSON).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also run the protocol and privacy suites.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub q: u32,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub t: usize,
    /// Number of files; taken from the input file when omitted.
    #[arg(long)]
    pub m: Option<usize>,
    /// 1-based index of the desired file.
    #[arg(long = "K", default_value_t = 1)]
    pub target: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON document `{"files": [[...], ...]}`; random files when omitted.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Codes,
    Protocol,
    Privacy,
    Oracle,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Codes => Suite::Codes,
            SuiteArg::Protocol => Suite::Protocol,
            SuiteArg::Privacy => Suite::Privacy,
            SuiteArg::Oracle => Suite::Oracle,
            SuiteArg::All => Suite::All,
        }
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = SuiteArg::All)]
    pub suite: SuiteArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report destination (JSON).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RateArgs {
    /// Single tuple; the grid options are ignored when all three are given.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub t: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub n_min: usize,
    #[arg(long, default_value_t = 8)]
    pub n_max: usize,
    /// Table destination (JSON).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("check failed: {0}")]
    CheckFailed(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::InvalidParams(_) => 2,
            CliError::CheckFailed(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<ProtocolError> for CliError {
    fn from(e: ProtocolError) -> Self {
        match e {
            ProtocolError::InvalidParams(_) | ProtocolError::Code(CodeError::NotFound) => {
                CliError::InvalidParams(e.to_string())
            }
            other => CliError::CheckFailed(other.to_string()),
        }
    }
}

/// Input document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileSet {
    pub files: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateRow {
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub numerator: u64,
    pub denominator: u64,
    pub normalized: bool,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn out_err(e: std::io::Error) -> CliError {
    CliError::Io(e.to_string())
}

fn load_files(path: &Path, params: &SchemeParams) -> Result<Vec<Vec<u32>>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let set: FileSet = serde_json::from_str(&text)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let len = params.file_len();
    for (i, f) in set.files.iter().enumerate() {
        if f.len() != len {
            return Err(CliError::Io(format!(
                "file {} has {} symbols, expected 2*beta*k = {len}",
                i + 1,
                f.len()
            )));
        }
        if let Some(&x) = f.iter().find(|&&x| x >= params.q) {
            return Err(CliError::Io(format!("file {} holds symbol {x} >= q = {}", i + 1, params.q)));
        }
    }
    if set.files.len() != params.m {
        return Err(CliError::Io(format!(
            "{} files in {}, expected m = {}",
            set.files.len(),
            path.display(),
            params.m
        )));
    }
    Ok(set.files)
}

fn print_transcript(out: &mut dyn Write, t: &Transcript, verbose: bool) -> Result<(), CliError> {
    for (rec, layout) in t.rounds.iter().zip(&t.outcome_layout) {
        let sets: Vec<String> = rec
            .j_sets
            .iter()
            .enumerate()
            .map(|(b, s)| format!("J^{}={s:?}", b + 1))
            .collect();
        writeln!(out, "round {}: {}", rec.r, sets.join(" ")).map_err(out_err)?;
        if verbose {
            writeln!(out, "  responses {:?}", rec.responses).map_err(out_err)?;
            writeln!(out, "  outcome {:?} at (block, server) {:?}", rec.outcome, layout).map_err(out_err)?;
        }
    }
    writeln!(
        out,
        "rate {}/{}, {} qudits, {} symbols",
        t.rate.numerator, t.rate.denominator, t.q_in, t.symbols_retrieved
    )
    .map_err(out_err)?;
    Ok(())
}

fn print_report(out: &mut dyn Write, report: &SuiteReport) -> Result<(), CliError> {
    for c in &report.checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        match &c.witness {
            Some(w) => writeln!(out, "{tag} {}: {} (witness {w})", c.name, c.detail),
            None => writeln!(out, "{tag} {}: {}", c.name, c.detail),
        }
        .map_err(out_err)?;
    }
    Ok(())
}

fn demo(args: &DemoArgs, verbose: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let params = derive_params(7, 6, 3, 2, 2)?;
    let scheme = Scheme::new(&params)?;
    let mut rng = ChaCha20Rng::seed_from_u64(args.seed);
    let files = random_files(&scheme.field, params.m, params.file_len(), &mut rng);
    let storage = StorageSystem::from_files(&files, &scheme.storage_code, params.beta)?;
    let target = 2;
    let t = run_protocol(&scheme, &storage, target, args.seed, &RunOptions::default())?;
    writeln!(out, "[6,3] storage over GF(7), t = 2, m = 2, K = {target}").map_err(out_err)?;
    print_transcript(out, &t, verbose)?;
    if t.decoded != files[target - 1] {
        return Err(CliError::CheckFailed("decoded file differs from the stored file".into()));
    }
    writeln!(out, "decoded file {target} matches").map_err(out_err)?;
    if let Some(path) = &args.out {
        write_json(path, &t)?;
    }
    if args.verify {
        lemma5_checks(&scheme.bundle.g_s, &scheme.bundle.h_s, 6, params.star_dim(), args.seed)
            .map_err(|e| CliError::CheckFailed(e.to_string()))?;
        decomposition_check(&scheme, &t).map_err(|e| CliError::CheckFailed(e.to_string()))?;
        writeln!(out, "PASS lemma5 and decomposition on the example").map_err(out_err)?;
        let mut ok = true;
        for suite in [Suite::Protocol, Suite::Privacy] {
            let r = run_suite(suite, args.seed);
            print_report(out, &r)?;
            ok &= r.passed;
        }
        if !ok {
            return Err(CliError::CheckFailed("verification checks failed".into()));
        }
    }
    Ok(())
}

fn run(args: &RunArgs, verbose: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let m = match (args.m, &args.input) {
        (Some(m), _) => m,
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<FileSet>(&text)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?
                .files
                .len()
        }
        (None, None) => 1,
    };
    let params = derive_params(args.q, args.n, args.k, args.t, m)?;
    if args.target == 0 || args.target > m {
        return Err(CliError::InvalidParams(format!("K = {} outside 1..={m}", args.target)));
    }
    let scheme = Scheme::new(&params)?;
    let files = match &args.input {
        Some(path) => load_files(path, &params)?,
        None => {
            let mut rng = ChaCha20Rng::seed_from_u64(args.seed);
            random_files(&scheme.field, m, params.file_len(), &mut rng)
        }
    };
    let storage = StorageSystem::from_files(&files, &scheme.storage_code, params.beta)?;
    let t = run_protocol(&scheme, &storage, args.target, args.seed, &RunOptions::default())?;
    print_transcript(out, &t, verbose)?;
    if params.normalized {
        writeln!(out, "normalized: t_eff = {}, n_eff = {}", params.t_eff, params.n_eff).map_err(out_err)?;
    }
    writeln!(out, "decoded {:?}", t.decoded).map_err(out_err)?;
    if t.decoded != files[args.target - 1] {
        return Err(CliError::CheckFailed("decoded file differs from the stored file".into()));
    }
    if let Some(path) = &args.out {
        write_json(path, &t)?;
    }
    Ok(())
}

fn verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let report = run_suite(args.suite.into(), args.seed);
    print_report(out, &report)?;
    if let Some(path) = &args.out {
        write_json(path, &report)?;
    }
    if report.passed {
        Ok(())
    } else {
        let n = report.checks.iter().filter(|c| !c.passed).count();
        Err(CliError::CheckFailed(format!("{n} check(s) failed in suite {}", report.suite)))
    }
}

/// `min(1, 2(n - k - t + 1)/n)` via the scheme parameters.
pub fn rate_row(n: usize, k: usize, t: usize) -> Result<RateRow, CliError> {
    // the rate does not depend on q; any admissible field order will do
    let p = derive_params(n as u32, n, k, t, 1)?;
    let r: Ratio<u64> = qpir_rate(&p);
    Ok(RateRow {
        n,
        k,
        t,
        numerator: *r.numer(),
        denominator: *r.denom(),
        normalized: p.normalized,
    })
}

fn rate(args: &RateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let rows = match (args.n, args.k, args.t) {
        (Some(n), Some(k), Some(t)) => vec![rate_row(n, k, t)?],
        (None, None, None) => {
            let mut rows = Vec::new();
            for n in args.n_min.max(2)..=args.n_max {
                for k in 1..n {
                    for t in 1..=n - k {
                        rows.push(rate_row(n, k, t)?);
                    }
                }
            }
            rows
        }
        _ => return Err(CliError::InvalidParams("give all of --n, --k, --t or none".into())),
    };
    writeln!(out, "{:>3} {:>3} {:>3}  rate", "n", "k", "t").map_err(out_err)?;
    for r in &rows {
        let frac = if r.denominator == 1 {
            r.numerator.to_string()
        } else {
            format!("{}/{}", r.numerator, r.denominator)
        };
        let mark = if r.normalized { "  (normalized)" } else { "" };
        writeln!(out, "{:>3} {:>3} {:>3}  {frac}{mark}", r.n, r.k, r.t).map_err(out_err)?;
    }
    if let Some(path) = &args.out {
        write_json(path, &rows)?;
    }
    Ok(())
}

/// Executes a parsed command line, writing human-readable output to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Demo(a) => demo(a, cli.verbose, out),
        Command::Run(a) => run(a, cli.verbose, out),
        Command::Verify(a) => verify(a, out),
        Command::Rate(a) => rate(a, out),
    }
}
