//! Command-line front end.
//!
//! Five subcommands over one flag vocabulary: `aggregate` tallies ballot
//! files (optionally under the calibrated noise), `bound` evaluates the
//! analytical error bounds, `simulate` estimates the empirical error rate
//! for one parameter point, `sweep` drives a config file across an axis
//! and writes CSV plus a re-runnable manifest, and `density` tabulates the
//! simplex distance density.
//!
//! Exit codes: 0 success, 1 I/O or unexpected failure, 2 malformed input
//! text or usage, 3 invalid parameter combinations, 4 dimension or
//! permutation mismatches, 5 violated run-time invariants.

pub mod config;

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::bounds::{evaluate, BoundMethod, BoundQuery, BoundResult};
use crate::error::{Error, Result};
use crate::geometry::{DistanceDensity, MAX_EXACT_DENSITY_CANDIDATES};
use crate::io::{format_count, format_real};
use crate::privacy::{add_noise, NoiseSeed, PrivacyParams};
use crate::ranking::{
    aggregate, aggregate_ballots, score_matrix, Histogram, Permutation, PositionalRule, Ranking,
};
use crate::simulator::{sweep, SweepConfig, SweepRow, SweepValues};

use config::parse_rule;

#[derive(Parser)]
#[command(
    name = "dpvote",
    version,
    about = "Differentially private rank aggregation: positional voting under \
             calibrated Gaussian noise, with analytical error bounds and a \
             Monte Carlo validator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tally a ballot file, optionally noised under (epsilon, delta)
    Aggregate(AggregateArgs),
    /// Evaluate analytical upper bounds on the ranking error rate
    Bound(BoundArgs),
    /// Estimate the empirical error rate at one parameter point
    Simulate(SimulateArgs),
    /// Run a config-driven parameter sweep; writes CSV and a manifest
    Sweep(SweepArgs),
    /// Tabulate the distance density of a rule's tie hyperplanes
    Density(DensityArgs),
}

/// Flags shared by every command that needs a full privacy setting.
#[derive(Args)]
struct PrivacyArgs {
    /// Privacy budget epsilon (> 0)
    #[arg(long)]
    epsilon: f64,
    /// Privacy parameter delta in (0, 1)
    #[arg(long, conflicts_with = "delta_scale")]
    delta: Option<f64>,
    /// Per-voter delta: resolves to delta_scale / voters
    #[arg(long)]
    delta_scale: Option<f64>,
    /// Electorate size N
    #[arg(long)]
    voters: u64,
}

impl PrivacyArgs {
    fn resolve(&self) -> Result<PrivacyParams> {
        let delta = match (self.delta, self.delta_scale) {
            (Some(d), None) => d,
            (None, Some(s)) => s / self.voters as f64,
            _ => {
                return Err(Error::Config(
                    "give exactly one of --delta / --delta-scale".into(),
                ))
            }
        };
        PrivacyParams::new(self.epsilon, delta, self.voters)
    }
}

#[derive(Args)]
struct AggregateArgs {
    /// Ballot file: one permutation of 0..m-1 per line, comma-separated
    #[arg(long, required_unless_present = "check_score_table")]
    ballots: Option<PathBuf>,
    /// borda | plurality | custom:<s1,...,sm>
    #[arg(long, default_value = "borda")]
    rule: String,
    /// Also report the noised tally at this epsilon (voters = ballot count)
    #[arg(long)]
    epsilon: Option<f64>,
    /// Privacy parameter delta in (0, 1)
    #[arg(long, requires = "epsilon", conflicts_with = "delta_scale")]
    delta: Option<f64>,
    /// Per-voter delta: resolves to delta_scale / ballot count
    #[arg(long, requires = "epsilon")]
    delta_scale: Option<f64>,
    /// Master seed for the noise draw
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Verify the built-in 3-candidate score table and exit
    #[arg(long)]
    check_score_table: bool,
}

#[derive(Args)]
struct BoundArgs {
    /// max-slice | midpoint | simplified | rule-specific | all
    #[arg(long, value_parser = ["max-slice", "midpoint", "simplified", "rule-specific", "all"])]
    method: String,
    /// Number of candidates m (>= 3)
    #[arg(long)]
    candidates: usize,
    #[command(flatten)]
    privacy: PrivacyArgs,
    /// Evaluate at this slack radius in (0, sqrt(2)] instead of the
    /// optimal one (rejected by `simplified`, which pins its own radius)
    #[arg(long)]
    tau: Option<f64>,
    /// Rule for the rule-specific bound
    #[arg(long, default_value = "borda")]
    rule: String,
    /// Write CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Number of candidates m (3..=8)
    #[arg(long)]
    candidates: usize,
    /// borda | plurality | custom:<s1,...,sm>
    #[arg(long, default_value = "borda")]
    rule: String,
    #[command(flatten)]
    privacy: PrivacyArgs,
    /// Monte Carlo trials
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    /// Master seed for the trial streams
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep config file (see the bundled configs/ directory)
    #[arg(long)]
    config: PathBuf,
    /// CSV output path; the manifest lands next to it as <out>.manifest
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DensityArgs {
    /// Number of candidates m (exact for 3..=6, Monte Carlo for 7..=8)
    #[arg(long)]
    candidates: usize,
    /// borda | plurality | custom:<s1,...,sm>
    #[arg(long, default_value = "borda")]
    rule: String,
    /// Force the Monte Carlo estimator with this many samples
    #[arg(long)]
    samples: Option<u64>,
    /// Seed for the Monte Carlo estimator
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses the command line, runs the command, and returns the process exit
/// code. Errors are reported on stderr.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Aggregate(args) => cmd_aggregate(args),
        Command::Bound(args) => cmd_bound(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Density(args) => cmd_density(args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Exit code for an error, grouped by failure class.
pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Parse { .. } => 2,
        Error::Config(_)
        | Error::Domain(_)
        | Error::DegenerateInput(_)
        | Error::Unsupported(_)
        | Error::NoInteriorMinimum
        | Error::InvalidPair(..) => 3,
        Error::DimensionMismatch { .. } | Error::InvalidPermutation(_) => 4,
        Error::InvariantViolation(_) => 5,
        Error::Io(_) => 1,
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Parses ballot lines: comma-separated candidate ids, one ballot per
/// line; blank lines and `#` comments are skipped. Malformed lines are
/// parse errors carrying their 1-based line number; a ballot whose length
/// disagrees with earlier lines is a dimension mismatch.
fn parse_ballot_text(text: &str) -> Result<Vec<Permutation>> {
    let mut ballots = Vec::new();
    let mut m: Option<usize> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let ids = t
            .split(',')
            .map(|tok| {
                tok.trim().parse::<usize>().map_err(|_| Error::Parse {
                    line,
                    msg: format!("bad candidate id `{}`", tok.trim()),
                })
            })
            .collect::<Result<Vec<usize>>>()?;
        match m {
            Some(expected) if ids.len() != expected => {
                return Err(Error::DimensionMismatch { expected, got: ids.len() })
            }
            None => m = Some(ids.len()),
            _ => {}
        }
        ballots.push(
            Permutation::new(ids)
                .map_err(|e| Error::Parse { line, msg: e.to_string() })?,
        );
    }
    if ballots.is_empty() {
        return Err(Error::DegenerateInput("no ballots in file".into()));
    }
    Ok(ballots)
}

/// The 3-candidate score table in lexicographic ballot order, tabulated by
/// hand: entry `[k][c]` is what candidate `c` earns from ballot `k` under
/// the linear descending rule (1, 1/2, 0).
const SCORE_TABLE_3: [[f64; 3]; 6] = [
    [1.0, 0.5, 0.0],
    [1.0, 0.0, 0.5],
    [0.5, 1.0, 0.0],
    [0.0, 1.0, 0.5],
    [0.5, 0.0, 1.0],
    [0.0, 0.5, 1.0],
];

fn check_score_table() -> Result<String> {
    let rule = PositionalRule::borda(3)?;
    let matrix = score_matrix(&rule)?;
    let mut report = String::from("score table: 6 ballots x 3 candidates\n");
    for (k, expected_row) in SCORE_TABLE_3.iter().enumerate() {
        let ballot = Permutation::at(3, k)?;
        let labels: Vec<String> = ballot.order().iter().map(|c| c.to_string()).collect();
        let entries: Vec<String> = (0..3).map(|c| matrix[c][k].to_string()).collect();
        report.push_str(&format!("ballot {}: {}\n", labels.join(","), entries.join(" ")));
        for (c, &want) in expected_row.iter().enumerate() {
            if matrix[c][k] != want {
                return Err(Error::InvariantViolation(format!(
                    "score table entry (ballot {k}, candidate {c}) is {}, expected {want}",
                    matrix[c][k]
                )));
            }
        }
    }
    report.push_str("score table OK (18 entries verified)\n");
    Ok(report)
}

fn ranking_line(r: &Ranking) -> String {
    let order: Vec<String> = r.order.iter().map(|c| c.to_string()).collect();
    order.join(" > ")
}

fn totals_line(r: &Ranking) -> String {
    let parts: Vec<String> = r
        .order
        .iter()
        .map(|&c| format!("{c}={}", r.scores[c]))
        .collect();
    parts.join(", ")
}

fn cmd_aggregate(args: &AggregateArgs) -> Result<()> {
    if args.check_score_table {
        let report = check_score_table()?;
        return emit(&args.out, &report);
    }
    let path = args.ballots.as_ref().expect("clap enforces --ballots");
    let ballots = parse_ballot_text(&fs::read_to_string(path)?)?;
    let m = ballots[0].m();
    let rule = parse_rule(&args.rule, m)?;
    let tally = aggregate_ballots(&rule, &ballots)?;

    let mut report = String::new();
    report.push_str(&format!("candidates = {m}\n"));
    report.push_str(&format!("ballots = {}\n", ballots.len()));
    report.push_str(&format!("rule = {}\n", rule.label()));
    report.push_str(&format!("true ranking = {}\n", ranking_line(&tally)));
    report.push_str(&format!("true totals = {}\n", totals_line(&tally)));
    if tally.tied {
        report.push_str("note: exact tie in the true totals, broken toward smaller ids\n");
    }

    if let Some(epsilon) = args.epsilon {
        let voters = ballots.len() as u64;
        let delta = match (args.delta, args.delta_scale) {
            (Some(d), None) => d,
            (None, Some(s)) => s / voters as f64,
            _ => {
                return Err(Error::Config(
                    "noised aggregation needs exactly one of --delta / --delta-scale".into(),
                ))
            }
        };
        let params = PrivacyParams::new(epsilon, delta, voters)?;
        if let Some(w) = params.warning() {
            eprintln!("warning: {w}");
        }
        let hist = Histogram::from_ballots(&ballots)?;
        let sample = add_noise(&hist, &params, NoiseSeed::new(args.seed));
        let noised = aggregate(&rule, sample.values())?;
        report.push_str(&format!("sigma = {}\n", params.sigma()));
        report.push_str(&format!("seed = {}\n", args.seed));
        report.push_str(&format!("noised ranking = {}\n", ranking_line(&noised)));
        report.push_str(&format!("noised totals = {}\n", totals_line(&noised)));
        report.push_str(&format!("changed = {}\n", noised.order != tally.order));
    }
    emit(&args.out, &report)
}

const BOUND_CSV_HEADER: &str = "method,M,N,epsilon,delta,tau,value";

fn bound_csv_row(r: &BoundResult, m: usize, params: &PrivacyParams) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        r.method.label(),
        m,
        params.voters(),
        format_real(params.epsilon()),
        format_real(params.delta()),
        format_real(r.tau),
        format_real(r.value),
    )
}

fn cmd_bound(args: &BoundArgs) -> Result<()> {
    let params = args.privacy.resolve()?;
    if let Some(w) = params.warning() {
        eprintln!("warning: {w}");
    }
    let m = args.candidates;
    let methods: Vec<BoundMethod> = match args.method.as_str() {
        "max-slice" => vec![BoundMethod::MaxSlice],
        "midpoint" => vec![BoundMethod::Midpoint],
        "simplified" => vec![BoundMethod::Simplified],
        "rule-specific" => vec![BoundMethod::RuleSpecific],
        "all" => vec![
            BoundMethod::MaxSlice,
            BoundMethod::Midpoint,
            BoundMethod::RuleSpecific,
            BoundMethod::Simplified,
        ],
        other => return Err(Error::Config(format!("unknown method `{other}`"))),
    };
    let all = args.method == "all";

    let mut results: Vec<BoundResult> = Vec::new();
    for method in methods {
        if method == BoundMethod::RuleSpecific && all && m > MAX_EXACT_DENSITY_CANDIDATES {
            eprintln!(
                "note: skipping the rule-specific bound (exact density needs m <= \
                 {MAX_EXACT_DENSITY_CANDIDATES}, got {m})"
            );
            continue;
        }
        let mut query = BoundQuery::new(m, params.clone())?;
        if let Some(tau) = args.tau {
            // under `all` the simplified row keeps its own radius; asked for
            // directly, the method itself rejects an override
            if !(all && method == BoundMethod::Simplified) {
                query = query.with_tau(tau)?;
            }
        }
        if method == BoundMethod::RuleSpecific {
            query = query.with_rule(parse_rule(&args.rule, m)?)?;
        }
        results.push(evaluate(method, &query)?);
    }

    if all {
        check_dominance(&results, args.tau.is_some())?;
    }

    let mut csv = String::from(BOUND_CSV_HEADER);
    csv.push('\n');
    for r in &results {
        csv.push_str(&bound_csv_row(r, m, &params));
        csv.push('\n');
    }
    emit(&args.out, &csv)
}

/// Cross-checks the reported bound values against the orderings the theory
/// promises. At default radii the chain is
/// rule-specific <= midpoint <= max-slice; under a shared fixed radius the
/// midpoint and rule-specific variants each refine max-slice, but are not
/// ordered against each other at large radii.
fn check_dominance(results: &[BoundResult], shared_tau: bool) -> Result<()> {
    let find = |m: BoundMethod| results.iter().find(|r| r.method == m);
    let Some(ms) = find(BoundMethod::MaxSlice) else { return Ok(()) };
    const SLACK: f64 = 1e-12;
    let mid = find(BoundMethod::Midpoint);
    let rs = find(BoundMethod::RuleSpecific);
    if let Some(mid) = mid {
        if mid.value > ms.value + SLACK {
            return Err(Error::InvariantViolation(format!(
                "midpoint bound {} exceeds max-slice bound {}",
                mid.value, ms.value
            )));
        }
    }
    if let Some(rs) = rs {
        if rs.value > ms.value + SLACK {
            return Err(Error::InvariantViolation(format!(
                "rule-specific bound {} exceeds max-slice bound {}",
                rs.value, ms.value
            )));
        }
        if !shared_tau {
            if let Some(mid) = mid {
                if rs.value > mid.value + SLACK {
                    return Err(Error::InvariantViolation(format!(
                        "rule-specific bound {} exceeds midpoint bound {}",
                        rs.value, mid.value
                    )));
                }
            }
        }
    }
    Ok(())
}

const SWEEP_CSV_HEADER: &str =
    "axis,value,trials,errors,rate,ci_lo,ci_hi,ties,bound_max_slice,bound_midpoint,bound_rule";

fn sweep_csv_rows(rows: &[SweepRow]) -> String {
    let mut csv = String::from(SWEEP_CSV_HEADER);
    csv.push('\n');
    for row in rows {
        let value = match row.axis {
            crate::simulator::SweepAxis::Epsilon => format_real(row.value),
            crate::simulator::SweepAxis::Voters => format_count(row.value),
        };
        let e = &row.estimate;
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            row.axis.label(),
            value,
            e.trials,
            e.errors,
            format_real(e.rate),
            format_real(e.ci_low),
            format_real(e.ci_high),
            e.ties,
            format_real(row.bound_max_slice),
            format_real(row.bound_midpoint),
            row.bound_rule_specific.map(format_real).unwrap_or_default(),
        ));
    }
    csv
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let rule = parse_rule(&args.rule, args.candidates)?;
    let params = args.privacy.resolve()?;
    if let Some(w) = params.warning() {
        eprintln!("warning: {w}");
    }
    let delta = match (args.privacy.delta, args.privacy.delta_scale) {
        (Some(d), None) => crate::privacy::DeltaSpec::Absolute(d),
        (None, Some(s)) => crate::privacy::DeltaSpec::PerVoter(s),
        _ => return Err(Error::Config("give exactly one of --delta / --delta-scale".into())),
    };
    let cfg = SweepConfig {
        rule,
        values: SweepValues::Epsilon {
            values: vec![args.privacy.epsilon],
            voters: args.privacy.voters,
        },
        delta,
        trials: args.trials,
        seed: args.seed,
    };
    let rows = sweep(&cfg)?;
    emit(&args.out, &sweep_csv_rows(&rows))
}

fn single_point_config(cfg: &SweepConfig, index: usize) -> SweepConfig {
    let values = match &cfg.values {
        SweepValues::Epsilon { values, voters } => SweepValues::Epsilon {
            values: vec![values[index]],
            voters: *voters,
        },
        SweepValues::Voters { values, epsilon } => SweepValues::Voters {
            values: vec![values[index]],
            epsilon: *epsilon,
        },
    };
    SweepConfig { values, ..cfg.clone() }
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let cfg = config::parse_sweep_config(&args.config)?;
    let count = match &cfg.values {
        SweepValues::Epsilon { values, .. } => values.len(),
        SweepValues::Voters { values, .. } => values.len(),
    };
    // run row by row (each row is internally parallel) purely so progress
    // is visible on long sweeps; results are identical to one sweep() call
    let mut rows = Vec::with_capacity(count);
    for i in 0..count {
        let mut row = sweep(&single_point_config(&cfg, i))?;
        let r = row.pop().expect("single-point sweep yields one row");
        eprintln!(
            "[{}/{count}] {}={} rate={:.5} errors={}/{}",
            i + 1,
            r.axis.label(),
            format_count(r.value),
            r.estimate.rate,
            r.estimate.errors,
            r.estimate.trials,
        );
        rows.push(r);
    }
    fs::write(&args.out, sweep_csv_rows(&rows))?;
    let manifest_path = args.out.with_extension("manifest");
    fs::write(&manifest_path, config::sweep_manifest(&cfg))?;
    eprintln!("wrote {} and {}", args.out.display(), manifest_path.display());
    Ok(())
}

fn cmd_density(args: &DensityArgs) -> Result<()> {
    let rule = parse_rule(&args.rule, args.candidates)?;
    let monte_carlo = args.samples.is_some() || args.candidates > MAX_EXACT_DENSITY_CANDIDATES;
    let mut csv = String::new();
    if monte_carlo {
        let samples = args.samples.unwrap_or(1_000_000);
        let dens = DistanceDensity::monte_carlo(&rule, samples, args.seed)?;
        csv.push_str("l,p_d,se\n");
        let se = dens.std_errors().expect("monte carlo densities carry errors");
        for ((l, v), s) in dens.grid().iter().zip(dens.values()).zip(se) {
            csv.push_str(&format!(
                "{},{},{}\n",
                format_real(*l),
                format_real(*v),
                format_real(*s)
            ));
        }
    } else {
        let dens = DistanceDensity::exact(&rule)?;
        csv.push_str("l,p_d\n");
        for (l, v) in dens.grid().iter().zip(dens.values()) {
            csv.push_str(&format!("{},{}\n", format_real(*l), format_real(*v)));
        }
    }
    emit(&args.out, &csv)
}
