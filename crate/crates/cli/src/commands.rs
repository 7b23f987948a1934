//! Argument parsing and command dispatch.
//!
//! Exit codes are stable across commands: 0 success, 1 certification
//! failure, 2 invalid configuration, 3 malformed input file.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use osearch_core::advice::{
    encode_day_fixed, encode_day_self_delimiting, oracle_threshold_index, AdviceTape,
};
use osearch_core::adversary::{
    adaptive_lower_bound, build_staircase, pigeonhole_sweep, AdversaryCase,
};
use osearch_core::analysis::{
    advice_bound, certification_report, figure_data, figure_data_dense, BoundCurve,
};
use osearch_core::formats::{
    curve_to_csv, sequence_from_plain, CurveDoc, SequenceDoc, StaircaseDoc, TranscriptDoc,
};
use osearch_core::market::{
    competitive_ratio, optimal_offline, MarketBounds, PriceSequence, TradeOutcome,
};
use osearch_core::strategies::{
    advice_player, make_rpp, optimal_day_player, randomized_geometric_player, run_policy,
    threshold_family, DyadicMode, MAX_ADVICE_BITS,
};

const AFTER_HELP: &str = "\
Environment:
  OSEARCH_TOL    default relative tolerance for certification checks (1e-9)
  OSEARCH_B_CAP  advice-budget cap accepted by the harness (default and
                 hard maximum 24)

Exit codes:
  0  success
  1  certification failure
  2  invalid configuration
  3  malformed input file

Reproducibility: all randomness derives from --seed via the ChaCha8 stream
cipher PRNG (rand_chacha crate). Generated prices are m + (M-m)*u with u the
generator's standard 53-bit uniform draw from [0, 1); for random-geo the
ladder index is drawn from the same seeded stream after any generation.
Identical configuration and seed produce byte-identical output.";

#[derive(Parser)]
#[command(
    name = "osearch",
    version,
    about = "Online-search trading strategies, advice oracles, adversaries, and bound tables",
    after_help = AFTER_HELP
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write output to a file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Output format; defaults to plain for reports and csv for tables.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Relative tolerance for certification checks (env OSEARCH_TOL).
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one strategy on one sequence; report outcome, optimum, and ratio.
    Simulate(SimulateArgs),
    /// Construct adversarial instances: a staircase family or an adaptive game.
    Adversary(AdversaryArgs),
    /// Closed-form bound table for a price corridor.
    Bounds(BoundsArgs),
    /// Bound-curve data at a fluctuation ratio (defaults: ratio 100, b-max 10).
    Figure(FigureArgs),
    /// Certify measured adversary ratios against closed forms, plus the
    /// staircase pigeonhole and optimal-day checks. Exits 1 on any mismatch.
    Certify(CertifyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Plain,
    Csv,
    Doc,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Strategy {
    /// Reservation-price policy rpp(p).
    Rpp,
    /// b-bit advice player over the geometric threshold ladder.
    Advice,
    /// Player that trades on the advice-encoded day.
    OptDay,
    /// Randomized geometric policy (seeded).
    RandomGeo,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AdversaryMode {
    Staircase,
    Adaptive,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    strategy: Strategy,
    /// Floor price m (inferred from the sequence when omitted).
    #[arg(long)]
    m: Option<f64>,
    /// Ceiling price M (inferred from the sequence when omitted).
    #[arg(long = "M")]
    upper: Option<f64>,
    /// Reservation price for --strategy rpp.
    #[arg(long)]
    p: Option<f64>,
    /// Advice budget in bits for --strategy advice.
    #[arg(long)]
    b: Option<u32>,
    /// Comma-separated prices, e.g. "3,1,1".
    #[arg(long)]
    seq: Option<String>,
    /// Sequence file: JSON {"m","M","prices"} by default, lines with --plain.
    #[arg(long, value_name = "PATH")]
    input: Option<PathBuf>,
    /// Treat --input as plain lines, one price per line (requires --m/--M).
    #[arg(long)]
    plain: bool,
    /// Generate this many prices uniformly in [m, M] (requires --m/--M).
    #[arg(long)]
    n: Option<usize>,
    /// PRNG seed for generation and the random-geo draw.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Explicit advice tape (e.g. "0110"); computed by the oracle if omitted.
    #[arg(long)]
    tape: Option<String>,
    /// Use the self-delimiting day encoding for opt-day advice.
    #[arg(long)]
    self_delimiting: bool,
    /// Reject corridors whose M/m is not a power of two (random-geo).
    #[arg(long)]
    strict_dyadic: bool,
}

#[derive(Args)]
struct AdversaryArgs {
    #[arg(long, value_enum)]
    mode: AdversaryMode,
    /// Floor price m.
    #[arg(long)]
    m: f64,
    /// Ceiling price M.
    #[arg(long = "M")]
    upper: f64,
    /// Advice budget (adaptive mode only).
    #[arg(long)]
    b: Option<u32>,
    /// Horizon: member length (staircase) or request budget (adaptive).
    #[arg(long)]
    n: usize,
}

#[derive(Args)]
struct BoundsArgs {
    /// Floor price m.
    #[arg(long)]
    m: f64,
    /// Ceiling price M.
    #[arg(long = "M")]
    upper: f64,
    /// Largest advice budget in the table.
    #[arg(long, default_value_t = 10)]
    b_max: u32,
}

#[derive(Args)]
struct FigureArgs {
    /// Fluctuation ratio M/m.
    #[arg(long, default_value_t = 100.0)]
    ratio: f64,
    /// Largest advice budget on the curve.
    #[arg(long, default_value_t = 10)]
    b_max: u32,
    /// Sample the curve on a dense real-valued grid with this step
    /// (e.g. 0.05) instead of integer budgets.
    #[arg(long)]
    grid_step: Option<f64>,
}

#[derive(Args)]
struct CertifyArgs {
    /// Floor price m.
    #[arg(long)]
    m: f64,
    /// Ceiling price M.
    #[arg(long = "M")]
    upper: f64,
    /// Certify budgets b = 0..=b-max.
    #[arg(long, default_value_t = 8)]
    b_max: u32,
    /// Adversary request budget (default: 2^b-max + 1, the minimum legal).
    #[arg(long)]
    n: Option<usize>,
    /// Staircase horizons for the pigeonhole and optimal-day checks.
    #[arg(long, default_value = "4,8,16", value_name = "N,N,..")]
    staircase_n: String,
    /// Negative-control hook: scale the adversary's request ladder by
    /// (1 + PERTURB). Any nonzero value must make certification fail.
    #[arg(long, default_value_t = 0.0)]
    perturb: f64,
}

/// Error carrying the process exit code.
pub struct CliError {
    pub code: u8,
    pub message: String,
}

fn config_err(message: impl ToString) -> CliError {
    CliError {
        code: 2,
        message: message.to_string(),
    }
}

fn input_err(message: impl ToString) -> CliError {
    CliError {
        code: 3,
        message: message.to_string(),
    }
}

struct Ctx {
    tol: f64,
    b_cap: u32,
    out: Option<PathBuf>,
    format: Option<Format>,
}

fn read_env_f64(name: &str) -> Result<Option<f64>, CliError> {
    match std::env::var(name) {
        Ok(raw) => raw
            .parse::<f64>()
            .map(Some)
            .map_err(|_| config_err(format!("{name} is not a number: {raw:?}"))),
        Err(_) => Ok(None),
    }
}

fn read_env_u32(name: &str) -> Result<Option<u32>, CliError> {
    match std::env::var(name) {
        Ok(raw) => raw
            .parse::<u32>()
            .map(Some)
            .map_err(|_| config_err(format!("{name} is not a nonnegative integer: {raw:?}"))),
        Err(_) => Ok(None),
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let tol = match cli.tol {
        Some(t) => t,
        None => read_env_f64("OSEARCH_TOL")?.unwrap_or(1e-9),
    };
    if !tol.is_finite() || tol <= 0.0 {
        return Err(config_err(format!("tolerance must be positive, got {tol}")));
    }
    let b_cap = read_env_u32("OSEARCH_B_CAP")?
        .unwrap_or(MAX_ADVICE_BITS)
        .min(MAX_ADVICE_BITS);
    // Output paths are validated before any computation starts.
    if let Some(path) = &cli.out {
        let parent = match path.parent() {
            Some(dir) if !dir.as_os_str().is_empty() => dir,
            _ => std::path::Path::new("."),
        };
        if !parent.is_dir() {
            return Err(config_err(format!(
                "output directory {} does not exist",
                parent.display()
            )));
        }
    }
    let ctx = Ctx {
        tol,
        b_cap,
        out: cli.out,
        format: cli.format,
    };
    match cli.command {
        Command::Simulate(args) => cmd_simulate(args, &ctx),
        Command::Adversary(args) => cmd_adversary(args, &ctx),
        Command::Bounds(args) => cmd_bounds(args, &ctx),
        Command::Figure(args) => cmd_figure(args, &ctx),
        Command::Certify(args) => cmd_certify(args, &ctx),
    }
}

fn parse_seq_flag(raw: &str) -> Result<Vec<f64>, CliError> {
    raw.split(',')
        .map(str::trim)
        .filter(|part| !part.is_empty())
        .map(|part| {
            part.parse::<f64>()
                .map_err(|_| config_err(format!("--seq: not a number: {part:?}")))
        })
        .collect()
}

fn inferred_bounds(prices: &[f64]) -> Result<MarketBounds, CliError> {
    let lower = prices.iter().cloned().fold(f64::INFINITY, f64::min);
    let upper = prices.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    MarketBounds::new(lower, upper)
        .map_err(|e| config_err(format!("cannot infer bounds from the sequence: {e}")))
}

fn explicit_bounds(m: Option<f64>, upper: Option<f64>) -> Result<Option<MarketBounds>, CliError> {
    match (m, upper) {
        (Some(lower), Some(upper)) => MarketBounds::new(lower, upper)
            .map(Some)
            .map_err(config_err),
        (None, None) => Ok(None),
        _ => Err(config_err("provide both --m and --M, or neither")),
    }
}

fn resolve_sequence(
    args: &SimulateArgs,
    rng: &mut ChaCha8Rng,
) -> Result<PriceSequence, CliError> {
    let flags = explicit_bounds(args.m, args.upper)?;
    let sources = usize::from(args.seq.is_some())
        + usize::from(args.input.is_some())
        + usize::from(args.n.is_some());
    if sources != 1 {
        return Err(config_err(
            "choose exactly one input source: --seq, --input, or --n",
        ));
    }

    if let Some(raw) = &args.seq {
        let prices = parse_seq_flag(raw)?;
        if prices.is_empty() {
            return Err(config_err("--seq is empty"));
        }
        let bounds = match flags {
            Some(b) => b,
            None => inferred_bounds(&prices)?,
        };
        return PriceSequence::new(prices, bounds).map_err(config_err);
    }

    if let Some(path) = &args.input {
        let text = fs::read_to_string(path)
            .map_err(|e| input_err(format!("cannot read {}: {e}", path.display())))?;
        if args.plain {
            let bounds =
                flags.ok_or_else(|| config_err("--plain input needs --m and --M for bounds"))?;
            return sequence_from_plain(&text, bounds).map_err(input_err);
        }
        let doc = SequenceDoc::from_json(&text).map_err(input_err)?;
        let seq = doc.into_sequence().map_err(input_err)?;
        if let Some(bounds) = flags {
            // Explicit flags override the document's corridor.
            return PriceSequence::new(seq.prices().to_vec(), bounds).map_err(config_err);
        }
        return Ok(seq);
    }

    let n = args.n.expect("checked above");
    if n == 0 {
        return Err(config_err("--n must be at least 1"));
    }
    let bounds = flags.ok_or_else(|| config_err("generated sequences need --m and --M"))?;
    let span = bounds.upper() - bounds.lower();
    let prices: Vec<f64> = (0..n)
        .map(|_| bounds.lower() + span * rng.random::<f64>())
        .collect();
    PriceSequence::new(prices, bounds).map_err(config_err)
}

fn cmd_simulate(args: SimulateArgs, ctx: &Ctx) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let seq = resolve_sequence(&args, &mut rng)?;
    let bounds = seq.bounds();
    let opt = optimal_offline(&seq);

    let explicit_tape = |raw: &Option<String>| -> Result<Option<AdviceTape>, CliError> {
        raw.as_ref()
            .map(|t| t.parse::<AdviceTape>().map_err(config_err))
            .transpose()
    };

    let (label, tape_text, outcome): (String, Option<String>, TradeOutcome) = match args.strategy {
        Strategy::Rpp => {
            let p = args.p.ok_or_else(|| config_err("--strategy rpp needs --p"))?;
            let policy = make_rpp(p).map_err(config_err)?;
            (policy.label().to_string(), None, run_policy(&policy, &seq))
        }
        Strategy::Advice => {
            let b = args.b.ok_or_else(|| config_err("--strategy advice needs --b"))?;
            if b > ctx.b_cap {
                return Err(config_err(format!(
                    "b={b} exceeds the advice-budget cap {} (see OSEARCH_B_CAP)",
                    ctx.b_cap
                )));
            }
            let mut tape = match explicit_tape(&args.tape)? {
                Some(t) => t,
                None => oracle_threshold_index(b, bounds, &seq).map_err(config_err)?,
            };
            let rendered = tape.to_string();
            let policy = advice_player(b, &mut tape, bounds).map_err(config_err)?;
            (
                policy.label().to_string(),
                Some(rendered),
                run_policy(&policy, &seq),
            )
        }
        Strategy::OptDay => {
            let mut tape = match explicit_tape(&args.tape)? {
                Some(t) => t,
                None if args.self_delimiting => {
                    encode_day_self_delimiting(opt.day, seq.n()).map_err(config_err)?
                }
                None => encode_day_fixed(opt.day, seq.n()).map_err(config_err)?,
            };
            let rendered = tape.to_string();
            let n_known = if args.self_delimiting {
                None
            } else {
                Some(seq.n())
            };
            let player = optimal_day_player(&mut tape, n_known).map_err(config_err)?;
            let outcome = player.run(&seq).map_err(config_err)?;
            (
                format!("opt-day({})", player.target_day()),
                Some(rendered),
                outcome,
            )
        }
        Strategy::RandomGeo => {
            let mode = if args.strict_dyadic {
                DyadicMode::Strict
            } else {
                DyadicMode::Lenient
            };
            let policy = randomized_geometric_player(bounds, &mut rng, mode).map_err(config_err)?;
            (policy.label().to_string(), None, run_policy(&policy, &seq))
        }
    };

    let report = competitive_ratio(outcome, opt).map_err(config_err)?;

    let text = match ctx.format.unwrap_or(Format::Plain) {
        Format::Plain => {
            let mut text = format!(
                "sequence: n={} m={} M={}\nprices: {}\npolicy: {}\n",
                seq.n(),
                crate::output::short(bounds.lower()),
                crate::output::short(bounds.upper()),
                crate::output::join_prices(seq.prices()),
                label,
            );
            if let Some(tape) = &tape_text {
                text.push_str(&format!("tape: \"{tape}\"\n"));
            }
            text.push_str(&format!(
                "outcome: day={} profit={}\nopt: day={} profit={}\nratio: {}\n",
                outcome.day,
                crate::output::short(outcome.profit),
                opt.day,
                crate::output::short(opt.profit),
                crate::output::short(report.ratio),
            ));
            text
        }
        Format::Doc => crate::output::pretty_json(&serde_json::json!({
            "sequence": SequenceDoc::from_sequence(&seq),
            "policy": label,
            "tape": tape_text,
            "outcome": {"day": outcome.day, "profit": outcome.profit},
            "opt": {"day": opt.day, "profit": opt.profit},
            "ratio": report.ratio,
        })),
        Format::Csv => {
            let mut rows: Vec<(&str, String)> = vec![
                ("policy", crate::output::csv_quote(&label)),
                ("n", seq.n().to_string()),
            ];
            if let Some(tape) = &tape_text {
                rows.push(("tape", crate::output::csv_quote(tape)));
            }
            rows.push(("outcome_day", outcome.day.to_string()));
            rows.push(("outcome_profit", crate::output::full(outcome.profit)));
            rows.push(("opt_day", opt.day.to_string()));
            rows.push(("opt_profit", crate::output::full(opt.profit)));
            rows.push(("ratio", crate::output::full(report.ratio)));
            crate::output::kv_csv(&rows)
        }
    };
    crate::output::emit(&ctx.out, &text)
}

fn cmd_adversary(args: AdversaryArgs, ctx: &Ctx) -> Result<(), CliError> {
    let bounds = MarketBounds::new(args.m, args.upper).map_err(config_err)?;
    match args.mode {
        AdversaryMode::Staircase => {
            let family = build_staircase(args.n, bounds).map_err(config_err)?;
            let text = match ctx.format.unwrap_or(Format::Plain) {
                Format::Plain => {
                    let mut text = format!(
                        "staircase: n={} m={} M={} delta={}\n",
                        family.n(),
                        crate::output::short(bounds.lower()),
                        crate::output::short(bounds.upper()),
                        crate::output::short(family.delta()),
                    );
                    for (idx0, member) in family.members().iter().enumerate() {
                        let opt = optimal_offline(member);
                        text.push_str(&format!(
                            "member {}: prices={} opt: day={} profit={}\n",
                            idx0 + 1,
                            crate::output::join_prices(member.prices()),
                            opt.day,
                            crate::output::short(opt.profit),
                        ));
                    }
                    text
                }
                Format::Doc => {
                    let mut text = StaircaseDoc::from_family(&family).to_json();
                    text.push('\n');
                    text
                }
                Format::Csv => {
                    let mut text = String::from("member,day,price\n");
                    for (idx0, member) in family.members().iter().enumerate() {
                        for (day0, &price) in member.prices().iter().enumerate() {
                            text.push_str(&format!(
                                "{},{},{}\n",
                                idx0 + 1,
                                day0 + 1,
                                crate::output::full(price)
                            ));
                        }
                    }
                    text
                }
            };
            crate::output::emit(&ctx.out, &text)
        }
        AdversaryMode::Adaptive => {
            let b = args
                .b
                .ok_or_else(|| config_err("adaptive mode needs --b"))?;
            if b > ctx.b_cap {
                return Err(config_err(format!(
                    "b={b} exceeds the advice-budget cap {} (see OSEARCH_B_CAP)",
                    ctx.b_cap
                )));
            }
            let needed = (1usize << b) + 1;
            if args.n < needed {
                return Err(config_err(format!(
                    "adaptive mode needs n >= 2^b + 1 = {needed} (equivalently b < log2 n); got n={}",
                    args.n
                )));
            }
            let family = threshold_family(b, bounds).map_err(config_err)?;
            let transcript =
                adaptive_lower_bound(b, args.n, bounds, &family.policies()).map_err(config_err)?;
            let closed_form = advice_bound(b, bounds.fluctuation());
            let case_text = match transcript.case_taken {
                AdversaryCase::AllRejectedAt(round) => format!("all_rejected_at({round})"),
                AdversaryCase::AllAcceptedThenMax => "all_accepted_then_max".to_string(),
            };
            let text = match ctx.format.unwrap_or(Format::Plain) {
                Format::Plain => format!(
                    "adaptive: b={} m={} M={} n={}\ncase: {}\nsequence: {}\nbest_policy_profit: {}\nopt: day={} profit={}\nforced_ratio: {}\nclosed_form: {}\n",
                    b,
                    crate::output::short(bounds.lower()),
                    crate::output::short(bounds.upper()),
                    args.n,
                    case_text,
                    crate::output::join_prices(transcript.sequence.prices()),
                    crate::output::short(transcript.best_policy_profit),
                    transcript.opt.day,
                    crate::output::short(transcript.opt.profit),
                    crate::output::short(transcript.forced_ratio),
                    crate::output::short(closed_form),
                ),
                Format::Doc => {
                    let mut text = TranscriptDoc::from_transcript(&transcript, b).to_json();
                    text.push('\n');
                    text
                }
                Format::Csv => crate::output::kv_csv(&[
                    ("b", b.to_string()),
                    ("case", crate::output::csv_quote(&case_text)),
                    ("n", transcript.sequence.n().to_string()),
                    (
                        "best_policy_profit",
                        crate::output::full(transcript.best_policy_profit),
                    ),
                    ("opt_profit", crate::output::full(transcript.opt.profit)),
                    ("forced_ratio", crate::output::full(transcript.forced_ratio)),
                    ("closed_form", crate::output::full(closed_form)),
                ]),
            };
            crate::output::emit(&ctx.out, &text)
        }
    }
}

fn render_curve(curve: &BoundCurve, format: Format) -> String {
    match format {
        Format::Csv => curve_to_csv(curve),
        Format::Doc => {
            let mut text = CurveDoc::from_curve(curve).to_json();
            text.push('\n');
            text
        }
        Format::Plain => {
            let crossover = match curve.crossover {
                Some(b) => crate::output::short(b),
                None => "undefined (needs M/m > 4)".to_string(),
            };
            let mut text = format!(
                "fluctuation: {}\ndet_bound: {}\nrand_upper: {}\nrand_lower: {}\ncrossover: {}\n",
                crate::output::short(curve.fluctuation),
                crate::output::short(curve.det_bound),
                crate::output::short(curve.rand_upper),
                crate::output::short(curve.rand_lower),
                crossover,
            );
            for row in &curve.rows {
                text.push_str(&format!(
                    "b={} advice_bound={}\n",
                    crate::output::short(row.b),
                    crate::output::short(row.advice_bound)
                ));
            }
            text
        }
    }
}

fn cmd_bounds(args: BoundsArgs, ctx: &Ctx) -> Result<(), CliError> {
    let bounds = MarketBounds::new(args.m, args.upper).map_err(config_err)?;
    let curve = figure_data(bounds.fluctuation(), args.b_max).map_err(config_err)?;
    let text = render_curve(&curve, ctx.format.unwrap_or(Format::Csv));
    crate::output::emit(&ctx.out, &text)
}

fn cmd_figure(args: FigureArgs, ctx: &Ctx) -> Result<(), CliError> {
    let curve = match args.grid_step {
        Some(step) => figure_data_dense(args.ratio, args.b_max as f64, step),
        None => figure_data(args.ratio, args.b_max),
    }
    .map_err(config_err)?;
    let text = render_curve(&curve, ctx.format.unwrap_or(Format::Csv));
    crate::output::emit(&ctx.out, &text)
}

fn cmd_certify(args: CertifyArgs, ctx: &Ctx) -> Result<(), CliError> {
    let bounds = MarketBounds::new(args.m, args.upper).map_err(config_err)?;
    if bounds.lower() == bounds.upper() {
        return Err(config_err(
            "certification needs m < M (a degenerate corridor admits no staircase)",
        ));
    }
    if args.b_max > ctx.b_cap {
        return Err(config_err(format!(
            "b-max={} exceeds the advice-budget cap {} (see OSEARCH_B_CAP)",
            args.b_max, ctx.b_cap
        )));
    }
    let n_budget = args.n.unwrap_or((1usize << args.b_max) + 1);
    let staircase_ns: Vec<usize> = args
        .staircase_n
        .split(',')
        .map(str::trim)
        .filter(|part| !part.is_empty())
        .map(|part| {
            part.parse::<usize>()
                .map_err(|_| config_err(format!("--staircase-n: not an integer: {part:?}")))
        })
        .collect::<Result<_, _>>()?;

    let report = certification_report(args.b_max, bounds, n_budget, ctx.tol, 1.0 + args.perturb)
        .map_err(config_err)?;

    let mut all_pass = report.all_pass;
    let mut pigeonhole_lines: Vec<(usize, usize, bool)> = Vec::new();
    let mut optday_lines: Vec<(usize, bool)> = Vec::new();
    for &n in &staircase_ns {
        let (families, witness_ok) = match pigeonhole_sweep(n, bounds) {
            Ok(sweep) => (sweep.families_checked, true),
            Err(osearch_core::Error::NoWitness { .. }) => (0, false),
            Err(e) => return Err(config_err(e)),
        };
        all_pass &= witness_ok;
        pigeonhole_lines.push((n, families, witness_ok));

        // Optimal-day advice must be optimal on every staircase member.
        let family = build_staircase(n, bounds).map_err(config_err)?;
        let mut optimal_everywhere = true;
        for member in family.members() {
            let opt = optimal_offline(member);
            let mut tape = encode_day_fixed(opt.day, n).map_err(config_err)?;
            let player = optimal_day_player(&mut tape, Some(n)).map_err(config_err)?;
            let outcome = player.run(member).map_err(config_err)?;
            optimal_everywhere &= outcome.profit == opt.profit;
        }
        all_pass &= optimal_everywhere;
        optday_lines.push((n, optimal_everywhere));
    }

    let verdict = |pass: bool| if pass { "PASS" } else { "FAIL" };
    let text = match ctx.format.unwrap_or(Format::Plain) {
        Format::Plain => {
            let mut text = format!(
                "certify: m={} M={} b_max={} n={} tol={} perturb={}\n",
                crate::output::short(bounds.lower()),
                crate::output::short(bounds.upper()),
                args.b_max,
                n_budget,
                crate::output::short(ctx.tol),
                crate::output::short(args.perturb),
            );
            for row in &report.rows {
                text.push_str(&format!(
                    "b={} measured={} closed_form={} player_ratio={} rel_err={:e} {}\n",
                    row.b,
                    crate::output::short(row.measured),
                    crate::output::short(row.closed_form),
                    crate::output::short(row.player_ratio),
                    row.rel_err,
                    verdict(row.pass),
                ));
            }
            for &(n, families, ok) in &pigeonhole_lines {
                text.push_str(&format!(
                    "pigeonhole n={n}: families={families} witness_for_each={} {}\n",
                    ok,
                    verdict(ok)
                ));
            }
            for &(n, ok) in &optday_lines {
                text.push_str(&format!(
                    "opt-day n={n}: optimal_on_all_members={} {}\n",
                    ok,
                    verdict(ok)
                ));
            }
            text.push_str(&format!("verdict: {}\n", verdict(all_pass)));
            text
        }
        Format::Doc => crate::output::pretty_json(&serde_json::json!({
            "m": bounds.lower(),
            "M": bounds.upper(),
            "b_max": args.b_max,
            "n": n_budget,
            "tol": ctx.tol,
            "perturb": args.perturb,
            "rows": report.rows.iter().map(|row| serde_json::json!({
                "b": row.b,
                "measured": row.measured,
                "closed_form": row.closed_form,
                "player_ratio": row.player_ratio,
                "rel_err": row.rel_err,
                "pass": row.pass,
            })).collect::<Vec<_>>(),
            "pigeonhole": pigeonhole_lines.iter().map(|&(n, families, ok)| serde_json::json!({
                "n": n, "families": families, "pass": ok,
            })).collect::<Vec<_>>(),
            "opt_day": optday_lines.iter().map(|&(n, ok)| serde_json::json!({
                "n": n, "pass": ok,
            })).collect::<Vec<_>>(),
            "verdict": all_pass,
        })),
        Format::Csv => {
            let mut text = String::new();
            for &(n, families, ok) in &pigeonhole_lines {
                text.push_str(&format!("# pigeonhole n={n} families={families} pass={ok}\n"));
            }
            for &(n, ok) in &optday_lines {
                text.push_str(&format!("# opt-day n={n} pass={ok}\n"));
            }
            text.push_str("b,measured,closed_form,player_ratio,rel_err,pass\n");
            for row in &report.rows {
                text.push_str(&format!(
                    "{},{},{},{},{:e},{}\n",
                    row.b,
                    crate::output::full(row.measured),
                    crate::output::full(row.closed_form),
                    crate::output::full(row.player_ratio),
                    row.rel_err,
                    row.pass,
                ));
            }
            text
        }
    };
    crate::output::emit(&ctx.out, &text)?;
    if all_pass {
        Ok(())
    } else {
        Err(CliError {
            code: 1,
            message: "certification failed; see the report above".to_string(),
        })
    }
}
