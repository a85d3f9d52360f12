//! Batch front-end.
//!
//! Subcommands:
//!
//! * `eval`    — one operation on one channel, one value on stdout;
//! * `sweep`   — a grid sweep over rho, beta or lambda, CSV out;
//! * `figure`  — the three built-in CSV figures (asymptote comparisons
//!   over lambda, and the upper/lower bound curves for the 0.99
//!   correlation channel at beta = 10);
//! * `selfcheck` — cross-module identity suite, one pass/fail line per
//!   invariant.
//!
//! Exit codes: 0 success, 2 usage error, 3 spec error, 4 numeric
//! failure (including selfcheck failures). Errors print one
//! machine-readable line on stderr: `error: kind=<usage|spec|numeric>
//! msg="..."`.
//!
//! CSV: `,` delimiter, `\n` line endings, mandatory header naming the
//! grid variable first and one column per quantity, values printed to
//! 12 significant digits. Output is byte-identical across runs.
//! `NONCOH_THREADS` caps sweep parallelism (absent/0/1 = sequential);
//! rows are assembled in grid order whatever the completion order.

use std::io::Write;
use std::path::PathBuf;
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::asymptotics::{
    c_delay_spread_separable, c_iid, c_iid_from_lambda, c_mimo_individual_loose,
    c_mimo_individual_separable, c_mimo_individual_upper, c_mimo_sum, c_mimo_sum_separable,
    c_psk, c_psk_from_lambda, c_siso, c_siso_from_lambda, large_beta_limit,
};
use crate::bounds::{u_mimo_individual, u_mimo_sum, u_siso};
use crate::channel::{
    channel_from_json_file, ChannelSpec, PowerBudget, ScalarFadingSpec,
};
use crate::error::{Error, Result};
use crate::prediction::{i_of_rho, sigma2_of_rho};
use crate::rate::{
    capacity_lower_bound, lambda_n, mi_qpsk, qpsk_conditional_mi, second_order_mi, InputLaw,
    LawKind, OracleChannel,
};

#[derive(Parser)]
#[command(name = "noncoh", version, about = "capacity bounds for noncoherent fading channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one operation and print the value
    Eval(EvalArgs),
    /// Sweep a grid variable and write CSV
    Sweep(SweepArgs),
    /// Reproduce a built-in figure as CSV
    Figure(FigureArgs),
    /// Run the cross-module identity suite
    Selfcheck,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Op {
    Lambda,
    Ephemeral,
    IRho,
    Sigma2,
    USiso,
    UMimoSum,
    UMimoIndiv,
    CSiso,
    CIid,
    CPsk,
    CMimoSum,
    CMimoSumSep,
    CMimoIndivSep,
    CIndivUpper,
    CIndivLooseUpper,
    CIndivLooseLower,
    CDelaySep,
    LargeBeta,
    LambdaN,
    SecondOrder,
    QpskL,
    LowerBound,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LawArg {
    OnoffFsk,
    OnoffPsk,
    OnoffUniformPhase,
    Storm,
}

#[derive(Args)]
struct EvalArgs {
    /// Channel spec JSON (not needed for --lambda closed forms)
    #[arg(long)]
    channel: Option<PathBuf>,
    #[arg(long, value_enum)]
    op: Op,
    /// Peak SNR
    #[arg(long)]
    rho: Option<f64>,
    /// Peak-to-average ratio
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Noise split d_1,...,d_nt (defaults to uniform 1/nt)
    #[arg(long)]
    d: Option<String>,
    /// Block length for block-input operations
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// On-probability for block-input operations
    #[arg(long, default_value_t = 0.5)]
    a: f64,
    /// Tone / constellation count for block-input operations
    #[arg(long)]
    m: Option<usize>,
    /// Block-input phase family
    #[arg(long, value_enum, default_value_t = LawArg::OnoffFsk)]
    law: LawArg,
    /// Evaluate the lambda-parameterized closed forms directly
    #[arg(long)]
    lambda: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepVar {
    Rho,
    Beta,
    Lambda,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    channel: Option<PathBuf>,
    /// Grid variable
    #[arg(long, value_enum)]
    var: SweepVar,
    /// Explicit grid values, comma separated
    #[arg(long)]
    values: Option<String>,
    /// Logarithmic grid lo:hi:count
    #[arg(long)]
    log_range: Option<String>,
    /// Linear grid lo:hi:count
    #[arg(long)]
    lin_range: Option<String>,
    /// Quantities to tabulate (repeatable)
    #[arg(long = "op", value_enum, required = true)]
    ops: Vec<Op>,
    /// Fixed rho when sweeping beta
    #[arg(long)]
    rho: Option<f64>,
    /// Fixed beta when sweeping rho or lambda
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// CSV destination (stdout when absent)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FigureId {
    Fig1,
    Fig2,
    Fig3,
}

#[derive(Args)]
struct FigureArgs {
    #[arg(value_enum)]
    which: FigureId,
    /// CSV destination (stdout when absent)
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Entry point; returns the process exit code.
pub fn run(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error: kind=usage msg=\"{}\"", msg.trim());
            return 2;
        }
    };
    let outcome = match cli.command {
        Command::Eval(args) => cmd_eval(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Figure(args) => cmd_figure(args),
        Command::Selfcheck => return cmd_selfcheck(),
    };
    match outcome {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: kind=usage msg=\"{msg}\"");
            2
        }
        Err(CliError::Lib(e)) => {
            let (kind, code) = match &e {
                Error::Numeric { .. } => ("numeric", 4),
                _ => ("spec", 3),
            };
            eprintln!("error: kind={kind} msg=\"{e}\"");
            code
        }
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

type CmdResult = std::result::Result<(), CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// 12-significant-digit printing: the shortest round-trip form when it
/// already fits, otherwise scientific notation trimmed of trailing
/// zeros.
pub fn fmt_g12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let shortest = format!("{x}");
    let digits = shortest
        .chars()
        .filter(|c| c.is_ascii_digit())
        .collect::<String>();
    let sig = digits.trim_start_matches('0').len();
    // positional form when it is short enough (Display never switches
    // to scientific on its own, so extreme magnitudes must)
    if sig <= 12 && shortest.len() <= 24 {
        return shortest;
    }
    let sci = format!("{:.*e}", 11, x);
    let (mant, exp) = sci.split_once('e').unwrap();
    let mant = mant.trim_end_matches('0').trim_end_matches('.');
    format!("{mant}e{exp}")
}

fn parse_list(text: &str) -> std::result::Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("cannot parse number '{tok}'")))
        })
        .collect()
}

fn load_channel(path: &Option<PathBuf>) -> std::result::Result<ChannelSpec, CliError> {
    match path {
        Some(p) => Ok(channel_from_json_file(p)?),
        None => Err(usage("--channel is required for this operation")),
    }
}

fn scalar_of(chan: &ChannelSpec) -> std::result::Result<&ScalarFadingSpec, CliError> {
    match chan {
        ChannelSpec::Scalar(s) => Ok(s),
        _ => Err(usage("this operation needs a scalar channel spec")),
    }
}

fn default_d(nt: usize) -> Vec<f64> {
    vec![1.0 / nt as f64; nt]
}

fn law_of(args: &EvalArgs) -> std::result::Result<InputLaw, CliError> {
    let kind = match args.law {
        LawArg::OnoffFsk => LawKind::OnOffFsk {
            m: args.m.unwrap_or(args.n + 1),
        },
        LawArg::OnoffPsk => LawKind::OnOffPsk {
            m: args.m.unwrap_or(2),
        },
        LawArg::OnoffUniformPhase => LawKind::OnOffUniformPhase,
        LawArg::Storm => LawKind::StormCommonSignal {
            m: args.m.unwrap_or(args.n + 1),
        },
    };
    Ok(InputLaw::new(kind, args.n, args.a)?)
}

fn need_rho(args: &EvalArgs) -> std::result::Result<f64, CliError> {
    args.rho.ok_or_else(|| usage("--rho is required for this operation"))
}

fn cmd_eval(args: EvalArgs) -> CmdResult {
    // lambda-parameterized closed forms bypass the channel file
    if let Some(l) = args.lambda {
        let v = match args.op {
            Op::CSiso => c_siso_from_lambda(l, args.beta)?.value,
            Op::CIid => c_iid_from_lambda(l, args.beta)?.value,
            Op::CPsk => c_psk_from_lambda(l)?,
            _ => return Err(usage("--lambda applies only to c-siso, c-iid and c-psk")),
        };
        println!("{}", fmt_g12(v));
        return Ok(());
    }

    let chan = load_channel(&args.channel)?;
    let out: String = match args.op {
        Op::Lambda => match &chan {
            ChannelSpec::Scalar(s) => fmt_g12(s.lambda()),
            _ => return Err(usage("lambda expects a scalar channel")),
        },
        Op::Ephemeral => match &chan {
            ChannelSpec::Scalar(s) => format!("{}", s.is_ephemeral()),
            _ => return Err(usage("ephemeral expects a scalar channel")),
        },
        Op::IRho => fmt_g12(i_of_rho(scalar_of(&chan)?, need_rho(&args)?)?),
        Op::Sigma2 => {
            let rho = args.rho.unwrap_or(0.0);
            fmt_g12(sigma2_of_rho(scalar_of(&chan)?, rho)?.sigma2)
        }
        Op::USiso => {
            let b = PowerBudget::new(need_rho(&args)?, args.beta)?;
            fmt_g12(u_siso(scalar_of(&chan)?, &b)?)
        }
        Op::UMimoSum => match &chan {
            ChannelSpec::Mimo(m) => {
                let b = PowerBudget::new(need_rho(&args)?, args.beta)?;
                fmt_g12(u_mimo_sum(m, &b)?.0)
            }
            _ => return Err(usage("u-mimo-sum expects a MIMO channel")),
        },
        Op::UMimoIndiv => match &chan {
            ChannelSpec::Mimo(m) => {
                let b = PowerBudget::new(need_rho(&args)?, args.beta)?;
                let d = match &args.d {
                    Some(text) => parse_list(text)?,
                    None => default_d(m.nt()),
                };
                fmt_g12(u_mimo_individual(m, &b, &d)?.0)
            }
            _ => return Err(usage("u-mimo-indiv expects a MIMO channel")),
        },
        Op::CSiso => fmt_g12(c_siso(scalar_of(&chan)?, args.beta)?.value),
        Op::CIid => fmt_g12(c_iid(scalar_of(&chan)?, args.beta)?.value),
        Op::CPsk => fmt_g12(c_psk(scalar_of(&chan)?)?),
        Op::CMimoSum => match &chan {
            ChannelSpec::Mimo(m) => fmt_g12(c_mimo_sum(m, args.beta)?.value),
            _ => return Err(usage("c-mimo-sum expects a MIMO channel")),
        },
        Op::CMimoSumSep => match &chan {
            ChannelSpec::Mimo(m) => fmt_g12(c_mimo_sum_separable(m, args.beta)?.value),
            _ => return Err(usage("c-mimo-sum-sep expects a MIMO channel")),
        },
        Op::CMimoIndivSep => match &chan {
            ChannelSpec::Mimo(m) => fmt_g12(c_mimo_individual_separable(m, args.beta)?.value),
            _ => return Err(usage("c-mimo-indiv-sep expects a MIMO channel")),
        },
        Op::CIndivUpper => match &chan {
            ChannelSpec::Mimo(m) => {
                let d = match &args.d {
                    Some(text) => parse_list(text)?,
                    None => default_d(m.nt()),
                };
                fmt_g12(c_mimo_individual_upper(m, &d, args.beta)?)
            }
            _ => return Err(usage("c-indiv-upper expects a MIMO channel")),
        },
        Op::CIndivLooseUpper | Op::CIndivLooseLower => match &chan {
            ChannelSpec::Mimo(m) => {
                let (upper, lower) = c_mimo_individual_loose(m)?;
                fmt_g12(if args.op == Op::CIndivLooseUpper {
                    upper
                } else {
                    lower
                })
            }
            _ => return Err(usage("loose bounds expect a MIMO channel")),
        },
        Op::CDelaySep => match &chan {
            ChannelSpec::Delay(d) => fmt_g12(c_delay_spread_separable(d, args.beta)?.value),
            _ => return Err(usage("c-delay-sep expects a delay-spread channel")),
        },
        Op::LargeBeta => fmt_g12(large_beta_limit(scalar_of(&chan)?, need_rho(&args)?)?),
        Op::LambdaN => fmt_g12(lambda_n(scalar_of(&chan)?, args.n)),
        Op::SecondOrder => {
            let law = law_of(&args)?;
            let oc = match &chan {
                ChannelSpec::Scalar(s) => OracleChannel::Siso(s),
                ChannelSpec::Mimo(m) => OracleChannel::Mimo(m),
                ChannelSpec::Delay(d) => OracleChannel::DelaySpread(d),
            };
            fmt_g12(second_order_mi(oc, &law)?.coeff)
        }
        Op::QpskL => fmt_g12(qpsk_conditional_mi(scalar_of(&chan)?, need_rho(&args)?)?),
        Op::LowerBound => {
            let b = PowerBudget::new(need_rho(&args)?, args.beta)?;
            fmt_g12(capacity_lower_bound(scalar_of(&chan)?, &b)?)
        }
    };
    println!("{out}");
    Ok(())
}

fn op_name(op: Op) -> &'static str {
    match op {
        Op::Lambda => "lambda",
        Op::Ephemeral => "ephemeral",
        Op::IRho => "i_rho",
        Op::Sigma2 => "sigma2",
        Op::USiso => "u_siso",
        Op::UMimoSum => "u_mimo_sum",
        Op::UMimoIndiv => "u_mimo_indiv",
        Op::CSiso => "c",
        Op::CIid => "c_iid",
        Op::CPsk => "c_psk",
        Op::CMimoSum => "c_mimo_sum",
        Op::CMimoSumSep => "c_mimo_sum_sep",
        Op::CMimoIndivSep => "c_mimo_indiv_sep",
        Op::CIndivUpper => "c_indiv_upper",
        Op::CIndivLooseUpper => "c_indiv_loose_upper",
        Op::CIndivLooseLower => "c_indiv_loose_lower",
        Op::CDelaySep => "c_delay_sep",
        Op::LargeBeta => "large_beta",
        Op::LambdaN => "lambda_n",
        Op::SecondOrder => "second_order",
        Op::QpskL => "qpsk_l",
        Op::LowerBound => "lower_bound",
    }
}

fn build_grid(args: &SweepArgs) -> std::result::Result<Vec<f64>, CliError> {
    let picked = [&args.values, &args.log_range, &args.lin_range]
        .iter()
        .filter(|o| o.is_some())
        .count();
    if picked != 1 {
        return Err(usage("choose exactly one of --values, --log-range, --lin-range"));
    }
    let grid = if let Some(v) = &args.values {
        parse_list(v)?
    } else {
        let (spec, log) = match (&args.log_range, &args.lin_range) {
            (Some(s), None) => (s, true),
            (None, Some(s)) => (s, false),
            _ => unreachable!(),
        };
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(usage("range must be lo:hi:count"));
        }
        let lo: f64 = parts[0]
            .parse()
            .map_err(|_| usage("bad range low endpoint"))?;
        let hi: f64 = parts[1]
            .parse()
            .map_err(|_| usage("bad range high endpoint"))?;
        let count: usize = parts[2].parse().map_err(|_| usage("bad range count"))?;
        if count < 2 || !(hi > lo) || (log && lo <= 0.0) {
            return Err(usage("range needs hi > lo and count >= 2 (lo > 0 for log)"));
        }
        (0..count)
            .map(|i| {
                let t = i as f64 / (count - 1) as f64;
                if log {
                    10f64.powf(lo.log10() + t * (hi.log10() - lo.log10()))
                } else {
                    lo + t * (hi - lo)
                }
            })
            .collect()
    };
    if grid.is_empty() {
        return Err(usage("empty grid"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(usage("grid values must be strictly increasing"));
    }
    Ok(grid)
}

fn cmd_sweep(args: SweepArgs) -> CmdResult {
    let grid = build_grid(&args)?;

    // quantity/variable compatibility, then one closure per row
    let rho_ops = [
        Op::USiso,
        Op::LowerBound,
        Op::IRho,
        Op::Sigma2,
        Op::LargeBeta,
        Op::QpskL,
    ];
    let lambda_ops = [Op::CSiso, Op::CIid, Op::CPsk];
    let beta_ops = [Op::CSiso, Op::CIid, Op::USiso, Op::LowerBound];

    let allowed: &[Op] = match args.var {
        SweepVar::Rho => &rho_ops,
        SweepVar::Lambda => &lambda_ops,
        SweepVar::Beta => &beta_ops,
    };
    for op in &args.ops {
        if !allowed.contains(op) {
            return Err(usage(format!(
                "op {} cannot be swept over this variable",
                op_name(*op)
            )));
        }
    }

    let chan = match args.var {
        SweepVar::Lambda => None,
        _ => Some(load_channel(&args.channel)?),
    };

    let row = |i: usize| -> Result<Vec<f64>> {
        let x = grid[i];
        let mut vals = Vec::with_capacity(args.ops.len());
        for op in &args.ops {
            let v = match args.var {
                SweepVar::Lambda => match op {
                    Op::CSiso => c_siso_from_lambda(x, args.beta)?.value,
                    Op::CIid => c_iid_from_lambda(x, args.beta)?.value,
                    Op::CPsk => c_psk_from_lambda(x)?,
                    _ => unreachable!(),
                },
                SweepVar::Rho => {
                    let chan = chan.as_ref().unwrap();
                    let s = match chan {
                        ChannelSpec::Scalar(s) => s,
                        _ => {
                            return Err(Error::Domain(
                                "rho sweeps need a scalar channel".into(),
                            ))
                        }
                    };
                    match op {
                        Op::USiso => u_siso(s, &PowerBudget::new(x, args.beta)?)?,
                        Op::LowerBound => {
                            capacity_lower_bound(s, &PowerBudget::new(x, args.beta)?)?
                        }
                        Op::IRho => i_of_rho(s, x)?,
                        Op::Sigma2 => sigma2_of_rho(s, x)?.sigma2,
                        Op::LargeBeta => large_beta_limit(s, x)?,
                        Op::QpskL => qpsk_conditional_mi(s, x)?,
                        _ => unreachable!(),
                    }
                }
                SweepVar::Beta => {
                    let chan = chan.as_ref().unwrap();
                    let s = match chan {
                        ChannelSpec::Scalar(s) => s,
                        _ => {
                            return Err(Error::Domain(
                                "beta sweeps need a scalar channel".into(),
                            ))
                        }
                    };
                    match op {
                        Op::CSiso => c_siso(s, x)?.value,
                        Op::CIid => c_iid(s, x)?.value,
                        Op::USiso => {
                            let rho = args
                                .rho
                                .ok_or_else(|| Error::Domain("--rho required".into()))?;
                            u_siso(s, &PowerBudget::new(rho, x)?)?
                        }
                        Op::LowerBound => {
                            let rho = args
                                .rho
                                .ok_or_else(|| Error::Domain("--rho required".into()))?;
                            capacity_lower_bound(s, &PowerBudget::new(rho, x)?)?
                        }
                        _ => unreachable!(),
                    }
                }
            };
            vals.push(v);
        }
        Ok(vals)
    };

    let rows = compute_rows(grid.len(), &row)?;
    let var_name = match args.var {
        SweepVar::Rho => "rho",
        SweepVar::Beta => "beta",
        SweepVar::Lambda => "lambda",
    };
    let mut header = vec![var_name.to_string()];
    header.extend(args.ops.iter().map(|op| op_name(*op).to_string()));
    write_csv(&args.output, &header, &grid, &rows)?;
    Ok(())
}

fn cmd_figure(args: FigureArgs) -> CmdResult {
    match args.which {
        FigureId::Fig1 => {
            // asymptotic capacity vs IID rates over lambda, beta = 1.5
            let grid: Vec<f64> = (0..=80).map(|i| (100 + 5 * i) as f64 / 100.0).collect();
            let rows = compute_rows(grid.len(), &|i| {
                let l = grid[i];
                Ok(vec![
                    c_siso_from_lambda(l, 1.5)?.value,
                    c_iid_from_lambda(l, 1.5)?.value,
                ])
            })?;
            write_csv(
                &args.output,
                &["lambda".into(), "c".into(), "c_iid".into()],
                &grid,
                &rows,
            )?;
        }
        FigureId::Fig2 => {
            // capacity, IID and PSK asymptotes over lambda, beta = 1
            let grid: Vec<f64> = (0..=30).map(|i| (100 + 5 * i) as f64 / 100.0).collect();
            let rows = compute_rows(grid.len(), &|i| {
                let l = grid[i];
                Ok(vec![
                    c_siso_from_lambda(l, 1.0)?.value,
                    c_iid_from_lambda(l, 1.0)?.value,
                    c_psk_from_lambda(l)?,
                ])
            })?;
            write_csv(
                &args.output,
                &[
                    "lambda".into(),
                    "c".into(),
                    "c_iid".into(),
                    "c_psk".into(),
                ],
                &grid,
                &rows,
            )?;
        }
        FigureId::Fig3 => {
            // firm upper bound and QPSK lower bound, correlation 0.99,
            // beta = 10, 20-point log grid over [0.01, 10]; nats
            let spec = ScalarFadingSpec::gauss_markov(0.99).map_err(CliError::Lib)?;
            let grid: Vec<f64> = (0..20)
                .map(|i| 10f64.powf(-2.0 + 3.0 * i as f64 / 19.0))
                .collect();
            let rows = compute_rows(grid.len(), &|i| {
                let b = PowerBudget::new(grid[i], 10.0)?;
                Ok(vec![u_siso(&spec, &b)?, capacity_lower_bound(&spec, &b)?])
            })?;
            write_csv(
                &args.output,
                &["rho".into(), "upper".into(), "lower".into()],
                &grid,
                &rows,
            )?;
        }
    }
    Ok(())
}

/// Evaluate rows 0..count, optionally in parallel (NONCOH_THREADS),
/// assembling results in grid order.
fn compute_rows(
    count: usize,
    row: &(dyn Fn(usize) -> Result<Vec<f64>> + Sync),
) -> std::result::Result<Vec<Vec<f64>>, CliError> {
    let threads = std::env::var("NONCOH_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(0)
        .min(count.max(1));
    let results: Vec<Result<Vec<f64>>> = if threads <= 1 {
        (0..count).map(row).collect()
    } else {
        let slots: Vec<Mutex<Option<Result<Vec<f64>>>>> =
            (0..count).map(|_| Mutex::new(None)).collect();
        std::thread::scope(|scope| {
            for worker in 0..threads {
                let slots = &slots;
                scope.spawn(move || {
                    let mut i = worker;
                    while i < count {
                        *slots[i].lock().unwrap() = Some(row(i));
                        i += threads;
                    }
                });
            }
        });
        slots
            .into_iter()
            .map(|m| m.into_inner().unwrap().unwrap())
            .collect()
    };
    let mut rows = Vec::with_capacity(count);
    for r in results {
        rows.push(r?);
    }
    Ok(rows)
}

fn write_csv(
    output: &Option<PathBuf>,
    header: &[String],
    grid: &[f64],
    rows: &[Vec<f64>],
) -> std::result::Result<(), CliError> {
    let mut text = String::new();
    text.push_str(&header.join(","));
    text.push('\n');
    for (x, row) in grid.iter().zip(rows.iter()) {
        text.push_str(&fmt_g12(*x));
        for v in row {
            text.push(',');
            text.push_str(&fmt_g12(*v));
        }
        text.push('\n');
    }
    match output {
        Some(path) => {
            std::fs::write(path, text.as_bytes()).map_err(|e| CliError::Lib(e.into()))?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())
                .map_err(|e| CliError::Lib(e.into()))?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// selfcheck
// ---------------------------------------------------------------------------

type Check = (&'static str, fn() -> std::result::Result<(), String>);

fn approx(a: f64, b: f64, tol: f64) -> std::result::Result<(), String> {
    if (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0) {
        Ok(())
    } else {
        Err(format!("{a} vs {b} (tol {tol})"))
    }
}

fn gm(a: f64) -> ScalarFadingSpec {
    ScalarFadingSpec::gauss_markov(a).expect("valid coefficient")
}

fn check_prediction_identity() -> std::result::Result<(), String> {
    for spec in [gm(0.5), gm(0.99), ScalarFadingSpec::memoryless()] {
        let mut rho = 1e-6;
        while rho <= 100.0 {
            let pr = sigma2_of_rho(&spec, rho).map_err(|e| e.to_string())?;
            let lhs = (rho * pr.sigma2).ln_1p();
            if (lhs - pr.i_rho).abs() > 1e-12 * pr.i_rho.max(1e-30) {
                return Err(format!("identity off at rho={rho}"));
            }
            rho *= 10.0;
        }
    }
    Ok(())
}

fn check_u_siso_against_search() -> std::result::Result<(), String> {
    use crate::opt::golden_max;
    for (rho, beta) in [(0.1, 1.0), (1.0, 2.0), (5.0, 10.0)] {
        let spec = gm(0.9);
        let b = PowerBudget::new(rho, beta).map_err(|e| e.to_string())?;
        let closed = u_siso(&spec, &b).map_err(|e| e.to_string())?;
        let i = i_of_rho(&spec, rho).map_err(|e| e.to_string())?;
        let mut f = |a: f64| (rho * a).ln_1p() - a * i;
        let (_, searched) = golden_max(&mut f, 0.0, 1.0 / beta, 1e-13);
        approx(closed, searched, 1e-10)?;
    }
    Ok(())
}

fn check_reduction_chain() -> std::result::Result<(), String> {
    use crate::channel::MimoFadingSpec;
    let spec = gm(0.8);
    let mimo = MimoFadingSpec::new(vec![vec![spec.clone()]]).map_err(|e| e.to_string())?;
    let b = PowerBudget::new(1.0, 2.0).map_err(|e| e.to_string())?;
    let u = u_siso(&spec, &b).map_err(|e| e.to_string())?;
    let us = u_mimo_sum(&mimo, &b).map_err(|e| e.to_string())?.0;
    let ui = u_mimo_individual(&mimo, &b, &[1.0]).map_err(|e| e.to_string())?.0;
    if (us - u).abs() > 1e-12 || (ui - u).abs() > 1e-12 {
        return Err(format!("reductions differ: {u} {us} {ui}"));
    }
    Ok(())
}

fn check_sum_solver_vs_closed() -> std::result::Result<(), String> {
    use crate::channel::MimoFadingSpec;
    let spec = MimoFadingSpec::separable(vec![1.0, 0.5], vec![gm(0.6), gm(0.85)])
        .map_err(|e| e.to_string())?;
    for beta in [1.0, 2.0] {
        let sol = c_mimo_sum(&spec, beta).map_err(|e| e.to_string())?.value;
        let closed = c_mimo_sum_separable(&spec, beta)
            .map_err(|e| e.to_string())?
            .value;
        approx(sol, closed, 1e-10)?;
    }
    Ok(())
}

fn check_individual_ratio() -> std::result::Result<(), String> {
    use crate::channel::MimoFadingSpec;
    let alpha = [1.0, 0.25, 0.5];
    let spec =
        MimoFadingSpec::separable(alpha.to_vec(), vec![gm(0.8)]).map_err(|e| e.to_string())?;
    let cs = c_mimo_sum_separable(&spec, 1.0).map_err(|e| e.to_string())?.value;
    let ci = c_mimo_individual_separable(&spec, 1.0)
        .map_err(|e| e.to_string())?
        .value;
    let nt = alpha.len() as f64;
    let a_max = alpha.iter().cloned().fold(0.0f64, f64::max);
    let a_ave = alpha.iter().sum::<f64>() / nt;
    approx(cs / (ci / (nt * nt)), (a_max / a_ave).powi(2), 1e-12)
}

fn check_delay_equals_miso() -> std::result::Result<(), String> {
    use crate::channel::{DelaySpreadSpec, MimoFadingSpec};
    let base = gm(std::f64::consts::FRAC_1_SQRT_2);
    let ds = DelaySpreadSpec::separable(vec![1.0, 1.0], base.clone())
        .map_err(|e| e.to_string())?;
    let miso =
        MimoFadingSpec::separable(vec![1.0, 1.0], vec![base]).map_err(|e| e.to_string())?;
    let a = c_delay_spread_separable(&ds, 1.0).map_err(|e| e.to_string())?.value;
    let b = c_mimo_individual_separable(&miso, 1.0)
        .map_err(|e| e.to_string())?
        .value;
    approx(a, b, 1e-12)
}

fn check_lambda_routes() -> std::result::Result<(), String> {
    for spec in [gm(0.5), gm(0.9), ScalarFadingSpec::memoryless()] {
        approx(spec.lambda(), spec.lambda_spectral(), 1e-8)?;
    }
    Ok(())
}

fn check_ephemerality() -> std::result::Result<(), String> {
    use crate::channel::ParametricFamily;
    let boundary = ScalarFadingSpec::parametric(
        ParametricFamily::BandlimitedFlat {
            omega0: std::f64::consts::PI / 2.0,
        },
        1.0,
    )
    .map_err(|e| e.to_string())?;
    if boundary.is_ephemeral() {
        return Err("boundary law classified ephemeral".into());
    }
    if !ScalarFadingSpec::memoryless().is_ephemeral() {
        return Err("memoryless law classified nonephemeral".into());
    }
    Ok(())
}

fn check_block_oracle() -> std::result::Result<(), String> {
    let spec = gm(0.5);
    for a in [0.25, 1.0] {
        let law = InputLaw::new(LawKind::OnOffFsk { m: 9 }, 8, a).map_err(|e| e.to_string())?;
        let r = second_order_mi(OracleChannel::Siso(&spec), &law).map_err(|e| e.to_string())?;
        let expect = 0.5 * (a * lambda_n(&spec, 8) - a * a);
        approx(r.coeff, expect, 1e-10)?;
    }
    Ok(())
}

fn check_lower_below_upper() -> std::result::Result<(), String> {
    let spec = gm(0.9);
    for rho in [0.1, 1.0] {
        let b = PowerBudget::new(rho, 2.0).map_err(|e| e.to_string())?;
        let lo = capacity_lower_bound(&spec, &b).map_err(|e| e.to_string())?;
        let hi = u_siso(&spec, &b).map_err(|e| e.to_string())?;
        if lo > hi + 1e-12 {
            return Err(format!("lower {lo} above upper {hi} at rho={rho}"));
        }
    }
    Ok(())
}

fn check_qpsk_mi_shape() -> std::result::Result<(), String> {
    let mut prev = -1.0;
    for i in 0..20 {
        let s = 0.5 * i as f64;
        let v = mi_qpsk(s).map_err(|e| e.to_string())?;
        if v < prev - 1e-10 || v > (4.0f64).ln() + 1e-9 {
            return Err(format!("shape violated at s={s}"));
        }
        prev = v;
    }
    Ok(())
}

fn check_branch_continuity() -> std::result::Result<(), String> {
    for beta in [1.0, 1.5, 1.8] {
        let l = 2.0 / beta;
        let lo = c_siso_from_lambda(l - 1e-9, beta).map_err(|e| e.to_string())?.value;
        let hi = c_siso_from_lambda(l + 1e-9, beta).map_err(|e| e.to_string())?.value;
        if (lo - hi).abs() > 1e-8 {
            return Err(format!("c branch jump at beta={beta}"));
        }
        let l = 2.0 - beta / 2.0;
        if l - 1e-9 >= 1.0 {
            let lo = c_iid_from_lambda(l - 1e-9, beta).map_err(|e| e.to_string())?.value;
            let hi = c_iid_from_lambda(l + 1e-9, beta).map_err(|e| e.to_string())?.value;
            if (lo - hi).abs() > 1e-8 {
                return Err(format!("c_iid branch jump at beta={beta}"));
            }
        }
    }
    Ok(())
}

fn cmd_selfcheck() -> i32 {
    let checks: &[Check] = &[
        ("prediction-identity", check_prediction_identity),
        ("u-siso-closed-vs-search", check_u_siso_against_search),
        ("reduction-chain-1x1", check_reduction_chain),
        ("sum-solver-vs-closed-form", check_sum_solver_vs_closed),
        ("individual-vs-sum-ratio", check_individual_ratio),
        ("delay-equals-miso", check_delay_equals_miso),
        ("lambda-two-routes", check_lambda_routes),
        ("ephemerality-boundary", check_ephemerality),
        ("block-oracle-quadratic", check_block_oracle),
        ("lower-below-upper", check_lower_below_upper),
        ("qpsk-mi-shape", check_qpsk_mi_shape),
        ("branch-continuity", check_branch_continuity),
    ];
    let mut failures = 0;
    for (name, check) in checks {
        match check() {
            Ok(()) => println!("ok {name}"),
            Err(detail) => {
                println!("FAIL {name}: {detail}");
                failures += 1;
            }
        }
    }
    if failures == 0 {
        0
    } else {
        eprintln!("error: kind=numeric msg=\"{failures} selfcheck invariant(s) failed\"");
        4
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting_is_twelve_significant_digits() {
        assert_eq!(fmt_g12(0.0), "0");
        assert_eq!(fmt_g12(0.5), "0.5");
        assert_eq!(fmt_g12(2.0), "2");
        assert_eq!(fmt_g12(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(fmt_g12(123.456), "123.456");
        assert_eq!(fmt_g12(-1.0 / 3.0), "-3.33333333333e-1");
        assert_eq!(fmt_g12(1e-300), "1e-300");
    }

    #[test]
    fn grids_are_validated() {
        let args = SweepArgs {
            channel: None,
            var: SweepVar::Lambda,
            values: Some("1.0,2.0,1.5".into()),
            log_range: None,
            lin_range: None,
            ops: vec![Op::CSiso],
            rho: None,
            beta: 1.0,
            output: None,
        };
        assert!(build_grid(&args).is_err()); // not increasing

        let args = SweepArgs {
            values: None,
            log_range: Some("0.01:10:5".into()),
            ..args
        };
        let grid = build_grid(&args).unwrap();
        assert_eq!(grid.len(), 5);
        assert!(grid.windows(2).all(|w| w[1] > w[0]));
    }
}
