use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use pdo_causal::atemporality::{
    aspatiality, classify, entanglement_negativity, forward_atemporality, minimize_negativity_over_tau,
    reverse_atemporality, CausalReport, DirectedSolution, Flag, Tolerances,
};
use pdo_causal::experiments::{
    asymmetry_line, biased_werner_point, colormap_biased_werner, mixture_sweep, scatter_random_spatial,
    scatter_random_temporal, werner_line, SweepResult,
};
use pdo_causal::io::{
    estimate_to_csv, format_number, mechanism_from_json, pdo_from_json, pdo_to_json, pseudo_channel_to_json,
    round_json,
};
use pdo_causal::measurement::{reconstruct_pdo, sample_correlations};
use pdo_causal::pdo::{swap_pdo, Direction, Pdo};
use pdo_causal::pseudo_channel::{
    marginal_lambda_min, recover_pseudo_channel, tau_from_bloch, verify_compatibility, EPS_RANK,
};
use pdo_causal::Error;

const EXIT_INPUT: u8 = 2;
const EXIT_SOLVER: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "pdo-causal", version, about = "Spatial and temporal causal analysis of two-qubit pseudo-density operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Output format (experiments default to csv, everything else to json).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true, default_value_t = 1e-5)]
    tol_opt: f64,
    #[arg(long, global = true, default_value_t = 1e-9)]
    eps_spatial: f64,
    #[arg(long, global = true, default_value_t = 1e-4)]
    eps_temporal: f64,
    #[arg(long, global = true, env = "PDO_CAUSAL_SEED")]
    seed: Option<u64>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Place a PDO in one of the four spatial/temporal regions.
    Classify {
        #[arg(long)]
        input: PathBuf,
    },
    /// Report every causal measure of a PDO.
    Measures {
        #[arg(long)]
        input: PathBuf,
    },
    /// Recover a compatible pseudo-channel.
    RecoverChannel {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = DirectionArg::Forward)]
        direction: DirectionArg,
        /// Bloch vector `x,y,z` of τ = (I + v·σ)/2, for rank-deficient marginals.
        #[arg(long, value_parser = parse_bloch, allow_hyphen_values = true)]
        tau: Option<[f64; 3]>,
        /// Pick τ by minimizing the Choi negativity.
        #[arg(long)]
        optimize: bool,
    },
    /// Sample Pauli measurements from a mechanism and reconstruct the PDO.
    Simulate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        shots: u64,
    },
    /// Regenerate a named data set.
    Experiment {
        #[arg(value_enum)]
        name: ExperimentName,
        /// Grid points per axis.
        #[arg(long)]
        grid: Option<usize>,
        /// Number of random samples.
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// `p` for the single biased-Werner point.
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        /// `q` for the single biased-Werner point.
        #[arg(long, default_value_t = 0.25)]
        q: f64,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum DirectionArg {
    Forward,
    Reverse,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::Forward => Direction::Forward,
            DirectionArg::Reverse => Direction::Reverse,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ExperimentName {
    Werner,
    BiasedWerner,
    Asymmetry,
    Mixture,
    RandomScatter,
    RandomTemporal,
    Colormap,
}

fn parse_bloch(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    <[f64; 3]>::try_from(parts).map_err(|_| "expected three comma-separated numbers".to_string())
}

struct CliError {
    code: u8,
    message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Solver { .. } => EXIT_SOLVER,
            _ => EXIT_INPUT,
        };
        CliError { code, message: e.to_string() }
    }
}

fn input_error(message: impl Into<String>) -> CliError {
    CliError { code: EXIT_INPUT, message: message.into() }
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| input_error(format!("{}: invalid JSON: {e}", path.display())))
}

fn read_pdo(path: &Path) -> Result<Pdo, CliError> {
    Ok(pdo_from_json(&read_json(path)?)?)
}

fn render_json(v: Value) -> String {
    let mut s = serde_json::to_string_pretty(&round_json(v)).expect("serializable");
    s.push('\n');
    s
}

fn cell(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

fn report_csv(r: &CausalReport) -> String {
    format!(
        "e_neg,f,f_forward,f_reverse,aspatiality,region\n{},{},{},{},{},{}\n",
        cell(r.e_neg),
        cell(Some(r.f)),
        cell(Some(r.f_forward)),
        cell(Some(r.f_reverse)),
        cell(Some(r.aspatiality)),
        r.region
    )
}

fn sweep_output(sweep: SweepResult, format: Format) -> String {
    match format {
        Format::Csv => sweep.to_csv(),
        Format::Json => render_json(serde_json::to_value(&sweep).expect("serializable")),
    }
}

fn method(solution: &DirectedSolution) -> Value {
    match solution {
        DirectedSolution::Unique => json!("closed-form"),
        DirectedSolution::Family(opt) => json!({
            "tau_bloch": opt.v_star,
            "evaluations": opt.iterations,
        }),
    }
}

fn run(cli: Cli) -> Result<String, CliError> {
    let c = &cli.common;
    let tol = Tolerances {
        eps_spatial: c.eps_spatial,
        eps_temporal: c.eps_temporal,
        tol_opt: c.tol_opt,
    };
    tol.validate()?;
    let seed = c.seed.unwrap_or(0);
    match cli.command {
        Command::Classify { input } => {
            let report = classify(&read_pdo(&input)?, &tol)?;
            Ok(match c.format.unwrap_or(Format::Json) {
                Format::Json => render_json(serde_json::to_value(&report).expect("serializable")),
                Format::Csv => report_csv(&report),
            })
        }
        Command::Measures { input } => {
            let r = read_pdo(&input)?;
            let fwd = forward_atemporality(&r, tol.tol_opt)?;
            let rev = reverse_atemporality(&r, tol.tol_opt)?;
            let asp = aspatiality(&r);
            let e_neg = entanglement_negativity(&r);
            let f = fwd.value.min(rev.value);
            Ok(match c.format.unwrap_or(Format::Json) {
                Format::Json => render_json(json!({
                    "aspatiality": asp,
                    "e_neg": e_neg,
                    "is_state": asp <= tol.eps_spatial,
                    "f_forward": fwd.value,
                    "f_reverse": rev.value,
                    "f": f,
                    "forward_method": method(&fwd.solution),
                    "reverse_method": method(&rev.solution),
                    "spectrum": r.spectrum(),
                    "marginal_a_lambda_min": marginal_lambda_min(&r.marginal_a()),
                    "marginal_b_lambda_min": marginal_lambda_min(&r.marginal_b()),
                    "tolerances": tol,
                })),
                Format::Csv => format!(
                    "aspatiality,e_neg,f_forward,f_reverse,f\n{},{},{},{},{}\n",
                    format_number(asp),
                    format_number(e_neg),
                    format_number(fwd.value),
                    format_number(rev.value),
                    format_number(f)
                ),
            })
        }
        Command::RecoverChannel { input, direction, tau, optimize } => {
            let r = read_pdo(&input)?;
            let direction = Direction::from(direction);
            let oriented = match direction {
                Direction::Forward => r,
                Direction::Reverse => swap_pdo(&r),
            };
            let lambda_min = marginal_lambda_min(&oriented.marginal_a());
            let mut optimization = Value::Null;
            let tau = match (tau, optimize) {
                _ if lambda_min >= EPS_RANK => None,
                (Some(v), _) => Some(tau_from_bloch(v)),
                (None, true) => {
                    let opt = minimize_negativity_over_tau(&r, direction, tol.tol_opt)?;
                    optimization = json!({"value": opt.value, "evaluations": opt.iterations});
                    Some(opt.tau())
                }
                (None, false) => {
                    return Err(input_error(format!(
                        "marginal is rank deficient (lambda_min = {lambda_min:e}); \
                         pass --tau x,y,z to pick a family member or --optimize to minimize negativity"
                    )))
                }
            };
            let pc = recover_pseudo_channel(&r, direction, tau.as_ref())?;
            let residual = verify_compatibility(&pc, &r);
            Ok(match c.format.unwrap_or(Format::Json) {
                Format::Json => {
                    let mut record = pseudo_channel_to_json(&pc, residual);
                    record["unique"] = json!(pc.tau().is_none());
                    record["optimization"] = optimization;
                    render_json(record)
                }
                Format::Csv => format!(
                    "direction,negativity,cptp,residual\n{},{},{},{}\n",
                    pc.direction(),
                    format_number(pc.negativity()),
                    pc.is_cptp(),
                    format_number(residual)
                ),
            })
        }
        Command::Simulate { input, shots } => {
            let mechanism = mechanism_from_json(&read_json(&input)?)?;
            let est = sample_correlations(&mechanism, shots, seed)?;
            let rec = reconstruct_pdo(&est)?;
            let mut report = classify(&rec.pdo, &tol)?;
            report.flags.push(Flag::FiniteSampleEstimate);
            if rec.projected {
                report.flags.push(Flag::ProjectedMarginals);
            }
            Ok(match c.format.unwrap_or(Format::Json) {
                Format::Json => render_json(json!({
                    "estimate": est,
                    "seed": seed,
                    "reconstructed": pdo_to_json(&rec.pdo, "finite-shot reconstruction"),
                    "projected": rec.projected,
                    "report": report,
                })),
                Format::Csv => estimate_to_csv(&est),
            })
        }
        Command::Experiment { name, grid, n, p, q } => {
            let sweep = match name {
                ExperimentName::Werner => werner_line(grid.unwrap_or(101), &tol)?,
                ExperimentName::BiasedWerner => biased_werner_point(p, q, &tol)?,
                ExperimentName::Asymmetry => asymmetry_line(grid.unwrap_or(11), &tol)?,
                ExperimentName::Mixture => mixture_sweep(&tol)?,
                ExperimentName::RandomScatter => scatter_random_spatial(n, seed, &tol)?,
                ExperimentName::RandomTemporal => scatter_random_temporal(n, seed, &tol)?,
                ExperimentName::Colormap => {
                    let g = grid.unwrap_or(101);
                    colormap_biased_werner(g, g, &tol)?
                }
            };
            Ok(sweep_output(sweep, c.format.unwrap_or(Format::Csv)))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let output = cli.common.output.clone();
    match run(cli) {
        Ok(text) => match output {
            Some(path) => match fs::write(&path, text) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {}: {e}", path.display());
                    ExitCode::from(EXIT_INPUT)
                }
            },
            None => {
                print!("{text}");
                ExitCode::SUCCESS
            }
        },
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
