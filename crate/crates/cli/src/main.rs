use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use multinorm::constructions::{
    auerbach_basis, delta_net, sublattice_discretize, volume_bound, DiscreteLpSpace,
};
use multinorm::duality_sums::subquotient_demo;
use multinorm::extension_lifting::{embed_fd, extend_to_max, lift_operator, min_norm_lift};
use multinorm::operator_norms::{multibounded_norm_with, nuclear_norm, LevelOptions};
use multinorm::tensor_norms::{eval_with, EvalOptions};
use multinorm::verify::{run_suite, SuiteConfig};
use multinorm::{json, Error, PExponent};
use serde_json::{json, Value};

/// Evaluate p-multinorms, operator p-norms, extensions and lifts, and run
/// the randomized verification suites. Input and output are JSON.
#[derive(Parser, Debug)]
#[command(name = "multinorm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Input JSON file; standard input when absent.
    #[arg(long = "in", global = true)]
    input: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Tolerance; each command has its own default.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Level budget for profiles and embeddings.
    #[arg(long, global = true)]
    levels: Option<usize>,
    /// Random restarts of the level searches.
    #[arg(long, global = true)]
    restarts: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Level-m norm of a tensor: {"p", "space", "tensor"}.
    Norm,
    /// Level profile of an operator: {"p", "domain", "codomain", "matrix", "eps"?}.
    Opnorm,
    /// Nuclear norm of w: l^q_m -> l^q_n: {"q", "matrix"}.
    Nuclear,
    /// Extend u: Subspace(Y) -> Max(l^{p'}_n) to Y: an operator document.
    Extend,
    /// Lift u: Min(l^{p'}_n) -> Y/K through the quotient map, or a single
    /// tensor when the document has "space" (a quotient) and "tensor".
    Lift,
    /// Sublattice discretisation: {"p", "weights", "subspace", "eps"}.
    Discretize,
    /// Auerbach basis of a norm: {"norm"}.
    Auerbach,
    /// A delta-net of the unit ball: {"norm", "delta"}.
    Net,
    /// Finite embedding into an l^inf-sum of Max(l^{p'}_n): {"p", "space", "eps", "net"?}.
    Embed,
    /// Subquotient representation: {"p", "space", "widths": [[n, d], ...], "eps", "net"?}.
    Subquotient,
    /// Run a randomized suite.
    Verify {
        #[arg(long)]
        suite: String,
        /// Number of instances; the suite's default when absent.
        #[arg(long)]
        instances: Option<usize>,
    },
}

enum Failure {
    Input(String),
    Solver(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_)
            | Error::DimensionMismatch { .. }
            | Error::InvalidExponent(_)
            | Error::InvalidNorm(_)
            | Error::InvalidSpace(_)
            | Error::ExponentMismatch(..)
            | Error::InvalidArgument(_) => Failure::Input(e.to_string()),
            _ => Failure::Solver(e.to_string()),
        }
    }
}

/// A report and whether every solver in it converged.
type Outcome = Result<(Value, bool), Failure>;

fn read_input(path: &Option<PathBuf>) -> Result<Value, Failure> {
    let text = match path {
        Some(p) => {
            fs::read_to_string(p).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?
        }
        None => {
            let mut s = String::new();
            io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| Failure::Input(e.to_string()))?;
            s
        }
    };
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("malformed JSON: {e}")))
}

fn number(v: &Value, key: &str, default: Option<f64>) -> Result<f64, Failure> {
    match v.get(key) {
        Some(x) => x
            .as_f64()
            .ok_or_else(|| Failure::Input(format!("\"{key}\" must be a number"))),
        None => default.ok_or_else(|| Failure::Input(format!("missing field \"{key}\""))),
    }
}

fn count(v: &Value, key: &str, default: usize) -> Result<usize, Failure> {
    match v.get(key) {
        Some(x) => x
            .as_u64()
            .map(|n| n as usize)
            .ok_or_else(|| Failure::Input(format!("\"{key}\" must be a non-negative integer"))),
        None => Ok(default),
    }
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("reports serialize")
}

fn level_options(cli: &Cli) -> LevelOptions {
    let base = LevelOptions::default();
    LevelOptions {
        restarts: cli.restarts.unwrap_or(base.restarts),
        seed: cli.seed,
        ..base
    }
}

fn run(cli: &Cli) -> Outcome {
    if let Command::Verify { suite, instances } = &cli.command {
        let defaults = SuiteConfig::default();
        let cfg = SuiteConfig {
            seed: cli.seed,
            instances: *instances,
            tol: cli.tol.unwrap_or(defaults.tol),
            levels: cli.levels.unwrap_or(defaults.levels),
            restarts: cli.restarts.unwrap_or(defaults.restarts),
        };
        let rep = run_suite(suite, &cfg)?;
        return Ok((to_value(&rep), rep.violations == 0));
    }
    let doc = read_input(&cli.input)?;
    let opts = level_options(cli);
    match cli.command {
        Command::Norm => {
            let (s, t) = json::tensor_input(&doc)?;
            let eval = cli.tol.map(EvalOptions::with_tol).unwrap_or_default();
            let est = eval_with(&s, t.entries(), &eval)?;
            Ok((to_value(&est), est.converged))
        }
        Command::Opnorm => {
            let u = json::operator_from_value(&doc)?;
            let eps = number(&doc, "eps", Some(0.5))?;
            let profile = multibounded_norm_with(&u, eps, cli.levels.unwrap_or(4), &opts)?;
            let converged = profile.levels.iter().all(|l| l.estimate.converged);
            Ok((to_value(&profile), converged))
        }
        Command::Nuclear => {
            let q: PExponent = json::exponent_at(&doc, "q")?;
            let w = json::matrix_at(&doc, "matrix")?;
            let est = nuclear_norm(q, &w)?;
            Ok((to_value(&est), est.converged))
        }
        Command::Extend => {
            let u = json::operator_from_value(&doc)?;
            let ext = extend_to_max(&u, cli.tol.unwrap_or(1e-4), &opts)?;
            Ok((to_value(&ext), ext.converged))
        }
        Command::Lift => {
            let eps = cli.tol.unwrap_or(1e-3);
            if doc.get("tensor").is_some() {
                let (s, t) = json::tensor_input(&doc)?;
                let lift = min_norm_lift(&s, t.entries(), eps, &opts.eval)?;
                Ok((to_value(&lift), lift.converged))
            } else {
                let u = json::operator_from_value(&doc)?;
                let lift = lift_operator(&u, eps, &opts)?;
                Ok((to_value(&lift), lift.converged))
            }
        }
        Command::Discretize => {
            let p = json::exponent_from_value(&doc)?;
            let weights: Vec<f64> =
                serde_json::from_value(doc.get("weights").cloned().unwrap_or(Value::Null))
                    .map_err(|e| Failure::Input(format!("weights: {e}")))?;
            let space = DiscreteLpSpace::new(p, weights)?;
            let z = json::matrix_at(&doc, "subspace")?;
            let res = sublattice_discretize(&space, &z, number(&doc, "eps", None)?)?;
            Ok((to_value(&res), true))
        }
        Command::Auerbach => match auerbach_basis(&json::norm_at(&doc, "norm")?) {
            Ok(b) => Ok((to_value(&b), true)),
            Err(Error::AuerbachNotConverged { best, .. }) => Ok((to_value(&*best), false)),
            Err(e) => Err(e.into()),
        },
        Command::Net => {
            let e = json::norm_at(&doc, "norm")?;
            let delta = number(&doc, "delta", None)?;
            let points = delta_net(&e, delta)?;
            let report = json!({ "delta": delta, "size": points.len(), "volume_bound": volume_bound(delta, e.dim()), "points": points });
            Ok((report, true))
        }
        Command::Embed => {
            let s = json::space_from_value(&doc)?;
            let eps = number(&doc, "eps", Some(0.25))?;
            let emb = embed_fd(
                &s,
                eps,
                cli.levels.unwrap_or(4),
                count(&doc, "net", 16)?,
                &opts,
            )?;
            Ok((to_value(&emb), true))
        }
        Command::Subquotient => {
            let s = json::space_from_value(&doc)?;
            let widths: Vec<(usize, usize)> =
                serde_json::from_value(doc.get("widths").cloned().unwrap_or(Value::Null))
                    .map_err(|e| Failure::Input(format!("widths: {e}")))?;
            let eps = number(&doc, "eps", Some(0.25))?;
            let rep = subquotient_demo(&s, &widths, eps, count(&doc, "net", 8)?, &opts)?;
            let converged = rep.note.is_none();
            Ok((to_value(&rep), converged))
        }
        Command::Verify { .. } => unreachable!("handled above"),
    }
}

fn write_output(path: &Option<PathBuf>, report: &Value) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(report).expect("reports serialize");
    text.push('\n');
    match path {
        Some(p) => fs::write(p, text),
        None => io::stdout().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((report, ok)) => {
            if let Err(e) = write_output(&cli.out, &report) {
                eprintln!("error: cannot write report: {e}");
                return ExitCode::from(2);
            }
            if ok {
                ExitCode::SUCCESS
            } else if matches!(cli.command, Command::Verify { .. }) {
                eprintln!("violations found");
                ExitCode::from(1)
            } else {
                eprintln!("solver did not converge; the reported interval is wide");
                ExitCode::from(3)
            }
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
