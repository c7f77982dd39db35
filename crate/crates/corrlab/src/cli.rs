//! Command-line front end. All coordinate and component indices on the
//! CLI surface are 1-based; the library API is 0-based.
//!
//! Exit codes: 0 success, 2 validation error (message names the violated
//! invariant), 64 unknown subcommand, 65 unreadable or malformed input.

use crate::bounds::{
    check_product_bound, hyper_eta, regularize, BoundCheckOptions, RegularizationResult,
};
use crate::error::Error;
use crate::functions::{efron_stein, invariance_gap, to_multilinear, Functional};
use crate::gaussian::{bk_sequence, exchangeable_orthant, stability_lower_k, stability_upper_k, StabilityQuery};
use crate::hypergraph::{count_tuples, count_tuples_mc, predicted_count, LinearRelation};
use crate::io::{csv_float, BoundFunctionListSpec, FunctionSpec, JointListSpec, JointSpec, SetsSpec};
use crate::social_choice::{condorcet_simulate, predictability, PredictRule};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "corrlab",
    version,
    about = "Correlated-space toolbox: maximal correlation, Efron-Stein \
             decompositions, Gaussian stability bounds, Condorcet simulation \
             and relation counting"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Correlation report of a joint distribution (maximal correlation).
    Rho {
        /// Joint distribution JSON file.
        #[arg(long)]
        joint: PathBuf,
        /// Restrict to one bipartition: comma-separated 1-based component
        /// indices of the left side.
        #[arg(long)]
        bipartition: Option<String>,
    },
    /// Gaussian stability functionals for given correlations and masses.
    Gamma {
        /// Comma-separated correlations (k-1 values).
        #[arg(long)]
        rho: String,
        /// Comma-separated masses (k values, or k-1 when --nu is given).
        #[arg(long)]
        mu: String,
        /// Final mass, appended to --mu.
        #[arg(long)]
        nu: Option<f64>,
    },
    /// Iterated stability sequence B_k as CSV (columns k, b_k).
    Bk {
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        kmax: usize,
    },
    /// Efron-Stein decomposition of a function table.
    EfronStein {
        /// Function JSON file.
        #[arg(long)]
        function: PathBuf,
    },
    /// Influences of a function table.
    Influence {
        #[arg(long)]
        function: PathBuf,
    },
    /// Empirical invariance gap of a function's multilinear expansion.
    InvarianceGap {
        #[arg(long)]
        function: PathBuf,
        #[arg(long, value_enum)]
        functional: FunctionalArg,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check the product-expectation bounds for functions on correlated
    /// coordinate spaces.
    CheckBound {
        /// Joint-sequence JSON file: {"joints": [...], "replicate": n}.
        #[arg(long)]
        joints: PathBuf,
        /// Function-list JSON file: {"functions": [...]}.
        #[arg(long)]
        functions: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 20_000)]
        mc_samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Degree for reported low-degree influences of table functions.
        #[arg(long, default_value_t = 2)]
        low_degree: usize,
    },
    /// Recursively absorb influential coordinates of [0,1]-valued tables.
    Regularize {
        /// Function-list JSON file: {"functions": [...]}.
        #[arg(long)]
        functions: PathBuf,
        #[arg(long)]
        tau: f64,
        /// Mean-step constant; defaults to the least atom probability of
        /// the domain.
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Predictability of a vote from a random voter sample.
    Predictability {
        /// Number of voters (odd).
        #[arg(long)]
        n: usize,
        /// Sampling rate.
        #[arg(long)]
        rho: f64,
        /// Aggregation function.
        #[arg(long, value_enum, default_value_t = RuleArg::Maj)]
        f: RuleArg,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Condorcet simulation with majority aggregation.
    Condorcet {
        /// Number of candidates (>= 3). Ignored when --k-list is given.
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Number of voters (odd).
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Scan several candidate counts, e.g. "3,4,5,6".
        #[arg(long)]
        k_list: Option<String>,
        #[arg(long, value_enum, default_value_t = FormatArg::Json)]
        format: FormatArg,
    },
    /// Count relation-satisfying tuples among product sets.
    CountTuples {
        /// Base modulus m of Z_m.
        #[arg(long)]
        m: usize,
        /// Relation arity.
        #[arg(long)]
        k: usize,
        /// Comma-separated target residues of the linear relation.
        #[arg(long)]
        targets: String,
        /// Comma-separated coefficients (default all 1).
        #[arg(long)]
        coeffs: Option<String>,
        /// Coordinate count n of the product sets.
        #[arg(long)]
        n: usize,
        /// Sets JSON file: {"m":..,"n":..,"sets":[[indices]...]}.
        #[arg(long)]
        sets: PathBuf,
        /// Monte Carlo trials; when given, estimates instead of exact
        /// enumeration.
        #[arg(long)]
        mc: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Hypercontractivity constant eta_q(alpha).
    Eta {
        #[arg(long, default_value_t = 3.0)]
        q: f64,
        #[arg(long)]
        alpha: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FunctionalArg {
    Zeta,
    Chi,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum RuleArg {
    Maj,
    Dictator,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum FormatArg {
    Json,
    Csv,
}

enum CliError {
    /// Violated domain invariant (exit 2).
    Domain(Error),
    /// Unreadable or malformed input (exit 65).
    Input(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Domain(e)
    }
}

fn load_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("malformed JSON in {}: {e}", path.display())))
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|_| CliError::Domain(Error::InvalidParameter(format!(
                    "cannot parse {what} entry {s:?}"
                ))))
        })
        .collect()
}

fn one_based(indices: &[usize]) -> Result<Vec<usize>, CliError> {
    indices
        .iter()
        .map(|&i| {
            i.checked_sub(1).ok_or_else(|| {
                CliError::Domain(Error::IndexOutOfRange(
                    "CLI indices are 1-based; 0 is not valid".into(),
                ))
            })
        })
        .collect()
}

fn emit(value: &impl Serialize) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("reports serialize")
    );
}

#[derive(Deserialize)]
struct FunctionListSpec {
    functions: Vec<FunctionSpec>,
}

fn regularization_json(r: &RegularizationResult) -> serde_json::Value {
    json!({
        "coordinates": r.coordinates.iter().map(|&c| c + 1).collect::<Vec<_>>(),
        "steps": r.steps.iter().map(|s| json!({
            "coordinate": s.coordinate + 1,
            "function": s.function + 1,
            "direction": s.direction,
            "mean_before": s.mean_before,
            "mean_after": s.mean_after,
        })).collect::<Vec<_>>(),
        "sup_functions": r.sup_functions.iter().map(|f| json!({
            "values": f.values(),
            "mean": f.expectation(),
            "max_influence": f.all_influences().unwrap_or_default().iter().copied().fold(0.0f64, f64::max),
        })).collect::<Vec<_>>(),
        "inf_functions": r.inf_functions.iter().map(|f| json!({
            "values": f.values(),
            "mean": f.expectation(),
            "max_influence": f.all_influences().unwrap_or_default().iter().copied().fold(0.0f64, f64::max),
        })).collect::<Vec<_>>(),
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Rho { joint, bipartition } => {
            let spec: JointSpec = load_json(&joint)?;
            let joint = spec.to_joint()?;
            match bipartition {
                Some(text) => {
                    let left = one_based(&parse_list::<usize>(&text, "bipartition")?)?;
                    let rho = joint.maximal_correlation(&left)?;
                    emit(&json!({
                        "bipartition": left.iter().map(|&i| i + 1).collect::<Vec<_>>(),
                        "rho": rho,
                    }));
                }
                None => emit(&joint.correlation_report()?),
            }
        }
        Command::Gamma { rho, mu, nu } => {
            let rhos: Vec<f64> = parse_list(&rho, "rho")?;
            let mut mus: Vec<f64> = parse_list(&mu, "mu")?;
            if let Some(nu) = nu {
                mus.push(nu);
            }
            let query = StabilityQuery::new(rhos, mus)?;
            emit(&json!({
                "rhos": query.rhos(),
                "mus": query.mus(),
                "stability_upper": stability_upper_k(&query)?,
                "stability_lower": stability_lower_k(&query)?,
            }));
        }
        Command::Bk { rho, mu, kmax } => {
            let seq = bk_sequence(rho, mu, kmax)?;
            println!("k,b_k");
            for (i, b) in seq.iter().enumerate() {
                println!("{},{}", i + 1, csv_float(*b));
            }
        }
        Command::EfronStein { function } => {
            let spec: FunctionSpec = load_json(&function)?;
            let f = spec.to_function()?;
            let dec = efron_stein(&f)?;
            let components: Vec<serde_json::Value> = dec
                .components()
                .iter()
                .map(|c| {
                    json!({
                        "subset": c.subset.iter().map(|&i| i + 1).collect::<Vec<_>>(),
                        "values": c.function.values(),
                        "l2_norm": c.function.l2_norm(),
                    })
                })
                .collect();
            emit(&json!({ "components": components }));
        }
        Command::Influence { function } => {
            let spec: FunctionSpec = load_json(&function)?;
            let f = spec.to_function()?;
            emit(&json!({
                "influences": f.all_influences()?,
                "expectation": f.expectation(),
                "variance": f.variance(),
            }));
        }
        Command::InvarianceGap {
            function,
            functional,
            samples,
            seed,
        } => {
            let spec: FunctionSpec = load_json(&function)?;
            let f = spec.to_function()?;
            let poly = to_multilinear(&f)?;
            let functional = match functional {
                FunctionalArg::Zeta => Functional::Zeta,
                FunctionalArg::Chi => Functional::Chi,
            };
            let gap = invariance_gap(&[poly], f.domain(), functional, samples, seed)?;
            emit(&gap);
        }
        Command::CheckBound {
            joints,
            functions,
            epsilon,
            mc_samples,
            seed,
            low_degree,
        } => {
            let joint_list: JointListSpec = load_json(&joints)?;
            let function_list: BoundFunctionListSpec = load_json(&functions)?;
            let js = joint_list.to_joints()?;
            let fs = function_list.to_functions()?;
            let report = check_product_bound(
                &js,
                &fs,
                BoundCheckOptions {
                    epsilon,
                    mc_samples,
                    seed,
                    low_degree_d: low_degree,
                },
            )?;
            emit(&report);
        }
        Command::Regularize {
            functions,
            tau,
            alpha,
        } => {
            let list: FunctionListSpec = load_json(&functions)?;
            let fs = list
                .functions
                .iter()
                .map(FunctionSpec::to_function)
                .collect::<crate::error::Result<Vec<_>>>()?;
            let alpha = match alpha {
                Some(a) => a,
                None => fs
                    .iter()
                    .flat_map(|f| f.domain())
                    .map(|s| s.min_positive_prob())
                    .fold(f64::INFINITY, f64::min),
            };
            let result = regularize(&fs, tau, alpha)?;
            emit(&regularization_json(&result));
        }
        Command::Predictability {
            n,
            rho,
            f,
            trials,
            seed,
        } => {
            let rule = match f {
                RuleArg::Maj => PredictRule::Majority,
                RuleArg::Dictator => PredictRule::Dictator,
            };
            let est = predictability(n, rho, rule, trials, seed)?;
            let oracle = match rule {
                PredictRule::Majority => 2.0 / std::f64::consts::PI * rho.sqrt().asin(),
                PredictRule::Dictator => rho,
            };
            emit(&json!({
                "estimate": est.mean,
                "stderr": est.stderr,
                "trials": est.trials,
                "seed": est.seed,
                "rule": rule,
                "oracle": oracle,
                "verdict": (est.mean - oracle).abs() <= 3.0 * est.stderr + 0.01,
            }));
        }
        Command::Condorcet {
            k,
            n,
            trials,
            seed,
            k_list,
            format,
        } => {
            let ks: Vec<usize> = match k_list {
                Some(text) => parse_list(&text, "k-list")?,
                None => vec![k],
            };
            let mut rows = Vec::new();
            for k in ks {
                let est = condorcet_simulate(k, n, trials, seed)?;
                let oracle = (k as f64) * exchangeable_orthant(k)?;
                let verdict =
                    (est.uniq_max.mean - oracle).abs() <= 3.0 * est.uniq_max.stderr + 0.01;
                rows.push((k, est, oracle, verdict));
            }
            match format {
                FormatArg::Json => {
                    let values: Vec<serde_json::Value> = rows
                        .iter()
                        .map(|(k, est, oracle, verdict)| {
                            json!({
                                "k": k,
                                "n": est.n,
                                "uniq_max": est.uniq_max,
                                "acyclic": est.acyclic,
                                "oracle_uniq_max": oracle,
                                "verdict": verdict,
                                "seed": est.uniq_max.seed,
                            })
                        })
                        .collect();
                    if values.len() == 1 {
                        emit(&values[0]);
                    } else {
                        emit(&values);
                    }
                }
                FormatArg::Csv => {
                    println!("k,p_uniq_max,stderr_uniq_max,p_acyclic,stderr_acyclic,oracle_uniq_max");
                    for (k, est, oracle, _) in rows {
                        println!(
                            "{k},{},{},{},{},{}",
                            csv_float(est.uniq_max.mean),
                            csv_float(est.uniq_max.stderr),
                            csv_float(est.acyclic.mean),
                            csv_float(est.acyclic.stderr),
                            csv_float(oracle)
                        );
                    }
                }
            }
        }
        Command::CountTuples {
            m,
            k,
            targets,
            coeffs,
            n,
            sets,
            mc,
            seed,
        } => {
            let targets: Vec<usize> = parse_list(&targets, "targets")?;
            let coeffs: Vec<usize> = match coeffs {
                Some(text) => parse_list(&text, "coeffs")?,
                None => vec![1; k],
            };
            if coeffs.len() != k {
                return Err(CliError::Domain(Error::DimensionMismatch(format!(
                    "{} coefficients for arity {k}",
                    coeffs.len()
                ))));
            }
            let linear = LinearRelation::new(m, coeffs, targets)?;
            let relation = linear.to_relation()?;
            let spec: SetsSpec = load_json(&sets)?;
            if spec.m != m || spec.n != n {
                return Err(CliError::Domain(Error::DimensionMismatch(format!(
                    "sets file is over {}^{}, arguments say {m}^{n}",
                    spec.m, spec.n
                ))));
            }
            let sets = spec.to_sets()?;
            let predicted = predicted_count(&sets, &linear, n)?;
            match mc {
                None => {
                    let count = count_tuples(&sets, &relation, n)?;
                    let ratio = if predicted > 0.0 {
                        Some(count as f64 / predicted)
                    } else {
                        None
                    };
                    emit(&json!({
                        "method": "enumeration",
                        "count": count,
                        "predicted": predicted,
                        "ratio": ratio,
                    }));
                }
                Some(trials) => {
                    let est = count_tuples_mc(&sets, &relation, n, trials, seed)?;
                    let ratio = if predicted > 0.0 {
                        Some(est.count / predicted)
                    } else {
                        None
                    };
                    emit(&json!({
                        "method": "monte_carlo",
                        "count": est.count,
                        "stderr": est.stderr,
                        "trials": trials,
                        "seed": seed,
                        "predicted": predicted,
                        "ratio": ratio,
                    }));
                }
            }
        }
        Command::Eta { q, alpha } => {
            emit(&json!({
                "q": q,
                "alpha": alpha,
                "eta": hyper_eta(q, alpha)?,
            }));
        }
    }
    Ok(())
}

/// Parses arguments and dispatches; maps error classes to exit codes.
pub fn main_entry() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::SUCCESS
                }
                ErrorKind::InvalidSubcommand | ErrorKind::UnknownArgument => {
                    eprint!("{e}");
                    ExitCode::from(64)
                }
                _ => {
                    eprint!("{e}");
                    ExitCode::from(2)
                }
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Domain(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(65)
        }
    }
}
