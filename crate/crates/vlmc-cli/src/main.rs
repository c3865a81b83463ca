//! `vlmc`: analyze probabilised context trees, decide stationary measures,
//! and simulate the chain.
//!
//! Exit codes: 0 success; 2 for analytic non-verdicts (κ divergence
//! evidence, undecided or absent stationary measure, stabilization budget
//! exhausted); 1 for usage, file, or schema errors.
//!
//! The environment variable `VLMC_THREADS` caps internal parallelism.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use vlmc::alis::{build_q, kappa_table_csv, verify_realization};
use vlmc::dynamics::{empirical_cylinder, jump_decomposition, Sampler, SamplerInit};
use vlmc::error::AlisError;
use vlmc::families::FamilyName;
use vlmc::io::{load_tree, save_tree, LoadedTree};
use vlmc::probabilise::StabilizedPTree;
use vlmc::report::{analyze_report, fmt_f64, stationary_report, JsonObject};
use vlmc::stationary::{decide_and_build, Decision, MeasureConfig};
use vlmc::word::Word;

#[derive(Parser)]
#[command(name = "vlmc", version, about = "Stationary measures for variable length Markov chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Emit {
    Letters,
    Contexts,
    Jumps,
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in tree families and their q parameters.
    Families,
    /// Load and validate a tree file.
    Validate {
        #[arg(long)]
        tree: PathBuf,
    },
    /// α-lis set, κ table, the matrix Q and stability verdict.
    Analyze {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long, default_value_t = 64)]
        max_len: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Write Q as CSV (header row/column are α-lis labels).
        #[arg(long)]
        q_csv: Option<PathBuf>,
        /// Write the κ table as CSV.
        #[arg(long)]
        kappa_csv: Option<PathBuf>,
    },
    /// Decide existence/uniqueness and construct the stationary measure.
    Stationary {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long, default_value_t = 64)]
        max_len: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Depth of the K1/K2/K3 consistency sweep on a unique measure.
        #[arg(long, default_value_t = 8)]
        check_depth: usize,
    },
    /// Simulate the chain.
    Simulate {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Burn-in steps from the smallest context (ignored with --init).
        #[arg(long, default_value_t = 10_000)]
        burnin: usize,
        /// Initial history in reading order (most recent letter last).
        #[arg(long)]
        init: Option<String>,
        #[arg(long, value_enum, default_value_t = Emit::Letters)]
        emit: Emit,
        /// Also report sliding-window frequencies of all words up to this
        /// length against their cylinder estimates.
        #[arg(long)]
        count_words: Option<usize>,
    },
    /// Compute the smallest stable context tree containing the input.
    Stabilize {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long, default_value_t = 64)]
        budget: usize,
        /// Output path for the stabilized tree file (stdout by default).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Probabilise a left-comb of left-combs so its Q block reproduces a
    /// strictly positive row-stochastic matrix (CSV, one row per line).
    Realize {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value_t = 60)]
        max_len: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Output path for the realized tree file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Families => {
            for &name in FamilyName::all() {
                let params: Vec<String> = name
                    .q_params()
                    .iter()
                    .map(|(k, v)| format!("{k}={v}"))
                    .collect();
                println!(
                    "{:<28} {:<9} {}  [q params: {}]",
                    name.id(),
                    if name.is_shift_stable() { "stable" } else { "non-stable" },
                    name.describe(),
                    params.join(", ")
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { tree } => {
            let loaded = load(&tree)?;
            let stability = loaded.ptree.tree().is_stable(24);
            let mut obj = JsonObject::new()
                .int("report_version", 1)
                .str("command", "validate")
                .bool("ok", true)
                .str(
                    "stability",
                    match stability {
                        vlmc::StabilityVerdict::Stable => "stable",
                        vlmc::StabilityVerdict::Unstable { .. } => "unstable",
                        vlmc::StabilityVerdict::Inconclusive => "inconclusive",
                    },
                );
            if let Some(d) = loaded.notes.complete_tree_of_depth {
                // Admitted, but worth flagging: this is a plain order-d
                // Markov chain.
                obj = obj.int("complete_tree_of_depth", d as u64);
            }
            if let Some(h) = loaded.ptree.tree().height() {
                obj = obj.int("height", h as u64);
            }
            println!("{}", obj.finish());
            Ok(ExitCode::SUCCESS)
        }
        Command::Analyze { tree, max_len, tol, q_csv, kappa_csv } => {
            let loaded = load(&tree)?;
            let stability = loaded.ptree.tree().is_stable(max_len);
            match build_q(&loaded.ptree, max_len, tol) {
                Ok(q) => {
                    if let Some(path) = q_csv {
                        fs::write(&path, q.to_csv())
                            .with_context(|| format!("writing {}", path.display()))?;
                    }
                    if let Some(path) = kappa_csv {
                        fs::write(&path, kappa_table_csv(q.kappas()))
                            .with_context(|| format!("writing {}", path.display()))?;
                    }
                    println!(
                        "{}",
                        analyze_report(
                            &loaded.ptree.tree().descriptor(),
                            &stability,
                            &q,
                            max_len,
                            tol
                        )
                    );
                    Ok(ExitCode::SUCCESS)
                }
                Err(AlisError::CascadeDiverged { alis, evidence }) => {
                    let obj = JsonObject::new()
                        .int("report_version", 1)
                        .str("command", "analyze")
                        .str("status", "diverged")
                        .str("alis", &alis.to_string())
                        .str("evidence", &evidence);
                    println!("{}", obj.finish());
                    Ok(ExitCode::from(2))
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Stationary { tree, max_len, tol, check_depth } => {
            let loaded = load(&tree)?;
            let cfg = MeasureConfig { max_len, tol, ..MeasureConfig::default() };
            let decision = decide_and_build(&loaded.ptree, &cfg)?;
            let checks = match &decision {
                Decision::Unique(m) => Some(m.consistency_report(check_depth)?),
                _ => None,
            };
            println!(
                "{}",
                stationary_report(
                    &loaded.ptree.tree().descriptor(),
                    &decision,
                    checks.as_ref(),
                    max_len,
                    tol
                )
            );
            Ok(match decision {
                Decision::Unique(_) => ExitCode::SUCCESS,
                _ => ExitCode::from(2),
            })
        }
        Command::Simulate { tree, steps, seed, burnin, init, emit, count_words } => {
            let loaded = load(&tree)?;
            let init = match init {
                Some(s) => SamplerInit::History(
                    Word::from_str(&s).map_err(|e| anyhow!("bad --init: {e}"))?,
                ),
                None => SamplerInit::BurnIn { burn_in: burnin },
            };
            let mut sampler = Sampler::new(loaded.ptree.clone(), init, seed)?;
            match emit {
                Emit::Letters => {
                    let traj = sampler.run(steps)?;
                    let mut line = String::with_capacity(steps);
                    for &a in &traj {
                        line.push(if a == 1 { '1' } else { '0' });
                    }
                    println!("{line}");
                    if let Some(len) = count_words {
                        print!("{}", count_words_report(&traj, len)?);
                    }
                }
                Emit::Contexts => {
                    let cp = sampler.context_process(steps)?;
                    if !cp.markov {
                        eprintln!(
                            "note: non-stable tree; the context sequence is not a Markov chain"
                        );
                    }
                    for c in &cp.contexts {
                        println!("{c}");
                    }
                }
                Emit::Jumps => {
                    let cp = sampler.context_process(steps)?;
                    let record = jump_decomposition(&loaded.ptree, &cp.contexts)?;
                    println!("n,S_n,J_n");
                    for (n, (s_n, j_n)) in record.jumps.iter().enumerate() {
                        println!("{n},{s_n},{j_n}");
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Stabilize { tree, budget, out } => {
            let loaded = load(&tree)?;
            match loaded.ptree.stabilize(budget) {
                StabilizedPTree::AlreadyStable => {
                    emit_tree(&save_tree(&loaded.ptree), out.as_deref())?;
                    Ok(ExitCode::SUCCESS)
                }
                StabilizedPTree::Stabilized(stable) => {
                    // Materialize the induced q̂ over the stabilized
                    // contexts when the tree is finite; families keep the
                    // rule form.
                    emit_tree(&save_tree_materialized(&stable)?, out.as_deref())?;
                    Ok(ExitCode::SUCCESS)
                }
                StabilizedPTree::BudgetExceeded => {
                    eprintln!(
                        "closure did not stabilize within budget {budget}; \
                         no claim of non-stabilizability"
                    );
                    Ok(ExitCode::from(2))
                }
            }
        }
        Command::Realize { matrix, max_len, tol, out } => {
            let text = fs::read_to_string(&matrix)
                .with_context(|| format!("reading {}", matrix.display()))?;
            let a = parse_matrix(&text)?;
            let ptree = vlmc::families::realise_q_from_matrix(&a)?;
            let deviation = verify_realization(&ptree, &a, max_len, tol)?;
            let obj = JsonObject::new()
                .int("report_version", 1)
                .str("command", "realize")
                .int("n", a.len() as u64)
                .int("max_len", max_len as u64)
                .float("max_deviation", deviation);
            println!("{}", obj.finish());
            if let Some(path) = out {
                fs::write(&path, save_tree_materialized(&ptree)?)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn load(path: &PathBuf) -> Result<LoadedTree> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    load_tree(&text).with_context(|| format!("loading {}", path.display()))
}

fn emit_tree(text: &str, out: Option<&std::path::Path>) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => println!("{text}"),
    }
    Ok(())
}

/// Serializes a tree, materializing rule-based q values into an explicit
/// table when the context set is finite (rule closures do not survive a
/// file round trip).
fn save_tree_materialized(ptree: &vlmc::ProbabilisedTree) -> Result<String> {
    if let Some(h) = ptree.tree().height() {
        let contexts = ptree.tree().contexts_up_to(h);
        let mut q1 = std::collections::BTreeMap::new();
        for c in contexts {
            q1.insert(c.clone(), ptree.q(&c)?[1]);
        }
        let explicit = vlmc::ProbabilisedTree::new(
            ptree.tree().clone(),
            vlmc::QRule::table(q1),
        );
        return Ok(save_tree(&explicit));
    }
    Ok(save_tree(ptree))
}

fn count_words_report(trajectory: &[u8], len: usize) -> Result<String> {
    let mut out = String::from("word,frequency,stderr\n");
    for l in 1..=len {
        for bits in 0..(1u64 << l) {
            let letters: Vec<u8> = (0..l).map(|i| ((bits >> i) & 1) as u8).collect();
            let word = Word::from_letters(&letters);
            let (p, se) = empirical_cylinder(trajectory, &word)?;
            writeln!(out, "{},{},{}", word, fmt_f64(p), fmt_f64(se))?;
        }
    }
    Ok(out)
}

fn parse_matrix(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row: Result<Vec<f64>> = line
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| anyhow!("row {}: bad entry {s:?}: {e}", i + 1))
            })
            .collect();
        rows.push(row?);
    }
    if rows.is_empty() {
        return Err(anyhow!("empty matrix"));
    }
    Ok(rows)
}
