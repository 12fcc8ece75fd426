//! Command-line front end: parse knowledge-base files, run
//! check/measure/blame/repair/mis, and emit human- or machine-readable
//! reports.
//!
//! Exit codes: `check` exits 0 when consistent, 1 when inconsistent, 2 on
//! any error; the other subcommands exit 0 on success and 2 on error. All
//! randomized behavior is seeded, so identical invocations produce
//! byte-identical reports.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pkb::{
    constraint_label, grid_oracle, inc_star, is_consistent, minimal_inconsistent_subsets,
    parse_kb_with, repair, shapley_inconsistency_with_threads, witness_entries, AnalysisReport,
    ConstraintReport, Diagnostics, KnowledgeBase, MeasureResult, ParseOptions, SolverConfig,
};

#[derive(Parser)]
#[command(
    name = "pkb",
    version,
    about = "Consistency analysis, inconsistency measurement, blame attribution and repair for probabilistic knowledge bases"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Emit the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Solver convergence tolerance.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,
    /// Minimum number of solver start points.
    #[arg(long, global = true, default_value_t = 16)]
    starts: usize,
    /// Seed for all randomized behavior.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Maximum number of worlds the signature may span.
    #[arg(long, global = true, default_value_t = pkb::DEFAULT_WORLD_CAP)]
    max_worlds: u64,
    /// Declare unknown variables as binary on first use.
    #[arg(long, global = true)]
    auto_declare: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether the knowledge base is consistent.
    Check { file: PathBuf },
    /// Compute the inconsistency measure and the minimal adjustments.
    Measure {
        file: PathBuf,
        /// Highlight the normalized measure in the text report.
        #[arg(long)]
        normalized: bool,
        /// Cross-check the measure with the lattice oracle.
        #[arg(long)]
        oracle: bool,
        /// Lattice resolution for --oracle.
        #[arg(long, default_value_t = 200)]
        resolution: u32,
    },
    /// Attribute blame per constraint via Shapley values.
    Blame {
        file: PathBuf,
        /// Worker threads for subset evaluation (result-identical to serial).
        #[arg(long, default_value_t = 1)]
        parallel: usize,
    },
    /// Emit a minimally adjusted consistent knowledge base.
    Repair {
        file: PathBuf,
        /// Write the repaired base to this file instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Enumerate minimal inconsistent subsets and free constraints.
    Mis { file: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("pkb: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<u8, Box<dyn std::error::Error>> {
    let solver = SolverConfig {
        starts: cli.starts,
        tolerance: cli.tol,
        seed: cli.seed,
        ..SolverConfig::default()
    };
    match &cli.command {
        Command::Check { file } => {
            let kb = load(cli, file)?;
            let (consistent, witness) = is_consistent(&kb)?;
            let mut report = base_report(&kb, consistent, cli.seed);
            if let Some(w) = &witness {
                report.diagnostics.max_residual = max_row_residual(&kb, w);
                report.witness = Some(witness_entries(kb.signature(), w));
            }
            if cli.json {
                print_json(&report)?;
            } else {
                println!("consistent: {consistent}");
                if let Some(w) = &witness {
                    print_witness(&kb, w);
                }
            }
            Ok(if consistent { 0 } else { 1 })
        }
        Command::Measure {
            file,
            normalized,
            oracle,
            resolution,
        } => {
            let kb = load(cli, file)?;
            let (consistent, _) = is_consistent(&kb)?;
            let measured = inc_star(&kb, &solver)?;
            let oracle_value = if *oracle {
                Some(grid_oracle(&kb, *resolution)?)
            } else {
                None
            };
            let report = measure_report(&kb, consistent, &measured, cli.seed, oracle_value);
            if cli.json {
                print_json(&report)?;
            } else {
                print_measure_text(&kb, consistent, &measured, *normalized, oracle_value);
            }
            Ok(0)
        }
        Command::Blame { file, parallel } => {
            let kb = load(cli, file)?;
            let (consistent, _) = is_consistent(&kb)?;
            let measured = inc_star(&kb, &solver)?;
            let blame = shapley_inconsistency_with_threads(&kb, &solver, (*parallel).max(1))?;
            let mut report = measure_report(&kb, consistent, &measured, cli.seed, None);
            for (c, s) in report.per_constraint.iter_mut().zip(&blame.values) {
                c.shapley = Some(*s);
            }
            report.diagnostics.subsets_evaluated = Some(blame.subsets_evaluated);
            report.diagnostics.warnings = blame.warnings.clone();
            if cli.json {
                print_json(&report)?;
            } else {
                print_blame_text(&kb, consistent, &measured, &blame.values);
                for w in &blame.warnings {
                    eprintln!("warning: {w}");
                }
            }
            Ok(0)
        }
        Command::Repair { file, output } => {
            let kb = load(cli, file)?;
            let (consistent, _) = is_consistent(&kb)?;
            let measured = inc_star(&kb, &solver)?;
            let repaired = repair(&kb, &measured)?;
            let text = repaired.to_text();
            if let Some(path) = output {
                fs::write(path, &text)?;
            }
            let report = measure_report(&kb, consistent, &measured, cli.seed, None);
            if cli.json {
                print_json(&report)?;
            } else if output.is_none() {
                print!("{text}");
            } else {
                println!(
                    "wrote repaired knowledge base to {}",
                    output.as_ref().unwrap().display()
                );
            }
            Ok(0)
        }
        Command::Mis { file } => {
            let kb = load(cli, file)?;
            let mis = minimal_inconsistent_subsets(&kb)?;
            let consistent = mis.subsets.is_empty();
            let mut report = base_report(&kb, consistent, cli.seed);
            report.mis = Some(mis.subsets.clone());
            if cli.json {
                print_json(&report)?;
            } else {
                println!("consistent: {consistent}");
                if mis.subsets.is_empty() {
                    println!("minimal inconsistent subsets: none");
                } else {
                    println!("minimal inconsistent subsets:");
                    for s in &mis.subsets {
                        let names: Vec<String> = s.iter().map(|&i| describe(&kb, i)).collect();
                        println!("  {{{}}}", names.join(", "));
                    }
                }
                let free: Vec<String> = mis
                    .free
                    .iter()
                    .enumerate()
                    .filter(|(_, f)| **f)
                    .map(|(i, _)| constraint_label(&kb, i))
                    .collect();
                println!(
                    "free constraints: {}",
                    if free.is_empty() {
                        "none".to_owned()
                    } else {
                        free.join(", ")
                    }
                );
            }
            Ok(0)
        }
    }
}

fn load(cli: &Cli, path: &Path) -> Result<KnowledgeBase, Box<dyn std::error::Error>> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let opts = ParseOptions {
        auto_declare: cli.auto_declare,
        world_cap: cli.max_worlds,
    };
    Ok(parse_kb_with(&text, &opts)?)
}

fn describe(kb: &KnowledgeBase, i: usize) -> String {
    format!(
        "{}: {}",
        constraint_label(kb, i),
        kb.constraints()[i].render(kb.signature())
    )
}

fn base_report(kb: &KnowledgeBase, consistent: bool, seed: u64) -> AnalysisReport {
    AnalysisReport {
        consistent,
        inc_star: None,
        inc_star_normalized: None,
        per_constraint: kb
            .constraints()
            .iter()
            .enumerate()
            .map(|(i, c)| ConstraintReport {
                label: constraint_label(kb, i),
                d: c.prob,
                eta: None,
                tau: None,
                adjusted_d: None,
                shapley: None,
            })
            .collect(),
        mis: None,
        witness: None,
        diagnostics: Diagnostics {
            seed,
            converged: true,
            ..Diagnostics::default()
        },
    }
}

fn measure_report(
    kb: &KnowledgeBase,
    consistent: bool,
    measured: &MeasureResult,
    seed: u64,
    oracle: Option<f64>,
) -> AnalysisReport {
    let mut report = base_report(kb, consistent, seed);
    report.inc_star = Some(measured.value);
    report.inc_star_normalized = Some(if kb.is_empty() {
        0.0
    } else {
        measured.value / kb.len() as f64
    });
    for (i, c) in report.per_constraint.iter_mut().enumerate() {
        c.eta = Some(measured.deviations.eta[i]);
        c.tau = Some(measured.deviations.tau[i]);
        c.adjusted_d = Some(measured.repaired.constraints()[i].prob);
    }
    report.witness = Some(witness_entries(kb.signature(), &measured.witness));
    report.diagnostics = Diagnostics {
        starts: measured.diagnostics.starts_used,
        iterations: measured.diagnostics.iterations,
        converged: measured.diagnostics.converged,
        max_residual: measured.diagnostics.max_residual,
        seed,
        subsets_evaluated: None,
        oracle,
        warnings: Vec::new(),
    };
    report
}

fn max_row_residual(kb: &KnowledgeBase, dist: &pkb::Distribution) -> f64 {
    let sys = pkb::build_cs(&kb.compile());
    sys.constraint_rows
        .iter()
        .map(|row| {
            row.iter()
                .zip(dist.probs())
                .map(|(c, p)| c * p)
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max)
}

fn print_json(report: &AnalysisReport) -> Result<(), Box<dyn std::error::Error>> {
    println!(
        "{}",
        serde_json::to_string_pretty(&report.clone().rounded())?
    );
    Ok(())
}

fn print_witness(kb: &KnowledgeBase, dist: &pkb::Distribution) {
    println!("witness (worlds with nonzero probability):");
    for e in witness_entries(kb.signature(), dist) {
        if e.p > 0.0 {
            println!("  {:<32} {:.6}", e.world, e.p);
        }
    }
}

fn print_measure_text(
    kb: &KnowledgeBase,
    consistent: bool,
    measured: &MeasureResult,
    normalized: bool,
    oracle: Option<f64>,
) {
    println!("consistent: {consistent}");
    let norm = if kb.is_empty() {
        0.0
    } else {
        measured.value / kb.len() as f64
    };
    if normalized {
        println!("inconsistency (normalized): {:.6}", norm);
        println!("inconsistency (total):      {:.6}", measured.value);
    } else {
        println!("inconsistency: {:.6}", measured.value);
        println!("normalized:    {:.6}", norm);
    }
    if let Some(v) = oracle {
        println!("lattice oracle: {:.6}", v);
    }
    if !kb.is_empty() {
        println!(
            "{:<40} {:>8} {:>8} {:>8} {:>9}",
            "constraint", "d", "eta", "tau", "adjusted"
        );
        for (i, c) in kb.constraints().iter().enumerate() {
            println!(
                "{:<40} {:>8.4} {:>8.4} {:>8.4} {:>9.4}",
                describe(kb, i),
                c.prob,
                measured.deviations.eta[i],
                measured.deviations.tau[i],
                measured.repaired.constraints()[i].prob
            );
        }
    }
    if !measured.diagnostics.converged {
        eprintln!(
            "warning: solver hit the iteration limit on every start; the value is the best found"
        );
    }
}

fn print_blame_text(
    kb: &KnowledgeBase,
    consistent: bool,
    measured: &MeasureResult,
    shapley: &[f64],
) {
    println!("consistent: {consistent}");
    println!("inconsistency: {:.6}", measured.value);
    // Descending blame order puts the main offender first.
    let mut order: Vec<usize> = (0..kb.len()).collect();
    order.sort_by(|&a, &b| shapley[b].partial_cmp(&shapley[a]).unwrap().then(a.cmp(&b)));
    println!("blame (Shapley):");
    for i in order {
        println!("  {:<40} {:>9.6}", describe(kb, i), shapley[i]);
    }
    let total: f64 = shapley.iter().sum();
    println!("  {:<40} {:>9.6}", "total", total);
}
