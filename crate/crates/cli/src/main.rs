//! `cascade`: query, simulate and optimize correct-cascade probabilities.
//!
//! Single results are printed as flat JSON on stdout; sweeps and censuses
//! are written as CSV. Exit status is 0 on success, 2 on invalid input and
//! 3 when output cannot be written.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use cascade::analytic::{rational_census, CensusReport, DEFAULT_SERIES_TOL};
use cascade::budget::{optimize, Allocation, BudgetProblem};
use cascade::sim::{estimate, estimate_pcc};
use cascade::sweep::{SweepRow, SweepSpec};
use cascade::{pcc, CascadeError, PccMode, SignalQualities, TruthState, WalkStatus};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

#[derive(Parser)]
#[command(name = "cascade", version, about = "Correct-cascade probabilities under asymmetric signal qualities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cascade probabilities for one pair of signal qualities.
    Prob {
        #[arg(long)]
        p1: f64,
        #[arg(long)]
        p2: f64,
        #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
        mode: ModeArg,
        #[arg(long, default_value_t = DEFAULT_SERIES_TOL)]
        tol: f64,
    },
    /// Monte-Carlo estimate of a cascade probability.
    Simulate {
        #[arg(long)]
        p1: f64,
        #[arg(long)]
        p2: f64,
        #[arg(long)]
        paths: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Estimate the correct-cascade probability over both states.
        #[arg(long, conflicts_with_all = ["truth", "target"])]
        pcc: bool,
        #[arg(long, value_enum, default_value_t = TruthArg::Good)]
        truth: TruthArg,
        /// Cascade to count; defaults to the correct one for `--truth`.
        #[arg(long, value_enum)]
        target: Option<TargetArg>,
    },
    /// Best allocation of a quality-improvement budget.
    Optimize {
        #[arg(long)]
        p1: f64,
        #[arg(long)]
        p2: f64,
        #[arg(long)]
        budget: f64,
        /// Check the decision against an exhaustive grid.
        #[arg(long)]
        verify: bool,
        #[arg(long, default_value_t = 0.0025)]
        grid_step: f64,
    },
    /// CSV of probabilities along a grid of p2 values.
    Sweep {
        #[arg(long)]
        p1: f64,
        #[arg(long, default_value_t = 0.501)]
        p2_from: f64,
        #[arg(long, default_value_t = 0.999)]
        p2_to: f64,
        #[arg(long, default_value_t = 0.001)]
        step: f64,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [ModeArg::Irrational, ModeArg::Rational])]
        modes: Vec<ModeArg>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// CSV of rational-versus-irrational formula gaps over reduced fractions.
    Census {
        #[arg(long)]
        p1: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 32)]
        max_den: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Auto,
    Irrational,
    Rational,
}

impl From<ModeArg> for PccMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Auto => PccMode::Auto,
            ModeArg::Irrational => PccMode::Irrational,
            ModeArg::Rational => PccMode::Rational,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TruthArg {
    Good,
    Bad,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    Ycascade,
    Ncascade,
}

enum Failure {
    Invalid(anyhow::Error),
    Io(anyhow::Error),
}

impl From<CascadeError> for Failure {
    fn from(e: CascadeError) -> Self {
        Failure::Invalid(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Prob { p1, p2, mode, tol } => print_json(cmd_prob(p1, p2, mode.into(), tol)?),
        Command::Simulate {
            p1,
            p2,
            paths,
            seed,
            pcc,
            truth,
            target,
        } => print_json(cmd_simulate(p1, p2, paths, seed, pcc, truth, target)?),
        Command::Optimize {
            p1,
            p2,
            budget,
            verify,
            grid_step,
        } => print_json(cmd_optimize(p1, p2, budget, verify.then_some(grid_step))?),
        Command::Sweep {
            p1,
            p2_from,
            p2_to,
            step,
            modes,
            out,
        } => {
            let spec = SweepSpec {
                p1,
                p2_from,
                p2_to,
                step,
                modes: modes.into_iter().map(PccMode::from).collect(),
            };
            let rows = spec.rows()?;
            emit(out, |w| write_sweep(w, &rows))
        }
        Command::Census { p1, eps, max_den, out } => {
            let report = rational_census(p1, eps, max_den)?;
            emit(out, |w| write_census(w, &report))
        }
    }
}

fn print_json(doc: Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(&doc).expect("JSON values always serialize");
    writeln!(io::stdout(), "{text}")
        .context("writing to stdout")
        .map_err(Failure::Io)
}

fn cmd_prob(p1: f64, p2: f64, mode: PccMode, tol: f64) -> Result<Value, Failure> {
    let q = SignalQualities::new(p1, p2)?;
    let r = pcc(&q, mode, tol)?;
    Ok(json!({
        "p1": r.p1,
        "p2": r.p2,
        "swapped": r.swapped,
        "a": r.a,
        "mode": mode.to_string(),
        "formula": r.formula,
        "rational_r": r.fraction.map(|f| f.0),
        "rational_q": r.fraction.map(|f| f.1),
        "ycas_g": r.ycas_good,
        "ycas_b": r.ycas_bad,
        "ncas_b": r.ncas_bad,
        "pcc": r.pcc,
        "truncation_index": r.truncation_index,
        "tail_bound": r.tail_bound,
    }))
}

fn cmd_simulate(
    p1: f64,
    p2: f64,
    paths: u64,
    seed: u64,
    want_pcc: bool,
    truth: TruthArg,
    target: Option<TargetArg>,
) -> Result<Value, Failure> {
    let q = SignalQualities::new(p1, p2)?;
    let mut doc = Map::new();
    doc.insert("p1".into(), json!(p1));
    doc.insert("p2".into(), json!(p2));
    let est = if want_pcc {
        doc.insert("quantity".into(), json!("pcc"));
        estimate_pcc(&q, paths, seed)?
    } else {
        let truth = match truth {
            TruthArg::Good => TruthState::Good,
            TruthArg::Bad => TruthState::Bad,
        };
        let target = match target {
            Some(TargetArg::Ycascade) => WalkStatus::YCascade,
            Some(TargetArg::Ncascade) => WalkStatus::NCascade,
            None => truth.correct_cascade(),
        };
        doc.insert("quantity".into(), json!("conditional"));
        doc.insert("truth".into(), json!(truth));
        doc.insert("target".into(), json!(target));
        estimate(&q, truth, target, paths, seed)?
    };
    doc.insert("paths".into(), json!(est.paths));
    doc.insert("seed".into(), json!(est.seed));
    doc.insert("successes".into(), json!(est.successes));
    doc.insert("estimate".into(), json!(est.estimate));
    doc.insert("std_error".into(), json!(est.std_error));
    doc.insert("ci95_low".into(), json!(est.ci95.0));
    doc.insert("ci95_high".into(), json!(est.ci95.1));
    Ok(Value::Object(doc))
}

fn cmd_optimize(p1: f64, p2: f64, budget: f64, verify_step: Option<f64>) -> Result<Value, Failure> {
    let prob = BudgetProblem::new(p1, p2, budget)?;
    let mut decision = optimize(&prob)?;
    if let Some(step) = verify_step {
        decision.verify(step)?;
    }
    // report improvements against the qualities as the caller named them
    let oriented = |a: &Allocation| {
        if prob.swapped {
            (a.c2, a.c1, a.p2, a.p1)
        } else {
            (a.c1, a.c2, a.p1, a.p2)
        }
    };
    let mut doc = Map::new();
    doc.insert("p1".into(), json!(p1));
    doc.insert("p2".into(), json!(p2));
    doc.insert("budget".into(), json!(budget));
    doc.insert("swapped".into(), json!(prob.swapped));
    doc.insert("theorem_regime".into(), json!(prob.in_theorem_regime()));
    doc.insert("equalize_feasible".into(), json!(prob.equalize_feasible()));
    let mut put_allocation = |prefix: &str, a: &Allocation| {
        let (c1, c2, q1, q2) = oriented(a);
        doc.insert(format!("{prefix}_c1"), json!(c1));
        doc.insert(format!("{prefix}_c2"), json!(c2));
        doc.insert(format!("{prefix}_p1"), json!(q1));
        doc.insert(format!("{prefix}_p2"), json!(q2));
        doc.insert(format!("{prefix}_pcc"), json!(a.pcc));
    };
    for c in &decision.candidates {
        put_allocation(c.strategy.name(), c);
    }
    put_allocation("chosen", decision.chosen_allocation());
    if let Some(best) = &decision.grid_best {
        put_allocation("grid", best);
    }
    doc.insert("chosen".into(), json!(decision.chosen.name()));
    doc.insert("epsilon_cap".into(), json!(decision.epsilon_cap));
    doc.insert("grid_step".into(), json!(verify_step));
    doc.insert("verified_by_grid".into(), json!(decision.verified_by_grid));
    Ok(Value::Object(doc))
}

fn emit<F>(out: Option<PathBuf>, write: F) -> Result<(), Failure>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    let result = match &out {
        Some(path) => File::create(path)
            .and_then(|f| {
                let mut w = io::BufWriter::new(f);
                write(&mut w)?;
                w.flush()
            })
            .with_context(|| format!("writing {}", path.display())),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock).and_then(|_| lock.flush()).context("writing to stdout")
        }
    };
    result.map_err(Failure::Io)
}

fn write_sweep(w: &mut dyn Write, rows: &[SweepRow]) -> io::Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["p2", "a", "mode", "pcc", "ycas_G", "ncas_B"])?;
    for r in rows {
        csv.write_record([
            r.p2.to_string(),
            r.a.to_string(),
            r.mode.to_string(),
            r.pcc.to_string(),
            r.ycas_good.to_string(),
            r.ncas_bad.to_string(),
        ])?;
    }
    csv.flush()
}

fn write_census(w: &mut dyn Write, report: &CensusReport) -> io::Result<()> {
    {
        let mut csv = csv::Writer::from_writer(&mut *w);
        csv.write_record(["r", "q", "p2", "gap_G", "gap_B", "gap_pcc"])?;
        for g in &report.entries {
            csv.write_record([
                g.r.to_string(),
                g.q.to_string(),
                g.p2.to_string(),
                g.gap_good.to_string(),
                g.gap_bad.to_string(),
                g.gap_pcc.to_string(),
            ])?;
        }
        csv.flush()?;
    }
    writeln!(
        w,
        "# exceed_count={},exceed_count_G={},exceed_count_B={},theoretical_bound={},within_bound={},skipped={}",
        report.exceed_count,
        report.exceed_count_good,
        report.exceed_count_bad,
        report.theoretical_bound,
        report.within_bound(),
        report.skipped.len()
    )
}
