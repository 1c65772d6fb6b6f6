//! Command-line front end: single solves, Monte Carlo sweeps, and the
//! energy-recycling gap table. Exit codes: 0 success, 1 usage or parse
//! error, 2 infeasible instance, 3 non-convergence.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wpmec::error::Error;
use wpmec::fairness::FairnessParam;
use wpmec::kkt::{self, SolverResult};
use wpmec::kv::KvDoc;
use wpmec::scenario::{self, draw_channels, Scenario};
use wpmec::{cer, experiments, oracle};

#[derive(Parser)]
#[command(name = "wpmec", version, about = "Joint resource allocation for wireless-powered MEC with energy recycling", disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario instance with a chosen solver.
    Solve(SolveArgs),
    /// Run a parameter sweep described by a spec file and emit CSV.
    Sweep(SweepArgs),
    /// Print the per-sensor energy-recycling gap table.
    CerGap(CerGapArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Scenario file in key-value format.
    scenario: PathBuf,
    /// Fairness parameter: a finite value or `max-min`; overrides the file.
    #[arg(long)]
    alpha: Option<String>,
    /// Solver: zfba, cfba, mfba, or oracle.
    #[arg(long, default_value = "zfba")]
    solver: String,
    /// Channel realization seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write the result document here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep spec file (scenario template plus sweep_* keys).
    spec: PathBuf,
    /// CSV output path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CerGapArgs {
    /// Scenario file in key-value format.
    scenario: PathBuf,
    /// Channel realization seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // help and version requests are successes, anything else is usage
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Solve(args) => cmd_solve(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::CerGap(args) => cmd_cer_gap(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Infeasible(_) | Error::InfeasibleAllocation(_) => 2,
        Error::NonConvergence(_) | Error::DualInfeasible(_) => 3,
        _ => 1,
    }
}

fn load_scenario(path: &PathBuf) -> Result<Scenario, Error> {
    let text = std::fs::read_to_string(path)?;
    let doc = KvDoc::parse(&text)?;
    let s = Scenario::from_kv(&doc)?;
    s.ensure_valid()?;
    Ok(s)
}

fn cmd_solve(args: &SolveArgs) -> Result<ExitCode, Error> {
    let mut s = load_scenario(&args.scenario)?;
    if let Some(raw) = &args.alpha {
        s.alpha = scenario::parse_alpha(raw)?;
        s.ensure_valid()?;
    }
    let ch = draw_channels(&s, args.seed);
    let result = match args.solver.as_str() {
        "zfba" => kkt::solve_zfba(&s, &ch)?,
        "cfba" => match s.alpha.as_finite() {
            Some(a) if a > 0.0 => kkt::solve_cfba(&s, &ch, a)?,
            _ => {
                return Err(Error::Usage(
                    "cfba requires a finite alpha > 0 (use --alpha)".into(),
                ))
            }
        },
        "mfba" => kkt::solve_mfba(&s, &ch)?,
        "oracle" => {
            let res = match s.alpha {
                FairnessParam::MaxMin => oracle::solve_maxmin_epigraph(&s, &ch)?,
                FairnessParam::Alpha(a) => oracle::solve_generic(&s, &ch, a)?,
            };
            let doc = oracle_doc(&s, args.seed, &res);
            return write_doc(&doc, args.out.as_ref()).map(|_| ExitCode::SUCCESS);
        }
        other => {
            return Err(Error::Usage(format!(
                "unknown solver `{other}` (expected zfba, cfba, mfba, or oracle)"
            )))
        }
    };
    let doc = result_doc(&s, args.seed, &args.solver, &result);
    write_doc(&doc, args.out.as_ref())?;
    if result.converged {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(3))
    }
}

fn result_doc(s: &Scenario, seed: u64, solver: &str, r: &SolverResult) -> KvDoc {
    let mut doc = KvDoc::new();
    doc.set("solver", solver);
    doc.set_u64("seed", seed);
    doc.set("alpha", format!("{}", s.alpha));
    doc.set("converged", if r.converged { "1" } else { "0" });
    doc.set_usize("iterations", r.iterations);
    doc.set_f64("objective", r.objective);
    doc.set_f64("jain", r.jain);
    doc.set_vec("bits", &r.bits);
    doc.set_f64("total_bits", r.bits.iter().sum());
    doc.set_vec("t", &r.allocation.t);
    doc.set_f64("sum_t", r.allocation.t.iter().sum());
    doc.set_f64("slot_budget", s.slot_budget());
    doc.set_vec("ps_energy", &r.allocation.ps_energy);
    doc.set_vec("tx_energy", &r.allocation.tx_energy);
    doc.set_vec("cpu_freq", &r.allocation.cpu_freq);
    doc.set_vec("ps_power", &r.original.ps_power);
    doc.set_vec("tx_power", &r.original.tx_power);
    if !r.slack.is_empty() {
        doc.set_vec("slack", &r.slack);
    }
    doc.set_vec("trace", &r.trace);
    doc
}

fn oracle_doc(s: &Scenario, seed: u64, r: &oracle::OracleResult) -> KvDoc {
    let mut doc = KvDoc::new();
    doc.set("solver", "oracle");
    doc.set_u64("seed", seed);
    doc.set("alpha", format!("{}", s.alpha));
    doc.set("converged", "1");
    doc.set_f64("objective", r.objective);
    doc.set_vec("bits", &r.bits);
    doc.set_f64("total_bits", r.bits.iter().sum());
    doc.set_vec("t", &r.allocation.t);
    doc.set_f64("sum_t", r.allocation.t.iter().sum());
    doc.set_f64("slot_budget", s.slot_budget());
    doc.set_vec("ps_energy", &r.allocation.ps_energy);
    doc.set_vec("tx_energy", &r.allocation.tx_energy);
    doc.set_vec("cpu_freq", &r.allocation.cpu_freq);
    if let Some(g) = r.gamma {
        doc.set_f64("gamma", g);
    }
    doc
}

fn write_doc(doc: &KvDoc, out: Option<&PathBuf>) -> Result<(), Error> {
    let text = doc.emit();
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<ExitCode, Error> {
    let text = std::fs::read_to_string(&args.spec)?;
    let spec = experiments::parse_spec(&text)?;
    let records = experiments::run_sweep(&spec)?;
    experiments::emit_csv(&records, &args.out)?;
    let all_converged = records.iter().all(|r| r.converged);
    eprintln!(
        "wrote {} records to {}",
        records.len(),
        args.out.display()
    );
    if all_converged {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(3))
    }
}

fn cmd_cer_gap(args: &CerGapArgs) -> Result<ExitCode, Error> {
    let s = load_scenario(&args.scenario)?;
    let ch = draw_channels(&s, args.seed);
    let setting = cer::CerSetting::from_scenario(&s, &ch)?;
    println!("ws gap_exact gap_approx rel_diff");
    for k in 0..setting.num_ws {
        let exact = cer::gap_exact(&setting, k)?;
        let approx = cer::gap_approx(&setting, k)?;
        let rel = if approx > 0.0 {
            (exact - approx).abs() / approx
        } else {
            0.0
        };
        println!("{k} {exact:.9e} {approx:.9e} {rel:.3e}");
    }
    Ok(ExitCode::SUCCESS)
}
