use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nestdet_core::harness::{bench_csv, gen_random, gen_tasep, run_suite, verify_identity, Instance, Outcome};
use nestdet_core::harness::{SuiteConfig, VerificationReport, VerifyConfig};

#[derive(Parser)]
#[command(name = "nestdet", version, about = "Check det(A + B) = det(I + K) on nested-contour instances")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated instance as JSON.
    #[command(subcommand)]
    Gen(Gen),
    /// Verify one instance file.
    Verify(VerifyArgs),
    /// Generate and verify a seeded batch of random instances.
    Suite(SuiteArgs),
    /// Per-stage timings as CSV, one row per n.
    Bench(BenchArgs),
}

#[derive(Subcommand)]
enum Gen {
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        deg: usize,
        #[arg(long)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    Tasep {
        /// Strictly decreasing positions, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        y: Vec<i64>,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    /// Quadrature nodes on the contour.
    #[arg(long, default_value_t = 128)]
    nodes: usize,
    /// Relative tolerance for the determinant comparisons.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

impl Common {
    fn config(&self) -> VerifyConfig {
        let mut cfg = VerifyConfig {
            nodes: self.nodes,
            ..VerifyConfig::default()
        };
        cfg.tol.identity = self.tol;
        cfg
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    common: Common,
    /// Write the full report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Fail unless the special-region kernel applies and agrees.
    #[arg(long)]
    check_bll: bool,
    /// Print the trace decomposition gap for every ℓ.
    #[arg(long)]
    check_trace: bool,
}

#[derive(Args)]
struct SuiteArgs {
    #[arg(long, default_value_t = 50)]
    count: usize,
    #[arg(long, default_value_t = 8)]
    n_max: usize,
    #[arg(long, default_value_t = 3)]
    deg_max: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 12)]
    n_max: usize,
    #[arg(long, default_value_t = 3)]
    deg: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 128)]
    nodes: usize,
}

fn exit(outcome: Outcome) -> ExitCode {
    ExitCode::from(outcome as u8)
}

fn input_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    exit(Outcome::InputError)
}

fn print_report(r: &VerificationReport, per_ell: bool) {
    let c = |z: nestdet_core::Complex64| format!("{:+.15e} {:+.15e}i", z.re, z.im);
    println!("n                {}", r.n);
    println!("det_finite       {}", c(r.det_finite));
    println!("det_rank         {}", c(r.det_rank));
    println!("det_nystrom      {}", c(r.det_nystrom));
    for (name, v) in [
        ("rel_diff_rank", r.rel_diff_rank),
        ("rel_diff_nystrom", r.rel_diff_nystrom),
        ("stability_gap", r.stability_gap),
        ("transpose_gap", r.transpose_gap),
        ("lemma_gap", r.lemma_gap),
        ("sr_gap", r.sr_gap),
        ("inverse_gap", r.inverse_gap),
        ("ortho_gap", r.ortho_gap),
        ("bridge_gap", r.bridge_gap),
        ("decomp_gap", r.decomp_gap),
        ("expansion_gap", r.expansion_gap),
    ] {
        println!("{name:<17}{v:.3e}");
    }
    let v = &r.variants;
    for (name, gap) in [
        ("simplified_vs_general", v.simplified_vs_general),
        ("bll_vs_general", v.bll_vs_general),
        ("bll_vs_simplified", v.bll_vs_simplified),
        ("bll_subtracted_term", v.bll_subtracted_term),
    ] {
        if let Some(gap) = gap {
            println!("{name:<22}{gap:.3e}");
        }
    }
    if per_ell {
        for (l, gap) in r.decomp_by_ell.iter().enumerate() {
            println!("decomp[ℓ={}]      {gap:.3e}", l + 1);
        }
    }
    if let Some(f) = &r.failure {
        println!("FAILED at stage {}: {}", f.stage, f.message);
    } else if r.passed {
        println!("PASS");
    } else {
        println!("FAIL: {}", r.failed_checks.join(", "));
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Gen(g) => {
            let (inst, path) = match g {
                Gen::Random { n, deg, seed, output } => (gen_random(n, deg, seed), output),
                Gen::Tasep { y, output } => (gen_tasep(&y), output),
            };
            match inst.and_then(|i| i.save(&path)) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => input_error(e),
            }
        }
        Command::Verify(a) => {
            let inst = match Instance::load(&a.input) {
                Ok(i) => i,
                Err(e) => return input_error(format!("{}: {e}", a.input.display())),
            };
            let cfg = VerifyConfig {
                require_bll: a.check_bll,
                ..a.common.config()
            };
            let report = verify_identity(&inst, &cfg);
            print_report(&report, a.check_trace);
            if let Some(path) = &a.report {
                if let Err(e) = fs::write(path, report.to_json()) {
                    return input_error(format!("{}: {e}", path.display()));
                }
            }
            exit(report.outcome())
        }
        Command::Suite(a) => {
            let cfg = SuiteConfig {
                count: a.count,
                n_max: a.n_max,
                deg_max: a.deg_max,
                seed: a.seed,
                verify: a.common.config(),
            };
            let summary = match run_suite(&cfg) {
                Ok(s) => s,
                Err(e) => return input_error(e),
            };
            println!("#  n deg seed                  rel_rank  rel_nystrom  stability  status");
            for (k, e) in summary.entries.iter().enumerate() {
                let r = &e.report;
                let status = match r.outcome() {
                    Outcome::Pass => "pass".to_string(),
                    _ => match &r.failure {
                        Some(f) => format!("error[{}]", f.stage),
                        None => format!("fail[{}]", r.failed_checks.join(",")),
                    },
                };
                println!(
                    "{k:<3}{:>2} {:>3} {:<20}  {:.2e}  {:.2e}     {:.2e}   {status}",
                    e.case.n, e.case.deg, e.case.seed, r.rel_diff_rank, r.rel_diff_nystrom, r.stability_gap
                );
            }
            println!(
                "{} passed, {} failed; max rel diff {:.3e}, max stability gap {:.3e}, {:.0} ms",
                summary.passed, summary.failed, summary.max_rel_diff, summary.max_stability_gap, summary.elapsed_ms
            );
            exit(summary.outcome())
        }
        Command::Bench(a) => {
            let cfg = VerifyConfig {
                nodes: a.nodes,
                ..VerifyConfig::default()
            };
            match bench_csv(a.n_max, a.deg, a.seed, &cfg) {
                Ok(csv) => {
                    print!("{csv}");
                    ExitCode::SUCCESS
                }
                Err(e) => input_error(e),
            }
        }
    }
}
