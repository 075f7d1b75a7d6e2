//! Seeded batches of random instances, verified in parallel.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::generate::gen_random;
use super::rng::InstanceRng;
use super::verify::{verify_identity, Outcome, VerificationReport, VerifyConfig};
use crate::error::{Error, Result};
use crate::structmat::MAX_N;

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub count: usize,
    pub n_max: usize,
    pub deg_max: usize,
    pub seed: u64,
    pub verify: VerifyConfig,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            count: 50,
            n_max: 8,
            deg_max: 3,
            seed: 0,
            verify: VerifyConfig::default(),
        }
    }
}

/// Parameters of one suite member.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteCase {
    pub n: usize,
    pub deg: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteEntry {
    pub case: SuiteCase,
    pub report: VerificationReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteSummary {
    pub entries: Vec<SuiteEntry>,
    pub passed: usize,
    pub failed: usize,
    pub max_rel_diff: f64,
    pub max_stability_gap: f64,
    pub elapsed_ms: f64,
}

impl SuiteSummary {
    /// Worst outcome over all entries, in exit-code priority order.
    pub fn outcome(&self) -> Outcome {
        let outcomes: Vec<_> = self.entries.iter().map(|e| e.report.outcome()).collect();
        [Outcome::InputError, Outcome::IdentityFailure, Outcome::Unstable]
            .into_iter()
            .find(|o| outcomes.contains(o))
            .unwrap_or(Outcome::Pass)
    }
}

/// The `count` cases drawn from `seed`: `n` uniform in `1..=n_max`, degree
/// uniform in `0..=deg_max`, and a fresh per-instance seed.
pub fn suite_cases(cfg: &SuiteConfig) -> Result<Vec<SuiteCase>> {
    if cfg.n_max == 0 || cfg.n_max > MAX_N {
        return Err(Error::Config(format!("n-max = {} outside 1..={MAX_N}", cfg.n_max)));
    }
    let mut rng = InstanceRng::new(cfg.seed);
    Ok((0..cfg.count)
        .map(|_| SuiteCase {
            n: 1 + rng.below(cfg.n_max),
            deg: rng.below(cfg.deg_max + 1),
            seed: rng.next_u64(),
        })
        .collect())
}

pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteSummary> {
    let started = Instant::now();
    let cases = suite_cases(cfg)?;
    let entries = cases
        .par_iter()
        .map(|case| {
            let inst = gen_random(case.n, case.deg, case.seed)?;
            Ok(SuiteEntry {
                case: *case,
                report: verify_identity(&inst, &cfg.verify),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = entries.iter().filter(|e| e.report.passed).count();
    let fold_max = |get: fn(&VerificationReport) -> f64| {
        entries.iter().map(|e| get(&e.report)).fold(0.0, f64::max)
    };
    Ok(SuiteSummary {
        passed,
        failed: entries.len() - passed,
        max_rel_diff: fold_max(|r| r.rel_diff_rank.max(r.rel_diff_nystrom)),
        max_stability_gap: fold_max(|r| r.stability_gap),
        elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
        entries,
    })
}

/// Per-stage timings for one random instance of each size `1..=n_max`,
/// as CSV with a header row.
pub fn bench_csv(n_max: usize, deg: usize, seed: u64, verify: &VerifyConfig) -> Result<String> {
    const STAGES: [&str; 10] = [
        "setup", "structure", "bridge", "finite", "chain", "rank", "nystrom", "trace", "variants", "total",
    ];
    let cfg = VerifyConfig {
        allow_large_n: true,
        ..verify.clone()
    };
    let mut out = format!("n,nodes,{}\n", STAGES.map(|s| format!("{s}_ms")).join(","));
    for n in 1..=n_max {
        let inst = gen_random(n.min(MAX_N), deg, seed.wrapping_add(n as u64))?;
        let report = verify_identity(&inst, &cfg);
        if let Some(f) = &report.failure {
            return Err(Error::Invariant(format!("n = {n}: {} stage failed: {}", f.stage, f.message)));
        }
        let cols: Vec<_> = STAGES
            .iter()
            .map(|s| format!("{:.3}", report.timings.get(*s).copied().unwrap_or(f64::NAN)))
            .collect();
        out.push_str(&format!("{n},{},{}\n", cfg.nodes, cols.join(",")));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cases_are_seeded_and_in_range() {
        let cfg = SuiteConfig {
            count: 40,
            n_max: 5,
            deg_max: 2,
            seed: 3,
            ..SuiteConfig::default()
        };
        let a = suite_cases(&cfg).unwrap();
        assert_eq!(a, suite_cases(&cfg).unwrap());
        assert!(a.iter().all(|c| (1..=5).contains(&c.n) && c.deg <= 2));
        assert!(a.iter().any(|c| c.n == 5) && a.iter().any(|c| c.n == 1));
    }

    #[test]
    fn small_suite_passes() {
        let cfg = SuiteConfig {
            count: 6,
            n_max: 4,
            seed: 1,
            ..SuiteConfig::default()
        };
        let s = run_suite(&cfg).unwrap();
        assert_eq!(s.passed, 6, "{:?}", s.entries.iter().map(|e| &e.report.failed_checks).collect::<Vec<_>>());
        assert_eq!(s.outcome(), Outcome::Pass);
        assert!(s.max_rel_diff <= 1e-8);
    }

    #[test]
    fn bad_n_max() {
        let cfg = SuiteConfig {
            n_max: 0,
            ..SuiteConfig::default()
        };
        assert!(run_suite(&cfg).is_err());
    }

    #[test]
    fn bench_rows() {
        let csv = bench_csv(2, 1, 5, &VerifyConfig { nodes: 32, ..VerifyConfig::default() }).unwrap();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("n,nodes,setup_ms"));
        assert!(lines[2].starts_with("2,32,"));
    }
}
