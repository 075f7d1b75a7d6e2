//! Instances, generators and the end-to-end verifier.

pub mod generate;
pub mod instance;
pub mod rng;
pub mod suite;
pub mod verify;

pub use generate::{gen_random, gen_tasep};
pub use instance::{bridge_residual, Instance};
pub use rng::InstanceRng;
pub use suite::{bench_csv, run_suite, suite_cases, SuiteCase, SuiteConfig, SuiteEntry, SuiteSummary};
pub use verify::{verify_identity, Outcome, Tolerances, VariantGaps, VerificationReport, VerifyConfig};
