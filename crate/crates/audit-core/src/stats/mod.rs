//! Base hypothesis tests used by the audit protocol.

pub mod binary_tests;
pub mod special;
pub mod wasserstein;

pub use binary_tests::{
    chi2_one_sample, chi2_two_sample, mean_test_one_sample, mean_test_two_sample, StatError,
    TestKind, TestResult,
};
pub use wasserstein::{wasserstein_1d, wasserstein_perm_test};
