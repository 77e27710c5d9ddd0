//! Reproducible experiment driver for the branching random walk laboratory.
//!
//! * [`config`] — the experiment configuration document, its defaults,
//!   validation and content hash.
//! * [`driver`] — the `simulate`, `limit-sample` and `formulas` runs: seed
//!   derivation, replicate parallelism, CSV and manifest emission.
//! * [`verify`] — the acceptance suite: every criterion pinned with its
//!   tolerances, one pass/fail outcome per criterion.

// Validation deliberately uses negated comparisons like `!(x > 0.0)` so
// that NaN arguments are rejected alongside out-of-range ones.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod driver;
pub mod verify;

/// Process exit codes of the driver.
pub mod exit_codes {
    pub const SUCCESS: i32 = 0;
    pub const CRITERION_FAILURE: i32 = 1;
    pub const CONFIG_ERROR: i32 = 2;
    pub const RESOURCE_ERROR: i32 = 3;
}

pub fn exit_code_for(err: &brwlab_core::Error) -> i32 {
    match err {
        brwlab_core::Error::Config(_) | brwlab_core::Error::Domain(_) => exit_codes::CONFIG_ERROR,
        brwlab_core::Error::Resource(_) | brwlab_core::Error::Io(_) => exit_codes::RESOURCE_ERROR,
    }
}
