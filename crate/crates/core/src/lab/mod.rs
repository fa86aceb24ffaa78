//! Polarization experiments and verification suites.
//!
//! A polarization run applies every sign sequence of length `n` to a channel
//! and classifies each synthetic channel by the subgroup that δ-determines it,
//! if any. Results at finite `n` are reported as they are: a leaf that no
//! subgroup determines is "not yet polarized", never a counterexample.

mod erasure;
mod report;
mod tree;
mod trend;
pub mod verify;

pub use erasure::polarize_erasure;
pub use report::{BranchRecord, PolarizationReport, SubgroupCount, BRANCH_RECORD_CAP};
pub use tree::{polarize_tree, polarize_tree_multi, TreeOptions};
pub use trend::{open_problem_trend, TrendRow, TrendTable};
pub use verify::VerificationOutcome;

/// `δ₀ = (1/3) log 2`, in bits.
pub const DELTA_ZERO: f64 = 1.0 / 3.0;

/// `δ_qEC = (log 2)^2 / log(2q)` converted to bits, i.e. `1 / log2(2q)`.
pub fn delta_qec(q: usize) -> f64 {
    1.0 / ((2 * q) as f64).log2()
}

/// Default δ grid, in bits.
pub const DEFAULT_DELTAS: [f64; 3] = [0.1, 0.05, 0.01];
