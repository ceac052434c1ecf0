//! Exact, asymptotic and simulated distributions of two statistics of random
//! binary search trees under the random permutation model:
//!
//! * the pass count of multiple selection (equivalently, the size of the
//!   subtree spanning the root plus p random nodes), and
//! * the size of the minimal subtree spanning p random nodes.
//!
//! The crate provides exact integer/rational dynamic-programming tables, an
//! exhaustive enumeration oracle, closed-form generating-function evaluation
//! with quadrature, exact closed-form moments with their asymptotic
//! expansions, deterministic Monte-Carlo drivers, and goodness-of-fit
//! machinery for the Gaussian limit behavior.

pub mod closedform;
pub mod combinatorics;
pub mod exactdist;
pub mod moments;
pub mod mqs;
pub mod stats;
pub mod treesim;

pub use combinatorics::Rational;
pub use exactdist::{Kind, TableMoments, WeightedDistTable};
pub use moments::{AsymptoticConstants, MomentReport, QuasiPowerModel};
pub use mqs::{MqsBatchSummary, MqsResult};
pub use stats::GofReport;
pub use treesim::{BstInstance, SimMethod, SimSummary};
