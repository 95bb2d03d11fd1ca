//! Gibbs-OT: a simulated-annealing Gibbs sampler over the dual of discrete
//! optimal transport, usable as an inexact, warm-startable gradient oracle
//! for Wasserstein loss minimization.
//!
//! The crate bundles:
//!
//! - [`measure`] / [`cost`] / [`plan`]: discrete measures on the simplex,
//!   cost-matrix constructors (Euclidean powers, capped Coulomb), transport
//!   plans and their evaluation.
//! - [`exact`]: a transportation-simplex LP solver used as ground truth.
//! - [`sampler`]: the annealed Gibbs chain over dual potentials, with
//!   counter-based deterministic randomness, mixing diagnostics, sparse
//!   primal recovery and the `(U, -L)` gradient pair.
//! - [`analysis`]: finite-time annealing diagnostics: conditional-mean
//!   statistics, expected drift, critical temperature, martingale residuals
//!   and Hoeffding-style concentration bounds.
//! - [`sinkhorn`]: a log-domain entropic-regularization baseline.
//! - [`nmf`]: Wasserstein NMF trained through the sampler oracle with
//!   entropic mirror-descent updates.
//!
//! All randomness is a pure function of `(seed, stream, half-step, slot)`,
//! so results are bit-identical regardless of thread count. The `parallel`
//! feature (default) enables rayon data parallelism across chains, Monte
//! Carlo replicas and NMF instances; without it every code path runs
//! sequentially with identical output.

pub mod analysis;
pub mod cost;
pub mod error;
pub mod exact;
pub mod io;
pub mod measure;
pub mod nmf;
pub mod parallel;
pub mod plan;
pub mod presets;
pub mod rng;
pub mod runner;
pub mod sampler;
pub mod schedule;
pub mod sinkhorn;

pub use cost::{coulomb_cost, euclidean_cost, CostKind, CostMatrix};
pub use error::{Error, Result};
pub use exact::{solve_exact, ExactSolution};
pub use measure::{make_measure, DiscreteMeasure, WEIGHT_FLOOR};
pub use plan::{PlanSource, TransportPlan};
pub use rng::RngKey;
pub use sampler::{init_chain, run_until_mixed, ChainState, MixReport, OtProblem};
pub use schedule::TemperatureSchedule;
