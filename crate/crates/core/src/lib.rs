//! Competitive-equilibrium solver for a knowledge economy with AI agents.
//!
//! Humans with heterogeneous knowledge sort into routine work, independent
//! production or specialized problem solving; two-layer firms match workers
//! to solvers under a time budget for answering questions. AI converts
//! compute into agents of a fixed knowledge level that slot into the same
//! production structure, either autonomously (as workers, solvers and
//! independent producers) or non-autonomously (as co-pilots only).
//!
//! The crate computes the unique competitive equilibrium of each regime —
//! occupation partition, worker/solver matching, wage schedule, rental rate
//! of compute and compute allocation — certifies it with a grid-search
//! no-arbitrage audit, and derives the comparative statics: occupational
//! displacement, winners and losers, and the output/inequality tradeoff
//! between autonomous and non-autonomous AI.
//!
//! ```
//! use kecon::{EconomyParams, KnowledgeDistribution};
//!
//! let params =
//!     EconomyParams::new(KnowledgeDistribution::uniform(), 0.5, 0.425, 10.0).unwrap();
//! let pre = kecon::solve_pre_ai(&params).unwrap();
//! let post = kecon::solve_autonomous(&params).unwrap();
//! assert_eq!(post.r, 0.425);
//! assert!(post.wage_at(1.0) > pre.wage_at(1.0));
//! ```

pub mod analysis;
pub mod autonomous;
pub mod distributions;
pub mod model;
pub mod non_autonomous;
pub mod numerics;
pub mod pre_ai;

pub use analysis::{
    autonomy_tradeoff, compare_pre_post, find_zbar, gini_of, gini_of_wage, summarize,
    AnalysisError, ComparisonReport, Displacement, EquilibriumSummary, TradeoffReport,
};
pub use autonomous::{check_abundance, compute_allocation, solve_autonomous};
pub use distributions::{DistError, DistKind, KnowledgeDistribution};
pub use model::{
    accounting, audit_no_arbitrage, firm_profit, span, Accounts, AuditReport, ComputeAllocation,
    EconomyParams, Equilibrium, FirmKind, ModelError, Occupation, OccupationPartition,
    PartitionSegment, Regime, SegmentForm, SolveError, SolverSettings, WageSchedule, WageSegment,
    CERT_TOL,
};
pub use non_autonomous::solve_non_autonomous;
pub use numerics::{
    find_root_bracketed, integrate_adaptive, solve_matching_ode, GridFunction, NumericsError,
};
pub use pre_ai::{compute_h0, solve_pre_ai};
