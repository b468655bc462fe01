//! Experiments built on the other modules: chaos curves and the bounds they
//! are checked against, coefficient audits, the counterexample suite and
//! the heavy-tailed size sweep.

mod audit;
mod bounds;
mod curve;
mod levy;

pub use audit::{
    coefficient_audit, conditional_mean_check, counterexample_suite, hypertree_ball_radius, pair_functional,
    semigroup_check, AuditEntry, AuditReport, AuditSettings, ConditionalMeanReport, CounterexampleReport,
    CounterexampleSettings, IdentityCheck, SemigroupRow, SemigroupSettings,
};
pub use bounds::{
    bound_checks_csv, general_bound, lower_bound_checks, monotonicity_check, theorem_bound_check, BoundCheck,
    BoundConstants, BoundTag, MonotonicityReport, MonotonicityViolation,
};
pub use curve::{chaos_curve, ChaosCurve, ChaosModel, CurvePoint, DisorderLayout, GraphSource, Solver};
pub use levy::{default_levy_t0, levy_chaos, LevyFit, LevyReport, LEVY_EXACT_CAP, LEVY_MCMC_CAP};
