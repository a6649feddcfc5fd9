//! Price competition between two classifiers that differ in their
//! false-positive and false-negative rates.
//!
//! Consumers pay `alpha * fp + beta * fn + price` and buy from the cheaper
//! firm. The crate computes market splits, closed-form and numerical price
//! equilibria, brute-force oracles, investment incentives and welfare.

pub mod equilibrium;
pub mod error;
pub mod investment;
pub mod market;
pub mod optimize;
pub mod oracle;
pub mod registry;
pub mod welfare;

pub use equilibrium::{
    best_response_equilibrium, deviation_gain, equilibrium_mixed, equilibrium_neg_interior, equilibrium_pos,
    equilibrium_split, equilibrium_strict, indifferent_consumer_neg, indifferent_consumer_pos,
    reaction_neg, reaction_pos, revenues, EquilibriumResult, PopulationMix, Segment,
    SegmentSplit, SolveMethod, SolverConfig,
};
pub use error::{Error, Result};
pub use investment::{
    entry_fn_condition, entry_fp_condition, evaluate_entry_plan, investment_cost,
    investment_direction, optimal_entry_dimension, optimal_interior_investment,
    revenue_derivative, CostParams, EntryDimension, InvestmentDirection, InvestmentPlan,
    InvestmentTarget, SizeScaling,
};
pub use market::{
    classify_regime, consumer_cost, Consumer, Duopoly, ErrorDimension, ErrorProfile, Firm,
    PricePair, Regime,
};
pub use oracle::{
    best_response_grid, finite_diff_revenue_gradient, nash_grid, simulate_market, GridSpec,
    MarketOutcome, NashGrid, RateId,
};
pub use registry::{EquilibriumSolver, ScalingRegistry, SolverRegistry};
pub use welfare::{
    consumer_total_cost, firm_welfare, welfare_delta, welfare_report, WelfareDelta,
    WelfareReport,
};
