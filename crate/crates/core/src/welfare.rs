//! Consumer and firm welfare.
//!
//! Consumer welfare is minus the total cost consumers bear. Prices move money
//! from consumers to firms, so total welfare only reflects error disutility.

use crate::equilibrium::{EquilibriumResult, Segment};
use crate::market::{consumer_cost, Consumer, Duopoly, ErrorProfile, Firm};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelfareReport {
    /// Integral of consumer cost, prices included. Lower is better.
    pub consumer_total_cost: f64,
    /// The same integral without prices.
    pub error_disutility: f64,
    pub revenue1: f64,
    pub revenue2: f64,
    pub firm_revenue_total: f64,
    pub consumer_welfare: f64,
    pub total_welfare: f64,
}

/// Cost line `slope * alpha + intercept` of one firm's offer in one segment.
fn cost_line(segment: Segment, offer: &ErrorProfile, price: f64) -> (f64, f64) {
    match segment {
        Segment::Positive => (offer.total_error(), price),
        Segment::Negative => (offer.error_gap(), offer.fn_rate() + price),
    }
}

fn segment_cost(eq: &EquilibriumResult, d: &Duopoly, segment: Segment, with_prices: bool) -> f64 {
    let Some(split) = eq.split(segment) else {
        return 0.0;
    };
    Firm::BOTH
        .iter()
        .map(|&firm| {
            let price = if with_prices { eq.prices.get(firm) } else { 0.0 };
            let (slope, intercept) = cost_line(segment, d.firm(firm), price);
            let (lo, hi) = split.interval(firm);
            slope * (hi * hi - lo * lo) / 2.0 + intercept * (hi - lo)
        })
        .sum()
}

fn weighted_cost(eq: &EquilibriumResult, d: &Duopoly, with_prices: bool) -> f64 {
    Segment::BOTH
        .iter()
        .map(|&s| eq.mix.weight(s) * segment_cost(eq, d, s, with_prices))
        .sum()
}

/// Total cost paid by all consumers at the market split recorded in `eq`.
pub fn consumer_total_cost(eq: &EquilibriumResult, d: &Duopoly) -> f64 {
    weighted_cost(eq, d, true)
}

/// Total error disutility, i.e. consumer cost with prices removed.
pub fn error_disutility(eq: &EquilibriumResult, d: &Duopoly) -> f64 {
    weighted_cost(eq, d, false)
}

pub fn firm_welfare(eq: &EquilibriumResult) -> f64 {
    eq.revenue1 + eq.revenue2
}

pub fn welfare_report(eq: &EquilibriumResult, d: &Duopoly) -> WelfareReport {
    let cost = consumer_total_cost(eq, d);
    let revenue = firm_welfare(eq);
    WelfareReport {
        consumer_total_cost: cost,
        error_disutility: error_disutility(eq, d),
        revenue1: eq.revenue1,
        revenue2: eq.revenue2,
        firm_revenue_total: revenue,
        consumer_welfare: -cost,
        total_welfare: revenue - cost,
    }
}

/// Cost paid at equilibrium by the consumer at `alpha` in `segment`.
pub fn individual_cost(eq: &EquilibriumResult, d: &Duopoly, segment: Segment, alpha: f64) -> f64 {
    let consumer = match segment {
        Segment::Positive => Consumer::positive(alpha),
        Segment::Negative => Consumer::negative(alpha),
    }
    .expect("alpha must lie in [0, 1]");
    Firm::BOTH
        .iter()
        .map(|&f| consumer_cost(&consumer, d.firm(f), eq.prices.get(f)).expect("valid prices"))
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConsumerEffect {
    Worse,
    Better,
    Unchanged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TotalEffect {
    Up,
    Down,
    Unchanged,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelfareDelta {
    pub consumer_total_cost: f64,
    pub consumer_welfare: f64,
    pub revenue1: f64,
    pub revenue2: f64,
    pub firm_revenue_total: f64,
    pub total_welfare: f64,
    pub consumer: ConsumerEffect,
    pub total: TotalEffect,
}

pub fn welfare_delta(before: &WelfareReport, after: &WelfareReport) -> WelfareDelta {
    let cost = after.consumer_total_cost - before.consumer_total_cost;
    let total = after.total_welfare - before.total_welfare;
    WelfareDelta {
        consumer_total_cost: cost,
        consumer_welfare: after.consumer_welfare - before.consumer_welfare,
        revenue1: after.revenue1 - before.revenue1,
        revenue2: after.revenue2 - before.revenue2,
        firm_revenue_total: after.firm_revenue_total - before.firm_revenue_total,
        total_welfare: total,
        consumer: if cost > 0.0 {
            ConsumerEffect::Worse
        } else if cost < 0.0 {
            ConsumerEffect::Better
        } else {
            ConsumerEffect::Unchanged
        },
        total: if total > 0.0 {
            TotalEffect::Up
        } else if total < 0.0 {
            TotalEffect::Down
        } else {
            TotalEffect::Unchanged
        },
    }
}
