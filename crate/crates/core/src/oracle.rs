//! Brute-force checks that share no algebra with the closed forms.
//!
//! Consumers sit on the midpoints `alpha_k = (k + 0.5) / N` of a uniform grid
//! and each one buys from the firm with the lower cost under
//! [`consumer_cost`], ties going to firm 1. Everything else (revenues, grid
//! best responses, grid Nash sets) is built on that count.

use rayon::prelude::*;

use crate::equilibrium::{equilibrium_neg_interior, PopulationMix, Segment};
use crate::error::{Error, Result};
use crate::market::{
    classify_regime, consumer_cost, Consumer, Duopoly, ErrorDimension, Firm, PricePair,
};

pub const MIN_CONSUMER_POINTS: usize = 1_000;
pub const MIN_PRICE_POINTS: usize = 100;

/// Discretisation of consumers and of the price axis `[0, price_cap]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    consumer_points: usize,
    price_points: usize,
    price_cap: f64,
}

impl GridSpec {
    pub fn new(consumer_points: usize, price_points: usize, price_cap: f64) -> Result<Self> {
        if consumer_points < MIN_CONSUMER_POINTS {
            return Err(Error::domain(format!(
                "consumer_points must be at least {MIN_CONSUMER_POINTS}, got {consumer_points}"
            )));
        }
        if price_points < MIN_PRICE_POINTS {
            return Err(Error::domain(format!(
                "price_points must be at least {MIN_PRICE_POINTS}, got {price_points}"
            )));
        }
        if !(price_cap.is_finite() && price_cap > 0.0) {
            return Err(Error::domain(format!("price range [0, {price_cap}] is degenerate")));
        }
        Ok(Self {
            consumer_points,
            price_points,
            price_cap,
        })
    }

    /// Grid spanning `[0, d.price_cap()]`.
    pub fn for_duopoly(d: &Duopoly, consumer_points: usize, price_points: usize) -> Result<Self> {
        Self::new(consumer_points, price_points, d.price_cap())
    }

    pub fn consumer_points(&self) -> usize {
        self.consumer_points
    }

    pub fn price_points(&self) -> usize {
        self.price_points
    }

    pub fn price_cap(&self) -> f64 {
        self.price_cap
    }

    pub fn price_step(&self) -> f64 {
        self.price_cap / (self.price_points - 1) as f64
    }

    pub fn price(&self, index: usize) -> f64 {
        if index + 1 == self.price_points {
            self.price_cap
        } else {
            self.price_step() * index as f64
        }
    }

    pub fn prices(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.price_points).map(|i| self.price(i))
    }

    pub fn alpha(&self, k: usize) -> f64 {
        (k as f64 + 0.5) / self.consumer_points as f64
    }

    /// Revenue tolerance when comparing grid deviations: one consumer's worth
    /// of revenue at the cap, the smallest revenue change the grid resolves.
    pub fn revenue_slack(&self) -> f64 {
        self.price_cap / self.consumer_points as f64
    }

    /// Same discretisation with `price_points` doubled in intervals, so the
    /// old grid is a subset of the new one.
    pub fn refined(&self) -> Self {
        Self {
            price_points: 2 * self.price_points - 1,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketOutcome {
    pub share1: f64,
    pub share2: f64,
    pub revenue1: f64,
    pub revenue2: f64,
}

impl MarketOutcome {
    fn from_share(share1: f64, prices: &PricePair) -> Self {
        Self {
            share1,
            share2: 1.0 - share1,
            revenue1: share1 * prices.p1,
            revenue2: (1.0 - share1) * prices.p2,
        }
    }

    pub fn revenue(&self, firm: Firm) -> f64 {
        match firm {
            Firm::One => self.revenue1,
            Firm::Two => self.revenue2,
        }
    }
}

fn grid_consumer(segment: Segment, alpha: f64) -> Consumer {
    let consumer = match segment {
        Segment::Positive => Consumer::positive(alpha),
        Segment::Negative => Consumer::negative(alpha),
    };
    consumer.expect("midpoint grid consumers lie inside the unit square")
}

fn prefers_firm1(segment: Segment, alpha: f64, prices: &PricePair, d: &Duopoly) -> bool {
    let c = grid_consumer(segment, alpha);
    let cost = |firm: Firm| {
        consumer_cost(&c, d.firm(firm), prices.get(firm)).expect("prices are validated")
    };
    cost(Firm::One) <= cost(Firm::Two)
}

/// Enumerates every grid consumer in every populated segment.
pub fn simulate_market(prices: &PricePair, d: &Duopoly, mix: &PopulationMix, g: &GridSpec) -> MarketOutcome {
    let n = g.consumer_points();
    let mut share1 = 0.0;
    for segment in Segment::BOTH {
        let w = mix.weight(segment);
        if w == 0.0 {
            continue;
        }
        let count = (0..n)
            .filter(|&k| prefers_firm1(segment, g.alpha(k), prices, d))
            .count();
        share1 += w * count as f64 / n as f64;
    }
    MarketOutcome::from_share(share1, prices)
}

/// Counts firm-1 buyers in one segment by bisection. The cost difference is
/// affine in `alpha`, so the buyers form a prefix or a suffix of the grid.
fn count_firm1(segment: Segment, prices: &PricePair, d: &Duopoly, g: &GridSpec) -> usize {
    let n = g.consumer_points();
    let at = |k: usize| prefers_firm1(segment, g.alpha(k), prices, d);
    let (first, last) = (at(0), at(n - 1));
    if first == last {
        return if first { n } else { 0 };
    }
    // invariant: at(lo) == first, at(hi) != first
    let (mut lo, mut hi) = (0usize, n - 1);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if at(mid) == first {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if first {
        lo + 1
    } else {
        n - hi
    }
}

/// Same result as [`simulate_market`] in `O(log N)` cost evaluations.
pub fn simulate_market_fast(
    prices: &PricePair,
    d: &Duopoly,
    mix: &PopulationMix,
    g: &GridSpec,
) -> MarketOutcome {
    let n = g.consumer_points() as f64;
    let share1 = Segment::BOTH
        .iter()
        .filter(|s| mix.weight(**s) > 0.0)
        .map(|s| mix.weight(*s) * count_firm1(*s, prices, d, g) as f64 / n)
        .sum();
    MarketOutcome::from_share(share1, prices)
}

/// Grid price maximising `firm`'s simulated revenue; ties go to the lowest price.
pub fn best_response_grid(
    firm: Firm,
    other_price: f64,
    d: &Duopoly,
    mix: &PopulationMix,
    g: &GridSpec,
) -> f64 {
    let base = PricePair {
        p1: other_price,
        p2: other_price,
    };
    let revenues: Vec<f64> = (0..g.price_points())
        .into_par_iter()
        .map(|i| simulate_market_fast(&base.with(firm, g.price(i)), d, mix, g).revenue(firm))
        .collect();
    let best = argmax_lowest(&revenues);
    g.price(best)
}

fn argmax_lowest(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
        .0
}

/// Pure-strategy equilibria found on a price grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NashGrid {
    pub pairs: Vec<PricePair>,
    pub price_step: f64,
    pub revenue_slack: f64,
}

impl NashGrid {
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    /// Member closest to `target` in max-norm, with that distance.
    pub fn nearest(&self, target: &PricePair) -> Option<(PricePair, f64)> {
        self.pairs
            .iter()
            .map(|p| (*p, p.max_abs_diff(target)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Whether some member lies within `steps` price steps of `target`
    /// (a small relative margin absorbs rounding of the grid prices).
    pub fn contains_within(&self, target: &PricePair, steps: f64) -> bool {
        let tol = steps * self.price_step * (1.0 + 1e-9);
        self.nearest(target).is_some_and(|(_, dist)| dist <= tol)
    }

    pub fn centroid(&self) -> Option<PricePair> {
        if self.pairs.is_empty() {
            return None;
        }
        let n = self.pairs.len() as f64;
        let (s1, s2) = self
            .pairs
            .iter()
            .fold((0.0, 0.0), |acc, p| (acc.0 + p.p1, acc.1 + p.p2));
        Some(PricePair {
            p1: s1 / n,
            p2: s2 / n,
        })
    }
}

/// Every grid pair at which neither firm can gain more than
/// [`GridSpec::revenue_slack`] by moving to another grid price.
pub fn nash_grid(d: &Duopoly, mix: &PopulationMix, g: &GridSpec) -> NashGrid {
    let n = g.price_points();
    // share1[i * n + j] at prices (price(i), price(j))
    let share1: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|ij| {
            let prices = PricePair {
                p1: g.price(ij / n),
                p2: g.price(ij % n),
            };
            simulate_market_fast(&prices, d, mix, g).share1
        })
        .collect();
    let r1 = |i: usize, j: usize| share1[i * n + j] * g.price(i);
    let r2 = |i: usize, j: usize| (1.0 - share1[i * n + j]) * g.price(j);

    let best1: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|j| (0..n).map(|i| r1(i, j)).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let best2: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| r2(i, j)).fold(f64::NEG_INFINITY, f64::max))
        .collect();

    let slack = g.revenue_slack();
    let pairs = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let (best1, best2) = (&best1, &best2);
            (0..n).filter_map(move |j| {
                (r1(i, j) >= best1[j] - slack && r2(i, j) >= best2[i] - slack).then(|| PricePair {
                    p1: g.price(i),
                    p2: g.price(j),
                })
            })
        })
        .collect();
    NashGrid {
        pairs,
        price_step: g.price_step(),
        revenue_slack: slack,
    }
}

/// One of the four error rates of a duopoly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RateId {
    Fp1,
    Fn1,
    Fp2,
    Fn2,
}

impl RateId {
    pub const ALL: [RateId; 4] = [RateId::Fp1, RateId::Fn1, RateId::Fp2, RateId::Fn2];

    pub fn new(firm: Firm, dimension: ErrorDimension) -> Self {
        match (firm, dimension) {
            (Firm::One, ErrorDimension::FalsePositive) => RateId::Fp1,
            (Firm::One, ErrorDimension::FalseNegative) => RateId::Fn1,
            (Firm::Two, ErrorDimension::FalsePositive) => RateId::Fp2,
            (Firm::Two, ErrorDimension::FalseNegative) => RateId::Fn2,
        }
    }

    pub fn firm(self) -> Firm {
        match self {
            RateId::Fp1 | RateId::Fn1 => Firm::One,
            RateId::Fp2 | RateId::Fn2 => Firm::Two,
        }
    }

    pub fn dimension(self) -> ErrorDimension {
        match self {
            RateId::Fp1 | RateId::Fp2 => ErrorDimension::FalsePositive,
            RateId::Fn1 | RateId::Fn2 => ErrorDimension::FalseNegative,
        }
    }

    pub fn value(self, d: &Duopoly) -> f64 {
        d.firm(self.firm()).rate(self.dimension())
    }

    pub fn name(self) -> &'static str {
        match self {
            RateId::Fp1 => "FP1",
            RateId::Fn1 => "FN1",
            RateId::Fp2 => "FP2",
            RateId::Fn2 => "FN2",
        }
    }
}

pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Central difference of `firm`'s interior-equilibrium revenue with respect
/// to one rate, recomputing the equilibrium prices at each perturbed point.
pub fn finite_diff_revenue_gradient(d: &Duopoly, firm: Firm, rate: RateId, h: f64) -> Result<f64> {
    if !(1e-6..=1e-3).contains(&h) {
        return Err(Error::domain(format!("step h must lie in [1e-6, 1e-3], got {h}")));
    }
    let regime = classify_regime(d);
    let value = rate.value(d);
    let at = |x: f64| -> Result<f64> {
        let moved = d.with_rate(rate.firm(), rate.dimension(), x)?;
        let moved_regime = classify_regime(&moved);
        if moved_regime != regime {
            return Err(Error::domain(format!(
                "perturbing {} by {h} moves the market from {regime} to {moved_regime}",
                rate.name()
            )));
        }
        Ok(equilibrium_neg_interior(&moved)?.revenue(firm))
    };
    Ok((at(value + h)? - at(value - h)?) / (2.0 * h))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spec_validation() {
        assert!(GridSpec::new(999, 100, 1.0).is_err());
        assert!(GridSpec::new(1000, 99, 1.0).is_err());
        assert!(GridSpec::new(1000, 100, 0.0).is_err());
        let g = GridSpec::new(1000, 101, 1.0).unwrap();
        assert!((g.price_step() - 0.01).abs() < 1e-15);
        assert_eq!(g.price(100), 1.0);
        assert_eq!(g.refined().price_points(), 201);
        assert!((g.alpha(0) - 0.0005).abs() < 1e-15);
    }

    #[test]
    fn argmax_prefers_lowest_index() {
        assert_eq!(argmax_lowest(&[1.0, 3.0, 3.0, 2.0]), 1);
    }

    #[test]
    fn rate_id_round_trip() {
        for r in RateId::ALL {
            assert_eq!(RateId::new(r.firm(), r.dimension()), r);
        }
    }

    #[test]
    fn fd_step_bounds() {
        let d = Duopoly::from_rates(0.3, 0.05, 0.2, 0.1).unwrap();
        assert!(finite_diff_revenue_gradient(&d, Firm::One, RateId::Fp1, 1e-7).is_err());
        assert!(finite_diff_revenue_gradient(&d, Firm::One, RateId::Fp1, 1e-2).is_err());
    }
}
