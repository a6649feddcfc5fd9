//! Market clearing and price equilibria.
//!
//! Consumers come in two segments. In the positively correlated segment a
//! consumer has `beta = alpha`, so only a firm's total error `F = fp + fn`
//! matters; in the negatively correlated segment `beta = 1 - alpha` and the
//! cost becomes `alpha * (fp - fn) + fn + p`. In both segments the cost
//! difference between the two firms is affine in `alpha`, so every segment is
//! split by a single indifferent consumer.
//!
//! Closed forms cover the pure segments; [`equilibrium_mixed`] handles a blend
//! of the two by damped best-response iteration.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::market::{classify_regime, Duopoly, Firm, PricePair, Regime};
use crate::optimize::scan_then_golden;

/// Share `zeta` of consumers with `beta = alpha`; the rest have `beta = 1 - alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationMix {
    zeta: f64,
}

impl PopulationMix {
    pub fn new(zeta: f64) -> Result<Self> {
        if zeta.is_finite() && (0.0..=1.0).contains(&zeta) {
            Ok(Self { zeta })
        } else {
            Err(Error::domain(format!("zeta must lie in [0, 1], got {zeta}")))
        }
    }

    /// Everyone has negatively correlated sensitivities.
    pub fn negative() -> Self {
        Self { zeta: 0.0 }
    }

    /// Everyone has positively correlated sensitivities.
    pub fn positive() -> Self {
        Self { zeta: 1.0 }
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn weight(&self, segment: Segment) -> f64 {
        match segment {
            Segment::Positive => self.zeta,
            Segment::Negative => 1.0 - self.zeta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Segment {
    /// `beta = alpha`
    Positive,
    /// `beta = 1 - alpha`
    Negative,
}

impl Segment {
    pub const BOTH: [Segment; 2] = [Segment::Positive, Segment::Negative];

    /// Slope and intercept of `cost1(alpha) - cost2(alpha)` in this segment.
    pub(crate) fn cost_gap(self, prices: &PricePair, d: &Duopoly) -> (f64, f64) {
        match self {
            Segment::Positive => (d.total_error_diff(), prices.p1 - prices.p2),
            Segment::Negative => (
                d.error_gap_diff(),
                prices.p1 - prices.p2 + d.firm1().fn_rate() - d.firm2().fn_rate(),
            ),
        }
    }
}

/// How one segment divides between the firms.
///
/// `boundary` is the indifferent consumer in raw `alpha` coordinates. Firm 1
/// serves `[0, boundary]` when `firm1_low`, otherwise `[boundary, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentSplit {
    boundary: f64,
    firm1_low: bool,
}

impl SegmentSplit {
    /// Splits a segment whose cost difference is `slope * alpha + intercept`.
    /// Firm 1 wins wherever the difference is `<= 0`. A flat difference of
    /// exactly zero splits the segment evenly.
    pub(crate) fn from_cost_gap(slope: f64, intercept: f64) -> Self {
        if slope == 0.0 {
            let boundary = if intercept < 0.0 {
                1.0
            } else if intercept > 0.0 {
                0.0
            } else {
                0.5
            };
            return Self {
                boundary,
                firm1_low: true,
            };
        }
        Self {
            boundary: (-intercept / slope).clamp(0.0, 1.0),
            firm1_low: slope > 0.0,
        }
    }

    pub fn boundary(&self) -> f64 {
        self.boundary
    }

    pub fn firm1_low(&self) -> bool {
        self.firm1_low
    }

    pub fn share1(&self) -> f64 {
        if self.firm1_low {
            self.boundary
        } else {
            1.0 - self.boundary
        }
    }

    pub fn share2(&self) -> f64 {
        1.0 - self.share1()
    }

    /// Mass of consumers buying from firm 1; equals the indifferent consumer
    /// once `alpha` is oriented so that firm 1 serves the low end.
    pub fn indifferent_alpha(&self) -> f64 {
        self.share1()
    }

    /// Interval of `alpha` served by `firm`.
    pub fn interval(&self, firm: Firm) -> (f64, f64) {
        let low = (0.0, self.boundary);
        let high = (self.boundary, 1.0);
        match (firm, self.firm1_low) {
            (Firm::One, true) | (Firm::Two, false) => low,
            _ => high,
        }
    }
}

pub fn segment_split(segment: Segment, prices: &PricePair, d: &Duopoly) -> SegmentSplit {
    let (slope, intercept) = segment.cost_gap(prices, d);
    SegmentSplit::from_cost_gap(slope, intercept)
}

/// Indifferent consumer of the positively correlated segment.
pub fn indifferent_consumer_pos(prices: &PricePair, d: &Duopoly) -> Result<f64> {
    if d.total_error_diff() == 0.0 {
        return Err(Error::Degenerate(
            "equal total errors: the positively correlated segment has no indifferent consumer"
                .into(),
        ));
    }
    Ok(segment_split(Segment::Positive, prices, d).indifferent_alpha())
}

/// Indifferent consumer of the negatively correlated segment.
pub fn indifferent_consumer_neg(prices: &PricePair, d: &Duopoly) -> Result<f64> {
    if d.error_gap_diff() == 0.0 {
        return Err(Error::Degenerate(
            "equal error gaps: the negatively correlated segment has no indifferent consumer"
                .into(),
        ));
    }
    Ok(segment_split(Segment::Negative, prices, d).indifferent_alpha())
}

/// Firm 1's market share across the whole population.
pub fn market_share1(prices: &PricePair, d: &Duopoly, mix: &PopulationMix) -> f64 {
    Segment::BOTH
        .iter()
        .filter(|s| mix.weight(**s) > 0.0)
        .map(|s| mix.weight(*s) * segment_split(*s, prices, d).share1())
        .sum()
}

pub fn revenues(prices: &PricePair, d: &Duopoly, mix: &PopulationMix) -> (f64, f64) {
    let s1 = market_share1(prices, d, mix);
    (s1 * prices.p1, (1.0 - s1) * prices.p2)
}

pub fn revenue(firm: Firm, prices: &PricePair, d: &Duopoly, mix: &PopulationMix) -> f64 {
    let (r1, r2) = revenues(prices, d, mix);
    match firm {
        Firm::One => r1,
        Firm::Two => r2,
    }
}

/// How an equilibrium was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolveMethod {
    ClosedForm,
    BestResponse { iterations: usize },
    /// Exhaustive mutual-best-response scan after the iteration stalled.
    GridFallback { points: usize },
    /// Brute-force consumer-grid Nash search.
    GridOracle { members: usize },
}

/// Prices together with the market outcome they induce.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumResult {
    pub regime: Regime,
    pub mix: PopulationMix,
    pub prices: PricePair,
    pub positive: Option<SegmentSplit>,
    pub negative: Option<SegmentSplit>,
    pub share1: f64,
    pub share2: f64,
    pub revenue1: f64,
    pub revenue2: f64,
    pub method: SolveMethod,
}

impl EquilibriumResult {
    /// Evaluates the market at `prices`.
    pub fn at_prices(d: &Duopoly, mix: PopulationMix, prices: PricePair, method: SolveMethod) -> Self {
        let split_if = |s: Segment| (mix.weight(s) > 0.0).then(|| segment_split(s, &prices, d));
        let share1 = market_share1(&prices, d, &mix);
        Self {
            regime: classify_regime(d),
            mix,
            prices,
            positive: split_if(Segment::Positive),
            negative: split_if(Segment::Negative),
            share1,
            share2: 1.0 - share1,
            revenue1: share1 * prices.p1,
            revenue2: (1.0 - share1) * prices.p2,
            method,
        }
    }

    pub fn revenue(&self, firm: Firm) -> f64 {
        match firm {
            Firm::One => self.revenue1,
            Firm::Two => self.revenue2,
        }
    }

    pub fn share(&self, firm: Firm) -> f64 {
        match firm {
            Firm::One => self.share1,
            Firm::Two => self.share2,
        }
    }

    pub fn split(&self, segment: Segment) -> Option<&SegmentSplit> {
        match segment {
            Segment::Positive => self.positive.as_ref(),
            Segment::Negative => self.negative.as_ref(),
        }
    }

    pub fn indifferent_alpha(&self, segment: Segment) -> Option<f64> {
        self.split(segment).map(SegmentSplit::indifferent_alpha)
    }

    pub(crate) fn swapped(&self, d: &Duopoly) -> Self {
        Self::at_prices(d, self.mix, self.prices.swapped(), self.method)
    }
}

fn closed_form(d: &Duopoly, mix: PopulationMix, p1: f64, p2: f64) -> EquilibriumResult {
    let cap = d.price_cap();
    let prices = PricePair {
        p1: p1.clamp(0.0, cap),
        p2: p2.clamp(0.0, cap),
    };
    EquilibriumResult::at_prices(d, mix, prices, SolveMethod::ClosedForm)
}

fn check_other_price(p: f64) -> Result<()> {
    if p.is_finite() && p >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("rival price must be non-negative, got {p}")))
    }
}

/// Best price against `other_price` when every consumer has `beta = alpha`.
///
/// The firm with the lower total error answers `(|F1 - F2| + p_other) / 2`,
/// the other firm answers `p_other / 2`.
pub fn reaction_pos(firm: Firm, other_price: f64, d: &Duopoly) -> Result<f64> {
    check_other_price(other_price)?;
    let diff = d.total_error_diff();
    if diff == 0.0 {
        return Err(Error::Degenerate(
            "equal total errors leave no interior reaction".into(),
        ));
    }
    let better = if diff > 0.0 { Firm::Two } else { Firm::One };
    let p = if firm == better {
        (diff.abs() + other_price) / 2.0
    } else {
        other_price / 2.0
    };
    Ok(p.clamp(0.0, d.price_cap()))
}

/// Best price against `other_price` when every consumer has `beta = 1 - alpha`,
/// labelled with firm 1 on the low-`alpha` side:
/// firm 1 answers `max(0, (fn2 - fn1 + p2) / 2)`, firm 2 `max(0, (fp1 - fp2 + p1) / 2)`.
pub fn reaction_neg(firm: Firm, other_price: f64, d: &Duopoly) -> Result<f64> {
    check_other_price(other_price)?;
    let (f1, f2) = (d.firm1(), d.firm2());
    let intercept = match firm {
        Firm::One => f2.fn_rate() - f1.fn_rate(),
        Firm::Two => f1.fp_rate() - f2.fp_rate(),
    };
    Ok(((intercept + other_price) / 2.0).clamp(0.0, d.price_cap()))
}

/// Equilibrium of the positively correlated market.
///
/// The firm with the lower total error charges twice the other firm's price;
/// equal total errors return the price cap for both firms.
pub fn equilibrium_pos(d: &Duopoly) -> EquilibriumResult {
    let diff = d.total_error_diff();
    let mix = PopulationMix::positive();
    if diff > 0.0 {
        closed_form(d, mix, diff / 3.0, 2.0 * diff / 3.0)
    } else if diff < 0.0 {
        closed_form(d, mix, -2.0 * diff / 3.0, -diff / 3.0)
    } else {
        closed_form(d, mix, d.price_cap(), d.price_cap())
    }
}

/// Interior equilibrium of the negatively correlated market.
///
/// After orienting the labels so that firm 1 serves the low-`alpha` end, with
/// `a = fn2 - fn1` and `b = fp1 - fp2` the prices are
/// `((2a + b) / 3, (a + 2b) / 3)`. Valid whenever both are positive; this
/// covers split domination and post-entry markets where the entrant has
/// closed enough of its gap.
pub fn equilibrium_neg_interior(d: &Duopoly) -> Result<EquilibriumResult> {
    let slope = d.error_gap_diff();
    if slope == 0.0 {
        return Err(Error::Degenerate(
            "equal error gaps leave no interior equilibrium".into(),
        ));
    }
    if slope < 0.0 {
        let swapped = d.swapped();
        return equilibrium_neg_interior(&swapped).map(|r| r.swapped(d));
    }
    let a = d.firm2().fn_rate() - d.firm1().fn_rate();
    let b = d.firm1().fp_rate() - d.firm2().fp_rate();
    let (p1, p2) = ((2.0 * a + b) / 3.0, (a + 2.0 * b) / 3.0);
    if p1 <= 0.0 || p2 <= 0.0 {
        return Err(Error::Assumption(format!(
            "no interior equilibrium: closed-form prices ({p1}, {p2}) are not both positive"
        )));
    }
    Ok(closed_form(d, PopulationMix::negative(), p1, p2))
}

/// Split-domination equilibrium of the negatively correlated market.
pub fn equilibrium_split(d: &Duopoly) -> Result<EquilibriumResult> {
    let regime = classify_regime(d);
    if !regime.is_split() {
        return Err(Error::WrongRegime {
            required: "split domination",
            found: regime,
        });
    }
    equilibrium_neg_interior(d)
}

/// Strict-domination equilibrium of the negatively correlated market: the
/// dominated firm prices at zero and the dominant firm charges half the FN gap.
///
/// Requires FN rates to be less dispersed than FP rates.
pub fn equilibrium_strict(d: &Duopoly) -> Result<EquilibriumResult> {
    let regime = classify_regime(d);
    if !regime.is_strict() {
        return Err(Error::WrongRegime {
            required: "strict domination",
            found: regime,
        });
    }
    if !d.fn_less_volatile() {
        return Err(Error::Assumption(format!(
            "FN spread {} is not below FP spread {}",
            d.fn_spread(),
            d.fp_spread()
        )));
    }
    let half_gap = d.fn_spread() / 2.0;
    let mix = PopulationMix::negative();
    Ok(match regime {
        Regime::StrictDominationFirm1 => closed_form(d, mix, half_gap, 0.0),
        _ => closed_form(d, mix, 0.0, half_gap),
    })
}

/// Settings for the numerical equilibrium of a mixed population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Weight on the new best response in each update.
    pub damping: f64,
    /// Stop once successive price vectors differ by less than this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Points per axis of the mutual-best-response fallback scan.
    pub fallback_grid_points: usize,
    /// Coarse scan points before golden-section refinement of a best response.
    pub scan_points: usize,
    pub golden_tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            damping: 0.5,
            tolerance: 1e-8,
            max_iterations: 10_000,
            fallback_grid_points: 2000,
            scan_points: 200,
            golden_tolerance: 1e-13,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::domain(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        if !(self.tolerance > 0.0 && self.golden_tolerance > 0.0) {
            return Err(Error::domain("solver tolerances must be positive"));
        }
        if self.max_iterations == 0 || self.fallback_grid_points < 2 || self.scan_points < 3 {
            return Err(Error::domain(
                "iteration and grid counts must be positive (grids need at least 2-3 points)",
            ));
        }
        Ok(())
    }
}

/// Continuous best response of `firm` to the rival's price in a mixed population.
pub fn best_response(
    firm: Firm,
    other_price: f64,
    d: &Duopoly,
    mix: &PopulationMix,
    cfg: &SolverConfig,
) -> f64 {
    let base = PricePair { p1: other_price, p2: other_price };
    let objective = |p: f64| revenue(firm, &base.with(firm, p), d, mix);
    scan_then_golden(objective, 0.0, d.price_cap(), cfg.scan_points, cfg.golden_tolerance).0
}

/// Largest revenue gain either firm can get at `prices` by moving to its
/// continuous best response. Zero at an exact equilibrium.
pub fn deviation_gain(prices: &PricePair, d: &Duopoly, mix: &PopulationMix, cfg: &SolverConfig) -> f64 {
    Firm::BOTH
        .iter()
        .map(|&f| {
            let br = best_response(f, prices.get(f.other()), d, mix, cfg);
            revenue(f, &prices.with(f, br), d, mix) - revenue(f, prices, d, mix)
        })
        .fold(0.0, f64::max)
}

/// Numerical equilibrium for a blend of the two segments.
///
/// `zeta = 1` is answered by the closed form of the positively correlated
/// market; every other mix runs damped best-response iteration with a grid
/// fallback. Requires split domination.
pub fn equilibrium_mixed(d: &Duopoly, mix: PopulationMix, cfg: &SolverConfig) -> Result<EquilibriumResult> {
    let regime = classify_regime(d);
    if !regime.is_split() {
        return Err(Error::WrongRegime {
            required: "split domination",
            found: regime,
        });
    }
    if mix.zeta() == 1.0 {
        return Ok(equilibrium_pos(d));
    }
    best_response_equilibrium(d, mix, cfg)
}

/// Revenue gain, relative to the price cap, below which a converged
/// iterate counts as an equilibrium.
const FIXED_POINT_GAIN: f64 = 1e-8;

/// Damped best-response iteration in any regime, falling back to an
/// exhaustive mutual-best-response scan when it does not settle.
pub fn best_response_equilibrium(
    d: &Duopoly,
    mix: PopulationMix,
    cfg: &SolverConfig,
) -> Result<EquilibriumResult> {
    cfg.validate()?;
    let half = d.price_cap() / 2.0;
    let mut prices = PricePair { p1: half, p2: half };
    let mut iterations = cfg.max_iterations;
    for iteration in 1..=cfg.max_iterations {
        let br1 = best_response(Firm::One, prices.p2, d, &mix, cfg);
        let br2 = best_response(Firm::Two, prices.p1, d, &mix, cfg);
        let next = PricePair {
            p1: (1.0 - cfg.damping) * prices.p1 + cfg.damping * br1,
            p2: (1.0 - cfg.damping) * prices.p2 + cfg.damping * br2,
        };
        let step = next.max_abs_diff(&prices);
        prices = next;
        if step < cfg.tolerance {
            // a tie in the correlated segment makes "undercut by a hair" the
            // best response; iterating it settles on a point that is no
            // equilibrium, so the fixed point is checked before it is accepted
            let gain = deviation_gain(&prices, d, &mix, cfg);
            if gain <= FIXED_POINT_GAIN * d.price_cap() {
                return Ok(EquilibriumResult::at_prices(
                    d,
                    mix,
                    prices,
                    SolveMethod::BestResponse { iterations: iteration },
                ));
            }
            log::debug!("fixed point {prices:?} leaves a deviation gain of {gain:.3e}");
            iterations = iteration;
            break;
        }
    }
    log::warn!(
        "best-response iteration stalled at {prices:?} (zeta = {}); scanning {}^2 grid",
        mix.zeta(),
        cfg.fallback_grid_points
    );
    let grid_gain = 2.0 * d.price_cap() / (cfg.fallback_grid_points - 1) as f64;
    match mutual_best_response_scan(d, &mix, cfg.fallback_grid_points)
        .filter(|found| deviation_gain(found, d, &mix, cfg) <= grid_gain)
    {
        Some(found) => Ok(EquilibriumResult::at_prices(
            d,
            mix,
            found,
            SolveMethod::GridFallback {
                points: cfg.fallback_grid_points,
            },
        )),
        None => Err(Error::NoConvergence {
            iterations,
            last: prices,
        }),
    }
}

/// First grid pair (lowest p1 index) where each price is the other's exact
/// grid best response; ties in a best response go to the lowest price.
fn mutual_best_response_scan(d: &Duopoly, mix: &PopulationMix, points: usize) -> Option<PricePair> {
    let step = d.price_cap() / (points - 1) as f64;
    let price = |k: usize| step * k as f64;
    let argmax = |f: &dyn Fn(usize) -> f64| {
        (0..points).fold((0usize, f64::NEG_INFINITY), |best, k| {
            let v = f(k);
            if v > best.1 {
                (k, v)
            } else {
                best
            }
        })
        .0
    };
    let br1: Vec<usize> = (0..points)
        .into_par_iter()
        .map(|j| argmax(&|i| revenue(Firm::One, &PricePair { p1: price(i), p2: price(j) }, d, mix)))
        .collect();
    let br2: Vec<usize> = (0..points)
        .into_par_iter()
        .map(|i| argmax(&|j| revenue(Firm::Two, &PricePair { p1: price(i), p2: price(j) }, d, mix)))
        .collect();
    (0..points)
        .find(|&i| br1[br2[i]] == i)
        .map(|i| PricePair {
            p1: price(i),
            p2: price(br2[i]),
        })
}
