//! Entry and investment incentives.
//!
//! A firm that is strictly dominated can enter by improving one of its error
//! rates; a firm in a split market can improve the dimension it already leads
//! on. Improvements are priced by
//! `C(FP, FN, S) = g(S)/2 * [s_fp (FP - FP0)^2 + s_fn (FN - FN0)^2] + f(S)`.

use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use rayon::prelude::*;

use crate::equilibrium::{equilibrium_neg_interior, equilibrium_strict, EquilibriumResult};
use crate::error::{Error, Result};
use crate::market::{classify_regime, Duopoly, ErrorDimension, ErrorProfile, Firm, Regime};
use crate::optimize::{bisect, golden_section_max};
use crate::oracle::{finite_diff_revenue_gradient, RateId, DEFAULT_FD_STEP};

/// The data-scaling factor `g(S)`: how expensive error reductions are for a
/// model trained at size `S`.
pub trait SizeScaling: fmt::Debug + Send + Sync {
    fn name(&self) -> &'static str;
    fn value(&self, size: f64, baseline_size: f64, g0: f64) -> f64;
    fn derivative(&self, size: f64, baseline_size: f64, g0: f64) -> f64;
}

/// `g(S) = g0 * S0 / S`
#[derive(Debug, Clone, Copy, Default)]
pub struct InverseScaling;

impl SizeScaling for InverseScaling {
    fn name(&self) -> &'static str {
        "inverse"
    }
    fn value(&self, size: f64, baseline_size: f64, g0: f64) -> f64 {
        g0 * baseline_size / size
    }
    fn derivative(&self, size: f64, baseline_size: f64, g0: f64) -> f64 {
        -g0 * baseline_size / (size * size)
    }
}

/// `g(S) = g0`
#[derive(Debug, Clone, Copy, Default)]
pub struct ConstantScaling;

impl SizeScaling for ConstantScaling {
    fn name(&self) -> &'static str {
        "constant"
    }
    fn value(&self, _: f64, _: f64, g0: f64) -> f64 {
        g0
    }
    fn derivative(&self, _: f64, _: f64, _: f64) -> f64 {
        0.0
    }
}

/// `g(S) = g0 * exp(-(S - S0) / S0)`
#[derive(Debug, Clone, Copy, Default)]
pub struct ExponentialScaling;

impl SizeScaling for ExponentialScaling {
    fn name(&self) -> &'static str {
        "exponential"
    }
    fn value(&self, size: f64, baseline_size: f64, g0: f64) -> f64 {
        g0 * (-(size - baseline_size) / baseline_size).exp()
    }
    fn derivative(&self, size: f64, baseline_size: f64, g0: f64) -> f64 {
        -self.value(size, baseline_size, g0) / baseline_size
    }
}

/// Parameters of the investment cost function.
#[derive(Debug, Clone)]
pub struct CostParams {
    pub lambda_linear: f64,
    pub lambda_convex: f64,
    pub lambda_runtime: f64,
    pub convexity_exponent: f64,
    pub g_scale: f64,
    pub s_fp: f64,
    pub s_fn: f64,
    pub baseline: ErrorProfile,
    pub baseline_size: f64,
    pub scaling: Arc<dyn SizeScaling>,
}

impl CostParams {
    /// Defaults around `baseline`: `g(S) = S0 / S` with `S0 = 1`, `p = 2`,
    /// curvatures `1 / FP0` and `1 / FN0` (1 when a baseline rate is zero),
    /// and small size costs.
    pub fn for_baseline(baseline: ErrorProfile) -> Self {
        let inv = |r: f64| if r > 0.0 { 1.0 / r } else { 1.0 };
        Self {
            lambda_linear: 0.001,
            lambda_convex: 0.01,
            lambda_runtime: 0.001,
            convexity_exponent: 2.0,
            g_scale: 1.0,
            s_fp: inv(baseline.fp_rate()),
            s_fn: inv(baseline.fn_rate()),
            baseline,
            baseline_size: 1.0,
            scaling: Arc::new(InverseScaling),
        }
    }

    /// Defaults anchored at `firm`'s current offer.
    pub fn for_firm(d: &Duopoly, firm: Firm) -> Self {
        Self::for_baseline(*d.firm(firm))
    }

    /// Re-anchors the parameters at a new baseline offer, keeping every
    /// other setting.
    pub fn rebased(&self, baseline: ErrorProfile) -> Self {
        Self {
            baseline,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let non_negative = [
            ("lambda_linear", self.lambda_linear),
            ("lambda_convex", self.lambda_convex),
            ("lambda_runtime", self.lambda_runtime),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::domain(format!("{name} must be non-negative, got {v}")));
            }
        }
        if !(self.convexity_exponent >= 2.0 && self.convexity_exponent.is_finite()) {
            return Err(Error::domain(format!(
                "convexity exponent must be at least 2, got {}",
                self.convexity_exponent
            )));
        }
        let positive = [
            ("g_scale", self.g_scale),
            ("s_fp", self.s_fp),
            ("s_fn", self.s_fn),
            ("baseline_size", self.baseline_size),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn g(&self, size: f64) -> f64 {
        self.scaling.value(size, self.baseline_size, self.g_scale)
    }

    pub fn g_prime(&self, size: f64) -> f64 {
        self.scaling.derivative(size, self.baseline_size, self.g_scale)
    }

    /// `f(S)`, the cost of growing the model beyond its baseline size.
    pub fn size_cost(&self, size: f64) -> f64 {
        let grow = size - self.baseline_size;
        (self.lambda_linear + self.lambda_runtime) * grow
            + self.lambda_convex / self.convexity_exponent * grow.powf(self.convexity_exponent)
    }

    pub fn size_cost_prime(&self, size: f64) -> f64 {
        let grow = size - self.baseline_size;
        self.lambda_linear
            + self.lambda_runtime
            + self.lambda_convex * grow.powf(self.convexity_exponent - 1.0)
    }

    pub fn curvature(&self, dim: ErrorDimension) -> f64 {
        match dim {
            ErrorDimension::FalsePositive => self.s_fp,
            ErrorDimension::FalseNegative => self.s_fn,
        }
    }

    /// `s_fp (FP - FP0)^2 + s_fn (FN - FN0)^2`
    pub fn rate_bracket(&self, target: &ErrorProfile) -> f64 {
        let dfp = target.fp_rate() - self.baseline.fp_rate();
        let dfn = target.fn_rate() - self.baseline.fn_rate();
        self.s_fp * dfp * dfp + self.s_fn * dfn * dfn
    }
}

/// Error rates and model size a firm moves to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvestmentTarget {
    pub profile: ErrorProfile,
    pub size: f64,
}

impl InvestmentTarget {
    pub fn new(fp_rate: f64, fn_rate: f64, size: f64) -> Result<Self> {
        Ok(Self {
            profile: ErrorProfile::new(fp_rate, fn_rate)?,
            size,
        })
    }
}

fn check_size(cp: &CostParams, size: f64) -> Result<()> {
    if !(size.is_finite() && size > 0.0) {
        return Err(Error::domain(format!("model size must be positive, got {size}")));
    }
    if size < cp.baseline_size {
        return Err(Error::domain(format!(
            "model size {size} is below the baseline {}; shrinking is not modelled",
            cp.baseline_size
        )));
    }
    Ok(())
}

pub fn investment_cost(cp: &CostParams, target: &InvestmentTarget) -> Result<f64> {
    check_size(cp, target.size)?;
    Ok(cp.g(target.size) / 2.0 * cp.rate_bracket(&target.profile) + cp.size_cost(target.size))
}

fn require_strict_firm1(d: &Duopoly) -> Result<()> {
    let regime = classify_regime(d);
    if regime != Regime::StrictDominationFirm1 {
        return Err(Error::WrongRegime {
            required: "strict domination by firm 1",
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
    Ok(())
}

/// Whether lowering firm 2's FN rate to `fn2_target` earns it positive
/// revenue: true exactly when firm 2 then leads on FN.
pub fn entry_fn_condition(d: &Duopoly, fn2_target: f64) -> Result<bool> {
    require_strict_firm1(d)?;
    Ok(fn2_target < d.firm1().fn_rate())
}

/// Whether lowering firm 2's FP rate to `fp2_target` earns it positive
/// revenue: with `a = fn2 - fn1` and `b = fp1 - fp2_target`, true exactly
/// when `a + 2b > 0`.
pub fn entry_fp_condition(d: &Duopoly, fp2_target: f64) -> Result<bool> {
    require_strict_firm1(d)?;
    let a = d.firm2().fn_rate() - d.firm1().fn_rate();
    let b = d.firm1().fp_rate() - fp2_target;
    Ok(a + 2.0 * b > 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryDimension {
    Fp,
    Fn,
    Indifferent,
}

/// Cheaper way in for the dominated firm: closing the FP gap needs only to
/// get within half the FN gap, closing the FN gap needs all of it.
pub fn optimal_entry_dimension(d: &Duopoly) -> Result<EntryDimension> {
    let regime = classify_regime(d);
    if !regime.is_strict() {
        return Err(Error::WrongRegime {
            required: "strict domination",
            found: regime,
        });
    }
    let fn_side = 1.5 * d.fn_spread();
    let fp_side = d.fp_spread();
    let scale = fn_side.abs().max(fp_side.abs()).max(f64::MIN_POSITIVE);
    Ok(if (fn_side - fp_side).abs() <= 1e-12 * scale {
        EntryDimension::Indifferent
    } else if fn_side > fp_side {
        EntryDimension::Fp
    } else {
        EntryDimension::Fn
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvestmentDirection {
    SuperiorDimension(ErrorDimension),
    NoInvestment,
}

/// Which rate `firm` should lower. In a split market each firm improves the
/// dimension it already leads on; a strict monopolist has nothing to gain.
pub fn investment_direction(d: &Duopoly, firm: Firm) -> Result<InvestmentDirection> {
    let regime = classify_regime(d);
    let fn_leader = match regime {
        Regime::SplitDominationFirm1FN => Firm::One,
        Regime::SplitDominationFirm2FN => Firm::Two,
        Regime::StrictDominationFirm1 if firm == Firm::One => {
            return Ok(InvestmentDirection::NoInvestment)
        }
        Regime::StrictDominationFirm2 if firm == Firm::Two => {
            return Ok(InvestmentDirection::NoInvestment)
        }
        _ => {
            return Err(Error::WrongRegime {
                required: "split domination, or strict domination by the asking firm",
                found: regime,
            })
        }
    };
    Ok(InvestmentDirection::SuperiorDimension(if firm == fn_leader {
        ErrorDimension::FalseNegative
    } else {
        ErrorDimension::FalsePositive
    }))
}

/// Gaps `(a, b) = (fn2 - fn1, fp1 - fp2)` after relabelling so that firm 1
/// leads on FN, plus the relabelled firm and rate.
fn oriented(d: &Duopoly, firm: Firm, rate: RateId) -> Result<(f64, f64, Firm, RateId)> {
    let regime = classify_regime(d);
    let (d, firm, rate) = match regime {
        Regime::SplitDominationFirm1FN => (*d, firm, rate),
        Regime::SplitDominationFirm2FN => (
            d.swapped(),
            firm.other(),
            RateId::new(rate.firm().other(), rate.dimension()),
        ),
        _ => {
            return Err(Error::WrongRegime {
                required: "split domination",
                found: regime,
            })
        }
    };
    let a = d.firm2().fn_rate() - d.firm1().fn_rate();
    let b = d.firm1().fp_rate() - d.firm2().fp_rate();
    Ok((a, b, firm, rate))
}

/// `dR/da` and `dR/db` for the FN leader (firm 1) and the FP leader (firm 2),
/// by the product rule on `R1 = alpha * p1`, `R2 = (1 - alpha) * p2`.
fn gap_partials(a: f64, b: f64, firm: Firm) -> (f64, f64) {
    let d = a + b;
    let alpha = (2.0 * a + b) / (3.0 * d);
    let (p1, p2) = ((2.0 * a + b) / 3.0, (a + 2.0 * b) / 3.0);
    let dalpha_da = b / (3.0 * d * d);
    let dalpha_db = -a / (3.0 * d * d);
    match firm {
        Firm::One => (
            dalpha_da * p1 + alpha * 2.0 / 3.0,
            dalpha_db * p1 + alpha / 3.0,
        ),
        Firm::Two => (
            -dalpha_da * p2 + (1.0 - alpha) / 3.0,
            -dalpha_db * p2 + (1.0 - alpha) * 2.0 / 3.0,
        ),
    }
}

/// A compact closed form sometimes quoted for the FN leader's own-FN
/// derivative, `-(2a - b)(b + 2D) / (3 D^2)` with `D = a + b`. It does not
/// match the composed derivative; kept for comparison only.
pub fn shortcut_fn_leader_derivative(a: f64, b: f64) -> f64 {
    let d = a + b;
    -(2.0 * a - b) * (b + 2.0 * d) / (3.0 * d * d)
}

static SHORTCUT_WARNED: AtomicBool = AtomicBool::new(false);

/// Derivative of `firm`'s split-market equilibrium revenue with respect to one
/// of the four rates.
pub fn revenue_derivative(d: &Duopoly, firm: Firm, rate: RateId) -> Result<f64> {
    let (a, b, of, orate) = oriented(d, firm, rate)?;
    let (da, db) = gap_partials(a, b, of);
    let composed = match orate {
        RateId::Fn1 => -da,
        RateId::Fn2 => da,
        RateId::Fp1 => db,
        RateId::Fp2 => -db,
    };
    if of == Firm::One && orate == RateId::Fn1 {
        let shortcut = shortcut_fn_leader_derivative(a, b);
        if let Ok(fd) = finite_diff_revenue_gradient(d, firm, rate, DEFAULT_FD_STEP) {
            if (shortcut - fd).abs() > 1e-4 * fd.abs().max(1e-12) {
                let msg = format!(
                    "shortcut own-FN derivative {shortcut:.6e} disagrees with central difference \
                     {fd:.6e}; using composed closed form {composed:.6e}"
                );
                if SHORTCUT_WARNED.swap(true, Ordering::Relaxed) {
                    log::debug!("{msg}");
                } else {
                    log::warn!("{msg}");
                }
            } else {
                return Ok(shortcut);
            }
        }
    }
    Ok(composed)
}

/// Equilibrium after an investment: the interior solution when it exists,
/// otherwise the strict-domination corner when that applies.
pub fn post_investment_equilibrium(d: &Duopoly) -> Option<EquilibriumResult> {
    equilibrium_neg_interior(d)
        .or_else(|_| equilibrium_strict(d))
        .ok()
}

/// Outcome of an investment decision.
#[derive(Debug, Clone)]
pub struct InvestmentPlan {
    pub firm: Firm,
    pub dimension: ErrorDimension,
    pub target: InvestmentTarget,
    pub cost: f64,
    pub before: EquilibriumResult,
    pub after: EquilibriumResult,
    /// Revenue change net of cost for the investing firm, revenue change for the rival.
    pub profit_change: [f64; 2],
    /// Growing the model does not pay; the size sits at its baseline.
    pub size_at_lower_bound: bool,
    pub rate_residual: f64,
    pub size_residual: f64,
    pub rounds: usize,
}

impl InvestmentPlan {
    pub fn profit_change(&self, firm: Firm) -> f64 {
        self.profit_change[firm.index() - 1]
    }
}

const MAX_ROUNDS: usize = 500;
const RESIDUAL_TOL: f64 = 1e-6;

/// Optimal rate and size for `firm` in a split market when it improves its
/// leading dimension: alternates a bisection on the rate condition
/// `dR/dr = g(S) s (r - r0)` with a golden-section search over size.
pub fn optimal_interior_investment(d: &Duopoly, firm: Firm, cp: &CostParams) -> Result<InvestmentPlan> {
    cp.validate()?;
    let dim = match investment_direction(d, firm)? {
        InvestmentDirection::SuperiorDimension(dim) => dim,
        InvestmentDirection::NoInvestment => {
            return Err(Error::WrongRegime {
                required: "split domination",
                found: classify_regime(d),
            })
        }
    };
    let before = equilibrium_neg_interior(d)?;
    let rate_id = RateId::new(firm, dim);
    let r0 = d.firm(firm).rate(dim);
    let s = cp.curvature(dim);
    let profile_at = |r: f64| d.firm(firm).with_rate(dim, r);
    let revenue_slope = |r: f64| -> Result<f64> {
        let moved = d.with_rate(firm, dim, r)?;
        revenue_derivative(&moved, firm, rate_id)
    };
    let rate_foc = |r: f64, g: f64| -> f64 {
        revenue_slope(r).map_or(f64::NAN, |slope| slope - g * s * (r - cp.baseline.rate(dim)))
    };
    let size_foc = |size: f64, bracket: f64| 0.5 * cp.g_prime(size) * bracket + cp.size_cost_prime(size);

    let mut size = cp.baseline_size;
    let mut rate = r0;
    let mut residuals = (f64::INFINITY, f64::INFINITY);
    let mut at_lower = false;
    let mut rounds = 0;
    while rounds < MAX_ROUNDS {
        rounds += 1;
        let g = cp.g(size);
        if rate_foc(0.0, g) < 0.0 {
            return Err(Error::NoInteriorSolution(format!(
                "profit still rises as the {} rate reaches 0 (size {size})",
                dim_name(dim)
            )));
        }
        rate = bisect(|r| rate_foc(r, g), 0.0, r0, 1e-15, 200).ok_or_else(|| {
            Error::NoInteriorSolution("rate condition has no root in [0, current rate]".into())
        })?;
        let bracket = cp.rate_bracket(&profile_at(rate)?);
        let new_size = if size_foc(cp.baseline_size, bracket) >= 0.0 {
            at_lower = true;
            cp.baseline_size
        } else {
            at_lower = false;
            let hi = size_upper_bound(cp, bracket, &size_foc)?;
            let coarse = golden_section_max(
                |x| -(cp.g(x) / 2.0 * bracket + cp.size_cost(x)),
                cp.baseline_size,
                hi,
                1e-9 * hi,
            )
            .0;
            // golden section only locates a flat maximum to about sqrt(eps);
            // finish on the first-order condition, which is increasing in S
            let w = 1e-6 * hi;
            let (lo_b, hi_b) = ((coarse - w).max(cp.baseline_size), (coarse + w).min(hi));
            bisect(|x| size_foc(x, bracket), lo_b, hi_b, 0.0, 200)
                .or_else(|| bisect(|x| size_foc(x, bracket), cp.baseline_size, hi, 0.0, 200))
                .unwrap_or(coarse)
        };
        let size_res = if at_lower { 0.0 } else { size_foc(new_size, bracket).abs() };
        let rate_res = rate_foc(rate, cp.g(new_size)).abs();
        size = new_size;
        residuals = (rate_res, size_res);
        if rate_res < RESIDUAL_TOL && size_res < RESIDUAL_TOL {
            break;
        }
    }
    if residuals.0 >= RESIDUAL_TOL || residuals.1 >= RESIDUAL_TOL {
        return Err(Error::NoInteriorSolution(format!(
            "alternating solve stopped after {rounds} rounds with residuals {residuals:?}"
        )));
    }
    let target = InvestmentTarget {
        profile: profile_at(rate)?,
        size,
    };
    let cost = investment_cost(cp, &target)?;
    let after = equilibrium_neg_interior(&d.with_profile(firm, target.profile)?)?;
    let mut profit_change = [0.0; 2];
    for f in Firm::BOTH {
        profit_change[f.index() - 1] = after.revenue(f) - before.revenue(f);
    }
    profit_change[firm.index() - 1] -= cost;
    Ok(InvestmentPlan {
        firm,
        dimension: dim,
        target,
        cost,
        before,
        after,
        profit_change,
        size_at_lower_bound: at_lower,
        rate_residual: residuals.0,
        size_residual: residuals.1,
        rounds,
    })
}

fn dim_name(dim: ErrorDimension) -> &'static str {
    match dim {
        ErrorDimension::FalsePositive => "FP",
        ErrorDimension::FalseNegative => "FN",
    }
}

fn size_upper_bound(cp: &CostParams, bracket: f64, foc: &dyn Fn(f64, f64) -> f64) -> Result<f64> {
    let mut hi = 2.0 * cp.baseline_size;
    for _ in 0..200 {
        if foc(hi, bracket) > 0.0 {
            return Ok(hi);
        }
        hi *= 2.0;
    }
    Err(Error::NoInteriorSolution(
        "size cost never outgrows the scaling benefit".into(),
    ))
}

/// Brute-force check of the investment optimum: profit on a
/// `rate_points x size_points` grid over `[0, r0] x [S0, size_hi]`.
/// Ties go to the lowest flat index (rate-major).
pub fn investment_grid_search(
    d: &Duopoly,
    firm: Firm,
    cp: &CostParams,
    rate_points: usize,
    size_points: usize,
    size_hi: f64,
) -> Result<(InvestmentTarget, f64)> {
    let dim = match investment_direction(d, firm)? {
        InvestmentDirection::SuperiorDimension(dim) => dim,
        InvestmentDirection::NoInvestment => {
            return Err(Error::domain("nothing to search for a strict monopolist"))
        }
    };
    if rate_points < 2 || size_points < 2 || !(size_hi > cp.baseline_size) {
        return Err(Error::domain("grid needs at least 2 points per axis and size_hi above baseline"));
    }
    let r0 = d.firm(firm).rate(dim);
    let rate = |i: usize| r0 * i as f64 / (rate_points - 1) as f64;
    let size = |j: usize| {
        cp.baseline_size + (size_hi - cp.baseline_size) * j as f64 / (size_points - 1) as f64
    };
    let revenue: Vec<f64> = (0..rate_points)
        .into_par_iter()
        .map(|i| {
            d.with_rate(firm, dim, rate(i))
                .ok()
                .and_then(|m| post_investment_equilibrium(&m))
                .map_or(0.0, |e| e.revenue(firm))
        })
        .collect();
    let profits: Vec<f64> = (0..rate_points * size_points)
        .into_par_iter()
        .map(|ij| {
            let (i, j) = (ij / size_points, ij % size_points);
            let profile = d.firm(firm).with_rate(dim, rate(i)).expect("grid rates lie in [0, r0]");
            let cost = cp.g(size(j)) / 2.0 * cp.rate_bracket(&profile) + cp.size_cost(size(j));
            revenue[i] - cost
        })
        .collect();
    let best = profits
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (k, &v)| if v > b.1 { (k, v) } else { b });
    let (i, j) = (best.0 / size_points, best.0 % size_points);
    Ok((
        InvestmentTarget {
            profile: d.firm(firm).with_rate(dim, rate(i))?,
            size: size(j),
        },
        best.1,
    ))
}

/// Net value to firm 2 of moving to `target` when firm 1 strictly dominates:
/// post-entry equilibrium revenue (zero when no equilibrium gives it a
/// positive share) minus the cost of getting there.
pub fn evaluate_entry_plan(d: &Duopoly, target: &InvestmentTarget, cp: &CostParams) -> Result<f64> {
    let regime = classify_regime(d);
    if regime != Regime::StrictDominationFirm1 {
        return Err(Error::WrongRegime {
            required: "strict domination by firm 1",
            found: regime,
        });
    }
    cp.validate()?;
    let cost = investment_cost(cp, target)?;
    let revenue = d
        .with_profile(Firm::Two, target.profile)
        .ok()
        .and_then(|after| post_investment_equilibrium(&after))
        .map_or(0.0, |e| e.revenue2);
    Ok(revenue - cost)
}
