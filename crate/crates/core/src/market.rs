//! Domain types shared by every solver: error profiles, the duopoly, consumers,
//! prices, and the dominance regime of a pair of profiles.
//!
//! A consumer with sensitivities `(alpha, beta)` who buys from a firm with
//! rates `(fp, fn)` at price `p` pays `alpha * fp + beta * fn + p`, and always
//! buys from the firm that minimises that cost.

use std::fmt;

use crate::error::{Error, Result};

/// Default maximum price when none is configured.
pub const DEFAULT_PRICE_CAP: f64 = 1.0;

fn check_unit(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must lie in [0, 1], got {value}")))
    }
}

/// The two firms of the duopoly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Firm {
    One,
    Two,
}

impl Firm {
    pub const BOTH: [Firm; 2] = [Firm::One, Firm::Two];

    pub fn other(self) -> Firm {
        match self {
            Firm::One => Firm::Two,
            Firm::Two => Firm::One,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Firm::One => 1,
            Firm::Two => 2,
        }
    }
}

impl fmt::Display for Firm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "firm {}", self.index())
    }
}

/// One of the two error dimensions a firm can invest in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorDimension {
    FalsePositive,
    FalseNegative,
}

impl fmt::Display for ErrorDimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ErrorDimension::FalsePositive => f.write_str("FP"),
            ErrorDimension::FalseNegative => f.write_str("FN"),
        }
    }
}

/// A single firm's false-positive and false-negative rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorProfile {
    fp_rate: f64,
    fn_rate: f64,
}

impl ErrorProfile {
    pub fn new(fp_rate: f64, fn_rate: f64) -> Result<Self> {
        check_unit("fp rate", fp_rate)?;
        check_unit("fn rate", fn_rate)?;
        Ok(Self { fp_rate, fn_rate })
    }

    /// Rebuilds a profile from its total error and error gap.
    pub fn from_total_and_gap(total: f64, gap: f64) -> Result<Self> {
        Self::new((total + gap) / 2.0, (total - gap) / 2.0)
    }

    pub fn fp_rate(&self) -> f64 {
        self.fp_rate
    }

    pub fn fn_rate(&self) -> f64 {
        self.fn_rate
    }

    pub fn rate(&self, dim: ErrorDimension) -> f64 {
        match dim {
            ErrorDimension::FalsePositive => self.fp_rate,
            ErrorDimension::FalseNegative => self.fn_rate,
        }
    }

    pub fn with_rate(&self, dim: ErrorDimension, value: f64) -> Result<Self> {
        match dim {
            ErrorDimension::FalsePositive => Self::new(value, self.fn_rate),
            ErrorDimension::FalseNegative => Self::new(self.fp_rate, value),
        }
    }

    /// `fp + fn`.
    pub fn total_error(&self) -> f64 {
        self.fp_rate + self.fn_rate
    }

    /// `fp - fn`.
    pub fn error_gap(&self) -> f64 {
        self.fp_rate - self.fn_rate
    }
}

pub fn total_error(profile: &ErrorProfile) -> f64 {
    profile.total_error()
}

pub fn error_gap(profile: &ErrorProfile) -> f64 {
    profile.error_gap()
}

/// Two differentiated firms and the price cap they share.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Duopoly {
    firm1: ErrorProfile,
    firm2: ErrorProfile,
    price_cap: f64,
}

impl Duopoly {
    pub fn new(firm1: ErrorProfile, firm2: ErrorProfile, price_cap: f64) -> Result<Self> {
        if !(price_cap.is_finite() && price_cap > 0.0) {
            return Err(Error::domain(format!(
                "price cap must be positive, got {price_cap}"
            )));
        }
        if firm1 == firm2 {
            return Err(Error::domain(
                "the two firms must not share the same (fp, fn) pair",
            ));
        }
        Ok(Self {
            firm1,
            firm2,
            price_cap,
        })
    }

    /// Shorthand for `(fp1, fn1, fp2, fn2)` with the default price cap.
    pub fn from_rates(fp1: f64, fn1: f64, fp2: f64, fn2: f64) -> Result<Self> {
        Self::new(
            ErrorProfile::new(fp1, fn1)?,
            ErrorProfile::new(fp2, fn2)?,
            DEFAULT_PRICE_CAP,
        )
    }

    pub fn with_price_cap(self, price_cap: f64) -> Result<Self> {
        Self::new(self.firm1, self.firm2, price_cap)
    }

    pub fn firm1(&self) -> &ErrorProfile {
        &self.firm1
    }

    pub fn firm2(&self) -> &ErrorProfile {
        &self.firm2
    }

    pub fn firm(&self, firm: Firm) -> &ErrorProfile {
        match firm {
            Firm::One => &self.firm1,
            Firm::Two => &self.firm2,
        }
    }

    pub fn price_cap(&self) -> f64 {
        self.price_cap
    }

    /// Replaces one firm's profile, re-checking differentiation.
    pub fn with_profile(&self, firm: Firm, profile: ErrorProfile) -> Result<Self> {
        match firm {
            Firm::One => Self::new(profile, self.firm2, self.price_cap),
            Firm::Two => Self::new(self.firm1, profile, self.price_cap),
        }
    }

    pub fn with_rate(&self, firm: Firm, dim: ErrorDimension, value: f64) -> Result<Self> {
        self.with_profile(firm, self.firm(firm).with_rate(dim, value)?)
    }

    /// The same market with the firm labels exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            firm1: self.firm2,
            firm2: self.firm1,
            price_cap: self.price_cap,
        }
    }

    /// `|fn2 - fn1| < |fp2 - fp1|`: FN rates differ less across firms than FP rates.
    pub fn fn_less_volatile(&self) -> bool {
        self.fn_spread() < self.fp_spread()
    }

    pub fn fp_spread(&self) -> f64 {
        (self.firm2.fp_rate - self.firm1.fp_rate).abs()
    }

    pub fn fn_spread(&self) -> f64 {
        (self.firm2.fn_rate - self.firm1.fn_rate).abs()
    }

    /// `F1 - F2`, the slope of the cost difference in the positively correlated segment.
    pub(crate) fn total_error_diff(&self) -> f64 {
        self.firm1.total_error() - self.firm2.total_error()
    }

    /// `dF1 - dF2`, the slope of the cost difference in the negatively correlated segment.
    pub(crate) fn error_gap_diff(&self) -> f64 {
        self.firm1.error_gap() - self.firm2.error_gap()
    }
}

/// A consumer's cost sensitivities to false positives (`alpha`) and false negatives (`beta`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Consumer {
    alpha: f64,
    beta: f64,
}

impl Consumer {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        check_unit("alpha", alpha)?;
        check_unit("beta", beta)?;
        Ok(Self { alpha, beta })
    }

    /// A member of the positively correlated segment (`beta = alpha`).
    pub fn positive(alpha: f64) -> Result<Self> {
        Self::new(alpha, alpha)
    }

    /// A member of the negatively correlated segment (`beta = 1 - alpha`).
    pub fn negative(alpha: f64) -> Result<Self> {
        Self::new(alpha, 1.0 - alpha)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// What a consumer pays for buying `offer` at `price`: `alpha*fp + beta*fn + price`.
pub fn consumer_cost(consumer: &Consumer, offer: &ErrorProfile, price: f64) -> Result<f64> {
    if !(price.is_finite() && price >= 0.0) {
        return Err(Error::domain(format!(
            "price must be non-negative, got {price}"
        )));
    }
    Ok(consumer.alpha * offer.fp_rate + consumer.beta * offer.fn_rate + price)
}

/// Dominance relation between the two firms' profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Firm 1 has the lower FN rate, firm 2 the lower FP rate.
    SplitDominationFirm1FN,
    /// Firm 2 has the lower FN rate, firm 1 the lower FP rate.
    SplitDominationFirm2FN,
    /// Firm 1 is strictly better on both rates.
    StrictDominationFirm1,
    /// Firm 2 is strictly better on both rates.
    StrictDominationFirm2,
    /// Equal rates on at least one dimension.
    TiedOrDegenerate,
}

impl Regime {
    /// The regime after exchanging firm labels.
    pub fn mirrored(self) -> Regime {
        match self {
            Regime::SplitDominationFirm1FN => Regime::SplitDominationFirm2FN,
            Regime::SplitDominationFirm2FN => Regime::SplitDominationFirm1FN,
            Regime::StrictDominationFirm1 => Regime::StrictDominationFirm2,
            Regime::StrictDominationFirm2 => Regime::StrictDominationFirm1,
            Regime::TiedOrDegenerate => Regime::TiedOrDegenerate,
        }
    }

    pub fn is_split(self) -> bool {
        matches!(
            self,
            Regime::SplitDominationFirm1FN | Regime::SplitDominationFirm2FN
        )
    }

    pub fn is_strict(self) -> bool {
        matches!(
            self,
            Regime::StrictDominationFirm1 | Regime::StrictDominationFirm2
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::SplitDominationFirm1FN => "SplitDominationFirm1FN",
            Regime::SplitDominationFirm2FN => "SplitDominationFirm2FN",
            Regime::StrictDominationFirm1 => "StrictDominationFirm1",
            Regime::StrictDominationFirm2 => "StrictDominationFirm2",
            Regime::TiedOrDegenerate => "TiedOrDegenerate",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn classify_regime(d: &Duopoly) -> Regime {
    let (fp1, fn1) = (d.firm1.fp_rate, d.firm1.fn_rate);
    let (fp2, fn2) = (d.firm2.fp_rate, d.firm2.fn_rate);
    if fp1 == fp2 || fn1 == fn2 {
        return Regime::TiedOrDegenerate;
    }
    match (fp1 < fp2, fn1 < fn2) {
        (false, true) => Regime::SplitDominationFirm1FN,
        (true, false) => Regime::SplitDominationFirm2FN,
        (true, true) => Regime::StrictDominationFirm1,
        (false, false) => Regime::StrictDominationFirm2,
    }
}

/// A pair of non-negative prices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PricePair {
    pub p1: f64,
    pub p2: f64,
}

impl PricePair {
    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        for (name, p) in [("p1", p1), ("p2", p2)] {
            if !(p.is_finite() && p >= 0.0) {
                return Err(Error::domain(format!(
                    "{name} must be non-negative, got {p}"
                )));
            }
        }
        Ok(Self { p1, p2 })
    }

    /// Like [`PricePair::new`], additionally requiring both prices to be at most the cap.
    pub fn capped(p1: f64, p2: f64, d: &Duopoly) -> Result<Self> {
        let pair = Self::new(p1, p2)?;
        if p1 > d.price_cap() || p2 > d.price_cap() {
            return Err(Error::domain(format!(
                "prices ({p1}, {p2}) exceed the cap {}",
                d.price_cap()
            )));
        }
        Ok(pair)
    }

    pub fn get(&self, firm: Firm) -> f64 {
        match firm {
            Firm::One => self.p1,
            Firm::Two => self.p2,
        }
    }

    pub fn with(&self, firm: Firm, price: f64) -> Self {
        match firm {
            Firm::One => Self { p1: price, p2: self.p2 },
            Firm::Two => Self { p1: self.p1, p2: price },
        }
    }

    pub fn swapped(&self) -> Self {
        Self {
            p1: self.p2,
            p2: self.p1,
        }
    }

    /// Largest absolute coordinate difference.
    pub fn max_abs_diff(&self, other: &PricePair) -> f64 {
        (self.p1 - other.p1).abs().max((self.p2 - other.p2).abs())
    }

    pub fn distance(&self, other: &PricePair) -> f64 {
        (self.p1 - other.p1).hypot(self.p2 - other.p2)
    }
}
