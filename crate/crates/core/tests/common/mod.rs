#![allow(dead_code)]

use fpfn_market::{Duopoly, PricePair};
use proptest::prelude::*;

pub fn symmetric() -> Duopoly {
    Duopoly::from_rates(0.2, 0.2, 0.1, 0.3).unwrap()
}
pub fn narrow_split() -> Duopoly {
    Duopoly::from_rates(0.3, 0.05, 0.2, 0.1).unwrap()
}
pub fn wide_split() -> Duopoly {
    Duopoly::from_rates(0.6, 0.01, 0.1, 0.02).unwrap()
}
pub fn close_leader() -> Duopoly {
    Duopoly::from_rates(0.1, 0.05, 0.2, 0.1).unwrap()
}
pub fn far_leader() -> Duopoly {
    Duopoly::from_rates(0.1, 0.05, 0.5, 0.35).unwrap()
}
/// `far_leader` after firm 2 lowers its FP rate to 0.2.
pub fn entered() -> Duopoly {
    Duopoly::from_rates(0.1, 0.05, 0.2, 0.35).unwrap()
}

pub fn pp(p1: f64, p2: f64) -> PricePair {
    PricePair::new(p1, p2).unwrap()
}

/// Firm 1 leads on FN, firm 2 on FP, both gaps at least `min_gap`.
pub fn split_with_gap(min_gap: f64) -> impl Strategy<Value = Duopoly> {
    (0.0..0.4f64, min_gap..0.3f64, 0.0..0.4f64, min_gap..0.3f64).prop_map(
        |(fn1, a, fp2, b)| Duopoly::from_rates(fp2 + b, fn1, fp2, fn1 + a).unwrap(),
    )
}

pub fn split_instance() -> impl Strategy<Value = Duopoly> {
    split_with_gap(0.02)
}

/// Split instance with either labelling.
pub fn any_split_instance() -> impl Strategy<Value = Duopoly> {
    (split_instance(), any::<bool>()).prop_map(|(d, swap)| if swap { d.swapped() } else { d })
}

/// Firm 1 leads on both rates and its FN lead is the smaller one.
pub fn strict_instance() -> impl Strategy<Value = Duopoly> {
    (0.0..0.3f64, 0.01..0.2f64, 0.0..0.3f64, 1.05..4.0f64).prop_map(|(fn1, a, fp1, ratio)| {
        let b = (a * ratio).min(0.65);
        Duopoly::from_rates(fp1, fn1, fp1 + b, fn1 + a).unwrap()
    })
}

/// Pure-strategy equilibrium of the negatively correlated market when firm 1
/// leads on both rates, derived by hand from the two revenue functions.
/// With `big` the larger of the two leads and `small` the other: when
/// `big <= 2 small` firm 1 sets the largest price that still keeps every
/// consumer, `(small, 0)`; otherwise firm 2 holds the end of the market where
/// firm 1's lead is `small`, at `((2 big - small)/3, (big - 2 small)/3)`.
pub fn strict_reference(d: &Duopoly) -> PricePair {
    let a = d.firm2().fn_rate() - d.firm1().fn_rate();
    let c = d.firm2().fp_rate() - d.firm1().fp_rate();
    let (big, small) = (a.max(c), a.min(c));
    if big <= 2.0 * small {
        pp(small, 0.0)
    } else {
        pp((2.0 * big - small) / 3.0, (big - 2.0 * small) / 3.0)
    }
}

/// Firm 1 leads on both rates, in either order of magnitude.
pub fn any_strict_instance() -> impl Strategy<Value = Duopoly> {
    (0.0..0.3f64, 0.01..0.3f64, 0.0..0.3f64, 0.01..0.3f64)
        .prop_map(|(fn1, a, fp1, c)| Duopoly::from_rates(fp1, fn1, fp1 + c, fn1 + a).unwrap())
}
