mod common;

use common::*;
use fpfn_market::equilibrium::Segment;
use fpfn_market::welfare::{error_disutility, individual_cost, ConsumerEffect, TotalEffect};
use fpfn_market::{
    consumer_cost, consumer_total_cost, equilibrium_neg_interior, equilibrium_split, firm_welfare,
    welfare_delta, welfare_report, Consumer, Duopoly, EquilibriumResult, ErrorDimension, Firm,
    PopulationMix, PricePair, SolveMethod,
};
use proptest::prelude::*;

const EPS: f64 = 1e-3;

/// Midpoint-rule integral of what each consumer pays at the cheaper firm.
fn quadrature(d: &Duopoly, prices: &PricePair, zeta: f64, n: usize) -> f64 {
    let mut total = 0.0;
    for k in 0..n {
        let alpha = (k as f64 + 0.5) / n as f64;
        for (w, c) in [
            (zeta, Consumer::positive(alpha).unwrap()),
            (1.0 - zeta, Consumer::negative(alpha).unwrap()),
        ] {
            if w == 0.0 {
                continue;
            }
            let c1 = consumer_cost(&c, d.firm1(), prices.p1).unwrap();
            let c2 = consumer_cost(&c, d.firm2(), prices.p2).unwrap();
            total += w * c1.min(c2);
        }
    }
    total / n as f64
}

fn at(d: &Duopoly, prices: PricePair, zeta: f64) -> EquilibriumResult {
    EquilibriumResult::at_prices(d, PopulationMix::new(zeta).unwrap(), prices, SolveMethod::ClosedForm)
}

fn lowered(d: &Duopoly, firm: Firm, dim: ErrorDimension) -> Option<Duopoly> {
    let r = d.firm(firm).rate(dim);
    (r >= EPS).then(|| d.with_rate(firm, dim, r - EPS).unwrap())
}

fn superior(firm: Firm) -> ErrorDimension {
    // firm 1 leads on FN in the generated instances
    match firm {
        Firm::One => ErrorDimension::FalseNegative,
        Firm::Two => ErrorDimension::FalsePositive,
    }
}

fn inferior(firm: Firm) -> ErrorDimension {
    match superior(firm) {
        ErrorDimension::FalseNegative => ErrorDimension::FalsePositive,
        ErrorDimension::FalsePositive => ErrorDimension::FalseNegative,
    }
}

#[test]
fn symmetric_instance_cost_matches_quadrature() {
    let d = symmetric();
    let eq = equilibrium_split(&d).unwrap();
    let closed = consumer_total_cost(&eq, &d);
    assert!((closed - 0.275).abs() < 1e-12);
    assert!((quadrature(&d, &eq.prices, 0.0, 1_000_000) - closed).abs() < 1e-6);
}

#[test]
fn monopoly_cost() {
    let d = far_leader();
    let eq = at(&d, pp(0.15, 0.0), 0.0);
    assert!((consumer_total_cost(&eq, &d) - 0.225).abs() < 1e-12);
    assert!((quadrature(&d, &eq.prices, 0.0, 1_000_000) - 0.225).abs() < 1e-6);
    assert!((firm_welfare(&eq) - 0.15).abs() < 1e-15);
}

#[test]
fn post_entry_firm_welfare() {
    let eq = equilibrium_neg_interior(&entered()).unwrap();
    assert!((firm_welfare(&eq) - 0.1444).abs() < 1e-4);
    assert_eq!(firm_welfare(&at(&narrow_split(), pp(0.0, 0.0), 0.0)), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn closed_form_cost_matches_quadrature(d in any_split_instance(), p1 in 0.0..0.5f64, p2 in 0.0..0.5f64, zeta in 0.0..1.0f64) {
        let n = 10_000;
        let eq = at(&d, pp(p1, p2), zeta);
        let q = quadrature(&d, &eq.prices, zeta, n);
        prop_assert!((consumer_total_cost(&eq, &d) - q).abs() <= 1.0 / n as f64);
    }

    #[test]
    fn prices_cancel_in_total_welfare(d in any_split_instance(), zeta in 0.0..1.0f64, p1 in 0.0..0.5f64, p2 in 0.0..0.5f64) {
        let eq = at(&d, pp(p1, p2), zeta);
        let report = welfare_report(&eq, &d);
        prop_assert!((report.total_welfare + error_disutility(&eq, &d)).abs() < 1e-12);
        prop_assert!((report.consumer_welfare + report.consumer_total_cost).abs() < 1e-15);
    }

    #[test]
    fn common_price_shift_leaves_total_welfare(d in any_split_instance(), k in 0.0..0.3f64) {
        let eq = equilibrium_split(&d).unwrap();
        let shifted = at(&d, pp(eq.prices.p1 + k, eq.prices.p2 + k), 0.0);
        prop_assert!((shifted.negative.unwrap().boundary() - eq.negative.unwrap().boundary()).abs() < 1e-12);
        let (a, b) = (welfare_report(&eq, &d), welfare_report(&shifted, &d));
        prop_assert!((a.total_welfare - b.total_welfare).abs() < 1e-12);
        prop_assert!((b.consumer_total_cost - a.consumer_total_cost - k).abs() < 1e-12);
    }

    #[test]
    fn superior_investment_hurts_consumers_and_raises_total(d in split_instance(), two in any::<bool>()) {
        let firm = if two { Firm::Two } else { Firm::One };
        let Some(after) = lowered(&d, firm, superior(firm)) else { return Ok(()) };
        let before = welfare_report(&equilibrium_split(&d).unwrap(), &d);
        let post = welfare_report(&equilibrium_split(&after).unwrap(), &after);
        let delta = welfare_delta(&before, &post);
        prop_assert_eq!(delta.consumer, ConsumerEffect::Worse);
        prop_assert_eq!(delta.total, TotalEffect::Up);
        prop_assert!(delta.revenue1 > 0.0 && delta.revenue2 > 0.0);
    }

    #[test]
    fn inferior_investment_helps_consumers_and_raises_total(d in split_instance(), two in any::<bool>()) {
        let firm = if two { Firm::Two } else { Firm::One };
        let Some(after) = lowered(&d, firm, inferior(firm)) else { return Ok(()) };
        prop_assume!(fpfn_market::classify_regime(&after) == fpfn_market::classify_regime(&d));
        let before = welfare_report(&equilibrium_split(&d).unwrap(), &d);
        let post = welfare_report(&equilibrium_split(&after).unwrap(), &after);
        let delta = welfare_delta(&before, &post);
        prop_assert!(delta.revenue1 < 0.0 && delta.revenue2 < 0.0);
        prop_assert_eq!(delta.consumer, ConsumerEffect::Better);
        // lower error rates also shrink the error disutility, so the total rises
        prop_assert_eq!(delta.total, TotalEffect::Up);
    }

    #[test]
    fn superior_investment_splits_extreme_consumers(d in split_instance(), two in any::<bool>()) {
        let firm = if two { Firm::Two } else { Firm::One };
        let Some(after) = lowered(&d, firm, superior(firm)) else { return Ok(()) };
        let (e0, e1) = (equilibrium_split(&d).unwrap(), equilibrium_split(&after).unwrap());
        let change = |alpha: f64| {
            individual_cost(&e1, &after, Segment::Negative, alpha) - individual_cost(&e0, &d, Segment::Negative, alpha)
        };
        // firm 1 serves alpha = 0; the investor's own extreme customer gains EPS/3
        let (own, rival) = match firm { Firm::One => (0.0, 1.0), Firm::Two => (1.0, 0.0) };
        prop_assert!((change(own) + EPS / 3.0).abs() < 1e-12);
        prop_assert!((change(rival) - EPS / 3.0).abs() < 1e-12);
    }
}
