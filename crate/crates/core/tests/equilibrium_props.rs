mod common;

use common::*;
use fpfn_market::equilibrium::{best_response, revenue};
use fpfn_market::{
    equilibrium_mixed, equilibrium_pos, equilibrium_split, equilibrium_strict, reaction_neg,
    revenues, Duopoly, Firm, PopulationMix, PricePair, Regime, SolveMethod, SolverConfig,
};
use proptest::prelude::*;

/// Largest revenue gain from a unilateral move to any of `points` grid prices.
fn best_deviation_gain(d: &Duopoly, mix: &PopulationMix, at: &PricePair, points: usize) -> f64 {
    let cap = d.price_cap();
    let mut worst = f64::NEG_INFINITY;
    for firm in Firm::BOTH {
        let here = revenue(firm, at, d, mix);
        for k in 0..points {
            let p = cap * k as f64 / (points - 1) as f64;
            let moved = match firm {
                Firm::One => PricePair { p1: p, p2: at.p2 },
                Firm::Two => PricePair { p1: at.p1, p2: p },
            };
            worst = worst.max(revenue(firm, &moved, d, mix) - here);
        }
    }
    worst
}

#[test]
fn tied_totals_use_the_price_cap() {
    let d = symmetric().with_price_cap(2.5).unwrap();
    let r = equilibrium_pos(&d);
    assert_eq!(r.prices, pp(2.5, 2.5));
    assert_eq!(r.method, SolveMethod::ClosedForm);
}

#[test]
fn mixed_solver_rejects_bad_config() {
    let cfg = SolverConfig {
        damping: 0.0,
        ..SolverConfig::default()
    };
    assert!(equilibrium_mixed(&narrow_split(), PopulationMix::new(0.5).unwrap(), &cfg).is_err());
}

#[test]
fn population_mix_bounds() {
    assert!(PopulationMix::new(-0.01).is_err());
    assert!(PopulationMix::new(1.01).is_err());
    assert!(PopulationMix::new(f64::NAN).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn split_prices_are_mutual_reactions(d in split_instance()) {
        let p = equilibrium_split(&d).unwrap().prices;
        prop_assert!((reaction_neg(Firm::One, p.p2, &d).unwrap() - p.p1).abs() < 1e-12);
        prop_assert!((reaction_neg(Firm::Two, p.p1, &d).unwrap() - p.p2).abs() < 1e-12);
    }

    #[test]
    fn strict_prices_are_mutual_reactions(d in strict_instance()) {
        let p = equilibrium_strict(&d).unwrap().prices;
        prop_assert!((reaction_neg(Firm::One, p.p2, &d).unwrap() - p.p1).abs() < 1e-12);
        prop_assert!((reaction_neg(Firm::Two, p.p1, &d).unwrap() - p.p2).abs() < 1e-12);
    }

    #[test]
    fn split_prices_positive(fn1 in 0.0..0.99f64, a in 1e-6..0.5f64, fp2 in 0.0..0.5f64, b in 1e-6..0.5f64) {
        prop_assume!(fn1 + a <= 1.0);
        let d = Duopoly::from_rates(fp2 + b, fn1, fp2, fn1 + a).unwrap();
        let r = equilibrium_split(&d).unwrap();
        prop_assert!(r.prices.p1 > 0.0 && r.prices.p2 > 0.0);
    }

    #[test]
    fn result_bookkeeping(d in any_split_instance()) {
        let r = equilibrium_split(&d).unwrap();
        prop_assert!((r.share1 + r.share2 - 1.0).abs() < 1e-12);
        prop_assert!((r.revenue1 - r.share1 * r.prices.p1).abs() < 1e-12);
        prop_assert!((r.revenue2 - r.share2 * r.prices.p2).abs() < 1e-12);
        let (r1, r2) = revenues(&r.prices, &d, &PopulationMix::negative());
        prop_assert!((r1 - r.revenue1).abs() < 1e-15 && (r2 - r.revenue2).abs() < 1e-15);
    }

    #[test]
    fn relabelling_mirrors_equilibria(d in split_instance()) {
        let r = equilibrium_split(&d).unwrap();
        let m = equilibrium_split(&d.swapped()).unwrap();
        prop_assert!(m.prices.max_abs_diff(&r.prices.swapped()) < 1e-15);
        prop_assert!((m.share2 - r.share1).abs() < 1e-12);
        prop_assert_eq!(m.regime, Regime::SplitDominationFirm2FN);
        let pos = equilibrium_pos(&d);
        let pos_m = equilibrium_pos(&d.swapped());
        prop_assert!(pos_m.prices.max_abs_diff(&pos.prices.swapped()) < 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn split_equilibrium_survives_grid_deviations(d in any_split_instance()) {
        let r = equilibrium_split(&d).unwrap();
        let gain = best_deviation_gain(&d, &PopulationMix::negative(), &r.prices, 2000);
        prop_assert!(gain <= 1e-12, "gain {gain}");
    }

    #[test]
    fn positive_equilibrium_survives_grid_deviations(d in any_split_instance()) {
        prop_assume!(d.firm1().total_error() != d.firm2().total_error());
        let r = equilibrium_pos(&d);
        prop_assume!(r.prices.p1 < d.price_cap() && r.prices.p2 < d.price_cap());
        let gain = best_deviation_gain(&d, &PopulationMix::positive(), &r.prices, 2000);
        prop_assert!(gain <= 1e-12, "gain {gain}");
    }

    #[test]
    fn mixed_equilibrium_survives_grid_deviations(d in split_with_gap(0.05), zeta in 0.0..1.0f64) {
        prop_assume!((d.firm1().total_error() - d.firm2().total_error()).abs() >= 0.1);
        let mix = PopulationMix::new(zeta).unwrap();
        let cfg = SolverConfig::default();
        let r = equilibrium_mixed(&d, mix, &cfg).unwrap();
        let gain = best_deviation_gain(&d, &mix, &r.prices, 2000);
        prop_assert!(gain <= 1e-7, "gain {gain} at {:?} via {:?}", r.prices, r.method);
        let br1 = best_response(Firm::One, r.prices.p2, &d, &mix, &cfg);
        prop_assert!((revenue(Firm::One, &r.prices.with(Firm::One, br1), &d, &mix) - r.revenue1).abs() < 1e-7);
    }

    #[test]
    fn mixed_failure_means_no_equilibrium_at_last_iterate(d in split_with_gap(0.02), zeta in 0.05..0.95f64) {
        let mix = PopulationMix::new(zeta).unwrap();
        let cfg = SolverConfig { max_iterations: 2000, fallback_grid_points: 400, ..SolverConfig::default() };
        match equilibrium_mixed(&d, mix, &cfg) {
            Ok(r) => {
                let gain = best_deviation_gain(&d, &mix, &r.prices, 400);
                prop_assert!(gain <= 1e-7, "gain {gain} via {:?}", r.method);
            }
            Err(fpfn_market::Error::NoConvergence { last, .. }) => {
                prop_assert!(best_deviation_gain(&d, &mix, &last, 2000) > 1e-6);
            }
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn mixed_endpoints_agree_with_closed_forms(d in split_with_gap(0.05)) {
        let cfg = SolverConfig::default();
        let zero = equilibrium_mixed(&d, PopulationMix::negative(), &cfg).unwrap();
        prop_assert!(zero.prices.max_abs_diff(&equilibrium_split(&d).unwrap().prices) < 1e-6);
        let one = equilibrium_mixed(&d, PopulationMix::positive(), &cfg).unwrap();
        prop_assert_eq!(one.prices, equilibrium_pos(&d).prices);
    }
}
