use anyhow::Result;
use fpfn_market::{
    classify_regime, welfare_report, EquilibriumResult, Regime, Segment, SolveMethod, WelfareReport,
};

use crate::config::ScenarioConfig;
use crate::output::{num, opt, Table};

#[derive(Debug, Clone)]
pub struct EquilibriumReport {
    pub regime: Regime,
    pub zeta: f64,
    pub result: Option<EquilibriumResult>,
    pub welfare: Option<WelfareReport>,
    pub status: String,
}

pub fn method_name(m: &SolveMethod) -> String {
    match m {
        SolveMethod::ClosedForm => "closed-form".into(),
        SolveMethod::BestResponse { iterations } => format!("best-response ({iterations} iterations)"),
        SolveMethod::GridFallback { points } => format!("grid fallback ({points} points)"),
        SolveMethod::GridOracle { members } => format!("grid nash ({members} members)"),
    }
}

/// Solves the configured scenario. A tied or degenerate market is reported,
/// not treated as a failure; any other solver error is returned.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<EquilibriumReport> {
    let d = &cfg.duopoly;
    let regime = classify_regime(d);
    let registry = cfg.solver.registry();
    let solver = registry.get(&cfg.solver.method)?;
    let outcome = solver.solve(d, cfg.mix);
    let (result, status) = match (outcome, regime) {
        (Ok(r), Regime::TiedOrDegenerate) => (Some(r), "tied/degenerate: equal rates on one dimension".to_string()),
        (Ok(r), _) => (Some(r), "ok".to_string()),
        (Err(e), Regime::TiedOrDegenerate) => (None, format!("tied/degenerate: {e}")),
        (Err(e), _) => return Err(e.into()),
    };
    Ok(EquilibriumReport {
        regime,
        zeta: cfg.mix.zeta(),
        welfare: result.as_ref().map(|r| welfare_report(r, d)),
        result,
        status,
    })
}

impl EquilibriumReport {
    pub fn table(&self) -> Table {
        let mut t = Table::new(vec![
            "regime",
            "zeta",
            "method",
            "p1",
            "p2",
            "alpha_positive",
            "alpha_negative",
            "share1",
            "share2",
            "R1",
            "R2",
            "consumer_total_cost",
            "firm_revenue_total",
            "total_welfare",
            "status",
        ]);
        let r = self.result.as_ref();
        let w = self.welfare.as_ref();
        t.push(vec![
            self.regime.to_string(),
            num(self.zeta),
            r.map(|r| method_name(&r.method)).unwrap_or_default(),
            opt(r.map(|r| r.prices.p1)),
            opt(r.map(|r| r.prices.p2)),
            opt(r.and_then(|r| r.indifferent_alpha(Segment::Positive))),
            opt(r.and_then(|r| r.indifferent_alpha(Segment::Negative))),
            opt(r.map(|r| r.share1)),
            opt(r.map(|r| r.share2)),
            opt(r.map(|r| r.revenue1)),
            opt(r.map(|r| r.revenue2)),
            opt(w.map(|w| w.consumer_total_cost)),
            opt(w.map(|w| w.firm_revenue_total)),
            opt(w.map(|w| w.total_welfare)),
            self.status.clone(),
        ]);
        t
    }

    pub fn summary(&self) -> String {
        let mut s = format!("regime       {}\nzeta         {}\n", self.regime, num(self.zeta));
        if self.regime == Regime::TiedOrDegenerate {
            s.push_str("report       TiedOrDegenerate\n");
        }
        match (&self.result, &self.welfare) {
            (Some(r), Some(w)) => {
                s.push_str(&format!("method       {}\n", method_name(&r.method)));
                s.push_str(&format!("prices       ({}, {})\n", num(r.prices.p1), num(r.prices.p2)));
                for seg in [Segment::Positive, Segment::Negative] {
                    if let Some(a) = r.indifferent_alpha(seg) {
                        s.push_str(&format!("alpha~ {:<5} {}\n", seg_name(seg), num(a)));
                    }
                }
                s.push_str(&format!("shares       ({}, {})\n", num(r.share1), num(r.share2)));
                s.push_str(&format!("revenues     ({}, {})\n", num(r.revenue1), num(r.revenue2)));
                s.push_str(&format!("consumer     {}\n", num(w.consumer_total_cost)));
                s.push_str(&format!("welfare      {}\n", num(w.total_welfare)));
            }
            _ => {}
        }
        s.push_str(&format!("status       {}\n", self.status));
        s
    }
}

fn seg_name(s: Segment) -> &'static str {
    match s {
        Segment::Positive => "pos",
        Segment::Negative => "neg",
    }
}
