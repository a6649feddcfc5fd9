use anyhow::Result;
use fpfn_market::welfare::{error_disutility, ConsumerEffect, TotalEffect};
use fpfn_market::{
    classify_regime, welfare_delta, welfare_report, Duopoly, ErrorDimension, Firm, WelfareDelta,
    WelfareReport,
};

use crate::config::ScenarioConfig;
use crate::output::{num, Table};

#[derive(Debug, Clone)]
pub struct WelfareRow {
    pub scenario: &'static str,
    pub firm: Option<Firm>,
    pub dimension: Option<ErrorDimension>,
    pub report: WelfareReport,
    pub error_disutility: f64,
    pub delta: Option<WelfareDelta>,
}

/// Welfare at the configured equilibrium and, in a split market, after each
/// firm lowers one of its rates by `epsilon`.
pub fn run_welfare(cfg: &ScenarioConfig) -> Result<Vec<WelfareRow>> {
    let registry = cfg.solver.registry();
    let solver = registry.get(&cfg.solver.method)?;
    let evaluate = |d: &Duopoly| -> Result<(WelfareReport, f64)> {
        let eq = solver.solve(d, cfg.mix)?;
        Ok((welfare_report(&eq, d), error_disutility(&eq, d)))
    };
    let d = &cfg.duopoly;
    let (base, base_err) = evaluate(d)?;
    let mut rows = vec![WelfareRow {
        scenario: "baseline",
        firm: None,
        dimension: None,
        report: base,
        error_disutility: base_err,
        delta: None,
    }];
    if !classify_regime(d).is_split() {
        return Ok(rows);
    }
    let eps = cfg.invest.epsilon;
    for firm in Firm::BOTH {
        let own = d.firm(firm);
        let rival = d.firm(firm.other());
        let superior = if own.fn_rate() < rival.fn_rate() {
            ErrorDimension::FalseNegative
        } else {
            ErrorDimension::FalsePositive
        };
        let inferior = match superior {
            ErrorDimension::FalseNegative => ErrorDimension::FalsePositive,
            ErrorDimension::FalsePositive => ErrorDimension::FalseNegative,
        };
        for (scenario, dim) in [("superior", superior), ("inferior", inferior)] {
            let rate = own.rate(dim);
            if rate < eps {
                continue;
            }
            let moved = d.with_rate(firm, dim, rate - eps)?;
            if classify_regime(&moved) != classify_regime(d) {
                continue;
            }
            let (after, err) = evaluate(&moved)?;
            rows.push(WelfareRow {
                scenario,
                firm: Some(firm),
                dimension: Some(dim),
                report: after,
                error_disutility: err,
                delta: Some(welfare_delta(&base, &after)),
            });
        }
    }
    Ok(rows)
}

fn consumer(e: ConsumerEffect) -> &'static str {
    match e {
        ConsumerEffect::Worse => "worse",
        ConsumerEffect::Better => "better",
        ConsumerEffect::Unchanged => "unchanged",
    }
}

fn total(e: TotalEffect) -> &'static str {
    match e {
        TotalEffect::Up => "up",
        TotalEffect::Down => "down",
        TotalEffect::Unchanged => "unchanged",
    }
}

pub fn table(rows: &[WelfareRow]) -> Table {
    let mut t = Table::new(vec![
        "scenario", "firm", "dimension", "consumer_total_cost", "error_disutility", "R1", "R2",
        "total_welfare", "d_consumer_cost", "d_R1", "d_R2", "d_total_welfare", "consumers",
        "total",
    ]);
    for r in rows {
        let w = &r.report;
        let d = r.delta.as_ref();
        let dnum = |f: fn(&WelfareDelta) -> f64| d.map(|d| num(f(d))).unwrap_or_default();
        t.push(vec![
            r.scenario.into(),
            r.firm.map(|f| f.index().to_string()).unwrap_or_default(),
            r.dimension.map(|x| x.to_string()).unwrap_or_default(),
            num(w.consumer_total_cost),
            num(r.error_disutility),
            num(w.revenue1),
            num(w.revenue2),
            num(w.total_welfare),
            dnum(|d| d.consumer_total_cost),
            dnum(|d| d.revenue1),
            dnum(|d| d.revenue2),
            dnum(|d| d.total_welfare),
            d.map(|d| consumer(d.consumer).to_string()).unwrap_or_default(),
            d.map(|d| total(d.total).to_string()).unwrap_or_default(),
        ]);
    }
    t
}

pub fn summary(rows: &[WelfareRow]) -> String {
    let mut s = String::new();
    for r in rows {
        let label = match (r.firm, r.dimension) {
            (Some(f), Some(d)) => format!("{f} lowers {d} ({})", r.scenario),
            _ => r.scenario.to_string(),
        };
        s.push_str(&format!(
            "{label:<28} consumer cost {}  total welfare {}",
            num(r.report.consumer_total_cost),
            num(r.report.total_welfare)
        ));
        if let Some(d) = &r.delta {
            s.push_str(&format!("  consumers {}  total {}", consumer(d.consumer), total(d.total)));
        }
        s.push('\n');
    }
    s
}
