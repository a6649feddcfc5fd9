use anyhow::Result;
use fpfn_market::investment::post_investment_equilibrium;
use fpfn_market::{
    classify_regime, entry_fn_condition, entry_fp_condition, evaluate_entry_plan, investment_cost,
    optimal_entry_dimension, optimal_interior_investment, Duopoly, EntryDimension, Error, Firm,
    InvestmentPlan, InvestmentTarget, Regime,
};

use crate::config::ScenarioConfig;
use crate::output::{num, opt, Table};

#[derive(Debug, Clone)]
pub enum InvestReport {
    /// Split market: each firm's optimal improvement of its leading rate.
    Interior(Vec<(Firm, std::result::Result<InvestmentPlan, String>)>),
    /// Strict market: the dominated firm's entry options.
    Entry(EntryReport),
    Tied,
}

#[derive(Debug, Clone)]
pub struct EntryReport {
    /// Firm labels were exchanged so that firm 1 is the dominant one.
    pub relabelled: bool,
    pub recommended: EntryDimension,
    pub target: InvestmentTarget,
    pub fp_condition: Option<bool>,
    pub fn_condition: Option<bool>,
    pub cost: f64,
    pub net_profit: f64,
    pub after: Option<(f64, f64, f64, f64)>,
}

pub fn run_invest(cfg: &ScenarioConfig) -> Result<InvestReport> {
    let d = &cfg.duopoly;
    match classify_regime(d) {
        Regime::TiedOrDegenerate => Ok(InvestReport::Tied),
        r if r.is_split() => {
            let firms = match cfg.invest.firm {
                Some(f) => vec![f],
                None => Firm::BOTH.to_vec(),
            };
            let mut plans = Vec::new();
            for firm in firms {
                let cp = cfg.cost.cost_params(*d.firm(firm));
                match optimal_interior_investment(d, firm, &cp) {
                    Ok(p) => plans.push((firm, Ok(p))),
                    Err(e @ Error::NoInteriorSolution(_)) => plans.push((firm, Err(e.to_string()))),
                    Err(e) => return Err(e.into()),
                }
            }
            Ok(InvestReport::Interior(plans))
        }
        r => {
            let relabelled = r == Regime::StrictDominationFirm2;
            let d = if relabelled { d.swapped() } else { *d };
            Ok(InvestReport::Entry(entry_report(cfg, &d, relabelled)?))
        }
    }
}

fn entry_report(cfg: &ScenarioConfig, d: &Duopoly, relabelled: bool) -> Result<EntryReport> {
    let cp = cfg.cost.cost_params(*d.firm2());
    let inv = &cfg.invest;
    let fp = inv.fp_target.unwrap_or(d.firm2().fp_rate());
    let fn_ = inv.fn_target.unwrap_or(d.firm2().fn_rate());
    let target = InvestmentTarget::new(fp, fn_, inv.size.unwrap_or(cp.baseline_size))?;
    let condition = |r: fpfn_market::Result<bool>| match r {
        Ok(b) => Ok(Some(b)),
        Err(Error::Assumption(_)) => Ok(None),
        Err(e) => Err(e),
    };
    let after = d
        .with_profile(Firm::Two, target.profile)
        .ok()
        .and_then(|m| post_investment_equilibrium(&m))
        .map(|e| (e.prices.p1, e.prices.p2, e.revenue1, e.revenue2));
    Ok(EntryReport {
        relabelled,
        recommended: optimal_entry_dimension(d)?,
        fp_condition: inv.fp_target.map(|t| condition(entry_fp_condition(d, t))).transpose()?.flatten(),
        fn_condition: inv.fn_target.map(|t| condition(entry_fn_condition(d, t))).transpose()?.flatten(),
        cost: investment_cost(&cp, &target)?,
        net_profit: evaluate_entry_plan(d, &target, &cp)?,
        target,
        after,
    })
}

fn dim_name(d: EntryDimension) -> &'static str {
    match d {
        EntryDimension::Fp => "FP",
        EntryDimension::Fn => "FN",
        EntryDimension::Indifferent => "indifferent",
    }
}

fn flag(b: Option<bool>) -> String {
    b.map(|b| b.to_string()).unwrap_or_default()
}

impl InvestReport {
    pub fn file_name(&self) -> &'static str {
        match self {
            InvestReport::Entry(_) => "entry.csv",
            _ => "invest.csv",
        }
    }

    pub fn table(&self) -> Table {
        match self {
            InvestReport::Interior(plans) => {
                let mut t = Table::new(vec![
                    "firm", "dimension", "fp_target", "fn_target", "size", "cost", "p1_before",
                    "p2_before", "p1_after", "p2_after", "R1_before", "R2_before", "R1_after",
                    "R2_after", "investor_profit_change", "rival_revenue_change",
                    "size_at_lower_bound", "rate_residual", "size_residual", "status",
                ]);
                for (firm, plan) in plans {
                    let mut row = vec![firm.index().to_string()];
                    match plan {
                        Ok(p) => row.extend([
                            p.dimension.to_string(),
                            num(p.target.profile.fp_rate()),
                            num(p.target.profile.fn_rate()),
                            num(p.target.size),
                            num(p.cost),
                            num(p.before.prices.p1),
                            num(p.before.prices.p2),
                            num(p.after.prices.p1),
                            num(p.after.prices.p2),
                            num(p.before.revenue1),
                            num(p.before.revenue2),
                            num(p.after.revenue1),
                            num(p.after.revenue2),
                            num(p.profit_change(*firm)),
                            num(p.profit_change(firm.other())),
                            p.size_at_lower_bound.to_string(),
                            num(p.rate_residual),
                            num(p.size_residual),
                            "ok".into(),
                        ]),
                        Err(msg) => {
                            row.extend(std::iter::repeat(String::new()).take(18));
                            row.push(msg.clone());
                        }
                    }
                    t.push(row);
                }
                t
            }
            InvestReport::Entry(e) => {
                let mut t = Table::new(vec![
                    "recommended", "fp2_target", "fn2_target", "size", "fp_condition",
                    "fn_condition", "cost", "net_profit", "p1_after", "p2_after", "R1_after",
                    "R2_after", "relabelled",
                ]);
                t.push(vec![
                    dim_name(e.recommended).into(),
                    num(e.target.profile.fp_rate()),
                    num(e.target.profile.fn_rate()),
                    num(e.target.size),
                    flag(e.fp_condition),
                    flag(e.fn_condition),
                    num(e.cost),
                    num(e.net_profit),
                    opt(e.after.map(|a| a.0)),
                    opt(e.after.map(|a| a.1)),
                    opt(e.after.map(|a| a.2)),
                    opt(e.after.map(|a| a.3)),
                    e.relabelled.to_string(),
                ]);
                t
            }
            InvestReport::Tied => {
                let mut t = Table::new(vec!["regime", "status"]);
                t.push(vec![
                    Regime::TiedOrDegenerate.to_string(),
                    "tied/degenerate: no leading dimension to invest in".into(),
                ]);
                t
            }
        }
    }

    pub fn summary(&self) -> String {
        match self {
            InvestReport::Interior(plans) => {
                let mut s = String::new();
                for (firm, plan) in plans {
                    match plan {
                        Ok(p) => s.push_str(&format!(
                            "{}: lower {} to {} at size {} (cost {}, profit change {}, rival {})\n",
                            firm,
                            p.dimension,
                            num(p.target.profile.rate(p.dimension)),
                            num(p.target.size),
                            num(p.cost),
                            num(p.profit_change(*firm)),
                            num(p.profit_change(firm.other())),
                        )),
                        Err(msg) => s.push_str(&format!("{firm}: {msg}\n")),
                    }
                }
                s
            }
            InvestReport::Entry(e) => format!(
                "entry by the dominated firm{}\nrecommended  {}\ntarget       ({}, {}) size {}\ncost         {}\nnet profit   {}\n",
                if e.relabelled { " (labels exchanged)" } else { "" },
                dim_name(e.recommended),
                num(e.target.profile.fp_rate()),
                num(e.target.profile.fn_rate()),
                num(e.target.size),
                num(e.cost),
                num(e.net_profit),
            ),
            InvestReport::Tied => "TiedOrDegenerate: no leading dimension to invest in\n".into(),
        }
    }
}
