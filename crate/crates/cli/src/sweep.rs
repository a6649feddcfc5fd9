use anyhow::{bail, Result};
use fpfn_market::{classify_regime, PopulationMix, SolveMethod};
use rayon::prelude::*;

use crate::config::ScenarioConfig;
use crate::output::{num, opt, Table};

pub const STEPS: usize = 100;
/// Largest second difference still read as concave on the 0.01 grid.
pub const CONCAVITY_SLACK: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub zeta: f64,
    pub prices: Option<(f64, f64)>,
    pub revenues: Option<(f64, f64)>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Concavity {
    /// Largest second difference of p1, p2, R1, R2 over consecutive solved rows.
    pub max_second_diff: [f64; 4],
    /// Zeta at which each price peaks.
    pub argmax_price: [f64; 2],
    pub flagged_rows: usize,
}

impl Concavity {
    pub fn prices_concave(&self) -> bool {
        self.max_second_diff[..2].iter().all(|&d| d <= CONCAVITY_SLACK)
    }

    pub fn peaks_at_zero(&self) -> bool {
        self.argmax_price == [0.0, 0.0]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub rows: Vec<SweepRow>,
    pub concavity: Concavity,
}

/// Equilibrium prices and revenues for zeta = 0, 0.01, ..., 1.
///
/// Rows whose solve fails are flagged in `status` and left blank.
pub fn sweep_zeta(cfg: &ScenarioConfig) -> Result<Sweep> {
    let d = &cfg.duopoly;
    let regime = classify_regime(d);
    if !regime.is_split() {
        bail!("sweep-zeta needs a split-domination market, got {regime}");
    }
    let registry = cfg.solver.registry();
    let solver = registry.get(&cfg.solver.method)?;
    let rows: Vec<SweepRow> = (0..=STEPS)
        .into_par_iter()
        .map(|k| {
            let zeta = k as f64 / STEPS as f64;
            let mix = PopulationMix::new(zeta).expect("zeta lies in [0, 1]");
            match solver.solve(d, mix) {
                Ok(r) => SweepRow {
                    zeta,
                    prices: Some((r.prices.p1, r.prices.p2)),
                    revenues: Some((r.revenue1, r.revenue2)),
                    status: match r.method {
                        SolveMethod::GridFallback { .. } => "approximate (grid fallback)".into(),
                        _ => "ok".into(),
                    },
                },
                Err(e) => SweepRow {
                    zeta,
                    prices: None,
                    revenues: None,
                    status: format!("failed: {e}"),
                },
            }
        })
        .collect();
    let concavity = concavity(&rows);
    Ok(Sweep { rows, concavity })
}

fn concavity(rows: &[SweepRow]) -> Concavity {
    let series = |f: &dyn Fn(&SweepRow) -> Option<f64>| rows.iter().map(f).collect::<Vec<_>>();
    let columns = [
        series(&|r| r.prices.map(|p| p.0)),
        series(&|r| r.prices.map(|p| p.1)),
        series(&|r| r.revenues.map(|p| p.0)),
        series(&|r| r.revenues.map(|p| p.1)),
    ];
    let max_d2 = |c: &[Option<f64>]| {
        c.windows(3)
            .filter_map(|w| Some(w[0]? - 2.0 * w[1]? + w[2]?))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let argmax = |c: &[Option<f64>]| {
        let mut best = (f64::NAN, f64::NEG_INFINITY);
        for (row, v) in rows.iter().zip(c) {
            if let Some(v) = *v {
                if v > best.1 {
                    best = (row.zeta, v);
                }
            }
        }
        best.0
    };
    Concavity {
        max_second_diff: [
            max_d2(&columns[0]),
            max_d2(&columns[1]),
            max_d2(&columns[2]),
            max_d2(&columns[3]),
        ],
        argmax_price: [argmax(&columns[0]), argmax(&columns[1])],
        flagged_rows: rows.iter().filter(|r| r.prices.is_none()).count(),
    }
}

impl Sweep {
    pub fn table(&self) -> Table {
        let mut t = Table::new(vec!["zeta", "p1", "p2", "R1", "R2", "status"]);
        for r in &self.rows {
            t.push(vec![
                num(r.zeta),
                opt(r.prices.map(|p| p.0)),
                opt(r.prices.map(|p| p.1)),
                opt(r.revenues.map(|p| p.0)),
                opt(r.revenues.map(|p| p.1)),
                r.status.clone(),
            ]);
        }
        let c = &self.concavity;
        let verdict = format!(
            "{}; {}; price peaks at zeta {} and {}; {} flagged rows",
            if c.prices_concave() { "concave" } else { "not concave" },
            if c.peaks_at_zero() { "peak at zeta 0" } else { "peak away from zeta 0" },
            num(c.argmax_price[0]),
            num(c.argmax_price[1]),
            c.flagged_rows,
        );
        t.push(vec![
            "max_second_diff".into(),
            num(c.max_second_diff[0]),
            num(c.max_second_diff[1]),
            num(c.max_second_diff[2]),
            num(c.max_second_diff[3]),
            verdict,
        ]);
        t
    }

    pub fn summary(&self) -> String {
        let first = &self.rows[0];
        let last = &self.rows[STEPS];
        let show = |r: &SweepRow| match r.prices {
            Some((p1, p2)) => format!("({}, {})", num(p1), num(p2)),
            None => r.status.clone(),
        };
        let c = &self.concavity;
        format!(
            "rows         {}\nzeta=0       {}\nzeta=1       {}\nmax d2 p     ({}, {})\npeaks at     ({}, {})\nconcave      {}\nflagged      {}\n",
            self.rows.len(),
            show(first),
            show(last),
            num(c.max_second_diff[0]),
            num(c.max_second_diff[1]),
            num(c.argmax_price[0]),
            num(c.argmax_price[1]),
            c.prices_concave(),
            c.flagged_rows,
        )
    }
}
