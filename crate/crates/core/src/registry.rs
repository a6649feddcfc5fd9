//! Named, runtime-selectable strategies: equilibrium solvers and size scalings.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::equilibrium::{
    best_response_equilibrium, equilibrium_mixed, equilibrium_pos, equilibrium_split,
    equilibrium_strict, EquilibriumResult, PopulationMix, SolveMethod, SolverConfig,
};
use crate::error::{Error, Result};
use crate::investment::{ConstantScaling, ExponentialScaling, InverseScaling, SizeScaling};
use crate::market::{classify_regime, Duopoly};
use crate::oracle::{nash_grid, GridSpec};

pub trait EquilibriumSolver: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn solve(&self, d: &Duopoly, mix: PopulationMix) -> Result<EquilibriumResult>;
}

/// Closed forms for the pure populations.
#[derive(Debug, Default, Clone, Copy)]
pub struct ClosedFormSolver;

impl EquilibriumSolver for ClosedFormSolver {
    fn name(&self) -> &'static str {
        "closed-form"
    }

    fn description(&self) -> &'static str {
        "analytic prices for zeta = 0 (split or strict domination) and zeta = 1"
    }

    fn solve(&self, d: &Duopoly, mix: PopulationMix) -> Result<EquilibriumResult> {
        if mix.zeta() == 1.0 {
            return Ok(equilibrium_pos(d));
        }
        if mix.zeta() != 0.0 {
            return Err(Error::domain(format!(
                "no closed form for a mixed population (zeta = {})",
                mix.zeta()
            )));
        }
        if classify_regime(d).is_strict() {
            equilibrium_strict(d)
        } else {
            equilibrium_split(d)
        }
    }
}

/// Damped best-response iteration in any regime.
#[derive(Debug, Default, Clone, Copy)]
pub struct BestResponseSolver {
    pub config: SolverConfig,
}

impl EquilibriumSolver for BestResponseSolver {
    fn name(&self) -> &'static str {
        "best-response"
    }

    fn description(&self) -> &'static str {
        "damped best-response iteration with a grid fallback"
    }

    fn solve(&self, d: &Duopoly, mix: PopulationMix) -> Result<EquilibriumResult> {
        best_response_equilibrium(d, mix, &self.config)
    }
}

/// Brute-force grid Nash search; reports the member nearest the set's centroid.
#[derive(Debug, Clone, Copy)]
pub struct GridNashSolver {
    pub consumer_points: usize,
    pub price_points: usize,
}

impl Default for GridNashSolver {
    fn default() -> Self {
        Self {
            consumer_points: 10_000,
            price_points: 501,
        }
    }
}

impl EquilibriumSolver for GridNashSolver {
    fn name(&self) -> &'static str {
        "grid-nash"
    }

    fn description(&self) -> &'static str {
        "exhaustive mutual-best-response search on a consumer and price grid"
    }

    fn solve(&self, d: &Duopoly, mix: PopulationMix) -> Result<EquilibriumResult> {
        let g = GridSpec::for_duopoly(d, self.consumer_points, self.price_points)?;
        let set = nash_grid(d, &mix, &g);
        let centre = set
            .centroid()
            .ok_or_else(|| Error::NoEquilibrium("grid Nash set is empty".into()))?;
        let (pick, _) = set.nearest(&centre).expect("set is non-empty");
        Ok(EquilibriumResult::at_prices(
            d,
            mix,
            pick,
            SolveMethod::GridOracle { members: set.len() },
        ))
    }
}

/// Closed form when one applies, iteration otherwise.
#[derive(Debug, Default, Clone, Copy)]
pub struct AutoSolver {
    pub config: SolverConfig,
}

impl EquilibriumSolver for AutoSolver {
    fn name(&self) -> &'static str {
        "auto"
    }

    fn description(&self) -> &'static str {
        "closed form at the pure populations, best-response iteration in between"
    }

    fn solve(&self, d: &Duopoly, mix: PopulationMix) -> Result<EquilibriumResult> {
        if let Ok(r) = ClosedFormSolver.solve(d, mix) {
            return Ok(r);
        }
        equilibrium_mixed(d, mix, &self.config)
            .or_else(|_| best_response_equilibrium(d, mix, &self.config))
    }
}

pub struct SolverRegistry {
    solvers: BTreeMap<&'static str, Box<dyn EquilibriumSolver>>,
}

impl SolverRegistry {
    pub fn empty() -> Self {
        Self {
            solvers: BTreeMap::new(),
        }
    }

    /// The four built-in solvers sharing one iteration config.
    pub fn with_defaults(config: SolverConfig, grid: GridNashSolver) -> Self {
        let mut r = Self::empty();
        r.register(Box::new(ClosedFormSolver));
        r.register(Box::new(BestResponseSolver { config }));
        r.register(Box::new(grid));
        r.register(Box::new(AutoSolver { config }));
        r
    }

    /// Adds a solver, replacing any previous one with the same name.
    pub fn register(&mut self, solver: Box<dyn EquilibriumSolver>) {
        self.solvers.insert(solver.name(), solver);
    }

    pub fn get(&self, name: &str) -> Result<&dyn EquilibriumSolver> {
        self.solvers
            .get(name)
            .map(|s| s.as_ref())
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "solver",
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.solvers.keys().copied().collect()
    }
}

impl Default for SolverRegistry {
    fn default() -> Self {
        Self::with_defaults(SolverConfig::default(), GridNashSolver::default())
    }
}

pub struct ScalingRegistry {
    scalings: BTreeMap<&'static str, Arc<dyn SizeScaling>>,
}

impl ScalingRegistry {
    pub fn empty() -> Self {
        Self {
            scalings: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, scaling: Arc<dyn SizeScaling>) {
        self.scalings.insert(scaling.name(), scaling);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn SizeScaling>> {
        self.scalings
            .get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "size scaling",
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.scalings.keys().copied().collect()
    }
}

impl Default for ScalingRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(InverseScaling));
        r.register(Arc::new(ConstantScaling));
        r.register(Arc::new(ExponentialScaling));
        r
    }
}
