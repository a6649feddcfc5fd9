//! Scenario files: TOML with `[duopoly]`, `[mix]`, `[cost]`, `[solver]`,
//! `[invest]` and `[run]` sections. Every value is checked at load time and
//! errors point at the offending line.

use std::ops::Range;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use fpfn_market::{
    CostParams, Duopoly, ErrorProfile, Firm, PopulationMix, ScalingRegistry, SizeScaling,
    SolverConfig, SolverRegistry,
};
use fpfn_market::registry::GridNashSolver;
use serde::Deserialize;
use toml::Spanned;

#[derive(Debug, thiserror::Error)]
#[error("{path}:{line}: {message}")]
pub struct ConfigError {
    pub path: String,
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    duopoly: RawDuopoly,
    mix: Option<RawMix>,
    cost: Option<RawCost>,
    solver: Option<RawSolver>,
    invest: Option<RawInvest>,
    run: Option<RawRun>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDuopoly {
    fp1: Spanned<f64>,
    fn1: Spanned<f64>,
    fp2: Spanned<f64>,
    fn2: Spanned<f64>,
    price_cap: Option<Spanned<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMix {
    zeta: Spanned<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCost {
    lambda_linear: Option<Spanned<f64>>,
    lambda_convex: Option<Spanned<f64>>,
    lambda_runtime: Option<Spanned<f64>>,
    convexity_exponent: Option<Spanned<f64>>,
    g_scale: Option<Spanned<f64>>,
    s_fp: Option<Spanned<f64>>,
    s_fn: Option<Spanned<f64>>,
    baseline_size: Option<Spanned<f64>>,
    scaling: Option<Spanned<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    method: Option<Spanned<String>>,
    damping: Option<Spanned<f64>>,
    tolerance: Option<Spanned<f64>>,
    max_iterations: Option<Spanned<i64>>,
    consumer_points: Option<Spanned<i64>>,
    price_points: Option<Spanned<i64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInvest {
    firm: Option<Spanned<i64>>,
    epsilon: Option<Spanned<f64>>,
    fp_target: Option<Spanned<f64>>,
    fn_target: Option<Spanned<f64>>,
    size: Option<Spanned<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    out: Option<String>,
    seed: Option<Spanned<i64>>,
    verify_instances: Option<Spanned<i64>>,
}

/// Overrides for [`CostParams`]; unset fields fall back to the defaults
/// anchored at the investing firm's current offer.
#[derive(Debug, Clone, Default)]
pub struct CostSettings {
    pub lambda_linear: Option<f64>,
    pub lambda_convex: Option<f64>,
    pub lambda_runtime: Option<f64>,
    pub convexity_exponent: Option<f64>,
    pub g_scale: Option<f64>,
    pub s_fp: Option<f64>,
    pub s_fn: Option<f64>,
    pub baseline_size: Option<f64>,
    pub scaling: Option<Arc<dyn SizeScaling>>,
}

impl CostSettings {
    pub fn cost_params(&self, baseline: ErrorProfile) -> CostParams {
        let mut cp = CostParams::for_baseline(baseline);
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut cp.lambda_linear, self.lambda_linear);
        set(&mut cp.lambda_convex, self.lambda_convex);
        set(&mut cp.lambda_runtime, self.lambda_runtime);
        set(&mut cp.convexity_exponent, self.convexity_exponent);
        set(&mut cp.g_scale, self.g_scale);
        set(&mut cp.s_fp, self.s_fp);
        set(&mut cp.s_fn, self.s_fn);
        set(&mut cp.baseline_size, self.baseline_size);
        if let Some(s) = &self.scaling {
            cp.scaling = Arc::clone(s);
        }
        cp
    }
}

#[derive(Debug, Clone)]
pub struct SolverSettings {
    pub method: String,
    pub config: SolverConfig,
    pub consumer_points: usize,
    pub price_points: usize,
}

impl SolverSettings {
    pub fn registry(&self) -> SolverRegistry {
        SolverRegistry::with_defaults(
            self.config,
            GridNashSolver {
                consumer_points: self.consumer_points,
                price_points: self.price_points,
            },
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct InvestSettings {
    pub firm: Option<Firm>,
    pub epsilon: f64,
    pub fp_target: Option<f64>,
    pub fn_target: Option<f64>,
    pub size: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub duopoly: Duopoly,
    pub mix: PopulationMix,
    pub cost: CostSettings,
    pub solver: SolverSettings,
    pub invest: InvestSettings,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub verify_instances: usize,
}

pub const DEFAULT_EPSILON: f64 = 1e-3;
pub const DEFAULT_VERIFY_INSTANCES: usize = 8;

impl ScenarioConfig {
    /// A scenario with default settings around the given rates.
    pub fn from_rates(fp1: f64, fn1: f64, fp2: f64, fn2: f64) -> fpfn_market::Result<Self> {
        Ok(Self {
            duopoly: Duopoly::from_rates(fp1, fn1, fp2, fn2)?,
            mix: PopulationMix::negative(),
            cost: CostSettings::default(),
            solver: SolverSettings {
                method: "auto".into(),
                config: SolverConfig::default(),
                consumer_points: GridNashSolver::default().consumer_points,
                price_points: GridNashSolver::default().price_points,
            },
            invest: InvestSettings {
                epsilon: DEFAULT_EPSILON,
                ..Default::default()
            },
            out: None,
            seed: 0,
            verify_instances: DEFAULT_VERIFY_INSTANCES,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            path: path.display().to_string(),
            line: 0,
            message: e.to_string(),
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let cx = Context { text, origin };
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            cx.error(e.span().unwrap_or(0..0), e.message().to_string())
        })?;
        cx.build(raw)
    }
}

struct Context<'a> {
    text: &'a str,
    origin: &'a str,
}

impl Context<'_> {
    fn error(&self, span: Range<usize>, message: impl Into<String>) -> ConfigError {
        let start = span.start.min(self.text.len());
        ConfigError {
            path: self.origin.to_string(),
            line: self.text[..start].matches('\n').count() + 1,
            message: message.into(),
        }
    }

    fn float(
        &self,
        v: &Spanned<f64>,
        key: &str,
        ok: impl Fn(f64) -> bool,
        expect: &str,
    ) -> Result<f64, ConfigError> {
        let x = *v.get_ref();
        if x.is_finite() && ok(x) {
            Ok(x)
        } else {
            Err(self.error(v.span(), format!("`{key}` must be {expect}, got {x}")))
        }
    }

    fn opt_float(
        &self,
        v: &Option<Spanned<f64>>,
        key: &str,
        ok: impl Fn(f64) -> bool,
        expect: &str,
    ) -> Result<Option<f64>, ConfigError> {
        v.as_ref().map(|v| self.float(v, key, ok, expect)).transpose()
    }

    fn count(&self, v: &Option<Spanned<i64>>, key: &str, min: i64, default: usize) -> Result<usize, ConfigError> {
        match v {
            None => Ok(default),
            Some(v) if *v.get_ref() >= min => Ok(*v.get_ref() as usize),
            Some(v) => Err(self.error(
                v.span(),
                format!("`{key}` must be an integer >= {min}, got {}", v.get_ref()),
            )),
        }
    }

    fn build(&self, raw: RawConfig) -> Result<ScenarioConfig, ConfigError> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        let positive = |x: f64| x > 0.0;
        let non_negative = |x: f64| x >= 0.0;
        const UNIT: &str = "in [0, 1]";

        let d = &raw.duopoly;
        let fp1 = self.float(&d.fp1, "fp1", unit, UNIT)?;
        let fn1 = self.float(&d.fn1, "fn1", unit, UNIT)?;
        let fp2 = self.float(&d.fp2, "fp2", unit, UNIT)?;
        let fn2 = self.float(&d.fn2, "fn2", unit, UNIT)?;
        let mut duopoly = Duopoly::from_rates(fp1, fn1, fp2, fn2)
            .map_err(|e| self.error(d.fp1.span(), e.to_string()))?;
        if let Some(cap) = self.opt_float(&d.price_cap, "price_cap", positive, "positive")? {
            duopoly = duopoly
                .with_price_cap(cap)
                .map_err(|e| self.error(d.price_cap.as_ref().unwrap().span(), e.to_string()))?;
        }

        let mix = match &raw.mix {
            Some(m) => PopulationMix::new(self.float(&m.zeta, "zeta", unit, UNIT)?)
                .expect("zeta checked above"),
            None => PopulationMix::negative(),
        };

        let c = raw.cost.unwrap_or_default();
        let scaling = match &c.scaling {
            None => None,
            Some(name) => Some(
                ScalingRegistry::default()
                    .get(name.get_ref())
                    .map_err(|e| self.error(name.span(), e.to_string()))?,
            ),
        };
        let cost = CostSettings {
            lambda_linear: self.opt_float(&c.lambda_linear, "lambda_linear", non_negative, ">= 0")?,
            lambda_convex: self.opt_float(&c.lambda_convex, "lambda_convex", non_negative, ">= 0")?,
            lambda_runtime: self.opt_float(&c.lambda_runtime, "lambda_runtime", non_negative, ">= 0")?,
            convexity_exponent: self.opt_float(&c.convexity_exponent, "convexity_exponent", |p| p >= 2.0, ">= 2")?,
            g_scale: self.opt_float(&c.g_scale, "g_scale", positive, "positive")?,
            s_fp: self.opt_float(&c.s_fp, "s_fp", positive, "positive")?,
            s_fn: self.opt_float(&c.s_fn, "s_fn", positive, "positive")?,
            baseline_size: self.opt_float(&c.baseline_size, "baseline_size", positive, "positive")?,
            scaling,
        };

        let s = raw.solver.unwrap_or_default();
        let defaults = SolverConfig::default();
        let grid_defaults = GridNashSolver::default();
        let config = SolverConfig {
            damping: self
                .opt_float(&s.damping, "damping", |x| x > 0.0 && x <= 1.0, "in (0, 1]")?
                .unwrap_or(defaults.damping),
            tolerance: self
                .opt_float(&s.tolerance, "tolerance", positive, "positive")?
                .unwrap_or(defaults.tolerance),
            max_iterations: self.count(&s.max_iterations, "max_iterations", 1, defaults.max_iterations)?,
            ..defaults
        };
        let method = match &s.method {
            None => "auto".to_string(),
            Some(m) => {
                let registry = SolverRegistry::default();
                registry
                    .get(m.get_ref())
                    .map_err(|e| self.error(m.span(), e.to_string()))?;
                m.get_ref().clone()
            }
        };
        let solver = SolverSettings {
            method,
            config,
            consumer_points: self.count(
                &s.consumer_points,
                "consumer_points",
                fpfn_market::oracle::MIN_CONSUMER_POINTS as i64,
                grid_defaults.consumer_points,
            )?,
            price_points: self.count(
                &s.price_points,
                "price_points",
                fpfn_market::oracle::MIN_PRICE_POINTS as i64,
                grid_defaults.price_points,
            )?,
        };

        let inv = raw.invest.unwrap_or_default();
        let firm = match &inv.firm {
            None => None,
            Some(v) => Some(match v.get_ref() {
                1 => Firm::One,
                2 => Firm::Two,
                other => {
                    return Err(self.error(v.span(), format!("`firm` must be 1 or 2, got {other}")))
                }
            }),
        };
        let invest = InvestSettings {
            firm,
            epsilon: self
                .opt_float(&inv.epsilon, "epsilon", |x| x > 0.0 && x < 1.0, "in (0, 1)")?
                .unwrap_or(DEFAULT_EPSILON),
            fp_target: self.opt_float(&inv.fp_target, "fp_target", unit, UNIT)?,
            fn_target: self.opt_float(&inv.fn_target, "fn_target", unit, UNIT)?,
            size: self.opt_float(&inv.size, "size", positive, "positive")?,
        };

        let run = raw.run.unwrap_or_default();
        let seed = match &run.seed {
            None => 0,
            Some(v) if *v.get_ref() >= 0 => *v.get_ref() as u64,
            Some(v) => return Err(self.error(v.span(), "`seed` must be non-negative")),
        };
        Ok(ScenarioConfig {
            duopoly,
            mix,
            cost,
            solver,
            invest,
            out: run.out.map(PathBuf::from),
            seed,
            verify_instances: self.count(&run.verify_instances, "verify_instances", 0, DEFAULT_VERIFY_INSTANCES)?,
        })
    }
}
