//! Flat JSON run configuration with command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use branchmax_core::motion::{JumpLaw, LatticeStep, MotionModel};
use branchmax_core::offspring::{make_explicit, make_stable_tail, OffspringLaw};
use branchmax_core::theory::{theta, FixedPointMethod, TheoryParams};
use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::ConfigError;

/// Every configurable key. Used both as the file schema and as the flag set;
/// `None` means "not given".
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct ConfigValues {
    /// tail-mc | fixed-point | bvp | theory-table | lemma2-check
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<String>,

    /// Stable tail index, in (1, 2)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Stable tail constant
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    /// Branching rate
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Brownian variance per unit time
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta2: Option<f64>,
    /// Offspring variance for the finite-variance constants (theory-table)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<f64>,

    /// stable | binary | explicit
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offspring: Option<String>,
    /// Explicit offspring probabilities p_0, p_1, ...
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offspring_p: Option<Vec<f64>>,

    /// brownian | lattice | compound-poisson
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub motion: Option<String>,
    /// Smallest lattice step
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lattice_min_step: Option<i64>,
    /// Lattice step probabilities starting at the smallest step
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lattice_probs: Option<Vec<f64>>,
    /// Compound Poisson jump rate
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jump_rate: Option<f64>,
    /// Jump sizes
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jump_values: Option<Vec<f64>>,
    /// Jump size probabilities
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jump_probs: Option<Vec<f64>>,
    /// Diffusion variance of the compound Poisson model
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diffusion_eta2: Option<f64>,

    /// Maximum particles per tree
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    /// Early-stop level
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_stop: Option<f64>,
    /// Master seed
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Number of trees
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_trees: Option<u64>,
    /// Worker threads
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Evaluation grid for the tail estimate
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_grid: Option<Vec<f64>>,
    /// Lower end of the exponent fit window
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_min: Option<f64>,
    /// Upper end of the exponent fit window
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_max: Option<f64>,
    /// Wilson interval confidence level
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,

    /// Lower end of the window where the scaled tail is checked
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check_min: Option<f64>,
    /// Upper end of the window where the scaled tail is checked
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check_max: Option<f64>,
    /// Tolerance used by the experiment's checks
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assert_tol: Option<f64>,
    /// Allowed distance of the fitted slope from the predicted one
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assert_slope_tol: Option<f64>,

    /// Lattice window for the fixed point
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_max: Option<usize>,
    /// Fixed-point sup-norm tolerance
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Fixed-point iteration cap
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    /// newton | jacobi
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,

    /// BVP domain length
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_max: Option<f64>,
    /// BVP step size
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_step: Option<f64>,

    /// Points where f(v)/v^(alpha-1) is evaluated
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_grid: Option<Vec<f64>>,

    /// CSV output path
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_csv: Option<PathBuf>,
    /// JSON summary output path
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_json: Option<PathBuf>,
}

impl ConfigValues {
    /// Parse a flat JSON object.
    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let Value::Object(map) = value else {
            return Err(ConfigError::Parse {
                line: 1,
                column: 1,
                message: "top level must be a JSON object".into(),
            });
        };
        Self::from_map(map)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    fn from_map(map: Map<String, Value>) -> Result<Self, ConfigError> {
        for (key, value) in &map {
            if !KEYS.contains(&key.as_str()) {
                return Err(ConfigError::invalid(key, "unknown key"));
            }
            if value.is_object() {
                return Err(ConfigError::invalid(key, "nested objects are not allowed"));
            }
        }
        serde_json::from_value(Value::Object(map.clone())).map_err(|_| {
            // locate the offending key for the report
            for (key, value) in map {
                let single = Map::from_iter([(key.clone(), value)]);
                if let Err(e) = serde_json::from_value::<ConfigValues>(Value::Object(single)) {
                    return ConfigError::invalid(&key, &e.to_string());
                }
            }
            ConfigError::invalid("<config>", "malformed value")
        })
    }

    /// Values in `over` replace those in `self`.
    pub fn overridden_by(&self, over: &ConfigValues) -> ConfigValues {
        let mut base = self.to_map();
        base.extend(over.to_map());
        serde_json::from_value(Value::Object(base)).expect("round trip of known keys")
    }

    pub fn to_map(&self) -> Map<String, Value> {
        match serde_json::to_value(self).expect("config serializes") {
            Value::Object(m) => m,
            _ => unreachable!(),
        }
    }
}

const KEYS: &[&str] = &[
    "experiment",
    "alpha",
    "kappa",
    "beta",
    "eta2",
    "sigma2",
    "offspring",
    "offspring_p",
    "motion",
    "lattice_min_step",
    "lattice_probs",
    "jump_rate",
    "jump_values",
    "jump_probs",
    "diffusion_eta2",
    "budget",
    "x_stop",
    "seed",
    "n_trees",
    "workers",
    "x_grid",
    "fit_min",
    "fit_max",
    "confidence",
    "check_min",
    "check_max",
    "assert_tol",
    "assert_slope_tol",
    "x_max",
    "tol",
    "max_iter",
    "method",
    "y_max",
    "grid_step",
    "v_grid",
    "out_csv",
    "out_json",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    TailMc,
    FixedPoint,
    Bvp,
    TheoryTable,
    Lemma2Check,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::TailMc => "tail-mc",
            Experiment::FixedPoint => "fixed-point",
            Experiment::Bvp => "bvp",
            Experiment::TheoryTable => "theory-table",
            Experiment::Lemma2Check => "lemma2-check",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Ok(match s {
            "tail-mc" => Experiment::TailMc,
            "fixed-point" => Experiment::FixedPoint,
            "bvp" => Experiment::Bvp,
            "theory-table" => Experiment::TheoryTable,
            "lemma2-check" => Experiment::Lemma2Check,
            _ => {
                return Err(ConfigError::invalid(
                    "experiment",
                    "one of tail-mc, fixed-point, bvp, theory-table, lemma2-check",
                ))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OffspringSpec {
    Stable,
    Binary,
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum MotionSpec {
    Brownian,
    Lattice { min_step: i64, probs: Vec<f64> },
    CompoundPoisson { rate: f64, values: Vec<f64>, probs: Vec<f64>, diffusion_eta2: f64 },
}

/// A validated configuration. `effective` holds every value the run uses,
/// defaults included, and reproduces the run when loaded again.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub effective: ConfigValues,
    pub experiment: Experiment,
    pub alpha: f64,
    pub kappa: f64,
    pub beta: f64,
    pub eta2: f64,
    pub sigma2: Option<f64>,
    pub offspring: OffspringSpec,
    pub motion: MotionSpec,
    pub budget: u64,
    pub x_stop: Option<f64>,
    pub seed: u64,
    pub n_trees: u64,
    pub workers: usize,
    pub x_grid: Vec<f64>,
    pub fit_window: (f64, f64),
    pub check_window: (f64, f64),
    pub confidence: f64,
    pub assert_tol: f64,
    pub assert_slope_tol: f64,
    pub x_max: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub method: FixedPointMethod,
    pub y_max: f64,
    pub grid_step: f64,
    pub v_grid: Vec<f64>,
    pub out_csv: PathBuf,
    pub out_json: PathBuf,
}

/// Merge file and flag values and validate the result.
pub fn load_config(path: Option<&Path>, flags: &ConfigValues) -> Result<RunConfig, ConfigError> {
    let file = match path {
        Some(p) => ConfigValues::from_file(p)?,
        None => ConfigValues::default(),
    };
    RunConfig::from_values(file.overridden_by(flags))
}

fn require<T>(cond: bool, field: &str, constraint: &str, v: T) -> Result<T, ConfigError> {
    if cond {
        Ok(v)
    } else {
        Err(ConfigError::invalid(field, constraint))
    }
}

fn positive(field: &str, v: f64) -> Result<f64, ConfigError> {
    require(v > 0.0 && v.is_finite(), field, "must be positive and finite", v)
}

fn core_err(field: &str) -> impl Fn(branchmax_core::Error) -> ConfigError + '_ {
    move |e| ConfigError::invalid(field, &e.to_string())
}

impl RunConfig {
    pub fn from_values(values: ConfigValues) -> Result<Self, ConfigError> {
        let mut v = values;
        let experiment: Experiment = v
            .experiment
            .as_deref()
            .ok_or_else(|| ConfigError::invalid("experiment", "required"))?
            .parse()?;
        use Experiment::*;

        let alpha = *v.alpha.get_or_insert(1.5);
        require(alpha > 1.0 && alpha < 2.0, "alpha", "must lie in (1, 2)", ())?;
        let kappa = positive("kappa", *v.kappa.get_or_insert(0.2))?;
        let beta = positive("beta", *v.beta.get_or_insert(1.0))?;
        let eta2 = positive("eta2", *v.eta2.get_or_insert(1.0))?;
        let sigma2 = v.sigma2.map(|s| positive("sigma2", s)).transpose()?;

        let uses_law = matches!(experiment, TailMc | FixedPoint);
        let offspring = if uses_law {
            let default = if experiment == TailMc { "stable" } else { "binary" };
            match v.offspring.get_or_insert_with(|| default.into()).as_str() {
                "stable" => OffspringSpec::Stable,
                "binary" => OffspringSpec::Binary,
                "explicit" => OffspringSpec::Explicit(
                    v.offspring_p
                        .clone()
                        .ok_or_else(|| ConfigError::invalid("offspring_p", "required for explicit offspring"))?,
                ),
                _ => return Err(ConfigError::invalid("offspring", "one of stable, binary, explicit")),
            }
        } else {
            OffspringSpec::Stable
        };
        if experiment == Lemma2Check {
            make_stable_tail(alpha, kappa).map_err(core_err("kappa"))?;
        }

        let motion = if uses_law {
            let default = if experiment == FixedPoint || offspring != OffspringSpec::Stable {
                "lattice"
            } else {
                "brownian"
            };
            match v.motion.get_or_insert_with(|| default.into()).as_str() {
                "brownian" => MotionSpec::Brownian,
                "lattice" => MotionSpec::Lattice {
                    min_step: *v.lattice_min_step.get_or_insert(-1),
                    probs: v.lattice_probs.get_or_insert_with(|| vec![0.5, 0.0, 0.5]).clone(),
                },
                "compound-poisson" => MotionSpec::CompoundPoisson {
                    rate: *v.jump_rate.get_or_insert(1.0),
                    values: v.jump_values.get_or_insert_with(|| vec![-1.0, 1.0]).clone(),
                    probs: v.jump_probs.get_or_insert_with(|| vec![0.5, 0.5]).clone(),
                    diffusion_eta2: *v.diffusion_eta2.get_or_insert(0.0),
                },
                _ => {
                    return Err(ConfigError::invalid(
                        "motion",
                        "one of brownian, lattice, compound-poisson",
                    ))
                }
            }
        } else {
            MotionSpec::Brownian
        };

        let mut cfg = RunConfig {
            effective: ConfigValues::default(),
            experiment,
            alpha,
            kappa,
            beta,
            eta2,
            sigma2,
            offspring,
            motion,
            budget: 0,
            x_stop: None,
            seed: *v.seed.get_or_insert(1),
            n_trees: 0,
            workers: 1,
            x_grid: Vec::new(),
            fit_window: (0.0, 0.0),
            check_window: (0.0, 0.0),
            confidence: 0.0,
            assert_tol: 0.0,
            assert_slope_tol: 0.0,
            x_max: 0,
            tol: 0.0,
            max_iter: 0,
            method: FixedPointMethod::Newton,
            y_max: 0.0,
            grid_step: 0.0,
            v_grid: Vec::new(),
            out_csv: v
                .out_csv
                .get_or_insert_with(|| format!("{experiment}.csv").into())
                .clone(),
            out_json: v
                .out_json
                .get_or_insert_with(|| format!("{experiment}.json").into())
                .clone(),
        };
        // typed objects are built once here so that every error surfaces
        // before any work starts
        if uses_law {
            cfg.law()?;
            cfg.motion_model()?;
        }

        match experiment {
            TailMc => {
                cfg.budget = *v.budget.get_or_insert(1_000_000);
                require(cfg.budget >= 1, "budget", "must be at least 1", ())?;
                cfg.n_trees = *v.n_trees.get_or_insert(100_000);
                require(cfg.n_trees >= 1, "n_trees", "must be at least 1", ())?;
                let default_workers = std::thread::available_parallelism().map_or(1, |n| n.get());
                cfg.workers = *v.workers.get_or_insert(default_workers);
                require(cfg.workers >= 1, "workers", "must be at least 1", ())?;
                let grid = v.x_grid.get_or_insert_with(|| vec![8.0, 10.0, 12.0, 14.0, 16.0]).clone();
                require(
                    !grid.is_empty()
                        && grid.iter().all(|x| *x > 0.0 && x.is_finite())
                        && grid.windows(2).all(|w| w[0] < w[1]),
                    "x_grid",
                    "must be nonempty, positive and strictly increasing",
                    (),
                )?;
                cfg.x_stop = v.x_stop;
                if let Some(s) = cfg.x_stop {
                    require(s >= 0.0 && s.is_finite(), "x_stop", "must be nonnegative", ())?;
                    require(
                        grid.last().is_some_and(|&g| g <= s),
                        "x_stop",
                        "must be at least the largest grid point",
                        (),
                    )?;
                }
                let lo = grid[0];
                let hi = *grid.last().unwrap();
                cfg.fit_window = (*v.fit_min.get_or_insert(lo), *v.fit_max.get_or_insert(hi));
                cfg.check_window = (*v.check_min.get_or_insert(lo), *v.check_max.get_or_insert(hi));
                require(cfg.fit_window.0 <= cfg.fit_window.1, "fit_max", "must be at least fit_min", ())?;
                require(cfg.check_window.0 <= cfg.check_window.1, "check_max", "must be at least check_min", ())?;
                cfg.x_grid = grid;
                cfg.confidence = *v.confidence.get_or_insert(0.99);
                require(
                    cfg.confidence > 0.0 && cfg.confidence < 1.0,
                    "confidence",
                    "must lie in (0, 1)",
                    (),
                )?;
                cfg.assert_tol = positive("assert_tol", *v.assert_tol.get_or_insert(0.25))?;
                cfg.assert_slope_tol = positive("assert_slope_tol", *v.assert_slope_tol.get_or_insert(0.3))?;
            }
            FixedPoint => {
                cfg.check_window = (*v.check_min.get_or_insert(100.0), *v.check_max.get_or_insert(200.0));
                require(
                    cfg.check_window.0 >= 1.0 && cfg.check_window.0 <= cfg.check_window.1,
                    "check_max",
                    "window must satisfy 1 <= check_min <= check_max",
                    (),
                )?;
                cfg.x_max = *v.x_max.get_or_insert(4000);
                require(
                    cfg.x_max as f64 >= 10.0 * cfg.check_window.1,
                    "x_max",
                    "must be at least 10 times check_max",
                    (),
                )?;
                cfg.tol = positive("tol", *v.tol.get_or_insert(1e-12))?;
                cfg.max_iter = *v.max_iter.get_or_insert(1_000_000);
                require(cfg.max_iter >= 1, "max_iter", "must be at least 1", ())?;
                cfg.method = match v.method.get_or_insert_with(|| "newton".into()).as_str() {
                    "newton" => FixedPointMethod::Newton,
                    "jacobi" => FixedPointMethod::Jacobi,
                    _ => return Err(ConfigError::invalid("method", "one of newton, jacobi")),
                };
                if !matches!(cfg.motion, MotionSpec::Lattice { .. }) {
                    return Err(ConfigError::invalid("motion", "fixed-point requires lattice motion"));
                }
                if cfg.offspring == OffspringSpec::Stable {
                    return Err(ConfigError::invalid("offspring", "fixed-point requires a finite law"));
                }
                cfg.assert_tol = positive("assert_tol", *v.assert_tol.get_or_insert(0.10))?;
            }
            Bvp => {
                let params = cfg.theory_params(eta2, None);
                let th = theta(&params);
                cfg.y_max = *v.y_max.get_or_insert(40.0 / th);
                require(
                    cfg.y_max.is_finite() && cfg.y_max >= 10.0 / th,
                    "y_max",
                    "must be at least 10/theta",
                    (),
                )?;
                cfg.grid_step = *v.grid_step.get_or_insert(1e-3);
                require(
                    cfg.grid_step > 0.0 && cfg.grid_step <= 0.01,
                    "grid_step",
                    "must lie in (0, 0.01]",
                    (),
                )?;
                cfg.assert_tol = positive("assert_tol", *v.assert_tol.get_or_insert(1e-6))?;
            }
            TheoryTable => {
                cfg.assert_tol = positive("assert_tol", *v.assert_tol.get_or_insert(1e-9))?;
            }
            Lemma2Check => {
                let grid = v
                    .v_grid
                    .get_or_insert_with(|| vec![1e-2, 1e-3, 1e-4, 1e-5, 1e-6])
                    .clone();
                require(
                    !grid.is_empty() && grid.iter().all(|&x| x > 0.0 && x <= 1.0),
                    "v_grid",
                    "values must lie in (0, 1]",
                    (),
                )?;
                cfg.v_grid = grid;
                cfg.assert_tol = positive("assert_tol", *v.assert_tol.get_or_insert(0.005))?;
            }
        }
        cfg.effective = v;
        Ok(cfg)
    }

    pub fn law(&self) -> Result<OffspringLaw, ConfigError> {
        match &self.offspring {
            OffspringSpec::Stable => make_stable_tail(self.alpha, self.kappa).map_err(core_err("kappa")),
            OffspringSpec::Binary => make_explicit(&[0.5, 0.0, 0.5]).map_err(core_err("offspring")),
            OffspringSpec::Explicit(p) => make_explicit(p).map_err(core_err("offspring_p")),
        }
    }

    pub fn motion_model(&self) -> Result<MotionModel, ConfigError> {
        match &self.motion {
            MotionSpec::Brownian => MotionModel::brownian(self.eta2).map_err(core_err("eta2")),
            MotionSpec::Lattice { min_step, probs } => {
                let step = LatticeStep::new(*min_step, probs.clone()).map_err(core_err("lattice_probs"))?;
                MotionModel::lattice(step).map_err(core_err("lattice_probs"))
            }
            MotionSpec::CompoundPoisson { rate, values, probs, diffusion_eta2 } => {
                let jumps = JumpLaw::new(values.clone(), probs.clone()).map_err(core_err("jump_probs"))?;
                MotionModel::compound_poisson_diffusion(*rate, jumps, *diffusion_eta2)
                    .map_err(core_err("jump_values"))
            }
        }
    }

    pub(crate) fn theory_params(&self, eta2: f64, sigma2: Option<f64>) -> TheoryParams {
        TheoryParams {
            alpha: self.alpha,
            kappa: self.kappa,
            beta: self.beta,
            eta2,
            sigma2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        RunConfig::from_values(ConfigValues::from_json_str(text)?)
    }

    #[test]
    fn theory_table_file_is_valid() {
        let cfg = parse(r#"{"experiment":"theory-table","alpha":1.5,"kappa":0.2,"beta":1,"eta2":1}"#).unwrap();
        assert_eq!(cfg.experiment, Experiment::TheoryTable);
        assert_eq!(cfg.alpha, 1.5);
    }

    #[test]
    fn alpha_outside_range_is_rejected() {
        let flags = ConfigValues {
            experiment: Some("theory-table".into()),
            alpha: Some(2.5),
            ..Default::default()
        };
        match RunConfig::from_values(flags) {
            Err(ConfigError::Validation { field, .. }) => assert_eq!(field, "alpha"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn flags_override_file() {
        let file = ConfigValues::from_json_str(r#"{"experiment":"theory-table","alpha":1.5}"#).unwrap();
        let flags = ConfigValues { alpha: Some(1.2), ..Default::default() };
        let cfg = RunConfig::from_values(file.overridden_by(&flags)).unwrap();
        assert_eq!(cfg.alpha, 1.2);
        assert_eq!(cfg.effective.alpha, Some(1.2));
    }

    #[test]
    fn unknown_key_names_the_key() {
        match ConfigValues::from_json_str(r#"{"experiment":"bvp","alpah":1.5}"#) {
            Err(ConfigError::Validation { field, constraint }) => {
                assert_eq!(field, "alpah");
                assert_eq!(constraint, "unknown key");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wrong_type_names_the_key() {
        match ConfigValues::from_json_str(r#"{"experiment":"bvp","budget":"many"}"#) {
            Err(ConfigError::Validation { field, .. }) => assert_eq!(field, "budget"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn nesting_is_rejected() {
        assert!(matches!(
            ConfigValues::from_json_str(r#"{"experiment":{"name":"bvp"}}"#),
            Err(ConfigError::Validation { .. })
        ));
    }

    #[test]
    fn parse_error_reports_position() {
        match ConfigValues::from_json_str("{\n  \"alpha\": 1.5,\n  oops\n}") {
            Err(ConfigError::Parse { line, column, .. }) => {
                assert_eq!(line, 3);
                assert!(column >= 3);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn effective_config_reproduces_itself() {
        let cfg = parse(r#"{"experiment":"tail-mc","n_trees":10,"workers":2}"#).unwrap();
        let again = RunConfig::from_values(cfg.effective.clone()).unwrap();
        assert_eq!(again.effective, cfg.effective);
        assert_eq!(cfg.x_grid, vec![8.0, 10.0, 12.0, 14.0, 16.0]);
        assert_eq!(cfg.motion, MotionSpec::Brownian);
    }

    #[test]
    fn explicit_law_defaults_to_lattice_motion() {
        let cfg = parse(r#"{"experiment":"tail-mc","offspring":"binary","x_grid":[15,20]}"#).unwrap();
        assert!(matches!(cfg.motion, MotionSpec::Lattice { min_step: -1, .. }));
    }

    #[test]
    fn grid_above_stop_threshold_is_rejected() {
        assert!(parse(r#"{"experiment":"tail-mc","x_grid":[8,20],"x_stop":16}"#).is_err());
    }

    #[test]
    fn fixed_point_needs_a_finite_law() {
        assert!(parse(r#"{"experiment":"fixed-point","offspring":"stable"}"#).is_err());
        assert!(parse(r#"{"experiment":"fixed-point","motion":"brownian"}"#).is_err());
        assert!(parse(r#"{"experiment":"fixed-point","x_max":100}"#).is_err());
        assert!(parse(r#"{"experiment":"fixed-point","offspring":"explicit","offspring_p":[0.3,0.5,0.2]}"#).is_err());
    }

    #[test]
    fn bvp_domain_is_checked() {
        assert!(parse(r#"{"experiment":"bvp","y_max":5}"#).is_err());
        assert!(parse(r#"{"experiment":"bvp","grid_step":0.1}"#).is_err());
        let cfg = parse(r#"{"experiment":"bvp"}"#).unwrap();
        assert!((cfg.y_max - 150.22509).abs() < 1e-3);
    }

    #[test]
    fn infeasible_kappa_is_rejected() {
        match parse(r#"{"experiment":"lemma2-check","kappa":10}"#) {
            Err(ConfigError::Validation { field, .. }) => assert_eq!(field, "kappa"),
            other => panic!("{other:?}"),
        }
    }
}
