//! Experiment configuration: a single JSON document with embedded defaults,
//! full up-front validation against the module preconditions, and a content
//! hash that every output file embeds.

use brwlab_core::limit::WMode;
use brwlab_core::offspring::LimitModelOptions;
use brwlab_core::sim::SimCaps;
use brwlab_core::{
    Error, Interval, LimitModel, OffspringDistribution, PiecewiseConstant, Result,
    StepDistribution,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OffspringSpec {
    Geometric { b: f64 },
    DRegular { d: u32 },
    Finite { pmf: Vec<(u32, f64)> },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StepSpec {
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
    pub x_m: f64,
    #[serde(default)]
    pub log_beta: Option<f64>,
}

/// `(lo, hi]` with `null` endpoints meaning the infinities.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct IntervalSpec {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
}

impl IntervalSpec {
    pub fn to_interval(self) -> Result<Interval> {
        Interval::new(
            self.lo.unwrap_or(f64::NEG_INFINITY),
            self.hi.unwrap_or(f64::INFINITY),
        )
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct PieceSpec {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct CapsSpec {
    pub population: u64,
    pub restarts: u64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum WModeSpec {
    /// Exact law where known, simulated otherwise.
    Auto,
    Constant,
    Exponential,
    Simulated { depth: u32 },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub offspring: OffspringSpec,
    pub step: StepSpec,
    /// Generations to simulate; runs share replicate RNG streams so trends
    /// across n are computed under common random numbers.
    pub n_list: Vec<u32>,
    pub replicates: u64,
    /// Collection window: atoms with |x| <= window are discarded.
    pub window: f64,
    /// Order-statistic depth reported in the CSVs.
    pub k: u32,
    pub count_sets: Vec<IntervalSpec>,
    pub ecdf_grid: Vec<f64>,
    /// Step test functions for Laplace functionals.
    pub g_functions: Vec<Vec<PieceSpec>>,
    pub master_seed: u64,
    /// 0 means one thread per available core.
    pub threads: usize,
    pub out_dir: String,
    pub track_one_jump: bool,
    pub caps: CapsSpec,
    pub w_mode: WModeSpec,
    /// Draw count for `limit-sample`.
    pub limit_draws: u64,
    pub series_tol: f64,
    pub gamma_y_max: u64,
    pub phi_depth: u32,
    /// Order-statistic depths evaluated by `formulas`.
    pub formula_ks: Vec<u32>,
    /// Evaluation abscissas for `formulas` (positive).
    pub formula_xs: Vec<f64>,
    /// `(u, v)` pairs for the joint order-statistic law.
    pub joint_pairs: Vec<(f64, f64)>,
    /// Gap thresholds for the dual-route gap law.
    pub gap_ts: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            offspring: OffspringSpec::Geometric { b: 0.5 },
            step: StepSpec {
                alpha: 1.0,
                p: 1.0,
                q: 0.0,
                x_m: 1.0,
                log_beta: None,
            },
            n_list: vec![8, 12],
            replicates: 1_000,
            window: 0.05,
            k: 3,
            count_sets: vec![
                IntervalSpec {
                    lo: Some(1.0),
                    hi: Some(2.0),
                },
                IntervalSpec {
                    lo: Some(2.0),
                    hi: Some(4.0),
                },
                IntervalSpec {
                    lo: Some(4.0),
                    hi: None,
                },
            ],
            ecdf_grid: vec![0.5, 1.0, 2.0, 4.0, 8.0],
            g_functions: vec![vec![
                PieceSpec {
                    lo: Some(1.0),
                    hi: Some(2.0),
                    value: 1.0,
                },
                PieceSpec {
                    lo: Some(2.0),
                    hi: Some(4.0),
                    value: 0.5,
                },
            ]],
            master_seed: 20260810,
            threads: 0,
            out_dir: "out".to_string(),
            track_one_jump: false,
            caps: CapsSpec {
                population: 10_000_000,
                restarts: 1_000,
            },
            w_mode: WModeSpec::Auto,
            limit_draws: 10_000,
            series_tol: 1e-12,
            gamma_y_max: 64,
            phi_depth: 60,
            formula_ks: vec![1, 2, 3],
            formula_xs: vec![0.5, 1.0, 2.0, 4.0, 8.0],
            joint_pairs: vec![(1.0, 2.0), (2.0, 4.0)],
            gap_ts: vec![0.5, 1.0, 2.0],
        }
    }
}

/// Everything `ExperimentConfig` describes, resolved into core objects.
pub struct ValidatedConfig {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub offspring: OffspringDistribution,
    pub step: StepDistribution,
    pub model: LimitModel,
    pub count_sets: Vec<Interval>,
    pub g_functions: Vec<PiecewiseConstant>,
    pub caps: SimCaps,
    pub w_mode: WMode,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config(format!("config parse error: {e}")))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization cannot fail")
    }

    /// Hex digest of the canonical JSON serialization; embedded into every
    /// output file so artifacts from different configs are distinguishable.
    /// Execution details that cannot influence results (thread count, output
    /// directory) are normalized away before hashing.
    pub fn content_hash(&self) -> String {
        let mut normalized = self.clone();
        normalized.threads = 0;
        normalized.out_dir = String::new();
        let bytes = serde_json::to_vec(&normalized).expect("config serialization cannot fail");
        let digest = Sha256::digest(&bytes);
        let mut hex = String::with_capacity(16);
        for b in digest.iter().take(8) {
            hex.push_str(&format!("{b:02x}"));
        }
        hex
    }

    /// Checks every referenced module precondition before any work starts.
    pub fn validate(&self) -> Result<ValidatedConfig> {
        let offspring = match &self.offspring {
            OffspringSpec::Geometric { b } => OffspringDistribution::geometric(*b)?,
            OffspringSpec::DRegular { d } => OffspringDistribution::d_regular(*d)?,
            OffspringSpec::Finite { pmf } => OffspringDistribution::finite_support(pmf)?,
        };
        let step = match self.step.log_beta {
            None => StepDistribution::pareto(self.step.alpha, self.step.p, self.step.q, self.step.x_m)?,
            Some(beta) => StepDistribution::log_perturbed(
                self.step.alpha,
                self.step.p,
                self.step.q,
                self.step.x_m,
                beta,
            )?,
        };
        if self.n_list.is_empty() {
            return Err(Error::config("n_list must not be empty"));
        }
        if self.n_list.iter().any(|&n| n < 1) {
            return Err(Error::config("every generation in n_list must be >= 1"));
        }
        if !(self.window >= 0.0) {
            return Err(Error::config(format!(
                "window must be >= 0, got {}",
                self.window
            )));
        }
        if self.k < 1 {
            return Err(Error::config("order-statistic depth k must be >= 1"));
        }
        let count_sets: Vec<Interval> = self
            .count_sets
            .iter()
            .map(|s| s.to_interval())
            .collect::<Result<_>>()?;
        for iv in &count_sets {
            if iv.distance_from_zero() < self.window {
                return Err(Error::config(format!(
                    "count set ({}, {}] reaches inside the window {}",
                    iv.lo, iv.hi, self.window
                )));
            }
        }
        let g_functions: Vec<PiecewiseConstant> = self
            .g_functions
            .iter()
            .map(|pieces| {
                PiecewiseConstant::new(
                    pieces
                        .iter()
                        .map(|p| {
                            Ok((
                                IntervalSpec {
                                    lo: p.lo,
                                    hi: p.hi,
                                }
                                .to_interval()?,
                                p.value,
                            ))
                        })
                        .collect::<Result<Vec<_>>>()?,
                )
            })
            .collect::<Result<_>>()?;
        let model = LimitModel::new(
            offspring.clone(),
            self.step.alpha,
            self.step.p,
            self.step.q,
            LimitModelOptions {
                series_tol: self.series_tol,
                gamma_y_max: self.gamma_y_max,
                phi_depth: self.phi_depth,
            },
        )?;
        let w_mode = match self.w_mode {
            WModeSpec::Auto => match &self.offspring {
                OffspringSpec::DRegular { .. } => WMode::Constant,
                OffspringSpec::Geometric { .. } => WMode::ExponentialUnit,
                OffspringSpec::Finite { .. } => WMode::Simulated { depth: 16 },
            },
            WModeSpec::Constant => WMode::Constant,
            WModeSpec::Exponential => WMode::ExponentialUnit,
            WModeSpec::Simulated { depth } => WMode::Simulated { depth },
        };
        for &x in &self.formula_xs {
            if !(x > 0.0) {
                return Err(Error::config(format!("formula abscissas must be > 0, got {x}")));
            }
        }
        for &(u, v) in &self.joint_pairs {
            if !(u > 0.0 && u < v) {
                return Err(Error::config(format!(
                    "joint pairs need 0 < u < v, got ({u}, {v})"
                )));
            }
        }
        for &k in &self.formula_ks {
            if !(1..=brwlab_core::formulas::MAX_ORDER_STAT_K).contains(&k) {
                return Err(Error::config(format!("formula k out of range: {k}")));
            }
        }
        Ok(ValidatedConfig {
            config_hash: self.content_hash(),
            config: self.clone(),
            offspring,
            step,
            model,
            count_sets,
            g_functions,
            caps: SimCaps {
                max_population: self.caps.population,
                max_restarts: self.caps.restarts,
            },
            w_mode,
        })
    }
}

#[cfg(test)]
#[allow(clippy::field_reassign_with_default)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        let json = cfg.to_json_pretty();
        let back = ExperimentConfig::from_json(&json).unwrap();
        assert_eq!(cfg, back);
        // bit-identical round trip of the serialized form
        assert_eq!(json, back.to_json_pretty());
        assert_eq!(cfg.content_hash(), back.content_hash());
    }

    #[test]
    fn hash_distinguishes_configs() {
        let cfg = ExperimentConfig::default();
        let mut other = cfg.clone();
        other.master_seed += 1;
        assert_ne!(cfg.content_hash(), other.content_hash());
        // execution details do not change the experiment identity
        let mut threaded = cfg.clone();
        threaded.threads = 7;
        threaded.out_dir = "elsewhere".into();
        assert_eq!(cfg.content_hash(), threaded.content_hash());
    }

    #[test]
    fn invalid_configs_are_rejected_up_front() {
        let mut cfg = ExperimentConfig::default();
        cfg.offspring = OffspringSpec::Geometric { b: 1.5 };
        assert!(cfg.validate().is_err());

        let mut cfg = ExperimentConfig::default();
        cfg.step.p = 0.7; // p + q != 1
        assert!(cfg.validate().is_err());

        let mut cfg = ExperimentConfig::default();
        cfg.count_sets = vec![IntervalSpec {
            lo: Some(0.01),
            hi: Some(1.0),
        }];
        assert!(cfg.validate().is_err(), "set inside the window");

        let mut cfg = ExperimentConfig::default();
        cfg.n_list = vec![];
        assert!(cfg.validate().is_err());

        assert!(ExperimentConfig::from_json("{\"nope\": 1}").is_err());
    }
}
