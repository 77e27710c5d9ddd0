//! Experiment runs: deterministic seed derivation, replicate parallelism, and
//! the CSV / JSON-manifest output contract.
//!
//! Replicate `i` of a run with master seed `s` draws from the ChaCha12 stream
//! obtained by `ChaCha12Rng::seed_from_u64(s)` followed by `set_stream(i)`.
//! Replicates are embarrassingly parallel; results are collected in replicate
//! order, so output bytes do not depend on the thread count.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::Serialize;

use brwlab_core::formulas::{
    gap_survival, joint_order_cdf, maxima_cdf, minima_survival, order_stat_cdf, GapOptions,
    WExpectation,
};
use brwlab_core::limit::{sample_limit_cox, sample_limit_sscdppp, sample_w, LimitSampleConfig, WMode};
use brwlab_core::sim::{extremes, simulate_replicate, SimReplicate};
use brwlab_core::{Error, Interval, PointSample, Result};

use crate::config::ValidatedConfig;

pub const SCHEMA_VERSION: u32 = 1;

/// Per-replicate RNG stream: one ChaCha12 key per master seed, one stream per
/// replicate index.
pub fn replicate_rng(master_seed: u64, replicate: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
    rng.set_stream(replicate);
    rng
}

/// SplitMix64 finalizer; used to derive sub-run seeds from the master seed.
pub fn mix_seed(master_seed: u64, tag: u64) -> u64 {
    let mut z = master_seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Work-stealing pool over replicates; 0 threads means one per core.
pub fn build_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::resource(format!("thread pool construction failed: {e}")))
}

#[derive(Debug, Clone, Serialize)]
pub struct RngManifest {
    pub family: &'static str,
    pub crate_name: &'static str,
    pub crate_version: &'static str,
    pub derivation: &'static str,
}

impl Default for RngManifest {
    fn default() -> Self {
        RngManifest {
            family: "chacha12",
            crate_name: "rand_chacha",
            crate_version: "0.9",
            derivation: "ChaCha12Rng::seed_from_u64(master_seed); set_stream(replicate_index)",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FailedReplicate {
    pub replicate: u64,
    pub n: Option<u32>,
    pub error: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub command: String,
    pub software_version: &'static str,
    pub config_hash: String,
    pub config: crate::config::ExperimentConfig,
    pub rng: RngManifest,
    pub derived: serde_json::Value,
    pub outputs: Vec<String>,
    pub incomplete: bool,
    pub failed_replicates: Vec<FailedReplicate>,
}

impl Manifest {
    fn new(command: &str, vc: &ValidatedConfig, derived: serde_json::Value) -> Self {
        Manifest {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            software_version: env!("CARGO_PKG_VERSION"),
            config_hash: vc.config_hash.clone(),
            config: vc.config.clone(),
            rng: RngManifest::default(),
            derived,
            outputs: Vec::new(),
            incomplete: false,
            failed_replicates: Vec::new(),
        }
    }

    fn write(&self, dir: &Path, name: &str) -> Result<PathBuf> {
        let path = dir.join(name);
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::resource(format!("manifest serialization failed: {e}")))?;
        fs::write(&path, text)?;
        Ok(path)
    }
}

fn derived_constants(vc: &ValidatedConfig) -> Result<serde_json::Value> {
    let mut b_n = serde_json::Map::new();
    for &n in &vc.config.n_list {
        let b = vc.step.scaling_constant(vc.offspring.mean(), n)?;
        b_n.insert(format!("{n}"), serde_json::json!(b));
    }
    let model_doc = serde_json::to_value(vc.model.to_document())
        .map_err(|e| Error::resource(format!("model serialization failed: {e}")))?;
    Ok(serde_json::json!({
        "mu": vc.offspring.mean(),
        "e_z_log_plus_z": vc.offspring.e_z_log_plus_z(),
        "b_n": serde_json::Value::Object(b_n),
        "limit_model": model_doc,
    }))
}

fn format_field(value: f64) -> String {
    format!("{value}")
}

/// One summary row: order statistics, gaps, the unwindowed minimum, and the
/// per-set counts. Missing order statistics are left empty.
fn summary_fields(
    positions: &PointSample,
    minimum: Option<f64>,
    k: usize,
    sets: &[Interval],
) -> Result<Vec<String>> {
    let (upper, _) = positions.top_order_stats(k);
    let mut fields = Vec::with_capacity(2 * k + sets.len());
    for j in 0..k {
        fields.push(upper.get(j).map(|&v| format_field(v)).unwrap_or_default());
    }
    for j in 0..k.saturating_sub(1) {
        let gap = match (upper.get(j), upper.get(j + 1)) {
            (Some(a), Some(b)) => Some(a - b),
            _ => None,
        };
        fields.push(gap.map(format_field).unwrap_or_default());
    }
    fields.push(minimum.map(format_field).unwrap_or_default());
    for c in positions.counts(sets)? {
        fields.push(format!("{c}"));
    }
    Ok(fields)
}

fn csv_header(k: usize, n_sets: usize, with_source: bool) -> String {
    let mut cols = vec!["replicate_id".to_string()];
    if with_source {
        cols.push("source".to_string());
    }
    cols.extend(
        ["n", "population", "w_proxy", "restarts"]
            .iter()
            .map(|s| s.to_string()),
    );
    for j in 1..=k {
        cols.push(format!("M{j}"));
    }
    for j in 1..k {
        cols.push(format!("G{j}"));
    }
    cols.push("Mmin".to_string());
    for j in 1..=n_sets {
        cols.push(format!("count_A{j}"));
    }
    cols.join(",")
}

#[derive(Debug)]
pub struct RunOutputs {
    pub files: Vec<PathBuf>,
    pub manifest: PathBuf,
}

/// `simulate`: one CSV per generation in `n_list`, plus a JSON manifest.
/// Deterministic for a fixed config; failed replicates are recorded in the
/// manifest and surface as a resource error after partial output is written.
pub fn run_simulate(vc: &ValidatedConfig) -> Result<RunOutputs> {
    let dir = Path::new(&vc.config.out_dir);
    fs::create_dir_all(dir)?;
    let pool = build_pool(vc.config.threads)?;
    let k = vc.config.k as usize;
    let mut manifest = Manifest::new("simulate", vc, derived_constants(vc)?);
    let mut files = Vec::new();

    for &n in &vc.config.n_list {
        let results: Vec<(u64, Result<SimReplicate>)> = pool.install(|| {
            (0..vc.config.replicates)
                .into_par_iter()
                .map(|i| {
                    let mut rng = replicate_rng(vc.config.master_seed, i);
                    let rep = simulate_replicate(
                        &vc.offspring,
                        &vc.step,
                        n,
                        vc.config.window,
                        vc.config.track_one_jump,
                        &vc.caps,
                        &mut rng,
                    );
                    (i, rep)
                })
                .collect()
        });
        let path = dir.join(format!("simulate_n{n}.csv"));
        let mut out = fs::File::create(&path)?;
        writeln!(out, "# config_hash={}", vc.config_hash)?;
        writeln!(out, "{}", csv_header(k, vc.count_sets.len(), false))?;
        for (id, rep) in &results {
            match rep {
                Ok(rep) => {
                    let ext = extremes(rep, k);
                    let mut fields = vec![
                        format!("{id}"),
                        format!("{n}"),
                        format!("{}", rep.population),
                        format_field(rep.w_proxy),
                        format!("{}", rep.restarts),
                    ];
                    fields.extend(summary_fields(
                        &rep.positions,
                        Some(ext.minimum),
                        k,
                        &vc.count_sets,
                    )?);
                    writeln!(out, "{}", fields.join(","))?;
                }
                Err(err) => manifest.failed_replicates.push(FailedReplicate {
                    replicate: *id,
                    n: Some(n),
                    error: err.to_string(),
                }),
            }
        }
        manifest.outputs.push(path.display().to_string());
        files.push(path);
    }

    manifest.incomplete = !manifest.failed_replicates.is_empty();
    let manifest_path = manifest.write(dir, "simulate_manifest.json")?;
    if manifest.incomplete {
        return Err(Error::resource(format!(
            "{} replicate(s) failed; partial outputs and the failure list are in {}",
            manifest.failed_replicates.len(),
            manifest_path.display()
        )));
    }
    Ok(RunOutputs {
        files,
        manifest: manifest_path,
    })
}

/// Which limit representation(s) `limit-sample` draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    Cox,
    Sscdppp,
    Both,
}

/// `limit-sample`: summary CSVs in the simulate schema plus a source column.
pub fn run_limit_sample(vc: &ValidatedConfig, representation: Representation) -> Result<RunOutputs> {
    let dir = Path::new(&vc.config.out_dir);
    fs::create_dir_all(dir)?;
    let pool = build_pool(vc.config.threads)?;
    let k = vc.config.k as usize;
    let mut manifest = Manifest::new("limit-sample", vc, derived_constants(vc)?);
    let mut files = Vec::new();

    let sources: Vec<&str> = match representation {
        Representation::Cox => vec!["cox"],
        Representation::Sscdppp => vec!["sscdppp"],
        Representation::Both => vec!["cox", "sscdppp"],
    };
    for (which, source) in sources.iter().enumerate() {
        let seed = mix_seed(vc.config.master_seed, which as u64);
        let cfg = LimitSampleConfig::new(&vc.model, vc.config.window)?.with_w_mode(vc.w_mode);
        let results: Vec<(u64, Result<PointSample>)> = pool.install(|| {
            (0..vc.config.limit_draws)
                .into_par_iter()
                .map(|i| {
                    let mut rng = replicate_rng(seed, i);
                    let sample = if *source == "cox" {
                        sample_limit_cox(&cfg, &mut rng)
                    } else {
                        sample_limit_sscdppp(&cfg, &mut rng)
                    };
                    (i, sample)
                })
                .collect()
        });
        let path = dir.join(format!("limit_{source}.csv"));
        let mut out = fs::File::create(&path)?;
        writeln!(out, "# config_hash={}", vc.config_hash)?;
        writeln!(out, "{}", csv_header(k, vc.count_sets.len(), true))?;
        for (id, sample) in &results {
            match sample {
                Ok(sample) => {
                    let mut fields = vec![
                        format!("{id}"),
                        source.to_string(),
                        String::new(),
                        String::new(),
                        String::new(),
                        String::new(),
                    ];
                    fields.extend(summary_fields(
                        sample,
                        sample.min_location(),
                        k,
                        &vc.count_sets,
                    )?);
                    writeln!(out, "{}", fields.join(","))?;
                }
                Err(err) => manifest.failed_replicates.push(FailedReplicate {
                    replicate: *id,
                    n: None,
                    error: err.to_string(),
                }),
            }
        }
        manifest.outputs.push(path.display().to_string());
        files.push(path);
    }

    manifest.incomplete = !manifest.failed_replicates.is_empty();
    let manifest_path = manifest.write(dir, "limit_sample_manifest.json")?;
    if manifest.incomplete {
        return Err(Error::resource(format!(
            "{} draw(s) failed; partial outputs and the failure list are in {}",
            manifest.failed_replicates.len(),
            manifest_path.display()
        )));
    }
    Ok(RunOutputs {
        files,
        manifest: manifest_path,
    })
}

/// `formulas`: closed-form tables as CSV
/// `(statistic, k, x, u, v, t, value, stderr, method)`.
pub fn run_formulas(vc: &ValidatedConfig) -> Result<RunOutputs> {
    let dir = Path::new(&vc.config.out_dir);
    fs::create_dir_all(dir)?;
    let model = &vc.model;
    // W strategy: exact laws where known, Monte Carlo over simulated W
    // otherwise
    let w_samples: Vec<f64>;
    let (w, method) = match vc.w_mode {
        WMode::Constant => (WExpectation::Constant(1.0), "constant-w"),
        WMode::ExponentialUnit => (WExpectation::ExponentialUnit, "exponential-w"),
        WMode::Simulated { depth } => {
            let cfg = LimitSampleConfig::new(model, vc.config.window.max(0.01))?
                .with_w_mode(WMode::Simulated { depth });
            let mut rng = replicate_rng(mix_seed(vc.config.master_seed, 0xF0), 0);
            w_samples = (0..20_000)
                .map(|_| sample_w(&cfg, &mut rng))
                .collect::<Result<Vec<f64>>>()?;
            (WExpectation::Samples(&w_samples), "mc-w")
        }
    };

    let path = dir.join("formulas.csv");
    let mut out = fs::File::create(&path)?;
    writeln!(out, "# config_hash={}", vc.config_hash)?;
    writeln!(out, "statistic,k,x,u,v,t,value,stderr,method")?;
    for &x in &vc.config.formula_xs {
        let v = maxima_cdf(model, x)?;
        writeln!(out, "maxima,1,{x},,,,{v},0,phi-star")?;
        let v = minima_survival(model, x)?;
        writeln!(out, "minima_survival,,{x},,,,{v},0,phi-star")?;
        for &k in &vc.config.formula_ks {
            let est = order_stat_cdf(model, k, x, &w)?;
            writeln!(out, "order_stat,{k},{x},,,,{},{},{method}", est.value, est.stderr)?;
        }
    }
    for &(u, v) in &vc.config.joint_pairs {
        for &k in &vc.config.formula_ks {
            let est = joint_order_cdf(model, k, u, v, &w)?;
            writeln!(out, "joint_order,{k},,{u},{v},,{},{},{method}", est.value, est.stderr)?;
        }
    }
    let mut gap_rng = replicate_rng(mix_seed(vc.config.master_seed, 0xF1), 0);
    for &t in &vc.config.gap_ts {
        for &k in &vc.config.formula_ks {
            let opts = GapOptions {
                w_mode: vc.w_mode,
                ..GapOptions::default()
            };
            let est = gap_survival(model, k, t, &w, &opts, &mut gap_rng)?;
            writeln!(
                out,
                "gap_survival,{k},,,,{t},{},{},grid",
                est.formula, est.formula_uncertainty
            )?;
            writeln!(
                out,
                "gap_survival,{k},,,,{t},{},{},monte-carlo",
                est.monte_carlo, est.mc_stderr
            )?;
        }
    }

    let mut manifest = Manifest::new("formulas", vc, derived_constants(vc)?);
    manifest.outputs.push(path.display().to_string());
    let manifest_path = manifest.write(dir, "formulas_manifest.json")?;
    Ok(RunOutputs {
        files: vec![path],
        manifest: manifest_path,
    })
}
