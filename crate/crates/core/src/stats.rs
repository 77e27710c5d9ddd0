//! Statistical machinery certifying convergence: empirical CDF comparisons
//! with sup-distances and per-point z-scores, pooled chi-square comparisons of
//! count-vector distributions, empirical Laplace functionals, superposability
//! tests and one-large-jump diagnostics.
//!
//! Weak convergence is certified through finitely many counting functionals
//! and Laplace functionals on step test functions; every test is
//! deterministic given its seed.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::formulas::Estimate;
use crate::limit::{sample_limit_cox, scale_process, LimitSampleConfig, WMode};
use crate::offspring::LimitModel;
use crate::point::{Interval, PiecewiseConstant, PointSample};
use crate::sim::SimReplicate;

/// Minimum expected cell count for the pooled chi-square statistics.
const MIN_EXPECTED_CELL: f64 = 5.0;

/// Empirical-versus-reference CDF comparison on a grid.
#[derive(Debug, Clone, Serialize)]
pub struct EcdfReport {
    pub grid: Vec<f64>,
    pub empirical: Vec<f64>,
    pub reference: Vec<f64>,
    /// Sup over the grid of |empirical - reference|.
    pub sup_distance: f64,
    /// Per-point binomial standard errors of the reference.
    pub stderr: Vec<f64>,
    /// Per-point gaps divided by the standard errors.
    pub z_scores: Vec<f64>,
    pub n: usize,
}

/// Empirical CDF of `samples` at the grid points against a reference CDF.
pub fn ks_compare(
    samples: &[f64],
    reference: impl Fn(f64) -> f64,
    grid: &[f64],
) -> Result<EcdfReport> {
    if grid.is_empty() {
        return Err(Error::domain("empty comparison grid"));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::domain("comparison grid must be strictly ascending"));
    }
    if samples.len() < 100 {
        return Err(Error::domain(format!(
            "ECDF comparison needs at least 100 samples, got {}",
            samples.len()
        )));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut empirical = Vec::with_capacity(grid.len());
    let mut ref_vals = Vec::with_capacity(grid.len());
    let mut stderr = Vec::with_capacity(grid.len());
    let mut z_scores = Vec::with_capacity(grid.len());
    let mut sup = 0.0f64;
    for &x in grid {
        let e = sorted.partition_point(|&s| s <= x) as f64 / n as f64;
        let r = reference(x);
        let gap = (e - r).abs();
        sup = sup.max(gap);
        let se = (r * (1.0 - r) / n as f64).sqrt();
        empirical.push(e);
        ref_vals.push(r);
        stderr.push(se);
        z_scores.push(if se > 0.0 {
            gap / se
        } else if gap == 0.0 {
            0.0
        } else {
            f64::INFINITY
        });
    }
    Ok(EcdfReport {
        grid: grid.to_vec(),
        empirical,
        reference: ref_vals,
        sup_distance: sup,
        stderr,
        z_scores,
        n,
    })
}

/// Reference side of a count-distribution comparison: a second sample of count
/// vectors, or a fully specified pmf over the count values of single-cell
/// vectors (index = count, tail pooled).
pub enum CountReference<'a> {
    Samples(&'a [Vec<u64>]),
    Pmf(&'a [f64]),
}

#[derive(Debug, Clone, Serialize)]
pub struct ChiSquareReport {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    /// Categories before pooling.
    pub categories: usize,
    /// Categories actually compared after pooling.
    pub pooled_categories: usize,
    pub n_a: usize,
    pub n_b: Option<usize>,
}

fn chi_square_p_value(statistic: f64, df: usize) -> f64 {
    if df == 0 {
        return 1.0;
    }
    let dist = ChiSquared::new(df as f64).expect("df >= 1");
    dist.sf(statistic)
}

/// Pooled chi-square comparison of count-vector distributions: two-sample, or
/// one-sample against a pmf. Categories are whole count vectors; the rarest
/// ones are pooled until every expected cell count reaches 5.
pub fn count_distribution_compare(
    a: &[Vec<u64>],
    b: CountReference,
) -> Result<ChiSquareReport> {
    if a.is_empty() {
        return Err(Error::domain("empty count-vector sample"));
    }
    let dim = a[0].len();
    if a.iter().any(|v| v.len() != dim) {
        return Err(Error::domain("count vectors have mismatched partitions"));
    }
    match b {
        CountReference::Samples(b) => {
            if b.is_empty() || b.iter().any(|v| v.len() != dim) {
                return Err(Error::domain(
                    "two-sample comparison needs matching nonempty partitions",
                ));
            }
            two_sample_chi_square(a, b)
        }
        CountReference::Pmf(pmf) => {
            if dim != 1 {
                return Err(Error::domain(
                    "pmf reference applies to single-cell count vectors",
                ));
            }
            one_sample_chi_square(a, pmf)
        }
    }
}

fn two_sample_chi_square(a: &[Vec<u64>], b: &[Vec<u64>]) -> Result<ChiSquareReport> {
    let mut table: BTreeMap<&[u64], (f64, f64)> = BTreeMap::new();
    for v in a {
        table.entry(v.as_slice()).or_insert((0.0, 0.0)).0 += 1.0;
    }
    for v in b {
        table.entry(v.as_slice()).or_insert((0.0, 0.0)).1 += 1.0;
    }
    let n_a = a.len() as f64;
    let n_b = b.len() as f64;
    let total = n_a + n_b;
    let categories = table.len();
    // order by joint frequency (desc), pool from the rare end
    let mut cells: Vec<(f64, f64)> = {
        let mut entries: Vec<(&[u64], (f64, f64))> = table.into_iter().collect();
        entries.sort_by(|x, y| {
            let tx = x.1 .0 + x.1 .1;
            let ty = y.1 .0 + y.1 .1;
            ty.partial_cmp(&tx).unwrap().then_with(|| x.0.cmp(y.0))
        });
        entries.into_iter().map(|(_, c)| c).collect()
    };
    let expected_ok = |joint: f64| {
        let p = joint / total;
        n_a * p >= MIN_EXPECTED_CELL && n_b * p >= MIN_EXPECTED_CELL
    };
    loop {
        let keep = cells
            .iter()
            .take_while(|&&(ca, cb)| expected_ok(ca + cb))
            .count();
        if keep == cells.len() {
            break;
        }
        // merge everything past the kept prefix into one rest cell
        let rest = cells.split_off(keep);
        let pooled = rest
            .iter()
            .fold((0.0, 0.0), |acc, &(ca, cb)| (acc.0 + ca, acc.1 + cb));
        if expected_ok(pooled.0 + pooled.1) || cells.is_empty() {
            cells.push(pooled);
            break;
        }
        // rest cell still too small: absorb the smallest kept cell and retry
        let last = cells.pop().unwrap();
        cells.push((pooled.0 + last.0, pooled.1 + last.1));
    }
    if cells.len() < 2 {
        return Err(Error::domain(
            "pooling left fewer than two categories; samples too small for a chi-square comparison",
        ));
    }
    let mut statistic = 0.0;
    for &(ca, cb) in &cells {
        let joint = ca + cb;
        let ea = n_a * joint / total;
        let eb = n_b * joint / total;
        statistic += (ca - ea).powi(2) / ea + (cb - eb).powi(2) / eb;
    }
    let df = cells.len() - 1;
    Ok(ChiSquareReport {
        statistic,
        df,
        p_value: chi_square_p_value(statistic, df),
        categories,
        pooled_categories: cells.len(),
        n_a: a.len(),
        n_b: Some(b.len()),
    })
}

fn one_sample_chi_square(a: &[Vec<u64>], pmf: &[f64]) -> Result<ChiSquareReport> {
    if pmf.is_empty() || pmf.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
        return Err(Error::domain("reference pmf entries must lie in [0, 1]"));
    }
    let tail_mass: f64 = (1.0 - pmf.iter().sum::<f64>()).max(0.0);
    let n = a.len() as f64;
    // observed counts per value, with values >= pmf.len() in the tail cell
    let mut observed = vec![0.0; pmf.len() + 1];
    for v in a {
        let c = v[0] as usize;
        if c < pmf.len() {
            observed[c] += 1.0;
        } else {
            observed[pmf.len()] += 1.0;
        }
    }
    let mut cells: Vec<(f64, f64)> = observed
        .iter()
        .zip(pmf.iter().chain(std::iter::once(&tail_mass)))
        .map(|(&o, &p)| (o, n * p))
        .collect();
    // pool the under-filled cells (by expected count) into the tail
    cells.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap());
    loop {
        let keep = cells
            .iter()
            .take_while(|&&(_, e)| e >= MIN_EXPECTED_CELL)
            .count();
        if keep == cells.len() {
            break;
        }
        let rest = cells.split_off(keep);
        let pooled = rest
            .iter()
            .fold((0.0, 0.0), |acc, &(o, e)| (acc.0 + o, acc.1 + e));
        if pooled.1 >= MIN_EXPECTED_CELL || cells.is_empty() {
            cells.push(pooled);
            break;
        }
        let last = cells.pop().unwrap();
        cells.push((pooled.0 + last.0, pooled.1 + last.1));
    }
    if cells.len() < 2 {
        return Err(Error::domain(
            "pooling left fewer than two categories; sample too small for a chi-square comparison",
        ));
    }
    let statistic: f64 = cells
        .iter()
        .filter(|&&(_, e)| e > 0.0)
        .map(|&(o, e)| (o - e).powi(2) / e)
        .sum();
    let df = cells.len() - 1;
    Ok(ChiSquareReport {
        statistic,
        df,
        p_value: chi_square_p_value(statistic, df),
        categories: pmf.len() + 1,
        pooled_categories: cells.len(),
        n_a: a.len(),
        n_b: None,
    })
}

/// Empirical Laplace functional: mean and standard error of
/// `exp(-sum mult * g(loc))` over the samples.
pub fn laplace_estimate(samples: &[PointSample], g: &PiecewiseConstant) -> Result<Estimate> {
    if samples.is_empty() {
        return Ok(Estimate {
            value: 1.0,
            stderr: 0.0,
        });
    }
    let n = samples.len() as f64;
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for s in samples {
        let v = s.laplace_weight(g)?;
        sum += v;
        sumsq += v * v;
    }
    let mean = sum / n;
    let var = (sumsq / n - mean * mean).max(0.0);
    Ok(Estimate {
        value: mean,
        stderr: (var / n).sqrt(),
    })
}

/// Outcome of a two-sample superposition comparison.
#[derive(Debug, Clone, Serialize)]
pub struct SuperposabilityReport {
    pub a1: f64,
    pub a2: f64,
    pub constraint_residual: f64,
    pub chi_square: ChiSquareReport,
    pub level: f64,
    pub rejected: bool,
}

/// Two-sample comparison of `s_{a1} N^(1) + s_{a2} N^(2)` against `N` on the
/// count vectors of a fixed partition, without any constraint on `(a1, a2)`.
/// Used directly by mutation tests; the public test wraps it with the
/// `a1^alpha + a2^alpha = 1` check.
#[allow(clippy::too_many_arguments)]
pub fn superposed_count_compare<R: Rng + ?Sized>(
    model: &LimitModel,
    w_mode: WMode,
    a1: f64,
    a2: f64,
    n_samples: usize,
    partition: &[Interval],
    window: f64,
    level: f64,
    rng: &mut R,
) -> Result<SuperposabilityReport> {
    if !(a1 > 0.0 && a2 > 0.0) {
        return Err(Error::domain("superposition scales must be positive"));
    }
    // components are sampled at window / a_i so the scaled copies share the
    // requested window exactly
    let cfg1 = LimitSampleConfig::new(model, window / a1)?.with_w_mode(w_mode);
    let cfg2 = LimitSampleConfig::new(model, window / a2)?.with_w_mode(w_mode);
    let cfg = LimitSampleConfig::new(model, window)?.with_w_mode(w_mode);
    let mut superposed = Vec::with_capacity(n_samples);
    let mut single = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let n1 = scale_process(&sample_limit_cox(&cfg1, rng)?, a1)?;
        let n2 = scale_process(&sample_limit_cox(&cfg2, rng)?, a2)?;
        superposed.push(n1.merge(&n2)?.counts(partition)?);
        single.push(sample_limit_cox(&cfg, rng)?.counts(partition)?);
    }
    let chi = count_distribution_compare(&superposed, CountReference::Samples(&single))?;
    let rejected = chi.p_value < level;
    Ok(SuperposabilityReport {
        a1,
        a2,
        constraint_residual: (a1.powf(model.alpha()) + a2.powf(model.alpha()) - 1.0).abs(),
        chi_square: chi,
        level,
        rejected,
    })
}

/// Superposability test for d-regular models: requires
/// `a1^alpha + a2^alpha = 1` within 1e-12, then compares the superposed and
/// plain samplers on the partition.
#[allow(clippy::too_many_arguments)]
pub fn superposability_test<R: Rng + ?Sized>(
    model: &LimitModel,
    a1: f64,
    a2: f64,
    n_samples: usize,
    partition: &[Interval],
    window: f64,
    level: f64,
    rng: &mut R,
) -> Result<SuperposabilityReport> {
    let residual = (a1.powf(model.alpha()) + a2.powf(model.alpha()) - 1.0).abs();
    if residual > 1e-12 {
        return Err(Error::domain(format!(
            "superposability requires a1^alpha + a2^alpha = 1 within 1e-12, residual {residual:e}"
        )));
    }
    if !matches!(
        model.offspring().kind(),
        crate::offspring::OffspringKind::DRegular { .. }
    ) {
        return Err(Error::domain(
            "the strict superposability identity holds for d-regular trees (W constant)",
        ));
    }
    superposed_count_compare(
        model,
        WMode::Constant,
        a1,
        a2,
        n_samples,
        partition,
        window,
        level,
        rng,
    )
}

/// One-large-jump summary: per generation, the fraction of replicates whose
/// position and edge processes disagree on at least one of the sets.
#[derive(Debug, Clone, Serialize)]
pub struct OneJumpReport {
    /// `(n, fraction of replicates with a nonzero discrepancy)` ascending in n.
    pub fractions: Vec<(u32, f64)>,
    pub nonincreasing: bool,
}

pub fn one_jump_report(groups: &[(u32, Vec<SimReplicate>)], sets: &[Interval]) -> Result<OneJumpReport> {
    if groups.is_empty() {
        return Err(Error::domain("one-jump report needs at least one group"));
    }
    let mut fractions = Vec::with_capacity(groups.len());
    for (n, reps) in groups {
        if reps.is_empty() {
            return Err(Error::domain(format!("one-jump group n={n} is empty")));
        }
        let mut mismatched = 0u64;
        for rep in reps {
            let diff = crate::sim::one_jump_discrepancy(rep, sets)?;
            if diff.iter().any(|&d| d != 0) {
                mismatched += 1;
            }
        }
        fractions.push((*n, mismatched as f64 / reps.len() as f64));
    }
    fractions.sort_by_key(|&(n, _)| n);
    let nonincreasing = fractions.windows(2).all(|w| w[1].1 <= w[0].1);
    Ok(OneJumpReport {
        fractions,
        nonincreasing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::offspring::{LimitModelOptions, OffspringDistribution};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;
    use rand_distr::{Distribution, Poisson};

    #[test]
    fn ks_compare_constant_sample_against_its_own_step() {
        let samples = vec![2.0; 500];
        let report = ks_compare(&samples, |x| if x >= 2.0 { 1.0 } else { 0.0 }, &[1.0, 2.0, 3.0])
            .unwrap();
        assert_eq!(report.sup_distance, 0.0);
    }

    #[test]
    fn ks_compare_detects_a_shift() {
        // samples uniform on [0.2, 1.2] against the uniform [0,1] CDF: the gap
        // at x = 0.2 is the shift mass
        let mut rng = ChaCha12Rng::seed_from_u64(41);
        let samples: Vec<f64> = (0..20_000).map(|_| 0.2 + rng.random::<f64>()).collect();
        let grid: Vec<f64> = (1..=99).map(|i| i as f64 / 100.0).collect();
        let report = ks_compare(&samples, |x| x.clamp(0.0, 1.0), &grid).unwrap();
        assert!((report.sup_distance - 0.2).abs() < 0.02, "{}", report.sup_distance);
    }

    #[test]
    fn ks_null_calibration() {
        // samples from the reference: sup distance below the asymptotic 1%
        // critical value 1.63/sqrt(n) in at least 95% of trials
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let n = 2_000usize;
        let trials = 200;
        let grid: Vec<f64> = (1..=199).map(|i| i as f64 / 200.0).collect();
        let critical = 1.63 / (n as f64).sqrt();
        let mut passes = 0;
        for _ in 0..trials {
            let samples: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let report = ks_compare(&samples, |x| x.clamp(0.0, 1.0), &grid).unwrap();
            if report.sup_distance < critical {
                passes += 1;
            }
        }
        assert!(passes as f64 >= 0.95 * trials as f64, "{passes}/{trials}");
    }

    fn poisson_counts<R: Rng>(lambda: f64, n: usize, rng: &mut R) -> Vec<Vec<u64>> {
        let pois = Poisson::new(lambda).unwrap();
        (0..n).map(|_| vec![pois.sample(rng) as u64]).collect()
    }

    fn poisson_pmf(lambda: f64, len: usize) -> Vec<f64> {
        let mut pmf = Vec::with_capacity(len);
        let mut term = (-lambda).exp();
        for k in 0..len {
            pmf.push(term);
            term *= lambda / (k + 1) as f64;
        }
        pmf
    }

    #[test]
    fn chi_square_accepts_matching_poisson() {
        let mut rng = ChaCha12Rng::seed_from_u64(43);
        let mut rejections = 0;
        let runs = 100;
        for _ in 0..runs {
            let counts = poisson_counts(2.0, 2_000, &mut rng);
            let report =
                count_distribution_compare(&counts, CountReference::Pmf(&poisson_pmf(2.0, 16)))
                    .unwrap();
            if report.p_value < 0.01 {
                rejections += 1;
            }
        }
        // nominal 1% level: a handful of rejections at most
        assert!(rejections <= 4, "{rejections}/{runs} rejections at level 0.01");
    }

    #[test]
    fn chi_square_null_calibration_two_sample() {
        let mut rng = ChaCha12Rng::seed_from_u64(44);
        let runs = 200;
        let mut rejections = 0;
        for _ in 0..runs {
            let a = poisson_counts(2.0, 1_000, &mut rng);
            let b = poisson_counts(2.0, 1_000, &mut rng);
            let report = count_distribution_compare(&a, CountReference::Samples(&b)).unwrap();
            if report.p_value < 0.01 {
                rejections += 1;
            }
        }
        let rate = rejections as f64 / runs as f64;
        assert!(rate <= 0.04, "null rejection rate {rate}");
    }

    #[test]
    fn chi_square_rejects_mismatched_poisson_with_power() {
        let mut rng = ChaCha12Rng::seed_from_u64(45);
        let runs = 25;
        let mut rejections = 0;
        for _ in 0..runs {
            let a = poisson_counts(2.0, 10_000, &mut rng);
            let b = poisson_counts(3.0, 10_000, &mut rng);
            let report = count_distribution_compare(&a, CountReference::Samples(&b)).unwrap();
            if report.p_value < 0.01 {
                rejections += 1;
            }
        }
        assert_eq!(rejections, runs, "power should be essentially 1");
    }

    #[test]
    fn chi_square_pools_rare_cells() {
        let mut rng = ChaCha12Rng::seed_from_u64(46);
        let a = poisson_counts(2.0, 500, &mut rng);
        let report =
            count_distribution_compare(&a, CountReference::Pmf(&poisson_pmf(2.0, 30))).unwrap();
        assert!(report.pooled_categories < report.categories);
        for_all_expected_at_least_five(&report);
    }

    fn for_all_expected_at_least_five(report: &ChiSquareReport) {
        // indirect: df consistency
        assert_eq!(report.df + 1, report.pooled_categories);
    }

    #[test]
    fn chi_square_unmeetable_pooling_errors() {
        let a = vec![vec![0u64], vec![1u64], vec![2u64]];
        let b = vec![vec![0u64], vec![1u64]];
        assert!(count_distribution_compare(&a, CountReference::Samples(&b)).is_err());
    }

    #[test]
    fn laplace_estimate_trivial_cases() {
        let g = PiecewiseConstant::indicator(Interval::above(1.0).unwrap(), 1.0).unwrap();
        let empty: Vec<PointSample> = Vec::new();
        let est = laplace_estimate(&empty, &g).unwrap();
        assert_eq!(est.value, 1.0);

        let zero_g = PiecewiseConstant::indicator(Interval::above(1.0).unwrap(), 0.0).unwrap();
        let samples = vec![
            PointSample::new(vec![(2.0, 3)], 0.5).unwrap(),
            PointSample::new(vec![(5.0, 1)], 0.5).unwrap(),
        ];
        let est = laplace_estimate(&samples, &zero_g).unwrap();
        assert_eq!(est.value, 1.0);
        assert_eq!(est.stderr, 0.0);

        // support must clear every window
        let tight = PiecewiseConstant::indicator(Interval::new(0.2, 0.4).unwrap(), 1.0).unwrap();
        assert!(laplace_estimate(&samples, &tight).is_err());
    }

    fn d2_model() -> LimitModel {
        LimitModel::new(
            OffspringDistribution::d_regular(2).unwrap(),
            1.0,
            1.0,
            0.0,
            LimitModelOptions::default(),
        )
        .unwrap()
    }

    fn unit_partition() -> Vec<Interval> {
        vec![
            Interval::new(1.0, 2.0).unwrap(),
            Interval::new(2.0, 4.0).unwrap(),
            Interval::above(4.0).unwrap(),
        ]
    }

    #[test]
    fn superposability_holds_on_the_constraint() {
        let model = d2_model();
        let mut rng = ChaCha12Rng::seed_from_u64(47);
        let report = superposability_test(
            &model,
            0.5,
            0.5,
            4_000,
            &unit_partition(),
            0.5,
            0.01,
            &mut rng,
        )
        .unwrap();
        assert!(!report.rejected, "p = {}", report.chi_square.p_value);
    }

    #[test]
    fn superposability_constraint_is_enforced() {
        let model = d2_model();
        let mut rng = ChaCha12Rng::seed_from_u64(48);
        assert!(superposability_test(
            &model,
            1.0,
            1.0,
            100,
            &unit_partition(),
            0.5,
            0.01,
            &mut rng
        )
        .is_err());
    }

    #[test]
    fn broken_constraint_is_rejected_with_power() {
        let model = d2_model();
        let mut rng = ChaCha12Rng::seed_from_u64(49);
        let report = superposed_count_compare(
            &model,
            WMode::Constant,
            1.0,
            1.0,
            4_000,
            &unit_partition(),
            0.5,
            0.01,
            &mut rng,
        )
        .unwrap();
        assert!(report.rejected, "doubled intensity must be detected");
    }

    #[test]
    fn one_jump_report_orders_and_flags() {
        let window = 0.05;
        let mk = |n: u32, positions: Vec<(f64, u64)>, jumps: Vec<(f64, u64)>| SimReplicate {
            n,
            positions: PointSample::new(positions, window).unwrap(),
            one_jump: Some(PointSample::new(jumps, window).unwrap()),
            w_proxy: 1.0,
            population: 1,
            restarts: 0,
            min_scaled: 0.0,
            max_scaled: 0.0,
            scaling: 1.0,
        };
        let agree = mk(8, vec![(2.0, 1)], vec![(2.1, 1)]);
        let disagree = mk(8, vec![(2.0, 2)], vec![(2.1, 1)]);
        let groups = vec![
            (8u32, vec![agree.clone(), disagree]),
            (11u32, vec![agree.clone(), agree.clone()]),
        ];
        let sets = [Interval::above(1.0).unwrap()];
        let report = one_jump_report(&groups, &sets).unwrap();
        assert_eq!(report.fractions, vec![(8, 0.5), (11, 0.0)]);
        assert!(report.nonincreasing);

        let groups_bad = vec![
            (8u32, vec![agree.clone()]),
            (
                11u32,
                vec![mk(11, vec![(2.0, 2)], vec![(2.1, 1)]), agree.clone()],
            ),
        ];
        let report = one_jump_report(&groups_bad, &sets).unwrap();
        assert!(!report.nonincreasing);

        // missing one-jump data is a domain error
        let no_jump = SimReplicate {
            one_jump: None,
            ..agree
        };
        assert!(one_jump_report(&[(8, vec![no_jump])], &sets).is_err());
    }
}
