//! Parametric offspring laws for supercritical Galton-Watson processes with
//! exact probability-generating-function machinery: generation distributions,
//! survival and extinction probabilities, the normalizing constant `r` and the
//! cluster-size law `gamma`, and the Laplace transform of the martingale limit
//! `W` obtained by iterating the functional equation `phi(z) = f(phi(z/mu))`.
//!
//! All fixed-point iterations run in the survival coordinate `y = 1 - s`. Near
//! the repelling fixed point `s = 1` the plain iteration `s -> f(s)` destroys
//! every significant digit after a few dozen steps, while `y -> 1 - f(1 - y)`
//! admits cancellation-free closed forms for the supported families.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Largest number of support points a generation pmf may occupy.
pub const GENERATION_SUPPORT_CAP: u64 = 2_000_000;
/// Default iteration depth for the `W`-Laplace transform.
pub const DEFAULT_PHI_DEPTH: u32 = 60;
/// Rejection attempts allowed when sampling a generation size conditioned on
/// survival.
const SURVIVAL_SAMPLING_ATTEMPTS: u32 = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub enum OffspringKind {
    /// `P(Z_1 = k) = b (1-b)^{k-1}` for `k >= 1`; mean `1/b`.
    Geometric { b: f64 },
    /// `Z_1 = d` deterministically, `d >= 2`.
    DRegular { d: u32 },
    /// Arbitrary finite support `(k, P(Z_1 = k))`, mean `> 1`.
    FiniteSupport { pmf: Vec<(u32, f64)> },
}

#[derive(Debug, Clone)]
pub struct OffspringDistribution {
    kind: OffspringKind,
    mean: f64,
    e_z_log_plus_z: f64,
}

/// Sparse generation pmf together with the probability mass omitted by
/// truncation.
#[derive(Debug, Clone)]
pub struct GenerationPmf {
    pub probs: BTreeMap<u64, f64>,
    pub omitted: f64,
}

/// Truncated series value for `r = sum mu^{-i} P(Z_i > 0)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RSeries {
    pub value: f64,
    /// Number of series terms summed (`I + 1`).
    pub terms: u32,
    /// Geometric bound on the omitted tail, `mu^{-I} / (mu - 1)`.
    pub remainder_bound: f64,
}

/// Cluster-size law `gamma(y)` tabulated up to `y_max`.
#[derive(Debug, Clone, Serialize)]
pub struct GammaPmf {
    /// Strictly positive entries `(y, gamma(y))`, ascending in `y`.
    pub probs: Vec<(u64, f64)>,
    pub y_max: u64,
    /// Mass assigned to `y > y_max`.
    pub tail_mass: f64,
    pub terms: u32,
    pub remainder_bound: f64,
}

impl GammaPmf {
    pub fn value(&self, y: u64) -> f64 {
        match self.probs.binary_search_by_key(&y, |&(yy, _)| yy) {
            Ok(idx) => self.probs[idx].1,
            Err(_) => 0.0,
        }
    }
}

/// `phi(u)` estimate with the successive-iterate difference as error estimate.
#[derive(Debug, Clone, Copy)]
pub struct PhiEstimate {
    pub value: f64,
    pub error_estimate: f64,
    /// Cleared when the iteration had not stabilized within the allowed depth;
    /// a degraded-precision flag, not a failure.
    pub converged: bool,
}

impl OffspringDistribution {
    pub fn geometric(b: f64) -> Result<Self> {
        if !(b > 0.0 && b < 1.0) {
            return Err(Error::config(format!(
                "geometric offspring parameter must lie in (0, 1), got {b}"
            )));
        }
        let mean = 1.0 / b;
        // E[Z log+ Z] = sum_{k>=2} k ln k * b (1-b)^{k-1}
        let mut e = 0.0;
        let mut term = b; // P(Z = 1)
        let mut k = 1u64;
        loop {
            if k >= 2 {
                e += term * k as f64 * (k as f64).ln();
            }
            term *= 1.0 - b;
            k += 1;
            if (term * k as f64 * (k as f64).ln()) < 1e-18 * (1.0 + e) && k as f64 > 8.0 / b {
                break;
            }
        }
        Ok(OffspringDistribution {
            kind: OffspringKind::Geometric { b },
            mean,
            e_z_log_plus_z: e,
        })
    }

    pub fn d_regular(d: u32) -> Result<Self> {
        if d < 2 {
            return Err(Error::config(format!(
                "d-regular offspring requires d >= 2, got {d}"
            )));
        }
        Ok(OffspringDistribution {
            kind: OffspringKind::DRegular { d },
            mean: d as f64,
            e_z_log_plus_z: d as f64 * (d as f64).ln(),
        })
    }

    pub fn finite_support(pmf: &[(u32, f64)]) -> Result<Self> {
        let mut entries: Vec<(u32, f64)> = pmf.to_vec();
        entries.sort_by_key(|&(k, _)| k);
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::config("finite-support pmf has duplicate values"));
        }
        let mut total = 0.0;
        let mut mean = 0.0;
        let mut e = 0.0;
        for &(k, p) in &entries {
            if !(p >= 0.0) || !p.is_finite() {
                return Err(Error::config(format!(
                    "finite-support probability for k={k} must be >= 0, got {p}"
                )));
            }
            total += p;
            mean += k as f64 * p;
            if k >= 2 {
                e += k as f64 * (k as f64).ln() * p;
            }
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::config(format!(
                "finite-support probabilities sum to {total}, expected 1 within 1e-12"
            )));
        }
        if !(mean > 1.0) {
            return Err(Error::config(format!(
                "offspring mean must exceed 1 (supercritical), got {mean}"
            )));
        }
        Ok(OffspringDistribution {
            kind: OffspringKind::FiniteSupport { pmf: entries },
            mean,
            e_z_log_plus_z: e,
        })
    }

    pub fn kind(&self) -> &OffspringKind {
        &self.kind
    }

    /// Progeny mean `mu`.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// `E[Z_1 log+ Z_1]`, finite for every supported family.
    pub fn e_z_log_plus_z(&self) -> f64 {
        self.e_z_log_plus_z
    }

    /// Probability generating function `f(s) = E[s^{Z_1}]` on `[0, 1]`.
    pub fn pgf(&self, s: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::domain(format!("pgf argument must lie in [0, 1], got {s}")));
        }
        Ok(self.pgf_unchecked(s))
    }

    fn pgf_unchecked(&self, s: f64) -> f64 {
        match &self.kind {
            OffspringKind::Geometric { b } => b * s / (1.0 - (1.0 - b) * s),
            OffspringKind::DRegular { d } => s.powi(*d as i32),
            OffspringKind::FiniteSupport { pmf } => {
                pmf.iter().map(|&(k, p)| p * s.powi(k as i32)).sum()
            }
        }
    }

    /// One application of the survival map `y -> 1 - f(1 - y)`, evaluated
    /// without cancellation; `survival_prob(i)` is its `i`-th iterate at 1.
    pub fn survival_step(&self, y: f64) -> f64 {
        self.survival_map(y)
    }

    /// Survival map `g(y) = 1 - f(1 - y)`, evaluated without cancellation.
    fn survival_map(&self, y: f64) -> f64 {
        match &self.kind {
            OffspringKind::Geometric { b } => y / (b + (1.0 - b) * y),
            OffspringKind::DRegular { d } => -f64::exp_m1(*d as f64 * f64::ln_1p(-y)),
            OffspringKind::FiniteSupport { pmf } => {
                let log_s = f64::ln_1p(-y);
                pmf.iter()
                    .filter(|&&(k, _)| k >= 1)
                    .map(|&(k, p)| -p * f64::exp_m1(k as f64 * log_s))
                    .sum()
            }
        }
    }

    /// `i`-fold pgf iterate `f^{(i)}(s)`.
    pub fn pgf_iterate(&self, s: f64, i: u32) -> Result<f64> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::domain(format!("pgf argument must lie in [0, 1], got {s}")));
        }
        let mut y = 1.0 - s;
        for _ in 0..i {
            y = self.survival_map(y);
        }
        Ok(1.0 - y)
    }

    /// `E[exp(-u Z_i)] = f^{(i)}(e^{-u})`, accurate for all `u >= 0`.
    pub fn generation_laplace(&self, i: u32, u: f64) -> Result<f64> {
        if !(u >= 0.0) {
            return Err(Error::domain(format!("Laplace argument must be >= 0, got {u}")));
        }
        let mut y = -f64::exp_m1(-u);
        for _ in 0..i {
            y = self.survival_map(y);
        }
        Ok(1.0 - y)
    }

    /// Extinction probability: smallest fixed point of `f` on `[0, 1]`.
    pub fn extinction_prob(&self) -> f64 {
        let mut s = 0.0;
        for _ in 0..200_000 {
            let next = self.pgf_unchecked(s);
            if (next - s).abs() < 1e-14 {
                return next;
            }
            s = next;
        }
        s
    }

    /// `P(Z_i > 0) = 1 - f^{(i)}(0)` by exact survival iteration.
    pub fn survival_prob(&self, i: u32) -> f64 {
        let mut y = 1.0;
        for _ in 0..i {
            y = self.survival_map(y);
        }
        y
    }

    /// Exact law of the generation size `Z_i`, truncated once the omitted mass
    /// drops below `tail_eps`.
    pub fn generation_pmf(&self, i: u32, tail_eps: f64) -> Result<GenerationPmf> {
        if !(tail_eps > 0.0 && tail_eps <= 1e-6) {
            return Err(Error::domain(format!(
                "tail_eps must lie in (0, 1e-6], got {tail_eps}"
            )));
        }
        if i == 0 {
            let mut probs = BTreeMap::new();
            probs.insert(1, 1.0);
            return Ok(GenerationPmf { probs, omitted: 0.0 });
        }
        match &self.kind {
            OffspringKind::DRegular { d } => {
                let v = (*d as u64)
                    .checked_pow(i)
                    .filter(|&v| v <= GENERATION_SUPPORT_CAP)
                    .ok_or_else(|| {
                        Error::resource(format!(
                            "generation pmf support d^{i} exceeds cap {GENERATION_SUPPORT_CAP}"
                        ))
                    })?;
                let mut probs = BTreeMap::new();
                probs.insert(v, 1.0);
                Ok(GenerationPmf { probs, omitted: 0.0 })
            }
            OffspringKind::Geometric { b } => {
                // Z_i ~ Geometric(b^i) on {1, 2, ...}
                let beta = b.powi(i as i32);
                let log_1m = f64::ln_1p(-beta);
                let y_cut = (tail_eps.ln() / log_1m).ceil() as u64;
                if y_cut > GENERATION_SUPPORT_CAP {
                    return Err(Error::resource(format!(
                        "generation pmf needs {y_cut} support points, cap is {GENERATION_SUPPORT_CAP}"
                    )));
                }
                let mut probs = BTreeMap::new();
                let mut term = beta;
                for y in 1..=y_cut {
                    probs.insert(y, term);
                    term *= 1.0 - beta;
                }
                let omitted = (y_cut as f64 * log_1m).exp();
                Ok(GenerationPmf { probs, omitted })
            }
            OffspringKind::FiniteSupport { pmf } => {
                let mut m: u64 = 64;
                loop {
                    let coeffs = compose_pgf_mod(pmf, i, m as usize);
                    let mass: f64 = coeffs.iter().sum();
                    let omitted = (1.0 - mass).max(0.0);
                    if omitted < tail_eps {
                        let probs = coeffs
                            .iter()
                            .enumerate()
                            .filter(|&(_, &p)| p > 0.0)
                            .map(|(y, &p)| (y as u64, p))
                            .collect();
                        return Ok(GenerationPmf { probs, omitted });
                    }
                    if m >= GENERATION_SUPPORT_CAP {
                        return Err(Error::resource(format!(
                            "generation pmf did not reach tail_eps={tail_eps} within support cap {GENERATION_SUPPORT_CAP}"
                        )));
                    }
                    m = (m * 2).min(GENERATION_SUPPORT_CAP);
                }
            }
        }
    }

    /// Exact prefixes `P(Z_i = y)` for `y = 0..=y_max` and all `i = 0..=i_max`.
    ///
    /// Values beyond `y_max` are simply absent; no truncation error is incurred
    /// for the returned entries.
    pub fn generation_pmf_prefixes(&self, i_max: u32, y_max: u64) -> Result<Vec<Vec<f64>>> {
        if y_max > GENERATION_SUPPORT_CAP {
            return Err(Error::resource(format!(
                "prefix length {y_max} exceeds support cap {GENERATION_SUPPORT_CAP}"
            )));
        }
        let len = y_max as usize + 1;
        let mut out = Vec::with_capacity(i_max as usize + 1);
        let mut z0 = vec![0.0; len];
        if y_max >= 1 {
            z0[1] = 1.0;
        }
        out.push(z0);
        match &self.kind {
            OffspringKind::DRegular { d } => {
                for i in 1..=i_max {
                    let mut row = vec![0.0; len];
                    if let Some(v) = (*d as u64).checked_pow(i) {
                        if v <= y_max {
                            row[v as usize] = 1.0;
                        }
                    }
                    out.push(row);
                }
            }
            OffspringKind::Geometric { b } => {
                for i in 1..=i_max {
                    let beta = b.powi(i as i32);
                    let mut row = vec![0.0; len];
                    let mut term = beta;
                    for slot in row.iter_mut().skip(1) {
                        *slot = term;
                        term *= 1.0 - beta;
                    }
                    out.push(row);
                }
            }
            OffspringKind::FiniteSupport { pmf } => {
                let mut coeffs = out[0].clone();
                for _ in 1..=i_max {
                    coeffs = apply_pgf_mod(pmf, &coeffs);
                    out.push(coeffs.clone());
                }
            }
        }
        Ok(out)
    }

    /// Number of series terms needed so that `mu^{-I} / (mu - 1) < tol`.
    fn truncation_index(&self, tol: f64) -> u32 {
        let mu = self.mean;
        let mut i = (-(tol * (mu - 1.0)).ln() / mu.ln()).ceil().max(0.0) as u32;
        while mu.powi(-(i as i32)) / (mu - 1.0) >= tol {
            i += 1;
        }
        i
    }

    /// Truncated series for `r = sum_i mu^{-i} P(Z_i > 0)`.
    pub fn r_constant(&self, tol: f64) -> Result<RSeries> {
        if !(tol > 0.0 && tol <= 1e-8) {
            return Err(Error::domain(format!("tolerance must lie in (0, 1e-8], got {tol}")));
        }
        let i_stop = self.truncation_index(tol);
        let mu = self.mean;
        let mut value = 0.0;
        let mut y = 1.0; // P(Z_i > 0)
        let mut weight = 1.0; // mu^{-i}
        for _ in 0..=i_stop {
            value += weight * y;
            y = self.survival_map(y);
            weight /= mu;
        }
        Ok(RSeries {
            value,
            terms: i_stop + 1,
            remainder_bound: mu.powi(-(i_stop as i32)) / (mu - 1.0),
        })
    }

    /// Cluster-size law `gamma(y) = (1/r) sum_i mu^{-i} P(Z_i = y)`, tabulated
    /// for `y <= y_max`. The same truncation index is used for the numerator
    /// and for `r`, so the table plus its tail mass is an exact pmf.
    pub fn gamma_pmf(&self, y_max: u64, tol: f64) -> Result<GammaPmf> {
        if y_max < 1 {
            return Err(Error::domain("gamma table needs y_max >= 1"));
        }
        let r = self.r_constant(tol)?;
        let i_stop = r.terms - 1;
        let prefixes = self.generation_pmf_prefixes(i_stop, y_max)?;
        let mu = self.mean;
        let mut numer = vec![0.0; y_max as usize + 1];
        let mut weight = 1.0;
        for row in &prefixes {
            for (y, acc) in numer.iter_mut().enumerate().skip(1) {
                *acc += weight * row[y];
            }
            weight /= mu;
        }
        let mut probs = Vec::new();
        let mut covered = 0.0;
        for (y, &num) in numer.iter().enumerate().skip(1) {
            if num > 0.0 {
                let g = num / r.value;
                probs.push((y as u64, g));
                covered += g;
            }
        }
        Ok(GammaPmf {
            probs,
            y_max,
            tail_mass: (1.0 - covered).max(0.0),
            terms: r.terms,
            remainder_bound: r.remainder_bound,
        })
    }

    /// `phi(u) = E[exp(-u W)]` by forward iteration of `phi(z) = f(phi(z/mu))`,
    /// i.e. `phi_m(u) = f^{(m)}(exp(-u / mu^m))`.
    pub fn w_laplace(&self, u: f64, n_iter: u32) -> Result<PhiEstimate> {
        if !(u >= 0.0) || !u.is_finite() {
            return Err(Error::domain(format!(
                "Laplace argument must be finite and >= 0, got {u}"
            )));
        }
        if n_iter == 0 {
            return Err(Error::domain("iteration depth must be >= 1"));
        }
        if u == 0.0 {
            return Ok(PhiEstimate {
                value: 1.0,
                error_estimate: 0.0,
                converged: true,
            });
        }
        let mu = self.mean;
        // Underflow guard: keep u / mu^m comfortably inside the normal range.
        let mut depth = n_iter;
        while depth > 1 && u * mu.powi(-(depth as i32)) < 1e-280 {
            depth -= 1;
        }
        let phi_at = |m: u32| -> f64 {
            let z = u * mu.powi(-(m as i32));
            let mut y = -f64::exp_m1(-z);
            for _ in 0..m {
                y = self.survival_map(y);
            }
            1.0 - y
        };
        let value = phi_at(depth);
        let prev = phi_at(depth - 1);
        let error_estimate = (value - prev).abs();
        Ok(PhiEstimate {
            value,
            error_estimate,
            converged: error_estimate <= 1e-9,
        })
    }

    /// One offspring draw.
    pub fn sample_offspring<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match &self.kind {
            OffspringKind::Geometric { b } => {
                let u: f64 = rng.random();
                1 + (f64::ln_1p(-u) / f64::ln_1p(-b)).floor() as u64
            }
            OffspringKind::DRegular { d } => *d as u64,
            OffspringKind::FiniteSupport { pmf } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for &(k, p) in pmf {
                    acc += p;
                    if u < acc {
                        return k as u64;
                    }
                }
                pmf.last().map(|&(k, _)| k as u64).unwrap_or(0)
            }
        }
    }

    /// Unconditioned generation size `Z_i` by direct population simulation.
    pub fn sample_population<R: Rng + ?Sized>(
        &self,
        i: u32,
        population_cap: u64,
        rng: &mut R,
    ) -> Result<u64> {
        let mut z: u64 = 1;
        for gen in 0..i {
            let mut next: u64 = 0;
            for _ in 0..z {
                next += self.sample_offspring(rng);
                if next > population_cap {
                    return Err(Error::resource(format!(
                        "population cap {population_cap} exceeded at generation {}",
                        gen + 1
                    )));
                }
            }
            z = next;
            if z == 0 {
                return Ok(0);
            }
        }
        Ok(z)
    }

    /// `Z_i` conditioned on `Z_i > 0`. Exact closed forms for the geometric
    /// and d-regular families; rejection sampling otherwise.
    pub fn sample_generation_surviving<R: Rng + ?Sized>(
        &self,
        i: u32,
        population_cap: u64,
        rng: &mut R,
    ) -> Result<u64> {
        match &self.kind {
            OffspringKind::DRegular { d } => {
                (*d as u64).checked_pow(i).ok_or_else(|| {
                    Error::resource(format!("generation size d^{i} overflows the supported range"))
                })
            }
            OffspringKind::Geometric { b } => {
                let beta = b.powi(i as i32);
                let u: f64 = rng.random();
                let v = 1.0 + (f64::ln_1p(-u) / f64::ln_1p(-beta)).floor();
                Ok(v as u64)
            }
            OffspringKind::FiniteSupport { .. } => {
                for _ in 0..SURVIVAL_SAMPLING_ATTEMPTS {
                    let z = self.sample_population(i, population_cap, rng)?;
                    if z > 0 {
                        return Ok(z);
                    }
                }
                Err(Error::resource(format!(
                    "no surviving generation-{i} sample within {SURVIVAL_SAMPLING_ATTEMPTS} attempts"
                )))
            }
        }
    }
}

/// Polynomial product truncated to degree `m`.
fn poly_mul_mod(a: &[f64], b: &[f64], m: usize) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return vec![0.0];
    }
    let mut out = vec![0.0; (m + 1).min(a.len() + b.len() - 1)];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0.0 || i > m {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            if i + j > m {
                break;
            }
            out[i + j] += ai * bj;
        }
    }
    out
}

/// `f(A(s)) mod s^{len(a)}` for a finite-support pgf `f`, by Horner's scheme.
fn apply_pgf_mod(pmf: &[(u32, f64)], a: &[f64]) -> Vec<f64> {
    let m = a.len() - 1;
    let k_max = pmf.last().map(|&(k, _)| k as usize).unwrap_or(0);
    let mut dense = vec![0.0; k_max + 1];
    for &(k, p) in pmf {
        dense[k as usize] = p;
    }
    let mut res = vec![dense[k_max]];
    for k in (0..k_max).rev() {
        res = poly_mul_mod(&res, a, m);
        if res.is_empty() {
            res = vec![0.0];
        }
        res[0] += dense[k];
    }
    res.resize(m + 1, 0.0);
    res
}

/// Coefficients of `f^{(i)}(s) mod s^{m+1}` for a finite-support pgf.
fn compose_pgf_mod(pmf: &[(u32, f64)], i: u32, m: usize) -> Vec<f64> {
    let mut coeffs = vec![0.0; m + 1];
    if m >= 1 {
        coeffs[1] = 1.0;
    }
    for _ in 0..i {
        coeffs = apply_pgf_mod(pmf, &coeffs);
    }
    coeffs
}

/// Options controlling the derived-constant computations of a [`LimitModel`].
#[derive(Debug, Clone, Copy)]
pub struct LimitModelOptions {
    /// Remainder tolerance for the `r` and `gamma` series.
    pub series_tol: f64,
    /// Largest tabulated cluster size.
    pub gamma_y_max: u64,
    /// Iteration depth for `phi`.
    pub phi_depth: u32,
}

impl Default for LimitModelOptions {
    fn default() -> Self {
        LimitModelOptions {
            series_tol: 1e-12,
            gamma_y_max: 64,
            phi_depth: DEFAULT_PHI_DEPTH,
        }
    }
}

/// Derived constants and transforms shared by the limit-process samplers and
/// the closed-form evaluators: `r`, the cluster-size law `gamma`, the
/// extinction probability `p_e`, the tail index and balance `(alpha, p, q)`,
/// and the `W`-Laplace transform `phi` with its conditioned variant.
#[derive(Debug, Clone)]
pub struct LimitModel {
    offspring: OffspringDistribution,
    alpha: f64,
    p: f64,
    q: f64,
    r: RSeries,
    p_e: f64,
    gamma: GammaPmf,
    phi_depth: u32,
    series_tol: f64,
    /// Cumulative distribution of the generation index used by the exact
    /// two-stage cluster-size sampler: `P(I = i) = mu^{-i} P(Z_i > 0) / r`.
    cluster_index_cdf: Vec<f64>,
}

impl LimitModel {
    pub fn new(
        offspring: OffspringDistribution,
        alpha: f64,
        p: f64,
        q: f64,
        options: LimitModelOptions,
    ) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::config(format!("alpha must be > 0, got {alpha}")));
        }
        if !(p >= 0.0 && q >= 0.0 && (p + q - 1.0).abs() <= 1e-12) {
            return Err(Error::config(format!(
                "tail balance requires p, q >= 0 with p + q = 1, got p={p}, q={q}"
            )));
        }
        let r = offspring.r_constant(options.series_tol)?;
        let gamma = offspring.gamma_pmf(options.gamma_y_max, options.series_tol)?;
        let p_e = offspring.extinction_prob();
        // Extend the index table until its tail is below f64 resolution, so
        // sampling never needs to grow it.
        let mu = offspring.mean();
        let deep = (16.0 * std::f64::consts::LN_10 / mu.ln()).ceil() as u32; // mu^{-i} < 1e-16
        let i_top = (r.terms - 1).max(deep);
        let mut cdf = Vec::with_capacity(i_top as usize + 1);
        let mut y = 1.0;
        let mut weight = 1.0;
        let mut acc = 0.0;
        for _ in 0..=i_top {
            acc += weight * y / r.value;
            cdf.push(acc);
            y = offspring.survival_map(y);
            weight /= mu;
        }
        Ok(LimitModel {
            offspring,
            alpha,
            p,
            q,
            r,
            p_e,
            gamma,
            phi_depth: options.phi_depth,
            series_tol: options.series_tol,
            cluster_index_cdf: cdf,
        })
    }

    pub fn offspring(&self) -> &OffspringDistribution {
        &self.offspring
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn mu(&self) -> f64 {
        self.offspring.mean()
    }

    pub fn r(&self) -> f64 {
        self.r.value
    }

    pub fn r_series(&self) -> RSeries {
        self.r
    }

    pub fn p_e(&self) -> f64 {
        self.p_e
    }

    pub fn gamma_table(&self) -> &GammaPmf {
        &self.gamma
    }

    /// `gamma(y)` from the table; zero beyond `y_max` (tail mass recorded).
    pub fn gamma(&self, y: u64) -> f64 {
        self.gamma.value(y)
    }

    pub fn series_tol(&self) -> f64 {
        self.series_tol
    }

    pub fn phi_depth(&self) -> u32 {
        self.phi_depth
    }

    /// `phi(u) = E[exp(-u W)]` under the unconditioned law.
    pub fn phi(&self, u: f64) -> f64 {
        self.offspring
            .w_laplace(u, self.phi_depth)
            .map(|e| e.value)
            .unwrap_or(f64::NAN)
    }

    pub fn phi_detailed(&self, u: f64) -> Result<PhiEstimate> {
        self.offspring.w_laplace(u, self.phi_depth)
    }

    /// Conditioned transform `phi*(u) = (phi(u) - p_e) / (1 - p_e)`, the
    /// `W`-Laplace transform under the survival measure (`W = 0` exactly on
    /// extinction).
    pub fn phi_star(&self, u: f64) -> f64 {
        let v = (self.phi(u) - self.p_e) / (1.0 - self.p_e);
        v.clamp(0.0, 1.0)
    }

    /// Exact draw from the cluster-size law `gamma`: first the generation
    /// index `I` with `P(I = i) = mu^{-i} P(Z_i > 0) / r`, then `Z_I`
    /// conditioned on survival.
    pub fn sample_cluster_size<R: Rng + ?Sized>(
        &self,
        population_cap: u64,
        rng: &mut R,
    ) -> Result<u64> {
        let u: f64 = rng.random();
        let idx = self.cluster_index_cdf.partition_point(|&c| c <= u);
        let i = idx.min(self.cluster_index_cdf.len() - 1) as u32;
        self.offspring
            .sample_generation_surviving(i, population_cap, rng)
    }

    /// Reproducibility document with every derived constant and truncation.
    pub fn to_document(&self) -> LimitModelDocument {
        LimitModelDocument {
            r: self.r.value,
            p_e: self.p_e,
            alpha: self.alpha,
            p: self.p,
            q: self.q,
            gamma: self.gamma.probs.clone(),
            truncation: TruncationMeta {
                series_tol: self.series_tol,
                r_terms: self.r.terms,
                r_remainder_bound: self.r.remainder_bound,
                gamma_y_max: self.gamma.y_max,
                gamma_tail_mass: self.gamma.tail_mass,
            },
            phi_depth: self.phi_depth,
            offspring_mean: self.offspring.mean(),
            offspring_e_z_log_plus_z: self.offspring.e_z_log_plus_z(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TruncationMeta {
    pub series_tol: f64,
    pub r_terms: u32,
    pub r_remainder_bound: f64,
    pub gamma_y_max: u64,
    pub gamma_tail_mass: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitModelDocument {
    pub r: f64,
    pub p_e: f64,
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
    pub gamma: Vec<(u64, f64)>,
    pub truncation: TruncationMeta,
    pub phi_depth: u32,
    pub offspring_mean: f64,
    pub offspring_e_z_log_plus_z: f64,
}
