//! Direct samplers for the limiting point process in both of its
//! representations — the Cox cluster form and the randomly scaled
//! scale-decorated Poisson form — together with the scaling operator and the
//! closed-form Laplace functional.
//!
//! The limit process has infinitely many atoms accumulating at the origin, so
//! every sampler works behind a mandatory window `|x| > delta` and the window
//! is recorded on the returned [`PointSample`].

use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson};

use crate::error::{Error, Result};
use crate::offspring::LimitModel;
use crate::point::{PiecewiseConstant, PointSample};
use crate::steps::NuAlpha;

/// How `W` is drawn when sampling the limit process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WMode {
    /// `W = 1` exactly (d-regular trees).
    Constant,
    /// `W ~ Exp(1)` exactly (geometric offspring).
    ExponentialUnit,
    /// `W ~ Z_m / mu^m` conditioned on survival to depth `m` (finite-depth
    /// bias decays with `m`).
    Simulated { depth: u32 },
}

#[derive(Debug, Clone)]
pub struct LimitSampleConfig<'a> {
    pub model: &'a LimitModel,
    pub window: f64,
    pub w_mode: WMode,
    /// Cap passed to the cluster-size and simulated-`W` samplers.
    pub population_cap: u64,
}

impl<'a> LimitSampleConfig<'a> {
    /// Window must be positive: the limit process is only Radon away from 0.
    /// The `W` mode defaults to the exact law where one is known.
    pub fn new(model: &'a LimitModel, window: f64) -> Result<Self> {
        if !(window > 0.0) || !window.is_finite() {
            return Err(Error::domain(format!(
                "limit sampling requires a positive window, got {window}"
            )));
        }
        let w_mode = match model.offspring().kind() {
            crate::offspring::OffspringKind::DRegular { .. } => WMode::Constant,
            crate::offspring::OffspringKind::Geometric { .. } => WMode::ExponentialUnit,
            crate::offspring::OffspringKind::FiniteSupport { .. } => {
                WMode::Simulated { depth: 16 }
            }
        };
        Ok(LimitSampleConfig {
            model,
            window,
            w_mode,
            population_cap: 10_000_000,
        })
    }

    pub fn with_w_mode(mut self, w_mode: WMode) -> Self {
        self.w_mode = w_mode;
        self
    }
}

/// Draws `W` conditioned positive according to the configured mode.
pub fn sample_w<R: Rng + ?Sized>(cfg: &LimitSampleConfig, rng: &mut R) -> Result<f64> {
    match cfg.w_mode {
        WMode::Constant => Ok(1.0),
        WMode::ExponentialUnit => Ok(Exp1.sample(rng)),
        WMode::Simulated { depth } => {
            let z = cfg
                .model
                .offspring()
                .sample_generation_surviving(depth, cfg.population_cap, rng)?;
            Ok(z as f64 / cfg.model.mu().powi(depth as i32))
        }
    }
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<u64> {
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean)
        .map_err(|e| Error::domain(format!("invalid Poisson mean {mean}: {e}")))?;
    Ok(dist.sample(rng) as u64)
}

/// Cox cluster representation: conditionally on `W`, atoms beyond the window
/// are Poisson-many with mean `r W delta^{-alpha}`; each location is an
/// independently signed Pareto point scaled by `(r W)^{1/alpha}` and carries a
/// cluster-size multiplicity drawn from `gamma`.
pub fn sample_limit_cox<R: Rng + ?Sized>(
    cfg: &LimitSampleConfig,
    rng: &mut R,
) -> Result<PointSample> {
    let model = cfg.model;
    let alpha = model.alpha();
    let w = sample_w(cfg, rng)?;
    let theta = (model.r() * w).powf(1.0 / alpha);
    let mean = model.r() * w * cfg.window.powf(-alpha);
    let count = poisson_count(mean, rng)?;
    // radial threshold for the unscaled Poisson points
    let delta_prime = cfg.window / theta;
    let mut atoms = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let sign = if rng.random::<f64>() < model.p() { 1.0 } else { -1.0 };
        let u = 1.0 - rng.random::<f64>(); // (0, 1]
        let radius = delta_prime * u.powf(-1.0 / alpha);
        let location = sign * radius * theta;
        let multiplicity = model.sample_cluster_size(cfg.population_cap, rng)?;
        if location.abs() > cfg.window {
            atoms.push((location, multiplicity));
        }
    }
    PointSample::new(atoms, cfg.window)
}

/// Scale-decorated representation: a Poisson random measure with intensity
/// `alpha x^{-alpha-1} dx` on `(0, inf)`, each atom decorated by `T` copies of
/// `epsilon lambda` and the whole process scaled by `Theta = (r W)^{1/alpha}`.
pub fn sample_limit_sscdppp<R: Rng + ?Sized>(
    cfg: &LimitSampleConfig,
    rng: &mut R,
) -> Result<PointSample> {
    let model = cfg.model;
    let alpha = model.alpha();
    let w = sample_w(cfg, rng)?;
    let theta = (model.r() * w).powf(1.0 / alpha);
    // only PRM atoms with lambda > delta / Theta survive the window
    let lambda_min = cfg.window / theta;
    let mean = lambda_min.powf(-alpha);
    let count = poisson_count(mean, rng)?;
    let mut atoms = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let u = 1.0 - rng.random::<f64>();
        let lambda = lambda_min * u.powf(-1.0 / alpha);
        let epsilon = if rng.random::<f64>() < model.p() { 1.0 } else { -1.0 };
        let multiplicity = model.sample_cluster_size(cfg.population_cap, rng)?;
        let location = theta * epsilon * lambda;
        if location.abs() > cfg.window {
            atoms.push((location, multiplicity));
        }
    }
    PointSample::new(atoms, cfg.window)
}

/// Plain two-sided Poisson random measure beyond the window, multiplicity one;
/// the definitional reduction of the scale-decorated form with unit scale and
/// trivial decoration.
pub fn sample_prm_nu_alpha<R: Rng + ?Sized>(
    nu: &NuAlpha,
    window: f64,
    rng: &mut R,
) -> Result<PointSample> {
    if !(window > 0.0) {
        return Err(Error::domain("PRM sampling requires a positive window"));
    }
    let mean = (nu.p + nu.q) * window.powf(-nu.alpha);
    let count = poisson_count(mean, rng)?;
    let mut atoms = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let sign = if rng.random::<f64>() < nu.p { 1.0 } else { -1.0 };
        let u = 1.0 - rng.random::<f64>();
        let location = sign * window * u.powf(-1.0 / nu.alpha);
        if location.abs() > window {
            atoms.push((location, 1u64));
        }
    }
    PointSample::new(atoms, window)
}

/// The scaling operator: every atom multiplied by `a > 0`, window rescaled.
pub fn scale_process(sample: &PointSample, a: f64) -> Result<PointSample> {
    sample.scaled(a)
}

/// Closed-form Laplace functional evaluation.
#[derive(Debug, Clone, Copy)]
pub struct LaplaceEval {
    /// The exponent functional `C(g) = int sum_i mu^{-i} E(1 - e^{-Z_i g(x)}) nu(dx)`.
    pub c_value: f64,
    /// `Psi(g) = phi*(C(g))`.
    pub psi: f64,
    /// Number of generation terms summed.
    pub terms: u32,
    /// Geometric bound on the omitted generation tail.
    pub truncation_bound: f64,
}

/// Evaluates the limiting Laplace functional for a nonnegative step function.
/// The integral is a finite sum over the pieces of `g`; the generation series
/// is truncated at `i_max` or earlier once the remainder bound drops below
/// `tol`, whichever comes first. The inner expectation is exact:
/// `E(1 - e^{-c Z_i}) = 1 - f^{(i)}(e^{-c})`.
pub fn laplace_functional(
    model: &LimitModel,
    g: &PiecewiseConstant,
    i_max: u32,
    tol: f64,
) -> Result<LaplaceEval> {
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be > 0, got {tol}")));
    }
    let nu = NuAlpha::new(model.alpha(), model.p(), model.q())?;
    let mu = model.mu();
    let support_mass: f64 = g
        .pieces()
        .iter()
        .map(|(iv, _)| nu.mass_interval(iv))
        .sum::<Result<f64>>()?;
    // stop index: first i with mu^{-i}/(mu-1) * nu(support) < tol, capped at i_max
    let mut i_stop = i_max;
    let mut bound = support_mass / (mu - 1.0);
    for i in 0..=i_max {
        if bound < tol {
            i_stop = i;
            break;
        }
        bound /= mu;
    }
    let truncation_bound = mu.powi(-(i_stop as i32)) / (mu - 1.0) * support_mass;

    let mut c_value = 0.0;
    for (iv, value) in g.pieces() {
        if *value == 0.0 {
            continue;
        }
        let mass = nu.mass_interval(iv)?;
        if mass == 0.0 {
            continue;
        }
        // D_i = 1 - f^{(i)}(e^{-value}) via the survival iteration
        let mut survival = -f64::exp_m1(-value);
        let mut weight = 1.0;
        let mut series = 0.0;
        for _ in 0..=i_stop {
            series += weight * survival;
            survival = model.offspring().survival_step(survival);
            weight /= mu;
        }
        c_value += mass * series;
    }
    let psi = model.phi_star(c_value);
    Ok(LaplaceEval {
        c_value,
        psi,
        terms: i_stop + 1,
        truncation_bound,
    })
}

/// The scale constant of the Frechet form of the scale-Laplace functional:
/// `c_g = C(g)^{-1/alpha}`.
pub fn c_g_constant(
    model: &LimitModel,
    g: &PiecewiseConstant,
    i_max: u32,
    tol: f64,
) -> Result<f64> {
    let eval = laplace_functional(model, g, i_max, tol)?;
    if eval.c_value <= 0.0 {
        return Err(Error::domain(
            "c_g is undefined for a test function with zero functional mass",
        ));
    }
    Ok(eval.c_value.powf(-1.0 / model.alpha()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::offspring::{LimitModelOptions, OffspringDistribution};
    use crate::point::Interval;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

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

    fn geo_model(p: f64) -> LimitModel {
        LimitModel::new(
            OffspringDistribution::geometric(0.5).unwrap(),
            1.0,
            p,
            1.0 - p,
            LimitModelOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn window_must_be_positive() {
        let model = d2_model();
        assert!(LimitSampleConfig::new(&model, 0.0).is_err());
        assert!(LimitSampleConfig::new(&model, -1.0).is_err());
    }

    #[test]
    fn void_probability_d_regular() {
        // P(no atom in (1, inf]) = exp(-r W p) = e^{-2} for d = 2, W = 1
        let model = d2_model();
        let cfg = LimitSampleConfig::new(&model, 1.0).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        let n = 20_000;
        let mut void = 0u64;
        for _ in 0..n {
            let s = sample_limit_cox(&cfg, &mut rng).unwrap();
            if s.count(&Interval::above(1.0).unwrap()).unwrap() == 0 {
                void += 1;
            }
        }
        let want = (-2.0f64).exp();
        let got = void as f64 / n as f64;
        let se = (want * (1.0 - want) / n as f64).sqrt();
        assert!((got - want).abs() <= 3.0 * se, "{got} vs {want}");
    }

    #[test]
    fn no_negative_atoms_when_q_is_zero() {
        let model = d2_model();
        let cfg = LimitSampleConfig::new(&model, 0.3).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(22);
        for _ in 0..2_000 {
            for s in [
                sample_limit_cox(&cfg, &mut rng).unwrap(),
                sample_limit_sscdppp(&cfg, &mut rng).unwrap(),
            ] {
                assert!(s.atoms().iter().all(|&(loc, _)| loc > 0.0));
            }
        }
    }

    #[test]
    fn distinct_atom_count_is_poisson() {
        // conditionally on W = 1: distinct atoms in (x, inf] ~ Poisson(r p x^{-alpha}),
        // certified by a one-sample chi-square against the Poisson pmf
        let model = d2_model();
        let cfg = LimitSampleConfig::new(&model, 0.5).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        let n = 10_000usize;
        let x = 1.0;
        let lambda = model.r() * model.p() / x;
        let counts: Vec<Vec<u64>> = (0..n)
            .map(|_| {
                let s = sample_limit_cox(&cfg, &mut rng).unwrap();
                let distinct = s.atoms().iter().filter(|&&(loc, _)| loc > x).count();
                vec![distinct as u64]
            })
            .collect();
        let mut pmf = Vec::new();
        let mut term = (-lambda).exp();
        for k in 0..24 {
            pmf.push(term);
            term *= lambda / (k + 1) as f64;
        }
        let report = crate::stats::count_distribution_compare(
            &counts,
            crate::stats::CountReference::Pmf(&pmf),
        )
        .unwrap();
        assert!(report.p_value > 0.005, "p = {}", report.p_value);
    }

    #[test]
    fn prm_reduction_counts_are_poisson_p() {
        // Theta = 1 and T = 1 reduce to PRM(nu_alpha): count on (1, inf] ~ Poisson(p)
        let nu = NuAlpha::new(1.0, 0.7, 0.3).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(24);
        let n = 30_000usize;
        let mut total = 0u64;
        let mut void = 0u64;
        for _ in 0..n {
            let s = sample_prm_nu_alpha(&nu, 0.5, &mut rng).unwrap();
            let c = s.count(&Interval::above(1.0).unwrap()).unwrap();
            total += c;
            if c == 0 {
                void += 1;
            }
        }
        let mean = total as f64 / n as f64;
        assert!((mean - 0.7).abs() < 4.0 * (0.7f64 / n as f64).sqrt());
        let want_void = (-0.7f64).exp();
        let got_void = void as f64 / n as f64;
        let se = (want_void * (1.0 - want_void) / n as f64).sqrt();
        assert!((got_void - want_void).abs() <= 4.0 * se);
    }

    #[test]
    fn scale_process_examples() {
        let s = PointSample::new(vec![(2.0, 3)], 0.1).unwrap();
        let t = scale_process(&s, 0.5).unwrap();
        assert_eq!(t.atoms(), &[(1.0, 3)]);
        assert_eq!(t.window(), 0.05);
        assert_eq!(scale_process(&s, 1.0).unwrap(), s);
    }

    #[test]
    fn scaled_prm_counts_match_scaled_intensity() {
        // counts of s_a PRM on A are Poisson(nu(A / a))
        let nu = NuAlpha::new(1.0, 1.0, 0.0).unwrap();
        let a = 2.0;
        let set = Interval::above(3.0).unwrap();
        let want = nu.mass_interval(&set.scaled(1.0 / a)).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(25);
        let n = 30_000usize;
        let mut total = 0u64;
        for _ in 0..n {
            let s = sample_prm_nu_alpha(&nu, 0.5, &mut rng).unwrap();
            total += scale_process(&s, a).unwrap().count(&set).unwrap();
        }
        let mean = total as f64 / n as f64;
        assert!(
            (mean - want).abs() <= 4.0 * (want / n as f64).sqrt(),
            "{mean} vs {want}"
        );
    }

    #[test]
    fn laplace_functional_zero_function_is_one() {
        let model = d2_model();
        let g = PiecewiseConstant::indicator(Interval::new(1.0, 2.0).unwrap(), 0.0).unwrap();
        let eval = laplace_functional(&model, &g, 80, 1e-12).unwrap();
        assert_eq!(eval.c_value, 0.0);
        assert_relative_eq!(eval.psi, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn laplace_functional_killing_limit_recovers_maxima_law() {
        // g = c * 1_{(x0, inf]} with huge c: Psi -> phi*(r p x0^{-alpha})
        for model in [d2_model(), geo_model(1.0)] {
            for x0 in [1.0, 2.0] {
                let g = PiecewiseConstant::indicator(Interval::above(x0).unwrap(), 60.0).unwrap();
                let eval = laplace_functional(&model, &g, 200, 1e-13).unwrap();
                let want = model.phi_star(model.r() * model.p() / x0);
                assert!(
                    (eval.psi - want).abs() < 1e-10,
                    "x0={x0}: {} vs {want}",
                    eval.psi
                );
            }
        }
    }

    #[test]
    fn laplace_functional_d_regular_series_oracle() {
        // C = sum_i 2^{-i} (1 - e^{-2^i}) for g = 1 on (1, inf], alpha = 1, p = 1
        let model = d2_model();
        let g = PiecewiseConstant::indicator(Interval::above(1.0).unwrap(), 1.0).unwrap();
        let eval = laplace_functional(&model, &g, 200, 1e-14).unwrap();
        let mut want = 0.0;
        for i in 0..60 {
            want += 0.5f64.powi(i) * (1.0 - (-(2.0f64.powi(i))).exp());
        }
        assert_relative_eq!(eval.c_value, want, epsilon = 1e-12);
        assert_relative_eq!(eval.psi, (-want).exp(), epsilon = 1e-12);
        // c_g = C^{-1} for alpha = 1
        let cg = c_g_constant(&model, &g, 200, 1e-14).unwrap();
        assert_relative_eq!(cg, 1.0 / want, epsilon = 1e-12);
    }

    #[test]
    fn c_g_scaling_identity() {
        // replacing g by g(. / y) multiplies C by y^{-alpha}... the mass scales
        // as nu(yA) = y^{-alpha} nu(A), so c_g scales by y
        let model = geo_model(0.6);
        let g = PiecewiseConstant::new(vec![
            (Interval::new(1.0, 2.0).unwrap(), 0.8),
            (Interval::new(-3.0, -1.5).unwrap(), 0.4),
        ])
        .unwrap();
        let y = 2.5;
        let gy = g.scaled_argument(y).unwrap();
        let base = laplace_functional(&model, &g, 300, 1e-14).unwrap();
        let scaled = laplace_functional(&model, &gy, 300, 1e-14).unwrap();
        assert_relative_eq!(
            scaled.c_value,
            y.powf(-model.alpha()) * base.c_value,
            max_relative = 1e-10
        );
        let cg = c_g_constant(&model, &g, 300, 1e-14).unwrap();
        let cgy = c_g_constant(&model, &gy, 300, 1e-14).unwrap();
        assert_relative_eq!(cgy, cg * y, max_relative = 1e-10);
        // indicator killing on (1, inf] with p = 1: c_g = r^{-1/alpha}
        let model_p1 = geo_model(1.0);
        let kill = PiecewiseConstant::indicator(Interval::above(1.0).unwrap(), 60.0).unwrap();
        let cg_kill = c_g_constant(&model_p1, &kill, 300, 1e-14).unwrap();
        assert_relative_eq!(cg_kill, 1.0 / model_p1.r(), max_relative = 1e-9);
    }

    #[test]
    fn c_g_rejects_zero_mass() {
        let model = d2_model();
        let g = PiecewiseConstant::indicator(Interval::new(1.0, 2.0).unwrap(), 0.0).unwrap();
        assert!(c_g_constant(&model, &g, 50, 1e-10).is_err());
    }

    #[test]
    fn simulated_w_mode_produces_positive_w() {
        let dist = OffspringDistribution::finite_support(&[(0, 0.25), (2, 0.75)]).unwrap();
        let model = LimitModel::new(dist, 1.0, 1.0, 0.0, LimitModelOptions::default()).unwrap();
        let cfg = LimitSampleConfig::new(&model, 0.5)
            .unwrap()
            .with_w_mode(WMode::Simulated { depth: 10 });
        let mut rng = ChaCha12Rng::seed_from_u64(26);
        let mut sum = 0.0;
        let n = 2_000;
        for _ in 0..n {
            let w = sample_w(&cfg, &mut rng).unwrap();
            assert!(w > 0.0);
            sum += w;
        }
        // E*[W] = E[W] / (1 - p_e) = 1.5 for this family
        let mean = sum / n as f64;
        assert!((mean - 1.5).abs() < 0.15, "mean {mean}");
    }
}
