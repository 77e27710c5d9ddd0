//! Two-sided regularly varying step laws with exact tail balance, their
//! inverse-transform samplers, the scaling constants `b_n`, and the two-sided
//! power-law limit measure `nu_alpha`.
//!
//! Two tail families are supported: pure Pareto, where everything is closed
//! form, and a logarithmically perturbed Pareto that exercises the monotone
//! bisection paths. The sign of a step is drawn independently of its
//! magnitude, so the tail balance `(p, q)` holds exactly at every level.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::Interval;

/// Relative tolerance of the bisection used for tail inversion and `b_n`.
const BISECTION_REL_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepDistribution {
    /// Tail index `alpha > 0`.
    pub alpha: f64,
    /// Probability of a positive sign.
    pub p: f64,
    /// Probability of a negative sign, `p + q = 1`.
    pub q: f64,
    /// Scale: `P(|X| > x) = 1` for `x <= x_m`.
    pub x_m: f64,
    /// Optional logarithmic tail perturbation exponent `beta` in `[0, alpha]`:
    /// `P(|X| > x) = (x/x_m)^{-alpha} * ln(e - 1 + x/x_m)^beta`.
    pub log_beta: Option<f64>,
}

impl StepDistribution {
    pub fn pareto(alpha: f64, p: f64, q: f64, x_m: f64) -> Result<Self> {
        Self::build(alpha, p, q, x_m, None)
    }

    pub fn log_perturbed(alpha: f64, p: f64, q: f64, x_m: f64, beta: f64) -> Result<Self> {
        Self::build(alpha, p, q, x_m, Some(beta))
    }

    fn build(alpha: f64, p: f64, q: f64, x_m: f64, log_beta: Option<f64>) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::config(format!("alpha must be > 0, got {alpha}")));
        }
        if !(p >= 0.0 && q >= 0.0 && (p + q - 1.0).abs() <= 1e-12) {
            return Err(Error::config(format!(
                "tail balance requires p, q >= 0 with p + q = 1, got p={p}, q={q}"
            )));
        }
        if !(x_m > 0.0) || !x_m.is_finite() {
            return Err(Error::config(format!("scale x_m must be > 0, got {x_m}")));
        }
        if let Some(beta) = log_beta {
            // beta <= alpha keeps the tail nonincreasing on [x_m, inf)
            if !(0.0..=alpha).contains(&beta) {
                return Err(Error::config(format!(
                    "log perturbation exponent must lie in [0, alpha], got {beta}"
                )));
            }
        }
        Ok(StepDistribution {
            alpha,
            p,
            q,
            x_m,
            log_beta,
        })
    }

    /// `P(|X| > x)`; equals 1 for `x <= x_m`.
    pub fn tail(&self, x: f64) -> f64 {
        if x <= self.x_m {
            return 1.0;
        }
        let t = x / self.x_m;
        match self.log_beta {
            None => t.powf(-self.alpha),
            Some(beta) => t.powf(-self.alpha) * (std::f64::consts::E - 1.0 + t).ln().powf(beta),
        }
    }

    fn log_tail(&self, x: f64) -> f64 {
        if x <= self.x_m {
            return 0.0;
        }
        let t = x / self.x_m;
        match self.log_beta {
            None => -self.alpha * t.ln(),
            Some(beta) => -self.alpha * t.ln() + beta * (std::f64::consts::E - 1.0 + t).ln().ln(),
        }
    }

    /// Inverse of the tail function: the magnitude whose tail probability is
    /// `u`, for `u` in `(0, 1]`. Closed form for pure Pareto, monotone
    /// bisection in log space otherwise.
    pub fn magnitude_for_tail(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u <= 1.0) {
            return Err(Error::domain(format!(
                "tail probability must lie in (0, 1], got {u}"
            )));
        }
        self.magnitude_for_log_tail(u.ln())
    }

    /// Solves `log tail(x) = target` for `target <= 0`.
    fn magnitude_for_log_tail(&self, target: f64) -> Result<f64> {
        if target >= 0.0 {
            return Ok(self.x_m);
        }
        if self.log_beta.is_none() {
            return Ok(self.x_m * (-target / self.alpha).exp());
        }
        // bracket in log space, then bisect; log_tail is strictly decreasing
        let mut lo = self.x_m.ln();
        let mut hi = lo + 1.0;
        while self.log_tail(hi.exp()) > target {
            lo = hi;
            hi += 1.0;
            if hi > 1e4 {
                return Err(Error::resource(
                    "tail inversion bracket exceeded the representable range",
                ));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.log_tail(mid.exp()) > target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= BISECTION_REL_TOL {
                break;
            }
        }
        // upper end of the bracket: tail(result) <= exp(target)
        Ok(hi.exp())
    }

    /// One step draw: magnitude by inverse transform, sign `+1` with
    /// probability `p` independent of the magnitude.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let sign = if rng.random::<f64>() < self.p { 1.0 } else { -1.0 };
        let u = 1.0 - rng.random::<f64>(); // (0, 1]
        let magnitude = match self.log_beta {
            None => self.x_m * u.powf(-1.0 / self.alpha),
            Some(_) => self
                .magnitude_for_tail(u)
                .expect("tail inversion cannot fail for u in (0, 1]"),
        };
        sign * magnitude
    }

    /// Scaling constant `b_n = inf { x : mu^n P(|X| > x) <= 1 }`.
    pub fn scaling_constant(&self, mu: f64, n: u32) -> Result<f64> {
        if !(mu > 1.0) {
            return Err(Error::domain(format!("mu must exceed 1, got {mu}")));
        }
        if n < 1 {
            return Err(Error::domain("generation must be >= 1"));
        }
        // solve log tail(b) = -n ln mu
        let b = self.magnitude_for_log_tail(-(n as f64) * mu.ln())?;
        if !b.is_finite() {
            return Err(Error::resource(format!(
                "scaling constant for n={n} exceeds the floating-point range"
            )));
        }
        Ok(b)
    }

    pub fn nu(&self) -> NuAlpha {
        NuAlpha {
            alpha: self.alpha,
            p: self.p,
            q: self.q,
        }
    }
}

/// The limit measure with density `alpha p x^{-alpha-1}` on `(0, inf)` and
/// `alpha q (-x)^{-alpha-1}` on `(-inf, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuAlpha {
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
}

impl NuAlpha {
    pub fn new(alpha: f64, p: f64, q: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::config(format!("alpha must be > 0, got {alpha}")));
        }
        if !(p >= 0.0 && q >= 0.0 && (p + q - 1.0).abs() <= 1e-12) {
            return Err(Error::config(format!(
                "tail balance requires p, q >= 0 with p + q = 1, got p={p}, q={q}"
            )));
        }
        Ok(NuAlpha { alpha, p, q })
    }

    /// Exact mass of an interval with positive distance from the origin.
    pub fn mass_interval(&self, iv: &Interval) -> Result<f64> {
        if iv.distance_from_zero() <= 0.0 {
            return Err(Error::domain(format!(
                "nu_alpha mass of ({}, {}] is infinite: set touches 0",
                iv.lo, iv.hi
            )));
        }
        let pow = |x: f64| -> f64 {
            if x.is_infinite() {
                0.0
            } else {
                x.abs().powf(-self.alpha)
            }
        };
        if iv.lo >= 0.0 {
            Ok(self.p * (pow(iv.lo) - pow(iv.hi)))
        } else {
            Ok(self.q * (pow(iv.hi) - pow(iv.lo)))
        }
    }

    /// Total mass of a finite union of disjoint intervals.
    pub fn mass(&self, sets: &[Interval]) -> Result<f64> {
        sets.iter().map(|iv| self.mass_interval(iv)).sum()
    }

    /// Mass of `(x, inf]`.
    pub fn upper_tail(&self, x: f64) -> f64 {
        self.p * x.powf(-self.alpha)
    }

    /// Mass of `(-inf, -x]`.
    pub fn lower_tail(&self, x: f64) -> f64 {
        self.q * x.powf(-self.alpha)
    }
}
