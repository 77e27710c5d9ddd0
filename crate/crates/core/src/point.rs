//! Point samples on the punctured extended real line, together with the
//! interval and step-function types used to evaluate counting and Laplace
//! functionals against them.
//!
//! All intervals use the half-open convention `(lo, hi]`. With `lo = -inf` or
//! `hi = +inf` this covers every set the limit theory needs (`(a, inf]`,
//! `(-inf, -a]`, finite bands) while keeping membership checks unambiguous for
//! atoms that land exactly on an endpoint.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Half-open interval `(lo, hi]` on the extended real line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() {
            return Err(Error::domain("interval endpoint is NaN"));
        }
        if !(lo < hi) {
            return Err(Error::domain(format!(
                "interval requires lo < hi, got ({lo}, {hi}]"
            )));
        }
        Ok(Interval { lo, hi })
    }

    /// `(lo, inf]`.
    pub fn above(lo: f64) -> Result<Self> {
        Interval::new(lo, f64::INFINITY)
    }

    /// `(-inf, hi]`.
    pub fn below(hi: f64) -> Result<Self> {
        Interval::new(f64::NEG_INFINITY, hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x <= self.hi
    }

    /// Infimum of `|x|` over the interval; zero when the interval touches or
    /// straddles the origin.
    pub fn distance_from_zero(&self) -> f64 {
        if self.lo >= 0.0 {
            self.lo
        } else if self.hi <= 0.0 {
            -self.hi
        } else {
            0.0
        }
    }

    /// Image under multiplication by `a > 0`.
    pub fn scaled(&self, a: f64) -> Interval {
        Interval {
            lo: self.lo * a,
            hi: self.hi * a,
        }
    }
}

/// Nonnegative piecewise-constant test function with support bounded away
/// from zero, represented as disjoint `(interval, value)` pieces. Plays the
/// role of the compactly supported test functions of the limit theory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseConstant {
    pieces: Vec<(Interval, f64)>,
}

impl PiecewiseConstant {
    pub fn new(pieces: Vec<(Interval, f64)>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::domain("step function needs at least one piece"));
        }
        for (iv, v) in &pieces {
            if !v.is_finite() || *v < 0.0 {
                return Err(Error::domain(format!(
                    "step function value must be finite and >= 0, got {v}"
                )));
            }
            if iv.distance_from_zero() <= 0.0 {
                return Err(Error::domain(format!(
                    "step function support must be bounded away from 0, got ({}, {}]",
                    iv.lo, iv.hi
                )));
            }
        }
        let mut sorted: Vec<Interval> = pieces.iter().map(|(iv, _)| *iv).collect();
        sorted.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        for w in sorted.windows(2) {
            if w[1].lo < w[0].hi {
                return Err(Error::domain(format!(
                    "step function pieces overlap: ({}, {}] and ({}, {}]",
                    w[0].lo, w[0].hi, w[1].lo, w[1].hi
                )));
            }
        }
        Ok(PiecewiseConstant { pieces })
    }

    /// Single piece `value` on `(lo, hi]`.
    pub fn indicator(iv: Interval, value: f64) -> Result<Self> {
        PiecewiseConstant::new(vec![(iv, value)])
    }

    pub fn pieces(&self) -> &[(Interval, f64)] {
        &self.pieces
    }

    pub fn value_at(&self, x: f64) -> f64 {
        for (iv, v) in &self.pieces {
            if iv.contains(x) {
                return *v;
            }
        }
        0.0
    }

    /// Infimum of `|x|` over the support.
    pub fn support_distance(&self) -> f64 {
        self.pieces
            .iter()
            .map(|(iv, _)| iv.distance_from_zero())
            .fold(f64::INFINITY, f64::min)
    }

    /// The function `x -> g(x / y)` for `y > 0`; pieces scale by `y`.
    pub fn scaled_argument(&self, y: f64) -> Result<Self> {
        if !(y > 0.0) {
            return Err(Error::domain(format!("argument scale must be > 0, got {y}")));
        }
        PiecewiseConstant::new(
            self.pieces
                .iter()
                .map(|(iv, v)| (iv.scaled(y), *v))
                .collect(),
        )
    }
}

/// A finite multiset of `(location, multiplicity)` atoms on the punctured real
/// line. Atoms with `|location| <= window` have been discarded at collection
/// time; the window is recorded so functional evaluations can refuse sets that
/// reach into the discarded region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSample {
    atoms: Vec<(f64, u64)>,
    window: f64,
}

impl PointSample {
    pub fn new(atoms: Vec<(f64, u64)>, window: f64) -> Result<Self> {
        if !(window >= 0.0) {
            return Err(Error::domain(format!("window must be >= 0, got {window}")));
        }
        for &(loc, mult) in &atoms {
            if !loc.is_finite() {
                return Err(Error::domain(format!("atom location {loc} is not finite")));
            }
            if loc.abs() <= window {
                return Err(Error::domain(format!(
                    "atom at {loc} lies inside the discarded window |x| <= {window}"
                )));
            }
            if mult == 0 {
                return Err(Error::domain("atom multiplicity must be >= 1"));
            }
        }
        Ok(PointSample { atoms, window })
    }

    pub fn empty(window: f64) -> Self {
        PointSample {
            atoms: Vec::new(),
            window,
        }
    }

    pub fn atoms(&self) -> &[(f64, u64)] {
        &self.atoms
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.atoms.iter().map(|&(_, m)| m).sum()
    }

    fn check_set(&self, iv: &Interval) -> Result<()> {
        if iv.distance_from_zero() < self.window {
            return Err(Error::domain(format!(
                "set ({}, {}] reaches inside the discarded window |x| <= {}",
                iv.lo, iv.hi, self.window
            )));
        }
        Ok(())
    }

    /// Counting functional: total multiplicity carried by atoms in the set.
    pub fn count(&self, iv: &Interval) -> Result<u64> {
        self.check_set(iv)?;
        Ok(self
            .atoms
            .iter()
            .filter(|(loc, _)| iv.contains(*loc))
            .map(|&(_, m)| m)
            .sum())
    }

    pub fn counts(&self, sets: &[Interval]) -> Result<Vec<u64>> {
        sets.iter().map(|iv| self.count(iv)).collect()
    }

    /// Upper order statistics counted with multiplicity, descending. Returns
    /// at most `k` values; `shortfall` is set when the sample holds fewer than
    /// `k` points.
    pub fn top_order_stats(&self, k: usize) -> (Vec<f64>, bool) {
        let mut locs: Vec<(f64, u64)> = self.atoms.clone();
        locs.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut out = Vec::with_capacity(k);
        for (loc, mult) in locs {
            let take = (k - out.len()).min(usize::try_from(mult).unwrap_or(usize::MAX));
            out.extend(std::iter::repeat_n(loc, take));
            if out.len() == k {
                return (out, false);
            }
        }
        (out, true)
    }

    /// Largest atom location, `None` when empty.
    pub fn max_location(&self) -> Option<f64> {
        self.atoms
            .iter()
            .map(|&(loc, _)| loc)
            .max_by(f64::total_cmp)
    }

    pub fn min_location(&self) -> Option<f64> {
        self.atoms
            .iter()
            .map(|&(loc, _)| loc)
            .min_by(f64::total_cmp)
    }

    /// Every location multiplied by `a > 0`; the window rescales with it.
    pub fn scaled(&self, a: f64) -> Result<PointSample> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::domain(format!("scale factor must be > 0, got {a}")));
        }
        Ok(PointSample {
            atoms: self.atoms.iter().map(|&(loc, m)| (loc * a, m)).collect(),
            window: self.window * a,
        })
    }

    /// Superposition of two samples; the combined window is the larger one.
    /// Fails when the narrower sample holds atoms inside that window, since
    /// dropping them would silently bias counting functionals.
    pub fn merge(&self, other: &PointSample) -> Result<PointSample> {
        let window = self.window.max(other.window);
        let atoms: Vec<(f64, u64)> = self
            .atoms
            .iter()
            .chain(other.atoms.iter())
            .copied()
            .collect();
        PointSample::new(atoms, window)
    }

    /// `exp(-sum multiplicity * g(location))`, the per-sample Laplace weight.
    pub fn laplace_weight(&self, g: &PiecewiseConstant) -> Result<f64> {
        if g.support_distance() < self.window {
            return Err(Error::domain(
                "test function support reaches inside the discarded window",
            ));
        }
        let mut exponent = 0.0;
        for &(loc, mult) in &self.atoms {
            exponent += mult as f64 * g.value_at(loc);
        }
        Ok((-exponent).exp())
    }
}
