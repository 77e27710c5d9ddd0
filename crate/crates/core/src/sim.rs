//! Streaming simulation of the branching random walk to generation `n`,
//! conditioned on survival, producing the scaled extremal point process, the
//! one-large-jump edge process, extremal statistics and the martingale proxy
//! `Z_n / mu^n`.
//!
//! Only the current frontier of positions is kept unless one-jump tracking is
//! requested, in which case every edge increment is recorded and descendant
//! counts are assembled in a single reverse pass over the generations.

use rand::Rng;

use crate::error::{Error, Result};
use crate::offspring::OffspringDistribution;
use crate::point::{Interval, PointSample};
use crate::steps::StepDistribution;

/// Resource budgets for a single replicate.
#[derive(Debug, Clone, Copy)]
pub struct SimCaps {
    /// Largest allowed frontier (and, with one-jump tracking, total edge count).
    pub max_population: u64,
    /// Largest allowed number of extinction restarts.
    pub max_restarts: u64,
}

impl Default for SimCaps {
    fn default() -> Self {
        SimCaps {
            max_population: 10_000_000,
            max_restarts: 1_000,
        }
    }
}

/// One simulated replicate of the generation-`n` branching random walk,
/// conditioned on survival.
#[derive(Debug, Clone)]
pub struct SimReplicate {
    pub n: u32,
    /// Scaled positions `b_n^{-1} S_v`, windowed at `|x| > window`.
    pub positions: PointSample,
    /// Scaled edge increments `b_n^{-1} X_e` with generation-`n` descendant
    /// counts as multiplicities; present when one-jump tracking was on.
    pub one_jump: Option<PointSample>,
    /// `Z_n / mu^n`.
    pub w_proxy: f64,
    pub population: u64,
    /// Extinction rejections before this surviving replicate.
    pub restarts: u64,
    /// True minimum of the scaled positions, before windowing.
    pub min_scaled: f64,
    /// True maximum of the scaled positions, before windowing.
    pub max_scaled: f64,
    /// The scaling constant `b_n` that was applied.
    pub scaling: f64,
}

/// Order statistics of a replicate: upper order statistics counted with
/// multiplicity (descending), consecutive gaps, and the unwindowed minimum.
#[derive(Debug, Clone)]
pub struct Extremes {
    pub upper: Vec<f64>,
    pub gaps: Vec<f64>,
    pub minimum: f64,
    /// Set when fewer than `k` points were available beyond the window.
    pub shortfall: bool,
}

struct EdgeRecord {
    parent: u32,
    step: f64,
}

/// Simulates one replicate. On extinction before generation `n` the replicate
/// restarts from scratch (rejection sampling of the survival-conditioned law),
/// counting restarts. Atoms are scaled by `b_n` and windowed at `|x| > window`.
pub fn simulate_replicate<R: Rng + ?Sized>(
    offspring: &OffspringDistribution,
    step: &StepDistribution,
    n: u32,
    window: f64,
    track_one_jump: bool,
    caps: &SimCaps,
    rng: &mut R,
) -> Result<SimReplicate> {
    if n < 1 {
        return Err(Error::domain("generation must be >= 1"));
    }
    if !(window >= 0.0) {
        return Err(Error::domain(format!("window must be >= 0, got {window}")));
    }
    let b_n = step.scaling_constant(offspring.mean(), n)?;
    let inv_b = 1.0 / b_n;

    let mut restarts: u64 = 0;
    'replicate: loop {
        let mut frontier: Vec<f64> = vec![0.0];
        let mut edges: Vec<Vec<EdgeRecord>> = Vec::new();
        let mut total_edges: u64 = 0;

        for gen in 1..=n {
            let parents = frontier.len();
            let mut next = Vec::with_capacity(parents * 2);
            let mut gen_edges = Vec::new();
            if track_one_jump {
                gen_edges.reserve(parents * 2);
            }
            for (parent_idx, &pos) in frontier.iter().enumerate() {
                let children = offspring.sample_offspring(rng);
                for _ in 0..children {
                    let x = step.sample(rng);
                    next.push(pos + x);
                    if track_one_jump {
                        gen_edges.push(EdgeRecord {
                            parent: parent_idx as u32,
                            step: x,
                        });
                    }
                }
            }
            if next.len() as u64 > caps.max_population {
                return Err(Error::resource(format!(
                    "population cap {} exceeded at generation {gen} (frontier {})",
                    caps.max_population,
                    next.len()
                )));
            }
            if next.is_empty() {
                restarts += 1;
                if restarts > caps.max_restarts {
                    return Err(Error::resource(format!(
                        "restart cap {} exceeded: extinction keeps occurring before generation {n}",
                        caps.max_restarts
                    )));
                }
                continue 'replicate;
            }
            if track_one_jump {
                total_edges += gen_edges.len() as u64;
                if total_edges > caps.max_population {
                    return Err(Error::resource(format!(
                        "population cap {} exceeded by one-jump edge storage at generation {gen}",
                        caps.max_population
                    )));
                }
                edges.push(gen_edges);
            }
            frontier = next;
        }

        let population = frontier.len() as u64;
        let w_proxy = population as f64 / offspring.mean().powi(n as i32);

        let mut min_scaled = f64::INFINITY;
        let mut max_scaled = f64::NEG_INFINITY;
        let mut atoms = Vec::new();
        for &pos in &frontier {
            let scaled = pos * inv_b;
            min_scaled = min_scaled.min(scaled);
            max_scaled = max_scaled.max(scaled);
            if scaled.abs() > window {
                atoms.push((scaled, 1u64));
            }
        }
        let positions = PointSample::new(atoms, window)?;

        let one_jump = if track_one_jump {
            let mut jump_atoms = Vec::new();
            // descendant counts: ones at generation n, folded backwards
            let mut counts: Vec<u64> = vec![1; edges.last().map_or(0, Vec::len)];
            for gen_idx in (0..edges.len()).rev() {
                let gen_edges = &edges[gen_idx];
                let mut parent_counts = if gen_idx > 0 {
                    vec![0u64; edges[gen_idx - 1].len()]
                } else {
                    Vec::new()
                };
                for (edge, &count) in gen_edges.iter().zip(&counts) {
                    let scaled = edge.step * inv_b;
                    if scaled.abs() > window {
                        jump_atoms.push((scaled, count));
                    }
                    if gen_idx > 0 {
                        parent_counts[edge.parent as usize] += count;
                    }
                }
                counts = parent_counts;
            }
            Some(PointSample::new(jump_atoms, window)?)
        } else {
            None
        };

        return Ok(SimReplicate {
            n,
            positions,
            one_jump,
            w_proxy,
            population,
            restarts,
            min_scaled,
            max_scaled,
            scaling: b_n,
        });
    }
}

/// Order statistics `M^(1..k)` (with multiplicity, from the windowed atoms),
/// gaps `G^(j) = M^(j) - M^(j+1)`, and the unwindowed minimum.
pub fn extremes(rep: &SimReplicate, k: usize) -> Extremes {
    let (upper, shortfall) = rep.positions.top_order_stats(k);
    let gaps = upper.windows(2).map(|w| w[0] - w[1]).collect();
    Extremes {
        upper,
        gaps,
        minimum: rep.min_scaled,
        shortfall,
    }
}

/// Counting functional `N_n(A)` for each set.
pub fn counts(rep: &SimReplicate, sets: &[Interval]) -> Result<Vec<u64>> {
    rep.positions.counts(sets)
}

/// Per-set difference `N_n(A) - N~_n(A)` between the position process and the
/// one-large-jump edge process.
pub fn one_jump_discrepancy(rep: &SimReplicate, sets: &[Interval]) -> Result<Vec<i64>> {
    let one_jump = rep.one_jump.as_ref().ok_or_else(|| {
        Error::domain("one-jump discrepancy requires a replicate simulated with tracking enabled")
    })?;
    let n_counts = rep.positions.counts(sets)?;
    let j_counts = one_jump.counts(sets)?;
    Ok(n_counts
        .iter()
        .zip(&j_counts)
        .map(|(&a, &b)| a as i64 - b as i64)
        .collect())
}
