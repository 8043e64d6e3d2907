//! Differential evolution, rand/1/bin with greedy selection.

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct DeConfig {
    pub n: usize,
    pub np: usize,
    /// Differential weight.
    pub f: f64,
    /// Crossover rate.
    pub cr: f64,
    pub gen_max: usize,
    pub seed: u64,
    /// Initialisation interval [lo, hi) per parameter.
    pub init: Vec<(f64, f64)>,
}

impl DeConfig {
    /// NP = 10n, F = 0.5, CR = 0.1, 1000 generations, init in [−1, 1).
    pub fn new(n: usize, seed: u64) -> Self {
        Self { n, np: 10 * n, f: 0.5, cr: 0.1, gen_max: 1000, seed, init: vec![(-1.0, 1.0); n] }
    }

    /// Amplitude genes in [−1, 1), last gene (exposure time) in [0, 0.01).
    pub fn lithography(n: usize, seed: u64) -> Self {
        let mut cfg = Self::new(n, seed);
        if let Some(last) = cfg.init.last_mut() {
            *last = (0.0, 1e-2);
        }
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.init.len() != self.n {
            return Err(Error::Dimension(format!("{} init ranges for {} parameters", self.init.len(), self.n)));
        }
        if self.np < 4 {
            return Err(Error::Domain(format!("population {} below 4", self.np)));
        }
        if !(self.f > 0.0) {
            return Err(Error::Domain(format!("F = {} must be positive", self.f)));
        }
        if !(0.0..=1.0).contains(&self.cr) {
            return Err(Error::Domain(format!("CR = {} outside [0, 1]", self.cr)));
        }
        if self.init.iter().any(|(lo, hi)| !(lo <= hi) || !lo.is_finite() || !hi.is_finite()) {
            return Err(Error::Domain("init ranges must be finite with lo ≤ hi".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Individual {
    pub x: Vec<f64>,
    /// +∞ until a finite evaluation is recorded.
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeResult {
    pub best: Vec<f64>,
    pub best_cost: f64,
    /// Best-so-far cost after initialisation and after each generation.
    pub history: Vec<f64>,
    pub population: Vec<Individual>,
}

/// Uniform draws in the configured ranges; deterministic in the seed.
pub fn init_population(cfg: &DeConfig, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..cfg.np).map(|_| cfg.init.iter().map(|&(lo, hi)| lo + (hi - lo) * rng.random::<f64>()).collect()).collect()
}

/// Scales the genes in `subset` to unit Euclidean norm, leaving the rest.
pub fn normalize_genes(x: &[f64], subset: Range<usize>) -> Result<Vec<f64>> {
    if subset.end > x.len() {
        return Err(Error::Dimension("gene subset exceeds the vector".into()));
    }
    let norm = x[subset.clone()].iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::ZeroNorm);
    }
    let mut out = x.to_vec();
    for v in &mut out[subset] {
        *v /= norm;
    }
    Ok(out)
}

fn distinct(rng: &mut ChaCha8Rng, np: usize, avoid: &[usize]) -> usize {
    loop {
        let k = rng.random_range(0..np);
        if !avoid.contains(&k) {
            return k;
        }
    }
}

fn finite_or_inf(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        f64::INFINITY
    }
}

/// Minimises `objective`. Trials of one generation are drawn in index order
/// from a single stream, evaluated in parallel, then selected in order, so the
/// run is reproducible for a given seed.
pub fn de_minimize<F>(cfg: &DeConfig, objective: F) -> Result<DeResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let xs = init_population(cfg, &mut rng);
    let costs: Vec<f64> = xs.par_iter().map(|x| finite_or_inf(objective(x))).collect();
    let mut pop: Vec<Individual> = xs.into_iter().zip(costs).map(|(x, cost)| Individual { x, cost }).collect();
    let mut best = pop[0].clone();
    for ind in &pop {
        if ind.cost < best.cost {
            best = ind.clone();
        }
    }
    let mut history = Vec::with_capacity(cfg.gen_max + 1);
    history.push(best.cost);
    let n = cfg.n;
    for _ in 0..cfg.gen_max {
        let trials: Vec<Vec<f64>> = (0..cfg.np)
            .map(|i| {
                let ia = distinct(&mut rng, cfg.np, &[i]);
                let ib = distinct(&mut rng, cfg.np, &[i, ia]);
                let ic = distinct(&mut rng, cfg.np, &[i, ia, ib]);
                let mut trial = pop[i].x.clone();
                let mut j = rng.random_range(0..n);
                for k in 1..=n {
                    if rng.random::<f64>() <= cfg.cr || k == n {
                        trial[j] = pop[ic].x[j] + cfg.f * (pop[ia].x[j] - pop[ib].x[j]);
                    }
                    j = (j + 1) % n;
                }
                trial
            })
            .collect();
        let scores: Vec<f64> = trials.par_iter().map(|t| objective(t)).collect();
        for (i, (trial, score)) in trials.into_iter().zip(scores).enumerate() {
            if score.is_finite() && score <= pop[i].cost {
                pop[i] = Individual { x: trial, cost: score };
                if score < best.cost {
                    best = pop[i].clone();
                }
            }
        }
        history.push(best.cost);
    }
    Ok(DeResult { best: best.x, best_cost: best.cost, history, population: pop })
}
