//! Estimating `i_k(G)` from fixed-size samples.
//!
//! With `f_j = (j+1) i_{j+1} / i_j` the expected free volume of a uniform
//! `J` in `I_j(G)`, `i_k = prod_{j<k} f_j / (j+1)`. Each factor is estimated by
//! the sample mean of `|V \ (J u N(J))| / (j+1)` over draws from Sample-k, and
//! the product is accumulated in the log domain.

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::oracle::{independence_polynomial_with_limit, IndependencePolynomial, DEFAULT_EXACT_LIMIT};
use crate::rng;
use crate::sample_k::{degree_bound, in_proven_regime, sample_k_with, SamplerConfig};
use crate::samplers::{build_sampler, HardcoreSampler};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountConfig {
    pub sampler: SamplerConfig,
    /// Multiplier in `m = ceil(c_anneal * eps^-2 * k^2 * ln(max(e, k)))`.
    pub c_anneal: f64,
    /// Replaces the per-level sample count; clears the guarantee flag.
    pub m_override: Option<usize>,
    /// Largest graph on which a zero level is cross-checked against the exact oracle.
    pub oracle_limit: usize,
}

impl Default for CountConfig {
    fn default() -> Self {
        Self {
            sampler: SamplerConfig::default(),
            c_anneal: 0.5,
            m_override: None,
            oracle_limit: DEFAULT_EXACT_LIMIT,
        }
    }
}

/// Sample budget for the cooling schedule `j = 0, ..., k-1`.
#[derive(Clone, Debug, Serialize)]
pub struct AnnealingPlan {
    pub k: usize,
    /// Draws per level.
    pub m: usize,
    pub epsilon: f64,
    /// Per-level failure probability `1/(4k)`.
    pub delta_prime: f64,
    /// TV accuracy asked of Sample-k at each level, `delta_prime / 2`.
    pub sampler_epsilon: f64,
}

impl AnnealingPlan {
    pub fn new(k: usize, epsilon: f64, c_anneal: f64) -> Self {
        let kf = k.max(1) as f64;
        let m = (c_anneal * kf * kf * kf.max(std::f64::consts::E).ln() / (epsilon * epsilon)).ceil();
        let delta_prime = 1.0 / (4.0 * kf);
        Self {
            k,
            m: (m as usize).max(1),
            epsilon,
            delta_prime,
            sampler_epsilon: delta_prime / 2.0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CountEstimate {
    pub k: usize,
    /// Natural log of the estimate; `-inf` for an exact zero.
    pub log_estimate: f64,
    /// Per-level estimates of `f_j / (j+1)`.
    pub levels: Vec<f64>,
    /// Number of Sample-k calls that ended in the greedy fallback.
    pub fallbacks: usize,
    pub guarantee_valid: bool,
}

impl CountEstimate {
    /// The product of the levels, or `exp(log_estimate)` if that overflows.
    pub fn estimate(&self) -> f64 {
        let product: f64 = self.levels.iter().product();
        if product.is_finite() {
            product
        } else {
            self.log_estimate.exp()
        }
    }

    /// The estimate as a decimal string; scientific notation from 1e15 up.
    pub fn decimal(&self) -> String {
        if self.log_estimate == f64::NEG_INFINITY {
            return "0".into();
        }
        let value = self.estimate();
        if value.is_finite() && value < 1e15 {
            return format!("{value:.6}");
        }
        let log10 = self.log_estimate / std::f64::consts::LN_10;
        let exponent = log10.floor();
        format!("{:.6}e{exponent}", 10f64.powf(log10 - exponent))
    }
}

/// `|V \ (J u N(J))|`: vertices that could be added to `J`.
pub fn free_volume(graph: &Graph, set: &VertexSet) -> Result<usize> {
    if set.universe() != graph.n() || !graph.is_independent(set) {
        return Err(precondition("free volume needs an independent set of the graph"));
    }
    let mut blocked = vec![false; graph.n()];
    for v in set.iter() {
        blocked[v] = true;
        for &u in graph.neighbors(v) {
            blocked[u] = true;
        }
    }
    Ok(blocked.iter().filter(|&&b| !b).count())
}

/// Exact level values `f_j / (j+1) = i_{j+1} / i_j` for `j < k`.
pub fn exact_levels(poly: &IndependencePolynomial, k: usize) -> Vec<f64> {
    (0..k)
        .map(|j| (poly.ln_coefficient(j + 1) - poly.ln_coefficient(j)).exp())
        .collect()
}

/// `sum_j ln t_j`.
pub fn telescoping_log(levels: &[f64]) -> f64 {
    levels.iter().map(|t| t.ln()).sum()
}

struct LevelResult {
    mean: f64,
    fallbacks: usize,
    guaranteed: bool,
}

fn run_level(
    graph: &Graph,
    j: usize,
    plan: &AnnealingPlan,
    alpha: f64,
    config: &CountConfig,
    sampler: &dyn HardcoreSampler,
) -> Result<LevelResult> {
    let n = graph.n();
    if j == 0 {
        return Ok(LevelResult {
            mean: n as f64,
            fallbacks: 0,
            guaranteed: true,
        });
    }
    let delta = degree_bound(graph, config.sampler.delta)? as f64;
    let jf = j as f64;
    let lower = ((n as f64 - jf * (delta + 1.0)) / (jf + 1.0)).max(0.0);
    let upper = n as f64 / (jf + 1.0);
    let m = config.m_override.unwrap_or(plan.m);
    let draws: Vec<Result<(f64, bool, bool)>> = (0..m)
        .into_par_iter()
        .map(|s| {
            let level_cfg = SamplerConfig {
                epsilon: plan.sampler_epsilon,
                seed: rng::derive_seed(config.sampler.seed, &[0x616e_6e65, j as u64, s as u64]),
                ..config.sampler.clone()
            };
            let out = sample_k_with(graph, j, alpha, &level_cfg, sampler)?;
            let value = free_volume(graph, &out.set)? as f64 / (jf + 1.0);
            if value < lower - 1e-12 || value > upper + 1e-12 {
                return Err(Error::Inconsistent(format!(
                    "level {j} sample {value} outside [{lower}, {upper}]"
                )));
            }
            Ok((value, out.trace.outcome == crate::sample_k::Outcome::Fallback, out.guarantee))
        })
        .collect();
    let mut sum = 0.0;
    let mut fallbacks = 0;
    let mut guaranteed = true;
    for d in draws {
        let (value, fell_back, ok) = d?;
        sum += value;
        fallbacks += fell_back as usize;
        guaranteed &= ok;
    }
    Ok(LevelResult {
        mean: sum / m as f64,
        fallbacks,
        guaranteed,
    })
}

/// Estimate of `f_j / (j+1)`: the mean of `m` sampled free volumes divided by `j+1`.
/// Level 0 is exactly `n`.
pub fn estimate_level(graph: &Graph, j: usize, plan: &AnnealingPlan, alpha: f64, config: &CountConfig) -> Result<f64> {
    if j >= plan.k.max(1) {
        return Err(precondition(format!("level {j} outside 0..{}", plan.k)));
    }
    let sampler = build_sampler(&config.sampler.sampler, graph, &config.sampler.mixing)?;
    Ok(run_level(graph, j, plan, alpha, config, sampler.as_ref())?.mean)
}

/// Relative `epsilon`-approximation of `i_k(G)` (with probability at least 3/4 in the proven regime).
pub fn count_ik(graph: &Graph, k: usize, alpha: f64, epsilon: f64, config: &CountConfig) -> Result<CountEstimate> {
    let sampler = build_sampler(&config.sampler.sampler, graph, &config.sampler.mixing)?;
    count_ik_with(graph, k, alpha, epsilon, config, sampler.as_ref())
}

/// [`count_ik`] with an explicit hard-core sampler.
pub fn count_ik_with(
    graph: &Graph,
    k: usize,
    alpha: f64,
    epsilon: f64,
    config: &CountConfig,
    sampler: &dyn HardcoreSampler,
) -> Result<CountEstimate> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(precondition(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    if k > graph.n() {
        return Err(precondition(format!("k = {k} exceeds n = {}", graph.n())));
    }
    if k > 0 {
        // Validates alpha, the degree bound and k <= ceil(alpha n) up front.
        crate::sample_k::grid_ceiling(graph, k, alpha, &config.sampler)?;
    }
    let plan = AnnealingPlan::new(k, epsilon, config.c_anneal);
    let mut levels = Vec::with_capacity(k);
    let mut fallbacks = 0;
    let mut guarantee = config.m_override.is_none()
        && config.sampler.n_samples_override.is_none()
        && in_proven_regime(graph, k, alpha, &config.sampler);
    for j in 0..k {
        let level = run_level(graph, j, &plan, alpha, config, sampler)?;
        fallbacks += level.fallbacks;
        guarantee &= level.guaranteed;
        if level.mean == 0.0 {
            if graph.n() <= config.oracle_limit {
                let poly = independence_polynomial_with_limit(graph, config.oracle_limit)?;
                if !poly.coefficient(j + 1).is_zero() {
                    return Err(Error::Inconsistent(format!(
                        "level {j} estimated zero free volume but i_{} > 0",
                        j + 1
                    )));
                }
            }
            levels.push(0.0);
            return Ok(CountEstimate {
                k,
                log_estimate: f64::NEG_INFINITY,
                levels,
                fallbacks,
                guarantee_valid: guarantee,
            });
        }
        levels.push(level.mean);
    }
    Ok(CountEstimate {
        k,
        log_estimate: telescoping_log(&levels),
        levels,
        fallbacks,
        guarantee_valid: guarantee,
    })
}
