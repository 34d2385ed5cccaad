//! Near-uniform sampling of independent sets of a fixed size `k`.
//!
//! A binary search over the fugacity grid `t / (2 n^2)` looks for a `lambda`
//! whose mean hard-core set size is within `1/4` of `k`, then returns the first
//! size-`k` set among that iteration's samples. The hard-core measure
//! conditioned on size `k` is uniform on `I_k(G)`, so an accepted sample is
//! near-uniform. If the search runs out, a greedy set is returned and the
//! outcome is flagged.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{precondition, Result};
use crate::glauber::MixingSchedule;
use crate::graph::{Graph, VertexSet};
use crate::rng;
use crate::samplers::{build_sampler, HardcoreSampler};
use crate::thresholds::{alpha_c, lambda_star, lambda_star_triangle_free};
use crate::{ceil_tol, floor_tol};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    General,
    /// Triangle-free inputs: the grid reaches `lambda_c(D) - 1/D^2` and
    /// densities below `(1 - slack)/D` are admitted.
    TriangleFree,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Loop length multiplier: `ceil(c_loop * ln n)` search iterations.
    pub c_loop: f64,
    /// Sample count multiplier: `N = ceil(c_samples * n^2 * ln(ln n / eps))`.
    pub c_samples: f64,
    /// Target total variation distance of the output.
    pub epsilon: f64,
    pub seed: u64,
    pub mixing: MixingSchedule,
    pub mode: Mode,
    /// Slack `delta` in the triangle-free density bound `(1 - delta)/D`.
    pub triangle_free_slack: f64,
    /// Degree bound `D`; defaults to `max(3, max_degree(G))`.
    pub delta: Option<usize>,
    /// Replaces `N`; clears the guarantee flag.
    pub n_samples_override: Option<usize>,
    /// Name of the registered hard-core sampler.
    pub sampler: String,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            c_loop: 3.0,
            c_samples: 1.0,
            epsilon: 0.05,
            seed: 0,
            mixing: MixingSchedule::default(),
            mode: Mode::General,
            triangle_free_slack: 0.0,
            delta: None,
            n_samples_override: None,
            sampler: "glauber".into(),
        }
    }
}

fn clamped_ln(n: usize) -> f64 {
    (n as f64).ln().max(1.0)
}

/// Number of search iterations, `ceil(c_loop * max(1, ln n))`.
pub fn loop_length(n: usize, c_loop: f64) -> usize {
    ((c_loop * clamped_ln(n)).ceil() as usize).max(1)
}

/// Samples per iteration, `ceil(c_samples * n^2 * ln(max(e, ln n / eps)))`.
pub fn sample_count(n: usize, epsilon: f64, c_samples: f64) -> usize {
    let inner = (clamped_ln(n) / epsilon).max(std::f64::consts::E);
    let n2 = (n * n) as f64;
    ((c_samples * n2 * inner.ln()).ceil() as usize).max(1)
}

/// Accuracy demanded of each hard-core sample: `eps / (2 * loop_len * N)`.
pub fn inner_epsilon(epsilon: f64, loop_len: usize, n_samples: usize) -> f64 {
    epsilon / (2.0 * loop_len as f64 * n_samples as f64)
}

/// Grid `{ t / (2 n^2) : t = 0..=floor(2 lambda_star n^2) }`.
pub fn lambda_grid(n: usize, lambda_star: f64) -> Vec<f64> {
    let scale = grid_scale(n);
    (0..=grid_top(n, lambda_star)).map(|t| t as f64 / scale).collect()
}

fn grid_scale(n: usize) -> f64 {
    2.0 * (n * n) as f64
}

fn grid_top(n: usize, lambda_star: f64) -> usize {
    (lambda_star * grid_scale(n)).floor() as usize
}

/// Lower median: the element at index `(len - 1) / 2`.
pub fn median_lower<T: Copy>(sorted: &[T]) -> Result<T> {
    if sorted.is_empty() {
        return Err(precondition("median of an empty sequence"));
    }
    Ok(sorted[(sorted.len() - 1) / 2])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Accept,
    /// `kappa <= k` without acceptance: keep grid points above `lambda`.
    Up,
    /// `kappa > k`: keep grid points below `lambda`.
    Down,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchStep {
    pub iteration: usize,
    pub lambda: f64,
    pub grid_index: usize,
    pub kappa: f64,
    pub branch: Branch,
    /// Grid points left after this step.
    pub remaining: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Found,
    Fallback,
    /// `k = 0`; nothing to search.
    Trivial,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchTrace {
    pub steps: Vec<SearchStep>,
    pub outcome: Outcome,
    pub grid_len: usize,
    pub loop_len: usize,
    pub n_samples: usize,
    pub inner_epsilon: f64,
}

/// Parameters shared by every fixed-size search (hard-core or Ising).
#[derive(Clone, Copy, Debug)]
pub(crate) struct SearchPlan {
    pub target: usize,
    pub n: usize,
    pub grid_top: usize,
    pub loop_len: usize,
    pub n_samples: usize,
    pub inner_epsilon: f64,
}

impl SearchPlan {
    pub fn new(target: usize, n: usize, lambda_ceiling: f64, config: &SamplerConfig) -> Self {
        let loop_len = loop_length(n, config.c_loop);
        let n_samples = config
            .n_samples_override
            .unwrap_or_else(|| sample_count(n, config.epsilon, config.c_samples));
        Self {
            target,
            n,
            grid_top: grid_top(n, lambda_ceiling),
            loop_len,
            n_samples,
            inner_epsilon: inner_epsilon(config.epsilon, loop_len, n_samples),
        }
    }
}

/// Binary search over the grid. `draw(lambda, iteration, index)` returns the
/// size statistic of one sample and the sample itself. Returns the accepted
/// sample, if any, and the trace.
pub(crate) fn grid_search<T, F>(plan: &SearchPlan, draw: F) -> (Option<T>, SearchTrace)
where
    T: Send,
    F: Fn(f64, usize, usize) -> (usize, T) + Sync,
{
    let scale = grid_scale(plan.n);
    let target = plan.target as f64;
    // Remaining grid is the contiguous index range lo..=hi (empty when lo > hi).
    let (mut lo, mut hi) = (0isize, plan.grid_top as isize);
    let mut steps = Vec::new();
    let mut accepted = None;
    for iteration in 0..plan.loop_len {
        if lo > hi {
            break;
        }
        let t = lo + (hi - lo) / 2;
        let lambda = t as f64 / scale;
        let samples: Vec<(usize, T)> = (0..plan.n_samples)
            .into_par_iter()
            .map(|j| draw(lambda, iteration, j))
            .collect();
        let kappa = samples.iter().map(|(s, _)| *s as f64).sum::<f64>() / plan.n_samples as f64;
        if (kappa - target).abs() <= 0.25 {
            accepted = samples.into_iter().find(|(s, _)| *s == plan.target).map(|(_, item)| item);
        }
        let branch = if accepted.is_some() {
            Branch::Accept
        } else if kappa <= target {
            lo = t + 1;
            Branch::Up
        } else {
            hi = t - 1;
            Branch::Down
        };
        steps.push(SearchStep {
            iteration,
            lambda,
            grid_index: t as usize,
            kappa,
            branch,
            remaining: if branch == Branch::Accept { 0 } else { (hi - lo + 1).max(0) as usize },
        });
        if accepted.is_some() {
            break;
        }
    }
    let outcome = if accepted.is_some() {
        Outcome::Found
    } else {
        Outcome::Fallback
    };
    let trace = SearchTrace {
        steps,
        outcome,
        grid_len: plan.grid_top + 1,
        loop_len: plan.loop_len,
        n_samples: plan.n_samples,
        inner_epsilon: plan.inner_epsilon,
    };
    (accepted, trace)
}

/// Result of [`sample_k`].
#[derive(Clone, Debug, Serialize)]
pub struct FixedSizeSample {
    pub set: VertexSet,
    pub trace: SearchTrace,
    /// False when `N` was overridden or the sampler gives no TV guarantee.
    pub guarantee: bool,
}

/// Degree bound used for thresholds: the configured one, or `max(3, max_degree)`.
pub fn degree_bound(graph: &Graph, configured: Option<usize>) -> Result<usize> {
    match configured {
        Some(d) if d < graph.max_degree() => Err(precondition(format!(
            "degree bound {d} is below the graph's maximum degree {}",
            graph.max_degree()
        ))),
        Some(d) if d < 3 => Err(precondition("degree bound must be >= 3")),
        Some(d) => Ok(d),
        None => Ok(graph.max_degree().max(3)),
    }
}

/// Checks the preconditions and returns the grid ceiling `lambda_*`.
pub fn grid_ceiling(graph: &Graph, k: usize, alpha: f64, config: &SamplerConfig) -> Result<f64> {
    let n = graph.n();
    let delta = degree_bound(graph, config.delta)?;
    if !(config.epsilon > 0.0 && config.epsilon < 1.0) {
        return Err(precondition(format!("epsilon must lie in (0, 1), got {}", config.epsilon)));
    }
    if k > ceil_tol(alpha * n as f64) {
        return Err(precondition(format!(
            "k = {k} exceeds ceil(alpha * n) = {}",
            ceil_tol(alpha * n as f64)
        )));
    }
    match config.mode {
        Mode::General => lambda_star(alpha, delta),
        Mode::TriangleFree => {
            if !graph.is_triangle_free() {
                return Err(precondition("triangle-free mode needs a triangle-free graph"));
            }
            let bound = (1.0 - config.triangle_free_slack) / delta as f64;
            if !(alpha > 0.0 && alpha < bound) {
                return Err(precondition(format!(
                    "triangle-free mode needs alpha in (0, {bound}), got {alpha}"
                )));
            }
            lambda_star_triangle_free(delta)
        }
    }
}

/// Whether `k` sits in the proven regime `k <= floor(alpha n)` with `alpha < alpha_c`.
pub fn in_proven_regime(graph: &Graph, k: usize, alpha: f64, config: &SamplerConfig) -> bool {
    let n = graph.n() as f64;
    let Ok(delta) = degree_bound(graph, config.delta) else {
        return false;
    };
    let density_ok = match config.mode {
        Mode::General => alpha_c(delta).is_ok_and(|ac| alpha < ac),
        Mode::TriangleFree => alpha < (1.0 - config.triangle_free_slack) / delta as f64,
    };
    density_ok && k <= floor_tol(alpha * n)
}

/// Samples a near-uniform independent set of size `k` using the sampler named in `config`.
pub fn sample_k(graph: &Graph, k: usize, alpha: f64, config: &SamplerConfig) -> Result<FixedSizeSample> {
    let sampler = build_sampler(&config.sampler, graph, &config.mixing)?;
    sample_k_with(graph, k, alpha, config, sampler.as_ref())
}

/// [`sample_k`] with an explicit sampler.
pub fn sample_k_with(
    graph: &Graph,
    k: usize,
    alpha: f64,
    config: &SamplerConfig,
    sampler: &dyn HardcoreSampler,
) -> Result<FixedSizeSample> {
    let n = graph.n();
    if k == 0 {
        return Ok(FixedSizeSample {
            set: VertexSet::empty(n),
            trace: SearchTrace {
                steps: Vec::new(),
                outcome: Outcome::Trivial,
                grid_len: 0,
                loop_len: 0,
                n_samples: 0,
                inner_epsilon: config.epsilon,
            },
            guarantee: true,
        });
    }
    let ceiling = grid_ceiling(graph, k, alpha, config)?;
    let plan = SearchPlan::new(k, n, ceiling, config);
    let seed = config.seed;
    let (found, trace) = grid_search(&plan, |lambda, iteration, j| {
        let set = sampler.sample(
            lambda,
            plan.inner_epsilon,
            rng::substream(seed, &[iteration as u64, j as u64]),
        );
        (set.len(), set)
    });
    let set = match found {
        Some(set) => set,
        None => graph.greedy_independent_set(k)?,
    };
    let top = plan.grid_top as f64 / grid_scale(n);
    Ok(FixedSizeSample {
        set,
        trace,
        guarantee: config.n_samples_override.is_none() && sampler.guarantee(top),
    })
}
