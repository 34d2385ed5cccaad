//! The anti-ferromagnetic Ising model at fixed magnetization.
//!
//! `Z_G(B, lambda) = sum_sigma B^{m(sigma)} lambda^{#plus(sigma)}`, where `m` counts
//! monochromatic edges. Writing `Z = sum_k c_k lambda^k`, this module computes
//! `c_k` exactly for small graphs, samples from the fixed-magnetization measure
//! `nu_{G,B,k}` with the same grid search used for independent sets, and
//! estimates `c_k` with a telescoping product over magnetizations.
//!
//! The uniqueness threshold `lambda_c(D, B)` is not computed: callers supply the
//! grid ceiling `lambda_max` directly, and no TV guarantee is claimed.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annealing::AnnealingPlan;
use crate::error::{precondition, Error, Result};
use crate::ceil_tol;
use crate::graph::{gen_clique, Graph};
use crate::rng::{self, ChainRng};
use crate::sample_k::{grid_search, SamplerConfig, SearchPlan, SearchTrace};

/// Largest `n` for `2^n` enumeration.
pub const ISING_EXACT_LIMIT: usize = 22;

/// `B_c(D) = (D - 2) / D`.
pub fn b_c(delta: usize) -> Result<f64> {
    if delta < 3 {
        return Err(precondition(format!("B_c needs degree >= 3, got {delta}")));
    }
    Ok((delta - 2) as f64 / delta as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsingParams {
    #[serde(rename = "B")]
    pub b: f64,
    pub lambda: f64,
    pub delta: usize,
    pub b_c: f64,
}

impl IsingParams {
    pub fn new(b: f64, lambda: f64, delta: usize) -> Result<Self> {
        if !(b > 0.0 && b < 1.0) {
            return Err(precondition(format!("B must lie in (0, 1), got {b}")));
        }
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(precondition(format!("lambda must lie in (0, 1], got {lambda}")));
        }
        Ok(Self {
            b,
            lambda,
            delta,
            b_c: b_c(delta)?,
        })
    }
}

/// A spin configuration; `true` is `+`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SpinAssignment {
    spins: Vec<bool>,
    plus_count: usize,
}

impl SpinAssignment {
    pub fn all_minus(n: usize) -> Self {
        Self {
            spins: vec![false; n],
            plus_count: 0,
        }
    }

    pub fn from_spins(spins: Vec<bool>) -> Self {
        let plus_count = spins.iter().filter(|s| **s).count();
        Self { spins, plus_count }
    }

    /// `+` on the given vertices, `-` elsewhere.
    pub fn with_plus(n: usize, plus: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut spins = vec![false; n];
        for v in plus {
            *spins
                .get_mut(v)
                .ok_or_else(|| precondition(format!("vertex {v} out of range for n = {n}")))? = true;
        }
        Ok(Self::from_spins(spins))
    }

    fn from_mask(n: usize, mask: u64) -> Self {
        Self::from_spins((0..n).map(|v| mask >> v & 1 == 1).collect())
    }

    pub fn n(&self) -> usize {
        self.spins.len()
    }

    pub fn spins(&self) -> &[bool] {
        &self.spins
    }

    pub fn plus_count(&self) -> usize {
        self.plus_count
    }

    pub fn is_plus(&self, v: usize) -> bool {
        self.spins[v]
    }

    /// Plus vertices in ascending order.
    pub fn plus_vertices(&self) -> Vec<usize> {
        (0..self.spins.len()).filter(|&v| self.spins[v]).collect()
    }

    pub fn set(&mut self, v: usize, plus: bool) {
        if self.spins[v] != plus {
            self.spins[v] = plus;
            if plus {
                self.plus_count += 1;
            } else {
                self.plus_count -= 1;
            }
        }
    }

    pub fn monochromatic_edges(&self, graph: &Graph) -> usize {
        graph.edges().filter(|&(u, v)| self.spins[u] == self.spins[v]).count()
    }

    #[cfg(test)]
    fn mask(&self) -> u64 {
        self.spins
            .iter()
            .enumerate()
            .fold(0, |acc, (v, &s)| if s { acc | 1 << v } else { acc })
    }
}

/// Exact counts of assignments by magnetization and monochromatic edges.
#[derive(Clone, Debug, PartialEq)]
pub struct IsingPolynomial {
    n: usize,
    /// `counts[k][m]`: assignments with `k` plus spins and `m` monochromatic edges.
    counts: Vec<Vec<u64>>,
}

impl IsingPolynomial {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    /// `c_k(G, B)` for `k = 0..=n`.
    pub fn coefficients(&self, b: f64) -> Vec<f64> {
        self.counts
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(m, &c)| c as f64 * b.powi(m as i32))
                    .sum()
            })
            .collect()
    }

    pub fn partition(&self, b: f64, lambda: f64) -> f64 {
        self.coefficients(b).iter().rev().fold(0.0, |acc, c| acc * lambda + c)
    }

    /// Expected fraction of plus spins.
    pub fn occupancy(&self, b: f64, lambda: f64) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let c = self.coefficients(b);
        let (mut num, mut den, mut pow) = (0.0, 0.0, 1.0);
        for (k, ck) in c.iter().enumerate() {
            num += k as f64 * ck * pow;
            den += ck * pow;
            pow *= lambda;
        }
        num / (den * self.n as f64)
    }

    /// Exact law of the magnetization under `mu_{G,B,lambda}`.
    pub fn magnetization_distribution(&self, b: f64, lambda: f64) -> Vec<f64> {
        let c = self.coefficients(b);
        let w: Vec<f64> = c.iter().enumerate().map(|(k, ck)| ck * lambda.powi(k as i32)).collect();
        let total: f64 = w.iter().sum();
        w.into_iter().map(|x| x / total).collect()
    }
}

fn all_masks(graph: &Graph, limit: usize) -> Result<impl Iterator<Item = (u64, usize, usize)> + '_> {
    let n = graph.n();
    if n > limit.min(ISING_EXACT_LIMIT) {
        return Err(Error::ResourceLimit(format!(
            "Ising enumeration needs n <= {}, got {n}",
            limit.min(ISING_EXACT_LIMIT)
        )));
    }
    let edges: Vec<(usize, usize)> = graph.edges().collect();
    Ok((0u64..1 << n).map(move |mask| {
        let mono = edges
            .iter()
            .filter(|&&(u, v)| (mask >> u & 1) == (mask >> v & 1))
            .count();
        (mask, mask.count_ones() as usize, mono)
    }))
}

/// Exact `c_k` table by `2^n` enumeration, refused above `limit` (at most 22).
pub fn ising_polynomial(graph: &Graph, limit: usize) -> Result<IsingPolynomial> {
    let n = graph.n();
    let mut counts = vec![vec![0u64; graph.edge_count() + 1]; n + 1];
    for (_, k, m) in all_masks(graph, limit)? {
        counts[k][m] += 1;
    }
    Ok(IsingPolynomial { n, counts })
}

/// `Z_G(B, lambda)` and the coefficient vector `c_k(G, B)`.
pub fn ising_partition_exact(graph: &Graph, b: f64, lambda: f64) -> Result<(f64, Vec<f64>)> {
    let poly = ising_polynomial(graph, ISING_EXACT_LIMIT)?;
    Ok((poly.partition(b, lambda), poly.coefficients(b)))
}

pub fn ising_occupancy(graph: &Graph, b: f64, lambda: f64) -> Result<f64> {
    Ok(ising_polynomial(graph, ISING_EXACT_LIMIT)?.occupancy(b, lambda))
}

/// Heat-bath chain: the current assignment and each vertex's plus-neighbour count.
#[derive(Clone, Debug)]
pub struct SpinChain {
    state: SpinAssignment,
    plus_neighbors: Vec<u32>,
    rng: ChainRng,
}

impl SpinChain {
    /// Starts from all minus.
    pub fn new(n: usize, rng: ChainRng) -> Self {
        Self {
            state: SpinAssignment::all_minus(n),
            plus_neighbors: vec![0; n],
            rng,
        }
    }

    pub fn state(&self) -> &SpinAssignment {
        &self.state
    }

    pub fn into_state(self) -> SpinAssignment {
        self.state
    }

    /// Resamples one uniform vertex from its conditional law:
    /// `P(+) = lambda B^p / (lambda B^p + B^q)` with `p`, `q` its plus and minus neighbours.
    pub fn step(&mut self, graph: &Graph, b: f64, lambda: f64) {
        let n = self.state.n();
        if n == 0 {
            return;
        }
        let v = self.rng.random_range(0..n);
        let p = self.plus_neighbors[v] as i32;
        let q = graph.degree(v) as i32 - p;
        let plus_weight = lambda * b.powi(p);
        let prob = plus_weight / (plus_weight + b.powi(q));
        let plus = self.rng.random::<f64>() < prob;
        if plus != self.state.is_plus(v) {
            self.state.set(v, plus);
            for &u in graph.neighbors(v) {
                if plus {
                    self.plus_neighbors[u] += 1;
                } else {
                    self.plus_neighbors[u] -= 1;
                }
            }
        }
    }

    pub fn run(&mut self, graph: &Graph, b: f64, lambda: f64, steps: u64) {
        for _ in 0..steps {
            self.step(graph, b, lambda);
        }
    }
}

/// One heat-bath update of `state`, drawing from `rng`.
pub fn ising_glauber_step(state: SpinAssignment, graph: &Graph, b: f64, lambda: f64, rng: &mut ChainRng) -> SpinAssignment {
    let plus_neighbors = (0..state.n())
        .map(|v| graph.neighbors(v).iter().filter(|&&u| state.is_plus(u)).count() as u32)
        .collect();
    let mut chain = SpinChain {
        state,
        plus_neighbors,
        rng: rng.clone(),
    };
    chain.step(graph, b, lambda);
    *rng = chain.rng.clone();
    chain.state
}

/// A sampler for `mu_{G,B,lambda}` on one fixed graph.
pub trait SpinSampler: Send + Sync {
    fn name(&self) -> &'static str;

    fn sample(&self, b: f64, lambda: f64, epsilon: f64, rng: ChainRng) -> SpinAssignment;
}

/// Heat-bath dynamics from all minus for the mixing schedule.
pub struct HeatBathSampler<'g> {
    graph: &'g Graph,
    c_mix: f64,
}

impl SpinSampler for HeatBathSampler<'_> {
    fn name(&self) -> &'static str {
        "heat-bath"
    }

    fn sample(&self, b: f64, lambda: f64, epsilon: f64, rng: ChainRng) -> SpinAssignment {
        let steps = crate::glauber::MixingSchedule { c_mix: self.c_mix }.steps(self.graph.n(), epsilon);
        let mut chain = SpinChain::new(self.graph.n(), rng);
        chain.run(self.graph, b, lambda, steps);
        chain.into_state()
    }
}

/// Exact draws from the enumerated measure.
pub struct ExactSpinSampler {
    n: usize,
    /// `(mask, monochromatic edges)` for every assignment.
    states: Vec<(u64, usize, usize)>,
}

impl ExactSpinSampler {
    pub fn new(graph: &Graph) -> Result<Self> {
        Ok(Self {
            n: graph.n(),
            states: all_masks(graph, 16)?.collect(),
        })
    }
}

impl SpinSampler for ExactSpinSampler {
    fn name(&self) -> &'static str {
        "exact"
    }

    fn sample(&self, b: f64, lambda: f64, _epsilon: f64, mut rng: ChainRng) -> SpinAssignment {
        let weight = |k: usize, m: usize| b.powi(m as i32) * lambda.powi(k as i32);
        let total: f64 = self.states.iter().map(|&(_, k, m)| weight(k, m)).sum();
        let mut u = rng.random::<f64>() * total;
        for &(mask, k, m) in &self.states {
            let w = weight(k, m);
            if u < w {
                return SpinAssignment::from_mask(self.n, mask);
            }
            u -= w;
        }
        let (mask, _, _) = self.states[self.states.len() - 1];
        SpinAssignment::from_mask(self.n, mask)
    }
}

type SpinFactory = for<'g> fn(&'g Graph, f64) -> Result<Box<dyn SpinSampler + 'g>>;

/// Registered Ising samplers: `(name, description, factory)`. The factory takes `c_mix`.
pub const SPIN_SAMPLERS: &[(&str, &str, SpinFactory)] = &[
    ("heat-bath", "single-site heat-bath dynamics from all minus", |g, c_mix| {
        Ok(Box::new(HeatBathSampler { graph: g, c_mix }))
    }),
    ("exact", "exact enumeration sampler (n <= 16)", |g, _| {
        Ok(Box::new(ExactSpinSampler::new(g)?))
    }),
];

pub fn spin_sampler_names() -> Vec<&'static str> {
    SPIN_SAMPLERS.iter().map(|(name, _, _)| *name).collect()
}

pub fn build_spin_sampler<'g>(name: &str, graph: &'g Graph, c_mix: f64) -> Result<Box<dyn SpinSampler + 'g>> {
    let (_, _, factory) = SPIN_SAMPLERS
        .iter()
        .find(|(n, _, _)| *n == name)
        .ok_or_else(|| Error::UnknownStrategy {
            kind: "spin sampler",
            name: name.to_string(),
            available: spin_sampler_names().join(", "),
        })?;
    factory(graph, c_mix)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IsingConfig {
    #[serde(rename = "B")]
    pub b: f64,
    /// Grid ceiling for `lambda`, in `(0, 1]`.
    pub lambda_max: f64,
    /// Loop, sample-count, epsilon, seed and mixing settings for the search.
    pub search: SamplerConfig,
    pub spin_sampler: String,
}

impl IsingConfig {
    pub fn new(b: f64, lambda_max: f64) -> Self {
        Self {
            b,
            lambda_max,
            search: SamplerConfig::default(),
            spin_sampler: "heat-bath".to_string(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MagnetizationSample {
    pub assignment: SpinAssignment,
    pub trace: SearchTrace,
    pub fell_back: bool,
}

fn check_ising(graph: &Graph, k: usize, alpha: f64, config: &IsingConfig) -> Result<()> {
    if !(config.b > 0.0 && config.b < 1.0) {
        return Err(precondition(format!("B must lie in (0, 1), got {}", config.b)));
    }
    if !(config.lambda_max > 0.0 && config.lambda_max <= 1.0) {
        return Err(precondition(format!("lambda_max must lie in (0, 1], got {}", config.lambda_max)));
    }
    if !(alpha > 0.0 && alpha <= 0.5) {
        return Err(precondition(format!("alpha must lie in (0, 1/2], got {alpha}")));
    }
    let eps = config.search.epsilon;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(precondition(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    let cap = ceil_tol(alpha * graph.n() as f64);
    if k > cap {
        return Err(precondition(format!("k = {k} exceeds ceil(alpha * n) = {cap}")));
    }
    Ok(())
}

/// Draws an assignment with exactly `k` plus spins, approximately from `nu_{G,B,k}`.
pub fn sample_fixed_magnetization(graph: &Graph, k: usize, alpha: f64, config: &IsingConfig) -> Result<MagnetizationSample> {
    let sampler = build_spin_sampler(&config.spin_sampler, graph, config.search.mixing.c_mix)?;
    sample_fixed_magnetization_with(graph, k, alpha, config, sampler.as_ref())
}

pub fn sample_fixed_magnetization_with(
    graph: &Graph,
    k: usize,
    alpha: f64,
    config: &IsingConfig,
    sampler: &dyn SpinSampler,
) -> Result<MagnetizationSample> {
    check_ising(graph, k, alpha, config)?;
    let n = graph.n();
    let plan = SearchPlan::new(k, n, config.lambda_max, &config.search);
    if k == 0 {
        return Ok(MagnetizationSample {
            assignment: SpinAssignment::all_minus(n),
            trace: SearchTrace {
                steps: Vec::new(),
                outcome: crate::sample_k::Outcome::Trivial,
                grid_len: 0,
                loop_len: 0,
                n_samples: 0,
                inner_epsilon: config.search.epsilon,
            },
            fell_back: false,
        });
    }
    let seed = config.search.seed;
    let (found, trace) = grid_search(&plan, |lambda, iteration, j| {
        let s = sampler.sample(
            config.b,
            lambda,
            plan.inner_epsilon,
            rng::substream(seed, &[iteration as u64, j as u64]),
        );
        (s.plus_count(), s)
    });
    let fell_back = found.is_none();
    let assignment = match found {
        Some(s) => s,
        None => SpinAssignment::with_plus(n, 0..k)?,
    };
    Ok(MagnetizationSample {
        assignment,
        trace,
        fell_back,
    })
}

/// `sum_{v minus} B^{p(v) - q(v)}`, with `p`, `q` the plus and minus neighbours of `v`.
pub fn ratio_statistic(graph: &Graph, b: f64, state: &SpinAssignment) -> f64 {
    (0..state.n())
        .filter(|&v| !state.is_plus(v))
        .map(|v| {
            let p = graph.neighbors(v).iter().filter(|&&u| state.is_plus(u)).count() as i32;
            b.powi(2 * p - graph.degree(v) as i32)
        })
        .sum()
}

/// `E_{nu_j}[ratio_statistic] / (j+1)` computed by enumeration; equals `c_{j+1} / c_j`.
pub fn exact_ratio_level(graph: &Graph, b: f64, j: usize) -> Result<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for (mask, k, m) in all_masks(graph, ISING_EXACT_LIMIT)? {
        if k == j {
            let w = b.powi(m as i32);
            num += w * ratio_statistic(graph, b, &SpinAssignment::from_mask(graph.n(), mask));
            den += w;
        }
    }
    Ok(num / (den * (j + 1) as f64))
}

#[derive(Clone, Debug, Serialize)]
pub struct IsingCountEstimate {
    pub k: usize,
    /// `ln c_k` estimate.
    pub log_estimate: f64,
    /// `c_0 = B^{|E|}`.
    pub c0: f64,
    /// Estimated ratios `c_{j+1} / c_j`, `j = 0..k`.
    pub levels: Vec<f64>,
    pub samples_per_level: usize,
    pub fallbacks: usize,
    /// Occupancy of `K_{D+1}` at `(B, lambda_max)`, conjectured to be the extremal value.
    pub conjectured_alpha_min: f64,
}

impl IsingCountEstimate {
    pub fn estimate(&self) -> f64 {
        self.log_estimate.exp()
    }

    /// `c_0` times the product of the levels; exact when the levels are.
    pub fn product(&self) -> f64 {
        self.levels.iter().fold(self.c0, |acc, r| acc * r)
    }
}

/// Estimates `c_k(G, B)` by telescoping from `c_0 = B^{|E|}`, with sample counts
/// set as in the independent-set annealing.
pub fn count_coefficient(
    graph: &Graph,
    k: usize,
    alpha: f64,
    epsilon: f64,
    c_anneal: f64,
    m_override: Option<usize>,
    config: &IsingConfig,
) -> Result<IsingCountEstimate> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(precondition(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    check_ising(graph, k, alpha, config)?;
    let sampler = build_spin_sampler(&config.spin_sampler, graph, config.search.mixing.c_mix)?;
    let plan = AnnealingPlan::new(k, epsilon, c_anneal);
    let m = m_override.unwrap_or(plan.m);
    let b = config.b;
    let c0 = b.powi(graph.edge_count() as i32);
    let mut levels = Vec::with_capacity(k);
    let mut fallbacks = 0;
    for j in 0..k {
        let (mean, fb) = if j == 0 {
            (ratio_statistic(graph, b, &SpinAssignment::all_minus(graph.n())), 0)
        } else {
            let draws: Vec<Result<(f64, bool)>> = (0..m)
                .into_par_iter()
                .map(|s| {
                    let mut cfg = config.clone();
                    cfg.search.epsilon = plan.sampler_epsilon;
                    cfg.search.seed = rng::derive_seed(config.search.seed, &[0x6973_696e, j as u64, s as u64]);
                    let out = sample_fixed_magnetization_with(graph, j, alpha, &cfg, sampler.as_ref())?;
                    Ok((ratio_statistic(graph, b, &out.assignment), out.fell_back))
                })
                .collect();
            let mut sum = 0.0;
            let mut fb = 0;
            for d in draws {
                let (x, f) = d?;
                sum += x;
                fb += f as usize;
            }
            (sum / m as f64, fb)
        };
        fallbacks += fb;
        levels.push(mean / (j + 1) as f64);
    }
    let delta = graph.max_degree().max(3);
    let clique = ising_polynomial(&gen_clique(delta + 1), ISING_EXACT_LIMIT)?;
    Ok(IsingCountEstimate {
        k,
        log_estimate: c0.ln() + levels.iter().map(|r| r.ln()).sum::<f64>(),
        c0,
        levels,
        samples_per_level: m,
        fallbacks,
        conjectured_alpha_min: clique.occupancy(b, config.lambda_max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_complete_bipartite, gen_cycle, gen_empty, gen_path, gen_petersen};
    use crate::oracle::{empirical_distribution, exact_tv_distance};
    use std::collections::HashMap;

    fn brute_z(graph: &Graph, b: f64, lambda: f64) -> f64 {
        let n = graph.n();
        (0u64..1 << n)
            .map(|mask| {
                let s = SpinAssignment::from_mask(n, mask);
                b.powi(s.monochromatic_edges(graph) as i32) * lambda.powi(s.plus_count() as i32)
            })
            .sum()
    }

    fn small_graphs() -> Vec<Graph> {
        vec![
            gen_empty(1),
            gen_clique(3),
            gen_clique(4),
            gen_path(3),
            gen_cycle(5).unwrap(),
            gen_complete_bipartite(2, 3),
            gen_petersen(),
        ]
    }

    #[test]
    fn triangle_values() {
        let (z, c) = ising_partition_exact(&gen_clique(3), 0.5, 1.0).unwrap();
        assert!((z - 3.25).abs() < 1e-12);
        assert_eq!(c, vec![0.125, 1.5, 1.5, 0.125]);
    }

    #[test]
    fn single_vertex_and_free_spins() {
        let (z, c) = ising_partition_exact(&gen_empty(1), 0.3, 0.7).unwrap();
        assert_eq!(c, vec![1.0, 1.0]);
        assert!((z - 1.7).abs() < 1e-15);
        let p = gen_petersen();
        let poly = ising_polynomial(&p, ISING_EXACT_LIMIT).unwrap();
        assert!((poly.partition(1.0, 0.4) - 1.4f64.powi(10)).abs() < 1e-9);
        assert!((poly.occupancy(1.0, 0.4) - 0.4 / 1.4).abs() < 1e-12);
    }

    #[test]
    fn partition_matches_brute_force() {
        for g in small_graphs() {
            for (b, l) in [(0.5, 1.0), (0.2, 0.3), (0.9, 0.75)] {
                let (z, _) = ising_partition_exact(&g, b, l).unwrap();
                let brute = brute_z(&g, b, l);
                assert!((z - brute).abs() <= 1e-12 * brute);
            }
        }
    }

    #[test]
    fn flip_symmetry() {
        for g in small_graphs() {
            let poly = ising_polynomial(&g, ISING_EXACT_LIMIT).unwrap();
            for b in [0.1, 0.5, 0.77] {
                let c = poly.coefficients(b);
                let rev: Vec<f64> = c.iter().rev().copied().collect();
                assert_eq!(c, rev);
                assert!((poly.occupancy(b, 1.0) - 0.5).abs() < 1e-14);
                let l: f64 = 0.37;
                let lhs = poly.partition(b, l);
                let rhs = l.powi(g.n() as i32) * poly.partition(b, 1.0 / l);
                assert!((lhs - rhs).abs() <= 1e-12 * lhs);
            }
        }
    }

    #[test]
    fn occupancy_is_log_derivative() {
        let g = gen_clique(3);
        let (b, l, h) = (0.5, 0.5, 1e-6);
        let poly = ising_polynomial(&g, ISING_EXACT_LIMIT).unwrap();
        let d = ((poly.partition(b, l + h)).ln() - (poly.partition(b, l - h)).ln()) / (2.0 * h);
        assert!((ising_occupancy(&g, b, l).unwrap() - l * d / 3.0).abs() < 1e-6);
    }

    #[test]
    fn size_refusal_and_params() {
        assert!(matches!(
            ising_partition_exact(&gen_path(23), 0.5, 1.0),
            Err(Error::ResourceLimit(_))
        ));
        assert!(IsingParams::new(1.0, 0.5, 3).is_err());
        assert!(IsingParams::new(0.5, 1.5, 3).is_err());
        assert!(IsingParams::new(0.5, 1.0, 2).is_err());
        let p = IsingParams::new(0.2, 1.0, 4).unwrap();
        assert_eq!(p.b_c, 0.5);
        assert!((b_c(3).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn isolated_vertex_heat_bath() {
        let g = gen_empty(1);
        let mut rng = rng::substream(3, &[]);
        let mut plus = 0;
        let mut s = SpinAssignment::all_minus(1);
        for _ in 0..100_000 {
            s = ising_glauber_step(s, &g, 0.5, 1.0, &mut rng);
            plus += s.plus_count();
        }
        assert!((plus as f64 / 1e5 - 0.5).abs() < 0.01);
    }

    #[test]
    fn heat_bath_stationary_on_edge() {
        let g = gen_clique(2);
        let mut chain = SpinChain::new(2, rng::substream(4, &[]));
        chain.run(&g, 0.5, 1.0, 100);
        let mut counts = vec![0usize; 4];
        for _ in 0..400_000 {
            chain.step(&g, 0.5, 1.0);
            counts[chain.state().mask() as usize] += 1;
        }
        let emp: Vec<f64> = counts.iter().map(|&c| c as f64 / 4e5).collect();
        let exact = [0.5 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.5 / 3.0];
        assert!(exact_tv_distance(&emp, &exact).unwrap() < 0.02);
    }

    #[test]
    fn chain_bookkeeping() {
        let g = gen_petersen();
        let mut chain = SpinChain::new(10, rng::substream(5, &[]));
        for _ in 0..2000 {
            chain.step(&g, 0.3, 0.8);
            let s = chain.state();
            assert_eq!(s.plus_count(), s.plus_vertices().len());
            for v in 0..10 {
                let p = g.neighbors(v).iter().filter(|&&u| s.is_plus(u)).count() as u32;
                assert_eq!(chain.plus_neighbors[v], p);
            }
        }
    }

    #[test]
    fn ratio_identity_with_exact_levels() {
        for g in small_graphs() {
            for b in [0.25, 0.6] {
                let c = ising_polynomial(&g, ISING_EXACT_LIMIT).unwrap().coefficients(b);
                for j in 0..g.n() {
                    let level = exact_ratio_level(&g, b, j).unwrap();
                    assert!((level - c[j + 1] / c[j]).abs() <= 1e-10 * level);
                }
                let mut log = g.edge_count() as f64 * f64::ln(b);
                for j in 0..g.n() {
                    log += exact_ratio_level(&g, b, j).unwrap().ln();
                    assert!((log - c[j + 1].ln()).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn triangle_first_ratio() {
        let g = gen_clique(3);
        let r = ratio_statistic(&g, 0.5, &SpinAssignment::all_minus(3));
        assert_eq!(0.125 * r, 1.5);
    }

    #[test]
    fn k_zero_is_all_minus() {
        let g = gen_clique(3);
        let cfg = IsingConfig::new(0.5, 1.0);
        let s = sample_fixed_magnetization(&g, 0, 0.3, &cfg).unwrap();
        assert_eq!(s.assignment, SpinAssignment::all_minus(3));
        let est = count_coefficient(&g, 0, 0.3, 0.5, 0.5, None, &cfg).unwrap();
        assert_eq!(est.product(), 0.125);
        assert!((est.estimate() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn fixed_magnetization_on_path() {
        let g = gen_path(3);
        let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
        let runs = 4000;
        for seed in 0..runs {
            let mut cfg = IsingConfig::new(0.5, 1.0);
            cfg.search.seed = seed;
            cfg.search.epsilon = 0.1;
            let s = sample_fixed_magnetization(&g, 1, 0.34, &cfg).unwrap();
            assert_eq!(s.assignment.plus_count(), 1);
            *counts.entry(s.assignment.plus_vertices()).or_default() += 1;
        }
        let emp: Vec<f64> = (0..3)
            .map(|v| *counts.get(&vec![v]).unwrap_or(&0) as f64 / runs as f64)
            .collect();
        assert!(exact_tv_distance(&emp, &[0.25, 0.5, 0.25]).unwrap() < 0.05, "{emp:?}");
    }

    #[test]
    fn exact_spin_sampler_law() {
        let g = gen_clique(3);
        let s = ExactSpinSampler::new(&g).unwrap();
        let draws: Vec<usize> = (0..40_000)
            .map(|i| s.sample(0.5, 0.6, 0.0, rng::substream(6, &[i])).plus_count())
            .collect();
        let exact = ising_polynomial(&g, 22).unwrap().magnetization_distribution(0.5, 0.6);
        let emp = empirical_distribution(draws, 4);
        assert!(exact_tv_distance(&emp, &exact).unwrap() < 0.015);
    }

    #[test]
    fn registry() {
        let g = gen_clique(3);
        assert_eq!(build_spin_sampler("heat-bath", &g, 2.0).unwrap().name(), "heat-bath");
        assert_eq!(build_spin_sampler("exact", &g, 2.0).unwrap().name(), "exact");
        assert!(matches!(
            build_spin_sampler("metropolis", &g, 2.0),
            Err(Error::UnknownStrategy { .. })
        ));
    }

    #[test]
    fn preconditions() {
        let g = gen_clique(3);
        let cfg = IsingConfig::new(0.5, 1.0);
        assert!(sample_fixed_magnetization(&g, 2, 0.3, &cfg).is_err());
        assert!(sample_fixed_magnetization(&g, 1, 0.6, &cfg).is_err());
        assert!(sample_fixed_magnetization(&g, 1, 0.34, &IsingConfig::new(1.0, 1.0)).is_err());
        assert!(sample_fixed_magnetization(&g, 1, 0.34, &IsingConfig::new(0.5, 0.0)).is_err());
        assert!(count_coefficient(&g, 1, 0.34, 0.0, 0.5, None, &cfg).is_err());
    }

    #[test]
    fn coefficient_estimate_on_cycle() {
        let g = gen_cycle(6).unwrap();
        let b = 0.4;
        let mut cfg = IsingConfig::new(b, 1.0);
        cfg.search.seed = 11;
        let est = count_coefficient(&g, 3, 0.5, 0.3, 0.5, None, &cfg).unwrap();
        let exact = ising_polynomial(&g, 22).unwrap().coefficients(b)[3];
        assert!((est.log_estimate - exact.ln()).abs() < 0.3, "{} vs {}", est.estimate(), exact);
        let clique = ising_polynomial(&gen_clique(4), 22).unwrap();
        assert_eq!(est.conjectured_alpha_min, clique.occupancy(b, 1.0));
    }
}
