//! Interchangeable hard-core samplers, registered by name.
//!
//! Sample-k and the annealing counter only need *some* sampler for
//! `mu_{G,lambda}`. The Glauber chain is the production choice; the exact
//! sampler draws from the enumerated distribution and serves as a reference
//! on small graphs.

use rand::Rng;

use crate::error::{Error, Result};
use crate::glauber::{below_threshold, ChainState, MixingSchedule};
use crate::graph::{Graph, VertexSet};
use crate::oracle::{enumerate_independent_sets, mask_to_set, ENUMERATION_LIMIT};
use crate::rng::ChainRng;

/// A sampler for the hard-core measure on one fixed graph.
pub trait HardcoreSampler: Send + Sync {
    fn name(&self) -> &'static str;

    /// Draws a set whose law is within `epsilon` total variation of `mu_{G,lambda}`.
    fn sample(&self, lambda: f64, epsilon: f64, rng: ChainRng) -> VertexSet;

    /// Whether the TV guarantee holds at `lambda`.
    fn guarantee(&self, lambda: f64) -> bool;
}

/// Glauber dynamics from the empty set, run for the mixing schedule.
pub struct GlauberSampler<'g> {
    graph: &'g Graph,
    schedule: MixingSchedule,
}

impl<'g> GlauberSampler<'g> {
    pub fn new(graph: &'g Graph, schedule: MixingSchedule) -> Self {
        Self { graph, schedule }
    }
}

impl HardcoreSampler for GlauberSampler<'_> {
    fn name(&self) -> &'static str {
        "glauber"
    }

    fn sample(&self, lambda: f64, epsilon: f64, rng: ChainRng) -> VertexSet {
        let mut state = ChainState::new(self.graph.n(), rng);
        state.run(self.graph, lambda, self.schedule.steps(self.graph.n(), epsilon));
        state.into_set()
    }

    fn guarantee(&self, lambda: f64) -> bool {
        below_threshold(self.graph, lambda)
    }
}

/// Exact draws: pick a size from the exact size law, then a uniform set of that size.
pub struct ExactSampler {
    n: usize,
    by_size: Vec<Vec<u128>>,
}

impl ExactSampler {
    pub fn new(graph: &Graph) -> Result<Self> {
        let sets = enumerate_independent_sets(graph, ENUMERATION_LIMIT)?;
        let mut by_size: Vec<Vec<u128>> = Vec::new();
        for s in sets {
            let k = s.count_ones() as usize;
            if by_size.len() <= k {
                by_size.resize(k + 1, Vec::new());
            }
            by_size[k].push(s);
        }
        Ok(Self { n: graph.n(), by_size })
    }

    /// Independent sets of size `k` as bitmasks, in enumeration order.
    pub fn sets_of_size(&self, k: usize) -> &[u128] {
        self.by_size.get(k).map_or(&[], Vec::as_slice)
    }
}

impl HardcoreSampler for ExactSampler {
    fn name(&self) -> &'static str {
        "exact"
    }

    fn sample(&self, lambda: f64, _epsilon: f64, mut rng: ChainRng) -> VertexSet {
        // Weights i_k lambda^k, normalised in the log domain.
        let logs: Vec<f64> = self
            .by_size
            .iter()
            .enumerate()
            .map(|(k, sets)| match k {
                0 => 0.0,
                _ if lambda == 0.0 => f64::NEG_INFINITY,
                _ => (sets.len() as f64).ln() + k as f64 * lambda.ln(),
            })
            .collect();
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = weights.iter().sum();
        let mut u = rng.random::<f64>() * total;
        let mut size = weights.len() - 1;
        for (k, w) in weights.iter().enumerate() {
            if u < *w {
                size = k;
                break;
            }
            u -= w;
        }
        let bucket = &self.by_size[size];
        mask_to_set(self.n, bucket[rng.random_range(0..bucket.len())])
    }

    fn guarantee(&self, _lambda: f64) -> bool {
        true
    }
}

type Factory = for<'g> fn(&'g Graph, &MixingSchedule) -> Result<Box<dyn HardcoreSampler + 'g>>;

/// Registered hard-core samplers: `(name, description, factory)`.
pub const HARDCORE_SAMPLERS: &[(&str, &str, Factory)] = &[
    ("glauber", "Glauber dynamics from the empty set", |g, s| {
        Ok(Box::new(GlauberSampler::new(g, *s)))
    }),
    ("exact", "exact enumeration sampler (small graphs only)", |g, _| {
        Ok(Box::new(ExactSampler::new(g)?))
    }),
];

pub fn sampler_names() -> Vec<&'static str> {
    HARDCORE_SAMPLERS.iter().map(|(name, _, _)| *name).collect()
}

/// Builds the sampler registered under `name` for `graph`.
pub fn build_sampler<'g>(
    name: &str,
    graph: &'g Graph,
    schedule: &MixingSchedule,
) -> Result<Box<dyn HardcoreSampler + 'g>> {
    let (_, _, factory) = HARDCORE_SAMPLERS
        .iter()
        .find(|(n, _, _)| *n == name)
        .ok_or_else(|| Error::UnknownStrategy {
            kind: "sampler",
            name: name.to_string(),
            available: sampler_names().join(", "),
        })?;
    factory(graph, schedule)
}
