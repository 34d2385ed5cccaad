//! Single-site Glauber dynamics for the hard-core model.

use rand::distr::{Distribution, Uniform};
use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::{Graph, VertexSet};
use crate::rng::{self, ChainRng};
use crate::thresholds::lambda_c_or_inf;

/// Burn-in length `ceil(c_mix * n * ln(n / eps))`, never below one sweep of `n` steps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingSchedule {
    pub c_mix: f64,
}

impl Default for MixingSchedule {
    fn default() -> Self {
        Self { c_mix: 2.0 }
    }
}

impl MixingSchedule {
    pub fn new(c_mix: f64) -> Self {
        assert!(c_mix > 0.0, "c_mix must be positive");
        Self { c_mix }
    }

    pub fn steps(&self, n: usize, epsilon: f64) -> u64 {
        if n == 0 {
            return 0;
        }
        let n_f = n as f64;
        let raw = (self.c_mix * n_f * (n_f / epsilon).ln()).ceil();
        (raw.max(n_f)) as u64
    }
}

/// A running chain: the current independent set plus, for every vertex, the
/// number of its neighbors currently in the set.
#[derive(Clone, Debug)]
pub struct ChainState {
    in_set: Vec<bool>,
    covered: Vec<u32>,
    size: usize,
    steps_taken: u64,
    rng: ChainRng,
}

impl ChainState {
    /// Chain started from the empty set.
    pub fn new(n: usize, rng: ChainRng) -> Self {
        Self {
            in_set: vec![false; n],
            covered: vec![0; n],
            size: 0,
            steps_taken: 0,
            rng,
        }
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn steps_taken(&self) -> u64 {
        self.steps_taken
    }

    pub fn contains(&self, v: usize) -> bool {
        self.in_set[v]
    }

    pub fn current(&self) -> VertexSet {
        let mut set = VertexSet::empty(self.in_set.len());
        for (v, _) in self.in_set.iter().enumerate().filter(|(_, &b)| b) {
            set.insert(v);
        }
        set
    }

    pub fn into_set(self) -> VertexSet {
        self.current()
    }

    /// Recomputes the neighbor counts and checks them and independence.
    pub fn audit(&self, graph: &Graph) -> bool {
        (0..graph.n()).all(|v| {
            let count = graph.neighbors(v).iter().filter(|&&u| self.in_set[u]).count() as u32;
            count == self.covered[v] && !(self.in_set[v] && count > 0)
        }) && self.in_set.iter().filter(|&&b| b).count() == self.size
    }

    fn insert(&mut self, graph: &Graph, v: usize) {
        self.in_set[v] = true;
        self.size += 1;
        for &u in graph.neighbors(v) {
            self.covered[u] += 1;
        }
    }

    fn remove(&mut self, graph: &Graph, v: usize) {
        self.in_set[v] = false;
        self.size -= 1;
        for &u in graph.neighbors(v) {
            self.covered[u] -= 1;
        }
    }

    fn picker(&self) -> Uniform<usize> {
        Uniform::new(0, self.in_set.len()).expect("non-empty graph")
    }

    #[inline]
    fn step_with(&mut self, graph: &Graph, pick: &Uniform<usize>, add: AddThreshold) {
        let v = pick.sample(&mut self.rng);
        let propose_add = u64::from(self.rng.next_u32()) < add.0;
        let present = self.in_set[v];
        let flip = if propose_add { !present && self.covered[v] == 0 } else { present };
        if flip {
            if propose_add {
                self.insert(graph, v);
            } else {
                self.remove(graph, v);
            }
        }
        self.steps_taken += 1;
    }

    /// One Glauber update: pick a uniform vertex, propose adding it with
    /// probability `lambda / (1 + lambda)` and removing it otherwise; an
    /// addition is accepted only if the vertex has no neighbor in the set.
    pub fn step(&mut self, graph: &Graph, lambda: f64) {
        if graph.n() == 0 {
            return;
        }
        self.step_with(graph, &self.picker(), add_probability(lambda));
    }

    /// Runs `steps` updates at fugacity `lambda`.
    pub fn run(&mut self, graph: &Graph, lambda: f64, steps: u64) {
        if graph.n() == 0 {
            return;
        }
        let add = add_probability(lambda);
        let pick = self.picker();
        for _ in 0..steps {
            self.step_with(graph, &pick, add);
        }
    }
}

/// `lambda / (1 + lambda)` in units of `2^-32`, compared against one `u32` draw.
#[derive(Clone, Copy)]
struct AddThreshold(u64);

fn add_probability(lambda: f64) -> AddThreshold {
    assert!(lambda >= 0.0 && lambda.is_finite(), "fugacity must be finite and non-negative");
    AddThreshold((lambda / (1.0 + lambda) * 4_294_967_296.0).round() as u64)
}

/// Standalone form of [`ChainState::step`].
pub fn glauber_step(mut state: ChainState, graph: &Graph, lambda: f64) -> ChainState {
    state.step(graph, lambda);
    state
}

/// A hard-core sample and whether the mixing guarantee applies (`lambda < lambda_c`).
#[derive(Clone, Debug, Serialize)]
pub struct HardcoreSample {
    pub set: VertexSet,
    pub guarantee: bool,
}

/// True when `lambda` is below the uniqueness threshold for the graph's maximum degree.
pub fn below_threshold(graph: &Graph, lambda: f64) -> bool {
    lambda < lambda_c_or_inf(graph.max_degree())
}

/// Runs the schedule's number of steps from the empty set and returns the final state.
pub fn sample_hardcore(
    graph: &Graph,
    lambda: f64,
    epsilon: f64,
    schedule: &MixingSchedule,
    rng: ChainRng,
) -> HardcoreSample {
    let mut state = ChainState::new(graph.n(), rng);
    state.run(graph, lambda, schedule.steps(graph.n(), epsilon));
    HardcoreSample {
        set: state.into_set(),
        guarantee: below_threshold(graph, lambda),
    }
}

/// `count` independent chains; chain `i` uses substream `[i]` of `seed`.
pub fn sample_batch(
    graph: &Graph,
    lambda: f64,
    epsilon: f64,
    count: usize,
    schedule: &MixingSchedule,
    seed: u64,
) -> Vec<VertexSet> {
    (0..count)
        .into_par_iter()
        .map(|i| sample_hardcore(graph, lambda, epsilon, schedule, rng::substream(seed, &[i as u64])).set)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_clique, gen_empty, gen_petersen};
    use crate::oracle::{empirical_distribution, exact_tv_distance, size_distribution};

    fn mask_of(state: &ChainState) -> usize {
        (0..state.in_set.len()).filter(|&v| state.contains(v)).map(|v| 1 << v).sum()
    }

    #[test]
    fn schedule_monotone() {
        let s = MixingSchedule::default();
        assert_eq!(s.steps(0, 0.1), 0);
        let mut last = 0;
        for n in 1..200 {
            let st = s.steps(n, 0.01);
            assert!(st >= last);
            assert!(st >= n as u64);
            last = st;
        }
        assert!(s.steps(50, 0.001) >= s.steps(50, 0.01));
        assert_eq!(s.steps(4, 0.01), (2.0 * 4.0 * 400f64.ln()).ceil() as u64);
    }

    #[test]
    fn single_vertex_kernel() {
        let g = gen_empty(1);
        let trials = 40_000;
        let ones = (0..trials)
            .filter(|&i| {
                let state = glauber_step(ChainState::new(1, rng::substream(1, &[i])), &g, 1.0);
                state.contains(0)
            })
            .count();
        assert!((ones as f64 / trials as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn zero_fugacity_absorbs_at_empty() {
        let g = gen_petersen();
        let mut state = ChainState::new(10, rng::substream(2, &[]));
        state.run(&g, 3.0, 200);
        assert!(!state.is_empty());
        state.run(&g, 0.0, 2000);
        assert!(state.is_empty());
    }

    #[test]
    fn k2_stationary_and_kernel() {
        let g = gen_clique(2);
        let mut state = ChainState::new(2, rng::substream(3, &[]));
        let steps = 1_000_000;
        // visits[mask]; transitions[from][to] for masks 0 (empty), 1 ({0}), 2 ({1}).
        let mut visits = [0u64; 3];
        let mut transitions = [[0u64; 3]; 3];
        for _ in 0..steps {
            let from = mask_of(&state);
            state.step(&g, 1.0);
            let to = mask_of(&state);
            visits[to] += 1;
            transitions[from][to] += 1;
        }
        for v in visits {
            assert!((v as f64 / steps as f64 - 1.0 / 3.0).abs() < 0.01);
        }
        // Exact kernel at lambda=1: from empty, move to each singleton w.p. 1/4;
        // from a singleton, drop to empty w.p. 1/4.
        let rate = |from: usize, to: usize| {
            transitions[from][to] as f64 / transitions[from].iter().sum::<u64>() as f64
        };
        for (from, to, p) in [(0, 1, 0.25), (0, 2, 0.25), (0, 0, 0.5), (1, 0, 0.25), (2, 0, 0.25), (1, 2, 0.0)] {
            assert!((rate(from, to) - p).abs() < 0.005, "{from}->{to}");
        }
    }

    #[test]
    fn state_stays_valid_and_sizes_move_by_one() {
        let g = gen_petersen();
        let mut state = ChainState::new(10, rng::substream(4, &[]));
        let mut last = 0usize;
        for _ in 0..5000 {
            state.step(&g, 2.0);
            assert!(state.len().abs_diff(last) <= 1);
            last = state.len();
            assert!(state.audit(&g));
            assert!(g.is_independent(&state.current()));
        }
        assert_eq!(state.steps_taken(), 5000);
    }

    #[test]
    fn empty_graph_sample() {
        let s = sample_hardcore(&gen_empty(0), 1.0, 0.1, &MixingSchedule::default(), rng::substream(0, &[]));
        assert!(s.set.is_empty());
    }

    #[test]
    fn size_distribution_k4() {
        let g = gen_clique(4);
        let samples = sample_batch(&g, 1.0, 0.01, 100_000, &MixingSchedule::default(), 5);
        let emp = empirical_distribution(samples.iter().map(VertexSet::len), 2);
        let exact = size_distribution(&g, 1.0).unwrap().probabilities;
        assert!((exact[0] - 0.2).abs() < 1e-15);
        assert!(exact_tv_distance(&emp, &exact).unwrap() < 0.02);
    }

    #[test]
    fn size_distribution_petersen() {
        let g = gen_petersen();
        let samples = sample_batch(&g, 0.5, 0.01, 100_000, &MixingSchedule::default(), 6);
        assert!(samples.iter().all(|s| g.is_independent(s)));
        let exact = size_distribution(&g, 0.5).unwrap().probabilities;
        let emp = empirical_distribution(samples.iter().map(VertexSet::len), exact.len());
        assert!(exact_tv_distance(&emp, &exact).unwrap() < 0.03);
    }

    #[test]
    fn batch_mean_k4_high_fugacity() {
        let g = gen_clique(4);
        let n = 10_000;
        let samples = sample_batch(&g, 4.0, 0.01, n, &MixingSchedule::default(), 7);
        let mean = samples.iter().map(VertexSet::len).sum::<usize>() as f64 / n as f64;
        let p = 16.0 / 17.0;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((mean - p).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn batch_reproducible() {
        let g = gen_petersen();
        let sched = MixingSchedule::default();
        let a = sample_batch(&g, 1.0, 0.05, 20, &sched, 9);
        let b = sample_batch(&g, 1.0, 0.05, 20, &sched, 9);
        assert_eq!(a, b);
        let one = sample_batch(&g, 1.0, 0.05, 1, &sched, 9);
        let direct = sample_hardcore(&g, 1.0, 0.05, &sched, rng::substream(9, &[0]));
        assert_eq!(one[0], direct.set);
    }

    #[test]
    fn guarantee_flag() {
        let g = gen_petersen();
        let sched = MixingSchedule::default();
        assert!(sample_hardcore(&g, 3.9, 0.1, &sched, rng::substream(0, &[])).guarantee);
        assert!(!sample_hardcore(&g, 4.5, 0.1, &sched, rng::substream(0, &[])).guarantee);
        assert!(sample_hardcore(&gen_clique(3), 100.0, 0.1, &sched, rng::substream(0, &[])).guarantee);
    }
}
