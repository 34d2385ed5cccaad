use std::time::Instant;

use hcsample::glauber::{ChainState, MixingSchedule};
use hcsample::graph::{default_regular_retries, gen_random_regular, Graph};
use hcsample::oracle::{poly_power, DEFAULT_DEGREE_CAP};
use hcsample::reduction::find_gadget;
use hcsample::rng;
use hcsample::sample_k::{sample_k, SamplerConfig};
use rayon::prelude::*;

use crate::output::{Failure, Outcome};

pub const DEFAULT_LADDER: [usize; 4] = [50, 100, 200, 400];

pub struct BenchContext {
    pub seed: u64,
    pub mixing: MixingSchedule,
    /// Samples per search iteration for the sample-k suite.
    pub search_samples: usize,
}

pub struct BenchRow {
    pub suite: &'static str,
    pub n: usize,
    pub operation: String,
    pub ops: u64,
    pub seconds: f64,
}

impl BenchRow {
    pub fn csv(&self) -> String {
        let rate = if self.seconds > 0.0 {
            self.ops as f64 / self.seconds
        } else {
            f64::INFINITY
        };
        format!(
            "{},{},{},{},{:.6},{:.1}",
            self.suite, self.n, self.operation, self.ops, self.seconds, rate
        )
    }
}

pub const CSV_HEADER: &str = "suite,n,operation,ops,seconds,ops_per_second";

pub trait BenchSuite: Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn run(&self, n: usize, ctx: &BenchContext) -> Outcome<Vec<BenchRow>>;
}

fn cubic(n: usize, seed: u64) -> Outcome<Graph> {
    let n = n + n % 2;
    Ok(gen_random_regular(n, 3, seed, default_regular_retries(n, 3))?)
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

struct GlauberSuite;

impl BenchSuite for GlauberSuite {
    fn name(&self) -> &'static str {
        "glauber"
    }

    fn description(&self) -> &'static str {
        "Glauber steps on a random cubic graph, one chain and one chain per worker"
    }

    fn run(&self, n: usize, ctx: &BenchContext) -> Outcome<Vec<BenchRow>> {
        let g = cubic(n, ctx.seed)?;
        let steps = 200 * g.n() as u64;
        let lambda = 1.0;
        let chain = |i: u64| {
            let mut state = ChainState::new(g.n(), rng::substream(ctx.seed, &[i]));
            state.run(&g, lambda, steps);
            state.len()
        };
        let (_, single) = timed(|| chain(0));
        let workers = rayon::current_num_threads() as u64;
        let (_, parallel) = timed(|| (0..workers).into_par_iter().map(chain).sum::<usize>());
        Ok(vec![
            BenchRow {
                suite: self.name(),
                n: g.n(),
                operation: "chains=1".into(),
                ops: steps,
                seconds: single,
            },
            BenchRow {
                suite: self.name(),
                n: g.n(),
                operation: format!("chains={workers}"),
                ops: steps * workers,
                seconds: parallel,
            },
        ])
    }
}

struct SampleKSuite;

impl BenchSuite for SampleKSuite {
    fn name(&self) -> &'static str {
        "sample-k"
    }

    fn description(&self) -> &'static str {
        "one fixed-size sample on a random cubic graph, k = n/5, capped samples per iteration"
    }

    fn run(&self, n: usize, ctx: &BenchContext) -> Outcome<Vec<BenchRow>> {
        let g = cubic(n, ctx.seed)?;
        let k = g.n() / 5;
        let config = SamplerConfig {
            epsilon: 0.1,
            seed: ctx.seed,
            mixing: ctx.mixing,
            n_samples_override: Some(ctx.search_samples),
            ..SamplerConfig::default()
        };
        let (out, seconds) = timed(|| sample_k(&g, k, 0.2, &config));
        let out = out?;
        Ok(vec![BenchRow {
            suite: self.name(),
            n: g.n(),
            operation: format!("k={k} samples={} iterations={}", ctx.search_samples, out.trace.steps.len()),
            ops: 1,
            seconds,
        }])
    }
}

struct PolyPowerSuite;

impl BenchSuite for PolyPowerSuite {
    fn name(&self) -> &'static str {
        "poly-power"
    }

    fn description(&self) -> &'static str {
        "exact n-th power of the cubic (1,3) gadget polynomial"
    }

    fn run(&self, n: usize, _ctx: &BenchContext) -> Outcome<Vec<BenchRow>> {
        let gadget = find_gadget(0.3, 3)?;
        let poly = gadget.polynomial()?;
        let (out, seconds) = timed(|| poly_power(&poly, n, DEFAULT_DEGREE_CAP));
        let degree = out?.degree();
        Ok(vec![BenchRow {
            suite: self.name(),
            n,
            operation: format!("degree={degree}"),
            ops: 1,
            seconds,
        }])
    }
}

pub static SUITES: &[&dyn BenchSuite] = &[&GlauberSuite, &SampleKSuite, &PolyPowerSuite];

pub fn suite_listing() -> String {
    SUITES
        .iter()
        .map(|s| format!("  {:<12}{}", s.name(), s.description()))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn find_suite(name: &str) -> Outcome<&'static dyn BenchSuite> {
    SUITES
        .iter()
        .copied()
        .find(|s| s.name() == name)
        .ok_or_else(|| {
            let shown = if name.is_empty() { "(none)" } else { name };
            Failure::usage(format!("unknown bench suite {shown}; available suites:\n{}", suite_listing()))
        })
}
