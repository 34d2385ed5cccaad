use clap::{Args, ValueEnum};
use hcsample::annealing::CountConfig;
use hcsample::glauber::MixingSchedule;
use hcsample::sample_k::SamplerConfig;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Table,
}

/// Flags shared by every subcommand. Each one can also be set through an
/// `HCSAMPLE_*` environment variable.
#[derive(Args, Clone, Debug)]
pub struct GlobalArgs {
    /// Base seed for every random stream.
    #[arg(long, global = true, env = "HCSAMPLE_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Mixing constant: chains run ceil(c_mix * n * ln(n / eps)) steps.
    #[arg(long, global = true, env = "HCSAMPLE_C_MIX", default_value_t = 2.0)]
    pub c_mix: f64,

    /// Binary-search iterations are ceil(c_loop * ln n).
    #[arg(long, global = true, env = "HCSAMPLE_C_LOOP", default_value_t = 3.0)]
    pub c_loop: f64,

    /// Samples per search iteration are ceil(c_samples * n^2 * ln(ln n / eps)).
    #[arg(long, global = true, env = "HCSAMPLE_C_SAMPLES", default_value_t = 1.0)]
    pub c_samples: f64,

    /// Samples per counting level are ceil(c_anneal * k^2 ln k / eps^2).
    #[arg(long, global = true, env = "HCSAMPLE_C_ANNEAL", default_value_t = 0.5)]
    pub c_anneal: f64,

    /// Gadget copies are ceil(c_reduction * D * n^2 / eps).
    #[arg(long, global = true, env = "HCSAMPLE_C_REDUCTION", default_value_t = 1.0)]
    pub c_reduction: f64,

    /// Output format; sampling commands default to one set per line.
    #[arg(long, global = true, env = "HCSAMPLE_FORMAT", value_enum)]
    pub format: Option<Format>,

    /// Largest graph handed to the exact independence-polynomial oracle.
    #[arg(long, global = true, env = "HCSAMPLE_EXACT_LIMIT", default_value_t = 40)]
    pub exact_limit: usize,

    /// Largest degree allowed for polynomial powers.
    #[arg(long, global = true, env = "HCSAMPLE_DEGREE_CAP", default_value_t = 200_000)]
    pub degree_cap: usize,

    /// Largest padded graph `reduce` will write.
    #[arg(long, global = true, env = "HCSAMPLE_MAX_VERTICES", default_value_t = 5_000_000)]
    pub max_vertices: usize,

    /// Wall-clock budget in seconds; exceeding it exits with status 4.
    #[arg(long, global = true, env = "HCSAMPLE_TIME_BUDGET")]
    pub time_budget: Option<f64>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "HCSAMPLE_THREADS")]
    pub threads: Option<usize>,
}

/// The effective configuration, echoed in every JSON result.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub c_mix: f64,
    pub c_loop: f64,
    pub c_samples: f64,
    pub c_anneal: f64,
    pub c_reduction: f64,
    pub format: Format,
    pub exact_limit: usize,
    pub degree_cap: usize,
    pub max_vertices: usize,
    pub time_budget: Option<f64>,
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn from_args(args: &GlobalArgs, default_format: Format) -> Result<Self, String> {
        let constants = [
            ("c_mix", args.c_mix),
            ("c_loop", args.c_loop),
            ("c_samples", args.c_samples),
            ("c_anneal", args.c_anneal),
            ("c_reduction", args.c_reduction),
        ];
        for (name, value) in constants {
            if !(value > 0.0 && value.is_finite()) {
                return Err(format!("{name} must be positive, got {value}"));
            }
        }
        if args.time_budget.is_some_and(|t| !(t > 0.0)) {
            return Err("time budget must be positive".into());
        }
        if args.threads == Some(0) {
            return Err("threads must be at least 1".into());
        }
        Ok(Self {
            seed: args.seed,
            c_mix: args.c_mix,
            c_loop: args.c_loop,
            c_samples: args.c_samples,
            c_anneal: args.c_anneal,
            c_reduction: args.c_reduction,
            format: args.format.unwrap_or(default_format),
            exact_limit: args.exact_limit,
            degree_cap: args.degree_cap,
            max_vertices: args.max_vertices,
            time_budget: args.time_budget,
            threads: args.threads,
        })
    }

    pub fn mixing(&self) -> MixingSchedule {
        MixingSchedule::new(self.c_mix)
    }

    pub fn sampler(&self, epsilon: f64) -> SamplerConfig {
        SamplerConfig {
            c_loop: self.c_loop,
            c_samples: self.c_samples,
            epsilon,
            seed: self.seed,
            mixing: self.mixing(),
            ..SamplerConfig::default()
        }
    }

    pub fn counter(&self) -> CountConfig {
        CountConfig {
            sampler: self.sampler(0.5),
            c_anneal: self.c_anneal,
            oracle_limit: self.exact_limit,
            ..CountConfig::default()
        }
    }
}
