//! `hcsample`: sampling and counting fixed-size independent sets from the command line.

mod bench;
mod config;
mod output;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::mpsc;
use std::time::Duration;

use clap::{Parser, Subcommand};
use hcsample::annealing::count_ik;
use hcsample::graph::{format_edge_list, parse_edge_list, Graph};
use hcsample::ising::{count_coefficient, ising_polynomial, IsingConfig, IsingParams, ISING_EXACT_LIMIT};
use hcsample::oracle::{independence_polynomial_with_limit, ln_big};
use hcsample::reduction::{
    build_instance, find_gadget, replication_count, verify_reduction, ReductionParams, ReductionSidecar, VerifyLimits,
};
use hcsample::rng;
use hcsample::sample_k::{sample_k, Mode};
use hcsample::samplers::build_sampler;
use hcsample::thresholds::ThresholdSet;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::bench::{find_suite, suite_listing, BenchContext, CSV_HEADER, DEFAULT_LADDER};
use crate::config::{Format, GlobalArgs, RunConfig};
use crate::output::{json_envelope, table, Failure, Outcome};

#[derive(Parser, Debug)]
#[command(
    name = "hcsample",
    version,
    about = "Sample and count fixed-size independent sets",
    after_help = "Every global flag can also be set through an HCSAMPLE_* environment variable."
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Critical fugacity and density for a degree bound.
    Thresholds {
        #[arg(long)]
        delta: usize,
        /// Also report the fugacity at which K_{D+1} has this occupancy.
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Exact independence polynomial coefficients.
    Poly {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Hard-core samples, one set per line.
    SampleHc {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 1)]
        n_samples: usize,
        #[arg(long, default_value = "glauber")]
        sampler: String,
    },
    /// Near-uniform independent sets of size k, one per line.
    SampleK {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        eps: f64,
        /// Use the triangle-free grid ceiling.
        #[arg(long)]
        triangle_free: bool,
        /// Write the search trace to stderr as JSON lines.
        #[arg(long)]
        trace: bool,
        /// Fix the samples per iteration (drops the guarantee).
        #[arg(long)]
        n_samples_override: Option<usize>,
        /// Independent runs; run i uses seed + i.
        #[arg(long, default_value_t = 1)]
        runs: usize,
        #[arg(long, default_value = "glauber")]
        sampler: String,
        /// Degree bound (default: max(3, maximum degree)).
        #[arg(long)]
        delta: Option<usize>,
    },
    /// Estimate the number of independent sets of size k.
    CountIk {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        triangle_free: bool,
        /// Fix the samples per level (drops the guarantee).
        #[arg(long)]
        m_override: Option<usize>,
        #[arg(long, default_value = "glauber")]
        sampler: String,
        #[arg(long)]
        delta: Option<usize>,
    },
    /// Pad a regular graph with gadget copies; writes the edge list and a JSON sidecar.
    Reduce {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        eps: f64,
        /// Gadget copies (default: ceil(c_reduction * D * n^2 / eps)).
        #[arg(long)]
        r: Option<usize>,
        /// Output edge-list path.
        #[arg(long)]
        out: PathBuf,
        /// Sidecar path (default: the output path with `.json` appended).
        #[arg(long)]
        sidecar: Option<PathBuf>,
        /// Degree, needed only for a graph without vertices.
        #[arg(long)]
        delta: Option<usize>,
    },
    /// Exact check of a reduction instance from its sidecar.
    VerifyReduction {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        sidecar: PathBuf,
    },
    /// Estimate an Ising coefficient c_k(G, B) at fixed magnetization.
    IsingCount {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long = "B")]
        b: f64,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        lambda_max: f64,
        #[arg(long)]
        m_override: Option<usize>,
        #[arg(long, default_value = "heat-bath")]
        spin_sampler: String,
    },
    /// Timing suites over a size ladder, as CSV.
    Bench {
        #[arg(long, default_value = "")]
        suite: String,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_LADDER)]
        sizes: Vec<usize>,
        /// Samples per search iteration in the sample-k suite.
        #[arg(long, default_value_t = 32)]
        search_samples: usize,
    },
}

impl Command {
    fn default_format(&self) -> Format {
        match self {
            Command::SampleHc { .. } | Command::SampleK { .. } => Format::Table,
            _ => Format::Json,
        }
    }
}

fn load_graph(path: &Path) -> Outcome<Graph> {
    let text = fs::read_to_string(path).map_err(|e| Failure::precondition(format!("{}: {e}", path.display())))?;
    parse_edge_list(&text).map_err(|e| Failure::precondition(format!("{}: {e}", path.display())))
}

fn check_eps(eps: f64, closed_top: bool) -> Outcome<()> {
    let ok = eps > 0.0 && (eps < 1.0 || (closed_top && eps == 1.0));
    if ok {
        Ok(())
    } else {
        Err(Failure::precondition(format!("eps must lie in (0, 1), got {eps}")))
    }
}

fn emit<T: Serialize>(command: &str, rc: &RunConfig, result: &T, rows: impl FnOnce() -> String) -> String {
    match rc.format {
        Format::Json => json_envelope(command, rc, result),
        Format::Table => rows(),
    }
}

fn set_line(set: &[usize]) -> String {
    set.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

fn run(command: Command, rc: &RunConfig) -> Outcome<String> {
    match command {
        Command::Thresholds { delta, alpha } => {
            let t = ThresholdSet::new(delta, alpha)?;
            Ok(emit("thresholds", rc, &t, || {
                let mut rows = vec![
                    ("delta", t.delta.to_string()),
                    ("lambda_c", t.lambda_c.to_string()),
                    ("alpha_c", t.alpha_c.to_string()),
                    ("lambda_star_triangle_free", t.lambda_star_triangle_free.to_string()),
                ];
                if let (Some(a), Some(l)) = (t.alpha, t.lambda_star) {
                    rows.push(("alpha", a.to_string()));
                    rows.push(("lambda_star", l.to_string()));
                }
                table(&rows)
            }))
        }
        Command::Poly { graph } => {
            let g = load_graph(&graph)?;
            let poly = independence_polynomial_with_limit(&g, rc.exact_limit)?;
            let coeffs = poly.to_decimal_strings();
            Ok(emit("poly", rc, &coeffs, || {
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, c)| format!("{k} {c}"))
                    .collect::<Vec<_>>()
                    .join("\n")
            }))
        }
        Command::SampleHc {
            graph,
            lambda,
            eps,
            n_samples,
            sampler,
        } => {
            let g = load_graph(&graph)?;
            check_eps(eps, false)?;
            if !(lambda >= 0.0 && lambda.is_finite()) {
                return Err(Failure::precondition(format!("lambda must be non-negative, got {lambda}")));
            }
            let schedule = rc.mixing();
            let s = build_sampler(&sampler, &g, &schedule)?;
            let sets: Vec<Vec<usize>> = (0..n_samples)
                .into_par_iter()
                .map(|i| s.sample(lambda, eps, rng::substream(rc.seed, &[i as u64])).to_vec())
                .collect();
            let result = json!({
                "sampler": sampler,
                "lambda": lambda,
                "epsilon": eps,
                "steps_per_sample": schedule.steps(g.n(), eps),
                "guarantee": s.guarantee(lambda),
                "sets": sets,
            });
            Ok(emit("sample-hc", rc, &result, || {
                sets.iter().map(|s| set_line(s)).collect::<Vec<_>>().join("\n")
            }))
        }
        Command::SampleK {
            graph,
            k,
            alpha,
            eps,
            triangle_free,
            trace,
            n_samples_override,
            runs,
            sampler,
            delta,
        } => {
            let g = load_graph(&graph)?;
            let mut runs_out = Vec::with_capacity(runs);
            let mut trace_lines = Vec::new();
            for i in 0..runs {
                let mut cfg = rc.sampler(eps);
                cfg.seed = rc.seed.wrapping_add(i as u64);
                cfg.mode = if triangle_free { Mode::TriangleFree } else { Mode::General };
                cfg.n_samples_override = n_samples_override;
                cfg.sampler = sampler.clone();
                cfg.delta = delta;
                let out = sample_k(&g, k, alpha, &cfg)?;
                if trace {
                    for step in &out.trace.steps {
                        let mut line = serde_json::to_value(step).expect("serializable");
                        line["run"] = json!(i);
                        trace_lines.push(line.to_string());
                    }
                    trace_lines.push(
                        json!({
                            "run": i,
                            "outcome": out.trace.outcome,
                            "grid_len": out.trace.grid_len,
                            "loop_len": out.trace.loop_len,
                            "n_samples": out.trace.n_samples,
                            "inner_epsilon": out.trace.inner_epsilon,
                            "set": out.set.to_vec(),
                        })
                        .to_string(),
                    );
                }
                runs_out.push(out);
            }
            if trace {
                let mut err = std::io::stderr().lock();
                for line in &trace_lines {
                    let _ = writeln!(err, "{line}");
                }
            }
            let result = json!({
                "k": k,
                "alpha": alpha,
                "epsilon": eps,
                "mode": if triangle_free { "triangle_free" } else { "general" },
                "sampler": sampler,
                "runs": runs_out,
            });
            Ok(emit("sample-k", rc, &result, || {
                runs_out.iter().map(|r| set_line(&r.set.to_vec())).collect::<Vec<_>>().join("\n")
            }))
        }
        Command::CountIk {
            graph,
            k,
            alpha,
            eps,
            triangle_free,
            m_override,
            sampler,
            delta,
        } => {
            let g = load_graph(&graph)?;
            check_eps(eps, true)?;
            let mut cfg = rc.counter();
            cfg.sampler.mode = if triangle_free { Mode::TriangleFree } else { Mode::General };
            cfg.sampler.sampler = sampler;
            cfg.sampler.delta = delta;
            cfg.m_override = m_override;
            let est = count_ik(&g, k, alpha, eps, &cfg)?;
            let plan = hcsample::annealing::AnnealingPlan::new(k, eps, rc.c_anneal);
            let exact = independence_polynomial_with_limit(&g, rc.exact_limit)
                .ok()
                .map(|p| p.coefficient(k));
            let result = json!({
                "k": k,
                "estimate": est.decimal(),
                "log_estimate": est.log_estimate,
                "guarantee_valid": est.guarantee_valid,
                "levels": est.levels,
                "fallbacks": est.fallbacks,
                "samples_per_level": m_override.unwrap_or(plan.m),
                "exact": exact.as_ref().map(|c| c.to_string()),
                "log_exact": exact.as_ref().map(ln_big),
            });
            Ok(emit("count-ik", rc, &result, || {
                table(&[
                    ("k", k.to_string()),
                    ("estimate", est.decimal()),
                    ("log_estimate", est.log_estimate.to_string()),
                    ("guarantee_valid", est.guarantee_valid.to_string()),
                    ("exact", exact.map_or("-".into(), |c| c.to_string())),
                ])
            }))
        }
        Command::Reduce {
            graph,
            alpha,
            eps,
            r,
            out,
            sidecar,
            delta,
        } => {
            let g = load_graph(&graph)?;
            check_eps(eps, true)?;
            let d = delta.unwrap_or_else(|| g.max_degree());
            let gadget = find_gadget(alpha, d)?;
            let copies = r.unwrap_or_else(|| replication_count(g.n(), d, eps, rc.c_reduction));
            let total = copies.saturating_mul(gadget.n_h).saturating_add(g.n());
            if total > rc.max_vertices {
                return Err(Failure::resource(format!(
                    "padded graph would have {total} vertices, limit is {}",
                    rc.max_vertices
                )));
            }
            let params = ReductionParams {
                alpha,
                epsilon: eps,
                c_reduction: rc.c_reduction,
                r_override: r,
                delta,
            };
            let inst = build_instance(&g, &params)?;
            let sidecar_path = sidecar.unwrap_or_else(|| {
                let mut p = out.clone().into_os_string();
                p.push(".json");
                PathBuf::from(p)
            });
            let meta = inst.sidecar();
            fs::write(&out, format_edge_list(&inst.g_prime))?;
            fs::write(&sidecar_path, serde_json::to_string_pretty(&meta).expect("serializable") + "\n")?;
            let result = json!({
                "graph": out.display().to_string(),
                "sidecar": sidecar_path.display().to_string(),
                "instance": meta,
            });
            Ok(emit("reduce", rc, &result, || {
                table(&[
                    ("gadget", format!("a={} b={}", meta.a, meta.b)),
                    ("lambda", meta.lambda.to_string()),
                    ("r", meta.r.to_string()),
                    ("N", meta.n_total.to_string()),
                    ("k", meta.k.to_string()),
                    ("graph", out.display().to_string()),
                    ("sidecar", sidecar_path.display().to_string()),
                ])
            }))
        }
        Command::VerifyReduction { graph, sidecar } => {
            let g = load_graph(&graph)?;
            let text = fs::read_to_string(&sidecar)?;
            let meta: ReductionSidecar = serde_json::from_str(&text)
                .map_err(|e| Failure::precondition(format!("{}: {e}", sidecar.display())))?;
            let limits = VerifyLimits {
                exact_limit: rc.exact_limit,
                degree_cap: rc.degree_cap,
            };
            let report = verify_reduction(&g, &meta, &limits)?;
            Ok(emit("verify-reduction", rc, &report, || {
                table(&[
                    ("r", report.r.to_string()),
                    ("k", report.k.to_string()),
                    ("ln_ratio", report.ln_ratio.to_string()),
                    ("within_bound", report.within_bound.to_string()),
                    ("max_size_deviation", report.max_size_deviation.to_string()),
                ])
            }))
        }
        Command::IsingCount {
            graph,
            b,
            k,
            alpha,
            eps,
            lambda_max,
            m_override,
            spin_sampler,
        } => {
            let g = load_graph(&graph)?;
            let params = IsingParams::new(b, lambda_max, g.max_degree().max(3))?;
            let config = IsingConfig {
                b,
                lambda_max,
                search: rc.sampler(eps.min(0.5)),
                spin_sampler,
            };
            let est = count_coefficient(&g, k, alpha, eps, rc.c_anneal, m_override, &config)?;
            let exact = ising_polynomial(&g, rc.exact_limit.min(ISING_EXACT_LIMIT))
                .ok()
                .map(|p| p.coefficients(b)[k]);
            let result = json!({
                "params": params,
                "estimate": est,
                "exact": exact,
            });
            Ok(emit("ising-count", rc, &result, || {
                table(&[
                    ("k", k.to_string()),
                    ("estimate", est.estimate().to_string()),
                    ("log_estimate", est.log_estimate.to_string()),
                    ("exact", exact.map_or("-".into(), |c| c.to_string())),
                    ("b_c", params.b_c.to_string()),
                    ("conjectured_alpha_min", est.conjectured_alpha_min.to_string()),
                ])
            }))
        }
        Command::Bench {
            suite,
            sizes,
            search_samples,
        } => {
            let s = find_suite(&suite)?;
            if search_samples == 0 {
                return Err(Failure::usage("search-samples must be positive"));
            }
            let ctx = BenchContext {
                seed: rc.seed,
                mixing: rc.mixing(),
                search_samples,
            };
            let mut lines = vec![CSV_HEADER.to_string()];
            for n in sizes {
                lines.extend(s.run(n, &ctx)?.iter().map(|r| r.csv()));
            }
            Ok(lines.join("\n"))
        }
    }
}

/// Runs `job` on a worker thread, giving up after `budget` seconds.
fn with_budget(budget: Option<f64>, job: impl FnOnce() -> Outcome<String> + Send + 'static) -> Outcome<String> {
    let Some(seconds) = budget else {
        return job();
    };
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        let _ = tx.send(job());
    });
    match rx.recv_timeout(Duration::from_secs_f64(seconds)) {
        Ok(out) => out,
        Err(mpsc::RecvTimeoutError::Timeout) => Err(Failure::resource(format!("time budget of {seconds}s exceeded"))),
        Err(mpsc::RecvTimeoutError::Disconnected) => Err(Failure::internal("worker thread panicked")),
    }
}

fn fail(f: &Failure) -> ExitCode {
    eprintln!("{}", f.to_json());
    ExitCode::from(f.code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { output::EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Command::Bench { suite, .. } = &cli.command {
        if suite.is_empty() {
            eprintln!("available suites:\n{}", suite_listing());
            return ExitCode::from(output::EXIT_USAGE);
        }
    }
    let rc = match RunConfig::from_args(&cli.global, cli.command.default_format()) {
        Ok(rc) => rc,
        Err(msg) => return fail(&Failure::usage(msg)),
    };
    if let Some(threads) = rc.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            return fail(&Failure::internal(e.to_string()));
        }
    }
    let budget = rc.time_budget;
    let job_rc = rc.clone();
    match with_budget(budget, move || run(cli.command, &job_rc)) {
        Ok(text) => {
            let mut out = std::io::stdout().lock();
            if !text.is_empty() {
                let _ = writeln!(out, "{text}");
            }
            ExitCode::SUCCESS
        }
        Err(f) => fail(&f),
    }
}
