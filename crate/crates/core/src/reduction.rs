//! Gadget instances linking `i_k` of a padded graph to the hard-core partition function.
//!
//! For a `D`-regular `G` and a density `alpha` above `alpha_c(D)`, pick
//! `H = H_{a,b}` (copies of `K_{D,D}` and `K_{D+1}`) and a supercritical
//! `lambda` with `alpha_H(lambda) = alpha`. Then for `G' = G + rH` and
//! `k = floor(alpha |V(G')|)`, `i_k(G') / i_k(rH)` approaches `Z_G(lambda)` as `r`
//! grows. Everything here is exact: the instance is constructed, and the ratio
//! is evaluated with big-integer polynomial powers.

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};
use crate::floor_tol;
use crate::graph::{gen_clique, gen_complete_bipartite, gen_gadget, Graph};
use crate::oracle::{
    independence_polynomial_with_limit, ln_big, poly_power, IndependencePolynomial, DEFAULT_DEGREE_CAP,
    DEFAULT_EXACT_LIMIT,
};
use crate::thresholds::{alpha_c, lambda_c};

/// Candidate `(a, b)` pairs, scanned in this order.
pub const GADGET_PAIRS: [(usize, usize); 7] = [(0, 1), (1, 16), (1, 6), (1, 3), (2, 3), (2, 1), (1, 0)];

/// Lower bound on the per-copy variance of a gadget's set size, times `D`.
pub const VARIANCE_FLOOR: f64 = 0.00384;

/// Largest block handled by the exact oracle (`K_{D,D}` has `2D` vertices).
const BLOCK_LIMIT: usize = 128;

/// Exact polynomials of the two building blocks.
#[derive(Clone, Debug)]
struct Blocks {
    delta: usize,
    bipartite: IndependencePolynomial,
    clique: IndependencePolynomial,
}

impl Blocks {
    fn new(delta: usize) -> Result<Self> {
        Ok(Self {
            delta,
            bipartite: independence_polynomial_with_limit(&gen_complete_bipartite(delta, delta), BLOCK_LIMIT)?,
            clique: independence_polynomial_with_limit(&gen_clique(delta + 1), BLOCK_LIMIT)?,
        })
    }

    fn n_h(&self, a: usize, b: usize) -> usize {
        2 * a * self.delta + b * (self.delta + 1)
    }

    /// Vertex-weighted average of the block occupancies.
    fn occupancy(&self, a: usize, b: usize, lambda: f64) -> f64 {
        let d = self.delta;
        let bip = self.bipartite.occupancy(lambda, 2 * d) * (2 * a * d) as f64;
        let cl = self.clique.occupancy(lambda, d + 1) * (b * (d + 1)) as f64;
        (bip + cl) / self.n_h(a, b) as f64
    }

    fn variance(&self, a: usize, b: usize, lambda: f64) -> f64 {
        a as f64 * self.bipartite.size_distribution(lambda).variance
            + b as f64 * self.clique.size_distribution(lambda).variance
    }

    fn polynomial(&self, a: usize, b: usize) -> IndependencePolynomial {
        let mut p = IndependencePolynomial::one();
        for _ in 0..a {
            p = p.convolve(&self.bipartite);
        }
        for _ in 0..b {
            p = p.convolve(&self.clique);
        }
        p
    }
}

/// Limiting occupancy `(aD + b) / n_H` of `H_{a,b}` as `lambda -> inf`.
pub fn occupancy_limit(a: usize, b: usize, delta: usize) -> f64 {
    (a * delta + b) as f64 / (2 * a * delta + b * (delta + 1)) as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GadgetSpec {
    pub a: usize,
    pub b: usize,
    pub delta: usize,
    /// Supercritical fugacity with `alpha_H(lambda) = alpha`.
    pub lambda: f64,
    pub alpha: f64,
    pub n_h: usize,
}

impl GadgetSpec {
    pub fn graph(&self) -> Result<Graph> {
        gen_gadget(self.a, self.b, self.delta)
    }

    pub fn polynomial(&self) -> Result<IndependencePolynomial> {
        Ok(Blocks::new(self.delta)?.polynomial(self.a, self.b))
    }

    /// Exact occupancy of one gadget copy at `lambda`.
    pub fn occupancy_at(&self, lambda: f64) -> Result<f64> {
        Ok(Blocks::new(self.delta)?.occupancy(self.a, self.b, lambda))
    }
}

/// Scans [`GADGET_PAIRS`] for the first `(a, b)` whose occupancy window
/// `(alpha_H(lambda_c), (aD+b)/n_H)` contains `alpha`, then bisects for `lambda`.
pub fn find_gadget(alpha: f64, delta: usize) -> Result<GadgetSpec> {
    let ac = alpha_c(delta)?;
    if !(alpha > ac && alpha < 0.5) {
        return Err(precondition(format!(
            "gadget density must lie in (alpha_c({delta}) = {ac}, 1/2), got {alpha}"
        )));
    }
    let lc = lambda_c(delta)?;
    let blocks = Blocks::new(delta)?;
    let (a, b) = GADGET_PAIRS
        .iter()
        .copied()
        .find(|&(a, b)| blocks.occupancy(a, b, lc) < alpha && alpha < occupancy_limit(a, b, delta))
        .ok_or_else(|| precondition(format!("no listed gadget pair fits alpha = {alpha} at degree {delta}")))?;

    let occ = |l: f64| blocks.occupancy(a, b, l);
    let mut hi = 2.0 * lc;
    let mut doublings = 0;
    while occ(hi) <= alpha {
        hi *= 2.0;
        doublings += 1;
        if doublings > 1000 || !hi.is_finite() {
            return Err(Error::Inconsistent(format!("could not bracket alpha = {alpha}")));
        }
    }
    let mut lo = lc;
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if occ(mid) < alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);
    let miss = (occ(lambda) - alpha).abs();
    if miss > 1e-10 {
        return Err(Error::Inconsistent(format!("gadget occupancy misses alpha by {miss}")));
    }
    Ok(GadgetSpec {
        a,
        b,
        delta,
        lambda,
        alpha,
        n_h: blocks.n_h(a, b),
    })
}

/// Exact per-copy variance of `|I|` on the gadget at its `lambda`, checked
/// against the floor `0.00384 / D`.
pub fn gadget_variance_floor(gadget: &GadgetSpec) -> Result<f64> {
    let variance = Blocks::new(gadget.delta)?.variance(gadget.a, gadget.b, gadget.lambda);
    let floor = VARIANCE_FLOOR / gadget.delta as f64;
    if !(variance >= floor) {
        return Err(Error::Inconsistent(format!(
            "gadget variance {variance} below the floor {floor}"
        )));
    }
    Ok(variance)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReductionParams {
    pub alpha: f64,
    pub epsilon: f64,
    /// Constant `C` in `r = ceil(C D n^2 / eps)`.
    pub c_reduction: f64,
    /// Use this replication count instead of the formula.
    pub r_override: Option<usize>,
    /// Degree; required only when `G` has no vertices.
    pub delta: Option<usize>,
}

impl ReductionParams {
    pub fn new(alpha: f64, epsilon: f64) -> Self {
        Self {
            alpha,
            epsilon,
            c_reduction: 1.0,
            r_override: None,
            delta: None,
        }
    }
}

/// Everything needed to rebuild or verify an instance, without the padded graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionSidecar {
    pub version: u32,
    pub a: usize,
    pub b: usize,
    pub delta: usize,
    pub lambda: f64,
    pub alpha: f64,
    pub n_h: usize,
    pub n: usize,
    pub r: usize,
    pub k: usize,
    #[serde(rename = "N")]
    pub n_total: usize,
    pub epsilon: f64,
}

#[derive(Clone, Debug)]
pub struct ReductionInstance {
    pub g_prime: Graph,
    pub r: usize,
    pub k: usize,
    /// `|V(G')| = n + r n_H`.
    pub n_total: usize,
    pub n: usize,
    pub gadget: GadgetSpec,
    pub epsilon: f64,
}

impl ReductionInstance {
    pub fn sidecar(&self) -> ReductionSidecar {
        ReductionSidecar {
            version: 1,
            a: self.gadget.a,
            b: self.gadget.b,
            delta: self.gadget.delta,
            lambda: self.gadget.lambda,
            alpha: self.gadget.alpha,
            n_h: self.gadget.n_h,
            n: self.n,
            r: self.r,
            k: self.k,
            n_total: self.n_total,
            epsilon: self.epsilon,
        }
    }
}

impl ReductionSidecar {
    pub fn gadget(&self) -> GadgetSpec {
        GadgetSpec {
            a: self.a,
            b: self.b,
            delta: self.delta,
            lambda: self.lambda,
            alpha: self.alpha,
            n_h: self.n_h,
        }
    }
}

fn regular_degree(graph: &Graph, given: Option<usize>) -> Result<usize> {
    let delta = match (graph.n(), given) {
        (0, Some(d)) => d,
        (0, None) => return Err(precondition("an empty graph needs an explicit degree")),
        (_, _) => {
            let d = graph.degree(0);
            if !graph.is_regular(d) {
                return Err(precondition("reduction input must be a regular graph"));
            }
            if given.is_some_and(|g| g != d) {
                return Err(precondition(format!("graph is {d}-regular, not {}-regular", given.unwrap())));
            }
            d
        }
    };
    if delta < 3 {
        return Err(precondition(format!("reduction needs degree >= 3, got {delta}")));
    }
    Ok(delta)
}

/// Replication count `max(1, ceil(C D n^2 / eps))`.
pub fn replication_count(n: usize, delta: usize, epsilon: f64, c_reduction: f64) -> usize {
    let r = (c_reduction * delta as f64 * (n * n) as f64 / epsilon).ceil();
    (r as usize).max(1)
}

/// Builds `G' = G + rH` and `k = floor(alpha N)`.
pub fn build_instance(graph: &Graph, params: &ReductionParams) -> Result<ReductionInstance> {
    if !(params.epsilon > 0.0) || !(params.c_reduction > 0.0) {
        return Err(precondition("epsilon and c_reduction must be positive"));
    }
    let delta = regular_degree(graph, params.delta)?;
    let gadget = find_gadget(params.alpha, delta)?;
    let n = graph.n();
    let r = match params.r_override {
        Some(0) => return Err(precondition("r must be at least 1")),
        Some(r) => r,
        None => replication_count(n, delta, params.epsilon, params.c_reduction),
    };
    let h = gadget.graph()?;
    let g_prime = Graph::disjoint_union(graph, &h.replicate(r));
    let n_total = n + r * gadget.n_h;
    Ok(ReductionInstance {
        g_prime,
        r,
        k: floor_tol(params.alpha * n_total as f64),
        n_total,
        n,
        gadget,
        epsilon: params.epsilon,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ReductionReport {
    pub r: usize,
    pub k: usize,
    pub lambda: f64,
    pub ln_ik_g_prime: f64,
    pub ln_ik_rh: f64,
    pub ln_z_g: f64,
    /// `ln R` with `R = i_k(G') / (i_k(rH) Z_G(lambda))`.
    pub ln_ratio: f64,
    pub ratio: f64,
    /// `e^{-eps/2} <= R <= e^{eps/2}`.
    pub within_bound: bool,
    /// `max_{j<=n} |ln(i_{k-j}(rH) / i_k(rH)) - j ln lambda|`.
    pub max_size_deviation: f64,
}

/// Resource limits for exact verification.
#[derive(Clone, Copy, Debug)]
pub struct VerifyLimits {
    pub exact_limit: usize,
    pub degree_cap: usize,
}

impl Default for VerifyLimits {
    fn default() -> Self {
        Self {
            exact_limit: DEFAULT_EXACT_LIMIT,
            degree_cap: DEFAULT_DEGREE_CAP,
        }
    }
}

/// Exact check of the reduction equation from the sidecar parameters.
pub fn verify_reduction(graph: &Graph, sidecar: &ReductionSidecar, limits: &VerifyLimits) -> Result<ReductionReport> {
    if graph.n() != sidecar.n {
        return Err(precondition(format!(
            "sidecar was built for n = {}, graph has {}",
            sidecar.n,
            graph.n()
        )));
    }
    let poly_g = independence_polynomial_with_limit(graph, limits.exact_limit)?;
    let poly_rh = poly_power(&sidecar.gadget().polynomial()?, sidecar.r, limits.degree_cap)?;
    let k = sidecar.k;
    let ik_rh = poly_rh.coefficient(k);
    if ik_rh.is_zero() {
        return Err(precondition(format!(
            "k = {k} exceeds the independence number {} of rH",
            poly_rh.degree()
        )));
    }
    let ik_g_prime: BigUint = poly_g
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(j, _)| *j <= k)
        .map(|(j, c)| c * poly_rh.coefficient(k - j))
        .sum();
    let lambda = sidecar.lambda;
    let ln_ik_g_prime = ln_big(&ik_g_prime);
    let ln_ik_rh = ln_big(&ik_rh);
    let ln_z_g = poly_g.ln_partition(lambda);
    let ln_ratio = ln_ik_g_prime - ln_ik_rh - ln_z_g;
    let max_size_deviation = (0..=graph.n().min(k))
        .map(|j| (poly_rh.ln_coefficient(k - j) - ln_ik_rh - j as f64 * lambda.ln()).abs())
        .fold(0.0, f64::max);
    Ok(ReductionReport {
        r: sidecar.r,
        k,
        lambda,
        ln_ik_g_prime,
        ln_ik_rh,
        ln_z_g,
        ln_ratio,
        ratio: ln_ratio.exp(),
        within_bound: ln_ratio.abs() <= sidecar.epsilon / 2.0,
        max_size_deviation,
    })
}
