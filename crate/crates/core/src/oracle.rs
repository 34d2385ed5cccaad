//! Exact brute-force ground truth: independence polynomials, hard-core size
//! distributions and their moments, polynomial powers for replicated graphs.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{precondition, Error, Result};
use crate::graph::{Graph, VertexSet, MASK_LIMIT};

/// Default largest graph the exact oracle accepts.
pub const DEFAULT_EXACT_LIMIT: usize = 40;
/// Up to this size the polynomial is read off a direct enumeration of independent sets.
pub const ENUMERATION_LIMIT: usize = 25;
/// Default cap on the degree of polynomials produced by [`poly_power`].
pub const DEFAULT_DEGREE_CAP: usize = 200_000;

/// Exact coefficients `(i_0, ..., i_M)` of `Z_G(x) = sum_k i_k x^k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndependencePolynomial {
    coeffs: Vec<BigUint>,
}

impl Serialize for IndependencePolynomial {
    /// A JSON array of decimal strings.
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.coeffs.iter().map(|c| c.to_str_radix(10)))
    }
}

impl IndependencePolynomial {
    /// Validates `i_0 = 1` and strips nothing: trailing zeros are rejected.
    pub fn from_coeffs(coeffs: Vec<BigUint>) -> Result<Self> {
        if coeffs.first() != Some(&BigUint::one()) {
            return Err(precondition("independence polynomial must start with i_0 = 1"));
        }
        if coeffs.last().is_some_and(Zero::is_zero) {
            return Err(precondition("independence polynomial has a trailing zero"));
        }
        Ok(Self { coeffs })
    }

    pub fn from_u64(coeffs: &[u64]) -> Result<Self> {
        Self::from_coeffs(coeffs.iter().map(|&c| BigUint::from(c)).collect())
    }

    fn from_u128(mut coeffs: Vec<u128>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Self {
            coeffs: coeffs.into_iter().map(BigUint::from).collect(),
        }
    }

    /// The polynomial of the empty graph, `1`.
    pub fn one() -> Self {
        Self {
            coeffs: vec![BigUint::one()],
        }
    }

    pub fn coeffs(&self) -> &[BigUint] {
        &self.coeffs
    }

    /// Independence number `M`.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `i_k`, zero beyond the degree.
    pub fn coefficient(&self, k: usize) -> BigUint {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    /// Natural log of `i_k`; `-inf` when `i_k = 0`.
    pub fn ln_coefficient(&self, k: usize) -> f64 {
        self.coeffs.get(k).map_or(f64::NEG_INFINITY, ln_big)
    }

    pub fn to_decimal_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(|c| c.to_str_radix(10)).collect()
    }

    /// Product of two polynomials: the polynomial of a disjoint union.
    pub fn convolve(&self, other: &Self) -> Self {
        Self {
            coeffs: convolve(&self.coeffs, &other.coeffs),
        }
    }

    /// `Z(lambda)` in double precision. Overflows to `inf` for huge polynomials;
    /// use [`Self::ln_partition`] there.
    pub fn evaluate(&self, lambda: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * lambda + c.to_f64().unwrap_or(f64::INFINITY))
    }

    /// `ln Z(lambda)`, computed in the log domain.
    pub fn ln_partition(&self, lambda: f64) -> f64 {
        let (logs, max) = self.log_weights(lambda);
        max + logs.iter().map(|&l| (l - max).exp()).sum::<f64>().ln()
    }

    fn log_weights(&self, lambda: f64) -> (Vec<f64>, f64) {
        assert!(lambda >= 0.0, "fugacity must be non-negative");
        let ln_lambda = lambda.ln();
        let logs: Vec<f64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| match k {
                0 => 0.0,
                _ if lambda == 0.0 => f64::NEG_INFINITY,
                _ => ln_big(c) + k as f64 * ln_lambda,
            })
            .collect();
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (logs, max)
    }

    /// Distribution of `|I|` under the hard-core model at `lambda`.
    pub fn size_distribution(&self, lambda: f64) -> SizeDistribution {
        let (logs, max) = self.log_weights(lambda);
        let weights: Vec<f64> = logs.iter().map(|&l| (l - max).exp()).collect();
        let total: f64 = weights.iter().sum();
        let probabilities: Vec<f64> = weights.iter().map(|w| w / total).collect();
        SizeDistribution::from_probabilities(lambda, probabilities)
    }

    /// Occupancy fraction `lambda Z'(lambda) / (n Z(lambda))` for a graph on `n` vertices.
    pub fn occupancy(&self, lambda: f64, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        self.size_distribution(lambda).mean / n as f64
    }
}

/// Distribution of the size of a hard-core random independent set.
#[derive(Clone, Debug, Serialize)]
pub struct SizeDistribution {
    pub lambda: f64,
    pub probabilities: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
}

impl SizeDistribution {
    fn from_probabilities(lambda: f64, probabilities: Vec<f64>) -> Self {
        let mean: f64 = probabilities.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        let variance: f64 = probabilities
            .iter()
            .enumerate()
            .map(|(k, p)| (k as f64 - mean).powi(2) * p)
            .sum();
        Self {
            lambda,
            probabilities,
            mean,
            variance,
        }
    }
}

/// Natural log of a big unsigned integer (`-inf` for zero).
pub fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 64 {
        return (x.to_u64().expect("fits") as f64).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().expect("64 bits");
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

fn convolve(a: &[BigUint], b: &[BigUint]) -> Vec<BigUint> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigUint::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn convolve_u128(a: &[u128], b: &[u128]) -> Vec<u128> {
    let mut out = vec![0u128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Exact independence polynomial with the default size limit.
pub fn independence_polynomial(graph: &Graph) -> Result<IndependencePolynomial> {
    independence_polynomial_with_limit(graph, DEFAULT_EXACT_LIMIT)
}

/// Exact independence polynomial, refusing graphs with more than `limit` vertices.
///
/// Graphs with at most [`ENUMERATION_LIMIT`] vertices are handled by enumerating
/// every independent set over bitmasks. Larger graphs use include/exclude
/// branching on a maximum-degree vertex, splitting into connected components
/// whenever the remaining graph disconnects.
pub fn independence_polynomial_with_limit(graph: &Graph, limit: usize) -> Result<IndependencePolynomial> {
    let n = graph.n();
    if n > limit.min(MASK_LIMIT) {
        return Err(Error::ResourceLimit(format!(
            "exact oracle limited to {} vertices, graph has {n}",
            limit.min(MASK_LIMIT)
        )));
    }
    let masks = graph.masks().expect("mask view exists below MASK_LIMIT");
    let full = full_mask(n);
    let counts = if n <= ENUMERATION_LIMIT {
        enumeration_counts(masks, full)
    } else {
        branch_counts(masks, full)
    };
    Ok(IndependencePolynomial::from_u128(counts))
}

fn full_mask(n: usize) -> u128 {
    if n == 128 {
        u128::MAX
    } else {
        (1u128 << n) - 1
    }
}

/// Counts by size from an explicit walk over every independent subset of `within`.
pub(crate) fn enumeration_counts(masks: &[u128], within: u128) -> Vec<u128> {
    fn walk(masks: &[u128], candidates: u128, size: usize, counts: &mut Vec<u128>) {
        if counts.len() <= size {
            counts.push(0);
        }
        counts[size] += 1;
        let mut rest = candidates;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            walk(masks, rest & !masks[v], size + 1, counts);
        }
    }
    let mut counts = Vec::new();
    walk(masks, within, 0, &mut counts);
    counts
}

fn component_of(masks: &[u128], within: u128) -> u128 {
    let start = within & within.wrapping_neg();
    let mut seen = start;
    let mut frontier = start;
    while frontier != 0 {
        let v = frontier.trailing_zeros() as usize;
        frontier &= frontier - 1;
        let fresh = masks[v] & within & !seen;
        seen |= fresh;
        frontier |= fresh;
    }
    seen
}

pub(crate) fn branch_counts(masks: &[u128], within: u128) -> Vec<u128> {
    if within == 0 {
        return vec![1];
    }
    let comp = component_of(masks, within);
    if comp != within {
        return convolve_u128(&branch_counts(masks, comp), &branch_counts(masks, within & !comp));
    }
    // Connected: branch on a vertex of maximum remaining degree.
    let mut best = (0u32, within.trailing_zeros() as usize);
    let mut rest = within;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let d = (masks[v] & within).count_ones();
        if d > best.0 {
            best = (d, v);
        }
    }
    let (deg, v) = best;
    if deg == 0 {
        return vec![1, 1];
    }
    let bit = 1u128 << v;
    let excluded = branch_counts(masks, within & !bit);
    let included = branch_counts(masks, within & !bit & !masks[v]);
    let mut out = vec![0u128; excluded.len().max(included.len() + 1)];
    for (k, c) in excluded.into_iter().enumerate() {
        out[k] += c;
    }
    for (k, c) in included.into_iter().enumerate() {
        out[k + 1] += c;
    }
    out
}

/// Every independent set of `graph` as a bitmask, in depth-first order.
pub fn enumerate_independent_sets(graph: &Graph, limit: usize) -> Result<Vec<u128>> {
    let n = graph.n();
    if n > limit.min(MASK_LIMIT) {
        return Err(Error::ResourceLimit(format!(
            "enumeration limited to {} vertices, graph has {n}",
            limit.min(MASK_LIMIT)
        )));
    }
    fn walk(masks: &[u128], current: u128, candidates: u128, out: &mut Vec<u128>) {
        out.push(current);
        let mut rest = candidates;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            walk(masks, current | 1 << v, rest & !masks[v], out);
        }
    }
    let mut out = Vec::new();
    walk(graph.masks().expect("mask view"), 0, full_mask(n), &mut out);
    Ok(out)
}

/// Converts a bitmask to a [`VertexSet`] over `n` vertices.
pub fn mask_to_set(n: usize, mask: u128) -> VertexSet {
    let mut set = VertexSet::empty(n);
    let mut rest = mask;
    while rest != 0 {
        set.insert(rest.trailing_zeros() as usize);
        rest &= rest - 1;
    }
    set
}

/// `Z_G(lambda)` for a given polynomial.
pub fn evaluate_partition(poly: &IndependencePolynomial, lambda: f64) -> f64 {
    poly.evaluate(lambda)
}

/// Exact occupancy fraction `alpha_G(lambda)`.
pub fn exact_occupancy(graph: &Graph, lambda: f64) -> Result<f64> {
    Ok(independence_polynomial(graph)?.occupancy(lambda, graph.n()))
}

/// Exact variance of `|I|` under the hard-core model.
pub fn exact_variance(graph: &Graph, lambda: f64) -> Result<f64> {
    Ok(independence_polynomial(graph)?.size_distribution(lambda).variance)
}

pub fn size_distribution(graph: &Graph, lambda: f64) -> Result<SizeDistribution> {
    Ok(independence_polynomial(graph)?.size_distribution(lambda))
}

/// `P^r` by binary exponentiation with exact big-integer convolutions.
pub fn poly_power(poly: &IndependencePolynomial, r: usize, degree_cap: usize) -> Result<IndependencePolynomial> {
    if r == 0 {
        return Err(precondition("poly_power needs r >= 1"));
    }
    let degree = poly.degree().saturating_mul(r);
    if degree > degree_cap {
        return Err(Error::ResourceLimit(format!(
            "power would have degree {degree}, cap is {degree_cap}"
        )));
    }
    let mut result: Option<Vec<BigUint>> = None;
    let mut base = poly.coeffs.clone();
    let mut e = r;
    loop {
        if e & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(acc) => convolve(&acc, &base),
            });
        }
        e >>= 1;
        if e == 0 {
            break;
        }
        base = convolve(&base, &base);
    }
    Ok(IndependencePolynomial {
        coeffs: result.expect("r >= 1"),
    })
}

/// Half the L1 distance between two distributions over the same enumerated support.
pub fn exact_tv_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(precondition(format!(
            "supports differ in size ({} vs {})",
            p.len(),
            q.len()
        )));
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Empirical distribution of category indices in `0..support`.
pub fn empirical_distribution(samples: impl IntoIterator<Item = usize>, support: usize) -> Vec<f64> {
    let mut counts = vec![0u64; support];
    let mut total = 0u64;
    for s in samples {
        counts[s] += 1;
        total += 1;
    }
    counts.iter().map(|&c| c as f64 / total.max(1) as f64).collect()
}
