//! Closed-form hard-core thresholds on bounded-degree graphs.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use crate::error::{precondition, Result};

/// Largest degree accepted by the threshold formulas.
pub const MAX_DELTA: usize = 1_000_000;
/// Above this degree the power formula is evaluated in the log domain.
const LOG_DOMAIN_DELTA: usize = 300;

fn check_delta(delta: usize) -> Result<()> {
    if delta < 3 {
        return Err(precondition(format!("degree bound must be >= 3, got {delta}")));
    }
    if delta > MAX_DELTA {
        return Err(precondition(format!("degree bound capped at {MAX_DELTA}, got {delta}")));
    }
    Ok(())
}

/// Uniqueness threshold `(D-1)^(D-1) / (D-2)^D` of the `D`-regular tree.
pub fn lambda_c(delta: usize) -> Result<f64> {
    check_delta(delta)?;
    let d = delta as f64;
    // Written as ((D-1)/(D-2))^(D-1) / (D-2) so nothing overflows.
    let value = if delta <= LOG_DOMAIN_DELTA {
        ((d - 1.0) / (d - 2.0)).powi(delta as i32 - 1) / (d - 2.0)
    } else {
        ((d - 1.0) * (1.0 / (d - 2.0)).ln_1p()).exp() / (d - 2.0)
    };
    Ok(value)
}

/// `lambda_c` for an arbitrary maximum degree; infinite below 3.
pub(crate) fn lambda_c_or_inf(max_degree: usize) -> f64 {
    if max_degree < 3 {
        f64::INFINITY
    } else {
        lambda_c(max_degree.min(MAX_DELTA)).expect("checked range")
    }
}

/// Exact rational `lambda_c(D)`.
pub fn lambda_c_rational(delta: usize) -> Result<BigRational> {
    check_delta(delta)?;
    if delta > LOG_DOMAIN_DELTA {
        return Err(precondition(format!(
            "exact thresholds are limited to degree {LOG_DOMAIN_DELTA}"
        )));
    }
    let num = num_traits::pow(BigInt::from(delta - 1), delta - 1);
    let den = num_traits::pow(BigInt::from(delta - 2), delta);
    Ok(BigRational::new(num, den))
}

/// Exact rational `alpha_c(D)`.
pub fn alpha_c_rational(delta: usize) -> Result<BigRational> {
    let l = lambda_c_rational(delta)?;
    let scale = BigRational::from_integer(BigInt::from(delta + 1));
    Ok(l.clone() / (BigRational::one() + scale * l))
}

/// Critical density: occupancy of `K_{D+1}` at `lambda_c(D)`.
pub fn alpha_c(delta: usize) -> Result<f64> {
    Ok(clique_occupancy(delta, lambda_c(delta)?))
}

/// Fugacity at which `K_{D+1}` has occupancy `alpha`; the top of the Sample-k grid.
pub fn lambda_star(alpha: f64, delta: usize) -> Result<f64> {
    let ac = alpha_c(delta)?;
    if !(alpha > 0.0 && alpha < ac) {
        return Err(precondition(format!(
            "alpha must lie in (0, alpha_c({delta}) = {ac}), got {alpha}"
        )));
    }
    Ok(alpha / (1.0 - alpha * (delta as f64 + 1.0)))
}

/// Grid ceiling for triangle-free inputs: `lambda_c(D) - 1/D^2`.
pub fn lambda_star_triangle_free(delta: usize) -> Result<f64> {
    let d = delta as f64;
    Ok(lambda_c(delta)? - 1.0 / (d * d))
}

/// Occupancy fraction of `K_{D+1}`: `lambda / (1 + lambda (D+1))`.
///
/// This is the minimum occupancy over all graphs of maximum degree `D`.
pub fn clique_occupancy(delta: usize, lambda: f64) -> f64 {
    lambda / (1.0 + lambda * (delta as f64 + 1.0))
}

/// Threshold summary for one degree bound.
#[derive(Clone, Debug, Serialize)]
pub struct ThresholdSet {
    pub delta: usize,
    pub lambda_c: f64,
    pub alpha_c: f64,
    pub lambda_star_triangle_free: f64,
    pub alpha: Option<f64>,
    /// `lambda_star(alpha)` when an alpha was requested.
    pub lambda_star: Option<f64>,
}

impl ThresholdSet {
    pub fn new(delta: usize, alpha: Option<f64>) -> Result<Self> {
        Ok(Self {
            delta,
            lambda_c: lambda_c(delta)?,
            alpha_c: alpha_c(delta)?,
            lambda_star_triangle_free: lambda_star_triangle_free(delta)?,
            alpha,
            lambda_star: alpha.map(|a| lambda_star(a, delta)).transpose()?,
        })
    }
}
