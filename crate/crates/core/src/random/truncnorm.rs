//! N(μ, σ²) restricted to an open interval (L, U).
//!
//! Three regimes on the standardized bounds (a, b):
//! - narrow windows use uniform proposals with exact rejection,
//! - far tails (a > 4 or b < −4) use exponential rejection,
//! - everything else inverts the distribution function.

use rand::Rng;
use rand_distr::{Exp1, Open01};

use super::normal::{norm_cdf, norm_quantile};
use crate::error::{DgfcError, Result};

const TAIL: f64 = 4.0;
const NARROW: f64 = 0.1;
const MAX_RETRIES: usize = 1000;

/// Draws from N(mu, sigma2) conditioned on (lo, hi). Either bound may be
/// infinite. The result lies strictly inside the bounds.
pub fn sample_truncated_normal<R: Rng + ?Sized>(
    rng: &mut R,
    mu: f64,
    sigma2: f64,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    if !(lo < hi) {
        return Err(DgfcError::Contract(format!(
            "truncation bounds must satisfy L < U, got ({lo}, {hi})"
        )));
    }
    if !(sigma2 > 0.0) || !mu.is_finite() {
        return Err(DgfcError::Contract(format!(
            "truncated normal needs finite mean and positive variance, got ({mu}, {sigma2})"
        )));
    }
    let sd = sigma2.sqrt();
    let a = (lo - mu) / sd;
    let b = (hi - mu) / sd;
    for _ in 0..MAX_RETRIES {
        let z = standard_truncated(rng, a, b);
        let x = mu + sd * z;
        if x > lo && x < hi {
            return Ok(x);
        }
    }
    // Interval too narrow to resolve after rescaling; fall back to a
    // direct uniform draw on the original scale.
    for _ in 0..MAX_RETRIES {
        let u: f64 = rng.sample(Open01);
        let x = lo + (hi - lo) * u;
        if x > lo && x < hi {
            return Ok(x);
        }
    }
    Err(DgfcError::Numeric(format!(
        "no representable point strictly inside ({lo}, {hi})"
    )))
}

fn standard_truncated<R: Rng + ?Sized>(rng: &mut R, a: f64, b: f64) -> f64 {
    if b - a < NARROW || (a >= TAIL && b - a <= 1.0 / a) || (b <= -TAIL && b - a <= -1.0 / b) {
        return uniform_rejection(rng, a, b);
    }
    if a >= TAIL {
        return exponential_tail(rng, a, b);
    }
    if b <= -TAIL {
        return -exponential_tail(rng, -b, -a);
    }
    inverse_cdf(rng, a, b)
}

/// Uniform proposal on [a, b], accepted with probability φ(x)/φ(m) where m
/// is the mode of the density restricted to [a, b].
fn uniform_rejection<R: Rng + ?Sized>(rng: &mut R, a: f64, b: f64) -> f64 {
    let m = if a > 0.0 {
        a
    } else if b < 0.0 {
        b
    } else {
        0.0
    };
    loop {
        let u: f64 = rng.sample(Open01);
        let x = a + (b - a) * u;
        let log_accept = 0.5 * (m * m - x * x);
        let e: f64 = rng.sample(Exp1);
        if -e < log_accept {
            return x;
        }
    }
}

/// Robert's translated-exponential rejection for x > a ≥ 0, optionally
/// capped at b.
fn exponential_tail<R: Rng + ?Sized>(rng: &mut R, a: f64, b: f64) -> f64 {
    let rate = 0.5 * (a + (a * a + 4.0).sqrt());
    loop {
        let e: f64 = rng.sample(Exp1);
        let x = a + e / rate;
        if x >= b {
            continue;
        }
        let log_accept = -0.5 * (x - rate) * (x - rate);
        let e2: f64 = rng.sample(Exp1);
        if -e2 < log_accept {
            return x;
        }
    }
}

fn inverse_cdf<R: Rng + ?Sized>(rng: &mut R, a: f64, b: f64) -> f64 {
    let u: f64 = rng.sample(Open01);
    // Work in whichever tail keeps the probabilities away from 1.
    if a > 0.0 {
        let pa = norm_cdf(-a);
        let pb = norm_cdf(-b);
        -norm_quantile(pb + u * (pa - pb))
    } else {
        let pa = norm_cdf(a);
        let pb = norm_cdf(b);
        norm_quantile(pa + u * (pb - pa))
    }
}

/// Closed-form mean of N(mu, sigma2) truncated to (lo, hi).
pub fn truncated_normal_mean(mu: f64, sigma2: f64, lo: f64, hi: f64) -> f64 {
    use super::normal::norm_pdf;
    let sd = sigma2.sqrt();
    let a = (lo - mu) / sd;
    let b = (hi - mu) / sd;
    let (za, zb) = if a > 0.0 {
        (norm_cdf(-a), norm_cdf(-b))
    } else {
        (norm_cdf(b), norm_cdf(a))
    };
    let mass = za - zb;
    let pa = if a.is_finite() { norm_pdf(a) } else { 0.0 };
    let pb = if b.is_finite() { norm_pdf(b) } else { 0.0 };
    mu + sd * (pa - pb) / mass
}
