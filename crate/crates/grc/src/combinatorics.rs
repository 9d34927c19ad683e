//! Binomial coefficients in log space and exact big-integer arithmetic.
//!
//! Schedule construction needs ln C(a, b) for real-valued a and b (stage
//! sizes are real numbers before integerization), far beyond where C(a, b)
//! fits in a float. Everything here works on the natural log scale and only
//! exponentiates at the boundary. Exact values for cross-checking come from
//! `num_bigint`.

use std::ops::{Div, Mul};

use num_bigint::BigUint;

use crate::error::{Error, Result};

/// Hard cap for exact big-integer evaluation. Costs above this are
/// astronomically large anyway; the float path has no such limit.
pub const EXACT_LIMIT: u64 = 2_000;

/// A positive quantity stored as its natural logarithm.
///
/// Multiplication and division are log-space addition and subtraction, so
/// products of hundreds of huge factors never overflow. Comparison works
/// directly on the logs.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogReal {
    log: f64,
}

impl LogReal {
    pub fn from_ln(log: f64) -> Self {
        debug_assert!(log.is_finite());
        LogReal { log }
    }

    pub fn from_value(value: f64) -> Self {
        debug_assert!(value > 0.0 && value.is_finite());
        LogReal { log: value.ln() }
    }

    /// The stored logarithm.
    pub fn ln(self) -> f64 {
        self.log
    }

    /// Exponentiate back to a plain float. Only meaningful when the value
    /// fits; callers at the output boundary use this.
    pub fn value(self) -> f64 {
        self.log.exp()
    }
}

impl Mul for LogReal {
    type Output = LogReal;
    // Multiplication in value space is addition in log space.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: LogReal) -> LogReal {
        LogReal {
            log: self.log + rhs.log,
        }
    }
}

impl Div for LogReal {
    type Output = LogReal;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: LogReal) -> LogReal {
        LogReal {
            log: self.log - rhs.log,
        }
    }
}

const LN_SQRT_TWO_PI: f64 = 0.918_938_533_204_672_8;

// Stirling series coefficients B_{2j} / (2j (2j-1)) for j = 1..7.
const STIRLING: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1_260.0,
    -1.0 / 1_680.0,
    1.0 / 1_188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
];

// Below this the asymptotic series is not yet accurate; shift up via
// Gamma(x+1) = x Gamma(x) and divide the shifted factors back out in logs.
const STIRLING_THRESHOLD: f64 = 10.0;

/// Natural log of the Gamma function for x > 0.
///
/// Stirling's asymptotic series with seven correction terms; arguments
/// below the threshold are shifted upward first. The truncation error at
/// the threshold is below 1e-16 relative, so double precision is limited
/// by rounding, not by the series.
fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0 && x.is_finite());
    let mut shift = 0.0;
    let mut z = x;
    while z < STIRLING_THRESHOLD {
        shift += z.ln();
        z += 1.0;
    }
    let inv = 1.0 / z;
    let w = inv * inv;
    let mut series = STIRLING[6];
    for j in (0..6).rev() {
        series = STIRLING[j] + w * series;
    }
    (z - 0.5) * z.ln() - z + LN_SQRT_TWO_PI + inv * series - shift
}

/// ln C(a, b) without argument checks; callers guarantee 0 <= b <= a.
pub(crate) fn ln_binomial_raw(a: f64, b: f64) -> f64 {
    debug_assert!(b >= 0.0 && b <= a);
    if b == 0.0 || b == a {
        return 0.0;
    }
    ln_gamma(a + 1.0) - ln_gamma(b + 1.0) - ln_gamma(a - b + 1.0)
}

/// Generalized binomial coefficient C(a, b) = Gamma(a+1) / (Gamma(b+1)
/// Gamma(a-b+1)) on the log scale, for real 0 <= b <= a.
pub fn log_binomial(a: f64, b: f64) -> Result<LogReal> {
    if !a.is_finite() || !b.is_finite() || b < 0.0 || b > a {
        return Err(Error::Domain(format!(
            "log_binomial requires 0 <= b <= a, got a = {a}, b = {b}"
        )));
    }
    Ok(LogReal::from_ln(ln_binomial_raw(a, b)))
}

/// The closed-form approximation ln C(a, b) ~ b ln(a / b), exact in the
/// regime b << a that drives the geometric schedule.
pub fn approx_binomial_log(a: f64, b: f64) -> Result<LogReal> {
    if !a.is_finite() || !b.is_finite() || b <= 0.0 || b > a {
        return Err(Error::Domain(format!(
            "approx_binomial_log requires 0 < b <= a, got a = {a}, b = {b}"
        )));
    }
    Ok(LogReal::from_ln(b * (a.ln() - b.ln())))
}

/// Exact C(n, r) as a big integer, via the multiplicative formula. Each
/// intermediate product is itself a binomial coefficient, so every
/// division is exact.
pub fn exact_binomial(n: u64, r: u64) -> Result<BigUint> {
    if r > n {
        return Err(Error::Domain(format!(
            "exact_binomial requires r <= n, got n = {n}, r = {r}"
        )));
    }
    let r = r.min(n - r);
    let mut acc = BigUint::from(1u32);
    for i in 1..=r {
        acc = acc * BigUint::from(n - r + i) / BigUint::from(i);
    }
    Ok(acc)
}
