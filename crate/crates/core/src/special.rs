//! Gamma and beta family on integer arguments.
//!
//! Every beta-type quantity the volume formulas need has integer parameters,
//! so the incomplete beta function is evaluated as the finite binomial tail
//!
//! ```text
//! I_a(m, n) = sum_{j=m}^{m+n-1} C(m+n-1, j) a^j (1-a)^(m+n-1-j)
//! ```
//!
//! rather than by a continued fraction. Binomial coefficients are exact
//! integers while `m + n - 1 <= 20` and a floating point multiplicative
//! recurrence above that. Magnitudes that can leave the range of `f64`
//! (large factorials, `B(m, n)` for large arguments) are carried as
//! [`LogScaled`].

use std::f64::consts::PI;
use std::ops::{Div, Mul};
use std::sync::OnceLock;

use crate::error::{invalid, Error, Result};

/// Largest `m + n - 1` for which binomials and factorials are exact integers.
const EXACT_LIMIT: u32 = 20;

/// Largest `n` whose factorial is finite in `f64`.
const FACTORIAL_TABLE_LEN: usize = 171;

/// A nonnegative real stored as its natural logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogScaled {
    log_magnitude: f64,
    is_zero: bool,
}

impl LogScaled {
    pub const ZERO: LogScaled = LogScaled {
        log_magnitude: 0.0,
        is_zero: true,
    };
    pub const ONE: LogScaled = LogScaled {
        log_magnitude: 0.0,
        is_zero: false,
    };

    pub fn from_ln(log_magnitude: f64) -> Self {
        if log_magnitude == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        LogScaled {
            log_magnitude,
            is_zero: false,
        }
    }

    /// Panics in debug builds on negative input.
    pub fn from_value(x: f64) -> Self {
        debug_assert!(x >= 0.0, "LogScaled::from_value({x})");
        if x == 0.0 {
            Self::ZERO
        } else {
            Self::from_ln(x.ln())
        }
    }

    pub fn is_zero(&self) -> bool {
        self.is_zero
    }

    /// Natural log of the value; `-inf` for zero.
    pub fn ln(&self) -> f64 {
        if self.is_zero {
            f64::NEG_INFINITY
        } else {
            self.log_magnitude
        }
    }

    pub fn powi(self, exponent: u64) -> Self {
        if exponent == 0 {
            return Self::ONE;
        }
        if self.is_zero {
            return Self::ZERO;
        }
        Self::from_ln(self.log_magnitude * exponent as f64)
    }

    /// Exponentiates once. Values below the `f64` range flush to zero;
    /// values above it are an error.
    pub fn to_f64(self) -> Result<f64> {
        if self.is_zero {
            return Ok(0.0);
        }
        let v = self.log_magnitude.exp();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Unrepresentable(format!(
                "exp({}) overflows",
                self.log_magnitude
            )))
        }
    }
}

impl Mul for LogScaled {
    type Output = LogScaled;

    fn mul(self, rhs: LogScaled) -> LogScaled {
        if self.is_zero || rhs.is_zero {
            LogScaled::ZERO
        } else {
            LogScaled::from_ln(self.log_magnitude + rhs.log_magnitude)
        }
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Div for LogScaled {
    type Output = LogScaled;

    /// Division by zero yields `+inf` magnitude, which `to_f64` rejects.
    fn div(self, rhs: LogScaled) -> LogScaled {
        if self.is_zero {
            return LogScaled::ZERO;
        }
        if rhs.is_zero {
            return LogScaled::from_ln(f64::INFINITY);
        }
        LogScaled::from_ln(self.log_magnitude - rhs.log_magnitude)
    }
}

fn factorial_u64(n: u32) -> u64 {
    debug_assert!(n <= EXACT_LIMIT);
    (2..=n as u64).product()
}

fn ln_factorial_table() -> &'static [f64; FACTORIAL_TABLE_LEN] {
    static TABLE: OnceLock<[f64; FACTORIAL_TABLE_LEN]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = [0.0; FACTORIAL_TABLE_LEN];
        let mut acc = 1.0_f64;
        for (i, slot) in table.iter_mut().enumerate().skip(1) {
            acc *= i as f64;
            *slot = acc.ln();
        }
        table
    })
}

/// `ln(n!)`.
pub fn ln_factorial(n: u64) -> f64 {
    if (n as usize) < FACTORIAL_TABLE_LEN {
        return ln_factorial_table()[n as usize];
    }
    // Stirling series for ln Gamma(x), x = n + 1 > 171; truncation error is
    // far below one ulp of the result.
    let x = n as f64 + 1.0;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + series
}

/// `ln Gamma(n) = ln((n-1)!)` for positive integer `n`.
pub fn ln_gamma_int(n: u64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("Gamma(0) is undefined"));
    }
    Ok(ln_factorial(n - 1))
}

fn check_positive(m: u32, n: u32) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(invalid(format!(
            "beta parameters must be positive integers, got ({m}, {n})"
        )));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(invalid(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    Ok(())
}

/// `B(m, n)` in log form.
pub fn ln_beta(m: u32, n: u32) -> Result<LogScaled> {
    check_positive(m, n)?;
    let (m, n) = (m as u64, n as u64);
    Ok(LogScaled::from_ln(
        ln_factorial(m - 1) + ln_factorial(n - 1) - ln_factorial(m + n - 1),
    ))
}

/// `B(m, n) = (m-1)!(n-1)!/(m+n-1)!`.
///
/// Exact rational arithmetic (one final rounding) while `m + n - 1 <= 20`;
/// log domain above. Results below the `f64` range flush to zero.
pub fn beta(m: u32, n: u32) -> Result<f64> {
    check_positive(m, n)?;
    let top = m as u64 + n as u64 - 1;
    if top <= EXACT_LIMIT as u64 {
        let num = factorial_u64(m - 1) * factorial_u64(n - 1);
        let den = factorial_u64(top as u32);
        return Ok(num as f64 / den as f64);
    }
    ln_beta(m, n)?.to_f64()
}

/// Binomial coefficients `C(total, j)` for consecutive `j`.
enum BinomialWalk {
    Exact { total: u64, j: u64, current: u64 },
    Float { total: f64, j: f64, current: f64 },
    Log { total: u64, j: u64 },
}

impl BinomialWalk {
    fn starting_at(total: u32, j: u32) -> Self {
        if total <= EXACT_LIMIT {
            let current = factorial_u64(total) / (factorial_u64(j) * factorial_u64(total - j));
            return BinomialWalk::Exact {
                total: total as u64,
                j: j as u64,
                current,
            };
        }
        let low = j.min(total - j);
        let mut c = 1.0_f64;
        for i in 1..=low {
            c = c * (total - low + i) as f64 / i as f64;
        }
        // Finite start does not guarantee a finite peak further along.
        let peak = ln_factorial(total as u64)
            - ln_factorial(total as u64 / 2)
            - ln_factorial(total as u64 - total as u64 / 2);
        if c.is_finite() && peak < 700.0 {
            BinomialWalk::Float {
                total: total as f64,
                j: j as f64,
                current: c,
            }
        } else {
            BinomialWalk::Log {
                total: total as u64,
                j: j as u64,
            }
        }
    }

    /// `ln C(total, j)` for the current `j`, or the linear value.
    fn value(&self) -> std::result::Result<f64, f64> {
        match *self {
            BinomialWalk::Exact { current, .. } => Ok(current as f64),
            BinomialWalk::Float { current, .. } => Ok(current),
            BinomialWalk::Log { total, j } => {
                Err(ln_factorial(total) - ln_factorial(j) - ln_factorial(total - j))
            }
        }
    }

    fn advance(&mut self) {
        match self {
            BinomialWalk::Exact { total, j, current } => {
                *current = *current * (*total - *j) / (*j + 1);
                *j += 1;
            }
            BinomialWalk::Float { total, j, current } => {
                *current = *current * (*total - *j) / (*j + 1.0);
                *j += 1.0;
            }
            BinomialWalk::Log { j, .. } => *j += 1,
        }
    }
}

/// `sum_{j=lo}^{hi} C(total, j) a^j (1-a)^(total-j)` for `0 < a < 1`.
fn binomial_tail(total: u32, lo: u32, hi: u32, a: f64) -> f64 {
    debug_assert!(a > 0.0 && a < 1.0 && lo <= hi && hi <= total);
    let b = 1.0 - a;
    let (ln_a, ln_b) = (a.ln(), (-a).ln_1p());
    let mut walk = BinomialWalk::starting_at(total, lo);
    let mut sum = 0.0;
    for j in lo..=hi {
        let pa = a.powi(j as i32);
        let pb = b.powi((total - j) as i32);
        let term = match walk.value() {
            Ok(c) if pa >= f64::MIN_POSITIVE && pb >= f64::MIN_POSITIVE => c * pa * pb,
            Ok(c) => (c.ln() + j as f64 * ln_a + (total - j) as f64 * ln_b).exp(),
            Err(ln_c) => (ln_c + j as f64 * ln_a + (total - j) as f64 * ln_b).exp(),
        };
        sum += term;
        walk.advance();
    }
    sum
}

/// `1 - I_a(m, n)`, summed directly over the complementary terms.
fn lower_tail(alpha: f64, m: u32, n: u32) -> f64 {
    if alpha == 0.0 {
        return 1.0;
    }
    if alpha == 1.0 {
        return 0.0;
    }
    binomial_tail(m + n - 1, 0, m - 1, alpha).min(1.0)
}

/// Regularized incomplete beta `I_alpha(m, n)` for integer `m, n >= 1`.
pub fn regularized_incomplete_beta(alpha: f64, m: u32, n: u32) -> Result<f64> {
    check_alpha(alpha)?;
    check_positive(m, n)?;
    if alpha == 0.0 {
        return Ok(0.0);
    }
    if alpha == 1.0 {
        return Ok(1.0);
    }
    // Sum whichever tail is the smaller one.
    if alpha * (m + n) as f64 > m as f64 {
        return Ok((1.0 - lower_tail(alpha, m, n)).max(0.0));
    }
    Ok(binomial_tail(m + n - 1, m, m + n - 1, alpha).min(1.0))
}

/// Incomplete beta `B(alpha, m, n) = int_0^alpha x^(m-1) (1-x)^(n-1) dx`.
pub fn incomplete_beta(alpha: f64, m: u32, n: u32) -> Result<f64> {
    let i = regularized_incomplete_beta(alpha, m, n)?;
    Ok(i * beta(m, n)?)
}

/// Beta difference `B(m, n) - B(alpha, m, n)`, the integral over `[alpha, 1]`.
pub fn beta_difference(alpha: f64, m: u32, n: u32) -> Result<f64> {
    beta_difference_scaled(alpha, m, n)?.to_f64()
}

pub(crate) fn beta_difference_scaled(alpha: f64, m: u32, n: u32) -> Result<LogScaled> {
    check_alpha(alpha)?;
    check_positive(m, n)?;
    Ok(ln_beta(m, n)? * LogScaled::from_value(lower_tail(alpha, m, n)))
}

/// Incomplete beta difference `B̄(alpha,m,n) - B̄(1/2,m,n) = B(1/2,m,n) - B(alpha,m,n)`.
///
/// Nonpositive for `alpha >= 1/2`.
pub fn incomplete_beta_difference(alpha: f64, m: u32, n: u32) -> Result<f64> {
    let (scale, factor) = incomplete_beta_difference_parts(alpha, m, n)?;
    Ok(scale.to_f64()? * factor)
}

/// `(B(m, n), I_{1/2}(m,n) - I_alpha(m,n))`; the product is the incomplete
/// beta difference.
pub(crate) fn incomplete_beta_difference_parts(
    alpha: f64,
    m: u32,
    n: u32,
) -> Result<(LogScaled, f64)> {
    check_alpha(alpha)?;
    check_positive(m, n)?;
    let factor = lower_tail(alpha, m, n) - lower_tail(0.5, m, n);
    Ok((ln_beta(m, n)?, factor))
}

/// Complex multivariate gamma `CΓ_k(n) = π^{k(k-1)/2} ∏_{i=1}^{k} Γ(n-i+1)`.
pub fn complex_multivariate_gamma(k: u32, n: u32) -> Result<LogScaled> {
    if k == 0 {
        return Err(invalid("complex multivariate gamma needs k >= 1"));
    }
    if n < k {
        return Err(invalid(format!(
            "complex multivariate gamma needs n >= k, got k={k}, n={n}"
        )));
    }
    let k64 = k as u64;
    let pi_power = (k64 * (k64 - 1) / 2) as f64 * PI.ln();
    let gammas: f64 = (1..=k64).map(|i| ln_factorial(n as u64 - i)).sum();
    Ok(LogScaled::from_ln(pi_power + gammas))
}
