//! Normalized hyperball volumes on G(k, n), i.e. the CDF `p(d <= δ)` of the
//! distance between two independent Haar-uniform points.
//!
//! Closed forms, after reducing `k` to `k' = min(k, n - k)`:
//!
//! | k'  | metric       | δ range   | value                                           |
//! |-----|--------------|-----------|-------------------------------------------------|
//! | 1   | either       | [0, 1]    | `δ^(2n-2)`                                      |
//! | 2   | projective-F | [0, √2]   | piecewise beta-difference form, see [`volume_k2_pf`] |
//! | any | projective-2 | [0, 1]    | `δ^(2k'n - 2k'^2)`                              |
//! | any | projective-F | [0, 1]    | `δ^(2k'n-2k'^2) CΓ_k'(n) / (Γ(k'n-k'^2+1) CΓ_k'(k'))` |
//!
//! Projective-F with `k' >= 3` and `δ > 1` has no closed form here and is
//! reported as [`Error::Unsupported`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::special::{
    beta, beta_difference_scaled, complex_multivariate_gamma, incomplete_beta_difference_parts,
    ln_gamma_int, LogScaled,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "pf")]
    ProjectiveF,
    #[serde(rename = "p2")]
    Projective2,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::ProjectiveF => "pf",
            Metric::Projective2 => "p2",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pf" | "projective-f" => Ok(Metric::ProjectiveF),
            "p2" | "projective-2" => Ok(Metric::Projective2),
            other => Err(invalid(format!(
                "unknown metric {other:?}, expected pf or p2"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeQuery {
    pub k: u32,
    pub n: u32,
    pub delta: f64,
    pub metric: Metric,
}

impl VolumeQuery {
    pub fn new(k: u32, n: u32, delta: f64, metric: Metric) -> Self {
        VolumeQuery {
            k,
            n,
            delta,
            metric,
        }
    }
}

/// `(min(k, n - k), n)`: G(k, n) and G(n - k, n) have identical distance
/// distributions.
pub fn dualize(k: u32, n: u32) -> Result<(u32, u32)> {
    if k == 0 || k > n {
        return Err(invalid(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    Ok((k.min(n - k), n))
}

/// Largest attainable distance on G(k, n) under `metric`.
pub fn max_delta(k: u32, n: u32, metric: Metric) -> Result<f64> {
    let (kd, _) = dualize(k, n)?;
    Ok(match (kd, metric) {
        (0, _) => 0.0,
        (_, Metric::Projective2) => 1.0,
        (kd, Metric::ProjectiveF) => (kd as f64).sqrt(),
    })
}

/// Normalized volume of the δ-ball in G(k, n), dispatched to the closed
/// form that covers the dualized query.
pub fn volume(q: VolumeQuery) -> Result<f64> {
    let VolumeQuery {
        k,
        n,
        delta,
        metric,
    } = q;
    if !(delta >= 0.0) || delta.is_infinite() {
        return Err(invalid(format!(
            "delta must be finite and >= 0, got {delta}"
        )));
    }
    let (kd, n) = dualize(k, n)?;
    if kd == 0 {
        return Ok(1.0);
    }
    if delta >= max_delta(kd, n, metric)? {
        return Ok(1.0);
    }
    match (kd, metric) {
        (1, _) => volume_k1(n, delta),
        (_, Metric::Projective2) => volume_p2_general(kd, n, delta),
        (2, Metric::ProjectiveF) => volume_k2_pf(n, delta),
        (_, Metric::ProjectiveF) => volume_pf_general_small_delta(kd, n, delta),
    }
}

fn check_delta(delta: f64, max: f64) -> Result<()> {
    if !(0.0..=max).contains(&delta) {
        return Err(invalid(format!(
            "delta must lie in [0, {max}], got {delta}"
        )));
    }
    Ok(())
}

fn finish(v: LogScaled) -> Result<f64> {
    Ok(v.to_f64()?.min(1.0))
}

/// `δ^(2n-2)` on G(1, n); both metrics coincide there.
pub fn volume_k1(n: u32, delta: f64) -> Result<f64> {
    if n < 2 {
        return Err(invalid(format!("G(1, n) needs n >= 2, got {n}")));
    }
    check_delta(delta, 1.0)?;
    finish(LogScaled::from_value(delta).powi(2 * n as u64 - 2))
}

/// `p(r <= c) = 1 - (1 - c²)^(n-1)` for the correlation `r = |v₁ᴴv₂|` of two
/// uniform points of G(1, n).
pub fn correlation_cdf(n: u32, c: f64) -> Result<f64> {
    if n < 2 {
        return Err(invalid(format!("correlation CDF needs n >= 2, got {n}")));
    }
    if !(0.0..=1.0).contains(&c) {
        return Err(invalid(format!("correlation must lie in [0, 1], got {c}")));
    }
    Ok(-((n - 1) as f64 * (-c * c).ln_1p()).exp_m1())
}

/// Density `2(n-1) x (1 - x²)^(n-2)` of the same correlation.
pub fn correlation_pdf(n: u32, x: f64) -> Result<f64> {
    if n < 2 {
        return Err(invalid(format!("correlation pdf needs n >= 2, got {n}")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(invalid(format!("correlation must lie in [0, 1], got {x}")));
    }
    Ok(2.0 * (n - 1) as f64 * x * (1.0 - x * x).powi(n as i32 - 2))
}

/// `E[|v₁ᴴv₂|²] = (n-1) B(2, n-1)`, which equals `1/n`.
pub fn expected_sq_correlation(n: u32) -> Result<f64> {
    if n < 2 {
        return Err(invalid(format!(
            "expected correlation needs n >= 2, got {n}"
        )));
    }
    Ok((n - 1) as f64 * beta(2, n - 1)?)
}

/// Projective-F volume on G(2, n), `n >= 4`, `0 <= δ <= √2`.
///
/// With `t = δ²` and `M = (n-1)(n-2)²(n-3)`:
///
/// ```text
/// t <= 1:  (t/2)^(2n-4) + M t^(2n-4) [ B̄(½,n-3,n)/(n-1) + B̄(½,n-1,n-2)/(n-3) - 2 B̄(½,n-2,n-1)/(n-2) ]
/// t >= 1:  (t/2)^(2n-4) + M t^(2n-4) [ D(n-3,n)/(n-1)   + D(n-1,n-2)/(n-3)   - 2 D(n-2,n-1)/(n-2) ]
/// ```
///
/// where `B̄(a,m,p)` is the beta difference and `D(m,p) = B(1/t,m,p) - B(½,m,p)`
/// (the negated incomplete beta difference). Both branches agree at `t = 1`
/// and the second reaches 1 at `t = 2`.
pub fn volume_k2_pf(n: u32, delta: f64) -> Result<f64> {
    let ln_v = ln_volume_k2_pf(n, delta)?;
    Ok(LogScaled::from_ln(ln_v).to_f64()?.clamp(0.0, 1.0))
}

/// Natural log of [`volume_k2_pf`], accurate where the volume itself is
/// below the normal `f64` range.
pub fn ln_volume_k2_pf(n: u32, delta: f64) -> Result<f64> {
    if n < 4 {
        return Err(invalid(format!(
            "projective-F volume on G(2, n) needs n >= 4, got {n}"
        )));
    }
    let max = std::f64::consts::SQRT_2;
    // The full ball, admitting the rounding of √2 itself.
    if delta >= max && delta <= max * (1.0 + 4.0 * f64::EPSILON) {
        return Ok(0.0);
    }
    check_delta(delta, max)?;
    if delta == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let t = delta * delta;
    let power = 2 * n as u64 - 4;
    let ln_lead = power as f64 * (t / 2.0).ln();

    let nf = n as f64;
    let terms = [
        (1.0 / (nf - 1.0), n - 3, n),
        (1.0 / (nf - 3.0), n - 1, n - 2),
        (-2.0 / (nf - 2.0), n - 2, n - 1),
    ];
    // Each term as (ln magnitude of the beta scale, signed linear factor).
    let mut parts = Vec::with_capacity(3);
    for (coef, m, p) in terms {
        if t <= 1.0 {
            let b = beta_difference_scaled(0.5, m, p)?;
            parts.push((b.ln(), coef));
        } else {
            let (scale, factor) = incomplete_beta_difference_parts(1.0 / t, m, p)?;
            parts.push((scale.ln(), -coef * factor));
        }
    }
    let top = parts
        .iter()
        .map(|(l, _)| *l)
        .fold(f64::NEG_INFINITY, f64::max);
    let bracket: f64 = parts.iter().map(|(l, c)| c * (l - top).exp()).sum();
    if bracket == 0.0 {
        return Ok(ln_lead.min(0.0));
    }
    let m_const = (nf - 1.0) * (nf - 2.0) * (nf - 2.0) * (nf - 3.0);
    let ln_tail = m_const.ln() + power as f64 * t.ln() + top + bracket.abs().ln();
    // ln(lead ± tail), factoring out the larger magnitude.
    let (hi, lo, sign) = if ln_lead >= ln_tail {
        (ln_lead, ln_tail, bracket.signum())
    } else {
        (ln_tail, ln_lead, bracket.signum())
    };
    let ratio = (lo - hi).exp();
    let sum = if ln_lead >= ln_tail {
        1.0 + sign * ratio
    } else {
        sign + ratio
    };
    if sum <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok((hi + sum.ln()).min(0.0))
}

/// Projective-2 volume `δ^(2kn - 2k²)`, `n >= 2k`, `0 <= δ <= 1`.
pub fn volume_p2_general(k: u32, n: u32, delta: f64) -> Result<f64> {
    if k == 0 || n < 2 * k {
        return Err(invalid(format!(
            "projective-2 closed form needs 1 <= k and n >= 2k, got k={k}, n={n}"
        )));
    }
    check_delta(delta, 1.0)?;
    let (k, n) = (k as u64, n as u64);
    finish(LogScaled::from_value(delta).powi(2 * k * n - 2 * k * k))
}

/// Projective-F volume for `δ <= 1`:
/// `δ^(2kn-2k²) CΓ_k(n) / (Γ(kn-k²+1) CΓ_k(k))`, `n >= 2k`.
pub fn volume_pf_general_small_delta(k: u32, n: u32, delta: f64) -> Result<f64> {
    finish(LogScaled::from_ln(ln_volume_pf_general_small_delta(
        k, n, delta,
    )?))
}

/// Natural log of [`volume_pf_general_small_delta`].
pub fn ln_volume_pf_general_small_delta(k: u32, n: u32, delta: f64) -> Result<f64> {
    if k == 0 || n < 2 * k {
        return Err(invalid(format!(
            "projective-F closed form needs 1 <= k and n >= 2k, got k={k}, n={n}"
        )));
    }
    if delta > 1.0 && k >= 3 {
        return Err(Error::Unsupported(format!(
            "projective-F volume for k'={k} >= 3 with delta={delta} > 1 has no closed form"
        )));
    }
    check_delta(delta, 1.0)?;
    let (k64, n64) = (k as u64, n as u64);
    let dim = k64 * n64 - k64 * k64;
    let coefficient = complex_multivariate_gamma(k, n)?
        / LogScaled::from_ln(ln_gamma_int(dim + 1)?)
        / complex_multivariate_gamma(k, k)?;
    Ok((LogScaled::from_value(delta).powi(2 * dim) * coefficient)
        .ln()
        .min(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn q(k: u32, n: u32, delta: f64, metric: Metric) -> f64 {
        volume(VolumeQuery::new(k, n, delta, metric)).unwrap()
    }

    #[test]
    fn dispatcher_examples() {
        for m in [Metric::ProjectiveF, Metric::Projective2] {
            assert_relative_eq!(q(1, 4, 0.5, m), 0.015625, max_relative = 1e-14);
        }
        assert_relative_eq!(
            q(3, 4, 0.9, Metric::Projective2),
            0.531441,
            max_relative = 1e-14
        );
        assert_eq!(q(2, 4, 2f64.sqrt(), Metric::ProjectiveF), 1.0);
        assert_eq!(
            q(2, 4, std::f64::consts::SQRT_2 + 1e-10, Metric::ProjectiveF),
            1.0
        );
    }

    #[test]
    fn unsupported_region_is_an_error() {
        let r = volume(VolumeQuery::new(3, 8, 1.2, Metric::ProjectiveF));
        assert!(matches!(r, Err(Error::Unsupported(_))));
        // 5 in G(5, 8) dualizes to 3.
        let r = volume(VolumeQuery::new(5, 8, 1.2, Metric::ProjectiveF));
        assert!(matches!(r, Err(Error::Unsupported(_))));
        // Beyond the diameter is fine.
        assert_eq!(q(3, 8, 2.0, Metric::ProjectiveF), 1.0);
    }

    #[test]
    fn invalid_queries() {
        assert!(volume(VolumeQuery::new(0, 4, 0.5, Metric::ProjectiveF)).is_err());
        assert!(volume(VolumeQuery::new(5, 4, 0.5, Metric::ProjectiveF)).is_err());
        assert!(volume(VolumeQuery::new(1, 4, -0.1, Metric::ProjectiveF)).is_err());
        assert!(volume(VolumeQuery::new(1, 4, f64::NAN, Metric::ProjectiveF)).is_err());
    }

    #[test]
    fn single_point_manifold() {
        for d in [0.0, 0.3, 5.0] {
            assert_eq!(q(3, 3, d, Metric::ProjectiveF), 1.0);
            assert_eq!(q(3, 3, d, Metric::Projective2), 1.0);
        }
    }

    #[test]
    fn zero_radius() {
        for (k, n) in [(1, 2), (2, 4), (3, 6), (3, 8), (5, 8)] {
            assert_eq!(q(k, n, 0.0, Metric::ProjectiveF), 0.0);
            assert_eq!(q(k, n, 0.0, Metric::Projective2), 0.0);
        }
    }

    #[test]
    fn k1_examples() {
        assert_relative_eq!(volume_k1(2, 0.6).unwrap(), 0.36, max_relative = 1e-14);
        assert_eq!(volume_k1(9, 1.0).unwrap(), 1.0);
        assert_relative_eq!(
            volume_k1(64, 0.5).unwrap(),
            2f64.powi(-126),
            max_relative = 1e-13
        );
        assert!(volume_k1(1, 0.5).is_err());
        assert!(volume_k1(4, 1.5).is_err());
    }

    #[test]
    fn correlation_examples() {
        assert_relative_eq!(correlation_cdf(2, 0.6).unwrap(), 0.36, max_relative = 1e-14);
        assert_eq!(correlation_cdf(7, 1.0).unwrap(), 1.0);
        assert_relative_eq!(
            correlation_cdf(4, 0.5).unwrap(),
            0.578125,
            max_relative = 1e-14
        );
        assert!(correlation_cdf(4, 1.2).is_err());

        for x in [0.0, 0.25, 0.9, 1.0] {
            assert_relative_eq!(correlation_pdf(2, x).unwrap(), 2.0 * x);
        }
        assert_eq!(correlation_pdf(5, 1.0).unwrap(), 0.0);
        assert!(correlation_pdf(5, -0.1).is_err());

        assert_relative_eq!(
            expected_sq_correlation(64).unwrap(),
            1.0 / 64.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            expected_sq_correlation(2).unwrap(),
            0.5,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            expected_sq_correlation(16).unwrap(),
            0.0625,
            max_relative = 1e-14
        );
    }

    #[test]
    fn k2_pf_examples() {
        for n in 4..=64 {
            assert_relative_eq!(
                volume_k2_pf(n, 2f64.sqrt()).unwrap(),
                1.0,
                max_relative = 1e-9
            );
        }
        assert_relative_eq!(volume_k2_pf(4, 1.0).unwrap(), 0.5, max_relative = 1e-12);
        assert!(volume_k2_pf(3, 0.5).is_err());
        assert!(volume_k2_pf(6, 1.5).is_err());
    }

    #[test]
    fn p2_general_examples() {
        assert_relative_eq!(
            volume_p2_general(2, 4, 0.8).unwrap(),
            0.8f64.powi(8),
            max_relative = 1e-14
        );
        assert_eq!(volume_p2_general(3, 9, 1.0).unwrap(), 1.0);
        assert_relative_eq!(
            volume_p2_general(3, 8, 0.9).unwrap(),
            0.9f64.powi(30),
            max_relative = 1e-13
        );
        assert_relative_eq!(
            volume_p2_general(3, 8, 0.9).unwrap(),
            0.042391,
            max_relative = 1e-4
        );
        assert!(volume_p2_general(3, 5, 0.5).is_err());
    }

    #[test]
    fn pf_general_examples() {
        assert_relative_eq!(
            volume_pf_general_small_delta(2, 4, 1.0).unwrap(),
            0.5,
            max_relative = 1e-13
        );
        for n in 2..40 {
            for d in [0.1, 0.5, 0.93] {
                assert_relative_eq!(
                    volume_pf_general_small_delta(1, n, d).unwrap(),
                    volume_k1(n, d).unwrap(),
                    max_relative = 1e-12
                );
            }
        }
        // 17280 / 725760 = 1/42
        assert_relative_eq!(
            volume_pf_general_small_delta(3, 6, 0.5).unwrap(),
            0.5f64.powi(18) / 42.0,
            max_relative = 1e-12
        );
        assert!(matches!(
            volume_pf_general_small_delta(3, 6, 1.1),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn dualize_examples() {
        assert_eq!(dualize(3, 4).unwrap(), (1, 4));
        assert_eq!(dualize(2, 4).unwrap(), (2, 4));
        assert_eq!(dualize(5, 8).unwrap(), (3, 8));
        assert!(dualize(0, 4).is_err());
    }

    #[test]
    fn metric_parsing() {
        assert_eq!("pf".parse::<Metric>().unwrap(), Metric::ProjectiveF);
        assert_eq!("p2".parse::<Metric>().unwrap(), Metric::Projective2);
        assert!("l2".parse::<Metric>().is_err());
        assert_eq!(Metric::Projective2.to_string(), "p2");
    }
}
