//! Closed-form SINR predictions available at the base station, which knows
//! the reported directions and `SINR^SU` but not the true channels.

use super::{ChannelSet, MimoScenario, SinrReport};
use crate::error::{invalid, Result};

/// Agreement required between `|u_iᴴ v_i|` and 1 for the ideal-CSI estimate.
const IDEAL_CSI_TOL: f64 = 1e-9;

fn check_z(z: f64) -> Result<()> {
    if !(0.0..1.0).contains(&z) {
        return Err(invalid(format!(
            "cross-power sum must lie in [0, 1), got {z}; users too correlated"
        )));
    }
    Ok(())
}

/// CB estimate `α² / (Σ_{j≠i}|v_iᴴv_j|² + Kγ)`.
pub fn estimate_cb(cross_powers: &[f64], s: &MimoScenario) -> f64 {
    let sum: f64 = cross_powers.iter().sum();
    s.alpha * s.alpha / (sum + s.k_gamma())
}

/// CB estimate with the cross powers replaced by their mean `1/N`:
/// `α²N / (K + KNγ - 1)`.
pub fn estimate_cb_expected(s: &MimoScenario) -> f64 {
    let (n, k) = (s.n_antennas as f64, s.n_users as f64);
    s.alpha * s.alpha * n / (k + k * n * s.gamma() - 1.0)
}

/// ZF estimate `α²(1-z)² / ((1-α²-Kγ)z + Kγ)` with `z = Σ_{j≠i}|v_iᴴv_j|²`.
pub fn estimate_zf(z: f64, s: &MimoScenario) -> Result<f64> {
    check_z(z)?;
    let a2 = s.alpha * s.alpha;
    let kg = s.k_gamma();
    Ok(a2 * (1.0 - z) * (1.0 - z) / ((1.0 - a2 - kg) * z + kg))
}

/// Jensen lower bound on the mean ZF SINR, the ZF estimate evaluated at
/// `E[z] = (K-1)/N`:
/// `α²(N-K+1)² / (N[(1-α²-Kγ)(K-1) + NKγ])`.
pub fn zf_expected_lower_bound(s: &MimoScenario) -> f64 {
    let (n, k) = (s.n_antennas as f64, s.n_users as f64);
    let a2 = s.alpha * s.alpha;
    let kg = s.k_gamma();
    a2 * (n - k + 1.0).powi(2) / (n * ((1.0 - a2 - kg) * (k - 1.0) + n * kg))
}

/// Predicted ratio of ZF to CB SINR,
/// `(1-z)²(z + Kγ) / ((1-α²-Kγ)z + Kγ)`.
pub fn gain_zf_cb(z: f64, s: &MimoScenario) -> Result<f64> {
    check_z(z)?;
    let a2 = s.alpha * s.alpha;
    let kg = s.k_gamma();
    Ok((1.0 - z) * (1.0 - z) * (z + kg) / ((1.0 - a2 - kg) * z + kg))
}

/// The gain with `z = (K-1)/N`:
/// `(N-K+1)²(K-1+NKγ) / (N²[(1-α²-Kγ)(K-1) + NKγ])`.
pub fn gain_zf_cb_asymptotic(s: &MimoScenario) -> f64 {
    let (n, k) = (s.n_antennas as f64, s.n_users as f64);
    let a2 = s.alpha * s.alpha;
    let kg = s.k_gamma();
    (n - k + 1.0).powi(2) * (k - 1.0 + n * kg) / (n * n * ((1.0 - a2 - kg) * (k - 1.0) + n * kg))
}

/// Ideal-CSI ZF estimate per user, `(1 - Σ_{j≠i}|u_iᴴu_j|²) / (Kγ)`.
/// Negative brackets are clamped to 0 and listed in `clamped`.
pub fn zf_ideal_sinr(cs: &ChannelSet, s: &MimoScenario) -> Result<SinrReport> {
    if (cs.alpha() - 1.0).abs() > IDEAL_CSI_TOL {
        return Err(invalid(format!(
            "ideal-CSI estimate needs alpha = 1, channel set has {}",
            cs.alpha()
        )));
    }
    let kg = s.k_gamma();
    let mut report = SinrReport::default();
    for i in 0..cs.n_users() {
        let bracket = 1.0 - cs.cross_power_sum(i);
        if bracket < 0.0 {
            report.clamped.push(i);
        }
        report.per_user_linear.push(bracket.max(0.0) / kg);
    }
    Ok(report)
}

/// Mean ideal-CSI ZF SINR `(N-K+1) / (NKγ)`.
pub fn zf_ideal_expected(s: &MimoScenario) -> f64 {
    let (n, k) = (s.n_antennas as f64, s.n_users as f64);
    (n - k + 1.0) / (n * k * s.gamma())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sc(n: usize, k: usize, alpha: f64, gamma: f64) -> MimoScenario {
        MimoScenario {
            n_antennas: n,
            n_users: k,
            alpha,
            sinr_su: 1.0 / gamma,
        }
    }

    #[test]
    fn cb_examples() {
        let s = sc(8, 4, 0.7, 0.05);
        assert_relative_eq!(estimate_cb(&[0.0; 3], &s), 0.49 / 0.2, max_relative = 1e-14);
        assert_relative_eq!(
            estimate_cb(&[0.1], &sc(8, 2, 0.9, 0.05)),
            4.05,
            max_relative = 1e-14
        );
        assert_eq!(estimate_cb(&[0.1], &sc(8, 2, 0.0, 0.05)), 0.0);
    }

    #[test]
    fn cb_expected_examples() {
        assert_relative_eq!(
            estimate_cb_expected(&sc(100, 10, 1.0, 0.01)),
            100.0 / 19.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            estimate_cb_expected(&sc(64, 8, 0.9, 0.0)),
            0.81 * 64.0 / 7.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            estimate_cb_expected(&sc(64, 8, 0.9, 0.0)),
            7.405714285714,
            max_relative = 1e-12
        );
        assert_eq!(estimate_cb_expected(&sc(64, 8, 0.0, 0.1)), 0.0);
    }

    #[test]
    fn zf_examples() {
        let s = sc(8, 2, 0.9, 0.05);
        assert_eq!(estimate_zf(0.0, &s).unwrap(), estimate_cb(&[0.0], &s));
        assert_relative_eq!(
            estimate_zf(0.1, &s).unwrap(),
            0.6561 / 0.109,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            estimate_zf(0.1, &sc(8, 2, 1.0, 0.05)).unwrap(),
            9.0,
            max_relative = 1e-14
        );
        assert!(estimate_zf(1.0, &s).is_err());
        assert!(estimate_zf(-0.1, &s).is_err());
    }

    #[test]
    fn zf_bound_examples() {
        let s = sc(100, 10, 1.0, 0.01);
        assert_relative_eq!(zf_expected_lower_bound(&s), 9.1, max_relative = 1e-14);
        assert_relative_eq!(zf_ideal_expected(&s), 9.1, max_relative = 1e-14);
        assert_eq!(zf_expected_lower_bound(&sc(100, 10, 0.0, 0.01)), 0.0);
    }

    #[test]
    fn gain_limits() {
        let s = sc(64, 8, 0.9, 0.05);
        assert_eq!(gain_zf_cb(0.0, &s).unwrap(), 1.0);
        // Noise-limited: G -> 1 - z.
        assert_relative_eq!(
            gain_zf_cb(0.1, &sc(64, 8, 0.9, 1e9)).unwrap(),
            0.9,
            max_relative = 1e-6
        );
        // Interference-limited with α -> 1: G -> (1-z)²/(1-α²).
        let g: Vec<f64> = [0.9, 0.99, 0.999]
            .iter()
            .map(|&a| gain_zf_cb(0.19, &sc(64, 8, a, 1e-9)).unwrap())
            .collect();
        assert!(g[0] < g[1] && g[1] < g[2] && g[2] > 300.0);
        assert!(gain_zf_cb(1.0, &s).is_err());
    }

    #[test]
    fn asymptotic_gain() {
        // Matches the pointwise gain at z = (K-1)/N.
        let s = sc(128, 16, 0.8, 0.1);
        assert_relative_eq!(
            gain_zf_cb_asymptotic(&s),
            gain_zf_cb(15.0 / 128.0, &s).unwrap(),
            max_relative = 1e-13
        );
        // (N-K+1)² = N² + (K-1)(K-1-2N).
        let (n, k) = (128.0f64, 16.0f64);
        assert_relative_eq!(
            (n - k + 1.0).powi(2),
            n * n + (k - 1.0) * (k - 1.0 - 2.0 * n)
        );
        assert_eq!(gain_zf_cb_asymptotic(&sc(8, 9, 0.8, 0.1)), 0.0);
    }

    #[test]
    fn ideal_expected_single_user() {
        assert_relative_eq!(
            zf_ideal_expected(&sc(32, 1, 1.0, 0.125)),
            8.0,
            max_relative = 1e-14
        );
    }
}
