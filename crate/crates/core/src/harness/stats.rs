use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::volume::Metric;

/// One `(N, K, α, SINR^SU)` configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub n_antennas: usize,
    pub n_users: usize,
    pub alpha: f64,
    pub sinr_su_db: f64,
}

/// Aggregated Monte Carlo statistics at one grid point.
///
/// `mean_db`/`std_db` describe the per-trial error in dB (estimate minus
/// real). For expectation experiments `mean_db` is the gap between the
/// closed form and the empirical mean real SINR, both in dB, and `std_db`
/// is the spread of the real SINR in dB. The linear fields keep the raw
/// averages for re-analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub grid_point: GridPoint,
    pub mean_db: f64,
    pub std_db: f64,
    pub n_trials: usize,
    pub std_error_db: f64,
    /// Trials dropped because a precoder or estimator failed.
    pub excluded: usize,
    /// Mean of the estimate (or the closed-form value), linear.
    pub estimate_mean: f64,
    /// Mean of the ground truth, linear.
    pub real_mean: f64,
    /// Standard error of `real_mean`.
    pub real_se: f64,
}

/// Sample mean and standard deviation (n - 1 denominator), summed in order.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

/// A CDF sampled on sorted abscissae.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfSeries {
    pub deltas: Vec<f64>,
    pub values: Vec<f64>,
}

impl CdfSeries {
    /// Empirical CDF of `samples` at `deltas`; sorts `samples` in place.
    pub fn empirical(samples: &mut [f64], deltas: &[f64]) -> Self {
        samples.sort_by(f64::total_cmp);
        let n = samples.len() as f64;
        let values = deltas
            .iter()
            .map(|&d| samples.partition_point(|&x| x <= d) as f64 / n)
            .collect();
        CdfSeries {
            deltas: deltas.to_vec(),
            values,
        }
    }
}

/// `max |a - b|` over shared abscissae.
pub fn ks_sup_deviation(a: &CdfSeries, b: &CdfSeries) -> Result<f64> {
    if a.deltas.len() != a.values.len() || b.deltas.len() != b.values.len() {
        return Err(invalid("CDF series has mismatched abscissae and values"));
    }
    if a.deltas != b.deltas {
        return Err(invalid("CDF series are sampled on different abscissae"));
    }
    Ok(a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfTable {
    pub k: u32,
    pub n: u32,
    pub metric: Metric,
    pub n_trials: usize,
    pub deltas: Vec<f64>,
    pub empirical: Vec<f64>,
    pub closed_form: Vec<f64>,
    pub sup_deviation: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sup_deviation_examples() {
        let d = vec![0.1, 0.5, 0.9];
        let a = CdfSeries {
            deltas: d.clone(),
            values: vec![0.1, 0.5, 0.9],
        };
        assert_eq!(ks_sup_deviation(&a, &a).unwrap(), 0.0);
        let b = CdfSeries {
            deltas: d,
            values: vec![0.12, 0.52, 0.92],
        };
        assert!((ks_sup_deviation(&a, &b).unwrap() - 0.02).abs() < 1e-15);
        let c = CdfSeries {
            deltas: vec![0.1, 0.5],
            values: vec![0.1, 0.5],
        };
        assert!(ks_sup_deviation(&a, &c).is_err());
    }

    #[test]
    fn empirical_cdf_counts_ties() {
        let mut xs = vec![0.3, 0.1, 0.2, 0.2];
        let e = CdfSeries::empirical(&mut xs, &[0.0, 0.2, 0.25, 1.0]);
        assert_eq!(e.values, vec![0.0, 0.75, 0.75, 1.0]);
    }

    #[test]
    fn moments() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!(mean_std(&[]).0.is_nan());
    }
}
