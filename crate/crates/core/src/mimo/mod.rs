//! Single-cell MU-MIMO downlink with single-antenna users and imperfect
//! channel direction feedback.
//!
//! Vectors are columns: the true direction of user `i` is `u_i`, the reported
//! one `v_i`, and their correlation is `|u_iᴴ v_i| = α`. Noise plus
//! inter-cell interference is normalized away through `γ = 1 / SINR^SU`
//! with total transmit power 1.

pub mod estimators;
pub mod precoding;

pub use estimators::*;
pub use precoding::*;

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grassmann::{complex_normal, CMatrix};

/// Tolerance on `|u_iᴴ v_i| - α` after construction.
pub const CORRELATION_TOL: f64 = 1e-10;

pub fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn from_db(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MimoScenario {
    /// Base-station antennas `N`.
    pub n_antennas: usize,
    /// Co-scheduled users `K`.
    pub n_users: usize,
    pub alpha: f64,
    /// Linear SU-MIMO SINR; `f64::INFINITY` means `γ = 0`.
    pub sinr_su: f64,
}

impl MimoScenario {
    /// Validated scenario. `K = 1` is admitted as the degenerate
    /// single-user case.
    pub fn new(n_antennas: usize, n_users: usize, alpha: f64, sinr_su: f64) -> Result<Self> {
        let s = MimoScenario {
            n_antennas,
            n_users,
            alpha,
            sinr_su,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_sinr_db(
        n_antennas: usize,
        n_users: usize,
        alpha: f64,
        sinr_su_db: f64,
    ) -> Result<Self> {
        Self::new(n_antennas, n_users, alpha, from_db(sinr_su_db))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_users == 0 || self.n_users > self.n_antennas {
            return Err(invalid(format!(
                "need 1 <= K <= N, got K={}, N={}",
                self.n_users, self.n_antennas
            )));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(invalid(format!(
                "alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        if !(self.sinr_su > 0.0) {
            return Err(invalid(format!(
                "sinr_su must be positive, got {}",
                self.sinr_su
            )));
        }
        Ok(())
    }

    pub fn gamma(&self) -> f64 {
        1.0 / self.sinr_su
    }

    /// `Kγ`, the per-user noise floor after the equal power split.
    pub fn k_gamma(&self) -> f64 {
        self.n_users as f64 * self.gamma()
    }
}

#[derive(Debug, Clone)]
pub struct ChannelSet {
    true_directions: CMatrix,
    reported_directions: CMatrix,
    channel_gains: Vec<f64>,
    alpha: f64,
}

impl ChannelSet {
    /// Builds a channel set from explicit channel vectors (columns of `h`)
    /// and reported directions (columns of `v`, normalized here). `alpha`
    /// is read off the first user.
    pub fn from_channels(h: &CMatrix, v: &CMatrix) -> Result<Self> {
        if h.shape() != v.shape() || h.ncols() == 0 {
            return Err(crate::Error::DimensionMismatch(format!(
                "channels {:?} vs reported {:?}",
                h.shape(),
                v.shape()
            )));
        }
        let mut u = h.clone();
        let mut rep = v.clone();
        let mut gains = Vec::with_capacity(h.ncols());
        for i in 0..h.ncols() {
            let g = h.column(i).norm();
            let r = v.column(i).norm();
            if g == 0.0 || r == 0.0 {
                return Err(invalid(format!("zero channel or report for user {i}")));
            }
            u.column_mut(i).unscale_mut(g);
            rep.column_mut(i).unscale_mut(r);
            gains.push(g);
        }
        let alpha = u.column(0).dotc(&rep.column(0)).norm();
        Ok(ChannelSet {
            true_directions: u,
            reported_directions: rep,
            channel_gains: gains,
            alpha,
        })
    }

    pub fn n_antennas(&self) -> usize {
        self.true_directions.nrows()
    }

    pub fn n_users(&self) -> usize {
        self.true_directions.ncols()
    }

    /// Columns `u_i`.
    pub fn true_directions(&self) -> &CMatrix {
        &self.true_directions
    }

    /// Columns `v_i`.
    pub fn reported_directions(&self) -> &CMatrix {
        &self.reported_directions
    }

    /// `‖h_i‖`.
    pub fn channel_gains(&self) -> &[f64] {
        &self.channel_gains
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `|v_iᴴ v_j|²` for every `j != i`, in user order.
    pub fn cross_powers(&self, i: usize) -> Vec<f64> {
        let v = &self.reported_directions;
        let vi = v.column(i);
        (0..self.n_users())
            .filter(|&j| j != i)
            .map(|j| vi.dotc(&v.column(j)).norm_sqr())
            .collect()
    }

    /// `z_i = Σ_{j≠i} |v_iᴴ v_j|²`.
    pub fn cross_power_sum(&self, i: usize) -> f64 {
        self.cross_powers(i).iter().sum()
    }
}

/// Draws `h_i ~ CN(0, I_N)` and a reported direction
/// `v_i = α e^{jφ₁} u_i + √(1-α²) e^{jφ₂} q_i`, with `q_i` uniform on the unit
/// sphere of `u_i`'s orthogonal complement.
pub fn sample_channel_set<R: Rng + ?Sized>(s: &MimoScenario, rng: &mut R) -> Result<ChannelSet> {
    s.validate()?;
    let (n, k) = (s.n_antennas, s.n_users);
    let mut u = CMatrix::zeros(n, k);
    let mut v = CMatrix::zeros(n, k);
    let mut gains = Vec::with_capacity(k);
    let beta = (1.0 - s.alpha * s.alpha).max(0.0).sqrt();
    for i in 0..k {
        let h = DVector::from_fn(n, |_, _| complex_normal(rng));
        let g = h.norm();
        let ui = h.unscale(g);

        let mut q = DVector::from_fn(n, |_, _| complex_normal(rng));
        let overlap = ui.dotc(&q);
        q -= &ui * overlap;
        let qn = q.norm();
        q.unscale_mut(qn);

        let phi1 = Complex64::from_polar(1.0, 2.0 * PI * rng.random::<f64>());
        let phi2 = Complex64::from_polar(1.0, 2.0 * PI * rng.random::<f64>());
        let mut vi = &ui * (phi1 * s.alpha) + &q * (phi2 * beta);
        // Rounding only; the two parts are orthonormal.
        let vn = vi.norm();
        vi.unscale_mut(vn);

        u.set_column(i, &ui);
        v.set_column(i, &vi);
        gains.push(g);
    }
    Ok(ChannelSet {
        true_directions: u,
        reported_directions: v,
        channel_gains: gains,
        alpha: s.alpha,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SinrReport {
    pub per_user_linear: Vec<f64>,
    /// Users whose estimate was negative and clamped to 0.
    pub clamped: Vec<usize>,
}

impl SinrReport {
    pub fn new(per_user_linear: Vec<f64>) -> Self {
        SinrReport {
            per_user_linear,
            clamped: Vec::new(),
        }
    }

    pub fn per_user_db(&self) -> Vec<f64> {
        self.per_user_linear.iter().map(|&x| db(x)).collect()
    }
}
