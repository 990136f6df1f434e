use std::fmt;
use std::str::FromStr;

use nalgebra::Cholesky;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ChannelSet, MimoScenario, SinrReport};
use crate::error::{invalid, Error, Result};
use crate::grassmann::CMatrix;

/// Squared residual below which a user's reported direction is treated as
/// lying in the span of the others.
const SINGULAR_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrecoderKind {
    Cb,
    ZfFull,
    ZfNpa,
}

impl PrecoderKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PrecoderKind::Cb => "cb",
            PrecoderKind::ZfFull => "zf",
            PrecoderKind::ZfNpa => "zf-npa",
        }
    }
}

impl fmt::Display for PrecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PrecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cb" => Ok(PrecoderKind::Cb),
            "zf" | "zf-full" => Ok(PrecoderKind::ZfFull),
            "zf-npa" => Ok(PrecoderKind::ZfNpa),
            other => Err(invalid(format!("unknown precoder {other:?}"))),
        }
    }
}

/// Unit-norm beam directions `w_i / ‖w_i‖` (columns) with the shared
/// amplitude `√(1/K)`.
#[derive(Debug, Clone)]
pub struct Precoder {
    kind: PrecoderKind,
    vectors: CMatrix,
}

impl Precoder {
    pub fn kind(&self) -> PrecoderKind {
        self.kind
    }

    pub fn vectors(&self) -> &CMatrix {
        &self.vectors
    }

    pub fn power_scale(&self) -> f64 {
        (1.0 / self.vectors.ncols() as f64).sqrt()
    }
}

pub fn precode(kind: PrecoderKind, cs: &ChannelSet) -> Result<Precoder> {
    match kind {
        PrecoderKind::Cb => Ok(precode_cb(cs)),
        PrecoderKind::ZfFull => precode_zf_full(cs),
        PrecoderKind::ZfNpa => precode_zf_npa(cs),
    }
}

/// `w_i ∝ v_i`.
pub fn precode_cb(cs: &ChannelSet) -> Precoder {
    Precoder {
        kind: PrecoderKind::Cb,
        vectors: cs.reported_directions().clone(),
    }
}

/// `w_i ∝ (I - H̃ᴴ(H̃H̃ᴴ)⁻¹H̃) v_i`, where `H̃` stacks the other users'
/// reported directions.
///
/// Computed for all users at once as the columns of `V (VᴴV)⁻¹`: column `i`
/// is orthogonal to every `v_j`, `j != i`, and lies in the span of `V`, so it
/// is collinear with the projection above.
pub fn precode_zf_full(cs: &ChannelSet) -> Result<Precoder> {
    let v = cs.reported_directions();
    let gram = v.adjoint() * v;
    let chol =
        Cholesky::new(gram).ok_or_else(|| singular("Gram matrix is not positive definite"))?;
    let l = chol.l_dirty();
    for i in 0..v.ncols() {
        // l_ii² is the squared distance of v_i from the span of v_0..v_{i-1}.
        if l[(i, i)].norm_sqr() < SINGULAR_TOL {
            return Err(singular(
                "reported directions are nearly linearly dependent",
            ));
        }
    }
    let mut w = v * chol.inverse();
    normalize_columns(&mut w, "zero-forcing")?;
    Ok(Precoder {
        kind: PrecoderKind::ZfFull,
        vectors: w,
    })
}

/// `w_i ∝ (I - H̃ᴴH̃) v_i = v_i - Σ_{j≠i} v_j (v_jᴴ v_i)`, i.e. the full
/// projection with the Gram inverse replaced by the identity.
pub fn precode_zf_npa(cs: &ChannelSet) -> Result<Precoder> {
    let v = cs.reported_directions();
    let mut off = v.adjoint() * v;
    off.fill_diagonal(Complex64::new(0.0, 0.0));
    let mut w = v - v * off;
    normalize_columns(&mut w, "approximate zero-forcing")?;
    Ok(Precoder {
        kind: PrecoderKind::ZfNpa,
        vectors: w,
    })
}

fn singular(msg: &str) -> Error {
    Error::Singular(msg.to_string())
}

fn normalize_columns(w: &mut CMatrix, what: &str) -> Result<()> {
    for mut col in w.column_iter_mut() {
        let norm = col.norm();
        if !(norm > 1e-12) || !norm.is_finite() {
            return Err(singular(&format!("{what} projection has zero norm")));
        }
        col.unscale_mut(norm);
    }
    Ok(())
}

/// `|u_iᴴ w_j|²` for all `(i, j)`.
pub fn coupling_powers(cs: &ChannelSet, p: &Precoder) -> Result<nalgebra::DMatrix<f64>> {
    let u = cs.true_directions();
    let w = p.vectors();
    if u.shape() != w.shape() {
        return Err(Error::DimensionMismatch(format!(
            "channels {:?} vs precoder {:?}",
            u.shape(),
            w.shape()
        )));
    }
    Ok((u.adjoint() * w).map(|c| c.norm_sqr()))
}

/// Ground-truth SINR of every user under precoder `p`:
///
/// `SINR_i = ‖h_i‖²|u_iᴴw_i|²/K / (Σ_{j≠i} ‖h_i‖²|u_iᴴw_j|²/K + σ_i²)`
///
/// with `σ_i² = ‖h_i‖² / SINR^SU`, which reduces to
/// `|u_iᴴw_i|² / (Σ_{j≠i}|u_iᴴw_j|² + Kγ)`.
pub fn real_sinr(cs: &ChannelSet, p: &Precoder, s: &MimoScenario) -> Result<SinrReport> {
    if cs.n_users() != s.n_users || cs.n_antennas() != s.n_antennas {
        return Err(Error::DimensionMismatch(format!(
            "channel set is {}x{}, scenario N={}, K={}",
            cs.n_antennas(),
            cs.n_users(),
            s.n_antennas,
            s.n_users
        )));
    }
    let c = coupling_powers(cs, p)?;
    let floor = s.k_gamma();
    let per_user = (0..cs.n_users())
        .map(|i| {
            let row = c.row(i);
            let signal = row[i];
            let interference = row.sum() - signal;
            signal / (interference.max(0.0) + floor)
        })
        .collect();
    Ok(SinrReport::new(per_user))
}
