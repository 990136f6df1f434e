//! Points of the complex Grassmann manifold G(k, n), Haar-uniform sampling,
//! canonical angles and the projective-F / projective-2 distances.
//!
//! A point is stored as one orthonormal representative `V` (n×k,
//! `VᴴV = I_k`); any `V·U` with `U` a k×k unitary is the same point.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Max-entry tolerance on `VᴴV - I` accepted by [`GrassmannPoint::from_basis`].
pub const ORTHONORMALITY_TOL: f64 = 1e-12;

/// One draw from CN(0, 1): real and imaginary parts each N(0, 1/2).
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// An n×k matrix with i.i.d. CN(0, 1) entries, filled column-major.
pub fn ginibre<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> CMatrix {
    let mut m = CMatrix::zeros(n, k);
    for j in 0..k {
        for i in 0..n {
            m[(i, j)] = complex_normal(rng);
        }
    }
    m
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrassmannPoint {
    basis: CMatrix,
}

impl GrassmannPoint {
    /// Wraps an orthonormal basis. Rejects `k = 0`, `k > n`, and bases whose
    /// Gram matrix is off the identity by more than [`ORTHONORMALITY_TOL`].
    pub fn from_basis(basis: CMatrix) -> Result<Self> {
        let (n, k) = basis.shape();
        if k == 0 || k > n {
            return Err(invalid(format!("need 1 <= k <= n, got n={n}, k={k}")));
        }
        let p = GrassmannPoint { basis };
        let err = p.orthonormality_error();
        if err > ORTHONORMALITY_TOL {
            return Err(invalid(format!(
                "basis is not orthonormal (max |VᴴV - I| = {err:e})"
            )));
        }
        Ok(p)
    }

    /// `v / ‖v‖` as a point of G(1, n).
    pub fn from_vector(v: &[Complex64]) -> Result<Self> {
        let m = CMatrix::from_column_slice(v.len(), 1, v);
        let norm = m.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(invalid("cannot normalize a zero or non-finite vector"));
        }
        Self::from_basis(m.unscale(norm))
    }

    pub(crate) fn from_basis_unchecked(basis: CMatrix) -> Self {
        GrassmannPoint { basis }
    }

    pub fn n(&self) -> usize {
        self.basis.nrows()
    }

    pub fn k(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn into_basis(self) -> CMatrix {
        self.basis
    }

    pub fn orthonormality_error(&self) -> f64 {
        let gram = self.basis.adjoint() * &self.basis;
        let k = self.k();
        let mut worst = 0.0_f64;
        for i in 0..k {
            for j in 0..k {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    /// Orthogonal projector `V Vᴴ` onto the subspace.
    pub fn projector(&self) -> CMatrix {
        &self.basis * self.basis.adjoint()
    }

    /// The same subspace under a different representative `V·U`.
    pub fn with_right_factor(&self, u: &CMatrix) -> Result<Self> {
        if u.shape() != (self.k(), self.k()) {
            return Err(Error::DimensionMismatch(format!(
                "right factor must be {k}×{k}",
                k = self.k()
            )));
        }
        Self::from_basis(&self.basis * u)
    }

    /// The subspace moved by an ambient n×n unitary `U·V`.
    pub fn transformed(&self, u: &CMatrix) -> Result<Self> {
        if u.shape() != (self.n(), self.n()) {
            return Err(Error::DimensionMismatch(format!(
                "ambient transform must be {n}×{n}",
                n = self.n()
            )));
        }
        Self::from_basis(u * &self.basis)
    }
}

/// Haar-uniform point of G(k, n): thin QR of a Ginibre draw with the phases
/// of `R`'s diagonal rotated into `Q` so that `R` has a positive real
/// diagonal. `k = n` gives a Haar-uniform unitary.
pub fn sample_uniform<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<GrassmannPoint> {
    if k == 0 || k > n {
        return Err(invalid(format!("need 1 <= k <= n, got n={n}, k={k}")));
    }
    let a = ginibre(n, k, rng);
    if k == 1 {
        let norm = a.norm();
        return Ok(GrassmannPoint::from_basis_unchecked(a.unscale(norm)));
    }
    let qr = a.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..k {
        let d = r[(j, j)];
        let mag = d.norm();
        if mag > 0.0 {
            let phase = d / mag;
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
    }
    Ok(GrassmannPoint::from_basis_unchecked(q))
}

/// Canonical angles, sorted so that `sin²θ₁ ≥ … ≥ sin²θ_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalAngles {
    angles: Vec<f64>,
}

impl CanonicalAngles {
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn k(&self) -> usize {
        self.angles.len()
    }

    pub fn sin_squared(&self) -> impl Iterator<Item = f64> + '_ {
        self.angles.iter().map(|t| {
            let s = t.sin();
            s * s
        })
    }

    /// Projective-F distance `sqrt(sum sin²θ_i)`.
    pub fn projective_f(&self) -> f64 {
        self.sin_squared().sum::<f64>().sqrt()
    }

    /// Projective-2 distance `max sinθ_i`.
    pub fn projective_2(&self) -> f64 {
        self.angles.first().map_or(0.0, |t| t.sin())
    }
}

fn check_same_manifold(p1: &GrassmannPoint, p2: &GrassmannPoint) -> Result<()> {
    if p1.n() != p2.n() || p1.k() != p2.k() {
        return Err(Error::DimensionMismatch(format!(
            "G({}, {}) vs G({}, {})",
            p1.k(),
            p1.n(),
            p2.k(),
            p2.n()
        )));
    }
    Ok(())
}

/// Canonical angles from the singular values of `V₁ᴴV₂` (cosines) and of
/// `(I - V₁V₁ᴴ)V₂` (sines). Each angle takes the arcsine when its sine is
/// below `1/√2` and the arccosine otherwise, so small angles keep full
/// relative accuracy.
pub fn canonical_angles(p1: &GrassmannPoint, p2: &GrassmannPoint) -> Result<CanonicalAngles> {
    check_same_manifold(p1, p2)?;
    let cross = p1.basis.adjoint() * &p2.basis;
    let residual = &p2.basis - &p1.basis * &cross;
    let mut cosines = singular_values(&cross);
    let mut sines = singular_values(&residual);
    cosines.sort_by(f64::total_cmp);
    sines.sort_by(|a, b| b.total_cmp(a));
    let angles = sines
        .iter()
        .zip(&cosines)
        .map(|(&s, &c)| {
            let s = s.clamp(0.0, 1.0);
            if s * s < 0.5 {
                s.asin()
            } else {
                c.clamp(0.0, 1.0).acos()
            }
        })
        .collect();
    Ok(CanonicalAngles { angles })
}

fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.ncols() == 1 {
        return vec![m.norm()];
    }
    m.singular_values().iter().copied().collect()
}

pub fn distance_pf(p1: &GrassmannPoint, p2: &GrassmannPoint) -> Result<f64> {
    Ok(canonical_angles(p1, p2)?.projective_f())
}

pub fn distance_p2(p1: &GrassmannPoint, p2: &GrassmannPoint) -> Result<f64> {
    Ok(canonical_angles(p1, p2)?.projective_2())
}

/// One CSV row per point: `n,k`, then `re,im` pairs of the basis in
/// column-major order.
pub fn write_points_csv<W: Write>(mut out: W, points: &[GrassmannPoint]) -> Result<()> {
    for p in points {
        write!(out, "{},{}", p.n(), p.k())?;
        for z in p.basis.iter() {
            write!(out, ",{:e},{:e}", z.re, z.im)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_6};

    fn coordinate_block(n: usize, cols: std::ops::Range<usize>) -> GrassmannPoint {
        let k = cols.len();
        let mut m = CMatrix::zeros(n, k);
        for (j, c) in cols.enumerate() {
            m[(c, j)] = Complex64::new(1.0, 0.0);
        }
        GrassmannPoint::from_basis(m).unwrap()
    }

    #[test]
    fn sampling_is_deterministic_and_orthonormal() {
        let a = sample_uniform(6, 3, &mut SeededRng::new(11, 2)).unwrap();
        let b = sample_uniform(6, 3, &mut SeededRng::new(11, 2)).unwrap();
        assert_eq!(a, b);
        assert!(a.orthonormality_error() < 1e-13);
    }

    #[test]
    fn full_dimension_is_a_single_point() {
        let mut rng = SeededRng::new(1, 0);
        let a = sample_uniform(2, 2, &mut rng).unwrap();
        let b = sample_uniform(2, 2, &mut rng).unwrap();
        assert_abs_diff_eq!(distance_pf(&a, &b).unwrap(), 0.0, epsilon = 1e-7);
        assert_abs_diff_eq!(distance_p2(&a, &b).unwrap(), 0.0, epsilon = 1e-7);
    }

    #[test]
    fn equivalent_representatives_have_zero_angles() {
        let mut rng = SeededRng::new(5, 9);
        let v = sample_uniform(7, 3, &mut rng).unwrap();
        let u = sample_uniform(3, 3, &mut rng).unwrap().into_basis();
        let w = v.with_right_factor(&u).unwrap();
        let th = canonical_angles(&v, &w).unwrap();
        assert!(th.sin_squared().all(|s| s < 1e-20));
        assert_abs_diff_eq!(distance_pf(&v, &w).unwrap(), 0.0, epsilon = 1e-7);
        assert_abs_diff_eq!(distance_p2(&v, &w).unwrap(), 0.0, epsilon = 1e-7);
    }

    #[test]
    fn orthogonal_planes() {
        let a = coordinate_block(6, 0..3);
        let b = coordinate_block(6, 3..6);
        let th = canonical_angles(&a, &b).unwrap();
        for t in th.angles() {
            assert_abs_diff_eq!(*t, FRAC_PI_2, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(distance_pf(&a, &b).unwrap(), 3f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(distance_p2(&a, &b).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn single_angle_from_inner_product() {
        let v1 = GrassmannPoint::from_vector(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)])
            .unwrap();
        let v2 = GrassmannPoint::from_vector(&[
            Complex64::new(FRAC_PI_6.cos(), 0.0),
            Complex64::new(FRAC_PI_6.sin(), 0.0),
        ])
        .unwrap();
        let th = canonical_angles(&v1, &v2).unwrap();
        assert_abs_diff_eq!(th.angles()[0], FRAC_PI_6, epsilon = 1e-12);
    }

    #[test]
    fn angles_sorted_and_in_range() {
        let mut rng = SeededRng::new(3, 3);
        for _ in 0..50 {
            let a = sample_uniform(8, 3, &mut rng).unwrap();
            let b = sample_uniform(8, 3, &mut rng).unwrap();
            let th = canonical_angles(&a, &b).unwrap();
            let s: Vec<f64> = th.sin_squared().collect();
            assert!(s.windows(2).all(|w| w[0] >= w[1]));
            assert!(th.angles().iter().all(|t| (0.0..=FRAC_PI_2).contains(t)));
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let mut rng = SeededRng::new(1, 1);
        let a = sample_uniform(5, 2, &mut rng).unwrap();
        let b = sample_uniform(6, 2, &mut rng).unwrap();
        let c = sample_uniform(5, 1, &mut rng).unwrap();
        assert!(matches!(
            canonical_angles(&a, &b),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            distance_pf(&a, &c),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            distance_p2(&c, &a),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn invalid_shapes_and_bases() {
        let mut rng = SeededRng::new(1, 1);
        assert!(sample_uniform(3, 4, &mut rng).is_err());
        assert!(sample_uniform(3, 0, &mut rng).is_err());
        let mut m = CMatrix::zeros(3, 1);
        m[(0, 0)] = Complex64::new(2.0, 0.0);
        assert!(GrassmannPoint::from_basis(m).is_err());
        assert!(GrassmannPoint::from_vector(&[Complex64::new(0.0, 0.0)]).is_err());
    }

    #[test]
    fn csv_row_layout() {
        let p = GrassmannPoint::from_vector(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)])
            .unwrap();
        let mut buf = Vec::new();
        write_points_csv(&mut buf, &[p]).unwrap();
        let line = String::from_utf8(buf).unwrap();
        let fields: Vec<&str> = line.trim().split(',').collect();
        assert_eq!(fields.len(), 2 + 4);
        assert_eq!(&fields[..2], &["2", "1"]);
        assert_eq!(fields[2].parse::<f64>().unwrap(), 1.0);
    }
}
