//! C ABI over `grassmimo`.
//!
//! Every fallible call returns a [`GmStatus`]; on failure the message is kept
//! per thread and read back with [`gm_last_error_message`]. Points and RNG
//! streams are opaque heap handles released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, c_int};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use grassmimo::grassmann::CMatrix;
use grassmimo::mimo::{estimators, MimoScenario};
use grassmimo::{special, Error, GrassmannPoint, Metric, SeededRng, VolumeQuery};
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GmStatus {
    Ok = 0,
    InvalidArgument = 1,
    Unsupported = 2,
    DimensionMismatch = 3,
    Singular = 4,
    Unrepresentable = 5,
    NullPointer = 6,
    BufferTooSmall = 7,
    Internal = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GmMetric {
    ProjectiveF = 0,
    Projective2 = 1,
}

/// Downlink scenario. `sinr_su_db` is the SU-MIMO SINR in dB.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GmScenario {
    pub n_antennas: usize,
    pub n_users: usize,
    pub alpha: f64,
    pub sinr_su_db: f64,
}

/// Seeded random stream.
pub struct GmRng(SeededRng);

/// Point of G(k, n).
pub struct GmPoint(GrassmannPoint);

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_last_error(msg: &str) {
    LAST_ERROR.with(|e| {
        let mut e = e.borrow_mut();
        e.clear();
        e.extend(msg.bytes().filter(|&b| b != 0));
    });
}

fn fail(status: GmStatus, msg: &str) -> GmStatus {
    set_last_error(msg);
    status
}

fn status_of(err: &Error) -> GmStatus {
    match err {
        Error::InvalidArgument(_) => GmStatus::InvalidArgument,
        Error::Unsupported(_) => GmStatus::Unsupported,
        Error::DimensionMismatch(_) => GmStatus::DimensionMismatch,
        Error::Singular(_) => GmStatus::Singular,
        Error::Unrepresentable(_) => GmStatus::Unrepresentable,
        _ => GmStatus::Internal,
    }
}

/// Runs `f`, mapping errors and panics to a status.
fn guard(f: impl FnOnce() -> Result<(), GmStatus>) -> GmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GmStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(GmStatus::Internal, "panic inside grassmimo"),
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, GmStatus>;
}

impl<T> OrStatus<T> for grassmimo::Result<T> {
    fn or_status(self) -> Result<T, GmStatus> {
        self.map_err(|e| fail(status_of(&e), &e.to_string()))
    }
}

fn out_ref<'a, T>(p: *mut T) -> Result<&'a mut T, GmStatus> {
    // SAFETY: callers pass either null or a valid, writable pointer.
    unsafe { p.as_mut() }.ok_or_else(|| fail(GmStatus::NullPointer, "null output pointer"))
}

fn point_ref<'a>(p: *const GmPoint) -> Result<&'a GrassmannPoint, GmStatus> {
    // SAFETY: non-null handles come from gm_point_* constructors.
    unsafe { p.as_ref() }
        .map(|p| &p.0)
        .ok_or_else(|| fail(GmStatus::NullPointer, "null point handle"))
}

fn write_f64(out: *mut f64, value: grassmimo::Result<f64>) -> GmStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = value.or_status()?;
        Ok(())
    })
}

fn scenario(s: &GmScenario) -> Result<MimoScenario, GmStatus> {
    MimoScenario::with_sinr_db(s.n_antennas, s.n_users, s.alpha, s.sinr_su_db).or_status()
}

fn with_scenario(
    s: *const GmScenario,
    out: *mut f64,
    f: impl FnOnce(&MimoScenario) -> grassmimo::Result<f64>,
) -> GmStatus {
    guard(|| {
        // SAFETY: null or a valid scenario pointer.
        let s =
            unsafe { s.as_ref() }.ok_or_else(|| fail(GmStatus::NullPointer, "null scenario"))?;
        let s = scenario(s)?;
        let out = out_ref(out)?;
        *out = f(&s).or_status()?;
        Ok(())
    })
}

/// NUL-terminated library version.
#[no_mangle]
pub extern "C" fn gm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Length in bytes of the last error message on this thread, excluding NUL.
#[no_mangle]
pub extern "C" fn gm_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().len())
}

/// Copies the last error message into `buf` with a trailing NUL and returns
/// the number of bytes written excluding the NUL, or -1 if `buf` is null or
/// shorter than `gm_last_error_length() + 1`.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn gm_last_error_message(buf: *mut c_char, len: usize) -> c_int {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        if buf.is_null() || len < e.len() + 1 {
            return -1;
        }
        ptr::copy_nonoverlapping(e.as_ptr().cast(), buf, e.len());
        *buf.add(e.len()) = 0;
        e.len() as c_int
    })
}

/// Normalized hyperball volume on G(k, n), i.e. the CDF of the distance
/// between two uniform points.
///
/// # Safety
/// `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn gm_volume(
    k: u32,
    n: u32,
    delta: f64,
    metric: GmMetric,
    out: *mut f64,
) -> GmStatus {
    let metric = match metric {
        GmMetric::ProjectiveF => Metric::ProjectiveF,
        GmMetric::Projective2 => Metric::Projective2,
    };
    write_f64(
        out,
        grassmimo::volume(VolumeQuery::new(k, n, delta, metric)),
    )
}

/// B(m, n).
///
/// # Safety
/// `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn gm_beta(m: u32, n: u32, out: *mut f64) -> GmStatus {
    write_f64(out, special::beta(m, n))
}

/// ∫₀^α x^{m−1}(1−x)^{n−1} dx.
///
/// # Safety
/// `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn gm_incomplete_beta(alpha: f64, m: u32, n: u32, out: *mut f64) -> GmStatus {
    write_f64(out, special::incomplete_beta(alpha, m, n))
}

/// # Safety
/// `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn gm_regularized_incomplete_beta(
    alpha: f64,
    m: u32,
    n: u32,
    out: *mut f64,
) -> GmStatus {
    write_f64(out, special::regularized_incomplete_beta(alpha, m, n))
}

/// B(½, m, n) − B(α, m, n).
///
/// # Safety
/// `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn gm_incomplete_beta_difference(
    alpha: f64,
    m: u32,
    n: u32,
    out: *mut f64,
) -> GmStatus {
    write_f64(out, special::incomplete_beta_difference(alpha, m, n))
}

/// New stream; never returns null.
#[no_mangle]
pub extern "C" fn gm_rng_new(master_seed: u64, stream_id: u64) -> *mut GmRng {
    Box::into_raw(Box::new(GmRng(SeededRng::new(master_seed, stream_id))))
}

/// # Safety
/// `rng` must be null or a handle from [`gm_rng_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gm_rng_free(rng: *mut GmRng) {
    if !rng.is_null() {
        drop(Box::from_raw(rng));
    }
}

/// Haar-uniform point of G(k, n) drawn from `rng`.
///
/// # Safety
/// `rng` must be a live handle and `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn gm_point_sample(
    rng: *mut GmRng,
    n: usize,
    k: usize,
    out: *mut *mut GmPoint,
) -> GmStatus {
    guard(|| {
        let out = out_ref(out)?;
        let rng = rng
            .as_mut()
            .ok_or_else(|| fail(GmStatus::NullPointer, "null rng handle"))?;
        let p = grassmimo::sample_uniform(n, k, &mut rng.0).or_status()?;
        *out = Box::into_raw(Box::new(GmPoint(p)));
        Ok(())
    })
}

/// Point spanned by an orthonormal n×k basis given column-major as separate
/// real and imaginary arrays of length n·k. `imag` may be null for a real
/// basis.
///
/// # Safety
/// `real` (and `imag` if non-null) must hold `n*k` doubles; `out` null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn gm_point_from_basis(
    n: usize,
    k: usize,
    real: *const f64,
    imag: *const f64,
    out: *mut *mut GmPoint,
) -> GmStatus {
    guard(|| {
        let out = out_ref(out)?;
        if real.is_null() {
            return Err(fail(GmStatus::NullPointer, "null basis array"));
        }
        let len = n
            .checked_mul(k)
            .ok_or_else(|| fail(GmStatus::InvalidArgument, "n*k overflows"))?;
        let re = std::slice::from_raw_parts(real, len);
        let entries: Vec<Complex64> = if imag.is_null() {
            re.iter().map(|&r| Complex64::new(r, 0.0)).collect()
        } else {
            let im = std::slice::from_raw_parts(imag, len);
            re.iter()
                .zip(im)
                .map(|(&r, &i)| Complex64::new(r, i))
                .collect()
        };
        let p = GrassmannPoint::from_basis(CMatrix::from_vec(n, k, entries)).or_status()?;
        *out = Box::into_raw(Box::new(GmPoint(p)));
        Ok(())
    })
}

/// # Safety
/// `p` must be null or a live point handle.
#[no_mangle]
pub unsafe extern "C" fn gm_point_free(p: *mut GmPoint) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Ambient dimension `n`, or 0 for a null handle.
///
/// # Safety
/// `p` must be null or a live point handle.
#[no_mangle]
pub unsafe extern "C" fn gm_point_n(p: *const GmPoint) -> usize {
    p.as_ref().map_or(0, |p| p.0.n())
}

/// Subspace dimension `k`, or 0 for a null handle.
///
/// # Safety
/// `p` must be null or a live point handle.
#[no_mangle]
pub unsafe extern "C" fn gm_point_k(p: *const GmPoint) -> usize {
    p.as_ref().map_or(0, |p| p.0.k())
}

/// Copies the stored basis, column-major, into `real` and `imag`, each of
/// length at least `len`.
///
/// # Safety
/// `real` and `imag` must each hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn gm_point_basis(
    p: *const GmPoint,
    real: *mut f64,
    imag: *mut f64,
    len: usize,
) -> GmStatus {
    guard(|| {
        let p = point_ref(p)?;
        if real.is_null() || imag.is_null() {
            return Err(fail(GmStatus::NullPointer, "null output array"));
        }
        let b = p.basis();
        if len < b.len() {
            return Err(fail(
                GmStatus::BufferTooSmall,
                &format!("need {} entries", b.len()),
            ));
        }
        for (i, z) in b.iter().enumerate() {
            *real.add(i) = z.re;
            *imag.add(i) = z.im;
        }
        Ok(())
    })
}

/// Canonical angles in radians, largest first. Writes their count to `count`.
///
/// # Safety
/// `angles` must hold `len` writable doubles; `count` null or writable.
#[no_mangle]
pub unsafe extern "C" fn gm_canonical_angles(
    a: *const GmPoint,
    b: *const GmPoint,
    angles: *mut f64,
    len: usize,
    count: *mut usize,
) -> GmStatus {
    guard(|| {
        let ca = grassmimo::canonical_angles(point_ref(a)?, point_ref(b)?).or_status()?;
        let count = out_ref(count)?;
        let src = ca.angles();
        *count = src.len();
        if angles.is_null() {
            return Err(fail(GmStatus::NullPointer, "null output array"));
        }
        if len < src.len() {
            return Err(fail(
                GmStatus::BufferTooSmall,
                &format!("need {} entries", src.len()),
            ));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), angles, src.len());
        Ok(())
    })
}

/// √(Σ sin²θᵢ).
///
/// # Safety
/// Handles must be live; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn gm_distance_pf(
    a: *const GmPoint,
    b: *const GmPoint,
    out: *mut f64,
) -> GmStatus {
    guard(|| {
        let d = grassmimo::distance_pf(point_ref(a)?, point_ref(b)?).or_status()?;
        *out_ref(out)? = d;
        Ok(())
    })
}

/// max sinθᵢ.
///
/// # Safety
/// Handles must be live; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn gm_distance_p2(
    a: *const GmPoint,
    b: *const GmPoint,
    out: *mut f64,
) -> GmStatus {
    guard(|| {
        let d = grassmimo::distance_p2(point_ref(a)?, point_ref(b)?).or_status()?;
        *out_ref(out)? = d;
        Ok(())
    })
}

/// Closed-form expected CB SINR (linear).
///
/// # Safety
/// `s` must be null or valid; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn gm_estimate_cb_expected(s: *const GmScenario, out: *mut f64) -> GmStatus {
    with_scenario(s, out, |s| Ok(estimators::estimate_cb_expected(s)))
}

/// ZF SINR estimate from the reported cross-power sum `z` in [0, 1).
///
/// # Safety
/// `s` must be null or valid; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn gm_estimate_zf(z: f64, s: *const GmScenario, out: *mut f64) -> GmStatus {
    with_scenario(s, out, |s| estimators::estimate_zf(z, s))
}

/// Lower bound on the expected ZF SINR (linear).
///
/// # Safety
/// `s` must be null or valid; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn gm_zf_expected_lower_bound(
    s: *const GmScenario,
    out: *mut f64,
) -> GmStatus {
    with_scenario(s, out, |s| Ok(estimators::zf_expected_lower_bound(s)))
}

/// Estimated ZF-over-CB SINR gain (linear).
///
/// # Safety
/// `s` must be null or valid; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn gm_gain_zf_cb(z: f64, s: *const GmScenario, out: *mut f64) -> GmStatus {
    with_scenario(s, out, |s| estimators::gain_zf_cb(z, s))
}

/// Large-system ZF-over-CB gain (linear).
///
/// # Safety
/// `s` must be null or valid; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn gm_gain_zf_cb_asymptotic(s: *const GmScenario, out: *mut f64) -> GmStatus {
    with_scenario(s, out, |s| Ok(estimators::gain_zf_cb_asymptotic(s)))
}

/// Expected ZF SINR with perfect CSI (linear).
///
/// # Safety
/// `s` must be null or valid; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn gm_zf_ideal_expected(s: *const GmScenario, out: *mut f64) -> GmStatus {
    with_scenario(s, out, |s| Ok(estimators::zf_ideal_expected(s)))
}
