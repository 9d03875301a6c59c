//! C interface to `qwzmem`.
//!
//! Every fallible call returns a [`QwzStatus`]; on failure the message is kept
//! per thread and can be read with [`qwz_last_error_message`]. Protocols and
//! vorticity series are opaque heap handles released with their `_free`
//! function. Momenta are passed as `(kx, ky)` in radians.
//!
//! # Safety
//!
//! Pointer arguments must be null or valid for the access described: output
//! pointers writable, buffers holding at least `len` elements, handles
//! obtained from the matching `_new` call and not yet freed. Null pointers are
//! reported as [`QwzStatus::NullPointer`].
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, UnwindSafe};
use std::ptr;

use qwzmem::memory::{
    decode_joint_series, decode_quench_mass, estimate_period, flip_times, theoretical_period,
    vorticity_series, BranchHint, VorticitySeries,
};
use qwzmem::quench::{loschmidt_series, QuenchProtocol};
use qwzmem::topology::{chern_fhs, chern_patchwise, hall_conductance};
use qwzmem::{
    band_energies, ground_state_field_masked, r_vector, Error, Gauge, KGrid, MomentumPoint,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QwzStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// critical mass or closed gap
    GapClosed = 3,
    /// singular gauge, field, plaquette or loop
    Singular = 4,
    InsufficientCycles = 5,
    AmbiguousBranch = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QwzBranch {
    None = 0,
    Above = 1,
    Below = 2,
}

/// Opaque quench protocol.
pub struct QwzProtocol(QuenchProtocol);

/// Opaque vorticity series.
pub struct QwzSeries(VorticitySeries);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> QwzStatus {
    match e.root() {
        Error::InvalidGrid(_)
        | Error::InvalidLoop(_)
        | Error::InvalidProtocol(_)
        | Error::MismatchedSeries(_)
        | Error::UnsupportedProbe(_) => QwzStatus::InvalidArgument,
        Error::CriticalMass { .. } | Error::GapClosed { .. } => QwzStatus::GapClosed,
        Error::GaugeSingularity { .. }
        | Error::SingularField { .. }
        | Error::SingularPlaquette { .. }
        | Error::UndefinedPhaseOnLoop { .. }
        | Error::UnmatchedFlip { .. } => QwzStatus::Singular,
        Error::InsufficientCycles { .. } => QwzStatus::InsufficientCycles,
        Error::AmbiguousBranch(..) => QwzStatus::AmbiguousBranch,
        Error::AtTime { .. } => unreachable!("root strips AtTime"),
    }
}

enum Fail {
    Null,
    Arg(String),
    Short(usize),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

/// Runs `f`, recording any failure or panic.
fn guard(f: impl FnOnce() -> Result<(), Fail> + UnwindSafe) -> QwzStatus {
    let (status, msg) = match catch_unwind(f) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            return QwzStatus::Ok;
        }
        Ok(Err(Fail::Null)) => (QwzStatus::NullPointer, "null pointer argument".to_string()),
        Ok(Err(Fail::Arg(m))) => (QwzStatus::InvalidArgument, m),
        Ok(Err(Fail::Short(n))) => (
            QwzStatus::BufferTooSmall,
            format!("buffer needs {n} elements"),
        ),
        Ok(Err(Fail::Lib(e))) => (status_of(&e), e.to_string()),
        Err(_) => (QwzStatus::Panic, "internal panic".to_string()),
    };
    set_error(msg);
    status
}

fn grid(n_side: u32) -> Result<KGrid, Fail> {
    Ok(KGrid::new(n_side as usize)?)
}

fn out<'a, T>(p: *mut T) -> Result<&'a mut T, Fail> {
    // SAFETY: caller passes a valid, writable pointer or null
    unsafe { p.as_mut() }.ok_or(Fail::Null)
}

fn borrow<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    // SAFETY: handles come from the matching constructor
    unsafe { p.as_ref() }.ok_or(Fail::Null)
}

fn buffer<'a, T>(p: *mut T, len: usize, need: usize) -> Result<&'a mut [T], Fail> {
    if len < need {
        return Err(Fail::Short(need));
    }
    if p.is_null() {
        return Err(Fail::Null);
    }
    // SAFETY: caller guarantees `len` writable elements at `p`
    Ok(unsafe { std::slice::from_raw_parts_mut(p, need) })
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL, or 0
/// if the last call succeeded.
#[no_mangle]
pub unsafe extern "C" fn qwz_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else {
            return 0;
        };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            // SAFETY: caller guarantees `len` writable bytes at `buf`
            unsafe {
                ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
                *buf.add(n) = 0;
            }
        }
        bytes.len()
    })
}

/// `R(k) = (sin kx, sin ky, m − cos kx − cos ky)` into `out[3]`.
#[no_mangle]
pub unsafe extern "C" fn qwz_r_vector(m: f64, kx: f64, ky: f64, out: *mut f64) -> QwzStatus {
    guard(|| {
        let r = r_vector(m, MomentumPoint::new(kx, ky));
        buffer(out, 3, 3)?.copy_from_slice(&[r.rx, r.ry, r.rz]);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn qwz_band_energies(
    m: f64,
    kx: f64,
    ky: f64,
    lower: *mut f64,
    upper: *mut f64,
) -> QwzStatus {
    guard(|| {
        let (lo, hi) = band_energies(m, MomentumPoint::new(kx, ky));
        *out(lower)? = lo;
        *out(upper)? = hi;
        Ok(())
    })
}

/// Lower-band Chern number from lattice plaquettes on an `n_side²` grid.
#[no_mangle]
pub unsafe extern "C" fn qwz_chern_fhs(m: f64, n_side: u32, chern: *mut i32) -> QwzStatus {
    guard(|| {
        let g = grid(n_side)?;
        if qwzmem::MassParameter(m).is_critical() {
            return Err(Error::CriticalMass { m }.into());
        }
        *out(chern)? = chern_fhs(&ground_state_field_masked(m, g, Gauge::Patched))?;
        Ok(())
    })
}

/// Lower-band Chern number from gauge patches on an `n_side²` grid.
#[no_mangle]
pub unsafe extern "C" fn qwz_chern_patchwise(m: f64, n_side: u32, chern: *mut i32) -> QwzStatus {
    guard(|| {
        *out(chern)? = chern_patchwise(m, grid(n_side)?)?;
        Ok(())
    })
}

/// Hall conductance in units of e²/h.
#[no_mangle]
pub extern "C" fn qwz_hall_conductance(chern: i32) -> f64 {
    hall_conductance(chern)
}

/// `π/|R(m′, k)|`.
#[no_mangle]
pub unsafe extern "C" fn qwz_theoretical_period(
    m_quench: f64,
    kx: f64,
    ky: f64,
    period: *mut f64,
) -> QwzStatus {
    guard(|| {
        *out(period)? = theoretical_period(m_quench, MomentumPoint::new(kx, ky))?;
        Ok(())
    })
}

/// Creates a quench protocol `m_initial → m_quench` at `t = quench_time`,
/// sampled every `dt` up to `t_max`.
#[no_mangle]
pub unsafe extern "C" fn qwz_protocol_new(
    m_initial: f64,
    m_quench: f64,
    t_max: f64,
    dt: f64,
    quench_time: f64,
    handle: *mut *mut QwzProtocol,
) -> QwzStatus {
    guard(|| {
        let slot = out(handle)?;
        let p =
            QuenchProtocol::new(m_initial, m_quench, t_max, dt)?.with_quench_time(quench_time)?;
        *slot = Box::into_raw(Box::new(QwzProtocol(p)));
        Ok(())
    })
}

/// Number of time samples, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn qwz_protocol_n_steps(handle: *const QwzProtocol) -> usize {
    borrow(handle).map(|p| p.0.n_steps()).unwrap_or(0)
}

/// # Safety
/// `handle` must come from [`qwz_protocol_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn qwz_protocol_free(handle: *mut QwzProtocol) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Loschmidt amplitude at `(kx, ky)` for every time sample; `re` and `im`
/// must each hold [`qwz_protocol_n_steps`] values.
#[no_mangle]
pub unsafe extern "C" fn qwz_loschmidt_series(
    handle: *const QwzProtocol,
    kx: f64,
    ky: f64,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> QwzStatus {
    guard(|| {
        let p = borrow(handle)?;
        let need = p.0.n_steps();
        let re = buffer(re, len, need)?;
        let im = buffer(im, len, need)?;
        let l = loschmidt_series(&p.0, MomentumPoint::new(kx, ky))?;
        for (i, v) in l.values.iter().enumerate() {
            re[i] = v.re;
            im[i] = v.im;
        }
        Ok(())
    })
}

/// Vortex index series at a probe on an `n_side²` grid. A non-positive
/// `radius` selects one grid spacing.
#[no_mangle]
pub unsafe extern "C" fn qwz_vorticity_series_new(
    protocol: *const QwzProtocol,
    n_side: u32,
    kx: f64,
    ky: f64,
    radius: f64,
    handle: *mut *mut QwzSeries,
) -> QwzStatus {
    guard(|| {
        let p = borrow(protocol)?;
        let slot = out(handle)?;
        let g = grid(n_side)?;
        if radius.is_nan() {
            return Err(Fail::Arg("radius is NaN".into()));
        }
        let r = if radius > 0.0 { radius } else { g.spacing() };
        let s = vorticity_series(&p.0, g, MomentumPoint::new(kx, ky), r)?;
        *slot = Box::into_raw(Box::new(QwzSeries(s)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn qwz_series_len(handle: *const QwzSeries) -> usize {
    borrow(handle).map(|s| s.0.len()).unwrap_or(0)
}

/// Copies times and vortex indices (−1, 0, +1) into caller buffers.
#[no_mangle]
pub unsafe extern "C" fn qwz_series_copy(
    handle: *const QwzSeries,
    times: *mut f64,
    indices: *mut i8,
    len: usize,
) -> QwzStatus {
    guard(|| {
        let s = &borrow(handle)?.0;
        buffer(times, len, s.len())?.copy_from_slice(&s.times);
        buffer(indices, len, s.len())?.copy_from_slice(&s.indices);
        Ok(())
    })
}

/// Oscillation period from the vortex flips.
#[no_mangle]
pub unsafe extern "C" fn qwz_series_period(
    handle: *const QwzSeries,
    period: *mut f64,
    uncertainty: *mut f64,
) -> QwzStatus {
    guard(|| {
        let s = &borrow(handle)?.0;
        let e = estimate_period(&flip_times(s), s.dt)?;
        *out(period)? = e.period;
        *out(uncertainty)? = e.uncertainty;
        Ok(())
    })
}

/// Quench mass from one series at (π,π) or (0,0). Without a branch the call
/// fails with [`QwzStatus::AmbiguousBranch`].
#[no_mangle]
pub unsafe extern "C" fn qwz_decode(
    handle: *const QwzSeries,
    branch: QwzBranch,
    m_quench: *mut f64,
    uncertainty: *mut f64,
) -> QwzStatus {
    guard(|| {
        let s = &borrow(handle)?.0;
        let hint = match branch {
            QwzBranch::None => None,
            QwzBranch::Above => Some(BranchHint::Above),
            QwzBranch::Below => Some(BranchHint::Below),
        };
        let d = decode_quench_mass(s, s.probe, hint)?;
        *out(m_quench)? = d.m_quench.value();
        *out(uncertainty)? = d.uncertainty;
        Ok(())
    })
}

/// Quench mass from one (π,π) and one (0,0) series, no branch needed.
#[no_mangle]
pub unsafe extern "C" fn qwz_decode_joint(
    a: *const QwzSeries,
    b: *const QwzSeries,
    m_quench: *mut f64,
    uncertainty: *mut f64,
) -> QwzStatus {
    guard(|| {
        let d = decode_joint_series(&borrow(a)?.0, &borrow(b)?.0)?;
        *out(m_quench)? = d.m_quench.value();
        *out(uncertainty)? = d.uncertainty;
        Ok(())
    })
}

/// # Safety
/// `handle` must come from [`qwz_vorticity_series_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn qwz_series_free(handle: *mut QwzSeries) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}
