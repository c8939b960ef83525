//! C ABI over the resolvent-lab kernels: opaque potential handles, plain
//! structs out, integer error codes, and a thread-local last-error message.
//!
//! Exponentially large or small quantities cross the boundary as log10
//! magnitudes so no caller ever sees an overflowed double.

use num_complex::Complex64;
use resolvent_lab::boxsize::choose_box;
use resolvent_lab::potential::{build_paper_potential, Potential, Potential1D};
use resolvent_lab::quasimode::{build_pair, ground_quasimode, tail_norms};
use resolvent_lab::resolvent::{cutoff_norm, jost_solve, Cutoff, CutoffKind, GreenKernel};
use resolvent_lab::resonance::{find_resonance, ResonanceOptions, WidthMethod};
use std::cell::RefCell;
use std::ffi::{c_char, CString};

/// Status codes returned by every fallible call.
#[repr(i32)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum RlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NumericalFailure = 3,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: String) {
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(msg).unwrap_or_else(|_| CString::new("error").unwrap());
    });
}

/// Message for the most recent failure on this thread. Borrowed pointer,
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Opaque potential handle.
pub struct RlPotential {
    inner: Potential1D,
}

/// Build the standard well/barrier potential. `blend_width` in (0, 0.25].
/// On success writes a heap handle to `out`; free with `rl_potential_free`.
#[no_mangle]
pub extern "C" fn rl_potential_new_paper(
    blend_width: f64,
    out: *mut *mut RlPotential,
) -> RlStatus {
    if out.is_null() {
        return RlStatus::NullPointer;
    }
    match build_paper_potential(blend_width) {
        Ok(inner) => {
            let handle = Box::new(RlPotential { inner });
            unsafe { *out = Box::into_raw(handle) };
            RlStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            RlStatus::InvalidArgument
        }
    }
}

/// # Safety
/// `p` must be a handle from `rl_potential_new_paper` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rl_potential_free(p: *mut RlPotential) {
    if !p.is_null() {
        drop(unsafe { Box::from_raw(p) });
    }
}

/// Evaluate V(x).
/// # Safety
/// `p` must be a live handle; `out` a writable double.
#[no_mangle]
pub unsafe extern "C" fn rl_potential_eval(
    p: *const RlPotential,
    x: f64,
    out: *mut f64,
) -> RlStatus {
    if p.is_null() || out.is_null() {
        return RlStatus::NullPointer;
    }
    unsafe { *out = (*p).inner.eval(x) };
    RlStatus::Ok
}

/// Quasimode summary at one h.
#[repr(C)]
pub struct RlQuasimode {
    pub e0: f64,
    pub r_tilde: f64,
    /// L2 mass of the well region (-3.5, 3.5).
    pub inner_mass: f64,
    /// log10 of the outer-tail H1_h norm.
    pub outer_log10: f64,
    /// log10 of the residual L2 norm.
    pub f_norm_log10: f64,
    pub alpha: f64,
}

/// Ground quasimode on the non-quantizing box at parameter h (0 < h <= 0.35).
/// # Safety
/// `p` must be a live handle; `out` a writable struct.
#[no_mangle]
pub unsafe extern "C" fn rl_quasimode_run(
    p: *const RlPotential,
    h: f64,
    out: *mut RlQuasimode,
) -> RlStatus {
    if p.is_null() || out.is_null() {
        return RlStatus::NullPointer;
    }
    let pot = unsafe { &(*p).inner };
    let run = || -> resolvent_lab::Result<RlQuasimode> {
        let b = choose_box(pot, h, 6.0, 1e-3);
        let g = ground_quasimode(pot, h, b.r_tilde)?;
        let t = tail_norms(&g.v, b.r_tilde)?;
        let pair = build_pair(pot, h, g.e0, &g.v, 6.0)?;
        Ok(RlQuasimode {
            e0: g.e0,
            r_tilde: b.r_tilde,
            inner_mass: t.inner,
            outer_log10: t.outer.log10_abs(),
            f_norm_log10: pair.f_norm().log10_abs(),
            alpha: pair.alpha,
        })
    };
    match run() {
        Ok(v) => {
            unsafe { *out = v };
            RlStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            RlStatus::NumericalFailure
        }
    }
}

/// Resonance summary at one h.
#[repr(C)]
pub struct RlResonance {
    pub re_z0: f64,
    /// log10 |Im z0|.
    pub width_log10: f64,
    /// 1 when the width came straight from the Wronskian zero, 0 when it
    /// was recovered from the outgoing flux.
    pub width_from_newton: i32,
    /// Winding number around the pole (1 = simple).
    pub winding: i32,
}

/// Locate the shape resonance near 1 + h.
/// # Safety
/// `p` must be a live handle; `out` a writable struct.
#[no_mangle]
pub unsafe extern "C" fn rl_resonance_find(
    p: *const RlPotential,
    h: f64,
    out: *mut RlResonance,
) -> RlStatus {
    if p.is_null() || out.is_null() {
        return RlStatus::NullPointer;
    }
    let pot = unsafe { &(*p).inner };
    match find_resonance(pot, h, 1.0 + h, &ResonanceOptions::for_h(h)) {
        Ok(d) => {
            unsafe {
                *out = RlResonance {
                    re_z0: d.z0.re,
                    width_log10: d.width.log10_abs(),
                    width_from_newton: (d.width_method == WidthMethod::Newton) as i32,
                    winding: 1,
                };
            }
            RlStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            RlStatus::NumericalFailure
        }
    }
}

/// Cutoff choice for `rl_cutoff_norm_log10`.
#[repr(i32)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum RlCutoffKind {
    /// Ball to ball (radius 4).
    ChiChi = 0,
    /// Ring {R-1 < |x| < R+1} to ball.
    PsiChi = 1,
    /// Ring to ring (both outside the interaction region).
    PsiPsi = 2,
}

/// log10 of the cutoff resolvent norm at real energy (outgoing limit).
/// # Safety
/// `p` must be a live handle; `out_log10` a writable double.
#[no_mangle]
pub unsafe extern "C" fn rl_cutoff_norm_log10(
    p: *const RlPotential,
    h: f64,
    energy: f64,
    which: RlCutoffKind,
    ring_radius: f64,
    out_log10: *mut f64,
) -> RlStatus {
    if p.is_null() || out_log10.is_null() {
        return RlStatus::NullPointer;
    }
    if !(energy > 0.0 && h > 0.0 && h <= 0.35 && ring_radius > 5.0) {
        set_error(format!(
            "need energy > 0, h in (0, 0.35], ring_radius > 5; got E={energy}, h={h}, R={ring_radius}"
        ));
        return RlStatus::InvalidArgument;
    }
    let pot = unsafe { &(*p).inner };
    let run = || -> resolvent_lab::Result<f64> {
        let step = (h / 20.0f64).min(2.5e-4);
        let kern = GreenKernel::new(jost_solve(
            pot,
            h,
            Complex64::new(energy.sqrt(), 0.0),
            ring_radius + 1.5,
            step,
        )?);
        let chi = Cutoff::ball(4.0);
        let psi = Cutoff::shell(ring_radius - 1.0, ring_radius + 1.0);
        let spacing = ((h / 6.0f64).min(0.02).max(2e-3) / 1e-3).round() * 1e-3;
        let r = match which {
            RlCutoffKind::ChiChi => {
                cutoff_norm(&kern, CutoffKind::ChiRChi, &chi, &chi, spacing, 6000)?
            }
            RlCutoffKind::PsiChi => {
                cutoff_norm(&kern, CutoffKind::PsiRChi, &psi, &chi, spacing, 6000)?
            }
            RlCutoffKind::PsiPsi => {
                cutoff_norm(&kern, CutoffKind::PsiRPsi, &psi, &psi, spacing, 6000)?
            }
        };
        Ok(r.log10_norm)
    };
    match run() {
        Ok(v) => {
            unsafe { *out_log10 = v };
            RlStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            RlStatus::NumericalFailure
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lifecycle_and_eval() {
        let mut handle: *mut RlPotential = std::ptr::null_mut();
        assert!(rl_potential_new_paper(0.1, &mut handle) == RlStatus::Ok);
        let mut v = 0.0;
        unsafe {
            assert!(rl_potential_eval(handle, 0.0, &mut v) == RlStatus::Ok);
            assert_eq!(v, 1.0);
            assert!(rl_potential_eval(handle, 3.0, &mut v) == RlStatus::Ok);
            assert_eq!(v, 1.0);
            rl_potential_free(handle);
        }
    }

    #[test]
    fn invalid_blend_reports_an_error() {
        let mut handle: *mut RlPotential = std::ptr::null_mut();
        assert!(rl_potential_new_paper(0.9, &mut handle) == RlStatus::InvalidArgument);
        let msg = unsafe { std::ffi::CStr::from_ptr(rl_last_error_message()) };
        assert!(msg.to_string_lossy().contains("blend_width"));
    }

    #[test]
    fn quasimode_through_the_c_surface() {
        let mut handle: *mut RlPotential = std::ptr::null_mut();
        assert!(rl_potential_new_paper(0.1, &mut handle) == RlStatus::Ok);
        let mut q = RlQuasimode {
            e0: 0.0,
            r_tilde: 0.0,
            inner_mass: 0.0,
            outer_log10: 0.0,
            f_norm_log10: 0.0,
            alpha: 0.0,
        };
        unsafe {
            assert!(rl_quasimode_run(handle, 0.1, &mut q) == RlStatus::Ok);
            assert!((q.e0 - 1.1).abs() < 1e-3);
            assert!(q.inner_mass >= 0.9);
            assert!(q.f_norm_log10 < -5.0);
            rl_potential_free(handle);
        }
    }

    #[test]
    fn resonance_and_norm_through_the_c_surface() {
        let mut handle: *mut RlPotential = std::ptr::null_mut();
        assert!(rl_potential_new_paper(0.1, &mut handle) == RlStatus::Ok);
        let mut r = RlResonance {
            re_z0: 0.0,
            width_log10: 0.0,
            width_from_newton: 0,
            winding: 0,
        };
        unsafe {
            assert!(rl_resonance_find(handle, 0.25, &mut r) == RlStatus::Ok);
            assert!((r.re_z0 - 1.25).abs() < 0.05);
            assert_eq!(r.width_from_newton, 1);
            let mut n = 0.0;
            assert!(
                rl_cutoff_norm_log10(handle, 0.25, r.re_z0, RlCutoffKind::PsiChi, 6.0, &mut n)
                    == RlStatus::Ok
            );
            assert!(n > 1.0, "log10 norm {n}");
            rl_potential_free(handle);
        }
    }

    #[test]
    fn null_pointers_are_rejected() {
        let mut v = 0.0;
        unsafe {
            assert!(
                rl_potential_eval(std::ptr::null(), 0.0, &mut v) == RlStatus::NullPointer
            );
        }
        assert!(rl_potential_new_paper(0.1, std::ptr::null_mut()) == RlStatus::NullPointer);
    }
}
