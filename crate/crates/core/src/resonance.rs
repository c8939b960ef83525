//! Shape-resonance location, width, spacing and the flux mechanism.
//!
//! The resonance is the zero of the Jost Wronskian continued to Im k < 0.
//! Newton in k resolves the position; once the width drops below what the
//! energy axis can represent in double precision (|Im z0| ~ exp(-2S/h)
//! versus one ulp of z0), it is recovered instead from the one-sided
//! outgoing flux of the right-half state, which stays well-conditioned in
//! log scale at every h.

use crate::error::{Error, Result};
use crate::logscale::{LogC64, LogF64};
use crate::potential::Potential;
use crate::resolvent::jost_solve;
use crate::sample::WaveSample;
use num_complex::Complex64;
use serde::Serialize;

/// Below this |Im z0| / |z0| a real-axis evaluation cannot separate the
/// pole from the representable energy grid.
pub const WIDTH_FLOOR_REL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum WidthMethod {
    /// Im z0 straight from the Newton zero of the Wronskian.
    Newton,
    /// One-sided outgoing-flux quotient at real Re z0.
    Flux,
}

#[derive(Clone)]
pub struct ResonanceDatum {
    pub h: f64,
    /// Second-sheet pole; Im < 0. The imaginary part may be denormal-small;
    /// `width` carries it in log form.
    pub z0: Complex64,
    pub width: LogF64,
    pub width_method: WidthMethod,
    /// Distance to the nearest other located resonance.
    pub separation: f64,
    /// Winding number around the tracked pole equals one.
    pub simple: bool,
    /// Resonant state, symmetrized from the right half, core norm 1.
    pub state: WaveSample,
    /// Even (+1) or odd (-1) parity of the tracked state.
    pub parity: f64,
}

pub struct ResonanceOptions {
    pub x_max: f64,
    /// Step for pole-sensitive solves. Near the pole the kernel amplifies
    /// the discretization shift of the Wronskian zero by 1/|Im z0|, so this
    /// is tighter than the sweep default.
    pub step: f64,
    /// Step for argument-principle contours (integer counting only).
    pub winding_step: f64,
    pub core_radius: f64,
    pub ring_radius: f64,
    pub max_newton: usize,
}

impl ResonanceOptions {
    pub fn for_h(h: f64) -> Self {
        ResonanceOptions {
            x_max: 7.5,
            step: (h / 20.0).min(2.5e-4),
            winding_step: (h / 20.0).min(1e-3),
            core_radius: 4.0,
            ring_radius: 6.0,
            max_newton: 60,
        }
    }
}

/// Newton iteration on an analytic log-scaled function of k.
pub fn newton_in_k<F>(mut f: F, seed: Complex64, max_iter: usize) -> Result<(Complex64, LogC64)>
where
    F: FnMut(Complex64) -> Result<LogC64>,
{
    let mut k = seed;
    let delta = 1e-7;
    for _ in 0..max_iter {
        let w = f(k)?;
        let wp = f(k + Complex64::new(delta, 0.0))?;
        let wm = f(k - Complex64::new(delta, 0.0))?;
        let dw = wp.sub(wm).mul_c64(Complex64::new(1.0 / (2.0 * delta), 0.0));
        if dw.is_zero() {
            return Err(Error::NewtonDiverged { iters: max_iter });
        }
        let step = w.div(dw).to_c64();
        if !step.re.is_finite() || !step.im.is_finite() {
            return Err(Error::NewtonDiverged { iters: max_iter });
        }
        k -= step;
        if step.norm() < 1e-14 * k.norm() {
            return Ok((k, f(k)?));
        }
    }
    Err(Error::NewtonDiverged { iters: max_iter })
}

/// The Jost Wronskian and its cancellation scale at sqrt(z) = k.
pub fn wronskian_at<P: Potential>(
    pot: &P,
    h: f64,
    k: Complex64,
    opts: &ResonanceOptions,
) -> Result<(LogC64, LogF64)> {
    let j = jost_solve(pot, h, k, opts.x_max, opts.step)?;
    Ok((j.w, j.w_scale))
}

/// Locate the resonance nearest the seed energy.
pub fn find_resonance<P: Potential>(
    pot: &P,
    h: f64,
    seed_energy: f64,
    opts: &ResonanceOptions,
) -> Result<ResonanceDatum> {
    let seed_k = Complex64::new(seed_energy.sqrt(), -1e-8);
    let (k0, _) = newton_in_k(
        |k| wronskian_at(pot, h, k, opts).map(|p| p.0),
        seed_k,
        opts.max_newton,
    )?;
    let z_raw = k0 * k0;
    let floor = WIDTH_FLOOR_REL * z_raw.re.abs();

    let (width, method) = if z_raw.im < 0.0 && z_raw.im.abs() >= floor {
        (LogF64::from_f64(z_raw.im.abs()), WidthMethod::Newton)
    } else {
        (flux_width(pot, h, z_raw.re, opts)?, WidthMethod::Flux)
    };

    // simplicity: winding on a contour big enough to be robust, small
    // enough to exclude the 2h-spaced neighbors
    let radius = (10.0 * width.to_f64()).max(h / 10.0);
    let count = winding_count(pot, h, Complex64::new(z_raw.re, 0.0), radius, radius, opts)?;
    if count != 1 {
        return Err(Error::MultipleZerosInContour { count });
    }

    let (state, parity) = resonant_state(pot, h, z_raw.re, width, opts)?;
    let z0 = Complex64::new(z_raw.re, -width.to_f64().max(f64::MIN_POSITIVE));

    Ok(ResonanceDatum {
        h,
        z0,
        width,
        width_method: method,
        separation: f64::INFINITY,
        simple: true,
        state,
        parity,
    })
}

/// Width from the one-sided outgoing flux. With u the right-half outgoing
/// solution at real Re z0 (exactly e^{ikx}, |u| = 1, past the support) and
/// the state extended by parity, the exact identity
/// |Im z0| ||u||^2 = sqrt(z)(|u(b)|^2 + |u(-b)|^2) collapses to
/// sqrt(z) |u(b)|^2 / int_0^b |u|^2. A real-axis solve's LEFT tail carries
/// the resonance-scale sensitivity and cannot be used, which is why the
/// right half plus symmetry replaces the naive two-sided formula.
pub fn flux_width<P: Potential>(
    pot: &P,
    h: f64,
    e_re: f64,
    opts: &ResonanceOptions,
) -> Result<LogF64> {
    let k = Complex64::new(e_re.sqrt(), 0.0);
    let j = jost_solve(pot, h, k, opts.x_max, opts.step)?;
    let b = opts.ring_radius + 0.5;
    let mass = j.f_plus.norm_l2(0.0, b)?;
    let i_b = j.f_plus.grid.index_of(b);
    let amp = j.f_plus.value_at(i_b).abs();
    // h d/dx Im[conj(u) h u'] = -Im z |u|^2, so the h rides along
    Ok(amp.mul(amp).scale_f64(h * e_re.sqrt()).div(mass.mul(mass)))
}

/// Winding number of the Wronskian along a rectangle boundary; retries
/// with a slightly grown rectangle when the contour grazes a zero.
pub fn winding_count<P: Potential>(
    pot: &P,
    h: f64,
    center: Complex64,
    half_re: f64,
    half_im: f64,
    opts: &ResonanceOptions,
) -> Result<i64> {
    let mut last = Err(Error::ContourThroughZero { dist: 0.0 });
    for attempt in 0..5 {
        let grow = 1.0 + 0.03 * attempt as f64;
        match try_winding(pot, h, center, half_re * grow, half_im * grow, opts) {
            Ok(n) => return Ok(n),
            Err(Error::ContourThroughZero { dist }) => {
                last = Err(Error::ContourThroughZero { dist });
            }
            Err(e) => return Err(e),
        }
    }
    last
}

fn try_winding<P: Potential>(
    pot: &P,
    h: f64,
    center: Complex64,
    half_re: f64,
    half_im: f64,
    opts: &ResonanceOptions,
) -> Result<i64> {
    let per_edge = 64usize;
    let corners = [
        center + Complex64::new(-half_re, -half_im),
        center + Complex64::new(half_re, -half_im),
        center + Complex64::new(half_re, half_im),
        center + Complex64::new(-half_re, half_im),
    ];
    let mut args = Vec::with_capacity(4 * per_edge + 1);
    for e in 0..4 {
        let a = corners[e];
        let b = corners[(e + 1) % 4];
        for i in 0..per_edge {
            let t = i as f64 / per_edge as f64;
            let z = a + (b - a) * t;
            let j = jost_solve(pot, h, z.sqrt(), opts.x_max, opts.winding_step)?;
            let (w, scale) = (j.w, j.w_scale);
            if w.abs().div(scale).to_f64() < 1e-10 {
                return Err(Error::ContourThroughZero {
                    dist: w.abs().div(scale).to_f64(),
                });
            }
            args.push(w.arg());
        }
    }
    args.push(args[0]);
    let mut total = 0.0;
    for i in 1..args.len() {
        let mut d = args[i] - args[i - 1];
        while d > std::f64::consts::PI {
            d -= 2.0 * std::f64::consts::PI;
        }
        while d < -std::f64::consts::PI {
            d += 2.0 * std::f64::consts::PI;
        }
        total += d;
    }
    Ok((total / (2.0 * std::f64::consts::PI)).round() as i64)
}

/// Zero count and minimal gap inside the window: winding, recursive
/// bisection until each cell isolates one zero, Newton polish.
pub fn resonance_spacing<P: Potential>(
    pot: &P,
    h: f64,
    center: Complex64,
    half_re: f64,
    half_im: f64,
    opts: &ResonanceOptions,
) -> Result<(i64, f64)> {
    let total = winding_count(pot, h, center, half_re, half_im, opts)?;
    if total <= 1 {
        return Ok((total, f64::INFINITY));
    }
    let mut zeros: Vec<Complex64> = Vec::new();
    let mut stack = vec![(center, half_re, half_im, total)];
    while let Some((c, hr, hi, n)) = stack.pop() {
        if n == 0 {
            continue;
        }
        if n == 1 || hr.max(hi) < 1e-3 * h {
            if let Ok((k, _)) = newton_in_k(
                |k| wronskian_at(pot, h, k, opts).map(|p| p.0),
                c.sqrt() + Complex64::new(0.0, -1e-9),
                40,
            ) {
                let z = k * k;
                if !zeros.iter().any(|&p| (p - z).norm() < 1e-6 * h) {
                    zeros.push(z);
                }
            }
            continue;
        }
        let quads = if hr >= hi {
            [
                (c - Complex64::new(hr / 2.0, 0.0), hr / 2.0, hi),
                (c + Complex64::new(hr / 2.0, 0.0), hr / 2.0, hi),
            ]
        } else {
            [
                (c - Complex64::new(0.0, hi / 2.0), hr, hi / 2.0),
                (c + Complex64::new(0.0, hi / 2.0), hr, hi / 2.0),
            ]
        };
        for (qc, qr, qi) in quads {
            let m = winding_count(pot, h, qc, qr, qi, opts)?;
            stack.push((qc, qr, qi, m));
        }
    }
    let mut min_gap = f64::INFINITY;
    for i in 0..zeros.len() {
        for j in i + 1..zeros.len() {
            min_gap = min_gap.min((zeros[i] - zeros[j]).norm());
        }
    }
    Ok((total, min_gap))
}

/// Resonant state from the right-half outgoing solution, extended by
/// parity, normalized so the core-ball L2 norm is 1.
pub fn resonant_state<P: Potential>(
    pot: &P,
    h: f64,
    e_re: f64,
    width: LogF64,
    opts: &ResonanceOptions,
) -> Result<(WaveSample, f64)> {
    // evaluate at the complex pole; below the floor the imaginary shift is
    // numerically invisible and the real-axis solve is identical
    let z = Complex64::new(e_re, -width.to_f64());
    let k = z.sqrt();
    let j = jost_solve(pot, h, k, opts.x_max, opts.step)?;
    let fp = j.f_plus;
    let i0 = fp.grid.index_of(0.0);
    let even = fp.value_at(i0).abs().cmp_abs(fp.h_deriv_at(i0).abs())
        == std::cmp::Ordering::Greater;
    let parity = if even { 1.0 } else { -1.0 };

    let spacing = fp.grid.spacing;
    let full = crate::grid::Grid::lattice(-opts.x_max, opts.x_max, spacing);
    let mut values = Vec::with_capacity(full.len());
    let mut derivs = Vec::with_capacity(full.len());
    let mut scales = Vec::with_capacity(full.len());
    for &x in &full.nodes {
        let i = fp.grid.index_of(x.abs());
        if x >= 0.0 {
            values.push(fp.values[i]);
            derivs.push(fp.h_derivative[i]);
        } else {
            values.push(parity * fp.values[i]);
            derivs.push(-parity * fp.h_derivative[i]);
        }
        scales.push(fp.ln_scale[i]);
    }
    let mut state = WaveSample { grid: full, values, h_derivative: derivs, ln_scale: scales, h };
    let norm = state.norm_l2(-opts.core_radius, opts.core_radius)?;
    state.scale_by(LogC64::new(
        Complex64::new(1.0 / norm.mantissa, 0.0),
        -norm.ln_scale,
    ));
    Ok((state, parity))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FluxCheck {
    pub t: f64,
    pub lhs_log10: f64,
    pub rhs_log10: f64,
    pub ratio: f64,
}

/// Both sides of the flux identity at boundary radius R + t:
/// lhs = |Im z0| ||u||^2 over [-(R+t), R+t], rhs the net outgoing flux
/// Im[conj(u) h u'](b) - Im[conj(u) h u'](-b).
pub fn flux_identity_check(
    datum: &ResonanceDatum,
    ring_radius: f64,
    t: f64,
) -> Result<FluxCheck> {
    let u = &datum.state;
    let b = ring_radius + t;
    let mass = u.norm_l2(-b, b)?;
    let lhs = datum.width.mul(mass.mul(mass));
    let flux_at = |x: f64| -> LogF64 {
        let i = u.grid.index_of(x);
        let p = u.value_at(i).conj().mul(u.h_deriv_at(i));
        LogF64::new(p.mantissa.im, p.ln_scale).normalized()
    };
    let rhs = flux_at(b).add(flux_at(-b).scale_f64(-1.0)).abs().scale_f64(datum.h);
    let ratio = lhs.div(rhs).to_f64();
    Ok(FluxCheck { t, lhs_log10: lhs.log10_abs(), rhs_log10: rhs.log10_abs(), ratio })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PeakBounds {
    pub res1_ratio: f64,
    pub res2_ratio: f64,
}

/// res1 = |chi R chi| |Im z0|, res2 = |psi R chi| sqrt(|Im z0| h);
/// meaningful only when the pole is representable on the energy axis.
pub fn peak_bounds_check<P: Potential>(
    pot: &P,
    datum: &ResonanceDatum,
    kernel_spacing: f64,
    opts: &ResonanceOptions,
) -> Result<PeakBounds> {
    let h = datum.h;
    let width = datum.width.to_f64();
    if !(width >= 1e-12) {
        return Err(Error::WidthUnresolvable { floor: 1e-12 });
    }
    let k = Complex64::new(-datum.z0.re.sqrt(), 0.0); // the -i0 branch
    let kern = crate::resolvent::GreenKernel::new(jost_solve(pot, h, k, opts.x_max, opts.step)?);
    let chi = crate::resolvent::Cutoff::ball(opts.core_radius);
    let psi = crate::resolvent::Cutoff::shell(opts.ring_radius - 1.0, opts.ring_radius + 1.0);
    let n1 = crate::resolvent::cutoff_norm(
        &kern,
        crate::resolvent::CutoffKind::ChiRChi,
        &chi,
        &chi,
        kernel_spacing,
        6000,
    )?;
    let n2 = crate::resolvent::cutoff_norm(
        &kern,
        crate::resolvent::CutoffKind::PsiRChi,
        &psi,
        &chi,
        kernel_spacing,
        6000,
    )?;
    let res1 = (n1.ln_norm() + width.ln()).exp();
    let res2 = (n2.ln_norm() + 0.5 * (width * h).ln()).exp();
    Ok(PeakBounds { res1_ratio: res1, res2_ratio: res2 })
}
