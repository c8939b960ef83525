//! The outgoing resolvent through Jost solutions: Green kernel, resolvent
//! application, and cutoff operator norms.
//!
//! Everything is parametrized by k = sqrt(z): k > 0 real is the +i0 limit,
//! k < 0 real the -i0 limit, and Im k < 0 reaches the second sheet where
//! the resonances live. Kernel magnitudes are carried as mantissa + log and
//! the power iteration runs on a globally rescaled matrix.

use crate::error::{Error, Result};
use crate::grid::segment_rule;
use crate::integrate::{integrate_schrodinger, SemiclassicalProblem};
use crate::logscale::{LogC64, LogF64};
use crate::potential::Potential;
use crate::sample::WaveSample;
use num_complex::Complex64;
use serde::Serialize;

/// Relative |W| level below which the pair is effectively degenerate
/// (proximity to a resonance).
pub const WRONSKIAN_DEGENERACY: f64 = 1e-13;

#[derive(Clone)]
pub struct JostPair {
    /// sqrt(z); z = k * k.
    pub k: Complex64,
    pub h: f64,
    /// Solution equal to exp(-i k x / h) left of the interaction region.
    pub f_minus: WaveSample,
    /// Solution equal to exp(+i k x / h) right of it.
    pub f_plus: WaveSample,
    /// W(f_plus, f_minus); -2 i k for the free problem.
    pub w: LogC64,
    /// Largest product magnitude entering W (cancellation yardstick).
    pub w_scale: LogF64,
    /// Relative variation of W across the evaluation points.
    pub w_variation: f64,
    /// |W| fell below the degeneracy threshold relative to w_scale.
    pub degenerate: bool,
}

impl JostPair {
    pub fn energy(&self) -> Complex64 {
        self.k * self.k
    }
}

/// Integrate the two Jost solutions across [-x_max, x_max]. The Wronskian
/// is averaged over lattice points near the two ends, where one factor is
/// O(1) and the cancellation headroom is maximal.
pub fn jost_solve<P: Potential>(
    pot: &P,
    h: f64,
    k: Complex64,
    x_max: f64,
    step: f64,
) -> Result<JostPair> {
    let prob = SemiclassicalProblem::new(h, pot, (-x_max, x_max));
    let ik = Complex64::new(0.0, 1.0) * k;
    let phase_m = (-ik * (-x_max) / h).exp();
    let f_minus =
        integrate_schrodinger(&prob, k * k, -x_max, x_max, (phase_m, -ik * phase_m), step)?;
    let phase_p = (ik * x_max / h).exp();
    let f_plus =
        integrate_schrodinger(&prob, k * k, x_max, -x_max, (phase_p, ik * phase_p), step)?;

    let probes = [-x_max + 0.3, -x_max + 0.6, x_max - 0.6, x_max - 0.3];
    let mut ws = Vec::with_capacity(probes.len());
    let mut scale = LogF64::zero();
    for &x in &probes {
        ws.push(crate::sample::wronskian(&f_plus, &f_minus, x));
        let i = f_plus.grid.index_of(x);
        let j = f_minus.grid.index_of(x);
        let s = f_plus
            .value_at(i)
            .abs()
            .mul(f_minus.h_deriv_at(j).abs())
            .add(f_minus.value_at(j).abs().mul(f_plus.h_deriv_at(i).abs()));
        if scale.is_zero() || s.cmp_abs(scale) == std::cmp::Ordering::Greater {
            scale = s;
        }
    }
    let mut w = ws[0];
    for wv in &ws[1..] {
        w = w.add(*wv);
    }
    w = LogC64::new(w.mantissa / probes.len() as f64, w.ln_scale).normalized();
    let mut variation: f64 = 0.0;
    for wv in &ws {
        variation = variation.max(wv.sub(w).abs().div(w.abs()).to_f64());
    }
    let degenerate = w.abs().div(scale).to_f64() < WRONSKIAN_DEGENERACY;
    Ok(JostPair { k, h, f_minus, f_plus, w, w_scale: scale, w_variation: variation, degenerate })
}

/// Resolvent kernel G(x, y) = f_-(x_<) f_+(x_>) / (h W(f_+, f_-)).
pub struct GreenKernel {
    pub jost: JostPair,
    inv_hw: LogC64,
}

impl GreenKernel {
    pub fn new(jost: JostPair) -> GreenKernel {
        let h = jost.h;
        let inv_hw = LogC64::new(
            Complex64::new(1.0, 0.0) / jost.w.mantissa,
            -jost.w.ln_scale - h.ln(),
        )
        .normalized();
        GreenKernel { jost, inv_hw }
    }

    pub fn eval(&self, x: f64, y: f64) -> LogC64 {
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        let i = self.jost.f_minus.grid.index_of(lo);
        let j = self.jost.f_plus.grid.index_of(hi);
        self.jost
            .f_minus
            .value_at(i)
            .mul(self.jost.f_plus.value_at(j))
            .mul(self.inv_hw)
    }

    /// u(x) = integral of G(x, y) f(y) dy through log-space prefix sums.
    pub fn apply(&self, f: &WaveSample) -> Result<WaveSample> {
        debug_assert!((f.grid.spacing - self.jost.f_minus.grid.spacing).abs() < 1e-15);
        let n = f.len();
        let spacing = f.grid.spacing;
        let mut gm = Vec::with_capacity(n);
        let mut gp = Vec::with_capacity(n);
        for i in 0..n {
            let x = f.grid.nodes[i];
            let im = self.jost.f_minus.grid.index_of(x);
            let ip = self.jost.f_plus.grid.index_of(x);
            let fv = f.value_at(i);
            gm.push(self.jost.f_minus.value_at(im).mul(fv));
            gp.push(self.jost.f_plus.value_at(ip).mul(fv));
        }
        let pm = log_prefix_integral(spacing, &gm); // from the left
        let mut gp_rev: Vec<LogC64> = gp.clone();
        gp_rev.reverse();
        let mut pp = log_prefix_integral(spacing, &gp_rev); // from the right
        pp.reverse();

        let mut values = Vec::with_capacity(n);
        let mut derivs = Vec::with_capacity(n);
        let mut scales = Vec::with_capacity(n);
        for i in 0..n {
            let x = f.grid.nodes[i];
            let im = self.jost.f_minus.grid.index_of(x);
            let ip = self.jost.f_plus.grid.index_of(x);
            let u = self
                .jost
                .f_plus
                .value_at(ip)
                .mul(pm[i])
                .add(self.jost.f_minus.value_at(im).mul(pp[i]))
                .mul(self.inv_hw);
            let du = self
                .jost
                .f_plus
                .h_deriv_at(ip)
                .mul(pm[i])
                .add(self.jost.f_minus.h_deriv_at(im).mul(pp[i]))
                .mul(self.inv_hw);
            values.push(u.mantissa);
            derivs.push(du.mantissa * (du.ln_scale - u.ln_scale).exp());
            scales.push(u.ln_scale);
        }
        Ok(WaveSample {
            grid: f.grid.clone(),
            values,
            h_derivative: derivs,
            ln_scale: scales,
            h: self.jost.h,
        })
    }
}

/// Fourth-order prefix integral of log-scaled values; each cell is rebased
/// inside the LogC64 additions, so exponential growth along the grid is
/// carried exactly.
fn log_prefix_integral(spacing: f64, v: &[LogC64]) -> Vec<LogC64> {
    let n = v.len();
    let mut out = vec![LogC64::zero(); n];
    if n < 4 {
        for i in 1..n {
            let cell = v[i - 1].add(v[i]).mul_c64(Complex64::new(0.5 * spacing, 0.0));
            out[i] = out[i - 1].add(cell);
        }
        return out;
    }
    let c = spacing / 24.0;
    let cell = |a: LogC64, b: LogC64, cc: LogC64, d: LogC64, w: [f64; 4]| -> LogC64 {
        a.mul_c64(Complex64::new(w[0] * c, 0.0))
            .add(b.mul_c64(Complex64::new(w[1] * c, 0.0)))
            .add(cc.mul_c64(Complex64::new(w[2] * c, 0.0)))
            .add(d.mul_c64(Complex64::new(w[3] * c, 0.0)))
    };
    out[1] = cell(v[0], v[1], v[2], v[3], [9.0, 19.0, -5.0, 1.0]);
    for i in 1..n - 2 {
        let ci = cell(v[i - 1], v[i], v[i + 1], v[i + 2], [-1.0, 13.0, 13.0, -1.0]);
        out[i + 1] = out[i].add(ci);
    }
    let last = cell(v[n - 1], v[n - 2], v[n - 3], v[n - 4], [9.0, 19.0, -5.0, 1.0]);
    out[n - 1] = out[n - 2].add(last);
    out
}

/// One cutoff: a union of disjoint closed intervals (sharp indicators).
#[derive(Clone, Debug)]
pub struct Cutoff {
    pub intervals: Vec<(f64, f64)>,
}

impl Cutoff {
    /// Ball indicator of radius r.
    pub fn ball(r: f64) -> Cutoff {
        Cutoff { intervals: vec![(-r, r)] }
    }

    /// Shell indicator {inner < |x| < outer}.
    pub fn shell(inner: f64, outer: f64) -> Cutoff {
        Cutoff { intervals: vec![(-outer, -inner), (inner, outer)] }
    }

    pub fn max_abs(&self) -> f64 {
        self.intervals.iter().fold(0.0, |m, &(a, b)| m.max(a.abs()).max(b.abs()))
    }

    /// Quadrature nodes and weights on the lattice, per interval, so no
    /// cell straddles an indicator boundary.
    fn nodes(&self, spacing: f64) -> (Vec<f64>, Vec<f64>) {
        let mut xs = Vec::new();
        let mut ws = Vec::new();
        for &(a, b) in &self.intervals {
            let m = ((b - a) / spacing).round() as usize;
            let w = segment_rule(spacing, m);
            let ja = (a / spacing).round();
            for (j, wj) in w.iter().enumerate() {
                xs.push((ja + j as f64) * spacing);
                ws.push(*wj);
            }
        }
        (xs, ws)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CutoffKind {
    ChiRChi,
    PsiRChi,
    ChiRPsi,
    PsiRPsi,
}

impl std::fmt::Display for CutoffKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CutoffKind::ChiRChi => "chi_R_chi",
            CutoffKind::PsiRChi => "psi_R_chi",
            CutoffKind::ChiRPsi => "chi_R_psi",
            CutoffKind::PsiRPsi => "psi_R_psi",
        };
        write!(f, "{s}")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CutoffNormResult {
    pub h: f64,
    pub energy_re: f64,
    pub energy_im: f64,
    pub which: CutoffKind,
    pub log10_norm: f64,
    pub norm_mantissa: f64,
    pub iterations: usize,
    pub rows: usize,
    pub cols: usize,
}

impl CutoffNormResult {
    pub fn norm(&self) -> LogF64 {
        LogF64::new(self.norm_mantissa, self.log10_norm * std::f64::consts::LN_10
            - self.norm_mantissa.abs().ln())
        .normalized()
    }

    pub fn ln_norm(&self) -> f64 {
        self.log10_norm * std::f64::consts::LN_10
    }
}

/// Weighted-kernel largest singular value: sqrt(w_i) a(x_i) G(x_i, y_j)
/// b(y_j) sqrt(w_j) approximates the L2 -> L2 norm of a R b.
pub fn cutoff_norm(
    kernel: &GreenKernel,
    which: CutoffKind,
    out_cut: &Cutoff,
    in_cut: &Cutoff,
    kernel_spacing: f64,
    max_iters: usize,
) -> Result<CutoffNormResult> {
    let (xs, wx) = out_cut.nodes(kernel_spacing);
    let (ys, wy) = in_cut.nodes(kernel_spacing);
    let rows = xs.len();
    let cols = ys.len();

    // assemble in log space and hoist the global scale
    let mut entries = vec![(Complex64::default(), 0.0f64); rows * cols];
    let mut theta = f64::NEG_INFINITY;
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            let g = kernel.eval(x, y);
            let amp = (wx[i] * wy[j]).sqrt();
            let e = g.mul_c64(Complex64::new(amp, 0.0));
            entries[i * cols + j] = (e.mantissa, e.ln_scale);
            if e.mantissa.norm() > 0.0 {
                theta = theta.max(e.ln_scale);
            }
        }
    }
    if !theta.is_finite() {
        return Err(Error::WronskianDegenerate { magnitude: 0.0 });
    }
    let m: Vec<Complex64> =
        entries.iter().map(|&(c, l)| c * (l - theta).exp()).collect();

    let (sigma, iterations) = largest_singular_value(&m, rows, cols, max_iters)?;
    let norm = LogF64::new(sigma, theta).normalized();
    Ok(CutoffNormResult {
        h: kernel.jost.h,
        energy_re: kernel.jost.energy().re,
        energy_im: kernel.jost.energy().im,
        which,
        log10_norm: norm.log10_abs(),
        norm_mantissa: norm.mantissa,
        iterations,
        rows,
        cols,
    })
}

/// Power iteration on M^H M with a deterministic start vector.
pub fn largest_singular_value(
    m: &[Complex64],
    rows: usize,
    cols: usize,
    max_iters: usize,
) -> Result<(f64, usize)> {
    let mut v = vec![Complex64::new(1.0 / (cols as f64).sqrt(), 0.0); cols];
    let mut w = vec![Complex64::default(); rows];
    let mut sigma_sq_prev = 0.0f64;
    let mut last_rel = f64::INFINITY;
    let mut consecutive = 0;
    for it in 1..=max_iters {
        for i in 0..rows {
            let mut acc = Complex64::default();
            let row = &m[i * cols..(i + 1) * cols];
            for (mj, vj) in row.iter().zip(v.iter()) {
                acc += mj * vj;
            }
            w[i] = acc;
        }
        let sigma_sq: f64 = w.iter().map(|c| c.norm_sqr()).sum();
        for vj in v.iter_mut() {
            *vj = Complex64::default();
        }
        for i in 0..rows {
            let wi = w[i];
            let row = &m[i * cols..(i + 1) * cols];
            for (vj, mj) in v.iter_mut().zip(row.iter()) {
                *vj += mj.conj() * wi;
            }
        }
        let nv: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if nv == 0.0 {
            return Ok((0.0, it));
        }
        for vj in v.iter_mut() {
            *vj /= nv;
        }
        last_rel = if sigma_sq_prev > 0.0 {
            ((sigma_sq / sigma_sq_prev) - 1.0).abs()
        } else {
            f64::INFINITY
        };
        if last_rel < 1e-11 {
            consecutive += 1;
            if consecutive >= 2 {
                return Ok((sigma_sq.sqrt(), it));
            }
        } else {
            consecutive = 0;
        }
        sigma_sq_prev = sigma_sq;
    }
    Err(Error::PowerIterationDiverged { iters: max_iters, rel: last_rel })
}
