//! WKB solutions past the turning point, the Wronskian transport vector,
//! the Airy solution through the turning region, and their matching.

use crate::airy::airy_ai;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::logscale::{LogC64, LogF64};
use crate::phase::PhaseFunction;
use crate::potential::Potential;
use crate::sample::{wronskian, WaveSample};
use num_complex::Complex64;

/// Oscillatory-branch amplitude floor: below this E0 - V margin the WKB
/// normalization (E0 - V)^{-1/4} degenerates.
const WKB_MARGIN: f64 = 0.05;

/// The pair (E0 - V)^{-1/4} exp(+-i Phi/h) with analytic h-derivatives.
/// Sampled on the lattice over [3.25, x_max]: the oscillatory branch is
/// valid from 3.25 (margin E0 - V >= 0.25) and the turning-region matching
/// compares against it there.
pub fn wkb_solutions<P: Potential>(
    pot: &P,
    phase: &PhaseFunction,
    e0: f64,
    h: f64,
    x_max: f64,
    spacing: f64,
) -> Result<(WaveSample, WaveSample)> {
    let grid = Grid::lattice(3.25, x_max, spacing);
    let mut margin = f64::INFINITY;
    for &x in &grid.nodes {
        margin = margin.min(e0 - pot.eval(x));
    }
    if margin < WKB_MARGIN {
        return Err(Error::TurningPointProximity { margin, required: WKB_MARGIN });
    }

    let n = grid.len();
    let mut vp = Vec::with_capacity(n);
    let mut vp_d = Vec::with_capacity(n);
    let mut vm = Vec::with_capacity(n);
    let mut vm_d = Vec::with_capacity(n);
    for &x in &grid.nodes {
        let ev = e0 - pot.eval(x);
        let dv = pot.deriv(x);
        let amp = ev.powf(-0.25);
        // below the cache start the phase comes from the substitution rule
        let phi = if x < 3.5 {
            crate::phase::phi_by_substitution(pot, e0, phase.turning_point, x)
        } else {
            phase.eval(x)
        };
        let osc = Complex64::from_polar(1.0, phi / h);
        // h d/dx [(E0-V)^{-1/4} e^{+-i Phi/h}]
        //   = [h V'/4 (E0-V)^{-5/4} +- i (E0-V)^{1/4}] e^{+-i Phi/h}
        let damp = h * dv / 4.0 * ev.powf(-1.25);
        let kin = ev.powf(0.25);
        vp.push(amp * osc);
        vp_d.push((Complex64::new(damp, kin)) * osc);
        vm.push(amp * osc.conj());
        vm_d.push((Complex64::new(damp, -kin)) * osc.conj());
    }
    let zeros = vec![0.0; n];
    Ok((
        WaveSample {
            grid: grid.clone(),
            values: vp,
            h_derivative: vp_d,
            ln_scale: zeros.clone(),
            h,
        },
        WaveSample { grid, values: vm, h_derivative: vm_d, ln_scale: zeros, h },
    ))
}

/// The transported pair (W(v, v+), W(v, v-)) along the lattice.
#[derive(Clone, Debug)]
pub struct WronskVector {
    pub xs: Vec<f64>,
    pub w_plus: Vec<LogC64>,
    pub w_minus: Vec<LogC64>,
    /// W(v+, v-) at the same nodes (constant -2i up to round-off).
    pub w_pm: Vec<Complex64>,
}

impl WronskVector {
    pub fn magnitude_at(&self, x: f64) -> LogF64 {
        let i = self.index_of(x);
        self.w_plus[i]
            .abs()
            .mul(self.w_plus[i].abs())
            .add(self.w_minus[i].abs().mul(self.w_minus[i].abs()))
            .sqrt()
    }

    pub fn index_of(&self, x: f64) -> usize {
        let spacing = self.xs[1] - self.xs[0];
        (((x - self.xs[0]) / spacing).round() as i64).clamp(0, self.xs.len() as i64 - 1) as usize
    }

    /// |exp(i pi/4) w_plus - exp(-i pi/4) w_minus| at x, the quantity whose
    /// lower bound rules out a Dirichlet-type quantization at the box edge.
    pub fn connection_combination(&self, x: f64) -> LogF64 {
        let i = self.index_of(x);
        let q = std::f64::consts::FRAC_PI_4;
        let a = self.w_plus[i].mul_c64(Complex64::from_polar(1.0, q));
        let b = self.w_minus[i].mul_c64(Complex64::from_polar(1.0, -q));
        a.sub(b).abs()
    }
}

/// Pointwise Wronskians of v against the WKB pair on the overlap of their
/// grids.
pub fn transport_wronskians(
    v: &WaveSample,
    v_plus: &WaveSample,
    v_minus: &WaveSample,
) -> WronskVector {
    let (lo_p, hi_p) = v_plus.grid.span();
    let (lo_v, hi_v) = v.grid.span();
    let lo = lo_p.max(lo_v);
    let hi = hi_p.min(hi_v);
    let spacing = v_plus.grid.spacing;
    let n = ((hi - lo) / spacing).round() as usize;
    let mut xs = Vec::with_capacity(n + 1);
    let mut w_plus = Vec::with_capacity(n + 1);
    let mut w_minus = Vec::with_capacity(n + 1);
    let mut w_pm = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let x = lo + i as f64 * spacing;
        xs.push(x);
        w_plus.push(wronskian(v, v_plus, x));
        w_minus.push(wronskian(v, v_minus, x));
        w_pm.push(crate::sample::wronskian_f64(v_plus, v_minus, x));
    }
    WronskVector { xs, w_plus, w_minus, w_pm }
}

/// Largest relative defect of the linear-algebra reconstruction
/// v = (w_minus v+ - w_plus v-)/W(v+,v-) over the transport range.
pub fn reconstruction_defect(
    v: &WaveSample,
    v_plus: &WaveSample,
    v_minus: &WaveSample,
    tw: &WronskVector,
) -> f64 {
    let mut vmax = LogF64::zero();
    for &x in &tw.xs {
        let i = v.grid.index_of(x);
        let m = v.value_at(i).abs();
        if vmax.is_zero() || m.cmp_abs(vmax) == std::cmp::Ordering::Greater {
            vmax = m;
        }
    }
    let mut worst: f64 = 0.0;
    for (k, &x) in tw.xs.iter().enumerate() {
        let iv = v.grid.index_of(x);
        let ip = v_plus.grid.index_of(x);
        let num = tw.w_minus[k]
            .mul(LogC64::from_c64(v_plus.values[ip]))
            .sub(tw.w_plus[k].mul(LogC64::from_c64(v_minus.values[ip])));
        let rec = num.div(LogC64::from_c64(tw.w_pm[k]));
        let defect = rec.sub(v.value_at(iv)).abs().div(vmax).to_f64();
        worst = worst.max(defect);
        // derivative version
        let numd = tw.w_minus[k]
            .mul(LogC64::from_c64(v_plus.h_derivative[ip]))
            .sub(tw.w_plus[k].mul(LogC64::from_c64(v_minus.h_derivative[ip])));
        let recd = numd.div(LogC64::from_c64(tw.w_pm[k]));
        worst = worst.max(recd.sub(v.h_deriv_at(iv)).abs().div(vmax).to_f64());
    }
    worst
}

/// Measured constant C in |d/dx w(x)| <= C h |w(x)| along the transport.
pub fn transport_drift_constant(tw: &WronskVector, h: f64) -> f64 {
    let spacing = tw.xs[1] - tw.xs[0];
    let mut c: f64 = 0.0;
    for k in 1..tw.xs.len() - 1 {
        let dp = tw.w_plus[k + 1].sub(tw.w_plus[k - 1]).abs().scale_f64(0.5 / spacing);
        let dm = tw.w_minus[k + 1].sub(tw.w_minus[k - 1]).abs().scale_f64(0.5 / spacing);
        let mag = tw.w_plus[k]
            .abs()
            .mul(tw.w_plus[k].abs())
            .add(tw.w_minus[k].abs().mul(tw.w_minus[k].abs()))
            .sqrt();
        let ratio = dp.add(dm).div(mag).to_f64() / h;
        c = c.max(ratio);
    }
    c
}

/// Airy-built exact solution through the turning region [2, 3.5] where the
/// slope is exactly linear: w(x) = 2i sqrt(pi) h^{-1/6} Ai(h^{-2/3}(tp - x)),
/// decaying into the barrier.
pub fn turning_solution(e0: f64, h: f64, spacing: f64) -> WaveSample {
    let grid = Grid::lattice(2.0, 3.5, spacing);
    let tp = 4.0 - e0;
    let pref = Complex64::new(0.0, 2.0 * std::f64::consts::PI.sqrt() * h.powf(-1.0 / 6.0));
    let n = grid.len();
    let mut values = Vec::with_capacity(n);
    let mut deriv = Vec::with_capacity(n);
    for &x in &grid.nodes {
        let y = h.powf(-2.0 / 3.0) * (tp - x);
        let (ai, aip) = airy_ai(y);
        values.push(pref * ai);
        deriv.push(-pref * h.powf(1.0 / 3.0) * aip);
    }
    WaveSample { grid, values, h_derivative: deriv, ln_scale: vec![0.0; n], h }
}

/// Connection defect: max over [3.25, 3.5] of the 2-vector distance between
/// (w, h w') and exp(i pi/4)(v+, h v+') - exp(-i pi/4)(v-, h v-').
pub fn connection_defect(w: &WaveSample, v_plus: &WaveSample, v_minus: &WaveSample) -> f64 {
    let q = std::f64::consts::FRAC_PI_4;
    let ep = Complex64::from_polar(1.0, q);
    let em = Complex64::from_polar(1.0, -q);
    let spacing = w.grid.spacing;
    let n = (0.25 / spacing).round() as usize;
    let mut worst: f64 = 0.0;
    for i in 0..=n {
        let x = 3.25 + i as f64 * spacing;
        let iw = w.grid.index_of(x);
        let ip = v_plus.grid.index_of(x);
        let dv = w.values[iw] - (ep * v_plus.values[ip] - em * v_minus.values[ip]);
        let dd = w.h_derivative[iw] - (ep * v_plus.h_derivative[ip] - em * v_minus.h_derivative[ip]);
        worst = worst.max((dv.norm_sqr() + dd.norm_sqr()).sqrt());
    }
    worst
}

/// Wronskian of v against the Airy solution: its value (constant in exact
/// arithmetic), its relative variation over [2, 3.5], and the connection
/// combination |e^{i pi/4} w1 - e^{-i pi/4} w2| at 3.5 with |(w1,w2)(3.5)|.
pub struct MatchingDefect {
    pub wronskian_vw: LogC64,
    pub wvw_rel_variation: f64,
    pub funal_lhs: LogF64,
    pub v_size: LogF64,
}

pub fn matching_defect(v: &WaveSample, w: &WaveSample, tw: &WronskVector) -> MatchingDefect {
    let probes = [2.1, 2.4, 2.75, 3.1, 3.45];
    let mut ws: Vec<LogC64> = probes.iter().map(|&x| wronskian(v, w, x)).collect();
    let w_ref = ws[2];
    let mut rel: f64 = 0.0;
    for wv in &ws {
        rel = rel.max(wv.sub(w_ref).abs().div(w_ref.abs()).to_f64());
    }
    let funal_lhs = tw.connection_combination(3.5);
    let v_size = tw.magnitude_at(3.5);
    MatchingDefect {
        wronskian_vw: ws.remove(2),
        wvw_rel_variation: rel,
        funal_lhs,
        v_size,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::SemiclassicalProblem;
    use crate::potential::build_paper_potential;
    use approx::assert_relative_eq;

    #[test]
    fn wkb_amplitude_and_pair_wronskian() {
        let v = build_paper_potential(0.1).unwrap();
        let h = 0.05;
        let e0 = 1.0 + h;
        let phase = PhaseFunction::new(&v, e0, 7.5, 1e-3);
        let (vp, vm) = wkb_solutions(&v, &phase, e0, h, 7.0, 1e-3).unwrap();
        // |v+-| = (E0 - V)^{-1/4}; at x = 5.5 the potential vanishes
        let i = vp.grid.index_of(5.5);
        assert_relative_eq!(vp.values[i].norm(), e0.powf(-0.25), max_relative = 1e-12);
        // W(v+, v-) = -2i exactly for the analytic ansatz derivatives
        for &x in &[3.5, 4.0, 5.0, 6.9] {
            let w = crate::sample::wronskian_f64(&vp, &vm, x);
            assert!((w - Complex64::new(0.0, -2.0)).norm() < 1e-12, "W = {w}");
        }
    }

    #[test]
    fn wkb_residual_is_order_h_squared() {
        // apply P - E0 by finite differences; residual/h^2 stays bounded
        // uniformly in h (the constant reflects the glue's curvature)
        let v = build_paper_potential(0.1).unwrap();
        let mut ratios = Vec::new();
        for &h in &[0.1, 0.05, 0.03] {
            let e0 = 1.0 + h;
            let phase = PhaseFunction::new(&v, e0, 7.5, 1e-3);
            let (vp, _) = wkb_solutions(&v, &phase, e0, h, 7.0, 1e-3).unwrap();
            let d = vp.grid.spacing;
            let mut worst: f64 = 0.0;
            for i in 200..vp.len() - 200 {
                let x = vp.grid.nodes[i];
                let lap = (vp.values[i + 1] - 2.0 * vp.values[i] + vp.values[i - 1]) / (d * d);
                let resid = -h * h * lap + (v.eval(x) - e0) * vp.values[i];
                worst = worst.max(resid.norm());
            }
            ratios.push(worst / (h * h));
        }
        let max = ratios.iter().cloned().fold(0.0, f64::max);
        let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max < 100.0, "residual constant {max:.3e}");
        assert!(max / min < 3.0, "residual/h^2 not uniform: {ratios:?}");
    }

    #[test]
    fn turning_solution_solves_the_ode_exactly() {
        // V = 4 - x on [2, 3.5]: the Airy combination is an exact solution;
        // apply P - E0 by finite differences and compare to the FD floor
        let v = build_paper_potential(0.1).unwrap();
        let h = 0.05;
        let e0 = 1.0 + h;
        let w = turning_solution(e0, h, 1e-3);
        let d = w.grid.spacing;
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for i in 1..w.len() - 1 {
            let x = w.grid.nodes[i];
            let lap = (w.values[i + 1] - 2.0 * w.values[i] + w.values[i - 1]) / (d * d);
            let resid = -h * h * lap + (v.eval(x) - e0) * w.values[i];
            worst = worst.max(resid.norm());
            scale = scale.max(w.values[i].norm());
        }
        // FD truncation ~ (d/h)^2 h^2 |w''''| d^2/12; anything at the 1e-5
        // scale relative to max|w| means the Airy values are consistent
        assert!(worst / scale < 2e-5, "relative residual {:.3e}", worst / scale);
    }

    #[test]
    fn airy_matches_integrated_solution() {
        // integrate from the Airy data at 2.0 and compare at 3.5
        let v = build_paper_potential(0.1).unwrap();
        let h = 0.05;
        let e0 = 1.0 + h;
        let w = turning_solution(e0, h, 1e-3);
        let prob = SemiclassicalProblem::new(h, &v, (2.0, 3.5));
        let s = crate::integrate::integrate_schrodinger(
            &prob,
            Complex64::new(e0, 0.0),
            2.0,
            3.5,
            (w.value_f64(0), w.h_deriv_f64(0)),
            1e-3,
        )
        .unwrap();
        let i = s.grid.index_of(3.5);
        let j = w.grid.index_of(3.5);
        let rel = (s.value_f64(i) - w.value_f64(j)).norm() / w.value_f64(j).norm();
        assert!(rel < 1e-6, "mismatch {rel:.3e}");
    }
}
