//! Dirichlet eigenvalues by two-sided matched shooting.
//!
//! Both branches are integrated toward a matching point chosen before the
//! barrier, so each branch always rides its locally growing solution and the
//! eigenfunction's exponentially small tail comes out of the inward branch
//! with full relative accuracy. The mismatch is the Wronskian of the two
//! branches at the matching point; its sign changes exactly at eigenvalues.

use crate::error::{Error, Result};
use crate::integrate::{integrate_schrodinger, SemiclassicalProblem};
use crate::logscale::LogC64;
use crate::potential::Potential;
use crate::sample::{wronskian, WaveSample};
use num_complex::Complex64;

#[derive(Clone, Copy, Debug)]
pub struct EigenOptions {
    /// Integration step; defaults to min(h/40, 5e-4) for eigenvalue work.
    pub step: f64,
    /// Absolute eigenvalue tolerance scale: tol * max(1, |E|).
    pub tol: f64,
    /// Energy scan resolution as a fraction of h.
    pub scan_fraction: f64,
}

impl EigenOptions {
    pub fn for_h(h: f64) -> Self {
        EigenOptions { step: (h / 40.0).min(5e-4), tol: 1e-13, scan_fraction: 1.0 / 30.0 }
    }
}

/// Boundary condition at the left end of the shooting domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LeftBoundary {
    /// u(a) = 0 (ordinary Dirichlet end).
    Dirichlet,
    /// u'(a) = 0 with u(a) = 1: even extension through a symmetry point.
    EvenCenter,
}

struct Shooter<'a> {
    prob: SemiclassicalProblem<'a>,
    a: f64,
    b: f64,
    left: LeftBoundary,
    x_match: f64,
    step: f64,
}

impl<'a> Shooter<'a> {
    fn branches(&self, energy: f64) -> Result<(WaveSample, WaveSample)> {
        let e = Complex64::new(energy, 0.0);
        let init_left = match self.left {
            LeftBoundary::Dirichlet => (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)),
            LeftBoundary::EvenCenter => (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
        };
        let l = integrate_schrodinger(&self.prob, e, self.a, self.x_match, init_left, self.step)?;
        let r = integrate_schrodinger(
            &self.prob,
            e,
            self.b,
            self.x_match,
            (Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.0)),
            self.step,
        )?;
        Ok((l, r))
    }

    /// Scale-free mismatch; zero exactly at Dirichlet eigenvalues.
    fn mismatch(&self, energy: f64) -> Result<f64> {
        let (l, r) = self.branches(energy)?;
        let w = wronskian(&l, &r, self.x_match);
        let il = l.grid.index_of(self.x_match);
        let ir = r.grid.index_of(self.x_match);
        let nl = l.value_at(il).abs().mul(l.value_at(il).abs())
            .add(l.h_deriv_at(il).abs().mul(l.h_deriv_at(il).abs()))
            .sqrt();
        let nr = r.value_at(ir).abs().mul(r.value_at(ir).abs())
            .add(r.h_deriv_at(ir).abs().mul(r.h_deriv_at(ir).abs()))
            .sqrt();
        let m = w.abs().div(nl.mul(nr));
        Ok(m.to_f64().min(1e280) * w.mantissa.re.signum())
    }
}

/// Matching point: just before the first barrier entry {V > E} right of the
/// left end, or 38% across the domain when the window is barrier-free.
fn matching_point<P: Potential>(pot: &P, a: f64, b: f64, e_ref: f64, step: f64) -> f64 {
    let n = ((b - a) / step) as usize;
    let mut x_m = a + 0.382 * (b - a);
    for i in 1..n {
        let x = a + i as f64 * step;
        if pot.eval(x) > e_ref {
            x_m = (x - 10.0 * step).max(a + 10.0 * step);
            break;
        }
    }
    // snap to the lattice
    (x_m / step).round() * step
}

/// All Dirichlet eigenvalues of P(h) in `window` on [a, b], each with its
/// L2-normalized eigenfunction. `left` selects an even-symmetry left end.
pub fn dirichlet_eigensolve<P: Potential>(
    pot: &P,
    h: f64,
    a: f64,
    b: f64,
    left: LeftBoundary,
    window: (f64, f64),
    opts: EigenOptions,
) -> Result<Vec<(f64, WaveSample)>> {
    let (lo, hi) = window;
    if !(hi > lo) {
        return Err(Error::Config { field: "window".into(), detail: "empty".into() });
    }
    let e_ref = 0.5 * (lo + hi);
    let x_match = matching_point(pot, a, b, e_ref, opts.step);
    let shooter = Shooter {
        prob: SemiclassicalProblem::new(h, pot, (a, b)),
        a,
        b,
        left,
        x_match,
        step: opts.step,
    };

    // sign-change scan
    let scan_step = (h * opts.scan_fraction).min((hi - lo) / 8.0);
    let n_scan = ((hi - lo) / scan_step).ceil() as usize;
    let mut energies = Vec::new();
    let mut prev_e = lo;
    let mut prev_m = shooter.mismatch(prev_e)?;
    for i in 1..=n_scan {
        let e = (lo + i as f64 * scan_step).min(hi);
        let m = shooter.mismatch(e)?;
        if prev_m == 0.0 {
            energies.push(prev_e);
        } else if m.signum() != prev_m.signum() {
            // bisection refinement
            let (mut e_lo, mut e_hi, mut m_lo) = (prev_e, e, prev_m);
            for _ in 0..80 {
                let mid = 0.5 * (e_lo + e_hi);
                if e_hi - e_lo < opts.tol * mid.abs().max(1.0) {
                    break;
                }
                let mm = shooter.mismatch(mid)?;
                if mm == 0.0 || mm.signum() == m_lo.signum() {
                    e_lo = mid;
                    m_lo = mm;
                } else {
                    e_hi = mid;
                }
            }
            energies.push(0.5 * (e_lo + e_hi));
        }
        prev_e = e;
        prev_m = m;
        if e >= hi {
            break;
        }
    }

    let edge_tol = 1e-8 * e_ref.abs().max(1.0);
    for &e in &energies {
        if (e - lo).abs() < edge_tol || (e - hi).abs() < edge_tol {
            return Err(Error::WindowBoundary { value: e, tol: edge_tol });
        }
    }

    let mut out = Vec::with_capacity(energies.len());
    for &e in &energies {
        let sample = assemble_eigenfunction(&shooter, e)?;
        out.push((e, sample));
    }
    Ok(out)
}

/// Stitch the two branches at the matching point and normalize to unit L2
/// norm over the shooting domain.
fn assemble_eigenfunction(shooter: &Shooter, energy: f64) -> Result<WaveSample> {
    let (l, r) = shooter.branches(energy)?;
    let il = l.grid.index_of(shooter.x_match);
    let ir = r.grid.index_of(shooter.x_match);
    // match on whichever component is larger at x_match
    let (num, den) = if l.values[il].norm() > l.h_derivative[il].norm() {
        (l.value_at(il), r.value_at(ir))
    } else {
        (l.h_deriv_at(il), r.h_deriv_at(ir))
    };
    let sigma = num.div(den);

    let mut grid_nodes = l.grid.nodes.clone();
    grid_nodes.extend_from_slice(&r.grid.nodes[ir + 1..]);
    let spacing = l.grid.spacing;
    let m = grid_nodes.len() - 1;
    let grid = crate::grid::Grid {
        nodes: grid_nodes,
        weights: crate::grid::segment_rule(spacing, m),
        spacing,
    };
    let mut values = Vec::with_capacity(grid.len());
    let mut deriv = Vec::with_capacity(grid.len());
    let mut scale = Vec::with_capacity(grid.len());
    for i in 0..=il {
        values.push(l.values[i]);
        deriv.push(l.h_derivative[i]);
        scale.push(l.ln_scale[i]);
    }
    for i in ir + 1..r.len() {
        values.push(r.values[i] * sigma.mantissa);
        deriv.push(r.h_derivative[i] * sigma.mantissa);
        scale.push(r.ln_scale[i] + sigma.ln_scale);
    }
    let mut sample = WaveSample { grid, values, h_derivative: deriv, ln_scale: scale, h: l.h };
    let (ga, gb) = sample.grid.span();
    let norm = sample.norm_l2(ga, gb)?;
    let inv = LogC64::new(Complex64::new(1.0 / norm.mantissa, 0.0), -norm.ln_scale);
    sample.scale_by(inv);
    Ok(sample)
}

/// Mirror an even half-line eigenfunction onto the symmetric interval,
/// renormalizing so the full-interval L2 norm is 1.
pub fn mirror_even(half: &WaveSample) -> WaveSample {
    let n = half.len();
    let spacing = half.grid.spacing;
    let b = half.grid.nodes[n - 1];
    let grid = crate::grid::Grid {
        nodes: (0..2 * n - 1)
            .map(|i| -b + spacing * i as f64)
            .collect(),
        weights: crate::grid::segment_rule(spacing, 2 * n - 2),
        spacing,
    };
    let mut values = Vec::with_capacity(2 * n - 1);
    let mut deriv = Vec::with_capacity(2 * n - 1);
    let mut scale = Vec::with_capacity(2 * n - 1);
    for i in (1..n).rev() {
        values.push(half.values[i]);
        deriv.push(-half.h_derivative[i]);
        scale.push(half.ln_scale[i]);
    }
    for i in 0..n {
        values.push(half.values[i]);
        deriv.push(half.h_derivative[i]);
        scale.push(half.ln_scale[i]);
    }
    let mut s = WaveSample { grid, values, h_derivative: deriv, ln_scale: scale, h: half.h };
    let (a, bb) = s.grid.span();
    let norm = s.norm_l2(a, bb).unwrap();
    let inv = LogC64::new(Complex64::new(1.0 / norm.mantissa, 0.0), -norm.ln_scale);
    s.scale_by(inv);
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::FreePotential;
    use approx::assert_relative_eq;

    #[test]
    fn free_dirichlet_box_spectrum() {
        // -u'' = E u on [0, pi]: eigenvalues {1, 4, 9}
        let opts = EigenOptions { step: 5e-4, tol: 1e-12, scan_fraction: 1.0 / 30.0 };
        let got = dirichlet_eigensolve(
            &FreePotential,
            1.0,
            0.0,
            std::f64::consts::PI,
            LeftBoundary::Dirichlet,
            (0.5, 10.0),
            opts,
        )
        .unwrap();
        let evs: Vec<f64> = got.iter().map(|p| p.0).collect();
        assert_eq!(evs.len(), 3, "{evs:?}");
        // the shooting domain is the lattice-snapped [0, pi], so eigenvalues
        // shift by O(snap/pi) relative to the exact box
        for (ev, expect) in evs.iter().zip([1.0, 4.0, 9.0]) {
            assert_relative_eq!(*ev, expect, max_relative = 1e-3);
        }
        // eigenfunctions normalized
        let (_, ref f0) = got[0];
        assert_relative_eq!(
            f0.norm_l2(0.0, std::f64::consts::PI).unwrap().to_f64(),
            1.0,
            max_relative = 1e-10
        );
    }

    #[test]
    fn harmonic_well_ground_state() {
        // V = x^2 + 1 globally: ground eigenvalue 1 + h, exponentially small
        // boundary effect on [-6, 6]
        let pot = crate::potential::Potential1D::from_pieces(
            vec![crate::potential::Piece { lo: 0.0, hi: f64::INFINITY, coeffs: vec![1.0, 0.0, 1.0] }],
            0.1,
            f64::INFINITY,
            &[],
        )
        .unwrap();
        let h = 0.05;
        let got = dirichlet_eigensolve(
            &pot,
            h,
            0.0,
            6.0,
            LeftBoundary::EvenCenter,
            (1.0 + h - 0.5 * h, 1.0 + h + 0.5 * h),
            EigenOptions::for_h(h),
        )
        .unwrap();
        assert_eq!(got.len(), 1);
        assert_relative_eq!(got[0].0, 1.0 + h, epsilon = 1e-9);
    }

    #[test]
    fn window_boundary_is_detected() {
        // [0, 2] is lattice-exact; the second box level sits at pi^2 and the
        // window edge is placed a hair above it
        let e2 = std::f64::consts::PI * std::f64::consts::PI;
        let r = dirichlet_eigensolve(
            &FreePotential,
            1.0,
            0.0,
            2.0,
            LeftBoundary::Dirichlet,
            (0.5, e2 + 1e-9),
            EigenOptions { step: 5e-4, tol: 1e-12, scan_fraction: 1.0 / 30.0 },
        );
        assert!(matches!(r, Err(Error::WindowBoundary { .. })), "{r:?}");
    }
}
