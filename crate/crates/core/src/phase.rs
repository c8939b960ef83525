//! The outgoing phase: integral of sqrt(E0 - V) from the turning point.
//!
//! The integrand has a square-root zero at the turning point; the
//! substitution y = tp + t^2 makes it smooth there, so plain adaptive
//! Simpson reaches 1e-12. Past the linear-slope region the phase is
//! accumulated on the sample lattice once and reused.

use crate::grid::{adaptive_simpson, cumulative_integral, Grid};
use crate::potential::Potential;

#[derive(Clone, Debug)]
pub struct PhaseFunction {
    pub e0: f64,
    pub turning_point: f64,
    /// Lattice cache from `cache_start` (a node at or right of 3.5).
    cache_start: f64,
    phi_at_cache_start: f64,
    cache: Vec<f64>,
    spacing: f64,
}

impl PhaseFunction {
    /// Build for the slope-and-tail region of the potential: the turning
    /// point is located by bisection of V - E0 on [lo_bracket, 3.5].
    pub fn new<P: Potential>(pot: &P, e0: f64, x_max: f64, spacing: f64) -> PhaseFunction {
        let (mut a, mut b) = (2.0, 3.5);
        debug_assert!(pot.eval(a) > e0 && pot.eval(b) < e0);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if pot.eval(m) > e0 {
                a = m;
            } else {
                b = m;
            }
        }
        let tp = 0.5 * (a + b);

        let cache_start = (3.5f64 / spacing).round() * spacing;
        let phi_at_cache_start = phi_by_substitution(pot, e0, tp, cache_start);
        let n = ((x_max - cache_start) / spacing).round() as usize;
        let integrand: Vec<f64> = (0..=n)
            .map(|i| {
                let x = cache_start + i as f64 * spacing;
                (e0 - pot.eval(x)).max(0.0).sqrt()
            })
            .collect();
        let cache = cumulative_integral(spacing, &integrand);
        PhaseFunction { e0, turning_point: tp, cache_start, phi_at_cache_start, cache, spacing }
    }

    /// Phi(x) on the cached range [3.5, x_max]. Below 3.5 use
    /// `phi_by_substitution` (the slope region needs the potential anyway).
    pub fn eval(&self, x: f64) -> f64 {
        debug_assert!(x >= self.cache_start - 1e-12, "phase cache starts at 3.5");
        if x <= self.cache_start {
            return self.phi_at_cache_start;
        }
        let t = (x - self.cache_start) / self.spacing;
        let i = (t.floor() as usize).min(self.cache.len() - 1);
        let frac = t - i as f64;
        let base = if i + 1 < self.cache.len() {
            self.cache[i] * (1.0 - frac) + self.cache[i + 1] * frac
        } else {
            self.cache[i]
        };
        self.phi_at_cache_start + base
    }

    /// Derivative sqrt(E0 - V(x)) (zero below the turning point).
    pub fn slope<P: Potential>(&self, pot: &P, x: f64) -> f64 {
        (self.e0 - pot.eval(x)).max(0.0).sqrt()
    }
}

/// Phi(x) by adaptive quadrature with the turning-point substitution
/// y = tp + t^2; valid for x in [tp, 3.5] and a touch beyond.
pub fn phi_by_substitution<P: Potential>(pot: &P, e0: f64, tp: f64, x: f64) -> f64 {
    if x <= tp {
        return 0.0;
    }
    let t_max = (x - tp).sqrt();
    adaptive_simpson(
        &|t: f64| {
            let y = tp + t * t;
            2.0 * t * (e0 - pot.eval(y)).max(0.0).sqrt()
        },
        0.0,
        t_max,
        1e-13,
    )
}

/// Closed form (2/3)(x - tp)^{3/2}, exact where the slope is exactly linear.
pub fn phi_linear_slope(tp: f64, x: f64) -> f64 {
    if x <= tp {
        0.0
    } else {
        2.0 / 3.0 * (x - tp).powf(1.5)
    }
}

/// Convenience: a phase sampled on the lattice of `grid`.
pub fn phase_on_grid<P: Potential>(pot: &P, phase: &PhaseFunction, grid: &Grid) -> Vec<f64> {
    let _ = pot;
    grid.nodes.iter().map(|&x| phase.eval(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::build_paper_potential;
    use approx::assert_relative_eq;

    #[test]
    fn turning_point_matches_linear_slope() {
        let v = build_paper_potential(0.1).unwrap();
        let e0 = 1.05;
        let p = PhaseFunction::new(&v, e0, 7.5, 1e-3);
        // V = 4 - x on [2, 3.5] so V = E0 at x = 4 - E0
        assert_relative_eq!(p.turning_point, 4.0 - e0, epsilon = 1e-12);
    }

    #[test]
    fn quadrature_matches_closed_form_on_the_slope() {
        // Phi additivity oracle: substitution quadrature vs (2/3)(x-tp)^{3/2}
        let v = build_paper_potential(0.1).unwrap();
        let e0 = 1.04;
        let tp = 4.0 - e0;
        for &x in &[tp + 1e-4, tp + 0.1, 3.0, 3.25, 3.5] {
            let by_quad = phi_by_substitution(&v, e0, tp, x);
            assert_relative_eq!(by_quad, phi_linear_slope(tp, x), epsilon = 1e-10);
        }
    }

    #[test]
    fn cache_is_consistent_with_direct_quadrature() {
        let v = build_paper_potential(0.1).unwrap();
        let e0 = 1.05;
        let p = PhaseFunction::new(&v, e0, 7.5, 1e-3);
        for &x in &[3.5, 4.0, 5.0, 6.0, 7.0] {
            // direct: substitution to 3.5, adaptive Simpson beyond
            let direct = phi_by_substitution(&v, e0, p.turning_point, 3.5)
                + crate::grid::adaptive_simpson(
                    &|y: f64| (e0 - v.eval(y)).max(0.0).sqrt(),
                    3.5,
                    x,
                    1e-13,
                );
            assert_relative_eq!(p.eval(x), direct, epsilon = 1e-9);
        }
    }

    #[test]
    fn linear_beyond_the_support() {
        // V = 0 for x >= 4: Phi grows linearly at rate sqrt(E0)
        let v = build_paper_potential(0.1).unwrap();
        let e0 = 1.06;
        let p = PhaseFunction::new(&v, e0, 7.5, 1e-3);
        let d = (p.eval(7.0) - p.eval(6.0)) / 1.0;
        assert_relative_eq!(d, e0.sqrt(), epsilon = 1e-9);
    }
}
