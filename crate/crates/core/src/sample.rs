//! Sampled wave functions: values, semiclassical derivative h*u', and a
//! per-node log magnitude so forbidden-region growth never overflows.

use crate::error::Result;
use crate::grid::{segment_rule, Grid};
use crate::logscale::{LogC64, LogF64};
use num_complex::Complex64;
use std::io::Write;

#[derive(Clone, Debug)]
pub struct WaveSample {
    pub grid: Grid,
    /// Mantissas of u at the nodes; true value is values[i] * exp(ln_scale[i]).
    pub values: Vec<Complex64>,
    /// Mantissas of h * du/dx at the same scale.
    pub h_derivative: Vec<Complex64>,
    pub ln_scale: Vec<f64>,
    pub h: f64,
}

impl WaveSample {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value_at(&self, i: usize) -> LogC64 {
        LogC64::new(self.values[i], self.ln_scale[i])
    }

    pub fn h_deriv_at(&self, i: usize) -> LogC64 {
        LogC64::new(self.h_derivative[i], self.ln_scale[i])
    }

    /// Plain values (collapses the scale; fine for normalized samples).
    pub fn value_f64(&self, i: usize) -> Complex64 {
        self.values[i] * self.ln_scale[i].exp()
    }

    pub fn h_deriv_f64(&self, i: usize) -> Complex64 {
        self.h_derivative[i] * self.ln_scale[i].exp()
    }

    /// Multiply the whole sample by a log-scaled constant.
    pub fn scale_by(&mut self, factor: LogC64) {
        for i in 0..self.len() {
            self.values[i] *= factor.mantissa;
            self.h_derivative[i] *= factor.mantissa;
            self.ln_scale[i] += factor.ln_scale;
        }
    }

    /// L2 norm over [a, b] (endpoints snapped to nodes), in log form.
    pub fn norm_l2(&self, a: f64, b: f64) -> Result<LogF64> {
        let (i0, i1) = self.grid.index_range(a, b)?;
        Ok(self.weighted_norm(i0, i1, false))
    }

    /// Semiclassical H1 norm sqrt(int |u|^2 + |h u'|^2) over [a, b].
    pub fn norm_h1h(&self, a: f64, b: f64) -> Result<LogF64> {
        let (i0, i1) = self.grid.index_range(a, b)?;
        Ok(self.weighted_norm(i0, i1, true))
    }

    fn weighted_norm(&self, i0: usize, i1: usize, with_deriv: bool) -> LogF64 {
        let m = self.ln_scale[i0..=i1]
            .iter()
            .fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        if m == f64::NEG_INFINITY {
            return LogF64::zero();
        }
        let w = segment_rule(self.grid.spacing, i1 - i0);
        let mut acc = 0.0;
        for (k, wk) in w.iter().enumerate() {
            let i = i0 + k;
            let r = (2.0 * (self.ln_scale[i] - m)).exp();
            let mut s = self.values[i].norm_sqr();
            if with_deriv {
                s += self.h_derivative[i].norm_sqr();
            }
            acc += wk * s * r;
        }
        LogF64::new(acc.sqrt(), m).normalized()
    }

    /// max |u| over the whole sample, in log form.
    pub fn max_abs(&self) -> LogF64 {
        let mut best = LogF64::zero();
        for i in 0..self.len() {
            let v = LogF64::new(self.values[i].norm(), self.ln_scale[i]).normalized();
            if best.is_zero() || v.cmp_abs(best) == std::cmp::Ordering::Greater {
                best = v;
            }
        }
        best
    }

    /// Fold ln_scale into the mantissas where representable. Call after
    /// normalizing so downstream code can use plain values.
    pub fn flatten_scale(&mut self) {
        for i in 0..self.len() {
            let f = self.ln_scale[i].exp();
            self.values[i] *= f;
            self.h_derivative[i] *= f;
            self.ln_scale[i] = 0.0;
        }
    }

    /// CSV export: x, Re u, Im u, Re h u', Im h u', log10 scale.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "x,re_u,im_u,re_hdu,im_hdu,log10_scale")?;
        let l10 = std::f64::consts::LN_10;
        for i in 0..self.len() {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                self.grid.nodes[i],
                self.values[i].re,
                self.values[i].im,
                self.h_derivative[i].re,
                self.h_derivative[i].im,
                self.ln_scale[i] / l10
            )?;
        }
        Ok(())
    }
}

/// Semiclassical Wronskian W(f, g) = f * h g' - g * h f' at the node nearest
/// x, with the two samples' scales combined in log space. Grids must share
/// the lattice.
pub fn wronskian(f: &WaveSample, g: &WaveSample, x: f64) -> LogC64 {
    debug_assert!((f.grid.spacing - g.grid.spacing).abs() < 1e-15);
    let i = f.grid.index_of(x);
    let j = g.grid.index_of(x);
    let a = f.value_at(i).mul(g.h_deriv_at(j));
    let b = g.value_at(j).mul(f.h_deriv_at(i));
    a.sub(b)
}

/// Plain-f64 Wronskian for O(1)-normalized samples.
pub fn wronskian_f64(f: &WaveSample, g: &WaveSample, x: f64) -> Complex64 {
    wronskian(f, g, x).to_c64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sample_from_fn(
        a: f64,
        b: f64,
        n: usize,
        h: f64,
        f: impl Fn(f64) -> (Complex64, Complex64),
    ) -> WaveSample {
        let grid = Grid::uniform(a, b, n);
        let mut values = Vec::with_capacity(n);
        let mut deriv = Vec::with_capacity(n);
        for &x in &grid.nodes {
            let (u, du) = f(x);
            values.push(u);
            deriv.push(du);
        }
        WaveSample { grid, values, h_derivative: deriv, ln_scale: vec![0.0; n], h }
    }

    #[test]
    fn constant_has_unit_l2_norm() {
        let s = sample_from_fn(0.0, 1.0, 501, 1.0, |_| {
            (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
        });
        assert_relative_eq!(s.norm_l2(0.0, 1.0).unwrap().to_f64(), 1.0, max_relative = 1e-13);
    }

    #[test]
    fn gaussian_l2_norm_matches_closed_form() {
        // u = h^{-1/4} exp(-x^2 / 2h): ||u||_2 = pi^{1/4}
        let h = 0.05;
        let s = sample_from_fn(-3.0, 3.0, 6001, h, |x| {
            let u = h.powf(-0.25) * (-x * x / (2.0 * h)).exp();
            let du = -x / h * u;
            (Complex64::new(u, 0.0), Complex64::new(h * du, 0.0))
        });
        let target = std::f64::consts::PI.powf(0.25);
        assert_relative_eq!(s.norm_l2(-3.0, 3.0).unwrap().to_f64(), target, max_relative = 1e-10);
    }

    #[test]
    fn plane_wave_h1h_norm() {
        // u = exp(ix/h) on [0,1]: |u| = |h u'| = 1, H1_h norm sqrt(2)
        let h = 0.02;
        let s = sample_from_fn(0.0, 1.0, 2001, h, |x| {
            let u = Complex64::from_polar(1.0, x / h);
            (u, Complex64::new(0.0, 1.0) * u)
        });
        assert_relative_eq!(
            s.norm_h1h(0.0, 1.0).unwrap().to_f64(),
            2.0f64.sqrt(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn wronskian_of_sample_with_itself_vanishes() {
        let h = 0.1;
        let s = sample_from_fn(0.0, 1.0, 101, h, |x| {
            let u = Complex64::from_polar(1.3, 2.0 * x / h);
            (u, Complex64::new(0.0, 2.0) * u)
        });
        assert_eq!(wronskian_f64(&s, &s, 0.5).norm(), 0.0);
    }

    #[test]
    fn wronskian_of_opposite_plane_waves() {
        // f = exp(i sqrt(E) x / h), g = exp(-i sqrt(E) x / h): W = -2i sqrt(E)
        let h = 0.05;
        let e: f64 = 2.0;
        let k = e.sqrt();
        let f = sample_from_fn(0.0, 1.0, 1001, h, |x| {
            let u = Complex64::from_polar(1.0, k * x / h);
            (u, Complex64::new(0.0, k) * u)
        });
        let g = sample_from_fn(0.0, 1.0, 1001, h, |x| {
            let u = Complex64::from_polar(1.0, -k * x / h);
            (u, Complex64::new(0.0, -k) * u)
        });
        let w = wronskian_f64(&f, &g, 0.4);
        assert_relative_eq!(w.im, -2.0 * k, max_relative = 1e-12);
        assert!(w.re.abs() < 1e-12);
    }

    #[test]
    fn log_scaled_norm_stays_finite() {
        // |u|^2 spans 35 decades across the grid; the scaled quadrature must
        // reproduce the closed-form integral of exp(80 x)
        let grid = Grid::uniform(0.0, 1.0, 2001);
        let n = grid.nodes.len();
        let values = vec![Complex64::new(1.0, 0.0); n];
        let ln_scale: Vec<f64> = grid.nodes.iter().map(|&x| 40.0 * x).collect();
        let s = WaveSample {
            grid,
            values: values.clone(),
            h_derivative: values,
            ln_scale,
            h: 0.1,
        };
        let norm = s.norm_l2(0.0, 1.0).unwrap();
        // ln of the integral of exp(80x) over [0,1] is 80 + ln(1/80) up to e^-80
        let expect = 0.5 * (80.0 + (1.0f64 / 80.0).ln());
        assert_relative_eq!(norm.ln_abs(), expect, max_relative = 1e-6);
    }
}
