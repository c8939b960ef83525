//! Uniform grids with composite-Simpson quadrature weights.
//!
//! Production grids all live on the absolute lattice {j * spacing} so that
//! cutoff radii, matching points and sample exchanges between modules land
//! on nodes exactly. Interval endpoints passed to the integration helpers
//! are snapped to the nearest node; callers choose lattice-aligned
//! endpoints wherever the result is asserted tightly.

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Grid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub spacing: f64,
}

impl Grid {
    /// Uniform grid with n >= 2 nodes on [a, b].
    pub fn uniform(a: f64, b: f64, n: usize) -> Grid {
        assert!(n >= 2 && b > a);
        let spacing = (b - a) / (n - 1) as f64;
        let nodes: Vec<f64> = (0..n).map(|i| a + spacing * i as f64).collect();
        let weights = segment_rule(spacing, n - 1);
        Grid { nodes, weights, spacing }
    }

    /// Grid on [a, b] with nodes on the absolute lattice {j * spacing}.
    /// a and b are snapped to the lattice first.
    pub fn lattice(a: f64, b: f64, spacing: f64) -> Grid {
        let ja = (a / spacing).round() as i64;
        let jb = (b / spacing).round() as i64;
        assert!(jb > ja, "degenerate lattice grid [{a}, {b}] at spacing {spacing}");
        let nodes: Vec<f64> = (ja..=jb).map(|j| j as f64 * spacing).collect();
        let weights = segment_rule(spacing, (jb - ja) as usize);
        Grid { nodes, weights, spacing }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn span(&self) -> (f64, f64) {
        (self.nodes[0], *self.nodes.last().unwrap())
    }

    /// Index of the node nearest to x.
    pub fn index_of(&self, x: f64) -> usize {
        let i = ((x - self.nodes[0]) / self.spacing).round() as i64;
        i.clamp(0, self.len() as i64 - 1) as usize
    }

    /// Node range [i0, i1] covering [a, b] after snapping; errors when the
    /// snapped interval is empty.
    pub fn index_range(&self, a: f64, b: f64) -> Result<(usize, usize)> {
        let (i0, i1) = (self.index_of(a), self.index_of(b));
        if i1 <= i0 {
            return Err(Error::EmptyInterval { a, b });
        }
        Ok((i0, i1))
    }

    /// Quadrature of node-sampled values over [a, b] (snapped to nodes).
    pub fn integrate_range<F: Fn(usize) -> f64>(&self, a: f64, b: f64, f: F) -> Result<f64> {
        let (i0, i1) = self.index_range(a, b)?;
        let w = segment_rule(self.spacing, i1 - i0);
        Ok(w.iter().enumerate().map(|(k, wk)| wk * f(i0 + k)).sum())
    }

    /// Quadrature over the whole grid.
    pub fn integrate<F: Fn(usize) -> f64>(&self, f: F) -> f64 {
        self.weights.iter().enumerate().map(|(i, w)| w * f(i)).sum()
    }
}

/// Composite quadrature weights for m uniform cells of width `spacing`:
/// Simpson where the cell count allows, a 3/8 block to absorb an odd cell,
/// trapezoid only for a single cell.
pub fn segment_rule(spacing: f64, m: usize) -> Vec<f64> {
    let n = m + 1;
    let mut w = vec![0.0; n];
    match m {
        0 => {}
        1 => {
            w[0] = 0.5 * spacing;
            w[1] = 0.5 * spacing;
        }
        _ => {
            let simpson_cells = if m % 2 == 0 { m } else { m - 3 };
            let s = spacing / 3.0;
            if simpson_cells > 0 {
                w[0] += s;
                for i in 1..simpson_cells {
                    w[i] += if i % 2 == 1 { 4.0 * s } else { 2.0 * s };
                }
                w[simpson_cells] += s;
            }
            if m % 2 == 1 {
                // 3/8 rule over the last three cells
                let t = 3.0 * spacing / 8.0;
                let base = m - 3;
                w[base] += t;
                w[base + 1] += 3.0 * t;
                w[base + 2] += 3.0 * t;
                w[base + 3] += t;
            }
        }
    }
    w
}

/// Fourth-order cumulative integral of node-sampled values: out[i] is the
/// integral from the first node to node i.
pub fn cumulative_integral<T>(spacing: f64, v: &[T]) -> Vec<T>
where
    T: Copy + Default + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
{
    let n = v.len();
    let mut out = vec![T::default(); n];
    if n < 2 {
        return out;
    }
    if n < 4 {
        // trapezoid fallback for tiny grids
        for i in 1..n {
            out[i] = out[i - 1] + (v[i - 1] + v[i]) * (0.5 * spacing);
        }
        return out;
    }
    let c = spacing / 24.0;
    // first cell: cubic through nodes 0..3
    out[1] = out[0] + (v[0] * 9.0 + v[1] * 19.0 + v[2] * -5.0 + v[3] * 1.0) * c;
    for i in 1..n - 2 {
        out[i + 1] =
            out[i] + (v[i - 1] * -1.0 + v[i] * 13.0 + v[i + 1] * 13.0 + v[i + 2] * -1.0) * c;
    }
    // last cell: mirrored one-sided cubic
    out[n - 1] =
        out[n - 2] + (v[n - 1] * 9.0 + v[n - 2] * 19.0 + v[n - 3] * -5.0 + v[n - 4] * 1.0) * c;
    out
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    recurse(f, a, b, fa, fm, fb, simpson(fa, fm, fb, b - a), tol, 48)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_sum_to_length() {
        for m in [1usize, 2, 3, 4, 5, 8, 11, 100, 101] {
            let w = segment_rule(0.01, m);
            let total: f64 = w.iter().sum();
            assert_relative_eq!(total, 0.01 * m as f64, max_relative = 1e-12);
            assert!(w.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn quadrature_of_polynomial_is_exact() {
        let g = Grid::uniform(0.0, 2.0, 41);
        let val = g.integrate(|i| {
            let x = g.nodes[i];
            x * x * x - x
        });
        assert_relative_eq!(val, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn range_integration_snaps_to_nodes() {
        let g = Grid::lattice(0.0, 1.0, 1e-3);
        let one = g.integrate_range(0.0, 1.0, |_| 1.0).unwrap();
        assert_relative_eq!(one, 1.0, max_relative = 1e-13);
        assert!(g.integrate_range(0.5, 0.5, |_| 1.0).is_err());
    }

    #[test]
    fn gaussian_integral() {
        // integral of exp(-x^2) over [-8, 8] ~ sqrt(pi)
        let g = Grid::uniform(-8.0, 8.0, 3201);
        let v = g.integrate(|i| (-g.nodes[i] * g.nodes[i]).exp());
        assert_relative_eq!(v, std::f64::consts::PI.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn cumulative_matches_antiderivative() {
        let g = Grid::uniform(0.0, 3.0, 301);
        let vals: Vec<f64> = g.nodes.iter().map(|&x| (2.0 * x).cos()).collect();
        let c = cumulative_integral(g.spacing, &vals);
        for (i, &x) in g.nodes.iter().enumerate().step_by(25) {
            assert_relative_eq!(c[i], 0.5 * (2.0 * x).sin(), epsilon = 1e-8);
        }
    }

    #[test]
    fn adaptive_simpson_sqrt_singularity_via_substitution() {
        // integral over [0,1] of sqrt(x) dx with x = t^2: 2 t^2 dt over [0,1]
        let v = adaptive_simpson(&|t: f64| 2.0 * t * t, 0.0, 1.0, 1e-13);
        assert_relative_eq!(v, 2.0 / 3.0, epsilon = 1e-12);
    }
}
