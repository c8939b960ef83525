//! ODE integration of (P(h) - E) u = 0 at real or complex E.
//!
//! Drift-free problems use the Numerov three-term recurrence (fourth order,
//! excellent Wronskian conservation); problems with a first-order drift term
//! go through classical RK4 on the first-order system. Both carry a running
//! log-magnitude: whenever the state grows past the rescale threshold it is
//! renormalized and the factor is accumulated per node, so exponential
//! growth through classically forbidden regions never overflows.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::potential::Potential;
use crate::sample::WaveSample;
use num_complex::Complex64;

/// The (h, V, domain, drift) bundle defining P(h) = -h^2 d^2/dx^2
/// [+ drift(x) h^2 d/dx] + V(x).
pub struct SemiclassicalProblem<'a> {
    pub h: f64,
    pub potential: &'a dyn Potential,
    pub domain: (f64, f64),
    pub drift: Option<&'a (dyn Fn(f64) -> f64 + Sync)>,
}

impl<'a> SemiclassicalProblem<'a> {
    /// The production sweeps keep h in (0, 0.5]; h up to 1 is allowed for
    /// the free-space oracles.
    pub fn new(h: f64, potential: &'a dyn Potential, domain: (f64, f64)) -> Self {
        assert!(h > 0.0 && h <= 1.0, "semiclassical parameter h out of range");
        Self { h, potential, domain, drift: None }
    }

    pub fn with_drift(mut self, drift: &'a (dyn Fn(f64) -> f64 + Sync)) -> Self {
        self.drift = Some(drift);
        self
    }

    pub fn default_step(&self) -> f64 {
        (self.h / 20.0).min(1e-3)
    }
}

const RESCALE_LN: f64 = 115.0; // rescale once |u| exceeds e^115 ~ 1e50

/// Integrate (P - E) u = 0 from `from` to `to` given (u, h u') at `from`.
/// The returned sample's grid is increasing regardless of direction.
pub fn integrate_schrodinger(
    prob: &SemiclassicalProblem,
    energy: Complex64,
    from: f64,
    to: f64,
    initial: (Complex64, Complex64),
    step: f64,
) -> Result<WaveSample> {
    let max_step = prob.h / 20.0 * (1.0 + 1e-12);
    if step > max_step {
        return Err(Error::StepTooLarge { step, max: prob.h / 20.0 });
    }
    let grid = Grid::lattice(from.min(to), from.max(to), step);
    let forward = to >= from;
    match prob.drift {
        None => Ok(numerov(prob, energy, &grid, forward, initial)),
        Some(_) => Ok(rk4(prob, energy, &grid, forward, initial)),
    }
}

fn q_at(prob: &SemiclassicalProblem, energy: Complex64, x: f64) -> Complex64 {
    (Complex64::new(prob.potential.eval(x), 0.0) - energy) / (prob.h * prob.h)
}

/// Numerov recurrence with per-node log rescaling, then a sixth-order
/// (Richardson-combined) derivative pass.
fn numerov(
    prob: &SemiclassicalProblem,
    energy: Complex64,
    grid: &Grid,
    forward: bool,
    initial: (Complex64, Complex64),
) -> WaveSample {
    let n = grid.len();
    let dx = grid.spacing;
    let h = prob.h;
    let q: Vec<Complex64> = grid.nodes.iter().map(|&x| q_at(prob, energy, x)).collect();
    let g = dx * dx / 12.0;

    let mut values = vec![Complex64::default(); n];
    let mut scales = vec![0.0f64; n];

    // index order of integration
    let idx: Vec<usize> = if forward { (0..n).collect() } else { (0..n).rev().collect() };
    let signed_dx = if forward { dx } else { -dx };

    // bootstrap: RK4 substeps to the second node
    let x0 = grid.nodes[idx[0]];
    let (u0, p0) = initial;
    values[idx[0]] = u0;
    let (u1, _) = rk4_substeps(prob, energy, x0, u0, p0, signed_dx, 8);
    values[idx[1]] = u1;

    // Summed form of the Numerov recurrence: with w_i = (1 - g q_i) u_i the
    // update is w_{i+1} = w_i + d_i, d_i = d_{i-1} + dx^2 q_i u_i. Keeping
    // the first difference d as its own accumulator avoids the eps/dx^2
    // coefficient-rounding drift of the raw three-term form.
    let one = Complex64::new(1.0, 0.0);
    let mut w_curr = (one - g * q[idx[1]]) * u1;
    let mut d = w_curr - (one - g * q[idx[0]]) * u0;
    let mut u_curr = u1;
    let mut ln = 0.0f64;
    let rescale_at = RESCALE_LN.exp();
    for w in 2..n {
        let (im1, i) = (idx[w - 1], idx[w]);
        d += dx * dx * q[im1] * u_curr;
        w_curr += d;
        u_curr = w_curr / (one - g * q[i]);
        if u_curr.norm() > rescale_at {
            let l = u_curr.norm().ln();
            let f = (-l).exp();
            u_curr *= f;
            w_curr *= f;
            d *= f;
            ln += l;
        }
        values[i] = u_curr;
        scales[i] = ln;
    }

    // derivative pass: 4th-order centered formula at strides 1 and 2,
    // Richardson-combined to 6th order. Ghost values from the recurrence.
    let ghost = |i_in: i64, vals: &Vec<Complex64>, scl: &Vec<f64>, side: i64| -> Complex64 {
        // extrapolate one node beyond index i_in in direction `side`,
        // rebased to scl[i_in]
        let i = i_in as usize;
        let x_out = grid.nodes[i] + side as f64 * dx;
        let q_out = q_at(prob, energy, x_out);
        let j = (i_in - side) as usize;
        let a_out = Complex64::new(1.0, 0.0) - g * q_out;
        let b_mid = Complex64::new(2.0, 0.0) + 10.0 * g * q[i];
        let a_in = Complex64::new(1.0, 0.0) - g * q[j];
        let u_j = vals[j] * (scl[j] - scl[i]).exp();
        (b_mid * vals[i] - a_in * u_j) / a_out
    };

    let mut deriv = vec![Complex64::default(); n];
    // temporarily extend by two ghosts on each side (at end-node scales)
    let gm1 = ghost(0, &values, &scales, -1);
    let gm2 = {
        // second ghost: apply the recurrence once more using gm1
        let x_out = grid.nodes[0] - 2.0 * dx;
        let q_out = q_at(prob, energy, x_out);
        let q_g1 = q_at(prob, energy, grid.nodes[0] - dx);
        let a_out = Complex64::new(1.0, 0.0) - g * q_out;
        let b_mid = Complex64::new(2.0, 0.0) + 10.0 * g * q_g1;
        let a_in = Complex64::new(1.0, 0.0) - g * q[0];
        (b_mid * gm1 - a_in * values[0]) / a_out
    };
    let gp1 = ghost(n as i64 - 1, &values, &scales, 1);
    let gp2 = {
        let x_out = grid.nodes[n - 1] + 2.0 * dx;
        let q_out = q_at(prob, energy, x_out);
        let q_g1 = q_at(prob, energy, grid.nodes[n - 1] + dx);
        let a_out = Complex64::new(1.0, 0.0) - g * q_out;
        let b_mid = Complex64::new(2.0, 0.0) + 10.0 * g * q_g1;
        let a_in = Complex64::new(1.0, 0.0) - g * q[n - 1];
        (b_mid * gp1 - a_in * values[n - 1]) / a_out
    };

    let fetch = |j: i64, i: usize| -> (Complex64, Complex64) {
        // value and Q at offset node j, rebased to scale of node i
        if j < 0 {
            let u = if j == -1 { gm1 } else { gm2 };
            let x = grid.nodes[0] + j as f64 * dx;
            (u * (scales[0] - scales[i]).exp(), (q_at(prob, energy, x) * u) * (scales[0] - scales[i]).exp())
        } else if j as usize >= n {
            let u = if j as usize == n { gp1 } else { gp2 };
            let x = grid.nodes[n - 1] + (j - (n as i64 - 1)) as f64 * dx;
            (u * (scales[n - 1] - scales[i]).exp(), (q_at(prob, energy, x) * u) * (scales[n - 1] - scales[i]).exp())
        } else {
            let ju = j as usize;
            let r = (scales[ju] - scales[i]).exp();
            (values[ju] * r, q[ju] * values[ju] * r)
        }
    };

    for i in 0..n {
        let ii = i as i64;
        let d_stride = |s: i64| -> Complex64 {
            let (up, qup) = fetch(ii + s, i);
            let (um, qum) = fetch(ii - s, i);
            let sd = s as f64 * dx;
            (up - um) / (2.0 * sd) - (sd / 12.0) * (qup - qum)
        };
        let d1 = d_stride(1);
        let d2 = d_stride(2);
        deriv[i] = h * (16.0 * d1 - d2) / 15.0;
    }
    // the start node's derivative is known exactly
    deriv[idx[0]] = initial.1;

    WaveSample { grid: grid.clone(), values, h_derivative: deriv, ln_scale: scales, h }
}

/// RK4 on (u, p = h u') for problems with a drift term; p' = b(x) p + (V-E)u/h.
fn rk4(
    prob: &SemiclassicalProblem,
    energy: Complex64,
    grid: &Grid,
    forward: bool,
    initial: (Complex64, Complex64),
) -> WaveSample {
    let n = grid.len();
    let h = prob.h;
    let drift = prob.drift.expect("rk4 path requires a drift");
    let rhs = |x: f64, u: Complex64, p: Complex64| -> (Complex64, Complex64) {
        let b = drift(x);
        let vq = (Complex64::new(prob.potential.eval(x), 0.0) - energy) / h;
        (p / h, b * p + vq * u)
    };

    let mut values = vec![Complex64::default(); n];
    let mut derivs = vec![Complex64::default(); n];
    let mut scales = vec![0.0f64; n];
    let idx: Vec<usize> = if forward { (0..n).collect() } else { (0..n).rev().collect() };
    let dx = if forward { grid.spacing } else { -grid.spacing };

    let (mut u, mut p) = initial;
    let mut ln = 0.0;
    values[idx[0]] = u;
    derivs[idx[0]] = p;
    for w in 1..n {
        let x = grid.nodes[idx[w - 1]];
        let (k1u, k1p) = rhs(x, u, p);
        let (k2u, k2p) = rhs(x + 0.5 * dx, u + 0.5 * dx * k1u, p + 0.5 * dx * k1p);
        let (k3u, k3p) = rhs(x + 0.5 * dx, u + 0.5 * dx * k2u, p + 0.5 * dx * k2p);
        let (k4u, k4p) = rhs(x + dx, u + dx * k3u, p + dx * k3p);
        u += dx / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        p += dx / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        let mag = u.norm().max(p.norm());
        if mag > RESCALE_LN.exp() {
            let l = mag.ln();
            let f = (-l).exp();
            u *= f;
            p *= f;
            ln += l;
        }
        values[idx[w]] = u;
        derivs[idx[w]] = p;
        scales[idx[w]] = ln;
    }
    WaveSample { grid: grid.clone(), values, h_derivative: derivs, ln_scale: scales, h }
}

fn rk4_substeps(
    prob: &SemiclassicalProblem,
    energy: Complex64,
    x0: f64,
    u0: Complex64,
    p0: Complex64,
    total: f64,
    substeps: usize,
) -> (Complex64, Complex64) {
    let h = prob.h;
    let rhs = |x: f64, u: Complex64, p: Complex64| -> (Complex64, Complex64) {
        (p / h, (Complex64::new(prob.potential.eval(x), 0.0) - energy) * u / h)
    };
    let dx = total / substeps as f64;
    let (mut u, mut p) = (u0, p0);
    let mut x = x0;
    for _ in 0..substeps {
        let (k1u, k1p) = rhs(x, u, p);
        let (k2u, k2p) = rhs(x + 0.5 * dx, u + 0.5 * dx * k1u, p + 0.5 * dx * k1p);
        let (k3u, k3p) = rhs(x + 0.5 * dx, u + 0.5 * dx * k2u, p + 0.5 * dx * k2p);
        let (k4u, k4p) = rhs(x + dx, u + dx * k3u, p + dx * k3p);
        u += dx / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        p += dx / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        x += dx;
    }
    (u, p)
}
