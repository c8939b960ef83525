//! Shared oracles for the integration tests: a matrix eigensolver
//! independent of the shooting path (symmetric tridiagonal discretization,
//! Sturm-count bisection, Richardson extrapolation to fourth order).

#![allow(dead_code)]

use resolvent_lab::potential::Potential;

/// Dirichlet eigenvalues of -h^2 u'' + V u on [a, b] inside `window` from
/// the central-difference matrix at spacing dx: the Sturm count (negative
/// pivots of the LDL^T factorization of A - E) equals the number of
/// eigenvalues below E, so plain bisection brackets each one.
pub fn tridiag_dirichlet_eigenvalues<P: Potential>(
    pot: &P,
    h: f64,
    a: f64,
    b: f64,
    window: (f64, f64),
    dx: f64,
) -> Vec<f64> {
    let n = ((b - a) / dx).round() as usize - 1;
    let diag: Vec<f64> = (1..=n)
        .map(|i| 2.0 * h * h / (dx * dx) + pot.eval(a + i as f64 * dx))
        .collect();
    let off = -h * h / (dx * dx);

    let count = |e: f64| -> usize {
        let mut cnt = 0usize;
        let mut d_prev = 1.0f64;
        for (i, &di) in diag.iter().enumerate() {
            let d = if i == 0 { di - e } else { (di - e) - off * off / d_prev };
            if d < 0.0 {
                cnt += 1;
            }
            d_prev = if d.abs() < 1e-300 { 1e-300 } else { d };
        }
        cnt
    };

    let (lo, hi) = window;
    let (n_lo, n_hi) = (count(lo), count(hi));
    let mut out = Vec::new();
    for idx in n_lo..n_hi {
        let (mut e_lo, mut e_hi) = (lo, hi);
        for _ in 0..100 {
            let mid = 0.5 * (e_lo + e_hi);
            if count(mid) > idx {
                e_hi = mid;
            } else {
                e_lo = mid;
            }
            if e_hi - e_lo < 1e-14 * mid.abs().max(1.0) {
                break;
            }
        }
        out.push(0.5 * (e_lo + e_hi));
    }
    out
}

/// Richardson-extrapolated eigenvalues (fourth order): solve at dx and
/// dx/2, combine (4 E_half - E_full) / 3 by matching nearest eigenvalues.
pub fn matrix_dirichlet_eigenvalues<P: Potential>(
    pot: &P,
    h: f64,
    a: f64,
    b: f64,
    window: (f64, f64),
    dx: f64,
) -> Vec<f64> {
    let full = tridiag_dirichlet_eigenvalues(pot, h, a, b, window, dx);
    let half = tridiag_dirichlet_eigenvalues(pot, h, a, b, window, dx / 2.0);
    full.iter()
        .map(|&e| {
            let nearest = half
                .iter()
                .cloned()
                .min_by(|x, y| (x - e).abs().partial_cmp(&(y - e).abs()).unwrap())
                .unwrap_or(e);
            (4.0 * nearest - e) / 3.0
        })
        .collect()
}
