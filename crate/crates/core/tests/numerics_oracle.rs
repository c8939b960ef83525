//! Shooting eigenvalues against the independent matrix oracle.

mod common;

use resolvent_lab::boxsize::choose_box;
use resolvent_lab::eigen::{dirichlet_eigensolve, EigenOptions, LeftBoundary};
use resolvent_lab::potential::{build_paper_potential, FreePotential};
use resolvent_lab::quasimode::ground_quasimode;

#[test]
fn free_box_spectrum_against_matrix() {
    // -u'' = E u on [0, 2]: levels (n pi / 2)^2
    let evs = common::matrix_dirichlet_eigenvalues(&FreePotential, 1.0, 0.0, 2.0, (0.5, 11.0), 1e-3);
    assert_eq!(evs.len(), 2);
    let pi = std::f64::consts::PI;
    assert!((evs[0] - (pi / 2.0) * (pi / 2.0)).abs() < 1e-9, "{evs:?}");
    assert!((evs[1] - pi * pi).abs() < 1e-9, "{evs:?}");
}

#[test]
fn shooting_matches_matrix_oracle_on_the_well() {
    // the two routes share nothing beyond the potential: shooting is a
    // Numerov two-sided match, the oracle a Sturm-count matrix bisection
    let pot = build_paper_potential(0.1).unwrap();
    for &h in &[0.05, 0.03] {
        let b = choose_box(&pot, h, 6.0, 1e-3);
        let g = ground_quasimode(&pot, h, b.r_tilde).unwrap();
        let window = (g.e0 - 0.02 * h, g.e0 + 0.02 * h);
        let oracle =
            common::matrix_dirichlet_eigenvalues(&pot, h, -b.r_tilde, b.r_tilde, window, 2.5e-4);
        let nearest = oracle
            .iter()
            .cloned()
            .min_by(|x, y| (x - g.e0).abs().partial_cmp(&(y - g.e0).abs()).unwrap())
            .expect("oracle found no eigenvalue in the window");
        let rel = (nearest - g.e0).abs() / g.e0;
        assert!(rel <= 1e-8, "h = {h}: shooting {} vs matrix {} ({rel:.2e})", g.e0, nearest);
    }
}

#[test]
fn general_interval_solver_matches_matrix() {
    // Full-interval solve (no parity shortcut). Outer modes come in
    // even/odd pairs split by exp(-2S/h), far below f64 resolution: the
    // Sturm count sees two, a sign scan sees one. Compare after clustering
    // anything closer than 1e-9.
    let pot = build_paper_potential(0.1).unwrap();
    let h = 0.1;
    let window = (1.35, 1.75);
    let shoot: Vec<f64> = dirichlet_eigensolve(
        &pot,
        h,
        -6.0,
        6.0,
        LeftBoundary::Dirichlet,
        window,
        EigenOptions::for_h(h),
    )
    .unwrap()
    .into_iter()
    .map(|(e, _)| e)
    .collect();
    let oracle = common::matrix_dirichlet_eigenvalues(&pot, h, -6.0, 6.0, window, 2.5e-4);
    let cluster = |vals: &[f64]| -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for &v in vals {
            if out.last().map(|&p| (v - p).abs() > 1e-9).unwrap_or(true) {
                out.push(v);
            }
        }
        out
    };
    let shoot_c = cluster(&shoot);
    let oracle_c = cluster(&oracle);
    // Levels living in the outer shells couple to the well-side matching
    // point only through the barrier, a sub-f64 amplitude: the global Sturm
    // count sees them, a matched shooting cannot. Every level the shooting
    // reports must agree with the oracle, and the two well levels in this
    // window (1 + 5h and 1 + 7h) must both be present.
    for e in &shoot_c {
        let nearest = oracle_c
            .iter()
            .cloned()
            .min_by(|x, y| (x - e).abs().partial_cmp(&(y - e).abs()).unwrap())
            .unwrap();
        assert!((e - nearest).abs() / nearest <= 1e-8, "shooting {e} vs matrix {nearest}");
    }
    for well in [1.5, 1.7] {
        assert!(
            shoot_c.iter().any(|e| (e - well).abs() < 5e-4),
            "well level near {well} missing from {shoot_c:?}"
        );
    }
}
