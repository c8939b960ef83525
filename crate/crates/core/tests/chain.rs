//! Cross-module coherence: quasimode, resolvent and resonance agree on the
//! same physics through independent routes. These identities involve the
//! pole location, so they run on the width-resolvable h range.

use num_complex::Complex64;
use resolvent_lab::boxsize::choose_box;
use resolvent_lab::fit::fit_line;
use resolvent_lab::potential::build_paper_potential;
use resolvent_lab::quasimode::{build_pair, ground_quasimode};
use resolvent_lab::resolvent::{jost_solve, GreenKernel};
use resolvent_lab::resonance::{find_resonance, ResonanceOptions};
use resolvent_lab::sample::wronskian;
use resolvent_lab::wkb::{transport_wronskians, wkb_solutions};

#[test]
fn resolvent_applied_to_residual_recovers_the_quasimode() {
    // chi u = R(E0 + i0) f with u = alpha chi0 v, checked where chi0 = 1
    let pot = build_paper_potential(0.1).unwrap();
    for &h in &[0.3, 0.24] {
        let b = choose_box(&pot, h, 6.0, 1e-3);
        let g = ground_quasimode(&pot, h, b.r_tilde).unwrap();
        let pair = build_pair(&pot, h, g.e0, &g.v, 6.0).unwrap();
        let kern = GreenKernel::new(
            jost_solve(&pot, h, Complex64::new(g.e0.sqrt(), 0.0), 7.5, 2.5e-4).unwrap(),
        );
        // f lives on the quasimode grid; its span is inside the Jost span
        let u_rec = kern.apply(&pair.f).unwrap();
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for &x in &[-4.0, -2.0, -0.5, 0.0, 1.0, 3.0, 4.5] {
            let iu = u_rec.grid.index_of(x);
            let iv = pair.u.grid.index_of(x);
            scale = scale.max(pair.u.value_f64(iv).norm());
            worst = worst.max((u_rec.value_f64(iu) - pair.u.value_f64(iv)).norm());
        }
        let rel = worst / scale;
        assert!(rel <= 1e-4, "h = {h}: reconstruction defect {rel:.3e}");
    }
}

#[test]
fn resonance_sits_within_a_few_widths_of_the_box_level() {
    let pot = build_paper_potential(0.1).unwrap();
    for &h in &[0.3, 0.22, 0.16] {
        let b = choose_box(&pot, h, 6.0, 1e-3);
        let g = ground_quasimode(&pot, h, b.r_tilde).unwrap();
        let datum = find_resonance(&pot, h, 1.0 + h, &ResonanceOptions::for_h(h)).unwrap();
        let dist = (datum.z0.re - g.e0).abs();
        let width = datum.width.to_f64();
        assert!(
            dist <= 10.0 * width,
            "h = {h}: |Re z0 - E0| = {dist:.3e} vs width {width:.3e}"
        );
    }
}

#[test]
fn resonant_state_overlaps_the_dirichlet_quasimode() {
    let pot = build_paper_potential(0.1).unwrap();
    let h = 0.2;
    let b = choose_box(&pot, h, 6.0, 1e-3);
    let g = ground_quasimode(&pot, h, b.r_tilde).unwrap();
    let datum = find_resonance(&pot, h, 1.0 + h, &ResonanceOptions::for_h(h)).unwrap();
    // both states are normalized over the core ball; overlap there
    let (i0, i1) = datum.state.grid.index_range(-4.0, 4.0).unwrap();
    let w = resolvent_lab::grid::segment_rule(datum.state.grid.spacing, i1 - i0);
    let mut dot = Complex64::default();
    let mut v_mass = 0.0;
    for (k, wk) in w.iter().enumerate() {
        let i = i0 + k;
        let x = datum.state.grid.nodes[i];
        let iv = g.v.grid.index_of(x);
        let vv = g.v.value_f64(iv);
        dot += wk * datum.state.value_f64(i).conj() * vv;
        v_mass += wk * vv.norm_sqr();
    }
    let overlap = dot.norm() / v_mass.sqrt();
    assert!(overlap >= 0.99, "overlap {overlap}");
}

#[test]
fn dirichlet_ratio_identity_at_the_box_edge() {
    // with v vanishing at the box edge, the two transported Wronskians
    // differ by exactly the double phase plus a quarter turn
    let pot = build_paper_potential(0.1).unwrap();
    for &h in &[0.1, 0.05] {
        let b = choose_box(&pot, h, 6.0, 1e-3);
        let g = ground_quasimode(&pot, h, b.r_tilde).unwrap();
        let phase = resolvent_lab::phase::PhaseFunction::new(&pot, g.e0, 7.5, 1e-3);
        let (vp, vm) = wkb_solutions(&pot, &phase, g.e0, h, b.r_tilde, 1e-3).unwrap();
        let tw = transport_wronskians(&g.v, &vp, &vm);
        let i = tw.index_of(b.r_tilde);
        let q = std::f64::consts::FRAC_PI_4;
        let lhs = tw.w_minus[i]
            .mul_c64(Complex64::from_polar(1.0, -q))
            .div(tw.w_plus[i].mul_c64(Complex64::from_polar(1.0, q)));
        let phi = phase.eval(b.r_tilde);
        let rhs = Complex64::from_polar(
            1.0,
            -(2.0 * phi + std::f64::consts::PI * h / 2.0) / h,
        );
        let rel = (lhs.to_c64() - rhs).norm();
        assert!(rel <= 1e-4, "h = {h}: ratio defect {rel:.3e}");
    }
}

#[test]
fn normalized_wronskian_dip_tracks_the_width() {
    // |W(E0)| relative to the well-amplitude product decays like the width
    let pot = build_paper_potential(0.1).unwrap();
    let mut dip_points = Vec::new();
    let mut width_points = Vec::new();
    for &h in &[0.3, 0.24, 0.2, 0.16] {
        let b = choose_box(&pot, h, 6.0, 1e-3);
        let g = ground_quasimode(&pot, h, b.r_tilde).unwrap();
        let j = jost_solve(&pot, h, Complex64::new(g.e0.sqrt(), 0.0), 7.5, (h / 20.0).min(1e-3))
            .unwrap();
        let i0 = j.f_plus.grid.index_of(0.0);
        let prod = j.f_plus.value_at(i0).abs().mul(j.f_minus.value_at(i0).abs());
        let dip = j.w.abs().div(prod).ln_abs();
        dip_points.push((1.0 / h, dip));
        let datum = find_resonance(&pot, h, 1.0 + h, &ResonanceOptions::for_h(h)).unwrap();
        width_points.push((1.0 / h, datum.width.ln_abs()));
    }
    let dip_fit = fit_line(&dip_points);
    let width_fit = fit_line(&width_points);
    assert!(dip_fit.slope < -1.0, "dip slope {}", dip_fit.slope);
    let rel = ((dip_fit.slope - width_fit.slope) / width_fit.slope).abs();
    assert!(
        rel <= 0.3,
        "dip slope {:.3} vs width slope {:.3}",
        dip_fit.slope,
        width_fit.slope
    );
}

#[test]
fn wronskian_evaluation_points_are_consistent() {
    // the averaged W and its variation stay tight even near the resonance
    let pot = build_paper_potential(0.1).unwrap();
    let h = 0.2;
    let g = ground_quasimode(&pot, h, choose_box(&pot, h, 6.0, 1e-3).r_tilde).unwrap();
    let j = jost_solve(&pot, h, Complex64::new(g.e0.sqrt(), 0.0), 7.5, 1e-3).unwrap();
    assert!(j.w_variation < 1e-6, "variation {:.3e}", j.w_variation);
    // constancy against a direct probe in the right free region
    let w_probe = wronskian(&j.f_plus, &j.f_minus, 6.8);
    let rel = w_probe.sub(j.w).abs().div(j.w.abs()).to_f64();
    assert!(rel < 1e-6, "probe deviation {rel:.3e}");
}
