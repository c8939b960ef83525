//! One-dimensional potentials: the explicit compactly supported well/barrier
//! potential used throughout, user-configured piecewise potentials, and the
//! classical barrier certificate.
//!
//! A `Potential1D` is even by construction: pieces are polynomials in u = |x|
//! on ordered intervals of the half-line, and every gap between consecutive
//! pieces is bridged by a smooth-step convex combination of the two
//! neighboring polynomials, so the result is C-infinity wherever the pieces
//! themselves match the blend windows.

use crate::error::{Error, Result};
use crate::smoothstep::window_jet;
use serde::{Deserialize, Serialize};

/// Minimal interface the integrators need.
pub trait Potential: Sync {
    fn eval(&self, x: f64) -> f64;
    fn deriv(&self, x: f64) -> f64;
    /// Radius beyond which the potential vanishes identically, if any.
    fn free_beyond(&self) -> Option<f64>;
}

/// V = 0 everywhere; the control case for every free-space oracle.
pub struct FreePotential;

impl Potential for FreePotential {
    fn eval(&self, _x: f64) -> f64 {
        0.0
    }
    fn deriv(&self, _x: f64) -> f64 {
        0.0
    }
    fn free_beyond(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// One closed-form piece on an interval of the half-line.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Piece {
    /// Interval [lo, hi] in u = |x|; use f64::INFINITY for an unbounded tail.
    pub lo: f64,
    pub hi: f64,
    /// Polynomial coefficients, constant term first.
    pub coeffs: Vec<f64>,
}

#[derive(Clone, Debug)]
enum Segment {
    Poly {
        lo: f64,
        hi: f64,
        coeffs: Vec<f64>,
    },
    /// Convex blend (1-s) left + s right across [lo, hi] with the step
    /// window [wa, wb] strictly inside; exact left of wa, exact right of wb.
    Blend {
        lo: f64,
        hi: f64,
        left: Vec<f64>,
        right: Vec<f64>,
        wa: f64,
        wb: f64,
    },
}

#[derive(Clone, Debug)]
pub struct Potential1D {
    segments: Vec<Segment>,
    pub pieces: Vec<Piece>,
    pub blend_width: f64,
    pub support_radius: f64,
}

fn poly_jet(coeffs: &[f64], u: f64) -> [f64; 4] {
    let mut out = [0.0; 4];
    for &c in coeffs.iter().rev() {
        out[3] = out[3] * u + 3.0 * out[2];
        out[2] = out[2] * u + 2.0 * out[1];
        out[1] = out[1] * u + out[0];
        out[0] = out[0] * u + c;
    }
    out
}

impl Potential1D {
    /// Build from ordered pieces on the half-line. Gaps between consecutive
    /// pieces get a smooth blend; `window` optionally pins each gap's blend
    /// window (defaults to the gap midpoint +- blend_width).
    pub fn from_pieces(
        pieces: Vec<Piece>,
        blend_width: f64,
        support_radius: f64,
        windows: &[(f64, f64)],
    ) -> Result<Potential1D> {
        if !(blend_width > 0.0) {
            return Err(Error::Config {
                field: "blend_width".into(),
                detail: "must be positive".into(),
            });
        }
        let mut segments = Vec::new();
        for (i, p) in pieces.iter().enumerate() {
            if p.hi <= p.lo {
                return Err(Error::Config {
                    field: "pieces".into(),
                    detail: format!("piece {i} has empty interval"),
                });
            }
            if i > 0 {
                let prev = &pieces[i - 1];
                if p.lo < prev.hi {
                    return Err(Error::Config {
                        field: "pieces".into(),
                        detail: format!("piece {i} overlaps piece {}", i - 1),
                    });
                }
                if p.lo > prev.hi {
                    let (wa, wb) = windows
                        .get(i - 1)
                        .copied()
                        .unwrap_or_else(|| {
                            let c = 0.5 * (prev.hi + p.lo);
                            let w = blend_width.min(0.45 * (p.lo - prev.hi));
                            (c - w, c + w)
                        });
                    segments.push(Segment::Blend {
                        lo: prev.hi,
                        hi: p.lo,
                        left: prev.coeffs.clone(),
                        right: p.coeffs.clone(),
                        wa,
                        wb,
                    });
                }
            }
            segments.push(Segment::Poly { lo: p.lo, hi: p.hi, coeffs: p.coeffs.clone() });
        }
        Ok(Potential1D { segments, pieces, blend_width, support_radius })
    }

    /// Jet [V, V', V'', V'''] with respect to u = |x|, evaluated on the
    /// half-line.
    fn jet_half(&self, u: f64) -> [f64; 4] {
        for seg in &self.segments {
            match seg {
                Segment::Poly { lo, hi, coeffs } => {
                    if u >= *lo && u <= *hi {
                        return poly_jet(coeffs, u);
                    }
                }
                Segment::Blend { lo, hi, left, right, wa, wb } => {
                    if u >= *lo && u <= *hi {
                        let l = poly_jet(left, u);
                        let r = poly_jet(right, u);
                        let s = window_jet(u, *wa, *wb);
                        let d = [r[0] - l[0], r[1] - l[1], r[2] - l[2], r[3] - l[3]];
                        return [
                            l[0] + s[0] * d[0],
                            l[1] + s[1] * d[0] + s[0] * d[1],
                            l[2] + s[2] * d[0] + 2.0 * s[1] * d[1] + s[0] * d[2],
                            l[3] + s[3] * d[0]
                                + 3.0 * s[2] * d[1]
                                + 3.0 * s[1] * d[2]
                                + s[0] * d[3],
                        ];
                    }
                }
            }
        }
        [0.0; 4]
    }

    /// Jet with respect to x, even extension applied.
    pub fn jet(&self, x: f64) -> [f64; 4] {
        let j = self.jet_half(x.abs());
        if x < 0.0 {
            [j[0], -j[1], j[2], -j[3]]
        } else {
            j
        }
    }

    /// Internal segment boundaries (half-line), for the smoothness check.
    pub fn boundaries(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for seg in &self.segments {
            let (lo, hi) = match seg {
                Segment::Poly { lo, hi, .. } => (*lo, *hi),
                Segment::Blend { lo, hi, .. } => (*lo, *hi),
            };
            if lo > 0.0 {
                out.push(lo);
            }
            if hi.is_finite() {
                out.push(hi);
            }
        }
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        out
    }
}

impl Potential for Potential1D {
    fn eval(&self, x: f64) -> f64 {
        self.jet(x)[0]
    }
    fn deriv(&self, x: f64) -> f64 {
        self.jet(x)[1]
    }
    fn free_beyond(&self) -> Option<f64> {
        // conservative: the declared support radius
        Some(self.support_radius)
    }
}

/// The explicit even potential: u^2 + 1 on [0,1], 4 - u on [2, 3.5],
/// strictly below 1 past u = 3, compactly supported.
///
/// The inner gap (1,2) is a smooth-step convex combination of the two
/// adjacent closed forms. The outer taper multiplies 4 - u by a down-step —
/// equivalently blends it with the zero polynomial — over a window that ends
/// at u = 3.75 + blend_width <= 4, so the product never goes negative and no
/// clipping is needed.
pub fn build_paper_potential(blend_width: f64) -> Result<Potential1D> {
    if !(blend_width > 0.0 && blend_width <= 0.25) {
        return Err(Error::Config {
            field: "blend_width".into(),
            detail: format!("blend_width {blend_width} outside (0, 0.25]"),
        });
    }
    let pieces = vec![
        Piece { lo: 0.0, hi: 1.0, coeffs: vec![1.0, 0.0, 1.0] },
        Piece { lo: 2.0, hi: 3.5, coeffs: vec![4.0, -1.0] },
        Piece { lo: 5.0, hi: f64::INFINITY, coeffs: vec![0.0] },
    ];
    let windows = [
        (1.5 - blend_width, 1.5 + blend_width),
        (3.75 - blend_width, 3.75 + blend_width),
    ];
    let v = Potential1D::from_pieces(pieces, blend_width, 5.0, &windows)?;
    certify_paper(&v, 1e-3)?;
    Ok(v)
}

/// Check the paper-potential constraints on a grid; returns the first failed
/// invariant with the offending grid point.
pub fn certify_paper(v: &Potential1D, spacing: f64) -> Result<PaperCertificate> {
    let n = (5.5 / spacing).round() as usize;
    let mut max_even_defect: f64 = 0.0;
    let mut glue_max: f64 = 0.0;
    for i in 0..=n {
        let x = i as f64 * spacing;
        let val = v.eval(x);
        let defect = (val - v.eval(-x)).abs();
        max_even_defect = max_even_defect.max(defect);
        if defect != 0.0 {
            return Err(Error::ConstraintViolation {
                invariant: "evenness",
                x,
                detail: format!("V(x)-V(-x) = {defect:e}"),
            });
        }
        if val < 0.0 {
            return Err(Error::ConstraintViolation {
                invariant: "nonnegativity",
                x,
                detail: format!("V = {val}"),
            });
        }
        if x <= 1.0 {
            let expect = x * x + 1.0;
            if (val - expect).abs() > 1e-14 * expect {
                return Err(Error::ConstraintViolation {
                    invariant: "piece V = x^2 + 1 on [-1,1]",
                    x,
                    detail: format!("V = {val}, expected {expect}"),
                });
            }
        }
        if (2.0..=3.5).contains(&x) {
            let expect = 4.0 - x;
            if (val - expect).abs() > 1e-14 {
                return Err(Error::ConstraintViolation {
                    invariant: "piece V = 4 - x on [2, 3.5]",
                    x,
                    detail: format!("V = {val}, expected {expect}"),
                });
            }
        }
        if x > 3.0 && val >= 1.0 {
            return Err(Error::ConstraintViolation {
                invariant: "V < 1 for x > 3",
                x,
                detail: format!("V = {val}"),
            });
        }
        if x >= 5.0 && val != 0.0 {
            return Err(Error::ConstraintViolation {
                invariant: "supp V inside [-5, 5]",
                x,
                detail: format!("V = {val}"),
            });
        }
        if x > 1.0 && x < 2.0 {
            glue_max = glue_max.max(val);
        }
    }
    // derivative continuity at segment boundaries, orders 0..4 by one-sided
    // finite differences from each side
    for b in v.boundaries() {
        if b > 5.4 {
            continue;
        }
        for order in 0..=4usize {
            // keep the whole stencil inside the step's numerically flat zone
            let delta = 2.5e-3;
            let left = one_sided_derivative(v, b, -delta, order);
            let right = one_sided_derivative(v, b, delta, order);
            let scale = left.abs().max(right.abs()).max(1.0);
            // FD truncation grows steeply with order; tolerances calibrated
            // to the 6-point stencils used below
            let tol = [1e-8, 1e-5, 1e-3, 5e-2, 2.0][order] * scale;
            if (left - right).abs() > tol {
                return Err(Error::ConstraintViolation {
                    invariant: "smoothness across piece boundary (orders 0..4)",
                    x: b,
                    detail: format!(
                        "order {order}: left {left:.6e} vs right {right:.6e}"
                    ),
                });
            }
        }
    }
    Ok(PaperCertificate { max_even_defect, glue_max, spacing })
}

/// One-sided FD estimate of the order-k derivative at b using 6 nodes on one
/// side (signed step).
fn one_sided_derivative(v: &Potential1D, b: f64, step: f64, order: usize) -> f64 {
    let f: Vec<f64> = (0..6).map(|j| v.eval(b + step * j as f64)).collect();
    // forward-difference coefficients on nodes 0..5 for orders 0..4
    let c: [&[f64]; 5] = [
        &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        &[-137.0 / 60.0, 5.0, -5.0, 10.0 / 3.0, -5.0 / 4.0, 1.0 / 5.0],
        &[15.0 / 4.0, -77.0 / 6.0, 107.0 / 6.0, -13.0, 61.0 / 12.0, -5.0 / 6.0],
        &[-17.0 / 4.0, 71.0 / 4.0, -59.0 / 2.0, 49.0 / 2.0, -41.0 / 4.0, 7.0 / 4.0],
        &[3.0, -14.0, 26.0, -24.0, 11.0, -2.0],
    ];
    let num: f64 = c[order].iter().zip(&f).map(|(a, b)| a * b).sum();
    num / step.powi(order as i32)
}

#[derive(Clone, Debug, Serialize)]
pub struct PaperCertificate {
    pub max_even_defect: f64,
    /// Largest value on the inner glue (1,2); recorded, not asserted.
    pub glue_max: f64,
    pub spacing: f64,
}

/// Classical barrier analysis at energy E: trapped set and its separation
/// from the escape region. In one dimension this reduces to the sign table
/// of V - E on a grid plus the critical points of V.
#[derive(Clone, Debug, Serialize)]
pub struct BarrierCertificate {
    pub energy: f64,
    /// Phase-space points of the trapped set's projection (x, xi = 0).
    pub trapped_points: Vec<(f64, f64)>,
    /// Distance between the well component and the escape region.
    pub barrier_gap: f64,
    pub valid: bool,
    pub reason: String,
}

pub fn check_barrier<P: Potential>(v: &P, energy: f64, x_max: f64) -> Result<BarrierCertificate> {
    if !(energy > 0.0) {
        return Err(Error::Config {
            field: "energy".into(),
            detail: "barrier check needs E > 0".into(),
        });
    }
    let spacing = 1e-3;
    let n = (x_max / spacing).round() as usize;
    let xs: Vec<f64> = (0..=n).map(|i| i as f64 * spacing).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| v.eval(x)).collect();
    let derivs: Vec<f64> = xs.iter().map(|&x| v.deriv(x)).collect();
    let v0 = vals[0];

    // critical points in (0, x_max) where V is not flat-zero, refined by
    // bisection on V'
    let mut criticals = vec![0.0];
    for i in 1..n {
        if derivs[i] * derivs[i + 1] < 0.0 && vals[i].abs() > 1e-12 {
            let (mut a, mut b) = (xs[i], xs[i + 1]);
            for _ in 0..40 {
                let m = 0.5 * (a + b);
                if v.deriv(a) * v.deriv(m) <= 0.0 {
                    b = m;
                } else {
                    a = m;
                }
            }
            criticals.push(0.5 * (a + b));
        }
    }
    for &c in criticals.iter().skip(1) {
        let vc = v.eval(c);
        if (energy - vc).abs() < 1e-5 && (vc - v0).abs() > 1e-4 {
            return Err(Error::DegenerateEnergy { energy, critical: vc });
        }
    }

    // connected runs of the classically allowed set {V <= E}
    let allowed: Vec<bool> = vals.iter().map(|&w| w <= energy).collect();
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut start = None;
    for (i, &a) in allowed.iter().enumerate() {
        match (a, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                runs.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, n));
    }

    let escape_start: Option<f64> = runs
        .iter()
        .find(|&&(_, e)| e == n)
        .map(|&(s, _)| xs[s]);
    // bounded allowed component containing a critical point of V
    let well: Option<(f64, f64)> = runs.iter().filter(|&&(_, e)| e != n).find_map(|&(s, e)| {
        let (a, b) = (xs[s], xs[e]);
        criticals
            .iter()
            .any(|&c| c >= a - spacing && c <= b + spacing)
            .then_some((a, b))
    });

    match (well, escape_start) {
        (Some((wa, wb)), Some(esc)) => {
            let gap = esc - wb;
            if gap > 0.0 {
                Ok(BarrierCertificate {
                    energy,
                    trapped_points: vec![(0.5 * (wa + wb), 0.0)],
                    barrier_gap: gap,
                    valid: true,
                    reason: "isolated well separated from the escape region".into(),
                })
            } else {
                Ok(BarrierCertificate {
                    energy,
                    trapped_points: vec![],
                    barrier_gap: 0.0,
                    valid: false,
                    reason: "well touches the escape region".into(),
                })
            }
        }
        (None, _) => Ok(BarrierCertificate {
            energy,
            trapped_points: vec![],
            barrier_gap: 0.0,
            valid: false,
            reason: "no interior well at this energy".into(),
        }),
        (_, None) => Ok(BarrierCertificate {
            energy,
            trapped_points: vec![],
            barrier_gap: 0.0,
            valid: false,
            reason: "no escape region inside the analysis window".into(),
        }),
    }
}

/// Parse one expression of the config grammar into polynomial coefficients.
pub fn parse_expression(expr: &str) -> Result<Vec<f64>> {
    let e = expr.trim();
    match e {
        "harmonic_well" => return Ok(vec![1.0, 0.0, 1.0]),
        "linear_ramp" => return Ok(vec![4.0, -1.0]),
        "zero" => return Ok(vec![0.0]),
        _ => {}
    }
    if let Some(rest) = e.strip_prefix("poly(").and_then(|r| r.strip_suffix(')')) {
        let coeffs: std::result::Result<Vec<f64>, _> =
            rest.split(',').map(|t| t.trim().parse::<f64>()).collect();
        if let Ok(c) = coeffs {
            if !c.is_empty() {
                return Ok(c);
            }
        }
    }
    Err(Error::ExpressionGrammar { expr: expr.into() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn paper_potential_exact_values() {
        let v = build_paper_potential(0.1).unwrap();
        assert_eq!(v.eval(0.0), 1.0);
        assert_eq!(v.eval(3.0), 1.0);
        assert_eq!(v.eval(6.0), 0.0);
        assert_eq!(v.eval(-0.5), 1.25);
        assert_eq!(v.eval(2.5), 1.5);
    }

    #[test]
    fn glue_value_recorded_within_band() {
        // the blend at 1.5 must lie between the two extended closed forms
        let v = build_paper_potential(0.1).unwrap();
        let val = v.eval(1.5);
        assert!(val >= 2.0, "glue dipped below both pieces: {val}");
        let cert = certify_paper(&v, 1e-3).unwrap();
        assert!(cert.glue_max < 4.0 && cert.glue_max >= val);
    }

    #[test]
    fn certificate_passes_all_blend_widths() {
        for bw in [0.02, 0.05, 0.1, 0.2, 0.25] {
            let v = build_paper_potential(bw).unwrap();
            let cert = certify_paper(&v, 1e-3).unwrap();
            assert_eq!(cert.max_even_defect, 0.0);
        }
        assert!(build_paper_potential(0.3).is_err());
        assert!(build_paper_potential(0.0).is_err());
    }

    #[test]
    fn smoothness_checker_catches_a_kink() {
        // adjacent pieces with a value mismatch and no gap to blend over
        let pieces = vec![
            Piece { lo: 0.0, hi: 1.0, coeffs: vec![1.0, 0.0, 1.0] },
            Piece { lo: 1.0, hi: 2.0, coeffs: vec![5.0, -1.0] },
            Piece { lo: 4.0, hi: f64::INFINITY, coeffs: vec![0.0] },
        ];
        let v = Potential1D::from_pieces(pieces, 0.1, 4.0, &[]).unwrap();
        let err = certify_paper(&v, 1e-3).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("violated"), "unexpected: {msg}");
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        let v = build_paper_potential(0.12).unwrap();
        for &x in &[0.3, 0.99, 1.47, 1.63, 2.8, 3.52, 3.7, 3.81, -1.52, -2.4] {
            let j = v.jet(x);
            let d = 1e-5;
            let fd1 = (v.eval(x + d) - v.eval(x - d)) / (2.0 * d);
            let fd2 = (v.eval(x + d) - 2.0 * v.eval(x) + v.eval(x - d)) / (d * d);
            assert_relative_eq!(j[1], fd1, epsilon = 1e-6, max_relative = 1e-6);
            assert_relative_eq!(j[2], fd2, epsilon = 1e-4, max_relative = 1e-4);
            let fd3 = (v.jet(x + d)[2] - v.jet(x - d)[2]) / (2.0 * d);
            assert_relative_eq!(j[3], fd3, epsilon = 1e-3, max_relative = 1e-3);
        }
    }

    #[test]
    fn barrier_certificate_at_well_energy() {
        let v = build_paper_potential(0.1).unwrap();
        let cert = check_barrier(&v, 1.0, 6.0).unwrap();
        assert!(cert.valid, "{}", cert.reason);
        assert_eq!(cert.trapped_points.len(), 1);
        let (x0, xi0) = cert.trapped_points[0];
        assert!(x0.abs() < 1e-3 && xi0 == 0.0);
        assert!((cert.barrier_gap - 3.0).abs() < 0.01);
    }

    #[test]
    fn barrier_invalid_below_barrier_on_slope() {
        let v = build_paper_potential(0.1).unwrap();
        let cert = check_barrier(&v, 0.25, 6.0).unwrap();
        assert!(!cert.valid);
        assert!(cert.trapped_points.is_empty());
        assert!(cert.reason.contains("no interior well"));
    }

    #[test]
    fn barrier_invalid_for_free_potential() {
        let cert = check_barrier(&FreePotential, 0.7, 6.0).unwrap();
        assert!(!cert.valid);
        assert!(cert.trapped_points.is_empty());
    }

    #[test]
    fn degenerate_energy_at_glue_top_errors() {
        let v = build_paper_potential(0.1).unwrap();
        let cert = certify_paper(&v, 1e-3).unwrap();
        let err = check_barrier(&v, cert.glue_max, 6.0);
        assert!(matches!(err, Err(Error::DegenerateEnergy { .. })));
    }

    #[test]
    fn expression_grammar() {
        assert_eq!(parse_expression("poly(1, 0, 1)").unwrap(), vec![1.0, 0.0, 1.0]);
        assert_eq!(parse_expression("harmonic_well").unwrap(), vec![1.0, 0.0, 1.0]);
        assert_eq!(parse_expression("linear_ramp").unwrap(), vec![4.0, -1.0]);
        assert!(parse_expression("sin(x)").is_err());
    }

    proptest! {
        #[test]
        fn even_and_nonnegative_everywhere(x in -6.0f64..6.0) {
            let v = build_paper_potential(0.1).unwrap();
            prop_assert_eq!(v.eval(x), v.eval(-x));
            prop_assert!(v.eval(x) >= 0.0);
        }
    }
}
