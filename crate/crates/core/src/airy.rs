//! Airy function Ai and its derivative on the real line to ~1e-12 relative.
//!
//! Maclaurin series for |y| <= Y_SWITCH, classical asymptotic expansions
//! beyond (DLMF 9.7). The series terms grow to ~exp((2/3)|y|^{3/2}) before
//! cancelling, so they are accumulated in double-double; the asymptotic
//! sums are truncated adaptively at the smallest term rather than after a
//! fixed number of corrections (a fixed first-order truncation would leave
//! ~1e-4 at the switch point, far above target).

use crate::dd::Dd;

/// Series/asymptotics switch point, validated by the cross-branch test.
pub const Y_SWITCH: f64 = 8.0;

// Ai(0) and Ai'(0), double-double.
const AI0: (f64, f64) = (0.3550280538878172, 2.05233632436212e-17);
const AIP0: (f64, f64) = (-0.2588194037928068, 2.522243111610832e-17);

/// (Ai(y), Ai'(y)).
pub fn airy_ai(y: f64) -> (f64, f64) {
    if y.abs() <= Y_SWITCH {
        maclaurin(y)
    } else if y > 0.0 {
        asymptotic_positive(y)
    } else {
        asymptotic_negative(-y)
    }
}

/// Maclaurin series in double-double. With f = sum a_k y^{3k}
/// (a_k = a_{k-1}/((3k)(3k-1))) and g = sum b_k y^{3k+1}
/// (b_k = b_{k-1}/((3k)(3k+1))):
/// Ai = c1 f - c2 g, Ai' = c1 f' - c2 g'.
fn maclaurin(y: f64) -> (f64, f64) {
    let c1 = Dd::from_parts(AI0.0, AI0.1);
    let c2 = Dd::from_parts(-AIP0.0, -AIP0.1);
    if y == 0.0 {
        return (c1.to_f64(), -c2.to_f64());
    }
    let y_dd = Dd::from_f64(y);
    let y3 = y_dd.mul(y_dd).mul(y_dd);

    let mut f = Dd::from_f64(1.0);
    let mut fp = Dd::ZERO;
    let mut g = y_dd;
    let mut gp = Dd::from_f64(1.0);
    let mut a = Dd::from_f64(1.0); // a_k y^{3k}
    let mut b = y_dd; // b_k y^{3k+1}
    for k in 1..200usize {
        let kk = k as f64;
        a = a.mul(y3).div_f64((3.0 * kk) * (3.0 * kk - 1.0));
        b = b.mul(y3).div_f64((3.0 * kk) * (3.0 * kk + 1.0));
        f = f.add(a);
        g = g.add(b);
        // term-wise derivatives: d/dy a_k y^{3k} = (3k/y) a_k y^{3k};
        // keep the multiplier in double-double or the cancellation
        // amplifies its rounding
        fp = fp.add(a.mul_f64(3.0 * kk).div_f64(y));
        gp = gp.add(b.mul_f64(3.0 * kk + 1.0).div_f64(y));
        if a.abs().max(b.abs()) < 1e-25 * f.abs().max(1.0) {
            break;
        }
    }
    let ai = c1.mul(f).sub(c2.mul(g)).to_f64();
    let aip = c1.mul(fp).sub(c2.mul(gp)).to_f64();
    (ai, aip)
}

/// DLMF 9.7.1-2 coefficients u_k, v_k.
fn asymptotic_coefficients(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut u = vec![1.0];
    let mut v = vec![1.0];
    for k in 1..n {
        let kf = k as f64;
        let next = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        u.push(next);
        v.push(next * (6.0 * kf + 1.0) / (1.0 - 6.0 * kf));
    }
    (u, v)
}

/// DLMF 9.7.5-6, truncated at the smallest term.
fn asymptotic_positive(y: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * y.powf(1.5);
    let (u, v) = asymptotic_coefficients(40);
    let mut su = 0.0;
    let mut sv = 0.0;
    let mut prev = f64::INFINITY;
    for (k, (&uk, &vk)) in u.iter().zip(v.iter()).enumerate() {
        let t = (uk / zeta.powi(k as i32)).abs();
        if t > prev && k > 2 {
            break;
        }
        prev = t;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        su += sign * uk / zeta.powi(k as i32);
        sv += sign * vk / zeta.powi(k as i32);
    }
    let pref = (-zeta).exp() / (2.0 * std::f64::consts::PI.sqrt());
    (pref / y.powf(0.25) * su, -pref * y.powf(0.25) * sv)
}

/// DLMF 9.7.9-10 for Ai(-y), y > 0, truncated at the smallest term.
fn asymptotic_negative(y: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * y.powf(1.5);
    let (u, v) = asymptotic_coefficients(40);
    let t = zeta - std::f64::consts::FRAC_PI_4;
    let (c, s) = (t.cos(), t.sin());
    let mut se = 0.0;
    let mut so = 0.0;
    let mut sve = 0.0;
    let mut svo = 0.0;
    let mut prev = f64::INFINITY;
    for k in 0..u.len() / 2 {
        let t = (u[2 * k] / zeta.powi(2 * k as i32)).abs();
        if t > prev && k > 1 {
            break;
        }
        prev = t;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        se += sign * u[2 * k] / zeta.powi(2 * k as i32);
        so += sign * u[2 * k + 1] / zeta.powi(2 * k as i32 + 1);
        sve += sign * v[2 * k] / zeta.powi(2 * k as i32);
        svo += sign * v[2 * k + 1] / zeta.powi(2 * k as i32 + 1);
    }
    let rp = std::f64::consts::PI.sqrt();
    let ai = (c * se + s * so) / (rp * y.powf(0.25));
    let aip = (s * sve - c * svo) * y.powf(0.25) / rp;
    (ai, aip)
}
