//! The exp(-1/t) partition-of-unity step and its first three derivatives.
//!
//! `step(t)` is 0 for t <= 0, 1 for t >= 1 and C-infinity everywhere, built
//! from a(t) = exp(-1/t). Used for the potential glue and for the quasimode
//! cutoff, whose commutator with the Hamiltonian needs the step's second and
//! third derivatives in closed form.

/// a(t) = exp(-1/t) and derivatives a', a'', a''' for t > 0.
#[inline]
fn bump(t: f64) -> [f64; 4] {
    // Below ~5e-3, a(t) < 1e-87 and a/t^6 is still < 1e-73: call it zero to
    // dodge 0 * inf at very small t.
    if t < 5e-3 {
        return [0.0; 4];
    }
    let a = (-1.0 / t).exp();
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t2 * t2;
    let t5 = t4 * t;
    let t6 = t3 * t3;
    let d1 = a / t2;
    let d2 = a * (1.0 / t4 - 2.0 / t3);
    let d3 = a * (1.0 / t6 - 6.0 / t5 + 6.0 / t4);
    [a, d1, d2, d3]
}

/// Value of the step at t (clamped outside (0,1)).
pub fn step(t: f64) -> f64 {
    step_jet(t)[0]
}

/// [s, s', s'', s'''] at t.
pub fn step_jet(t: f64) -> [f64; 4] {
    if t <= 0.0 {
        return [0.0, 0.0, 0.0, 0.0];
    }
    if t >= 1.0 {
        return [1.0, 0.0, 0.0, 0.0];
    }
    let u = bump(t);
    let wb = bump(1.0 - t);
    // w(t) = a(1-t): odd-order derivatives flip sign.
    let w = [wb[0], -wb[1], wb[2], -wb[3]];
    let d = [u[0] + w[0], u[1] + w[1], u[2] + w[2], u[3] + w[3]];
    if d[0] == 0.0 {
        // both exhausted by the underflow guard; resolve by which side we're on
        return if t < 0.5 { [0.0; 4] } else { [1.0, 0.0, 0.0, 0.0] };
    }
    // s = u * g with g = 1/D; Leibniz up to third order.
    let g0 = 1.0 / d[0];
    let g1 = -d[1] * g0 * g0;
    let g2 = (-d[2] + 2.0 * d[1] * d[1] * g0) * g0 * g0;
    let g3 = (-d[3] + 6.0 * d[1] * d[2] * g0 - 6.0 * d[1] * d[1] * d[1] * g0 * g0) * g0 * g0;
    [
        u[0] * g0,
        u[1] * g0 + u[0] * g1,
        u[2] * g0 + 2.0 * u[1] * g1 + u[0] * g2,
        u[3] * g0 + 3.0 * u[2] * g1 + 3.0 * u[1] * g2 + u[0] * g3,
    ]
}

/// Step mapped onto the window [a, b]: 0 left of a, 1 right of b.
/// Returns [s, s', s'', s'''] with respect to x.
pub fn window_jet(x: f64, a: f64, b: f64) -> [f64; 4] {
    let inv = 1.0 / (b - a);
    let j = step_jet((x - a) * inv);
    [j[0], j[1] * inv, j[2] * inv * inv, j[3] * inv * inv * inv]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fd(f: impl Fn(f64) -> f64, t: f64, d: f64) -> f64 {
        (f(t + d) - f(t - d)) / (2.0 * d)
    }

    #[test]
    fn endpoints_flat() {
        assert_eq!(step_jet(0.0), [0.0; 4]);
        assert_eq!(step_jet(1.0), [1.0, 0.0, 0.0, 0.0]);
        // all derivatives decay to zero approaching the ends
        for t in [1e-3, 0.01, 0.99, 1.0 - 1e-3] {
            let j = step_jet(t);
            assert!(j[1].abs() < 1e-30 || t > 0.02 && t < 0.98 || j[1].abs() < 1e-8);
        }
    }

    #[test]
    fn midpoint_symmetry() {
        assert!((step(0.5) - 0.5).abs() < 1e-15);
        for t in [0.1, 0.2, 0.3, 0.45] {
            assert!((step(t) + step(1.0 - t) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for &t in &[0.15, 0.3, 0.5, 0.62, 0.85] {
            let j = step_jet(t);
            let d = 1e-5;
            let s1 = fd(step, t, d);
            let s2 = fd(|x| step_jet(x)[1], t, d);
            let s3 = fd(|x| step_jet(x)[2], t, d);
            assert!((j[1] - s1).abs() < 1e-7 * (1.0 + s1.abs()), "s' at {t}");
            assert!((j[2] - s2).abs() < 1e-6 * (1.0 + s2.abs()), "s'' at {t}");
            assert!((j[3] - s3).abs() < 1e-4 * (1.0 + s3.abs()), "s''' at {t}");
        }
    }

    proptest! {
        #[test]
        fn monotone_and_bounded(t in 0.0f64..1.0) {
            let j = step_jet(t);
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&j[0]));
            // allow one ulp of cancellation noise around exact zero
            prop_assert!(j[1] >= -1e-12);
        }
    }
}
