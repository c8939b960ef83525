//! Scalars stored as `mantissa * exp(ln_scale)`.
//!
//! Solutions in classically forbidden regions grow like exp(S/h); at the
//! smallest h in a sweep that is far past the range of an f64. Everything
//! exponentially large or small in this crate is carried as a mantissa plus
//! a natural-log scale factor so ratios, products and norms stay in range.

use num_complex::Complex64;
use std::fmt;

/// A value `mantissa * exp(ln_scale)` with `mantissa` kept O(1) by `normalize`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogScaled<T> {
    pub mantissa: T,
    pub ln_scale: f64,
}

pub type LogF64 = LogScaled<f64>;
pub type LogC64 = LogScaled<Complex64>;

impl<T> LogScaled<T> {
    pub fn new(mantissa: T, ln_scale: f64) -> Self {
        Self { mantissa, ln_scale }
    }
}

impl LogScaled<f64> {
    pub fn from_f64(v: f64) -> Self {
        Self { mantissa: v, ln_scale: 0.0 }.normalized()
    }

    pub fn zero() -> Self {
        Self { mantissa: 0.0, ln_scale: 0.0 }
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == 0.0
    }

    /// Rescale so |mantissa| lands in [1, e); zero stays zero.
    pub fn normalized(self) -> Self {
        if self.mantissa == 0.0 || !self.mantissa.is_finite() {
            return Self { mantissa: self.mantissa, ln_scale: 0.0 };
        }
        let l = self.mantissa.abs().ln().floor();
        Self {
            mantissa: self.mantissa * (-l).exp(),
            ln_scale: self.ln_scale + l,
        }
    }

    /// Collapse to a plain f64; may overflow/underflow, callers accept that.
    pub fn to_f64(self) -> f64 {
        self.mantissa * self.ln_scale.exp()
    }

    pub fn ln_abs(self) -> f64 {
        if self.mantissa == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.mantissa.abs().ln() + self.ln_scale
        }
    }

    pub fn log10_abs(self) -> f64 {
        self.ln_abs() / std::f64::consts::LN_10
    }

    pub fn abs(self) -> Self {
        Self { mantissa: self.mantissa.abs(), ln_scale: self.ln_scale }
    }

    pub fn mul(self, rhs: Self) -> Self {
        Self {
            mantissa: self.mantissa * rhs.mantissa,
            ln_scale: self.ln_scale + rhs.ln_scale,
        }
        .normalized()
    }

    pub fn div(self, rhs: Self) -> Self {
        Self {
            mantissa: self.mantissa / rhs.mantissa,
            ln_scale: self.ln_scale - rhs.ln_scale,
        }
        .normalized()
    }

    pub fn scale_f64(self, s: f64) -> Self {
        Self { mantissa: self.mantissa * s, ln_scale: self.ln_scale }.normalized()
    }

    pub fn sqrt(self) -> Self {
        let n = self.normalized();
        Self { mantissa: n.mantissa.sqrt(), ln_scale: 0.5 * n.ln_scale }.normalized()
    }

    /// Sum that rebases both terms to the larger scale first.
    pub fn add(self, rhs: Self) -> Self {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let m = self.ln_scale.max(rhs.ln_scale);
        let a = self.mantissa * (self.ln_scale - m).exp();
        let b = rhs.mantissa * (rhs.ln_scale - m).exp();
        Self { mantissa: a + b, ln_scale: m }.normalized()
    }

    /// Compare |self| and |rhs| without leaving log space.
    pub fn cmp_abs(self, rhs: Self) -> std::cmp::Ordering {
        self.ln_abs().partial_cmp(&rhs.ln_abs()).unwrap_or(std::cmp::Ordering::Equal)
    }
}

impl LogScaled<Complex64> {
    pub fn from_c64(v: Complex64) -> Self {
        Self { mantissa: v, ln_scale: 0.0 }.normalized()
    }

    pub fn zero() -> Self {
        Self { mantissa: Complex64::new(0.0, 0.0), ln_scale: 0.0 }
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.norm_sqr() == 0.0
    }

    pub fn normalized(self) -> Self {
        let n = self.mantissa.norm();
        if n == 0.0 || !n.is_finite() {
            return Self { mantissa: self.mantissa, ln_scale: 0.0 };
        }
        let l = n.ln().floor();
        Self {
            mantissa: self.mantissa * (-l).exp(),
            ln_scale: self.ln_scale + l,
        }
    }

    pub fn to_c64(self) -> Complex64 {
        self.mantissa * self.ln_scale.exp()
    }

    pub fn ln_abs(self) -> f64 {
        let n = self.mantissa.norm();
        if n == 0.0 {
            f64::NEG_INFINITY
        } else {
            n.ln() + self.ln_scale
        }
    }

    pub fn log10_abs(self) -> f64 {
        self.ln_abs() / std::f64::consts::LN_10
    }

    pub fn abs(self) -> LogF64 {
        LogF64 { mantissa: self.mantissa.norm(), ln_scale: self.ln_scale }.normalized()
    }

    pub fn arg(self) -> f64 {
        self.mantissa.arg()
    }

    pub fn conj(self) -> Self {
        Self { mantissa: self.mantissa.conj(), ln_scale: self.ln_scale }
    }

    pub fn neg(self) -> Self {
        Self { mantissa: -self.mantissa, ln_scale: self.ln_scale }
    }

    pub fn mul(self, rhs: Self) -> Self {
        Self {
            mantissa: self.mantissa * rhs.mantissa,
            ln_scale: self.ln_scale + rhs.ln_scale,
        }
        .normalized()
    }

    pub fn mul_c64(self, rhs: Complex64) -> Self {
        Self { mantissa: self.mantissa * rhs, ln_scale: self.ln_scale }.normalized()
    }

    pub fn div(self, rhs: Self) -> Self {
        Self {
            mantissa: self.mantissa / rhs.mantissa,
            ln_scale: self.ln_scale - rhs.ln_scale,
        }
        .normalized()
    }

    pub fn add(self, rhs: Self) -> Self {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let m = self.ln_scale.max(rhs.ln_scale);
        let a = self.mantissa * (self.ln_scale - m).exp();
        let b = rhs.mantissa * (rhs.ln_scale - m).exp();
        Self { mantissa: a + b, ln_scale: m }.normalized()
    }

    pub fn sub(self, rhs: Self) -> Self {
        self.add(rhs.neg())
    }
}

impl fmt::Display for LogScaled<f64> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6e}*exp({:.3})", self.mantissa, self.ln_scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn roundtrip_moderate() {
        let a = LogF64::from_f64(3.25e10);
        assert_relative_eq!(a.to_f64(), 3.25e10, max_relative = 1e-14);
        assert!((1.0..std::f64::consts::E).contains(&a.mantissa.abs()));
    }

    #[test]
    fn huge_product_stays_finite() {
        let a = LogF64 { mantissa: 1.0, ln_scale: 500.0 };
        let b = LogF64 { mantissa: 2.0, ln_scale: 400.0 };
        let p = a.mul(b);
        assert!(p.mantissa.is_finite());
        assert_relative_eq!(p.ln_abs(), 900.0 + 2.0_f64.ln(), max_relative = 1e-14);
    }

    #[test]
    fn complex_add_cancels() {
        let a = LogC64::from_c64(Complex64::new(1.0, 1.0));
        let b = a.neg();
        assert!(a.add(b).is_zero());
    }

    proptest! {
        #[test]
        fn matches_f64_in_range(a in -1e6f64..1e6, b in -1e6f64..1e6) {
            prop_assume!(a.abs() > 1e-6 && b.abs() > 1e-6);
            let la = LogF64::from_f64(a);
            let lb = LogF64::from_f64(b);
            prop_assert!((la.mul(lb).to_f64() - a * b).abs() <= 1e-9 * (a * b).abs());
            prop_assert!((la.add(lb).to_f64() - (a + b)).abs() <= 1e-9 * (a.abs() + b.abs()));
            prop_assert!((la.div(lb).to_f64() - a / b).abs() <= 1e-9 * (a / b).abs());
        }
    }
}
