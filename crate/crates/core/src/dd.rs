//! Minimal double-double arithmetic (~31 significant digits).
//!
//! Only what the Airy Maclaurin series needs: the series terms grow to
//! ~exp((2/3)|y|^{3/2}) before cancelling down to an O(1) or exponentially
//! small value, so plain f64 accumulation loses up to ~7 digits near the
//! series/asymptotics switch point. Summing in double-double keeps the
//! cancellation loss far below the 1e-10 evaluation target.

/// Unevaluated sum hi + lo with |lo| <= ulp(hi)/2.
#[derive(Clone, Copy, Debug)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    #[inline]
    pub fn from_f64(v: f64) -> Dd {
        Dd { hi: v, lo: 0.0 }
    }

    /// Construct from two decimal halves, e.g. a 30+ digit constant split as
    /// leading f64 plus remainder.
    #[inline]
    pub fn from_parts(hi: f64, lo: f64) -> Dd {
        let (s, e) = two_sum(hi, lo);
        Dd { hi: s, lo: e }
    }

    #[inline]
    pub fn add(self, rhs: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let e = e + self.lo + rhs.lo;
        let (hi, lo) = two_sum(s, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn sub(self, rhs: Dd) -> Dd {
        self.add(Dd { hi: -rhs.hi, lo: -rhs.lo })
    }

    #[inline]
    pub fn mul(self, rhs: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + self.hi * rhs.lo + self.lo * rhs.hi;
        let (hi, lo) = two_sum(p, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn mul_f64(self, rhs: f64) -> Dd {
        let (p, e) = two_prod(self.hi, rhs);
        let e = e + self.lo * rhs;
        let (hi, lo) = two_sum(p, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn div_f64(self, rhs: f64) -> Dd {
        let q1 = self.hi / rhs;
        let (p, e) = two_prod(q1, rhs);
        let r = (self.hi - p - e + self.lo) / rhs;
        let (hi, lo) = two_sum(q1, r);
        Dd { hi, lo }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn abs(self) -> f64 {
        self.hi.abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catastrophic_cancellation_survives() {
        // (1e16 + 1) - 1e16 = 1 exactly in dd, 0 in f64.
        let a = Dd::from_f64(1e16).add(Dd::from_f64(1.0));
        let d = a.sub(Dd::from_f64(1e16));
        assert_eq!(d.to_f64(), 1.0);
    }

    #[test]
    fn product_error_term() {
        let a = Dd::from_f64(1.0 + 2f64.powi(-30));
        let b = a.mul(a);
        let exact = 1.0 + 2f64.powi(-29) + 2f64.powi(-60);
        assert!((b.to_f64() - exact).abs() < 1e-25);
    }

    #[test]
    fn division_inverts_multiplication() {
        let a = Dd::from_parts(3.141592653589793, 1.2246467991473532e-16);
        let b = a.mul_f64(7.0).div_f64(7.0);
        assert!((b.hi - a.hi).abs() < 1e-18 && (b.lo - a.lo).abs() < 1e-24);
    }
}
