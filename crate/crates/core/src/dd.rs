//! Double-double arithmetic (~106-bit significand).
//!
//! Used for reducing `n·α` and `n(n-1)/2·α` modulo 1 on long skew-shift
//! orbits, where plain `f64` loses every significant digit long before
//! `n ~ 10^8`.

use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn new(hi: f64, lo: f64) -> Self {
        let (hi, lo) = two_sum(hi, lo);
        Self { hi, lo }
    }

    pub fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    /// Exact for every `i64`.
    pub fn from_i64(n: i64) -> Self {
        let hi = n as f64;
        // residual of the rounding is exactly representable
        let lo = (n - hi as i64) as f64;
        Self::new(hi, lo)
    }

    /// Exact for every `i128` whose magnitude is below 2^106.
    pub fn from_i128(n: i128) -> Self {
        let hi = n as f64;
        let lo = (n - hi as i128) as f64;
        Self::new(hi, lo)
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Self::ZERO;
        }
        // one Newton step from the f64 root
        let x = self.hi.sqrt();
        let (p, e) = two_prod(x, x);
        let r = ((self.hi - p) - e + self.lo) / (2.0 * x);
        Self::new(x, r)
    }

    pub fn floor(self) -> Self {
        let fh = self.hi.floor();
        if fh == self.hi {
            // hi is an integer; the fractional part lives in lo
            Self::new(fh, self.lo.floor())
        } else {
            Self { hi: fh, lo: 0.0 }
        }
    }

    /// Representative in `[0, 1)`.
    pub fn frac(self) -> Self {
        let f = self - self.floor();
        if f.hi > 1.0 || (f.hi == 1.0 && f.lo >= 0.0) {
            f - Self::ONE
        } else if f.hi < 0.0 || (f.hi == 0.0 && f.lo < 0.0) {
            f + Self::ONE
        } else {
            f
        }
    }

    pub fn div(self, other: Self) -> Self {
        let q1 = self.hi / other.hi;
        let r = self - other * q1;
        let q2 = r.hi / other.hi;
        let r = r - other * q2;
        let q3 = r.hi / other.hi;
        let (h, l) = quick_two_sum(q1, q2);
        Self { hi: h, lo: l } + Self::from_f64(q3)
    }

    pub fn recip(self) -> Self {
        Self::ONE.div(self)
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    /// `(√5 − 1)/2`.
    pub fn golden() -> Self {
        (Self::from_f64(5.0).sqrt() - Self::ONE).div(Self::from_f64(2.0))
    }

    /// `√2 − 1`.
    pub fn silver() -> Self {
        Self::from_f64(2.0).sqrt() - Self::ONE
    }

    /// Exact value as `numerator / 2^shift`.
    pub fn to_dyadic(self) -> (BigInt, u32) {
        fn parts(x: f64) -> (BigInt, i32) {
            if x == 0.0 {
                return (BigInt::from(0), 0);
            }
            let bits = x.to_bits();
            let sign = if bits >> 63 == 1 { -1 } else { 1 };
            let exp = ((bits >> 52) & 0x7ff) as i32;
            let mant = bits & ((1u64 << 52) - 1);
            let (m, e) = if exp == 0 {
                (mant, -1074)
            } else {
                (mant | (1u64 << 52), exp - 1075)
            };
            (BigInt::from(m) * sign, e)
        }
        let (m1, e1) = parts(self.hi);
        let (m2, e2) = parts(self.lo);
        let emin = e1.min(e2).min(0);
        let num: BigInt = (m1 << (e1 - emin) as usize) + (m2 << (e2 - emin) as usize);
        let tz = num.trailing_zeros().unwrap_or(0).min((-emin) as u64);
        (num >> tz as usize, (-emin) as u32 - tz as u32)
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (hi, lo) = quick_two_sum(s1, s2);
        Dd { hi, lo }
    }
}

impl Add<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: f64) -> Dd {
        let (s1, s2) = two_sum(self.hi, b);
        let s2 = s2 + self.lo;
        let (hi, lo) = quick_two_sum(s1, s2);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, b.hi);
        let p2 = p2 + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }
}

impl Mul<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: f64) -> Dd {
        let (p1, p2) = two_prod(self.hi, b);
        let p2 = p2 + self.lo * b;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_satisfies_its_quadratic() {
        // φ² + φ − 1 = 0
        let g = Dd::golden();
        let r = g * g + g - Dd::ONE;
        assert!(r.to_f64().abs() < 1e-31, "{r:?}");
        let s = Dd::silver();
        let r = s * s + s * 2.0 - Dd::ONE;
        assert!(r.to_f64().abs() < 1e-31, "{r:?}");
    }

    #[test]
    fn integer_multiples_reduce_accurately() {
        // frac(n·α) for a dyadic α where the exact answer is known
        let a = Dd::new(0.5, 2f64.powi(-80));
        let n = 1i64 << 40;
        let f = (a * Dd::from_i64(n)).frac();
        // n·α = 2^39 + 2^-40, fractional part 2^-40
        assert_eq!(f.to_f64(), 2f64.powi(-40));
    }

    #[test]
    fn frac_of_negative() {
        let f = Dd::from_f64(-0.25).frac();
        assert_eq!(f.to_f64(), 0.75);
        let f = Dd::new(3.0, -1e-20).frac();
        let gap = (f - Dd::ONE).to_f64();
        assert!(gap < 0.0 && (gap + 1e-20).abs() < 1e-35, "{f:?}");
    }

    #[test]
    fn dyadic_is_exact() {
        let x = Dd::new(0.75, 2f64.powi(-70));
        let (num, shift) = x.to_dyadic();
        assert_eq!(shift, 70);
        let expect = (BigInt::from(3) << 68usize) + BigInt::from(1);
        assert_eq!(num, expect);
    }

    #[test]
    fn i64_roundtrip_exact() {
        let n = (1i64 << 62) + 12345;
        let d = Dd::from_i64(n);
        assert_eq!(d.hi as i128 + d.lo as i128, n as i128);
    }
}
