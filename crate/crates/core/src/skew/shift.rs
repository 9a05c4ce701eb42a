//! The skew shift `T(x, y) = (x + α, y + x + β)` on the 2-torus.

use serde::{Deserialize, Serialize};

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::skew::cf::{continued_fraction, ContinuedFraction};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewShift {
    pub alpha: Dd,
    pub beta: Dd,
}

#[derive(Serialize, Deserialize)]
struct SkewShiftRepr {
    alpha: f64,
    alpha_lo: f64,
    beta: f64,
}

impl Serialize for SkewShift {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SkewShiftRepr {
            alpha: self.alpha.hi,
            alpha_lo: self.alpha.lo,
            beta: self.beta.to_f64(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SkewShift {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = SkewShiftRepr::deserialize(d)?;
        Ok(Self {
            alpha: Dd::new(r.alpha, r.alpha_lo),
            beta: Dd::from_f64(r.beta),
        })
    }
}

/// Depth of the irrationality witness.
pub const IRRATIONALITY_DEPTH: usize = 30;

impl SkewShift {
    /// Rejects `α` whose expansion terminates (or loses precision) before
    /// depth 30.
    pub fn new(alpha: Dd, beta: Dd) -> Result<Self> {
        let a = alpha.frac();
        continued_fraction(a, IRRATIONALITY_DEPTH).map_err(|e| {
            Error::InvalidParameter(format!("alpha not certified irrational: {e}"))
        })?;
        Ok(Self {
            alpha: a,
            beta: beta.frac(),
        })
    }

    pub fn golden() -> Self {
        Self {
            alpha: Dd::golden(),
            beta: Dd::ZERO,
        }
    }

    pub fn silver() -> Self {
        Self {
            alpha: Dd::silver(),
            beta: Dd::ZERO,
        }
    }

    pub fn continued_fraction(&self, depth: usize) -> Result<ContinuedFraction> {
        continued_fraction(self.alpha, depth)
    }

    /// `T^n(x, y)` in closed form:
    /// `(x + nα, y + nx + n(n-1)/2·α + nβ)` reduced mod 1 in double-double.
    pub fn iterate(&self, n: i64, x: f64, y: f64) -> (f64, f64) {
        let (xn, yn) = self.iterate_dd(n, Dd::from_f64(x), Dd::from_f64(y));
        (xn.hi, yn.hi)
    }

    pub fn iterate_dd(&self, n: i64, x: Dd, y: Dd) -> (Dd, Dd) {
        if n == 0 {
            return (x.frac(), y.frac());
        }
        let nd = Dd::from_i64(n);
        let tri = Dd::from_i128(n as i128 * (n as i128 - 1) / 2);
        // reduce each product before summing so magnitudes stay small
        let xn = (x + (self.alpha * nd).frac()).frac();
        let yn = (y + (x * nd).frac() + (self.alpha * tri).frac() + (self.beta * nd).frac()).frac();
        (xn, yn)
    }

    /// `n`-fold application of `T` (or `T^{-1}` for negative `n`), stepping
    /// in double-double.
    pub fn iterate_stepwise(&self, n: i64, x: f64, y: f64) -> (f64, f64) {
        let mut w = Orbit::start(self, Dd::from_f64(x), Dd::from_f64(y));
        if n >= 0 {
            for _ in 0..n {
                w.step();
            }
        } else {
            for _ in 0..(-n) {
                w.step_back();
            }
        }
        (w.x.hi, w.y.hi)
    }
}

/// Orbit cursor stepping in double-double.
#[derive(Debug, Clone, Copy)]
pub struct Orbit {
    pub x: Dd,
    pub y: Dd,
    alpha: Dd,
    beta: Dd,
}

impl Orbit {
    pub fn start(ss: &SkewShift, x: Dd, y: Dd) -> Self {
        Self {
            x: x.frac(),
            y: y.frac(),
            alpha: ss.alpha,
            beta: ss.beta,
        }
    }

    /// Cursor at `T^j(x, y)`.
    pub fn at(ss: &SkewShift, j: i64, x: f64, y: f64) -> Self {
        Self::at_dd(ss, j, Dd::from_f64(x), Dd::from_f64(y))
    }

    pub fn at_dd(ss: &SkewShift, j: i64, x: Dd, y: Dd) -> Self {
        let (xj, yj) = ss.iterate_dd(j, x, y);
        Self {
            x: xj,
            y: yj,
            alpha: ss.alpha,
            beta: ss.beta,
        }
    }

    #[inline]
    pub fn step(&mut self) {
        let y = (self.y + self.x + self.beta).frac();
        self.x = (self.x + self.alpha).frac();
        self.y = y;
    }

    #[inline]
    pub fn step_back(&mut self) {
        self.x = (self.x - self.alpha).frac();
        self.y = (self.y - self.x - self.beta).frac();
    }
}

/// Signed representative of `v mod 1` in `[-1/2, 1/2)`.
pub fn wrap_half(v: f64) -> f64 {
    v - (v + 0.5).floor()
}

/// Circle distance on `R/Z`.
pub fn circle_dist(a: f64, b: f64) -> f64 {
    wrap_half(a - b).abs()
}

/// Max of the coordinatewise circle distances.
pub fn torus_dist(p: (f64, f64), q: (f64, f64)) -> f64 {
    circle_dist(p.0, q.0).max(circle_dist(p.1, q.1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_and_one_step() {
        let ss = SkewShift::new(Dd::golden(), Dd::from_f64(0.3)).unwrap();
        assert_eq!(ss.iterate(0, 0.1, 0.2), (0.1, 0.2));
        let (x1, y1) = ss.iterate(1, 0.1, 0.2);
        assert!((x1 - (0.1 + Dd::golden().to_f64()).fract()).abs() < 1e-15);
        assert!((y1 - (0.2 + 0.1 + 0.3)).abs() < 1e-15);
    }

    #[test]
    fn negative_steps_invert() {
        let ss = SkewShift::new(Dd::silver(), Dd::from_f64(0.17)).unwrap();
        let (x, y) = ss.iterate(37, 0.4, 0.9);
        let (bx, by) = ss.iterate(-37, x, y);
        assert!(torus_dist((bx, by), (0.4, 0.9)) < 1e-14);
        let s = ss.iterate_stepwise(-5, 0.4, 0.9);
        let c = ss.iterate(-5, 0.4, 0.9);
        assert!(torus_dist(s, c) < 1e-14);
    }

    #[test]
    fn rational_alpha_rejected() {
        assert!(SkewShift::new(Dd::from_f64(0.25), Dd::ZERO).is_err());
    }

    #[test]
    fn closed_form_tracks_iteration_for_a_million_steps() {
        let ss = SkewShift::golden();
        let n = 1_000_000;
        let c = ss.iterate(n, 0.123, 0.456);
        let s = ss.iterate_stepwise(n, 0.123, 0.456);
        assert!(torus_dist(c, s) < 1e-9);
    }

    #[test]
    fn torus_distance_wraps() {
        assert!((circle_dist(0.9, 0.05) - 0.15).abs() < 1e-15);
        assert_eq!(torus_dist((0.1, 0.2), (0.1, 0.2)), 0.0);
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn closed_form_matches_steps(n in -2000i64..2000, x in 0.0f64..1.0, y in 0.0f64..1.0, b in 0.0f64..1.0) {
            let ss = SkewShift::new(Dd::golden(), Dd::from_f64(b)).unwrap();
            prop_assert!(torus_dist(ss.iterate(n, x, y), ss.iterate_stepwise(n, x, y)) < 1e-12);
        }
    }
}
