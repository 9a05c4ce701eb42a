//! Continued fractions with certified depth.
//!
//! The input is an interval `[α - r, α + r]` with dyadic endpoints; Euclid
//! runs exactly on both endpoints and stops where their expansions part.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::dd::Dd;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuedFraction {
    pub alpha: f64,
    pub partial_quotients: Vec<u64>,
    /// Convergent denominators `q_0 = 1, q_1 = a_1, ...`.
    pub q: Vec<u128>,
}

impl ContinuedFraction {
    pub fn max_quotient(&self) -> u64 {
        self.partial_quotients.iter().copied().max().unwrap_or(0)
    }

    /// Every computed partial quotient is at most `c_alpha`.
    pub fn is_bounded_type(&self, c_alpha: u64) -> bool {
        self.max_quotient() <= c_alpha
    }

    pub fn depth(&self) -> usize {
        self.partial_quotients.len()
    }
}

/// Working uncertainty of a double-double value: a power of two about four
/// units in its last place.
pub fn dd_radius(a: Dd) -> f64 {
    let mag = a.hi.abs().max(f64::MIN_POSITIVE);
    if a.lo == 0.0 {
        // plain f64 input: half an ulp of hi
        2f64.powi(mag.log2().floor() as i32 - 53)
    } else {
        2f64.powi(mag.log2().floor() as i32 - 104)
    }
}

/// CF expansion of `alpha ∈ (0,1)` to `depth` partial quotients, certified
/// against the uncertainty [`dd_radius`].
pub fn continued_fraction(alpha: Dd, depth: usize) -> Result<ContinuedFraction> {
    continued_fraction_with_radius(alpha, dd_radius(alpha), depth)
}

pub fn continued_fraction_with_radius(
    alpha: Dd,
    radius: f64,
    depth: usize,
) -> Result<ContinuedFraction> {
    let a = alpha.to_f64();
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha {a} not in (0,1)")));
    }
    let lo = (alpha + Dd::from_f64(-radius)).to_dyadic();
    let hi = (alpha + Dd::from_f64(radius)).to_dyadic();
    // common denominator 2^k
    let k = lo.1.max(hi.1);
    let den = BigInt::from(1) << k as usize;
    let mut e1 = (lo.0 << (k - lo.1) as usize, den.clone());
    let mut e2 = (hi.0 << (k - hi.1) as usize, den);
    let mut quotients = Vec::with_capacity(depth);
    let mut q: Vec<u128> = vec![1];
    let mut q_prev: u128 = 0;
    while quotients.len() < depth {
        // x = num/den ∈ (0,1); next quotient is floor(den/num)
        if e1.0.is_zero() || e2.0.is_zero() {
            return Err(Error::PrecisionExhausted {
                depth: quotients.len(),
                partial: quotients,
            });
        }
        let (d1, r1) = e1.1.div_rem(&e1.0);
        let (d2, r2) = e2.1.div_rem(&e2.0);
        if d1 != d2 {
            return Err(Error::PrecisionExhausted {
                depth: quotients.len(),
                partial: quotients,
            });
        }
        let Some(aq) = d1.to_u64() else {
            return Err(Error::PrecisionExhausted {
                depth: quotients.len(),
                partial: quotients,
            });
        };
        let last = *q.last().expect("q nonempty");
        let Some(next) = (aq as u128)
            .checked_mul(last)
            .and_then(|v| v.checked_add(q_prev))
        else {
            return Err(Error::PrecisionExhausted {
                depth: quotients.len(),
                partial: quotients,
            });
        };
        quotients.push(aq);
        q_prev = last;
        q.push(next);
        e1 = (r1, e1.0);
        e2 = (r2, e2.0);
    }
    Ok(ContinuedFraction {
        alpha: a,
        partial_quotients: quotients,
        q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exact CF of a rational `p/q`.
    fn rational_cf(mut p: BigInt, mut q: BigInt, n: usize) -> Vec<u64> {
        let mut out = Vec::new();
        // skip the integer part of p/q < 1
        while out.len() < n && !p.is_zero() {
            let (d, r) = q.div_rem(&p);
            out.push(d.to_u64().unwrap());
            q = p;
            p = r;
        }
        out
    }

    #[test]
    fn golden_is_all_ones_with_fibonacci_denominators() {
        let cf = continued_fraction(Dd::golden(), 60).unwrap();
        assert!(cf.partial_quotients.iter().all(|&a| a == 1));
        let mut fib = vec![1u128, 1];
        while fib.len() < cf.q.len() {
            let n = fib.len();
            fib.push(fib[n - 1] + fib[n - 2]);
        }
        assert_eq!(cf.q, fib);
        assert!(cf.is_bounded_type(1));
    }

    #[test]
    fn golden_matches_fibonacci_ratio_oracle() {
        // F_200 / F_201 agrees with the golden mean far beyond 60 quotients
        let mut a = BigInt::from(1);
        let mut b = BigInt::from(1);
        for _ in 0..200 {
            let c = &a + &b;
            a = b;
            b = c;
        }
        let oracle = rational_cf(a, b, 60);
        let cf = continued_fraction(Dd::golden(), 60).unwrap();
        assert_eq!(cf.partial_quotients, oracle);
    }

    #[test]
    fn silver_is_all_twos() {
        let cf = continued_fraction(Dd::silver(), 40).unwrap();
        assert!(cf.partial_quotients.iter().all(|&a| a == 2));
        assert_eq!(cf.max_quotient(), 2);
        assert!(cf.is_bounded_type(2));
        for w in cf.q.windows(3) {
            assert_eq!(w[2], 2 * w[1] + w[0]);
        }
    }

    #[test]
    fn near_half_exhausts_precision() {
        let a = Dd::from_f64(0.5 + 1e-12);
        match continued_fraction(a, 30) {
            Err(Error::PrecisionExhausted { depth, partial }) => {
                assert!(depth < 30);
                assert_eq!(partial[..2], [1, 1]);
                assert!(partial.len() < 3 || partial[2] > 1000);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn f64_golden_supports_depth_thirty() {
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let cf = continued_fraction(Dd::from_f64(g), 30).unwrap();
        assert!(cf.partial_quotients.iter().all(|&a| a == 1));
    }
}
