//! Real trigonometric-polynomial roof functions on the 2-torus.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fourier coefficient `c_{m,n}` of `e^{2πi(mx+ny)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub m: i32,
    pub n: i32,
    pub re: f64,
    pub im: f64,
}

/// One real harmonic `2·Re(c e^{iθ})`, `θ = 2π(mx+ny)`, folded from a
/// conjugate pair.
#[derive(Debug, Clone, Copy)]
struct Harmonic {
    m: f64,
    n: f64,
    re: f64,
    im: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "Vec<Coefficient>", into = "Vec<Coefficient>")]
pub struct RoofFunction {
    coeffs: Vec<Coefficient>,
    mean: f64,
    harmonics: Vec<Harmonic>,
    /// Certified lower bound on `f`.
    pub constant_floor: f64,
    pub grid_min: f64,
}

impl TryFrom<Vec<Coefficient>> for RoofFunction {
    type Error = Error;
    fn try_from(v: Vec<Coefficient>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<RoofFunction> for Vec<Coefficient> {
    fn from(r: RoofFunction) -> Self {
        r.coeffs
    }
}

const SYMMETRY_TOL: f64 = 1e-14;
const FLOOR_GRID: usize = 512;

impl RoofFunction {
    /// Validates conjugate symmetry and positivity. The floor is the grid
    /// minimum minus a Lipschitz allowance for the grid spacing.
    pub fn new(coeffs: Vec<Coefficient>) -> Result<Self> {
        let find = |m: i32, n: i32| {
            coeffs
                .iter()
                .filter(|c| c.m == m && c.n == n)
                .fold((0.0, 0.0), |(r, i), c| (r + c.re, i + c.im))
        };
        let mut harmonics = Vec::new();
        let mut mean = 0.0;
        let mut seen = std::collections::BTreeSet::new();
        for c in &coeffs {
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::InvalidParameter("non-finite roof coefficient".into()));
            }
            if !seen.insert((c.m, c.n)) {
                continue;
            }
            let (re, im) = find(c.m, c.n);
            let (cre, cim) = find(-c.m, -c.n);
            if (re - cre).abs() > SYMMETRY_TOL || (im + cim).abs() > SYMMETRY_TOL {
                return Err(Error::InvalidParameter(format!(
                    "roof not real: c({},{}) is not the conjugate of c({},{})",
                    c.m, c.n, -c.m, -c.n
                )));
            }
            if c.m == 0 && c.n == 0 {
                if im.abs() > SYMMETRY_TOL {
                    return Err(Error::InvalidParameter("imaginary mean".into()));
                }
                mean = re;
            } else if c.m > 0 || (c.m == 0 && c.n > 0) {
                if re != 0.0 || im != 0.0 {
                    harmonics.push(Harmonic {
                        m: c.m as f64,
                        n: c.n as f64,
                        re: 2.0 * re,
                        im: 2.0 * im,
                    });
                }
            }
        }
        let mut r = Self {
            coeffs,
            mean,
            harmonics,
            constant_floor: 0.0,
            grid_min: 0.0,
        };
        let h = 1.0 / FLOOR_GRID as f64;
        let mut gmin = f64::INFINITY;
        for i in 0..FLOOR_GRID {
            for j in 0..FLOOR_GRID {
                gmin = gmin.min(r.eval(i as f64 * h, j as f64 * h));
            }
        }
        // every point is within h/2 of the grid in each coordinate
        let lip: f64 = r
            .harmonics
            .iter()
            .map(|k| k.re.hypot(k.im) * TAU * (k.m.abs() + k.n.abs()))
            .sum();
        r.grid_min = gmin;
        r.constant_floor = gmin - lip * h / 2.0;
        if !(r.constant_floor > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "roof not bounded away from zero: certified floor {}",
                r.constant_floor
            )));
        }
        Ok(r)
    }

    /// `1 + 0.2 cos(2πy) + 0.1 sin(2πx)`.
    pub fn default_roof() -> Self {
        Self::new(vec![
            Coefficient { m: 0, n: 0, re: 1.0, im: 0.0 },
            Coefficient { m: 0, n: 1, re: 0.1, im: 0.0 },
            Coefficient { m: 0, n: -1, re: 0.1, im: 0.0 },
            Coefficient { m: 1, n: 0, re: 0.0, im: -0.05 },
            Coefficient { m: -1, n: 0, re: 0.0, im: 0.05 },
        ])
        .expect("default roof is valid")
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::new(vec![Coefficient { m: 0, n: 0, re: c, im: 0.0 }])
    }

    /// Coefficients from `(m, n, re, im)` rows.
    pub fn from_rows(rows: &[(i32, i32, f64, f64)]) -> Result<Self> {
        Self::new(
            rows.iter()
                .map(|&(m, n, re, im)| Coefficient { m, n, re, im })
                .collect(),
        )
    }

    pub fn coefficients(&self) -> &[Coefficient] {
        &self.coeffs
    }

    /// `∫ f` over the torus.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Upper bound `mean + Σ |harmonic amplitude|`.
    pub fn sup_bound(&self) -> f64 {
        self.mean + self.harmonics.iter().map(|k| k.re.hypot(k.im)).sum::<f64>()
    }

    pub fn is_constant(&self) -> bool {
        self.harmonics.is_empty()
    }

    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let mut s = self.mean;
        for k in &self.harmonics {
            let th = TAU * (k.m * x + k.n * y);
            let (sn, cs) = th.sin_cos();
            s += k.re * cs - k.im * sn;
        }
        s
    }

    /// `f(x, y) - f(x - dx, y - dy)` via sum-to-product, accurate for tiny
    /// offsets.
    #[inline]
    pub fn diff(&self, x: f64, y: f64, dx: f64, dy: f64) -> f64 {
        let mut s = 0.0;
        for k in &self.harmonics {
            let d = TAU * (k.m * dx + k.n * dy);
            let mid = TAU * (k.m * x + k.n * y) - 0.5 * d;
            let (sm, cm) = mid.sin_cos();
            let h = (0.5 * d).sin();
            // cos θ - cos θ' = -2 sin(mid) sin(d/2), sin θ - sin θ' = 2 cos(mid) sin(d/2)
            s += -2.0 * h * (k.re * sm + k.im * cm);
        }
        s
    }

    /// `(Σ |c_{m,n}|² (1 + m² + n²)^s)^{1/2}`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.coeffs
            .iter()
            .map(|c| {
                let w = 1.0 + (c.m as f64).powi(2) + (c.n as f64).powi(2);
                (c.re * c.re + c.im * c.im) * w.powf(s)
            })
            .sum::<f64>()
            .sqrt()
    }
}
