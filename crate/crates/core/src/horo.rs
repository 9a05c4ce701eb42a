//! Horocycle shear in SL(2,R): UXV coordinates, the shear polynomial and the
//! strong-R witness built from it.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{flow_point, group_dist, FlowSpec};
use crate::lie::{expm, Sl2Triple};
use crate::matrix::SquareMatrix;
use crate::report::{Series, ShiftSample, WindowStat, WitnessReport};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UXVCoords {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl UXVCoords {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    /// `exp(aU) exp(bX) exp(cV)`.
    pub fn to_matrix(&self) -> SquareMatrix {
        let (eb, emb) = (self.b.exp(), (-self.b).exp());
        SquareMatrix::from_rows(&[
            vec![eb + self.a * self.c * emb, self.a * emb],
            vec![self.c * emb, emb],
        ])
        .expect("finite 2x2")
    }

    /// The point `exp(aU) exp(bX) exp(cV) x`.
    pub fn apply(&self, x: &SquareMatrix) -> Result<SquareMatrix> {
        self.to_matrix().check_same_dim(x)?;
        Ok(&self.to_matrix() * x)
    }

    pub fn max_abs(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs())
    }
}

/// Coordinates of `y` relative to `x`, read off `M = y x^{-1}`.
pub fn uxv_decompose(x: &SquareMatrix, y: &SquareMatrix) -> Result<UXVCoords> {
    if x.dim() != 2 || y.dim() != 2 {
        return Err(Error::DimensionMismatch(x.dim(), 2));
    }
    let m = y * &x.inverse()?;
    let m22 = m.get(1, 1);
    if !(m22 > 0.0) {
        return Err(Error::OutOfChart(m22));
    }
    Ok(UXVCoords {
        a: m.get(0, 1) / m22,
        b: -m22.ln(),
        c: m.get(1, 0) / m22,
    })
}

/// `e^{-2b} t - e^{-3b} c t²`.
pub fn chi(t: f64, b: f64, c: f64) -> f64 {
    (-2.0 * b).exp() * t - (-3.0 * b).exp() * c * t * t
}

/// `χ(t) - t = (e^{-2b} - 1) t - e^{-3b} c t²`, without cancellation.
pub fn shear_offset(t: f64, b: f64, c: f64) -> f64 {
    (-2.0 * b).exp_m1() * t - (-3.0 * b).exp() * c * t * t
}

// ---------------------------------------------------------------------------
// polynomial constant

/// `sup_{[0,T]} |β₁ + β₂ t + β₃ t²|`, exact (endpoints and vertex).
pub fn quad_sup(beta: [f64; 3], t_max: f64) -> f64 {
    let p = |t: f64| beta[0] + beta[1] * t + beta[2] * t * t;
    let mut s = p(0.0).abs().max(p(t_max).abs());
    if beta[2] != 0.0 {
        let v = -beta[1] / (2.0 * beta[2]);
        if v > 0.0 && v < t_max {
            s = s.max(p(v).abs());
        }
    }
    s
}

const C0_GRID: usize = 400;

/// Minimum of `sup_{[0,T]}|p|` over polynomials on the boundary of the box
/// `|β₁| ≤ 1/4, |β₂| ≤ 1/(4T), |β₃| ≤ 1/(4T²)`. By homogeneity this is the
/// largest `c₀` for which `sup |p| ≤ c₀` keeps `β` inside the box.
pub fn derive_c0_at(t_max: f64) -> f64 {
    let bounds = [0.25, 0.25 / t_max, 0.25 / (t_max * t_max)];
    let eval = |face: usize, sign: f64, u: f64, v: f64| {
        let (i, j) = match face {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let mut beta = [0.0; 3];
        beta[face] = sign * bounds[face];
        beta[i] = u * bounds[i];
        beta[j] = v * bounds[j];
        quad_sup(beta, t_max)
    };
    let mut best = f64::INFINITY;
    for face in 0..3 {
        for sign in [1.0, -1.0] {
            // coarse grid on [-1,1]², then shrinking pattern search
            let mut cur = (f64::INFINITY, 0.0, 0.0);
            let n = C0_GRID;
            for iu in 0..=n {
                let u = -1.0 + 2.0 * iu as f64 / n as f64;
                for iv in 0..=n {
                    let v = -1.0 + 2.0 * iv as f64 / n as f64;
                    let s = eval(face, sign, u, v);
                    if s < cur.0 {
                        cur = (s, u, v);
                    }
                }
            }
            let mut h = 2.0 / n as f64;
            while h > 1e-12 {
                let mut improved = false;
                for du in [-1.0, 0.0, 1.0] {
                    for dv in [-1.0, 0.0, 1.0] {
                        let u = (cur.1 + du * h).clamp(-1.0, 1.0);
                        let v = (cur.2 + dv * h).clamp(-1.0, 1.0);
                        let s = eval(face, sign, u, v);
                        if s < cur.0 {
                            cur = (s, u, v);
                            improved = true;
                        }
                    }
                }
                if !improved {
                    h *= 0.5;
                }
            }
            best = best.min(cur.0);
        }
    }
    best
}

/// `c₀` over a grid of horizons (the minimum; the value does not depend on
/// `T`).
pub fn derive_c0(t_grid: &[f64]) -> Result<f64> {
    if t_grid.is_empty() || t_grid.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
        return Err(Error::InvalidParameter("T grid must be nonempty and positive".into()));
    }
    Ok(t_grid
        .par_iter()
        .map(|&t| derive_c0_at(t))
        .reduce(|| f64::INFINITY, f64::min))
}

/// Cached `c₀` at `T = 1`.
pub fn c0() -> f64 {
    static C0: OnceLock<f64> = OnceLock::new();
    *C0.get_or_init(|| derive_c0_at(1.0))
}

// ---------------------------------------------------------------------------
// witness

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoroConfig {
    pub epsilon: f64,
    pub kappa: f64,
    /// Admissibility bound on `|a|, |b|, |c|`.
    pub delta: f64,
    /// Closeness constants for the time-changed flow; recorded, never asserted.
    pub n_eps: f64,
    pub delta_prime: f64,
}

impl HoroConfig {
    /// `κ = ε²/10` (so the f1 drift bound `8κ` stays below `ε²`) and
    /// `δ = κ^{10}`.
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!("epsilon {epsilon} not in (0,1)")));
        }
        let kappa = epsilon * epsilon / 10.0;
        Ok(Self {
            epsilon,
            kappa,
            delta: kappa.powi(10),
            n_eps: 10.0,
            delta_prime: 1e-3,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShearWitness {
    #[serde(rename = "M")]
    pub m: f64,
    pub b: f64,
    pub c: f64,
    pub c0: f64,
    pub kappa: f64,
    pub epsilon: f64,
}

impl ShearWitness {
    /// `p_L = f(L)`.
    pub fn p_of_l(&self, l: f64) -> f64 {
        shear_offset(l, self.b, self.c)
    }

    pub fn l_min(&self) -> f64 {
        self.kappa.powi(-2)
    }

    /// Largest `|f(t) - f(t+s)|` over a `n × n` grid of `t ∈ [κ^{-2}, M]`
    /// (log-spaced) and `s ∈ [0, κt]`.
    pub fn f1_max(&self, n: usize) -> f64 {
        let ts = crate::report::log_grid(self.l_min(), self.m, n.max(2));
        ts.par_iter()
            .map(|&t| {
                let ft = self.p_of_l(t);
                (0..n.max(2))
                    .map(|j| {
                        let s = self.kappa * t * j as f64 / (n.max(2) - 1) as f64;
                        (ft - self.p_of_l(t + s)).abs()
                    })
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }
}

/// Upper end `min(|b|^{-1}, |c|^{-1/2})` of the shear range.
pub fn shear_horizon(b: f64, c: f64) -> f64 {
    let tb = if b == 0.0 { f64::INFINITY } else { 1.0 / b.abs() };
    let tc = if c == 0.0 { f64::INFINITY } else { c.abs().powf(-0.5) };
    tb.min(tc)
}

/// Smallest positive root of `q t² + p t + r = 0`.
fn smallest_positive_root(q: f64, p: f64, r: f64) -> Option<f64> {
    let mut roots = Vec::with_capacity(2);
    if q == 0.0 {
        if p != 0.0 {
            roots.push(-r / p);
        }
    } else {
        let disc = p * p - 4.0 * q * r;
        if disc >= 0.0 {
            let s = disc.sqrt();
            let w = -0.5 * (p + p.signum() * s);
            if w != 0.0 {
                roots.push(w / q);
                roots.push(r / w);
            } else {
                roots.push((-r / q).max(0.0).sqrt());
            }
        }
    }
    roots
        .into_iter()
        .filter(|t| t.is_finite() && *t > 0.0)
        .min_by(|a, b| a.total_cmp(b))
}

/// First time `M` in `[0, min(|b|^{-1}, |c|^{-1/2})]` with `|f(M)| ≥ c₀`.
pub fn strong_r_witness(a: f64, b: f64, c: f64, cfg: &HoroConfig) -> Result<ShearWitness> {
    if !(b * b + c * c > 0.0) {
        return Err(Error::NoCrossing(
            "b = c = 0: the points lie on one orbit (b² + c² > 0 fails)".into(),
        ));
    }
    let big = a.abs().max(b.abs()).max(c.abs());
    if big >= cfg.delta {
        return Err(Error::NoCrossing(format!(
            "max(|a|,|b|,|c|) = {big:e} is not below delta = {:e}",
            cfg.delta
        )));
    }
    let c0 = c0();
    let horizon = shear_horizon(b, c);
    let beta = (-2.0 * b).exp_m1();
    let gamma = (-3.0 * b).exp() * c;
    // f(t) = beta t - gamma t² = ±c0
    let m = [c0, -c0]
        .iter()
        .filter_map(|&target| smallest_positive_root(-gamma, beta, -target))
        .min_by(|x, y| x.total_cmp(y));
    let Some(mut m) = m.filter(|&m| m <= horizon) else {
        let t = horizon;
        let (lin, quad) = (0.25 / t, 0.25 / (t * t));
        let held = if beta.abs() <= lin && gamma.abs() <= quad {
            format!("both |e^(-2b)-1| = {:e} <= 1/(4T) = {lin:e} and |e^(-3b)c| = {:e} <= 1/(4T^2) = {quad:e}", beta.abs(), gamma.abs())
        } else if beta.abs() <= lin {
            format!("|e^(-2b)-1| = {:e} <= 1/(4T) = {lin:e}", beta.abs())
        } else {
            format!("|e^(-3b)c| = {:e} <= 1/(4T^2) = {quad:e}", gamma.abs())
        };
        return Err(Error::NoCrossing(format!(
            "|f| < c0 on [0, T = {t:e}]; coefficient bound held: {held}"
        )));
    };
    let f = |t: f64| beta * t - gamma * t * t;
    // closed-form root may land one ulp short of the level set
    let mut step = m * f64::EPSILON;
    while f(m).abs() < c0 && step < 1e-6 * m {
        m += step;
        step *= 2.0;
    }
    if f(m).abs() < c0 {
        m = crate::quad::bisect_increasing(|t| f(t).abs() - c0, 0.0, m * (1.0 + 1e-6), 1e-10 * m);
    }
    let w = ShearWitness {
        m,
        b,
        c,
        c0,
        kappa: cfg.kappa,
        epsilon: cfg.epsilon,
    };
    if m < w.l_min() {
        return Err(Error::NoCrossing(format!(
            "crossing M = {m:e} precedes kappa^-2 = {:e}: |b|, |c| exceed the admissible regime",
            w.l_min()
        )));
    }
    Ok(w)
}

// ---------------------------------------------------------------------------
// divergence in the group

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceSample {
    pub t: f64,
    pub d_raw: f64,
    pub d_comp: f64,
    pub f: f64,
}

/// Regression bound for `D_comp(t)`, calibrated against the exact 2×2
/// computation.
pub fn divergence_bound(coords: &UXVCoords, t: f64) -> f64 {
    let (a, b, c, t) = (coords.a.abs(), coords.b.abs(), coords.c.abs(), t.abs());
    4.0 * (a + b + c * (1.0 + t) + b * c * t * t + c * c * t * t * t) + 1e-13 * (1.0 + t)
}

/// Raw and compensated distances along `t_grid` for `y = UXV(coords)·x`.
/// `D_raw(t) = d(h_t x, h_t y)`; `D_comp(t) = d(h_t y, h_{χ(t)} x)`.
pub fn divergence_series(
    x: &SquareMatrix,
    coords: &UXVCoords,
    t_grid: &[f64],
) -> Result<Vec<DivergenceSample>> {
    let flow = FlowSpec::new(Sl2Triple::canonical().u);
    let y = coords.apply(x)?;
    t_grid
        .par_iter()
        .map(|&t| {
            let hx = flow_point(&flow, t, x)?;
            let hy = flow_point(&flow, t, &y)?;
            let hx_chi = flow_point(&flow, chi(t, coords.b, coords.c), x)?;
            Ok(DivergenceSample {
                t,
                d_raw: group_dist(&hx, &hy)?,
                d_comp: group_dist(&hy, &hx_chi)?,
                f: shear_offset(t, coords.b, coords.c),
            })
        })
        .collect()
}

/// Report over `t_grid`; `compensated` selects which distance must stay
/// under [`divergence_bound`].
pub fn verify_horocycle_divergence(
    x: &SquareMatrix,
    coords: &UXVCoords,
    t_grid: &[f64],
    compensated: bool,
) -> Result<WitnessReport> {
    let series = divergence_series(x, coords, t_grid)?;
    let mut r = WitnessReport::new("horo-shear");
    r.input("a", coords.a)
        .input("b", coords.b)
        .input("c", coords.c)
        .input("compensated", compensated)
        .input("samples", t_grid.len() as u64);
    let mut inside = 0usize;
    let mut max_sel = 0.0f64;
    for s in &series {
        let d = if compensated { s.d_comp } else { s.d_raw };
        max_sel = max_sel.max(d);
        if d <= divergence_bound(coords, s.t) {
            inside += 1;
        }
    }
    let max_comp = series.iter().map(|s| s.d_comp).fold(0.0, f64::max);
    let max_raw = series.iter().map(|s| s.d_raw).fold(0.0, f64::max);
    r.residual("max_D_comp", max_comp).residual("max_D_raw", max_raw);
    if let Some(last) = series.last() {
        r.residual("D_raw_final", last.d_raw);
        r.m = Some(last.t);
    }
    r.schedule = series.iter().map(|s| ShiftSample { l: s.t, p: s.f }).collect();
    let n = series.len().max(1) as f64;
    r.windows.push(WindowStat {
        l: t_grid.first().copied().unwrap_or(0.0),
        fraction: inside as f64 / n,
        max_dist: max_sel,
    });
    r.series = Some(Series::new(
        &["t", "D_raw", "D_comp", "f"],
        series.iter().map(|s| vec![s.t, s.d_raw, s.d_comp, s.f]).collect(),
    ));
    r.settle(0.0, true);
    Ok(r)
}

/// `exp(aU)exp(bX)exp(cV)` via the general exponential, for cross-checks.
pub fn uxv_matrix_via_expm(coords: &UXVCoords) -> Result<SquareMatrix> {
    let t = Sl2Triple::canonical();
    Ok(&(&expm(&t.u.scale(coords.a))? * &expm(&t.x.scale(coords.b))?)
        * &expm(&t.v.scale(coords.c))?)
}
