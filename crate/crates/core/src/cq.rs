//! Centralizer-shearing witnesses for unipotent generators with `GR > 3`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{flow_point, group_dist, FlowSpec};
use crate::lie::{bracket, expm, gr_invariant, ChainBasis};
use crate::matrix::SquareMatrix;
use crate::report::{lin_grid, ShiftSample, WindowStat, WitnessReport};

pub const CHAIN_TOL: f64 = 1e-10;
const PARALLEL_TOL: f64 = 1e-6;

pub const ERGODICITY_ASSUMPTION: &str =
    "ergodicity of the shifted flow S_L o R_r is assumed, not verified";

/// Witness parameters: `κ = ε²`, `δ = ε⁴/(10N)`, `k = ⌈1/δ⌉`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CqSchedule {
    pub epsilon: f64,
    #[serde(rename = "N")]
    pub n: u64,
    pub kappa: f64,
    pub delta: f64,
    pub k: u64,
    pub generator: SquareMatrix,
    pub chain: (SquareMatrix, SquareMatrix),
}

impl CqSchedule {
    pub fn new(
        epsilon: f64,
        n: u64,
        generator: SquareMatrix,
        chain: (SquareMatrix, SquareMatrix),
    ) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!("epsilon {epsilon} not in (0,1)")));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("N must be positive".into()));
        }
        let delta = epsilon.powi(4) / (10.0 * n as f64);
        let inv = 1.0 / delta;
        let near = inv.round();
        let k = if (inv - near).abs() <= 1e-9 * inv { near } else { inv.ceil() };
        let s = Self {
            epsilon,
            n,
            kappa: epsilon * epsilon,
            delta,
            k: (k as u64).max(n),
            generator,
            chain,
        };
        s.check_chain()?;
        Ok(s)
    }

    /// Replaces `k`; it must still satisfy `k ≥ 1/δ` and `k ≥ N`.
    pub fn with_k(mut self, k: u64) -> Result<Self> {
        if (k as f64) < (1.0 / self.delta) * (1.0 - 1e-12) || k < self.n {
            return Err(Error::InvalidParameter(format!(
                "k = {k} below max(1/delta, N) = {}",
                (1.0 / self.delta).max(self.n as f64)
            )));
        }
        self.k = k;
        Ok(self)
    }

    pub fn check_chain(&self) -> Result<()> {
        let (x0, x1) = &self.chain;
        let r0 = bracket(&self.generator, x0)?.frobenius();
        let r1 = (&bracket(&self.generator, x1)? - x0).frobenius();
        if r0 > CHAIN_TOL || r1 > CHAIN_TOL {
            return Err(Error::InvalidParameter(format!(
                "chain relations fail: [U,X0] = {r0:e}, [U,X1]-X0 = {r1:e}"
            )));
        }
        if parallel_residual(x0, &self.generator) <= PARALLEL_TOL {
            return Err(Error::InvalidParameter("X0 is a multiple of U".into()));
        }
        Ok(())
    }

    /// Lower end `κ^{-2}` of the admissible `L` range.
    pub fn l_min(&self) -> f64 {
        self.kappa.powi(-2)
    }
}

/// `||X - proj_U X|| / ||X||`.
fn parallel_residual(x: &SquareMatrix, u: &SquareMatrix) -> f64 {
    let xn = x.frobenius();
    if xn == 0.0 {
        return 0.0;
    }
    let un2 = u.frobenius().powi(2);
    if un2 == 0.0 {
        return 1.0;
    }
    let dot: f64 = x.row_major().iter().zip(u.row_major()).map(|(a, b)| a * b).sum();
    (x - &u.scale(dot / un2)).frobenius() / xn
}

/// Bottom pair `(X_0, X_1)` of the first chain (in chain order) of length at
/// least two whose `X_0` is not a multiple of `U`.
pub fn select_noncentral_chain(
    cb: &ChainBasis,
    u: &SquareMatrix,
) -> Result<(SquareMatrix, SquareMatrix)> {
    let gr = gr_invariant(cb);
    if gr <= 3 {
        return Err(Error::NoQualifyingChain { gr: gr as f64 });
    }
    cb.chains
        .iter()
        .find(|c| c.len() >= 2 && parallel_residual(&c[0], u) > PARALLEL_TOL)
        .map(|c| (c[0].clone(), c[1].clone()))
        .ok_or(Error::NoQualifyingChain { gr: gr as f64 })
}

/// `||e^{tU} e^{X_1/k} e^{-tU} - e^{X_1/k + (t/k)X_0}||_F`.
pub fn verify_commutation(
    u: &SquareMatrix,
    x0: &SquareMatrix,
    x1: &SquareMatrix,
    t: f64,
    k: u64,
) -> Result<f64> {
    let kf = k as f64;
    let a = expm(&x1.scale(1.0 / kf))?;
    let e = expm(&u.scale(t))?;
    let ei = expm(&u.scale(-t))?;
    let lhs = &(&e * &a) * &ei;
    let rhs = expm(&(&x1.scale(1.0 / kf) + &x0.scale(t / kf)))?;
    Ok((&lhs - &rhs).frobenius())
}

/// Replays one window `[L, L+κL]` on a fixed uniform grid of `samples`
/// times, comparing `u_t(y)` with `S_L u_t(y')` where `y' = e^{X_1/k} y`
/// and `S_L = e^{-(L/k) X_0}`.
pub fn cq_window_check(
    s: &CqSchedule,
    y: &SquareMatrix,
    l: f64,
    samples: usize,
) -> Result<WitnessReport> {
    let stat = window_stat(s, y, l, samples)?;
    let mut r = base_report(s, samples);
    r.input("L", l);
    r.schedule.push(ShiftSample { l, p: shift_parameter(s, l) });
    r.windows.push(stat);
    r.settle(s.epsilon, true);
    Ok(r)
}

/// Shift parameter `-L/k` of `S_L`.
pub fn shift_parameter(s: &CqSchedule, l: f64) -> f64 {
    -l / s.k as f64
}

fn window_stat(s: &CqSchedule, y: &SquareMatrix, l: f64, samples: usize) -> Result<WindowStat> {
    let kf = s.k as f64;
    if !(l > 0.0) || l > kf {
        return Err(Error::WindowOutOfRange { l, k: kf });
    }
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be positive".into()));
    }
    let (x0, x1) = &s.chain;
    let flow_u = FlowSpec::new(s.generator.clone());
    let flow_x0 = FlowSpec::new(x0.clone());
    let yp = &expm(&x1.scale(1.0 / kf))? * y;
    let p = shift_parameter(s, l);
    let mut inside = 0usize;
    let mut max_d = 0.0f64;
    for t in lin_grid(l, l + s.kappa * l, samples) {
        let a = flow_point(&flow_u, t, y)?;
        let b = flow_point(&flow_x0, p, &flow_point(&flow_u, t, &yp)?)?;
        let d = group_dist(&a, &b)?;
        if d < s.epsilon {
            inside += 1;
        }
        max_d = max_d.max(d);
    }
    Ok(WindowStat {
        l,
        fraction: inside as f64 / samples as f64,
        max_dist: max_d,
    })
}

fn base_report(s: &CqSchedule, samples: usize) -> WitnessReport {
    let mut r = WitnessReport::new("cq-verify");
    r.input("epsilon", s.epsilon)
        .input("N", s.n)
        .input("kappa", s.kappa)
        .input("delta", s.delta)
        .input("k", s.k)
        .input("samples", samples as u64);
    r.m = Some(s.k as f64);
    r.assumptions.push(ERGODICITY_ASSUMPTION.into());
    r
}

/// Window replay over a grid of `L` values (evaluated in parallel, reported
/// in grid order). The terminal condition requires the shift at `L = k` to be
/// exactly `-1` whenever `k` is on the grid.
pub fn cq_replay(
    s: &CqSchedule,
    y: &SquareMatrix,
    l_grid: &[f64],
    samples: usize,
) -> Result<WitnessReport> {
    let stats: Vec<WindowStat> = l_grid
        .par_iter()
        .map(|&l| window_stat(s, y, l, samples))
        .collect::<Result<_>>()?;
    let mut r = base_report(s, samples);
    r.input("L_grid", l_grid.to_vec());
    r.schedule = l_grid
        .iter()
        .map(|&l| ShiftSample { l, p: shift_parameter(s, l) })
        .collect();
    r.windows = stats;
    let kf = s.k as f64;
    let terminal_ok = l_grid
        .iter()
        .filter(|&&l| l == kf)
        .all(|&l| shift_parameter(s, l) == -1.0);
    let (x0, x1) = &s.chain;
    r.residual("chain_U_X0", bracket(&s.generator, x0)?.frobenius());
    r.residual("chain_U_X1", (&bracket(&s.generator, x1)? - x0).frobenius());
    r.settle(s.epsilon, terminal_ok);
    Ok(r)
}
