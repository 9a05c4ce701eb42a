//! Shear-time search, the R1′ witness on the base, and its lift to the
//! special flow.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::{lin_grid, log_grid, Series, ShiftSample, WindowStat, WitnessReport};
use crate::skew::birkhoff::{shear_scan, BirkhoffTable, PointPair, ShearTable};
use crate::skew::roof::RoofFunction;
use crate::skew::shift::{torus_dist, wrap_half, SkewShift};
use crate::skew::special::{flow_with_table, metric_df, SpecialFlowPoint};
use crate::sum::Precision;

/// Search and window parameters for the skew-shift experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeisConfig {
    pub epsilon: f64,
    pub kappa: f64,
    pub delta: f64,
    /// Initial search horizon factor `D`.
    pub d_factor: f64,
    pub d_max: f64,
    /// Hard cap on the number of orbit steps in one search.
    pub step_budget: u64,
    pub windows: usize,
    pub samples: usize,
    /// Terminal time `M = (S_{M′} - s)/2` when set, `S_{M′} - s` otherwise.
    pub halve_m: bool,
    pub decimation: u64,
    #[serde(skip)]
    pub precision: Precision,
}

pub const DEFAULT_STEP_BUDGET: u64 = 100_000_000;

impl HeisConfig {
    /// `κ = ε⁴`, `δ = 10^{-8}`, `M = S_{M′} - s`.
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!("epsilon {epsilon} not in (0,1)")));
        }
        Ok(Self {
            epsilon,
            kappa: epsilon.powi(4),
            delta: 1e-8,
            d_factor: 1e3,
            d_max: 1e5,
            step_budget: DEFAULT_STEP_BUDGET,
            windows: 20,
            samples: 1000,
            halve_m: false,
            decimation: 0,
            precision: Precision::from_env(),
        })
    }

    /// `κ = ε^{10}`, `δ = κ^{10}` and the halved terminal time.
    pub fn paper_literal(epsilon: f64) -> Result<Self> {
        let mut c = Self::new(epsilon)?;
        c.kappa = epsilon.powi(10);
        c.delta = c.kappa.powi(10);
        c.halve_m = true;
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShearTime {
    pub n0: u64,
    pub a_n0: f64,
    /// `T = min(|Δx|^{-2/3}, |Δy|^{-2})`.
    pub t_scale: f64,
    pub ratio: f64,
    pub d_used: f64,
    pub max_abs: f64,
}

/// Least `n₀` with `|a_{n₀}| ≥ 1` on `[0, D·T]`; `D` doubles on a miss up to
/// `d_max`, never beyond the step budget.
pub fn first_shear_time(ss: &SkewShift, f: &RoofFunction, pair: PointPair, cfg: &HeisConfig) -> Result<ShearTime> {
    if pair.delta() == (0.0, 0.0) {
        return Err(Error::DegenerateInput("identical base points".into()));
    }
    let t_scale = pair.time_scale();
    let mut d = cfg.d_factor;
    loop {
        let raw = d * t_scale;
        let capped = raw >= cfg.step_budget as f64;
        let limit = if capped { cfg.step_budget } else { raw.ceil() as u64 };
        if f.is_constant() {
            return Err(Error::NotFound { searched: limit, max_abs: 0.0 });
        }
        let scan = shear_scan(ss, f, pair, limit, u64::MAX, Some(1.0), cfg.precision);
        if let (Some(n0), Some(a)) = (scan.first_exceed, scan.a_at_exceed) {
            return Ok(ShearTime {
                n0,
                a_n0: a,
                t_scale,
                ratio: n0 as f64 / t_scale,
                d_used: d,
                max_abs: scan.max_abs,
            });
        }
        if capped || d * 2.0 > cfg.d_max {
            return Err(Error::NotFound { searched: limit, max_abs: scan.max_abs });
        }
        d *= 2.0;
    }
}

/// A base witness together with the shear table it was read from.
#[derive(Debug, Clone)]
pub struct R1Witness {
    pub report: WitnessReport,
    pub pair: PointPair,
    pub m_prime: u64,
    pub table: ShearTable,
}

fn c0_of(f: &RoofFunction) -> f64 {
    2f64.max(3.0 / f.mean().sqrt())
}

/// R1′ on the skew shift. Errors only on invalid input or a failed shear
/// search; predicate failures are recorded in the report.
pub fn heis_r1prime(ss: &SkewShift, f: &RoofFunction, pair: PointPair, cfg: &HeisConfig) -> Result<R1Witness> {
    let eps = cfg.epsilon;
    let kappa = cfg.kappa;
    let dist = torus_dist(pair.p, pair.q);
    if dist == 0.0 {
        return Err(Error::DegenerateInput("identical base points".into()));
    }
    if dist >= cfg.delta {
        return Err(Error::InvalidParameter(format!(
            "base points {dist:e} apart, not within delta = {:e}",
            cfg.delta
        )));
    }
    if f.is_constant() {
        return Err(Error::DegenerateInput(
            "roof is constant, so a_n vanishes identically and no shear time exists".into(),
        ));
    }
    let st = first_shear_time(ss, f, pair, cfg)?;
    let m_prime = st.n0;
    let n_max = ((1.0 + kappa) * m_prime as f64).ceil() as u64 + 2;
    let table = ShearTable::build(ss, f, pair, n_max, cfg.precision);
    let (dx, dy) = pair.delta();

    let mut rep = WitnessReport::new("heis_r1prime");
    rep.input("alpha", ss.alpha.to_f64())
        .input("beta", ss.beta.to_f64())
        .input("x", pair.p.0)
        .input("y", pair.p.1)
        .input("x_prime", pair.q.0)
        .input("y_prime", pair.q.1)
        .input("epsilon", eps)
        .input("kappa", kappa)
        .input("delta", cfg.delta);
    rep.m = Some(m_prime as f64);

    let l_min = kappa.powi(-2);
    let grid = if l_min <= m_prime as f64 {
        log_grid(l_min, m_prime as f64, cfg.windows)
    } else {
        Vec::new()
    };
    let stats: Vec<(WindowStat, f64, f64)> = grid
        .par_iter()
        .map(|&l| {
            let l0 = l.ceil() as u64;
            let l1 = ((1.0 + kappa) * l).floor().max(l0 as f64) as u64;
            let q = table.a(l0);
            let (mut good, mut var, mut tor) = (0u64, 0.0f64, 0.0f64);
            for n in l0..=l1 {
                let v = (table.a(n) - q).abs();
                let d = dx.abs().max(wrap_half(dy + n as f64 * dx).abs());
                var = var.max(v);
                tor = tor.max(d);
                if d < eps && v < eps {
                    good += 1;
                }
            }
            let fraction = good as f64 / (l1 - l0 + 1) as f64;
            (WindowStat { l: l0 as f64, fraction, max_dist: var }, q, tor)
        })
        .collect();
    let mut max_var: f64 = 0.0;
    let mut max_tor: f64 = 0.0;
    for (w, q, tor) in stats {
        max_var = max_var.max(w.max_dist);
        max_tor = max_tor.max(tor);
        rep.schedule.push(ShiftSample { l: w.l, p: q });
        rep.windows.push(w);
    }
    let a_m = table.a(m_prime);
    let c0 = c0_of(f);
    let hyp = 8.0 * c0 * c0 / (kappa * kappa);
    rep.residual("M_prime", m_prime as f64)
        .residual("a_M_prime", a_m)
        .residual("t_scale", st.t_scale)
        .residual("n0_over_T", st.ratio)
        .residual("D_used", st.d_used)
        .residual("max_window_variation", max_var)
        .residual("epsilon_sq", eps * eps)
        .residual("variation_within_eps_sq", if max_var <= eps * eps { 1.0 } else { 0.0 })
        .residual("max_torus_dist", max_tor)
        .residual("C0", c0)
        .residual("lift_hypothesis_M_prime_min", hyp);
    if (m_prime as f64) < hyp {
        rep.assumptions.push(format!(
            "M' = {m_prime} is below 8 C0^2 kappa^-2 = {hyp:.4e}; the lift hypothesis is not met"
        ));
    }
    rep.assumptions.push("roof assumed nontrivial (not a coboundary); not checked".into());
    let terminal_ok = a_m.abs() >= 1.0 - eps * eps && a_m.abs() > 0.5;
    rep.settle(0.0, terminal_ok);
    if grid.is_empty() {
        rep.pass = false;
        rep.failure = Some(format!("M' = {m_prime} < kappa^-2 = {l_min:.4e}"));
    }
    if cfg.decimation > 0 {
        let rows = (0..=m_prime)
            .step_by(cfg.decimation as usize)
            .map(|n| vec![n as f64, table.a(n)])
            .collect();
        rep.series = Some(Series::new(&["n", "a_n"], rows));
    }
    Ok(R1Witness { report: rep, pair, m_prime, table })
}

pub fn heis_r1prime_witness(ss: &SkewShift, f: &RoofFunction, pair: PointPair, cfg: &HeisConfig) -> Result<WitnessReport> {
    heis_r1prime(ss, f, pair, cfg).map(|w| w.report)
}

/// Strong-R windows for the special flow, built on a base R1′ witness.
/// Window failures are recorded in the report rather than returned.
pub fn lift_strong_r_report(
    ss: &SkewShift,
    f: &RoofFunction,
    p: SpecialFlowPoint,
    q: SpecialFlowPoint,
    r1: &R1Witness,
    cfg: &HeisConfig,
) -> Result<WitnessReport> {
    let eps = cfg.epsilon;
    let kappa = cfg.kappa;
    p.check(f)?;
    q.check(f)?;
    if p == q {
        return Err(Error::DegenerateInput("p' equals p".into()));
    }
    if r1.pair.p != p.base() || r1.pair.q != q.base() {
        return Err(Error::InvalidParameter("R1' witness was built for other base points".into()));
    }
    if !r1.report.pass {
        return Err(Error::InvalidParameter(format!(
            "base R1' witness does not pass: {}",
            r1.report.failure.clone().unwrap_or_default()
        )));
    }
    if (p.s - q.s).abs() >= cfg.delta {
        return Err(Error::InvalidParameter(format!(
            "heights differ by {:e}, not within delta = {:e}",
            (p.s - q.s).abs(),
            cfg.delta
        )));
    }
    let floor = f.constant_floor;
    let t_max = (1.0 + kappa) * r1.m_prime as f64 * f.sup_bound() + 4.0;
    let n_hi = (t_max / floor).ceil() as u64 + 4;
    let tp = BirkhoffTable::build(ss, f, p.x, p.y, n_hi, cfg.precision);
    let tq = BirkhoffTable::build(ss, f, q.x, q.y, n_hi, cfg.precision);
    let shear = if r1.table.n_max() >= n_hi {
        r1.table.clone()
    } else {
        ShearTable::build(ss, f, r1.pair, n_hi, cfg.precision)
    };
    let s_mp = tp.s(r1.m_prime);
    let m = if cfg.halve_m { (s_mp - p.s) / 2.0 } else { s_mp - p.s };

    let mut rep = WitnessReport::new("lift_strong_r");
    rep.input("alpha", ss.alpha.to_f64())
        .input("x", p.x)
        .input("y", p.y)
        .input("s", p.s)
        .input("x_prime", q.x)
        .input("y_prime", q.y)
        .input("s_prime", q.s)
        .input("epsilon", eps)
        .input("kappa", kappa)
        .input("halve_m", cfg.halve_m)
        .input("samples", cfg.samples as u64);
    rep.m = Some(m);

    let l_min = kappa.powi(-2);
    let grid = if l_min <= m { log_grid(l_min, m, cfg.windows) } else { Vec::new() };
    let band = floor * eps / 8.0;
    let rows: Vec<Option<(WindowStat, f64, f64)>> = grid
        .par_iter()
        .map(|&l| {
            let n_l = tp.locate(p.s + l)?;
            let p_l = shear.a(n_l);
            let mut good = 0usize;
            let mut in_x = 0usize;
            let mut dmax: f64 = 0.0;
            for t in lin_grid(l, l + kappa * l, cfg.samples) {
                let a = flow_with_table(ss, &tp, p, t)?;
                let b = flow_with_table(ss, &tq, q, t - p_l)?;
                let d = metric_df(&a, &b);
                dmax = dmax.max(d);
                if d < eps {
                    good += 1;
                }
                if a.s > band && a.s < f.eval(a.x, a.y) - band {
                    in_x += 1;
                }
            }
            let n = cfg.samples.max(1) as f64;
            Some((WindowStat { l, fraction: good as f64 / n, max_dist: dmax }, p_l, in_x as f64 / n))
        })
        .collect();
    let mut x_frac: f64 = 1.0;
    for r in rows {
        let (w, p_l, xf) = r.ok_or_else(|| Error::InvalidParameter("window outside the orbit table".into()))?;
        x_frac = x_frac.min(xf);
        rep.schedule.push(ShiftSample { l: w.l, p: p_l });
        rep.windows.push(w);
    }
    let n_m = tp
        .locate(p.s + m)
        .ok_or_else(|| Error::InvalidParameter("terminal time outside the orbit table".into()))?;
    let p_m = shear.a(n_m);
    let a_mp = shear.a(r1.m_prime);
    rep.residual("M_prime", r1.m_prime as f64)
        .residual("N_at_M", n_m as f64)
        .residual("p_M", p_m)
        .residual("a_M_prime", a_mp)
        .residual("p_M_sign_matches", if p_m.signum() == a_mp.signum() { 1.0 } else { 0.0 })
        .residual("X_eps_fraction_min", x_frac)
        .residual("height_gap", (p.s - q.s).abs());
    rep.assumptions.push("roof assumed nontrivial (not a coboundary); not checked".into());
    rep.settle(eps, p_m.abs() >= 0.5);
    if grid.is_empty() {
        rep.pass = false;
        rep.failure = Some(format!("M = {m:.4e} < kappa^-2 = {l_min:.4e}"));
    }
    Ok(rep)
}

/// As [`lift_strong_r_report`], but a failing window is an error.
pub fn lift_strong_r(
    ss: &SkewShift,
    f: &RoofFunction,
    p: SpecialFlowPoint,
    q: SpecialFlowPoint,
    r1: &R1Witness,
    cfg: &HeisConfig,
) -> Result<WitnessReport> {
    let rep = lift_strong_r_report(ss, f, p, q, r1, cfg)?;
    let required = 1.0 - cfg.epsilon;
    if let Some(w) = rep.windows.iter().find(|w| !(w.fraction >= required)) {
        return Err(Error::WindowFail { l: w.l, fraction: w.fraction, required });
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> HeisConfig {
        let mut c = HeisConfig::new(0.3).unwrap();
        c.delta = 1e-2;
        c
    }

    #[test]
    fn constant_roof_is_not_found() {
        let ss = SkewShift::golden();
        let f = RoofFunction::constant(1.0).unwrap();
        let pair = PointPair::new((0.2, 0.3), (0.2, 0.301));
        match first_shear_time(&ss, &f, pair, &cfg()) {
            Err(Error::NotFound { max_abs, .. }) => assert_eq!(max_abs, 0.0),
            other => panic!("{other:?}"),
        }
        match heis_r1prime(&ss, &f, pair, &cfg()) {
            Err(Error::DegenerateInput(m)) => assert!(m.contains("constant")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dx_shear_time_is_within_horizon() {
        let ss = SkewShift::golden();
        let f = RoofFunction::default_roof();
        let pair = PointPair::new((0.2, 0.3), (0.2 - 1e-6, 0.3));
        let st = first_shear_time(&ss, &f, pair, &cfg()).unwrap();
        assert!((st.t_scale - 1e4).abs() < 1e-6);
        assert!(st.a_n0.abs() >= 1.0);
        assert!(st.n0 as f64 <= 1e3 * st.t_scale);
    }

    #[test]
    fn r1prime_rejects_far_points() {
        let ss = SkewShift::golden();
        let f = RoofFunction::default_roof();
        let pair = PointPair::new((0.2, 0.3), (0.2, 0.35));
        assert!(matches!(heis_r1prime(&ss, &f, pair, &cfg()), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn literal_config_exponents() {
        let c = HeisConfig::paper_literal(0.5).unwrap();
        assert_eq!(c.kappa, 0.5f64.powi(10));
        assert_eq!(c.delta, c.kappa.powi(10));
        assert!(c.halve_m);
    }
}
