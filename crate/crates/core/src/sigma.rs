//! Synthetic shear function `σ(s, c)` for horocycle flows in variable
//! curvature, and the witness logic that only uses its axioms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::bisect_increasing;
use crate::report::{lin_grid, log_grid, ShiftSample, WindowStat, WitnessReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SigmaKind {
    /// `σ(s,c) = s + c s²`.
    Default,
    /// `σ(s,c) = s + c s² (1 + 0.1·cs/(1+|cs|))`.
    Perturbed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaModel {
    pub kind: SigmaKind,
    pub gamma: f64,
}

pub fn default_sigma() -> SigmaModel {
    SigmaModel {
        kind: SigmaKind::Default,
        gamma: 0.25,
    }
}

/// The perturbed model needs `γ ≤ 2/9` for the halving axiom when `cs < 0`.
pub fn perturbed_sigma() -> SigmaModel {
    SigmaModel {
        kind: SigmaKind::Perturbed,
        gamma: 0.2,
    }
}

impl SigmaModel {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "default" => Some(default_sigma()),
            "perturbed" => Some(perturbed_sigma()),
            _ => None,
        }
    }

    /// `A(s) = σ(s,c) - s`, evaluated without forming `σ`.
    pub fn excess(&self, s: f64, c: f64) -> f64 {
        let u = c * s;
        match self.kind {
            SigmaKind::Default => u * s,
            SigmaKind::Perturbed => u * s * (1.0 + 0.1 * u / (1.0 + u.abs())),
        }
    }

    pub fn evaluate(&self, s: f64, c: f64) -> f64 {
        s + self.excess(s, c)
    }
}

// ---------------------------------------------------------------------------
// axioms

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AxiomReport {
    pub points: u64,
    /// Largest scaling defect `|σ(e^r s, e^{-r} c) - e^r σ(s,c)|`, relative
    /// to `e^r (|s| + |A(s)|)`.
    pub scaling: f64,
    /// Largest `|A(s) - A((1+k)s)| / (ε |A(s)|)` with `|k| < ε/3`.
    pub window: f64,
    /// Largest `|A(s/2)| / ((1/2 - γ) |A(s)|)`.
    pub halving: f64,
    pub monotone_violations: u64,
    /// Largest `|σ(0, c)|`.
    pub zero: f64,
}

impl AxiomReport {
    pub fn passes(&self) -> bool {
        self.scaling <= 1e-12
            && self.window <= 1.0 + 1e-12
            && self.halving <= 1.0 + 1e-12
            && self.monotone_violations == 0
            && self.zero == 0.0
    }
}

/// Checks the five axioms on an `n × n × n` log-spaced grid of
/// `s ∈ [1e-3, 1e6]`, `|c| ∈ [1e-9, 1e-1]` (both signs) and `r ∈ [-3, 3]`,
/// with window constant `κ′ = ε/3`. Products are capped at `|sc| ≤ 1`.
pub fn axiom_suite(model: &SigmaModel, epsilon: f64, n: usize) -> AxiomReport {
    let mut rep = AxiomReport::default();
    let ss = log_grid(1e-3, 1e6, n);
    let mags = log_grid(1e-9, 1e-1, n);
    let rs = lin_grid(-3.0, 3.0, n);
    let ks = lin_grid(-epsilon / 3.0, epsilon / 3.0, 7);
    let cs: Vec<f64> = mags.iter().flat_map(|&m| [m, -m]).collect();
    for &c in &cs {
        rep.zero = rep.zero.max(model.evaluate(0.0, c).abs());
        let mut prev: Option<f64> = None;
        for &s in &ss {
            if (s * c).abs() > 1.0 {
                break;
            }
            let a = model.excess(s, c);
            let sig = model.evaluate(s, c);
            for &r in &rs {
                let lhs = model.evaluate(r.exp() * s, (-r).exp() * c);
                let rhs = r.exp() * sig;
                let scale = r.exp() * (s.abs() + a.abs());
                rep.scaling = rep.scaling.max((lhs - rhs).abs() / scale);
                rep.points += 1;
            }
            for &k in &ks {
                // |k| < κ′: shrink the grid endpoints by one ulp-scale margin
                let k = k * (1.0 - 1e-12);
                let d = (a - model.excess((1.0 + k) * s, c)).abs();
                rep.window = rep.window.max(d / (epsilon * a.abs()));
            }
            let h = model.excess(s / 2.0, c).abs() / ((0.5 - model.gamma) * a.abs());
            rep.halving = rep.halving.max(h);
            // A keeps the sign of c and grows in |s|
            if let Some(p) = prev {
                if a.abs() < p.abs() || a.signum() != c.signum() {
                    rep.monotone_violations += 1;
                }
            }
            prev = Some(a);
        }
    }
    rep
}

// ---------------------------------------------------------------------------
// crossing

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingDiagnostics {
    #[serde(rename = "N")]
    pub n: f64,
    pub r_of_n: f64,
    /// Range end `B = δ′²/(2|c|)`.
    pub range_end: f64,
    pub excess_at_range_end: f64,
    /// `N ≥ 1/|a|`; `None` when `a = 0`.
    pub lower_bound_ok: Option<bool>,
    /// `e^a |A(N)|` against `(3/2)/γ`.
    pub control: f64,
    pub control_ok: bool,
    /// `|(e^a - 1) N|` against `1 + (3/2)/γ`.
    pub drift: f64,
    pub drift_ok: bool,
}

impl CrossingDiagnostics {
    pub fn all_ok(&self) -> bool {
        self.lower_bound_ok.unwrap_or(true) && self.control_ok && self.drift_ok
    }
}

pub const CROSSING_TOL: f64 = 1e-9;
const SCAN_SUBSTEPS: usize = 16;

/// `r(t) = |e^a A(t) + (e^a - 1) t|`.
pub fn r_of(model: &SigmaModel, a: f64, c: f64, t: f64) -> f64 {
    (a.exp() * model.excess(t, c) + a.exp_m1() * t).abs()
}

/// Least `N ∈ [0, δ′²/(2|c|)]` with `r(N) = 1`: geometric scan (ratio 2,
/// with sub-samples) from `s = 1`, then bisection to `|r(N) - 1| ≤ 1e-9`.
pub fn find_crossing_n(
    model: &SigmaModel,
    a: f64,
    c: f64,
    delta_prime: f64,
) -> Result<CrossingDiagnostics> {
    if c == 0.0 {
        return Err(Error::InvalidParameter("c must be nonzero".into()));
    }
    let range_end = delta_prime * delta_prime / (2.0 * c.abs());
    let a_end = model.excess(range_end, c);
    if !(a_end.abs() > 4.0 / model.gamma) {
        return Err(Error::NoCrossing(format!(
            "precondition |A(B)| > 4/gamma fails: |A({range_end:e})| = {:e} <= {}",
            a_end.abs(),
            4.0 / model.gamma
        )));
    }
    let r = |t: f64| r_of(model, a, c, t);
    let mut lo = 0.0;
    let mut hi = None;
    // intervals [0,1], [1,2], [2,4], ... each sampled at SCAN_SUBSTEPS points
    let (mut left, mut right) = (0.0f64, 1.0f64);
    'scan: loop {
        let right_c = right.min(range_end);
        for i in 1..=SCAN_SUBSTEPS {
            let t = left + (right_c - left) * i as f64 / SCAN_SUBSTEPS as f64;
            if r(t) >= 1.0 {
                hi = Some(t);
                break 'scan;
            }
            lo = t;
        }
        if right_c >= range_end {
            break;
        }
        left = right_c;
        right = 2.0 * right_c;
    }
    let Some(hi) = hi else {
        return Err(Error::NoCrossing(format!(
            "r stays below 1 on [0, {range_end:e}]"
        )));
    };
    let n = bisect_increasing(|t| r(t) - 1.0, lo, hi, hi * 1e-16);
    let n = if (r(n) - 1.0).abs() <= CROSSING_TOL {
        n
    } else {
        hi
    };
    let rn = r(n);
    if (rn - 1.0).abs() > CROSSING_TOL {
        return Err(Error::NoCrossing(format!(
            "bisection stalled at N = {n:e} with r(N) = {rn}"
        )));
    }
    let control = a.exp() * model.excess(n, c).abs();
    let drift = (a.exp_m1() * n).abs();
    let cap = 1.5 / model.gamma;
    Ok(CrossingDiagnostics {
        n,
        r_of_n: rn,
        range_end,
        excess_at_range_end: a_end,
        lower_bound_ok: (a != 0.0).then(|| n >= 1.0 / a.abs()),
        control,
        control_ok: control <= cap,
        drift,
        drift_ok: drift <= 1.0 + cap,
    })
}

// ---------------------------------------------------------------------------
// witness

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaConfig {
    pub epsilon: f64,
    pub kappa: f64,
    /// Bound on `|a|, |b|, |c|`.
    pub delta: f64,
    pub delta_prime: f64,
    pub samples: usize,
    pub windows: usize,
}

impl SigmaConfig {
    /// `κ = γε/18` (half of `κ′(γε/3)` with `κ′(ε) = ε/3`), `δ′ = 0.1`,
    /// `δ = κ^{10}`.
    pub fn new(model: &SigmaModel, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!("epsilon {epsilon} not in (0,1)")));
        }
        Ok(Self {
            epsilon,
            kappa: model.gamma * epsilon / 18.0,
            delta: (model.gamma * epsilon / 18.0).powi(10),
            delta_prime: 0.1,
            samples: 200,
            windows: 20,
        })
    }
}

/// Strong-R witness for the synthetic flow: `c = 0` uses
/// `M = |1 - e^a|^{-1}`, `p_L = (e^a - 1)L`; otherwise `M` is the first
/// crossing `|g(M)| = 1` of `g(t) = e^a σ(t,c) - t` and `p_L = g(L)`.
pub fn variable_strong_r_witness(
    model: &SigmaModel,
    a: f64,
    b: f64,
    c: f64,
    cfg: &SigmaConfig,
) -> Result<WitnessReport> {
    if a == 0.0 && c == 0.0 {
        return Err(Error::DegenerateInput(
            "a = c = 0: the points lie on one orbit".into(),
        ));
    }
    let big = a.abs().max(b.abs()).max(c.abs());
    if big >= cfg.delta {
        return Err(Error::InvalidParameter(format!(
            "max(|a|,|b|,|c|) = {big:e} is not below delta = {:e}",
            cfg.delta
        )));
    }
    let mut r = WitnessReport::new("sigma-model");
    r.input("model", serde_json::to_value(model.kind).expect("kind serializes"))
        .input("gamma", model.gamma)
        .input("a", a)
        .input("b", b)
        .input("c", c)
        .input("epsilon", cfg.epsilon)
        .input("kappa", cfg.kappa)
        .input("delta", cfg.delta)
        .input("delta_prime", cfg.delta_prime);
    r.assumptions
        .push("closeness d(v_s x, v_{e^a sigma} y) < eps is an external axiom of the model".into());
    let kappa = cfg.kappa;
    let l_min = kappa.powi(-2);
    let (m, p): (f64, Box<dyn Fn(f64) -> f64>) = if c == 0.0 {
        let em1 = a.exp_m1();
        (1.0 / em1.abs(), Box::new(move |l| em1 * l))
    } else {
        let d = find_crossing_n(model, a, c, cfg.delta_prime)?;
        r.residual("control", d.control)
            .residual("drift", d.drift)
            .residual("r_of_N", d.r_of_n);
        r.residual("lower_bound_ok", d.lower_bound_ok.map_or(f64::NAN, |v| v as u8 as f64));
        let model = *model;
        (
            d.n,
            Box::new(move |t| a.exp() * model.excess(t, c) + a.exp_m1() * t),
        )
    };
    r.m = Some(m);
    let p_m = p(m);
    r.residual("p_M", p_m);
    // drift allowance: 2κ when c = 0, 2ε/3 otherwise
    let allowance = if c == 0.0 { 2.0 * kappa } else { 2.0 * cfg.epsilon / 3.0 };
    let mut worst = 0.0f64;
    if l_min <= m {
        for l in log_grid(l_min, m, cfg.windows) {
            let pl = p(l);
            r.schedule.push(ShiftSample { l, p: pl });
            let ts = lin_grid(l, l + kappa * l, cfg.samples);
            let mut inside = 0usize;
            let mut max_d = 0.0f64;
            for &t in &ts {
                let d = if c == 0.0 {
                    // |e^a t - (t + p_L)|
                    (a.exp_m1() * (t - l)).abs()
                } else {
                    (p(t) - pl).abs()
                };
                if d <= allowance {
                    inside += 1;
                }
                max_d = max_d.max(d);
            }
            worst = worst.max(max_d);
            r.windows.push(WindowStat {
                l,
                fraction: inside as f64 / ts.len() as f64,
                max_dist: max_d,
            });
        }
    } else {
        r.assumptions.push(format!(
            "window range empty: M = {m:e} < kappa^-2 = {l_min:e}"
        ));
    }
    r.schedule.push(ShiftSample { l: m, p: p_m });
    r.residual("max_window_drift", worst);
    let terminal_ok = (p_m.abs() - 1.0).abs() <= CROSSING_TOL;
    r.settle(cfg.epsilon, terminal_ok);
    Ok(r)
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn crossing_control_and_drift(la in -8.0f64..-3.0, lc in -12.0f64..-7.0, sa in any::<bool>(), sc in any::<bool>()) {
            let a = if sa { 10f64.powf(la) } else { -(10f64.powf(la)) };
            let c = if sc { 10f64.powf(lc) } else { -(10f64.powf(lc)) };
            let d = find_crossing_n(&default_sigma(), a, c, 0.1)?;
            prop_assert!((d.r_of_n - 1.0).abs() <= CROSSING_TOL);
            prop_assert!(d.control_ok && d.control <= 6.0);
            prop_assert!(d.drift_ok && d.drift <= 7.0);
        }

        #[test]
        fn g2_window_constant(la in -8.0f64..-4.0, lc in -12.0f64..-8.0, sa in any::<bool>(), sc in any::<bool>()) {
            let model = default_sigma();
            let a = if sa { 10f64.powf(la) } else { -(10f64.powf(la)) };
            let c = if sc { 10f64.powf(lc) } else { -(10f64.powf(lc)) };
            let mut cfg = SigmaConfig::new(&model, 0.3)?;
            cfg.delta = 1.0;
            cfg.samples = 50;
            cfg.windows = 8;
            let r = variable_strong_r_witness(&model, a, 0.0, c, &cfg)?;
            let g = model.gamma;
            let chain = (g * cfg.epsilon / 3.0) * 1.5 / g + (1.0 + 1.5 / g) * cfg.kappa;
            prop_assert!(r.residuals["max_window_drift"] <= chain);
            prop_assert!(chain < 2.0 * cfg.epsilon / 3.0);
        }
    }
}
