use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};

use parashear::cq::{cq_replay, select_noncentral_chain, CqSchedule};
use parashear::dd::Dd;
use parashear::horo::{shear_horizon, strong_r_witness, verify_horocycle_divergence, HoroConfig, UXVCoords};
use parashear::lie::{chain_basis, expm, gr_invariant, sl2_basis, sl2_sum_basis, sln_basis};
use parashear::report::{lin_grid, log_grid, Series, WitnessReport};
use parashear::sigma::{axiom_suite, find_crossing_n, variable_strong_r_witness, SigmaConfig, SigmaModel};
use parashear::skew::{
    continued_fraction, heis_r1prime, lift_strong_r_report, HeisConfig, PointPair, RoofFunction, SkewShift,
    SpecialFlowPoint,
};
use parashear::{Error, SquareMatrix};

use crate::config::Params;

/// What a subcommand hands back for writing.
#[derive(Debug)]
pub struct Outcome {
    pub pass: bool,
    pub failure: Option<String>,
    pub result: Value,
    pub series: Vec<(String, Series)>,
}

impl Outcome {
    fn new(result: Value) -> Self {
        Self { pass: true, failure: None, result, series: Vec::new() }
    }

    fn fail(&mut self, why: impl Into<String>) {
        if self.pass {
            self.failure = Some(why.into());
        }
        self.pass = false;
    }
}

#[derive(Debug)]
pub enum RunError {
    /// Inputs rejected before any experiment ran.
    Config(String),
    /// The experiment could not complete.
    Experiment(String),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_)
            | Error::DegenerateInput(_)
            | Error::DimensionMismatch(..)
            | Error::InvalidMatrix(_)
            | Error::DependentBasis(_) => RunError::Config(e.to_string()),
            _ => RunError::Experiment(e.to_string()),
        }
    }
}

type Run = Result<Outcome, RunError>;

pub fn dispatch(p: &Params) -> Run {
    match p.subcommand.as_str() {
        "chain-basis" => chain_cmd(p, false),
        "gr" => chain_cmd(p, true),
        "cq-verify" => cq_cmd(p),
        "horo-shear" => horo_cmd(p),
        "sigma-model" => sigma_cmd(p),
        "heis-shear" => heis_cmd(p),
        "cf" => cf_cmd(p),
        "witness" => sweep_cmd(p),
        other => Err(RunError::Config(format!("unknown subcommand {other}"))),
    }
}

/// Moves a report's series into a CSV named `stem` and serializes the rest.
fn detach(mut r: WitnessReport, stem: &str, out: &mut Vec<(String, Series)>) -> Value {
    if let Some(mut s) = r.series.take() {
        let file = format!("{stem}.csv");
        let rows = std::mem::take(&mut s.rows);
        s.file = Some(file.clone());
        out.push((file.clone(), Series { rows, ..s.clone() }));
        r.series = Some(s);
    }
    serde_json::to_value(&r).expect("report serializes")
}

fn windows_series(r: &WitnessReport) -> Series {
    Series::new(
        &["L", "fraction", "max_dist"],
        r.windows.iter().map(|w| vec![w.l, w.fraction, w.max_dist]).collect(),
    )
}

fn schedule_series(r: &WitnessReport) -> Series {
    Series::new(&["L", "p"], r.schedule.iter().map(|s| vec![s.l, s.p]).collect())
}

// ---------------------------------------------------------------------------
// Lie algebra inputs

#[derive(Deserialize)]
struct AlgebraFile {
    generator: SquareMatrix,
    basis: Vec<SquareMatrix>,
}

fn algebra(name: &str) -> Result<(SquareMatrix, Vec<SquareMatrix>), RunError> {
    let u = SquareMatrix::unit(2, 0, 1);
    Ok(match name {
        "sl2" => (u, sl2_basis()),
        "sl3" => (&SquareMatrix::unit(3, 0, 1) + &SquareMatrix::unit(3, 1, 2), sln_basis(3)),
        "sl2sl2" => (SquareMatrix::block_diag(&[&u, &u])?, sl2_sum_basis()),
        "sl2-zero" => (SquareMatrix::block_diag(&[&u, &SquareMatrix::zeros(2)])?, sl2_sum_basis()),
        _ => {
            let path = name
                .strip_prefix("file:")
                .ok_or_else(|| RunError::Config(format!("unknown algebra `{name}`")))?;
            let text = std::fs::read_to_string(path).map_err(|e| RunError::Config(format!("{path}: {e}")))?;
            let f: AlgebraFile =
                serde_json::from_str(&text).map_err(|e| RunError::Config(format!("{path}: {e}")))?;
            (f.generator, f.basis)
        }
    })
}

fn random_conjugate(rng: &mut ChaCha8Rng, w: &SquareMatrix, basis: &[SquareMatrix]) -> Result<SquareMatrix, RunError> {
    let mut b = SquareMatrix::zeros(w.dim());
    for e in basis {
        b = &b + &e.scale(rng.gen_range(-1.0..1.0));
    }
    let n = b.frobenius();
    if n > 1.0 {
        b = b.scale(1.0 / n);
    }
    let g = expm(&b)?;
    Ok(&(&g * w) * &g.inverse()?)
}

const CHAIN_TOL: f64 = 1e-10;

fn chain_cmd(p: &Params, gr_only: bool) -> Run {
    let (w0, basis) = algebra(p.text("algebra"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.int("seed"));
    let count = p.int("samples").max(1);
    let mut rows = Vec::new();
    let mut first = None;
    let mut out = Outcome::new(Value::Null);
    for i in 0..count {
        let w = if i == 0 { w0.clone() } else { random_conjugate(&mut rng, &w0, &basis)? };
        let cb = chain_basis(&w, &basis)?;
        let r = cb.replay_residuals(&basis)?;
        let gr = gr_invariant(&cb);
        rows.push(vec![i as f64, gr as f64, r.recursion, r.centralizer, r.sigma_min]);
        if r.recursion.max(r.centralizer) > CHAIN_TOL {
            out.fail(format!("sample {i}: chain residual {:e} above {CHAIN_TOL:e}", r.recursion.max(r.centralizer)));
        }
        match &first {
            None => first = Some((cb, gr)),
            Some((_, g0)) if *g0 != gr => out.fail(format!("sample {i}: GR {gr} differs from {g0}")),
            _ => {}
        }
    }
    let (cb, gr) = first.expect("at least one sample");
    out.result = if gr_only {
        json!({ "GR": gr, "lengths": cb.lengths(), "generator": cb.generator })
    } else {
        json!({ "GR": gr, "lengths": cb.lengths(), "chain_basis": cb })
    };
    out.series.push((
        "samples.csv".into(),
        Series::new(&["sample", "GR", "recursion", "centralizer", "sigma_min"], rows),
    ));
    Ok(out)
}

fn cq_cmd(p: &Params) -> Run {
    let (u, basis) = algebra(p.text("algebra"))?;
    let cb = chain_basis(&u, &basis)?;
    let chain = select_noncentral_chain(&cb, &u)?;
    let s = CqSchedule::new(p.real("epsilon"), p.int("N"), u.clone(), chain)?;
    let grid = log_grid(s.l_min(), s.k as f64, p.int("L-grid").max(2) as usize);
    let r = cq_replay(&s, &SquareMatrix::identity(u.dim()), &grid, p.int("samples") as usize)?;
    let mut out = Outcome::new(Value::Null);
    out.series.push(("windows.csv".into(), windows_series(&r)));
    out.series.push(("schedule.csv".into(), schedule_series(&r)));
    if !r.pass {
        out.fail(r.failure.clone().unwrap_or_default());
    }
    out.result = json!({ "k": s.k, "kappa": s.kappa, "delta": s.delta, "report": detach(r, "cq", &mut out.series) });
    Ok(out)
}

fn parse_matrix2(text: &str) -> Result<SquareMatrix, RunError> {
    let v: Vec<f64> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| RunError::Config(format!("base point `{text}` is not four numbers")))?;
    if v.len() != 4 {
        return Err(RunError::Config(format!("base point `{text}` is not four numbers")));
    }
    Ok(SquareMatrix::from_row_slice(2, &v)?)
}

fn horo_cmd(p: &Params) -> Run {
    let (a, b, c) = (p.real("a"), p.real("b"), p.real("c"));
    let cfg = HoroConfig::new(p.real("epsilon"))?;
    let x = parse_matrix2(p.text("x"))?;
    let t_max = p.opt_real("t-max").unwrap_or_else(|| shear_horizon(b, c).min(1e4));
    if !(t_max > 0.0) {
        return Err(RunError::Config(format!("t-max {t_max} must be positive")));
    }
    let grid = lin_grid(0.0, t_max, p.int("samples").max(2) as usize);
    let div = verify_horocycle_divergence(&x, &UXVCoords::new(a, b, c), &grid, true)?;
    let mut out = Outcome::new(Value::Null);
    if !div.pass {
        out.fail(div.failure.clone().unwrap_or_default());
    }
    let witness = match strong_r_witness(a, b, c, &cfg) {
        Ok(w) => json!({ "witness": w, "L_min": w.l_min(), "f1_max": w.f1_max(40) }),
        // outside the admissible box, or a named certificate that no
        // crossing exists: both are recorded, neither fails the run
        Err(e @ (Error::InvalidParameter(_) | Error::NoCrossing(_) | Error::DegenerateInput(_))) => {
            json!({ "witness": Value::Null, "reason": e.to_string() })
        }
        Err(e) => return Err(e.into()),
    };
    out.result = json!({
        "t_max": t_max,
        "divergence": detach(div, "divergence", &mut out.series),
        "strong_r": witness,
    });
    Ok(out)
}

fn sigma_cmd(p: &Params) -> Run {
    let name = p.text("model");
    let model = SigmaModel::parse(name).ok_or_else(|| RunError::Config(format!("unknown model `{name}`")))?;
    let mut cfg = SigmaConfig::new(&model, p.real("epsilon"))?;
    cfg.samples = p.int("samples") as usize;
    cfg.windows = p.int("windows") as usize;
    let (a, b, c) = (p.real("a"), p.real("b"), p.real("c"));
    let axioms = axiom_suite(&model, cfg.epsilon, p.int("axiom-grid") as usize);
    let crossing = if c != 0.0 { find_crossing_n(&model, a, c, cfg.delta_prime).ok() } else { None };
    let r = variable_strong_r_witness(&model, a, b, c, &cfg)?;
    let mut out = Outcome::new(Value::Null);
    if !axioms.passes() {
        out.fail("axiom suite violated");
    }
    if !r.pass {
        out.fail(r.failure.clone().unwrap_or_default());
    }
    out.series.push(("windows.csv".into(), windows_series(&r)));
    out.result = json!({
        "model": model,
        "config": cfg,
        "axioms": axioms,
        "crossing": crossing,
        "report": detach(r, "sigma", &mut out.series),
    });
    Ok(out)
}

// ---------------------------------------------------------------------------
// skew shift inputs

fn parse_alpha(text: &str) -> Result<Dd, RunError> {
    match text {
        "golden" => Ok(Dd::golden()),
        "silver" => Ok(Dd::silver()),
        _ => {
            if let Some(n) = text.strip_prefix("sqrt:") {
                let n: u32 = n.parse().map_err(|_| RunError::Config(format!("alpha `{text}`")))?;
                return Ok(Dd::from_f64(n as f64).sqrt().frac());
            }
            text.parse::<f64>().map(Dd::from_f64).map_err(|_| RunError::Config(format!("alpha `{text}`")))
        }
    }
}

fn parse_roof(text: &str) -> Result<RoofFunction, RunError> {
    if text == "default" {
        return Ok(RoofFunction::default_roof());
    }
    if let Some(c) = text.strip_prefix("constant:") {
        let c: f64 = c.parse().map_err(|_| RunError::Config(format!("roof `{text}`")))?;
        return Ok(RoofFunction::constant(c)?);
    }
    let bad = || RunError::Config(format!("roof `{text}`: expected rows m,n,re,im separated by `;`"));
    let mut rows = Vec::new();
    for row in text.split(';').map(str::trim).filter(|r| !r.is_empty()) {
        let f: Vec<&str> = row.split(',').map(str::trim).collect();
        if f.len() != 4 {
            return Err(bad());
        }
        rows.push((
            f[0].parse().map_err(|_| bad())?,
            f[1].parse().map_err(|_| bad())?,
            f[2].parse().map_err(|_| bad())?,
            f[3].parse().map_err(|_| bad())?,
        ));
    }
    Ok(RoofFunction::from_rows(&rows)?)
}

fn skew_shift(p: &Params) -> Result<SkewShift, RunError> {
    Ok(SkewShift::new(parse_alpha(p.text("alpha"))?, Dd::from_f64(p.real("beta")))?)
}

fn heis_config(p: &Params) -> Result<HeisConfig, RunError> {
    let eps = p.real("epsilon");
    let mut c = if p.flag("paper-literal") { HeisConfig::paper_literal(eps)? } else { HeisConfig::new(eps)? };
    if let Some(v) = p.opt_real("kappa") {
        c.kappa = v;
    }
    if let Some(v) = p.opt_real("delta") {
        c.delta = v;
    }
    if let Some(v) = p.opt_real("d-factor") {
        c.d_factor = v;
    }
    if let Some(v) = p.opt_real("d-max") {
        c.d_max = v;
    }
    if let Some(v) = p.opt_int("step-budget") {
        c.step_budget = v;
    }
    if let Some(v) = p.opt_int("windows") {
        c.windows = v as usize;
    }
    if let Some(v) = p.opt_int("samples") {
        c.samples = v as usize;
    }
    if p.has("halve-m") {
        c.halve_m = p.flag("halve-m");
    }
    if let Some(v) = p.opt_int("decimation") {
        c.decimation = v;
    }
    if !(c.kappa > 0.0 && c.kappa < 1.0 && c.delta > 0.0) {
        return Err(RunError::Config(format!("need 0 < kappa < 1 and delta > 0 (kappa {}, delta {})", c.kappa, c.delta)));
    }
    Ok(c)
}

fn heis_cmd(p: &Params) -> Run {
    let ss = skew_shift(p)?;
    let f = parse_roof(p.text("roof"))?;
    let cfg = heis_config(p)?;
    let (x, y, s) = (p.real("x"), p.real("y"), p.real("s"));
    let (dx, dy) = (p.real("dx"), p.real("dy"));
    let pt = SpecialFlowPoint::new(x, y, s);
    let qt = SpecialFlowPoint::new(x - dx, y - dy, s);
    pt.check(&f)?;
    qt.check(&f)?;
    let r1 = heis_r1prime(&ss, &f, PointPair::new(pt.base(), qt.base()), &cfg)?;
    let mut out = Outcome::new(Value::Null);
    let lift = if r1.report.pass {
        let lift = lift_strong_r_report(&ss, &f, pt, qt, &r1, &cfg)?;
        if !lift.pass {
            out.fail(format!("lift: {}", lift.failure.clone().unwrap_or_default()));
        }
        out.series.push(("windows.csv".into(), windows_series(&lift)));
        detach(lift, "lift", &mut out.series)
    } else {
        out.fail(format!("R1': {}", r1.report.failure.clone().unwrap_or_default()));
        Value::Null
    };
    out.result = json!({
        "config": cfg,
        "M_prime": r1.m_prime,
        "r1prime": detach(r1.report, "shear", &mut out.series),
        "lift": lift,
    });
    Ok(out)
}

fn cf_cmd(p: &Params) -> Run {
    let alpha = parse_alpha(p.text("alpha"))?.frac();
    let cf = continued_fraction(alpha, p.int("depth") as usize)?;
    let bound = p.int("bound");
    let rows = cf
        .partial_quotients
        .iter()
        .zip(cf.q.iter().skip(1))
        .enumerate()
        .map(|(k, (&a, &q))| vec![(k + 1) as f64, a as f64, q as f64])
        .collect();
    let mut out = Outcome::new(json!({
        "continued_fraction": cf,
        "max_quotient": cf.max_quotient(),
        "bounded_type": cf.is_bounded_type(bound),
    }));
    out.series.push(("quotients.csv".into(), Series::new(&["k", "a_k", "q_k"], rows)));
    Ok(out)
}

fn sweep_cmd(p: &Params) -> Run {
    let ss = skew_shift(p)?;
    let f = parse_roof(p.text("roof"))?;
    let cfg = heis_config(p)?;
    let (lo, hi) = (p.real("dy-min"), p.real("dy-max"));
    if !(lo > 0.0 && hi >= lo) {
        return Err(RunError::Config(format!("need 0 < dy-min <= dy-max, got {lo}, {hi}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.int("seed"));
    let mut rows = Vec::new();
    let mut out = Outcome::new(Value::Null);
    let mut passed = 0u64;
    let pairs = p.int("pairs");
    for i in 0..pairs {
        let (x, y) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
        let dy = if hi > lo { 10f64.powf(rng.gen_range(lo.log10()..hi.log10())) } else { lo };
        let pair = PointPair::new((x, y), (x, y - dy));
        let (pass, m_prime, var) = match heis_r1prime(&ss, &f, pair, &cfg) {
            Ok(w) => (w.report.pass, w.m_prime as f64, w.report.residuals["max_window_variation"]),
            Err(e @ Error::NotFound { .. }) => {
                out.fail(format!("pair {i}: {e}"));
                (false, f64::NAN, f64::NAN)
            }
            Err(e) => return Err(e.into()),
        };
        if pass {
            passed += 1;
        } else {
            out.fail(format!("pair {i} at ({x}, {y}), dy {dy:e}: R1' failed"));
        }
        rows.push(vec![i as f64, x, y, dy, m_prime, var, pass as u8 as f64]);
    }
    out.result = json!({ "config": cfg, "pairs": pairs, "passed": passed });
    out.series.push((
        "pairs.csv".into(),
        Series::new(&["pair", "x", "y", "dy", "M_prime", "max_window_variation", "pass"], rows),
    ));
    Ok(out)
}
