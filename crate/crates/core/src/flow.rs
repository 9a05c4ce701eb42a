//! One-parameter flows `g ↦ exp(tW)·g`, the right-invariant distance proxy
//! and numeric time changes.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lie::expm;
use crate::matrix::SquareMatrix;
use crate::quad::{adaptive_simpson, bisect_increasing};

/// Quadrature tolerance per unit of integration length.
pub const QUAD_TOL_PER_UNIT: f64 = 1e-10;
pub const ROOT_XTOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSpec {
    pub generator: SquareMatrix,
}

impl FlowSpec {
    pub fn new(generator: SquareMatrix) -> Self {
        Self { generator }
    }

    pub fn dim(&self) -> usize {
        self.generator.dim()
    }
}

/// `exp(tW)·g`.
pub fn flow_point(spec: &FlowSpec, t: f64, g: &SquareMatrix) -> Result<SquareMatrix> {
    spec.generator.check_same_dim(g)?;
    if t == 0.0 {
        return Ok(g.clone());
    }
    Ok(&expm(&spec.generator.scale(t))? * g)
}

/// `||g h^{-1} - I||_F`; exactly right-invariant.
pub fn group_dist(g: &SquareMatrix, h: &SquareMatrix) -> Result<f64> {
    g.check_same_dim(h)?;
    let hi = h.inverse()?;
    Ok((&(g * &hi) - &SquareMatrix::identity(g.dim())).frobenius())
}

pub type TauFn = Arc<dyn Fn(&SquareMatrix) -> f64 + Send + Sync>;

/// A positive, bounded time-change function over a flow.
#[derive(Clone)]
pub struct TimeChangeSpec {
    pub flow: FlowSpec,
    pub tau: TauFn,
    pub tau_min: f64,
    pub tau_max: f64,
}

impl fmt::Debug for TimeChangeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TimeChangeSpec")
            .field("flow", &self.flow)
            .field("tau_min", &self.tau_min)
            .field("tau_max", &self.tau_max)
            .finish_non_exhaustive()
    }
}

impl TimeChangeSpec {
    pub fn new<F>(flow: FlowSpec, tau: F, tau_min: f64, tau_max: f64) -> Result<Self>
    where
        F: Fn(&SquareMatrix) -> f64 + Send + Sync + 'static,
    {
        if !(tau_min > 0.0 && tau_min <= tau_max && tau_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < tau_min <= tau_max, got [{tau_min}, {tau_max}]"
            )));
        }
        Ok(Self {
            flow,
            tau: Arc::new(tau),
            tau_min,
            tau_max,
        })
    }

    pub fn constant(flow: FlowSpec, c: f64) -> Result<Self> {
        Self::new(flow, move |_| c, c, c)
    }

    /// `∫_a^b τ(φ_s g) ds`.
    pub fn integral(&self, g: &SquareMatrix, a: f64, b: f64) -> Result<f64> {
        let tol = QUAD_TOL_PER_UNIT * (b - a).abs().max(1e-3);
        let mut err = None;
        let v = adaptive_simpson(
            |s| match flow_point(&self.flow, s, g) {
                Ok(p) => (self.tau)(&p),
                Err(e) => {
                    err.get_or_insert(e);
                    f64::NAN
                }
            },
            a,
            b,
            tol,
        );
        match err {
            Some(e) => Err(e),
            None => v,
        }
    }
}

/// The time-change cocycle: the unique `α` with `∫_0^α τ(φ_s g) ds = t`.
///
/// Bisection is bracketed by `[t/τ_max, t/τ_min]` and integrates
/// incrementally from the lower end of the bracket.
pub fn time_change_alpha(spec: &TimeChangeSpec, g: &SquareMatrix, t: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::InvalidParameter("t must be finite".into()));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    if spec.tau_min == spec.tau_max {
        return Ok(t / spec.tau_min);
    }
    let (lo, hi) = if t > 0.0 {
        (t / spec.tau_max, t / spec.tau_min)
    } else {
        (t / spec.tau_min, t / spec.tau_max)
    };
    let f_lo = spec.integral(g, 0.0, lo)?;
    let f_hi = f_lo + spec.integral(g, lo, hi)?;
    let slack = 1e-8;
    if f_lo > t + slack || f_hi < t - slack {
        return Err(Error::InvalidParameter(format!(
            "tau leaves [{}, {}] along the orbit",
            spec.tau_min, spec.tau_max
        )));
    }
    let mut anchor = lo;
    let mut f_anchor = f_lo;
    let mut err = None;
    let alpha = bisect_increasing(
        |a| {
            match spec.integral(g, anchor, a) {
                Ok(v) => {
                    let fa = f_anchor + v;
                    if fa < t {
                        anchor = a;
                        f_anchor = fa;
                    }
                    fa - t
                }
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            }
        },
        lo,
        hi,
        ROOT_XTOL,
    );
    match err {
        Some(e) => Err(e),
        None => Ok(alpha),
    }
}

/// Time-changed flow: `φ_{α(g,t)}(g)`.
pub fn time_changed_point(spec: &TimeChangeSpec, g: &SquareMatrix, t: f64) -> Result<SquareMatrix> {
    let a = time_change_alpha(spec, g, t)?;
    flow_point(&spec.flow, a, g)
}

/// Orbit dump: header `t,m00,m01,...` then one row per time.
pub fn orbit_csv(spec: &FlowSpec, g: &SquareMatrix, times: &[f64]) -> Result<String> {
    let n = spec.dim();
    let mut out = String::from("t");
    for i in 0..n {
        for j in 0..n {
            out.push_str(&format!(",m{i}{j}"));
        }
    }
    out.push('\n');
    for &t in times {
        let p = flow_point(spec, t, g)?;
        out.push_str(&format!("{t}"));
        for v in p.row_major() {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::Sl2Triple;

    fn horocycle() -> FlowSpec {
        FlowSpec::new(Sl2Triple::canonical().u)
    }

    #[test]
    fn flow_point_basics() {
        let g = SquareMatrix::identity(2);
        let p = flow_point(&horocycle(), 5.0, &g).unwrap();
        assert_eq!(p.to_rows(), vec![vec![1.0, 5.0], vec![0.0, 1.0]]);
        let h = SquareMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(flow_point(&horocycle(), 0.0, &h).unwrap(), h);
    }

    #[test]
    fn group_dist_examples() {
        let g = SquareMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(group_dist(&g, &g).unwrap(), 0.0);
        let eps = 1e-3;
        let p = flow_point(&horocycle(), eps, &SquareMatrix::identity(2)).unwrap();
        let d = group_dist(&p, &SquareMatrix::identity(2)).unwrap();
        assert!((d - eps).abs() < 1e-15);
    }

    #[test]
    fn constant_tau_alpha() {
        let one = TimeChangeSpec::constant(horocycle(), 1.0).unwrap();
        let g = SquareMatrix::identity(2);
        assert_eq!(time_change_alpha(&one, &g, 3.5).unwrap(), 3.5);
        let c = TimeChangeSpec::constant(horocycle(), 2.5).unwrap();
        assert!((time_change_alpha(&c, &g, 10.0).unwrap() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_tau_bounds() {
        assert!(TimeChangeSpec::new(horocycle(), |_| 1.0, 0.0, 1.0).is_err());
        assert!(TimeChangeSpec::new(horocycle(), |_| 1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn orbit_csv_layout() {
        let csv = orbit_csv(&horocycle(), &SquareMatrix::identity(2), &[0.0, 2.0]).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,m00,m01,m10,m11");
        assert_eq!(lines[2], "2,1,2,0,1");
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use crate::lie::Sl2Triple;
    use proptest::prelude::*;

    fn spec() -> TimeChangeSpec {
        let flow = FlowSpec::new(Sl2Triple::canonical().u);
        TimeChangeSpec::new(flow, |g: &SquareMatrix| 1.0 + 0.3 * (g.get(0, 1)).sin(), 0.7, 1.3).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn alpha_cocycle(t in 0.0f64..20.0, s in 0.0f64..20.0, x in -1.0f64..1.0) {
            let sp = spec();
            let g = SquareMatrix::from_rows(&[vec![1.0, x], vec![0.0, 1.0]])?;
            let at = time_change_alpha(&sp, &g, t)?;
            let shifted = flow_point(&sp.flow, at, &g)?;
            let lhs = time_change_alpha(&sp, &g, t + s)?;
            let rhs = at + time_change_alpha(&sp, &shifted, s)?;
            prop_assert!((lhs - rhs).abs() < 1e-6);
        }

        #[test]
        fn alpha_sandwich(t in 0.0f64..50.0) {
            let sp = spec();
            let a = time_change_alpha(&sp, &SquareMatrix::identity(2), t)?;
            prop_assert!(a >= t / sp.tau_max - 1e-9 && a <= t / sp.tau_min + 1e-9);
        }
    }
}
