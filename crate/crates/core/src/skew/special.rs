//! The special flow under a roof over the skew shift.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::skew::birkhoff::{birkhoff_sum_with, BirkhoffTable};
use crate::skew::roof::RoofFunction;
use crate::skew::shift::{torus_dist, SkewShift};
use crate::sum::{Accumulator, Precision};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpecialFlowPoint {
    pub x: f64,
    pub y: f64,
    pub s: f64,
}

impl SpecialFlowPoint {
    pub fn new(x: f64, y: f64, s: f64) -> Self {
        Self { x, y, s }
    }

    pub fn base(&self) -> (f64, f64) {
        (self.x, self.y)
    }

    /// Requires `0 ≤ s < f(x, y)`.
    pub fn check(&self, f: &RoofFunction) -> Result<()> {
        let h = f.eval(self.x, self.y);
        if !(self.s >= 0.0 && self.s < h) {
            return Err(Error::InvalidParameter(format!(
                "height {} outside [0, f(x,y) = {h})",
                self.s
            )));
        }
        Ok(())
    }
}

/// Torus distance plus the height gap.
pub fn metric_df(p: &SpecialFlowPoint, q: &SpecialFlowPoint) -> f64 {
    torus_dist(p.base(), q.base()) + (p.s - q.s).abs()
}

/// `T_t(x, y, s) = (T^N(x, y), s + t - S_N)` with `S_N ≤ s + t < S_{N+1}`.
pub fn special_flow_evaluate(ss: &SkewShift, f: &RoofFunction, t: f64, p: SpecialFlowPoint) -> Result<SpecialFlowPoint> {
    p.check(f)?;
    if !t.is_finite() {
        return Err(Error::InvalidParameter("non-finite flow time".into()));
    }
    let prec = Precision::from_env();
    let target = p.s + t;
    let n = if target >= 0.0 {
        // double the table until it passes the target, then bisect inside it
        let mut len = 16u64;
        loop {
            let tab = BirkhoffTable::build(ss, f, p.x, p.y, len, prec);
            if let Some(n) = tab.locate(target) {
                break n as i64;
            }
            len *= 2;
        }
    } else {
        backward_level(ss, f, p, target, prec)
    };
    let s_n = birkhoff_sum_with(ss, f, n, p.x, p.y, prec);
    let (x, y) = ss.iterate(n, p.x, p.y);
    Ok(SpecialFlowPoint::new(x, y, target - s_n))
}

/// Largest `N < 0` with `S_N ≤ target < 0`.
fn backward_level(ss: &SkewShift, f: &RoofFunction, p: SpecialFlowPoint, target: f64, prec: Precision) -> i64 {
    let mut w = crate::skew::shift::Orbit::start(ss, p.x.into(), p.y.into());
    let mut acc = Accumulator::new(prec);
    let mut k = 0i64;
    loop {
        w.step_back();
        k += 1;
        acc.add(f.eval(w.x.hi, w.y.hi));
        if -acc.value() <= target {
            return -k;
        }
    }
}

/// Forward flow read off a prebuilt table of the same base point.
pub fn flow_with_table(ss: &SkewShift, table: &BirkhoffTable, p: SpecialFlowPoint, t: f64) -> Option<SpecialFlowPoint> {
    let target = p.s + t;
    let n = table.locate(target)?;
    let (x, y) = ss.iterate(n as i64, p.x, p.y);
    Some(SpecialFlowPoint::new(x, y, target - table.s(n)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_roof_is_a_suspension() {
        let ss = SkewShift::golden();
        let f = RoofFunction::constant(1.0).unwrap();
        let p = SpecialFlowPoint::new(0.1, 0.2, 0.25);
        let q = special_flow_evaluate(&ss, &f, 3.5, p).unwrap();
        let (x, y) = ss.iterate(3, 0.1, 0.2);
        assert_eq!((q.x, q.y), (x, y));
        assert!((q.s - 0.75).abs() < 1e-15);
        let r = special_flow_evaluate(&ss, &f, -1.5, p).unwrap();
        let (x, y) = ss.iterate(-2, 0.1, 0.2);
        assert!(torus_dist((r.x, r.y), (x, y)) < 1e-15);
        assert!((r.s - 0.75).abs() < 1e-15);
    }

    #[test]
    fn flow_group_property() {
        let ss = SkewShift::golden();
        let f = RoofFunction::default_roof();
        let p = SpecialFlowPoint::new(0.37, 0.81, 0.2);
        let a = special_flow_evaluate(&ss, &f, 41.3, p).unwrap();
        let b = special_flow_evaluate(&ss, &f, 17.9, a).unwrap();
        let c = special_flow_evaluate(&ss, &f, 59.2, p).unwrap();
        assert!(metric_df(&b, &c) < 1e-11);
        let back = special_flow_evaluate(&ss, &f, -59.2, c).unwrap();
        assert!(metric_df(&back, &p) < 1e-11);
    }

    #[test]
    fn height_outside_roof_rejected() {
        let ss = SkewShift::golden();
        let f = RoofFunction::default_roof();
        assert!(special_flow_evaluate(&ss, &f, 1.0, SpecialFlowPoint::new(0.0, 0.0, 5.0)).is_err());
        assert!(special_flow_evaluate(&ss, &f, 1.0, SpecialFlowPoint::new(0.0, 0.0, -0.1)).is_err());
    }

    #[test]
    fn table_flow_agrees() {
        let ss = SkewShift::silver();
        let f = RoofFunction::default_roof();
        let p = SpecialFlowPoint::new(0.6, 0.05, 0.4);
        let tab = BirkhoffTable::build(&ss, &f, p.x, p.y, 500, Precision::Compensated64);
        let a = flow_with_table(&ss, &tab, p, 123.4).unwrap();
        let b = special_flow_evaluate(&ss, &f, 123.4, p).unwrap();
        assert!(metric_df(&a, &b) < 1e-12);
    }
}
