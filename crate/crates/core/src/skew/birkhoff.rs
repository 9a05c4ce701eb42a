//! Birkhoff sums of a roof along skew-shift orbits.
//!
//! Long sums are split into fixed chunks evaluated in parallel; chunk totals
//! are merged in index order, so results do not depend on the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dd::Dd;
use crate::skew::roof::RoofFunction;
use crate::skew::shift::{wrap_half, Orbit, SkewShift};
use crate::sum::{Accumulator, Precision};

pub const CHUNK: u64 = 1 << 14;
const BLOCK_CHUNKS: u64 = 64;

/// Two base points; differences are taken as `p - q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointPair {
    pub p: (f64, f64),
    pub q: (f64, f64),
}

impl PointPair {
    pub fn new(p: (f64, f64), q: (f64, f64)) -> Self {
        Self { p, q }
    }

    /// Signed coordinate offsets in `[-1/2, 1/2)`.
    pub fn delta(&self) -> (f64, f64) {
        (wrap_half(self.p.0 - self.q.0), wrap_half(self.p.1 - self.q.1))
    }

    /// `min(|Δx|^{-2/3}, |Δy|^{-2})`.
    pub fn time_scale(&self) -> f64 {
        let (dx, dy) = self.delta();
        let tx = if dx == 0.0 { f64::INFINITY } else { dx.abs().powf(-2.0 / 3.0) };
        let ty = if dy == 0.0 { f64::INFINITY } else { dy.powi(-2) };
        tx.min(ty)
    }
}

/// Feeds `f(T^j p)` for `j = j0 .. j0 + len` into `sink`.
fn point_terms(ss: &SkewShift, f: &RoofFunction, p: (Dd, Dd), j0: i64, len: u64, mut sink: impl FnMut(f64)) {
    let mut w = Orbit::at_dd(ss, j0, p.0, p.1);
    for _ in 0..len {
        sink(f.eval(w.x.hi, w.y.hi));
        w.step();
    }
}

/// Feeds `f(T^j p) - f(T^j q)` for `j = j0 .. j0 + len` into `sink`.
fn diff_terms(ss: &SkewShift, f: &RoofFunction, pair: &PointPair, j0: i64, len: u64, mut sink: impl FnMut(f64)) {
    let (dx, dy) = pair.delta();
    let mut w = Orbit::at(ss, j0, pair.p.0, pair.p.1);
    for i in 0..len {
        let j = (j0 + i as i64) as f64;
        sink(f.diff(w.x.hi, w.y.hi, dx, dy + j * dx));
        w.step();
    }
}

fn chunk_bounds(len: u64) -> Vec<(u64, u64)> {
    let n = len.div_ceil(CHUNK);
    (0..n).map(|c| (c * CHUNK, CHUNK.min(len - c * CHUNK))).collect()
}

fn merge_totals(totals: &[f64], prec: Precision) -> (Vec<f64>, f64) {
    let mut acc = Accumulator::new(prec);
    let mut offsets = Vec::with_capacity(totals.len());
    for &t in totals {
        offsets.push(acc.value());
        acc.add(t);
    }
    (offsets, acc.value())
}

/// `S_n(f)(x, y)`: `Σ_{j<n} f(T^j p)` for `n ≥ 0`, `-Σ_{n≤j<0} f(T^j p)` for `n < 0`.
pub fn birkhoff_sum(ss: &SkewShift, f: &RoofFunction, n: i64, x: f64, y: f64) -> f64 {
    birkhoff_sum_with(ss, f, n, x, y, Precision::from_env())
}

pub fn birkhoff_sum_with(ss: &SkewShift, f: &RoofFunction, n: i64, x: f64, y: f64, prec: Precision) -> f64 {
    birkhoff_sum_dd(ss, f, n, Dd::from_f64(x), Dd::from_f64(y), prec)
}

/// Same sum from a double-double base point, e.g. one produced by `iterate_dd`.
pub fn birkhoff_sum_dd(ss: &SkewShift, f: &RoofFunction, n: i64, x: Dd, y: Dd, prec: Precision) -> f64 {
    let (j0, len, sign) = if n >= 0 { (0, n as u64, 1.0) } else { (n, n.unsigned_abs(), -1.0) };
    let totals: Vec<f64> = chunk_bounds(len)
        .into_par_iter()
        .map(|(off, l)| {
            let mut acc = Accumulator::new(prec);
            point_terms(ss, f, (x, y), j0 + off as i64, l, |v| acc.add(v));
            acc.value()
        })
        .collect();
    sign * merge_totals(&totals, prec).1
}

/// `Σ_{j<n} f(T^j (x,y))` by plain sequential stepping; reference path.
pub fn birkhoff_sum_sequential(ss: &SkewShift, f: &RoofFunction, n: u64, x: f64, y: f64) -> f64 {
    let mut acc = Accumulator::new(Precision::Extended);
    point_terms(ss, f, (Dd::from_f64(x), Dd::from_f64(y)), 0, n, |v| acc.add(v));
    acc.value()
}

fn chunked_prefix<F>(len: u64, prec: Precision, terms: F) -> Vec<f64>
where
    F: Fn(i64, u64, &mut dyn FnMut(f64)) + Sync,
{
    let chunks: Vec<(f64, Vec<f64>)> = chunk_bounds(len)
        .into_par_iter()
        .map(|(off, l)| {
            let mut acc = Accumulator::new(prec);
            let mut local = Vec::with_capacity(l as usize);
            terms(off as i64, l, &mut |v| {
                acc.add(v);
                local.push(acc.value());
            });
            (acc.value(), local)
        })
        .collect();
    let totals: Vec<f64> = chunks.iter().map(|c| c.0).collect();
    let (offsets, _) = merge_totals(&totals, prec);
    let mut out = Vec::with_capacity(len as usize + 1);
    out.push(0.0);
    for ((_, local), off) in chunks.iter().zip(&offsets) {
        out.extend(local.iter().map(|v| off + v));
    }
    out
}

/// Prefix sums `S_0 = 0, S_1, ..., S_n` along the forward orbit of one point.
#[derive(Debug, Clone)]
pub struct BirkhoffTable {
    pub x: f64,
    pub y: f64,
    prefix: Vec<f64>,
}

impl BirkhoffTable {
    pub fn build(ss: &SkewShift, f: &RoofFunction, x: f64, y: f64, n_max: u64, prec: Precision) -> Self {
        let prefix = chunked_prefix(n_max, prec, |j0, l, sink| point_terms(ss, f, (Dd::from_f64(x), Dd::from_f64(y)), j0, l, sink));
        Self { x, y, prefix }
    }

    pub fn n_max(&self) -> u64 {
        self.prefix.len() as u64 - 1
    }

    pub fn s(&self, n: u64) -> f64 {
        self.prefix[n as usize]
    }

    /// Largest `n` with `S_n ≤ target`, if the table reaches past `target`.
    pub fn locate(&self, target: f64) -> Option<u64> {
        if target < 0.0 {
            return None;
        }
        let k = self.prefix.partition_point(|&v| v <= target);
        if k >= self.prefix.len() {
            None
        } else {
            Some(k as u64 - 1)
        }
    }
}

/// `a_n = S_n(f)(p) - S_n(f)(q)` for `n = 0..=n_max`.
#[derive(Debug, Clone)]
pub struct ShearTable {
    pub pair: PointPair,
    a: Vec<f64>,
}

impl ShearTable {
    pub fn build(ss: &SkewShift, f: &RoofFunction, pair: PointPair, n_max: u64, prec: Precision) -> Self {
        let a = chunked_prefix(n_max, prec, |j0, l, sink| diff_terms(ss, f, &pair, j0, l, sink));
        Self { pair, a }
    }

    pub fn n_max(&self) -> u64 {
        self.a.len() as u64 - 1
    }

    pub fn a(&self, n: u64) -> f64 {
        self.a[n as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.a
    }
}

/// Decimated shear sequence with its running envelope.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ShearSeries {
    pub n: Vec<u64>,
    pub a: Vec<f64>,
    pub running_max: Vec<f64>,
    /// First `n` with `|a_n| ≥ threshold`, when a threshold was given.
    pub first_exceed: Option<u64>,
    pub a_at_exceed: Option<f64>,
    pub max_abs: f64,
    pub steps: u64,
}

struct ChunkScan {
    total: f64,
    lmax: f64,
    lmin: f64,
    // (n offset within chunk (1-based), local value, running local max, running local min)
    samples: Vec<(u64, f64, f64, f64)>,
}

/// Streams `a_n` for `n ≤ n_max`, keeping every `decimation`-th value and
/// stopping at the first `|a_n| ≥ threshold` when one is given.
pub fn shear_scan(
    ss: &SkewShift,
    f: &RoofFunction,
    pair: PointPair,
    n_max: u64,
    decimation: u64,
    threshold: Option<f64>,
    prec: Precision,
) -> ShearSeries {
    let dec = decimation.max(1);
    let mut out = ShearSeries::default();
    let mut offset_acc = Accumulator::new(prec);
    let block = CHUNK * BLOCK_CHUNKS;
    let mut start = 0u64;
    while start < n_max {
        let len = block.min(n_max - start);
        let scans: Vec<ChunkScan> = chunk_bounds(len)
            .into_par_iter()
            .map(|(off, l)| {
                let j0 = start + off;
                let mut acc = Accumulator::new(prec);
                let (mut lmax, mut lmin) = (f64::NEG_INFINITY, f64::INFINITY);
                let mut samples = Vec::new();
                let mut i = 0u64;
                diff_terms(ss, f, &pair, j0 as i64, l, |v| {
                    acc.add(v);
                    i += 1;
                    let val = acc.value();
                    lmax = lmax.max(val);
                    lmin = lmin.min(val);
                    if (j0 + i) % dec == 0 {
                        samples.push((i, val, lmax, lmin));
                    }
                });
                ChunkScan { total: acc.value(), lmax, lmin, samples }
            })
            .collect();
        for (c, scan) in scans.iter().enumerate() {
            let j0 = start + c as u64 * CHUNK;
            let off = offset_acc.value();
            let gmax = out.max_abs;
            for &(i, v, lx, ln) in &scan.samples {
                out.n.push(j0 + i);
                out.a.push(off + v);
                out.running_max.push(gmax.max((off + lx).abs()).max((off + ln).abs()));
            }
            if let Some(h) = threshold {
                if off + scan.lmax >= h || off + scan.lmin <= -h {
                    // replay the chunk to pin down the first crossing
                    let mut acc = Accumulator::new(prec);
                    let mut i = 0u64;
                    let mut hit = None;
                    let l = CHUNK.min(len - c as u64 * CHUNK);
                    diff_terms(ss, f, &pair, j0 as i64, l, |v| {
                        acc.add(v);
                        i += 1;
                        let a = off + acc.value();
                        if hit.is_none() {
                            out.max_abs = out.max_abs.max(a.abs());
                            if a.abs() >= h {
                                hit = Some((j0 + i, a));
                            }
                        }
                    });
                    let (n, a) = hit.expect("chunk extremum crosses the threshold");
                    out.first_exceed = Some(n);
                    out.a_at_exceed = Some(a);
                    out.steps = n;
                    while out.n.last().is_some_and(|&k| k > n) {
                        out.n.pop();
                        out.a.pop();
                        out.running_max.pop();
                    }
                    return out;
                }
            }
            out.max_abs = out.max_abs.max((off + scan.lmax).abs()).max((off + scan.lmin).abs());
            offset_acc.add(scan.total);
        }
        start += len;
    }
    out.steps = n_max;
    out
}

/// Decimated `a_n` for `n ≤ n_max`.
pub fn shear_sequence(ss: &SkewShift, f: &RoofFunction, pair: PointPair, n_max: u64, decimation: u64) -> ShearSeries {
    shear_scan(ss, f, pair, n_max, decimation, None, Precision::from_env())
}

/// Least-squares slope of `log max_{k≤n}|a_k|` against `log n` over
/// `n ≥ n_lo`, on roughly 40 log-spaced samples.
pub fn envelope_exponent(series: &ShearSeries, n_lo: u64) -> f64 {
    let Some(&n_hi) = series.n.last() else { return f64::NAN };
    if n_hi <= n_lo {
        return f64::NAN;
    }
    let grid = crate::report::log_grid(n_lo as f64, n_hi as f64, 40);
    let mut pts = Vec::new();
    let mut idx = 0;
    for g in grid {
        while idx < series.n.len() && (series.n[idx] as f64) < g {
            idx += 1;
        }
        if idx < series.n.len() && series.running_max[idx] > 0.0 {
            let p = ((series.n[idx] as f64).ln(), series.running_max[idx].ln());
            if pts.last() != Some(&p) {
                pts.push(p);
            }
        }
    }
    if pts.len() < 2 {
        return f64::NAN;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Direct `S_n(p) - S_n(q)` without the difference formula; oracle for tests.
pub fn shear_direct(ss: &SkewShift, f: &RoofFunction, pair: PointPair, n: u64) -> f64 {
    let mut acc = Accumulator::new(Precision::Extended);
    let mut wp = Orbit::start(ss, Dd::from_f64(pair.p.0), Dd::from_f64(pair.p.1));
    let mut wq = Orbit::start(ss, Dd::from_f64(pair.q.0), Dd::from_f64(pair.q.1));
    for _ in 0..n {
        acc.add(f.eval(wp.x.hi, wp.y.hi));
        acc.add(-f.eval(wq.x.hi, wq.y.hi));
        wp.step();
        wq.step();
    }
    acc.value()
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn cocycle(n in -100_000i64..100_000, m in -100_000i64..100_000, x in 0.0f64..1.0, y in 0.0f64..1.0) {
            let ss = SkewShift::golden();
            let f = RoofFunction::default_roof();
            let (xn, yn) = ss.iterate_dd(n, Dd::from_f64(x), Dd::from_f64(y));
            let lhs = birkhoff_sum(&ss, &f, n + m, x, y);
            let rhs = birkhoff_sum(&ss, &f, n, x, y) + birkhoff_sum_dd(&ss, &f, m, xn, yn, Precision::Compensated64);
            prop_assert!((lhs - rhs).abs() < 1e-9);
        }
    }
}
