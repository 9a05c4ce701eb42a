//! Brackets, nilpotency, chain bases and matrix exponentials on small matrix
//! Lie algebras.
//!
//! A Lie algebra is given by an explicit basis of matrices (the "ambient
//! basis"). All operators on it, in particular `ad_W`, are represented in the
//! coordinates of that basis.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;

/// Operator-norm threshold below which `ad_W^k` counts as zero, relative to
/// `max(1, ||ad_W||)^k`.
pub const NILPOTENCY_TOL: f64 = 1e-10;
/// Smallest admissible singular value of a basis coordinate matrix.
pub const INDEPENDENCE_TOL: f64 = 1e-8;
pub const DEFAULT_EXPM_CAP: f64 = 50.0;

/// Commutator `AB - BA`.
pub fn bracket(a: &SquareMatrix, b: &SquareMatrix) -> Result<SquareMatrix> {
    a.check_same_dim(b)?;
    Ok(&(a * b) - &(b * a))
}

/// The canonical sl(2, R) triple: `U` upper nilpotent, `X = diag(1, -1)`,
/// `V` lower nilpotent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sl2Triple {
    pub u: SquareMatrix,
    pub x: SquareMatrix,
    pub v: SquareMatrix,
}

impl Sl2Triple {
    pub fn canonical() -> Self {
        Self {
            u: SquareMatrix::unit(2, 0, 1),
            x: SquareMatrix::diag(&[1.0, -1.0]),
            v: SquareMatrix::unit(2, 1, 0),
        }
    }

    /// Largest residual among `[X,U] = 2U`, `[X,V] = -2V`, `[U,V] = X`.
    pub fn residual(&self) -> Result<f64> {
        let r1 = (&bracket(&self.x, &self.u)? - &self.u.scale(2.0)).frobenius();
        let r2 = (&bracket(&self.x, &self.v)? + &self.v.scale(2.0)).frobenius();
        let r3 = (&bracket(&self.u, &self.v)? - &self.x).frobenius();
        Ok(r1.max(r2).max(r3))
    }

    pub fn basis(&self) -> Vec<SquareMatrix> {
        vec![self.u.clone(), self.x.clone(), self.v.clone()]
    }
}

/// Basis `{U, X, V}` of sl(2, R).
pub fn sl2_basis() -> Vec<SquareMatrix> {
    Sl2Triple::canonical().basis()
}

/// Basis of sl(n, R): off-diagonal units followed by `E_ii - E_{i+1,i+1}`.
pub fn sln_basis(n: usize) -> Vec<SquareMatrix> {
    let mut out = Vec::with_capacity(n * n - 1);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                out.push(SquareMatrix::unit(n, i, j));
            }
        }
    }
    for i in 0..n - 1 {
        let mut d = vec![0.0; n];
        d[i] = 1.0;
        d[i + 1] = -1.0;
        out.push(SquareMatrix::diag(&d));
    }
    out
}

/// Basis of sl(2) ⊕ sl(2) as block-diagonal 4×4 matrices: first factor,
/// then second factor.
pub fn sl2_sum_basis() -> Vec<SquareMatrix> {
    let z = SquareMatrix::zeros(2);
    let mut out = Vec::with_capacity(6);
    for b in sl2_basis() {
        out.push(SquareMatrix::block_diag(&[&b, &z]).expect("4x4"));
    }
    for b in sl2_basis() {
        out.push(SquareMatrix::block_diag(&[&z, &b]).expect("4x4"));
    }
    out
}

/// Coordinates with respect to an ambient basis of matrices.
#[derive(Debug, Clone)]
pub struct LieSpan {
    basis: Vec<SquareMatrix>,
    // n² × d, column j = vec(B_j)
    frame: DMatrix<f64>,
    pinv: DMatrix<f64>,
    sigma_min: f64,
}

impl LieSpan {
    pub fn new(basis: &[SquareMatrix]) -> Result<Self> {
        let first = basis
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty ambient basis".into()))?;
        let n = first.dim();
        for b in basis {
            first.check_same_dim(b)?;
        }
        let d = basis.len();
        if d > n * n {
            return Err(Error::DependentBasis(0.0));
        }
        let frame = DMatrix::from_fn(n * n, d, |r, c| basis[c].get(r / n, r % n));
        let svd = frame.clone().svd(true, true);
        let sigma_min = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
        let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        if !(sigma_min > INDEPENDENCE_TOL * sigma_max.max(1.0)) {
            return Err(Error::DependentBasis(sigma_min));
        }
        let pinv = svd
            .pseudo_inverse(0.0)
            .map_err(|e| Error::InvalidMatrix(e.to_string()))?;
        Ok(Self {
            basis: basis.to_vec(),
            frame,
            pinv,
            sigma_min,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn matrix_dim(&self) -> usize {
        self.basis[0].dim()
    }

    pub fn basis(&self) -> &[SquareMatrix] {
        &self.basis
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigma_min
    }

    fn vectorize(m: &SquareMatrix) -> DVector<f64> {
        let n = m.dim();
        DVector::from_fn(n * n, |r, _| m.get(r / n, r % n))
    }

    /// Least-squares coordinates of `m` and the residual distance of `m` from
    /// the span.
    pub fn coords(&self, m: &SquareMatrix) -> (DVector<f64>, f64) {
        let v = Self::vectorize(m);
        let c = &self.pinv * &v;
        let resid = (&self.frame * &c - v).norm();
        (c, resid)
    }

    pub fn combine(&self, coords: &DVector<f64>) -> SquareMatrix {
        let n = self.matrix_dim();
        let v = &self.frame * coords;
        SquareMatrix::from_dmatrix(DMatrix::from_fn(n, n, |i, j| v[i * n + j]))
            .expect("finite combination")
    }

    /// Matrix of `ad_W` on the span, together with the closure residual
    /// (how far `[W, B_j]` lands from the span).
    pub fn ad_matrix(&self, w: &SquareMatrix) -> Result<(DMatrix<f64>, f64)> {
        let d = self.dim();
        let mut ad = DMatrix::zeros(d, d);
        let mut worst = 0.0f64;
        for (j, b) in self.basis.iter().enumerate() {
            let (c, r) = self.coords(&bracket(w, b)?);
            worst = worst.max(r);
            ad.set_column(j, &c);
        }
        Ok((ad, worst))
    }
}

fn op_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// Least `k` with `ad_W^k = 0` on the span, or `None` if `ad_W` is not
/// nilpotent within `d² + 1` powers.
pub fn nilpotency_degree(w: &SquareMatrix, ambient: &[SquareMatrix]) -> Result<Option<usize>> {
    let span = LieSpan::new(ambient)?;
    w.check_same_dim(&span.basis()[0])?;
    let (ad, closure) = span.ad_matrix(w)?;
    let scale = w.frobenius().max(1.0);
    if closure > 1e-9 * scale {
        return Err(Error::NotClosed(closure));
    }
    Ok(degree_of(&ad))
}

fn degree_of(ad: &DMatrix<f64>) -> Option<usize> {
    let d = ad.nrows();
    let base = op_norm(ad).max(1.0);
    let mut p = ad.clone();
    for k in 1..=d * d + 1 {
        if op_norm(&p) <= NILPOTENCY_TOL * base.powi(k as i32) {
            return Some(k);
        }
        p = ad * &p;
    }
    None
}

/// Jordan-chain basis of a nilpotent `ad_W`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainBasis {
    pub generator: SquareMatrix,
    /// Each chain is `[X_0, X_1, ..., X_m]` with `[W, X_i] = X_{i-1}` and
    /// `[W, X_0] = 0`.
    pub chains: Vec<Vec<SquareMatrix>>,
    pub residuals: ChainResiduals,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct ChainResiduals {
    /// Largest `||[W, X_i] - X_{i-1}||_F` over all chains.
    pub recursion: f64,
    /// Largest `||[W, X_0]||_F`.
    pub centralizer: f64,
    /// Smallest singular value of the chain elements' coordinate matrix.
    pub sigma_min: f64,
}

impl ChainBasis {
    /// Chain lengths `m_n + 1`, in chain order.
    pub fn lengths(&self) -> Vec<usize> {
        self.chains.iter().map(Vec::len).collect()
    }

    /// Recomputes residuals from the stored matrices.
    pub fn replay_residuals(&self, ambient: &[SquareMatrix]) -> Result<ChainResiduals> {
        let span = LieSpan::new(ambient)?;
        compute_residuals(&self.generator, &self.chains, &span)
    }
}

fn compute_residuals(
    w: &SquareMatrix,
    chains: &[Vec<SquareMatrix>],
    span: &LieSpan,
) -> Result<ChainResiduals> {
    let mut recursion = 0.0f64;
    let mut centralizer = 0.0f64;
    let mut cols = Vec::new();
    for chain in chains {
        centralizer = centralizer.max(bracket(w, &chain[0])?.frobenius());
        for i in 1..chain.len() {
            let r = (&bracket(w, &chain[i])? - &chain[i - 1]).frobenius();
            recursion = recursion.max(r);
        }
        for x in chain {
            cols.push(span.coords(x).0);
        }
    }
    let sigma_min = if cols.len() == span.dim() {
        let m = DMatrix::from_columns(&cols);
        m.svd(false, false).singular_values.min()
    } else {
        0.0
    };
    Ok(ChainResiduals {
        recursion,
        centralizer,
        sigma_min,
    })
}

/// Orthonormal basis of the numerical null space of `m`.
fn null_space(m: &DMatrix<f64>, tol: f64) -> Vec<DVector<f64>> {
    let d = m.ncols();
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let mut out = Vec::new();
    // nalgebra returns min(rows, cols) singular values; square here.
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s <= tol {
            out.push(vt.row(i).transpose());
        }
    }
    debug_assert!(out.iter().all(|v| v.len() == d));
    out
}

/// Modified Gram–Schmidt; drops vectors whose residual falls under `drop`.
fn orthonormalize(vs: &[DVector<f64>], drop: f64) -> Vec<DVector<f64>> {
    let mut q: Vec<DVector<f64>> = Vec::new();
    for v in vs {
        let mut r = v.clone();
        for e in &q {
            let c = e.dot(&r);
            r -= e * c;
        }
        let n = r.norm();
        if n > drop {
            q.push(r / n);
        }
    }
    q
}

fn project_out(v: &DVector<f64>, q: &[DVector<f64>]) -> DVector<f64> {
    let mut r = v.clone();
    for e in q {
        let c = e.dot(&r);
        r -= e * c;
    }
    r
}

/// Builds a chain basis by kernel filtration of `ad_W`.
///
/// Levels are processed from the top down. At level `j` the new chain tops
/// are taken from `ker ad^j` orthogonally to `ker ad^{j-1}` plus the images
/// of longer chains, picking the candidate with the largest residual first.
/// Each chain is rescaled so its largest element has unit Frobenius norm.
pub fn chain_basis(w: &SquareMatrix, ambient: &[SquareMatrix]) -> Result<ChainBasis> {
    let span = LieSpan::new(ambient)?;
    w.check_same_dim(&span.basis()[0])?;
    let (ad, closure) = span.ad_matrix(w)?;
    if closure > 1e-9 * w.frobenius().max(1.0) {
        return Err(Error::NotClosed(closure));
    }
    let m = degree_of(&ad).ok_or(Error::NotNilpotent)?;
    let d = span.dim();
    let base = op_norm(&ad).max(1.0);

    // kernels[j] = orthonormal basis of ker ad^j, j = 0..=m
    let mut kernels: Vec<Vec<DVector<f64>>> = vec![Vec::new()];
    let mut power = DMatrix::identity(d, d);
    for j in 1..=m {
        power = &ad * &power;
        let tol = 1e-9 * base.powi(j as i32);
        let k = if j == m {
            (0..d).map(|i| DVector::from_fn(d, |r, _| if r == i { 1.0 } else { 0.0 })).collect()
        } else {
            null_space(&power, tol)
        };
        kernels.push(k);
    }

    // (top vector, length), longest first
    let mut tops: Vec<(DVector<f64>, usize)> = Vec::new();
    for j in (1..=m).rev() {
        let mut spanning: Vec<DVector<f64>> = kernels[j - 1].clone();
        for (v, len) in &tops {
            let mut img = v.clone();
            for _ in 0..(len - j) {
                img = &ad * img;
            }
            spanning.push(img);
        }
        let mut q = orthonormalize(&spanning, 1e-9);
        let new_count = kernels[j].len().saturating_sub(q.len());
        let mut candidates: Vec<DVector<f64>> =
            kernels[j].iter().map(|c| project_out(c, &q)).collect();
        for _ in 0..new_count {
            let (idx, best) = candidates
                .iter()
                .enumerate()
                .map(|(i, c)| (i, c.norm()))
                .fold((usize::MAX, 0.0), |acc, (i, n)| if n > acc.1 { (i, n) } else { acc });
            if idx == usize::MAX || best <= 1e-9 {
                break;
            }
            let u = &candidates[idx] / best;
            q.push(u.clone());
            tops.push((u, j));
            candidates = candidates.iter().map(|c| project_out(c, &q)).collect();
        }
    }

    let mut chains = Vec::with_capacity(tops.len());
    for (v, len) in &tops {
        let mut chain = vec![span.combine(v)];
        for _ in 1..*len {
            let next = bracket(w, chain.last().expect("nonempty"))?;
            chain.push(next);
        }
        chain.reverse();
        let biggest = chain.iter().map(SquareMatrix::frobenius).fold(0.0, f64::max);
        if biggest > 0.0 {
            let s = 1.0 / biggest;
            // rescale top-down so the recursion stays exact up to rounding
            let top = chain.last().expect("nonempty").scale(s);
            let mut scaled = vec![top];
            for _ in 1..*len {
                let next = bracket(w, scaled.last().expect("nonempty"))?;
                scaled.push(next);
            }
            scaled.reverse();
            chain = scaled;
        }
        chains.push(chain);
    }

    let total: usize = chains.iter().map(Vec::len).sum();
    if total != d {
        return Err(Error::InvalidMatrix(format!(
            "chain construction produced {total} elements for a {d}-dimensional algebra"
        )));
    }
    let residuals = compute_residuals(w, &chains, &span)?;
    Ok(ChainBasis {
        generator: w.clone(),
        chains,
        residuals,
    })
}

/// `½ Σ m_n (m_n + 1)` over the chains, where chain `n` has `m_n + 1`
/// elements.
pub fn gr_invariant(cb: &ChainBasis) -> u64 {
    gr_from_lengths(&cb.lengths())
}

pub fn gr_from_lengths(lengths: &[usize]) -> u64 {
    lengths
        .iter()
        .map(|&l| {
            let m = l.saturating_sub(1) as u64;
            m * (m + 1) / 2
        })
        .sum()
}

/// Matrix exponential with the default Frobenius-norm cap.
pub fn expm(a: &SquareMatrix) -> Result<SquareMatrix> {
    expm_with_cap(a, DEFAULT_EXPM_CAP)
}

/// Nilpotent inputs (`A^n = 0`) use the exact finite sum and are not subject
/// to the cap; everything else uses scaling and squaring of a truncated
/// Taylor series.
pub fn expm_with_cap(a: &SquareMatrix, cap: f64) -> Result<SquareMatrix> {
    let n = a.dim();
    if let Some(powers) = nilpotent_powers(a) {
        let mut out = SquareMatrix::identity(n);
        let mut fact = 1.0;
        for (j, p) in powers.iter().enumerate().skip(1) {
            fact *= j as f64;
            out = &out + &p.scale(1.0 / fact);
        }
        return Ok(out);
    }
    let norm = a.frobenius();
    if norm > cap {
        return Err(Error::ExpOverflow { norm, cap });
    }
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let b = a.scale(0.5f64.powi(squarings));
    let mut term = SquareMatrix::identity(n);
    let mut out = SquareMatrix::identity(n);
    for k in 1..=20 {
        term = (&term * &b).scale(1.0 / k as f64);
        out = &out + &term;
    }
    for _ in 0..squarings {
        out = &out * &out;
    }
    SquareMatrix::from_dmatrix(out.into_dmatrix())
}

/// `[I, A, A², ..., A^{n-1}]` when `A^n` vanishes to working precision.
fn nilpotent_powers(a: &SquareMatrix) -> Option<Vec<SquareMatrix>> {
    let n = a.dim();
    let scale = a.frobenius().max(1.0);
    let mut powers = vec![SquareMatrix::identity(n), a.clone()];
    for _ in 2..=n {
        let next = powers.last().expect("nonempty") * a;
        powers.push(next);
    }
    let top = powers.pop().expect("A^n");
    if top.frobenius() <= 1e-14 * scale.powi(n as i32) {
        Some(powers)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &SquareMatrix, b: &SquareMatrix, tol: f64) -> bool {
        (a - b).frobenius() <= tol
    }

    #[test]
    fn canonical_triple_relations() {
        let t = Sl2Triple::canonical();
        assert_eq!(bracket(&t.x, &t.u).unwrap(), t.u.scale(2.0));
        assert_eq!(bracket(&t.u, &t.v).unwrap(), SquareMatrix::diag(&[1.0, -1.0]));
        assert_eq!(t.residual().unwrap(), 0.0);
        assert!(bracket(&t.u, &t.u).unwrap().is_zero(0.0));
    }

    #[test]
    fn bracket_dim_mismatch() {
        let a = SquareMatrix::zeros(2);
        let b = SquareMatrix::zeros(3);
        assert!(matches!(bracket(&a, &b), Err(Error::DimensionMismatch(2, 3))));
    }

    #[test]
    fn nilpotency_examples() {
        let t = Sl2Triple::canonical();
        let amb = sl2_basis();
        assert_eq!(nilpotency_degree(&t.u, &amb).unwrap(), Some(3));
        assert_eq!(nilpotency_degree(&SquareMatrix::zeros(2), &amb).unwrap(), Some(1));
        assert_eq!(nilpotency_degree(&t.x, &amb).unwrap(), None);
    }

    #[test]
    fn dependent_basis_rejected() {
        let t = Sl2Triple::canonical();
        let amb = vec![t.u.clone(), t.u.scale(2.0), t.v.clone()];
        assert!(matches!(nilpotency_degree(&t.u, &amb), Err(Error::DependentBasis(_))));
    }

    #[test]
    fn sl2_chain_is_single_length_three() {
        let t = Sl2Triple::canonical();
        let cb = chain_basis(&t.u, &sl2_basis()).unwrap();
        assert_eq!(cb.lengths(), vec![3]);
        assert_eq!(gr_invariant(&cb), 3);
        assert!(cb.residuals.recursion < 1e-12);
        assert!(cb.residuals.centralizer < 1e-12);
        assert!(cb.residuals.sigma_min > 1e-8);
        // bottom of the chain is a multiple of U
        let x0 = &cb.chains[0][0];
        assert!(x0.get(1, 0).abs() < 1e-14 && x0.get(0, 0).abs() < 1e-14);
    }

    #[test]
    fn semisimple_has_no_chain_basis() {
        let t = Sl2Triple::canonical();
        assert!(matches!(chain_basis(&t.x, &sl2_basis()), Err(Error::NotNilpotent)));
    }

    #[test]
    fn gr_from_lengths_examples() {
        assert_eq!(gr_from_lengths(&[3]), 3);
        assert_eq!(gr_from_lengths(&[3, 1, 1, 1]), 3);
        assert_eq!(gr_from_lengths(&[5, 3]), 13);
        assert_eq!(gr_from_lengths(&[3, 3]), 6);
    }

    #[test]
    fn expm_closed_forms() {
        let t = Sl2Triple::canonical();
        let e = expm(&t.u.scale(7.5)).unwrap();
        assert_eq!(e.to_rows(), vec![vec![1.0, 7.5], vec![0.0, 1.0]]);
        let b = 0.3;
        let e = expm(&t.x.scale(b)).unwrap();
        assert!(close(&e, &SquareMatrix::diag(&[b.exp(), (-b).exp()]), 1e-14));
    }

    #[test]
    fn expm_nilpotent_ignores_cap() {
        let u = SquareMatrix::unit(2, 0, 1).scale(1e7);
        let e = expm(&u).unwrap();
        assert_eq!(e.get(0, 1), 1e7);
    }

    #[test]
    fn expm_overflow_beyond_cap() {
        let x = SquareMatrix::diag(&[60.0, -60.0]);
        assert!(matches!(expm(&x), Err(Error::ExpOverflow { .. })));
        assert!(expm_with_cap(&x, 100.0).is_ok());
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn combo(basis: &[SquareMatrix], c: &[f64]) -> SquareMatrix {
        let n = basis[0].dim();
        basis.iter().zip(c).fold(SquareMatrix::zeros(n), |acc, (b, &k)| &acc + &b.scale(k))
    }

    fn coeffs(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1.0f64..1.0, n)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn jacobi(a in coeffs(8), b in coeffs(8), c in coeffs(8)) {
            let basis = sln_basis(3);
            let (a, b, c) = (combo(&basis, &a), combo(&basis, &b), combo(&basis, &c));
            let j = &(&bracket(&a, &bracket(&b, &c)?)? + &bracket(&b, &bracket(&c, &a)?)?)
                + &bracket(&c, &bracket(&a, &b)?)?;
            prop_assert!(j.frobenius() < 1e-10);
        }

        #[test]
        fn gr_is_conjugation_invariant(b in coeffs(8)) {
            let basis = sln_basis(3);
            let mut bm = combo(&basis, &b);
            let nb = bm.frobenius();
            if nb > 1.0 {
                bm = bm.scale(1.0 / nb);
            }
            let g = expm(&bm)?;
            let gi = g.inverse()?;
            let w = &(&g * &(&SquareMatrix::unit(3, 0, 1) + &SquareMatrix::unit(3, 1, 2))) * &gi;
            let cb = chain_basis(&w, &basis)?;
            prop_assert_eq!(gr_invariant(&cb), 13);
            prop_assert!(cb.residuals.recursion < 1e-10 && cb.residuals.centralizer < 1e-10);
            prop_assert!(cb.residuals.sigma_min > 1e-8);
        }

        #[test]
        fn expm_group_law(c in coeffs(8), s in -1.0f64..1.0, t in -1.0f64..1.0) {
            let basis = sln_basis(3);
            let mut w = combo(&basis, &c);
            let n = w.frobenius();
            if n > 0.0 {
                w = w.scale(10.0 / n.max(10.0));
            }
            let lhs = &expm(&w.scale(s))? * &expm(&w.scale(t))?;
            let rhs = expm(&w.scale(s + t))?;
            prop_assert!((&lhs - &rhs).frobenius() <= 1e-10 * rhs.frobenius().max(1.0));
        }

        #[test]
        fn det_of_exp_is_exp_of_trace(d in prop::collection::vec(-2.0f64..2.0, 9)) {
            let a = SquareMatrix::from_row_slice(3, &d)?;
            let e = expm(&a)?;
            let want = a.trace().exp();
            prop_assert!((e.det() - want).abs() <= 1e-10 * want);
        }
    }
}
