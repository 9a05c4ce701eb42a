//! Python bindings. Reports cross the boundary as JSON text.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use parashear::dd::Dd;
use parashear::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter(_) | Error::DegenerateInput(_) | Error::InvalidMatrix(_) | Error::DimensionMismatch(..) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("value serializes")
}

#[pyo3::pymodule]
mod parashear_py {
    use super::*;

    use parashear::cq::{cq_replay, select_noncentral_chain, CqSchedule};
    use parashear::horo::{self, UXVCoords};
    use parashear::lie::{chain_basis as chains_of, gr_invariant, sl2_basis, sl2_sum_basis, sln_basis};
    use parashear::report::{lin_grid, log_grid};
    use parashear::sigma::{variable_strong_r_witness, SigmaConfig, SigmaModel};
    use parashear::skew::{self as sk, HeisConfig, PointPair, SpecialFlowPoint};
    use parashear::SquareMatrix;

    #[pyclass(name = "SkewShift", frozen)]
    struct SkewShift {
        inner: sk::SkewShift,
    }

    #[pymethods]
    impl SkewShift {
        #[new]
        #[pyo3(signature = (alpha, beta = 0.0))]
        fn new(alpha: f64, beta: f64) -> PyResult<Self> {
            let inner = sk::SkewShift::new(Dd::from_f64(alpha), Dd::from_f64(beta)).map_err(to_py)?;
            Ok(Self { inner })
        }

        #[staticmethod]
        fn golden() -> Self {
            Self { inner: sk::SkewShift::golden() }
        }

        #[staticmethod]
        fn silver() -> Self {
            Self { inner: sk::SkewShift::silver() }
        }

        #[getter]
        fn alpha(&self) -> f64 {
            self.inner.alpha.to_f64()
        }

        fn iterate(&self, n: i64, x: f64, y: f64) -> (f64, f64) {
            self.inner.iterate(n, x, y)
        }

        fn continued_fraction(&self, depth: usize) -> PyResult<Vec<u64>> {
            Ok(self.inner.continued_fraction(depth).map_err(to_py)?.partial_quotients)
        }

        fn __repr__(&self) -> String {
            format!("SkewShift(alpha={}, beta={})", self.inner.alpha.to_f64(), self.inner.beta.to_f64())
        }
    }

    #[pyclass(name = "RoofFunction", frozen)]
    struct RoofFunction {
        inner: sk::RoofFunction,
    }

    #[pymethods]
    impl RoofFunction {
        /// Rows of `(m, n, re, im)` Fourier coefficients.
        #[new]
        fn new(rows: Vec<(i32, i32, f64, f64)>) -> PyResult<Self> {
            Ok(Self { inner: sk::RoofFunction::from_rows(&rows).map_err(to_py)? })
        }

        #[staticmethod]
        fn default() -> Self {
            Self { inner: sk::RoofFunction::default_roof() }
        }

        #[staticmethod]
        fn constant(c: f64) -> PyResult<Self> {
            Ok(Self { inner: sk::RoofFunction::constant(c).map_err(to_py)? })
        }

        fn __call__(&self, x: f64, y: f64) -> f64 {
            self.inner.eval(x, y)
        }

        #[getter]
        fn mean(&self) -> f64 {
            self.inner.mean()
        }

        #[getter]
        fn floor(&self) -> f64 {
            self.inner.constant_floor
        }
    }

    #[pyfunction]
    fn birkhoff_sum(ss: &SkewShift, f: &RoofFunction, n: i64, x: f64, y: f64) -> f64 {
        sk::birkhoff_sum(&ss.inner, &f.inner, n, x, y)
    }

    /// Decimated `(n, a_n)` rows and the fitted envelope exponent.
    #[pyfunction]
    #[pyo3(signature = (ss, f, p, q, n_max, decimation = 1000))]
    fn shear_sequence(
        ss: &SkewShift,
        f: &RoofFunction,
        p: (f64, f64),
        q: (f64, f64),
        n_max: u64,
        decimation: u64,
    ) -> (Vec<(u64, f64)>, f64) {
        let s = sk::shear_sequence(&ss.inner, &f.inner, PointPair::new(p, q), n_max, decimation.max(1));
        let rows = s.n.iter().copied().zip(s.a.iter().copied()).collect();
        let e = sk::envelope_exponent(&s, 100.min(n_max / 10).max(1));
        (rows, e)
    }

    fn heis_config(epsilon: f64, kappa: Option<f64>, delta: Option<f64>, halve_m: bool) -> PyResult<HeisConfig> {
        let mut c = HeisConfig::new(epsilon).map_err(to_py)?;
        if let Some(k) = kappa {
            c.kappa = k;
        }
        if let Some(d) = delta {
            c.delta = d;
        }
        c.halve_m = halve_m;
        Ok(c)
    }

    /// R1′ witness on the base for `p`, `q`; the report as JSON.
    #[pyfunction]
    #[pyo3(signature = (ss, f, p, q, epsilon, kappa = None, delta = None))]
    fn heis_r1prime(
        ss: &SkewShift,
        f: &RoofFunction,
        p: (f64, f64),
        q: (f64, f64),
        epsilon: f64,
        kappa: Option<f64>,
        delta: Option<f64>,
    ) -> PyResult<String> {
        let cfg = heis_config(epsilon, kappa, delta, false)?;
        let w = sk::heis_r1prime(&ss.inner, &f.inner, PointPair::new(p, q), &cfg).map_err(to_py)?;
        Ok(w.report.to_json())
    }

    /// Strong-R windows of the special flow for `(x, y, s)` points.
    #[pyfunction]
    #[pyo3(signature = (ss, f, p, q, epsilon, kappa = None, delta = None, halve_m = false))]
    #[allow(clippy::too_many_arguments)]
    fn lift_strong_r(
        ss: &SkewShift,
        f: &RoofFunction,
        p: (f64, f64, f64),
        q: (f64, f64, f64),
        epsilon: f64,
        kappa: Option<f64>,
        delta: Option<f64>,
        halve_m: bool,
    ) -> PyResult<String> {
        let cfg = heis_config(epsilon, kappa, delta, halve_m)?;
        let (p, q) = (SpecialFlowPoint::new(p.0, p.1, p.2), SpecialFlowPoint::new(q.0, q.1, q.2));
        let w = sk::heis_r1prime(&ss.inner, &f.inner, PointPair::new(p.base(), q.base()), &cfg).map_err(to_py)?;
        let r = sk::lift_strong_r_report(&ss.inner, &f.inner, p, q, &w, &cfg).map_err(to_py)?;
        Ok(r.to_json())
    }

    fn algebra(name: &str) -> PyResult<(SquareMatrix, Vec<SquareMatrix>)> {
        let u = SquareMatrix::unit(2, 0, 1);
        Ok(match name {
            "sl2" => (u, sl2_basis()),
            "sl3" => (&SquareMatrix::unit(3, 0, 1) + &SquareMatrix::unit(3, 1, 2), sln_basis(3)),
            "sl2sl2" => (SquareMatrix::block_diag(&[&u, &u]).map_err(to_py)?, sl2_sum_basis()),
            "sl2-zero" => (SquareMatrix::block_diag(&[&u, &SquareMatrix::zeros(2)]).map_err(to_py)?, sl2_sum_basis()),
            _ => return Err(PyValueError::new_err(format!("unknown algebra {name}"))),
        })
    }

    /// Chain basis of the standard nilpotent generator of `algebra`, as JSON.
    #[pyfunction]
    fn chain_basis(algebra_name: &str) -> PyResult<String> {
        let (w, basis) = algebra(algebra_name)?;
        Ok(json(&chains_of(&w, &basis).map_err(to_py)?))
    }

    /// GR of a generator given as rows, inside the span of `basis`.
    #[pyfunction]
    fn gr(generator: Vec<Vec<f64>>, basis: Vec<Vec<Vec<f64>>>) -> PyResult<u64> {
        let w = SquareMatrix::from_rows(&generator).map_err(to_py)?;
        let b: Vec<SquareMatrix> = basis.iter().map(|m| SquareMatrix::from_rows(m)).collect::<Result<_, _>>().map_err(to_py)?;
        Ok(gr_invariant(&chains_of(&w, &b).map_err(to_py)?))
    }

    #[pyfunction]
    #[pyo3(signature = (algebra_name, epsilon, n, l_grid = 20, samples = 1000))]
    fn cq_verify(algebra_name: &str, epsilon: f64, n: u64, l_grid: usize, samples: usize) -> PyResult<String> {
        let (u, basis) = algebra(algebra_name)?;
        let cb = chains_of(&u, &basis).map_err(to_py)?;
        let chain = select_noncentral_chain(&cb, &u).map_err(to_py)?;
        let s = CqSchedule::new(epsilon, n, u.clone(), chain).map_err(to_py)?;
        let grid = log_grid(s.l_min(), s.k as f64, l_grid.max(2));
        let r = cq_replay(&s, &SquareMatrix::identity(u.dim()), &grid, samples).map_err(to_py)?;
        Ok(r.to_json())
    }

    /// Horocycle divergence report for `y = exp(aU)exp(bX)exp(cV)` and `x = I`.
    #[pyfunction]
    #[pyo3(signature = (a, b, c, t_max, samples = 501))]
    fn horo_divergence(a: f64, b: f64, c: f64, t_max: f64, samples: usize) -> PyResult<String> {
        let grid = lin_grid(0.0, t_max, samples.max(2));
        let r = horo::verify_horocycle_divergence(&SquareMatrix::identity(2), &UXVCoords::new(a, b, c), &grid, true)
            .map_err(to_py)?;
        Ok(r.to_json())
    }

    #[pyfunction]
    fn c0() -> f64 {
        horo::c0()
    }

    #[pyfunction]
    #[pyo3(signature = (a, c, epsilon, model = "default"))]
    fn sigma_witness(a: f64, c: f64, epsilon: f64, model: &str) -> PyResult<String> {
        let m = SigmaModel::parse(model).ok_or_else(|| PyValueError::new_err(format!("unknown model {model}")))?;
        let cfg = SigmaConfig::new(&m, epsilon).map_err(to_py)?;
        Ok(variable_strong_r_witness(&m, a, 0.0, c, &cfg).map_err(to_py)?.to_json())
    }
}
