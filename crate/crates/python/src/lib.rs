//! Python bindings for `newtonosc`.
//!
//! Rationals cross the boundary as strings like `"9/20"`; reports come back as JSON text.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use newtonosc::bounds;
use newtonosc::fit;
use newtonosc::ladder::{self, LadderParams};
use newtonosc::nondegeneracy::{self, NondegeneracyParams};
use newtonosc::quadrature;
use newtonosc::rational::{format_rational, parse_rational};
use newtonosc::{CutoffKind, CutoffSpec, Multidegree};

fn err(e: newtonosc::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("reports serialize")
}

fn beta_or_zero(phase: &newtonosc::Phase, beta: Option<Vec<u32>>) -> Multidegree {
    beta.map(Multidegree)
        .unwrap_or_else(|| Multidegree::zeros(phase.dimension()))
}

/// A polynomial phase with exact rational coefficients.
#[pyclass(frozen, skip_from_py_object, module = "newtonosc_py")]
#[derive(Clone)]
struct Phase {
    inner: newtonosc::Phase,
}

#[pymethods]
impl Phase {
    /// `terms` is a list of `(exponents, coefficient)` with coefficients as int or "p/q".
    #[new]
    fn new(dimension: usize, terms: Vec<(Vec<u32>, Bound<'_, PyAny>)>) -> PyResult<Self> {
        let mut parsed = Vec::with_capacity(terms.len());
        for (i, (e, c)) in terms.into_iter().enumerate() {
            let text = match c.extract::<i64>() {
                Ok(n) => n.to_string(),
                Err(_) => c
                    .extract::<String>()
                    .map_err(|_| PyValueError::new_err(format!("terms[{i}]: coefficient must be int or str")))?,
            };
            parsed.push((Multidegree(e), parse_rational(&text).map_err(err)?));
        }
        newtonosc::Phase::new(dimension, parsed)
            .map(|inner| Phase { inner })
            .map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        newtonosc::Phase::from_json(text)
            .map(|inner| Phase { inner })
            .map_err(err)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn evaluate(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.evaluate(&x).map_err(err)
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Phase({})", self.inner)
    }
}

#[pyclass(frozen, module = "newtonosc_py")]
struct NewtonPolyhedron {
    phase: newtonosc::Phase,
    inner: newtonosc::NewtonPolyhedron,
}

#[pymethods]
impl NewtonPolyhedron {
    #[new]
    fn new(phase: &Phase) -> PyResult<Self> {
        let inner = newtonosc::NewtonPolyhedron::build(&phase.inner).map_err(err)?;
        Ok(NewtonPolyhedron {
            phase: phase.inner.clone(),
            inner,
        })
    }

    fn facet_normals(&self) -> Vec<Vec<String>> {
        self.inner
            .facet_normals()
            .iter()
            .map(|w| w.iter().map(format_rational).collect())
            .collect()
    }

    fn extreme_points(&self) -> Vec<Vec<u32>> {
        self.inner.extreme_points().iter().map(|a| a.0.clone()).collect()
    }

    fn newton_distance(&self) -> PyResult<String> {
        self.inner.newton_distance().map(|t| format_rational(&t)).map_err(err)
    }

    #[getter]
    fn convenient(&self) -> bool {
        self.inner.is_convenient()
    }

    /// ⌊β+𝟙⌋ and the indices of the normals attaining it.
    fn floor_shifted(&self, beta: Vec<u32>) -> PyResult<(String, Vec<usize>)> {
        let (f, idx) = self.inner.floor_shifted(&Multidegree(beta)).map_err(err)?;
        Ok((format_rational(&f), idx))
    }

    fn leading_term(&self) -> PyResult<(String, usize)> {
        let (p, d) = ladder::leading_term(&self.inner).map_err(err)?;
        Ok((format_rational(&p), d))
    }

    /// (⌊β+𝟙⌋, d_β − 1) for the weight x^β.
    #[pyo3(signature = (beta=None))]
    fn theoretical_bound(&self, beta: Option<Vec<u32>>) -> PyResult<(String, usize)> {
        let beta = beta_or_zero(&self.phase, beta);
        let (p, q) = bounds::theoretical_bound(&self.inner, &beta).map_err(err)?;
        Ok((format_rational(&p), q))
    }

    /// Exponent ladder as a list of `(p, multiplicity)`.
    #[pyo3(signature = (p_max, n_max=None, decomposition_filter=false))]
    fn exponent_ladder(
        &self,
        p_max: &str,
        n_max: Option<u32>,
        decomposition_filter: bool,
    ) -> PyResult<Vec<(String, usize)>> {
        let p_max = parse_rational(p_max).map_err(err)?;
        let n_max = n_max.unwrap_or(self.inner.dimension() as u32 + 1);
        let mut params = LadderParams::new(p_max.clone(), n_max, decomposition_filter);
        if !self.inner.is_convenient() {
            params.beta_bound = Some(ladder::derived_beta_bound(&self.inner, &p_max, n_max));
        }
        let l = ladder::exponent_ladder(&self.inner, &params).map_err(err)?;
        Ok(l.terms.iter().map(|t| (format_rational(&t.p), t.d)).collect())
    }

    fn report_json(&self) -> String {
        to_json(&self.inner.report())
    }

    #[pyo3(signature = (beta, lam, n_max=None))]
    fn dyadic_bound_sum(&self, beta: Vec<u32>, lam: f64, n_max: Option<u32>) -> PyResult<f64> {
        bounds::dyadic_bound_sum(&self.inner, &Multidegree(beta), lam, n_max).map_err(err)
    }

    #[pyo3(signature = (grid=None))]
    fn constants_json(&self, grid: Option<usize>) -> PyResult<String> {
        let r = bounds::constants_report(&self.phase, &self.inner, grid.unwrap_or(64)).map_err(err)?;
        Ok(r.to_value().to_string())
    }
}

/// Returns `(status, verdict_json)` with status one of Nondegenerate, Degenerate, Inconclusive.
#[pyfunction]
#[pyo3(signature = (phase, grid=64, refine=3, tol=1e-9))]
fn check_nondegenerate(phase: &Phase, grid: usize, refine: usize, tol: f64) -> PyResult<(String, String)> {
    let params = NondegeneracyParams {
        grid_per_axis: grid,
        refine_depth: refine,
        degeneracy_tol: tol,
    };
    let v = nondegeneracy::check_nondegenerate(&phase.inner, params).map_err(err)?;
    Ok((format!("{:?}", v.status), to_json(&v)))
}

fn cutoff(radius: f64, smoothstep: Option<u32>) -> PyResult<CutoffSpec> {
    let kind = smoothstep.map_or(CutoffKind::Bump, CutoffKind::Smoothstep);
    CutoffSpec::new(radius, kind).map_err(err)
}

/// ∫ e^{iλφ(x)} x^β ψ(x) dx; returns `(value, est_error)`.
#[pyfunction]
#[pyo3(signature = (phase, lam, radius=0.5, beta=None, quality=1, smoothstep=None))]
fn evaluate_integral(
    phase: &Phase,
    lam: f64,
    radius: f64,
    beta: Option<Vec<u32>>,
    quality: u32,
    smoothstep: Option<u32>,
) -> PyResult<(Complex64, f64)> {
    let beta = beta_or_zero(&phase.inner, beta);
    let e =
        quadrature::evaluate_integral(&phase.inner, &cutoff(radius, smoothstep)?, &beta, lam, quality).map_err(err)?;
    Ok((e.value(), e.est_error))
}

/// Rows `(lambda, value, est_error, flagged)` over a geometric λ grid.
#[pyfunction]
#[pyo3(signature = (phase, lambda_min, lambda_max, points, radius=0.5, beta=None, quality=1))]
fn lambda_sweep(
    phase: &Phase,
    lambda_min: f64,
    lambda_max: f64,
    points: usize,
    radius: f64,
    beta: Option<Vec<u32>>,
    quality: u32,
) -> PyResult<Vec<(f64, Complex64, f64, bool)>> {
    let beta = beta_or_zero(&phase.inner, beta);
    let s = quadrature::lambda_sweep(
        &phase.inner,
        &cutoff(radius, None)?,
        &beta,
        lambda_min,
        lambda_max,
        points,
        quality,
    )
    .map_err(err)?;
    Ok(s.rows
        .iter()
        .map(|r| (r.lambda, r.value(), r.est_error, r.flagged))
        .collect())
}

/// Fits |I| ≈ C λ^{-p} log^q λ on `(lambda, abs)` pairs; returns `(p_hat, q_hat, C_hat, residual)`.
#[pyfunction]
fn fit_power_log(rows: Vec<(f64, f64)>, dimension: usize) -> PyResult<(f64, u32, f64, f64)> {
    let f = fit::fit_power_log(&rows, dimension).map_err(err)?;
    Ok((f.p_hat, f.q_hat, f.c_hat, f.residual))
}

#[pymodule]
fn newtonosc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Phase>()?;
    m.add_class::<NewtonPolyhedron>()?;
    m.add_function(wrap_pyfunction!(check_nondegenerate, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_integral, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(fit_power_log, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
