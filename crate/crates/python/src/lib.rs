//! Python bindings: the natural basis, generator matrices, CG tables and
//! the verification suite.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use slrep_core::clebsch::cg_table as core_cg_table;
use slrep_core::contracted::NaturalBasis as CoreBasis;
use slrep_core::decontract::{sigma_convert as core_sigma_convert, SigmaLabels, SigmaVariant};
use slrep_core::io::{generators_document, labels_json, JobConfig, OperatorDocument};
use slrep_core::labels::{fmt_twice, parse_twice, HighestWeight};
use slrep_core::verify::{check_contraction_limit, default_suite};

fn py_err(e: slrep_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn variant(name: &str) -> PyResult<SigmaVariant> {
    match name {
        "sigma" => Ok(SigmaVariant::Sigma),
        "sigma_prime" => Ok(SigmaVariant::SigmaPrime),
        "sigma_tilde" => Ok(SigmaVariant::SigmaTilde),
        _ => Err(PyValueError::new_err(format!(
            "unknown sigma variant {name:?}; use sigma, sigma_prime or sigma_tilde"
        ))),
    }
}

fn sigma_tilde(n: usize, sigma: Option<Vec<Complex64>>, seed: Option<u64>) -> PyResult<SigmaLabels> {
    Ok(match (sigma, seed) {
        (Some(v), _) => {
            if v.len() != n - 1 {
                return Err(PyValueError::new_err(format!("need {} sigma values for n = {n}", n - 1)));
            }
            SigmaLabels::new(SigmaVariant::SigmaTilde, v)
        }
        (None, Some(s)) => SigmaLabels::random(n, SigmaVariant::SigmaTilde, s),
        (None, None) => SigmaLabels::zeros(n, SigmaVariant::SigmaTilde),
    })
}

fn hw(n: usize, labels: &[String]) -> PyResult<HighestWeight> {
    let twice = labels.iter().map(|s| parse_twice(s)).collect::<Result<Vec<_>, _>>().map_err(py_err)?;
    HighestWeight::from_twice(n, twice).map_err(py_err)
}

type Label = (Vec<String>, Vec<Vec<String>>, Vec<Vec<String>>);

/// Truncated basis of matrix-element functions over Spin(n).
#[pyclass(name = "NaturalBasis", frozen)]
struct PyNaturalBasis {
    inner: Arc<CoreBasis>,
}

#[pymethods]
impl PyNaturalBasis {
    #[new]
    #[pyo3(signature = (n, cutoff, spinorial = false))]
    fn new(n: usize, cutoff: &str, spinorial: bool) -> PyResult<Self> {
        let cut = parse_twice(cutoff).map_err(py_err)?;
        Ok(Self {
            inner: CoreBasis::new(n, cut, spinorial).map_err(py_err)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn cutoff(&self) -> String {
        fmt_twice(self.inner.cutoff_twice())
    }

    #[getter]
    fn spinorial(&self) -> bool {
        self.inner.spinorial()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn __len__(&self) -> usize {
        self.inner.dim()
    }

    /// Highest weights of the irreps in basis order.
    fn irreps(&self) -> Vec<Vec<String>> {
        self.inner.irreps().iter().map(|r| labels_json(r.hw())).collect()
    }

    /// `(J, k-levels, m-levels)` for every basis vector.
    fn labels(&self) -> Vec<Label> {
        let doc = OperatorDocument::new(JobConfig::default(), &self.inner);
        doc.basis.into_iter().map(|e| (e.0, e.1, e.2)).collect()
    }

    #[pyo3(signature = (depth = 1))]
    fn interior(&self, depth: usize) -> PyResult<Vec<usize>> {
        self.inner.interior_projector(depth).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "NaturalBasis(n={}, cutoff={}, spinorial={}, dim={})",
            self.inner.n(),
            fmt_twice(self.inner.cutoff_twice()),
            if self.inner.spinorial() { "True" } else { "False" },
            self.inner.dim()
        )
    }
}

type Triplets = Vec<(usize, usize, Complex64)>;

/// `M_ab`, `K_ab` and `T_ab` as sparse `(row, col, value)` lists, keyed by
/// names such as `"T_12"`. `sigma` holds the n−1 sigma-tilde labels.
#[pyfunction]
#[pyo3(signature = (n, cutoff, spinorial = false, sigma = None, seed = None))]
fn generators(
    n: usize,
    cutoff: &str,
    spinorial: bool,
    sigma: Option<Vec<Complex64>>,
    seed: Option<u64>,
) -> PyResult<BTreeMap<String, Triplets>> {
    let doc = document(n, cutoff, spinorial, sigma, seed)?;
    Ok(doc
        .operators
        .into_iter()
        .map(|(k, t)| (k, t.into_iter().map(|(r, c, [re, im])| (r, c, Complex64::new(re.0, im.0))).collect()))
        .collect())
}

/// The same operators as the JSON document the command line writes.
#[pyfunction]
#[pyo3(signature = (n, cutoff, spinorial = false, sigma = None, seed = None))]
fn generators_json(n: usize, cutoff: &str, spinorial: bool, sigma: Option<Vec<Complex64>>, seed: Option<u64>) -> PyResult<String> {
    Ok(document(n, cutoff, spinorial, sigma, seed)?.to_json())
}

fn document(n: usize, cutoff: &str, spinorial: bool, sigma: Option<Vec<Complex64>>, seed: Option<u64>) -> PyResult<OperatorDocument> {
    let s = sigma_tilde(n, sigma, seed)?;
    let meta = JobConfig {
        command: "generators".into(),
        n,
        cutoff: fmt_twice(parse_twice(cutoff).map_err(py_err)?),
        spinorial,
        sigma: Some(s.values.iter().map(|z| [z.re, z.im]).collect()),
        seed,
        out: None,
        format: "json".into(),
    };
    generators_document(meta, &s).map_err(py_err)
}

/// Nonzero entries `(i1, i2, i3, value)` of one CG table; `gamma` is 1-based.
#[pyfunction]
#[pyo3(signature = (n, hw1, hw2, hw3, gamma = 1))]
fn cg_table(n: usize, hw1: Vec<String>, hw2: Vec<String>, hw3: Vec<String>, gamma: usize) -> PyResult<Vec<(usize, usize, usize, Complex64)>> {
    let t = core_cg_table(&hw(n, &hw1)?, &hw(n, &hw2)?, &hw(n, &hw3)?, gamma).map_err(py_err)?;
    Ok(t.entries(0.0))
}

#[pyfunction]
fn dim_irrep(n: usize, labels: Vec<String>) -> PyResult<usize> {
    Ok(hw(n, &labels)?.dim())
}

/// Convert between `sigma`, `sigma_prime` and `sigma_tilde` labels.
#[pyfunction]
fn sigma_convert(values: Vec<Complex64>, source: &str, target: &str) -> PyResult<Vec<Complex64>> {
    let s = SigmaLabels::new(variant(source)?, values);
    Ok(core_sigma_convert(&s, variant(target)?).map_err(py_err)?.values)
}

/// The default check suite as JSON lines, one report each.
#[pyfunction]
#[pyo3(signature = (n, cutoff, spinorial = false, sigma = None, seed = None))]
fn verify(py: Python<'_>, n: usize, cutoff: &str, spinorial: bool, sigma: Option<Vec<Complex64>>, seed: Option<u64>) -> PyResult<Vec<String>> {
    let s = sigma_tilde(n, sigma, seed)?;
    let cut = parse_twice(cutoff).map_err(py_err)?;
    let reports = py.detach(|| default_suite(n, cut, spinorial, &s)).map_err(py_err)?;
    Ok(reports.iter().map(|r| r.json_line()).collect())
}

/// Fitted log-log slope of `‖[εT, εT]‖` against `ε`.
#[pyfunction]
#[pyo3(signature = (n, eps = vec![1e-1, 1e-2, 1e-3, 1e-4]))]
fn contraction_slope(n: usize, eps: Vec<f64>) -> PyResult<f64> {
    let r = check_contraction_limit(n, &eps, f64::INFINITY).map_err(py_err)?;
    Ok(r.details["slope"])
}

#[pymodule]
fn slrep(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyNaturalBasis>()?;
    m.add_function(wrap_pyfunction!(generators, m)?)?;
    m.add_function(wrap_pyfunction!(generators_json, m)?)?;
    m.add_function(wrap_pyfunction!(cg_table, m)?)?;
    m.add_function(wrap_pyfunction!(dim_irrep, m)?)?;
    m.add_function(wrap_pyfunction!(sigma_convert, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(contraction_slope, m)?)?;
    Ok(())
}
