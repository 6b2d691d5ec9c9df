//! Python module `pmlf`: configured pipelines, verification suites, the
//! half-logarithms, Gamma-characters, cyclotomic numbers and lambda tables.
//! Structured results come back as plain Python objects (dicts and lists).

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyModule;
use serde_json::Value;

use pmlf::characters::{enumerate_gamma_characters, gauss_sum, GammaCharacter};
use pmlf::cyclo::CycloNumber;
use pmlf::iwasawa::Sign;
use pmlf::lvalues::table::LambdaTable;
use pmlf::pipeline::suites::{findings, run_suite, SUITES};
use pmlf::pipeline::{logpm_json, Pipeline as CorePipeline};

create_exception!(pmlf, PmlfError, PyException, "Raised for every library error; args are (message, exit_code).");

fn to_py(e: pmlf::error::Error) -> PyErr {
    PmlfError::new_err((e.to_string(), e.exit_code()))
}

fn json_to_py(py: Python<'_>, v: &Value) -> PyResult<Py<PyAny>> {
    let json = py.import("json")?;
    Ok(json.call_method1("loads", (v.to_string(),))?.unbind())
}

fn default_cache() -> PathBuf {
    std::env::temp_dir().join("pmlf-cache")
}

/// A validated configuration with lazily built tables.
#[pyclass(frozen)]
pub struct Pipeline {
    inner: CorePipeline,
}

#[pymethods]
impl Pipeline {
    #[staticmethod]
    #[pyo3(signature = (path, cache = None))]
    fn from_file(path: PathBuf, cache: Option<PathBuf>) -> PyResult<Pipeline> {
        let inner = CorePipeline::from_file(&path, &cache.unwrap_or_else(default_cache)).map_err(to_py)?;
        Ok(Pipeline { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (text, cache = None))]
    fn from_text(text: &str, cache: Option<PathBuf>) -> PyResult<Pipeline> {
        let inner = CorePipeline::from_text(text, &cache.unwrap_or_else(default_cache)).map_err(to_py)?;
        Ok(Pipeline { inner })
    }

    #[getter]
    fn p(&self) -> i64 {
        self.inner.p()
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.setup.config.label.clone()
    }

    fn config_text(&self) -> String {
        self.inner.setup.config.to_text()
    }

    /// Run a named suite; returns the report as a dict with `exit_code`.
    fn verify(&self, py: Python<'_>, suite: &str) -> PyResult<Py<PyAny>> {
        let rep = py.detach(|| run_suite(&self.inner, suite)).map_err(to_py)?;
        json_to_py(py, &rep.to_json())
    }

    /// Write all artifacts under `out` and return the manifest.
    fn build(&self, py: Python<'_>, out: PathBuf) -> PyResult<Py<PyAny>> {
        let manifest = py.detach(|| self.inner.build(&out)).map_err(to_py)?;
        json_to_py(py, &manifest)
    }

    fn base_values(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        let v = py.detach(|| self.inner.base_values_json()).map_err(to_py)?;
        json_to_py(py, &v)
    }

    fn findings(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        let v = py.detach(|| findings(&self.inner)).map_err(to_py)?;
        json_to_py(py, &Value::Array(v))
    }

    /// The exact lambda table of the base curve.
    fn table(&self, py: Python<'_>) -> PyResult<Table> {
        let b = py.detach(|| self.inner.base().map(|b| b.table.clone())).map_err(to_py)?;
        Ok(Table { inner: b })
    }
}

/// Element of Q(zeta_M), coefficients in the power basis as rational strings.
#[pyclass(frozen, eq, skip_from_py_object, name = "CycloNumber")]
#[derive(Clone, PartialEq)]
pub struct Cyclo {
    inner: CycloNumber,
}

#[pymethods]
impl Cyclo {
    #[new]
    fn new(modulus: i64, coeffs: Vec<String>) -> PyResult<Cyclo> {
        let items: Vec<&str> = coeffs.iter().map(String::as_str).collect();
        Ok(Cyclo { inner: CycloNumber::from_coeff_strings(modulus, &items).map_err(to_py)? })
    }

    #[staticmethod]
    fn root_of_unity(modulus: i64, k: i64) -> Cyclo {
        Cyclo { inner: CycloNumber::root_of_unity(modulus, k) }
    }

    #[getter]
    fn modulus(&self) -> i64 {
        self.inner.modulus()
    }

    #[getter]
    fn coeffs(&self) -> Vec<String> {
        self.inner.coeff_strings()
    }

    fn is_zero(&self) -> bool {
        self.inner.is_zero()
    }

    fn conj(&self) -> Cyclo {
        Cyclo { inner: self.inner.conj() }
    }

    fn norm(&self) -> String {
        self.inner.norm().to_string()
    }

    /// Image under zeta_M -> exp(2 pi i j / M).
    fn embed(&self, j: i64) -> (f64, f64) {
        self.inner.complex_embed(j).to_c64()
    }

    fn __add__(&self, o: &Cyclo) -> Cyclo {
        Cyclo { inner: &self.inner + &o.inner }
    }

    fn __sub__(&self, o: &Cyclo) -> Cyclo {
        Cyclo { inner: &self.inner - &o.inner }
    }

    fn __mul__(&self, o: &Cyclo) -> Cyclo {
        Cyclo { inner: &self.inner * &o.inner }
    }

    fn __truediv__(&self, o: &Cyclo) -> PyResult<Cyclo> {
        Ok(Cyclo { inner: self.inner.try_div(&o.inner).map_err(to_py)? })
    }

    fn __repr__(&self) -> String {
        format!("CycloNumber({}, {:?})", self.inner.modulus(), self.inner.coeff_strings())
    }
}

/// Character of Gamma of conductor p^c sending the generator to zeta_{p^(c-1)}^e.
#[pyclass(frozen, eq, hash, skip_from_py_object, name = "GammaCharacter")]
#[derive(Clone, PartialEq, Hash)]
pub struct Character {
    inner: GammaCharacter,
}

#[pymethods]
impl Character {
    #[new]
    fn new(p: i64, c: u32, e: i64) -> PyResult<Character> {
        Ok(Character { inner: GammaCharacter::new(p, c, e).map_err(to_py)? })
    }

    #[staticmethod]
    fn enumerate(p: i64, c_max: u32) -> Vec<Character> {
        enumerate_gamma_characters(p, c_max).into_iter().map(|inner| Character { inner }).collect()
    }

    #[getter]
    fn p(&self) -> i64 {
        self.inner.p
    }

    #[getter]
    fn c(&self) -> u32 {
        self.inner.c
    }

    #[getter]
    fn e(&self) -> i64 {
        self.inner.e
    }

    fn conj(&self) -> Character {
        Character { inner: self.inner.conj() }
    }

    fn gauss_sum(&self) -> PyResult<Cyclo> {
        Ok(Cyclo { inner: gauss_sum(&self.inner).map_err(to_py)?.value })
    }

    fn __repr__(&self) -> String {
        format!("GammaCharacter{}", self.inner)
    }
}

/// Exact or numeric table of lambda(a/p^j), in the documented text format.
#[pyclass(frozen, name = "LambdaTable")]
pub struct Table {
    inner: LambdaTable,
}

#[pymethods]
impl Table {
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Table> {
        Ok(Table { inner: LambdaTable::from_text(text).map_err(to_py)? })
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[getter]
    fn depth(&self) -> u32 {
        self.inner.n_max
    }

    #[getter]
    fn p(&self) -> i64 {
        self.inner.p
    }

    fn exact(&self, j: u32, a: i64) -> PyResult<Cyclo> {
        Ok(Cyclo { inner: self.inner.exact(j, a).map_err(to_py)? })
    }
}

/// log^sign_r at every character of conductor <= p^n_max and its series.
#[pyfunction]
#[pyo3(signature = (p, sign, r = 1, n_max = 3, precision = 8, terms = 12))]
fn logpm(py: Python<'_>, p: i64, sign: &str, r: u32, n_max: u32, precision: u32, terms: usize) -> PyResult<Py<PyAny>> {
    let sign = Sign::parse(sign).map_err(to_py)?;
    let v = py.detach(|| logpm_json(p, sign, r, n_max, precision, terms)).map_err(to_py)?;
    json_to_py(py, &v)
}

#[pyfunction]
fn suites() -> Vec<&'static str> {
    SUITES.to_vec()
}

#[pymodule(name = "pmlf")]
pub fn pmlf_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("PmlfError", m.py().get_type::<PmlfError>())?;
    m.add_class::<Pipeline>()?;
    m.add_class::<Cyclo>()?;
    m.add_class::<Character>()?;
    m.add_class::<Table>()?;
    m.add_function(wrap_pyfunction!(logpm, m)?)?;
    m.add_function(wrap_pyfunction!(suites, m)?)?;
    Ok(())
}
