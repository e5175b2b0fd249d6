//! Python bindings for `kdlab`.
//!
//! Matrices cross the boundary as nested lists of Python complex numbers in
//! the orthonormal position basis. Vectors are function values on the group
//! and are normalized for the uniform probability measure, so a unit vector
//! has `sum |psi|^2 = |G|`. Reports come back as dictionaries.

use kdlab::circle::{circle_negativity_search, BandLimitedOperator};
use kdlab::classify::{enumerate_kd_positive_pure, recognize_kd_positive_pure};
use kdlab::fragment::{self, HermitianOperator, PureFamily};
use kdlab::kd::{self, CharOrder};
use kdlab::verify::{verify_all, VerifyOptions};
use kdlab::{parse_group, FiniteAbelianGroup, GFunction, PhaseSpaceFunction};
use nalgebra::DMatrix;
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

fn err(e: kdlab::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Serializes through JSON into plain Python objects.
fn to_py<T: Serialize>(py: Python<'_>, v: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn rows(m: &DMatrix<Complex64>) -> Vec<Vec<Complex64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

fn from_rows(r: &[Vec<Complex64>]) -> PyResult<DMatrix<Complex64>> {
    let n = r.len();
    if r.iter().any(|row| row.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| r[i][j]))
}

fn table_rows(t: &PhaseSpaceFunction) -> Vec<Vec<Complex64>> {
    let n = t.dim();
    (0..n).map(|x| (0..n).map(|c| t.get(x, c)).collect()).collect()
}

/// Finite abelian group given as a product of cyclic factors, e.g. `"Z2xZ2"`.
#[pyclass(name = "Group", module = "pykdlab", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGroup(FiniteAbelianGroup);

#[pymethods]
impl PyGroup {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        parse_group(spec).map(Self).map_err(err)
    }

    #[getter]
    fn order(&self) -> usize {
        self.0.order()
    }

    #[getter]
    fn factors(&self) -> Vec<usize> {
        self.0.factors().to_vec()
    }

    fn subgroup_count(&self) -> PyResult<usize> {
        Ok(self.0.enumerate_subgroups().map_err(err)?.len())
    }

    fn kd_real_dimension(&self) -> usize {
        fragment::kd_real_dimension(&self.0)
    }

    fn __repr__(&self) -> String {
        format!("Group('{}')", self.0)
    }
}

/// Operator on L^2(G).
#[pyclass(name = "Operator", module = "pykdlab", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyOperator(kdlab::Operator);

#[pymethods]
impl PyOperator {
    /// From a square matrix in the orthonormal position basis.
    #[new]
    fn new(group: &PyGroup, matrix: Vec<Vec<Complex64>>) -> PyResult<Self> {
        kdlab::Operator::from_matrix(&group.0, from_rows(&matrix)?).map(Self).map_err(err)
    }

    #[staticmethod]
    fn maximally_mixed(group: &PyGroup) -> Self {
        Self(kdlab::Operator::maximally_mixed(&group.0))
    }

    /// Projector onto a unit vector.
    #[staticmethod]
    fn pure_state(group: &PyGroup, vector: Vec<Complex64>) -> PyResult<Self> {
        let psi = GFunction::new(&group.0, vector).map_err(err)?;
        kdlab::Operator::pure_state(&psi).map(Self).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text).map(Self).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter]
    fn group(&self) -> PyGroup {
        PyGroup(self.0.group.clone())
    }

    fn matrix(&self) -> Vec<Vec<Complex64>> {
        rows(&self.0.matrix())
    }

    fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    fn hs_inner(&self, other: &PyOperator) -> Complex64 {
        self.0.hs_inner(&other.0)
    }

    fn __repr__(&self) -> String {
        format!("Operator(group='{}')", self.0.group)
    }
}

fn hermitian(op: &PyOperator) -> PyResult<HermitianOperator> {
    HermitianOperator::new(op.0.clone()).map_err(err)
}

/// KD table as rows indexed by group element, columns by character.
#[pyfunction]
fn kd_table(op: &PyOperator) -> Vec<Vec<Complex64>> {
    table_rows(&kd::kd(&op.0))
}

#[pyfunction]
fn kd_inverse(group: &PyGroup, table: Vec<Vec<Complex64>>) -> PyResult<PyOperator> {
    let values = table.into_iter().flatten().collect();
    let t = PhaseSpaceFunction::new(&group.0, values).map_err(err)?;
    Ok(PyOperator(kd::kd_inverse(&t)))
}

/// `order` is one of `standard0`, `standard1`, `half`.
#[pyfunction]
#[pyo3(signature = (op, order = "standard0"))]
fn char_fn(op: &PyOperator, order: &str) -> PyResult<Vec<Vec<Complex64>>> {
    let order: CharOrder = order.parse().map_err(err)?;
    Ok(table_rows(&kd::char_fn(&op.0, order).map_err(err)?))
}

#[pyfunction]
fn wigner(op: &PyOperator) -> PyResult<Vec<Vec<Complex64>>> {
    Ok(table_rows(&kd::wigner(&op.0).map_err(err)?))
}

#[pyfunction]
fn kd_positive_pure_states(py: Python<'_>, group: &PyGroup) -> PyResult<Py<PyAny>> {
    to_py(py, &enumerate_kd_positive_pure(&group.0).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (group, vector, tol = 1e-9))]
fn recognize(py: Python<'_>, group: &PyGroup, vector: Vec<Complex64>, tol: f64) -> PyResult<Py<PyAny>> {
    let psi = GFunction::new(&group.0, vector).map_err(err)?;
    to_py(py, &recognize_kd_positive_pure(&psi, tol).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (op, tol = 1e-10))]
fn is_kd_real(py: Python<'_>, op: &PyOperator, tol: f64) -> PyResult<Py<PyAny>> {
    to_py(py, &fragment::is_kd_real(&hermitian(op)?, tol))
}

#[pyfunction]
#[pyo3(signature = (op, tol = 1e-9))]
fn is_kd_positive_state(py: Python<'_>, op: &PyOperator, tol: f64) -> PyResult<Py<PyAny>> {
    to_py(py, &fragment::is_kd_positive_state(&hermitian(op)?, tol).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (op, tol = 1e-8))]
fn span_membership(py: Python<'_>, op: &PyOperator, tol: f64) -> PyResult<Py<PyAny>> {
    let h = hermitian(op)?;
    let fam = PureFamily::new(h.group()).map_err(err)?;
    to_py(py, &fam.span_membership(&h, tol).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (op, tol = 1e-8))]
fn conv_membership(py: Python<'_>, op: &PyOperator, tol: f64) -> PyResult<Py<PyAny>> {
    let h = hermitian(op)?;
    let fam = PureFamily::new(h.group()).map_err(err)?;
    to_py(py, &fam.conv_membership(&h, tol).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (group, seed = 0, budget = 10_000))]
fn find_conv_gap_witness(py: Python<'_>, group: &PyGroup, seed: u64, budget: usize) -> PyResult<Py<PyAny>> {
    let g = group.0.clone();
    let s = py.detach(move || fragment::find_conv_gap_witness(&g, seed, budget)).map_err(err)?;
    to_py(py, &s)
}

/// `coeffs` is the `(2K+1) x (2K+1)` Fourier coefficient matrix, indices
/// running from `-K` to `K`.
#[pyfunction]
#[pyo3(signature = (band, coeffs, grid = 1024))]
fn circle_negativity(py: Python<'_>, band: usize, coeffs: Vec<Vec<Complex64>>, grid: usize) -> PyResult<Py<PyAny>> {
    let a = BandLimitedOperator::new(band, from_rows(&coeffs)?).map_err(err)?;
    let r = circle_negativity_search(&a, grid).map_err(err)?;
    let v = r.violation();
    let out = to_py(py, &r)?;
    out.bind(py).set_item("violation", v)?;
    Ok(out)
}

#[pyfunction]
#[pyo3(signature = (group, seed = 0, samples = 100))]
fn verify(py: Python<'_>, group: &PyGroup, seed: u64, samples: usize) -> PyResult<Py<PyAny>> {
    let opts = VerifyOptions { seed, samples, ..VerifyOptions::default() };
    let g = group.0.clone();
    let rep = py.detach(move || verify_all(&g, &opts)).map_err(err)?;
    to_py(py, &rep)
}

#[pymodule]
fn pykdlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGroup>()?;
    m.add_class::<PyOperator>()?;
    m.add_function(wrap_pyfunction!(kd_table, m)?)?;
    m.add_function(wrap_pyfunction!(kd_inverse, m)?)?;
    m.add_function(wrap_pyfunction!(char_fn, m)?)?;
    m.add_function(wrap_pyfunction!(wigner, m)?)?;
    m.add_function(wrap_pyfunction!(kd_positive_pure_states, m)?)?;
    m.add_function(wrap_pyfunction!(recognize, m)?)?;
    m.add_function(wrap_pyfunction!(is_kd_real, m)?)?;
    m.add_function(wrap_pyfunction!(is_kd_positive_state, m)?)?;
    m.add_function(wrap_pyfunction!(span_membership, m)?)?;
    m.add_function(wrap_pyfunction!(conv_membership, m)?)?;
    m.add_function(wrap_pyfunction!(find_conv_gap_witness, m)?)?;
    m.add_function(wrap_pyfunction!(circle_negativity, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
