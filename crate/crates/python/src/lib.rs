//! Python bindings: permutation groups, representations, quotient operators,
//! spectra and isospectral pairs. Matrices cross the boundary as nested lists of
//! Python numbers (real or complex).

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

use symq::groups::{
    build_representation, close_group, orbits, permutation_representation, regular_representation,
    sign_representation, trivial_representation,
};
use symq::isospectral::{certify_isospectral, sunada_condition, SubgroupPair};
use symq::linalg::{eig, is_hermitian, CMatrix};
use symq::quotient::{kernel_space, quotient as quotient_plain, quotient_blocks, verify_decomposition, verify_fundamental};

create_exception!(symq_py, SymqError, PyException, "Raised for any failure reported by the symq core.");

fn err(e: symq::Error) -> PyErr {
    SymqError::new_err(e.to_string())
}

type Rows = Vec<Vec<Complex64>>;

fn to_matrix(rows: &Rows) -> PyResult<CMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(SymqError::new_err("matrix rows have different lengths"));
    }
    Ok(CMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

fn to_rows(m: &CMatrix) -> Rows {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

/// Permutation group generated by named permutations of `0..degree`.
#[pyclass(name = "PermGroup", frozen)]
struct PyPermGroup {
    inner: Arc<symq::PermGroup>,
}

#[pymethods]
impl PyPermGroup {
    #[new]
    fn new(degree: usize, generators: BTreeMap<String, Vec<usize>>) -> PyResult<Self> {
        let gens = generators.into_iter().collect();
        Ok(PyPermGroup { inner: close_group(degree, gens).map_err(err)? })
    }

    #[getter]
    fn degree(&self) -> usize {
        self.inner.degree()
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    fn generator_names(&self) -> Vec<String> {
        self.inner.generator_names().to_vec()
    }

    fn orbits(&self) -> Vec<Vec<usize>> {
        orbits(&self.inner).orbits
    }

    fn __repr__(&self) -> String {
        format!("PermGroup(degree={}, order={})", self.inner.degree(), self.inner.order())
    }
}

/// Unitary representation of a `PermGroup`.
#[pyclass(name = "Representation", frozen)]
struct PyRepresentation {
    inner: symq::Representation,
}

#[pymethods]
impl PyRepresentation {
    /// Builds ρ from the images of the generators.
    #[new]
    #[pyo3(signature = (group, degree, images, label=None))]
    fn new(group: &PyPermGroup, degree: usize, images: BTreeMap<String, Rows>, label: Option<String>) -> PyResult<Self> {
        let list = images
            .iter()
            .map(|(name, rows)| Ok((name.clone(), to_matrix(rows)?)))
            .collect::<PyResult<Vec<_>>>()?;
        let rep = build_representation(&group.inner, degree, &list).map_err(err)?;
        Ok(PyRepresentation { inner: match label {
            Some(l) => rep.with_label(l),
            None => rep,
        } })
    }

    #[staticmethod]
    fn trivial(group: &PyPermGroup) -> Self {
        PyRepresentation { inner: trivial_representation(&group.inner) }
    }

    /// One-dimensional representation sending the listed generators to −1.
    #[staticmethod]
    fn sign(group: &PyPermGroup, negated: Vec<String>) -> PyResult<Self> {
        let names: Vec<&str> = negated.iter().map(String::as_str).collect();
        Ok(PyRepresentation { inner: sign_representation(&group.inner, &names).map_err(err)? })
    }

    #[staticmethod]
    fn regular(group: &PyPermGroup) -> Self {
        PyRepresentation { inner: regular_representation(&group.inner) }
    }

    #[staticmethod]
    fn permutation(group: &PyPermGroup) -> Self {
        PyRepresentation { inner: permutation_representation(&group.inner) }
    }

    #[getter]
    fn degree(&self) -> usize {
        self.inner.degree()
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label().to_string()
    }

    /// χ(g) for every group element, in the group's element order.
    fn character(&self) -> Vec<Complex64> {
        self.inner.character()
    }

    fn __repr__(&self) -> String {
        format!("Representation(label={:?}, degree={})", self.inner.label(), self.inner.degree())
    }
}

/// Quotient operator Op_ρ.
///
/// `mode` is "blocks" (orbit-adapted basis) or "plain" (canonical kernel basis).
/// Returns a dict with the matrix, the orbit block dimensions and the fundamental residuals.
#[pyfunction]
#[pyo3(signature = (operator, rep, group, mode="blocks"))]
fn quotient(
    py: Python<'_>,
    operator: Rows,
    rep: &PyRepresentation,
    group: &PyPermGroup,
    mode: &str,
) -> PyResult<Py<PyAny>> {
    let op = to_matrix(&operator)?;
    let result = match mode {
        "blocks" => quotient_blocks(&op, &rep.inner, &group.inner).map_err(err)?,
        "plain" => {
            symq::quotient::check_pi_symmetric(&op, &group.inner).map_err(err)?;
            let basis = kernel_space(&rep.inner, &group.inner).map_err(err)?;
            quotient_plain(&op, &basis).map_err(err)?
        }
        other => return Err(SymqError::new_err(format!("unknown mode {other:?}"))),
    };
    let fundamental = verify_fundamental(&op, &result.basis, &result);
    let out = pyo3::types::PyDict::new(py);
    out.set_item("matrix", to_rows(&result.matrix))?;
    out.set_item("d", result.matrix.nrows())?;
    out.set_item("dims", result.dims())?;
    out.set_item("hermitian", result.hermitian)?;
    out.set_item("commute_residual", fundamental.commute_residual)?;
    out.set_item("orthonormal_residual", fundamental.orthonormal_residual)?;
    out.set_item("pass", fundamental.pass)?;
    Ok(out.into_any().unbind())
}

/// Clustered eigenvalues as `(value, multiplicity)` pairs.
#[pyfunction]
fn spectrum(operator: Rows) -> PyResult<Vec<(Complex64, usize)>> {
    let m = to_matrix(&operator)?;
    let e = eig(&m, is_hermitian(&m)).map_err(err)?;
    Ok(e.spectrum.eigenvalues.into_iter().zip(e.spectrum.multiplicities).collect())
}

/// Checks spec(Op) = ⊎_ρ deg ρ · spec(Op_ρ); returns `(pass, max_deviation)`.
#[pyfunction]
fn verify_spectral_decomposition(
    operator: Rows,
    group: &PyPermGroup,
    irreps: Vec<PyRef<'_, PyRepresentation>>,
) -> PyResult<(bool, f64)> {
    let op = to_matrix(&operator)?;
    let reps: Vec<symq::Representation> = irreps.iter().map(|r| r.inner.clone()).collect();
    let report = verify_decomposition(&op, &group.inner, &reps).map_err(err)?;
    Ok((report.pass, report.max_deviation))
}

fn subgroup(group: &PyPermGroup, words: Vec<Vec<String>>) -> PyResult<symq::Subgroup> {
    symq::Subgroup::from_words(&group.inner, &words).map_err(err)
}

/// Whether subgroups given by generator words meet every conjugacy class equally often.
#[pyfunction]
fn sunada(group: &PyPermGroup, h1: Vec<Vec<String>>, h2: Vec<Vec<String>>) -> PyResult<bool> {
    let (a, b) = (subgroup(group, h1)?, subgroup(group, h2)?);
    Ok(sunada_condition(&group.inner, &a, &b).map_err(err)?.holds)
}

/// Quotients of `operator` by the trivial representations of H1 and H2.
/// Returns `(verdict, pass, max_deviation)`.
#[pyfunction]
fn isospectral(
    operator: Rows,
    group: &PyPermGroup,
    h1: Vec<Vec<String>>,
    h2: Vec<Vec<String>>,
) -> PyResult<(String, bool, f64)> {
    let op = to_matrix(&operator)?;
    let (a, b) = (subgroup(group, h1)?, subgroup(group, h2)?);
    let (s1, s2) = (trivial_representation(a.group()), trivial_representation(b.group()));
    let pair = SubgroupPair::new(a, b, s1, s2).map_err(err)?;
    let r = certify_isospectral(&op, &group.inner, &pair).map_err(err)?;
    Ok((r.verdict, r.pass, r.max_deviation))
}

#[pymodule]
fn symq_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SymqError", m.py().get_type::<SymqError>())?;
    m.add_class::<PyPermGroup>()?;
    m.add_class::<PyRepresentation>()?;
    m.add_function(wrap_pyfunction!(quotient, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(verify_spectral_decomposition, m)?)?;
    m.add_function(wrap_pyfunction!(sunada, m)?)?;
    m.add_function(wrap_pyfunction!(isospectral, m)?)?;
    Ok(())
}
