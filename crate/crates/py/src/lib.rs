//! Python bindings. Matrices cross the boundary as nested lists of Python
//! numbers (complex or real), row-major; reports come back as plain dicts.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use semiradius::campaign::{self, CampaignConfig};
use semiradius::catalog::{self as cat, CheckOptions, OperandBundle, Outcome};
use semiradius::functionals;
use semiradius::{range, Complex64, ComplexMatrix, ComplexVector, Error, RadiusOptions, Tolerances};

create_exception!(semiradius, SemiradiusError, PyException);
create_exception!(semiradius, ParseError, SemiradiusError);
create_exception!(semiradius, MembershipError, SemiradiusError);
create_exception!(semiradius, PreconditionError, SemiradiusError);

fn py_err(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::Parse { .. } => ParseError::new_err(msg),
        Error::MembershipViolated { .. } | Error::NotInBA | Error::NotABounded => MembershipError::new_err(msg),
        Error::PreconditionFailed(_) => PreconditionError::new_err(msg),
        _ => SemiradiusError::new_err(msg),
    }
}

pub type Rows = Vec<Vec<Complex64>>;

/// Builds a matrix from rows, rejecting ragged input.
pub fn to_matrix(rows: &Rows) -> Result<ComplexMatrix, Error> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != m) {
        return Err(Error::DimensionMismatch {
            expected: format!("rows of length {m}"),
            found: format!("a row of length {}", bad.len()),
        });
    }
    Ok(ComplexMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

pub fn to_rows(m: &ComplexMatrix) -> Rows {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

fn to_vector(x: &[Complex64]) -> ComplexVector {
    ComplexVector::from_column_slice(x)
}

fn radius_options(grid: Option<usize>, gap: Option<f64>) -> Result<RadiusOptions, Error> {
    let mut o = RadiusOptions::default();
    if let Some(g) = grid {
        o.grid = g;
    }
    if let Some(g) = gap {
        o.gap = g;
    }
    o.validate()?;
    Ok(o)
}

/// A closed real interval with the method that produced it.
#[pyclass(frozen, skip_from_py_object, module = "semiradius")]
#[derive(Clone, Copy)]
pub struct Enclosure(semiradius::Enclosure);

#[pymethods]
impl Enclosure {
    #[getter]
    fn lo(&self) -> f64 {
        self.0.lo
    }

    #[getter]
    fn hi(&self) -> f64 {
        self.0.hi
    }

    #[getter]
    fn method(&self) -> String {
        serde_json::to_value(self.0.method)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default()
    }

    #[getter]
    fn gap(&self) -> f64 {
        self.0.gap()
    }

    #[getter]
    fn mid(&self) -> f64 {
        self.0.mid()
    }

    fn __contains__(&self, v: f64) -> bool {
        self.0.contains(v)
    }

    fn __repr__(&self) -> String {
        format!("Enclosure(lo={:e}, hi={:e}, method='{}')", self.0.lo, self.0.hi, self.method())
    }
}

/// `C^n` with the semi-inner product induced by a positive semidefinite `A`.
#[pyclass(frozen, module = "semiradius")]
pub struct SemiHilbertSpace(semiradius::SemiHilbertSpace);

impl SemiHilbertSpace {
    fn op(&self, t: &Rows) -> PyResult<semiradius::SemiOperator> {
        self.0.register(to_matrix(t).map_err(py_err)?).map_err(py_err)
    }
}

#[pymethods]
impl SemiHilbertSpace {
    #[new]
    #[pyo3(signature = (a, cutoff = 1e-10))]
    fn new(a: Rows, cutoff: f64) -> PyResult<Self> {
        let tol = Tolerances {
            cutoff,
            ..Tolerances::default()
        };
        let a = to_matrix(&a).map_err(py_err)?;
        semiradius::SemiHilbertSpace::new(&a, tol).map(Self).map_err(py_err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn rank(&self) -> usize {
        self.0.rank()
    }

    #[getter]
    fn cutoff(&self) -> f64 {
        self.0.cutoff()
    }

    fn a_inner(&self, x: Vec<Complex64>, y: Vec<Complex64>) -> PyResult<Complex64> {
        self.0.a_inner(&to_vector(&x), &to_vector(&y)).map_err(py_err)
    }

    fn a_norm(&self, x: Vec<Complex64>) -> PyResult<f64> {
        self.0.a_vec_norm(&to_vector(&x)).map_err(py_err)
    }

    fn admits_a_adjoint(&self, t: Rows) -> PyResult<bool> {
        self.0.admits_a_adjoint(&to_matrix(&t).map_err(py_err)?).map_err(py_err)
    }

    fn is_a_bounded(&self, t: Rows) -> PyResult<bool> {
        self.0.is_a_bounded(&to_matrix(&t).map_err(py_err)?).map_err(py_err)
    }

    fn is_a_selfadjoint(&self, t: Rows) -> PyResult<bool> {
        Ok(self.0.is_a_selfadjoint(&to_matrix(&t).map_err(py_err)?))
    }

    fn is_a_positive(&self, t: Rows) -> PyResult<bool> {
        Ok(self.0.is_a_positive(&to_matrix(&t).map_err(py_err)?))
    }

    /// The distinguished A-adjoint.
    fn sharp(&self, t: Rows) -> PyResult<Rows> {
        self.0.sharp(&self.op(&t)?).map(|m| to_rows(&m)).map_err(py_err)
    }

    /// The range-space representative `A^{1/2} T A^{+1/2}`.
    fn tilde(&self, t: Rows) -> PyResult<Rows> {
        self.0.tilde(&self.op(&t)?).map(|m| to_rows(&m)).map_err(py_err)
    }

    fn re_part(&self, t: Rows) -> PyResult<Rows> {
        self.0.re_part(&self.op(&t)?).map(|m| to_rows(&m)).map_err(py_err)
    }

    fn im_part(&self, t: Rows) -> PyResult<Rows> {
        self.0.im_part(&self.op(&t)?).map(|m| to_rows(&m)).map_err(py_err)
    }

    fn op_seminorm(&self, t: Rows) -> PyResult<Enclosure> {
        functionals::op_seminorm(&self.0, &self.op(&t)?).map(Enclosure).map_err(py_err)
    }

    #[pyo3(signature = (t, grid = None, gap = None))]
    fn numerical_radius(&self, t: Rows, grid: Option<usize>, gap: Option<f64>) -> PyResult<Enclosure> {
        let opts = radius_options(grid, gap).map_err(py_err)?;
        functionals::a_numerical_radius(&self.0, &self.op(&t)?, &opts).map(Enclosure).map_err(py_err)
    }

    #[pyo3(signature = (t, grid = None, gap = None))]
    fn crawford(&self, t: Rows, grid: Option<usize>, gap: Option<f64>) -> PyResult<Enclosure> {
        let opts = radius_options(grid, gap).map_err(py_err)?;
        functionals::crawford(&self.0, &self.op(&t)?, &opts).map(Enclosure).map_err(py_err)
    }

    #[pyo3(signature = (t, samples = 100_000, seed = 0))]
    fn mc_radius_lower(&self, t: Rows, samples: usize, seed: u64) -> PyResult<f64> {
        functionals::mc_radius_lower(&self.0, &self.op(&t)?, samples, seed).map_err(py_err)
    }

    #[pyo3(signature = (t, samples = 100_000, seed = 0))]
    fn mc_crawford_upper(&self, t: Rows, samples: usize, seed: u64) -> PyResult<f64> {
        functionals::mc_crawford_upper(&self.0, &self.op(&t)?, samples, seed).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("SemiHilbertSpace(dim={}, rank={})", self.0.dim(), self.0.rank())
    }
}

/// Euclidean numerical radius of a square matrix.
#[pyfunction]
#[pyo3(signature = (m, grid = None, gap = None))]
fn numerical_radius(m: Rows, grid: Option<usize>, gap: Option<f64>) -> PyResult<Enclosure> {
    let opts = radius_options(grid, gap).map_err(py_err)?;
    range::numerical_radius(&to_matrix(&m).map_err(py_err)?, &opts).map(Enclosure).map_err(py_err)
}

/// Euclidean Crawford number of a square matrix.
#[pyfunction]
#[pyo3(signature = (m, grid = None, gap = None))]
fn crawford_number(m: Rows, grid: Option<usize>, gap: Option<f64>) -> PyResult<Enclosure> {
    let opts = radius_options(grid, gap).map_err(py_err)?;
    range::crawford_number(&to_matrix(&m).map_err(py_err)?, &opts).map(Enclosure).map_err(py_err)
}

fn to_python<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| SemiradiusError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn outcomes_to_python<'py>(py: Python<'py>, outcomes: &[Outcome]) -> PyResult<Bound<'py, PyAny>> {
    let list = pyo3::types::PyList::empty(py);
    for o in outcomes {
        let item = match &o.result {
            Ok(r) => to_python(py, r)?,
            Err(e) => {
                let d = PyDict::new(py);
                d.set_item("id", o.id)?;
                let skipped = matches!(e, Error::PreconditionFailed(_));
                d.set_item("verdict", if skipped { "SKIPPED" } else { "ERROR" })?;
                d.set_item("note", e.to_string())?;
                d.into_any()
            }
        };
        list.append(item)?;
    }
    Ok(list.into_any())
}

/// The check catalog as a list of dicts.
#[pyfunction]
fn catalog(py: Python<'_>) -> PyResult<Bound<'_, PyAny>> {
    to_python(py, &cat::catalog())
}

/// Evaluates checks (all by default) on named operators and A-unit vectors.
#[pyfunction]
#[pyo3(signature = (space, operators, vectors = Vec::new(), checks = "all"))]
fn run_checks<'py>(
    py: Python<'py>,
    space: &SemiHilbertSpace,
    operators: BTreeMap<String, Rows>,
    vectors: Vec<Vec<Complex64>>,
    checks: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let bundle = OperandBundle {
        operators: operators
            .iter()
            .map(|(k, v)| Ok((k.clone(), to_matrix(v)?)))
            .collect::<Result<_, Error>>()
            .map_err(py_err)?,
        vectors: vectors.iter().map(|x| to_vector(x)).collect(),
    };
    let ids = cat::parse_check_ids(checks).map_err(py_err)?;
    let outcomes = cat::run_selected(&space.0, &ids, &bundle, &CheckOptions::default()).map_err(py_err)?;
    outcomes_to_python(py, &outcomes)
}

/// Re-evaluates every check on an instance file.
#[pyfunction]
fn verify_instance(py: Python<'_>, path: PathBuf) -> PyResult<Bound<'_, PyAny>> {
    let outcomes = campaign::verify_instance(&path).map_err(py_err)?;
    outcomes_to_python(py, &outcomes)
}

/// Runs a campaign. `config` holds campaign configuration keys; the
/// report comes back as a dict.
#[pyfunction]
#[pyo3(signature = (config = None, threads = 0))]
fn run_campaign<'py>(py: Python<'py>, config: Option<&Bound<'py, PyDict>>, threads: usize) -> PyResult<Bound<'py, PyAny>> {
    let config: CampaignConfig = match config {
        Some(d) => {
            let text: String = py.import("json")?.call_method1("dumps", (d,))?.extract()?;
            serde_json::from_str(&text).map_err(|e| SemiradiusError::new_err(format!("bad campaign config: {e}")))?
        }
        None => CampaignConfig::default(),
    };
    let report = py.detach(|| campaign::run_campaign(&config, threads)).map_err(py_err)?;
    to_python(py, &report)
}

#[pymodule]
#[pyo3(name = "semiradius")]
fn semiradius_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Enclosure>()?;
    m.add_class::<SemiHilbertSpace>()?;
    m.add_function(wrap_pyfunction!(numerical_radius, m)?)?;
    m.add_function(wrap_pyfunction!(crawford_number, m)?)?;
    m.add_function(wrap_pyfunction!(catalog, m)?)?;
    m.add_function(wrap_pyfunction!(run_checks, m)?)?;
    m.add_function(wrap_pyfunction!(verify_instance, m)?)?;
    m.add_function(wrap_pyfunction!(run_campaign, m)?)?;
    m.add("SemiradiusError", py.get_type::<SemiradiusError>())?;
    m.add("ParseError", py.get_type::<ParseError>())?;
    m.add("MembershipError", py.get_type::<MembershipError>())?;
    m.add("PreconditionError", py.get_type::<PreconditionError>())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use semiradius::linalg::c64;

    #[test]
    fn rows_round_trip() {
        let rows = vec![vec![c64(1.0, 2.0), c64(0.0, 0.0)], vec![c64(-1.0, 0.5), c64(3.0, 0.0)]];
        let m = to_matrix(&rows).unwrap();
        assert_eq!(m[(1, 0)], c64(-1.0, 0.5));
        assert_eq!(to_rows(&m), rows);
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let rows = vec![vec![c64(1.0, 0.0)], vec![c64(1.0, 0.0), c64(2.0, 0.0)]];
        assert!(matches!(to_matrix(&rows), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn radius_options_validate() {
        assert!(radius_options(Some(2), None).is_err());
        assert!(radius_options(None, Some(0.0)).is_err());
        assert_eq!(radius_options(Some(64), None).unwrap().grid, 64);
    }
}
