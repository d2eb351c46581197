//! Python bindings: density matrices, analysis, and the supporting bound
//! calculations. Structured results are returned as JSON strings.

use num_complex::Complex64;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use schmidt_bound::bounds::{self, AnalysisConfig, AnalysisInput, EngineChoice, SideChoice};
use schmidt_bound::fixtures;
use schmidt_bound::io::{density_to_json, load_state, parse_state};
use schmidt_bound::linalg::{CMatrix, ToleranceConfig};
use schmidt_bound::numeric::OptimizerConfig;
use schmidt_bound::state::{self, PureState};
use schmidt_bound::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyIOError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> PyResult<String> {
    serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn config(engine: &str, side: &str, starts: usize, seed: u64) -> PyResult<AnalysisConfig> {
    let engine = match engine {
        "auto" => EngineChoice::Auto,
        "numeric" => EngineChoice::Numeric,
        "symbolic" => EngineChoice::Symbolic,
        other => return Err(PyValueError::new_err(format!("unknown engine `{other}`"))),
    };
    let side = match side {
        "a" => SideChoice::A,
        "b" => SideChoice::B,
        "both" => SideChoice::Both,
        other => return Err(PyValueError::new_err(format!("unknown side `{other}`"))),
    };
    Ok(AnalysisConfig {
        engine,
        side,
        optimizer: OptimizerConfig {
            num_starts: starts,
            seed,
            ..OptimizerConfig::default()
        },
        tolerances: ToleranceConfig::default(),
    })
}

/// Validated bipartite density matrix.
#[pyclass(name = "DensityMatrix", frozen)]
struct PyDensityMatrix {
    inner: state::DensityMatrix,
    exact: Option<AnalysisInput>,
}

#[pymethods]
impl PyDensityMatrix {
    /// Row-major `mn x mn` entries.
    #[new]
    fn new(m: usize, n: usize, entries: Vec<Vec<Complex64>>) -> PyResult<Self> {
        let d = entries.len();
        if entries.iter().any(|r| r.len() != d) {
            return Err(PyValueError::new_err("matrix must be square"));
        }
        let mat = CMatrix::from_fn(d, d, |i, j| entries[i][j]);
        let inner =
            state::validate_density(mat, m, n, &ToleranceConfig::default()).map_err(py_err)?;
        Ok(Self { inner, exact: None })
    }

    /// Parses the JSON state-file format.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let tol = ToleranceConfig::default();
        let f = parse_state(text, &tol).map_err(py_err)?;
        let input = f.into_analysis_input(&tol).map_err(py_err)?;
        Ok(Self {
            inner: input.density().clone(),
            exact: input.is_exact().then_some(input),
        })
    }

    #[staticmethod]
    fn random_mixed(m: usize, n: usize, rank: usize, seed: u64) -> PyResult<Self> {
        let inner = state::random_mixed(m, n, rank, seed).map_err(py_err)?;
        Ok(Self { inner, exact: None })
    }

    /// A built-in example state such as `"example3"`.
    #[staticmethod]
    fn example(name: &str) -> PyResult<Self> {
        let text = fixtures::fixture_text(name)
            .ok_or_else(|| PyValueError::new_err(format!("unknown example `{name}`")))?;
        Self::from_json(text)
    }

    #[getter]
    fn dims(&self) -> (usize, usize) {
        (self.inner.dim_a(), self.inner.dim_b())
    }

    fn rank(&self) -> usize {
        self.inner.rank(&ToleranceConfig::default())
    }

    fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    fn entries(&self) -> Vec<Vec<Complex64>> {
        let m = self.inner.matrix();
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
            .collect()
    }

    /// `(is_ppt, min_eigenvalue)` of the partial transpose.
    fn ppt(&self) -> PyResult<(bool, f64)> {
        let r = state::ppt_check(&self.inner, &ToleranceConfig::default()).map_err(py_err)?;
        Ok((r.is_ppt, r.min_eigenvalue))
    }

    /// Full analysis report as JSON.
    #[pyo3(signature = (engine = "auto", side = "both", starts = 64, seed = 0))]
    fn analyze(
        &self,
        py: Python<'_>,
        engine: &str,
        side: &str,
        starts: usize,
        seed: u64,
    ) -> PyResult<String> {
        let cfg = config(engine, side, starts, seed)?;
        let input = self
            .exact
            .clone()
            .unwrap_or_else(|| AnalysisInput::from_density(self.inner.clone()));
        let report = py
            .detach(|| bounds::analyze(&input, &cfg))
            .map_err(py_err)?;
        to_json(&report)
    }

    fn to_json(&self) -> String {
        density_to_json(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "DensityMatrix(m={}, n={}, rank={})",
            self.inner.dim_a(),
            self.inner.dim_b(),
            self.rank()
        )
    }
}

/// Schmidt rank of the pure state with the given `m x n` coefficients
/// (normalized first).
#[pyfunction]
fn schmidt_rank(coefficients: Vec<Vec<Complex64>>) -> PyResult<usize> {
    let m = coefficients.len();
    let n = coefficients.first().map_or(0, Vec::len);
    if m == 0 || coefficients.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err(
            "coefficients must be a non-empty rectangular matrix",
        ));
    }
    let v =
        PureState::normalized(CMatrix::from_fn(m, n, |i, j| coefficients[i][j])).map_err(py_err)?;
    Ok(state::schmidt_rank(&v, &ToleranceConfig::default()))
}

/// `ceil(dim / (rank - h))`, 1 for `h = -1`.
#[pyfunction]
fn schmidt_lower_bound(dim: usize, rank: usize, h: i64) -> usize {
    bounds::schmidt_lower_bound(dim, rank, h).value
}

#[pyfunction]
fn theorem2_bound(m: usize, n: usize, rank: usize) -> PyResult<String> {
    to_json(&bounds::theorem2_bound(m, n, rank).map_err(py_err)?)
}

#[pyfunction]
fn verify_example5(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> PyResult<bool> {
    Ok(bounds::verify_example5(a, b, c, d).map_err(py_err)?.pass)
}

/// Analyzes a state file and returns the report as JSON.
#[pyfunction]
#[pyo3(signature = (path, engine = "auto", side = "both", starts = 64, seed = 0))]
fn analyze_file(
    py: Python<'_>,
    path: &str,
    engine: &str,
    side: &str,
    starts: usize,
    seed: u64,
) -> PyResult<String> {
    let cfg = config(engine, side, starts, seed)?;
    let report = py
        .detach(|| {
            let input = load_state(path, &cfg.tolerances)?.into_analysis_input(&cfg.tolerances)?;
            bounds::analyze(&input, &cfg)
        })
        .map_err(py_err)?;
    to_json(&report)
}

/// `(pass, expected, obtained)` for a named built-in fixture.
#[pyfunction]
#[pyo3(signature = (name, seed = 0))]
fn run_fixture(py: Python<'_>, name: &str, seed: u64) -> PyResult<(bool, String, String)> {
    let cfg = config("auto", "both", OptimizerConfig::default().num_starts, seed)?;
    let o = py
        .detach(|| fixtures::run_fixture(name, &cfg))
        .map_err(py_err)?;
    Ok((o.pass, o.expected, o.obtained))
}

#[pymodule]
fn schmidt_bound_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDensityMatrix>()?;
    m.add_function(wrap_pyfunction!(schmidt_rank, m)?)?;
    m.add_function(wrap_pyfunction!(schmidt_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(theorem2_bound, m)?)?;
    m.add_function(wrap_pyfunction!(verify_example5, m)?)?;
    m.add_function(wrap_pyfunction!(analyze_file, m)?)?;
    m.add_function(wrap_pyfunction!(run_fixture, m)?)?;
    m.add("FIXTURES", fixtures::FIXTURE_NAMES.to_vec())?;
    Ok(())
}
