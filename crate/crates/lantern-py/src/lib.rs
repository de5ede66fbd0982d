//! Python bindings. Structured results come back as plain dicts and lists through `json`;
//! rationals map to `fractions.Fraction` and big integers to Python ints.

use num_bigint::BigInt;
use num_rational::BigRational;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyString;

use lantern::contact::{self, FillingData, HypothesisSet, LegendrianKnotData};
use lantern::graph::{consistency_check, graph_from_model};
use lantern::kirby::{self, FramedDiagram};
use lantern::matrix::{self, SymMatrix};
use lantern::{oracle, parse, rewrite, words};

create_exception!(lantern_py, LanternError, PyValueError);

fn err(e: lantern::Error) -> PyErr {
    LanternError::new_err(e.to_string())
}

fn to_py<'py, T: serde::Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn sym(rows: Vec<Vec<BigInt>>) -> PyResult<SymMatrix> {
    SymMatrix::new(rows).map_err(err)
}

/// A word in Dehn twists on the sphere with n+1 holes, parsed from text such as "d1 g3^-2 t{1,3}".
#[pyclass(name = "TwistWord", module = "lantern_py", frozen)]
struct PyTwistWord(words::TwistWord);

#[pymethods]
impl PyTwistWord {
    #[new]
    fn new(text: &str, n: u32) -> PyResult<Self> {
        parse::parse_twist_word(text, n)
            .map(PyTwistWord)
            .map_err(err)
    }

    #[getter]
    fn n(&self) -> u32 {
        self.0.n()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("TwistWord({:?}, n={})", self.0.to_string(), self.0.n())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }

    fn inverse(&self) -> Self {
        PyTwistWord(self.0.inverse())
    }

    /// Same mapping class, decided by the free-group action.
    fn equals(&self, other: &Self) -> PyResult<bool> {
        oracle::words_equal(&self.0, &other.0).map_err(err)
    }

    fn factorize(&self) -> PyResult<PyFactorization> {
        rewrite::factorize(&self.0)
            .map(PyFactorization)
            .map_err(err)
    }

    /// Loop images and arc prefixes of the action on the free group.
    fn action<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &oracle::word_to_action(&self.0).map_err(err)?)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.0)
    }
}

/// Π δᵢ^{nᵢ} · Π γⱼ^{mⱼ} · tail, with every tail letter left-handed.
#[pyclass(name = "Factorization", module = "lantern_py", frozen)]
struct PyFactorization(rewrite::Factorization);

#[pymethods]
impl PyFactorization {
    #[getter]
    fn deltas(&self) -> Vec<u64> {
        self.0.delta_exponents().values().copied().collect()
    }

    #[getter]
    fn gammas(&self) -> Vec<u64> {
        self.0.gamma_exponents().values().copied().collect()
    }

    #[getter]
    fn tail(&self) -> PyTwistWord {
        PyTwistWord(self.0.tail().clone())
    }

    fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    fn reassemble(&self) -> PyTwistWord {
        PyTwistWord(self.0.reassemble())
    }

    fn verify_against(&self, word: &PyTwistWord) -> PyResult<bool> {
        self.0.verify_against(&word.0).map_err(err)
    }

    /// The chain-form model of the surgery diagram (positive factorizations only).
    fn model(&self) -> PyResult<PyModelDiagram> {
        let d = kirby::diagram_from_factorization(&self.0).map_err(err)?;
        kirby::chain_slide(&d).map(PyModelDiagram).map_err(err)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.0)
    }

    fn __repr__(&self) -> String {
        format!("Factorization({})", self.0.reassemble())
    }
}

/// Z(n; p₁…pₙ₋₁; q₁…qₙ).
#[pyclass(name = "ModelDiagram", module = "lantern_py", frozen)]
struct PyModelDiagram(kirby::ModelDiagram);

#[pymethods]
impl PyModelDiagram {
    #[new]
    fn new(p: Vec<u32>, q: Vec<u32>) -> PyResult<Self> {
        kirby::ModelDiagram::new(p, q)
            .map(PyModelDiagram)
            .map_err(err)
    }

    #[getter]
    fn n(&self) -> u32 {
        self.0.n()
    }

    #[getter]
    fn p(&self) -> Vec<u32> {
        self.0.p().to_vec()
    }

    #[getter]
    fn q(&self) -> Vec<u32> {
        self.0.q().to_vec()
    }

    fn __repr__(&self) -> String {
        format!("ModelDiagram(p={:?}, q={:?})", self.0.p(), self.0.q())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }

    /// {"components": [...], "matrix": [[...]]}
    fn linking_matrix<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &kirby::linking_matrix(&self.0))
    }

    fn determinant(&self) -> BigInt {
        kirby::linking_matrix(&self.0).matrix().det()
    }

    fn lspace_certificate<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &kirby::lspace_certificate(&self.0).map_err(err)?)
    }

    fn consistency<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &consistency_check(&self.0))
    }

    fn graph<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &graph_from_model(&self.0))
    }

    fn dot(&self) -> String {
        graph_from_model(&self.0).to_dot()
    }
}

#[pyfunction]
fn parse_twist_word(text: &str, n: u32) -> PyResult<PyTwistWord> {
    PyTwistWord::new(text, n)
}

#[pyfunction]
fn lantern_step(word: &PyTwistWord) -> PyResult<PyTwistWord> {
    let [t] = word.0.letters() else {
        return Err(PyValueError::new_err(
            "lantern_step takes a one-letter word",
        ));
    };
    let six = rewrite::lantern_step(t).map_err(err)?;
    words::TwistWord::new(word.0.surface(), six.to_vec())
        .map(PyTwistWord)
        .map_err(err)
}

/// det, signature and inertia of a symmetric integer matrix.
#[pyfunction]
fn form_invariants<'py>(py: Python<'py>, rows: Vec<Vec<BigInt>>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &sym(rows)?.invariants())
}

#[pyfunction]
fn is_diagonalizable_over_integers(rows: Vec<Vec<BigInt>>) -> PyResult<bool> {
    matrix::is_diagonalizable_over_integers(&sym(rows)?).map_err(err)
}

#[pyfunction]
fn blow_down(rows: Vec<Vec<BigInt>>, k: usize) -> PyResult<Vec<Vec<BigInt>>> {
    let d = kirby::blow_down(&FramedDiagram::anonymous(sym(rows)?), k).map_err(err)?;
    Ok(d.matrix().rows())
}

#[pyfunction]
fn c1_squared(rows: Vec<Vec<BigInt>>, rot: Vec<BigInt>) -> PyResult<BigRational> {
    contact::c1_squared(&sym(rows)?, &rot).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (rows, rot, chi, sigma=None))]
fn d3_from_filling(
    rows: Vec<Vec<BigInt>>,
    rot: Vec<BigInt>,
    chi: i64,
    sigma: Option<i64>,
) -> PyResult<BigRational> {
    let q = sym(rows)?;
    let sigma = sigma.unwrap_or_else(|| q.invariants().signature);
    let f = FillingData::new(q, rot, chi, sigma).map_err(err)?;
    contact::d3_from_filling(&f).map_err(err)
}

/// d₃ after contact (−1)-surgery on a Legendrian knot in S³.
#[pyfunction]
fn legendrian_d3(tb: i64, rot: i64) -> PyResult<BigRational> {
    let k = LegendrianKnotData::new(tb, rot).map_err(err)?;
    let f = contact::legendrian_surgery_presentation(k).map_err(err)?;
    contact::d3_from_filling(&f).map_err(err)
}

/// Accepts a JSON string or a dict following the hypothesis schema.
#[pyfunction]
fn obstruction_report<'py>(
    py: Python<'py>,
    hypotheses: &Bound<'py, PyAny>,
) -> PyResult<Bound<'py, PyAny>> {
    let text: String = if hypotheses.is_instance_of::<PyString>() {
        hypotheses.extract()?
    } else {
        py.import("json")?
            .call_method1("dumps", (hypotheses,))?
            .extract()?
    };
    let h: HypothesisSet =
        serde_json::from_str(&text).map_err(|e| LanternError::new_err(e.to_string()))?;
    to_py(py, &contact::obstruction_report(&h).map_err(err)?)
}

#[pymodule]
fn lantern_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("LanternError", m.py().get_type::<LanternError>())?;
    m.add_class::<PyTwistWord>()?;
    m.add_class::<PyFactorization>()?;
    m.add_class::<PyModelDiagram>()?;
    m.add_function(wrap_pyfunction!(parse_twist_word, m)?)?;
    m.add_function(wrap_pyfunction!(lantern_step, m)?)?;
    m.add_function(wrap_pyfunction!(form_invariants, m)?)?;
    m.add_function(wrap_pyfunction!(is_diagonalizable_over_integers, m)?)?;
    m.add_function(wrap_pyfunction!(blow_down, m)?)?;
    m.add_function(wrap_pyfunction!(c1_squared, m)?)?;
    m.add_function(wrap_pyfunction!(d3_from_filling, m)?)?;
    m.add_function(wrap_pyfunction!(legendrian_d3, m)?)?;
    m.add_function(wrap_pyfunction!(obstruction_report, m)?)?;
    Ok(())
}
