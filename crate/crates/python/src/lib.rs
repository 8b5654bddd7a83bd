use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use serde_json::Value;

use twistorkit::deformation::{semicontinuity_scan, splitting_stability_scan};
use twistorkit::hypercomplex::{verify_suite, Structure, TwistorData};
use twistorkit::json as tj;
use twistorkit::quaternionic::{check_quaternionic, QuaternionicData, SectionAB};
use twistorkit::twistor::standard_flat;
use twistorkit::{rng, BundleCP1, Error, Exact, Float, Matrix, Scalar};

create_exception!(twistorkit, TwistorkitError, PyException);

fn err(e: Error) -> PyErr {
    TwistorkitError::new_err(format!("{e:?}: {e}"))
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (v.to_string(),))
}

fn matrix_from_rows(rows: Vec<Vec<Complex64>>) -> PyResult<Matrix<Float>> {
    Matrix::from_rows(rows).map_err(err)
}

fn structure(name: &str) -> PyResult<Structure> {
    match name {
        "I" => Ok(Structure::I),
        "J" => Ok(Structure::J),
        "K" => Ok(Structure::K),
        other => Err(PyValueError::new_err(format!("structure must be I, J or K, got {other:?}"))),
    }
}

fn exact_literal(s: &str) -> PyResult<Exact> {
    tj::parse_scalar_literal::<Exact>(s).ok_or_else(|| PyValueError::new_err(format!("bad scalar literal {s:?}")))
}

/// Holomorphic vector bundle on CP1 over the exact backend.
#[pyclass(name = "Bundle", module = "twistorkit", frozen)]
struct PyBundle {
    inner: BundleCP1<Exact>,
}

#[pymethods]
impl PyBundle {
    #[staticmethod]
    fn line_sum(degrees: Vec<i64>) -> PyResult<Self> {
        Ok(PyBundle { inner: BundleCP1::line_sum(&degrees).map_err(err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let doc = tj::parse_document::<Exact>(text).map_err(err)?;
        Ok(PyBundle { inner: tj::decode_bundle(&doc).map_err(err)? })
    }

    fn to_json(&self) -> String {
        tj::encode_bundle(&self.inner).to_string()
    }

    #[getter]
    fn rank(&self) -> usize {
        self.inner.rank()
    }

    #[getter]
    fn winding(&self) -> i64 {
        self.inner.winding()
    }

    fn twist(&self, m: i64) -> Self {
        PyBundle { inner: self.inner.twist(m) }
    }

    fn h0(&self) -> PyResult<usize> {
        self.inner.h0().map_err(err)
    }

    fn h1(&self) -> PyResult<usize> {
        self.inner.h1().map_err(err)
    }

    fn splitting(&self) -> PyResult<Vec<i64>> {
        Ok(self.inner.splitting_type().map_err(err)?.degrees)
    }

    fn cohomology<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let c = self.inner.cohomology().map_err(err)?;
        to_py(py, &serde_json::to_value(&c).expect("serializable"))
    }

    fn __repr__(&self) -> String {
        format!("Bundle(rank={}, winding={})", self.inner.rank(), self.inner.winding())
    }
}

/// Quaternionic matrix A (A·conj(A) = -I) on the float backend.
#[pyclass(name = "QuaternionicStructure", module = "twistorkit", frozen)]
struct PyQuaternionic {
    inner: QuaternionicData<Float>,
}

#[pymethods]
impl PyQuaternionic {
    #[new]
    fn new(matrix: Vec<Vec<Complex64>>) -> PyResult<Self> {
        Ok(PyQuaternionic { inner: check_quaternionic(matrix_from_rows(matrix)?).map_err(err)? })
    }

    #[staticmethod]
    fn flat(n: usize) -> Self {
        PyQuaternionic { inner: twistorkit::twistor::quaternionic_from_tau(n) }
    }

    #[getter]
    fn matrix(&self) -> Vec<Vec<Complex64>> {
        self.inner.matrix().to_rows()
    }

    fn j(&self, x: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
        self.inner.apply_j(&x).map_err(err)
    }

    fn induced_r(&self, a: Vec<Complex64>, b: Vec<Complex64>) -> PyResult<(Vec<Complex64>, Vec<Complex64>)> {
        let r = self.inner.induced_r(&SectionAB::new(a, b).map_err(err)?).map_err(err)?;
        Ok((r.a, r.b))
    }

    fn is_real_section(&self, a: Vec<Complex64>, b: Vec<Complex64>) -> PyResult<bool> {
        self.inner.is_real_section(&SectionAB::new(a, b).map_err(err)?).map_err(err)
    }

    fn change_trivialization(&self, p: Vec<Vec<Complex64>>) -> PyResult<Self> {
        Ok(PyQuaternionic { inner: self.inner.change_trivialization(&matrix_from_rows(p)?).map_err(err)? })
    }

    fn real_section_dimension(&self) -> usize {
        self.inner.real_section_dimension()
    }
}

/// Twistor data (A, Ω) with the recovered hypercomplex structure and metric.
#[pyclass(name = "TwistorData", module = "twistorkit", frozen)]
struct PyTwistorData {
    inner: TwistorData<Float>,
}

#[pymethods]
impl PyTwistorData {
    #[new]
    fn new(a: Vec<Vec<Complex64>>, omega_raw: Vec<Vec<Complex64>>) -> PyResult<Self> {
        let q = check_quaternionic(matrix_from_rows(a)?).map_err(err)?;
        Ok(PyTwistorData { inner: TwistorData::new(q, &matrix_from_rows(omega_raw)?).map_err(err)? })
    }

    #[staticmethod]
    fn flat(n: usize) -> PyResult<Self> {
        Ok(PyTwistorData { inner: TwistorData::flat(n).map_err(err)? })
    }

    #[getter]
    fn mu(&self) -> Complex64 {
        self.inner.mu
    }

    #[getter]
    fn omega(&self) -> Vec<Vec<Complex64>> {
        self.inner.omega.to_rows()
    }

    fn metric(&self, a: Vec<Complex64>, b: Vec<Complex64>) -> PyResult<f64> {
        Ok(self.inner.metric(&a, &b).map_err(err)?.re)
    }

    fn apply(&self, which: &str, a: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
        self.inner.apply_structure(structure(which)?, &a).map_err(err)
    }

    fn kahler(&self, which: &str, a: Vec<Complex64>, b: Vec<Complex64>) -> PyResult<Complex64> {
        self.inner.kahler(structure(which)?, &a, &b).map_err(err)
    }

    fn kahler_via_psi(&self, which: &str, a: Vec<Complex64>, b: Vec<Complex64>) -> PyResult<Complex64> {
        self.inner.kahler_via_psi(structure(which)?, &a, &b).map_err(err)
    }

    fn tangent_cs(&self, alpha: Complex64, beta: Complex64, a: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
        self.inner.tangent_cs(&alpha, &beta, &a).map_err(err)
    }

    fn metric_gram(&self) -> PyResult<Vec<Vec<f64>>> {
        Ok(self.inner.metric_gram().map_err(err)?.to_rows().into_iter().map(|r| r.iter().map(|x| x.re).collect()).collect())
    }

    #[pyo3(signature = (samples = 100, seed = 7))]
    fn verify<'py>(&self, py: Python<'py>, samples: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
        let rep = verify_suite(&self.inner, samples, seed);
        to_py(py, &serde_json::to_value(&rep).expect("serializable"))
    }
}

/// Flat twistor data document (exact literals) as a JSON string.
#[pyfunction]
fn twistor_build(n: usize) -> PyResult<String> {
    Ok(tj::encode_flat_data::<Exact>(n).map_err(err)?.to_string())
}

/// Max residuals of the flat model's quaternion and metric relations.
#[pyfunction]
fn twistor_invariants(n: usize) -> Vec<(String, f64)> {
    standard_flat::<Exact>(n).invariant_residuals().into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// Exact recovery on the flat model: verify suite, metric Gram and
/// normal-bundle stability of random sections.
#[pyfunction]
#[pyo3(signature = (n = 1, seed = 7, samples = 20))]
fn roundtrip<'py>(py: Python<'py>, n: usize, seed: u64, samples: usize) -> PyResult<Bound<'py, PyAny>> {
    let data = TwistorData::<Exact>::flat(n).map_err(err)?;
    let rep = verify_suite(&data, samples, seed);
    let gram = data.metric_gram().map_err(err)?;
    let gram_ok = gram == Matrix::identity(gram.rows()).scale(&Exact::from_i64(2));
    let mut g = rng::seeded(seed);
    let sections: Vec<SectionAB<Exact>> = (0..samples.max(1))
        .map(|_| SectionAB::new(rng::vector(&mut g, 2 * n), rng::vector(&mut g, 2 * n)).expect("even"))
        .collect();
    let st = splitting_stability_scan(n, &sections).map_err(err)?;
    let passed = rep.passed && gram_ok && st.all_ones && st.correction_zero;
    let v = serde_json::json!({
        "passed": passed,
        "verify": rep,
        "stability": st,
        "metric_gram": tj::encode_matrix(&gram),
        "metric_gram_is_2re": gram_ok,
    });
    to_py(py, &v)
}

/// Semicontinuity scan of a family document at a special point and samples
/// (scalar literals such as "0", "i", "1/2").
#[pyfunction]
#[pyo3(signature = (family_json, special, samples, twist = 0))]
fn deform_scan<'py>(
    py: Python<'py>,
    family_json: &str,
    special: Vec<String>,
    samples: Vec<Vec<String>>,
    twist: i64,
) -> PyResult<Bound<'py, PyAny>> {
    let doc = tj::parse_document::<Exact>(family_json).map_err(err)?;
    let f = tj::decode_family::<Exact>(&doc).map_err(err)?;
    let sp = special.iter().map(|s| exact_literal(s)).collect::<PyResult<Vec<_>>>()?;
    let ts = samples
        .iter()
        .map(|t| t.iter().map(|s| exact_literal(s)).collect::<PyResult<Vec<_>>>())
        .collect::<PyResult<Vec<_>>>()?;
    let rep = semicontinuity_scan(&f, &sp, &ts, twist).map_err(err)?;
    to_py(py, &serde_json::to_value(&rep).expect("serializable"))
}

#[pymodule]
#[pyo3(name = "twistorkit")]
fn twistorkit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("TwistorkitError", m.py().get_type::<TwistorkitError>())?;
    m.add("SCHEMA", tj::SCHEMA)?;
    m.add_class::<PyBundle>()?;
    m.add_class::<PyQuaternionic>()?;
    m.add_class::<PyTwistorData>()?;
    m.add_function(wrap_pyfunction!(twistor_build, m)?)?;
    m.add_function(wrap_pyfunction!(twistor_invariants, m)?)?;
    m.add_function(wrap_pyfunction!(roundtrip, m)?)?;
    m.add_function(wrap_pyfunction!(deform_scan, m)?)?;
    Ok(())
}
