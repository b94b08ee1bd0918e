//! Python bindings for the ugm-map library: hypergraphs, multilinear
//! objectives, LP relaxations, image restoration, and LDPC decoding.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use ugm_map::hypergraph::{Clique, Edge, Hypergraph};
use ugm_map::ldpc::{decode, gallager_parity_check, DecodeMethod, LdpcCode};
use ugm_map::lp::{solve_binary_ip, solve_lp, write_lp_text};
use ugm_map::objective::MultilinearObjective;
use ugm_map::relax::RelaxationKind;
use ugm_map::restore::{
    apply_bit_flip_noise, generate_synthetic_image, restore, BitImage as CoreImage,
    PatternPotentials, RestoreMethod, SyntheticKind,
};

fn value_err(msg: impl ToString) -> PyErr {
    PyValueError::new_err(msg.to_string())
}

fn parse_relaxation(name: &str) -> PyResult<RelaxationKind> {
    match name {
        "stdLP" => Ok(RelaxationKind::Standard),
        "flLP" => Ok(RelaxationKind::Flower),
        "runLP" => Ok(RelaxationKind::RunningIntersection),
        "cliqueLP" => Ok(RelaxationKind::Clique),
        "McliqueLP" => Ok(RelaxationKind::MultiClique(4)),
        _ => Err(value_err(format!("unknown relaxation `{name}`"))),
    }
}

/// A binary image; also used as a plain bit vector (height 1).
#[pyclass(name = "BitImage", from_py_object)]
#[derive(Clone)]
struct PyBitImage {
    inner: CoreImage,
}

#[pymethods]
impl PyBitImage {
    #[new]
    fn new(width: usize, height: usize) -> Self {
        PyBitImage {
            inner: CoreImage::new(width, height),
        }
    }

    /// Synthetic test image; kind is "TL", "CEN", or "CROSS".
    #[staticmethod]
    fn synthetic(kind: &str, width: usize, height: usize) -> PyResult<Self> {
        let kind = SyntheticKind::parse(kind)
            .ok_or_else(|| value_err(format!("unknown kind `{kind}`")))?;
        Ok(PyBitImage {
            inner: generate_synthetic_image(kind, width, height),
        })
    }

    #[staticmethod]
    fn from_pbm(text: &str) -> PyResult<Self> {
        Ok(PyBitImage {
            inner: CoreImage::from_pbm(text).map_err(value_err)?,
        })
    }

    fn to_pbm(&self) -> String {
        self.inner.to_pbm()
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    fn get(&self, x: usize, y: usize) -> bool {
        self.inner.get(x, y)
    }

    fn set(&mut self, x: usize, y: usize, value: bool) {
        self.inner.set(x, y, value);
    }

    fn pixels(&self) -> Vec<bool> {
        self.inner.pixels().to_vec()
    }

    /// Independent bit flips with probability p, seeded.
    fn with_noise(&self, p: f64, seed: u64) -> Self {
        PyBitImage {
            inner: apply_bit_flip_noise(&self.inner, p, seed),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "BitImage({}x{}, {} ones)",
            self.inner.width(),
            self.inner.height(),
            self.inner.pixels().iter().filter(|&&b| b).count()
        )
    }
}

/// A UGM hypergraph with a multilinear objective attached.
#[pyclass(name = "Model")]
struct PyModel {
    h: Hypergraph,
    obj: MultilinearObjective,
}

#[pymethods]
impl PyModel {
    /// Builds the hypergraph of the given maximal cliques; node and
    /// edge coefficients start at zero.
    #[new]
    fn new(cliques: Vec<Vec<usize>>, node_count: usize) -> PyResult<Self> {
        let cliques: Vec<Clique> = cliques.into_iter().map(Clique::new).collect();
        let h = Hypergraph::build(cliques, node_count).map_err(value_err)?;
        let obj = MultilinearObjective::new(node_count, 1.0);
        Ok(PyModel { h, obj })
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.h.node_count()
    }

    #[getter]
    fn rank(&self) -> usize {
        self.h.rank()
    }

    fn edges(&self) -> Vec<Vec<usize>> {
        self.h.edges().iter().map(|e| e.nodes().to_vec()).collect()
    }

    fn add_node_coeff(&mut self, node: usize, coeff: f64) {
        self.obj.add_node(node, coeff);
    }

    fn add_edge_coeff(&mut self, nodes: Vec<usize>, coeff: f64) -> PyResult<()> {
        if nodes.len() < 2 {
            return Err(value_err("an edge needs at least two nodes"));
        }
        self.obj.add_edge(Edge::new(nodes), coeff);
        Ok(())
    }

    /// Objective value of a full binary assignment.
    fn evaluate(&self, assignment: Vec<bool>) -> PyResult<f64> {
        if assignment.len() != self.h.node_count() {
            return Err(value_err("assignment length must match node count"));
        }
        Ok(self.obj.evaluate(&assignment))
    }

    /// Solves one LP relaxation; returns (value, node_solution, is_binary).
    fn solve_relaxation(&self, method: &str) -> PyResult<(f64, Vec<f64>, bool)> {
        let kind = parse_relaxation(method)?;
        let lp = ugm_map::relax::build_relaxation(&self.h, kind, &self.obj);
        let r = solve_lp(&lp);
        Ok((
            r.objective_value,
            r.solution[..self.h.node_count()].to_vec(),
            r.is_binary,
        ))
    }

    /// Exact maximization by branch and bound over the clique
    /// relaxation; returns (value, assignment).
    fn solve_exact(&self) -> PyResult<(f64, Vec<bool>)> {
        let lp = ugm_map::relax::build_relaxation(&self.h, RelaxationKind::Clique, &self.obj);
        let binaries: Vec<usize> = (0..self.h.node_count()).collect();
        let r = solve_binary_ip(&lp, &binaries);
        if !r.proven_optimal {
            return Err(value_err("node budget exhausted before optimality"));
        }
        let bits: Vec<bool> = r.solution[..self.h.node_count()]
            .iter()
            .map(|&x| x > 0.5)
            .collect();
        Ok((self.obj.evaluate(&bits), bits))
    }

    /// Brute-force optimum (instances up to 25 nodes).
    fn brute_force(&self) -> PyResult<(f64, Vec<Vec<bool>>)> {
        let r = ugm_map::oracle::brute_force_map(&self.h, &self.obj).map_err(value_err)?;
        Ok((r.optimum, r.optima))
    }

    /// The relaxation's constraint system in LP text format.
    fn export_lp(&self, method: &str) -> PyResult<String> {
        let kind = parse_relaxation(method)?;
        let lp = ugm_map::relax::build_relaxation(&self.h, kind, &self.obj);
        Ok(write_lp_text(&lp))
    }
}

/// A Gallager low-density parity-check code.
#[pyclass(name = "LdpcCode")]
struct PyLdpcCode {
    inner: LdpcCode,
}

#[pymethods]
impl PyLdpcCode {
    /// Gallager (n, beta, gamma) construction with the given seed.
    #[new]
    fn new(n: usize, beta: usize, gamma: usize, seed: u64) -> PyResult<Self> {
        Ok(PyLdpcCode {
            inner: gallager_parity_check(n, beta, gamma, seed).map_err(value_err)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn num_checks(&self) -> usize {
        self.inner.parity_rows.len()
    }

    fn parity_rows(&self) -> Vec<Vec<usize>> {
        self.inner
            .parity_rows
            .iter()
            .map(|c| c.nodes().to_vec())
            .collect()
    }

    fn is_codeword(&self, word: Vec<bool>) -> PyResult<bool> {
        if word.len() != self.inner.n {
            return Err(value_err("word length must match the code length"));
        }
        Ok(self.inner.is_codeword(&word))
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    /// Decodes an observed word; method is one of parLP, cliqueLP,
    /// McliqueLP, stdLP, flLP, runLP, IP. Returns a dict with keys
    /// value, decoded, is_binary, partial_recovery.
    fn decode<'py>(
        &self,
        py: Python<'py>,
        observed: Vec<bool>,
        method: &str,
    ) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
        let method = DecodeMethod::parse(method)
            .ok_or_else(|| value_err(format!("unknown method `{method}`")))?;
        if observed.len() != self.inner.n {
            return Err(value_err("word length must match the code length"));
        }
        let r = decode(&self.inner, &observed, method).map_err(value_err)?;
        let out = pyo3::types::PyDict::new(py);
        out.set_item("value", r.lp_value)?;
        out.set_item("decoded", r.decoded)?;
        out.set_item("is_binary", r.is_binary)?;
        out.set_item("partial_recovery", r.partial_recovery)?;
        Ok(out)
    }
}

/// Restores a noisy binary image; method is one of stdLP, flLP, runLP,
/// cliqueLP, McliqueLP, IP. Returns a dict with keys restored, value,
/// is_binary, and (when truth is given) partial_recovery.
#[pyfunction]
#[pyo3(signature = (noisy, alpha, phi, method, truth=None))]
fn restore_image<'py>(
    py: Python<'py>,
    noisy: &PyBitImage,
    alpha: f64,
    phi: [f64; 4],
    method: &str,
    truth: Option<&PyBitImage>,
) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    let method = if method == "IP" {
        RestoreMethod::Ip
    } else {
        RestoreMethod::Lp(parse_relaxation(method)?)
    };
    let phi = PatternPotentials::new(phi);
    let result = restore(
        &noisy.inner,
        alpha,
        &phi,
        method,
        truth.map(|t| &t.inner),
        None,
    );
    let out = pyo3::types::PyDict::new(py);
    out.set_item(
        "restored",
        PyBitImage {
            inner: result.restored,
        }
        .into_pyobject(py)?,
    )?;
    out.set_item("value", result.total_value)?;
    out.set_item("is_binary", result.is_binary)?;
    out.set_item("partial_recovery", result.partial_recovery)?;
    Ok(out)
}

/// Runs a full experiment from a flat `key = value` config document;
/// returns (csv, summary).
#[pyfunction]
fn run_experiment_text(config: &str) -> PyResult<(String, String)> {
    let cfg = ugm_map::experiment::ExperimentConfig::from_text(config).map_err(value_err)?;
    let out = ugm_map::experiment::run_experiment(&cfg).map_err(value_err)?;
    Ok((out.csv, out.summary))
}

/// Aggregates an experiment CSV into `method,p,mean,stderr` rows for
/// one metric (r_g, tightness, recovery, or time).
#[pyfunction]
fn aggregate_csv(csv: &str, metric: &str) -> PyResult<String> {
    ugm_map::experiment::plot_data(csv, metric).map_err(value_err)
}

#[pymodule]
fn ugm_map_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBitImage>()?;
    m.add_class::<PyModel>()?;
    m.add_class::<PyLdpcCode>()?;
    m.add_function(wrap_pyfunction!(restore_image, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment_text, m)?)?;
    m.add_function(wrap_pyfunction!(aggregate_csv, m)?)?;
    Ok(())
}
