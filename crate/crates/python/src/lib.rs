//! Python bindings: formulas, partitions, proof checking, compilation to
//! monotone circuits and the random-formula statistics.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde::Serialize;
use serde_json::Value;

use cutwork_core::circuit::{
    compile_cc_refutation, extract_cc2_refutation, lines_from_resolution, parse_circuit, verify_separation,
    write_circuit, MonotoneCircuit,
};
use cutwork_core::cnf::{self, Assignment};
use cutwork_core::cp::{check_cp_proof, parse_proof_lines, resolution_refutation_from_dpll, CpProof};
use cutwork_core::csp::{self, JuknaParams};
use cutwork_core::protocol::ProtocolConfig;
use cutwork_core::random_lab::{self, DistributionParams};

fn err(e: cutwork_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    value_to_py(py, &v)
}

fn value_to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => i.into_pyobject(py)?.into_any(),
            (_, Some(u)) => u.into_pyobject(py)?.into_any(),
            _ => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(a) => {
            let list = PyList::empty(py);
            for item in a {
                list.append(value_to_py(py, item)?)?;
            }
            list.into_any()
        }
        Value::Object(o) => {
            let dict = PyDict::new(py);
            for (k, item) in o {
                dict.set_item(k, value_to_py(py, item)?)?;
            }
            dict.into_any()
        }
    })
}

/// A CNF formula over variables `1..=n`.
#[pyclass(name = "CnfFormula", module = "cutwork", frozen)]
struct PyCnf(cnf::CnfFormula);

#[pymethods]
impl PyCnf {
    #[new]
    fn new(n: usize, clauses: Vec<Vec<i64>>) -> PyResult<Self> {
        let clauses = clauses
            .iter()
            .map(|c| cnf::Clause::from_dimacs(c))
            .collect::<Result<_, _>>()
            .map_err(err)?;
        cnf::CnfFormula::new(n, clauses).map(PyCnf).map_err(err)
    }

    #[staticmethod]
    fn from_dimacs(text: &str) -> PyResult<Self> {
        cnf::parse_dimacs(text).map(PyCnf).map_err(err)
    }

    fn to_dimacs(&self) -> String {
        cnf::to_dimacs(&self.0)
    }

    #[getter]
    fn num_vars(&self) -> usize {
        self.0.num_vars()
    }

    #[getter]
    fn num_clauses(&self) -> usize {
        self.0.num_clauses()
    }

    fn clauses(&self) -> Vec<Vec<i64>> {
        self.0
            .clauses()
            .iter()
            .map(|c| c.literals().iter().map(|l| l.to_dimacs()).collect())
            .collect()
    }

    /// A model as signed literals, or `None` when unsatisfiable.
    fn solve(&self) -> PyResult<Option<Vec<i64>>> {
        Ok(cnf::brute_force_sat(&self.0).map_err(err)?.map(|a| literals(&a)))
    }

    fn __repr__(&self) -> String {
        format!("CnfFormula(n={}, m={})", self.0.num_vars(), self.0.num_clauses())
    }
}

fn literals(a: &Assignment) -> Vec<i64> {
    a.iter().map(|(v, b)| if b { v as i64 } else { -(v as i64) }).collect()
}

/// Split of the variables between Alice (`x`) and Bob (`y`).
#[pyclass(name = "Partition", module = "cutwork", frozen)]
struct PyPartition(cnf::VariablePartition);

#[pymethods]
impl PyPartition {
    #[new]
    fn new(n: usize, x: Vec<u32>, y: Vec<u32>) -> PyResult<Self> {
        cnf::VariablePartition::new(n, x, y).map(PyPartition).map_err(err)
    }

    #[staticmethod]
    fn alternating(n: usize) -> Self {
        PyPartition(cnf::VariablePartition::alternating(n))
    }

    #[getter]
    fn x(&self) -> Vec<u32> {
        self.0.xvars().to_vec()
    }

    #[getter]
    fn y(&self) -> Vec<u32> {
        self.0.yvars().to_vec()
    }

    fn __repr__(&self) -> String {
        format!("Partition(x={:?}, y={:?})", self.0.xvars(), self.0.yvars())
    }
}

/// A monotone circuit over CSP-SAT truth-table inputs.
#[pyclass(name = "Circuit", module = "cutwork", frozen)]
struct PyCircuit(MonotoneCircuit);

#[pymethods]
impl PyCircuit {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        parse_circuit(text).map(PyCircuit).map_err(err)
    }

    fn to_text(&self) -> String {
        write_circuit(&self.0)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn verify_separation<'py>(&self, py: Python<'py>, f: &PyCnf, part: &PyPartition) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &verify_separation(&self.0, &f.0, &part.0).map_err(err)?)
    }

    /// Report of the extracted protocol refutation, one line per gate.
    fn extract<'py>(&self, py: Python<'py>, f: &PyCnf, part: &PyPartition) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &extract_cc2_refutation(&self.0, &f.0, &part.0).map_err(err)?.report)
    }

    /// Value on `U(x)` for a full assignment of the X side given as literals.
    fn eval_accepting(&self, f: &PyCnf, part: &PyPartition, x: Vec<i64>) -> PyResult<bool> {
        let g = csp::build_constraint_graph(&f.0, &part.0);
        let inst = csp::accepting_instance(&g, &assignment(&x)?).map_err(err)?;
        cutwork_core::circuit::eval_circuit(&self.0, &g, &inst).map_err(err)
    }

    /// Value on `V(y)` for a full assignment of the Y side given as literals.
    fn eval_rejecting(&self, f: &PyCnf, part: &PyPartition, y: Vec<i64>) -> PyResult<bool> {
        let g = csp::build_constraint_graph(&f.0, &part.0);
        let inst = csp::rejecting_instance(&g, &f.0, &part.0, &assignment(&y)?).map_err(err)?;
        cutwork_core::circuit::eval_circuit(&self.0, &g, &inst).map_err(err)
    }
}

fn assignment(lits: &[i64]) -> PyResult<Assignment> {
    lits.iter()
        .map(|&l| match cnf::Literal::from_dimacs(l) {
            Some(lit) => Ok((lit.var, !lit.negated)),
            None => Err(PyValueError::new_err(format!("bad literal {l}"))),
        })
        .collect::<PyResult<Vec<_>>>()
        .map(Assignment::from_pairs)
}

/// Checks a proof in the line format against the clause inequalities of `f`.
#[pyfunction]
fn check_proof<'py>(py: Python<'py>, f: &PyCnf, proof: &str) -> PyResult<Bound<'py, PyAny>> {
    let lines = parse_proof_lines(proof).map_err(err)?;
    to_py(py, &check_cp_proof(&CpProof::for_formula(&f.0, lines)))
}

/// Compiles the DPLL resolution refutation of `f` into a circuit.
#[pyfunction]
fn compile_refutation(f: &PyCnf, part: &PyPartition) -> PyResult<PyCircuit> {
    let r = resolution_refutation_from_dpll(&f.0).map_err(err)?;
    let lines = lines_from_resolution(&r, &part.0).map_err(err)?;
    let comp = compile_cc_refutation(&lines, &f.0, &part.0, &ProtocolConfig::default()).map_err(err)?;
    Ok(PyCircuit(comp.circuit))
}

#[pyfunction]
#[pyo3(signature = (m, n, d, seed=0))]
fn sample_f(m: usize, n: usize, d: usize, seed: u64) -> PyResult<PyCnf> {
    let p = DistributionParams::new(m, n, d, seed).map_err(err)?;
    random_lab::sample_f(&p).map(PyCnf).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (m, n, d, seed=0))]
fn sample_tensor(m: usize, n: usize, d: usize, seed: u64) -> PyResult<(PyCnf, PyPartition)> {
    let p = DistributionParams::new(m, n, d, seed).map_err(err)?;
    let (f, part) = random_lab::sample_tensor(&p).map_err(err)?;
    Ok((PyCnf(f), PyPartition(part)))
}

#[pyfunction]
#[pyo3(signature = (m, n, d, seed=0, samples=20, tensor=false))]
fn unsat_rate<'py>(
    py: Python<'py>,
    m: usize,
    n: usize,
    d: usize,
    seed: u64,
    samples: usize,
    tensor: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let p = DistributionParams::new(m, n, d, seed).map_err(err)?;
    to_py(py, &random_lab::unsat_rate(&p, tensor, samples).map_err(err)?)
}

/// The size bound as a `fractions.Fraction`.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
fn jukna_bound<'py>(
    py: Python<'py>,
    u_size: u64,
    v_size: u64,
    a1_1: u64,
    a1_r: u64,
    a0_s: u64,
    r: u64,
    s: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let q = csp::jukna_bound(&JuknaParams {
        u_size,
        v_size,
        a1_1,
        a1_r,
        a0_s,
        r,
        s,
    })
    .map_err(err)?;
    py.import("fractions")?
        .getattr("Fraction")?
        .call1((format!("{}/{}", q.numer(), q.denom()),))
}

/// CSP-SAT value of `U(x)`, which is always 1.
#[pyfunction]
fn csp_accepting_value(f: &PyCnf, part: &PyPartition, x: Vec<i64>) -> PyResult<bool> {
    let g = csp::build_constraint_graph(&f.0, &part.0);
    let inst = csp::accepting_instance(&g, &assignment(&x)?).map_err(err)?;
    csp::csp_sat_eval(&g, &inst).map_err(err)
}

/// CSP-SAT value of `V(y)`, which is 0 when `f` is unsatisfiable.
#[pyfunction]
fn csp_rejecting_value(f: &PyCnf, part: &PyPartition, y: Vec<i64>) -> PyResult<bool> {
    let g = csp::build_constraint_graph(&f.0, &part.0);
    let inst = csp::rejecting_instance(&g, &f.0, &part.0, &assignment(&y)?).map_err(err)?;
    csp::csp_sat_eval(&g, &inst).map_err(err)
}

#[pymodule]
fn cutwork(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCnf>()?;
    m.add_class::<PyPartition>()?;
    m.add_class::<PyCircuit>()?;
    m.add_function(wrap_pyfunction!(check_proof, m)?)?;
    m.add_function(wrap_pyfunction!(compile_refutation, m)?)?;
    m.add_function(wrap_pyfunction!(sample_f, m)?)?;
    m.add_function(wrap_pyfunction!(sample_tensor, m)?)?;
    m.add_function(wrap_pyfunction!(unsat_rate, m)?)?;
    m.add_function(wrap_pyfunction!(jukna_bound, m)?)?;
    m.add_function(wrap_pyfunction!(csp_accepting_value, m)?)?;
    m.add_function(wrap_pyfunction!(csp_rejecting_value, m)?)?;
    Ok(())
}
