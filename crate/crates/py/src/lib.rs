//! Python bindings for the `esdg-mhd` solver.
//!
//! States cross the boundary as plain lists of nine floats; a discrete field is a
//! list of elements, each a list of nodal states.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use esdg_mhd::config::RunConfig;
use esdg_mhd::entropy_audit::{audit_state, total_entropy};
use esdg_mhd::fluxes::{self, GlmParams};
use esdg_mhd::mms::{convergence_study, ManufacturedProblem};
use esdg_mhd::refsol;
use esdg_mhd::solver1d::{Field, Method};
use esdg_mhd::thermo::{self, GasParams, PrimState, Vec9};

fn py_err(e: esdg_mhd::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

type State = [f64; 9];

fn to_prim(v: State) -> PyResult<PrimState> {
    PrimState::from_vec(Vec9::from(v)).map_err(py_err)
}

fn to_array(v: &Vec9) -> State {
    let mut out = [0.0; 9];
    out.copy_from_slice(v.as_slice());
    out
}

fn field_to_py(u: &Field) -> Vec<Vec<State>> {
    u.iter().map(|row| row.iter().map(to_array).collect()).collect()
}

fn field_from_py(u: Vec<Vec<State>>) -> Field {
    u.into_iter().map(|row| row.into_iter().map(Vec9::from).collect()).collect()
}

/// Gas and transport parameters.
#[pyclass(name = "Gas", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGas {
    inner: GasParams,
}

#[pymethods]
impl PyGas {
    /// Dimensional constructor: `Gas(gamma, r, mu0, mu_ns, mu_r, kappa)`.
    #[new]
    fn new(gamma: f64, r: f64, mu0: f64, mu_ns: f64, mu_r: f64, kappa: f64) -> PyResult<Self> {
        Ok(PyGas {
            inner: GasParams::new(gamma, r, mu0, mu_ns, mu_r, kappa).map_err(py_err)?,
        })
    }

    /// Parameters from the Mach, Reynolds, Prandtl and magnetic numbers.
    #[staticmethod]
    fn nondimensional(gamma: f64, ma: f64, re: f64, pr: f64, mm: f64, rm: f64) -> PyResult<Self> {
        Ok(PyGas {
            inner: GasParams::from_nondimensional(gamma, ma, re, pr, mm, rm).map_err(py_err)?,
        })
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }
    #[getter]
    fn r(&self) -> f64 {
        self.inner.r
    }
    #[getter]
    fn mu0(&self) -> f64 {
        self.inner.mu0
    }
    #[getter]
    fn mu_ns(&self) -> f64 {
        self.inner.mu_ns
    }
    #[getter]
    fn mu_r(&self) -> f64 {
        self.inner.mu_r
    }
    #[getter]
    fn kappa(&self) -> f64 {
        self.inner.kappa
    }

    fn __repr__(&self) -> String {
        let g = &self.inner;
        format!(
            "Gas(gamma={}, r={}, mu0={}, mu_ns={}, mu_r={}, kappa={})",
            g.gamma, g.r, g.mu0, g.mu_ns, g.mu_r, g.kappa
        )
    }
}

#[pyfunction]
fn prim_to_cons(v: State, gas: &PyGas) -> PyResult<State> {
    Ok(to_array(to_prim(v)?.to_cons(&gas.inner).as_vec()))
}

#[pyfunction]
fn cons_to_prim(u: State, gas: &PyGas) -> PyResult<State> {
    let v = thermo::prim_from_cons_vec(&Vec9::from(u), &gas.inner).map_err(py_err)?;
    Ok(to_array(v.as_vec()))
}

#[pyfunction]
fn entropy_vars(v: State, gas: &PyGas) -> PyResult<State> {
    Ok(to_array(to_prim(v)?.entropy_vars(&gas.inner).as_vec()))
}

#[pyfunction]
fn entropy_vars_to_prim(w: State, gas: &PyGas) -> PyResult<State> {
    let w = thermo::EntropyVars::from_vec(Vec9::from(w)).map_err(py_err)?;
    Ok(to_array(w.to_prim(&gas.inner).map_err(py_err)?.as_vec()))
}

/// Mathematical entropy density and its x-flux.
#[pyfunction]
fn entropy(v: State, gas: &PyGas) -> PyResult<(f64, f64)> {
    let v = to_prim(v)?;
    Ok((v.entropy(&gas.inner), v.entropy_flux(&gas.inner)))
}

#[pyfunction]
#[pyo3(signature = (vl, vr, gas, c_h = 1.0))]
fn ec_flux(vl: State, vr: State, gas: &PyGas, c_h: f64) -> PyResult<State> {
    let glm = GlmParams::new(c_h, 0.0).map_err(py_err)?;
    Ok(to_array(&fluxes::ec_two_point_flux(&to_prim(vl)?, &to_prim(vr)?, &gas.inner, &glm)))
}

/// `w_L . f*(L,R) - w_R . f*(R,L) - (Psi*_L - Psi*_R)` for the non-symmetric flux; zero up to roundoff.
#[pyfunction]
#[pyo3(signature = (vl, vr, gas, c_h = 1.0))]
fn entropy_conservation_residual(vl: State, vr: State, gas: &PyGas, c_h: f64) -> PyResult<f64> {
    let glm = GlmParams::new(c_h, 0.0).map_err(py_err)?;
    let (a, b) = (to_prim(vl)?, to_prim(vr)?);
    let g = &gas.inner;
    let lhs = a.entropy_vars(g).as_vec().dot(&fluxes::nonsym_flux(&a, &b, g, &glm))
        - b.entropy_vars(g).as_vec().dot(&fluxes::nonsym_flux(&b, &a, g, &glm));
    Ok(lhs - (fluxes::entropy_potential(&a, g, &glm) - fluxes::entropy_potential(&b, g, &glm)))
}

/// One-dimensional solver built from a JSON run configuration.
#[pyclass(name = "Solver")]
struct PySolver {
    config: RunConfig,
    inner: esdg_mhd::Solver,
}

#[pymethods]
impl PySolver {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let config = RunConfig::from_json(text).map_err(py_err)?;
        let inner = config.solver().map_err(py_err)?;
        Ok(PySolver { config, inner })
    }

    #[getter]
    fn n_elements(&self) -> usize {
        self.inner.mesh.n_elements()
    }

    #[getter]
    fn n_nodes(&self) -> usize {
        self.inner.mesh.n_nodes()
    }

    fn nodes(&self) -> Vec<Vec<f64>> {
        self.inner.mesh.sample(|x| x)
    }

    fn initial_state(&self) -> PyResult<Vec<Vec<State>>> {
        Ok(field_to_py(&self.config.initial_state(&self.inner).map_err(py_err)?))
    }

    fn rhs(&self, u: Vec<Vec<State>>, t: f64) -> PyResult<Vec<Vec<State>>> {
        Ok(field_to_py(&self.inner.rhs(&field_from_py(u), t).map_err(py_err)?))
    }

    fn total_entropy(&self, u: Vec<Vec<State>>) -> PyResult<f64> {
        total_entropy(&self.inner, &field_from_py(u)).map_err(py_err)
    }

    /// Entropy budget of the semi-discrete right-hand side.
    fn audit<'py>(&self, py: Python<'py>, u: Vec<Vec<State>>, t: f64) -> PyResult<Bound<'py, PyDict>> {
        let (r, _) = audit_state(&self.inner, &field_from_py(u), t).map_err(py_err)?;
        let d = PyDict::new(py);
        d.set_item("t", r.t)?;
        d.set_item("s_total", r.s_total)?;
        d.set_item("dsdt", r.dsdt)?;
        d.set_item("dissipation", r.dissipation)?;
        d.set_item("faces", r.face_total())?;
        d.set_item("source", r.source_production)?;
        d.set_item("forcing", r.forcing_production)?;
        d.set_item("balance", r.balance)?;
        d.set_item("scaled_balance", r.scaled_balance())?;
        Ok(d)
    }

    /// Integrates from `t0` to `t_end` with the configured time integrator.
    #[pyo3(signature = (u, t0, t_end))]
    fn advance(&self, u: Vec<Vec<State>>, t0: f64, t_end: f64) -> PyResult<(Vec<Vec<State>>, usize)> {
        let (u, stats) = self
            .inner
            .advance(&field_from_py(u), t0, t_end, &self.config.method(), |_, _| Ok(()))
            .map_err(py_err)?;
        Ok((field_to_py(&u), stats.accepted))
    }
}

/// Manufactured-solution convergence table as `(elements, error, rate)` tuples.
#[pyfunction]
#[pyo3(signature = (degree, elements, t_end = 0.1, tol = 1e-12))]
fn manufactured_convergence(degree: usize, elements: Vec<usize>, t_end: f64, tol: f64) -> PyResult<Vec<(usize, f64, Option<f64>)>> {
    let problem = ManufacturedProblem::standard().map_err(py_err)?;
    let table = convergence_study(&problem, degree, &elements, t_end, &Method::adaptive(tol)).map_err(py_err)?;
    Ok(table.iter().map(|r| (r.elements, r.error_u, r.rate_u)).collect())
}

#[pyfunction]
fn bessel_i(n: usize, x: f64) -> PyResult<f64> {
    refsol::modified_bessel_i(n, x).map_err(py_err)
}

#[pyfunction]
fn elliptic_ke(k: f64) -> PyResult<(f64, f64)> {
    refsol::elliptic_ke(k).map_err(py_err)
}

/// Normalized pipe-flow velocity and induced field at `(r, theta)`; `c = inf` is a perfect conductor.
#[pyfunction]
fn pipe_flow(ha: f64, c: f64, r: f64, theta: f64) -> PyResult<(f64, f64)> {
    let params = refsol::PipeParams::new(ha, c).map_err(py_err)?;
    let sol = refsol::pipe_coefficients(params).map_err(py_err)?;
    sol.normalized(r, theta).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (x, z, width, thickness, current_density, mu0 = 1.0))]
fn wire_field(x: f64, z: f64, width: f64, thickness: f64, current_density: f64, mu0: f64) -> PyResult<[f64; 3]> {
    let prm = refsol::WireParams::new(width, thickness, current_density, mu0).map_err(py_err)?;
    Ok(refsol::wire_field(x, z, &prm))
}

#[pyfunction]
#[pyo3(signature = (r, z, radius, current, mu0 = 1.0))]
fn loop_field(r: f64, z: f64, radius: f64, current: f64, mu0: f64) -> PyResult<(f64, f64)> {
    let prm = refsol::LoopParams::new(radius, current, mu0).map_err(py_err)?;
    refsol::loop_field(r, z, &prm).map_err(py_err)
}

#[pymodule(name = "esdg_mhd")]
fn esdg_mhd_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGas>()?;
    m.add_class::<PySolver>()?;
    m.add_function(wrap_pyfunction!(prim_to_cons, m)?)?;
    m.add_function(wrap_pyfunction!(cons_to_prim, m)?)?;
    m.add_function(wrap_pyfunction!(entropy_vars, m)?)?;
    m.add_function(wrap_pyfunction!(entropy_vars_to_prim, m)?)?;
    m.add_function(wrap_pyfunction!(entropy, m)?)?;
    m.add_function(wrap_pyfunction!(ec_flux, m)?)?;
    m.add_function(wrap_pyfunction!(entropy_conservation_residual, m)?)?;
    m.add_function(wrap_pyfunction!(manufactured_convergence, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_i, m)?)?;
    m.add_function(wrap_pyfunction!(elliptic_ke, m)?)?;
    m.add_function(wrap_pyfunction!(pipe_flow, m)?)?;
    m.add_function(wrap_pyfunction!(wire_field, m)?)?;
    m.add_function(wrap_pyfunction!(loop_field, m)?)?;
    Ok(())
}
