//! Python module `cvmem`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use cvmem_core::homodyne as hd;
use cvmem_core::kernels as kn;
use cvmem_core::model as md;
use cvmem_core::oracle as orc;
use cvmem_core::profiles as pf;
use cvmem_core::toycavity as toy;

fn to_py(e: cvmem_core::Error) -> PyErr {
    match e {
        cvmem_core::Error::Stiffness { .. } | cvmem_core::Error::ToleranceNotMet { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for cvmem_core::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

/// Control-pulse envelope.
#[pyclass(name = "PulseShape", module = "cvmem", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPulseShape {
    inner: pf::PulseShape,
}

#[pymethods]
impl PyPulseShape {
    #[staticmethod]
    fn gaussian(duration: f64) -> PyResult<Self> {
        Ok(Self {
            inner: pf::PulseShape::gaussian(duration).py_err()?,
        })
    }

    #[staticmethod]
    fn step(onset: f64) -> PyResult<Self> {
        Ok(Self {
            inner: pf::PulseShape::step(onset).py_err()?,
        })
    }

    #[staticmethod]
    fn constant() -> Self {
        Self {
            inner: pf::PulseShape::Constant,
        }
    }

    #[staticmethod]
    fn sampled(times: Vec<f64>, values: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: pf::PulseShape::sampled(times, values).py_err()?,
        })
    }

    fn envelope(&self, t: f64) -> f64 {
        self.inner.envelope(t)
    }

    fn support(&self) -> (f64, f64) {
        self.inner.support()
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

/// Physical rates of the atom-cavity system.
#[pyclass(name = "MemoryParams", module = "cvmem", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyMemoryParams {
    inner: md::MemoryParams,
}

#[pymethods]
impl PyMemoryParams {
    #[new]
    #[pyo3(signature = (gamma, kappa, tau, coupling, atoms, omega0, gamma0 = 0.0, r = 0.0))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        gamma: f64,
        kappa: f64,
        tau: f64,
        coupling: f64,
        atoms: u64,
        omega0: f64,
        gamma0: f64,
        r: f64,
    ) -> PyResult<Self> {
        let inner = md::MemoryParams {
            gamma,
            kappa,
            tau,
            coupling,
            atoms,
            gamma0,
            omega0,
            r,
        };
        inner.validate().py_err()?;
        Ok(Self { inner })
    }

    fn derive(&self) -> PyResult<PyDerivedParams> {
        Ok(PyDerivedParams {
            inner: md::derive(&self.inner).py_err()?,
        })
    }

    fn check_adiabatic<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = md::derive(&self.inner).py_err()?;
        let rep = md::check_adiabatic(&self.inner, &d);
        let out = PyDict::new(py);
        out.set_item("spin_ratio", rep.spin_ratio)?;
        out.set_item("dipole_ratio", rep.dipole_ratio)?;
        out.set_item("cavity_ratio", rep.cavity_ratio)?;
        out.set_item("pass", rep.pass)?;
        Ok(out)
    }
}

/// Composite parameters `eta`, `gamma_tilde0`, `N`.
#[pyclass(name = "DerivedParams", module = "cvmem", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDerivedParams {
    inner: md::DerivedParams,
}

impl PyDerivedParams {
    fn area(&self, shape: &PyPulseShape) -> PyResult<pf::AreaFunction> {
        self.inner.area_function(shape.inner.clone()).py_err()
    }
}

#[pymethods]
impl PyDerivedParams {
    #[new]
    #[pyo3(signature = (eta, gamma_tilde0, atoms = 1e6))]
    fn new(eta: f64, gamma_tilde0: f64, atoms: f64) -> PyResult<Self> {
        Ok(Self {
            inner: md::DerivedParams::from_composites(eta, gamma_tilde0, atoms).py_err()?,
        })
    }

    #[getter]
    fn eta(&self) -> f64 {
        self.inner.eta
    }

    #[getter]
    fn gamma_tilde0(&self) -> f64 {
        self.inner.gamma_tilde0
    }

    #[getter]
    fn cooperativity(&self) -> f64 {
        self.inner.cooperativity
    }

    #[getter]
    fn beta_e0(&self) -> f64 {
        self.inner.beta_e0
    }

    #[getter]
    fn atoms(&self) -> f64 {
        self.inner.atoms
    }

    fn with_eta(&self, eta: f64) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.with_eta(eta).py_err()?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "DerivedParams(eta={}, gamma_tilde0={}, atoms={})",
            self.inner.eta, self.inner.gamma_tilde0, self.inner.atoms
        )
    }
}

/// Real function of time sampled on a grid.
#[pyclass(name = "TemporalMode", module = "cvmem", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyTemporalMode {
    inner: hd::TemporalMode,
}

#[pymethods]
impl PyTemporalMode {
    #[new]
    fn new(grid: Vec<f64>, values: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: hd::TemporalMode::new(grid, values).py_err()?,
        })
    }

    #[getter]
    fn grid(&self) -> Vec<f64> {
        self.inner.grid().to_vec()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    fn eval(&self, t: f64) -> f64 {
        self.inner.eval(t)
    }

    fn norm_sq(&self) -> f64 {
        self.inner.norm_sq()
    }

    fn argmax(&self) -> f64 {
        self.inner.argmax()
    }

    fn truncated(&self, until: f64) -> Option<Self> {
        self.inner.truncated(until).map(|inner| Self { inner })
    }
}

/// Two-time output correlation kernel.
#[pyclass(name = "Kernel", module = "cvmem", frozen, skip_from_py_object)]
struct PyKernel {
    inner: kn::Kernel,
}

#[pymethods]
impl PyKernel {
    #[getter]
    fn r(&self) -> f64 {
        self.inner.r()
    }

    fn delta_coeff(&self) -> f64 {
        self.inner.delta_coeff()
    }

    fn smooth(&self, t: f64, t_prime: f64) -> f64 {
        kn::kernel_smooth_eval(&self.inner, t, t_prime)
    }

    fn measured_variance<'py>(&self, py: Python<'py>, lo: &PyTemporalMode) -> PyResult<Bound<'py, PyDict>> {
        variance_dict(py, hd::measured_variance(&self.inner, &lo.inner).py_err()?)
    }

    fn readout_efficiency(&self, lo: &PyTemporalMode) -> PyResult<f64> {
        hd::readout_efficiency(&self.inner, &lo.inner).py_err()
    }

    fn efficiency_bound(&self) -> PyResult<f64> {
        hd::efficiency_bound(&self.inner).py_err()
    }
}

fn variance_dict(py: Python<'_>, v: hd::VarianceResult) -> PyResult<Bound<'_, PyDict>> {
    let out = PyDict::new(py);
    out.set_item("variance", v.variance)?;
    out.set_item("shot_noise", v.shot_noise)?;
    out.set_item("signal", v.signal)?;
    out.set_item("efficiency", v.efficiency)?;
    Ok(out)
}

#[pyfunction]
fn write_variance(d: &PyDerivedParams, shape: &PyPulseShape, r: f64, t: f64) -> PyResult<f64> {
    Ok(md::write_variance(&d.inner, &d.area(shape)?, r, t))
}

#[pyfunction]
fn write_efficiency(d: &PyDerivedParams, shape: &PyPulseShape, t: f64) -> PyResult<f64> {
    Ok(md::write_efficiency(&d.inner, &d.area(shape)?, t))
}

#[pyfunction]
fn write_output_variance(d: &PyDerivedParams, shape: &PyPulseShape, r: f64, t: f64) -> PyResult<f64> {
    Ok(md::write_output_variance(&d.inner, &d.area(shape)?, r, t))
}

#[pyfunction]
fn emission_mode(d: &PyDerivedParams, shape: &PyPulseShape, grid: Vec<f64>) -> PyResult<PyTemporalMode> {
    Ok(PyTemporalMode {
        inner: md::emission_mode(&d.area(shape)?, &grid).py_err()?,
    })
}

#[pyfunction]
fn emission_peak_delay(d: &PyDerivedParams, duration: f64) -> PyResult<f64> {
    md::emission_peak_delay(&d.inner, duration).py_err()
}

#[pyfunction]
fn readout_kernel(d: &PyDerivedParams, shape: &PyPulseShape, r: f64, grid: Vec<f64>) -> PyResult<PyKernel> {
    Ok(PyKernel {
        inner: kn::readout_kernel(&d.inner, &d.area(shape)?, r, &grid).py_err()?,
    })
}

#[pyfunction]
fn write_kernel(d: &PyDerivedParams, shape: &PyPulseShape, r: f64, grid: Vec<f64>) -> PyResult<PyKernel> {
    Ok(PyKernel {
        inner: kn::write_kernel(&d.inner, &d.area(shape)?, r, &grid).py_err()?,
    })
}

#[pyfunction]
fn cw_step_kernel(d: &PyDerivedParams, r: f64, grid: Vec<f64>) -> PyResult<PyKernel> {
    Ok(PyKernel {
        inner: kn::cw_step_kernel(&d.inner, r, &grid).py_err()?,
    })
}

#[pyfunction]
fn lo_delayed_read(shape: &PyPulseShape, delay: f64, grid: Vec<f64>) -> PyResult<PyTemporalMode> {
    Ok(PyTemporalMode {
        inner: hd::lo_delayed_read(&shape.inner, delay, &grid).py_err()?,
    })
}

/// Returns `(delay, efficiency)`.
#[pyfunction]
fn optimize_delay(d: &PyDerivedParams, shape: &PyPulseShape, r: f64, grid: Vec<f64>) -> PyResult<(f64, f64)> {
    let opt = hd::optimize_delay(&d.inner, &shape.inner, r, &grid).py_err()?;
    Ok((opt.delay, opt.efficiency))
}

#[pyfunction]
fn spectrum_power<'py>(py: Python<'py>, d: &PyDerivedParams, r: f64, window: f64) -> PyResult<Bound<'py, PyDict>> {
    variance_dict(py, hd::spectrum_power(&d.inner, r, window).py_err()?)
}

/// Full-model covariance matrices (6x6 nested lists) at each grid time.
#[pyfunction]
fn propagate_full(
    p: &PyMemoryParams,
    shape: &PyPulseShape,
    r: f64,
    grid: Vec<f64>,
) -> PyResult<Vec<Vec<Vec<f64>>>> {
    let traj = orc::propagate_full(&p.inner, &shape.inner, r, &grid).py_err()?;
    Ok(traj
        .iter()
        .map(|s| {
            (0..s.dim())
                .map(|i| (0..s.dim()).map(|j| s.matrix[(i, j)]).collect())
                .collect()
        })
        .collect())
}

/// `(J_x, J_y)` variances of the reduced model at each grid time.
#[pyfunction]
fn propagate_reduced(d: &PyDerivedParams, shape: &PyPulseShape, r: f64, grid: Vec<f64>) -> PyResult<Vec<(f64, f64)>> {
    let traj = orc::propagate_reduced(&d.inner, &shape.inner, r, &grid).py_err()?;
    Ok(traj.iter().map(|s| (s.variance(0), s.variance(1))).collect())
}

fn phase(name: &str) -> PyResult<orc::Phase> {
    match name {
        "write" => Ok(orc::Phase::Write),
        "read" => Ok(orc::Phase::Read),
        other => Err(PyValueError::new_err(format!(
            "phase must be 'write' or 'read', got {other:?}"
        ))),
    }
}

#[pyfunction]
fn homodyne_variance_oracle(
    d: &PyDerivedParams,
    shape: &PyPulseShape,
    lo: &PyTemporalMode,
    phase_name: &str,
    r: f64,
) -> PyResult<f64> {
    orc::homodyne_variance_oracle(&d.inner, &shape.inner, &lo.inner, phase(phase_name)?, r).py_err()
}

#[pyfunction]
fn equivalence_report<'py>(
    py: Python<'py>,
    d: &PyDerivedParams,
    shape: &PyPulseShape,
    r: f64,
    grid: Vec<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let rep = toy::equivalence_report(&d.inner, &shape.inner, r, &grid).py_err()?;
    let out = PyDict::new(py);
    out.set_item("kernel_deviation", rep.kernel_deviation)?;
    out.set_item("write_variance_deviation", rep.write_variance_deviation)?;
    out.set_item("readout_variance_deviation", rep.readout_variance_deviation)?;
    out.set_item("max_deviation", rep.max_deviation)?;
    out.set_item("pass", rep.pass)?;
    Ok(out)
}

#[pyfunction]
fn lambert_w0(x: f64) -> PyResult<f64> {
    pf::lambert_w0(x).py_err()
}

#[pyfunction]
fn erf(x: f64) -> f64 {
    pf::erf(x)
}

#[pymodule]
fn cvmem(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPulseShape>()?;
    m.add_class::<PyMemoryParams>()?;
    m.add_class::<PyDerivedParams>()?;
    m.add_class::<PyTemporalMode>()?;
    m.add_class::<PyKernel>()?;
    m.add_function(wrap_pyfunction!(write_variance, m)?)?;
    m.add_function(wrap_pyfunction!(write_efficiency, m)?)?;
    m.add_function(wrap_pyfunction!(write_output_variance, m)?)?;
    m.add_function(wrap_pyfunction!(emission_mode, m)?)?;
    m.add_function(wrap_pyfunction!(emission_peak_delay, m)?)?;
    m.add_function(wrap_pyfunction!(readout_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(write_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(cw_step_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(lo_delayed_read, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_delay, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum_power, m)?)?;
    m.add_function(wrap_pyfunction!(propagate_full, m)?)?;
    m.add_function(wrap_pyfunction!(propagate_reduced, m)?)?;
    m.add_function(wrap_pyfunction!(homodyne_variance_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(equivalence_report, m)?)?;
    m.add_function(wrap_pyfunction!(lambert_w0, m)?)?;
    m.add_function(wrap_pyfunction!(erf, m)?)?;
    Ok(())
}
