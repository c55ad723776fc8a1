//! Python module `cavcool`.

use cavcool::analytic::{self, RateResult};
use cavcool::dynamics::{self, CoolingTrajectory, PhononDistribution};
use cavcool::liouvillian::{self, TruncationOptions};
use cavcool::mcwf::{ensemble_mean, FullSpace, Mcwf, McwfOptions};
use cavcool::validation::{self, ValidationOptions};
use cavcool::{config, Drive};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: cavcool::Error) -> PyErr {
    PyValueError::new_err(format!("[{}] {e}", e.code()))
}

#[pyclass(name = "SystemParams", module = "cavcool", skip_from_py_object)]
#[derive(Clone)]
pub struct PySystemParams {
    inner: cavcool::SystemParams,
}

#[pymethods]
impl PySystemParams {
    /// Keyword constructor; missing values take the good-cavity defaults.
    /// `standing_wave_phase` switches to a standing-wave drive.
    #[new]
    #[pyo3(signature = (*, gamma=None, kappa=None, g=None, g_tilde=None, phi=None, omega=None, delta=None, delta_c=None, eta=None, theta_l=None, theta_c=None, standing_wave_phase=None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        gamma: Option<f64>,
        kappa: Option<f64>,
        g: Option<f64>,
        g_tilde: Option<f64>,
        phi: Option<f64>,
        omega: Option<f64>,
        delta: Option<f64>,
        delta_c: Option<f64>,
        eta: Option<f64>,
        theta_l: Option<f64>,
        theta_c: Option<f64>,
        standing_wave_phase: Option<f64>,
    ) -> PyResult<Self> {
        let mut p = cavcool::SystemParams::default();
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut p.gamma, gamma);
        set(&mut p.kappa, kappa);
        set(&mut p.g, g);
        set(&mut p.phi, phi);
        set(&mut p.omega, omega);
        set(&mut p.delta, delta);
        set(&mut p.delta_c, delta_c);
        set(&mut p.eta, eta);
        set(&mut p.theta_l, theta_l);
        set(&mut p.theta_c, theta_c);
        if let Some(gt) = g_tilde {
            if g.is_some() {
                return Err(PyValueError::new_err("give either g or g_tilde"));
            }
            p = p.with_g_tilde(gt);
        }
        if let Some(phase) = standing_wave_phase {
            p.drive = Drive::StandingWave { phase };
        }
        p.validate().map_err(err)?;
        Ok(PySystemParams { inner: p })
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }
    #[getter]
    fn kappa(&self) -> f64 {
        self.inner.kappa
    }
    #[getter]
    fn g(&self) -> f64 {
        self.inner.g
    }
    #[getter]
    fn phi(&self) -> f64 {
        self.inner.phi
    }
    #[getter]
    fn omega(&self) -> f64 {
        self.inner.omega
    }
    #[getter]
    fn delta(&self) -> f64 {
        self.inner.delta
    }
    #[getter]
    fn delta_c(&self) -> f64 {
        self.inner.delta_c
    }
    #[getter]
    fn eta(&self) -> f64 {
        self.inner.eta
    }
    #[getter]
    fn theta_l(&self) -> f64 {
        self.inner.theta_l
    }
    #[getter]
    fn theta_c(&self) -> f64 {
        self.inner.theta_c
    }

    /// Copy with some fields replaced, e.g. `p.replace(delta=3.0)`.
    #[pyo3(signature = (**changes))]
    fn replace(&self, changes: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut p = self.inner;
        if let Some(changes) = changes {
            for (k, v) in changes.iter() {
                let key: String = k.extract()?;
                let v: f64 = v.extract()?;
                match key.as_str() {
                    "gamma" => p.gamma = v,
                    "kappa" => p.kappa = v,
                    "g" => p.g = v,
                    "g_tilde" => p = p.with_g_tilde(v),
                    "phi" => p.phi = v,
                    "omega" => p.omega = v,
                    "delta" => p.delta = v,
                    "delta_c" => p.delta_c = v,
                    "eta" => p.eta = v,
                    "theta_l" => p.theta_l = v,
                    "theta_c" => p.theta_c = v,
                    "standing_wave_phase" => p.drive = Drive::StandingWave { phase: v },
                    _ => return Err(PyValueError::new_err(format!("unknown parameter `{key}`"))),
                }
            }
        }
        p.validate().map_err(err)?;
        Ok(PySystemParams { inner: p })
    }

    /// Copy with `delta` set to the optimal detuning for the current `delta_c`.
    fn at_delta_opt(&self) -> PyResult<Self> {
        let delta = analytic::delta_opt(self.inner.delta_c, &self.inner).map_err(err)?;
        Ok(PySystemParams {
            inner: cavcool::SystemParams {
                delta,
                ..self.inner
            },
        })
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

#[pyclass(name = "EmissionPattern", module = "cavcool", skip_from_py_object)]
#[derive(Clone)]
pub struct PyEmissionPattern {
    inner: cavcool::EmissionPattern,
}

#[pymethods]
impl PyEmissionPattern {
    #[staticmethod]
    fn dipole() -> Self {
        PyEmissionPattern {
            inner: cavcool::EmissionPattern::dipole(),
        }
    }

    #[staticmethod]
    fn isotropic() -> Self {
        PyEmissionPattern {
            inner: cavcool::EmissionPattern::isotropic(),
        }
    }

    /// CDF of `cos(theta)` tabulated on a uniform grid over `[-1, 1]`.
    #[staticmethod]
    fn tabulated(cdf: Vec<f64>) -> PyResult<Self> {
        Ok(PyEmissionPattern {
            inner: cavcool::EmissionPattern::tabulated(cdf).map_err(err)?,
        })
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha()
    }

    #[getter]
    fn name(&self) -> &'static str {
        self.inner.name()
    }

    fn density(&self, u: f64) -> f64 {
        self.inner.density(u)
    }

    fn cdf(&self, u: f64) -> f64 {
        self.inner.cdf(u)
    }
}

#[pyclass(name = "Rates", module = "cavcool", skip_from_py_object, frozen)]
#[derive(Clone)]
pub struct PyRates {
    inner: RateResult,
}

#[pymethods]
impl PyRates {
    #[new]
    fn new(a_plus: f64, a_minus: f64, d: f64, eta: f64) -> Self {
        PyRates {
            inner: RateResult::from_rates(a_plus, a_minus, d, eta),
        }
    }

    #[getter]
    fn a_plus(&self) -> f64 {
        self.inner.a_plus
    }
    #[getter]
    fn a_minus(&self) -> f64 {
        self.inner.a_minus
    }
    #[getter]
    fn d(&self) -> f64 {
        self.inner.d
    }
    #[getter]
    fn w(&self) -> f64 {
        self.inner.w
    }
    /// Steady-state mean phonon number, `None` in a heating region.
    #[getter]
    fn n_st(&self) -> Option<f64> {
        self.inner.n_st.value()
    }
    #[getter]
    fn heating(&self) -> bool {
        self.inner.n_st.is_heating()
    }

    fn __repr__(&self) -> String {
        let r = &self.inner;
        let n_st = r
            .n_st
            .value()
            .map_or("None".to_string(), |n| format!("{n:e}"));
        format!(
            "Rates(a_plus={:e}, a_minus={:e}, d={:e}, w={:e}, n_st={n_st})",
            r.a_plus, r.a_minus, r.d, r.w
        )
    }
}

fn pattern(e: Option<PyRef<'_, PyEmissionPattern>>) -> cavcool::EmissionPattern {
    e.map(|e| e.inner.clone())
        .unwrap_or_else(cavcool::EmissionPattern::dipole)
}

/// Weak-drive closed-form rates.
#[pyfunction]
#[pyo3(signature = (p, emission=None))]
fn rates_weak_drive(
    p: &PySystemParams,
    emission: Option<PyRef<'_, PyEmissionPattern>>,
) -> PyResult<PyRates> {
    Ok(PyRates {
        inner: analytic::rates_weak_drive(&p.inner, &pattern(emission)).map_err(err)?,
    })
}

/// Rates from the numerical steady state of the internal master equation.
#[pyfunction]
#[pyo3(signature = (p, emission=None))]
fn liouvillian_rates(
    p: &PySystemParams,
    emission: Option<PyRef<'_, PyEmissionPattern>>,
) -> PyResult<PyRates> {
    let r =
        liouvillian::liouvillian_rates(&p.inner, &pattern(emission), TruncationOptions::default())
            .map_err(err)?;
    Ok(PyRates { inner: r.rates })
}

#[pyfunction]
fn delta_opt(delta_c: f64, p: &PySystemParams) -> PyResult<f64> {
    analytic::delta_opt(delta_c, &p.inner).map_err(err)
}

/// Excited-state population versus laser detuning.
#[pyfunction]
fn excitation_spectrum(p: &PySystemParams, deltas: Vec<f64>) -> Vec<f64> {
    analytic::excitation_spectrum(&p.inner, &deltas)
}

/// Closed-form mean phonon number of the rate equation at `times`.
#[pyfunction]
fn cooling_curve(n0: f64, rates: &PyRates, eta: f64, times: Vec<f64>) -> Vec<f64> {
    CoolingTrajectory::closed_form(n0, &rates.inner, eta, &times).mean_n
}

/// Phonon distributions at `times`, starting from `p0`.
#[pyfunction]
fn evolve_pn(p0: Vec<f64>, rates: &PyRates, eta: f64, times: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
    let start = PhononDistribution::new(p0).map_err(err)?;
    let out = dynamics::evolve_pn(&start, &rates.inner, eta, &times).map_err(err)?;
    Ok(out.iter().map(|d| d.probabilities().to_vec()).collect())
}

/// Quantum-trajectory ensemble from `|g, 0_c, n0>`; returns `times`,
/// `mean_n`, `std_err` and the total jump count.
#[pyfunction]
#[pyo3(signature = (p, trajectories, t_end, seed=1, spacing=1.0, max_dt=0.1, n_cavity=4, n_motion=12, n0=2, emission=None))]
#[allow(clippy::too_many_arguments)]
fn mcwf_ensemble<'py>(
    py: Python<'py>,
    p: &PySystemParams,
    trajectories: usize,
    t_end: f64,
    seed: u64,
    spacing: f64,
    max_dt: f64,
    n_cavity: usize,
    n_motion: usize,
    n0: usize,
    emission: Option<PyRef<'_, PyEmissionPattern>>,
) -> PyResult<Bound<'py, PyDict>> {
    let e = pattern(emission);
    let params = p.inner;
    let (mean, jumps) = py
        .detach(|| -> cavcool::Result<_> {
            let space = FullSpace::new(n_cavity, n_motion)?;
            let m = Mcwf::new(
                &params,
                &e,
                space,
                spacing,
                McwfOptions {
                    max_dt,
                    ..Default::default()
                },
            )?;
            let n_points = (t_end / spacing).round() as usize + 1;
            let ens = m.run_ensemble(
                &space.basis_state(false, 0, n0),
                n_points,
                seed,
                trajectories,
            )?;
            let jumps: usize = ens.iter().map(|t| t.jumps.len()).sum();
            Ok((ensemble_mean(&ens)?, jumps))
        })
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("times", mean.times)?;
    d.set_item("mean_n", mean.mean_n)?;
    d.set_item("std_err", mean.std_err)?;
    d.set_item("jumps", jumps)?;
    Ok(d)
}

/// Parameters and emission pattern from config-file text.
#[pyfunction]
fn parse_config(text: &str) -> PyResult<(PySystemParams, PyEmissionPattern)> {
    let f = config::parse(text).map_err(err)?;
    Ok((
        PySystemParams { inner: f.params },
        PyEmissionPattern { inner: f.emission },
    ))
}

/// Runs one acceptance criterion and returns its verdict as a dict.
#[pyfunction]
#[pyo3(signature = (criterion, seed=None))]
fn validate<'py>(
    py: Python<'py>,
    criterion: u8,
    seed: Option<u64>,
) -> PyResult<Bound<'py, PyDict>> {
    let mut opts = ValidationOptions::default();
    if let Some(seed) = seed {
        opts.seed = seed;
    }
    let v = py
        .detach(|| validation::run_criterion(criterion, &opts))
        .ok_or_else(|| PyValueError::new_err(format!("no criterion {criterion}")))?;
    let d = PyDict::new(py);
    d.set_item("criterion", v.criterion)?;
    d.set_item("name", v.name)?;
    d.set_item("target", v.target)?;
    d.set_item("measured", v.measured)?;
    d.set_item("tolerance", v.tolerance)?;
    d.set_item("pass", v.pass)?;
    Ok(d)
}

#[pymodule]
#[pyo3(name = "cavcool")]
pub fn cavcool_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystemParams>()?;
    m.add_class::<PyEmissionPattern>()?;
    m.add_class::<PyRates>()?;
    m.add_function(wrap_pyfunction!(rates_weak_drive, m)?)?;
    m.add_function(wrap_pyfunction!(liouvillian_rates, m)?)?;
    m.add_function(wrap_pyfunction!(delta_opt, m)?)?;
    m.add_function(wrap_pyfunction!(excitation_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(cooling_curve, m)?)?;
    m.add_function(wrap_pyfunction!(evolve_pn, m)?)?;
    m.add_function(wrap_pyfunction!(mcwf_ensemble, m)?)?;
    m.add_function(wrap_pyfunction!(parse_config, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    Ok(())
}
