//! Python bindings: `import heatcontent_py`.

use std::path::PathBuf;

use heatcontent::asymptotics::{self, AsymptoticModel, Formula};
use heatcontent::experiment::{self, ExperimentConfig};
use heatcontent::geometry::{self, DomainGeometry};
use heatcontent::green::{self, Lambda};
use heatcontent::sausage::{SausageMode, SausageProfile};
use heatcontent::solver::{self, SolverConfig};
use heatcontent::specfun;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: heatcontent::Error) -> PyErr {
    if e.is_numerical() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for heatcontent::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

/// Diffusivities D₊ (inside), D₋ (outside) and the interface coefficient λ in [0, inf].
#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
struct Medium(green::Medium);

#[pymethods]
impl Medium {
    #[new]
    fn new(d_plus: f64, d_minus: f64, lam: f64) -> PyResult<Self> {
        Ok(Self(
            green::Medium::new(d_plus, d_minus, Lambda::from_f64(lam).py()?).py()?,
        ))
    }
    #[getter]
    fn d_plus(&self) -> f64 {
        self.0.d_plus
    }
    #[getter]
    fn d_minus(&self) -> f64 {
        self.0.d_minus
    }
    #[getter]
    fn lam(&self) -> f64 {
        self.0.lambda.value()
    }
    #[getter]
    fn a(&self) -> f64 {
        self.0.a()
    }
    #[getter]
    fn b(&self) -> f64 {
        self.0.b()
    }
    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha()
    }
    fn __repr__(&self) -> String {
        format!(
            "Medium(d_plus={}, d_minus={}, lam={})",
            self.0.d_plus,
            self.0.d_minus,
            self.0.lambda.value()
        )
    }
}

#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
struct Geometry(DomainGeometry);

#[pymethods]
impl Geometry {
    #[staticmethod]
    fn square(side: f64) -> PyResult<Self> {
        Ok(Self(geometry::make_square(side).py()?))
    }
    #[staticmethod]
    fn circle(radius: f64) -> PyResult<Self> {
        Ok(Self(geometry::make_circle(radius).py()?))
    }
    #[staticmethod]
    fn prefractal(generation: u32) -> PyResult<Self> {
        Ok(Self(geometry::make_minkowski_prefractal(generation).py()?))
    }
    #[staticmethod]
    fn polygon(loops: Vec<Vec<(f64, f64)>>) -> PyResult<Self> {
        let loops = loops
            .into_iter()
            .map(|l| l.into_iter().map(|(x, y)| [x, y]).collect())
            .collect();
        Ok(Self(geometry::make_custom_polygon(loops).py()?))
    }
    #[getter]
    fn perimeter(&self) -> f64 {
        self.0.perimeter()
    }
    #[getter]
    fn area(&self) -> f64 {
        self.0.area()
    }
    #[getter]
    fn inradius(&self) -> f64 {
        self.0.inradius()
    }
    fn contains(&self, x: f64, y: f64) -> bool {
        self.0.contains([x, y])
    }
    fn signed_distance(&self, x: f64, y: f64) -> f64 {
        self.0.signed_distance([x, y])
    }
    fn vertices(&self) -> Vec<Vec<(f64, f64)>> {
        self.0
            .loops()
            .iter()
            .map(|l| l.iter().map(|p| (p[0], p[1])).collect())
            .collect()
    }
}

/// Interior sausage volume μ(∂Ω, ℓ).
#[pyclass(frozen)]
struct Sausage(SausageProfile);

#[pymethods]
impl Sausage {
    /// mode is "auto", "analytic", "grid" or "monte_carlo"
    #[new]
    #[pyo3(signature = (geometry, mode = "auto", resolution = 2048, samples = 1_000_000, seed = 0))]
    fn new(
        geometry: &Geometry,
        mode: &str,
        resolution: usize,
        samples: u64,
        seed: u64,
    ) -> PyResult<Self> {
        let g = geometry.0.clone();
        let p = match mode {
            "auto" => SausageProfile::auto(g),
            "analytic" => SausageProfile::new(g, SausageMode::Analytic).py()?,
            "grid" => SausageProfile::new(g, SausageMode::Grid { resolution }).py()?,
            "monte_carlo" => {
                SausageProfile::new(g, SausageMode::MonteCarlo { samples, seed }).py()?
            }
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown sausage mode '{other}'"
                )))
            }
        };
        Ok(Self(p))
    }
    /// (value, error estimate)
    fn mu(&self, width: f64) -> PyResult<(f64, f64)> {
        let m = self.0.mu(width).py()?;
        Ok((m.value, m.est_error))
    }
}

#[pyclass(frozen)]
struct Model(AsymptoticModel);

#[pymethods]
impl Model {
    #[new]
    #[pyo3(signature = (medium, geometry, assume_regular = false))]
    fn new(medium: &Medium, geometry: &Geometry, assume_regular: bool) -> Self {
        let m = AsymptoticModel::from_sausage(medium.0, SausageProfile::auto(geometry.0.clone()));
        Self(if assume_regular {
            m.assume_regular()
        } else {
            m
        })
    }
    fn de_gennes(&self, c: f64, d: f64) -> PyResult<Self> {
        Ok(Self(self.0.de_gennes(c, d).py()?))
    }
    fn evaluate(&self, formula: &str, t: f64) -> PyResult<f64> {
        self.0.evaluate(Formula::from_id(formula).py()?, t).py()
    }
    fn series(&self, formula: &str, times: Vec<f64>) -> PyResult<Vec<(f64, f64)>> {
        let s = self
            .0
            .series(Formula::from_id(formula).py()?, &times)
            .py()?;
        Ok(s.samples.iter().map(|x| (x.t, x.n)).collect())
    }
}

/// 2-D solver run described by a TOML or JSON config.
#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
struct Config(SolverConfig);

#[pymethods]
impl Config {
    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        Ok(Self(SolverConfig::from_toml_str(text).py()?))
    }
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self(SolverConfig::from_json_str(text).py()?))
    }
    fn to_toml(&self) -> PyResult<String> {
        self.0.to_toml_string().py()
    }
    /// samples as (t, N, mass)
    fn solve(&self, py: Python<'_>) -> PyResult<Vec<(f64, f64, f64)>> {
        let c = self.0.clone();
        let out = py
            .detach(move || {
                solver::solve_2d(&c.build_geometry()?, &c.medium()?, &c.solve_params()?)
            })
            .py()?;
        Ok(out
            .series
            .samples
            .iter()
            .map(|s| (s.t, s.n, s.mass.unwrap_or(f64::NAN)))
            .collect())
    }
}

#[pyclass(frozen)]
struct Report(experiment::ComparisonReport);

#[pymethods]
impl Report {
    #[getter]
    fn passed(&self) -> bool {
        self.0.passed()
    }
    #[getter]
    fn config_hash(&self) -> String {
        self.0.config_hash.clone()
    }
    /// (t, numeric or None, [formula values], deviation or None)
    #[allow(clippy::type_complexity)]
    fn rows(&self) -> Vec<(f64, Option<f64>, Vec<f64>, Option<f64>)> {
        self.0
            .rows
            .iter()
            .map(|r| (r.t, r.numeric, r.asymptotic.clone(), r.deviation))
            .collect()
    }
    fn checks(&self) -> Vec<String> {
        self.0.checks.iter().map(|c| c.describe()).collect()
    }
    fn compare_csv(&self) -> String {
        self.0.compare_csv()
    }
    fn summary(&self) -> String {
        self.0.summary()
    }
}

#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
struct Experiment(ExperimentConfig);

#[pymethods]
impl Experiment {
    #[staticmethod]
    fn preset(name: &str) -> PyResult<Self> {
        Ok(Self(experiment::preset(name).py()?))
    }
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self(ExperimentConfig::load(&path).py()?))
    }
    #[getter]
    fn name(&self) -> String {
        self.0.name.clone()
    }
    #[getter]
    fn config_hash(&self) -> String {
        self.0.hash()
    }
    fn to_toml(&self) -> PyResult<String> {
        self.0.to_toml_string().py()
    }
    #[pyo3(signature = (out = None, solve = true))]
    fn run(&self, py: Python<'_>, out: Option<PathBuf>, solve: bool) -> PyResult<Report> {
        let mut c = self.0.clone();
        c.solve = solve;
        let rep = py
            .detach(move || experiment::run(&c, out.as_deref()))
            .py()?;
        Ok(Report(rep))
    }
}

#[pyfunction]
fn c0() -> f64 {
    asymptotics::c0()
}

#[pyfunction]
fn c1() -> f64 {
    asymptotics::c1()
}

#[pyfunction]
fn beta(x: f64) -> PyResult<f64> {
    specfun::beta_coefficient(x).py()
}

/// 1-D transmission kernel G(s, s1, t) with the interface at 0 and Ω₊ = {s > 0}.
#[pyfunction]
fn kernel_1d(medium: &Medium, s: f64, s1: f64, t: f64) -> PyResult<f64> {
    green::kernel_1d(&medium.0, s, s1, t).py()
}

/// Step initial data on [−L, L]; returns (cell centres, field at t_end).
#[pyfunction]
fn solve_1d(
    medium: &Medium,
    half_width: f64,
    h: f64,
    dt: f64,
    t_end: f64,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let p = solver::Solve1dParams::new(half_width, h, dt, t_end);
    let sol = solver::solve_1d(&medium.0, &p).py()?;
    Ok((sol.centers.clone(), sol.last().to_vec()))
}

#[pymodule]
fn heatcontent_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Medium>()?;
    m.add_class::<Geometry>()?;
    m.add_class::<Sausage>()?;
    m.add_class::<Model>()?;
    m.add_class::<Config>()?;
    m.add_class::<Experiment>()?;
    m.add_class::<Report>()?;
    m.add_function(wrap_pyfunction!(c0, m)?)?;
    m.add_function(wrap_pyfunction!(c1, m)?)?;
    m.add_function(wrap_pyfunction!(beta, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_1d, m)?)?;
    m.add_function(wrap_pyfunction!(solve_1d, m)?)?;
    m.add("PRESETS", experiment::PRESETS.to_vec())?;
    Ok(())
}
