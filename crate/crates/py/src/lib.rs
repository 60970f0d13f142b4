//! Python bindings for the reconstruction library.

use std::path::PathBuf;

use bimrecon::io::{self, CloudFormat};
use bimrecon::synth::{self, SceneSpec};
use bimrecon::{BimModel, Error, LabelMap, LabeledPointCloud, PipelineConfig, Point3, SemanticClass};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(bimrecon_py, BimreconError, PyException);

fn to_py(err: Error) -> PyErr {
    match err {
        Error::Io(e) => PyOSError::new_err(e.to_string()),
        Error::InvalidConfig(_) | Error::InvalidSpec(_) | Error::UnsupportedFormat(_) => PyValueError::new_err(err.to_string()),
        other => BimreconError::new_err(other.to_string()),
    }
}

fn json_to_py<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

fn class_from_name(name: &str) -> PyResult<SemanticClass> {
    SemanticClass::ALL
        .iter()
        .copied()
        .find(|c| c.name() == name)
        .ok_or_else(|| PyValueError::new_err(format!("unknown class '{name}'")))
}

fn parse_format(format: Option<&str>) -> PyResult<Option<CloudFormat>> {
    format.map(|f| f.parse().map_err(to_py)).transpose()
}

/// A point cloud with one semantic class per point.
#[pyclass(name = "PointCloud", module = "bimrecon_py", from_py_object)]
#[derive(Clone)]
struct PyPointCloud {
    inner: LabeledPointCloud,
}

#[pymethods]
impl PyPointCloud {
    /// Builds a cloud from `[(x, y, z), ...]` and class names.
    #[new]
    fn new(points: Vec<[f64; 3]>, labels: Vec<String>) -> PyResult<Self> {
        let labels = labels.iter().map(|l| class_from_name(l)).collect::<PyResult<Vec<_>>>()?;
        let points = points.iter().map(|p| Point3::new(p[0], p[1], p[2])).collect();
        Ok(Self {
            inner: LabeledPointCloud::new(points, labels).map_err(to_py)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (path, format=None, labels=None))]
    fn read(path: PathBuf, format: Option<&str>, labels: Option<&str>) -> PyResult<Self> {
        let map = match labels {
            Some(s) => LabelMap::parse(s).map_err(to_py)?,
            None => LabelMap::default(),
        };
        let (inner, _) = io::read_point_cloud(&path, parse_format(format)?, &map).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[pyo3(signature = (path, format=None))]
    fn write(&self, path: PathBuf, format: Option<&str>) -> PyResult<()> {
        let format = match parse_format(format)? {
            Some(f) => f,
            None => CloudFormat::from_path(&path).map_err(to_py)?,
        };
        io::write_point_cloud(&path, &self.inner, format).map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn points(&self) -> Vec<[f64; 3]> {
        self.inner.points.iter().map(|p| [p.x, p.y, p.z]).collect()
    }

    fn labels(&self) -> Vec<&'static str> {
        self.inner.labels.iter().map(|l| l.name()).collect()
    }

    fn class_counts<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for (c, n) in self.inner.class_counts() {
            d.set_item(c.name(), n)?;
        }
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("PointCloud({} points)", self.inner.len())
    }
}

/// Pipeline parameters.
#[pyclass(name = "Config", module = "bimrecon_py", from_py_object)]
#[derive(Clone)]
struct PyConfig {
    inner: PipelineConfig,
}

#[pymethods]
impl PyConfig {
    #[new]
    fn new() -> Self {
        Self {
            inner: PipelineConfig::default(),
        }
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: PipelineConfig::from_toml_str(text).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: PipelineConfig::load(&path).map_err(to_py)?,
        })
    }

    fn to_toml(&self) -> String {
        self.inner.to_toml_string()
    }

    /// The same configuration with uniform seeding and no topology refinement.
    fn baseline(&self) -> Self {
        Self {
            inner: self.inner.clone().baseline(),
        }
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[setter]
    fn set_seed(&mut self, seed: u64) {
        self.inner.seed = seed;
    }

    #[getter]
    fn topology_refinement(&self) -> bool {
        self.inner.topology_refinement
    }

    fn __repr__(&self) -> String {
        format!("Config(seed={})", self.inner.seed)
    }
}

/// A building model with storeys, walls, doors and columns.
#[pyclass(name = "Model", module = "bimrecon_py", from_py_object)]
#[derive(Clone)]
struct PyModel {
    inner: BimModel,
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: io::read_bim_json(text).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: io::load_bim_json(&path).map_err(to_py)?,
        })
    }

    fn to_json(&self) -> String {
        io::write_bim_json(&self.inner)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_to_py(py, &io::write_bim_json(&self.inner))
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        io::save_bim_json(&path, &self.inner).map_err(to_py)
    }

    fn to_ifc(&self) -> String {
        io::export_ifc_string(&self.inner, self.inner.provenance.seed)
    }

    fn export_ifc(&self, path: PathBuf) -> PyResult<()> {
        io::export_ifc(&self.inner, &path).map_err(to_py)
    }

    #[getter]
    fn n_storeys(&self) -> usize {
        self.inner.storeys.len()
    }

    #[getter]
    fn n_walls(&self) -> usize {
        self.inner.walls.len()
    }

    #[getter]
    fn n_doors(&self) -> usize {
        self.inner.doors.len()
    }

    #[getter]
    fn n_columns(&self) -> usize {
        self.inner.columns.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(storeys={}, walls={}, doors={}, columns={})",
            self.inner.storeys.len(),
            self.inner.walls.len(),
            self.inner.doors.len(),
            self.inner.columns.len()
        )
    }
}

/// Runs the full pipeline; returns the model and a run report dict.
#[pyfunction]
#[pyo3(signature = (cloud, config=None))]
fn reconstruct<'py>(py: Python<'py>, cloud: &PyPointCloud, config: Option<&PyConfig>) -> PyResult<(PyModel, Bound<'py, PyAny>)> {
    let cfg = config.map(|c| c.inner.clone()).unwrap_or_default();
    let cloud = &cloud.inner;
    let rec = py.detach(|| bimrecon::reconstruct(cloud, &cfg)).map_err(to_py)?;
    let report = serde_json::to_string(&rec.report).map_err(|e| BimreconError::new_err(e.to_string()))?;
    Ok((PyModel { inner: rec.model }, json_to_py(py, &report)?))
}

/// Per-class 3D-IoU and vIoU of `pred` against `gt`, as a dict.
#[pyfunction]
#[pyo3(signature = (pred, gt, voxel_size=0.05))]
fn evaluate<'py>(py: Python<'py>, pred: &PyModel, gt: &PyModel, voxel_size: f64) -> PyResult<Bound<'py, PyAny>> {
    if !(voxel_size.is_finite() && voxel_size > 0.0) {
        return Err(PyValueError::new_err("voxel_size must be positive"));
    }
    let (p, g) = (&pred.inner, &gt.inner);
    let report = py.detach(|| bimrecon::metrics::evaluate(p, g, voxel_size));
    let text = serde_json::to_string(&report).map_err(|e| BimreconError::new_err(e.to_string()))?;
    json_to_py(py, &text)
}

/// Samples a synthetic scene from a TOML description, or from one of the
/// presets "room", "multi_room" and "benchmark".
#[pyfunction]
#[pyo3(signature = (spec=None, preset=None, seed=None))]
fn synth_scene(py: Python<'_>, spec: Option<&str>, preset: Option<&str>, seed: Option<u64>) -> PyResult<(PyPointCloud, PyModel)> {
    let mut scene_spec = match (spec, preset) {
        (Some(text), None) => SceneSpec::from_toml_str(text).map_err(to_py)?,
        (None, Some("room")) => SceneSpec::room(6.0, 4.0),
        (None, Some("multi_room")) => SceneSpec::multi_room(seed.unwrap_or(0)),
        (None, Some("benchmark")) => SceneSpec::two_storey_benchmark(),
        (None, Some(other)) => return Err(PyValueError::new_err(format!("unknown preset '{other}'"))),
        _ => return Err(PyValueError::new_err("pass exactly one of spec and preset")),
    };
    if let Some(seed) = seed {
        scene_spec.seed = seed;
    }
    let scene = py.detach(|| synth::generate(&scene_spec)).map_err(to_py)?;
    Ok((PyPointCloud { inner: scene.cloud }, PyModel { inner: scene.model }))
}

#[pymodule]
fn bimrecon_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("BimreconError", m.py().get_type::<BimreconError>())?;
    m.add_class::<PyPointCloud>()?;
    m.add_class::<PyConfig>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(reconstruct, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(synth_scene, m)?)?;
    Ok(())
}
