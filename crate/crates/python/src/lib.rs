//! Python module `platepatch`: build a problem, solve it, read traces and checks.

use num_complex::Complex64;
use platepatch::cli::config::RunConfig;
use platepatch::field::{LineDirection, Region, Solution};
use platepatch::kernels::Side;
use platepatch::linsolve::SolveReport;
use platepatch::model::{ContourId, ProblemSpec, ValidatedProblem};
use platepatch::presets;
use platepatch::verify::{self, SweepParameter, TraceSelector, VerifyError};
use pyo3::exceptions::{PyKeyError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

const DEFAULT_DEGREE: usize = 20;

fn solver_err(e: platepatch::Error) -> PyErr {
    match e {
        platepatch::Error::Model(_) => PyValueError::new_err(e.to_string()),
        platepatch::Error::Field(platepatch::field::FieldError::InvalidSide { .. }) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn verify_err(e: VerifyError) -> PyErr {
    match e {
        VerifyError::Solver(inner) => solver_err(inner),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse_side(side: &str) -> Result<Side, String> {
    match side.to_ascii_lowercase().as_str() {
        "plus" | "+" => Ok(Side::Plus),
        "minus" | "-" => Ok(Side::Minus),
        _ => Err(format!("side must be 'plus' or 'minus', got {side:?}")),
    }
}

fn parse_line(line: &str) -> Result<Option<LineDirection>, String> {
    match line.to_ascii_lowercase().as_str() {
        "auto" => Ok(None),
        "tangent" => Ok(Some(LineDirection::Tangent)),
        "normal" => Ok(Some(LineDirection::Normal)),
        _ => Err(format!("line must be 'auto', 'tangent' or 'normal', got {line:?}")),
    }
}

fn contour_id(problem: &ValidatedProblem, name: &str) -> PyResult<ContourId> {
    problem
        .find_contour(name)
        .ok_or_else(|| PyKeyError::new_err(format!("no contour named {name:?}")))
}

/// `None` picks the plate for holes and the patch itself for patch contours.
fn region_for(problem: &ValidatedProblem, id: ContourId, region: Option<&str>) -> PyResult<Region> {
    match (region.map(str::to_ascii_lowercase).as_deref(), id) {
        (None | Some("plate"), ContourId::Hole(_)) | (Some("plate"), ContourId::Patch(_)) => Ok(Region::Plate),
        (None | Some("patch"), ContourId::Patch(k)) => Ok(Region::Patch(k)),
        (Some("patch"), ContourId::Hole(j)) => problem
            .covering_patch(j)
            .map(Region::Patch)
            .ok_or_else(|| PyValueError::new_err(format!("no patch covers hole {}", problem.holes[j].name))),
        (Some(_), _) => match problem.find_contour(region.unwrap_or_default()) {
            Some(ContourId::Patch(k)) => Ok(Region::Patch(k)),
            _ => Err(PyValueError::new_err(format!("region must be 'plate', 'patch' or a patch name, got {region:?}"))),
        },
    }
}

/// A validated plate-and-patch configuration.
#[pyclass(name = "Problem", module = "platepatch", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyProblem {
    spec: ProblemSpec,
    problem: ValidatedProblem,
    degree: usize,
    nodes: Option<usize>,
}

impl PyProblem {
    fn build(spec: ProblemSpec, degree: usize, nodes: Option<usize>) -> PyResult<Self> {
        let problem = platepatch::validate(&spec).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PyProblem {
            spec,
            problem,
            degree,
            nodes,
        })
    }
}

#[pymethods]
impl PyProblem {
    /// Parses the same TOML document the command line reads.
    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        let cfg = RunConfig::parse(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let spec = cfg.problem().map_err(|e| PyValueError::new_err(e.to_string()))?;
        Self::build(spec, cfg.numerics.degree, cfg.quadrature_nodes())
    }

    /// Traction-free circular hole under unit tension along x.
    #[staticmethod]
    #[pyo3(signature = (radius = 0.5))]
    fn kirsch(radius: f64) -> PyResult<Self> {
        if !(radius > 0.0) {
            return Err(PyValueError::new_err("radius must be positive"));
        }
        Self::build(presets::kirsch_problem(radius), 12, None)
    }

    /// Two rounded-square holes at ∓1 with rounded-square patches.
    #[staticmethod]
    #[pyo3(signature = (alpha = std::f64::consts::FRAC_PI_4, full_bond = true, patch_radius = 0.75))]
    fn two_hole(alpha: f64, full_bond: bool, patch_radius: f64) -> PyResult<Self> {
        Self::build(presets::two_hole_problem(alpha, [full_bond; 2], patch_radius), DEFAULT_DEGREE, None)
    }

    /// Three circular holes under rounded-square patches at orientation `beta`.
    #[staticmethod]
    #[pyo3(signature = (beta = 0.0))]
    fn three_hole(beta: f64) -> PyResult<Self> {
        Self::build(presets::three_hole_problem(beta), DEFAULT_DEGREE, None)
    }

    /// Copy of the problem under a different remote load.
    fn with_far_field(&self, sigma1: f64, sigma2: f64, alpha: f64) -> PyResult<Self> {
        let mut spec = self.spec.clone();
        spec.far_field.sigma1 = sigma1;
        spec.far_field.sigma2 = sigma2;
        spec.far_field.alpha = alpha;
        Self::build(spec, self.degree, self.nodes)
    }

    /// Hole names followed by patch names.
    fn contours(&self) -> Vec<String> {
        self.problem
            .contour_ids()
            .into_iter()
            .map(|id| self.problem.contour_name(id).to_string())
            .collect()
    }

    /// (n, m, r): fully bonded patches, edge-bonded patches, free holes.
    #[getter]
    fn counts(&self) -> (usize, usize, usize) {
        (self.problem.n, self.problem.m, self.problem.r)
    }

    #[getter]
    fn degree(&self) -> usize {
        self.degree
    }

    fn system_order(&self, degree: usize) -> usize {
        self.problem.system_order(degree)
    }

    #[pyo3(signature = (degree = None, nodes = None))]
    fn solve(&self, py: Python<'_>, degree: Option<usize>, nodes: Option<usize>) -> PyResult<PySolution> {
        let degree = degree.unwrap_or(self.degree);
        let nodes = nodes.or(self.nodes);
        let problem = self.problem.clone();
        let (solution, report) = py.detach(move || platepatch::solve(&problem, degree, nodes)).map_err(solver_err)?;
        Ok(PySolution { solution, report })
    }

    fn __repr__(&self) -> String {
        let (n, m, r) = self.counts();
        format!("Problem(contours={:?}, n={n}, m={m}, r={r})", self.contours())
    }
}

/// Solved densities with evaluation helpers.
#[pyclass(name = "Solution", module = "platepatch", frozen)]
struct PySolution {
    solution: Solution,
    report: SolveReport,
}

#[pymethods]
impl PySolution {
    #[getter]
    fn degree(&self) -> usize {
        self.solution.degree()
    }

    #[getter]
    fn order(&self) -> usize {
        self.report.order
    }

    #[getter]
    fn residual_norm(&self) -> f64 {
        self.report.residual_norm
    }

    #[getter]
    fn condition_estimate(&self) -> Option<f64> {
        self.report.condition_estimate
    }

    #[getter]
    fn gauge_max(&self) -> f64 {
        self.report.gauge_max
    }

    /// σ_n and τ_n along a contour, sampled at `resolution` points of its parameter.
    #[pyo3(signature = (contour, region = None, side = "plus", resolution = verify::DEFAULT_RESOLUTION, line = "auto"))]
    fn trace<'py>(
        &self,
        py: Python<'py>,
        contour: &str,
        region: Option<&str>,
        side: &str,
        resolution: usize,
        line: &str,
    ) -> PyResult<Bound<'py, PyDict>> {
        let problem = self.solution.problem();
        let id = contour_id(problem, contour)?;
        let region = region_for(problem, id, region)?;
        let side = parse_side(side).map_err(PyValueError::new_err)?;
        let mut sel = TraceSelector::new(problem, id, region, side);
        if let Some(l) = parse_line(line).map_err(PyValueError::new_err)? {
            sel.line = l;
        }
        let t = sel.trace(&self.solution, resolution).map_err(solver_err)?;
        let d = PyDict::new(py);
        d.set_item("theta", &t.theta)?;
        d.set_item("sigma_n", &t.sigma_n)?;
        d.set_item("tau_n", &t.tau_n)?;
        d.set_item("max_sigma", t.max_sigma())?;
        d.set_item("max_tau", t.max_tau())?;
        Ok(d)
    }

    /// σ_n + iτ_n at an interior point on a line element with direction `direction`.
    #[pyo3(signature = (z, direction = Complex64::new(1.0, 0.0), region = None))]
    fn stress(&self, z: Complex64, direction: Complex64, region: Option<&str>) -> PyResult<Complex64> {
        let problem = self.solution.problem();
        let region = match region {
            None | Some("plate") => Region::Plate,
            Some(name) => match problem.find_contour(name) {
                Some(ContourId::Patch(k)) => Region::Patch(k),
                _ => return Err(PyValueError::new_err(format!("no patch named {name:?}"))),
            },
        };
        self.solution
            .stress_interior(region, z, direction)
            .map(|s| s.value)
            .map_err(|e| solver_err(e.into()))
    }

    /// Fourier coefficients (m, c_m) of one density block on a contour.
    fn coefficients(&self, contour: &str, block: &str) -> PyResult<Vec<(i32, Complex64)>> {
        let problem = self.solution.problem();
        let id = contour_id(problem, contour)?;
        let (_, series) = self
            .solution
            .densities()
            .iter()
            .find(|(b, _)| b.contour() == id && b.label() == block)
            .ok_or_else(|| PyKeyError::new_err(format!("contour {contour:?} has no {block:?} block")))?;
        Ok(series.iter().collect())
    }

    /// {(contour, condition): max mismatch}, probed between collocation nodes by default.
    #[pyo3(signature = (probes = None))]
    fn residuals<'py>(&self, py: Python<'py>, probes: Option<usize>) -> PyResult<Bound<'py, PyDict>> {
        let report = self.solution.bc_residuals(probes).map_err(|e| solver_err(e.into()))?;
        let d = PyDict::new(py);
        for e in report.entries {
            d.set_item((e.contour, e.condition), e.max_abs)?;
        }
        Ok(d)
    }

    /// ∮ g′ dτ per free hole and ∮ q dτ per patch.
    fn loop_integrals<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let l = self.solution.loop_integrals();
        let d = PyDict::new(py);
        for (name, v) in l.free_holes.into_iter().chain(l.patches) {
            d.set_item(name, v)?;
        }
        Ok(d)
    }
}

/// σ(1 − 2cos 2θ).
#[pyfunction]
#[pyo3(signature = (theta, sigma = 1.0))]
fn kirsch_hoop(theta: f64, sigma: f64) -> f64 {
    verify::kirsch_hoop(theta, sigma)
}

/// Solves the single free hole and compares its hoop stress with the closed form.
#[pyfunction]
#[pyo3(signature = (radius = 0.5, degree = 12, resolution = verify::DEFAULT_RESOLUTION))]
fn kirsch_check<'py>(py: Python<'py>, radius: f64, degree: usize, resolution: usize) -> PyResult<Bound<'py, PyDict>> {
    let k = verify::kirsch_check(radius, degree, resolution).map_err(verify_err)?;
    let d = PyDict::new(py);
    d.set_item("max_error", k.max_error)?;
    d.set_item("max_value", k.max_value)?;
    d.set_item("theta_at_max", k.theta_at_max)?;
    Ok(d)
}

#[pyfunction]
fn collocation_nodes(degree: usize) -> Vec<f64> {
    platepatch::basis::collocation_nodes(degree).nodes().to_vec()
}

/// Max |σ_n| and |τ_n| on the default traces for every value of `param`
/// ("patch_scale", "alpha" or "beta", angles in radians).
#[pyfunction]
#[pyo3(signature = (problem, param, values, degree = None))]
fn sweep<'py>(
    py: Python<'py>,
    problem: &PyProblem,
    param: &str,
    values: Vec<f64>,
    degree: Option<usize>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let param: SweepParameter = param.parse().map_err(PyValueError::new_err)?;
    let degree = degree.unwrap_or(problem.degree);
    let (spec, nodes) = (problem.spec.clone(), problem.nodes);
    let rows = py
        .detach(move || verify::sweep(&spec, param, &values, degree, nodes, &[], verify::DEFAULT_RESOLUTION))
        .map_err(verify_err)?;
    rows.into_iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("value", r.value)?;
            d.set_item("contour", r.contour)?;
            d.set_item("max_sigma_n", r.max_sigma)?;
            d.set_item("max_tau_n", r.max_tau)?;
            Ok(d)
        })
        .collect()
}

/// Trace differences of each degree against the largest one.
#[pyfunction]
fn convergence<'py>(py: Python<'py>, problem: &PyProblem, degrees: Vec<usize>) -> PyResult<Bound<'py, PyDict>> {
    let (p, nodes) = (problem.problem.clone(), problem.nodes);
    let r = py
        .detach(move || verify::convergence_study(&p, &degrees, nodes, &[], verify::DEFAULT_RESOLUTION))
        .map_err(verify_err)?;
    let d = PyDict::new(py);
    d.set_item("degrees", r.degrees)?;
    d.set_item("tails", r.tails)?;
    d.set_item("trace_deltas", r.trace_deltas)?;
    d.set_item("reference_max", r.reference_max)?;
    Ok(d)
}

#[pymodule]
#[pyo3(name = "platepatch")]
fn platepatch_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProblem>()?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(kirsch_hoop, m)?)?;
    m.add_function(wrap_pyfunction!(kirsch_check, m)?)?;
    m.add_function(wrap_pyfunction!(collocation_nodes, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(convergence, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sides_and_lines() {
        assert_eq!(parse_side("Plus"), Ok(Side::Plus));
        assert_eq!(parse_side("-"), Ok(Side::Minus));
        assert!(parse_side("inside").is_err());
        assert_eq!(parse_line("auto"), Ok(None));
        assert_eq!(parse_line("NORMAL"), Ok(Some(LineDirection::Normal)));
        assert!(parse_line("diagonal").is_err());
    }

    #[test]
    fn regions_follow_the_contour() {
        let p = platepatch::validate(&presets::fig2_problem(0.0, false)).unwrap();
        let l1 = p.find_contour("L1").unwrap();
        let g2 = p.find_contour("G2").unwrap();
        let region = |id, r| region_for(&p, id, r).ok();
        assert_eq!(region(l1, None), Some(Region::Plate));
        assert_eq!(region(g2, None), Some(Region::Patch(1)));
        assert_eq!(region(l1, Some("patch")), Some(Region::Patch(0)));
        assert_eq!(region(g2, Some("G1")), Some(Region::Patch(0)));
    }
}
