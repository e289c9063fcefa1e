//! Closed-form oracles, convergence studies and parameter sweeps.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::field::{LineDirection, StressTrace};
use crate::geometry::{Contour, CurveKind, GeometryError};
use crate::kernels::Side;
use crate::layers::Region;
use crate::model::{ContourId, ProblemSpec, ValidHoleKind, ValidatedProblem};
use crate::presets;

/// Trace resolution used when none is requested.
pub const DEFAULT_RESOLUTION: usize = 360;

/// Boundary hoop stress σ(1 − 2cos 2θ) of the classical Kirsch solution for a
/// traction-free circular hole under uniaxial tension σ along the real axis.
pub fn kirsch_hoop(theta: f64, sigma: f64) -> f64 {
    sigma * (1.0 - 2.0 * (2.0 * theta).cos())
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Solver(#[from] crate::Error),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("degree list must be non-empty and strictly increasing")]
    Degrees,
    #[error("parameter {param} is not exposed by this problem: {reason}")]
    NotExposed { param: SweepParameter, reason: String },
}

/// Which boundary stress to sample: contour, body, side and line element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceSelector {
    pub contour: ContourId,
    pub region: Region,
    pub side: Side,
    pub line: LineDirection,
}

impl TraceSelector {
    /// On a free hole the tangent-line traction is the prescribed load, so the
    /// normal line (the hoop stress) is sampled there; elsewhere the tangent line.
    pub fn new(problem: &ValidatedProblem, contour: ContourId, region: Region, side: Side) -> Self {
        let free = matches!(contour, ContourId::Hole(j) if matches!(problem.holes[j].kind, ValidHoleKind::Free { .. }));
        TraceSelector {
            contour,
            region,
            side,
            line: if free { LineDirection::Normal } else { LineDirection::Tangent },
        }
    }

    /// Plate side of every hole and patch side of every patch boundary.
    pub fn defaults(problem: &ValidatedProblem) -> Vec<Self> {
        let holes = (0..problem.holes.len()).map(|j| Self::new(problem, ContourId::Hole(j), Region::Plate, Side::Plus));
        let patches = (0..problem.patches.len()).map(|k| Self::new(problem, ContourId::Patch(k), Region::Patch(k), Side::Plus));
        holes.chain(patches).collect()
    }

    pub fn trace(&self, solution: &crate::Solution, resolution: usize) -> Result<StressTrace, crate::Error> {
        Ok(solution.trace_on(self.contour, self.region, self.side, resolution, self.line)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KirschCheck {
    /// max |σ_n − σ(1 − 2cos 2θ)| over the trace.
    pub max_error: f64,
    pub max_value: f64,
    pub theta_at_max: f64,
}

/// Solves the Kirsch problem at `degree` and compares the hoop stress with the
/// closed form at `resolution` equispaced angles.
pub fn kirsch_check(radius: f64, degree: usize, resolution: usize) -> Result<KirschCheck, VerifyError> {
    let problem = crate::validate(&presets::kirsch_problem(radius)).map_err(crate::Error::from)?;
    let (solution, _) = crate::solve(&problem, degree, None)?;
    let sel = TraceSelector::new(&problem, ContourId::Hole(0), Region::Plate, Side::Plus);
    let trace = sel.trace(&solution, resolution)?;
    let max_error = trace
        .theta
        .iter()
        .zip(&trace.sigma_n)
        .map(|(&t, &s)| (s - kirsch_hoop(t, 1.0)).abs())
        .fold(0.0, f64::max);
    let (theta_at_max, max_value) = trace.max_sigma();
    Ok(KirschCheck {
        max_error,
        max_value,
        theta_at_max,
    })
}

/// Per-degree convergence indicators, aligned with `degrees`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub degrees: Vec<usize>,
    /// max |c_m| over all blocks for |m| > N/2.
    pub tails: Vec<f64>,
    /// max of |Δσ_n| and |Δτ_n| over the selected traces, against the largest N.
    pub trace_deltas: Vec<f64>,
    /// max of |σ_n| and |τ_n| over the reference traces.
    pub reference_max: f64,
}

fn trace_values(traces: &[StressTrace]) -> Vec<f64> {
    traces.iter().flat_map(|t| t.sigma_n.iter().chain(&t.tau_n).copied()).collect()
}

/// Solves at every degree and compares each against the largest one.
/// An empty `traces` list uses [`TraceSelector::defaults`].
pub fn convergence_study(
    problem: &ValidatedProblem,
    degrees: &[usize],
    nodes: Option<usize>,
    traces: &[TraceSelector],
    resolution: usize,
) -> Result<ConvergenceReport, VerifyError> {
    if degrees.is_empty() || degrees.windows(2).any(|w| w[0] >= w[1]) {
        return Err(VerifyError::Degrees);
    }
    let defaults;
    let traces = if traces.is_empty() {
        defaults = TraceSelector::defaults(problem);
        &defaults[..]
    } else {
        traces
    };
    let mut tails = Vec::with_capacity(degrees.len());
    let mut samples = Vec::with_capacity(degrees.len());
    for &n in degrees {
        let (solution, _) = crate::solve(problem, n, nodes)?;
        let half = (n / 2) as i32;
        let tail = solution
            .densities()
            .iter()
            .flat_map(|(_, s)| s.iter().filter(|(m, _)| m.abs() > half).map(|(_, c)| c.norm()).collect::<Vec<_>>())
            .fold(0.0, f64::max);
        tails.push(tail);
        let t: Vec<StressTrace> = traces.iter().map(|s| s.trace(&solution, resolution)).collect::<Result<_, _>>()?;
        samples.push(trace_values(&t));
    }
    let reference = samples.last().expect("non-empty");
    let trace_deltas = samples
        .iter()
        .map(|s| s.iter().zip(reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
        .collect();
    Ok(ConvergenceReport {
        degrees: degrees.to_vec(),
        tails,
        trace_deltas,
        reference_max: reference.iter().map(|v| v.abs()).fold(0.0, f64::max),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepParameter {
    /// Circumscribed radius r of every patch, shape and centre kept.
    PatchScale,
    /// Direction α of the principal far-field stress σ₁.
    Alpha,
    /// Orientation β of rounded-square patches, rotation β − π/4.
    Beta,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::PatchScale => "patch_scale",
            SweepParameter::Alpha => "alpha",
            SweepParameter::Beta => "beta",
        }
    }

    /// Whether values are angles (subject to the degrees toggle).
    pub fn is_angle(self) -> bool {
        !matches!(self, SweepParameter::PatchScale)
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParameter {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "patch_scale" | "r" => Ok(SweepParameter::PatchScale),
            "alpha" => Ok(SweepParameter::Alpha),
            "beta" => Ok(SweepParameter::Beta),
            other => Err(format!("unknown sweep parameter `{other}` (expected patch_scale, alpha or beta)")),
        }
    }
}

fn rebuild(original: &Contour, kind: CurveKind) -> Result<Contour, GeometryError> {
    let c = Contour::new(kind)?;
    Ok(if original.is_reversed() { c.reversed() } else { c })
}

fn with_circumradius(contour: &Contour, r: f64) -> Result<Contour, VerifyError> {
    let kind = match contour.kind().clone() {
        CurveKind::Circle { center, .. } => CurveKind::Circle { center, radius: r },
        CurveKind::RoundedSquare {
            center,
            corner_divisor,
            rotation,
            ..
        } => CurveKind::RoundedSquare {
            center,
            scale: r / (1.0 + 1.0 / corner_divisor),
            corner_divisor,
            rotation,
        },
        CurveKind::Fourier { coefficients } => {
            let a0 = coefficients.get(&0).copied().unwrap_or_default();
            let samples = 4096;
            let current = (0..samples)
                .map(|i| (contour.point(2.0 * PI * i as f64 / samples as f64) - a0).norm())
                .fold(0.0, f64::max);
            let f = r / current;
            CurveKind::Fourier {
                coefficients: coefficients.into_iter().map(|(n, a)| (n, if n == 0 { a } else { a * f })).collect(),
            }
        }
    };
    Ok(rebuild(contour, kind)?)
}

/// Copy of `spec` with the swept parameter set to `value` (angles in radians).
pub fn apply_parameter(spec: &ProblemSpec, param: SweepParameter, value: f64) -> Result<ProblemSpec, VerifyError> {
    let mut out = spec.clone();
    match param {
        SweepParameter::Alpha => out.far_field.alpha = value,
        SweepParameter::PatchScale => {
            if out.patches.is_empty() {
                return Err(VerifyError::NotExposed {
                    param,
                    reason: "the problem has no patches".into(),
                });
            }
            for p in &mut out.patches {
                p.contour = with_circumradius(&p.contour, value)?;
            }
        }
        SweepParameter::Beta => {
            let mut any = false;
            for p in &mut out.patches {
                match p.contour.kind().clone() {
                    CurveKind::RoundedSquare {
                        center,
                        scale,
                        corner_divisor,
                        ..
                    } => {
                        any = true;
                        p.contour = rebuild(
                            &p.contour,
                            CurveKind::RoundedSquare {
                                center,
                                scale,
                                corner_divisor,
                                rotation: value - PI / 4.0,
                            },
                        )?;
                    }
                    CurveKind::Circle { .. } => {}
                    CurveKind::Fourier { .. } => {
                        return Err(VerifyError::NotExposed {
                            param,
                            reason: format!("patch {} is a general Fourier curve", p.name),
                        })
                    }
                }
            }
            if !any {
                return Err(VerifyError::NotExposed {
                    param,
                    reason: "no rounded-square patch to orient".into(),
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub contour: String,
    pub region: Region,
    pub side: Side,
    pub max_sigma: f64,
    pub max_tau: f64,
}

fn sweep_point(
    spec: &ProblemSpec,
    param: SweepParameter,
    value: f64,
    degree: usize,
    nodes: Option<usize>,
    traces: &[TraceSelector],
    resolution: usize,
) -> Result<Vec<SweepRow>, VerifyError> {
    let problem = crate::validate(&apply_parameter(spec, param, value)?).map_err(crate::Error::from)?;
    let (solution, _) = crate::solve(&problem, degree, nodes)?;
    let defaults;
    let traces = if traces.is_empty() {
        defaults = TraceSelector::defaults(&problem);
        &defaults[..]
    } else {
        traces
    };
    traces
        .iter()
        .map(|sel| {
            let t = sel.trace(&solution, resolution)?;
            Ok(SweepRow {
                value,
                contour: problem.contour_name(sel.contour).to_string(),
                region: sel.region,
                side: sel.side,
                max_sigma: t.max_sigma().1,
                max_tau: t.max_tau().1,
            })
        })
        .collect()
}

/// Solves the problem at every value and records max |σ_n|, max |τ_n| per
/// selected trace. Values are solved in parallel; rows come out in value order.
pub fn sweep(
    spec: &ProblemSpec,
    param: SweepParameter,
    values: &[f64],
    degree: usize,
    nodes: Option<usize>,
    traces: &[TraceSelector],
    resolution: usize,
) -> Result<Vec<SweepRow>, VerifyError> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(values.len()).max(1);
    let mut results: Vec<Option<Result<Vec<SweepRow>, VerifyError>>> = (0..values.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                scope.spawn(move || {
                    (w..values.len())
                        .step_by(workers)
                        .map(|i| (i, sweep_point(spec, param, values[i], degree, nodes, traces, resolution)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("sweep worker panicked") {
                results[i] = Some(r);
            }
        }
    });
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r.expect("every value solved")?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kirsch_formula() {
        assert!((kirsch_hoop(PI / 2.0, 1.0) - 3.0).abs() < 1e-15);
        assert!((kirsch_hoop(0.0, 1.0) + 1.0).abs() < 1e-15);
        assert_eq!(kirsch_hoop(1.234, 0.0), 0.0);
    }

    #[test]
    fn parameter_names() {
        for p in [SweepParameter::PatchScale, SweepParameter::Alpha, SweepParameter::Beta] {
            assert_eq!(p.name().parse::<SweepParameter>().unwrap(), p);
        }
        assert!("gamma".parse::<SweepParameter>().is_err());
    }

    #[test]
    fn circumradius_of_rescaled_patches() {
        let spec = apply_parameter(&presets::fig2_problem(0.0, true), SweepParameter::PatchScale, 0.9).unwrap();
        for p in &spec.patches {
            let centre = p.contour.centroid();
            let r = (0..1024)
                .map(|i| (p.contour.point(2.0 * PI * i as f64 / 1024.0) - centre).norm())
                .fold(0.0, f64::max);
            assert!((r - 0.9).abs() < 1e-12, "{r}");
        }
    }

    #[test]
    fn beta_requires_rounded_squares() {
        let kirsch = presets::kirsch_problem(0.5);
        assert!(matches!(
            apply_parameter(&kirsch, SweepParameter::Beta, 0.3),
            Err(VerifyError::NotExposed { .. })
        ));
        let rotated = apply_parameter(&presets::three_hole_problem(0.0), SweepParameter::Beta, 0.4).unwrap();
        assert_eq!(rotated, presets::three_hole_problem(0.4));
    }

    #[test]
    fn degree_list_must_increase() {
        let p = crate::validate(&presets::kirsch_problem(0.5)).unwrap();
        assert!(matches!(convergence_study(&p, &[8, 4], None, &[], 16), Err(VerifyError::Degrees)));
        assert!(matches!(convergence_study(&p, &[], None, &[], 16), Err(VerifyError::Degrees)));
    }
}
