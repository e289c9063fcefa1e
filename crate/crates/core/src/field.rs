//! Potentials, stresses and displacement derivatives from solved densities.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::basis::{CollocationGrid, FourierCoeffs};
use crate::geometry::GeometryError;
use crate::kernels::{default_quadrature_nodes, CauchyStencil, KernelError, LayerMoments, SampledDensity, Side, Target};
use crate::layers::{hole_moment, plate_constants, region_kappa, region_layers, region_shear_modulus, Discretization, Potentials};
pub use crate::layers::Region;
use crate::model::{ContourId, UnknownBlock, ValidHoleKind, ValidatedProblem};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Error)]
pub enum FieldError {
    #[error(transparent)]
    Kernel(KernelError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("point {z} lies within {distance:.3e} of a contour; evaluate it as a boundary limit instead")]
    NearBoundary { z: Complex64, distance: f64 },
    #[error("point {z} is not inside {region:?}")]
    OutsideRegion { z: Complex64, region: Region },
    #[error("{region:?} has no material on the {side:?} side of contour {contour}")]
    InvalidSide { contour: String, region: Region, side: Side },
    #[error("unknown patch index {0}")]
    UnknownPatch(usize),
    #[error("density set does not match the problem's unknown blocks")]
    Mismatch,
}

impl From<KernelError> for FieldError {
    fn from(e: KernelError) -> Self {
        match e {
            KernelError::NearSingular { z, distance } => FieldError::NearBoundary { z, distance },
            other => FieldError::Kernel(other),
        }
    }
}

/// Fourier coefficients of every unknown density, in block order.
#[derive(Debug, Clone, PartialEq)]
pub struct DensitySet {
    blocks: Vec<UnknownBlock>,
    series: Vec<FourierCoeffs>,
    /// Concentrated-moment strength at the centre of each hole (zero on free holes).
    hole_moments: Vec<f64>,
}

impl DensitySet {
    pub fn new(blocks: Vec<UnknownBlock>, series: Vec<FourierCoeffs>) -> Self {
        assert_eq!(blocks.len(), series.len());
        DensitySet {
            blocks,
            series,
            hole_moments: Vec::new(),
        }
    }

    pub fn with_hole_moments(mut self, moments: Vec<f64>) -> Self {
        self.hole_moments = moments;
        self
    }

    pub fn hole_moments(&self) -> &[f64] {
        &self.hole_moments
    }

    pub fn zeros(problem: &ValidatedProblem, degree: usize) -> Self {
        DensitySet {
            blocks: problem.blocks.clone(),
            series: problem.blocks.iter().map(|_| FourierCoeffs::zeros(degree)).collect(),
            hole_moments: vec![0.0; problem.holes.len()],
        }
    }

    pub fn degree(&self) -> usize {
        self.series.first().map_or(0, FourierCoeffs::degree)
    }

    pub fn get(&self, block: UnknownBlock) -> Option<&FourierCoeffs> {
        self.blocks.iter().position(|&b| b == block).map(|i| &self.series[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (UnknownBlock, &FourierCoeffs)> {
        self.blocks.iter().copied().zip(&self.series)
    }

    pub fn max_abs(&self) -> f64 {
        self.series.iter().map(FourierCoeffs::max_abs).fold(0.0, f64::max)
    }
}

/// Side of a boundary evaluation, or an interior point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalSide {
    Interior,
    Plus,
    Minus,
}

impl From<Side> for EvalSide {
    fn from(s: Side) -> Self {
        match s {
            Side::Plus => EvalSide::Plus,
            Side::Minus => EvalSide::Minus,
        }
    }
}

/// Orientation of the line element on which the traction is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineDirection {
    /// Along the contour: σ_n is the normal traction on the boundary.
    Tangent,
    /// Across the contour: on a free hole σ_n is the hoop stress.
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StressSample {
    pub location: Complex64,
    /// Unit tangent of the line element.
    pub direction: Complex64,
    pub region: Region,
    pub side: EvalSide,
    /// σ_n + iτ_n
    pub value: Complex64,
}

/// Stresses along a contour. `theta` is the parameter of the contour as it
/// was defined, before any orientation normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct StressTrace {
    pub contour: ContourId,
    pub region: Region,
    pub side: Side,
    pub theta: Vec<f64>,
    pub sigma_n: Vec<f64>,
    pub tau_n: Vec<f64>,
}

/// (θ, max |v|); values within rounding of the maximum count as ties and the
/// first of them is reported.
fn argmax_abs(theta: &[f64], v: &[f64]) -> (f64, f64) {
    let max = v.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
    let at = theta.iter().zip(v).find(|(_, x)| x.abs() >= max * (1.0 - 1e-12)).map_or(0.0, |(&t, _)| t);
    (at, max)
}

impl StressTrace {
    /// (θ, max |σ_n|)
    pub fn max_sigma(&self) -> (f64, f64) {
        argmax_abs(&self.theta, &self.sigma_n)
    }

    /// (θ, max |τ_n|)
    pub fn max_tau(&self) -> (f64, f64) {
        argmax_abs(&self.theta, &self.tau_n)
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }
}

/// `σ_n + iτ_n` on a line element with direction `dt` through `t`.
pub fn stress_at(p: &Potentials, t: Complex64, dt: Complex64) -> Complex64 {
    p.stress(t, dt.conj() / dt)
}

/// `d(u+iv)/dt` along `dt`.
pub fn displacement_derivative(p: &Potentials, shear_modulus: f64, kappa: f64, t: Complex64, dt: Complex64) -> Complex64 {
    p.scaled_displacement_derivative(kappa, t, dt.conj() / dt) / (2.0 * shear_modulus)
}

#[derive(Debug, Clone, Copy)]
enum Point {
    Free(Complex64),
    Boundary { contour: ContourId, theta: f64, side: Side },
}

/// Max absolute mismatch of one boundary condition on one contour.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualEntry {
    pub contour: String,
    pub condition: &'static str,
    pub max_abs: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResidualReport {
    pub entries: Vec<ResidualEntry>,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        self.entries.iter().map(|e| e.max_abs).fold(0.0, f64::max)
    }

    pub fn get(&self, contour: &str, condition: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.contour == contour && e.condition == condition)
            .map(|e| e.max_abs)
    }
}

/// Aux integrals that must vanish after a solve.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopIntegrals {
    /// (hole name, ∮ g′ dτ) per free hole.
    pub free_holes: Vec<(String, Complex64)>,
    /// (patch name, ∮ q dτ) per patch.
    pub patches: Vec<(String, Complex64)>,
}

impl LoopIntegrals {
    pub fn max_abs(&self) -> f64 {
        self.free_holes
            .iter()
            .chain(&self.patches)
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max)
    }
}

/// A problem together with its solved densities, ready for evaluation.
#[derive(Debug, Clone)]
pub struct Solution {
    problem: ValidatedProblem,
    densities: DensitySet,
    disc: Discretization,
    /// Samples of each block's density on its contour grid, in block order.
    samples: Vec<SampledDensity>,
}

impl Solution {
    pub fn new(problem: ValidatedProblem, densities: DensitySet, nodes: Option<usize>) -> Result<Self, FieldError> {
        if densities.blocks != problem.blocks {
            return Err(FieldError::Mismatch);
        }
        let nodes = nodes.unwrap_or_else(|| default_quadrature_nodes(densities.degree()));
        let disc = Discretization::new(&problem, nodes)?;
        let samples = densities
            .iter()
            .map(|(b, f)| sample(f, disc.quad(b.contour())))
            .collect();
        Ok(Solution {
            problem,
            densities,
            disc,
            samples,
        })
    }

    pub fn problem(&self) -> &ValidatedProblem {
        &self.problem
    }

    pub fn densities(&self) -> &DensitySet {
        &self.densities
    }

    pub fn degree(&self) -> usize {
        self.densities.degree()
    }

    fn check_inside(&self, region: Region, z: Complex64) -> Result<(), FieldError> {
        let winding = |id| {
            self.problem.contour(id).winding_number(z).map_err(|_| FieldError::NearBoundary { z, distance: 0.0 })
        };
        let inside = match region {
            Region::Plate => {
                let mut ok = true;
                for j in 0..self.problem.holes.len() {
                    ok &= winding(ContourId::Hole(j))? == 0;
                }
                ok
            }
            Region::Patch(k) => {
                if k >= self.problem.patches.len() {
                    return Err(FieldError::UnknownPatch(k));
                }
                winding(ContourId::Patch(k))? == 1
            }
        };
        if inside {
            Ok(())
        } else {
            Err(FieldError::OutsideRegion { z, region })
        }
    }

    /// Whether `region` has material on `side` of `contour`.
    pub fn side_is_material(&self, contour: ContourId, region: Region, side: Side) -> bool {
        match (region, contour) {
            (Region::Plate, ContourId::Hole(_)) => side == Side::Plus,
            (Region::Plate, ContourId::Patch(_)) => true,
            (Region::Patch(k), ContourId::Patch(kk)) => k == kk && side == Side::Plus,
            (Region::Patch(k), ContourId::Hole(j)) => {
                let probe = self.problem.holes[j].contour.point(0.0);
                matches!(self.problem.patches[k].contour.winding_number(probe), Ok(1))
            }
        }
    }

    fn potentials(&self, region: Region, point: Point) -> Result<Potentials, FieldError> {
        let z = match point {
            Point::Free(z) => z,
            Point::Boundary { contour, theta, .. } => self.problem.contour(contour).point(theta),
        };
        let mut out = match region {
            Region::Plate => {
                let mut p = plate_constants(&self.problem, z);
                for (j, &w) in self.densities.hole_moments.iter().enumerate() {
                    if w != 0.0 {
                        let h = hole_moment(&self.problem, j, z);
                        p.psi += w * h.psi;
                    }
                }
                p
            }
            Region::Patch(_) => Potentials::default(),
        };
        for (block, coupling) in region_layers(&self.problem, region) {
            let bi = self.problem.block_index(block).expect("known block");
            let src = block.contour();
            let quad = self.disc.quad(src);
            let series = &self.densities.series[bi];
            let mom: LayerMoments = match point {
                Point::Boundary { contour, theta, side } if contour == src => {
                    let stencil = CauchyStencil::new(quad, Target::Limit(theta, side))?;
                    stencil.moments(quad, &self.samples[bi], Some(series.eval_with_derivs(theta)))
                }
                _ => match quad.resolving(z)? {
                    None => CauchyStencil::new(quad, Target::OffContour(z))?.moments(quad, &self.samples[bi], None),
                    Some(fine) => {
                        let dens = sample(series, &fine);
                        CauchyStencil::new(&fine, Target::OffContour(z))?.moments(&fine, &dens, None)
                    }
                },
            };
            out += Potentials::from_moments(&coupling, &mom);
        }
        Ok(out)
    }

    /// Φ, Φ′, Ψ of the plate at an interior point.
    pub fn potentials_plate(&self, z: Complex64) -> Result<Potentials, FieldError> {
        self.check_inside(Region::Plate, z)?;
        self.potentials(Region::Plate, Point::Free(z))
    }

    /// Φ_k, Φ_k′, Ψ_k of patch `k` at an interior point.
    pub fn potentials_patch(&self, k: usize, z: Complex64) -> Result<Potentials, FieldError> {
        self.check_inside(Region::Patch(k), z)?;
        self.potentials(Region::Patch(k), Point::Free(z))
    }

    pub fn stress_interior(&self, region: Region, z: Complex64, dt: Complex64) -> Result<StressSample, FieldError> {
        self.check_inside(region, z)?;
        let p = self.potentials(region, Point::Free(z))?;
        let direction = dt / dt.norm();
        Ok(StressSample {
            location: z,
            direction,
            region,
            side: EvalSide::Interior,
            value: stress_at(&p, z, direction),
        })
    }

    fn boundary_potentials(&self, contour: ContourId, theta: f64, region: Region, side: Side) -> Result<Potentials, FieldError> {
        if !self.side_is_material(contour, region, side) {
            return Err(FieldError::InvalidSide {
                contour: self.problem.contour_name(contour).to_string(),
                region,
                side,
            });
        }
        self.potentials(region, Point::Boundary { contour, theta, side })
    }

    /// One-sided limit of σ_n + iτ_n at θ on `contour`.
    pub fn boundary_stress(&self, contour: ContourId, theta: f64, region: Region, side: Side) -> Result<StressSample, FieldError> {
        self.boundary_stress_on(contour, theta, region, side, LineDirection::Tangent)
    }

    pub fn boundary_stress_on(
        &self,
        contour: ContourId,
        theta: f64,
        region: Region,
        side: Side,
        line: LineDirection,
    ) -> Result<StressSample, FieldError> {
        let p = self.boundary_potentials(contour, theta, region, side)?;
        Ok(self.sample_from(&p, contour, theta, region, side, line))
    }

    fn sample_from(&self, p: &Potentials, contour: ContourId, theta: f64, region: Region, side: Side, line: LineDirection) -> StressSample {
        let c = self.problem.contour(contour);
        let t = c.point(theta);
        let d1 = c.derivative(theta, 1);
        let tangent = d1 / d1.norm();
        let direction = match line {
            LineDirection::Tangent => tangent,
            LineDirection::Normal => Complex64::i() * tangent,
        };
        StressSample {
            location: t,
            direction,
            region,
            side: side.into(),
            value: stress_at(p, t, direction),
        }
    }

    /// One-sided limit of d(u+iv)/dt along the contour tangent.
    pub fn boundary_displacement_derivative(&self, contour: ContourId, theta: f64, region: Region, side: Side) -> Result<Complex64, FieldError> {
        let p = self.boundary_potentials(contour, theta, region, side)?;
        Ok(self.disp_from(&p, contour, theta, region))
    }

    fn disp_from(&self, p: &Potentials, contour: ContourId, theta: f64, region: Region) -> Complex64 {
        let c = self.problem.contour(contour);
        let mu = region_shear_modulus(&self.problem, region);
        displacement_derivative(p, mu, region_kappa(&self.problem, region), c.point(theta), c.derivative(theta, 1))
    }

    /// `resolution` uniformly spaced boundary samples starting at θ = 0.
    pub fn trace(&self, contour: ContourId, region: Region, side: Side, resolution: usize) -> Result<StressTrace, FieldError> {
        self.trace_on(contour, region, side, resolution, LineDirection::Tangent)
    }

    pub fn trace_on(&self, contour: ContourId, region: Region, side: Side, resolution: usize, line: LineDirection) -> Result<StressTrace, FieldError> {
        let theta: Vec<f64> = (0..resolution).map(|i| 2.0 * PI * i as f64 / resolution as f64).collect();
        let dir = if self.problem.contour(contour).is_reversed() { -1.0 } else { 1.0 };
        let mut sigma_n = Vec::with_capacity(resolution);
        let mut tau_n = Vec::with_capacity(resolution);
        for &t in &theta {
            let v = self.boundary_stress_on(contour, dir * t, region, side, line)?.value;
            sigma_n.push(v.re);
            tau_n.push(v.im);
        }
        Ok(StressTrace {
            contour,
            region,
            side,
            theta,
            sigma_n,
            tau_n,
        })
    }

    /// `∮ g′ dτ` on free holes and `∮ q dτ` on patch edges.
    pub fn loop_integrals(&self) -> LoopIntegrals {
        let integral = |block: UnknownBlock| {
            let bi = self.problem.block_index(block).expect("known block");
            self.disc.quad(block.contour()).contour_integral(&self.samples[bi].values)
        };
        LoopIntegrals {
            free_holes: self
                .problem
                .holes
                .iter()
                .enumerate()
                .filter(|(_, h)| !h.is_bonded())
                .map(|(j, h)| (h.name.clone(), integral(UnknownBlock::PlateGPrime(j))))
                .collect(),
            patches: self
                .problem
                .patches
                .iter()
                .enumerate()
                .map(|(k, p)| (p.name.clone(), integral(UnknownBlock::PlateQ(k))))
                .collect(),
        }
    }

    /// Mismatch of every boundary condition at probe angles; `None` uses the
    /// midpoints between collocation nodes.
    ///
    /// Displacement conditions are compared as 2μ·d(u+iv)/dt with the plate
    /// shear modulus, so every entry is in stress units.
    pub fn bc_residuals(&self, probes: Option<usize>) -> Result<ResidualReport, FieldError> {
        let thetas = match probes {
            None => CollocationGrid::new(self.degree()).midpoints(),
            Some(n) => (0..n).map(|i| 2.0 * PI * (i as f64 + 0.5) / n as f64).collect(),
        };
        let p = &self.problem;
        let two_mu = 2.0 * p.plate.shear_modulus;
        let mut entries = Vec::new();
        let mut push = |contour: &str, condition: &'static str, values: Vec<f64>| {
            entries.push(ResidualEntry {
                contour: contour.to_string(),
                condition,
                max_abs: values.into_iter().fold(0.0, f64::max),
            });
        };
        let at = |id, region, side: Side, theta| -> Result<(Complex64, Complex64), FieldError> {
            let pot = self.potentials(region, Point::Boundary { contour: id, theta, side })?;
            let s = self.sample_from(&pot, id, theta, region, side, LineDirection::Tangent).value;
            Ok((s, two_mu * self.disp_from(&pot, id, theta, region)))
        };
        for (j, hole) in p.holes.iter().enumerate() {
            let id = ContourId::Hole(j);
            match &hole.kind {
                ValidHoleKind::Bonded { patch } => {
                    let k = *patch;
                    let d = p.patches[k].thickness_ratio;
                    let (mut disp, mut cont, mut force) = (vec![], vec![], vec![]);
                    for &t in &thetas {
                        let (s, u) = at(id, Region::Plate, Side::Plus, t)?;
                        let (sp, up) = at(id, Region::Patch(k), Side::Plus, t)?;
                        let (sm, um) = at(id, Region::Patch(k), Side::Minus, t)?;
                        disp.push((u - up).norm());
                        cont.push((up - um).norm());
                        force.push((s + d * (sp - sm)).norm());
                    }
                    push(&hole.name, "displacement_plate_patch", disp);
                    push(&hole.name, "displacement_patch_continuity", cont);
                    push(&hole.name, "traction_balance", force);
                }
                ValidHoleKind::Free { load, .. } => {
                    let mut res = vec![];
                    for &t in &thetas {
                        let (s, _) = at(id, Region::Plate, Side::Plus, t)?;
                        res.push((s - load.eval(t)).norm());
                    }
                    push(&hole.name, "traction_load", res);
                }
            }
        }
        for (k, patch) in p.patches.iter().enumerate() {
            let id = ContourId::Patch(k);
            let d = patch.thickness_ratio;
            let q = &self.densities.series[p.block_index(UnknownBlock::PlateQ(k)).expect("q block")];
            let (mut across, mut match_, mut force, mut exterior, mut edge) = (vec![], vec![], vec![], vec![], vec![]);
            for &t in &thetas {
                let (s_in, u_in) = at(id, Region::Plate, Side::Plus, t)?;
                let (s_out, u_out) = at(id, Region::Plate, Side::Minus, t)?;
                let (sk, uk) = at(id, Region::Patch(k), Side::Plus, t)?;
                let (sk_out, uk_out) = at(id, Region::Patch(k), Side::Minus, t)?;
                across.push((u_in - u_out).norm());
                match_.push((u_in - uk).norm());
                force.push((s_in + d * sk - s_out).norm());
                exterior.push(uk_out.norm().max(sk_out.norm()));
                edge.push((sk + 2.0 / d * q.eval(t)).norm());
            }
            push(&patch.name, "displacement_plate_continuity", across);
            push(&patch.name, "displacement_plate_patch", match_);
            push(&patch.name, "traction_balance", force);
            push(&patch.name, "patch_exterior", exterior);
            push(&patch.name, "patch_edge_traction", edge);
        }
        Ok(ResidualReport { entries })
    }
}

fn sample(series: &FourierCoeffs, quad: &crate::kernels::ContourQuadrature) -> SampledDensity {
    if series.max_abs() == 0.0 {
        return SampledDensity {
            values: vec![ZERO; quad.len()],
            derivs: vec![ZERO; quad.len()],
        };
    }
    SampledDensity::from_fn(quad, |t| {
        let d = series.eval_with_derivs(t);
        (d[0], d[1])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::model::validate;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn uniform_state_stress() {
        let p = Potentials {
            phi: c(0.25, 0.0),
            dphi: ZERO,
            psi: c(-0.5, 0.0),
        };
        let t = c(3.0, 1.0);
        assert!((stress_at(&p, t, c(0.0, 1.0)) - c(1.0, 0.0)).norm() < 1e-15);
        assert!(stress_at(&p, t, c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(stress_at(&Potentials::default(), t, c(1.0, 0.0)), ZERO);
        let q = Potentials {
            phi: c(0.25, 0.0),
            dphi: ZERO,
            psi: ZERO,
        };
        let kappa = (3.0 - 0.4) / 1.4;
        let v = displacement_derivative(&q, 60.0, kappa, t, c(1.0, 0.0));
        assert!((v - c(0.25 * (kappa - 1.0) / 120.0, 0.0)).norm() < 1e-15);
        assert!((v.re - 0.001785714).abs() < 1e-9);
        let rot = Potentials {
            phi: c(0.0, 0.3),
            dphi: ZERO,
            psi: ZERO,
        };
        assert!(stress_at(&rot, t, c(1.0, 0.0)).norm() < 1e-15);
        assert!(displacement_derivative(&rot, 60.0, kappa, t, c(1.0, 0.0)).norm() > 1e-3);
    }

    #[test]
    fn zero_densities() {
        let p = validate(&presets::fig2_problem(0.0, true)).unwrap();
        let sol = Solution::new(p.clone(), DensitySet::zeros(&p, 4), None).unwrap();
        let dc = p.derived_constants();
        let pot = sol.potentials_plate(c(0.3, 2.0)).unwrap();
        assert!((pot.phi - dc.gamma).norm() < 1e-15 && (pot.psi - dc.gamma_prime).norm() < 1e-15);
        let z = p.patches[0].contour.centroid() + c(0.0, 0.6);
        let pk = sol.potentials_patch(0, z).unwrap();
        assert_eq!(pk, Potentials::default());
    }

    #[test]
    fn region_checks() {
        let p = validate(&presets::fig2_problem(0.0, true)).unwrap();
        let sol = Solution::new(p.clone(), DensitySet::zeros(&p, 3), None).unwrap();
        assert!(matches!(sol.potentials_plate(c(-1.0, 0.0)), Err(FieldError::OutsideRegion { .. })));
        assert!(matches!(sol.potentials_patch(0, c(1.0, 0.0)), Err(FieldError::OutsideRegion { .. })));
        let on = p.holes[0].contour.point(0.4);
        assert!(matches!(sol.potentials_plate(on), Err(FieldError::NearBoundary { .. })));
        let hole = ContourId::Hole(0);
        assert!(matches!(
            sol.boundary_stress(hole, 0.1, Region::Plate, Side::Minus),
            Err(FieldError::InvalidSide { .. })
        ));
        assert!(matches!(
            sol.boundary_stress(hole, 0.1, Region::Patch(1), Side::Plus),
            Err(FieldError::InvalidSide { .. })
        ));
        assert!(sol.boundary_stress(hole, 0.1, Region::Patch(0), Side::Minus).is_ok());
        assert!(matches!(
            sol.boundary_stress(ContourId::Patch(0), 0.1, Region::Patch(0), Side::Minus),
            Err(FieldError::InvalidSide { .. })
        ));
    }
}
