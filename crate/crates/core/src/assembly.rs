//! The real collocation system for the boundary densities.
//!
//! Unknowns are the Fourier coefficients of every density block in
//! `ValidatedProblem::blocks` order, each block contributing 2N+1 complex
//! coefficients from m = −N upward, each split into (Re, Im) columns.
//! Rows run over the equation sets of [`equation_sets`], then the collocation
//! nodes, then (Re, Im).
//!
//! A real constant g′ on a hole is a rigid rotation of the fictitious hole
//! interior: it leaves every stress and every boundary equation unchanged, so
//! its column is identically zero. The real constant of g′ is fixed at zero
//! and its column is reused:
//!
//! * on a bonded hole it carries the strength ω_j of a concentrated moment at
//!   the hole centre ([`hole_moment`]), the torque the patch passes to the
//!   hole edge;
//! * on a free hole it carries a gauge ω_j that adds a uniform shear iω_j to
//!   the traction rows of that hole. It vanishes unless the applied load has
//!   a net torque, which no equilibrium state can carry.

use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::basis::CollocationGrid;
use crate::geometry::GeometryError;
use crate::kernels::{default_quadrature_nodes, CauchyStencil, ContourQuadrature, KernelError, LayerMoments, SampledDensity, Side, Target};
use crate::layers::{couplings, hole_moment, plate_constants, region_kappa, Discretization, PotentialBasis, Potentials, Quantity, Region};
use crate::model::{ContourId, UnknownBlock, ValidHoleKind, ValidatedProblem};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("{got} quadrature nodes cannot resolve degree {degree}; need at least {min}")]
    Nodes { got: usize, degree: usize, min: usize },
    #[error("equation family {family:?} does not apply to contour {contour:?}")]
    Family { family: EquationFamily, contour: ContourId },
}

/// The five kinds of boundary equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EquationFamily {
    /// Displacement continuity between plate and patch on a bonded hole.
    E1DispBondedHole,
    /// Force balance on a bonded hole.
    E2TractionBondedHole,
    /// Prescribed traction on a free hole.
    E3TractionFreeHole,
    /// Displacement continuity between plate and patch along the patch edge.
    E4aDispMatchPatchEdge,
    /// Patch displacement jump across its own edge.
    E4bPatchDensityDefinition,
}

impl EquationFamily {
    pub fn label(self) -> &'static str {
        match self {
            EquationFamily::E1DispBondedHole => "E1",
            EquationFamily::E2TractionBondedHole => "E2",
            EquationFamily::E3TractionFreeHole => "E3",
            EquationFamily::E4aDispMatchPatchEdge => "E4a",
            EquationFamily::E4bPatchDensityDefinition => "E4b",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Part {
    Re,
    Im,
}

/// One complex equation at one collocation node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EquationRowId {
    pub family: EquationFamily,
    pub contour: ContourId,
    pub node: usize,
}

/// Real column: one part of one coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ColumnId {
    pub block: UnknownBlock,
    pub harmonic: i32,
    pub part: Part,
}

/// Equation sets in row order: E1 and E2 over bonded holes, E3 over free
/// holes, then E4a and E4b over all patches.
pub fn equation_sets(problem: &ValidatedProblem) -> Vec<(EquationFamily, ContourId)> {
    let bonded: Vec<_> = (0..problem.holes.len()).filter(|&j| problem.holes[j].is_bonded()).collect();
    let free: Vec<_> = (0..problem.holes.len()).filter(|&j| !problem.holes[j].is_bonded()).collect();
    let patches = 0..problem.patches.len();
    let mut out = Vec::new();
    out.extend(bonded.iter().map(|&j| (EquationFamily::E1DispBondedHole, ContourId::Hole(j))));
    out.extend(bonded.iter().map(|&j| (EquationFamily::E2TractionBondedHole, ContourId::Hole(j))));
    out.extend(free.iter().map(|&j| (EquationFamily::E3TractionFreeHole, ContourId::Hole(j))));
    out.extend(patches.clone().map(|k| (EquationFamily::E4aDispMatchPatchEdge, ContourId::Patch(k))));
    out.extend(patches.map(|k| (EquationFamily::E4bPatchDensityDefinition, ContourId::Patch(k))));
    out
}

fn check_family(problem: &ValidatedProblem, family: EquationFamily, contour: ContourId) -> Result<(), AssemblyError> {
    let ok = match (family, contour) {
        (EquationFamily::E1DispBondedHole | EquationFamily::E2TractionBondedHole, ContourId::Hole(j)) => {
            j < problem.holes.len() && problem.holes[j].is_bonded()
        }
        (EquationFamily::E3TractionFreeHole, ContourId::Hole(j)) => j < problem.holes.len() && !problem.holes[j].is_bonded(),
        (EquationFamily::E4aDispMatchPatchEdge | EquationFamily::E4bPatchDensityDefinition, ContourId::Patch(k)) => {
            k < problem.patches.len()
        }
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(AssemblyError::Family { family, contour })
    }
}

#[derive(Debug, Clone)]
pub struct RealSystem {
    pub degree: usize,
    pub nodes: usize,
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    /// Complex row of each real row pair; real row 2i is Re, 2i+1 is Im.
    pub rows: Vec<EquationRowId>,
    pub columns: Vec<ColumnId>,
    /// (hole, column) of each free-hole gauge unknown.
    pub gauge_columns: Vec<(usize, usize)>,
    /// (hole, column) of each bonded-hole moment strength.
    pub moment_columns: Vec<(usize, usize)>,
}

impl RealSystem {
    pub fn order(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn row_index(&self, row: EquationRowId, part: Part) -> Option<usize> {
        let i = self.rows.iter().position(|&r| r == row)?;
        Some(2 * i + (part == Part::Im) as usize)
    }

    pub fn column_index(&self, block: UnknownBlock, harmonic: i32, part: Part) -> Option<usize> {
        self.columns.iter().position(|c| *c == ColumnId { block, harmonic, part })
    }

    /// Dense dump: one line per row, matrix entries then the right-hand side.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        for i in 0..self.order() {
            let row: Vec<String> = self
                .matrix
                .row(i)
                .iter()
                .chain(std::iter::once(&self.rhs[i]))
                .map(|v| format!("{v:.17e}"))
                .collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Shared state for evaluating rows: quadrature grids and harmonic samples.
struct Assembler<'a> {
    problem: &'a ValidatedProblem,
    disc: Discretization,
    degree: usize,
    /// Harmonic samples per contour, m = −N..N.
    tables: Vec<Vec<SampledDensity>>,
    /// `∮ e^{imθ} dτ` per contour.
    loops: Vec<Vec<Complex64>>,
}

fn harmonics(degree: usize) -> impl Iterator<Item = i32> + Clone {
    -(degree as i32)..=(degree as i32)
}

fn harmonic_local(m: i32, theta: f64) -> [Complex64; 3] {
    let e = Complex64::from_polar(1.0, m as f64 * theta);
    let im = Complex64::new(0.0, m as f64);
    [e, im * e, im * im * e]
}

impl<'a> Assembler<'a> {
    fn new(problem: &'a ValidatedProblem, degree: usize, nodes: usize) -> Result<Self, AssemblyError> {
        let min = 2 * degree + 2;
        if nodes < min {
            return Err(AssemblyError::Nodes { got: nodes, degree, min });
        }
        let disc = Discretization::new(problem, nodes)?;
        let mut tables = Vec::new();
        let mut loops = Vec::new();
        for id in problem.contour_ids() {
            let quad = disc.quad(id);
            let t: Vec<SampledDensity> = harmonics(degree).map(|m| SampledDensity::harmonic(quad, m)).collect();
            loops.push(t.iter().map(|s| quad.contour_integral(&s.values)).collect());
            tables.push(t);
        }
        Ok(Assembler {
            problem,
            disc,
            degree,
            tables,
            loops,
        })
    }

    /// Moments of the harmonics `ms` on contour `source`, at the Plus-side
    /// limit point θ of contour `target`.
    fn moments(&self, target: ContourId, theta: f64, source: ContourId, ms: &[i32]) -> Result<Vec<LayerMoments>, AssemblyError> {
        let quad = self.disc.quad(source);
        let n = self.degree as i32;
        if source == target {
            let stencil = CauchyStencil::new(quad, Target::Limit(theta, Side::Plus))?;
            let table = &self.tables[self.disc.index(source)];
            return Ok(ms
                .iter()
                .map(|&m| stencil.moments(quad, &table[(m + n) as usize], Some(harmonic_local(m, theta))))
                .collect());
        }
        let z = self.problem.contour(target).point(theta);
        let refined = quad.resolving(z)?;
        match refined {
            None => {
                let stencil = CauchyStencil::new(quad, Target::OffContour(z))?;
                let table = &self.tables[self.disc.index(source)];
                Ok(ms.iter().map(|&m| stencil.moments(quad, &table[(m + n) as usize], None)).collect())
            }
            Some(fine) => Ok(off_moments(&fine, z, ms)?),
        }
    }

    /// (A, B) of `quantity` in `region` for a unit coefficient of `block`.
    fn region_ab(
        &self,
        block: UnknownBlock,
        region: Region,
        quantity: Quantity,
        mom: &LayerMoments,
        t: Complex64,
        tf: Complex64,
    ) -> (Complex64, Complex64) {
        let kappa = region_kappa(self.problem, region);
        couplings(self.problem, block)
            .iter()
            .filter(|c| c.region == region)
            .map(|c| PotentialBasis::from_moments(c, mom).coefficients(quantity, kappa, t, tf))
            .fold((ZERO, ZERO), |acc, v| (acc.0 + v.0, acc.1 + v.1))
    }

    fn entry(&self, family: EquationFamily, contour: ContourId, theta: f64, block: UnknownBlock, m: i32, mom: &LayerMoments) -> Result<(Complex64, Complex64), AssemblyError> {
        let p = self.problem;
        let c = p.contour(contour);
        let t = c.point(theta);
        let tf = c.tangent_factors(theta)?;
        let (dtbar, absdt) = (tf.dtbar_dt, tf.absdt_dt);
        let e = Complex64::from_polar(1.0, m as f64 * theta);
        let loop_term = |id: ContourId| absdt / std::f64::consts::PI * self.loops[self.disc.index(id)][(m + self.degree as i32) as usize];
        let mu = p.plate.shear_modulus;
        let q = |region, quantity| self.region_ab(block, region, quantity, mom, t, dtbar);
        let lin = |(a, b): (Complex64, Complex64), s: Complex64| (a * s, b * s);
        let add = |x: (Complex64, Complex64), y: (Complex64, Complex64)| (x.0 + y.0, x.1 + y.1);
        let one = Complex64::new(1.0, 0.0);
        Ok(match (family, contour) {
            (EquationFamily::E1DispBondedHole, ContourId::Hole(j)) => {
                let k = p.bonding_patch(j).expect("checked");
                let ratio = p.patches[k].material.shear_modulus / mu;
                add(
                    lin(q(Region::Plate, Quantity::Displacement), one * ratio),
                    lin(q(Region::Patch(k), Quantity::Displacement), -one),
                )
            }
            (EquationFamily::E2TractionBondedHole, ContourId::Hole(j)) => {
                let k = p.bonding_patch(j).expect("checked");
                let mut v = q(Region::Plate, Quantity::Stress);
                if block == UnknownBlock::PatchQ(j) {
                    v.0 += 2.0 * p.patches[k].thickness_ratio * e;
                }
                v
            }
            (EquationFamily::E3TractionFreeHole, ContourId::Hole(j)) => {
                let mut v = q(Region::Plate, Quantity::Stress);
                if block == UnknownBlock::PlateGPrime(j) {
                    v.0 += loop_term(contour);
                }
                v
            }
            (EquationFamily::E4aDispMatchPatchEdge, ContourId::Patch(k)) => {
                let ratio = p.patches[k].material.shear_modulus / mu;
                let mut plate = q(Region::Plate, Quantity::Displacement);
                if block == UnknownBlock::PlateQ(k) {
                    plate.0 += loop_term(contour);
                }
                add(lin(plate, one * ratio), lin(q(Region::Patch(k), Quantity::Displacement), -one))
            }
            (EquationFamily::E4bPatchDensityDefinition, ContourId::Patch(k)) => {
                let mut v = q(Region::Patch(k), Quantity::Displacement);
                if block == UnknownBlock::PatchGPrime(k) {
                    v.0 -= I * (p.patches[k].kappa + 1.0) * e;
                }
                v
            }
            _ => return Err(AssemblyError::Family { family, contour }),
        })
    }
}

fn off_moments(quad: &ContourQuadrature, z: Complex64, ms: &[i32]) -> Result<Vec<LayerMoments>, KernelError> {
    let stencil = CauchyStencil::new(quad, Target::OffContour(z))?;
    Ok(ms
        .iter()
        .map(|&m| stencil.moments(quad, &SampledDensity::harmonic(quad, m), None))
        .collect())
}

/// Contribution of density-independent plate potentials `p` to the left side
/// of one complex equation at θ.
fn plate_term(problem: &ValidatedProblem, family: EquationFamily, contour: ContourId, theta: f64, p: &Potentials) -> Result<Complex64, AssemblyError> {
    let c = problem.contour(contour);
    let t = c.point(theta);
    let dtbar = c.tangent_factors(theta)?.dtbar_dt;
    let mu = problem.plate.shear_modulus;
    Ok(match (family, contour) {
        (EquationFamily::E1DispBondedHole, ContourId::Hole(j)) => {
            let k = problem.bonding_patch(j).expect("checked");
            problem.patches[k].material.shear_modulus / mu * p.scaled_displacement_derivative(problem.kappa, t, dtbar)
        }
        (EquationFamily::E4aDispMatchPatchEdge, ContourId::Patch(k)) => {
            problem.patches[k].material.shear_modulus / mu * p.scaled_displacement_derivative(problem.kappa, t, dtbar)
        }
        (EquationFamily::E2TractionBondedHole | EquationFamily::E3TractionFreeHole, _) => p.stress(t, dtbar),
        _ => ZERO,
    })
}

/// Right-hand side of one complex equation at θ on the row's contour.
pub fn rhs_value(problem: &ValidatedProblem, family: EquationFamily, contour: ContourId, theta: f64) -> Result<Complex64, AssemblyError> {
    check_family(problem, family, contour)?;
    let t = problem.contour(contour).point(theta);
    let constant = plate_term(problem, family, contour, theta, &plate_constants(problem, t))?;
    let load = match (family, contour) {
        (EquationFamily::E3TractionFreeHole, ContourId::Hole(j)) => match &problem.holes[j].kind {
            ValidHoleKind::Free { load, .. } => load.eval(theta),
            ValidHoleKind::Bonded { .. } => unreachable!(),
        },
        _ => ZERO,
    };
    Ok(load - constant)
}

/// Row entry of the moment strength of bonded hole `j` (a real unknown).
pub fn moment_coefficient(problem: &ValidatedProblem, family: EquationFamily, contour: ContourId, theta: f64, j: usize) -> Result<Complex64, AssemblyError> {
    check_family(problem, family, contour)?;
    let t = problem.contour(contour).point(theta);
    plate_term(problem, family, contour, theta, &hole_moment(problem, j, t))
}

/// Coefficients (A, B) with which the harmonic m of `block` enters the row
/// equation at θ as A·c + B·conj(c).
pub fn matrix_coefficients(
    problem: &ValidatedProblem,
    family: EquationFamily,
    contour: ContourId,
    theta: f64,
    block: UnknownBlock,
    m: i32,
    nodes: usize,
) -> Result<(Complex64, Complex64), AssemblyError> {
    check_family(problem, family, contour)?;
    let asm = Assembler::new(problem, (m.unsigned_abs() as usize).max(1), nodes)?;
    let mom = asm.moments(contour, theta, block.contour(), &[m])?;
    asm.entry(family, contour, theta, block, m, &mom[0])
}

/// Builds the full system; `nodes = None` uses the default quadrature size.
pub fn assemble(problem: &ValidatedProblem, degree: usize, nodes: Option<usize>) -> Result<RealSystem, AssemblyError> {
    let nodes = nodes.unwrap_or_else(|| default_quadrature_nodes(degree));
    let asm = Assembler::new(problem, degree, nodes)?;
    let per = 2 * degree + 1;
    let sets = equation_sets(problem);
    let order = problem.system_order(degree);
    debug_assert_eq!(order, 2 * per * sets.len());
    let grid = CollocationGrid::new(degree);
    let ms: Vec<i32> = harmonics(degree).collect();

    let mut rows = Vec::with_capacity(order / 2);
    for &(family, contour) in &sets {
        rows.extend((0..per).map(|node| EquationRowId { family, contour, node }));
    }
    let mut columns = Vec::with_capacity(order);
    for &block in &problem.blocks {
        for &m in &ms {
            columns.push(ColumnId { block, harmonic: m, part: Part::Re });
            columns.push(ColumnId { block, harmonic: m, part: Part::Im });
        }
    }

    let mut matrix = DMatrix::<f64>::zeros(order, order);
    let mut rhs = DVector::<f64>::zeros(order);
    let sources = problem.contour_ids();
    for target in problem.contour_ids() {
        let here: Vec<(usize, EquationFamily)> = sets
            .iter()
            .enumerate()
            .filter(|(_, s)| s.1 == target)
            .map(|(i, s)| (i, s.0))
            .collect();
        if here.is_empty() {
            continue;
        }
        for (s, &theta) in grid.nodes().iter().enumerate() {
            let moments: Vec<Vec<LayerMoments>> = sources
                .iter()
                .map(|&src| asm.moments(target, theta, src, &ms))
                .collect::<Result<_, _>>()?;
            for &(set, family) in &here {
                let r = set * per + s;
                let b = rhs_value(problem, family, target, theta)?;
                rhs[2 * r] = b.re;
                rhs[2 * r + 1] = b.im;
                for (bi, &block) in problem.blocks.iter().enumerate() {
                    let mom = &moments[asm.disc.index(block.contour())];
                    for (mi, &m) in ms.iter().enumerate() {
                        let (a, bb) = asm.entry(family, target, theta, block, m, &mom[mi])?;
                        let col = 2 * (bi * per + mi);
                        let re_col = a + bb;
                        let im_col = I * (a - bb);
                        matrix[(2 * r, col)] = re_col.re;
                        matrix[(2 * r + 1, col)] = re_col.im;
                        matrix[(2 * r, col + 1)] = im_col.re;
                        matrix[(2 * r + 1, col + 1)] = im_col.im;
                    }
                }
            }
        }
    }
    let mut gauge_columns = Vec::new();
    let mut moment_columns = Vec::new();
    let nodes_theta = grid.nodes();
    for (j, hole) in problem.holes.iter().enumerate() {
        let col = 2 * (problem.block_index(UnknownBlock::PlateGPrime(j)).expect("g′ block") * per + degree);
        if hole.is_bonded() {
            for (r, row) in rows.iter().enumerate() {
                let v = moment_coefficient(problem, row.family, row.contour, nodes_theta[row.node], j)?;
                matrix[(2 * r, col)] = v.re;
                matrix[(2 * r + 1, col)] = v.im;
            }
            moment_columns.push((j, col));
        } else {
            let traction = |f| matches!(f, EquationFamily::E3TractionFreeHole);
            for (r, row) in rows.iter().enumerate() {
                matrix[(2 * r, col)] = 0.0;
                matrix[(2 * r + 1, col)] = if row.contour == ContourId::Hole(j) && traction(row.family) { 1.0 } else { 0.0 };
            }
            gauge_columns.push((j, col));
        }
    }
    Ok(RealSystem {
        degree,
        nodes,
        matrix,
        rhs,
        rows,
        columns,
        gauge_columns,
        moment_columns,
    })
}
