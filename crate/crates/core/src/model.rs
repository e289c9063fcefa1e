//! Materials, loads and the hole/patch configuration.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::geometry::{min_separation, Contour, GeometryError, Orientation};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Contours closer than this are considered touching.
pub const SEPARATION_TOLERANCE: f64 = 1e-3;
const SEPARATION_SAMPLES: usize = 512;
const LOAD_QUADRATURE_NODES: usize = 256;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid material: {0}")]
    Material(String),
    #[error("contours {0} and {1} touch or overlap (separation {2:.3e})")]
    Overlap(String, String, f64),
    #[error("patch {patch} does not cover hole {hole}")]
    NotCovered { patch: String, hole: String },
    #[error("hole {0} is marked bonded but no fully bonded patch lists it")]
    UnbondedHole(String),
    #[error("invalid reference: {0}")]
    Reference(String),
    #[error("reference point of hole {0} is not inside the hole")]
    ReferencePoint(String),
    #[error("contour {name}: {source}")]
    Geometry {
        name: String,
        #[source]
        source: GeometryError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub shear_modulus: f64,
    pub poisson: f64,
    pub thickness: f64,
}

impl Material {
    pub fn new(shear_modulus: f64, poisson: f64, thickness: f64) -> Result<Self, ModelError> {
        let m = Material {
            shear_modulus,
            poisson,
            thickness,
        };
        m.check()?;
        Ok(m)
    }

    fn check(&self) -> Result<(), ModelError> {
        if !(self.shear_modulus > 0.0 && self.shear_modulus.is_finite()) {
            return Err(ModelError::Material(format!(
                "shear modulus must be positive, got {}",
                self.shear_modulus
            )));
        }
        if !(self.thickness > 0.0 && self.thickness.is_finite()) {
            return Err(ModelError::Material(format!(
                "thickness must be positive, got {}",
                self.thickness
            )));
        }
        if !(self.poisson > -1.0 && self.poisson < 0.5) {
            return Err(ModelError::Material(format!(
                "Poisson ratio must lie in (-1, 0.5), got {}",
                self.poisson
            )));
        }
        Ok(())
    }

    /// Plane-stress κ = (3−ν)/(1+ν).
    pub fn kappa(&self) -> f64 {
        (3.0 - self.poisson) / (1.0 + self.poisson)
    }
}

pub fn kappa(material: &Material) -> Result<f64, ModelError> {
    material.check()?;
    Ok(material.kappa())
}

/// Principal stresses at infinity; σ1 acts at angle α to the real axis.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FarField {
    pub sigma1: f64,
    pub sigma2: f64,
    pub alpha: f64,
}

/// Traction σ_n + iτ_n on a free hole as a Fourier series in the
/// parameter of the hole contour as it was specified.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TractionLoad {
    pub coefficients: BTreeMap<i32, Complex64>,
}

impl TractionLoad {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Uniform pressure `p` pushing on the boundary: σ_n = −p.
    pub fn pressure(p: f64) -> Self {
        let mut coefficients = BTreeMap::new();
        coefficients.insert(0, Complex64::new(-p, 0.0));
        TractionLoad { coefficients }
    }

    pub fn eval(&self, theta: f64) -> Complex64 {
        self.coefficients
            .iter()
            .map(|(&m, &c)| c * Complex64::from_polar(1.0, m as f64 * theta))
            .sum()
    }

    fn reversed(&self) -> Self {
        TractionLoad {
            coefficients: self.coefficients.iter().map(|(&m, &c)| (-m, c)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum HoleKind {
    /// Bonded to the fully bonded patch with this index in `ProblemSpec::patches`.
    Bonded { patch: usize },
    Free {
        load: TractionLoad,
        /// Interior point for the resultant-force terms; `None` uses the centroid.
        z_ref: Option<Complex64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hole {
    pub name: String,
    pub contour: Contour,
    pub kind: HoleKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Attachment {
    /// Bonded along its own boundary and along the listed holes.
    FullBond { holes: Vec<usize> },
    /// Bonded along its own boundary only.
    EdgeBond,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub name: String,
    pub contour: Contour,
    pub material: Material,
    pub attachment: Attachment,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub plate: Material,
    pub far_field: FarField,
    pub holes: Vec<Hole>,
    pub patches: Vec<Patch>,
}

/// Index of a contour inside a [`ValidatedProblem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ContourId {
    Hole(usize),
    Patch(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ValidHoleKind {
    Bonded { patch: usize },
    Free {
        load: TractionLoad,
        z_ref: Complex64,
        /// Q = (X+iY)/(2π(1+κ)).
        q: Complex64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidHole {
    pub name: String,
    /// Clockwise.
    pub contour: Contour,
    pub kind: ValidHoleKind,
    /// Interior point: the load reference of a free hole, otherwise the centroid.
    pub center: Complex64,
    /// Position in the input list.
    pub input_index: usize,
}

impl ValidHole {
    pub fn is_bonded(&self) -> bool {
        matches!(self.kind, ValidHoleKind::Bonded { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidPatch {
    pub name: String,
    /// Counterclockwise.
    pub contour: Contour,
    pub material: Material,
    pub kappa: f64,
    /// h_k / h.
    pub thickness_ratio: f64,
    /// Bonded holes (indices into `ValidatedProblem::holes`); empty for edge bonding.
    pub bonded_holes: Vec<usize>,
    pub input_index: usize,
}

impl ValidPatch {
    pub fn is_full_bond(&self) -> bool {
        !self.bonded_holes.is_empty()
    }
}

/// Unknown density groups in system order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnknownBlock {
    /// g′ on a hole boundary.
    PlateGPrime(usize),
    /// q on a patch boundary.
    PlateQ(usize),
    /// q_k on a bonded hole boundary.
    PatchQ(usize),
    /// g′_k on a patch boundary.
    PatchGPrime(usize),
}

impl UnknownBlock {
    pub fn contour(self) -> ContourId {
        match self {
            UnknownBlock::PlateGPrime(j) | UnknownBlock::PatchQ(j) => ContourId::Hole(j),
            UnknownBlock::PlateQ(k) | UnknownBlock::PatchGPrime(k) => ContourId::Patch(k),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            UnknownBlock::PlateGPrime(_) => "g_prime",
            UnknownBlock::PlateQ(_) => "q",
            UnknownBlock::PatchQ(_) => "q_k",
            UnknownBlock::PatchGPrime(_) => "g_prime_k",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivedConstants {
    pub kappa: f64,
    pub patch_kappa: Vec<f64>,
    /// Γ = (σ1+σ2)/4.
    pub gamma: f64,
    /// Γ′ = (σ2−σ1)e^{−2iα}/2.
    pub gamma_prime: Complex64,
    /// Q per hole (zero for bonded holes).
    pub hole_q: Vec<Complex64>,
    pub thickness_ratio: Vec<f64>,
}

/// A checked problem with contours oriented (holes clockwise, patches
/// counterclockwise) and ordered: bonded holes before free holes, fully
/// bonded patches before edge-bonded ones.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedProblem {
    pub plate: Material,
    pub kappa: f64,
    pub far_field: FarField,
    pub holes: Vec<ValidHole>,
    pub patches: Vec<ValidPatch>,
    /// Number of fully bonded patches.
    pub n: usize,
    /// Number of edge-bonded patches.
    pub m: usize,
    /// Number of free holes.
    pub r: usize,
    pub blocks: Vec<UnknownBlock>,
}

impl ValidatedProblem {
    pub fn contour(&self, id: ContourId) -> &Contour {
        match id {
            ContourId::Hole(j) => &self.holes[j].contour,
            ContourId::Patch(k) => &self.patches[k].contour,
        }
    }

    pub fn contour_ids(&self) -> Vec<ContourId> {
        (0..self.holes.len())
            .map(ContourId::Hole)
            .chain((0..self.patches.len()).map(ContourId::Patch))
            .collect()
    }

    pub fn contour_name(&self, id: ContourId) -> &str {
        match id {
            ContourId::Hole(j) => &self.holes[j].name,
            ContourId::Patch(k) => &self.patches[k].name,
        }
    }

    pub fn find_contour(&self, name: &str) -> Option<ContourId> {
        self.contour_ids().into_iter().find(|&id| self.contour_name(id) == name)
    }

    pub fn bonded_hole_count(&self) -> usize {
        self.holes.iter().filter(|h| h.is_bonded()).count()
    }

    /// Number of unknown density groups; 4n+2m+r when each fully bonded
    /// patch covers one hole.
    pub fn group_count(&self) -> usize {
        self.blocks.len()
    }

    /// Order of the real collocation system for truncation degree `degree`.
    pub fn system_order(&self, degree: usize) -> usize {
        2 * (2 * degree + 1) * self.group_count()
    }

    /// Patch bonded to hole `j`, if any.
    pub fn bonding_patch(&self, j: usize) -> Option<usize> {
        match self.holes[j].kind {
            ValidHoleKind::Bonded { patch } => Some(patch),
            ValidHoleKind::Free { .. } => None,
        }
    }

    /// The bonding patch, or else any patch whose interior contains the hole.
    pub fn covering_patch(&self, j: usize) -> Option<usize> {
        self.bonding_patch(j).or_else(|| {
            let probe = self.holes[j].contour.point(0.0);
            (0..self.patches.len()).find(|&k| matches!(self.patches[k].contour.winding_number(probe), Ok(1)))
        })
    }

    pub fn block_index(&self, block: UnknownBlock) -> Option<usize> {
        self.blocks.iter().position(|&b| b == block)
    }

    pub fn derived_constants(&self) -> DerivedConstants {
        let ff = self.far_field;
        DerivedConstants {
            kappa: self.kappa,
            patch_kappa: self.patches.iter().map(|p| p.kappa).collect(),
            gamma: (ff.sigma1 + ff.sigma2) / 4.0,
            gamma_prime: (ff.sigma2 - ff.sigma1) / 2.0 * Complex64::from_polar(1.0, -2.0 * ff.alpha),
            hole_q: self
                .holes
                .iter()
                .map(|h| match h.kind {
                    ValidHoleKind::Free { q, .. } => q,
                    ValidHoleKind::Bonded { .. } => Complex64::new(0.0, 0.0),
                })
                .collect(),
            thickness_ratio: self.patches.iter().map(|p| p.thickness_ratio).collect(),
        }
    }
}

/// `Q = (X+iY)/(2π(1+κ))` with `X+iY = −i∮ p dt` (trapezoid on `nodes` points).
pub fn resultant_constant(contour: &Contour, load: &TractionLoad, kappa: f64, nodes: usize) -> Complex64 {
    let h = 2.0 * PI / nodes as f64;
    let integral: Complex64 = (0..nodes)
        .map(|j| {
            let theta = j as f64 * h;
            load.eval(theta) * contour.derivative(theta, 1)
        })
        .sum::<Complex64>()
        * h;
    -I * integral / (2.0 * PI * (1.0 + kappa))
}

pub fn validate(problem: &ProblemSpec) -> Result<ValidatedProblem, ModelError> {
    problem.plate.check()?;
    for p in &problem.patches {
        p.material.check().map_err(|e| match e {
            ModelError::Material(msg) => ModelError::Material(format!("patch {}: {msg}", p.name)),
            other => other,
        })?;
    }
    let geo = |name: &str| {
        let name = name.to_string();
        move |source| ModelError::Geometry { name, source }
    };

    // Cross-check bonding references in both directions.
    for (j, hole) in problem.holes.iter().enumerate() {
        if let HoleKind::Bonded { patch } = hole.kind {
            let p = problem
                .patches
                .get(patch)
                .ok_or_else(|| ModelError::Reference(format!("hole {} refers to missing patch {patch}", hole.name)))?;
            match &p.attachment {
                Attachment::FullBond { holes } if holes.contains(&j) => {}
                _ => return Err(ModelError::UnbondedHole(hole.name.clone())),
            }
        }
    }
    for (owner, p) in problem.patches.iter().enumerate() {
        if let Attachment::FullBond { holes } = &p.attachment {
            if holes.is_empty() {
                return Err(ModelError::Reference(format!("fully bonded patch {} lists no holes", p.name)));
            }
            for &j in holes {
                let hole = problem
                    .holes
                    .get(j)
                    .ok_or_else(|| ModelError::Reference(format!("patch {} refers to missing hole {j}", p.name)))?;
                if !matches!(hole.kind, HoleKind::Bonded { patch } if patch == owner) {
                    return Err(ModelError::Reference(format!(
                        "patch {} bonds hole {} which is not marked bonded to it",
                        p.name, hole.name
                    )));
                }
            }
        }
    }

    // Canonical order.
    let mut hole_order: Vec<usize> = (0..problem.holes.len())
        .filter(|&j| matches!(problem.holes[j].kind, HoleKind::Bonded { .. }))
        .collect();
    hole_order.extend((0..problem.holes.len()).filter(|&j| matches!(problem.holes[j].kind, HoleKind::Free { .. })));
    let mut patch_order: Vec<usize> = (0..problem.patches.len())
        .filter(|&k| matches!(problem.patches[k].attachment, Attachment::FullBond { .. }))
        .collect();
    patch_order.extend(
        (0..problem.patches.len()).filter(|&k| matches!(problem.patches[k].attachment, Attachment::EdgeBond)),
    );
    let hole_pos = |input: usize| hole_order.iter().position(|&j| j == input).unwrap();
    let patch_pos = |input: usize| patch_order.iter().position(|&k| k == input).unwrap();

    let kappa = problem.plate.kappa();
    let mut holes = Vec::with_capacity(hole_order.len());
    for &j in &hole_order {
        let hole = &problem.holes[j];
        let contour = hole.contour.with_orientation(Orientation::Cw).map_err(geo(&hole.name))?;
        let inside = |z: Complex64| match contour.winding_number(z) {
            Ok(w) if w.abs() == 1 => Ok(()),
            _ => Err(ModelError::ReferencePoint(hole.name.clone())),
        };
        let (kind, center) = match &hole.kind {
            HoleKind::Bonded { patch } => {
                let center = contour.centroid();
                inside(center)?;
                (ValidHoleKind::Bonded { patch: patch_pos(*patch) }, center)
            }
            HoleKind::Free { load, z_ref } => {
                let load = if contour.is_reversed() != hole.contour.is_reversed() {
                    load.reversed()
                } else {
                    load.clone()
                };
                let z_ref = match z_ref {
                    Some(z) => *z,
                    None => contour.centroid(),
                };
                inside(z_ref)?;
                let q = resultant_constant(&contour, &load, kappa, LOAD_QUADRATURE_NODES);
                (ValidHoleKind::Free { load, z_ref, q }, z_ref)
            }
        };
        holes.push(ValidHole {
            name: hole.name.clone(),
            contour,
            kind,
            center,
            input_index: j,
        });
    }

    let mut patches = Vec::with_capacity(patch_order.len());
    for &k in &patch_order {
        let p = &problem.patches[k];
        let contour = p.contour.with_orientation(Orientation::Ccw).map_err(geo(&p.name))?;
        let bonded_holes: Vec<usize> = match &p.attachment {
            Attachment::FullBond { holes } => {
                let mut v: Vec<usize> = holes.iter().map(|&j| hole_pos(j)).collect();
                v.sort_unstable();
                v
            }
            Attachment::EdgeBond => Vec::new(),
        };
        patches.push(ValidPatch {
            name: p.name.clone(),
            contour,
            material: p.material,
            kappa: p.material.kappa(),
            thickness_ratio: p.material.thickness / problem.plate.thickness,
            bonded_holes,
            input_index: k,
        });
    }

    // Separation of every pair of contours.
    let named: Vec<(&str, &Contour)> = holes
        .iter()
        .map(|h| (h.name.as_str(), &h.contour))
        .chain(patches.iter().map(|p| (p.name.as_str(), &p.contour)))
        .collect();
    for a in 0..named.len() {
        for b in a + 1..named.len() {
            let d = min_separation(named[a].1, named[b].1, SEPARATION_SAMPLES);
            if d <= SEPARATION_TOLERANCE {
                return Err(ModelError::Overlap(named[a].0.into(), named[b].0.into(), d));
            }
        }
    }

    // Coverage of bonded holes.
    for p in &patches {
        for &j in &p.bonded_holes {
            for z in holes[j].contour.samples(64) {
                if p.contour.winding_number(z).map_err(geo(&p.name))? != 1 {
                    return Err(ModelError::NotCovered {
                        patch: p.name.clone(),
                        hole: holes[j].name.clone(),
                    });
                }
            }
        }
    }

    let n = patches.iter().filter(|p| p.is_full_bond()).count();
    let m = patches.len() - n;
    let r = holes.iter().filter(|h| !h.is_bonded()).count();

    let mut blocks: Vec<UnknownBlock> = (0..holes.len()).map(UnknownBlock::PlateGPrime).collect();
    blocks.extend((0..patches.len()).map(UnknownBlock::PlateQ));
    blocks.extend((0..holes.len()).filter(|&j| holes[j].is_bonded()).map(UnknownBlock::PatchQ));
    blocks.extend((0..patches.len()).map(UnknownBlock::PatchGPrime));

    Ok(ValidatedProblem {
        plate: problem.plate,
        kappa,
        far_field: problem.far_field,
        holes,
        patches,
        n,
        m,
        r,
        blocks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{fig2_problem, kirsch_problem};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn kappa_values() {
        let k = |nu| kappa(&Material::new(1.0, nu, 1.0).unwrap()).unwrap();
        assert!((k(0.4) - 2.6 / 1.4).abs() < 1e-15);
        assert!((k(0.3) - 2.7 / 1.3).abs() < 1e-15);
        assert!((k(1.0 / 3.0) - 2.0).abs() < 1e-15);
        assert!(Material::new(1.0, 0.5, 1.0).is_err());
        assert!(Material::new(-1.0, 0.3, 1.0).is_err());
    }

    #[test]
    fn far_field_constants() {
        let mut vp = validate(&kirsch_problem(0.5)).unwrap();
        let d = vp.derived_constants();
        assert!((d.gamma - 0.25).abs() < 1e-15);
        assert!((d.gamma_prime - c(-0.5, 0.0)).norm() < 1e-15);
        vp.far_field.alpha = PI / 4.0;
        assert!((vp.derived_constants().gamma_prime - c(0.0, 0.5)).norm() < 1e-15);
        vp.far_field.alpha = PI / 4.0 + PI;
        assert!((vp.derived_constants().gamma_prime - c(0.0, 0.5)).norm() < 1e-14);
    }

    #[test]
    fn uniform_pressure_has_no_resultant() {
        let sq = Contour::rounded_square(c(0.3, 0.1), 0.8, 9.0, 0.2).unwrap().reversed();
        let q = resultant_constant(&sq, &TractionLoad::pressure(1.0), 2.0, 256);
        assert!(q.norm() < 1e-15);
        let mut load = TractionLoad::zero();
        load.coefficients.insert(1, c(0.3, -0.2));
        load.coefficients.insert(-2, c(0.1, 0.4));
        let a = resultant_constant(&sq, &load, 2.0, 256);
        let b = resultant_constant(&sq, &load, 2.0, 512);
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn fig2_configuration_counts() {
        let vp = validate(&fig2_problem(PI / 4.0, true)).unwrap();
        assert_eq!((vp.n, vp.m, vp.r), (2, 0, 0));
        assert_eq!(vp.group_count(), 8);
        assert_eq!(vp.system_order(20), 656);
        for h in &vp.holes {
            assert_eq!(h.contour.orientation().unwrap(), Orientation::Cw);
        }
        for p in &vp.patches {
            assert_eq!(p.contour.orientation().unwrap(), Orientation::Ccw);
        }
        let vp = validate(&fig2_problem(PI / 4.0, false)).unwrap();
        assert_eq!((vp.n, vp.m, vp.r), (0, 2, 2));
        assert_eq!(vp.group_count(), 6);
    }

    #[test]
    fn overlapping_contours_are_rejected() {
        let mut p = fig2_problem(0.0, false);
        p.patches[0].contour = p.holes[0].contour.clone();
        assert!(matches!(validate(&p), Err(ModelError::Overlap(..))));
    }

    #[test]
    fn bonding_must_be_consistent() {
        let mut p = fig2_problem(0.0, true);
        p.patches[0].attachment = Attachment::EdgeBond;
        assert!(matches!(validate(&p), Err(ModelError::UnbondedHole(_))));
        let mut p = fig2_problem(0.0, true);
        // shrink patch 1 so it no longer covers hole 1 but stays clear of it
        p.patches[0].contour = Contour::circle(c(-1.0, 2.0), 0.3).unwrap();
        assert!(matches!(validate(&p), Err(ModelError::NotCovered { .. })));
    }

    #[test]
    fn canonical_ordering() {
        let mut p = fig2_problem(0.0, true);
        p.holes.swap(0, 1);
        p.patches.swap(0, 1);
        for (k, patch) in p.patches.iter_mut().enumerate() {
            patch.attachment = Attachment::FullBond { holes: vec![k] };
        }
        for (j, hole) in p.holes.iter_mut().enumerate() {
            hole.kind = HoleKind::Bonded { patch: j };
        }
        let vp = validate(&p).unwrap();
        assert_eq!(vp.holes[0].input_index, 0);
        assert_eq!(vp.patches[0].bonded_holes, vec![0]);
        p.holes[0].kind = HoleKind::Free {
            load: TractionLoad::zero(),
            z_ref: None,
        };
        p.patches[0].attachment = Attachment::EdgeBond;
        let vp = validate(&p).unwrap();
        // bonded hole (input 1) ordered first, edge-bonded patch (input 0) last
        assert_eq!(vp.holes[0].input_index, 1);
        assert_eq!(vp.patches[1].input_index, 0);
        assert_eq!(vp.blocks.len(), 4 + 2 + 1);
    }
}
