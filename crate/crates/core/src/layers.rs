//! How each unknown density enters the complex potentials of the plate and
//! the patches.
//!
//! Every layer on a contour carries a density g and contributes
//!
//! ```text
//! Φ  = a/(2π) ∮ g dτ/(τ−z)
//! Φ′ = a/(2π) ∮ g dτ/(τ−z)²
//! Ψ  = 1/(2π) [ conj(b) ∮ conj(g) dτ̄/(τ−z) − a ∮ τ̄ g dτ/(τ−z)² ]
//! ```
//!
//! A displacement-derivative jump density (g′) has a = b = 1. A traction jump
//! density q in a material with constant κ has a = −2i/(κ+1), b = 2iκ/(κ+1).

use num_complex::Complex64;

use crate::geometry::GeometryError;
use crate::kernels::{ContourQuadrature, LayerMoments};
use crate::model::{ContourId, UnknownBlock, ValidHoleKind, ValidatedProblem};

const I: Complex64 = Complex64::new(0.0, 1.0);
const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Material body whose potentials are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Plate,
    Patch(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    pub region: Region,
    pub a: Complex64,
    pub b: Complex64,
}

fn traction_coupling(region: Region, kappa: f64, scale: f64) -> Coupling {
    Coupling {
        region,
        a: -2.0 * I * scale / (kappa + 1.0),
        b: 2.0 * I * kappa * scale / (kappa + 1.0),
    }
}

/// Regions whose potentials contain the density of `block`.
pub fn couplings(problem: &ValidatedProblem, block: UnknownBlock) -> Vec<Coupling> {
    let unit = |region| Coupling {
        region,
        a: Complex64::new(1.0, 0.0),
        b: Complex64::new(1.0, 0.0),
    };
    match block {
        UnknownBlock::PlateGPrime(_) => vec![unit(Region::Plate)],
        UnknownBlock::PlateQ(k) => {
            let patch = &problem.patches[k];
            // The patch sees the traction jump −q/d_k across its own edge.
            vec![
                traction_coupling(Region::Plate, problem.kappa, 1.0),
                traction_coupling(Region::Patch(k), patch.kappa, -1.0 / patch.thickness_ratio),
            ]
        }
        UnknownBlock::PatchQ(j) => {
            let k = problem.bonding_patch(j).expect("q_k block on a free hole");
            vec![traction_coupling(Region::Patch(k), problem.patches[k].kappa, 1.0)]
        }
        UnknownBlock::PatchGPrime(k) => vec![unit(Region::Patch(k))],
    }
}

pub fn region_kappa(problem: &ValidatedProblem, region: Region) -> f64 {
    match region {
        Region::Plate => problem.kappa,
        Region::Patch(k) => problem.patches[k].kappa,
    }
}

pub fn region_shear_modulus(problem: &ValidatedProblem, region: Region) -> f64 {
    match region {
        Region::Plate => problem.plate.shear_modulus,
        Region::Patch(k) => problem.patches[k].material.shear_modulus,
    }
}

/// Blocks whose layers appear in the potentials of `region`, paired with the coupling.
pub fn region_layers(problem: &ValidatedProblem, region: Region) -> Vec<(UnknownBlock, Coupling)> {
    problem
        .blocks
        .iter()
        .flat_map(|&b| {
            couplings(problem, b)
                .into_iter()
                .filter(|c| c.region == region)
                .map(move |c| (b, c))
        })
        .collect()
}

/// Uniform quadrature grids on every contour of a problem, holes first.
#[derive(Debug, Clone)]
pub struct Discretization {
    nodes: usize,
    hole_count: usize,
    quads: Vec<ContourQuadrature>,
}

impl Discretization {
    pub fn new(problem: &ValidatedProblem, nodes: usize) -> Result<Self, GeometryError> {
        let quads = problem
            .contour_ids()
            .into_iter()
            .map(|id| ContourQuadrature::new(problem.contour(id), nodes))
            .collect::<Result<_, _>>()?;
        Ok(Discretization {
            nodes,
            hole_count: problem.holes.len(),
            quads,
        })
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn index(&self, id: ContourId) -> usize {
        match id {
            ContourId::Hole(j) => j,
            ContourId::Patch(k) => self.hole_count + k,
        }
    }

    pub fn quad(&self, id: ContourId) -> &ContourQuadrature {
        &self.quads[self.index(id)]
    }
}

/// Values of Φ, Φ′ and Ψ at a point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Potentials {
    pub phi: Complex64,
    pub dphi: Complex64,
    pub psi: Complex64,
}

impl std::ops::AddAssign for Potentials {
    fn add_assign(&mut self, o: Self) {
        self.phi += o.phi;
        self.dphi += o.dphi;
        self.psi += o.psi;
    }
}

impl Potentials {
    /// Potentials of a layer with density series moments `mom`.
    pub fn from_moments(c: &Coupling, mom: &LayerMoments) -> Self {
        Potentials {
            phi: c.a * mom.j1 / TWO_PI,
            dphi: c.a * mom.j2 / TWO_PI,
            psi: (c.b.conj() * mom.j3 - c.a * mom.j4) / TWO_PI,
        }
    }

    /// `(dt̄/dt)(t·conj(Φ′) + conj(Ψ))`
    fn tangential_part(&self, t: Complex64, dtbar_dt: Complex64) -> Complex64 {
        dtbar_dt * (t * self.dphi.conj() + self.psi.conj())
    }

    /// σ_n + iτ_n on a line element through t with direction factor dt̄/dt.
    pub fn stress(&self, t: Complex64, dtbar_dt: Complex64) -> Complex64 {
        self.phi + self.phi.conj() + self.tangential_part(t, dtbar_dt)
    }

    /// 2μ d(u+iv)/dt.
    pub fn scaled_displacement_derivative(&self, kappa: f64, t: Complex64, dtbar_dt: Complex64) -> Complex64 {
        kappa * self.phi - self.phi.conj() - self.tangential_part(t, dtbar_dt)
    }
}

/// Density-independent part of the plate potentials: the far field and the
/// resultant terms of loaded free holes.
pub fn plate_constants(problem: &ValidatedProblem, z: Complex64) -> Potentials {
    let dc = problem.derived_constants();
    let mut out = Potentials {
        phi: Complex64::new(dc.gamma, 0.0),
        dphi: Complex64::new(0.0, 0.0),
        psi: dc.gamma_prime,
    };
    for hole in &problem.holes {
        if let ValidHoleKind::Free { q, z_ref, .. } = hole.kind {
            let r = z - z_ref;
            out.phi -= q / r;
            out.dphi += q / (r * r);
            out.psi += problem.kappa * q.conj() / r;
        }
    }
    out
}

/// Plate potentials of a unit concentrated moment at the centre of hole `j`:
/// Φ = 0, Ψ = −i/(z − z_j)². Displacements stay single-valued. This carries
/// the net torque a bonded patch transmits to the hole edge, which the
/// displacement-jump layer on that hole cannot represent.
pub fn hole_moment(problem: &ValidatedProblem, j: usize, z: Complex64) -> Potentials {
    let r = z - problem.holes[j].center;
    Potentials {
        phi: Complex64::new(0.0, 0.0),
        dphi: Complex64::new(0.0, 0.0),
        psi: Complex64::new(0.0, -1.0) / (r * r),
    }
}

/// Potentials of a layer per unit coefficient c: Φ = c·phi, Φ′ = c·dphi,
/// Ψ = c·psi_lin + conj(c)·psi_conj.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PotentialBasis {
    pub phi: Complex64,
    pub dphi: Complex64,
    pub psi_lin: Complex64,
    pub psi_conj: Complex64,
}

/// Boundary quantity built from the potentials.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    /// σ_n + iτ_n
    Stress,
    /// 2μ d(u+iv)/dt
    Displacement,
}

impl PotentialBasis {
    pub fn from_moments(c: &Coupling, mom: &LayerMoments) -> Self {
        PotentialBasis {
            phi: c.a * mom.j1 / TWO_PI,
            dphi: c.a * mom.j2 / TWO_PI,
            psi_lin: -c.a * mom.j4 / TWO_PI,
            psi_conj: c.b.conj() * mom.j3 / TWO_PI,
        }
    }

    /// (A, B) with quantity = A·c + B·conj(c).
    pub fn coefficients(&self, quantity: Quantity, kappa: f64, t: Complex64, dtbar_dt: Complex64) -> (Complex64, Complex64) {
        let a_part = dtbar_dt * self.psi_conj.conj();
        let b_part = dtbar_dt * (t * self.dphi.conj() + self.psi_lin.conj());
        match quantity {
            Quantity::Stress => (self.phi + a_part, self.phi.conj() + b_part),
            Quantity::Displacement => (kappa * self.phi - a_part, -self.phi.conj() - b_part),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::FourierCoeffs;
    use crate::geometry::Contour;
    use crate::kernels::{CauchyStencil, SampledDensity, Side, Target};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Potentials of a single layer at a boundary limit.
    fn layer_limit(quad: &ContourQuadrature, g: &FourierCoeffs, coupling: &Coupling, theta: f64, side: Side) -> Potentials {
        let stencil = CauchyStencil::new(quad, Target::Limit(theta, side)).unwrap();
        let dens = SampledDensity::from_fn(quad, |t| {
            let d = g.eval_with_derivs(t);
            (d[0], d[1])
        });
        let mom = stencil.moments(quad, &dens, Some(g.eval_with_derivs(theta)));
        Potentials::from_moments(coupling, &mom)
    }

    fn test_density() -> FourierCoeffs {
        let mut g = FourierCoeffs::zeros(4);
        g.set(-3, c(0.2, -0.1));
        g.set(0, c(0.5, 0.3));
        g.set(1, c(-0.4, 0.2));
        g.set(4, c(0.05, 0.07));
        g
    }

    #[test]
    fn displacement_jump_layer() {
        // g′ layer: traction continuous, 2μ du jumps by i(κ+1)g′.
        let kappa = 1.8;
        let contour = Contour::rounded_square(c(0.1, 0.2), 0.6, 9.0, 0.3).unwrap().reversed();
        let quad = ContourQuadrature::new(&contour, 256).unwrap();
        let g = test_density();
        let unit = Coupling {
            region: Region::Plate,
            a: c(1.0, 0.0),
            b: c(1.0, 0.0),
        };
        for &theta in &[0.3, 1.9, 4.4] {
            let p = layer_limit(&quad, &g, &unit, theta, Side::Plus);
            let m = layer_limit(&quad, &g, &unit, theta, Side::Minus);
            let t = contour.point(theta);
            let tf = contour.tangent_factors(theta).unwrap().dtbar_dt;
            let ds = p.stress(t, tf) - m.stress(t, tf);
            let dd = p.scaled_displacement_derivative(kappa, t, tf) - m.scaled_displacement_derivative(kappa, t, tf);
            assert!(ds.norm() < 1e-11, "{ds}");
            assert!((dd - I * (kappa + 1.0) * g.eval(theta)).norm() < 1e-11);
        }
    }

    #[test]
    fn traction_jump_layer() {
        // q layer: traction jumps by 2q, displacement derivative continuous.
        let kappa = 2.2;
        let contour = Contour::rounded_square(c(0.0, 0.0), 0.8, 14.0, -0.2).unwrap();
        let quad = ContourQuadrature::new(&contour, 256).unwrap();
        let q = test_density();
        let coupling = traction_coupling(Region::Plate, kappa, 1.0);
        for &theta in &[0.0, 2.5, 5.0] {
            let p = layer_limit(&quad, &q, &coupling, theta, Side::Plus);
            let m = layer_limit(&quad, &q, &coupling, theta, Side::Minus);
            let t = contour.point(theta);
            let tf = contour.tangent_factors(theta).unwrap().dtbar_dt;
            let ds = p.stress(t, tf) - m.stress(t, tf);
            let dd = p.scaled_displacement_derivative(kappa, t, tf) - m.scaled_displacement_derivative(kappa, t, tf);
            assert!((ds - 2.0 * q.eval(theta)).norm() < 1e-11, "{ds}");
            assert!(dd.norm() < 1e-11);
        }
    }

    #[test]
    fn basis_coefficients_match_direct_evaluation() {
        let pb = PotentialBasis {
            phi: c(0.3, -0.2),
            dphi: c(0.1, 0.4),
            psi_lin: c(-0.5, 0.2),
            psi_conj: c(0.7, 0.1),
        };
        let coeff = c(1.3, -0.6);
        let pot = Potentials {
            phi: coeff * pb.phi,
            dphi: coeff * pb.dphi,
            psi: coeff * pb.psi_lin + coeff.conj() * pb.psi_conj,
        };
        let (t, tf) = (c(0.4, 0.9), Complex64::from_polar(1.0, 0.7));
        for (quantity, direct) in [
            (Quantity::Stress, pot.stress(t, tf)),
            (Quantity::Displacement, pot.scaled_displacement_derivative(1.9, t, tf)),
        ] {
            let (a, b) = pb.coefficients(quantity, 1.9, t, tf);
            assert!((a * coeff + b * coeff.conj() - direct).norm() < 1e-14);
        }
    }
}
