//! Cauchy-type layer integrals over closed contours.
//!
//! All integrals are evaluated with the periodic trapezoid rule on a uniform
//! θ-grid. Targets on the source contour itself use singularity subtraction:
//!
//! ```text
//! PV ∮ φ dτ/(τ−t) = ∮ (φ(τ)−φ(t)) dτ/(τ−t) + σπi·φ(t)
//! ```
//!
//! where σ is the orientation sign of the source. The subtracted integrand is
//! smooth, with value φ_θ(θ₀) on the diagonal. One-sided limits follow from
//! Plemelj: the left side (`Plus`) adds πi·φ(t) and the right side subtracts it.
//! Second-order kernels are reduced on the contour by integrating by parts,
//! `∮ f dτ/(τ−z)² = ∮ f_τ dτ/(τ−z)` with `f_τ = f_θ/τ′`.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::geometry::{Contour, GeometryError};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Off-contour targets closer than this must be evaluated as limits.
pub const NEAR_SINGULAR_DISTANCE: f64 = 1e-6;

/// Grid offsets below this are treated as coincident with the target.
const DIAGONAL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("target {z} is {distance:e} from the source contour; use a boundary limit")]
    NearSingular { z: Complex64, distance: f64 },
    #[error("kernel {0:?} is only defined for targets on the source contour")]
    RequiresBoundaryTarget(KernelId),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Side of a contour, relative to its direction of travel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// Left of the direction of travel.
    Plus,
    /// Right of the direction of travel.
    Minus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Side::Plus => Side::Minus,
            Side::Minus => Side::Plus,
        }
    }
}

/// Where a layer integral is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    OffContour(Complex64),
    /// Principal value at τ(θ) on the source contour.
    OnContourPV(f64),
    /// One-sided limit at τ(θ) on the source contour.
    Limit(f64, Side),
}

/// Kernels appearing in the boundary equations, applied to the density e^{imθ}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelId {
    /// `∮ φ dτ/(τ−t)`
    C,
    /// `∮ φ dτ/(τ̄−t̄)`
    Cbar,
    /// `∮ conj(φ dτ)/(τ̄−t̄)`
    CbarConj,
    /// `∮ [−1/(τ̄−t̄) + (τ−t)/(τ̄−t̄)²·(dt̄/dt)] conj(φ dτ)`, bounded on the diagonal.
    B,
    /// `∮ τ̄ φ dτ/(τ−z)²`
    D2,
}

/// Default number of quadrature nodes for truncation degree `degree`.
pub fn default_quadrature_nodes(degree: usize) -> usize {
    256.max(8 * (2 * degree + 1))
}

/// Contour geometry sampled on a uniform θ-grid.
#[derive(Debug, Clone)]
pub struct ContourQuadrature {
    contour: Contour,
    sign: f64,
    h: f64,
    theta: Vec<f64>,
    pos: Vec<Complex64>,
    d1: Vec<Complex64>,
    /// conj(τ′)/τ′ at the nodes.
    tf: Vec<Complex64>,
    max_speed: f64,
}

impl ContourQuadrature {
    pub fn new(contour: &Contour, nodes: usize) -> Result<Self, GeometryError> {
        let sign = contour.orientation_sign()?;
        let h = 2.0 * PI / nodes as f64;
        let theta: Vec<f64> = (0..nodes).map(|j| j as f64 * h).collect();
        let pos = theta.iter().map(|&t| contour.point(t)).collect();
        let d1: Vec<Complex64> = theta.iter().map(|&t| contour.derivative(t, 1)).collect();
        let tf = d1.iter().map(|d| d.conj() / d).collect();
        let max_speed = d1.iter().map(|d| d.norm()).fold(0.0, f64::max);
        Ok(ContourQuadrature {
            contour: contour.clone(),
            sign,
            h,
            theta,
            pos,
            d1,
            tf,
            max_speed,
        })
    }

    pub fn contour(&self) -> &Contour {
        &self.contour
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn thetas(&self) -> &[f64] {
        &self.theta
    }

    pub fn orientation_sign(&self) -> f64 {
        self.sign
    }

    /// `∮ f dτ` for f sampled at the nodes.
    pub fn contour_integral(&self, samples: &[Complex64]) -> Complex64 {
        dot(samples, &self.d1) * self.h
    }

    /// This grid, or a finer one on the same contour when `z` lies closer
    /// than the current spacing resolves.
    pub fn resolving(&self, z: Complex64) -> Result<Option<ContourQuadrature>, GeometryError> {
        let needed = self.nodes_for_distance(self.distance_to(z));
        if needed <= self.len() {
            return Ok(None);
        }
        let nodes = needed.next_power_of_two().min(1 << 20);
        ContourQuadrature::new(&self.contour, nodes).map(Some)
    }

    /// Node count needed so the trapezoid rule resolves a point at `distance`.
    pub fn nodes_for_distance(&self, distance: f64) -> usize {
        let needed = (36.0 * self.max_speed / distance.max(1e-12)).ceil() as usize;
        needed.max(self.len())
    }

    /// Distance from `z` to the curve: nearest node refined by Newton steps.
    pub fn distance_to(&self, z: Complex64) -> f64 {
        let (j, _) = self
            .pos
            .iter()
            .enumerate()
            .map(|(j, p)| (j, (p - z).norm_sqr()))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        let mut t = self.theta[j];
        let c = &self.contour;
        let mut best = (c.point(t) - z).norm();
        for _ in 0..20 {
            let r = c.point(t) - z;
            let d1 = c.derivative(t, 1);
            let d2 = c.derivative(t, 2);
            // f(t) = Re(conj(r)·τ′) = ½ d|r|²/dt
            let f = (r.conj() * d1).re;
            let fp = d1.norm_sqr() + (r.conj() * d2).re;
            if fp.abs() < 1e-300 {
                break;
            }
            let step = (f / fp).clamp(-self.h, self.h);
            t -= step;
            best = best.min((c.point(t) - z).norm());
            if step.abs() < 1e-15 {
                break;
            }
        }
        best
    }

    fn diagonal_index(&self, theta0: f64) -> Option<usize> {
        let x = theta0.rem_euclid(2.0 * PI) / self.h;
        let j = x.round();
        if (x - j).abs() * self.h < DIAGONAL_TOLERANCE {
            Some(j as usize % self.len())
        } else {
            None
        }
    }

    /// Trapezoid weights `h τ′_j/(τ_j − z)` for an off-contour point.
    fn off_weights(&self, z: Complex64) -> Result<Vec<Complex64>, KernelError> {
        let distance = self.distance_to(z);
        if distance < NEAR_SINGULAR_DISTANCE {
            return Err(KernelError::NearSingular { z, distance });
        }
        Ok(self
            .pos
            .iter()
            .zip(&self.d1)
            .map(|(p, d)| d * self.h / (p - z))
            .collect())
    }
}

/// Local jet of the contour at a boundary target.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryJet {
    pub theta: f64,
    pub t: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
    /// conj(τ′)/τ′
    pub tf: Complex64,
    /// θ-derivative of conj(τ′)/τ′
    pub dtf: Complex64,
}

impl BoundaryJet {
    pub fn new(contour: &Contour, theta: f64) -> Self {
        let d1 = contour.derivative(theta, 1);
        let d2 = contour.derivative(theta, 2);
        BoundaryJet {
            theta,
            t: contour.point(theta),
            d1,
            d2,
            tf: d1.conj() / d1,
            dtf: (d2.conj() * d1 - d1.conj() * d2) / (d1 * d1),
        }
    }
}

/// Precomputed evaluation of Cauchy integrals over one source contour
/// at one target.
#[derive(Debug, Clone)]
pub enum CauchyStencil {
    Off {
        z: Complex64,
        k1: Vec<Complex64>,
        k2: Vec<Complex64>,
    },
    On {
        jet: BoundaryJet,
        /// Jump constant: σπi for PV, plus ±πi for a one-sided limit.
        constant: Complex64,
        k1: Vec<Complex64>,
        k1_sum: Complex64,
        diagonal: Option<usize>,
        h: f64,
    },
}

impl CauchyStencil {
    pub fn new(quad: &ContourQuadrature, target: Target) -> Result<Self, KernelError> {
        match target {
            Target::OffContour(z) => {
                let k1 = quad.off_weights(z)?;
                let k2 = k1
                    .iter()
                    .zip(&quad.pos)
                    .map(|(k, p)| k / (p - z))
                    .collect();
                Ok(CauchyStencil::Off { z, k1, k2 })
            }
            Target::OnContourPV(theta) => Ok(Self::on(quad, theta, None)),
            Target::Limit(theta, side) => Ok(Self::on(quad, theta, Some(side))),
        }
    }

    fn on(quad: &ContourQuadrature, theta: f64, side: Option<Side>) -> Self {
        let jet = BoundaryJet::new(&quad.contour, theta);
        let diagonal = quad.diagonal_index(theta);
        let mut k1: Vec<Complex64> = quad
            .pos
            .iter()
            .zip(&quad.d1)
            .map(|(p, d)| d * quad.h / (p - jet.t))
            .collect();
        if let Some(d) = diagonal {
            k1[d] = ZERO;
        }
        let k1_sum = k1.iter().sum();
        let jump = side.map_or(0.0, Side::sign);
        CauchyStencil::On {
            jet,
            constant: I * PI * (quad.sign + jump),
            k1,
            k1_sum,
            diagonal,
            h: quad.h,
        }
    }

    pub fn is_boundary(&self) -> bool {
        matches!(self, CauchyStencil::On { .. })
    }

    pub fn jet(&self) -> Option<&BoundaryJet> {
        match self {
            CauchyStencil::On { jet, .. } => Some(jet),
            CauchyStencil::Off { .. } => None,
        }
    }

    /// `∮ φ dτ/(τ−z)` for φ sampled at the nodes; on the contour `local`
    /// supplies (φ(θ₀), φ_θ(θ₀)).
    pub fn first_order(&self, samples: &[Complex64], local: (Complex64, Complex64)) -> Complex64 {
        match self {
            CauchyStencil::Off { k1, .. } => dot(k1, samples),
            CauchyStencil::On {
                constant,
                k1,
                k1_sum,
                diagonal,
                h,
                ..
            } => {
                let (v, dv) = local;
                let diag = if diagonal.is_some() { dv * *h } else { ZERO };
                dot(k1, samples) - v * k1_sum + diag + v * constant
            }
        }
    }

    /// Off-contour `∮ f dτ/(τ−z)²`.
    fn second_order_off(&self, samples: &[Complex64]) -> Option<Complex64> {
        match self {
            CauchyStencil::Off { k2, .. } => Some(dot(k2, samples)),
            CauchyStencil::On { .. } => None,
        }
    }

    /// The four moments of a density series needed by the complex potentials.
    pub fn moments(&self, quad: &ContourQuadrature, density: &SampledDensity, local: Option<[Complex64; 3]>) -> LayerMoments {
        let g = &density.values;
        match self {
            CauchyStencil::Off { .. } => {
                let conj_t: Vec<Complex64> = g.iter().zip(&quad.tf).map(|(v, t)| v.conj() * t).collect();
                let tbar_g: Vec<Complex64> = g.iter().zip(&quad.pos).map(|(v, p)| v * p.conj()).collect();
                LayerMoments {
                    j1: self.first_order(g, (ZERO, ZERO)),
                    j2: self.second_order_off(g).unwrap_or(ZERO),
                    j3: self.first_order(&conj_t, (ZERO, ZERO)),
                    j4: self.second_order_off(&tbar_g).unwrap_or(ZERO),
                }
            }
            CauchyStencil::On { jet, .. } => {
                let [g0, g1, g2] = local.unwrap_or([ZERO; 3]);
                let dg = &density.derivs;
                let conj_t: Vec<Complex64> = g.iter().zip(&quad.tf).map(|(v, t)| v.conj() * t).collect();
                let g_tau: Vec<Complex64> = dg.iter().zip(&quad.d1).map(|(v, d)| v / d).collect();
                let tbar_g_tau: Vec<Complex64> = g
                    .iter()
                    .zip(dg)
                    .zip(quad.pos.iter().zip(&quad.d1).zip(&quad.tf))
                    .map(|((v, dv), ((p, d), t))| t * v + p.conj() * dv / d)
                    .collect();
                let (d1, d2) = (jet.d1, jet.d2);
                let tbar = jet.t.conj();
                let phi3 = (g0.conj() * jet.tf, g1.conj() * jet.tf + g0.conj() * jet.dtf);
                let phi2 = (g1 / d1, g2 / d1 - g1 * d2 / (d1 * d1));
                let phi4 = (
                    jet.tf * g0 + tbar * g1 / d1,
                    jet.dtf * g0 + 2.0 * jet.tf * g1 + tbar * (g2 / d1 - g1 * d2 / (d1 * d1)),
                );
                LayerMoments {
                    j1: self.first_order(g, (g0, g1)),
                    j2: self.first_order(&g_tau, phi2),
                    j3: self.first_order(&conj_t, phi3),
                    j4: self.first_order(&tbar_g_tau, phi4),
                }
            }
        }
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Density values and θ-derivatives at the quadrature nodes.
#[derive(Debug, Clone)]
pub struct SampledDensity {
    pub values: Vec<Complex64>,
    pub derivs: Vec<Complex64>,
}

impl SampledDensity {
    pub fn from_fn(quad: &ContourQuadrature, f: impl Fn(f64) -> (Complex64, Complex64)) -> Self {
        let (values, derivs) = quad.thetas().iter().map(|&t| f(t)).unzip();
        SampledDensity { values, derivs }
    }

    /// Samples of e^{imθ}.
    pub fn harmonic(quad: &ContourQuadrature, m: i32) -> Self {
        let im = Complex64::new(0.0, m as f64);
        Self::from_fn(quad, |t| {
            let e = Complex64::from_polar(1.0, m as f64 * t);
            (e, im * e)
        })
    }
}

/// `J1 = ∮ g dτ/(τ−z)`, `J2 = ∮ g dτ/(τ−z)²`, `J3 = ∮ conj(g)(dτ̄/dτ) dτ/(τ−z)`,
/// `J4 = ∮ τ̄ g dτ/(τ−z)²`, with boundary targets taken as limits or PV.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LayerMoments {
    pub j1: Complex64,
    pub j2: Complex64,
    pub j3: Complex64,
    pub j4: Complex64,
}

/// Coincidence limit of the bounded kernel [`KernelId::B`] as τ → t.
pub fn smooth_pair_diagonal(source: &Contour, theta: f64) -> Result<Complex64, KernelError> {
    let (d1, d2) = source.derivs(theta);
    if d1.norm() < 1e-12 {
        return Err(GeometryError::Degenerate(format!("vanishing tangent at θ = {theta}")).into());
    }
    Ok((d2 * d1.conj() - d2.conj() * d1) / (2.0 * d1.conj() * d1.conj() * d1))
}

/// Kernel `kernel` applied to the density e^{imθ} on `source`, with
/// `nodes` trapezoid nodes.
pub fn layer_integral(
    source: &Contour,
    m: i32,
    kernel: KernelId,
    target: Target,
    nodes: usize,
) -> Result<Complex64, KernelError> {
    let quad = ContourQuadrature::new(source, nodes)?;
    let im = Complex64::new(0.0, m as f64);
    let local = |theta: f64| {
        let e = Complex64::from_polar(1.0, m as f64 * theta);
        [e, im * e, im * im * e]
    };
    let local_at = match target {
        Target::OffContour(_) => None,
        Target::OnContourPV(t) | Target::Limit(t, _) => Some(local(t)),
    };
    if kernel == KernelId::B {
        let theta0 = match target {
            Target::OffContour(_) => return Err(KernelError::RequiresBoundaryTarget(kernel)),
            Target::OnContourPV(t) | Target::Limit(t, _) => t,
        };
        return smooth_pair_integral(&quad, m, theta0);
    }
    let stencil = CauchyStencil::new(&quad, target)?;
    let density = SampledDensity::harmonic(&quad, m);
    let mom = stencil.moments(&quad, &density, local_at);
    Ok(match kernel {
        KernelId::C => mom.j1,
        KernelId::Cbar => mom.j3.conj(),
        KernelId::CbarConj => mom.j1.conj(),
        KernelId::D2 => mom.j4,
        KernelId::B => unreachable!(),
    })
}

fn smooth_pair_integral(quad: &ContourQuadrature, m: i32, theta0: f64) -> Result<Complex64, KernelError> {
    let t = quad.contour.point(theta0);
    let tf0 = quad.contour.tangent_factors(theta0)?.dtbar_dt;
    let diagonal = quad.diagonal_index(theta0);
    let mut sum = ZERO;
    for j in 0..quad.len() {
        let dens = (Complex64::from_polar(1.0, m as f64 * quad.theta[j]) * quad.d1[j]).conj();
        let kernel = if Some(j) == diagonal {
            smooth_pair_diagonal(&quad.contour, quad.theta[j])?
        } else {
            let dz = quad.pos[j] - t;
            -1.0 / dz.conj() + dz / (dz.conj() * dz.conj()) * tf0
        };
        sum += kernel * dens;
    }
    Ok(sum * quad.h)
}
