//! Truncated complex Fourier series in the contour parameter θ.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BasisError {
    #[error("expected {expected} samples, got {got}")]
    Shape { expected: usize, got: usize },
}

/// `Σ_{m=-N}^{N} c_m e^{imθ}`, stored contiguously from m = −N to m = N.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoeffs {
    degree: usize,
    coeffs: Vec<Complex64>,
}

impl FourierCoeffs {
    pub fn zeros(degree: usize) -> Self {
        FourierCoeffs {
            degree,
            coeffs: vec![ZERO; 2 * degree + 1],
        }
    }

    /// Single harmonic `value·e^{imθ}`.
    pub fn harmonic(degree: usize, m: i32, value: Complex64) -> Self {
        let mut f = Self::zeros(degree);
        f.set(m, value);
        f
    }

    pub fn from_vec(coeffs: Vec<Complex64>) -> Result<Self, BasisError> {
        if coeffs.len() % 2 == 0 {
            return Err(BasisError::Shape {
                expected: coeffs.len() + 1,
                got: coeffs.len(),
            });
        }
        Ok(FourierCoeffs {
            degree: coeffs.len() / 2,
            coeffs,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Iterates `(m, c_m)` from m = −N upward.
    pub fn iter(&self) -> impl Iterator<Item = (i32, Complex64)> + '_ {
        let n = self.degree as i32;
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(k, &c)| (k as i32 - n, c))
    }

    /// Coefficient of e^{imθ}; zero outside the stored range.
    pub fn get(&self, m: i32) -> Complex64 {
        let idx = m + self.degree as i32;
        if idx < 0 || idx as usize >= self.coeffs.len() {
            ZERO
        } else {
            self.coeffs[idx as usize]
        }
    }

    /// Panics if |m| exceeds the degree.
    pub fn set(&mut self, m: i32, value: Complex64) {
        let idx = (m + self.degree as i32) as usize;
        self.coeffs[idx] = value;
    }

    pub fn eval(&self, theta: f64) -> Complex64 {
        self.iter()
            .map(|(m, c)| c * Complex64::from_polar(1.0, m as f64 * theta))
            .sum()
    }

    /// Value together with the first two θ-derivatives.
    pub fn eval_with_derivs(&self, theta: f64) -> [Complex64; 3] {
        let mut out = [ZERO; 3];
        for (m, c) in self.iter() {
            let e = c * Complex64::from_polar(1.0, m as f64 * theta);
            let im = Complex64::new(0.0, m as f64);
            out[0] += e;
            out[1] += im * e;
            out[2] += im * im * e;
        }
        out
    }

    /// Term-by-term derivative: c_m → im·c_m.
    pub fn differentiate(&self) -> Self {
        FourierCoeffs {
            degree: self.degree,
            coeffs: self
                .iter()
                .map(|(m, c)| Complex64::new(0.0, m as f64) * c)
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// The 2N+1 collocation angles θ_s = π(2s−1)/(2N+1), s = 1..2N+1.
#[derive(Debug, Clone, PartialEq)]
pub struct CollocationGrid {
    degree: usize,
    nodes: Vec<f64>,
}

impl CollocationGrid {
    pub fn new(degree: usize) -> Self {
        let count = 2 * degree + 1;
        let nodes = (1..=count)
            .map(|s| PI * (2 * s - 1) as f64 / count as f64)
            .collect();
        CollocationGrid { degree, nodes }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Points halfway between consecutive nodes, θ = 2πs/(2N+1).
    pub fn midpoints(&self) -> Vec<f64> {
        let count = self.nodes.len();
        (0..count)
            .map(|s| 2.0 * PI * s as f64 / count as f64)
            .collect()
    }
}

pub fn collocation_nodes(degree: usize) -> CollocationGrid {
    CollocationGrid::new(degree)
}

/// Trigonometric interpolant through samples on [`collocation_nodes`].
///
/// The grid is uniform with spacing 2π/(2N+1) so the discrete transform is
/// exact for degree ≤ N.
pub fn samples_to_coeffs(samples: &[Complex64], degree: usize) -> Result<FourierCoeffs, BasisError> {
    let count = 2 * degree + 1;
    if samples.len() != count {
        return Err(BasisError::Shape {
            expected: count,
            got: samples.len(),
        });
    }
    let grid = CollocationGrid::new(degree);
    let mut out = FourierCoeffs::zeros(degree);
    for m in -(degree as i32)..=(degree as i32) {
        let c: Complex64 = samples
            .iter()
            .zip(grid.nodes())
            .map(|(&f, &t)| f * Complex64::from_polar(1.0, -(m as f64) * t))
            .sum();
        out.set(m, c / count as f64);
    }
    Ok(out)
}
