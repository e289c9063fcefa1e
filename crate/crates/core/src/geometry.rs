//! Smooth closed contours with closed-form trigonometric parametrizations.
//!
//! Every supported curve is a finite Fourier series in the parameter θ,
//! `τ(θ) = Σ a_n e^{inθ}`, so positions and derivatives of any order are
//! exact. Reversing a contour maps θ → −θ, which flips its orientation
//! without changing the point set.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Samples used by validation checks on the parametrization.
const CHECK_SAMPLES: usize = 512;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid curve parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate contour: {0}")]
    Degenerate(String),
    #[error("point {0} lies within {1:e} of the contour")]
    AmbiguousPoint(Complex64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Ccw,
    Cw,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Ccw => 1.0,
            Orientation::Cw => -1.0,
        }
    }
}

/// Shape family of a contour together with its defining parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum CurveKind {
    Circle {
        center: Complex64,
        radius: f64,
    },
    /// `center + scale·e^{i rotation}(e^{iθ} + e^{-3iθ}/corner_divisor)`.
    RoundedSquare {
        center: Complex64,
        scale: f64,
        corner_divisor: f64,
        rotation: f64,
    },
    /// Arbitrary finite trigonometric curve `Σ a_n e^{inθ}`.
    Fourier { coefficients: BTreeMap<i32, Complex64> },
}

impl CurveKind {
    fn harmonics(&self) -> Vec<(i32, Complex64)> {
        match *self {
            CurveKind::Circle { center, radius } => {
                vec![(0, center), (1, Complex64::new(radius, 0.0))]
            }
            CurveKind::RoundedSquare {
                center,
                scale,
                corner_divisor,
                rotation,
            } => {
                let rot = Complex64::from_polar(scale, rotation);
                vec![(0, center), (1, rot), (-3, rot / corner_divisor)]
            }
            CurveKind::Fourier { ref coefficients } => coefficients
                .iter()
                .filter(|(_, a)| a.norm() > 0.0)
                .map(|(&n, &a)| (n, a))
                .collect(),
        }
    }

    fn check(&self) -> Result<(), GeometryError> {
        let finite = |z: Complex64| z.re.is_finite() && z.im.is_finite();
        match *self {
            CurveKind::Circle { center, radius } => {
                if !(radius > 0.0 && radius.is_finite()) || !finite(center) {
                    return Err(GeometryError::InvalidParameter(format!(
                        "circle radius must be positive, got {radius}"
                    )));
                }
            }
            CurveKind::RoundedSquare {
                center,
                scale,
                corner_divisor,
                rotation,
            } => {
                if !(scale > 0.0 && scale.is_finite()) {
                    return Err(GeometryError::InvalidParameter(format!(
                        "rounded square scale must be positive, got {scale}"
                    )));
                }
                if !(corner_divisor > 0.0 && corner_divisor.is_finite()) {
                    return Err(GeometryError::InvalidParameter(format!(
                        "rounded square corner divisor must be positive, got {corner_divisor}"
                    )));
                }
                if !rotation.is_finite() || !finite(center) {
                    return Err(GeometryError::InvalidParameter(
                        "rounded square center and rotation must be finite".into(),
                    ));
                }
            }
            CurveKind::Fourier { ref coefficients } => {
                if coefficients.values().any(|a| !finite(*a)) {
                    return Err(GeometryError::InvalidParameter(
                        "fourier curve coefficients must be finite".into(),
                    ));
                }
                if coefficients.iter().all(|(&n, a)| n == 0 || a.norm() == 0.0) {
                    return Err(GeometryError::Degenerate(
                        "fourier curve has no non-constant harmonic".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Unit-modulus factors `conj(τ′)/τ′` and `|τ′|/τ′` at a contour point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentFactors {
    pub dtbar_dt: Complex64,
    pub absdt_dt: Complex64,
}

/// A smooth simple closed curve with a 2π-periodic parametrization.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    kind: CurveKind,
    reversed: bool,
    harmonics: Vec<(i32, Complex64)>,
}

impl Contour {
    /// Builds a contour and checks that the parametrization is regular and
    /// encloses a nonzero area.
    pub fn new(kind: CurveKind) -> Result<Self, GeometryError> {
        kind.check()?;
        let harmonics = kind.harmonics();
        let contour = Contour {
            kind,
            reversed: false,
            harmonics,
        };
        for s in 0..CHECK_SAMPLES {
            let theta = 2.0 * PI * s as f64 / CHECK_SAMPLES as f64;
            let d = contour.derivative(theta, 1);
            if d.norm() < 1e-12 {
                return Err(GeometryError::Degenerate(format!(
                    "vanishing tangent at θ = {theta}"
                )));
            }
        }
        contour.orientation_sign()?;
        Ok(contour)
    }

    pub fn circle(center: Complex64, radius: f64) -> Result<Self, GeometryError> {
        Self::new(CurveKind::Circle { center, radius })
    }

    pub fn rounded_square(
        center: Complex64,
        scale: f64,
        corner_divisor: f64,
        rotation: f64,
    ) -> Result<Self, GeometryError> {
        Self::new(CurveKind::RoundedSquare {
            center,
            scale,
            corner_divisor,
            rotation,
        })
    }

    pub fn fourier(coefficients: BTreeMap<i32, Complex64>) -> Result<Self, GeometryError> {
        Self::new(CurveKind::Fourier { coefficients })
    }

    pub fn kind(&self) -> &CurveKind {
        &self.kind
    }

    pub fn is_reversed(&self) -> bool {
        self.reversed
    }

    /// Same point set traversed in the opposite direction (θ → 2π − θ).
    pub fn reversed(&self) -> Self {
        Contour {
            reversed: !self.reversed,
            ..self.clone()
        }
    }

    /// Returns the contour traversed with the requested orientation.
    pub fn with_orientation(&self, orientation: Orientation) -> Result<Self, GeometryError> {
        if self.orientation()? == orientation {
            Ok(self.clone())
        } else {
            Ok(self.reversed())
        }
    }

    /// All points are obtained from τ(θ) for θ taken mod 2π.
    pub fn point(&self, theta: f64) -> Complex64 {
        self.derivative(theta, 0)
    }

    /// `order`-th derivative of τ with respect to θ.
    pub fn derivative(&self, theta: f64, order: u32) -> Complex64 {
        let dir = if self.reversed { -1.0 } else { 1.0 };
        self.harmonics
            .iter()
            .map(|&(n, a)| {
                let freq = dir * n as f64;
                if order > 0 && n == 0 {
                    return Complex64::new(0.0, 0.0);
                }
                a * (I * freq).powu(order) * Complex64::from_polar(1.0, freq * theta)
            })
            .sum()
    }

    /// (τ′, τ″) at θ.
    pub fn derivs(&self, theta: f64) -> (Complex64, Complex64) {
        (self.derivative(theta, 1), self.derivative(theta, 2))
    }

    pub fn tangent_factors(&self, theta: f64) -> Result<TangentFactors, GeometryError> {
        let d = self.derivative(theta, 1);
        let norm = d.norm();
        if norm < 1e-12 {
            return Err(GeometryError::Degenerate(format!(
                "vanishing tangent at θ = {theta}"
            )));
        }
        Ok(TangentFactors {
            dtbar_dt: d.conj() / d,
            absdt_dt: Complex64::new(norm, 0.0) / d,
        })
    }

    /// `(1/2)∮ Im(conj(τ) τ′) dθ` by the periodic trapezoid rule.
    pub fn signed_area(&self) -> f64 {
        let h = 2.0 * PI / CHECK_SAMPLES as f64;
        0.5 * h
            * (0..CHECK_SAMPLES)
                .map(|s| {
                    let theta = s as f64 * h;
                    (self.point(theta).conj() * self.derivative(theta, 1)).im
                })
                .sum::<f64>()
    }

    pub fn orientation_sign(&self) -> Result<f64, GeometryError> {
        let area = self.signed_area();
        if area.abs() < 1e-12 {
            return Err(GeometryError::Degenerate(format!(
                "signed area {area:e} is too small"
            )));
        }
        Ok(area.signum())
    }

    pub fn orientation(&self) -> Result<Orientation, GeometryError> {
        Ok(if self.orientation_sign()? > 0.0 {
            Orientation::Ccw
        } else {
            Orientation::Cw
        })
    }

    /// Mean of τ(θ) over a uniform grid.
    pub fn centroid(&self) -> Complex64 {
        let n = CHECK_SAMPLES;
        (0..n)
            .map(|s| self.point(2.0 * PI * s as f64 / n as f64))
            .sum::<Complex64>()
            / n as f64
    }

    /// Dense uniform sampling of the curve.
    pub fn samples(&self, count: usize) -> Vec<Complex64> {
        (0..count)
            .map(|s| self.point(2.0 * PI * s as f64 / count as f64))
            .collect()
    }

    /// Winding number of the contour around `z`.
    ///
    /// The trapezoid sum of `(1/2πi)∮ dτ/(τ−z)` is refined until it is within
    /// 1e-3 of an integer.
    pub fn winding_number(&self, z: Complex64) -> Result<i32, GeometryError> {
        let mut nodes = 512usize;
        loop {
            let h = 2.0 * PI / nodes as f64;
            let mut sum = Complex64::new(0.0, 0.0);
            let mut closest = f64::INFINITY;
            for s in 0..nodes {
                let theta = s as f64 * h;
                let diff = self.point(theta) - z;
                closest = closest.min(diff.norm());
                sum += self.derivative(theta, 1) / diff;
            }
            if closest < 1e-9 {
                return Err(GeometryError::AmbiguousPoint(z, 1e-9));
            }
            let w = (sum * h / (2.0 * PI * I)).re;
            if (w - w.round()).abs() < 1e-3 || nodes >= 1 << 20 {
                return Ok(w.round() as i32);
            }
            nodes *= 2;
        }
    }
}

/// Minimum distance between two contours over `samples` points on each.
pub fn min_separation(a: &Contour, b: &Contour, samples: usize) -> f64 {
    let pa = a.samples(samples);
    let pb = b.samples(samples);
    pa.iter()
        .flat_map(|&x| pb.iter().map(move |&y| (x - y).norm()))
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rounded_square_points() {
        let hole = Contour::rounded_square(c(-1.0, 0.0), 0.45, 9.0, 0.0).unwrap();
        assert!((hole.point(0.0) - c(-0.5, 0.0)).norm() < 1e-15);
        let patch = Contour::rounded_square(c(-1.0, 0.0), 0.7, 14.0, 0.0).unwrap();
        assert!((patch.point(0.0) - c(-0.25, 0.0)).norm() < 1e-15);
        let circle = Contour::circle(c(0.0, 0.0), 0.5).unwrap();
        assert!((circle.point(PI / 2.0) - c(0.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn analytic_derivatives() {
        let circle = Contour::circle(c(0.0, 0.0), 0.5).unwrap();
        let (d1, d2) = circle.derivs(0.0);
        assert!((d1 - c(0.0, 0.5)).norm() < 1e-15);
        assert!((d2 - c(-0.5, 0.0)).norm() < 1e-15);
        let sq = Contour::rounded_square(c(0.0, 0.0), 1.0, 9.0, 0.0).unwrap();
        let (d1, d2) = sq.derivs(0.0);
        assert!((d1 - c(0.0, 2.0 / 3.0)).norm() < 1e-15);
        assert!((d2 - c(-2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn tangent_factors_on_unit_circle() {
        let circle = Contour::circle(c(0.0, 0.0), 1.0).unwrap();
        let tf = circle.tangent_factors(0.0).unwrap();
        assert!((tf.dtbar_dt - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((tf.absdt_dt - c(0.0, -1.0)).norm() < 1e-15);
        let sq = Contour::rounded_square(c(0.0, 0.0), 1.0, 9.0, 0.0).unwrap();
        let tf = sq.tangent_factors(PI / 4.0).unwrap();
        assert!((tf.dtbar_dt.norm() - 1.0).abs() < 1e-14);
        assert!((tf.absdt_dt.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn orientation_and_reversal() {
        let circle = Contour::circle(c(0.0, 0.0), 1.0).unwrap();
        assert_eq!(circle.orientation_sign().unwrap(), 1.0);
        assert_eq!(circle.reversed().orientation_sign().unwrap(), -1.0);
        let sq = Contour::rounded_square(c(-1.0, 0.0), 0.45, 9.0, 0.0).unwrap();
        assert_eq!(sq.orientation_sign().unwrap(), 1.0);
        let cw = sq.with_orientation(Orientation::Cw).unwrap();
        assert_eq!(cw.orientation().unwrap(), Orientation::Cw);
        assert!((cw.point(0.3) - sq.point(2.0 * PI - 0.3)).norm() < 1e-14);
    }

    #[test]
    fn winding_numbers() {
        let circle = Contour::circle(c(0.0, 0.0), 1.0).unwrap();
        assert_eq!(circle.winding_number(c(0.0, 0.0)).unwrap(), 1);
        assert_eq!(circle.winding_number(c(3.0, 0.0)).unwrap(), 0);
        assert_eq!(circle.reversed().winding_number(c(0.2, 0.1)).unwrap(), -1);
        let patch = Contour::rounded_square(c(-1.0, 0.0), 0.7, 14.0, 0.0).unwrap();
        assert_eq!(patch.winding_number(c(-1.0, 0.0)).unwrap(), 1);
        assert!(matches!(
            circle.winding_number(c(1.0, 0.0)),
            Err(GeometryError::AmbiguousPoint(..))
        ));
    }

    #[test]
    fn separations() {
        let a = Contour::circle(c(0.0, 0.0), 1.0).unwrap();
        let b = Contour::circle(c(4.0, 0.0), 1.0).unwrap();
        assert!((min_separation(&a, &b, 512) - 2.0).abs() < 1e-3);
        let big = Contour::circle(c(0.0, 0.0), 2.0).unwrap();
        assert!((min_separation(&a, &big, 512) - 1.0).abs() < 1e-3);
        let l1 = Contour::rounded_square(c(-1.0, 0.0), 0.45, 9.0, 0.0).unwrap();
        let l2 = Contour::rounded_square(c(1.0, 0.0), 0.45, 9.0, 0.0).unwrap();
        assert!(min_separation(&l1, &l2, 512) > 0.9);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Contour::circle(c(0.0, 0.0), 0.0).is_err());
        assert!(Contour::rounded_square(c(0.0, 0.0), 1.0, -2.0, 0.0).is_err());
        // e^{iθ} + e^{-3iθ}/3 has cusps: τ′ vanishes where e^{4iθ} = 1.
        assert!(matches!(
            Contour::rounded_square(c(0.0, 0.0), 1.0, 3.0, 0.0),
            Err(GeometryError::Degenerate(_))
        ));
        let mut only_const = BTreeMap::new();
        only_const.insert(0, c(1.0, 0.0));
        assert!(Contour::fourier(only_const).is_err());
    }
}
