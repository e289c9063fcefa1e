//! TOML run configuration.

use std::collections::BTreeMap;
use std::path::PathBuf;

use num_complex::Complex64;
use serde::Deserialize;

use crate::geometry::{Contour, CurveKind, GeometryError};
use crate::model::{Attachment, FarField, Hole, HoleKind, Material, ModelError, Patch, ProblemSpec, TractionLoad};

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Angles (α, rotations, sweep values) are read in degrees when set.
    #[serde(default)]
    pub degrees: bool,
    pub plate: MaterialConfig,
    pub farfield: FarFieldConfig,
    #[serde(default)]
    pub hole: Vec<HoleConfig>,
    #[serde(default)]
    pub patch: Vec<PatchConfig>,
    #[serde(default)]
    pub numerics: NumericsConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MaterialConfig {
    pub shear_modulus: f64,
    pub poisson: f64,
    #[serde(default = "one")]
    pub thickness: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FarFieldConfig {
    pub sigma1: f64,
    #[serde(default)]
    pub sigma2: f64,
    #[serde(default)]
    pub alpha: f64,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveConfig {
    Circle {
        center: [f64; 2],
        radius: f64,
    },
    RoundedSquare {
        center: [f64; 2],
        scale: f64,
        corner_divisor: f64,
        #[serde(default)]
        rotation: f64,
    },
    /// Rows of `[n, re, im]` for the term (re + i·im)·e^{inθ}.
    Fourier { coefficients: Vec<(i32, f64, f64)> },
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LoadConfig {
    /// Uniform pressure pushing on the boundary.
    #[serde(default)]
    pub pressure: f64,
    /// Rows of `[m, re, im]` added to σ_n + iτ_n as (re + i·im)·e^{imθ}.
    #[serde(default)]
    pub coefficients: Vec<(i32, f64, f64)>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct HoleConfig {
    pub name: String,
    pub contour: CurveConfig,
    /// Name of the patch bonded along this hole; omitted for a free hole.
    #[serde(default)]
    pub bonded_to: Option<String>,
    #[serde(default)]
    pub load: Option<LoadConfig>,
    #[serde(default)]
    pub z_ref: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PatchConfig {
    pub name: String,
    pub contour: CurveConfig,
    pub shear_modulus: f64,
    pub poisson: f64,
    #[serde(default = "one")]
    pub thickness: f64,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum QuadratureConfig {
    Nodes(usize),
    Auto(String),
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    #[serde(rename = "N", default = "default_degree")]
    pub degree: usize,
    #[serde(rename = "M", default)]
    pub quadrature: Option<QuadratureConfig>,
}

fn default_degree() -> usize {
    20
}

impl Default for NumericsConfig {
    fn default() -> Self {
        NumericsConfig {
            degree: default_degree(),
            quadrature: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<String>,
    #[serde(default = "default_resolution")]
    pub trace_resolution: usize,
}

fn default_directory() -> PathBuf {
    PathBuf::from(".")
}

fn default_formats() -> Vec<String> {
    vec!["csv".into()]
}

fn default_resolution() -> usize {
    crate::verify::DEFAULT_RESOLUTION
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: default_directory(),
            formats: default_formats(),
            trace_resolution: default_resolution(),
        }
    }
}

/// Problems found while reading a configuration.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    /// Malformed document, unknown key or wrong type.
    #[error("{0}")]
    Parse(String),
    /// Well-formed document describing an invalid problem.
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{0}")]
    Invalid(String),
}

impl From<GeometryError> for ConfigError {
    fn from(e: GeometryError) -> Self {
        ConfigError::Invalid(e.to_string())
    }
}

fn point(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn series(rows: &[(i32, f64, f64)]) -> BTreeMap<i32, Complex64> {
    let mut out = BTreeMap::new();
    for &(n, re, im) in rows {
        *out.entry(n).or_insert(Complex64::new(0.0, 0.0)) += Complex64::new(re, im);
    }
    out
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), ConfigError> {
        if let Some(QuadratureConfig::Auto(word)) = &self.numerics.quadrature {
            if word != "auto" {
                return Err(ConfigError::Parse(format!("numerics.M must be an integer or \"auto\", got \"{word}\"")));
            }
        }
        for f in &self.output.formats {
            if f != "csv" && f != "svg" {
                return Err(ConfigError::Parse(format!("output.formats: unknown format \"{f}\" (expected csv or svg)")));
            }
        }
        if self.output.trace_resolution == 0 {
            return Err(ConfigError::Parse("output.trace_resolution must be positive".into()));
        }
        Ok(())
    }

    /// Converts an angle from the document's unit to radians.
    pub fn angle(&self, value: f64) -> f64 {
        if self.degrees {
            value.to_radians()
        } else {
            value
        }
    }

    pub fn quadrature_nodes(&self) -> Option<usize> {
        match self.numerics.quadrature {
            Some(QuadratureConfig::Nodes(m)) => Some(m),
            _ => None,
        }
    }

    fn curve(&self, c: &CurveConfig) -> Result<Contour, ConfigError> {
        let kind = match c {
            CurveConfig::Circle { center, radius } => CurveKind::Circle {
                center: point(*center),
                radius: *radius,
            },
            CurveConfig::RoundedSquare {
                center,
                scale,
                corner_divisor,
                rotation,
            } => CurveKind::RoundedSquare {
                center: point(*center),
                scale: *scale,
                corner_divisor: *corner_divisor,
                rotation: self.angle(*rotation),
            },
            CurveConfig::Fourier { coefficients } => CurveKind::Fourier {
                coefficients: series(coefficients),
            },
        };
        Ok(Contour::new(kind)?)
    }

    /// Builds the unvalidated problem description.
    pub fn problem(&self) -> Result<ProblemSpec, ConfigError> {
        let plate = Material::new(self.plate.shear_modulus, self.plate.poisson, self.plate.thickness)?;
        let far_field = FarField {
            sigma1: self.farfield.sigma1,
            sigma2: self.farfield.sigma2,
            alpha: self.angle(self.farfield.alpha),
        };
        let patch_index = |name: &str| self.patch.iter().position(|p| p.name == name);
        let mut holes = Vec::with_capacity(self.hole.len());
        for h in &self.hole {
            let kind = match &h.bonded_to {
                Some(name) => {
                    if h.load.is_some() || h.z_ref.is_some() {
                        return Err(ConfigError::Invalid(format!("hole {}: a bonded hole takes no load or z_ref", h.name)));
                    }
                    let patch = patch_index(name).ok_or_else(|| ConfigError::Invalid(format!("hole {}: unknown patch \"{name}\"", h.name)))?;
                    HoleKind::Bonded { patch }
                }
                None => {
                    let load = match &h.load {
                        None => TractionLoad::zero(),
                        Some(l) => {
                            let mut t = TractionLoad::pressure(l.pressure);
                            for (m, v) in series(&l.coefficients) {
                                *t.coefficients.entry(m).or_insert(Complex64::new(0.0, 0.0)) += v;
                            }
                            t
                        }
                    };
                    HoleKind::Free {
                        load,
                        z_ref: h.z_ref.map(point),
                    }
                }
            };
            holes.push(Hole {
                name: h.name.clone(),
                contour: self.curve(&h.contour)?,
                kind,
            });
        }
        let mut patches = Vec::with_capacity(self.patch.len());
        for (k, p) in self.patch.iter().enumerate() {
            let bonded: Vec<usize> = self
                .hole
                .iter()
                .enumerate()
                .filter(|(_, h)| h.bonded_to.as_deref().and_then(patch_index) == Some(k))
                .map(|(j, _)| j)
                .collect();
            patches.push(Patch {
                name: p.name.clone(),
                contour: self.curve(&p.contour)?,
                material: Material::new(p.shear_modulus, p.poisson, p.thickness)?,
                attachment: if bonded.is_empty() {
                    Attachment::EdgeBond
                } else {
                    Attachment::FullBond { holes: bonded }
                },
            });
        }
        Ok(ProblemSpec {
            plate,
            far_field,
            holes,
            patches,
        })
    }
}
