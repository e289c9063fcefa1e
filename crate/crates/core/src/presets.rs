//! Reference configurations: a single free circular hole and the
//! two- and three-hole patch repairs used throughout the tests and examples.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::geometry::Contour;
use crate::model::{Attachment, FarField, Hole, HoleKind, Material, Patch, ProblemSpec, TractionLoad};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn plate_material() -> Material {
    Material {
        shear_modulus: 60.0,
        poisson: 0.4,
        thickness: 1.0,
    }
}

pub fn patch_material() -> Material {
    Material {
        shear_modulus: 40.0,
        poisson: 0.3,
        thickness: 1.0,
    }
}

/// Traction-free circular hole of radius `radius` under unit uniaxial tension along x.
pub fn kirsch_problem(radius: f64) -> ProblemSpec {
    ProblemSpec {
        plate: plate_material(),
        far_field: FarField {
            sigma1: 1.0,
            sigma2: 0.0,
            alpha: 0.0,
        },
        holes: vec![Hole {
            name: "L1".into(),
            contour: Contour::circle(c(0.0, 0.0), radius).unwrap(),
            kind: HoleKind::Free {
                load: TractionLoad::zero(),
                z_ref: None,
            },
        }],
        patches: vec![],
    }
}

/// Two rounded-square holes at ∓1 under two rounded-square patches of
/// circumscribed radius `patch_radius`; `full_bond[k]` selects the attachment of patch k.
pub fn two_hole_problem(alpha: f64, full_bond: [bool; 2], patch_radius: f64) -> ProblemSpec {
    let scale = patch_radius / (1.0 + 1.0 / 14.0);
    let centers = [c(-1.0, 0.0), c(1.0, 0.0)];
    let holes = (0..2)
        .map(|k| Hole {
            name: format!("L{}", k + 1),
            contour: Contour::rounded_square(centers[k], 0.45, 9.0, 0.0).unwrap(),
            kind: if full_bond[k] {
                HoleKind::Bonded { patch: k }
            } else {
                HoleKind::Free {
                    load: TractionLoad::zero(),
                    z_ref: None,
                }
            },
        })
        .collect();
    let patches = (0..2)
        .map(|k| Patch {
            name: format!("G{}", k + 1),
            contour: Contour::rounded_square(centers[k], scale, 14.0, 0.0).unwrap(),
            material: patch_material(),
            attachment: if full_bond[k] {
                Attachment::FullBond { holes: vec![k] }
            } else {
                Attachment::EdgeBond
            },
        })
        .collect();
    ProblemSpec {
        plate: plate_material(),
        far_field: FarField {
            sigma1: 1.0,
            sigma2: 0.0,
            alpha,
        },
        holes,
        patches,
    }
}

/// The two-hole repair with patch scale 0.7, both patches bonded the same way.
pub fn fig2_problem(alpha: f64, full_bond: bool) -> ProblemSpec {
    two_hole_problem(alpha, [full_bond; 2], 0.75)
}

/// Three circular holes (R = 0.5) at −1−i, 1−i, −1+i under fully bonded
/// rounded-square patches rotated by `beta − π/4`.
pub fn three_hole_problem(beta: f64) -> ProblemSpec {
    let centers = [c(-1.0, -1.0), c(1.0, -1.0), c(-1.0, 1.0)];
    ProblemSpec {
        plate: plate_material(),
        far_field: FarField {
            sigma1: 1.0,
            sigma2: 0.0,
            alpha: 0.0,
        },
        holes: (0..3)
            .map(|k| Hole {
                name: format!("L{}", k + 1),
                contour: Contour::circle(centers[k], 0.5).unwrap(),
                kind: HoleKind::Bonded { patch: k },
            })
            .collect(),
        patches: (0..3)
            .map(|k| Patch {
                name: format!("G{}", k + 1),
                contour: Contour::rounded_square(centers[k], 0.675, 9.0, beta - PI / 4.0).unwrap(),
                material: patch_material(),
                attachment: Attachment::FullBond { holes: vec![k] },
            })
            .collect(),
    }
}
