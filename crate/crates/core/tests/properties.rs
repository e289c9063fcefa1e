use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use platepatch::field::{DensitySet, EvalSide, Region, Solution};
use platepatch::geometry::Contour;
use platepatch::kernels::{self, KernelId, Side, Target};
use platepatch::model::{ContourId, HoleKind, ProblemSpec, TractionLoad};
use platepatch::presets;
use platepatch::verify::{self, SweepParameter, TraceSelector};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn curve() -> impl Strategy<Value = Contour> {
    prop_oneof![
        (-2.0..2.0f64, -2.0..2.0f64, 0.1..2.0f64).prop_map(|(x, y, r)| Contour::circle(c(x, y), r).unwrap()),
        (-2.0..2.0f64, -2.0..2.0f64, 0.1..2.0f64, 4.0..20.0f64, -PI..PI)
            .prop_map(|(x, y, s, d, rot)| Contour::rounded_square(c(x, y), s, d, rot).unwrap()),
        (0.5..1.5f64, -0.15..0.15f64, -0.15..0.15f64, -0.1..0.1f64, -0.1..0.1f64).prop_map(|(a1, am, bm, a2, b2)| {
            let mut k = BTreeMap::new();
            k.insert(0, c(0.3, -0.2));
            k.insert(1, c(a1, 0.0));
            k.insert(-1, c(am, bm));
            k.insert(2, c(a2, b2));
            Contour::fourier(k).unwrap()
        }),
    ]
}

fn solved(spec: &ProblemSpec, n: usize) -> Solution {
    platepatch::solve(&platepatch::validate(spec).unwrap(), n, None).unwrap().0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn derivatives_match_finite_differences(curve in curve(), thetas in prop::collection::vec(0.0..2.0 * PI, 32)) {
        let h = 1e-5;
        for theta in thetas {
            let (d1, d2) = curve.derivs(theta);
            let fd1 = (curve.point(theta + h) - curve.point(theta - h)) / (2.0 * h);
            let fd2 = (curve.point(theta + h) - 2.0 * curve.point(theta) + curve.point(theta - h)) / (h * h);
            prop_assert!((fd1 - d1).norm() <= 1e-6 * d1.norm().max(1.0));
            prop_assert!((fd2 - d2).norm() <= 1e-4 * d2.norm().max(1.0));
        }
    }

    #[test]
    fn reversal_flips_orientation(curve in curve()) {
        let s = curve.orientation_sign().unwrap();
        prop_assert_eq!(curve.reversed().orientation_sign().unwrap(), -s);
    }

    #[test]
    fn winding_numbers_away_from_the_curve(curve in curve(), t in 0.0..2.0 * PI, depth in 0.05..0.5f64) {
        let (d1, _) = curve.derivs(t);
        let p = curve.point(t);
        // the left normal points inside a counterclockwise curve
        let inward = c(0.0, curve.orientation_sign().unwrap()) * d1 / d1.norm();
        let outside = p - inward * depth;
        let near = curve.samples(2048).iter().map(|z| (z - outside).norm()).fold(f64::INFINITY, f64::min);
        prop_assume!(near >= 0.05);
        prop_assert_eq!(curve.winding_number(outside).unwrap(), 0);
        let centre = curve.centroid();
        prop_assert_eq!(curve.winding_number(centre).unwrap().abs(), 1);
    }

    #[test]
    fn tangent_factors_are_unimodular(curve in curve(), theta in 0.0..2.0 * PI) {
        let tf = curve.tangent_factors(theta).unwrap();
        prop_assert!((tf.dtbar_dt.norm() - 1.0).abs() < 1e-14);
        prop_assert!((tf.absdt_dt.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn plemelj_jump(curve in curve(), m in -4i32..=4, theta in 0.0..2.0 * PI) {
        let sigma = curve.orientation_sign().unwrap();
        let plus = kernels::layer_integral(&curve, m, KernelId::C, Target::Limit(theta, Side::Plus), 512).unwrap();
        let minus = kernels::layer_integral(&curve, m, KernelId::C, Target::Limit(theta, Side::Minus), 512).unwrap();
        let phi = Complex64::from_polar(1.0, m as f64 * theta);
        prop_assert!((plus - minus - 2.0 * sigma * PI * c(0.0, 1.0) * phi).norm() < 1e-10);
    }

    #[test]
    fn far_field_constants_have_period_pi(s1 in -3.0..3.0f64, s2 in -3.0..3.0f64, alpha in -PI..PI) {
        let mut spec = presets::kirsch_problem(0.5);
        spec.far_field.sigma1 = s1;
        spec.far_field.sigma2 = s2;
        spec.far_field.alpha = alpha;
        let a = platepatch::validate(&spec).unwrap().derived_constants();
        spec.far_field.alpha = alpha + PI;
        let b = platepatch::validate(&spec).unwrap().derived_constants();
        prop_assert!((a.gamma - b.gamma).abs() < 1e-14);
        prop_assert!((a.gamma_prime - b.gamma_prime).norm() < 1e-14);
    }
}

#[test]
fn group_count_is_4n_plus_2m_plus_r() {
    for (spec, expected) in [
        (presets::fig2_problem(0.0, true), 8),
        (presets::fig2_problem(0.0, false), 6),
        (presets::two_hole_problem(0.0, [true, false], 0.75), 4 + 2 + 1),
        (presets::three_hole_problem(0.3), 12),
        (presets::kirsch_problem(1.0), 1),
    ] {
        let p = platepatch::validate(&spec).unwrap();
        assert_eq!(p.group_count(), expected);
        assert_eq!(p.group_count(), 4 * p.n + 2 * p.m + p.r);
    }
}

#[test]
fn load_constants_are_resolution_independent() {
    let mut spec = presets::kirsch_problem(0.5);
    let mut coefficients = BTreeMap::new();
    coefficients.insert(1, c(0.4, -0.3));
    coefficients.insert(-2, c(0.1, 0.2));
    coefficients.insert(0, c(-1.0, 0.0));
    spec.holes[0].kind = HoleKind::Free {
        load: TractionLoad { coefficients },
        z_ref: None,
    };
    let p = platepatch::validate(&spec).unwrap();
    let q = p.derived_constants().hole_q[0];
    // −i∮p dt taken along the clockwise hole, summed on the user's parametrization
    let contour = spec.holes[0].contour.clone();
    let load = TractionLoad { coefficients: match &spec.holes[0].kind {
        HoleKind::Free { load, .. } => load.coefficients.clone(),
        _ => unreachable!(),
    } };
    let clockwise = -contour.orientation_sign().unwrap();
    for nodes in [256, 512] {
        let h = 2.0 * PI / nodes as f64;
        let sum: Complex64 = (0..nodes)
            .map(|i| {
                let t = i as f64 * h;
                load.eval(t) * contour.derivs(t).0
            })
            .sum::<Complex64>()
            * h;
        let expected = -c(0.0, 1.0) * clockwise * sum / (2.0 * PI * (1.0 + p.kappa));
        assert!((expected - q).norm() < 1e-12, "{expected} vs {q}");
    }
}

#[test]
fn far_field_is_recovered() {
    let s = solved(&presets::fig2_problem(0.3, true), 10);
    let k = s.problem().derived_constants();
    for z in [c(1e3, 0.0), c(-600.0, 800.0), c(0.0, -1e3)] {
        let p = s.potentials_plate(z).unwrap();
        assert!((p.phi - k.gamma).norm() < 1e-6, "{}", p.phi);
        assert!((p.psi - k.gamma_prime).norm() < 1e-6, "{}", p.psi);
    }
}

#[test]
fn boundary_limits_match_normal_extrapolation() {
    let s = solved(&presets::fig2_problem(PI / 4.0, false), 10);
    let cases = [
        (ContourId::Hole(0), Region::Plate, Side::Plus),
        (ContourId::Patch(1), Region::Plate, Side::Plus),
        (ContourId::Patch(1), Region::Plate, Side::Minus),
        (ContourId::Patch(0), Region::Patch(0), Side::Plus),
    ];
    for (id, region, side) in cases {
        let contour = s.problem().contour(id).clone();
        for theta in [0.3, 2.0, 4.1] {
            let (d1, _) = contour.derivs(theta);
            let t = contour.point(theta);
            let normal = c(0.0, side.sign()) * d1 / d1.norm();
            let at = |delta: f64| s.stress_interior(region, t + normal * delta, d1).unwrap().value;
            let (f1, f2) = (at(8e-3), at(4e-3));
            let (f3, f4) = (at(2e-3), at(1e-3));
            // second-order Richardson with ratio 2
            let r1 = 2.0 * f2 - f1;
            let r2 = 2.0 * f3 - f2;
            let r3 = 2.0 * f4 - f3;
            let e1 = (4.0 * r2 - r1) / 3.0;
            let e2 = (4.0 * r3 - r2) / 3.0;
            let extrap = (8.0 * e2 - e1) / 7.0;
            let limit = s.boundary_stress(id, theta, region, side).unwrap().value;
            assert!((extrap - limit).norm() < 1e-5, "{id:?} {side:?} θ={theta}: {extrap} vs {limit}");
        }
    }
}

fn traction_imbalance(s: &Solution, thetas: &[f64]) -> f64 {
    let d = s.problem().derived_constants().thickness_ratio;
    let mut worst: f64 = 0.0;
    for j in 0..s.problem().patches.len() {
        let id = ContourId::Patch(j);
        for &theta in thetas {
            let plus = s.boundary_stress(id, theta, Region::Plate, Side::Plus).unwrap().value;
            let minus = s.boundary_stress(id, theta, Region::Plate, Side::Minus).unwrap().value;
            let patch = s.boundary_stress(id, theta, Region::Patch(j), Side::Plus).unwrap().value;
            worst = worst.max((plus + d[j] * patch - minus).norm());
        }
    }
    worst
}

#[test]
fn traction_balance_across_patch_edges() {
    let spec = presets::fig2_problem(PI / 4.0, true);
    // not collocated directly; it converges with the truncation degree
    let anywhere: Vec<f64> = (0..37).map(|i| 2.0 * PI * i as f64 / 37.0 + 0.01).collect();
    let fine = traction_imbalance(&solved(&spec, 60), &anywhere);
    assert!(fine < 1e-7, "{fine:e}");
}

#[test]
fn residuals_fall_with_degree() {
    let p = platepatch::validate(&presets::fig2_problem(PI / 4.0, true)).unwrap();
    let r: Vec<f64> = [10, 15, 20]
        .iter()
        .map(|&n| platepatch::solve(&p, n, None).unwrap().0.bc_residuals(None).unwrap().max())
        .collect();
    assert!(r[0] > r[1] && r[1] > r[2], "{r:?}");
}

#[test]
fn solver_is_backward_stable_and_deterministic() {
    for spec in [
        presets::kirsch_problem(0.5),
        presets::fig2_problem(PI / 4.0, true),
        presets::fig2_problem(PI / 4.0, false),
        presets::three_hole_problem(0.0),
    ] {
        let p = platepatch::validate(&spec).unwrap();
        let system = platepatch::assembly::assemble(&p, 12, None).unwrap();
        let (x1, report) = platepatch::linsolve::solve_dense(&system).unwrap();
        let (x2, _) = platepatch::linsolve::solve_dense(&system).unwrap();
        assert_eq!(x1, x2);
        let b = system.rhs.amax();
        assert!(report.residual_norm / b < 1e-10, "{}", report.residual_norm / b);
    }
}

#[test]
fn kirsch_profile_is_radius_independent() {
    let sample = |r: f64| {
        let s = solved(&presets::kirsch_problem(r), 12);
        let sel = TraceSelector::new(s.problem(), ContourId::Hole(0), Region::Plate, Side::Plus);
        sel.trace(&s, 180).unwrap()
    };
    let reference = sample(0.5);
    for r in [0.3, 1.0] {
        let t = sample(r);
        for i in 0..t.len() {
            assert!((t.sigma_n[i] - reference.sigma_n[i]).abs() < 1e-6);
            assert!((t.sigma_n[i] - verify::kirsch_hoop(t.theta[i], 1.0)).abs() < 1e-6);
        }
    }
}

#[test]
fn sweeps_are_grid_independent() {
    let spec = presets::fig2_problem(PI / 4.0, true);
    let values = [0.7, 0.8];
    let n = 10;
    let base = verify::sweep(&spec, SweepParameter::PatchScale, &values, n, None, &[], 180).unwrap();
    let m = 2 * kernels::default_quadrature_nodes(n);
    let fine = verify::sweep(&spec, SweepParameter::PatchScale, &values, n, Some(m), &[], 180).unwrap();
    assert_eq!(base.len(), fine.len());
    for (a, b) in base.iter().zip(&fine) {
        assert!((a.max_sigma - b.max_sigma).abs() < 1e-8, "{} {}: {} vs {}", a.value, a.contour, a.max_sigma, b.max_sigma);
        assert!((a.max_tau - b.max_tau).abs() < 1e-8);
    }
    let again = verify::sweep(&spec, SweepParameter::PatchScale, &values, n, None, &[], 180).unwrap();
    assert_eq!(base, again);
}

#[test]
fn rotating_a_circle_unit_changes_nothing() {
    // one circular hole under a concentric circular patch: the load angle only rotates the field
    let mut spec = presets::kirsch_problem(0.5);
    spec.holes[0].kind = HoleKind::Bonded { patch: 0 };
    spec.patches.push(platepatch::model::Patch {
        name: "G1".into(),
        contour: Contour::circle(c(0.0, 0.0), 0.8).unwrap(),
        material: presets::patch_material(),
        attachment: platepatch::model::Attachment::FullBond { holes: vec![0] },
    });
    let rows = verify::sweep(&spec, SweepParameter::Alpha, &[0.0, 0.4, 1.1, 2.0], 8, None, &[], 720).unwrap();
    let first: Vec<_> = rows.iter().filter(|r| r.value == 0.0).cloned().collect();
    for r in &rows {
        let f = first.iter().find(|f| f.contour == r.contour && f.region == r.region && f.side == r.side).unwrap();
        // the trace grid is sampled every 0.5°, so maxima move by at most a sampling step
        assert!((r.max_sigma - f.max_sigma).abs() < 1e-4 * f.max_sigma.max(1.0), "{r:?}");
    }
}

#[test]
fn zero_densities_give_the_uniform_field() {
    let p = platepatch::validate(&presets::fig2_problem(0.0, true)).unwrap();
    let s = Solution::new(p.clone(), DensitySet::zeros(&p, 4), None).unwrap();
    let sample = s.stress_interior(Region::Plate, c(0.0, 2.0), c(1.0, 0.0)).unwrap();
    assert_eq!(sample.side, EvalSide::Interior);
    assert!((sample.value - c(0.0, 0.0)).norm() < 1e-14, "{}", sample.value);
}
