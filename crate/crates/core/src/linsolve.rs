//! Dense LU solve of the collocation system.

use nalgebra::{DMatrix, DVector, LU, Dyn};
use thiserror::Error;

use crate::assembly::{Part, RealSystem};
use crate::basis::FourierCoeffs;
use crate::field::DensitySet;
use crate::model::ValidatedProblem;

/// Systems whose reciprocal condition estimate falls below this are rejected.
pub const RCOND_LIMIT: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("matrix is not square ({rows}x{cols}) or does not match rhs length {rhs}")]
    Shape { rows: usize, cols: usize, rhs: usize },
    #[error("system is singular or nearly so (reciprocal condition {rcond:.3e}); the problem is likely ill-posed or the geometry degenerate")]
    Singular { rcond: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    /// ‖Ax − b‖∞
    pub residual_norm: f64,
    /// Estimate of ‖A‖₁‖A⁻¹‖₁.
    pub condition_estimate: Option<f64>,
    pub order: usize,
    /// Largest |ω_j| of the free-hole gauge unknowns; nonzero only when a
    /// hole load has a net torque.
    pub gauge_max: f64,
}

fn norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

fn norm_inf(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Solves Aᵀx = b from the factorization PA = LU.
fn solve_transpose(lu: &LU<f64, Dyn, Dyn>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let ut = lu.u().transpose();
    let lt = lu.l().transpose();
    let y = ut.solve_lower_triangular(b)?;
    let mut w = lt.solve_upper_triangular(&y)?;
    lu.p().inv_permute_rows(&mut w);
    Some(w)
}

/// Hager's estimate of ‖A⁻¹‖₁ from an existing factorization.
fn inverse_norm1_estimate(lu: &LU<f64, Dyn, Dyn>, n: usize) -> Option<f64> {
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    let mut estimate = 0.0;
    for _ in 0..5 {
        let y = lu.solve(&x)?;
        let est = y.iter().map(|v| v.abs()).sum::<f64>();
        let xi = y.map(|v| if v >= 0.0 { 1.0 } else { -1.0 });
        let z = solve_transpose(lu, &xi)?;
        let (j, zmax) = z.iter().enumerate().fold((0, 0.0), |a, (i, v)| if v.abs() > a.1 { (i, v.abs()) } else { a });
        if est <= estimate || zmax <= z.dot(&x) {
            estimate = estimate.max(est);
            break;
        }
        estimate = est;
        x = DVector::zeros(n);
        x[j] = 1.0;
    }
    Some(estimate)
}

/// LU with partial pivoting; returns x and a quality report.
pub fn solve_matrix(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<(DVector<f64>, SolveReport), SolveError> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(SolveError::Shape {
            rows: n,
            cols: a.ncols(),
            rhs: b.len(),
        });
    }
    let anorm = norm1(a);
    let lu = a.clone().lu();
    let singular = SolveError::Singular { rcond: 0.0 };
    let x = lu.solve(b).ok_or(singular.clone())?;
    let inv = inverse_norm1_estimate(&lu, n).ok_or(singular)?;
    let cond = anorm * inv;
    let rcond = if cond > 0.0 { 1.0 / cond } else { 0.0 };
    if !(rcond >= RCOND_LIMIT) {
        return Err(SolveError::Singular { rcond });
    }
    let residual = a * &x - b;
    Ok((
        x,
        SolveReport {
            residual_norm: norm_inf(&residual),
            condition_estimate: Some(cond),
            order: n,
            gauge_max: 0.0,
        },
    ))
}

pub fn solve_dense(system: &RealSystem) -> Result<(DVector<f64>, SolveReport), SolveError> {
    let (x, mut report) = solve_matrix(&system.matrix, &system.rhs)?;
    report.gauge_max = system.gauge_columns.iter().map(|&(_, c)| x[c].abs()).fold(0.0, f64::max);
    Ok((x, report))
}

/// Groups the real solution vector into per-block coefficient series.
pub fn to_densities(problem: &ValidatedProblem, system: &RealSystem, x: &DVector<f64>) -> DensitySet {
    let degree = system.degree;
    let mut series: Vec<FourierCoeffs> = problem.blocks.iter().map(|_| FourierCoeffs::zeros(degree)).collect();
    for (col, id) in system.columns.iter().enumerate() {
        if id.part == Part::Im {
            continue;
        }
        let bi = problem.block_index(id.block).expect("column of a known block");
        let special = system.gauge_columns.iter().chain(&system.moment_columns).any(|&(_, c)| c == col);
        let re = if special { 0.0 } else { x[col] };
        let value = num_complex::Complex64::new(re, x[col + 1]);
        series[bi].set(id.harmonic, value);
    }
    let mut moments = vec![0.0; problem.holes.len()];
    for &(j, col) in &system.moment_columns {
        moments[j] = x[col];
    }
    DensitySet::new(problem.blocks.clone(), series).with_hole_moments(moments)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_diagonal() {
        let b = DVector::from_vec(vec![1.0, -2.0, 3.5]);
        let (x, rep) = solve_matrix(&DMatrix::identity(3, 3), &b).unwrap();
        assert_eq!(x, b);
        assert_eq!(rep.residual_norm, 0.0);
        assert_eq!(rep.order, 3);
        assert!((rep.condition_estimate.unwrap() - 1.0).abs() < 1e-14);

        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 4.0]);
        let (x, _) = solve_matrix(&a, &DVector::from_vec(vec![2.0, 8.0])).unwrap();
        assert_eq!(x.as_slice(), &[1.0, 2.0]);
    }

    fn pseudo_random(n: usize, seed: u64) -> DMatrix<f64> {
        let mut s = seed;
        DMatrix::from_fn(n, n, |i, j| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let u = (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            u + if i == j { n as f64 * 0.05 } else { 0.0 }
        })
    }

    #[test]
    fn random_system_residual() {
        let a = pseudo_random(100, 7);
        let b = DVector::from_fn(100, |i, _| (i as f64).sin());
        let (x, rep) = solve_matrix(&a, &b).unwrap();
        assert!(rep.residual_norm / norm_inf(&b) < 1e-12);
        let (x2, _) = solve_matrix(&a, &b).unwrap();
        assert_eq!(x, x2);
    }

    #[test]
    fn condition_estimate_is_close() {
        let a = pseudo_random(40, 3);
        let exact = norm1(&a) * norm1(&a.clone().try_inverse().unwrap());
        let (_, rep) = solve_matrix(&a, &DVector::from_element(40, 1.0)).unwrap();
        let est = rep.condition_estimate.unwrap();
        assert!(est <= exact * (1.0 + 1e-10) && est > exact / 10.0, "{est} vs {exact}");
    }

    #[test]
    fn rejects_singular() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(
            solve_matrix(&a, &DVector::from_vec(vec![1.0, 1.0])),
            Err(SolveError::Singular { .. })
        ));
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-15]);
        assert!(matches!(
            solve_matrix(&a, &DVector::from_vec(vec![1.0, 1.0])),
            Err(SolveError::Singular { .. })
        ));
        assert!(matches!(
            solve_matrix(&DMatrix::identity(2, 3), &DVector::zeros(2)),
            Err(SolveError::Shape { .. })
        ));
    }
}
