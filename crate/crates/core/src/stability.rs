//! Asymptotic stability of an operating point.
//!
//! The characteristic quartic `det(sI - A)` of the real drift matrix is built
//! from trace and principal-minor sums, then judged by the Hurwitz minors.
//! [`eigen_check`] is the independent route through a dense eigen-solver.

use nalgebra::{Matrix3, Matrix4};

use crate::linearized::{drift_matrix, LinearModel};

/// Hurwitz minors within this relative band of zero are marginal.
pub const MARGINAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    /// `[1, a1, a2, a3, a4]` of `s^4 + a1 s^3 + a2 s^2 + a3 s + a4`.
    pub coefficients: [f64; 5],
    pub hurwitz_minors: [f64; 4],
    /// Each minor divided by the sum of magnitudes of the terms forming it.
    pub relative_margins: [f64; 4],
    pub stable: bool,
    pub marginal: bool,
    pub max_real_eigenvalue: f64,
}

/// Coefficients `[1, a1, a2, a3, a4]` of `det(sI - A)`.
pub fn characteristic_polynomial(a: &Matrix4<f64>) -> [f64; 5] {
    let trace = a.trace();
    let mut minors2 = 0.0;
    for i in 0..4 {
        for j in i + 1..4 {
            minors2 += a[(i, i)] * a[(j, j)] - a[(i, j)] * a[(j, i)];
        }
    }
    let mut minors3 = 0.0;
    for skip in 0..4 {
        let idx: Vec<usize> = (0..4).filter(|&k| k != skip).collect();
        let sub = Matrix3::from_fn(|r, c| a[(idx[r], idx[c])]);
        minors3 += sub.determinant();
    }
    [1.0, -trace, minors2, -minors3, a.determinant()]
}

/// Leading principal minors of the quartic Hurwitz matrix and their
/// relative margins.
pub fn hurwitz_minors(c: &[f64; 5]) -> ([f64; 4], [f64; 4]) {
    let [a0, a1, a2, a3, a4] = *c;
    let h1 = a1;
    let s1 = a1.abs();
    let h2 = a1 * a2 - a0 * a3;
    let s2 = (a1 * a2).abs() + (a0 * a3).abs();
    let h3 = a3 * h2 - a1 * a1 * a4;
    let s3 = a3.abs() * s2 + (a1 * a1 * a4).abs();
    let h4 = a4 * h3;
    let s4 = a4.abs() * s3;
    let rel = |h: f64, s: f64| if s > 0.0 { h / s } else { 0.0 };
    (
        [h1, h2, h3, h4],
        [rel(h1, s1), rel(h2, s2), rel(h3, s3), rel(h4, s4)],
    )
}

pub fn routh_hurwitz(model: &LinearModel) -> StabilityReport {
    let drift = drift_matrix(model);
    let coefficients = characteristic_polynomial(&drift);
    let (hurwitz_minors, relative_margins) = hurwitz_minors(&coefficients);
    let marginal = relative_margins.iter().any(|r| r.abs() <= MARGINAL_TOL);
    let stable = relative_margins.iter().all(|&r| r > MARGINAL_TOL);
    StabilityReport {
        coefficients,
        hurwitz_minors,
        relative_margins,
        stable,
        marginal,
        max_real_eigenvalue: max_real_part(&drift),
    }
}

/// Largest real part among the drift eigenvalues, rad/s.
pub fn eigen_check(model: &LinearModel) -> f64 {
    max_real_part(&drift_matrix(model))
}

fn max_real_part(a: &Matrix4<f64>) -> f64 {
    a.complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}
