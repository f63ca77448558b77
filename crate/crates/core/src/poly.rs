//! Real polynomial roots via eigenvalues of a balanced companion matrix.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Evaluates `sum coeffs[k] x^k` by Horner's rule.
pub fn eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Drops leading (highest-order) coefficients that are exactly zero.
fn trim(coeffs: &[f64]) -> &[f64] {
    let mut n = coeffs.len();
    while n > 0 && coeffs[n - 1] == 0.0 {
        n -= 1;
    }
    &coeffs[..n]
}

/// Companion matrix of the monic polynomial with ascending coefficients
/// `coeffs` (degree >= 1).
pub fn companion(coeffs: &[f64]) -> DMatrix<f64> {
    let coeffs = trim(coeffs);
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let mut m = DMatrix::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -coeffs[i] / lead;
    }
    m
}

/// Parlett–Reinsch diagonal similarity scaling by powers of two, as done
/// ahead of LAPACK's dgeev. Eigenvalues are unchanged; rounding in the
/// eigen-solver is spread evenly across rows and columns.
pub fn balance(m: &mut DMatrix<f64>) {
    const RADIX: f64 = 2.0;
    let n = m.nrows();
    let mut converged = false;
    while !converged {
        converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                converged = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                }
                for j in 0..n {
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

/// All complex roots of the polynomial with ascending coefficients.
pub fn roots(coeffs: &[f64]) -> Vec<Complex64> {
    let coeffs = trim(coeffs);
    match coeffs.len() {
        0 | 1 => Vec::new(),
        2 => vec![Complex64::new(-coeffs[0] / coeffs[1], 0.0)],
        _ => {
            let mut m = companion(coeffs);
            balance(&mut m);
            m.complex_eigenvalues().iter().copied().collect()
        }
    }
}
