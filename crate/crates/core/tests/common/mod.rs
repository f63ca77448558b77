#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use optomech::params::ResolvedParams;
use optomech::LinearModel;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub const OMEGA_M: f64 = 2.0 * PI * 1.0e6;
pub const GAMMA_M: f64 = 2.0 * PI * 260.0;
pub const KAPPA: f64 = 6.0 * PI * 1.0e6;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Operating point with the reference rates, `Delta = omega_m`.
pub fn reference_model(coupling: f64) -> LinearModel {
    LinearModel {
        omega_m: OMEGA_M,
        gamma_m: GAMMA_M,
        kappa: KAPPA,
        delta: OMEGA_M,
        coupling,
        stiffening: 0.0,
    }
}

/// Random operating point with rates drawn around the reference scale.
pub fn random_model(rng: &mut StdRng) -> LinearModel {
    let wm = OMEGA_M * rng.random_range(0.5..2.0);
    LinearModel {
        omega_m: wm,
        gamma_m: wm * 10f64.powf(rng.random_range(-4.0..-1.0)),
        kappa: wm * rng.random_range(0.1..5.0),
        delta: wm * rng.random_range(-3.0..3.0),
        coupling: wm * rng.random_range(0.0..1.5),
        stiffening: wm * rng.random_range(0.0..0.5),
    }
}

pub fn random_stable_model(rng: &mut StdRng) -> LinearModel {
    loop {
        let m = random_model(rng);
        if optomech::routh_hurwitz(&m).stable {
            return m;
        }
    }
}

pub fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

/// Grid used by the oracle-equivalence checks: 2001 points on [0.01, 3] omega_m.
pub fn standard_grid(omega_m: f64) -> Vec<f64> {
    optomech::linearized::frequency_grid(0.01, 3.0, 2001)
        .into_iter()
        .map(|x| x * omega_m)
        .collect()
}

/// `q (k^2 + Delta(q)^2) - e2 (a - 2 b q)` expanded by explicit polynomial
/// multiplication, roots from a companion matrix in a rescaled variable (no
/// balancing), then Newton-polished on the same expansion.
pub fn oracle_roots(p: &ResolvedParams) -> Vec<f64> {
    let wm = p.raw.omega_m;
    let a = p.derived.g_m / wm;
    let b = p.raw.g2 / wm;
    let d0 = p.raw.detuning0 / wm;
    let k = p.raw.kappa / wm;
    let e = p.derived.epsilon_p / wm;
    let e2 = e * e;
    let mul = |x: &[f64], y: &[f64]| {
        let mut out = vec![0.0; x.len() + y.len() - 1];
        for (i, xi) in x.iter().enumerate() {
            for (j, yj) in y.iter().enumerate() {
                out[i + j] += xi * yj;
            }
        }
        out
    };
    let delta = [d0, -a, b];
    let mut inner = mul(&delta, &delta);
    inner[0] += k * k;
    let mut poly = mul(&[0.0, 1.0], &inner);
    poly[0] -= e2 * a;
    poly[1] += 2.0 * e2 * b;
    while poly.last() == Some(&0.0) {
        poly.pop();
    }
    // q = s u with s from the cubic part, so the companion entries stay O(1)
    let s = if poly.len() > 3 { (poly[0] / poly[3]).abs().cbrt() } else { 1.0 };
    let scaled: Vec<f64> = poly.iter().enumerate().map(|(i, c)| c * s.powi(i as i32)).collect();
    let n = scaled.len() - 1;
    let mut c = DMatrix::zeros(n, n);
    for i in 0..n {
        if i > 0 {
            c[(i, i - 1)] = 1.0;
        }
        c[(i, n - 1)] = -scaled[i] / scaled[n];
    }
    let horner = |x: f64| poly.iter().rev().fold(0.0, |acc, &ci| acc * x + ci);
    let deriv = |x: f64| {
        poly.iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (i, &ci)| acc * x + i as f64 * ci)
    };
    let size = |x: f64| poly.iter().enumerate().map(|(i, ci)| (ci * x.powi(i as i32)).abs()).sum::<f64>();
    let mut roots: Vec<f64> = c
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() < 1e-3 * z.norm())
        .map(|z| {
            let mut x = z.re * s;
            for _ in 0..100 {
                let step = horner(x) / deriv(x);
                x -= step;
                if step.abs() < 1e-16 * x.abs() {
                    break;
                }
            }
            x
        })
        .filter(|&x| horner(x).abs() <= 1e-10 * size(x))
        // non-negative occupancy
        .filter(|&x| x == 0.0 || (x > 0.0) == (a - 2.0 * b * x > 0.0))
        .collect();
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|x, y| (*x - *y).abs() <= 1e-9 * x.abs().max(y.abs()));
    roots
}

