//! Linearized fluctuations about an operating point.
//!
//! With the phase convention of [`crate::steady_state`] the effective
//! coupling `G` is real and the fluctuations obey
//!
//! ```text
//! d(da)/dt    = -(kappa + i Delta) da  + i G dq + sqrt(2 kappa) a_in
//! d(da†)/dt   = -(kappa - i Delta) da† - i G dq + sqrt(2 kappa) a_in†
//! d(dp)/dt    = -gamma_m dp - (omega_m + 2 g2 |a_s|^2) dq + G (da + da†) + xi
//! d(dq)/dt    =  omega_m dp
//! ```
//!
//! The Fourier convention is `d/dt -> -i omega`.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::PhysicalParams;
use crate::steady_state::SteadyState;

/// Relative determinant threshold of [`solve_transfer`].
pub const SINGULAR_TOL: f64 = 1e-14;

/// Everything the linear response depends on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearModel {
    pub omega_m: f64,
    pub gamma_m: f64,
    pub kappa: f64,
    /// Effective detuning `Delta`.
    pub delta: f64,
    /// Effective coupling `G` (real).
    pub coupling: f64,
    /// `2 g2 |a_s|^2`, added to `omega_m` in the restoring force.
    pub stiffening: f64,
}

impl LinearModel {
    pub fn from_steady(ss: &SteadyState, params: &PhysicalParams) -> Self {
        Self {
            omega_m: params.omega_m,
            gamma_m: params.gamma_m,
            kappa: params.kappa,
            delta: ss.delta_eff,
            coupling: ss.coupling,
            stiffening: ss.stiffening(params.g2),
        }
    }

    /// Same operating point with the coupling replaced.
    pub fn with_coupling(self, coupling: f64) -> Self {
        Self { coupling, ..self }
    }

    /// Every rate multiplied by `factor`.
    pub fn scaled(self, factor: f64) -> Self {
        Self {
            omega_m: self.omega_m * factor,
            gamma_m: self.gamma_m * factor,
            kappa: self.kappa * factor,
            delta: self.delta * factor,
            coupling: self.coupling * factor,
            stiffening: self.stiffening * factor,
        }
    }

    /// Restoring coefficient `omega_m + 2 g2 |a_s|^2`.
    pub fn restoring(&self) -> f64 {
        self.omega_m + self.stiffening
    }

    /// Bare squared frequency `omega_m (omega_m + 2 g2 |a_s|^2)`.
    pub fn omega_tilde_sq(&self) -> f64 {
        self.omega_m * self.restoring()
    }
}

/// Real drift matrix of `(Re da, Im da, dp, dq)`.
pub fn drift_matrix(model: &LinearModel) -> Matrix4<f64> {
    let LinearModel {
        omega_m,
        gamma_m,
        kappa,
        delta,
        coupling: g,
        ..
    } = *model;
    #[rustfmt::skip]
    let m = Matrix4::new(
        -kappa,      delta, 0.0,      0.0,
        -delta,     -kappa, 0.0,      g,
        2.0 * g,     0.0,  -gamma_m, -model.restoring(),
        0.0,         0.0,   omega_m,  0.0,
    );
    m
}

/// The Fourier-domain system `M(omega) (da, da†, dp, dq)^T = B (a_in, a_in†, xi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSystem {
    pub omega: f64,
    pub matrix: Matrix4<Complex64>,
    /// Input coupling per row: `(sqrt(2 kappa), sqrt(2 kappa), 1, 0)`.
    pub noise_coupling: Vector4<Complex64>,
}

pub fn fourier_matrix(omega: f64, model: &LinearModel) -> FourierSystem {
    let i = Complex64::i();
    let c = |x: f64| Complex64::new(x, 0.0);
    let z = Complex64::new(0.0, 0.0);
    let g = model.coupling;
    let k = model.kappa;
    let d = model.delta;
    let iw = i * omega;
    #[rustfmt::skip]
    let matrix = Matrix4::new(
        -iw + k + i * d, z,               z,                      -i * g,
        z,               -iw + k - i * d, z,                       i * g,
        c(-g),           c(-g),           -iw + model.gamma_m,     c(model.restoring()),
        z,               z,               c(-model.omega_m),      -iw,
    );
    let s = (2.0 * k).sqrt();
    FourierSystem {
        omega,
        matrix,
        noise_coupling: Vector4::new(c(s), c(s), c(1.0), z),
    }
}

/// Response of one fluctuation to each noise input. `ain` and `aindag`
/// multiply `sqrt(2 kappa) a_in(omega)` and `sqrt(2 kappa) a_in†(omega)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channels {
    pub xi: Complex64,
    pub ain: Complex64,
    pub aindag: Complex64,
}

/// Transfer coefficients of every fluctuation at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transfer {
    pub omega: f64,
    pub q: Channels,
    pub p: Channels,
    pub a: Channels,
    pub adag: Channels,
}

/// Inverts the Fourier system numerically.
pub fn solve_transfer(omega: f64, model: &LinearModel) -> Result<Transfer> {
    let sys = fourier_matrix(omega, model);
    let scale = sys.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let lu = sys.matrix.lu();
    let det = lu.determinant();
    if !(det.norm() >= SINGULAR_TOL * scale.powi(4)) {
        return Err(Error::SingularMatrix {
            omega,
            det: det.norm(),
        });
    }
    let inv = lu.try_inverse().ok_or(Error::SingularMatrix {
        omega,
        det: det.norm(),
    })?;
    let row = |r: usize| Channels {
        ain: inv[(r, 0)],
        aindag: inv[(r, 1)],
        xi: inv[(r, 2)],
    };
    Ok(Transfer {
        omega,
        a: row(0),
        adag: row(1),
        p: row(2),
        q: row(3),
    })
}

/// `Theta(omega) = (omega + i kappa - Delta)(omega + i kappa + Delta)`.
pub fn theta(omega: f64, model: &LinearModel) -> Complex64 {
    let w = Complex64::new(omega, model.kappa);
    (w - model.delta) * (w + model.delta)
}

/// Inverse bare susceptibility `omega_tilde^2 - omega^2 - i omega gamma_m`.
fn bare_inverse(omega: f64, model: &LinearModel) -> Complex64 {
    Complex64::new(model.omega_tilde_sq() - omega * omega, -omega * model.gamma_m)
}

/// Response denominator
/// `d = 2 Delta G^2 omega_m + [(omega + i kappa)^2 - Delta^2] [omega_tilde^2 - omega^2 - i omega gamma_m]`.
///
/// `det M(omega) = -d(omega)`.
pub fn d_of_omega(omega: f64, model: &LinearModel) -> Complex64 {
    let g = model.coupling;
    2.0 * model.delta * g * g * model.omega_m + theta(omega, model) * bare_inverse(omega, model)
}

/// Closed-form displacement response: coefficients of `xi`,
/// `sqrt(2 kappa) a_in` and `sqrt(2 kappa) a_in†` in `dq(omega)`.
pub fn displacement_channels(omega: f64, model: &LinearModel) -> Channels {
    let i = Complex64::i();
    let k = model.kappa;
    let d = model.delta;
    let g = model.coupling;
    let pre = -model.omega_m / d_of_omega(omega, model);
    let kw = Complex64::new(k, -omega);
    Channels {
        xi: pre * (d * d + kw * kw),
        ain: pre * (-i * g) * Complex64::new(omega + d, k),
        aindag: pre * (-i * g) * Complex64::new(omega - d, k),
    }
}

/// Effective mechanical response at one probe frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponsePoint {
    pub omega: f64,
    /// Signed square root of `omega_eff_sq`.
    pub omega_eff: f64,
    pub omega_eff_sq: f64,
    /// Optical-spring term `omega_eff^2 - omega_tilde^2`.
    pub spring_sq: f64,
    /// `omega_eff - omega_tilde`, evaluated without cancellation.
    pub frequency_shift: f64,
    pub gamma_eff: f64,
    /// `omega_m / (omega_eff^2 - omega^2 - i omega gamma_eff)`.
    pub chi: Complex64,
    /// Set when `omega_eff_sq < 0` (mode softening).
    pub softened: bool,
}

pub fn effective_response(omega: f64, model: &LinearModel) -> ResponsePoint {
    let LinearModel {
        omega_m,
        kappa: k,
        delta: d,
        coupling: g,
        ..
    } = *model;
    let lower = (omega - d).powi(2) + k * k;
    let upper = (omega + d).powi(2) + k * k;
    let denom = lower * upper;
    let spring = g * g * omega_m;
    let spring_sq = spring * 2.0 * d * (omega * omega - d * d - k * k) / denom;
    let omega_tilde = model.omega_tilde_sq().max(0.0).sqrt();
    let omega_eff_sq = model.omega_tilde_sq() + spring_sq;
    let gamma_eff = model.gamma_m + spring * k * 4.0 * d / denom;
    let softened = omega_eff_sq < 0.0;
    let omega_eff = if softened {
        -(-omega_eff_sq).sqrt()
    } else {
        omega_eff_sq.sqrt()
    };
    let frequency_shift = if softened || omega_eff + omega_tilde == 0.0 {
        omega_eff - omega_tilde
    } else {
        spring_sq / (omega_eff + omega_tilde)
    };
    let chi = omega_m / Complex64::new(omega_eff_sq - omega * omega, -omega * gamma_eff);
    ResponsePoint {
        omega,
        omega_eff,
        omega_eff_sq,
        spring_sq,
        frequency_shift,
        gamma_eff,
        chi,
        softened,
    }
}

/// `n` uniformly spaced points on `[lo, hi]` (just `lo` when `n == 1`).
pub fn frequency_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn model(g: f64) -> LinearModel {
        let wm = 2.0 * PI * 1e6;
        LinearModel {
            omega_m: wm,
            gamma_m: 2.0 * PI * 260.0,
            kappa: 3.0 * wm,
            delta: wm,
            coupling: g,
            stiffening: 0.0,
        }
    }

    #[test]
    fn decoupled_drift_is_block_diagonal() {
        let m = model(0.0);
        let a = drift_matrix(&m);
        for (r, c) in [(0, 2), (0, 3), (1, 2), (1, 3), (2, 0), (2, 1), (3, 0), (3, 1)] {
            assert_eq!(a[(r, c)], 0.0);
        }
    }

    #[test]
    fn last_fourier_row() {
        let m = model(0.3e6);
        let w = 1.7e6;
        let sys = fourier_matrix(w, &m);
        assert_eq!(sys.matrix[(3, 0)], Complex64::new(0.0, 0.0));
        assert_eq!(sys.matrix[(3, 1)], Complex64::new(0.0, 0.0));
        assert_eq!(sys.matrix[(3, 2)], Complex64::new(-m.omega_m, 0.0));
        assert_eq!(sys.matrix[(3, 3)], Complex64::new(0.0, -w));
    }

    #[test]
    fn momentum_follows_displacement() {
        let m = model(0.7 * 2.0 * PI * 1e6);
        for w in [0.3e6, 6.0e6, 2.0e7] {
            let t = solve_transfer(w, &m).unwrap();
            let f = Complex64::new(0.0, -w / m.omega_m);
            for (p, q) in [(t.p.xi, t.q.xi), (t.p.ain, t.q.ain), (t.p.aindag, t.q.aindag)] {
                assert_relative_eq!((p - f * q).norm(), 0.0, epsilon = 1e-12 * p.norm());
            }
        }
    }

    #[test]
    fn bare_limits() {
        let m = model(0.0);
        let w = 0.9 * m.omega_m;
        let t = solve_transfer(w, &m).unwrap();
        assert_eq!(t.q.ain, Complex64::new(0.0, 0.0));
        assert_eq!(t.q.aindag, Complex64::new(0.0, 0.0));
        let want = m.omega_m / Complex64::new(m.omega_tilde_sq() - w * w, -w * m.gamma_m);
        assert_relative_eq!((t.q.xi - want).norm() / want.norm(), 0.0, epsilon = 1e-12);

        let r = effective_response(w, &m);
        assert_eq!(r.omega_eff, m.omega_tilde_sq().sqrt());
        assert_eq!(r.gamma_eff, m.gamma_m);

        let wm = m.omega_m;
        let d = d_of_omega(wm, &LinearModel { delta: 0.4 * wm, ..m });
        let want = (Complex64::new(wm, m.kappa).powi(2) - (0.4 * wm) * (0.4 * wm))
            * Complex64::new(0.0, -wm * m.gamma_m);
        assert_relative_eq!((d - want).norm() / want.norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn spring_vanishes_at_identity_point() {
        let m = model(0.8 * 2.0 * PI * 1e6);
        let w = m.delta.hypot(m.kappa);
        let r = effective_response(w, &m);
        assert_relative_eq!(r.omega_eff, m.omega_tilde_sq().sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn softening_is_flagged_not_fatal() {
        let m = model(5.0 * 2.0 * PI * 1e6);
        let r = effective_response(0.0, &m);
        assert!(r.softened);
        assert!(r.omega_eff < 0.0);
        assert_relative_eq!(r.omega_eff * r.omega_eff, -r.omega_eff_sq, max_relative = 1e-14);
    }

    #[test]
    fn singular_matrix_is_reported() {
        // undamped, uncoupled: pole at omega_m exactly
        let m = LinearModel {
            gamma_m: 0.0,
            ..model(0.0)
        };
        assert!(matches!(
            solve_transfer(m.omega_m, &m),
            Err(Error::SingularMatrix { .. })
        ));
    }

    #[test]
    fn grid_endpoints() {
        let g = frequency_grid(0.01, 3.0, 2001);
        assert_eq!(g.len(), 2001);
        assert_eq!(g[0], 0.01);
        assert_eq!(g[2000], 3.0);
    }
}
