//! Self-consistent operating points of the driven cavity.
//!
//! Setting the time derivatives of the noiseless Langevin equations to zero
//! gives `p_s = 0`, `a_s = eps / (kappa + i Delta(q_s))` and the force balance
//! `omega_m q_s = (g_m - 2 g2 q_s) |a_s|^2`, with the effective detuning
//! `Delta(q) = Delta0 - g_m q + g2 q^2`. Eliminating `|a_s|^2` leaves one real
//! polynomial in `q_s`:
//!
//! ```text
//! omega_m q (kappa^2 + Delta(q)^2) = eps^2 (g_m - 2 g2 q)
//! ```
//!
//! of degree five (three when `g2 = 0`). All of its real roots are found from
//! companion-matrix eigenvalues and then polished by Newton iteration.
//!
//! The drive phase is chosen so that `a_s` is real and non-negative, which
//! makes the effective coupling `G = (g_m - 2 g2 q_s) a_s` real.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linearized::LinearModel;
use crate::params::{PhysicalParams, ResolvedParams};
use crate::poly;
use crate::stability::routh_hurwitz;

/// Companion-matrix eigenvalues with `|im| < ROOT_IMAG_TOL * (1 + |re|)` are
/// taken as real roots.
pub const ROOT_IMAG_TOL: f64 = 1e-8;

/// Relative distance from the pole `q = g_m / (2 g2)` below which a root is
/// reported as degenerate.
pub const POLE_TOL: f64 = 1e-10;

/// Target relative residual of the Newton polish.
pub const POLISH_TOL: f64 = 1e-12;

/// One self-consistent operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    /// Dimensionless displacement quadrature.
    pub q_s: f64,
    /// Dimensionless momentum quadrature, always zero.
    pub p_s: f64,
    /// Intracavity amplitude, photon^½. Real and non-negative.
    pub a_s: Complex64,
    /// `|a_s|^2`.
    pub photon_number: f64,
    /// Effective detuning `Delta0 - g_m q_s + g2 q_s^2`, rad/s.
    pub delta_eff: f64,
    /// Effective optomechanical coupling `(g_m - 2 g2 q_s) |a_s|`, rad/s.
    pub coupling: f64,
    /// Routh–Hurwitz verdict for the linearization about this point.
    pub stable: bool,
}

impl SteadyState {
    /// Mechanical stiffening `2 g2 |a_s|^2` from the quadratic coupling.
    pub fn stiffening(&self, g2: f64) -> f64 {
        2.0 * g2 * self.photon_number
    }
}

/// Result of [`solve_steady`].
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyBranches {
    /// Physical branches sorted by ascending `q_s`.
    pub branches: Vec<SteadyState>,
    /// Real roots dropped because they imply `|a_s|^2 < 0`.
    pub discarded: usize,
}

impl SteadyBranches {
    /// Stable branch with the smallest `|q_s|`.
    pub fn default_branch(&self) -> Option<(usize, &SteadyState)> {
        self.branches
            .iter()
            .enumerate()
            .filter(|(_, b)| b.stable)
            .min_by(|(_, a), (_, b)| a.q_s.abs().total_cmp(&b.q_s.abs()))
    }
}

/// Coefficients of the reduced steady-state polynomial in ascending order,
/// with every frequency divided by `omega_m`.
pub fn reduced_polynomial(params: &ResolvedParams) -> [f64; 6] {
    let s = Scaled::new(params);
    let (a, b, d0, k2, e2) = (s.g_m, s.g2, s.delta0, s.kappa * s.kappa, s.eps2);
    [
        -e2 * a,
        k2 + d0 * d0 + 2.0 * e2 * b,
        -2.0 * a * d0,
        a * a + 2.0 * b * d0,
        -2.0 * a * b,
        b * b,
    ]
}

/// Inputs in units of `omega_m`.
#[derive(Debug, Clone, Copy)]
struct Scaled {
    g_m: f64,
    g2: f64,
    delta0: f64,
    kappa: f64,
    eps2: f64,
}

impl Scaled {
    fn new(params: &ResolvedParams) -> Self {
        let wm = params.raw.omega_m;
        let eps = params.derived.epsilon_p / wm;
        Self {
            g_m: params.derived.g_m / wm,
            g2: params.raw.g2 / wm,
            delta0: params.raw.detuning0 / wm,
            kappa: params.raw.kappa / wm,
            eps2: eps * eps,
        }
    }

    fn delta(&self, q: f64) -> f64 {
        self.delta0 - self.g_m * q + self.g2 * q * q
    }

    /// Force balance with the cavity eliminated, and its derivative.
    fn balance(&self, q: f64) -> (f64, f64) {
        let d = self.delta(q);
        let dd = -self.g_m + 2.0 * self.g2 * q;
        let k2 = self.kappa * self.kappa;
        let f = q * (k2 + d * d) - self.eps2 * (self.g_m - 2.0 * self.g2 * q);
        let df = k2 + d * d + 2.0 * q * d * dd + 2.0 * self.eps2 * self.g2;
        (f, df)
    }

    /// Magnitude of the largest term in [`Self::balance`], for relative tests.
    fn balance_scale(&self, q: f64) -> f64 {
        let d = self.delta(q);
        (q.abs() * (self.kappa * self.kappa + d * d))
            .max(self.eps2 * self.g_m.abs())
            .max(2.0 * self.eps2 * (self.g2 * q).abs())
    }

    fn polish(&self, mut q: f64) -> f64 {
        let mut best = (f64::INFINITY, q);
        for _ in 0..100 {
            let (f, df) = self.balance(q);
            if f.abs() < best.0 {
                best = (f.abs(), q);
            }
            if f == 0.0 || df == 0.0 {
                break;
            }
            let step = f / df;
            q -= step;
            if step.abs() <= 4.0 * f64::EPSILON * q.abs().max(f64::MIN_POSITIVE) {
                let (f, _) = self.balance(q);
                if f.abs() < best.0 {
                    best = (f.abs(), q);
                }
                break;
            }
        }
        best.1
    }
}

/// Enumerates every physical steady-state branch.
pub fn solve_steady(params: &ResolvedParams) -> Result<SteadyBranches> {
    let raw = &params.raw;
    let eps = params.derived.epsilon_p;
    if eps == 0.0 {
        let state = state_at(0.0, params);
        return Ok(SteadyBranches {
            branches: vec![state],
            discarded: 0,
        });
    }

    let s = Scaled::new(params);
    let coeffs = reduced_polynomial(params);
    let mut qs: Vec<f64> = Vec::new();
    for z in poly::roots(&coeffs) {
        if z.im.abs() >= ROOT_IMAG_TOL * (1.0 + z.re.abs()) {
            continue;
        }
        let q = s.polish(z.re);
        let (f, _) = s.balance(q);
        if f.abs() > POLISH_TOL * s.balance_scale(q) {
            // polish failed to converge; not a root of the full system
            continue;
        }
        if !qs
            .iter()
            .any(|&r| (r - q).abs() <= 1e-9 * r.abs().max(q.abs()).max(1e-300))
        {
            qs.push(q);
        }
    }
    qs.sort_by(f64::total_cmp);

    let mut branches = Vec::with_capacity(qs.len());
    let mut discarded = 0;
    for q in qs {
        let state = state_at(q, params);
        if raw.g2 != 0.0 && q != 0.0 && params.derived.g_m != 0.0 {
            let rel = (state.coupling / state.a_s.re) / params.derived.g_m;
            if rel.abs() <= POLE_TOL {
                let pole = params.derived.g_m / (2.0 * raw.g2);
                return Err(Error::DegenerateBranch { q_s: q, pole });
            }
        }
        // |a_s|^2 = omega_m q / (g_m - 2 g2 q) must be non-negative
        let factor = params.derived.g_m - 2.0 * raw.g2 * q;
        if q != 0.0 && (q > 0.0) != (factor > 0.0) {
            discarded += 1;
            continue;
        }
        branches.push(state);
    }
    if branches.is_empty() {
        return Err(Error::SolverFailure(format!(
            "no physical real root among companion eigenvalues of {coeffs:?}"
        )));
    }
    Ok(SteadyBranches {
        branches,
        discarded,
    })
}

/// Assembles the operating point implied by a displacement `q`: cavity
/// amplitude, detuning, coupling and stability. Only a root of the reduced
/// polynomial is a fixed point.
pub fn state_at(q: f64, params: &ResolvedParams) -> SteadyState {
    let raw = &params.raw;
    let g_m = params.derived.g_m;
    let eps = params.derived.epsilon_p;
    let delta = raw.detuning0 - g_m * q + raw.g2 * q * q;
    let photon_number = eps * eps / (raw.kappa * raw.kappa + delta * delta);
    let amplitude = photon_number.sqrt();
    let direct = g_m - 2.0 * raw.g2 * q;
    // Near the pole the direct difference cancels; the force balance gives
    // the same factor without cancellation.
    let factor = if photon_number > 0.0 && direct.abs() < 1e-3 * (g_m.abs() + (2.0 * raw.g2 * q).abs()) {
        raw.omega_m * q / photon_number
    } else {
        direct
    };
    let mut state = SteadyState {
        q_s: q,
        p_s: 0.0,
        a_s: Complex64::new(amplitude, 0.0),
        photon_number,
        delta_eff: delta,
        coupling: factor * amplitude,
        stable: false,
    };
    state.stable = routh_hurwitz(&LinearModel::from_steady(&state, raw)).stable;
    state
}

/// Right-hand sides of the noiseless Langevin equations at a candidate
/// fixed point, divided by `omega_m`: `(Re da/dt, Im da/dt, dp/dt, dq/dt)`.
///
/// The drive phase is fixed by the state's stored `delta_eff`, so a state
/// whose `q_s` no longer matches its detuning shows a cavity residual.
pub fn residual(state: &SteadyState, params: &ResolvedParams) -> [f64; 4] {
    let raw: &PhysicalParams = &params.raw;
    let g_m = params.derived.g_m;
    let eps = drive(params.derived.epsilon_p, raw.kappa, state.delta_eff);
    let (q, p, a) = (state.q_s, state.p_s, state.a_s);
    let i = Complex64::i();
    let a_dot = -(raw.kappa + i * raw.detuning0) * a + i * g_m * a * q - i * raw.g2 * a * q * q + eps;
    let n = a.norm_sqr();
    let p_dot = -raw.gamma_m * p - raw.omega_m * q + g_m * n - 2.0 * raw.g2 * n * q;
    let q_dot = raw.omega_m * p;
    let wm = raw.omega_m;
    [a_dot.re / wm, a_dot.im / wm, p_dot / wm, q_dot / wm]
}

/// Complex drive amplitude whose phase makes the steady amplitude real
/// for effective detuning `delta`.
pub fn drive(epsilon: f64, kappa: f64, delta: f64) -> Complex64 {
    epsilon * Complex64::new(kappa, delta) / kappa.hypot(delta)
}
