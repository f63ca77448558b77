//! Noise spectra of the mechanical displacement and the intracavity field.
//!
//! A spectrum is defined by `<O(omega) O†(omega')> = S_O(omega) delta(omega + omega')`
//! for the displacement, matching the `delta(omega + omega')` structure of the
//! input correlators:
//!
//! ```text
//! <a_in(w) a_in†(w')> = (N + 1) delta(w + w')
//! <a_in†(w) a_in(w')> = N delta(w + w')
//! <xi(w) xi(w')>      = (gamma_m/omega_m) w [coth(hbar w / 2 kB T) + 1] delta(w + w')
//! ```
//!
//! The intracavity spectrum is normally ordered,
//! `<da†(omega') da(omega)> = S_a(omega) delta(omega + omega')`, so that vacuum
//! input alone gives `S_a = 0`. The position variance is
//! `<dq^2> = (1/2pi) ∫ S_q(omega) domega`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linearized::{d_of_omega, effective_response, solve_transfer, LinearModel};
use crate::params::{Constants, PhysicalParams};
use crate::stability::routh_hurwitz;

/// Bath statistics driving the fluctuations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub bath_temperature: f64,
    pub photon_occupation: f64,
    pub constants: Constants,
}

impl NoiseModel {
    pub fn new(bath_temperature: f64, photon_occupation: f64) -> Self {
        Self {
            bath_temperature,
            photon_occupation,
            constants: Constants::CODATA,
        }
    }

    pub fn from_params(p: &PhysicalParams) -> Self {
        Self::new(p.bath_temperature, p.photon_occupation)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPoint {
    pub omega: f64,
    pub s_q: f64,
    pub s_a: f64,
}

/// Thermal force spectrum `(gamma_m/omega_m) omega [coth(hbar omega / 2 kB T) + 1]`.
pub fn thermal_psd(omega: f64, noise: &NoiseModel, model: &LinearModel) -> f64 {
    let rate = model.gamma_m / model.omega_m;
    let t = noise.bath_temperature;
    let Constants { hbar, kb, .. } = noise.constants;
    if t == 0.0 {
        return if omega > 0.0 { 2.0 * rate * omega } else { 0.0 };
    }
    let x = hbar * omega / (2.0 * kb * t);
    if (hbar * omega).abs() < 1e-6 * kb * t {
        // omega coth(x) = (2 kB T / hbar)(1 + x^2/3 + ...)
        return rate * (2.0 * kb * t / hbar * (1.0 + x * x / 3.0) + omega);
    }
    // coth(x) + 1 = 2 / (1 - exp(-2x)), free of cancellation for x < 0
    rate * omega * (-2.0 / (-2.0 * x).exp_m1())
}

fn require_stable(model: &LinearModel) -> Result<()> {
    let report = routh_hurwitz(model);
    if report.stable {
        Ok(())
    } else {
        Err(Error::UnstableBranch {
            max_real: report.max_real_eigenvalue,
        })
    }
}

/// Closed-form displacement spectrum; the caller guarantees stability.
pub fn phonon_psd(omega: f64, model: &LinearModel, noise: &NoiseModel) -> f64 {
    let LinearModel {
        omega_m,
        kappa: k,
        delta: d,
        coupling: g,
        ..
    } = *model;
    let n = noise.photon_occupation;
    let kw = Complex64::new(k, -omega);
    let mech = (d * d + kw * kw).norm_sqr() * thermal_psd(omega, noise, model);
    let optical = 2.0
        * k
        * g
        * g
        * (((omega - d).powi(2) + k * k) * n + ((omega + d).powi(2) + k * k) * (n + 1.0));
    omega_m * omega_m / d_of_omega(omega, model).norm_sqr() * (mech + optical)
}

/// Displacement spectrum `S_q(omega)` of a stable operating point.
pub fn phonon_spectrum(omega: f64, model: &LinearModel, noise: &NoiseModel) -> Result<f64> {
    require_stable(model)?;
    Ok(phonon_psd(omega, model, noise))
}

/// `S_q` contracted directly from numerically inverted transfer functions at
/// `+omega` and `-omega`.
pub fn phonon_spectrum_from_transfer(
    omega: f64,
    model: &LinearModel,
    noise: &NoiseModel,
) -> Result<f64> {
    require_stable(model)?;
    let plus = solve_transfer(omega, model)?.q;
    let minus = solve_transfer(-omega, model)?.q;
    let n = noise.photon_occupation;
    let s = plus.xi * minus.xi * thermal_psd(omega, noise, model)
        + 2.0 * model.kappa * (plus.ain * minus.aindag * (n + 1.0) + plus.aindag * minus.ain * n);
    Ok(s.re)
}

fn photon_psd(omega: f64, model: &LinearModel, noise: &NoiseModel) -> Result<f64> {
    let a = solve_transfer(omega, model)?.a;
    let adag = solve_transfer(-omega, model)?.adag;
    let n = noise.photon_occupation;
    let s = adag.xi * a.xi * thermal_psd(-omega, noise, model)
        + 2.0 * model.kappa * (adag.ain * a.aindag * (n + 1.0) + adag.aindag * a.ain * n);
    Ok(s.re)
}

/// Normally ordered intracavity spectrum `S_a(omega)` of a stable operating point.
pub fn photon_spectrum(omega: f64, model: &LinearModel, noise: &NoiseModel) -> Result<f64> {
    require_stable(model)?;
    photon_psd(omega, model, noise)
}

/// Both spectra over a frequency grid, checking stability once.
pub fn spectrum(grid: &[f64], model: &LinearModel, noise: &NoiseModel) -> Result<Vec<SpectrumPoint>> {
    require_stable(model)?;
    grid.iter()
        .map(|&omega| {
            Ok(SpectrumPoint {
                omega,
                s_q: phonon_psd(omega, model, noise),
                s_a: photon_psd(omega, model, noise)?,
            })
        })
        .collect()
}

/// Uniform Simpson grid used by [`position_variance`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceGrid {
    /// Half-width in units of `max(omega_m, omega_tilde, |Delta|, kappa)`.
    pub half_width_factor: f64,
    /// Grid points per narrowest linewidth.
    pub points_per_linewidth: f64,
    /// Upper bound on the number of Simpson intervals.
    pub max_intervals: usize,
}

impl Default for VarianceGrid {
    fn default() -> Self {
        Self {
            half_width_factor: 8.0,
            points_per_linewidth: 16.0,
            max_intervals: 1 << 25,
        }
    }
}

impl VarianceGrid {
    pub fn refined(self, factor: f64) -> Self {
        Self {
            points_per_linewidth: self.points_per_linewidth * factor,
            ..self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceEstimate {
    /// `<dq^2>`, dimensionless.
    pub variance: f64,
    pub half_width: f64,
    pub intervals: usize,
    /// Largest edge value of `S_q` relative to its peak on the grid.
    pub edge_ratio: f64,
    /// `edge_ratio > 1e-6`: the grid may be cutting off spectral weight.
    pub truncation_suspect: bool,
    /// The grid hit `max_intervals` before reaching the requested density.
    pub resolution_limited: bool,
}

/// Position variance by composite Simpson integration of `S_q`.
pub fn position_variance(
    model: &LinearModel,
    noise: &NoiseModel,
    grid: &VarianceGrid,
) -> Result<VarianceEstimate> {
    require_stable(model)?;
    let omega_tilde = model.omega_tilde_sq().max(0.0).sqrt();
    let half_width = grid.half_width_factor
        * model
            .omega_m
            .max(omega_tilde)
            .max(model.delta.abs())
            .max(model.kappa);
    let resonance_width = effective_response(omega_tilde, model).gamma_eff;
    let linewidth = [model.gamma_m, model.kappa, resonance_width]
        .into_iter()
        .filter(|w| *w > 0.0)
        .fold(f64::INFINITY, f64::min);
    let wanted = (2.0 * half_width / (linewidth / grid.points_per_linewidth)).ceil();
    let mut intervals = if wanted.is_finite() {
        (wanted as usize).min(grid.max_intervals)
    } else {
        grid.max_intervals
    };
    let resolution_limited = wanted > grid.max_intervals as f64;
    intervals = intervals.max(2);
    intervals += intervals % 2;

    let h = 2.0 * half_width / intervals as f64;
    let mut sum = 0.0;
    let mut peak: f64 = 0.0;
    let mut edges = [0.0; 2];
    for i in 0..=intervals {
        let omega = if i == intervals {
            half_width
        } else {
            -half_width + h * i as f64
        };
        let s = phonon_psd(omega, model, noise);
        peak = peak.max(s);
        let w = if i == 0 || i == intervals {
            edges[(i == intervals) as usize] = s;
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        sum += w * s;
    }
    let integral = sum * h / 3.0;
    let edge_ratio = if peak > 0.0 {
        edges[0].max(edges[1]) / peak
    } else {
        0.0
    };
    Ok(VarianceEstimate {
        variance: integral / (2.0 * std::f64::consts::PI),
        half_width,
        intervals,
        edge_ratio,
        truncation_suspect: edge_ratio > 1e-6,
        resolution_limited,
    })
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
    fn thermal_psd_limits() {
        let m = model(0.0);
        let hot = NoiseModel::new(300.0, 0.0);
        let k = Constants::CODATA;
        let limit = 2.0 * m.gamma_m * k.kb * 300.0 / (k.hbar * m.omega_m);
        assert_relative_eq!(thermal_psd(1e-3, &hot, &m), limit, max_relative = 1e-12);
        assert_relative_eq!(thermal_psd(0.0, &hot, &m), limit, max_relative = 1e-15);

        let cold = NoiseModel::new(0.0, 0.0);
        assert_eq!(thermal_psd(-m.omega_m, &cold, &m), 0.0);
        assert_eq!(thermal_psd(m.omega_m, &cold, &m), 2.0 * m.gamma_m);
    }

    #[test]
    fn thermal_psd_reference_value() {
        // 40-digit mpmath evaluation at omega_m, 300 K
        let m = model(0.0);
        let s = thermal_psd(m.omega_m, &NoiseModel::new(300.0, 0.0), &m);
        assert_relative_eq!(s, 2.042_357_454_995_242_3e10, max_relative = 1e-13);
    }

    #[test]
    fn decoupled_phonon_spectrum_is_bare_lorentzian() {
        let m = model(0.0);
        let noise = NoiseModel::new(300.0, 0.0);
        for w in [0.5e6, m.omega_m, 1.3e7] {
            let want = m.omega_m * m.omega_m * thermal_psd(w, &noise, &m)
                / ((m.omega_tilde_sq() - w * w).powi(2) + (w * m.gamma_m).powi(2));
            assert_relative_eq!(phonon_spectrum(w, &m, &noise).unwrap(), want, max_relative = 1e-12);
        }
    }

    #[test]
    fn decoupled_vacuum_cavity_is_dark() {
        let m = model(0.0);
        let noise = NoiseModel::new(0.0, 0.0);
        for w in [-2e7, 0.5e6, m.omega_m] {
            assert_eq!(photon_spectrum(w, &m, &noise).unwrap(), 0.0);
        }
    }

    #[test]
    fn unstable_point_is_refused() {
        let m = model(5.0 * 2.0 * PI * 1e6);
        let noise = NoiseModel::new(300.0, 0.0);
        assert!(matches!(phonon_spectrum(1e6, &m, &noise), Err(Error::UnstableBranch { .. })));
        assert!(matches!(photon_spectrum(1e6, &m, &noise), Err(Error::UnstableBranch { .. })));
        assert!(position_variance(&m, &noise, &VarianceGrid::default()).is_err());
    }

    #[test]
    fn classical_equipartition() {
        let m = model(0.0);
        let noise = NoiseModel::new(300.0, 0.0);
        let k = Constants::CODATA;
        let v = position_variance(&m, &noise, &VarianceGrid::default()).unwrap();
        let want = k.kb * 300.0 / (k.hbar * m.omega_m);
        assert_relative_eq!(v.variance, want, max_relative = 1e-3);
    }
}
