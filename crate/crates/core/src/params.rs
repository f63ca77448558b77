//! Raw experimental inputs and the quantities derived from them.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// CODATA 2018 exact/recommended values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    /// Reduced Planck constant, J·s.
    pub hbar: f64,
    /// Boltzmann constant, J/K.
    pub kb: f64,
    /// Speed of light, m/s.
    pub c: f64,
}

impl Constants {
    pub const CODATA: Constants = Constants {
        hbar: 1.054_571_817e-34,
        kb: 1.380_649e-23,
        c: 299_792_458.0,
    };
}

impl Default for Constants {
    fn default() -> Self {
        Self::CODATA
    }
}

/// Human-readable statement of the cavity-frequency convention, echoed in
/// every output header.
pub const OMEGA_C_CONVENTION: &str =
    "omega_c = omega_p = 2*pi*c/lambda_laser; d(omega_c)/dx = omega_c/cavity_length";

/// Experimental inputs, all in SI units with angular frequencies in rad/s.
///
/// Field names double as the keys of the JSON config file. Missing keys take
/// the defaults below; unknown keys are rejected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalParams {
    pub omega_m: f64,
    pub gamma_m: f64,
    pub mass: f64,
    pub lambda_laser: f64,
    /// Cavity amplitude decay rate (the energy decay rate is `2 kappa`).
    pub kappa: f64,
    pub power: f64,
    pub cavity_length: f64,
    /// Quadratic single-quantum coupling.
    pub g2: f64,
    /// Bare detuning `omega_c - omega_p`.
    pub detuning0: f64,
    pub bath_temperature: f64,
    /// Thermal photon occupation of the input field at `omega_c`.
    pub photon_occupation: f64,
}

impl Default for PhysicalParams {
    /// MHz membrane, 5 ng, 1064 nm pump at 1 mW, red-detuned by one
    /// mechanical frequency, room-temperature bath.
    fn default() -> Self {
        Self {
            omega_m: 2.0 * PI * 1.0e6,
            gamma_m: 2.0 * PI * 260.0,
            mass: 5.0e-12,
            lambda_laser: 1064.0e-9,
            kappa: 6.0 * PI * 1.0e6,
            power: 1.0e-3,
            cavity_length: 25.0e-3,
            g2: 0.0,
            detuning0: 2.0 * PI * 1.0e6,
            bath_temperature: 300.0,
            photon_occupation: 0.0,
        }
    }
}

fn require(ok: bool, name: &'static str, reason: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParam {
            name,
            reason: reason.to_owned(),
        })
    }
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("omega_m", self.omega_m),
            ("gamma_m", self.gamma_m),
            ("mass", self.mass),
            ("lambda_laser", self.lambda_laser),
            ("kappa", self.kappa),
            ("power", self.power),
            ("cavity_length", self.cavity_length),
            ("g2", self.g2),
            ("detuning0", self.detuning0),
            ("bath_temperature", self.bath_temperature),
            ("photon_occupation", self.photon_occupation),
        ];
        for (name, v) in finite {
            require(v.is_finite(), name, "must be finite")?;
        }
        require(self.omega_m > 0.0, "omega_m", "must be > 0")?;
        require(self.gamma_m >= 0.0, "gamma_m", "must be >= 0")?;
        require(self.mass > 0.0, "mass", "must be > 0")?;
        require(self.lambda_laser > 0.0, "lambda_laser", "must be > 0")?;
        require(self.kappa > 0.0, "kappa", "must be > 0")?;
        require(self.power >= 0.0, "power", "must be >= 0")?;
        require(self.cavity_length > 0.0, "cavity_length", "must be > 0")?;
        require(self.bath_temperature >= 0.0, "bath_temperature", "must be >= 0")?;
        require(self.photon_occupation >= 0.0, "photon_occupation", "must be >= 0")?;
        Ok(())
    }

    /// Parses a JSON config document and validates it.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let params: PhysicalParams =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        params.validate()?;
        Ok(params)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }
}

/// Single-photon quantities derived from [`PhysicalParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    pub omega_c: f64,
    pub omega_p: f64,
    /// Zero-point amplitude `sqrt(hbar / (2 m omega_m))`, m.
    pub x_zpf: f64,
    /// Linear single-quantum coupling, rad/s.
    pub g_m: f64,
    /// Drive amplitude, rad/s·photon^½.
    pub epsilon_p: f64,
}

pub fn derive_constants(raw: &PhysicalParams) -> Result<DerivedParams> {
    derive_with(raw, &Constants::CODATA)
}

pub fn derive_with(raw: &PhysicalParams, k: &Constants) -> Result<DerivedParams> {
    raw.validate()?;
    let omega_c = 2.0 * PI * k.c / raw.lambda_laser;
    // pump resonant with the bare cavity; detuning enters only through detuning0
    let omega_p = omega_c;
    let x_zpf = (k.hbar / (2.0 * raw.omega_m * raw.mass)).sqrt();
    let g_m = (omega_c / raw.cavity_length) * x_zpf;
    let epsilon_p = (raw.power * raw.kappa / (2.0 * k.hbar * omega_p)).sqrt();
    Ok(DerivedParams {
        omega_c,
        omega_p,
        x_zpf,
        g_m,
        epsilon_p,
    })
}

/// Raw inputs together with their derived quantities; the argument taken
/// by the steady-state solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedParams {
    pub raw: PhysicalParams,
    pub derived: DerivedParams,
    pub constants: Constants,
}

impl ResolvedParams {
    pub fn new(raw: PhysicalParams) -> Result<Self> {
        Ok(Self {
            raw,
            derived: derive_constants(&raw)?,
            constants: Constants::CODATA,
        })
    }
}
