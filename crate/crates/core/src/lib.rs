//! Linearized dynamics of a laser-driven optomechanical cavity whose
//! resonance depends both linearly and quadratically on the displacement of
//! a mechanical oscillator.
//!
//! The pipeline is:
//!
//! 1. [`params`]: raw SI inputs and the derived single-photon quantities.
//! 2. [`steady_state`]: every self-consistent operating point of the driven system.
//! 3. [`linearized`]: the 4×4 fluctuation system, its closed-form solution and
//!    the effective mechanical frequency and damping.
//! 4. [`spectra`]: displacement and intracavity noise spectra and the position variance.
//! 5. [`stability`]: Routh–Hurwitz verdicts cross-checked against eigenvalues.
//! 6. [`sweep`]: parameter sweeps and CSV/JSON-lines emission used by the CLI.
//!
//! All angular frequencies are in rad/s. The mechanical quadratures `q`, `p`
//! are dimensionless (displacement in units of the zero-point amplitude) and
//! cavity amplitudes are in units of photon^½.

pub mod error;
pub mod linearized;
pub mod params;
pub mod poly;
pub mod spectra;
pub mod stability;
pub mod steady_state;
pub mod sweep;

pub use error::{Error, Result};
pub use linearized::{
    d_of_omega, drift_matrix, effective_response, fourier_matrix, solve_transfer,
    FourierSystem, LinearModel, ResponsePoint, Transfer,
};
pub use params::{derive_constants, Constants, DerivedParams, PhysicalParams};
pub use spectra::{
    phonon_spectrum, photon_spectrum, position_variance, thermal_psd, NoiseModel,
    SpectrumPoint, VarianceEstimate, VarianceGrid,
};
pub use stability::{eigen_check, routh_hurwitz, StabilityReport};
pub use steady_state::{residual, solve_steady, SteadyBranches, SteadyState};
