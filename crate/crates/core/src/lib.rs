//! Aharonov-Bohm phases from vacuum-energy shifts.
//!
//! A charged particle near current or charge sources shifts the energy of the
//! electromagnetic vacuum through virtual-photon exchange. This crate
//! evaluates that shift along two independent routes — real-space potentials
//! and a direct photon-mode-space integration with selectable polarization
//! content — and accumulates the resulting interferometer phase differences
//! along arbitrary polyline path geometries.
//!
//! Modules:
//!
//! * [`model`] — constants, source geometries, waveforms, sampled paths;
//! * [`kernels`] — polarization-resolved mode-space kernels with the scalar
//!   Fourier identity as a built-in verification target;
//! * [`fields`] — vector/scalar potentials, the Biot-Savart field, and the
//!   flux oracle used to validate the phase law;
//! * [`vacuum`] — energy shifts, phase accumulation, and the magnetic,
//!   intermediate (non-enclosing), and electric scenarios.

pub mod fields;
pub mod kernels;
pub mod math;
pub mod model;
pub mod vacuum;

pub use math::Vec3;

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Kernel evaluation at |R| below the supported minimum separation.
    #[error("singular separation |R| = {separation:.3e} m")]
    SingularSeparation { separation: f64 },

    /// A field point violated the exclusion radius of a source.
    #[error("point within exclusion zone of {offender}: distance {distance:.3e} m < {exclusion:.3e} m")]
    Proximity { offender: String, distance: f64, exclusion: f64 },

    #[error("geometry error: {0}")]
    Geometry(String),

    /// The η-ladder extrapolation failed to stabilize.
    #[error("quadrature failed to converge: residual {residual:.3e} above limit {limit:.3e}")]
    Convergence { residual: f64, limit: f64 },

    /// A scenario precondition on the configured physics was violated.
    #[error("scenario validity: {0}")]
    ScenarioValidity(String),
}

pub type Result<T> = std::result::Result<T, Error>;
