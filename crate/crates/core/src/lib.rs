//! Photon statistics of a laser whose gain medium is a single three- or
//! four-level atom pumped by thermal baths.
//!
//! Two independent routes to the cavity photon statistics live side by side:
//!
//! * [`solver`] solves the full Lindblad master equation of the atom–cavity
//!   system on a truncated Fock space (steady states, time evolution, reduced
//!   cavity states, Wigner functions).
//! * [`semiclassical`] and [`photonstats`] evaluate the closed-form laser
//!   theory: gain, saturation, thresholds, the photon-number birth–death chain
//!   and its moments.
//!
//! [`compare`] runs both for one parameter point so they can be checked against
//! each other. All rates are measured in units of the cavity decay rate κ, and
//! ħ = k_B = 1.
//!
//! The `parallel` feature (on by default) runs sweeps, random-model checks,
//! Wigner grids and large sparse products on rayon; without it every
//! [`Execution`] falls back to sequential iteration.

pub mod compare;
pub mod error;
pub mod exec;
pub mod hilbert;
pub mod liouvillian;
pub mod models;
pub mod photonstats;
pub mod semiclassical;
pub mod solver;
pub mod sparse;

pub use error::{Error, Result};
pub use exec::Execution;
pub use hilbert::{AtomLevel, DensityMatrix, HilbertSpace, Operator};
pub use liouvillian::{build_liouvillian, Dissipator, Liouvillian};
pub use models::{planck_occupation, BathSpec, EngineKind, EngineModel, Thermal};
pub use photonstats::{LaserCoefficients, Moments, PhotonDistribution};
pub use semiclassical::StructureConstants;

pub use num_complex::Complex64 as C64;
