//! Two-well gradient Gibbs model on the even `L x L` torus.
//!
//! Numerical core: torus combinatorics, spin-wave free energies of the six
//! periodic bond patterns, exact Gaussian partition functions and samplers,
//! the extended `(eta, kappa)` Gibbs sampler, the `kappa -> 1/kappa` duality,
//! and brute-force enumeration at `L = 2`.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the `*F64`
//! aliases below are what the CLI and the acceptance suite use.

pub mod config;
pub mod duality;
pub mod enumeration;
pub mod error;
pub mod gaussfield;
pub mod gibbs;
pub mod linalg;
pub mod params;
pub mod pattern;
pub mod reflection;
pub mod scalar;
pub mod spinwave;
pub mod torus;

pub use config::{
    gradient_of, parse_config, write_eta, write_kappa, ConfigData, CouplingConfig, GradientConfig,
    HeightField, SpaceTag, CONSTRAINT_TOL,
};
pub use error::{Error, Result};
pub use gibbs::{Init, ObservableRecord, SiteBox};
pub use params::ModelParams;
pub use pattern::{pattern_coupling, PatternId};
pub use reflection::{ReflectionKind, ReflectionPlane};
pub use scalar::Real;
pub use torus::{Direction, Plaquette, Site, TorusGeometry};

pub type ModelParamsF64 = ModelParams<f64>;
pub type GradientConfigF64 = GradientConfig<f64>;
pub type CouplingConfigF64 = CouplingConfig<f64>;
pub type HeightFieldF64 = HeightField<f64>;
pub type ObservableRecordF64 = ObservableRecord<f64>;
