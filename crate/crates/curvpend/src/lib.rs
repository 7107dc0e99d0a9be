//! Dynamics of a pendulum whose pivot moves uniformly along a geodesic of a
//! constant-curvature surface (sphere, plane, or hyperbolic plane).
//!
//! The pivot's motion turns curvature into an effective restoring force: the
//! deflection angle obeys a pendulum-like equation whose "gravity" is v^2 K,
//! switching sign with the curvature. This crate provides
//!
//! - [`ktrig`]: curvature-parametrized trigonometry shared by all geometry,
//! - [`model`]: energies, equations of motion, and R^3 embeddings for the
//!   rigid, accelerated-pivot, and elastic-rod variants,
//! - [`integrate`]: fixed-step RK4, a symplectic leapfrog, and an adaptive
//!   Dormand-Prince 5(4) driver,
//! - [`analysis`]: equilibria, exact and simulated periods, and the
//!   quantized small-oscillation spectrum,
//! - [`oracle`]: an independent Euler-Lagrange checker that differentiates a
//!   Lagrangian numerically and compares against closed-form accelerations.
//!
//! # Example
//!
//! ```
//! use curvpend::{Curvature, PendulumParams, RigidState, eom_rigid};
//!
//! // Unit sphere, pivot speed 1: small deflections oscillate at frequency
//! // v * sqrt(K) = 1.
//! let k = Curvature::new(1.0).unwrap();
//! let p = PendulumParams::new(1.0, 0.5, k).unwrap();
//! let accel = eom_rigid(&p, 1.0, &RigidState::new(0.1, 0.0));
//! assert!((accel + 0.1_f64.sin() * 0.1_f64.cos()).abs() < 1e-15);
//! ```

pub mod analysis;
pub mod error;
pub mod integrate;
pub mod ktrig;
pub mod model;
pub mod oracle;

pub use analysis::{
    complete_elliptic_k, equilibria, first_integral, period_exact, quantum_levels,
    schrodinger_eigenpairs, schrodinger_spectrum, simulated_period, small_osc_frequency,
    Equilibrium, SpectrumMethod, SpectrumResult, Stability,
};
pub use error::{Error, Result};
pub use integrate::{
    simulate_elastic, simulate_rigid, IntegratorSpec, Method, Sample, Trajectory, TrajectoryStatus,
};
pub use ktrig::{chord, cos_k, cot_k, sin_k, tan_k, Curvature};
pub use model::{
    elastic_energy, embed, embed_elastic, eom_accelerated, eom_elastic, eom_rigid, hamiltonian,
    kinetic_energy, lagrangian, momentum, potential_energy, ElasticState, EmbeddedPoint,
    PendulumParams, PivotMotion, RigidState,
};
pub use oracle::{verify_eom, SampleStream, VerifyReport};
