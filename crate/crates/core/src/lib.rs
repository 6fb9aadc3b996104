//! Summation-by-parts finite differencing for the radial wave system
//!
//! ```text
//! psi_t = pi_r,    pi_t = psi_r + p psi / r,    0 <= r <= R
//! ```
//!
//! on staggered (`r_i = (i + 1/2) h`) and centred (`r_i = i h`) grids.
//! The odd field `psi` and even field `pi` are reflected through the
//! origin with their parities, so no special treatment of `r = 0` is
//! needed beyond the choice of weights.
//!
//! The crate is `no_std` with `alloc`. Weight construction for the
//! fourth-order schemes is done in exact integer arithmetic.

#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod boundary;
pub mod convergence;
mod error;
pub mod evolution;
mod exact;
pub mod grid;
mod math;
pub mod operators;
pub mod weights;

pub use boundary::{build_projector, discrete_energy, energy_rate, validate_bc, BoundarySpec, Projector};
pub use convergence::{energy_drift_check, scaled_norms, self_convergence, ConvergenceConfig, RichardsonReport};
pub use error::{Error, Result};
pub use evolution::{evolve, evolve_from, initial_bump, rhs, rk4_step, Bump, EnergyTrace, EvolutionConfig, Profile};
pub use grid::{fold_index, p_from_harmonic, FieldPair, GridKind, GridSpec, Parity};
pub use operators::{build_scheme, truncation_scan, verify_sbp, SbpScheme, Variant};
pub use weights::{delta_profile, DeltaProfile, Method, WeightTable};
