//! Coherent and photon-added coherent states propagating through a Kerr
//! medium `H = chi N (N - 1)`: revivals, moments, amplitude squeezing,
//! Wigner functions and Wigner negativity.
//!
//! Closed-form results are paired with brute-force evaluations on a
//! truncated Fock basis so each can be checked against the other.

pub mod cli;
pub mod error;
pub mod evolution;
pub mod expectations;
pub mod fock;
pub mod special;
pub mod squeezing;
pub mod wigner;

pub use error::{Error, Result};
pub use evolution::{autocorrelation, evolve, evolve_density, fractional_revival_times, revival_time, TimeGrid, TimeUnit};
pub use expectations::{moment_cs, moment_numeric, moment_pacs, quadrature_stats, MomentSpec, QuadratureStats};
pub use fock::{choose_cutoff, density_from_pure, make_coherent, make_pacs, DensityMatrix, FockVector, ModelParams};
pub use squeezing::{commutator_poly, dq_cs_half_revival, dq_numeric, dq_pacs, dq_pacs_half_revival, hong_mandel_m4};
pub use wigner::{delta, delta_timescan, wigner_grid, wigner_point, GridSpec, WignerField};
