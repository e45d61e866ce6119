//! Exact computation with valuations on Q and on towers of number fields.
//!
//! The crate is organized bottom-up:
//!
//! * [`exact`]: big rationals, dense polynomials over a pluggable field,
//!   finite fields `F_{p^f}`, and deterministic polynomial factorization
//!   over prime fields and over Q.
//! * [`tower`] / [`numberfields`]: explicit field towers `Q(a_1, ..., a_k)`
//!   with factorization (Trager norms), minimal polynomials, and primitive
//!   elements.
//! * [`value`] / [`valuation`]: the ordered value carrier `a + b·r`,
//!   p-adic valuations, Newton polygons, weak approximation.
//! * [`maclane`] / [`extensions`]: enumeration of the extensions of a
//!   valuation to a simple extension, with refinement paths, certificates,
//!   restriction tests, and exact element values under a descriptor.
//! * [`hensel`]: quadratic Hensel lifting over Z_p and the irreducibility
//!   membership test used to certify non-Henselian base fields.
//! * [`valuegroup`]: finitely generated subgroups of Q + Q·r with exact
//!   divisibility queries and the representation-based extension procedure.
//! * [`padic_closure`] / [`diag_sim`]: staged closure construction over a
//!   formally p-adic base and the three diagonalization simulators.
//!
//! Batch entry points (`extensions::extensions_of_batch`,
//! `hensel::hensel_lift_batch`) run data-parallel when the `parallel`
//! feature (default) is enabled and sequentially otherwise; `batch` holds
//! the shared mapping helpers.

pub mod batch;
pub mod config;
pub mod diag_sim;
pub mod error;
pub mod exact;
pub mod extensions;
pub mod hensel;
pub mod maclane;
pub mod numberfields;
pub mod padic_closure;
pub mod tower;
pub mod valuation;
pub mod value;
pub mod valuegroup;

pub use config::Config;
pub use error::{Error, Result};
