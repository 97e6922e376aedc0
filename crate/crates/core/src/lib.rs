//! Memory states of a doubled-boson memory model as computable objects.
//!
//! A memory is a code: one real squeeze angle `θ_κ` per field mode, or
//! equivalently the condensate densities `N_κ = sinh²θ_κ`. Each code labels a
//! multimode two-mode squeezed vacuum pairing every mode `A_κ` with its
//! time-reversed mirror `Ã_κ`. Dissipation drives the per-mode squeeze
//! parameter linearly in time, `r_κ(t) = Γ_κ t − θ_κ`, and everything else
//! (occupations, overlaps, Schmidt weights, entanglement entropy, divergence
//! between nearby codes) is a closed-form function of those parameters.
//!
//! Modules:
//!
//! - [`mode_space`]: mode grids, memory codes and evolved states.
//! - [`squeezed`]: closed-form evaluation of every memory-state quantity.
//! - [`fock_oracle`]: brute-force truncated Fock-space construction used to
//!   validate the closed forms.
//! - [`trajectory`]: divergence of nearby codes, Lyapunov fits, lifetimes,
//!   crossings, association events and the entropy/divergence balance.
//! - [`oscillator`]: the classical doubled damped oscillator.
//! - [`regression`]: ordinary least-squares line fits shared by the above.

#![forbid(unsafe_code)]

mod error;
pub mod fock_oracle;
pub mod mode_space;
pub mod oscillator;
pub mod regression;
pub mod squeezed;
pub mod trajectory;

pub use error::{Error, Result};
pub use mode_space::{EvolvedState, MemoryCode, Mode, ModeGrid, ModeSpec};
