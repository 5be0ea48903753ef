//! Fidelity models for neutral-atom Rydberg gates: photon recoil, beam
//! focusing, Rydberg-Rydberg forces and radiative decay.
//!
//! Internal units are microseconds, micrometres and rad/µs with ħ = 1.
//! Energies are carried as angular frequencies and temperatures as k_B T/ħ.
//!
//! The crate is `no_std` with `alloc` when the default `std` feature is off.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

mod math;

pub mod analytic;
pub mod error;
pub mod kspace;
pub mod linalg;
pub mod ode;
pub mod protocols;
pub mod units;
pub mod vib;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use units::{Beam, PhysicalSetup, UnitSystem};
