//! Pulse envelopes, gate protocols, the C_Z phase condition and the
//! adiabatic-gate parameter search.

pub mod envelope;
pub mod gate;
pub mod phases;
pub mod search;

pub use envelope::{calibrate_pulse_area, PulseComponent, PulseEnvelope, Shape};
pub use gate::{GateSpec, Schedule};
pub use phases::{adiabaticity_margin, cz_phase_defect, dynamical_phases, propagated_phases, GatePhases};
pub use search::{search_adiabatic_params, PhaseModel, SearchOptions, SearchResult};
