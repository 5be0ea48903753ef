//! Two-atom dynamics with internal levels, harmonic vibrational states and photon kicks.

pub mod engine;
pub mod fidelity;
pub mod fock;
pub mod integrals;
pub mod lindblad;
pub mod run;
pub mod thermal;

pub use engine::{AtomModel, GateHamiltonian, SectorResult};
pub use fidelity::{bell_fidelity, Convergence, FidelityReport, PhaseMode};
pub use fock::{build_displacement, FockBasis};
pub use integrals::{rr_kick_run, rydberg_time_integrals, RrKickReport, RrOptions, RydbergTimes};
pub use lindblad::{lindblad_evolve, LindbladResult};
pub use run::{evolve_member, simulate, simulate_gate, EngineChoice, EvolutionState, VibOptions};
pub use thermal::{thermal_ensemble, Member};
