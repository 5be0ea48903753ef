use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid setup: {0}")]
    InvalidSetup(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("integrator step size underflow at t = {t} us")]
    StepUnderflow { t: f64 },
    #[error("integrator exceeded {steps} steps at t = {t} us")]
    TooManySteps { t: f64, steps: usize },
    #[error("integration failed for k index {index}: {source}")]
    KPoint {
        index: usize,
        #[source]
        source: alloc::boxed::Box<Error>,
    },
    #[error("k grid covers only {mass:.6} of the thermal momentum distribution")]
    GridCoverage { mass: f64 },
    #[error("non-adiabatic return: final Rydberg population {population:.3e}")]
    NonAdiabaticReturn { population: f64 },
    #[error("branch tracking failed at t = {t} us (eigenvector overlap {overlap:.3})")]
    BranchTracking { t: f64, overlap: f64 },
    #[error("dimension {dim} exceeds the dense solver limit {limit}")]
    DimensionGuard { dim: usize, limit: usize },
    #[error("linearization invalid: rms(y)/r12 = {ratio:.3} > 0.1")]
    Linearization { ratio: f64 },
    #[error("no gate parameters in bounds: best phase defect {defect:.3e} rad")]
    NoSolution { defect: f64 },
    #[error("schedule drives overlap in time at t = {t} us; factorized propagation needs sequential pulses")]
    OverlappingDrives { t: f64 },
}
