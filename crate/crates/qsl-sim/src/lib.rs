//! Time-optimal control of a driven two-level (Landau-Zener) system and the
//! quantum-speed-limit bounds that constrain it.
//!
//! The model Hamiltonian is `H(λ) = ω σx + λ σz` (ħ = 1) with a fixed gap
//! parameter ω and a piecewise-constant drive λ(t). The library builds the
//! standard time-optimal drive protocols (composite pulse, bang-off-bang,
//! bang-bang) for steering the ground state at λ = −γ into the ground state
//! at λ = +γ, integrates the Schrödinger equation along them, and evaluates
//! the family of quantum-speed-limit lower bounds on the evolution time.

pub mod bounds;
pub mod config;
pub mod dynamics;
pub mod protocols;
pub mod state;
pub mod verify;

pub use bounds::BoundsReport;
pub use dynamics::{ControlSchedule, ControlSegment, Trajectory};
pub use protocols::{ProtocolKind, ProtocolSpec};
pub use state::{BlochVector, HamiltonianParams, PureState};

/// Errors produced by state construction, integration, and protocol solving.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("Hamiltonian is zero; eigenbasis undefined")]
    ZeroHamiltonian,
    #[error("state is not normalized: |ψ|² = {norm_sq}")]
    NotNormalized { norm_sq: f64 },
    #[error("variance is negative beyond roundoff: {value}")]
    NegativeVariance { value: f64 },
    #[error("integration step must be positive, got {0}")]
    NonpositiveStep(f64),
    #[error("schedule has no segments")]
    EmptySchedule,
    #[error("time {tau} outside trajectory range [0, {total}]")]
    TimeOutOfRange { tau: f64, total: f64 },
    #[error("trajectory action {available} never reaches target distance {target}; deficit {deficit}")]
    InsufficientAction {
        target: f64,
        available: f64,
        deficit: f64,
    },
    #[error("target unreachable: {0}")]
    Unreachable(String),
    #[error("pulse amplitude must be positive, got {0}")]
    NonpositiveAmplitude(f64),
    #[error("invalid protocol parameters: {0}")]
    InvalidProtocol(String),
    #[error("maximum variance must be positive when the distance is nonzero")]
    NonpositiveMaxVariance,
    #[error("internal consistency violation: {0}")]
    Inconsistent(String),
    #[error("config parse error at line {line}: {message}")]
    ConfigParse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
