//! Simulation of a small quantum system driven by repeated, finite-duration
//! interactions with a stream of fresh probes (a "collision model").
//!
//! Each interaction event of duration `τ` is described by a scattering
//! operator `S = e^{+iH₀τ/2} e^{−i(H₀+H_int)τ} e^{+iH₀τ/2}` that isolates the
//! net effect of the coupling from the free evolution. Poisson-averaging the
//! events at rate `γ` yields a Lindblad master equation for the system state,
//!
//! ```text
//! ρ̇ = −i[H_s, ρ] + γ ( tr_p{ S (ρ⊗η) S† } − ρ ),
//! ```
//!
//! valid for non-overlapping interactions (`γτ ≪ 1`). The crate provides
//!
//! - dense complex linear algebra and quantum-state primitives ([`operators`],
//!   [`spin`], [`states`]),
//! - builders for the studied system/probe/interaction families ([`model`]),
//! - the jump operators `S`, `U(τ)`, and the short-time (eikonal)
//!   approximation `e^{−iτH_int}` ([`scattering`]),
//! - Liouvillian assembly, integration, and steady states ([`master`]),
//! - closed-form coefficients and generators for the exactly solvable
//!   families, used as independent oracles ([`oracles`]),
//! - work/observable bookkeeping ([`thermo`]), and
//! - stochastic trajectory averaging that simulates the underlying
//!   point process directly ([`montecarlo`]).
//!
//! Units: `ħ = 1` throughout; Hamiltonian entries are angular frequencies.

pub mod model;
pub mod montecarlo;
pub mod operators;
pub mod oracles;
pub mod scattering;
pub mod spin;
pub mod states;
pub mod thermo;

pub mod master;

pub use model::RepeatedInteractionModel;
pub use operators::{CMat, CVec, C64};
pub use scattering::{JumpKind, JumpOperator};
pub use states::DensityMatrix;

/// Errors produced by construction and simulation routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Matrix dimensions incompatible with the requested operation.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// An operation requiring a Hermitian input received a non-Hermitian one.
    #[error("matrix is not Hermitian (max |A - A\u{2020}| = {0:.3e})")]
    NotHermitian(f64),
    /// Spin quantum numbers must be non-negative half-integers.
    #[error("invalid spin quantum number: {0}")]
    InvalidSpin(f64),
    /// A state failed density-matrix validation (trace, Hermiticity, positivity).
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    /// Invalid model parameter (temperature, weights, rates).
    #[error("invalid model parameter: {0}")]
    InvalidParameter(String),
    /// Numerical failure during integration or root finding.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// Backing LAPACK routine failed.
    #[error("linear algebra backend: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Validation tolerances shared across the crate.
///
/// Each constant records why its magnitude is appropriate; modules refer to
/// these instead of scattering ad-hoc thresholds through the code.
pub mod tol {
    /// Hermiticity of constructed operators: `‖A − A†‖_max`.
    ///
    /// Construction is a handful of exact arithmetic operations on f64
    /// entries, so deviations beyond a few ulps indicate a bug.
    pub const HERMITIAN: f64 = 1e-12;

    /// Unit trace of density matrices.
    pub const TRACE: f64 = 1e-12;

    /// Most negative admissible density-matrix eigenvalue.
    ///
    /// Integration and eigendecomposition round-off can push tiny
    /// populations slightly negative; values in `(-1e-10, 0)` are treated
    /// as zero, anything below is an error.
    pub const POSITIVITY: f64 = 1e-10;

    /// Positivity budget during time integration, before states are
    /// repaired back onto the physical cone. RK4 local error can exceed
    /// plain round-off; violations beyond this abort with a diagnostic.
    pub const EVOLVE_POSITIVITY: f64 = 1e-8;

    /// Unitarity of propagators and jump operators: `‖U†U − 𝟙‖_max`.
    ///
    /// One Hermitian eigendecomposition plus two matrix products
    /// accumulate a few hundred rounding operations.
    pub const UNITARY: f64 = 1e-10;

    /// Kernel detection for steady states: `|λ| < KERNEL · ‖L‖_∞`.
    pub const KERNEL: f64 = 1e-8;
}
