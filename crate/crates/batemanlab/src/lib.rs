//! Toolkit for damped/amplified oscillator pairs treated as one closed
//! Hamiltonian system.
//!
//! A damped oscillator `m x'' + gamma x' + kappa x = 0` admits a canonical
//! description once it is doubled by its time-reversed partner `y`. The
//! combined system carries two commuting su(1,1) charge algebras, splits into
//! positive parts in the sense of a spectrum-bounding decomposition, and,
//! after imposing information-loss constraints, reduces to ordinary
//! oscillators with isotonic (oscillator plus inverse-square) spectra.
//!
//! Module layout:
//!
//! * [`phase`]: parameter validation, phase-space states in the three charts
//!   (physical `(x, y)`, rotated `(x1, x2)`, hyperbolic `(r, u)`), chart maps.
//! * [`dynamics`]: equations of motion per chart, RK4/RK45 integration,
//!   closed-form solution of the physical chart for cross checks.
//! * [`algebra`]: su(1,1) charges, finite-difference Poisson-bracket
//!   verification, canonical action-angle style chart `(q1, q2, C, J2)`.
//! * [`constraint`]: positive/negative splitting, single-pair and two-pair
//!   information-loss constraints, reduced Hamiltonian, effective-field
//!   reading of the induced coupling, coarse-graining weight.
//! * [`spectra`]: closed-form spectra (isotonic, emergent single-pair,
//!   Smorodinsky-Winternitz two-pair, decoupled asymptotic) plus a
//!   finite-difference radial eigensolver used as a numerical oracle.
//! * [`cli`]: config-driven commands (`simulate`, `verify-algebra`,
//!   `spectrum`, `sweep`) with reproducible CSV/JSON output.

use thiserror::Error;

pub mod algebra;
pub mod cli;
pub mod constraint;
pub mod dynamics;
pub mod phase;
pub mod quadrature;
pub mod spectra;
pub mod tridiag;

pub use phase::{BatemanParams, CompositeParams, PhaseStateHyp, PhaseStateRot, PhaseStateXY};

/// Crate-wide error type. Each variant corresponds to one documented failure
/// mode; functions that cannot fail return plain values.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Parameter or argument outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    /// Chart map evaluated outside the region where it is defined.
    #[error("chart domain violation: {0}")]
    ChartDomain(String),
    /// Adaptive step controller drove the step size below the useful range.
    #[error("integration step underflow at t = {t} (dt = {dt:e})")]
    StepFailure { t: f64, dt: f64 },
    /// Splitting scale rho must be positive.
    #[error("splitting scale must be positive, got {0}")]
    NonPositiveRho(f64),
    /// The reduction needs a positive Casimir.
    #[error("Casimir must be positive, got {0}")]
    NonPositiveCasimir(f64),
    /// Global constraint machinery needs a nonzero damping rate on pair B.
    #[error("pair B damping rate is zero; global constraint cannot be solved for J2_B")]
    ZeroGammaB,
    /// State does not lie on the global constraint surface.
    #[error("state is off the constraint surface: |J| = {j_abs:e}")]
    OffSurface { j_abs: f64 },
    /// Point outside the classically allowed radial band.
    #[error("z = {z} outside the turning-point band [{z_minus}, {z_plus}]")]
    TurningPoint { z: f64, z_minus: f64, z_plus: f64 },
    /// Adaptive quadrature failed to reach the requested tolerance.
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    /// Input outside the validity domain of a spectrum formula.
    #[error("domain violation: {0}")]
    Domain(String),
    /// Negative radicand in a branch-exponent formula.
    #[error("negative radicand {0} in spectrum formula")]
    RadicalDomain(f64),
    /// Discretization too coarse for the requested eigenvalue accuracy.
    #[error("grid too coarse: estimated relative error {estimate:e} on level {level}")]
    GridTooCoarse { level: usize, estimate: f64 },
    /// Rejection sampler exhausted its attempt budget.
    #[error("no admissible constraint completion found after {0} attempts")]
    SamplingExhausted(usize),
    /// Filesystem problem while reading configs or writing outputs.
    #[error("{0}")]
    Io(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
