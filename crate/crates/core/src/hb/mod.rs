//! Periodic solutions of quasi-linear equations `L(d/dt; λ) x = f(x; λ)`.
//!
//! A 2π/w-periodic solution is sought as `x(wt)` with
//! `x(t) = r (π^{-1/2} sin t + h(t))`, where `r` is the first-harmonic
//! amplitude and `h` has no first harmonic. The unknowns `(w, λ, h)` are
//! encoded as a triple `(u, v, y)` with `u + iv = L(wi; λ)` and
//! `y = L(w d/dt; λ) h`, and solutions are fixed points of
//!
//! ```text
//! A_r(u, v, y) = r⁻¹ (⟨f, π^{-1/2} sin⟩, ⟨f, π^{-1/2} cos⟩, Q f),   f = f(x(t); λ).
//! ```
//!
//! Picard iteration on `A_r` for every `r` on a geometric grid traces the
//! branch of cycles from zero amplitude to infinity.

mod nonlinearity;
mod operator;
mod spectral;
mod symbol;
mod theorem;
mod validate;

pub use nonlinearity::{LipschitzReport, Nonlinearity};
pub use operator::{dyadic_refine, geometric_grid, HarmonicBalance, HbBranchPoint, HbConfig, ImageOfAr, Sweep, SweepFailure};
pub use spectral::{apply_symbol, solve_q, QCoeffs, Spectral, TrigPoly, TripleState};
pub use symbol::{Coefficient, NewtonOutcome, SymbolPolynomial, SymbolValue};
pub use theorem::{check_theorem_conditions, SearchBox, TheoremReport};
pub use validate::{validate_solution, ValidationReport};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HbError {
    #[error("symbol degree must be at least 2, got {0}")]
    DegreeTooLow(usize),
    #[error("J(w, λ) is degenerate at (w, λ) = ({w}, {lambda}): det = {det}")]
    Degenerate { w: f64, lambda: f64, det: f64 },
    #[error("Newton iteration did not converge after {iterations} steps: (w, λ) = ({w}, {lambda}), residual {residual}")]
    NotConverged {
        iterations: usize,
        w: f64,
        lambda: f64,
        residual: f64,
    },
    #[error("resonance: |L({n}wi; λ)| = {modulus} at (w, λ) = ({w}, {lambda})")]
    Resonance {
        n: usize,
        w: f64,
        lambda: f64,
        modulus: f64,
    },
    #[error("state norm {norm} leaves the ball of radius {q}")]
    OutOfBall { norm: f64, q: f64 },
    #[error("frequency must stay positive, got w = {w}")]
    NonPositiveFrequency { w: f64 },
    #[error("Picard iteration did not contract within {iterations} steps (estimate {estimate}, increment {residual})")]
    NonContraction {
        iterations: usize,
        estimate: f64,
        residual: f64,
    },
    #[error("sublevel set |L(wi; λ)| ≤ {q} reaches the search box boundary (margin {margin}); enlarge the box or shrink q")]
    InconclusiveBox { q: f64, margin: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
