//! Numerical toolkit for branches of periodic orbits that are born in a Hopf
//! bifurcation and grow without bound as a parameter crosses a finite range.
//!
//! Two families are covered:
//!
//! * planar Lotka–Volterra systems whose predator equation carries a
//!   competition–cooperation term ([`lv`], [`ode`], [`cycle`], [`branch`]);
//! * quasi-linear scalar equations `L(d/dt; λ) x = f(x; λ)` whose periodic
//!   solutions are fixed points of a harmonic-balance contraction ([`hb`]).
//!
//! The guide in `book/` walks through both with runnable snippets.

pub mod branch;
pub mod config;
pub mod cycle;
pub mod hb;
pub mod lv;
pub mod ode;
pub mod table;

pub use branch::{continue_planar, BranchOptions, BranchPoint, PlanarBranch, Verdict};
pub use cycle::{find_cycle, poincare_return, Cycle, CycleOptions, Direction, Section};
pub use lv::{EquilibriumInfo, InteractionTerm, LvSystem};
pub use ode::{integrate, OdeOptions, Trajectory};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/lotka_volterra.md")]
    mod lotka_volterra {}
    #[doc = include_str!("../../../book/src/cycles.md")]
    mod cycles {}
    #[doc = include_str!("../../../book/src/planar_branch.md")]
    mod planar_branch {}
    #[doc = include_str!("../../../book/src/harmonic_balance.md")]
    mod harmonic_balance {}
    #[doc = include_str!("../../../book/src/theorem_checks.md")]
    mod theorem_checks {}
    #[doc = include_str!("../../../book/src/command_line.md")]
    mod command_line {}
}
