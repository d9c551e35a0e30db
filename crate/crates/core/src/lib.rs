//! Mass-constrained ground states of the cubic-quintic Schrödinger energy
//!
//! ```text
//! E(φ) = 1/2 ∫|∇φ|² + 1/2 ∫V|φ|² + κ/4 ∫|φ|⁴ + 1/6 ∫|φ|⁶,   ∫|φ|² = N,
//! ```
//!
//! in dimension `d ≤ 3` with a trap `V(x) ~ C0 |x|^p`, and their
//! Thomas-Fermi limit as `N → ∞`.

pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod io;
pub mod minimizer;
pub mod oracle;
pub mod potentials;
pub mod quadrature;
pub mod run;
pub mod thomas_fermi;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{RadialField, RadialGrid};
pub use minimizer::{GroundState, Kappa, SolverConfig};
pub use potentials::PotentialSpec;
pub use thomas_fermi::TfProfile;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/potentials.md")]
    mod potentials {}
    #[doc = include_str!("../../../book/src/thomas-fermi.md")]
    mod thomas_fermi {}
    #[doc = include_str!("../../../book/src/grid.md")]
    mod grid {}
    #[doc = include_str!("../../../book/src/ground-states.md")]
    mod ground_states {}
    #[doc = include_str!("../../../book/src/diagnostics.md")]
    mod diagnostics {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
