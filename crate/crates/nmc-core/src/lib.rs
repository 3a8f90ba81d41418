//! Fractional (nonlocal) mean curvature of planar sets and bands.
//!
//! The library works with sets `E ⊂ R^2` whose fractional mean curvature of
//! order `alpha ∈ (0,1)` is
//!
//! ```text
//!     H_E(x) = - p.v. ∫_{R^2} tau_E(y) |x - y|^{-(2+alpha)} dy ,
//!     tau_E = 1_E - 1_{E^c} ,
//! ```
//!
//! with special support for horizontal bands `{(s1, s2) : -u(s1) < s2 < u(s1)}`
//! bounded by even periodic graphs. Modules:
//!
//! * [`quad`] — one dimensional quadrature engines (graded singular panels,
//!   oscillatory tails, kernel periodization) shared by everything else,
//! * [`kernels`] — the one dimensional kernel family `F, F1, F2, F3, P_R`
//!   obtained by integrating the interaction kernel across the band,
//! * [`series`] — even cosine series and finite increment helpers,
//! * [`graph`] — curvature of graph bands, the band operator `Phi(a, lambda, phi)`
//!   and its analytic derivatives,
//! * [`spectrum`] — eigenvalues of the linearized operator at the straight band,
//!   the critical half width `R*(alpha)`, and the transversality constant,
//! * [`branch`] — Newton continuation of the bifurcating branch of periodic bands,
//! * [`setgeom`] — ray-cast curvature of planar sets given only an indicator,
//!   the boundary-integral form, and tangential derivatives,
//! * [`eval`] — runtime registry of curvature evaluation strategies,
//! * [`verify`] — named self-check suites used by the CLI.

pub mod branch;
pub mod error;
pub mod eval;
pub mod graph;
pub mod kernels;
pub mod quad;
pub mod series;
pub mod setgeom;
pub mod spectrum;
#[cfg(test)]
pub(crate) mod testutil;
pub mod verify;

pub use error::{NmcError, Result};
pub use kernels::KernelContext;
pub use quad::QuadratureConfig;
pub use series::CosineSeries;
