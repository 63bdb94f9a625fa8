//! Numerical laboratory for positive solitary waves of the repulsive Hartree
//! equation with an external Coulomb potential,
//!
//!   -Δχ + (|χ|² * 1/|x|) χ - χ/|x| + ω χ = 0   on R³,
//!
//! together with machine checks of the structural facts behind it: the
//! hydrogen spectrum of Δ + 1/|x|, the maximum-principle dichotomy at
//! ω = 1/4, Clarkson-type inequalities for the Coulomb quadratic form,
//! Pohozaev identities, and symmetry/uniqueness probes.

pub mod cartesian;
pub mod error;
pub mod functionals;
pub mod maxprinciple;
pub mod radial;
pub mod solver;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use functionals::FunctionalReport;
pub use radial::{Parity, RadialField, RadialGrid, SpacingKind};
pub use solver::{MinimizerResult, SolverConfig};
pub use verify::IdentityReport;
