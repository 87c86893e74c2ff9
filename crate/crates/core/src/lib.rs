//! Newton polyhedra of polynomial phases and the decay of oscillatory integrals.
//!
//! The exact side ([`polytope`], [`ladder`]) works over the rationals; the
//! numerical side ([`nondegeneracy`], [`bounds`], [`quadrature`]) uses doubles.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod fit;
pub mod ladder;
pub mod linalg;
pub mod nondegeneracy;
pub mod phase;
pub mod polytope;
pub mod quadrature;
pub mod rational;

pub use error::{Error, Result};
pub use phase::{CutoffKind, CutoffSpec, Multidegree, NumericPoly, Phase};
pub use polytope::{Face, NewtonPolyhedron};
pub use rational::Q;
