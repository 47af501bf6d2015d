//! Exact computer algebra in Novikov completions of rational group rings.
//!
//! Everything here is built around one representation: a *weighted group* (a
//! finitely generated free or free abelian group together with a rational
//! weight homomorphism) and formal series over it whose support is controlled
//! from above. Series carry an explicit *cutoff*: the represented element is
//! known exactly on all group elements of weight strictly above the cutoff and
//! unspecified at or below it. Every operation propagates cutoffs so that
//! results are certified — no term above the stated cutoff is ever wrong.
//!
//! On top of the series arithmetic the crate provides:
//!
//! * [`regmat`] — square matrices over the series ring, the regularity
//!   criterion that makes `I - A` invertible (a maximum cycle-mean test on the
//!   support digraph, run in exact rational arithmetic), certified Neumann
//!   inversion, formal torsion classes, and abelianized determinants.
//! * [`hochschild`] — degree-one and degree-two Hochschild chains, the Dennis
//!   trace of a unit, and the weighted pairing that turns trace data into
//!   conjugacy-class series; two independent routes to the logarithm of a
//!   torsion class.
//! * [`orbits`] — eta and zeta functions attached to descent data (a finite
//!   family of regular matrices indexed by dimension).
//! * [`chains`] — finite free chain complexes, mapping cones, and the
//!   elimination that projects a cone onto a cokernel complex with its
//!   torsion class.
//!
//! All coefficients are exact rationals ([`num_rational::BigRational`]); there
//! are no floating point numbers anywhere. Operations are pure: they take
//! shared references and return fresh values, so everything is `Send + Sync`
//! and freely shareable across threads.

pub mod chains;
pub mod error;
pub mod genus2;
pub mod groups;
pub mod hochschild;
pub mod json;
pub mod level;
pub mod orbits;
pub mod regmat;
pub mod series;

pub use error::Error;
pub use groups::{ConjClass, GroupElement, GroupKind, GroupSpec, Weighting};
pub use level::Level;
pub use regmat::{RegularityCertificate, RingMatrix, Sign, TorsionClass};
pub use series::{AbelianSeries, ConjClassSeries, NovikovSeries};

/// Exact rational scalar used throughout the crate.
pub type Rational = num_rational::BigRational;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
