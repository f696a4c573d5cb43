//! Computer algebra for chemical reaction networks.
//!
//! * [`net`]: networks, models, the text format, unions and joins.
//! * [`poly`]: exact polynomials, Gröbner bases, elimination.
//! * [`massaction`]: system polynomials, stoichiometry, steady-state ideals.
//! * [`lincomp`]: linear compartmental models, input-output equations and
//!   identifiability.
//! * [`invariants`]: elimination ideals of glued networks.
//! * [`mss`]: positive steady states and multistationarity witnesses.
//! * [`random`]: seeded instance generators.
//! * [`suites`]: seeded theorem-instance suites built on the generators.

pub mod error;
pub mod invariants;
pub mod lincomp;
pub mod linalg;
pub mod massaction;
pub mod mss;
pub mod net;
pub mod poly;
pub mod random;
pub mod suites;

pub use error::{Error, Result};
