//! Physical realizability of linear systems as open quantum harmonic
//! oscillators.
//!
//! Given a real LTI triple `(A, B, C)` this crate decides how many vacuum
//! noise channels must be added for the system to be implementable as a
//! quantum system, builds a realization `(R, Λ, B1, D1)` that achieves that
//! count, and verifies every algebraic identity the construction relies on.
//!
//! ```
//! use qrealize::{fixtures, realizability, linalg::TolerancePolicy};
//!
//! let sys = fixtures::reference_system();
//! let count = realizability::minimal_noise_count(&sys, &TolerancePolicy::default()).unwrap();
//! assert_eq!((count.r, count.n_v), (4, 6));
//! ```

pub mod cli;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod linalg;
pub mod realizability;
pub mod synthesis;

pub use error::{Error, Result};
pub use linalg::TolerancePolicy;
pub use realizability::{LtiSystem, NoiseCount, ResidualReport, SkewReport};
pub use synthesis::{MinimalityCertificate, Realization, Synthesis};
