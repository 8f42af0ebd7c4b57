//! A dyadic interval sieve over [0, 1] that constructs explicit real numbers
//! whose multiples by a growth sequence `t_n` (typically a polynomial such as
//! `n^2`) stay far from the integers: every surviving `α` satisfies
//! `n · ln n · ‖α · t_n‖ > 1/c` across the sieved range, with `‖·‖` the
//! distance to the nearest integer.
//!
//! The construction removes, at stage `n`, a neighborhood of radius
//! `δ_n/t_n = 1/(c · n · ln n · t_n)` around every rational `a/t_n`, covered
//! by dyadic cells at level `l_n` (`2^{l_n} ≤ 2 t_n/δ_n < 2^{l_n+1}`). What
//! survives every stage is a Cantor-type set; a witness is extracted as the
//! midpoint of a surviving cell and certified independently with exact
//! rational arithmetic.
//!
//! Modules follow the pipeline:
//!
//! - [`dyadic`] — exact dyadic fixed-point arithmetic and certified enclosures;
//! - [`sequence`] — the growth sequences `t_n` and their validation;
//! - [`params`] — the parameter system `c`, `δ_n`, `h(n)`, levels `l_n`, ladders;
//! - [`sieve`] — survivor-set construction inside a dyadic window;
//! - [`witness`] — witness extraction and exact certification;
//! - [`validate`] — empirical measure-retention checks and the dimension
//!   counting estimate;
//! - [`config`] / [`report`] — reproducible runs, reports, manifests.

pub mod config;
pub mod dyadic;
pub mod params;
pub mod report;
pub mod sequence;
pub mod sieve;
pub mod validate;
pub mod witness;

pub use config::{RunConfig, WindowSpec};
pub use params::{CMode, HMode, Ladder, SieveParams};
pub use sequence::{ExactValue, GrowthSequence};
pub use sieve::{DyadicCell, DyadicSet, SurvivorState, ZoomStrategy};
pub use witness::{DyadicRational, WitnessCertificate};
