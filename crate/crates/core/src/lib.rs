//! Truth-serum aggregation of classifier ensembles.
//!
//! Base learners vote on each instance; the aggregators in [`mts`] compare
//! how popular each answer actually is with how popular the members
//! predicted it would be, and follow a "surprisingly popular" minority.

pub mod baselines;
pub mod bts;
pub mod data;
pub mod error;
pub mod harness;
pub mod learners;
pub mod mts;
pub mod rng;
pub mod theory;

pub use data::{Dataset, PredictionMatrix, VoteProfile};
pub use error::{MtsError, Result};
pub use rng::SeededRng;
