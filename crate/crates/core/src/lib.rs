//! Exact dimension formulas for the non-genuine part of cuspidal Bianchi newform
//! spaces over imaginary quadratic fields.
pub mod arith;
pub mod basechange;
pub mod cm_counting;
pub mod derive;
pub mod dim_engine;
pub mod error;
pub mod invariants;
pub mod linsolve;
pub mod nongenuine;
pub mod report;

pub use error::{Error, Hypothesis, Result};
