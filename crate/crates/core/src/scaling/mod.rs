//! Finite-length scaling laws.
//!
//! [`laws`] holds the closed forms for given `(alpha, beta, mu0, s)`;
//! [`predict`] resolves those parameters from a scaling table.

pub mod laws;
pub mod predict;
pub mod quad;
pub mod special;

pub use laws::Rates;
pub use predict::{Model, OlmosBaseline, Predictor, RatePrediction};
pub use special::{mu0, Mu0};
