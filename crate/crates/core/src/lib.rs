//! Simulation and finite-length scaling laws for spatially coupled LDPC
//! codes on the binary erasure channel.
//!
//! The crate is organized bottom-up:
//!
//! * [`ensemble`] samples Tanner graphs of the `(dv, dc, L, N)` coupled
//!   ensemble and BEC erasure patterns;
//! * [`peeling`] runs the instrumented peeling decoder;
//! * [`window`] runs the sliding-window decoder;
//! * [`evolution`] estimates the threshold and every scaling parameter;
//! * [`scaling`] evaluates the FER/BER/BLER predictors;
//! * [`montecarlo`] runs error-rate experiments and compares them with the
//!   predictions.

pub mod ensemble;
pub mod error;
pub mod evolution;
pub mod montecarlo;
pub mod peeling;
pub mod scaling;
pub mod seed;
pub mod window;

pub use ensemble::{
    sample_erasures, sample_graph, CnAssignment, EnsembleParams, ErasurePattern, TannerGraph,
    Termination,
};
pub use error::{Error, Result};
pub use peeling::{classify_residual, peel, DecodeTrace, Outcome, ResidualClass};
pub use window::{run_frame, window_decode, Decoder, WindowConfig, WindowOutcome};

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    format!("{x:.16e}")
}
