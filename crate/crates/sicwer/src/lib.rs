//! Successive interference cancellation decoders for random Gaussian linear
//! models, with exact closed-form word error rates and a reproducible
//! Monte-Carlo engine to cross-validate them.
//!
//! Given `y = A x̂ + v` with i.i.d. standard Gaussian `A` and Gaussian noise
//! `v ~ N(0, σ²I)`, the crate provides:
//!
//! - [`decoder`] — thin QR reduction and the OSIC (nearest-plane) and BSIC
//!   (box-clamped) back-substitution decoders;
//! - [`special`] — the scalar probabilities `P_k` and `P̄_k(η)` built from
//!   gamma ratios and cosine-power integrals;
//! - [`wer`] — closed-form word error rates for both decoders, their square
//!   and cube specializations, dimension-ratio identities, and PAM SNR↔σ
//!   conversion;
//! - [`sim`] — deterministic, worker-count-independent Monte-Carlo
//!   experiments for every closed-form quantity;
//! - [`cli`] — the `sicwer` command line (`formula`, `simulate`, `compare`,
//!   `sweep`, `selfcheck`) emitting stable CSV.
//!
//! ```
//! use sicwer::wer;
//!
//! // Exact WER of the OSIC decoder for a square 10×10 model at σ = 0.2.
//! let wer = wer::wer_osic(10, 10, 0.2).unwrap();
//! assert!(wer > 0.0 && wer < 1.0);
//! // The square-case specialization is the same number.
//! let square = wer::wer_osic_square(10, 0.2).unwrap();
//! assert!((wer - square).abs() < 1e-12);
//! ```
//!
//! Runnable walkthroughs live in `examples/`; each one covers a capability:
//!
//! ```text
//! cargo run --release -p sicwer --example decode_basics
//! cargo run --release -p sicwer --example scalar_success
//! cargo run --release -p sicwer --example formula_sweep
//! cargo run --release -p sicwer --example monte_carlo_compare
//! cargo run --release -p sicwer --example snr_curves
//! cargo run --release -p sicwer --example osic_vs_bsic_convergence
//! cargo run --release -p sicwer --example qr_diagonal_stats
//! ```

pub mod cli;
pub mod decoder;
mod error;
pub mod sim;
pub mod special;
pub mod wer;

pub use error::{Error, Result};
