//! Symbol-wise (ML) versus bit-wise (max-log BICM) decoding of coded
//! modulation over Gray-labeled PAM.
//!
//! The crate is organized along the signal path and the analysis built on it:
//!
//! - [`constellation`]: PAM points, binary labelings, error vectors.
//! - [`codebook`]: binary linear block codes, feedforward convolutional
//!   encoders and their trellises.
//! - [`channel`]: AWGN and i.i.d. Rayleigh transmission, per-trial RNG streams.
//! - [`demapper`]: max-log L-values and their exact piecewise-linear form.
//! - [`decoder`]: the symbol-wise and bit-wise decoders (exhaustive + Viterbi).
//! - [`analysis`]: symbol metric difference statistics, normalized distances,
//!   pairwise error probabilities and asymptotic loss.
//! - [`code_loss`]: asymptotic loss of whole codes and structural checks.
//! - [`sim`]: Monte Carlo PEP and BER experiments.
//! - [`report`]: CSV rendering of analysis and simulation results.

pub mod analysis;
pub mod channel;
pub mod code_loss;
pub mod codebook;
pub mod constellation;
pub mod decoder;
pub mod demapper;
mod error;
#[cfg(test)]
mod invariants;
pub mod report;
pub mod sim;
pub mod special;

pub use error::Error;

/// Shorthand for results carrying the crate [`Error`].
pub type Result<T> = std::result::Result<T, Error>;
