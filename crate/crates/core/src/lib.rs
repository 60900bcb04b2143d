//! Channel resource estimation toolkit.
//!
//! Quantifies how useful a quantum channel is relative to a chosen free
//! theory, via semidefinite programming, and converts the resulting measures
//! into one-shot conversion rate brackets.
//!
//! Module map:
//! - [`linalg`]: dense complex matrix helpers (multi-index ops, spectra).
//! - [`chan`]: states, Choi matrices, Kraus families, channel application.
//! - [`theories`]: the six free-channel cones and membership tests.
//! - [`conic`]: a small declarative layer over the interior-point solver.
//! - [`monotones`]: robustness, relative-entropy and hypothesis-testing
//!   measures, diamond-norm distance, fidelity measures, channel entropy.
//! - [`rates`]: one-shot distillation and dilution brackets.
//! - [`superchan`]: free superchannel sampling for monotonicity probes.
//! - [`verify`]: batch property sweeps (ordering, collapse, monotonicity).
//! - [`targets`]: reference unit channels; [`io`]: JSON channel files;
//!   [`sample`]: seeded random inputs.
//!
//! All logarithms are base 2. Choi states are normalized to unit trace with
//! the channel input factor first.

pub mod chan;
pub mod conic;
pub mod error;
pub mod io;
pub mod linalg;
pub mod monotones;
pub mod rates;
pub mod sample;
pub mod superchan;
pub mod targets;
pub mod theories;
pub mod tol;
pub mod verify;

pub use chan::{
    apply_channel, fidelity, kraus_to_choi, tensor_power, ChannelSpec, ChoiMatrix, DensityMatrix,
};
pub use error::{Error, Result};
pub use linalg::CMat;
pub use theories::{TheoryKind, TheorySpec};
