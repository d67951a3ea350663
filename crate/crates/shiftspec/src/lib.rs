//! Spectral analysis of unilateral and bilateral weighted shift operators.
//!
//! The crate models weight sequences, computes the family of spectral
//! radii attached to a weighted shift, derives spectrum / local-spectrum
//! regions and local-spectral-theory classifications from them, and
//! cross-validates everything with independent truncation-based
//! numerical oracles.

pub mod classify;
pub mod corpus;
pub mod oracle;
pub mod radii;
pub mod report;
pub mod weights;
