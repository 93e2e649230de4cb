//! Batched belief-propagation decoding of QC-LDPC block codes, LDPC
//! convolutional codes obtained by unwrapping them, and a pipelined stream
//! decoder over a circulant memory, with a Monte-Carlo simulation harness.

pub mod bp;
pub mod channel;
pub mod code_model;
pub mod error;
pub mod harness;
pub mod ldpccc;
pub mod oracle;

pub use error::{Error, Result};
