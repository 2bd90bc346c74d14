//! Linear codes against insertions and deletions built from
//! synchronization strings, with an adversarial channel harness.

pub mod basecode;
pub mod channel;
pub mod codec;
pub mod config;
pub mod binaryinsdel;
pub mod editmetrics;
pub mod experiment;
pub mod error;
pub mod fulllinear;
pub mod gf;
pub mod halflinear;
pub mod syncstring;

pub use error::{Error, Result};
pub use codec::{Codec, CodecRegistry, DynCodec};
pub use gf::{Fe, Field};
