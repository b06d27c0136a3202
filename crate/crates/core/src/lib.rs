//! Information distance over finite lists of byte strings.
//!
//! Complexity is approximated either by a lossless compressor
//! ([`compress`]) or, at desk scale, computed exactly for a small prefix
//! machine ([`toylab`]). [`estimate`] turns a complexity source into list
//! and pair distances, [`overlap`] builds the shared-program graph
//! construction for lists, and [`harness`] runs the empirical checks of the
//! metric, additivity and normalization properties.

pub mod complexity;
pub mod compress;
pub mod error;
pub mod estimate;
pub mod harness;
pub mod model;
pub mod overlap;
pub mod toylab;

pub use complexity::{ComplexityEstimate, ComplexitySource, Mode};
pub use compress::{Compressor, CompressorProfile, ExternalCommand, SizeCache};
pub use error::{Error, Result};
pub use model::{canonicalize, decode_list, encode_list, ByteString, StringList};
