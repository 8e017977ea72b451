#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod envelopes;
pub mod error;
pub mod grid;
pub mod kernels;
pub mod maximal;
pub mod quadrature;
pub mod specfun;
pub mod verify;

pub use envelopes::EnvelopeConstants;
pub use error::{Error, Result};
pub use grid::GridSpec;
pub use kernels::{HeatPoint, KernelValue, SeriesTruncation};
pub use specfun::JacobiParams;
