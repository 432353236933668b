//! Analytic models for pump-programmed ("virtual Bragg grating") χ⁽²⁾
//! interfaces between whispering-gallery resonators and free space.
//!
//! The crate is organised bottom-up: [`special`] and [`quadrature`] supply the
//! numerics, [`materials`] and [`selection`] the static physics, and
//! [`coupling`], [`farfield`], [`pumpdesign`] and [`budget`] the derived
//! quantities. [`scenario`] and [`report`] tie them into the command set used
//! by the `vbg` binary.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod budget;
pub mod constants;
pub mod coupling;
pub mod error;
pub mod farfield;
pub mod materials;
pub mod pumpdesign;
pub mod quadrature;
pub mod report;
pub mod scenario;
pub mod selection;
pub mod special;

pub use error::{Error, ErrorKind, Result};
pub use farfield::{FarFieldGrid, GridSpec};
pub use materials::{Chi2Tensor, CircularCoefficients, MaterialTable};
pub use pumpdesign::{FeasibilityRecord, PumpDesign, PumpHardware};
pub use report::{RunReport, Warning};
pub use scenario::Scenario;
pub use selection::{Channel, ChannelSet, Direction, Helicity, ResonatorSpec, WgmMode};
