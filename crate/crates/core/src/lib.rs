//! Dimension-checked relation catalog spanning Planck to Hubble scales, and a
//! desk-scale stochastic-mechanics laboratory.
//!
//! Core types are generic over the floating-point scalar ([`Real`]); the
//! aliases below fix it to `f64`, which is what the command-line tool uses.

pub mod dimension;
pub mod dsl;
pub mod engine;
pub mod quantity;
pub mod registry;
pub mod scalar;
pub mod sim;

pub use dimension::{Base, DimOp, Dimension, Exponent};
pub use quantity::{format_sig9, ArithOp, CoincidenceVerdict, Quantity, QuantityError};
pub use registry::{ConstantRegistry, Provenance, RegistryEntry, RegistryError};
pub use scalar::Real;

pub type Quantity64 = Quantity<f64>;
pub type Quantity32 = Quantity<f32>;
pub type Registry64 = ConstantRegistry<f64>;
pub type Verdict64 = CoincidenceVerdict<f64>;
