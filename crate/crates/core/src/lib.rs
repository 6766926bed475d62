//! Device-independent relativistic bit commitment: protocol simulation,
//! security bounds and brute-force adversary oracles.
//!
//! The numeric core is generic over [`scalar::Real`]; the aliases below fix
//! it to `f64`, with `f32` variants for memory-bound sweeps.

pub mod adversary;
pub mod bitmath;
pub mod geometry;
pub mod harness;
pub mod protocols;
pub mod quantum;
pub mod scalar;

pub use adversary::AdversaryError;
pub use bitmath::{BitString, BitmathError};
pub use geometry::{CausalRelation, InvalidLayout, LayoutViolation};
pub use harness::{CausalityFault, HarnessError};
pub use protocols::ProtocolError;
pub use quantum::QuantumError;

pub type SpacetimePoint = geometry::SpacetimePoint<f64>;
pub type ProtocolLayout = geometry::ProtocolLayout<f64>;
pub type Direction = quantum::Direction<f64>;
pub type DirectionSet = quantum::DirectionSet<f64>;
pub type SecurityBound = bitmath::SecurityBound<f64>;

pub type SpacetimePointF32 = geometry::SpacetimePoint<f32>;
pub type ProtocolLayoutF32 = geometry::ProtocolLayout<f32>;
pub type DirectionSetF32 = quantum::DirectionSet<f32>;
pub type SecurityBoundF32 = bitmath::SecurityBound<f32>;
