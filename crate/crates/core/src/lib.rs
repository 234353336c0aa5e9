//! Circuit lower bounds through network coding: shift circuits become
//! multiple-unicast networks whose flow rate bounds the circuit size.
//!
//! Numeric code is generic over [`scalar::Scalar`]; the aliases below pick
//! the common instantiations.

pub mod bits;
pub mod circuit;
pub mod correction;
pub mod flow;
pub mod funcgen;
pub mod netcode;
pub mod reduction;
pub mod scalar;

pub use bits::BitString;
pub use circuit::{Circuit, CircuitBuilder, GateFn, NodeId};
pub use scalar::Scalar;

/// Exact rational scalar.
pub type Rational = num_rational::BigRational;

pub type FlowSolutionF32 = flow::FlowSolution<f32>;
pub type FlowSolutionF64 = flow::FlowSolution<f64>;
pub type ExactFlowSolution = flow::FlowSolution<Rational>;

pub type ModeAReportF64 = reduction::ModeAReport<f64>;
pub type ExactModeAReport = reduction::ModeAReport<Rational>;
pub type ModeBReportF64 = reduction::ModeBReport<f64>;
pub type ExactModeBReport = reduction::ModeBReport<Rational>;
