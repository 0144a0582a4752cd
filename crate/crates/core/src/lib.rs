//! SumComp: digital over-the-air computation on the ring of integers.
//!
//! Nodes map integers onto a 2-D lattice so that the superposition of their
//! symbols on a multiple-access channel is itself a lattice point that decodes
//! to the sum of the inputs. Nomographic functions ride on top of that sum.

pub mod analytic;
pub mod channel;
pub mod codec;
pub mod harness;
pub mod nomographic;
pub mod ring;

pub use codec::{Constellation, GridSubset, SumCompCode};
pub use ring::{BezoutPair, GaussianInt, RingParams, RingPoint};
