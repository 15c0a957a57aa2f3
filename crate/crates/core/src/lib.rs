//! Routed quantum circuits: route algebra, validity checking and numerical
//! certification of the resulting superoperators.

pub mod catalog;
pub mod cli;
pub mod graph;
pub mod rel;
pub mod tensor;
pub mod validity;
