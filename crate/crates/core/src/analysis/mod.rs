//! Criticality analysis built on the correlator, chain and RoM layers.

pub mod crossover;
pub mod finite_size;
pub mod fit;
pub mod global;
pub mod interp;
pub mod single_site;
pub mod symmetric;
