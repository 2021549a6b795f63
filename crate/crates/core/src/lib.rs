//! Magic-state resources of the transverse-field XY chain.

pub mod analysis;
pub mod chain;
pub mod correlators;
pub mod error;
pub mod lanczos;
pub mod quadrature;
pub mod rom;
pub mod simplex;
pub mod stabilizer;
pub mod state;

pub use error::{Error, Result};
pub use rom::{global_magic, log_robustness, rom_closed_form, rom_lp, RomResult};
pub use stabilizer::StabilizerPolytope;
pub use state::PauliVector;
