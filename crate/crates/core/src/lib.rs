//! Ground states, reduced atomic states and quantum Fisher information of the
//! single-mode Dicke model near its superradiant transition.

pub mod eigen;
pub mod error;
pub mod ground;
pub mod hamiltonian;
pub mod overlap;
pub mod params;
pub mod qfi;
pub mod scaling;
pub mod spin;
pub mod thermo;

pub use error::{Error, Result};
pub use params::{critical_coupling, linear_grid, BasisIndex, ModelParams, TruncationSpec};
