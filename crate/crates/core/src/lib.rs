//! Phase-space tools for a single continuous-variable mode: states on a
//! position grid, Wigner/Husimi/characteristic transforms, the coherent-state
//! POVM and its channel, dephasing master equations and diagnostics.

pub mod analysis;
pub mod error;
pub mod grid;
pub mod io;
pub mod lindblad;
pub mod povm;
mod spectral;
pub mod states;
pub mod transforms;

pub use error::{Error, Result};
pub use grid::{fourier_dual, gaussian_convolve, make_grid, Field2D, Grid1D, PhaseSpaceGrid};
pub use states::{cat_state, coherent_state, density_from_pure, fock_state, CoherentLabel, DensityMatrix, WaveFunction};
pub use transforms::{CharacteristicFunction, HusimiFunction, WignerFunction};
