//! Simulator for a neutral detector moving past a harmonic dipole chain:
//! classical mean-field chain response, the discrete lattice as a brute-force
//! check, and quantum phonon/detector excitation for localized and
//! superposed detector trajectories.

pub mod cli;
pub mod discrete;
pub mod io;
pub mod meanfield;
pub mod modes;
pub mod params;
pub mod quad;
pub mod quantum;
pub mod specfun;
pub mod superpose;
