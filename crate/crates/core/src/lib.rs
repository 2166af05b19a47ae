//! Coupled quantum tops: exact symmetry reduction of the two-spin Hamiltonian,
//! eigenvalues near the symmetry point, random-matrix predictions and
//! ensemble statistics, and the classical limit on two spheres.

pub mod classical;
pub mod cli;
pub mod eigen;
pub mod linalg;
pub mod model;
pub mod quad;
pub mod rmt;
pub mod sparse;
pub mod special;
pub mod spinops;
pub mod stats;
