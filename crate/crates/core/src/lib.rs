//! Thermometry on graphs.
//!
//! A single excitation hopping on a connected simple graph has the graph
//! Laplacian `L = D - A` as its Hamiltonian. Put in contact with a bath at
//! temperature `T` it relaxes to the Gibbs state `exp(-L/T)/Z`, and the
//! precision with which `T` can be inferred from that state is governed by
//! the Fisher information of the chosen measurement. This crate builds the
//! graphs, diagonalizes their Laplacians and evaluates
//!
//! * the quantum Fisher information (energy measurement, the optimal one),
//! * the Fisher information of a vertex (position) measurement,
//! * their low- and high-temperature approximations and bounds,
//! * the l1 coherence of the Gibbs state in the vertex basis,
//!
//! and checks the Cramér–Rao chain by Monte Carlo maximum-likelihood
//! estimation.
//!
//! Energies and temperatures are dimensionless (`k_B = 1`, hopping
//! amplitude 1).
//!
//! ```
//! use topotherm::{Family, spectral, thermo::ThermalModel};
//!
//! let g: topotherm::Graph = "complete:5".parse::<Family>().unwrap().build().unwrap();
//! let s = spectral::spectrum(&g, spectral::DEFAULT_GROUP_TOL).unwrap();
//! let m = ThermalModel::new(&s, 2.0).unwrap();
//! let closed = topotherm::thermo::qfi_complete(5, 2.0);
//! assert!((m.qfi() - closed).abs() < 1e-12 * closed);
//! ```

pub mod analysis;
mod descriptor;
mod error;
pub mod estimation;
pub mod graph;
mod optimize;
pub mod spectral;
pub mod thermo;

pub use descriptor::parse_edge_list;
pub use error::{Error, Result};
pub use graph::{Boundary, DegreeStats, Family, Graph};
pub use optimize::{bisect, golden_section_max, GoldenSectionResult};
pub use spectral::{Level, Spectrum, SpectrumSource};
pub use thermo::{FisherReport, ThermalModel};
