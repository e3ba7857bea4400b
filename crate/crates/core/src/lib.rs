//! Eigenproblems and Feynman-clock time evolution solved as QUBO instances.
//!
//! A Hamiltonian's lowest eigenvector is found by repeatedly encoding the
//! shifted variational objective as a QUBO over a fixed-point window around
//! the current best coefficients, sampling it with simulated annealing, and
//! halving the window ("zooming"). Excited states come from projecting solved
//! states up the spectrum. Time evolution is recast as the zero-energy ground
//! state of a clock operator and solved with the same machinery on a complex
//! encoding. Every result can be checked against dense diagonalization.
//!
//! ```
//! use aqae::linalg::SymMatrix;
//! use aqae::solver::{solve_state, SolveParams};
//!
//! let h = SymMatrix::from_rows(&[vec![1.0, 0.2], vec![0.2, 2.0]]).unwrap();
//! let params = SolveParams { bits: 3, eta: 1.0, num_reads: 50, z_max: 10, ..Default::default() };
//! let trace = solve_state(&h, &params).unwrap();
//! let exact = aqae::linalg::spectrum(&h).unwrap()[0];
//! assert!((trace.best().energy - exact).abs() < 1e-4);
//! ```

pub mod annealer;
pub mod cli;
pub mod clock;
pub mod config;
pub mod error;
pub mod linalg;
pub mod models;
pub mod observables;
pub mod qubo;
pub mod solver;
pub mod table;
pub mod tolerances;

pub use error::{Error, Result};
pub use linalg::{HermMatrix, StateVector, SymMatrix};
pub use qubo::{Encoding, QuboInstance};
pub use solver::{SolveParams, SolveTrace};
