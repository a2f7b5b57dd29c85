//! Operators of martingale-difference harmonic analysis on the N-torus.
//!
//! Trigonometric polynomials on `T^N` are held as sparse coefficient maps
//! ([`TrigPoly`]). On top of them sit the coordinate filtration operators
//! (conditional expectations, martingale differences), the one-variable
//! conjugate operators `H_j`, the lexicographic conjugate function
//! `H f = sum_j H_j d_j f`, and grid-sampled maximal functions.
//!
//! The [`brownian`] module builds the semi-discrete Brownian martingale
//! obtained by running independent planar Brownian motions one coordinate at
//! a time, and provides Monte Carlo harnesses for the weak-type estimates
//! that relate it to the maximal conjugate function. [`oracle`] holds an
//! independent dense-grid implementation used only for cross-validation.

pub mod brownian;
pub mod cli;
pub mod csvout;
pub mod error;
pub mod grid;
pub mod operators;
pub mod oracle;
pub mod trigpoly;
pub mod weaknorm;

pub use error::{Error, Result};
pub use grid::GridFunction;
pub use num_complex::Complex64;
pub use trigpoly::{FreqVector, PolydiskPoint, TrigPoly};
pub use weaknorm::WeakRatioRecord;
