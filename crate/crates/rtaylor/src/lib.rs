//! Joint spectra of commuting operator tuples and Ruelle-Taylor resonances
//! for explicit linear models of Anosov `R^kappa` actions.
//!
//! The crate is organized around the Koszul complex of a commuting tuple:
//!
//! * [`koszul`] — exterior algebra, Koszul differentials and divergences,
//!   cohomology dimensions and the Fredholm index;
//! * [`jointspec`] — joint eigenvalues, generalized weight spaces and
//!   spectral projectors of commuting matrix tuples;
//! * [`parametrix`] — averaged propagators `R(lambda)`, the operator
//!   `F(lambda)` and the resonance detectors they induce;
//! * [`models`] — suspensions of hyperbolic toral automorphisms, their
//!   products and a rank-2 Cartan action on `T^3`;
//! * [`galerkin`] — anisotropically weighted Fourier truncations of twisted
//!   transfer operators and the trusted resonance window;
//! * [`measures`] — physical measures by cone-averaged Birkhoff sums,
//!   correlation functions and mixing classification.

pub mod error;
pub mod galerkin;
pub mod io;
pub mod jointspec;
pub mod koszul;
pub mod linalg;
pub mod measures;
pub mod models;
pub mod parametrix;
pub mod tuples;

pub use error::{Error, Result};
