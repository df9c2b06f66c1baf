//! Quantum mutual information between planar dispersive bodies.
//!
//! The weak-coupling mutual information of two (or three) bodies in two
//! spatial dimensions equals an integral over an auxiliary coupling `λ` of the
//! thermal Casimir free energy of the same bodies viewed as flat plates in
//! three dimensions. This crate discretizes the plates into triangles,
//! assembles Galerkin matrices of the Coulomb kernel `1/(4π|x − x'|)`, and
//! evaluates the free-energy differences and their `λ` integrals.
//!
//! Modules, bottom-up:
//!
//! * [`geometry`]: triangle meshes of discs, rectangles and polygons.
//! * [`kernel`]: Coulomb-kernel Galerkin matrices, singular pairs included.
//! * [`scattering`]: `K(λ) = λ·diag(area) + G` and generalized capacitances.
//! * [`entropy`]: `ΔF(λ)` by two routes, mutual and tripartite information.
//! * [`analytic`]: closed-form disc capacitance and large-separation results.
//! * [`worldline`]: Dirichlet worldline Monte Carlo cross-check.
//! * [`selftest`]: the invariant suite run by `qmi selftest`.

pub mod analytic;
pub mod entropy;
mod error;
pub mod geometry;
pub mod io;
pub mod kernel;
pub mod quadrature;
pub mod scattering;
pub mod selftest;
pub mod worldline;

pub use error::{Error, Result};
