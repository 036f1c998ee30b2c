//! Exterior-calculus finite elements for small-strain magneto-elastic statics.
//!
//! The library is organized in layers:
//!
//! - [`algebra`]: pointwise exterior algebra in a 3-dimensional real vector
//!   space — p-vectors, p-covectors, wedge and interior products, metric
//!   operations, Hodge star, volume form.
//! - [`valued`]: vector- and covector-valued p-forms, the dot-wedge pairing
//!   product, the stress isomorphism, symmetric/antisymmetric decomposition,
//!   and the valued Hodge operators.
//! - [`mesh`]: tetrahedral complexes with oriented incidence, cochains,
//!   Whitney reconstruction, per-element displacement gradients, traces to
//!   boundary faces, and integration.
//! - [`constitutive`]: energy densities, constitutive laws for stress and
//!   magnetic field intensity, the Maxwell stress mapping, and the deformed
//!   metric used by the energy-coupled model.
//! - [`solve`]: weak-form assembly, a Jacobi-preconditioned conjugate
//!   gradient solver, the single-physics and coupled solution drivers, and
//!   post-solve verification quantities.
//! - [`verify`]: the algebraic-identity and manufactured-solution check
//!   suites driven by the CLI `verify` command and the acceptance tests.
//!
//! All physical quantities are plain `f64` in SI-coherent units (Pa for the
//! Lamé parameters, reluctivity as inverse permeability); the library itself
//! is unit-agnostic.
//!
//! With the default `parallel` feature, element loops and sparse kernels run
//! on rayon; disabling it yields a fully sequential build with identical
//! public API.

pub mod algebra;
pub mod constitutive;
mod error;
pub mod mesh;
mod par;
pub mod solve;
pub mod valued;
pub mod verify;

pub use error::{Error, Result};
