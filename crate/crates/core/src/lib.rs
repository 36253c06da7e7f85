//! Bicomplex numbers, bicomplex Bergman-type spaces on product domains,
//! their reproducing kernels, and the associated orthogonal projections.
//!
//! Bicomplex numbers are stored in idempotent form `Z = β1 e + β2 e†` with
//! `β1, β2 ∈ C(i)`. Integrals over a product-type domain `Ω1 e + Ω2 e†` use
//! the product area measure in `(β1, β2)`.

pub mod algebra;
pub mod builtins;
pub mod error;
pub mod field;
pub mod hilbert;
pub mod kernels;
pub mod projections;
pub mod quadrature;
pub mod sampling;
mod soa;
pub mod verify;

pub use algebra::{BiComplex, Complex, Conjugation, HypOrder, Hyperbolic};
pub use error::{Error, Result};
pub use field::{FieldClass, FieldEval, ScalarField};
pub use quadrature::{PlanarDomain, ProductDomain, QuadratureRule, TensorGrid};
