//! Exact-arithmetic deformation theory at desk scale: Deligne 2-groupoids of
//! nilpotent DGLAs over `Q[t]/(t^N)`, Hochschild cochain DGLAs of finite
//! dimensional algebras, cosimplicial vector spaces with explicit subdivision
//! homotopies, descent data and matrix algebras over finite covers, and a
//! constructive strictification of stacks over the resulting cosimplicial
//! DGLAs. Every identity is verified exactly; there are no floats anywhere.

pub mod coefficients;
pub mod descent;
pub mod dgla;
pub mod error;
pub mod gmat;
pub mod hochschild;
pub mod linalg;
pub mod report;
pub mod selftest;
pub mod simplicial;
pub mod stacks;
pub mod testutil;

pub use coefficients::{ArtinRing, RElement, Rational};
pub use error::CoreError;
