//! Exact homological algebra for path coalgebras of finite quivers and their
//! dual completed path algebras.
//!
//! The crate is organised bottom-up:
//!
//! - [`exactlin`]: exact rank, kernel and cokernel over `Q` or `F_p`;
//! - [`quiver`]: quivers, path enumeration and the bounded-growth gate;
//! - [`pathcoalg`]: the coalgebra `C = kQ` and the truncated dual algebra `A = C*`;
//! - [`repmod`]: finite-dimensional nilpotent representations (= finite-dimensional
//!   comodules and rational modules), hom spaces, duality and twisting;
//! - [`homology`]: resolutions, Ext groups, the rational functor, `Hom(-, C)` and
//!   local cohomology of `A`;
//! - [`regularity`]: AS-regularity, the Nakayama automorphism, Serre and
//!   Calabi-Yau checks.

pub mod error;
pub mod exactlin;
pub mod homology;
pub mod pathcoalg;
pub mod quiver;
pub mod regularity;
pub mod repmod;

pub use error::{Error, Result};
pub use exactlin::{FieldSpec, Matrix, Scalar};
pub use pathcoalg::{BigradedDims, DualElement, PathCoalgebra};
pub use quiver::{growth_gate, parse_quiver, GrowthVerdict, Path, Quiver};
pub use repmod::{Rep, Side, VertexTwist};
