//! Certification of the convex-geometric hypotheses under which the
//! complement of a closed convex set in `C^n` is an Oka domain, together
//! with the constructive pieces behind them: regularized maxima, strongly
//! convex outer approximations, the Cayley transform and an attracting
//! basin simulator for explicit automorphisms of `C^2`.

pub mod basin;
pub mod certify;
pub mod convex;
pub mod exec;
pub mod gallery;
pub mod geometry;
pub mod linalg;
pub mod lp;
pub mod rational;
pub mod sampling;
pub mod smoothing;
pub mod stability;

pub use convex::{ConvexError, ConvexSet, ConvexSetSpec};
pub use exec::Execution;
pub use geometry::{AffineSubspaceC, AffineSubspaceR, ComplexPoint};
