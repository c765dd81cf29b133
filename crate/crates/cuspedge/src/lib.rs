//! Geometric invariants of surfaces with cuspidal-edge singularities.
//!
//! The crate takes a parametrized surface given by closed-form coordinate
//! expressions, locates and traces its singular curve, and computes the
//! curvature invariants of the edge (singular curvature, limiting normal
//! curvature, cuspidal curvature, cusp-directional torsion) together with a
//! classification of the singularities of the unit normal viewed as a map to
//! the sphere.

pub mod classify;
pub mod exec;
pub mod expr;
pub mod frontal;
pub mod invariants;
pub mod jet;
pub mod locus;
pub mod numeric;
pub mod report;
pub mod spherical;
pub mod surface;
pub mod tol;

pub use expr::{parse_expression, ExprAst, ExprError};
pub use jet::{Jet1, Jet2, JetError, Scalar, Vec3, V3};
pub use surface::SurfaceDefinition;
pub use tol::Tolerances;
