//! Explicit equations for rank-2 shtuka moduli surfaces over the projective
//! line, and the elliptic-surface invariants of their degree-4 Γ₀ members.

pub mod fibration;
pub mod field;
pub mod geometry;
pub mod moduli;
pub mod poly;
pub mod sparse;
pub mod tate;

pub use fibration::{generic_fiber, FiberOptions, GenericFiber, QuarticModel, WeierstrassCurve};
pub use field::{make_field, Fe, FieldError, FiniteField};
pub use moduli::{
    CoeffForms, Deg3Case, Deg4Params, Deg4Shape, DivisorShape, LinearSystem, TriForm,
};
pub use poly::{Place, RatFn, UPoly};
pub use sparse::{RationalFunction, SparsePoly};
pub use tate::{analyze_surface, KodairaFiber, KodairaType, SurfaceMeta, SurfaceReport};
