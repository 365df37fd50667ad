//! Exact arithmetic for finitely generated ordered rings of Puiseux
//! polynomials, their p-adic extension data, and the special sequences
//! whose generalized-polynomial systems they encode.

pub mod dio;
pub mod error;
pub mod field;
pub mod genpoly;
pub mod lattice;
pub mod padic;
pub mod poly;
pub mod puiseux;
pub mod ringlab;
pub mod scalar;
pub mod syntax;
pub mod workspace;

pub use error::{Error, Result};
pub use field::{FieldElem, NumberField, PrecisionCtx};
pub use padic::{PadicAssignment, PadicTrunc};
pub use poly::{IntPoly, MPoly, Monomial};
pub use puiseux::PuiseuxPoly;
pub use ringlab::{RingPresentation, Verdict, VerdictKind};
pub use scalar::{Domain, Scalar, SymbolTable};
pub use syntax::{parse_expr, Expr};
pub use workspace::{GenKind, WorkspaceSpec};
