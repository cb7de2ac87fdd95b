//! Lie point symmetries of second-order evolution equations in two space
//! dimensions: symbolic calculus on jet space, determining systems, exact
//! solution of polynomial ansätze, Lie algebra tools, similarity reduction
//! and residual-based verification.

pub mod ansatz;
pub mod expr;
pub mod inverse;
pub mod io;
pub mod lie;
pub mod linalg;
pub mod mpoly;
pub mod parallel;
pub mod pde;
pub mod reduction;

pub use expr::{Assumptions, Expr, FnAtom, FuncKind, Indep, Jet, Point, Rational, Symbol, Var};
