//! Exact symbolic expressions for jet-space computations.
//!
//! An [`Expr`] is a reduced quotient of integer polynomials whose variables
//! are chart symbols or opaque atoms (`exp`, `sin`, `cos`, `sqrt`). Purely
//! rational expressions have a unique canonical form, so "vanishes
//! identically" is decided exactly; atoms fall back to seeded sampling.

pub mod chart;
pub mod error;
pub mod eval;
pub mod expr;
pub mod gcd;
pub mod linsolve;
pub mod poly;
pub mod print;
pub mod var;
pub mod zero;

pub use chart::Chart;
pub use error::{ExprError, SolveError};
pub use eval::Numeric;
pub use expr::{squarefree_factors, Expr};
pub use linsolve::{determinant, invert, solve_linear, solve_relations};
pub use poly::{Int, Mono, Poly};
pub use var::{Func, Var};
pub use zero::{Sampler, SignCount, ZeroVerdict};

/// Canonical form of an expression. Construction already normalizes, so this
/// is the identity on values and exists for callers that want it explicit.
pub fn normalize(e: &Expr) -> Expr {
    Expr::from_polys(e.num().clone(), e.den().clone()).expect("canonical expressions have nonzero denominators")
}
